use serde_json::json;

use super::{fit_and_score, ExperimentReport, ReportRow, RunConfig};
use crate::data::{random_split, Dataset};
use crate::exec::map_indices;
use crate::models::ModelKind;
use crate::Result;

/// Row label of the gfNN whose filter won on validation accuracy.
pub const BEST_GFNN: &str = "gfnn-best";

/// Test accuracy per (dataset, model) over random splits with the dataset's
/// own split sizes, one split and initialization per seed. When several gfNN
/// filters are listed, an extra [`BEST_GFNN`] row reports, per seed, the
/// filter with the highest validation accuracy.
pub fn benchmark_table(
    datasets: &[Dataset],
    models: &[ModelKind],
    config: &RunConfig,
) -> Result<ExperimentReport> {
    config.validate()?;
    let seeds = &config.seeds;
    let mut report = ExperimentReport::new(
        "benchmark",
        json!({
            "datasets": datasets.iter().map(|d| &d.name).collect::<Vec<_>>(),
            "models": models.iter().map(|m| m.label()).collect::<Vec<_>>(),
            "run": config,
        }),
    );
    let gfnn: Vec<usize> = (0..models.len())
        .filter(|&i| matches!(models[i], ModelKind::Gfnn { .. }))
        .collect();

    for ds in datasets {
        let sizes = ds.splits.sizes();
        let results = map_indices(seeds.len(), config.exec, |i| {
            let seed = seeds[i];
            let split = random_split(ds, sizes, seed)?;
            models
                .iter()
                .map(|&m| fit_and_score(m, &split, &config.train_for(seed)))
                .collect::<Result<Vec<_>>>()
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

        for (mi, model) in models.iter().enumerate() {
            report.rows.push(ReportRow::new(
                &ds.name,
                model.label(),
                "test_accuracy",
                seeds.clone(),
                results.iter().map(|r| r[mi].test).collect(),
            ));
        }
        if !gfnn.is_empty() {
            let picks: Vec<usize> = results
                .iter()
                .map(|r| {
                    let mut best = gfnn[0];
                    for &i in &gfnn[1..] {
                        if r[i].val.unwrap_or(f64::NEG_INFINITY)
                            > r[best].val.unwrap_or(f64::NEG_INFINITY)
                        {
                            best = i;
                        }
                    }
                    best
                })
                .collect();
            let chosen: Vec<String> = picks.iter().map(|&i| models[i].label()).collect();
            report.rows.push(
                ReportRow::new(
                    &ds.name,
                    BEST_GFNN,
                    "test_accuracy",
                    seeds.clone(),
                    picks.iter().zip(&results).map(|(&i, r)| r[i].test).collect(),
                )
                .with_note(format!("selected by validation accuracy: {}", chosen.join(" "))),
            );
        }
    }
    Ok(report)
}
