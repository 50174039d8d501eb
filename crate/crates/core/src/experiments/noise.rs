use serde_json::json;

use super::{fit_and_score, fmt_setting, Check, ExperimentReport, ReportRow, RunConfig};
use crate::data::{add_noise, Dataset, NoiseSpec};
use crate::exec::map_indices;
use crate::models::ModelKind;
use crate::Result;

pub const DEFAULT_NOISE_SIGMAS: [f64; 5] = [0.01, 0.02, 0.03, 0.04, 0.05];

/// Test (and validation) accuracy of each model on the dataset's split with
/// white Gaussian noise of every `σ` added to the features. Noise and
/// initialization both use the trial seed.
pub fn noise_sweep(
    dataset: &Dataset,
    sigma_range: &[f64],
    models: &[ModelKind],
    config: &RunConfig,
) -> Result<ExperimentReport> {
    config.validate()?;
    for &sigma in sigma_range {
        NoiseSpec::feature(sigma, 0).validate()?;
    }
    let seeds = &config.seeds;
    let mut report = ExperimentReport::new(
        "noise-sweep",
        json!({
            "dataset": dataset.name,
            "sigmas": sigma_range,
            "models": models.iter().map(|m| m.label()).collect::<Vec<_>>(),
            "run": config,
        }),
    );

    let trials: Vec<(f64, u64)> = sigma_range
        .iter()
        .flat_map(|&s| seeds.iter().map(move |&seed| (s, seed)))
        .collect();
    let results = map_indices(trials.len(), config.exec, |t| {
        let (sigma, seed) = trials[t];
        let noisy = add_noise(&dataset.features, &NoiseSpec::feature(sigma, seed), None)?;
        let ds = dataset.with_features(noisy)?;
        models
            .iter()
            .map(|&m| fit_and_score(m, &ds, &config.train_for(seed)))
            .collect::<Result<Vec<_>>>()
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    for (si, &sigma) in sigma_range.iter().enumerate() {
        let setting = fmt_setting(&[("sigma", sigma)]);
        for (mi, model) in models.iter().enumerate() {
            let scores: Vec<_> = (0..seeds.len())
                .map(|j| results[si * seeds.len() + j][mi])
                .collect();
            report.rows.push(ReportRow::new(
                &setting,
                model.label(),
                "test_accuracy",
                seeds.clone(),
                scores.iter().map(|s| s.test).collect(),
            ));
            if scores.iter().all(|s| s.val.is_some()) {
                report.rows.push(ReportRow::new(
                    &setting,
                    model.label(),
                    "val_accuracy",
                    seeds.clone(),
                    scores.iter().map(|s| s.val.unwrap()).collect(),
                ));
            }
        }
    }

    add_checks(&mut report, sigma_range, models);
    Ok(report)
}

fn add_checks(report: &mut ExperimentReport, sigmas: &[f64], models: &[ModelKind]) {
    let (Some(&lo), Some(&hi)) = (
        sigmas.iter().min_by(|a, b| a.total_cmp(b)),
        sigmas.iter().max_by(|a, b| a.total_cmp(b)),
    ) else {
        return;
    };
    let top = fmt_setting(&[("sigma", hi)]);
    let mean = |setting: &str, model: &str, metric: &str| {
        report.row(setting, model, metric).map(|r| r.mean)
    };
    let gcn = mean(&top, &ModelKind::Gcn { symmetric: false }.label(), "test_accuracy");
    // Among gfNN filters the one with the best validation accuracy is reported.
    let best_gfnn = models
        .iter()
        .filter(|m| matches!(m, ModelKind::Gfnn { .. }))
        .map(|m| {
            let label = m.label();
            let val = mean(&top, &label, "val_accuracy").unwrap_or(f64::NEG_INFINITY);
            (label, val)
        })
        .fold(None::<(String, f64)>, |acc, x| match acc {
            Some(a) if a.1 >= x.1 => Some(a),
            _ => Some(x),
        })
        .map(|(label, _)| label);
    let mut checks = Vec::new();
    if let Some(gcn) = gcn {
        if let Some(label) = &best_gfnn {
            let acc = mean(&top, label, "test_accuracy").unwrap_or(f64::NAN);
            checks.push(Check::new(
                "gfnn-beats-gcn-at-max-noise",
                acc > gcn,
                format!("sigma={hi}: {label} {acc:.4} vs gcn {gcn:.4}"),
            ));
        }
        if let Some(sgc) = mean(&top, "sgc", "test_accuracy") {
            checks.push(Check::new(
                "sgc-beats-gcn-at-max-noise",
                sgc > gcn,
                format!("sigma={hi}: sgc {sgc:.4} vs gcn {gcn:.4}"),
            ));
        }
    }
    if lo < hi {
        let bottom = fmt_setting(&[("sigma", lo)]);
        if let (Some(a), Some(b)) = (
            mean(&bottom, "mlp", "test_accuracy"),
            mean(&top, "mlp", "test_accuracy"),
        ) {
            checks.push(Check::new(
                "mlp-degrades-with-noise",
                b < a,
                format!("mlp sigma={lo} {a:.4} vs sigma={hi} {b:.4}"),
            ));
        }
    }
    report.checks.extend(checks);
}
