use ndarray::s;
use serde_json::json;

use super::{fit_and_score, fmt_setting, Check, ExperimentReport, ReportRow, RunConfig};
use crate::data::{add_noise, Dataset, NoiseSpec};
use crate::exec::map_indices;
use crate::models::ModelKind;
use crate::spectral::{eigenbasis, EigenMode};
use crate::{Error, Result};

/// Epochs of the perceptron trained on reconstructed features.
pub const FREQ_SWEEP_EPOCHS: usize = 20;

/// Largest graph handled with the dense eigensolver; above it only the
/// lowest 20% of the spectrum is computed.
pub const PARTIAL_SPECTRUM_LIMIT: usize = 4000;

pub const DEFAULT_K_FRACTIONS: [f64; 10] = [0.01, 0.02, 0.05, 0.1, 0.15, 0.2, 0.3, 0.5, 0.75, 1.0];

const PEAK_FRACTION: f64 = 0.2;

fn truncation_count(n: usize, fraction: f64) -> usize {
    ((fraction * n as f64).round() as usize).clamp(1, n)
}

/// Accuracy of a two-layer perceptron trained on features reconstructed from
/// their lowest `⌈f·n⌉` graph frequencies, after optional Gaussian noise, for
/// every noise level `σ` and fraction `f`. The baseline row `raw` trains the
/// same perceptron on the untouched features.
pub fn freq_sweep(
    dataset: &Dataset,
    sigma_list: &[f64],
    k_fractions: &[f64],
    config: &RunConfig,
) -> Result<ExperimentReport> {
    config.validate()?;
    if let Some(f) = k_fractions.iter().find(|f| !(**f > 0.0 && **f <= 1.0)) {
        return Err(Error::param(format!("k fraction {f} not in (0, 1]")));
    }
    for &sigma in sigma_list {
        NoiseSpec::feature(sigma, 0).validate()?;
    }
    let n = dataset.n();
    let max_fraction = k_fractions.iter().cloned().fold(0.0, f64::max);
    let mode = if n <= PARTIAL_SPECTRUM_LIMIT {
        EigenMode::Full
    } else if max_fraction <= PEAK_FRACTION {
        EigenMode::Partial(truncation_count(n, max_fraction))
    } else {
        return Err(Error::param(format!(
            "n = {n} only supports k fractions up to {PEAK_FRACTION} (partial spectrum)"
        )));
    };
    let basis = eigenbasis(&dataset.graph, config.train.gamma, mode)?;

    let seeds = &config.seeds;
    let mut report = ExperimentReport::new(
        "freq-sweep",
        json!({
            "dataset": dataset.name,
            "sigmas": sigma_list,
            "k_fractions": k_fractions,
            "spectrum": basis.len(),
            "run": config,
        }),
    );

    let raw = map_indices(seeds.len(), config.exec, |i| {
        fit_and_score(ModelKind::Mlp, dataset, &config.train_for(seeds[i])).map(|s| s.test)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    report
        .rows
        .push(ReportRow::new("raw", "mlp", "test_accuracy", seeds.clone(), raw));

    // One trial per (σ, seed); each yields an accuracy per fraction.
    let trials: Vec<(f64, u64)> = sigma_list
        .iter()
        .flat_map(|&s| seeds.iter().map(move |&seed| (s, seed)))
        .collect();
    let results = map_indices(trials.len(), config.exec, |t| -> Result<Vec<f64>> {
        let (sigma, seed) = trials[t];
        let noisy = add_noise(&dataset.features, &NoiseSpec::feature(sigma, seed), None)?;
        let coeffs = basis.gft(noisy.view())?;
        k_fractions
            .iter()
            .map(|&f| {
                let k = truncation_count(n, f);
                let recon = basis.igft(coeffs.slice(s![..k, ..]))?;
                let ds = dataset.with_features(recon)?;
                Ok(fit_and_score(ModelKind::Mlp, &ds, &config.train_for(seed))?.test)
            })
            .collect()
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    for (si, &sigma) in sigma_list.iter().enumerate() {
        for (fi, &f) in k_fractions.iter().enumerate() {
            let values = (0..seeds.len())
                .map(|j| results[si * seeds.len() + j][fi])
                .collect();
            report.rows.push(
                ReportRow::new(
                    fmt_setting(&[("sigma", sigma), ("k", f)]),
                    "mlp",
                    "test_accuracy",
                    seeds.clone(),
                    values,
                )
                .with_note(format!("{} frequencies", truncation_count(n, f))),
            );
        }
    }

    add_checks(&mut report, sigma_list, k_fractions);
    Ok(report)
}

fn add_checks(report: &mut ExperimentReport, sigma_list: &[f64], k_fractions: &[f64]) {
    let mean = |report: &ExperimentReport, sigma: f64, f: f64| {
        report
            .row(&fmt_setting(&[("sigma", sigma), ("k", f)]), "mlp", "test_accuracy")
            .map(|r| r.mean)
    };
    if !sigma_list.contains(&0.0) || k_fractions.is_empty() {
        return;
    }
    let (best_f, best) = k_fractions
        .iter()
        .map(|&f| (f, mean(report, 0.0, f).unwrap_or(f64::NAN)))
        .fold((f64::NAN, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    report.checks.push(Check::new(
        "peak-in-low-band",
        best_f <= PEAK_FRACTION,
        format!("sigma=0 accuracy peaks at k={best_f} ({best:.4})"),
    ));
    if k_fractions.contains(&1.0) {
        let full = mean(report, 0.0, 1.0).unwrap_or(f64::NAN);
        let raw = report.row("raw", "mlp", "test_accuracy").map(|r| r.mean).unwrap_or(f64::NAN);
        report.checks.push(Check::new(
            "full-reconstruction-matches-raw",
            (full - raw).abs() <= 0.02,
            format!("k=1 {full:.4} vs raw {raw:.4}"),
        ));
    }
    let low = k_fractions.iter().cloned().fold(f64::INFINITY, f64::min);
    if let Some(&top) = sigma_list.iter().filter(|&&s| s > 0.0).max_by(|a, b| a.total_cmp(b)) {
        let clean = mean(report, 0.0, low).unwrap_or(f64::NAN);
        let noisy = mean(report, top, low).unwrap_or(f64::NAN);
        report.checks.push(Check::new(
            "low-band-robust",
            (clean - noisy).abs() <= 0.05,
            format!("k={low}: sigma=0 {clean:.4} vs sigma={top} {noisy:.4}"),
        ));
    }
}
