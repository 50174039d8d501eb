//! Scripted experiments and the empirical theory-check suite. Every
//! experiment returns an [`ExperimentReport`] holding per-seed values, so
//! means and deviations can be recomputed from the report alone.

mod benchmark;
mod circles;
mod freq;
mod noise;
mod theory;

pub use benchmark::{benchmark_table, BEST_GFNN};
pub use circles::{two_circles_experiment, TwoCirclesConfig, TwoCirclesOutput};
pub use freq::{freq_sweep, DEFAULT_K_FRACTIONS, FREQ_SWEEP_EPOCHS, PARTIAL_SPECTRUM_LIMIT};
pub use noise::{noise_sweep, DEFAULT_NOISE_SIGMAS};
pub use theory::{
    lemma3_trial, low_frequency_signal, spectrum_for_gamma, theory_checks, Lemma3Trial,
    TheoryCheckConfig, LEMMA3_CONSTANT,
};

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Split};
use crate::exec::Execution;
use crate::models::{evaluate, train_prepared, ModelInput, ModelKind, TrainConfig};
use crate::{Error, Result};

/// Training settings shared by all trials of an experiment, and the seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub train: TrainConfig,
    pub seeds: Vec<u64>,
    /// Trials run concurrently under `Parallel`; results do not depend on it.
    #[serde(skip)]
    pub exec: Execution,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            train: TrainConfig::default(),
            seeds: (0..5).collect(),
            exec: Execution::default(),
        }
    }
}

impl RunConfig {
    pub fn with_seeds(mut self, seeds: impl IntoIterator<Item = u64>) -> Self {
        self.seeds = seeds.into_iter().collect();
        self
    }

    pub fn with_epochs(mut self, epochs: usize) -> Self {
        self.train.epochs = epochs;
        self
    }

    pub fn with_exec(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        if self.seeds.is_empty() {
            return Err(Error::param("at least one seed is required"));
        }
        Ok(())
    }

    fn train_for(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            seed,
            ..self.train.clone()
        }
    }
}

/// One (setting, model, metric) cell with its per-seed values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub setting: String,
    pub model: String,
    pub metric: String,
    pub seeds: Vec<u64>,
    pub values: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation (zero for a single seed).
    pub std: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ReportRow {
    pub fn new(
        setting: impl Into<String>,
        model: impl Into<String>,
        metric: impl Into<String>,
        seeds: Vec<u64>,
        values: Vec<f64>,
    ) -> Self {
        let (mean, std) = mean_std(&values);
        ReportRow {
            setting: setting.into(),
            model: model.into(),
            metric: metric.into(),
            seeds,
            values,
            mean,
            std,
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub version: String,
    /// Seconds since the Unix epoch at report creation.
    pub timestamp: u64,
}

impl Provenance {
    pub fn now() -> Self {
        Provenance {
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub config: serde_json::Value,
    pub rows: Vec<ReportRow>,
    pub checks: Vec<Check>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub skipped: Vec<String>,
    pub provenance: Provenance,
}

impl ExperimentReport {
    pub fn new(experiment: impl Into<String>, config: serde_json::Value) -> Self {
        ExperimentReport {
            experiment: experiment.into(),
            config,
            rows: Vec::new(),
            checks: Vec::new(),
            skipped: Vec::new(),
            provenance: Provenance::now(),
        }
    }

    pub fn row(&self, setting: &str, model: &str, metric: &str) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.setting == setting && r.model == model && r.metric == metric)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serializable")
    }

    /// Long-format CSV: `experiment,setting,model,seed,metric,value`.
    pub fn to_curves_csv(&self) -> String {
        let mut out = String::from("experiment,setting,model,seed,metric,value\n");
        for row in &self.rows {
            for (seed, value) in row.seeds.iter().zip(&row.values) {
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    self.experiment, row.setting, row.model, seed, row.metric, value
                )
                .unwrap();
            }
        }
        out
    }

    /// One human-readable line per row and per check.
    pub fn summary_lines(&self) -> Vec<String> {
        let rows = self.rows.iter().map(|r| {
            format!(
                "{} {} {} {}: {:.4} ± {:.4} (n={})",
                self.experiment,
                r.setting,
                r.model,
                r.metric,
                r.mean,
                r.std,
                r.values.len()
            )
        });
        let checks = self.checks.iter().map(|c| {
            format!(
                "check {} {}: {}",
                c.name,
                if c.passed { "PASS" } else { "FAIL" },
                c.detail
            )
        });
        let skipped = self.skipped.iter().map(|s| format!("skipped: {s}"));
        rows.chain(checks).chain(skipped).collect()
    }

    /// Writes `report.json` and `curves.csv` into `dir`, creating it.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        let io = |path: &Path, e| Error::Io {
            path: path.display().to_string(),
            source: e,
        };
        fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        let report = dir.join("report.json");
        fs::write(&report, self.to_json()).map_err(|e| io(&report, e))?;
        let curves = dir.join("curves.csv");
        fs::write(&curves, self.to_curves_csv()).map_err(|e| io(&curves, e))
    }
}

/// Mean and sample standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Validation and test accuracy of one trained model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Scores {
    pub val: Option<f64>,
    pub test: f64,
}

pub(crate) fn fit_and_score(
    kind: ModelKind,
    dataset: &Dataset,
    config: &TrainConfig,
) -> Result<Scores> {
    let input = ModelInput::prepare(kind, &dataset.graph, config.gamma, dataset.features.view())?;
    let outcome = train_prepared(&input, dataset, config)?;
    let val = if dataset.splits.val.is_empty() {
        None
    } else {
        Some(evaluate(&input, &outcome.params, dataset, Split::Val)?)
    };
    Ok(Scores {
        val,
        test: evaluate(&input, &outcome.params, dataset, Split::Test)?,
    })
}

pub(crate) fn fmt_setting(pairs: &[(&str, f64)]) -> String {
    pairs
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(";")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_std() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_std(&[7.0]), (7.0, 0.0));
    }

    #[test]
    fn curves_have_one_line_per_seed() {
        let mut r = ExperimentReport::new("x", serde_json::json!({}));
        r.rows.push(ReportRow::new("s=1", "mlp", "acc", vec![0, 1], vec![0.5, 0.7]));
        let csv = r.to_curves_csv();
        assert_eq!(
            csv,
            "experiment,setting,model,seed,metric,value\nx,s=1,mlp,0,acc,0.5\nx,s=1,mlp,1,acc,0.7\n"
        );
        let back: ExperimentReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }
}
