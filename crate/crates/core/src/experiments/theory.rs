use ndarray::{s, Array1, Array2, ArrayView2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{fmt_setting, Check, ExperimentReport, ReportRow};
use crate::data::{add_noise, NoiseSpec};
use crate::filters::{
    optimal_k_estimate, propagate_k, return_probability_spectral, FilterKind, FilterSpec,
};
use crate::graph::{operator_apply, Graph};
use crate::models::{gcn_forward, init_params, max_singular_value, mlp_forward, relu};
use crate::spectral::{eigenbasis, EigenMode, SpectralBasis};
use crate::{Error, Result};

/// Constant in front of the noise term of the bias–variance bound.
pub const LEMMA3_CONSTANT: f64 = 5.0;

const ZERO_FREQ: f64 = 1e-10;
const REL_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryCheckConfig {
    /// Self-loop weight of `Ã_rw` and of the spectral basis.
    pub gamma: f64,
    /// Maximum signal frequencies as fractions of the largest eigenvalue.
    pub epsilon_fractions: Vec<f64>,
    /// Frequency-domain noise levels.
    pub sigmas: Vec<f64>,
    /// Failure probability of the bias–variance bound.
    pub delta: f64,
    /// Noise-to-signal ratio used by the filter-depth check.
    pub rho: f64,
    pub k_list: Vec<usize>,
    pub seeds: Vec<u64>,
    /// Columns of the synthetic low-frequency signal.
    pub signal_dims: usize,
    pub hidden: usize,
    pub classes: usize,
    pub gamma_grid: Vec<f64>,
    /// Absolute frequency bounds for the appendix inequalities.
    pub appendix_epsilons: Vec<f64>,
    /// Largest depth searched for the empirical optimum.
    pub k_search_max: usize,
    pub k_tolerance: usize,
}

impl Default for TheoryCheckConfig {
    fn default() -> Self {
        TheoryCheckConfig {
            gamma: 1.0,
            epsilon_fractions: vec![0.0, 0.05, 0.1],
            sigmas: vec![0.01, 0.05],
            delta: 0.2,
            rho: 1.0,
            k_list: vec![1, 2, 3, 4],
            seeds: (0..20).collect(),
            signal_dims: 8,
            hidden: 16,
            classes: 4,
            gamma_grid: vec![0.0, 0.5, 1.0, 2.0],
            appendix_epsilons: vec![0.01, 0.1],
            k_search_max: 16,
            k_tolerance: 2,
        }
    }
}

impl TheoryCheckConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 0.5) {
            return Err(Error::param(format!("delta must lie in (0, 1/2), got {}", self.delta)));
        }
        if self.epsilon_fractions.iter().any(|e| e.is_nan() || *e < 0.0) {
            return Err(Error::param("epsilon fractions must be non-negative"));
        }
        if self.appendix_epsilons.iter().any(|e| !(*e > 0.0 && *e <= 1.0)) {
            return Err(Error::param("appendix epsilons must lie in (0, 1]"));
        }
        if self.sigmas.iter().any(|s| s.is_nan() || *s < 0.0) {
            return Err(Error::param("sigmas must be non-negative"));
        }
        if self.gamma.is_nan() || self.gamma <= 0.0 {
            return Err(Error::param("theory checks need gamma > 0"));
        }
        if self.seeds.is_empty() || self.k_list.is_empty() || self.k_list.contains(&0) {
            return Err(Error::param("need seeds and positive filter depths"));
        }
        if self.signal_dims == 0 || self.hidden == 0 || self.classes == 0 || self.k_search_max == 0 {
            return Err(Error::param("dimensions must be positive"));
        }
        if self.rho.is_nan() || self.rho <= 0.0 {
            return Err(Error::param("rho must be positive"));
        }
        Ok(())
    }
}

/// Generalized eigenvalues of `(L, D + γI)`, ascending. At `γ = 0` isolated
/// vertices contribute the eigenvalue 0 (the limit as `γ → 0⁺`).
pub fn spectrum_for_gamma(g: &Graph, gamma: f64) -> Result<Array1<f64>> {
    if gamma > 0.0 || g.isolated_vertex().is_none() {
        return Ok(eigenbasis(g, gamma, EigenMode::Full)?.lambdas().clone());
    }
    let keep: Vec<usize> = (0..g.n()).filter(|&i| g.degree(i) > 0).collect();
    let mut index = vec![usize::MAX; g.n()];
    for (new, &old) in keep.iter().enumerate() {
        index[old] = new;
    }
    let sub = Graph::from_edges(
        keep.len(),
        g.edges()
            .iter()
            .map(|&(u, v)| (index[u], index[v]))
            .collect::<Vec<_>>(),
    )?;
    let mut all: Vec<f64> = vec![0.0; g.n() - keep.len()];
    all.extend(eigenbasis(&sub, 0.0, EigenMode::Full)?.lambdas().iter());
    all.sort_by(|a, b| a.total_cmp(b));
    Ok(Array1::from(all))
}

/// `X̄ = U_S C` with Gaussian coefficients `C` on the frequencies `λ ≤ ε`.
/// Returns the signal and the number of frequencies used.
pub fn low_frequency_signal(
    basis: &SpectralBasis,
    epsilon: f64,
    dims: usize,
    seed: u64,
) -> Result<(Array2<f64>, usize)> {
    let count = basis
        .lambdas()
        .iter()
        .take_while(|&&l| l <= epsilon + ZERO_FREQ)
        .count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs = Array2::from_shape_simple_fn((count, dims), || {
        <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng)
    });
    Ok((basis.igft(coeffs.view())?, count))
}

fn noise_seed(seed: u64) -> u64 {
    seed ^ 0x5eed_0000_0000_0001
}

/// One draw of the bias–variance experiment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Lemma3Trial {
    /// `‖X̄ − Ã_rw^k X‖_D̃`.
    pub error: f64,
    /// `√(kε) ‖X̄‖_D̃`.
    pub bias_term: f64,
    /// `C √(log(1/δ) R(2k)) σ √(nd)`.
    pub variance_term: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Synthesizes `X̄` with frequencies at most `epsilon`, adds frequency-domain
/// noise of scale `sigma` and compares the filtering error with the bound.
#[allow(clippy::too_many_arguments)]
pub fn lemma3_trial(
    g: &Graph,
    basis: &SpectralBasis,
    epsilon: f64,
    sigma: f64,
    k: usize,
    dims: usize,
    delta: f64,
    seed: u64,
) -> Result<Lemma3Trial> {
    let (signal, _) = low_frequency_signal(basis, epsilon, dims, seed)?;
    let observed = add_noise(&signal, &NoiseSpec::frequency(sigma, noise_seed(seed)), Some(basis))?;
    let spec = FilterSpec::new(FilterKind::LeftNorm, basis.gamma(), k);
    let filtered = propagate_k(g, &spec, observed.view())?;
    let error = basis.d_norm((&signal - &filtered).view());
    let bias_term = (k as f64 * epsilon).sqrt() * basis.d_norm(signal.view());
    let r = return_probability_spectral(basis, k)?;
    let nd = (g.n() * dims) as f64;
    let variance_term = LEMMA3_CONSTANT * ((1.0 / delta).ln() * r).sqrt() * sigma * nd.sqrt();
    let bound = bias_term + variance_term;
    Ok(Lemma3Trial {
        error,
        bias_term,
        variance_term,
        bound,
        holds: error <= bound * (1.0 + REL_TOL),
    })
}

fn leq(a: f64, b: f64) -> bool {
    a <= b * (1.0 + REL_TOL) + 1e-12
}

/// Empirical verification of the spectral and network bounds on one graph.
/// Checks `a`–`g` are reported individually.
pub fn theory_checks(g: &Graph, cfg: &TheoryCheckConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let basis = eigenbasis(g, cfg.gamma, EigenMode::Full)?;
    let lambda_max = basis.max_frequency();
    let mut report = ExperimentReport::new(
        "theory-check",
        json!({ "n": g.n(), "edges": g.num_edges(), "lambda_max": lambda_max, "config": cfg }),
    );
    check_eigen_shrinking(g, cfg, &mut report)?;
    check_bias_variance(g, &basis, cfg, &mut report)?;
    check_filter_depth(g, &basis, cfg, &mut report)?;
    check_networks(g, &basis, cfg, &mut report)?;
    check_appendix(g, &basis, cfg, &mut report)?;
    Ok(report)
}

fn check_eigen_shrinking(g: &Graph, cfg: &TheoryCheckConfig, report: &mut ExperimentReport) -> Result<()> {
    let mut grid = cfg.gamma_grid.clone();
    grid.sort_by(|a, b| a.total_cmp(b));
    let spectra = grid
        .iter()
        .map(|&gm| spectrum_for_gamma(g, gm))
        .collect::<Result<Vec<_>>>()?;
    let mut violations = Vec::new();
    for w in 0..spectra.len().saturating_sub(1) {
        let (lo, hi) = (&spectra[w], &spectra[w + 1]);
        for i in 0..lo.len() {
            let non_increasing = hi[i] <= lo[i] + 1e-10;
            let strict = lo[i] <= 1e-8 || hi[i] < lo[i];
            if !(non_increasing && strict) {
                violations.push(format!(
                    "λ_{i}: {} at γ={} vs {} at γ={}",
                    lo[i], grid[w], hi[i], grid[w + 1]
                ));
            }
        }
    }
    for (gm, sp) in grid.iter().zip(&spectra) {
        report.rows.push(ReportRow::new(
            fmt_setting(&[("gamma", *gm)]),
            "spectrum",
            "lambda_max",
            vec![],
            vec![sp.iter().cloned().fold(0.0, f64::max)],
        ));
    }
    report.checks.push(Check::new(
        "a-eigenvalues-shrink",
        violations.is_empty(),
        if violations.is_empty() {
            format!("{} eigenvalues over γ grid {:?}", g.n(), grid)
        } else {
            violations.join("; ")
        },
    ));
    Ok(())
}

fn check_bias_variance(
    g: &Graph,
    basis: &SpectralBasis,
    cfg: &TheoryCheckConfig,
    report: &mut ExperimentReport,
) -> Result<()> {
    let lambda_max = basis.max_frequency();
    let mut failures = Vec::new();
    let mut worst = 1.0f64;
    for &frac in &cfg.epsilon_fractions {
        let eps = frac * lambda_max;
        for &sigma in &cfg.sigmas {
            for &k in &cfg.k_list {
                let trials = cfg
                    .seeds
                    .iter()
                    .map(|&seed| lemma3_trial(g, basis, eps, sigma, k, cfg.signal_dims, cfg.delta, seed))
                    .collect::<Result<Vec<_>>>()?;
                let fraction = trials.iter().filter(|t| t.holds).count() as f64 / trials.len() as f64;
                worst = worst.min(fraction);
                let setting = fmt_setting(&[("eps", frac), ("sigma", sigma), ("k", k as f64)]);
                for (metric, values) in [
                    ("error", trials.iter().map(|t| t.error).collect::<Vec<_>>()),
                    ("bound", trials.iter().map(|t| t.bound).collect()),
                ] {
                    report.rows.push(ReportRow::new(&setting, "bias-variance", metric, cfg.seeds.clone(), values));
                }
                if fraction < 1.0 - cfg.delta {
                    failures.push(format!("{setting}: {fraction:.2}"));
                }
            }
        }
    }
    report.checks.push(Check::new(
        "b-bias-variance",
        failures.is_empty(),
        if failures.is_empty() {
            format!("lowest fraction of trials within bound {worst:.2} (need {:.2})", 1.0 - cfg.delta)
        } else {
            failures.join("; ")
        },
    ));
    Ok(())
}

/// Mean filtering error per depth `1..=k_search_max` at noise-to-signal ratio
/// `rho`, for a signal with frequencies at most `epsilon`.
fn depth_curve(g: &Graph, basis: &SpectralBasis, epsilon: f64, cfg: &TheoryCheckConfig) -> Result<Vec<f64>> {
    let mut curve = vec![0.0; cfg.k_search_max];
    for &seed in &cfg.seeds {
        let (signal, _) = low_frequency_signal(basis, epsilon, cfg.signal_dims, seed)?;
        let nd = (g.n() * cfg.signal_dims) as f64;
        let sigma = cfg.rho * basis.d_norm(signal.view()) / nd.sqrt();
        let mut x = add_noise(&signal, &NoiseSpec::frequency(sigma, noise_seed(seed)), Some(basis))?;
        let step = FilterSpec::new(FilterKind::LeftNorm, basis.gamma(), 1);
        for c in curve.iter_mut() {
            x = operator_apply(g, &step, x.view())?;
            *c += basis.d_norm((&signal - &x).view()) / cfg.seeds.len() as f64;
        }
    }
    Ok(curve)
}

fn check_filter_depth(
    g: &Graph,
    basis: &SpectralBasis,
    cfg: &TheoryCheckConfig,
    report: &mut ExperimentReport,
) -> Result<()> {
    let frac = cfg.epsilon_fractions.iter().cloned().fold(0.0, f64::max);
    let nominal = frac * basis.max_frequency();
    // The signal's true maximum frequency; zero means k* is unbounded.
    let count = basis
        .lambdas()
        .iter()
        .take_while(|&&l| l <= nominal + ZERO_FREQ)
        .count();
    let eps = basis.lambdas()[count - 1].max(0.0);
    let estimate = if eps <= ZERO_FREQ {
        cfg.k_search_max
    } else {
        optimal_k_estimate(eps.min(1.0 - f64::EPSILON), cfg.rho, cfg.delta)?.min(cfg.k_search_max)
    };
    let curve = depth_curve(g, basis, nominal, cfg)?;
    let min = curve.iter().cloned().fold(f64::INFINITY, f64::min);
    let optimal: Vec<usize> = (1..=curve.len())
        .filter(|&k| curve[k - 1] <= min * (1.0 + REL_TOL) + 1e-12)
        .collect();
    let passed = optimal.iter().any(|k| k.abs_diff(estimate) <= cfg.k_tolerance);
    report.rows.push(ReportRow::new(
        fmt_setting(&[("eps", frac), ("rho", cfg.rho)]),
        "filter-depth",
        "mean_error_by_k",
        vec![],
        curve,
    ));
    report.checks.push(Check::new(
        "c-filter-depth",
        passed,
        format!(
            "signal max frequency {eps:.4}; empirical optimum k in {:?}, estimate k={estimate}",
            optimal
        ),
    ));
    Ok(())
}

fn check_networks(
    g: &Graph,
    basis: &SpectralBasis,
    cfg: &TheoryCheckConfig,
    report: &mut ExperimentReport,
) -> Result<()> {
    let lambda_max = basis.max_frequency();
    let two = FilterSpec::new(FilterKind::LeftNorm, cfg.gamma, 2);
    let one = FilterSpec::new(FilterKind::LeftNorm, cfg.gamma, 1);
    let mut mlp_fail = Vec::new();
    let mut gcn_fail = Vec::new();
    let mut mlp_ratio = Vec::new();
    let mut gcn_ratio = Vec::new();
    let mut noiseless_lhs = 0.0f64;
    for &frac in &cfg.epsilon_fractions {
        let eps = frac * lambda_max;
        for &sigma in cfg.sigmas.iter().chain([0.0].iter()) {
            for &seed in &cfg.seeds {
                let (signal, _) = low_frequency_signal(basis, eps, cfg.signal_dims, seed)?;
                let x = add_noise(&signal, &NoiseSpec::frequency(sigma, noise_seed(seed)), Some(basis))?;
                let params = init_params(cfg.signal_dims, Some(cfg.hidden), cfg.classes, seed)?;
                let w1 = params.w1.as_ref().expect("two-layer");
                let (r1, r2) = (max_singular_value(w1), max_singular_value(&params.w2));
                let clean = mlp_forward(signal.view(), &params)?;

                let filtered = propagate_k(g, &two, x.view())?;
                let lhs = basis.d_norm((&clean - &mlp_forward(filtered.view(), &params)?).view());
                let rhs = basis.d_norm((&signal - &filtered).view()) * r1 * r2;
                if sigma == 0.0 && frac == 0.0 {
                    noiseless_lhs = noiseless_lhs.max(lhs);
                }
                if !leq(lhs, rhs) {
                    mlp_fail.push(format!("eps={frac} sigma={sigma} seed={seed}: {lhs} > {rhs}"));
                }
                if rhs > 0.0 {
                    mlp_ratio.push(lhs / rhs);
                }

                let hidden = relu(&signal.dot(w1));
                let smooth = operator_apply(g, &one, hidden.view())?;
                let roughness = basis.d_norm((&hidden - &smooth).view());
                let one_step = operator_apply(g, &one, x.view())?;
                let lhs = basis.d_norm((&clean - &gcn_forward(g, cfg.gamma, x.view(), &params)?).view());
                let rhs = (roughness + r1 * basis.d_norm((&signal - &one_step).view())) * r2;
                if !leq(lhs, rhs) {
                    gcn_fail.push(format!("eps={frac} sigma={sigma} seed={seed}: {lhs} > {rhs}"));
                }
                if rhs > 0.0 {
                    gcn_ratio.push(lhs / rhs);
                }
            }
        }
    }
    let max = |v: &[f64]| v.iter().cloned().fold(0.0, f64::max);
    let noiseless_ok = !cfg.epsilon_fractions.contains(&0.0) || noiseless_lhs <= 1e-12;
    report.checks.push(Check::new(
        "d-mlp-after-filter",
        mlp_fail.is_empty() && noiseless_ok,
        if mlp_fail.is_empty() {
            format!(
                "largest lhs/rhs {:.4}; noiseless constant signal lhs {noiseless_lhs:.2e}",
                max(&mlp_ratio)
            )
        } else {
            mlp_fail.join("; ")
        },
    ));
    report.checks.push(Check::new(
        "e-gcn",
        gcn_fail.is_empty(),
        if gcn_fail.is_empty() {
            format!("largest lhs/rhs {:.4}", max(&gcn_ratio))
        } else {
            gcn_fail.join("; ")
        },
    ));
    Ok(())
}

/// `‖σ(X) − Y‖²_D̃` where `Y` keeps the frequencies of `relu(X)` up to `cut`.
fn truncation_residual(basis: &SpectralBasis, x: ArrayView2<f64>, cut: f64) -> Result<f64> {
    let activated = relu(&x.to_owned());
    let coeffs = basis.gft(activated.view())?;
    let keep = basis.lambdas().iter().take_while(|&&l| l <= cut).count();
    let y = basis.igft(coeffs.slice(s![..keep, ..]))?;
    Ok(basis.d_norm((&activated - &y).view()).powi(2))
}

fn check_appendix(
    g: &Graph,
    basis: &SpectralBasis,
    cfg: &TheoryCheckConfig,
    report: &mut ExperimentReport,
) -> Result<()> {
    let one = FilterSpec::new(FilterKind::LeftNorm, cfg.gamma, 1);
    let mut a2_fail = Vec::new();
    let mut a3_fail = Vec::new();
    let mut a3_ratio = Vec::new();
    for &eps in &cfg.appendix_epsilons {
        for &seed in &cfg.seeds {
            let (x, _) = low_frequency_signal(basis, eps, cfg.signal_dims, seed)?;
            let norm2 = basis.d_norm(x.view()).powi(2);

            // h(λ) = λ through L_rw X = X − Ã_rw X, and h(λ) = 1 − (1 − λ)^k
            // through X − Ã_rw^k X; both increase on [0, ε] ⊂ [0, 1].
            let lrw = &x - &operator_apply(g, &one, x.view())?;
            let lhs = basis.d_norm(lrw.view()).powi(2);
            if !leq(lhs, eps * norm2) {
                a2_fail.push(format!("h=λ eps={eps} seed={seed}: {lhs} > {}", eps * norm2));
            }
            for &k in &cfg.k_list {
                let spec = FilterSpec::new(FilterKind::LeftNorm, cfg.gamma, k);
                let diff = &x - &propagate_k(g, &spec, x.view())?;
                let lhs = basis.d_norm(diff.view()).powi(2);
                let hmax = 1.0 - (1.0 - eps).powi(k as i32);
                if !leq(lhs, hmax * norm2) {
                    a2_fail.push(format!("k={k} eps={eps} seed={seed}: {lhs} > {}", hmax * norm2));
                }
            }

            let residual = truncation_residual(basis, x.view(), eps.sqrt())?;
            let rhs = eps.sqrt() * norm2;
            if !leq(residual, rhs) {
                a3_fail.push(format!("eps={eps} seed={seed}: {residual} > {rhs}"));
            }
            if rhs > 0.0 {
                a3_ratio.push(residual / rhs);
            }
        }
    }
    report.checks.push(Check::new(
        "f-low-frequency-filter",
        a2_fail.is_empty(),
        if a2_fail.is_empty() {
            format!("eps {:?}", cfg.appendix_epsilons)
        } else {
            a2_fail.join("; ")
        },
    ));
    report.checks.push(Check::new(
        "g-activation-truncation",
        a3_fail.is_empty(),
        if a3_fail.is_empty() {
            format!(
                "largest residual / (√ε‖X‖²) {:.4}",
                a3_ratio.iter().cloned().fold(0.0, f64::max)
            )
        } else {
            a3_fail.join("; ")
        },
    ));
    Ok(())
}
