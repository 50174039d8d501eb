//! Low-pass propagation filters, exact Laplacian-regularized denoising,
//! random-walk return probabilities and the advisory filter depth.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::exec::{self, Execution};
use crate::graph::{check_gamma, Graph, PropagationOperator};
use crate::linalg::check_rows;
use crate::spectral::SpectralBasis;
use crate::{Error, Result};

/// Which propagation matrix a filter multiplies by.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FilterKind {
    /// `Ã_rw = D̃⁻¹Ã`, spectral response `1 − λ`.
    LeftNorm,
    /// `D̃^{-1/2} Ã D̃^{-1/2}`, similar to `Ã_rw`.
    #[serde(rename = "augnorm")]
    AugNormAdj,
    /// `α D^{-1/2} A D^{-1/2}` on the plain (non-augmented) graph.
    Bilateral { alpha: f64 },
}

impl FilterKind {
    pub fn validate(&self) -> Result<()> {
        if let FilterKind::Bilateral { alpha } = *self {
            if !(alpha > 0.0 && alpha <= 1.0) {
                return Err(Error::param(format!("bilateral alpha must lie in (0, 1], got {alpha}")));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            FilterKind::LeftNorm => "leftnorm",
            FilterKind::AugNormAdj => "augnorm",
            FilterKind::Bilateral { .. } => "bilateral",
        }
    }

    /// Single-step frequency response in the basis the operator is similar to
    /// (augmented for LeftNorm/AugNormAdj, `γ = 0` for Bilateral).
    pub fn response(&self, lambda: f64) -> f64 {
        match *self {
            FilterKind::LeftNorm | FilterKind::AugNormAdj => 1.0 - lambda,
            FilterKind::Bilateral { alpha } => alpha * (1.0 - lambda),
        }
    }
}

impl fmt::Display for FilterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FilterKind {
    type Err = Error;

    /// Parses `leftnorm`, `augnorm` or `bilateral` (with `α = 1`).
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "leftnorm" => Ok(FilterKind::LeftNorm),
            "augnorm" => Ok(FilterKind::AugNormAdj),
            "bilateral" => Ok(FilterKind::Bilateral { alpha: 1.0 }),
            other => Err(Error::param(format!(
                "unknown filter `{other}` (expected leftnorm, augnorm or bilateral)"
            ))),
        }
    }
}

/// Propagation operator kind, self-loop weight `γ` and power `k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    pub kind: FilterKind,
    pub gamma: f64,
    pub k: usize,
}

impl Default for FilterSpec {
    /// `Ã_rw²` with `γ = 1`.
    fn default() -> Self {
        FilterSpec {
            kind: FilterKind::LeftNorm,
            gamma: 1.0,
            k: 2,
        }
    }
}

impl FilterSpec {
    pub fn new(kind: FilterKind, gamma: f64, k: usize) -> Self {
        FilterSpec { kind, gamma, k }
    }

    pub fn validate(&self) -> Result<()> {
        self.kind.validate()?;
        check_gamma(self.gamma)
    }

    /// `k`-step frequency response.
    pub fn response(&self, lambda: f64) -> f64 {
        self.kind.response(lambda).powi(self.k as i32)
    }

    pub fn label(&self) -> String {
        match self.kind {
            FilterKind::Bilateral { alpha } => {
                format!("bilateral(alpha={alpha},gamma={},k={})", self.gamma, self.k)
            }
            kind => format!("{kind}(gamma={},k={})", self.gamma, self.k),
        }
    }
}

/// `M^k X` as `k` successive sparse products; `k = 0` returns `X`.
pub fn propagate_k(g: &Graph, spec: &FilterSpec, x: ArrayView2<f64>) -> Result<Array2<f64>> {
    spec.validate()?;
    check_rows(x, g.n())?;
    if spec.k == 0 {
        return Ok(x.to_owned());
    }
    PropagationOperator::from_spec(g, spec)?.apply_power(x, spec.k)
}

/// Spectral-domain counterpart of [`propagate_k`]. AugNormAdj and Bilateral
/// are similar to a polynomial in `L_rw`, so the signal is conjugated by the
/// degree square root around the spectral filter. Bilateral needs a basis
/// computed with `γ = 0`; the other kinds need `basis.gamma() == spec.gamma`.
pub fn spectral_propagate(
    basis: &SpectralBasis,
    spec: &FilterSpec,
    x: ArrayView2<f64>,
) -> Result<Array2<f64>> {
    spec.validate()?;
    let expected_gamma = match spec.kind {
        FilterKind::Bilateral { .. } => 0.0,
        _ => spec.gamma,
    };
    if basis.gamma() != expected_gamma {
        return Err(Error::param(format!(
            "{} filter needs a basis with gamma = {expected_gamma}, got {}",
            spec.kind,
            basis.gamma()
        )));
    }
    let h = |l: f64| spec.response(l);
    match spec.kind {
        FilterKind::LeftNorm => basis.filter(x, h),
        FilterKind::AugNormAdj | FilterKind::Bilateral { .. } => {
            let root = basis.dtilde().mapv(f64::sqrt);
            let mut scaled = x.to_owned();
            for (mut row, &r) in scaled.outer_iter_mut().zip(root.iter()) {
                row /= r;
            }
            let mut y = basis.filter(scaled.view(), h)?;
            for (mut row, &r) in y.outer_iter_mut().zip(root.iter()) {
                row *= r;
            }
            Ok(y)
        }
    }
}

/// Relative residual target for [`lrls_denoise`].
pub const LRLS_TOL: f64 = 1e-12;

/// Exact minimizer of `Σ_i ‖x̄(i) − x(i)‖²_D̃ + Δ(X̄)`, i.e. the solution of
/// `(I + L_rw) X̄ = X`.
///
/// Solved column by column as the SPD system `(D̃ + L) X̄ = D̃ X` with
/// conjugate gradients preconditioned by `D̃`; the preconditioned spectrum is
/// `1 + λ ∈ [1, 3]`, so convergence takes a few dozen iterations.
pub fn lrls_denoise(g: &Graph, gamma: f64, x: ArrayView2<f64>) -> Result<Array2<f64>> {
    let aug = g.augmented(gamma)?;
    aug.require_invertible()?;
    check_rows(x, g.n())?;
    let dtilde = aug.values();
    let cols = exec::map_indices(x.ncols(), Execution::default(), |c| {
        let b = &x.column(c) * dtilde;
        pcg_column(g, dtilde.view(), b.view())
    });
    let mut out = Array2::zeros(x.raw_dim());
    for (c, col) in cols.into_iter().enumerate() {
        out.column_mut(c).assign(&col?);
    }
    Ok(out)
}

fn pcg_column(g: &Graph, dtilde: ArrayView1<f64>, b: ArrayView1<f64>) -> Result<Array1<f64>> {
    let n = g.n();
    let apply = |v: &Array1<f64>| &g.laplacian_apply(v.view()) + &(v * &dtilde);
    let b_norm = b.dot(&b).sqrt();
    let mut x = Array1::zeros(n);
    if b_norm == 0.0 {
        return Ok(x);
    }
    let mut r = b.to_owned();
    let mut z = &r / &dtilde;
    let mut p = z.clone();
    let mut rz = r.dot(&z);
    let max_iter = 10 * n + 100;
    for _ in 0..max_iter {
        let ap = apply(&p);
        let alpha = rz / p.dot(&ap);
        x.scaled_add(alpha, &p);
        r.scaled_add(-alpha, &ap);
        if r.dot(&r).sqrt() <= LRLS_TOL * b_norm {
            return Ok(x);
        }
        z = &r / &dtilde;
        let rz_next = r.dot(&z);
        p = &z + &(p * (rz_next / rz));
        rz = rz_next;
    }
    Err(Error::NotConverged {
        what: "conjugate gradients",
        iterations: max_iter,
    })
}

/// How to evaluate [`return_probability`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ReturnMethod {
    /// `tr(Ã_rw^{2k}) / n` by sparse propagation of indicator vectors.
    Exact,
    /// Lazy random walks on the `γ`-augmented graph.
    MonteCarlo { walks: usize, seed: u64 },
}

/// Default number of simulated walks.
pub const DEFAULT_WALKS: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReturnEstimate {
    pub value: f64,
    /// Binomial standard error for Monte Carlo estimates, zero when exact.
    pub std_error: f64,
}

/// `R(2k)`: the probability that a `2k`-step lazy random walk on the
/// augmented graph, started at a uniformly random vertex, ends where it
/// started.
pub fn return_probability(
    g: &Graph,
    gamma: f64,
    k: usize,
    method: ReturnMethod,
) -> Result<ReturnEstimate> {
    return_probability_with(g, gamma, k, method, Execution::default())
}

pub fn return_probability_with(
    g: &Graph,
    gamma: f64,
    k: usize,
    method: ReturnMethod,
    exec: Execution,
) -> Result<ReturnEstimate> {
    let aug = g.augmented(gamma)?;
    aug.require_invertible()?;
    if g.n() == 0 {
        return Err(Error::param("return probability of an empty graph"));
    }
    match method {
        ReturnMethod::Exact => exact_return(g, gamma, k, exec),
        ReturnMethod::MonteCarlo { walks, seed } => {
            if walks == 0 {
                return Err(Error::param("montecarlo needs at least one walk"));
            }
            Ok(montecarlo_return(g, gamma, k, walks, seed, exec))
        }
    }
}

/// `Σ_i (1 − λ_i)^{2k} / n` from a full basis.
pub fn return_probability_spectral(basis: &SpectralBasis, k: usize) -> Result<f64> {
    if !basis.is_full() {
        return Err(Error::param("spectral return probability needs the full spectrum"));
    }
    let n = basis.n() as f64;
    Ok(basis
        .lambdas()
        .iter()
        .map(|l| (1.0 - l).powi(2 * k as i32))
        .sum::<f64>()
        / n)
}

const INDICATOR_BLOCK: usize = 64;

/// `tr(Ã_rw^{2k}) = tr(Â^{2k}) = Σ_i ‖Â^k e_i‖²`, with `Â` the symmetric
/// similar matrix.
fn exact_return(g: &Graph, gamma: f64, k: usize, exec: Execution) -> Result<ReturnEstimate> {
    let n = g.n();
    if k == 0 {
        return Ok(ReturnEstimate {
            value: 1.0,
            std_error: 0.0,
        });
    }
    let op = PropagationOperator::new(g, FilterKind::AugNormAdj, gamma)?;
    let blocks = n.div_ceil(INDICATOR_BLOCK);
    let partial = exec::map_indices(blocks, exec, |b| {
        let start = b * INDICATOR_BLOCK;
        let width = INDICATOR_BLOCK.min(n - start);
        let mut e = Array2::zeros((n, width));
        for j in 0..width {
            e[[start + j, j]] = 1.0;
        }
        for _ in 0..k {
            e = op
                .apply_with(e.view(), Execution::Sequential)
                .expect("shape checked");
        }
        e.iter().map(|v| v * v).sum::<f64>()
    });
    Ok(ReturnEstimate {
        value: partial.iter().sum::<f64>() / n as f64,
        std_error: 0.0,
    })
}

const WALKS_PER_STREAM: usize = 4096;

fn montecarlo_return(
    g: &Graph,
    gamma: f64,
    k: usize,
    walks: usize,
    seed: u64,
    exec: Execution,
) -> ReturnEstimate {
    let n = g.n();
    let streams = walks.div_ceil(WALKS_PER_STREAM);
    let counts = exec::map_indices(streams, exec, |s| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(s as u64);
        let len = WALKS_PER_STREAM.min(walks - s * WALKS_PER_STREAM);
        let mut returned = 0usize;
        for _ in 0..len {
            let start = rng.random_range(0..n);
            let mut at = start;
            for _ in 0..2 * k {
                let nbrs = g.neighbors(at);
                let u = rng.random::<f64>() * (nbrs.len() as f64 + gamma);
                if u >= gamma {
                    let idx = ((u - gamma) as usize).min(nbrs.len() - 1);
                    at = nbrs[idx];
                }
            }
            returned += usize::from(at == start);
        }
        returned
    });
    let p = counts.iter().sum::<usize>() as f64 / walks as f64;
    ReturnEstimate {
        value: p,
        std_error: (p * (1.0 - p) / walks as f64).sqrt(),
    }
}

/// Advisory filter depth `max(1, ⌈ln(ln(1/δ) · ρ / ε)⌉)`, with the hidden
/// constant of the asymptotic bound fixed to one.
pub fn optimal_k_estimate(epsilon: f64, rho: f64, delta: f64) -> Result<usize> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::param(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::param(format!("rho must be positive, got {rho}")));
    }
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::param(format!("delta must lie in (0, 1/2), got {delta}")));
    }
    let k = ((1.0 / delta).ln() * rho / epsilon).ln().ceil();
    Ok(if k < 1.0 { 1 } else { k as usize })
}
