use ndarray::{Array1, Array2};

const MAX_ITER: usize = 100_000;

/// Largest singular value `ρ(W)` by power iteration on `WᵀW`, stopped when
/// the Rayleigh quotient changes by less than `1e-8` relative.
pub fn max_singular_value(w: &Array2<f64>) -> f64 {
    if w.is_empty() || w.iter().all(|&v| v == 0.0) {
        return 0.0;
    }
    let n = w.ncols();
    // Deterministic start with no special alignment to any axis.
    let mut v = Array1::from_iter((0..n).map(|i| 1.0 + 0.37 * ((i as f64 + 1.0) * 0.618).sin()));
    v /= v.dot(&v).sqrt();
    let mut estimate = 0.0f64;
    for _ in 0..MAX_ITER {
        let wv = w.dot(&v);
        let mut next = w.t().dot(&wv);
        let norm = next.dot(&next).sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        next /= norm;
        let previous = estimate;
        estimate = norm;
        v = next;
        if (estimate - previous).abs() <= 1e-8 * estimate {
            break;
        }
    }
    // One last Rayleigh quotient on the converged direction.
    let wv = w.dot(&v);
    wv.dot(&wv).sqrt()
}
