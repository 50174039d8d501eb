//! Small dense helpers shared across modules.

use faer::Mat;
use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::{Error, Result};

/// `‖X‖_w = sqrt(Σ_i w_i ‖X_i‖²)`, the weighted Frobenius norm used for the
/// degree-weighted signal norm on matrices.
pub fn weighted_norm(weights: ArrayView1<f64>, x: ArrayView2<f64>) -> f64 {
    x.outer_iter()
        .zip(weights.iter())
        .map(|(row, &w)| w * row.iter().map(|v| v * v).sum::<f64>())
        .sum::<f64>()
        .sqrt()
}

pub fn frobenius(x: ArrayView2<f64>) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn max_abs_diff(a: ArrayView2<f64>, b: ArrayView2<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub(crate) fn to_faer(a: ArrayView2<f64>) -> Mat<f64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

/// Eigendecomposition of a dense symmetric matrix, eigenvalues ascending.
pub fn symmetric_eigen(a: ArrayView2<f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::dims(format!("{n}x{n}"), format!("{n}x{}", a.ncols())));
    }
    if n == 0 {
        return Ok((Array1::zeros(0), Array2::zeros((0, 0))));
    }
    let m = to_faer(a);
    let eig = m
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let values = eig.S().column_vector();
    let vectors = eig.U();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let lambdas = Array1::from_iter(order.iter().map(|&i| values[i]));
    let u = Array2::from_shape_fn((n, n), |(r, c)| vectors[(r, order[c])]);
    Ok((lambdas, u))
}

/// Flips each column so that its largest-magnitude entry is positive (first
/// such entry on ties).
pub fn fix_column_signs(u: &mut Array2<f64>) {
    for mut col in u.columns_mut() {
        let mut best = 0.0f64;
        let mut sign = 1.0;
        for &v in col.iter() {
            if v.abs() > best {
                best = v.abs();
                sign = v.signum();
            }
        }
        if sign < 0.0 {
            col.mapv_inplace(|v| -v);
        }
    }
}

pub(crate) fn check_rows(x: ArrayView2<f64>, n: usize) -> Result<()> {
    if x.nrows() != n {
        return Err(Error::dims(
            format!("{n} rows"),
            format!("{} rows", x.nrows()),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn eigen_of_diagonal_is_sorted() {
        let a = array![[3.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 2.0]];
        let (l, u) = symmetric_eigen(a.view()).unwrap();
        assert_eq!(l.to_vec(), vec![1.0, 2.0, 3.0]);
        assert!((u[[1, 0]].abs() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn sign_convention() {
        let mut u = array![[0.1, -0.2], [-0.9, 0.1]];
        fix_column_signs(&mut u);
        assert_eq!(u, array![[-0.1, 0.2], [0.9, -0.1]]);
    }

    #[test]
    fn weighted_norm_matches_hand_value() {
        let w = array![1.0, 2.0];
        let x = array![[1.0, 1.0], [2.0, 0.0]];
        assert!((weighted_norm(w.view(), x.view()) - 10f64.sqrt()).abs() < 1e-15);
    }
}
