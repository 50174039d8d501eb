//! Restarted block Lanczos with full reorthogonalization for the smallest
//! eigenpairs of a symmetric operator given only as a block matrix product.
//!
//! Each cycle extends an orthonormal basis `Q` with `A`-images of the last
//! block (Gram-Schmidt applied twice), then performs Rayleigh-Ritz on
//! `QᵀAQ`. On restart the wanted Ritz vectors are kept together with the
//! residual block of the smallest unconverged pairs, which continues the
//! Krylov sequence.

use ndarray::{s, Array1, Array2, ArrayView2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::symmetric_eigen;
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct LanczosOptions {
    /// Block width; bounds the multiplicity of eigenvalues that can be
    /// resolved.
    pub block: usize,
    /// Basis size before a restart; `None` picks `max(2k, k + 32) + block`.
    pub max_dim: Option<usize>,
    /// Residual norm `‖A y − θ y‖₂` below which a Ritz pair is accepted.
    pub tol: f64,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions {
            block: 8,
            max_dim: None,
            tol: 1e-9,
            max_restarts: 500,
            seed: 0x5eed,
        }
    }
}

/// The `k` smallest eigenpairs of the symmetric `n × n` operator `apply`,
/// eigenvalues ascending, eigenvectors orthonormal.
pub fn smallest_eigenpairs<F>(
    n: usize,
    k: usize,
    apply: F,
    opts: &LanczosOptions,
) -> Result<(Array1<f64>, Array2<f64>)>
where
    F: Fn(ArrayView2<f64>) -> Array2<f64>,
{
    if k > n {
        return Err(Error::param(format!("requested {k} eigenpairs of a {n}x{n} operator")));
    }
    if k == 0 {
        return Ok((Array1::zeros(0), Array2::zeros((n, 0))));
    }
    let b = opts.block.clamp(1, k);
    let max_dim = opts
        .max_dim
        .unwrap_or_else(|| (2 * k).max(k + 32) + b)
        .max(k + 2 * b);
    if max_dim >= n {
        // The Krylov basis would span everything anyway.
        let a = apply(Array2::eye(n).view());
        let sym = (&a + &a.t()) * 0.5;
        let (l, v) = symmetric_eigen(sym.view())?;
        return Ok((l.slice(s![..k]).to_owned(), v.slice(s![.., ..k]).to_owned()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut basis = Basis::new(n, max_dim);
    let start = random_block(n, b, &mut rng);
    basis.push_block(start, &apply, &mut rng);

    for _ in 0..=opts.max_restarts {
        while basis.len < max_dim {
            let width = basis.last_block.min(max_dim - basis.len);
            let candidates = basis
                .aq
                .slice(s![.., basis.len - basis.last_block..basis.len - basis.last_block + width])
                .to_owned();
            basis.push_block(candidates, &apply, &mut rng);
        }

        let q = basis.q.slice(s![.., ..basis.len]);
        let aq = basis.aq.slice(s![.., ..basis.len]);
        let h = q.t().dot(&aq);
        let h = (&h + &h.t()) * 0.5;
        let (theta, s_mat) = symmetric_eigen(h.view())?;

        let keep = (k + b).min(basis.len - b);
        let s_keep = s_mat.slice(s![.., ..keep]);
        let y = q.dot(&s_keep);
        let ay = aq.dot(&s_keep);
        let mut residual = ay.clone();
        for (j, mut col) in residual.axis_iter_mut(Axis(1)).enumerate() {
            col.scaled_add(-theta[j], &y.column(j));
        }
        let norms: Vec<f64> = residual
            .axis_iter(Axis(1))
            .map(|c| c.dot(&c).sqrt())
            .collect();
        let unconverged: Vec<usize> = (0..k).filter(|&j| norms[j] > opts.tol).collect();
        if unconverged.is_empty() {
            return Ok((
                theta.slice(s![..k]).to_owned(),
                y.slice(s![.., ..k]).to_owned(),
            ));
        }

        basis.reset(y.view(), ay.view());
        let mut next = Array2::zeros((n, b));
        for (slot, &j) in unconverged.iter().take(b).enumerate() {
            next.column_mut(slot).assign(&residual.column(j));
        }
        // Pad with residuals of the remaining kept pairs.
        let mut slot = unconverged.len().min(b);
        let mut extra = k..keep;
        while slot < b {
            match extra.next() {
                Some(j) => next.column_mut(slot).assign(&residual.column(j)),
                None => next.column_mut(slot).assign(&random_block(n, 1, &mut rng).column(0)),
            }
            slot += 1;
        }
        basis.push_block(next, &apply, &mut rng);
    }
    Err(Error::NotConverged {
        what: "block Lanczos",
        iterations: opts.max_restarts,
    })
}

struct Basis {
    q: Array2<f64>,
    aq: Array2<f64>,
    len: usize,
    last_block: usize,
}

impl Basis {
    fn new(n: usize, cap: usize) -> Self {
        Basis {
            q: Array2::zeros((n, cap)),
            aq: Array2::zeros((n, cap)),
            len: 0,
            last_block: 0,
        }
    }

    fn reset(&mut self, y: ArrayView2<f64>, ay: ArrayView2<f64>) {
        let p = y.ncols();
        self.q.slice_mut(s![.., ..p]).assign(&y);
        self.aq.slice_mut(s![.., ..p]).assign(&ay);
        self.len = p;
        self.last_block = p;
    }

    /// Orthonormalizes `block` against the basis and itself, replacing
    /// numerically dependent columns by fresh random directions, then appends
    /// it together with its image.
    fn push_block<F>(&mut self, mut block: Array2<f64>, apply: &F, rng: &mut ChaCha8Rng)
    where
        F: Fn(ArrayView2<f64>) -> Array2<f64>,
    {
        let width = block.ncols();
        for j in 0..width {
            let mut attempts = 0;
            loop {
                let mut v = block.column(j).to_owned();
                let before = v.dot(&v).sqrt();
                for _ in 0..2 {
                    let existing = self.q.slice(s![.., ..self.len]);
                    let coef = existing.t().dot(&v);
                    v -= &existing.dot(&coef);
                    for i in 0..j {
                        let c = block.column(i).dot(&v);
                        v.scaled_add(-c, &block.column(i));
                    }
                }
                let after = v.dot(&v).sqrt();
                if after > 1e-10 * before.max(1e-300) && after > 1e-300 {
                    block.column_mut(j).assign(&(v / after));
                    break;
                }
                attempts += 1;
                assert!(attempts < 16, "unable to extend Krylov basis");
                block
                    .column_mut(j)
                    .assign(&random_block(self.q.nrows(), 1, rng).column(0));
            }
        }
        let image = apply(block.view());
        self.q
            .slice_mut(s![.., self.len..self.len + width])
            .assign(&block);
        self.aq
            .slice_mut(s![.., self.len..self.len + width])
            .assign(&image);
        self.len += width;
        self.last_block = width;
    }
}

fn random_block(n: usize, b: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    Array2::from_shape_simple_fn((n, b), || StandardNormal.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_laplacian(n: usize) -> Array2<f64> {
        let mut l = Array2::zeros((n, n));
        for i in 0..n - 1 {
            l[[i, i]] += 1.0;
            l[[i + 1, i + 1]] += 1.0;
            l[[i, i + 1]] = -1.0;
            l[[i + 1, i]] = -1.0;
        }
        l
    }

    #[test]
    fn matches_dense_on_path() {
        let n = 150;
        let l = path_laplacian(n);
        let (dense, _) = symmetric_eigen(l.view()).unwrap();
        let opts = LanczosOptions {
            block: 2,
            ..Default::default()
        };
        let (vals, vecs) = smallest_eigenpairs(n, 6, |x| l.dot(&x), &opts).unwrap();
        for i in 0..6 {
            assert!((vals[i] - dense[i]).abs() < 1e-9, "{i}: {} vs {}", vals[i], dense[i]);
            let v = vecs.column(i);
            let r = l.dot(&v) - &v * vals[i];
            assert!(r.dot(&r).sqrt() < 1e-8);
        }
    }

    #[test]
    fn resolves_repeated_eigenvalue_within_block() {
        // Two disjoint paths: every eigenvalue has multiplicity two.
        let n = 60;
        let mut l = Array2::zeros((2 * n, 2 * n));
        l.slice_mut(s![..n, ..n]).assign(&path_laplacian(n));
        l.slice_mut(s![n.., n..]).assign(&path_laplacian(n));
        let opts = LanczosOptions {
            block: 2,
            max_dim: Some(30),
            ..Default::default()
        };
        let (vals, _) = smallest_eigenpairs(2 * n, 4, |x| l.dot(&x), &opts).unwrap();
        assert!(vals[0].abs() < 1e-9 && vals[1].abs() < 1e-9);
        assert!((vals[2] - vals[3]).abs() < 1e-9);
    }

    #[test]
    fn too_many_pairs() {
        assert!(smallest_eigenpairs(3, 4, |x| x.to_owned(), &LanczosOptions::default()).is_err());
    }
}
