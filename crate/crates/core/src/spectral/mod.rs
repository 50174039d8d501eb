//! Graph Fourier analysis on the generalized eigenproblem `L u = λ D̃ u`.
//!
//! The generalized eigenvectors are `D̃`-orthonormal (`UᵀD̃U = I`), so the
//! forward transform is `X̂ = UᵀD̃X`, the inverse is `X = U X̂` and Parseval
//! reads `‖X‖_D̃ = ‖X̂‖_F`. They are obtained from the symmetric normalized
//! matrix `D̃^{-1/2} L D̃^{-1/2} = V Λ Vᵀ` via `U = D̃^{-1/2} V`.

pub mod lanczos;

use ndarray::{s, Array1, Array2, ArrayView2, Axis};
use serde::Serialize;

use crate::graph::Graph;
use crate::linalg::{check_rows, fix_column_signs, symmetric_eigen, weighted_norm};
use crate::{Error, Result};

pub use lanczos::LanczosOptions;

/// How much of the spectrum to compute.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EigenMode {
    /// All `n` pairs by dense symmetric eigendecomposition.
    Full,
    /// The `k` lowest frequencies by restarted block Lanczos.
    Partial(usize),
}

/// Generalized eigenpairs `(λ_i, u_i)` of `(L, D̃)`, sorted by frequency.
#[derive(Clone, Debug)]
pub struct SpectralBasis {
    gamma: f64,
    lambdas: Array1<f64>,
    vectors: Array2<f64>,
    dtilde: Array1<f64>,
}

pub fn eigenbasis(g: &Graph, gamma: f64, mode: EigenMode) -> Result<SpectralBasis> {
    eigenbasis_with(g, gamma, mode, &LanczosOptions::default())
}

pub fn eigenbasis_with(
    g: &Graph,
    gamma: f64,
    mode: EigenMode,
    opts: &LanczosOptions,
) -> Result<SpectralBasis> {
    let aug = g.augmented(gamma)?;
    aug.require_invertible()?;
    let dtilde = aug.values().clone();
    let inv_sqrt = dtilde.mapv(|d| 1.0 / d.sqrt());
    let n = g.n();

    let (lambdas, v) = match mode {
        EigenMode::Full => {
            let mut m = g.laplacian_dense();
            for i in 0..n {
                for j in 0..n {
                    m[[i, j]] *= inv_sqrt[i] * inv_sqrt[j];
                }
            }
            symmetric_eigen(m.view())?
        }
        EigenMode::Partial(k) => {
            if k > n {
                return Err(Error::param(format!("requested {k} frequencies of {n}")));
            }
            let apply = |x: ArrayView2<f64>| {
                let mut scaled = x.to_owned();
                for (mut row, &w) in scaled.outer_iter_mut().zip(inv_sqrt.iter()) {
                    row *= w;
                }
                let mut out = Array2::zeros(x.raw_dim());
                for i in 0..n {
                    let mut acc = &scaled.row(i) * g.degree(i) as f64;
                    for &j in g.neighbors(i) {
                        acc -= &scaled.row(j);
                    }
                    out.row_mut(i).assign(&(acc * inv_sqrt[i]));
                }
                out
            };
            lanczos::smallest_eigenpairs(n, k, apply, opts)?
        }
    };

    let mut vectors = v;
    for (mut row, &w) in vectors.outer_iter_mut().zip(inv_sqrt.iter()) {
        row *= w;
    }
    fix_column_signs(&mut vectors);
    Ok(SpectralBasis {
        gamma,
        lambdas,
        vectors,
        dtilde,
    })
}

impl SpectralBasis {
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Frequencies, ascending.
    pub fn lambdas(&self) -> &Array1<f64> {
        &self.lambdas
    }

    /// `n × m` matrix whose columns are the generalized eigenvectors.
    pub fn vectors(&self) -> &Array2<f64> {
        &self.vectors
    }

    pub fn dtilde(&self) -> &Array1<f64> {
        &self.dtilde
    }

    pub fn n(&self) -> usize {
        self.vectors.nrows()
    }

    /// Number of computed frequencies.
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.len() == self.n()
    }

    pub fn max_frequency(&self) -> f64 {
        self.lambdas.last().copied().unwrap_or(0.0)
    }

    /// `‖X‖_D̃` for this basis' degrees.
    pub fn d_norm(&self, x: ArrayView2<f64>) -> f64 {
        weighted_norm(self.dtilde.view(), x)
    }

    /// `X̂ = UᵀD̃X`; row `i` is the frequency component at `λ_i`.
    pub fn gft(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        check_rows(x, self.n())?;
        let mut weighted = x.to_owned();
        for (mut row, &d) in weighted.outer_iter_mut().zip(self.dtilde.iter()) {
            row *= d;
        }
        Ok(self.vectors.t().dot(&weighted))
    }

    /// `U X̂`. A spectrum with fewer rows than the basis uses the lowest
    /// frequencies only.
    pub fn igft(&self, xhat: ArrayView2<f64>) -> Result<Array2<f64>> {
        let r = xhat.nrows();
        if r > self.len() {
            return Err(Error::dims(format!("at most {} rows", self.len()), r));
        }
        Ok(self.vectors.slice(s![.., ..r]).dot(&xhat))
    }

    /// Keeps the `k` lowest frequency components of `X` and transforms back.
    pub fn truncate_reconstruct(&self, x: ArrayView2<f64>, k: usize) -> Result<Array2<f64>> {
        if k == 0 || k > self.len() {
            return Err(Error::param(format!(
                "truncation k must lie in [1, {}], got {k}",
                self.len()
            )));
        }
        check_rows(x, self.n())?;
        let low = self.vectors.slice(s![.., ..k]);
        let mut weighted = x.to_owned();
        for (mut row, &d) in weighted.outer_iter_mut().zip(self.dtilde.iter()) {
            row *= d;
        }
        let coeffs = low.t().dot(&weighted);
        Ok(low.dot(&coeffs))
    }

    /// `igft(diag(h(λ)) · gft(X))`, i.e. `h(L_rw) X` for a full basis.
    pub fn filter<H>(&self, x: ArrayView2<f64>, h: H) -> Result<Array2<f64>>
    where
        H: Fn(f64) -> f64,
    {
        let mut xhat = self.gft(x)?;
        for (mut row, &l) in xhat.outer_iter_mut().zip(self.lambdas.iter()) {
            row *= h(l);
        }
        self.igft(xhat.view())
    }

    /// Energy of `X` per frequency and the cutoff below which a `1 − τ`
    /// fraction of it lies.
    pub fn frequency_profile(&self, x: ArrayView2<f64>, tau: f64) -> Result<FrequencyProfile> {
        if !(0.0..1.0).contains(&tau) {
            return Err(Error::param(format!("tau must lie in [0, 1), got {tau}")));
        }
        let xhat = self.gft(x)?;
        let energy: Vec<f64> = xhat
            .axis_iter(Axis(0))
            .map(|row| row.dot(&row))
            .collect();
        let total: f64 = energy.iter().sum();
        let mut running = 0.0;
        let cumulative_fraction: Vec<f64> = energy
            .iter()
            .map(|e| {
                running += e;
                if total > 0.0 {
                    running / total
                } else {
                    1.0
                }
            })
            .collect();
        // Tiny slack so that an exact (1 − τ) fraction is not lost to rounding.
        let idx = cumulative_fraction
            .iter()
            .position(|&c| c >= 1.0 - tau - 1e-12)
            .unwrap_or(energy.len().saturating_sub(1));
        Ok(FrequencyProfile {
            lambdas: self.lambdas.to_vec(),
            energy,
            cumulative_fraction,
            total_energy: total,
            tau,
            cutoff: self.lambdas.get(idx).copied().unwrap_or(0.0),
        })
    }
}

/// Default `τ` for [`SpectralBasis::frequency_profile`].
pub const DEFAULT_TAU: f64 = 0.01;

#[derive(Clone, Debug, Serialize)]
pub struct FrequencyProfile {
    pub lambdas: Vec<f64>,
    /// `‖x̂(λ_i)‖²` per frequency.
    pub energy: Vec<f64>,
    pub cumulative_fraction: Vec<f64>,
    pub total_energy: f64,
    pub tau: f64,
    /// Smallest `λ*` with at least a `1 − τ` fraction of the energy at
    /// frequencies `≤ λ*`.
    pub cutoff: f64,
}

impl FrequencyProfile {
    /// CSV rows `index,lambda,energy` with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,lambda,energy\n");
        for (i, (l, e)) in self.lambdas.iter().zip(&self.energy).enumerate() {
            out.push_str(&format!("{i},{l},{e}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn p2() -> Graph {
        Graph::from_edges(2, [(0, 1)]).unwrap()
    }

    #[test]
    fn p2_spectra() {
        let b0 = eigenbasis(&p2(), 0.0, EigenMode::Full).unwrap();
        assert!((b0.lambdas()[0]).abs() < 1e-12 && (b0.lambdas()[1] - 2.0).abs() < 1e-12);
        let b1 = eigenbasis(&p2(), 1.0, EigenMode::Full).unwrap();
        assert!((b1.lambdas()[0]).abs() < 1e-12 && (b1.lambdas()[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn k3_spectrum() {
        let k3 = Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let b = eigenbasis(&k3, 0.0, EigenMode::Full).unwrap();
        for (got, want) in b.lambdas().iter().zip([0.0, 1.5, 1.5]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn isolated_vertex_needs_gamma() {
        let g = Graph::from_edges(3, [(0, 1)]).unwrap();
        assert!(matches!(
            eigenbasis(&g, 0.0, EigenMode::Full),
            Err(Error::IsolatedVertex(2))
        ));
        assert!(eigenbasis(&g, 1.0, EigenMode::Full).is_ok());
        assert!(eigenbasis(&g, 1.0, EigenMode::Partial(4)).is_err());
    }

    #[test]
    fn dc_component_only_for_constants() {
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let b = eigenbasis(&g, 1.0, EigenMode::Full).unwrap();
        let xhat = b.gft(Array2::from_elem((4, 1), 2.0).view()).unwrap();
        assert!(xhat[[0, 0]].abs() > 1.0);
        assert!(xhat.slice(s![1.., ..]).iter().all(|v| v.abs() < 1e-12));
        assert!(b.gft(Array2::zeros((4, 1)).view()).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn unit_dc_spectrum_is_constant_sign() {
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3), (1, 3)]).unwrap();
        let b = eigenbasis(&g, 1.0, EigenMode::Full).unwrap();
        let mut e1 = Array2::zeros((4, 1));
        e1[[0, 0]] = 1.0;
        let x = b.igft(e1.view()).unwrap();
        assert!(x.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn profile_of_basis_vector() {
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let b = eigenbasis(&g, 1.0, EigenMode::Full).unwrap();
        let top = b.vectors().slice(s![.., 3..4]).to_owned();
        let p = b.frequency_profile(top.view(), DEFAULT_TAU).unwrap();
        assert!((p.energy[3] - 1.0).abs() < 1e-10);
        assert!(p.energy[..3].iter().all(|&e| e < 1e-20));
        assert_eq!(p.cutoff, b.lambdas()[3]);
        let c = b.frequency_profile(Array2::ones((4, 2)).view(), DEFAULT_TAU).unwrap();
        assert_eq!(c.cutoff, b.lambdas()[0]);
    }

    #[test]
    fn truncation_bounds() {
        let g = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let b = eigenbasis(&g, 1.0, EigenMode::Full).unwrap();
        let x = array![[1.0], [2.0], [4.0]];
        assert!(b.truncate_reconstruct(x.view(), 0).is_err());
        assert!(b.truncate_reconstruct(x.view(), 4).is_err());
        let one = b.truncate_reconstruct(x.view(), 1).unwrap();
        assert!((one[[0, 0]] - one[[2, 0]]).abs() < 1e-12);
    }

    #[test]
    fn csv_dump() {
        let b = eigenbasis(&p2(), 1.0, EigenMode::Full).unwrap();
        let p = b.frequency_profile(array![[1.0], [1.0]].view(), 0.01).unwrap();
        let csv = p.to_csv();
        assert!(csv.starts_with("index,lambda,energy\n0,"));
        assert_eq!(csv.lines().count(), 3);
    }
}
