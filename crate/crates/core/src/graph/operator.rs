use ndarray::{Array2, ArrayView2};

use super::Graph;
use crate::exec::{self, Execution};
use crate::filters::{FilterKind, FilterSpec};
use crate::linalg::check_rows;
use crate::{Error, Result};

/// A propagation matrix of the form `M = diag(r) (A + sI) diag(c)`, applied
/// sparsely in `O((|E| + n) d)`.
///
/// | kind        | matrix                        | r        | c        | s |
/// |-------------|-------------------------------|----------|----------|---|
/// | LeftNorm    | `D̃⁻¹ Ã`                       | `1/d̃`    | `1`      | γ |
/// | AugNormAdj  | `D̃^{-1/2} Ã D̃^{-1/2}`         | `d̃^-½`   | `d̃^-½`   | γ |
/// | Bilateral   | `α D^{-1/2} A D^{-1/2}`       | `α d^-½` | `d^-½`   | 0 |
#[derive(Clone, Debug)]
pub struct PropagationOperator<'g> {
    graph: &'g Graph,
    kind: FilterKind,
    row_scale: Vec<f64>,
    col_scale: Vec<f64>,
    self_weight: f64,
}

impl<'g> PropagationOperator<'g> {
    pub fn new(graph: &'g Graph, kind: FilterKind, gamma: f64) -> Result<Self> {
        kind.validate()?;
        let dtilde = graph.augmented(gamma)?;
        let (row_scale, col_scale, self_weight) = match kind {
            FilterKind::LeftNorm => {
                dtilde.require_invertible()?;
                let r = dtilde.values().iter().map(|d| 1.0 / d).collect();
                (r, vec![1.0; graph.n()], gamma)
            }
            FilterKind::AugNormAdj => {
                dtilde.require_invertible()?;
                let s: Vec<f64> = dtilde.values().iter().map(|d| 1.0 / d.sqrt()).collect();
                (s.clone(), s, gamma)
            }
            FilterKind::Bilateral { alpha } => {
                if let Some(i) = graph.isolated_vertex() {
                    return Err(Error::IsolatedVertex(i));
                }
                let s: Vec<f64> = (0..graph.n())
                    .map(|i| 1.0 / (graph.degree(i) as f64).sqrt())
                    .collect();
                (s.iter().map(|v| alpha * v).collect(), s, 0.0)
            }
        };
        Ok(PropagationOperator {
            graph,
            kind,
            row_scale,
            col_scale,
            self_weight,
        })
    }

    pub fn from_spec(graph: &'g Graph, spec: &FilterSpec) -> Result<Self> {
        Self::new(graph, spec.kind, spec.gamma)
    }

    pub fn kind(&self) -> FilterKind {
        self.kind
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn apply(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.apply_with(x, Execution::default())
    }

    pub fn apply_with(&self, x: ArrayView2<f64>, exec: Execution) -> Result<Array2<f64>> {
        self.product(x, exec, &self.row_scale, &self.col_scale)
    }

    /// `Mᵀ X`, needed for back-propagation through a propagation layer.
    pub fn apply_transpose(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.product(x, Execution::default(), &self.col_scale, &self.row_scale)
    }

    /// Applies the operator `k` times.
    pub fn apply_power(&self, x: ArrayView2<f64>, k: usize) -> Result<Array2<f64>> {
        check_rows(x, self.graph.n())?;
        let mut cur = x.to_owned();
        for _ in 0..k {
            cur = self.apply(cur.view())?;
        }
        Ok(cur)
    }

    fn product(
        &self,
        x: ArrayView2<f64>,
        exec: Execution,
        row: &[f64],
        col: &[f64],
    ) -> Result<Array2<f64>> {
        let n = self.graph.n();
        check_rows(x, n)?;
        let d = x.ncols();
        let x = x.as_standard_layout();
        let xs = x.as_slice().expect("standard layout");
        let mut out = vec![0.0; n * d];
        let s = self.self_weight;
        exec::for_each_row(&mut out, d, exec, |i, acc| {
            let xi = &xs[i * d..(i + 1) * d];
            if s != 0.0 {
                let w = s * col[i];
                for (a, v) in acc.iter_mut().zip(xi) {
                    *a = w * v;
                }
            }
            for &j in self.graph.neighbors(i) {
                let w = col[j];
                for (a, v) in acc.iter_mut().zip(&xs[j * d..(j + 1) * d]) {
                    *a += w * v;
                }
            }
            let r = row[i];
            acc.iter_mut().for_each(|a| *a *= r);
        });
        Ok(Array2::from_shape_vec((n, d), out).expect("shape"))
    }

    /// Dense copy of the matrix, for small-graph checks.
    pub fn to_dense(&self) -> Array2<f64> {
        let n = self.graph.n();
        let mut m = Array2::zeros((n, n));
        for i in 0..n {
            m[[i, i]] = self.row_scale[i] * self.self_weight * self.col_scale[i];
            for &j in self.graph.neighbors(i) {
                m[[i, j]] = self.row_scale[i] * self.col_scale[j];
            }
        }
        m
    }
}

/// One application of the propagation matrix named by `spec` (its power `k`
/// is ignored; see [`crate::filters::propagate_k`]).
pub fn operator_apply(g: &Graph, spec: &FilterSpec, x: ArrayView2<f64>) -> Result<Array2<f64>> {
    PropagationOperator::from_spec(g, spec)?.apply(x)
}
