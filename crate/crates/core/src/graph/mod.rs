//! Undirected, unweighted sparse graphs and the two bilinear forms built on
//! them: the variation `Δ(x) = xᵀLx` and the augmented-degree inner product
//! `(x, y)_D̃ = Σ (d(i) + γ) x(i) y(i)`.

mod operator;

pub use operator::{operator_apply, PropagationOperator};

use std::collections::BTreeSet;

use ndarray::{Array1, Array2, ArrayView1};

use crate::{Error, Result};

/// Simple undirected graph in compressed sparse row form.
///
/// Neighbor lists are sorted and symmetric. Self-loops are never stored;
/// augmentation with `γ` self-loops is a parameter of the operators instead.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Builds a graph from vertex pairs. Duplicates and both orientations of
    /// the same pair are merged.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            for w in [u, v] {
                if w >= n {
                    return Err(Error::VertexOutOfRange { vertex: w, n });
                }
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            set.insert((u.min(v), u.max(v)));
        }
        let edges: Vec<(usize, usize)> = set.into_iter().collect();

        let mut degree = vec![0usize; n];
        for &(u, v) in &edges {
            degree[u] += 1;
            degree[v] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..n].to_vec();
        let mut neighbors = vec![0usize; offsets[n]];
        for &(u, v) in &edges {
            neighbors[fill[u]] = v;
            fill[u] += 1;
            neighbors[fill[v]] = u;
            fill[v] += 1;
        }
        for i in 0..n {
            neighbors[offsets[i]..offsets[i + 1]].sort_unstable();
        }
        Ok(Graph {
            n,
            offsets,
            neighbors,
            edges,
        })
    }

    pub fn edgeless(n: usize) -> Self {
        Graph {
            n,
            offsets: vec![0; n + 1],
            neighbors: Vec::new(),
            edges: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of undirected edges, each counted once.
    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn degrees(&self) -> Array1<f64> {
        Array1::from_iter((0..self.n).map(|i| self.degree(i) as f64))
    }

    pub fn isolated_vertex(&self) -> Option<usize> {
        (0..self.n).find(|&i| self.degree(i) == 0)
    }

    pub fn augmented(&self, gamma: f64) -> Result<AugmentedDegrees> {
        AugmentedDegrees::new(self, gamma)
    }

    /// Number of connected components.
    pub fn num_components(&self) -> usize {
        let mut seen = vec![false; self.n];
        let mut stack = Vec::new();
        let mut count = 0;
        for s in 0..self.n {
            if seen[s] {
                continue;
            }
            count += 1;
            seen[s] = true;
            stack.push(s);
            while let Some(v) = stack.pop() {
                for &w in self.neighbors(v) {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        count
    }

    /// Dense combinatorial Laplacian `L = D − A`.
    pub fn laplacian_dense(&self) -> Array2<f64> {
        let mut l = Array2::zeros((self.n, self.n));
        for &(u, v) in &self.edges {
            l[[u, v]] -= 1.0;
            l[[v, u]] -= 1.0;
            l[[u, u]] += 1.0;
            l[[v, v]] += 1.0;
        }
        l
    }

    /// `L x` for a single signal.
    pub fn laplacian_apply(&self, x: ArrayView1<f64>) -> Array1<f64> {
        Array1::from_iter((0..self.n).map(|i| {
            let s: f64 = self.neighbors(i).iter().map(|&j| x[j]).sum();
            self.degree(i) as f64 * x[i] - s
        }))
    }
}

/// Augmented degrees `d̃(i) = d(i) + γ`, i.e. the diagonal of `D̃ = D + γI`.
#[derive(Clone, Debug, PartialEq)]
pub struct AugmentedDegrees {
    gamma: f64,
    dtilde: Array1<f64>,
}

impl AugmentedDegrees {
    pub fn new(g: &Graph, gamma: f64) -> Result<Self> {
        check_gamma(gamma)?;
        Ok(AugmentedDegrees {
            gamma,
            dtilde: g.degrees().mapv(|d| d + gamma),
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn values(&self) -> &Array1<f64> {
        &self.dtilde
    }

    /// Errors if some augmented degree is zero (isolated vertex, `γ = 0`).
    pub fn require_invertible(&self) -> Result<()> {
        match self.dtilde.iter().position(|&d| d <= 0.0) {
            Some(i) => Err(Error::IsolatedVertex(i)),
            None => Ok(()),
        }
    }
}

pub(crate) fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::param(format!("gamma must be finite and >= 0, got {gamma}")));
    }
    Ok(())
}

fn check_len(g: &Graph, x: ArrayView1<f64>) -> Result<()> {
    if x.len() != g.n() {
        return Err(Error::dims(format!("signal of length {}", g.n()), x.len()));
    }
    Ok(())
}

/// Variation `Δ(x) = Σ_{(i,j)∈E} (x(i) − x(j))²`.
pub fn variation(g: &Graph, x: ArrayView1<f64>) -> Result<f64> {
    check_len(g, x)?;
    Ok(g.edges()
        .iter()
        .map(|&(i, j)| (x[i] - x[j]).powi(2))
        .sum())
}

/// `(x, y)_D̃ = Σ_i (d(i) + γ) x(i) y(i)`.
pub fn d_inner(g: &Graph, gamma: f64, x: ArrayView1<f64>, y: ArrayView1<f64>) -> Result<f64> {
    check_gamma(gamma)?;
    check_len(g, x)?;
    check_len(g, y)?;
    Ok((0..g.n())
        .map(|i| (g.degree(i) as f64 + gamma) * x[i] * y[i])
        .sum())
}

pub fn d_norm(g: &Graph, gamma: f64, x: ArrayView1<f64>) -> Result<f64> {
    Ok(d_inner(g, gamma, x, x)?.sqrt())
}
