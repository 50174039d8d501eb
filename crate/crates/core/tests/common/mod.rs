#![allow(dead_code)]

use gfnn::filters::FilterKind;
use gfnn::graph::Graph;
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn p2() -> Graph {
    Graph::from_edges(2, [(0, 1)]).unwrap()
}

pub fn k3() -> Graph {
    Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap()
}

/// Erdős–Rényi graph that may contain isolated vertices.
pub fn random_graph(n: usize, p: f64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    Graph::from_edges(n, edges).unwrap()
}

pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array2::from_shape_simple_fn((rows, cols), || rng.random_range(-1.0..1.0))
}

pub fn dense_adjacency(g: &Graph) -> Array2<f64> {
    let mut a = Array2::zeros((g.n(), g.n()));
    for &(u, v) in g.edges() {
        a[[u, v]] = 1.0;
        a[[v, u]] = 1.0;
    }
    a
}

/// Propagation matrix built entrywise from its definition.
pub fn dense_operator(g: &Graph, kind: FilterKind, gamma: f64) -> Array2<f64> {
    let n = g.n();
    let a = dense_adjacency(g);
    let deg: Array1<f64> = a.sum_axis(ndarray::Axis(1));
    Array2::from_shape_fn((n, n), |(i, j)| {
        let atilde = a[[i, j]] + if i == j { gamma } else { 0.0 };
        match kind {
            FilterKind::LeftNorm => atilde / (deg[i] + gamma),
            FilterKind::AugNormAdj => atilde / ((deg[i] + gamma) * (deg[j] + gamma)).sqrt(),
            FilterKind::Bilateral { alpha } => alpha * a[[i, j]] / (deg[i] * deg[j]).sqrt(),
        }
    })
}

pub fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    assert_eq!(a.dim(), b.dim());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn frobenius(a: &Array2<f64>) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Relative error `‖g − ĝ‖ / max(‖g‖, ‖ĝ‖)` between the analytic gradient and
/// central differences of the loss.
pub fn gradient_relative_error(
    input: &gfnn::models::ModelInput<'_>,
    params: &gfnn::models::ModelParams,
    labels: &[usize],
    mask: &[usize],
) -> f64 {
    let flatten = |p: &gfnn::models::ModelParams| -> Vec<f64> {
        p.tensors().into_iter().flat_map(|t| t.iter().copied()).collect()
    };
    let perturbed = |idx: usize, delta: f64| {
        let mut q = params.clone();
        let mut seen = 0;
        for t in q.tensors_mut() {
            if idx < seen + t.len() {
                t.as_slice_mut().expect("standard layout")[idx - seen] += delta;
                break;
            }
            seen += t.len();
        }
        q
    };
    let analytic = flatten(&input.loss_and_grads(params, labels, mask).unwrap().1);
    let h = 1e-6;
    let numeric: Vec<f64> = (0..analytic.len())
        .map(|i| {
            let up = input.loss_and_grads(&perturbed(i, h), labels, mask).unwrap().0;
            let down = input.loss_and_grads(&perturbed(i, -h), labels, mask).unwrap().0;
            (up - down) / (2.0 * h)
        })
        .collect();
    let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let diff: Vec<f64> = analytic.iter().zip(&numeric).map(|(a, b)| a - b).collect();
    norm(&diff) / norm(&analytic).max(norm(&numeric))
}
