mod common;

use common::{random_graph, random_matrix};
use gfnn::data::{
    add_noise, brute_force_knn, knn_graph, load_dataset, random_split, save_dataset, two_circles,
    two_circles_dataset, KdTree, NoiseSpec,
};
use gfnn::spectral::{eigenbasis, EigenMode};
use ndarray::Array2;
use proptest::prelude::*;

/// Best accuracy of any half-plane classifier, searched over a fine grid of
/// directions with an exact threshold scan per direction.
fn best_linear_accuracy(points: &Array2<f64>, labels: &[usize]) -> f64 {
    let n = labels.len();
    let mut best = 0.0f64;
    let angles = 4000;
    for a in 0..angles {
        let t = std::f64::consts::PI * a as f64 / angles as f64;
        let (c, s) = (t.cos(), t.sin());
        let mut proj: Vec<(f64, usize)> = (0..n)
            .map(|i| (c * points[[i, 0]] + s * points[[i, 1]], labels[i]))
            .collect();
        proj.sort_by(|x, y| x.0.total_cmp(&y.0));
        let ones = labels.iter().filter(|&&l| l == 1).count();
        // Left of the cut predicted 0; count both orientations.
        let mut zeros_left = 0usize;
        let mut ones_left = 0usize;
        let mut score = |zeros_left: usize, ones_left: usize| {
            let correct = zeros_left + (ones - ones_left);
            best = best.max(correct.max(n - correct) as f64 / n as f64);
        };
        score(0, 0);
        for &(_, label) in &proj {
            if label == 0 {
                zeros_left += 1;
            } else {
                ones_left += 1;
            }
            score(zeros_left, ones_left);
        }
    }
    best
}

/// A half-plane can cut off the cap of the outer circle beyond the inner
/// radius, an arc of `2 acos(r_in / r_out) = 2π/3`. Noiselessly this
/// classifies that third of the outer points plus every inner point, which is
/// the best any line can do: `1/2 + 1/6`.
const NOISELESS_LINEAR_BEST: f64 = 2.0 / 3.0;

#[test]
fn two_circles_are_not_linearly_separable() {
    let n = 1000;
    for seed in 0..3 {
        let (x, y) = two_circles(n, 0.0, seed).unwrap();
        let acc = best_linear_accuracy(&x, &y);
        assert!((acc - NOISELESS_LINEAR_BEST).abs() <= 1.0 / n as f64, "seed={seed}: {acc}");
        for sd in [0.02, 0.05, 0.1] {
            let (x, y) = two_circles(n, sd, seed).unwrap();
            let acc = best_linear_accuracy(&x, &y);
            assert!(acc <= NOISELESS_LINEAR_BEST + 1.0 / n as f64, "sd={sd} seed={seed}: {acc}");
        }
        let (x, y) = two_circles(n, gfnn::data::DEFAULT_NOISE_SD, seed).unwrap();
        let acc = best_linear_accuracy(&x, &y);
        assert!(acc <= 0.65, "default noise seed={seed}: {acc}");
    }
}

#[test]
fn two_circles_edge_count_in_expected_range() {
    let ds = two_circles_dataset(4000, gfnn::data::DEFAULT_NOISE_SD, 5, (80, 80), 0).unwrap();
    let m = ds.graph.num_edges();
    assert!((10_000..=20_000).contains(&m), "{m} edges");
    assert_eq!(ds.splits.sizes(), (80, 80, 3840));
}

#[test]
fn loader_round_trip() {
    let ds = two_circles_dataset(300, 0.1, 4, (30, 30), 8).unwrap();
    let dir = tempfile::tempdir().unwrap();
    save_dataset(&ds, dir.path()).unwrap();
    let back = load_dataset(dir.path()).unwrap();
    assert_eq!(back.graph.edges(), ds.graph.edges());
    assert_eq!(back.features, ds.features);
    assert_eq!(back.labels, ds.labels);
    assert_eq!(back.splits, ds.splits);
    assert_eq!(back.num_classes, ds.num_classes);
}

#[test]
fn random_splits_are_disjoint_and_seeded() {
    let ds = two_circles_dataset(200, 0.1, 4, (20, 20), 1).unwrap();
    let a = random_split(&ds, (50, 50, 100), 3).unwrap();
    assert_eq!(a.splits, random_split(&ds, (50, 50, 100), 3).unwrap().splits);
    assert_ne!(a.splits, random_split(&ds, (50, 50, 100), 4).unwrap().splits);
    let mut all: Vec<usize> = [&a.splits.train, &a.splits.val, &a.splits.test]
        .iter()
        .flat_map(|s| s.iter().copied())
        .collect();
    all.sort();
    all.dedup();
    assert_eq!(all.len(), 200);
    assert!(random_split(&ds, (150, 50, 1), 0).is_err());
}

#[test]
fn feature_noise_statistics() {
    let x = Array2::zeros((2000, 10));
    for sigma in [0.01, 0.05, 1.0] {
        let z = add_noise(&x, &NoiseSpec::feature(sigma, 3), None).unwrap();
        let mean = z.mean().unwrap();
        let sd = (z.mapv(|v| v * v).mean().unwrap() - mean * mean).sqrt();
        assert!((sd - sigma).abs() <= 0.05 * sigma);
        assert!(mean.abs() <= 0.05 * sigma);
    }
}

#[test]
fn frequency_noise_has_expected_degree_norm() {
    let g = random_graph(400, 0.02, 6);
    let basis = eigenbasis(&g, 1.0, EigenMode::Full).unwrap();
    let x = random_matrix(400, 8, 1);
    for sigma in [0.01, 0.05] {
        let noisy = add_noise(&x, &NoiseSpec::frequency(sigma, 2), Some(&basis)).unwrap();
        let energy = basis.d_norm((&noisy - &x).view()).powi(2);
        let expect = sigma * sigma * 400.0 * 8.0;
        assert!((energy / expect - 1.0).abs() <= 0.05, "{energy} vs {expect}");
    }
    let partial = eigenbasis(&g, 1.0, EigenMode::Partial(5)).unwrap();
    assert!(add_noise(&x, &NoiseSpec::frequency(0.1, 0), Some(&partial)).is_err());
    assert!(add_noise(&x, &NoiseSpec::frequency(0.1, 0), None).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn knn_matches_brute_force(n in 2usize..200, k in 1usize..8, seed in any::<u64>(), d in 1usize..4) {
        let k = k.min(n - 1);
        let points = random_matrix(n, d, seed);
        let oracle = brute_force_knn(&points, k).unwrap();
        let tree = KdTree::new(&points);
        for (i, expect) in oracle.iter().enumerate() {
            prop_assert_eq!(&tree.nearest(i, k), expect);
        }
        let g = knn_graph(&points, k).unwrap();
        let mut edges: Vec<(usize, usize)> = oracle
            .iter()
            .enumerate()
            .flat_map(|(i, nb)| nb.iter().map(move |&j| (i.min(j), i.max(j))))
            .collect();
        edges.sort();
        edges.dedup();
        prop_assert_eq!(g.edges(), &edges[..]);
    }
}
