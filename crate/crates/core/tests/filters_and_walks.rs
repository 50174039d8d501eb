mod common;

use common::{max_abs_diff, p2, random_graph, random_matrix};
use faer::linalg::solvers::Solve;
use faer::Mat;
use gfnn::exec::Execution;
use gfnn::filters::{
    lrls_denoise, optimal_k_estimate, propagate_k, return_probability, return_probability_spectral,
    return_probability_with, FilterKind, FilterSpec, ReturnMethod,
};
use gfnn::spectral::{eigenbasis, EigenMode};
use ndarray::{array, Array2};
use proptest::prelude::*;

#[test]
fn lrls_matches_dense_solve() {
    for seed in 0..6 {
        let n = 40;
        let g = random_graph(n, 0.08, seed);
        let gamma = 1.0;
        let x = random_matrix(n, 3, seed + 7);
        let mut system = g.laplacian_dense();
        let mut rhs = x.clone();
        for i in 0..n {
            let d = g.degree(i) as f64 + gamma;
            system[[i, i]] += d;
            rhs.row_mut(i).mapv_inplace(|v| v * d);
        }
        let a = Mat::from_fn(n, n, |i, j| system[[i, j]]);
        let b = Mat::from_fn(n, 3, |i, j| rhs[[i, j]]);
        let sol = a.partial_piv_lu().solve(&b);
        let dense = Array2::from_shape_fn((n, 3), |(i, j)| sol[(i, j)]);
        let got = lrls_denoise(&g, gamma, x.view()).unwrap();
        assert!(max_abs_diff(&got, &dense) < 1e-9);
    }
}

#[test]
fn k2_fixtures() {
    let g = p2();
    for k in 1..4 {
        let r = return_probability(&g, 1.0, k, ReturnMethod::Exact).unwrap();
        assert!((r.value - 0.5).abs() < 1e-12);
        let spec = FilterSpec::new(FilterKind::LeftNorm, 1.0, k);
        let y = propagate_k(&g, &spec, array![[1.0], [0.0]].view()).unwrap();
        assert!(max_abs_diff(&y, &array![[0.5], [0.5]]) < 1e-12);
    }
    let b = eigenbasis(&g, 1.0, EigenMode::Full).unwrap();
    assert!((return_probability_spectral(&b, 2).unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn montecarlo_agrees_with_exact() {
    for (seed, gamma) in [(1u64, 1.0), (2, 0.5), (3, 2.0)] {
        let g = gfnn::data::random_connected_graph(50, 0.06, seed).unwrap();
        for k in [1, 2, 4] {
            let exact = return_probability(&g, gamma, k, ReturnMethod::Exact).unwrap().value;
            let mc = return_probability(
                &g,
                gamma,
                k,
                ReturnMethod::MonteCarlo { walks: 200_000, seed },
            )
            .unwrap();
            assert!(
                (mc.value - exact).abs() <= 3.0 * mc.std_error,
                "k={k}: {} vs {exact} (se {})",
                mc.value,
                mc.std_error
            );
        }
    }
}

#[test]
fn exact_matches_spectral_formula() {
    let g = random_graph(70, 0.05, 11);
    let b = eigenbasis(&g, 1.0, EigenMode::Full).unwrap();
    for k in 0..6 {
        let exact = return_probability(&g, 1.0, k, ReturnMethod::Exact).unwrap().value;
        assert!((exact - return_probability_spectral(&b, k).unwrap()).abs() < 1e-10);
    }
}

#[test]
fn return_estimates_are_thread_invariant() {
    let g = random_graph(300, 0.02, 5);
    let method = ReturnMethod::MonteCarlo { walks: 20_000, seed: 9 };
    let a = return_probability_with(&g, 1.0, 3, method, Execution::Sequential).unwrap();
    let b = return_probability_with(&g, 1.0, 3, method, Execution::Parallel).unwrap();
    assert_eq!(a, b);
}

#[test]
fn optimal_k_formula() {
    let expect = |eps: f64, rho: f64, delta: f64| {
        let v = ((1.0f64 / delta).ln() * rho / eps).ln().ceil();
        v.max(1.0) as usize
    };
    for (eps, rho, delta) in [(0.01, 1.0, 0.2), (0.1, 1.0, 0.1), (0.5, 0.1, 0.4), (0.001, 10.0, 0.05)] {
        assert_eq!(optimal_k_estimate(eps, rho, delta).unwrap(), expect(eps, rho, delta));
    }
    // ln(ln 5 / 0.01) = ln 160.94 = 5.08
    assert_eq!(optimal_k_estimate(0.01, 1.0, 0.2).unwrap(), 6);
    assert!(optimal_k_estimate(0.0, 1.0, 0.2).is_err());
    assert!(optimal_k_estimate(0.1, 1.0, 0.6).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn return_probability_is_monotone_in_unit_interval(
        n in 2usize..25, seed in any::<u64>(), gamma in 0.1f64..3.0
    ) {
        let g = random_graph(n, 0.3, seed);
        let mut last = 1.0 + 1e-12;
        for k in 0..6 {
            let r = return_probability(&g, gamma, k, ReturnMethod::Exact).unwrap().value;
            prop_assert!(r > 0.0 && r <= last + 1e-12);
            last = r;
        }
    }

    #[test]
    fn lrls_smooths(n in 3usize..30, seed in any::<u64>()) {
        let g = random_graph(n, 0.4, seed);
        let x = random_matrix(n, 1, seed ^ 1);
        let y = lrls_denoise(&g, 1.0, x.view()).unwrap();
        let vx = gfnn::graph::variation(&g, x.column(0)).unwrap();
        let vy = gfnn::graph::variation(&g, y.column(0)).unwrap();
        prop_assert!(vy <= vx + 1e-10);
    }
}
