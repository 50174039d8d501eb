use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gfnn::data::random_connected_graph;
use gfnn::exec::Execution;
use gfnn::filters::{return_probability_with, FilterKind, ReturnMethod};
use gfnn::graph::PropagationOperator;
use ndarray::Array2;

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn operator_apply(c: &mut Criterion) {
    let g = random_connected_graph(20_000, 4e-4, 1).unwrap();
    let op = PropagationOperator::new(&g, FilterKind::LeftNorm, 1.0).unwrap();
    let x = Array2::from_shape_fn((20_000, 64), |(i, j)| ((i * 31 + j * 17) % 101) as f64 / 101.0);
    let mut group = c.benchmark_group("operator_apply");
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| op.apply_with(x.view(), exec).unwrap())
        });
    }
    group.finish();
}

fn montecarlo_return(c: &mut Criterion) {
    let g = random_connected_graph(5_000, 1e-3, 2).unwrap();
    let method = ReturnMethod::MonteCarlo { walks: 100_000, seed: 0 };
    let mut group = c.benchmark_group("montecarlo_return");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| return_probability_with(&g, 1.0, 4, method, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, operator_apply, montecarlo_return);
criterion_main!(benches);
