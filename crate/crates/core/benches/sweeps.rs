use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use brl_core::charpoly::{match_roots, mode_quartic, mode_roots_closed, solve_quartic};
use brl_core::par;
use brl_core::params::{admissible_p_grid, Parameters};
use brl_core::shooting::{find_b_tilde_many, find_b_tilde_many_seq, ShootingConfig};

fn root_grid() -> Vec<(u32, f64)> {
    (3..=15)
        .flat_map(|n| admissible_p_grid(n, 20).into_iter().map(move |p| (n, p)))
        .collect()
}

fn fidelity(&(n, p): &(u32, f64)) -> f64 {
    let params = Parameters::new(n, p).unwrap();
    (0..=12)
        .map(|k| {
            let closed = mode_roots_closed(&params, k).unwrap();
            let numeric = solve_quartic(&mode_quartic(&params, k).unwrap()).unwrap();
            match_roots(&closed.roots, &numeric.roots).max_distance
        })
        .fold(0.0, f64::max)
}

fn roots(c: &mut Criterion) {
    let grid = root_grid();
    let mut g = c.benchmark_group("root_fidelity_grid");
    g.bench_function(BenchmarkId::new("parallel", grid.len()), |b| {
        b.iter(|| par::map(&grid, fidelity))
    });
    g.bench_function(BenchmarkId::new("sequential", grid.len()), |b| {
        b.iter(|| par::map_seq(&grid, fidelity))
    });
    g.finish();
}

fn shooting(c: &mut Criterion) {
    let cfg = ShootingConfig::default();
    let points: Vec<(f64, Parameters)> = [(5, 2.0), (6, 3.0), (4, 2.0), (7, 1.5), (10, 5.0), (13, 2.0), (3, 2.5), (8, 4.0)]
        .into_iter()
        .map(|(n, p)| (1.0, Parameters::new(n, p).unwrap()))
        .collect();
    let mut g = c.benchmark_group("batch_shooting");
    g.sample_size(10);
    g.bench_function(BenchmarkId::new("parallel", points.len()), |b| {
        b.iter(|| find_b_tilde_many(&points, &cfg))
    });
    g.bench_function(BenchmarkId::new("sequential", points.len()), |b| {
        b.iter(|| find_b_tilde_many_seq(&points, &cfg))
    });
    g.finish();
}

criterion_group!(benches, roots, shooting);
criterion_main!(benches);
