use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gaussbv_bench::{ball, grid, interval, smooth};
use gaussbv_core::bv::{grid_schedule, perimeter, tv_dual, tv_relaxation, tv_semigroup};
use gaussbv_core::semigroup::ou_apply;
use gaussbv_core::variational::{rof_minimize, ConvexIntegrand};
use gaussbv_core::{GridField, Regularity};

fn tv_routes(c: &mut Criterion) {
    let g = grid(1, 513);
    let u = interval(&g);
    let schedule = grid_schedule(&g);
    let mut group = c.benchmark_group("tv_1d_513");
    group.bench_function("dual", |b| b.iter(|| tv_dual(&u, 500, 0).unwrap()));
    group.bench_function("semigroup", |b| b.iter(|| tv_semigroup(&u, &schedule).unwrap()));
    group.bench_function("relaxation", |b| b.iter(|| tv_relaxation(&u, &schedule).unwrap()));
    group.finish();

    let g2 = grid(2, 129);
    let e = ball(&g2);
    let mut group = c.benchmark_group("perimeter_2d");
    group.sample_size(10);
    group.bench_function("ball_129", |b| b.iter(|| perimeter(&e).unwrap()));
    group.finish();
}

fn ou(c: &mut Criterion) {
    let mut group = c.benchmark_group("ou_apply");
    for (dim, n) in [(1, 513), (2, 129), (2, 257), (3, 33)] {
        let g = grid(dim, n);
        let u = smooth(&g);
        group.bench_with_input(BenchmarkId::new(format!("d{dim}"), n), &u, |b, u| {
            b.iter(|| ou_apply(u, 0.1).unwrap())
        });
    }
    group.finish();
}

fn rof(c: &mut Criterion) {
    let g = grid(1, 257);
    let data = GridField::from_fn(&g, Regularity::Smooth, |x| x[0].abs()).unwrap();
    let mut group = c.benchmark_group("rof_1d_257");
    group.sample_size(10);
    for (name, f) in [("norm", ConvexIntegrand::norm()), ("half_square", ConvexIntegrand::half_square())] {
        group.bench_function(name, |b| b.iter(|| rof_minimize(&f, &data, 1e-6, 100_000).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, tv_routes, ou, rof);
criterion_main!(benches);
