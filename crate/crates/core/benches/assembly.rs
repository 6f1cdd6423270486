use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use msbem::assembly::{assemble_hypersingular, assemble_single_layer, KernelConfig, QuadratureConfig};
use msbem::geometry::make_junction_screen;
use msbem::par;
use msbem::spaces::{multitrace_space, Problem, Reduction, Side};

fn assembly(c: &mut Criterion) {
    let kc = KernelConfig::real(1.0).unwrap();
    let q = QuadratureConfig::default();
    let mut group = c.benchmark_group("assembly");
    group.sample_size(10);
    for h in [0.25, 0.2] {
        let screen = make_junction_screen(3, 1.0, h).unwrap();
        let dir = multitrace_space(&screen, Problem::Dirichlet, Side::Primal, Reduction::Full).unwrap();
        let neu = multitrace_space(&screen, Problem::Neumann, Side::Primal, Reduction::Full).unwrap();
        for (mode, sequential) in [("parallel", false), ("sequential", true)] {
            par::set_deterministic(sequential);
            group.bench_with_input(BenchmarkId::new(format!("V/{mode}"), h), &dir, |b, sp| {
                b.iter(|| assemble_single_layer(sp, sp, &kc, &q).unwrap())
            });
            group.bench_with_input(BenchmarkId::new(format!("W/{mode}"), h), &neu, |b, sp| {
                b.iter(|| assemble_hypersingular(sp, sp, &kc, &q).unwrap())
            });
        }
    }
    par::set_deterministic(false);
    group.finish();
}

criterion_group!(benches, assembly);
criterion_main!(benches);
