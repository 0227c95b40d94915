use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hybridsim::config::{ExperimentConfig, SweepAxis, SweepConfig};
use hybridsim::sweep::{linspace, run_sweep, Execution};

fn grid(n: usize) -> SweepConfig {
    SweepConfig {
        axis1: SweepAxis {
            param: "couplings.gamma_r".into(),
            values: linspace(0.0, 1e7, n),
        },
        axis2: Some(SweepAxis {
            param: "device.gamma_p_over_2pi_hz".into(),
            values: linspace(1e6, 10e6, n),
        }),
    }
}

fn bench_sweep(c: &mut Criterion) {
    let base = ExperimentConfig::simulation();
    let mut group = c.benchmark_group("decoherence_grid");
    group.sample_size(10);
    for n in [2usize, 4] {
        let sweep = grid(n);
        for exec in [Execution::Sequential, Execution::Parallel] {
            group.bench_with_input(
                BenchmarkId::new(format!("{exec:?}"), n * n),
                &sweep,
                |b, s| b.iter(|| run_sweep(&base, s, exec).unwrap()),
            );
        }
    }
    group.finish();
}

criterion_group!(benches, bench_sweep);
criterion_main!(benches);
