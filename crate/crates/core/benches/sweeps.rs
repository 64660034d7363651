use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use cks_core::parallel::Execution;
use cks_core::suites::{run_suite, SuiteConfig};

fn sweeps(c: &mut Criterion) {
    let mut group = c.benchmark_group("suite sweeps");
    group.sample_size(10);
    for (key, trials) in [("norm-sandwich", 200), ("generalized-growth-bound", 500), ("wick-product", 50)] {
        for (name, exec) in [("parallel", Execution::Parallel), ("sequential", Execution::Sequential)] {
            let cfg = SuiteConfig {
                seed: 7,
                trials: Some(trials),
                exec,
                ..SuiteConfig::default()
            };
            group.bench_with_input(BenchmarkId::new(key, name), &cfg, |b, cfg| {
                b.iter(|| run_suite(key, cfg).unwrap());
            });
        }
    }
    group.finish();
}

criterion_group!(benches, sweeps);
criterion_main!(benches);
