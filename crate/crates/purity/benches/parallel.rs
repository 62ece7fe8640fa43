//! Parallel vs sequential execution of the crate's batch workloads: the
//! multi-start deficit optimizer and the inequality sweeps. Both paths run
//! the same per-index closures through the exec shim, so the comparison
//! isolates the scheduling.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use purity::exec;
use purity::povm_opt::{one_shot_deficit, OptimizerConfig};
use purity::qmat::BipartiteState;
use purity::random;
use purity::{entropy, qmat};

fn deficit_restart_workload(run: impl Fn(usize, &(dyn Fn(usize) -> f64 + Sync)) -> Vec<f64>) -> f64 {
    let state = BipartiteState::common_randomness_bit();
    let per_restart = |idx: usize| -> f64 {
        let cfg = OptimizerConfig::seeded(100 + idx as u64)
            .with_restarts(1)
            .with_max_iters(60);
        one_shot_deficit(&state, &cfg).expect("valid state").value
    };
    run(8, &per_restart).into_iter().fold(0.0, f64::max)
}

fn bench_deficit_restarts(c: &mut Criterion) {
    let mut group = c.benchmark_group("deficit_restarts");
    group.sample_size(10);
    group.bench_function(BenchmarkId::new("serial", 8), |b| {
        b.iter(|| deficit_restart_workload(|n, f| exec::map_indexed_serial(n, f)))
    });
    #[cfg(feature = "parallel")]
    group.bench_function(BenchmarkId::new("parallel", 8), |b| {
        b.iter(|| deficit_restart_workload(|n, f| exec::map_indexed_parallel(n, f)))
    });
    group.finish();
}

fn inequality_instance(i: usize) -> f64 {
    let mut rng = random::rng(i as u64);
    let rho = random::density(&mut rng, 4);
    let omega = random::density(&mut rng, 4);
    let (lhs, rhs) = entropy::fannes_check(&rho, &omega).expect("equal dims");
    let s = random::bipartite(&mut rng, 2, 2);
    let margin = entropy::subadditivity_check(&s);
    let phi = random::pure_state(&mut rng, 4);
    let (d, b) = qmat::fidelity_pure_bound(&rho, &phi).expect("valid");
    (rhs - lhs).min(margin).min(b - d)
}

fn bench_inequality_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("inequality_sweep");
    group.sample_size(10);
    for &n in &[256usize, 1024] {
        group.bench_function(BenchmarkId::new("serial", n), |b| {
            b.iter(|| {
                exec::map_indexed_serial(n, inequality_instance)
                    .into_iter()
                    .fold(f64::INFINITY, f64::min)
            })
        });
        #[cfg(feature = "parallel")]
        group.bench_function(BenchmarkId::new("parallel", n), |b| {
            b.iter(|| {
                exec::map_indexed_parallel(n, inequality_instance)
                    .into_iter()
                    .fold(f64::INFINITY, f64::min)
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench_deficit_restarts, bench_inequality_sweep);
criterion_main!(benches);
