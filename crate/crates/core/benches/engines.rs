use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion};

use kappa_psi::correlator::{admissible_keys, cross_check};
use kappa_psi::verify::{annihilation_check, commutator_check, Bounds};
use kappa_psi::{Engine, EngineSet, Evaluator, Execution};

const MODES: [Execution; 2] = [Execution::Sequential, Execution::Parallel];

fn batch_evaluation(c: &mut Criterion) {
    let keys = admissible_keys(7, 4);
    let mut group = c.benchmark_group("batch_evaluation");
    for engine in [Engine::KmzDvv, Engine::Alpha] {
        for exec in MODES {
            group.bench_with_input(BenchmarkId::new(engine.name(), format!("{exec:?}")), &exec, |b, &exec| {
                b.iter_batched(
                    || Evaluator::new(engine),
                    |ev| ev.evaluate_batch(&keys, exec),
                    BatchSize::LargeInput,
                )
            });
        }
    }
    group.finish();
}

fn cross_engine(c: &mut Criterion) {
    let keys = admissible_keys(6, 3);
    let mut group = c.benchmark_group("cross_engine");
    for exec in MODES {
        group.bench_function(format!("{exec:?}"), |b| {
            b.iter_batched(EngineSet::new, |set| cross_check(&set, &keys, exec).unwrap(), BatchSize::LargeInput)
        });
    }
    group.finish();
}

fn verification(c: &mut Criterion) {
    let bounds = Bounds::default();
    let mut group = c.benchmark_group("verification");
    group.sample_size(10);
    for exec in MODES {
        group.bench_function(format!("commutator/{exec:?}"), |b| {
            b.iter(|| commutator_check(2, -1, bounds, 3, exec).unwrap())
        });
        group.bench_function(format!("annihilation/{exec:?}"), |b| {
            b.iter_batched(
                || Evaluator::new(Engine::Alpha),
                |ev| annihilation_check(1, 3, bounds, &ev, exec).unwrap(),
                BatchSize::LargeInput,
            )
        });
    }
    group.finish();
}

criterion_group!(benches, batch_evaluation, cross_engine, verification);
criterion_main!(benches);
