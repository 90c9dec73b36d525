use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rendezvous_core::engine::{detect_next_meeting, Trajectory};
use rendezvous_core::harness::{coins_for, run_sweep};
use rendezvous_core::oracle::enumerate;
use rendezvous_core::{run, EnumerationSpec, Placement, SweepSpec, WorldConfig};
use std::hint::black_box;

fn single_runs(c: &mut Criterion) {
    let mut group = c.benchmark_group("run");
    for n in [4usize, 16, 64] {
        let xs = Placement::UniformRandom.positions(n, 100.0, 1);
        group.bench_with_input(BenchmarkId::from_parameter(n), &xs, |b, xs| {
            let mut seed = 0u64;
            b.iter(|| {
                seed += 1;
                run(WorldConfig::new(xs.clone(), 1.28), coins_for(seed)).unwrap()
            })
        });
    }
    group.finish();
}

fn meeting_detection(c: &mut Criterion) {
    let trajectories: Vec<Trajectory> = (0..64)
        .map(|j| Trajectory {
            position: j as f64 * 3.0,
            velocity: if j % 3 == 0 { 1.0 } else { -1.0 },
        })
        .collect();
    c.bench_function("detect_next_meeting/64", |b| {
        b.iter(|| detect_next_meeting(black_box(&trajectories), 10.0, 1e-9))
    });
}

fn enumeration(c: &mut Criterion) {
    let spec = EnumerationSpec::new(WorldConfig::equidistant(3, 1.0, 1.28), 4);
    c.bench_function("enumerate/n3_h4", |b| {
        b.iter(|| enumerate(black_box(&spec)).unwrap())
    });
}

fn sweep_cell(c: &mut Criterion) {
    let mut spec = SweepSpec::new(vec![16], vec![75.0], vec![1.28]);
    spec.trials_per_cell = 20;
    c.bench_function("sweep/n16_d75_20trials", |b| {
        b.iter(|| run_sweep(black_box(&spec)).unwrap())
    });
}

criterion_group!(
    benches,
    single_runs,
    meeting_detection,
    enumeration,
    sweep_cell
);
criterion_main!(benches);
