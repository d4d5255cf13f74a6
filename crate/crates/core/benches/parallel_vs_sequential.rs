use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pvt_energy::network::NetworkConfig;
use pvt_energy::power_average::mc_cell_power_average;
use pvt_energy::power_waterfill::mc_cell_power_wf;
use pvt_energy::Exec;

const POLICIES: [(&str, Exec); 2] = [("parallel", Exec::Parallel), ("sequential", Exec::Sequential)];

fn waterfill_cells(c: &mut Criterion) {
    let cfg = NetworkConfig::baseline();
    let mut group = c.benchmark_group("waterfill_cells");
    group.sample_size(10);
    for (name, exec) in POLICIES {
        group.bench_with_input(BenchmarkId::new(name, 500), &exec, |b, &exec| {
            b.iter(|| mc_cell_power_wf(black_box(&cfg), &[30.0], 500, 1, exec).unwrap())
        });
    }
    group.finish();
}

fn average_cells(c: &mut Criterion) {
    let cfg = NetworkConfig::baseline();
    let mut group = c.benchmark_group("average_cells");
    group.sample_size(10);
    for (name, exec) in POLICIES {
        group.bench_with_input(BenchmarkId::new(name, 2000), &exec, |b, &exec| {
            b.iter(|| mc_cell_power_average(black_box(&cfg), &[30.0], 2000, 1, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, waterfill_cells, average_cells);
criterion_main!(benches);
