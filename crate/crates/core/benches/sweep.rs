use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use thingkit::corpus::load_corpus;
use thingkit::sim::{AttrDist, Simulator, Value};
use thingkit::sweep::{mutation_sweep, mutation_sweep_sequential, run_seeds, run_seeds_sequential};

fn bench_seeds(c: &mut Criterion) {
    let entry = load_corpus("firewall").unwrap();
    let mut config = entry.config.clone();
    config.sources[0].count = 1000;
    config.sources[0].attributes.insert(
        "port".into(),
        AttrDist::Choice {
            values: vec![Value::Int(23), Value::Int(80)],
            weights: Some(vec![0.3, 0.7]),
        },
    );
    let sim = Simulator::new(&entry.model, &config).unwrap();

    let mut group = c.benchmark_group("firewall_seeds");
    group.sample_size(10);
    for n in [8u64, 32] {
        let seeds: Vec<u64> = (0..n).collect();
        group.bench_with_input(BenchmarkId::new("sequential", n), &seeds, |b, s| {
            b.iter(|| run_seeds_sequential(&sim, &entry.model, s))
        });
        group.bench_with_input(BenchmarkId::new("parallel", n), &seeds, |b, s| {
            b.iter(|| run_seeds(&sim, &entry.model, s))
        });
    }
    group.finish();
}

fn bench_mutations(c: &mut Criterion) {
    let entry = load_corpus("cloud_full").unwrap();
    let mut group = c.benchmark_group("cloud_full_mutations");
    group.sample_size(10);
    group.bench_function("sequential", |b| {
        b.iter(|| mutation_sweep_sequential(&entry.model))
    });
    group.bench_function("parallel", |b| b.iter(|| mutation_sweep(&entry.model)));
    group.finish();
}

criterion_group!(benches, bench_seeds, bench_mutations);
criterion_main!(benches);
