use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use hcgame_core::classical::brute_force_classical_value;
use hcgame_core::nosignalling::build_ns_correlation;
use hcgame_core::quantum::{average_win, maximize_r, winning_probability_simulated, QuantumStrategy};

fn bench_classical(c: &mut Criterion) {
    let mut group = c.benchmark_group("classical");
    group.sample_size(10);
    group.bench_function("brute_force_m3_parity", |b| b.iter(|| brute_force_classical_value(black_box(3), true)));
    group.bench_function("brute_force_m2", |b| b.iter(|| brute_force_classical_value(black_box(2), false)));
    group.finish();
}

fn bench_quantum(c: &mut Criterion) {
    let s = QuantumStrategy::new(6, 0.4).unwrap();
    c.bench_function("simulated_average_m6", |b| b.iter(|| average_win(black_box(&s), winning_probability_simulated)));
    for e in [1u32, 11, 63] {
        c.bench_function(&format!("maximize_r_{e}"), |b| b.iter(|| maximize_r(black_box(e))));
    }
}

fn bench_nosignalling(c: &mut Criterion) {
    c.bench_function("ns_build_m4", |b| b.iter(|| build_ns_correlation(black_box(4))));
}

criterion_group!(benches, bench_classical, bench_quantum, bench_nosignalling);
criterion_main!(benches);
