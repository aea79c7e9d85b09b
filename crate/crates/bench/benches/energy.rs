use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use falconer_bench::middle_thirds;
use falconer_core::energy::dyadic_sweep;
use falconer_core::{additive_energy, energy_profile, sumset_autocorrelation, EnergyAlgorithm};
use std::hint::black_box;

fn oracle_vs_fast(c: &mut Criterion) {
    let mut group = c.benchmark_group("additive_energy");
    for level in [3u32, 4, 5] {
        let nu = middle_thirds(level);
        for alg in [
            EnergyAlgorithm::Bruteforce,
            EnergyAlgorithm::Autocorrelation,
        ] {
            group.bench_with_input(BenchmarkId::new(format!("{alg:?}"), level), &nu, |b, nu| {
                b.iter(|| additive_energy(black_box(nu), 0.05, alg).unwrap())
            });
        }
    }
    group.finish();
}

fn sumset(c: &mut Criterion) {
    let nu = middle_thirds(10);
    c.bench_function("sumset_level10", |b| {
        b.iter(|| sumset_autocorrelation(black_box(&nu)))
    });
    let sweep = dyadic_sweep(&nu);
    c.bench_function("energy_profile_level10", |b| {
        b.iter(|| energy_profile(black_box(&nu), &sweep, 0.63).unwrap())
    });
}

criterion_group!(benches, oracle_vs_fast, sumset);
criterion_main!(benches);
