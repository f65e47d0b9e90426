use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use qspread_core::algebra::{parse_poly, qsd_power, EvolutionSpec};
use qspread_core::pricer::{implied_vol_smile, price_spread, Payoff};
use qspread_core::spread::{invert_cf, lattice_law};
use qspread_core::SpreadParams;

fn algebra(c: &mut Criterion) {
    let a = parse_poly("x*Dx + i*s*eps*De - 1/2*s^2*Dx^2").unwrap();
    let b = parse_poly("Dx*x - eps^2*De + 3").unwrap();
    c.bench_function("nc_mul", |bench| bench.iter(|| black_box(&a) * black_box(&b)));

    let dx = EvolutionSpec::extended(0.3).generator_coeffs().differential();
    c.bench_function("qsd_power_k6", |bench| bench.iter(|| qsd_power(black_box(&dx), 6).unwrap()));
}

fn laws(c: &mut Criterion) {
    let p = SpreadParams::new(0.2, 0.1, 0.2, 1.0, 0.0).unwrap();
    c.bench_function("lattice_law", |bench| bench.iter(|| lattice_law(black_box(&p)).unwrap()));
    c.bench_function("invert_cf_4096", |bench| bench.iter(|| invert_cf(black_box(&p), 4096, 12.0).unwrap()));
}

fn pricing(c: &mut Criterion) {
    let p = SpreadParams::new(0.2, 0.1, 0.2, 1.0, 0.0).unwrap();
    let call = Payoff::Call { strike: 0.1 };
    c.bench_function("price_spread_call", |bench| bench.iter(|| price_spread(black_box(&call), &p).unwrap()));
    let strikes: Vec<f64> = (-8..=8).map(|i| i as f64 * 0.05).collect();
    c.bench_function("smile_17", |bench| bench.iter(|| implied_vol_smile(&p, black_box(&strikes)).unwrap()));
}

criterion_group!(benches, algebra, laws, pricing);
criterion_main!(benches);
