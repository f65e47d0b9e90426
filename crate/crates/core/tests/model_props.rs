use std::f64::consts::{FRAC_PI_4, PI};

use proptest::prelude::*;
use qspread_core::algebra::spread_price_operator;
use qspread_core::gaussian::{contracted_quadratic_variation, variance};
use qspread_core::pricer::{arbitrage_check, price_gaussian, price_spread, DriftMode, Payoff, Verdict};
use qspread_core::spread::{composition_count, cumulant, lattice_law, moment, ordered_partitions};
use qspread_core::{GaussianModelParams, MarketState, SpreadParams, TerminalLaw, WavepacketParams};

fn packet() -> impl Strategy<Value = WavepacketParams> {
    (95.0f64..105.0, 0.0f64..1.0, 0.3f64..2.0, 0.05f64..0.5)
        .prop_map(|(x, e, sx, se)| WavepacketParams::new(x, e, sx, se).unwrap())
}

fn state() -> impl Strategy<Value = MarketState> {
    (0.0f64..=1.0, packet(), packet()).prop_map(|(w, a, b)| MarketState::new(w, a, b).unwrap())
}

fn spread_params() -> impl Strategy<Value = SpreadParams> {
    (0.05f64..0.5, 0.01f64..0.3, -1.0f64..=1.0, 0.1f64..5.0, -5.0f64..5.0)
        .prop_map(|(v, e, d, t, x0)| SpreadParams::new(v, e, d, t, x0).unwrap())
}

/// Trapezoid rule on `[lo, hi]`.
fn trapezoid(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
    let h = (hi - lo) / n as f64;
    let mut s = 0.5 * (f(lo) + f(hi));
    for k in 1..n {
        s += f(lo + k as f64 * h);
    }
    s * h
}

fn amplitude(m: f64, s: f64, x: f64) -> f64 {
    let z = (x - m) / s;
    ((-0.5 * z * z).exp() / (s * (2.0 * PI).sqrt())).sqrt()
}

/// `⟨ψ|diag(x + eps/2, x - eps/2)|ψ⟩` by separable quadrature.
fn quad_price(st: &MarketState) -> f64 {
    let (w_o, w_b) = st.norms();
    let mut total = 0.0;
    for (w, p, sign) in [(w_o, st.packet_o, 1.0), (w_b, st.packet_b, -1.0)] {
        let (lx, hx) = (p.x_mid - 12.0 * p.spread_x, p.x_mid + 12.0 * p.spread_x);
        let (le, he) = (p.eps0 - 12.0 * p.spread_eps, p.eps0 + 12.0 * p.spread_eps);
        let dx = |f: &dyn Fn(f64) -> f64| trapezoid(|x| amplitude(p.x_mid, p.spread_x, x).powi(2) * f(x), lx, hx, 4000);
        let de = |f: &dyn Fn(f64) -> f64| trapezoid(|e| amplitude(p.eps0, p.spread_eps, e).powi(2) * f(e), le, he, 4000);
        let mean_x = dx(&|x| x) * de(&|_| 1.0);
        let mean_e = dx(&|_| 1.0) * de(&|e| e);
        total += w * (mean_x + sign * mean_e / 2.0);
    }
    total
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norms_sum_to_one(st in state()) {
        let (a, b) = st.norms();
        prop_assert!((a + b - 1.0).abs() <= 1e-14);
    }

    #[test]
    fn unrotated_price_is_the_quote_operator(st in state()) {
        let direct = st.expect_operator(&spread_price_operator()).unwrap();
        prop_assert!((st.rotated_price_expectation(0.0) - direct).abs() <= 1e-12 * direct.abs());
    }

    #[test]
    fn price_expectation_matches_quadrature(st in state()) {
        let q = quad_price(&st);
        prop_assert!((st.rotated_price_expectation(0.0) - q).abs() <= 1e-8 * q.abs().max(1.0));
    }

    #[test]
    fn bear_rotation_lowers_balanced_price(p in packet()) {
        prop_assume!(p.eps0 > 1e-3);
        let st = MarketState::balanced(p);
        let values: Vec<f64> = (0..=20).map(|i| st.rotated_price_expectation(FRAC_PI_4 * i as f64 / 20.0)).collect();
        for w in values.windows(2) {
            prop_assert!(w[1] < w[0]);
        }
    }

    #[test]
    fn variance_within_eigenvalue_bounds(
        st in state(), sx in 0.0f64..0.5, se in 0.0f64..1.0, theta in -PI..PI, t in 0.0f64..4.0,
    ) {
        let g = GaussianModelParams::new(sx, se, theta, t).unwrap();
        let v = variance(&g, &st);
        let lo = (sx - se / 2.0).powi(2) * t;
        let hi = (sx + se / 2.0).powi(2) * t;
        prop_assert!(v >= 0.0);
        prop_assert!(v >= lo - 1e-14 && v <= hi + 1e-14);
    }

    #[test]
    fn variance_linear_in_time(st in state(), sx in 0.0f64..0.5, se in 0.0f64..1.0, theta in -PI..PI, t in 0.1f64..4.0) {
        let one = variance(&GaussianModelParams::new(sx, se, theta, 1.0).unwrap(), &st);
        let at_t = variance(&GaussianModelParams::new(sx, se, theta, t).unwrap(), &st);
        prop_assert!((at_t - t * one).abs() <= 1e-13 * (1.0 + at_t.abs()));
    }

    #[test]
    fn contraction_flips_overlap_sign(st in state(), sx in 0.0f64..0.5, se in 0.0f64..1.0, theta in -PI..PI) {
        // the symbolic dt coefficient has -sin(2θ) sx se off the diagonal
        let g = GaussianModelParams::new(sx, se, theta, 1.0).unwrap();
        let (w_o, w_b) = st.norms();
        let (s2, c2) = (2.0 * theta).sin_cos();
        let expected = sx * sx + se * se / 4.0 + c2 * sx * se * (w_o - w_b) - s2 * 2.0 * st.overlap() * sx * se;
        let got = contracted_quadratic_variation(&g, &st).unwrap();
        prop_assert!((got - expected).abs() <= 1e-12);
    }

    #[test]
    fn contraction_agrees_without_rotation(st in state(), sx in 0.0f64..0.5, se in 0.0f64..1.0, t in 0.0f64..4.0) {
        for theta in [0.0, PI / 2.0] {
            let g = GaussianModelParams::new(sx, se, theta, t).unwrap();
            let c = contracted_quadratic_variation(&g, &st).unwrap();
            prop_assert!((c - variance(&g, &st)).abs() <= 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lattice_law_is_a_martingale(p in spread_params()) {
        let l = lattice_law(&p).unwrap();
        prop_assert!((l.total_mass() - 1.0).abs() <= 1e-12);
        prop_assert!((l.mean() - p.x0).abs() <= 1e-10);
        prop_assert!((l.moment_about(2, p.x0) - p.variance()).abs() <= 1e-10);
    }

    #[test]
    fn lattice_moments_match_analytic(p in spread_params()) {
        let l = lattice_law(&p).unwrap();
        for k in 2..=6 {
            let a = moment(k, &p).unwrap();
            let scale = a.abs().max(p.variance().powf(k as f64 / 2.0));
            prop_assert!((l.moment_about(k, p.x0) - a).abs() <= 1e-8 * scale, "k = {}", k);
        }
    }

    #[test]
    fn skew_follows_imbalance(p in spread_params()) {
        let m3 = moment(3, &p).unwrap();
        prop_assert_eq!(m3 < 0.0, p.delta < 0.0);
        prop_assert_eq!(m3 > 0.0, p.delta > 0.0);
    }

    #[test]
    fn cumulants_are_scaled_series_coefficients(p in spread_params(), k in 2u32..12) {
        let fact: f64 = (1..=k).map(f64::from).product();
        let c = cumulant(k, &p).unwrap();
        prop_assert!((c - fact * p.series_coeff(k) * p.t).abs() <= 1e-15 * fact.max(1.0));
    }

    #[test]
    fn put_call_parity(p in spread_params(), shift in -1.0f64..1.0) {
        let k = p.x0 + shift * p.variance().sqrt();
        let c = price_spread(&Payoff::Call { strike: k }, &p).unwrap().price;
        let q = price_spread(&Payoff::Put { strike: k }, &p).unwrap().price;
        prop_assert!((c - q - (p.x0 - k)).abs() <= 1e-10);
        let sigma = p.vol;
        let c = price_gaussian(&Payoff::Call { strike: k }, sigma, p.t, p.x0, DriftMode::Martingale).unwrap().price;
        let q = price_gaussian(&Payoff::Put { strike: k }, sigma, p.t, p.x0, DriftMode::Martingale).unwrap().price;
        prop_assert!((c - q - (p.x0 - k)).abs() <= 1e-10);
    }

    #[test]
    fn forward_prices_at_spot(p in spread_params()) {
        let s = price_spread(&Payoff::identity(), &p).unwrap().price;
        let g = price_gaussian(&Payoff::identity(), p.vol, p.t, p.x0, DriftMode::Martingale).unwrap().price;
        prop_assert!((s - p.x0).abs() <= 1e-10 && (g - p.x0).abs() <= 1e-10);
    }

    #[test]
    fn calls_decrease_and_convex_in_strike(p in spread_params()) {
        let sd = p.variance().sqrt();
        let prices: Vec<f64> = (-12..=12)
            .map(|i| price_spread(&Payoff::Call { strike: p.x0 + i as f64 * sd / 6.0 }, &p).unwrap().price)
            .collect();
        for w in prices.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-15);
        }
        for w in prices.windows(3) {
            prop_assert!(w[0] - 2.0 * w[1] + w[2] >= -1e-12);
        }
    }

    #[test]
    fn fair_prices_are_not_arbitrage(p in spread_params(), shift in -1.0f64..1.0) {
        let k = p.x0 + shift * p.variance().sqrt();
        for pay in [Payoff::Call { strike: k }, Payoff::Put { strike: k }, Payoff::DigitalCall { strike: k }] {
            let r = price_spread(&pay, &p).unwrap();
            prop_assert_eq!(r.verdict, Verdict::NoArbitrageWeakEvidence);
        }
    }

    #[test]
    fn nonnegative_nonzero_payout_is_arbitrage(p in spread_params()) {
        let law = TerminalLaw::Lattice(lattice_law(&p).unwrap());
        let x0 = p.x0;
        prop_assert_eq!(arbitrage_check(|x| (x - x0).abs(), &law).verdict, Verdict::Arbitrage);
    }
}

#[test]
fn composition_count_recurrence() {
    let mut c = [0u64; 21];
    c[2] = 1;
    c[3] = 1;
    for k in 4..=20 {
        c[k] = 1 + (2..=k - 2).map(|j| c[k - j]).sum::<u64>();
    }
    for k in 2..=20u32 {
        assert_eq!(composition_count(k), c[k as usize], "k = {k}");
        if k <= 16 {
            assert_eq!(ordered_partitions(k).unwrap().len() as u64, c[k as usize]);
        }
    }
}

#[test]
fn kolmogorov_distance_shrinks_with_spread() {
    let mut last = f64::INFINITY;
    for eps in [0.2, 0.1, 0.05, 0.02, 0.01] {
        let p = SpreadParams::new(0.2, eps, 0.5, 1.0, 0.0).unwrap();
        let l = lattice_law(&p).unwrap();
        let sd = p.variance().sqrt();
        let normal = statrs::distribution::Normal::new(0.0, sd).unwrap();
        let mut ks = 0.0f64;
        let mut cum = 0.0;
        for (_, x, pr) in l.atoms() {
            use statrs::distribution::ContinuousCDF;
            let f = normal.cdf(x);
            ks = ks.max((cum - f).abs());
            cum += pr;
            ks = ks.max((cum - f).abs());
        }
        assert!(ks < last, "eps = {eps}: {ks} !< {last}");
        last = ks;
    }
    assert!(last < 0.05);
}
