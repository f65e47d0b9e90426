//! Martingale pricing of European payoffs under the Gaussian model and the
//! spread lattice law, arbitrage verdicts on outcome laws and implied
//! volatility smiles.
//!
//! Interest rates are zero, so a price is the plain expectation of the
//! payout under the terminal law.

use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::error::{check, ModelError, Result};
use crate::gaussian::{variance, GaussianModelParams};
use crate::market::{MarketState, WavepacketParams};
use crate::spread::{terminal_law, LatticeDistribution, SpreadParams, TerminalLaw};

/// Tolerance on `P(f >= 0) = 1` in [`arbitrage_check`].
pub const CERTAINTY_TOL: f64 = 1e-12;

/// Price tolerance of the implied volatility bisection.
pub const IMPLIED_VOL_TOL: f64 = 1e-10;

/// Largest tail contribution, relative to `max(1, |price|)`, accepted before
/// a price is declared truncation-dominated.
pub const TAIL_PRICE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payoff {
    Call { strike: f64 },
    Put { strike: f64 },
    /// Pays one when the outcome is strictly above the strike.
    DigitalCall { strike: f64 },
    /// Linear interpolation between the nodes and linear extrapolation
    /// along the end segments. A single node is a constant payoff.
    Custom { table: Vec<(f64, f64)> },
}

impl Payoff {
    pub fn custom(table: Vec<(f64, f64)>) -> Result<Self> {
        if table.is_empty() {
            return Err(ModelError::InvalidPayoff("custom table is empty".into()));
        }
        if table.iter().any(|(x, v)| !x.is_finite() || !v.is_finite()) {
            return Err(ModelError::InvalidPayoff("custom table has non-finite entries".into()));
        }
        if table.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(ModelError::InvalidPayoff("custom nodes must be strictly increasing".into()));
        }
        Ok(Payoff::Custom { table })
    }

    /// `χ(x) = x`.
    pub fn identity() -> Self {
        Payoff::Custom {
            table: vec![(0.0, 0.0), (1.0, 1.0)],
        }
    }

    pub fn constant(c: f64) -> Self {
        Payoff::Custom { table: vec![(0.0, c)] }
    }

    pub fn strike(&self) -> Option<f64> {
        match *self {
            Payoff::Call { strike } | Payoff::Put { strike } | Payoff::DigitalCall { strike } => Some(strike),
            Payoff::Custom { .. } => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Payoff::Custom { table } => Payoff::custom(table.clone()).map(|_| ()),
            p => {
                let k = p.strike().unwrap_or(0.0);
                check(k.is_finite(), "strike", "must be finite")
            }
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            Payoff::Call { strike } => (x - strike).max(0.0),
            Payoff::Put { strike } => (strike - x).max(0.0),
            Payoff::DigitalCall { strike } => {
                if x > *strike {
                    1.0
                } else {
                    0.0
                }
            }
            Payoff::Custom { table } => {
                if table.len() == 1 {
                    return table[0].1;
                }
                let i = table.partition_point(|&(xi, _)| xi <= x).clamp(1, table.len() - 1);
                let ((x0, v0), (x1, v1)) = (table[i - 1], table[i]);
                v0 + (v1 - v0) * (x - x0) / (x1 - x0)
            }
        }
    }

    /// Linear pieces `(lo, hi, a, b)` with `χ(x) = a + b x` on `(lo, hi)`.
    fn pieces(&self) -> Vec<(f64, f64, f64, f64)> {
        let inf = f64::INFINITY;
        match *self {
            Payoff::Call { strike } => vec![(-inf, strike, 0.0, 0.0), (strike, inf, -strike, 1.0)],
            Payoff::Put { strike } => vec![(-inf, strike, strike, -1.0), (strike, inf, 0.0, 0.0)],
            Payoff::DigitalCall { strike } => vec![(-inf, strike, 0.0, 0.0), (strike, inf, 1.0, 0.0)],
            Payoff::Custom { ref table } => {
                if table.len() == 1 {
                    return vec![(-inf, inf, table[0].1, 0.0)];
                }
                let n = table.len();
                (0..n - 1)
                    .map(|i| {
                        let ((x0, v0), (x1, v1)) = (table[i], table[i + 1]);
                        let b = (v1 - v0) / (x1 - x0);
                        let lo = if i == 0 { -inf } else { x0 };
                        let hi = if i == n - 2 { inf } else { x1 };
                        (lo, hi, v0 - b * x0, b)
                    })
                    .collect()
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelTag {
    Gaussian,
    Spread,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Arbitrage,
    NoArbitrageWeakEvidence,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftMode {
    Martingale,
    /// Mean shift `-σ² t / 2` from the one-dimensional pricing equation.
    ClassicalPde,
}

/// Mean and central moments of the terminal law.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LawMoments {
    pub mean: f64,
    pub variance: f64,
    pub third: f64,
    pub fourth: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PriceDiagnostics {
    /// Probability mass outside the retained lattice atoms.
    pub tail_mass: f64,
    /// Rough bound on the price contribution of the dropped tails.
    pub tail_price_bound: f64,
    pub atoms: usize,
    pub spacing: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PriceReport {
    pub payoff: Payoff,
    pub model: ModelTag,
    pub price: f64,
    pub moments: LawMoments,
    pub verdict: Verdict,
    pub diagnostics: PriceDiagnostics,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ArbitrageReport {
    pub p_positive: f64,
    pub p_nonnegative: f64,
    pub verdict: Verdict,
}

/// `V₀ = Σ χ(x_n) p_n` over the lattice law; `eps = 0` falls back to the
/// Gaussian martingale price.
pub fn price_spread(payoff: &Payoff, params: &SpreadParams) -> Result<PriceReport> {
    payoff.validate()?;
    let lattice = match terminal_law(params)? {
        TerminalLaw::Normal { sd, .. } => {
            let sigma = if params.t > 0.0 { sd / params.t.sqrt() } else { 0.0 };
            let mut report = price_gaussian(payoff, sigma, params.t, params.x0, DriftMode::Martingale)?;
            report.model = ModelTag::Spread;
            return Ok(report);
        }
        TerminalLaw::Lattice(l) => l,
    };
    let price = lattice.expectation(|x| payoff.value(x));
    let edge = payoff
        .value(lattice.position(lattice.n_min))
        .abs()
        .max(payoff.value(lattice.position(lattice.n_max())).abs());
    let tail_price_bound = lattice.tail_mass * edge;
    if tail_price_bound > TAIL_PRICE_TOL * price.abs().max(1.0) {
        return Err(ModelError::TruncationDominated(format!(
            "dropped tail mass {:e} can move the price by up to {tail_price_bound:e}",
            lattice.tail_mass
        )));
    }
    let verdict = arbitrage_check(|x| payoff.value(x) - price, &TerminalLaw::Lattice(lattice.clone())).verdict;
    Ok(PriceReport {
        payoff: payoff.clone(),
        model: ModelTag::Spread,
        price,
        moments: lattice_moments(&lattice),
        verdict,
        diagnostics: PriceDiagnostics {
            tail_mass: lattice.tail_mass,
            tail_price_bound,
            atoms: lattice.probs.len(),
            spacing: lattice.step,
        },
    })
}

fn lattice_moments(l: &LatticeDistribution) -> LawMoments {
    let mean = l.mean();
    LawMoments {
        mean,
        variance: l.moment_about(2, mean),
        third: l.moment_about(3, mean),
        fourth: l.moment_about(4, mean),
    }
}

/// Expectation of the payoff under `N(x0 + m, σ² t)`. Vanilla payoffs use
/// the normal-model closed forms; custom tables are integrated exactly
/// piece by piece.
pub fn price_gaussian(payoff: &Payoff, sigma: f64, t: f64, x0: f64, drift_mode: DriftMode) -> Result<PriceReport> {
    payoff.validate()?;
    check(sigma.is_finite() && sigma >= 0.0, "sigma", "must be >= 0")?;
    check(t.is_finite() && t >= 0.0, "t", "must be >= 0")?;
    check(x0.is_finite(), "x0", "must be finite")?;
    let var = sigma * sigma * t;
    let mean = match drift_mode {
        DriftMode::Martingale => x0,
        DriftMode::ClassicalPde => x0 - var / 2.0,
    };
    let sd = var.sqrt();
    let price = normal_expectation(payoff, mean, sd);
    let verdict = arbitrage_check(|x| payoff.value(x) - price, &TerminalLaw::Normal { mean, sd }).verdict;
    Ok(PriceReport {
        payoff: payoff.clone(),
        model: ModelTag::Gaussian,
        price,
        moments: LawMoments {
            mean,
            variance: var,
            third: 0.0,
            fourth: 3.0 * var * var,
        },
        verdict,
        diagnostics: PriceDiagnostics {
            tail_mass: 0.0,
            tail_price_bound: 0.0,
            atoms: 0,
            spacing: 0.0,
        },
    })
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("standard normal")
}

fn normal_expectation(payoff: &Payoff, mean: f64, sd: f64) -> f64 {
    if sd == 0.0 {
        return payoff.value(mean);
    }
    let n = std_normal();
    match *payoff {
        Payoff::Call { strike } => {
            let d = (mean - strike) / sd;
            (mean - strike) * n.cdf(d) + sd * n.pdf(d)
        }
        Payoff::Put { strike } => {
            let d = (mean - strike) / sd;
            (strike - mean) * n.cdf(-d) + sd * n.pdf(d)
        }
        Payoff::DigitalCall { strike } => n.cdf((mean - strike) / sd),
        Payoff::Custom { .. } => payoff
            .pieces()
            .into_iter()
            .map(|(lo, hi, a, b)| {
                let (u, v) = ((lo - mean) / sd, (hi - mean) / sd);
                let mass = n.cdf(v) - n.cdf(u);
                let first = mean * mass - sd * (n.pdf(v) - n.pdf(u));
                a * mass + b * first
            })
            .sum(),
    }
}

/// Cells used to resolve the sign of `f` under a normal law.
const NORMAL_CELLS: usize = 20_000;
/// Half width, in standard deviations, of the resolved region.
const NORMAL_REACH: f64 = 9.0;

/// `P(f > 0)` and `P(f >= 0)` under the law, with verdict `arbitrage` iff
/// `P(f >= 0) = 1` within [`CERTAINTY_TOL`] and `P(f > 0) > 0`.
///
/// Under a normal law the line is cut into cells of equal width; a cell
/// counts towards `P(f >= 0)` only if `f` is nonnegative at both ends and
/// the midpoint, and towards `P(f > 0)` if `f` is positive at any of them.
pub fn arbitrage_check(f: impl Fn(f64) -> f64, law: &TerminalLaw) -> ArbitrageReport {
    let (p_positive, p_nonnegative) = match law {
        TerminalLaw::Lattice(l) => l.atoms().fold((0.0, 0.0), |(pos, nn), (_, x, p)| {
            let v = f(x);
            (pos + if v > 0.0 { p } else { 0.0 }, nn + if v >= 0.0 { p } else { 0.0 })
        }),
        TerminalLaw::Normal { mean, sd } if *sd == 0.0 => {
            let v = f(*mean);
            (f64::from(u8::from(v > 0.0)), f64::from(u8::from(v >= 0.0)))
        }
        TerminalLaw::Normal { mean, sd } => {
            let n = std_normal();
            let width = 2.0 * NORMAL_REACH / NORMAL_CELLS as f64;
            let (mut pos, mut nn) = (0.0, 0.0);
            for i in 0..NORMAL_CELLS {
                let u = -NORMAL_REACH + i as f64 * width;
                let mass = n.cdf(u + width) - n.cdf(u);
                let vals = [u, u + width / 2.0, u + width].map(|z| f(mean + sd * z));
                if vals.iter().any(|&v| v > 0.0) {
                    pos += mass;
                }
                if vals.iter().all(|&v| v >= 0.0) {
                    nn += mass;
                }
            }
            // beyond the resolved region the sign is taken from its edges
            let tail = n.cdf(-NORMAL_REACH);
            let (lo, hi) = (f(mean - sd * NORMAL_REACH), f(mean + sd * NORMAL_REACH));
            for v in [lo, hi] {
                if v > 0.0 {
                    pos += tail;
                }
                if v >= 0.0 {
                    nn += tail;
                }
            }
            (pos, nn)
        }
    };
    let verdict = if p_nonnegative >= 1.0 - CERTAINTY_TOL && p_positive > 0.0 {
        Verdict::Arbitrage
    } else {
        Verdict::NoArbitrageWeakEvidence
    };
    ArbitrageReport {
        p_positive,
        p_nonnegative,
        verdict,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StateSweepPoint {
    pub w_o: f64,
    pub variance: f64,
    pub price: f64,
    pub verdict: Verdict,
}

/// Prices the payoff under the Gaussian model for each seller weight and
/// checks `payout - price` for arbitrage. A clean sweep is evidence of
/// strong non-arbitrage over the sampled states, not a proof.
pub fn state_sweep(
    payoff: &Payoff,
    params: &GaussianModelParams,
    packet_o: WavepacketParams,
    packet_b: WavepacketParams,
    x0: f64,
    weights: &[f64],
) -> Result<Vec<StateSweepPoint>> {
    weights
        .par_iter()
        .map(|&w_o| {
            let state = MarketState::new(w_o, packet_o, packet_b)?;
            let var = variance(params, &state);
            let sigma = if params.t > 0.0 { (var / params.t).sqrt() } else { 0.0 };
            let r = price_gaussian(payoff, sigma, params.t, x0, DriftMode::Martingale)?;
            Ok(StateSweepPoint {
                w_o,
                variance: var,
                price: r.price,
                verdict: r.verdict,
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SmilePoint {
    pub strike: f64,
    pub spread_price: f64,
    /// `None` when the spread price lies below the intrinsic value.
    pub implied_vol: Option<f64>,
}

/// Gaussian martingale volatility matching the spread-model call price at
/// each strike, found by bisection.
pub fn implied_vol_smile(params: &SpreadParams, strikes: &[f64]) -> Result<Vec<SmilePoint>> {
    check(params.t > 0.0, "t", "must be > 0 for implied volatility")?;
    strikes
        .par_iter()
        .map(|&strike| {
            let spread_price = price_spread(&Payoff::Call { strike }, params)?.price;
            Ok(SmilePoint {
                strike,
                spread_price,
                implied_vol: implied_vol(spread_price, strike, params.x0, params.t),
            })
        })
        .collect()
}

/// Normal-model call price under the martingale drift.
pub fn gaussian_call(sigma: f64, strike: f64, x0: f64, t: f64) -> f64 {
    normal_expectation(&Payoff::Call { strike }, x0, sigma * t.sqrt())
}

/// Bisection in `σ` for `gaussian_call(σ) = target`.
pub fn implied_vol(target: f64, strike: f64, x0: f64, t: f64) -> Option<f64> {
    let intrinsic = (x0 - strike).max(0.0);
    if !target.is_finite() || target < intrinsic - IMPLIED_VOL_TOL {
        return None;
    }
    let price = |s: f64| gaussian_call(s, strike, x0, t);
    let mut hi = 1.0;
    while price(hi) < target {
        hi *= 2.0;
        if hi > 1e12 {
            return None;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if price(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = 0.5 * (lo + hi);
    ((price(s) - target).abs() <= IMPLIED_VOL_TOL).then_some(s)
}
