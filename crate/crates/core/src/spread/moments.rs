use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::partitions::ordered_partitions;
use super::{factorial, SpreadParams};
use crate::error::{check, Result};

/// Exponents of `(vol² t, eps, delta)`.
type MomentKey = (u32, u32, u32);

/// Central moment `E[(X - x0)^k]` as an exact polynomial in `vol² t`,
/// `eps` and `delta`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentPolynomial {
    pub k: u32,
    terms: BTreeMap<MomentKey, BigRational>,
}

fn big_factorial(k: u32) -> BigInt {
    (1..=k).map(BigInt::from).product()
}

impl MomentPolynomial {
    fn build(k: u32, per_part_variance: u32) -> Result<Self> {
        let k_fact = big_factorial(k);
        let mut terms: BTreeMap<MomentKey, BigRational> = BTreeMap::new();
        for part in ordered_partitions(k)? {
            let n = part.len() as u32;
            let denom: BigInt = part.parts().iter().map(|&j| big_factorial(j)).product::<BigInt>() * big_factorial(n);
            let odd = part.parts().iter().filter(|&&j| j % 2 == 1).count() as u32;
            let key = (n * per_part_variance, k - 2 * n, odd);
            *terms.entry(key).or_insert_with(BigRational::zero) += BigRational::new(k_fact.clone(), denom);
        }
        terms.retain(|_, c| !c.is_zero());
        Ok(MomentPolynomial { k, terms })
    }

    pub fn terms(&self) -> impl Iterator<Item = (MomentKey, &BigRational)> {
        self.terms.iter().map(|(k, c)| (*k, c))
    }

    /// Exact coefficient of `(vol² t)^a eps^b delta^q`.
    pub fn coeff(&self, a: u32, b: u32, q: u32) -> BigRational {
        self.terms.get(&(a, b, q)).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn evaluate(&self, params: &SpreadParams) -> f64 {
        let v = params.variance();
        self.terms
            .iter()
            .map(|(&(a, b, q), c)| {
                c.to_f64().expect("finite rational") * v.powi(a as i32) * params.eps.powi(b as i32)
                    * params.delta.powi(q as i32)
            })
            .sum()
    }
}

impl fmt::Display for MomentPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (&(a, b, q), c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            let mut factors = Vec::new();
            if !c.is_one() {
                factors.push(c.to_string());
            }
            match a {
                0 => {}
                1 => factors.push("vol^2*t".into()),
                _ => factors.push(format!("(vol^2*t)^{a}")),
            }
            for (sym, e) in [("eps", b), ("delta", q)] {
                match e {
                    0 => {}
                    1 => factors.push(sym.into()),
                    _ => factors.push(format!("{sym}^{e}")),
                }
            }
            if factors.is_empty() {
                factors.push("1".into());
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

/// `k! Σ_P Π_{j in P} (a_j t) / |P|!` over ordered partitions of `k` into
/// parts `>= 2`.
pub fn moment_polynomial(k: u32) -> Result<MomentPolynomial> {
    MomentPolynomial::build(k, 1)
}

/// Variant carrying an additional `vol² t` per part. Disagrees with the
/// law from order 3 on; kept for side-by-side reporting.
pub fn moment_with_part_variance(k: u32, params: &SpreadParams) -> Result<f64> {
    Ok(MomentPolynomial::build(k, 2)?.evaluate(params))
}

pub fn moment(k: u32, params: &SpreadParams) -> Result<f64> {
    Ok(moment_polynomial(k)?.evaluate(params))
}

/// `κ_k = k! a_k t`.
pub fn cumulant(k: u32, params: &SpreadParams) -> Result<f64> {
    check(k >= 2, "k", "must be >= 2")?;
    Ok(factorial(k) * params.series_coeff(k) * params.t)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KurtosisPoint {
    pub t: f64,
    /// `μ4 / (3 (vol² t)²)`, equal to 1 for a normal law.
    pub ratio: f64,
}

pub fn excess_kurtosis_limit(params: &SpreadParams, times: &[f64]) -> Result<Vec<KurtosisPoint>> {
    check(params.vol > 0.0, "vol", "must be > 0 for a kurtosis ratio")?;
    check(
        times.iter().all(|&t| t > 0.0) && times.windows(2).all(|w| w[1] > w[0]),
        "t",
        "time grid must be positive and increasing",
    )?;
    let poly = moment_polynomial(4)?;
    Ok(times
        .iter()
        .map(|&t| {
            let p = params.at_time(t);
            let gauss = 3.0 * p.variance().powi(2);
            KurtosisPoint {
                t,
                ratio: poly.evaluate(&p) / gauss,
            }
        })
        .collect())
}
