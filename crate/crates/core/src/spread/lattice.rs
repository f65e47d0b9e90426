//! Exact terminal law: `x0 + drift + eps (N+ - N-)` with independent
//! `N± ~ Poisson(λ± t)`.

use statrs::distribution::{ContinuousCDF, Normal};

use super::SpreadParams;
use crate::error::{check, Result};

/// Probability mass dropped from the two tails combined.
pub const TAIL_MASS: f64 = 1e-14;

/// Atoms `origin + n step` for `n = n_min, n_min + 1, ...`.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeDistribution {
    pub origin: f64,
    pub step: f64,
    pub n_min: i64,
    pub probs: Vec<f64>,
    /// Mass outside the retained atoms.
    pub tail_mass: f64,
}

impl LatticeDistribution {
    pub fn point_mass(x: f64) -> Self {
        LatticeDistribution {
            origin: x,
            step: 0.0,
            n_min: 0,
            probs: vec![1.0],
            tail_mass: 0.0,
        }
    }

    pub fn position(&self, n: i64) -> f64 {
        self.origin + n as f64 * self.step
    }

    pub fn prob(&self, n: i64) -> f64 {
        let i = n - self.n_min;
        if i < 0 {
            return 0.0;
        }
        self.probs.get(i as usize).copied().unwrap_or(0.0)
    }

    /// `(n, x_n, p_n)` for every retained atom.
    pub fn atoms(&self) -> impl Iterator<Item = (i64, f64, f64)> + '_ {
        self.probs.iter().enumerate().map(move |(i, &p)| {
            let n = self.n_min + i as i64;
            (n, self.position(n), p)
        })
    }

    pub fn n_max(&self) -> i64 {
        self.n_min + self.probs.len() as i64 - 1
    }

    pub fn total_mass(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn expectation(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.atoms().map(|(_, x, p)| p * f(x)).sum()
    }

    pub fn mean(&self) -> f64 {
        self.expectation(|x| x)
    }

    /// `E[(X - center)^k]`.
    pub fn moment_about(&self, k: u32, center: f64) -> f64 {
        self.expectation(|x| (x - center).powi(k as i32))
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.atoms().take_while(|&(_, xn, _)| xn <= x).map(|(_, _, p)| p).sum()
    }

    /// Total variation distance to another lattice on the same grid.
    pub fn total_variation(&self, other: &LatticeDistribution) -> f64 {
        let lo = self.n_min.min(other.n_min);
        let hi = self.n_max().max(other.n_max());
        0.5 * (lo..=hi).map(|n| (self.prob(n) - other.prob(n)).abs()).sum::<f64>()
    }
}

/// Terminal law of the spread model: a lattice for `eps > 0`, a normal law
/// in the `eps -> 0` limit.
#[derive(Clone, Debug, PartialEq)]
pub enum TerminalLaw {
    Lattice(LatticeDistribution),
    Normal { mean: f64, sd: f64 },
}

impl TerminalLaw {
    pub fn mean(&self) -> f64 {
        match self {
            TerminalLaw::Lattice(l) => l.mean(),
            TerminalLaw::Normal { mean, .. } => *mean,
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            TerminalLaw::Lattice(l) => l.cdf(x),
            TerminalLaw::Normal { mean, sd } => normal_cdf(*mean, *sd, x),
        }
    }
}

pub(crate) fn normal_cdf(mean: f64, sd: f64, x: f64) -> f64 {
    if sd == 0.0 {
        return if x >= mean { 1.0 } else { 0.0 };
    }
    Normal::new(mean, sd).expect("positive sd").cdf(x)
}

/// Ratios `I_{n+1}(x) / I_n(x)` for `n = 0..n_max`, `x > 0`, from the
/// backward recurrence `r_{n-1} = 1 / (2n/x + r_n)`. The recurrence is
/// stable, every ratio lies in `(0, 1)`, and relative accuracy is about
/// `1e-15` per ratio.
pub(crate) fn bessel_i_ratios(x: f64, n_max: usize) -> Vec<f64> {
    let start = n_max + 50 + (12.0 * x.sqrt()).ceil() as usize;
    let mut ratios = vec![0.0; start];
    let mut r = 0.0;
    for n in (1..=start).rev() {
        r = 1.0 / (2.0 * n as f64 / x + r);
        ratios[n - 1] = r;
    }
    ratios.truncate(n_max);
    ratios
}

/// Compensated running sum.
#[derive(Default)]
struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    fn add(&mut self, v: f64) -> f64 {
        let y = v - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
        t
    }
}

/// Normalises weights over a window holding all but a negligible fraction
/// of the mass, then drops atoms from both ends while the dropped mass stays
/// within `TAIL_MASS / 2` per side.
fn finish(params: &SpreadParams, n_min: i64, weights: Vec<f64>) -> LatticeDistribution {
    let total: f64 = weights.iter().sum();
    let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let budget = TAIL_MASS / 2.0;
    let mut lo = 0;
    let mut cut_lo = 0.0;
    while lo < probs.len() && cut_lo + probs[lo] <= budget {
        cut_lo += probs[lo];
        lo += 1;
    }
    let mut hi = probs.len();
    let mut cut_hi = 0.0;
    while hi > lo + 1 && cut_hi + probs[hi - 1] <= budget {
        cut_hi += probs[hi - 1];
        hi -= 1;
    }
    LatticeDistribution {
        origin: params.x0 + params.drift(),
        step: params.eps,
        n_min: n_min + lo as i64,
        probs: probs[lo..hi].to_vec(),
        tail_mass: cut_lo + cut_hi,
    }
}

/// Index window `[m - 12 sd - 40, m + 12 sd + 40]` around the count mean.
fn window(mean: f64, sd: f64) -> (i64, i64) {
    (
        (mean - 12.0 * sd - 40.0).floor() as i64,
        (mean + 12.0 * sd + 40.0).ceil() as i64,
    )
}

/// One-sided case `|delta| = 1`: a compensated Poisson count.
fn one_sided(params: &SpreadParams, rate: f64, sign: i64) -> LatticeDistribution {
    let mean = rate * params.t;
    let (lo, hi) = window(mean, mean.sqrt());
    let lo = lo.max(0);
    let mode = mean.floor() as i64;
    // ln p_k - ln p_mode from p_{k+1}/p_k = mean/(k+1)
    let mut ln_rel = vec![0.0; (hi - lo + 1) as usize];
    let mut acc = Kahan::default();
    for k in mode..hi {
        ln_rel[(k + 1 - lo) as usize] = acc.add((mean / (k + 1) as f64).ln());
    }
    let mut acc = Kahan::default();
    for k in (lo..mode).rev() {
        ln_rel[(k - lo) as usize] = acc.add(-(mean / (k + 1) as f64).ln());
    }
    let weights: Vec<f64> = ln_rel.iter().map(|l| l.exp()).collect();
    if sign > 0 {
        finish(params, lo, weights)
    } else {
        let mut rev = weights;
        rev.reverse();
        finish(params, -hi, rev)
    }
}

/// Exact lattice law for `eps > 0`.
///
/// `p_n = exp(-t (√λ+ - √λ-)²) (λ+/λ-)^{n/2} e^{-x} I_|n|(x)` with
/// `x = 2t √(λ+ λ-)`, located at `x0 - vol² delta t / eps + n eps`.
/// Atoms are built outward from the mode with
/// `p_{n+1}/p_n = √(λ+/λ-) I_{|n+1|}/I_{|n|}` and normalised over a window
/// of `±(12 sd + 40)` atoms.
pub fn lattice_law(params: &SpreadParams) -> Result<LatticeDistribution> {
    check(params.eps > 0.0, "eps", "lattice law needs eps > 0")?;
    if params.vol == 0.0 || params.t == 0.0 {
        return Ok(LatticeDistribution {
            step: params.eps,
            ..LatticeDistribution::point_mass(params.x0)
        });
    }
    let (up, down) = params.jump_rates();
    if down == 0.0 {
        return Ok(one_sided(params, up, 1));
    }
    if up == 0.0 {
        return Ok(one_sided(params, down, -1));
    }
    let t = params.t;
    let count_mean = (up - down) * t;
    let (n_lo, n_hi) = window(count_mean, ((up + down) * t).sqrt());
    let reach = n_lo.unsigned_abs().max(n_hi.unsigned_abs()) as usize + 1;
    let x = 2.0 * t * (up * down).sqrt();
    let ratios = bessel_i_ratios(x, reach);
    let ln_scale = 0.5 * (up / down).ln();
    // ln(p_{n+1}/p_n)
    let ln_step = |n: i64| {
        let r = if n >= 0 {
            ratios[n as usize]
        } else {
            1.0 / ratios[(-n - 1) as usize]
        };
        ln_scale + r.ln()
    };
    let mode = count_mean.round() as i64;
    let mut ln_rel = vec![0.0; (n_hi - n_lo + 1) as usize];
    let mut acc = Kahan::default();
    for n in mode..n_hi {
        ln_rel[(n + 1 - n_lo) as usize] = acc.add(ln_step(n));
    }
    let mut acc = Kahan::default();
    for n in (n_lo..mode).rev() {
        ln_rel[(n - n_lo) as usize] = acc.add(-ln_step(n));
    }
    let weights: Vec<f64> = ln_rel.iter().map(|l| l.exp()).collect();
    Ok(finish(params, n_lo, weights))
}

/// Routes `eps = 0` to the normal law `N(x0, vol² t)`.
pub fn terminal_law(params: &SpreadParams) -> Result<TerminalLaw> {
    if params.eps == 0.0 {
        Ok(TerminalLaw::Normal {
            mean: params.x0,
            sd: params.variance().sqrt(),
        })
    } else {
        lattice_law(params).map(TerminalLaw::Lattice)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spread::moment;

    fn params(delta: f64, t: f64) -> SpreadParams {
        SpreadParams::new(0.2, 0.1, delta, t, 1.5).unwrap()
    }

    /// Power series `Σ (x/2)^{2k+n} / (k! (k+n)!)` times `e^{-x}`.
    fn series_scaled_bessel(n: u32, x: f64) -> f64 {
        let mut term = (x / 2.0).powi(n as i32) / (1..=n).map(f64::from).product::<f64>();
        let mut sum = term;
        for k in 1..500 {
            term *= (x / 2.0).powi(2) / (k as f64 * (k + n) as f64);
            sum += term;
            if term < 1e-18 * sum {
                break;
            }
        }
        sum * (-x).exp()
    }

    fn poisson_pmf(mean: f64, k: usize) -> f64 {
        let mut p = (-mean).exp();
        for j in 1..=k {
            p *= mean / j as f64;
        }
        p
    }

    #[test]
    fn bessel_ratios_match_series() {
        for &x in &[1e-3, 0.5, 4.0, 25.0, 80.0] {
            let ratios = bessel_i_ratios(x, 41);
            for n in [0usize, 1, 2, 7, 20, 40] {
                let (a, b) = (series_scaled_bessel(n as u32, x), series_scaled_bessel(n as u32 + 1, x));
                if a < 1e-250 || b < 1e-250 {
                    continue;
                }
                let oracle = b / a;
                assert!(((ratios[n] - oracle) / oracle).abs() < 1e-13, "x = {x}, n = {n}");
            }
        }
    }

    #[test]
    fn matches_poisson_convolution() {
        for delta in [-0.6, 0.0, 0.2, 0.9] {
            let p = params(delta, 1.0);
            let law = lattice_law(&p).unwrap();
            let (up, down) = p.jump_rates();
            let kmax = 200;
            let up_pmf: Vec<f64> = (0..=kmax).map(|k| poisson_pmf(up, k)).collect();
            let down_pmf: Vec<f64> = (0..=kmax).map(|k| poisson_pmf(down, k)).collect();
            let mut conv = vec![0.0; 2 * kmax + 1];
            for (i, a) in up_pmf.iter().enumerate() {
                for (j, b) in down_pmf.iter().enumerate() {
                    conv[i + kmax - j] += a * b;
                }
            }
            let oracle = LatticeDistribution {
                origin: law.origin,
                step: law.step,
                n_min: -(kmax as i64),
                probs: conv,
                tail_mass: 0.0,
            };
            assert!(law.total_variation(&oracle) <= 1e-10, "delta = {delta}");
        }
    }

    #[test]
    fn mass_mean_and_variance() {
        for delta in [-1.0, -0.4, 0.0, 0.4, 1.0] {
            for t in [0.25, 1.0, 4.0] {
                let p = params(delta, t);
                let law = lattice_law(&p).unwrap();
                assert!((law.total_mass() - 1.0).abs() < 1e-12);
                assert!((law.mean() - p.x0).abs() < 1e-10);
                assert!((law.moment_about(2, p.x0) - p.variance()).abs() < 1e-10);
                assert!(law.tail_mass <= TAIL_MASS + 1e-15);
            }
        }
    }

    #[test]
    fn moments_match_partition_formula() {
        let p = params(0.3, 1.0);
        let law = lattice_law(&p).unwrap();
        for k in 2..=6 {
            let a = moment(k, &p).unwrap();
            let l = law.moment_about(k, p.x0);
            assert!(((l - a) / a).abs() < 1e-8, "k = {k}");
        }
    }

    #[test]
    fn symmetric_without_imbalance() {
        let law = lattice_law(&params(0.0, 2.0)).unwrap();
        for n in 0..30 {
            assert!((law.prob(n) - law.prob(-n)).abs() < 1e-16);
        }
    }

    #[test]
    fn fine_lattice_with_imbalance() {
        // Count mean sits far from zero in units of its standard deviation.
        let p = SpreadParams::new(0.2, 1e-3, 0.4, 1.0, 0.0).unwrap();
        let law = lattice_law(&p).unwrap();
        assert!((law.total_mass() - 1.0).abs() < 1e-12);
        assert!((law.mean() - p.x0).abs() < 1e-10);
        assert!((law.moment_about(2, p.x0) / p.variance() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn degenerate_cases() {
        let still = SpreadParams::new(0.0, 0.1, 0.3, 1.0, 2.0).unwrap();
        let law = lattice_law(&still).unwrap();
        assert_eq!(law.probs, vec![1.0]);
        assert_eq!(law.mean(), 2.0);
        let zero_t = SpreadParams::new(0.2, 0.1, 0.3, 0.0, 2.0).unwrap();
        assert_eq!(lattice_law(&zero_t).unwrap().probs, vec![1.0]);
        let flat = SpreadParams::new(0.2, 0.0, 0.3, 1.0, 2.0).unwrap();
        assert!(lattice_law(&flat).is_err());
        assert_eq!(terminal_law(&flat).unwrap(), TerminalLaw::Normal { mean: 2.0, sd: 0.2 });
    }

    #[test]
    fn one_sided_support() {
        let law = lattice_law(&params(1.0, 1.0)).unwrap();
        assert!(law.n_min >= 0);
        let law = lattice_law(&params(-1.0, 1.0)).unwrap();
        assert!(law.n_max() <= 0);
    }

    #[test]
    fn approaches_normal_as_spread_shrinks() {
        let mut last = f64::INFINITY;
        for eps in [0.2, 0.05, 0.0125] {
            let p = SpreadParams::new(0.2, eps, 0.3, 1.0, 0.0).unwrap();
            let law = lattice_law(&p).unwrap();
            let ks = law
                .atoms()
                .map(|(_, x, _)| {
                    let after = law.cdf(x);
                    let before = after - law.prob(((x - law.origin) / law.step).round() as i64);
                    let target = normal_cdf(0.0, 0.2, x);
                    (after - target).abs().max((before - target).abs())
                })
                .fold(0.0, f64::max);
            assert!(ks < last);
            last = ks;
        }
        assert!(last < 0.05);
    }
}
