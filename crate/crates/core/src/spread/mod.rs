//! Non-Gaussian model in which scattering between sellers and buyers adds
//! jumps of one spread width to the mid price.
//!
//! The terminal law has characteristic function
//! `E[exp(iz(X - x0))] = exp(t Σ_{k>=2} a_k (iz)^k)` with
//! `a_k = vol² eps^(k-2) / k!` for even `k` and `vol² delta eps^(k-2) / k!`
//! for odd `k`. The series sums to a compensated two-sided Poisson law on
//! the lattice `x0 - vol² delta t / eps + n eps`.

mod cf;
mod fokker_planck;
mod lattice;
mod moments;
mod partitions;
mod sampler;

pub use cf::{char_function, char_function_series, invert_cf, InversionDiagnostics, InvertedDensity};
pub use fokker_planck::{
    convergence_study, density_pair, fokker_planck_residual, DensityPair, FP_RESIDUAL_FLOOR,
};
pub use lattice::{lattice_law, terminal_law, LatticeDistribution, TerminalLaw, TAIL_MASS};
pub use moments::{
    cumulant, excess_kurtosis_limit, moment, moment_polynomial, moment_with_part_variance, KurtosisPoint, MomentPolynomial,
};
pub use partitions::{composition_count, ordered_partitions, OrderedPartition};
pub use sampler::{sample_moment, sample_paths, MomentEstimate, SAMPLER_BLOCK};

use crate::error::{check, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpreadParams {
    pub vol: f64,
    pub eps: f64,
    /// `‖ψ_b‖² - ‖ψ_o‖²`: positive when buyers dominate.
    pub delta: f64,
    pub t: f64,
    pub x0: f64,
}

impl SpreadParams {
    pub fn new(vol: f64, eps: f64, delta: f64, t: f64, x0: f64) -> Result<Self> {
        check(vol.is_finite() && vol >= 0.0, "vol", "must be >= 0")?;
        check(eps.is_finite() && eps >= 0.0, "eps", "must be >= 0")?;
        check((-1.0..=1.0).contains(&delta), "delta", "must lie in [-1, 1]")?;
        check(t.is_finite() && t >= 0.0, "t", "must be >= 0")?;
        check(x0.is_finite(), "x0", "must be finite")?;
        Ok(SpreadParams { vol, eps, delta, t, x0 })
    }

    pub fn at_time(&self, t: f64) -> Self {
        SpreadParams { t, ..*self }
    }

    /// `vol² t`, the variance of the price change.
    pub fn variance(&self) -> f64 {
        self.vol * self.vol * self.t
    }

    /// Jump intensities `(λ+, λ-)` of up and down moves of size `eps`.
    pub fn jump_rates(&self) -> (f64, f64) {
        let base = self.vol * self.vol / (2.0 * self.eps * self.eps);
        (base * (1.0 + self.delta), base * (1.0 - self.delta))
    }

    /// Deterministic compensating drift `-vol² delta t / eps`.
    pub fn drift(&self) -> f64 {
        if self.eps == 0.0 {
            0.0
        } else {
            -self.vol * self.vol * self.delta * self.t / self.eps
        }
    }

    /// Series coefficient `a_k`, `k >= 2`.
    pub fn series_coeff(&self, k: u32) -> f64 {
        debug_assert!(k >= 2);
        let mut c = self.vol * self.vol * self.eps.powi(k as i32 - 2) / factorial(k);
        if k % 2 == 1 {
            c *= self.delta;
        }
        c
    }

    /// `[a_2, ..., a_K]`.
    pub fn series_coeffs(&self, k_max: u32) -> Vec<f64> {
        (2..=k_max).map(|k| self.series_coeff(k)).collect()
    }
}

pub(crate) fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}
