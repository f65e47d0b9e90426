//! Spectral check of the truncated forward equation
//! `∂p/∂t = Σ_{k=2}^{K} a_k (-∂x)^k p` against densities recovered by
//! Fourier inversion at two nearby times.
//!
//! With the convention `p̂(z) = E[exp(izX)]`, a derivative `∂x` on the
//! density becomes `-iz`, so `(-∂x)^k p ↔ (iz)^k p̂` and the right-hand side
//! is `ψ_K(z) p̂` with `ψ_K(z) = Σ a_k (iz)^k`. Written in `x`, the odd
//! terms carry `-delta`, i.e. the seller excess `‖ψ_o‖² - ‖ψ_b‖²`; the
//! backward equation for prices carries `+delta` (buyer excess). The
//! characteristic function fixes the sign through `μ3 = vol² t eps delta`.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::cf::invert_cf;
use super::lattice::LatticeDistribution;
use super::SpreadParams;
use crate::error::{check, ModelError, Result};

/// Residual level reached by the time difference quotient and rounding;
/// below it further truncation orders are not resolved.
pub const FP_RESIDUAL_FLOOR: f64 = 1e-8;

const BAND_POINTS: usize = 1024;

/// Densities at `t_early < t_late`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityPair {
    pub early: LatticeDistribution,
    pub late: LatticeDistribution,
    pub t_early: f64,
    pub t_late: f64,
}

/// Inverts the characteristic function at `params.t` and `params.t + dt`.
pub fn density_pair(params: &SpreadParams, grid_size: usize, z_max: f64, dt: f64) -> Result<DensityPair> {
    check(dt > 0.0, "dt", "must be > 0")?;
    let early = invert_cf(params, grid_size, z_max)?.table;
    let late = invert_cf(&params.at_time(params.t + dt), grid_size, z_max)?.table;
    Ok(DensityPair {
        early,
        late,
        t_early: params.t,
        t_late: params.t + dt,
    })
}

fn transform(table: &LatticeDistribution, z: f64) -> Complex64 {
    table
        .atoms()
        .map(|(_, x, p)| Complex64::new(0.0, z * x).exp() * p)
        .sum()
}

/// Relative L² residual of `(p̂2 - p̂1)/h = ψ_K (p̂1 + p̂2)/2` over the band
/// `|z| <= π / spacing`.
pub fn fokker_planck_residual(params: &SpreadParams, pair: &DensityPair, k_max: u32) -> Result<f64> {
    check(k_max >= 2 && k_max.is_multiple_of(2), "K", "must be even and >= 2")?;
    check(pair.t_late > pair.t_early, "t", "densities must be ordered in time")?;
    check(pair.early.step > 0.0, "spacing", "density table has no spacing")?;
    let h = pair.t_late - pair.t_early;
    let coeffs = params.series_coeffs(k_max);
    let band = PI / pair.early.step;
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..=BAND_POINTS {
        let z = band * (2.0 * i as f64 / BAND_POINTS as f64 - 1.0);
        let iz = Complex64::new(0.0, z);
        let mut power = iz;
        let mut psi = Complex64::new(0.0, 0.0);
        for a in &coeffs {
            power *= iz;
            psi += power * *a;
        }
        let p1 = transform(&pair.early, z);
        let p2 = transform(&pair.late, z);
        let lhs = (p2 - p1) / h;
        let rhs = psi * (p1 + p2) * 0.5;
        num += (lhs - rhs).norm_sqr();
        den += lhs.norm_sqr();
    }
    if den == 0.0 {
        return Err(ModelError::TruncationDominated("density does not evolve".into()));
    }
    Ok((num / den).sqrt())
}

/// Residuals for each truncation order; errors when a higher order fails
/// to reduce the residual while it is still above [`FP_RESIDUAL_FLOOR`].
pub fn convergence_study(params: &SpreadParams, pair: &DensityPair, orders: &[u32]) -> Result<Vec<(u32, f64)>> {
    let rows = orders
        .iter()
        .map(|&k| fokker_planck_residual(params, pair, k).map(|r| (k, r)))
        .collect::<Result<Vec<_>>>()?;
    for w in rows.windows(2) {
        let ((k0, r0), (k1, r1)) = (w[0], w[1]);
        if r1 >= r0 && r1 >= FP_RESIDUAL_FLOOR {
            return Err(ModelError::TruncationDominated(format!(
                "residual {r1:e} at K = {k1} does not improve on {r0:e} at K = {k0}"
            )));
        }
    }
    Ok(rows)
}
