//! Characteristic function `E[exp(iz X)]` of the terminal price and its
//! discrete Fourier inversion.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::lattice::LatticeDistribution;
use super::SpreadParams;
use crate::error::{check, ModelError, Result};

/// `sin(u) - u` without cancellation for small `u`.
fn sin_minus_id(u: f64) -> f64 {
    if u.abs() > 0.1 {
        return u.sin() - u;
    }
    let u2 = u * u;
    let mut term = -u * u2 / 6.0;
    let mut sum = term;
    for k in 1..8 {
        term *= -u2 / ((2 * k + 2) as f64 * (2 * k + 3) as f64);
        sum += term;
    }
    sum
}

/// `t Σ_{k>=2} a_k (iz)^k` summed in closed form.
fn exponent(z: f64, params: &SpreadParams) -> Complex64 {
    let v = params.variance();
    if params.eps == 0.0 {
        return Complex64::new(-0.5 * v * z * z, 0.0);
    }
    let u = params.eps * z;
    let scale = v / (params.eps * params.eps);
    let half = (0.5 * u).sin();
    Complex64::new(-2.0 * half * half, params.delta * sin_minus_id(u)) * scale
}

/// `exp(t vol²/eps² [(cos(eps z) - 1) + i delta (sin(eps z) - eps z)]) exp(i z x0)`.
pub fn char_function(z: f64, params: &SpreadParams) -> Complex64 {
    (exponent(z, params) + Complex64::new(0.0, z * params.x0)).exp()
}

/// The same function from the series truncated after `(iz)^k_max`.
pub fn char_function_series(z: f64, params: &SpreadParams, k_max: u32) -> Complex64 {
    let iz = Complex64::new(0.0, z);
    let mut power = iz;
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 2..=k_max {
        power *= iz;
        sum += power * params.series_coeff(k);
    }
    (sum * params.t + Complex64::new(0.0, z * params.x0)).exp()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InversionDiagnostics {
    pub total_mass: f64,
    /// Mass on the outer sixteenth of the grid at each end.
    pub edge_mass: f64,
    /// Absolute mass recovered on nodes between lattice points.
    pub leakage: f64,
    pub max_imag: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InvertedDensity {
    /// Atom masses for `eps > 0`; cell masses `density * spacing` for `eps = 0`.
    pub table: LatticeDistribution,
    pub atomic: bool,
    pub diagnostics: InversionDiagnostics,
}

/// Inverts the characteristic function on `grid_size` frequencies
/// `z_j = (j - N/2) z_max / N`.
///
/// The spatial grid has spacing `2π / z_max` centred on the lattice origin.
/// For `eps > 0`, `z_max eps / 2π` must be an integer number of periods
/// (at least 4) so every atom falls on a node; atoms are read off every
/// `P`-th node and the remaining nodes must be empty.
pub fn invert_cf(params: &SpreadParams, grid_size: usize, z_max: f64) -> Result<InvertedDensity> {
    check(
        grid_size >= 16 && grid_size.is_power_of_two(),
        "grid_size",
        "must be a power of two >= 16",
    )?;
    check(z_max.is_finite() && z_max > 0.0, "z_max", "must be > 0")?;
    let n = grid_size;
    let dx = 2.0 * PI / z_max;
    let dz = z_max / n as f64;
    let period = if params.eps > 0.0 {
        let p = params.eps / dx;
        if (p - p.round()).abs() > 1e-9 * p.max(1.0) {
            return Err(ModelError::Aliasing(format!(
                "z_max*eps/2pi = {p} is not an integer number of periods"
            )));
        }
        let p = p.round() as usize;
        if p < 4 {
            return Err(ModelError::Aliasing(format!("z_max covers {p} periods, need at least 4")));
        }
        if n / p < 2 {
            return Err(ModelError::Aliasing("grid holds fewer than two lattice points".into()));
        }
        p
    } else {
        1
    };
    let center = params.x0 + params.drift();

    let mut buf: Vec<Complex64> = (0..n)
        .map(|j| {
            let z = (j as f64 - (n / 2) as f64) * dz;
            let shifted = char_function(z, params) * Complex64::new(0.0, -z * center).exp();
            if j % 2 == 0 {
                shifted
            } else {
                -shifted
            }
        })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let masses: Vec<Complex64> = buf
        .iter()
        .enumerate()
        .map(|(m, v)| if m % 2 == 0 { v / n as f64 } else { -v / n as f64 })
        .collect();

    let total_mass: f64 = masses.iter().map(|m| m.re).sum();
    let max_imag = masses.iter().map(|m| m.im.abs()).fold(0.0, f64::max);
    let edge = n / 16;
    let edge_mass: f64 = masses[..edge].iter().chain(&masses[n - edge..]).map(|m| m.re.abs()).sum();
    let on_lattice = |m: usize| (m as i64 - (n / 2) as i64).rem_euclid(period as i64) == 0;
    let leakage: f64 = (0..n).filter(|&m| !on_lattice(m)).map(|m| masses[m].re.abs()).sum();
    let diagnostics = InversionDiagnostics {
        total_mass,
        edge_mass,
        leakage,
        max_imag,
    };
    if (total_mass - 1.0).abs() > 1e-6 {
        return Err(ModelError::Aliasing(format!("recovered mass {total_mass}")));
    }
    if edge_mass > 1e-6 {
        return Err(ModelError::Aliasing(format!("mass {edge_mass:e} at the grid edges")));
    }
    if leakage > 1e-6 {
        return Err(ModelError::Aliasing(format!("mass {leakage:e} between lattice points")));
    }

    let first = (0..n).find(|&m| on_lattice(m)).expect("lattice node on grid");
    let probs: Vec<f64> = (first..n).step_by(period).map(|m| masses[m].re.max(0.0)).collect();
    let n_min = (first as i64 - (n / 2) as i64) / period as i64;
    let (origin, step) = if params.eps > 0.0 { (center, params.eps) } else { (center, dx) };
    Ok(InvertedDensity {
        table: LatticeDistribution {
            origin,
            step,
            n_min,
            probs,
            tail_mass: (1.0 - total_mass).abs(),
        },
        atomic: params.eps > 0.0,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spread::lattice_law;

    fn params() -> SpreadParams {
        SpreadParams::new(0.2, 0.1, 0.2, 1.0, 0.7).unwrap()
    }

    #[test]
    fn normalised_at_zero() {
        assert!((char_function(0.0, &params()) - Complex64::new(1.0, 0.0)).norm() < 1e-16);
    }

    #[test]
    fn derivative_at_zero_is_mean() {
        let p = params();
        let h = 1e-5;
        let d = (char_function(h, &p) - char_function(-h, &p)) / (2.0 * h);
        assert!((d - Complex64::new(0.0, p.x0)).norm() < 1e-8);
    }

    #[test]
    fn closed_form_matches_series() {
        for delta in [-0.4, 0.0, 0.4] {
            let p = SpreadParams { delta, ..params() };
            for j in -400..=400 {
                let z = j as f64 / 400.0 * 8.0 / p.eps;
                let d = (char_function(z, &p) - char_function_series(z, &p, 40)).norm();
                assert!(d < 1e-10, "z = {z}: {d}");
            }
        }
    }

    #[test]
    fn small_argument_branch_is_continuous() {
        for u in [0.0999999, 0.1000001, 1e-6, -0.05] {
            let naive = f64::sin(u) - u;
            assert!((sin_minus_id(u) - naive).abs() < 1e-16 + 1e-9 * naive.abs());
        }
    }

    #[test]
    fn inversion_recovers_lattice_law() {
        let p = params();
        let z_max = 8.0 * 2.0 * PI / p.eps;
        let inv = invert_cf(&p, 1024, z_max).unwrap();
        let exact = lattice_law(&p).unwrap();
        assert!(inv.atomic);
        assert!((inv.table.origin - exact.origin).abs() < 1e-15);
        assert!(inv.table.total_variation(&exact) <= 1e-8);
    }

    #[test]
    fn central_limit_for_large_times() {
        let p = SpreadParams::new(0.2, 0.1, 0.0, 100.0, 0.0).unwrap();
        assert!(p.variance() / (p.eps * p.eps) >= 400.0);
        let z_max = 4.0 * 2.0 * PI / p.eps;
        let inv = invert_cf(&p, 4096, z_max).unwrap();
        let sd = p.variance().sqrt();
        let mut acc = 0.0;
        let mut ks: f64 = 0.0;
        for (_, x, q) in inv.table.atoms() {
            acc += q;
            // normal mass binned onto the lattice cell ending half a step above x
            let target = crate::spread::lattice::normal_cdf(0.0, sd, x + 0.5 * p.eps);
            ks = ks.max((acc - target).abs());
        }
        assert!(ks <= 0.01, "{ks}");
    }

    #[test]
    fn gaussian_grid_when_spread_vanishes() {
        let p = SpreadParams::new(0.2, 0.0, 0.0, 1.0, 0.0).unwrap();
        let inv = invert_cf(&p, 512, 200.0).unwrap();
        assert!(!inv.atomic);
        assert!((inv.table.total_mass() - 1.0).abs() < 1e-10);
        assert!((inv.table.moment_about(2, 0.0) - 0.04).abs() < 1e-10);
    }

    #[test]
    fn aliasing_reported() {
        let p = params();
        let too_small = 2.0 * 2.0 * PI / p.eps;
        assert!(matches!(invert_cf(&p, 1024, too_small), Err(ModelError::Aliasing(_))));
        let fractional = 4.5 * 2.0 * PI / p.eps;
        assert!(matches!(invert_cf(&p, 1024, fractional), Err(ModelError::Aliasing(_))));
        // window too narrow for the law
        let wide = 64.0 * 2.0 * PI / p.eps;
        assert!(matches!(invert_cf(&p, 256, wide), Err(ModelError::Aliasing(_))));
        assert!(invert_cf(&p, 1000, 8.0 * 2.0 * PI / p.eps).is_err());
    }
}
