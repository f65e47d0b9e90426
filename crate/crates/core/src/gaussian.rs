//! Gaussian single-factor model with volatility in both mid price and
//! spread. The variance of the price change depends on the market state
//! and on the buyer/seller rotation.

use crate::algebra::{Basis, EvolutionSpec};
use crate::error::{check, Result};
use crate::market::MarketState;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianModelParams {
    pub vol_x: f64,
    pub vol_eps: f64,
    pub rotation_angle: f64,
    pub t: f64,
}

impl GaussianModelParams {
    pub fn new(vol_x: f64, vol_eps: f64, rotation_angle: f64, t: f64) -> Result<Self> {
        check(vol_x.is_finite() && vol_x >= 0.0, "vol_x", "must be >= 0")?;
        check(vol_eps.is_finite() && vol_eps >= 0.0, "vol_eps", "must be >= 0")?;
        check(rotation_angle.is_finite(), "rotation_angle", "must be finite")?;
        check(t.is_finite() && t >= 0.0, "t", "must be >= 0")?;
        Ok(GaussianModelParams {
            vol_x,
            vol_eps,
            rotation_angle,
            t,
        })
    }

    pub fn with_angle(&self, rotation_angle: f64) -> Self {
        GaussianModelParams {
            rotation_angle,
            ..*self
        }
    }
}

/// `(σx² + σε²/4) t + cos2θ σxσε (w_o - w_b) t + sin2θ (⟨ψ_b|ψ_o⟩ + ⟨ψ_o|ψ_b⟩) σxσε t`.
///
/// This is the state expectation of a symmetric matrix with eigenvalues
/// `(σx ± σε/2)² t`, so it is never negative.
pub fn variance(params: &GaussianModelParams, state: &MarketState) -> f64 {
    let (w_o, w_b) = state.norms();
    let (s2, c2) = (2.0 * params.rotation_angle).sin_cos();
    let cross = params.vol_x * params.vol_eps;
    let base = params.vol_x.powi(2) + params.vol_eps.powi(2) / 4.0;
    (base + c2 * cross * (w_o - w_b) + s2 * 2.0 * state.overlap() * cross) * params.t
}

/// The balanced-market special case in the short form `(σx² + σε²) t + sin2θ σxσε`.
/// Kept for comparison against [`variance`].
pub fn balanced_variance_short_form(params: &GaussianModelParams) -> f64 {
    (params.vol_x.powi(2) + params.vol_eps.powi(2)) * params.t
        + (2.0 * params.rotation_angle).sin() * params.vol_x * params.vol_eps
}

/// `t` times the state expectation of the `dt` coefficient of `dj(X)²`,
/// computed symbolically from the coupling and the rotated price operator.
pub fn contracted_quadratic_variation(params: &GaussianModelParams, state: &MarketState) -> Result<f64> {
    let coeffs = EvolutionSpec::extended(params.rotation_angle).generator_coeffs();
    let dt = coeffs.quadratic_variation().coeff(Basis::Dt).substitute(&[
        ("sx", params.vol_x),
        ("se", params.vol_eps),
    ]);
    Ok(state.expect_operator(&dt)? * params.t)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SkewPoint {
    pub theta: f64,
    pub variance: f64,
}

pub fn skew_profile(params: &GaussianModelParams, state: &MarketState, angles: &[f64]) -> Vec<SkewPoint> {
    angles
        .iter()
        .map(|&theta| SkewPoint {
            theta,
            variance: variance(&params.with_angle(theta), state),
        })
        .collect()
}

/// Coefficients of `∂V/∂t + drift ∂V/∂x + diffusion ∂²V/∂x² = 0` for the
/// one-dimensional model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PdeCoefficients {
    pub drift: f64,
    pub diffusion: f64,
}

pub fn classical_pde_coefficients(sigma: f64) -> Result<PdeCoefficients> {
    check(sigma.is_finite() && sigma >= 0.0, "sigma", "must be >= 0")?;
    let half_var = sigma * sigma / 2.0;
    Ok(PdeCoefficients {
        drift: -half_var,
        diffusion: half_var,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{NCPoly, OpMatrix, Scalar};
    use crate::market::WavepacketParams;

    fn packet() -> WavepacketParams {
        WavepacketParams::new(100.0, 0.5, 1.0, 0.1).unwrap()
    }

    #[test]
    fn balanced_identical_packets() {
        let p = GaussianModelParams::new(0.2, 0.1, 0.3, 2.0).unwrap();
        let s = MarketState::balanced(packet());
        let expected = (0.04 + 0.01 / 4.0) * 2.0 + (0.6f64).sin() * 0.02 * 2.0;
        assert!((variance(&p, &s) - expected).abs() < 1e-15);
    }

    #[test]
    fn no_spread_volatility() {
        let p = GaussianModelParams::new(0.3, 0.0, 0.7, 1.5).unwrap();
        let s = MarketState::with_weight(0.2, packet()).unwrap();
        assert!((variance(&p, &s) - 0.09 * 1.5).abs() < 1e-15);
    }

    #[test]
    fn sellers_only_market() {
        let p = GaussianModelParams::new(0.2, 0.1, 0.0, 1.0).unwrap();
        let s = MarketState::with_weight(1.0, packet()).unwrap();
        assert!((variance(&p, &s) - (0.04 + 0.0025 + 0.02)).abs() < 1e-15);
    }

    #[test]
    fn linear_in_time() {
        let s = MarketState::with_weight(0.4, packet()).unwrap();
        let p1 = GaussianModelParams::new(0.2, 0.3, -0.2, 1.0).unwrap();
        let p3 = GaussianModelParams { t: 3.0, ..p1 };
        assert!((variance(&p3, &s) - 3.0 * variance(&p1, &s)).abs() < 1e-14);
    }

    #[test]
    fn skew_direction() {
        let p = GaussianModelParams::new(0.2, 0.1, 0.0, 1.0).unwrap();
        let s = MarketState::balanced(packet());
        let base = variance(&p, &s);
        let grid: Vec<f64> = (-9..=9).map(|k| k as f64 * 0.08).collect();
        let prof = skew_profile(&p, &s, &grid);
        for w in prof.windows(2) {
            assert!(w[1].variance > w[0].variance);
        }
        assert!(prof.iter().find(|q| q.theta == 0.0).unwrap().variance == base);
        assert!(variance(&p.with_angle(0.3), &s) > base);
        assert!(variance(&p.with_angle(-0.3), &s) < base);
    }

    #[test]
    fn bounded_by_eigenvalues() {
        let other = WavepacketParams::new(100.2, 0.45, 1.3, 0.12).unwrap();
        for &(sx, se) in &[(0.05, 1.0), (0.2, 0.4), (0.3, 0.01), (0.0, 0.5)] {
            for k in -20..=20 {
                let theta = k as f64 * 0.1;
                for w in [0.0, 0.2, 0.5, 0.9] {
                    let p = GaussianModelParams::new(sx, se, theta, 1.0).unwrap();
                    let s = MarketState::new(w, packet(), other).unwrap();
                    let v = variance(&p, &s);
                    let lo = (sx - se / 2.0f64).powi(2);
                    let hi = (sx + se / 2.0f64).powi(2);
                    assert!(v >= lo - 1e-15 && v <= hi + 1e-15, "{sx} {se} {theta} {w}: {v}");
                }
            }
        }
    }

    #[test]
    fn pde_coefficients() {
        let c = classical_pde_coefficients(0.2).unwrap();
        assert!((c.drift + 0.02).abs() < 1e-15 && (c.diffusion - 0.02).abs() < 1e-15);
        assert_eq!(
            classical_pde_coefficients(0.0).unwrap(),
            PdeCoefficients { drift: 0.0, diffusion: 0.0 }
        );
        assert!(classical_pde_coefficients(-1.0).is_err());
    }

    #[test]
    fn pde_coefficients_agree_with_generator() {
        let g = EvolutionSpec::classical().generator_coeffs();
        let sigma = 0.2;
        let bind = [("s", sigma)];
        let theta = g.theta_drift.substitute(&bind);
        let half_aa = (&g.alpha * &g.alpha_dag).scale(&Scalar::ratio(1, 2)).substitute(&bind);
        let c = classical_pde_coefficients(sigma).unwrap();
        assert_eq!(theta, OpMatrix::scalar(NCPoly::constant(Scalar::real(c.drift))));
        assert_eq!(half_aa, OpMatrix::scalar(NCPoly::constant(Scalar::real(c.diffusion))));
    }

    #[test]
    fn contraction_without_overlap_term() {
        // With no rotation the off-diagonal terms vanish and both routes agree.
        let p = GaussianModelParams::new(0.2, 0.1, 0.0, 1.3).unwrap();
        let s = MarketState::with_weight(0.3, packet()).unwrap();
        let sym = contracted_quadratic_variation(&p, &s).unwrap();
        assert!((sym - variance(&p, &s)).abs() < 1e-12);
    }
}
