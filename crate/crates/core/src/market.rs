//! Direct-sum market state: a seller packet and a buyer packet, each a real
//! nonnegative Gaussian amplitude on the `(x, eps)` plane.

use num_complex::Complex64;

use crate::algebra::{rotated_price_operator, Generator, NCPoly, OpMatrix, Word};
use crate::error::{check, ModelError, Result};

/// Mean and standard deviation of one wavepacket along `x` (mid price) and
/// `eps` (spread).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WavepacketParams {
    pub x_mid: f64,
    pub eps0: f64,
    pub spread_x: f64,
    pub spread_eps: f64,
}

impl WavepacketParams {
    pub fn new(x_mid: f64, eps0: f64, spread_x: f64, spread_eps: f64) -> Result<Self> {
        check(x_mid.is_finite(), "x_mid", "must be finite")?;
        check(eps0.is_finite() && eps0 >= 0.0, "eps0", "must be >= 0")?;
        check(spread_x.is_finite() && spread_x > 0.0, "spread_x", "must be > 0")?;
        check(spread_eps.is_finite() && spread_eps > 0.0, "spread_eps", "must be > 0")?;
        Ok(WavepacketParams {
            x_mid,
            eps0,
            spread_x,
            spread_eps,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MarketState {
    w_o: f64,
    w_b: f64,
    pub packet_o: WavepacketParams,
    pub packet_b: WavepacketParams,
}

/// `∫ sqrt(N(m1, s1²) N(m2, s2²))` over the real line.
fn gaussian_overlap_1d(m1: f64, s1: f64, m2: f64, s2: f64) -> f64 {
    let v = s1 * s1 + s2 * s2;
    (2.0 * s1 * s2 / v).sqrt() * (-(m1 - m2).powi(2) / (4.0 * v)).exp()
}

/// Mean of the normalised product `sqrt(N1 N2)`.
fn product_mean(m1: f64, s1: f64, m2: f64, s2: f64) -> f64 {
    (m1 * s2 * s2 + m2 * s1 * s1) / (s1 * s1 + s2 * s2)
}

/// Coefficients `(a, b, c)` of `a + b x + c eps`.
fn affine_parts(p: &NCPoly) -> Result<[Complex64; 3]> {
    let mut out = [Complex64::new(0.0, 0.0); 3];
    for (m, c) in p.terms() {
        if !m.params.is_empty() {
            return Err(ModelError::UnboundParameter(p.to_string()));
        }
        let slot = if m.word.is_one() {
            0
        } else if m.word == Word::of(Generator::PosX, 1) {
            1
        } else if m.word == Word::of(Generator::PosEps, 1) {
            2
        } else {
            return Err(ModelError::NotAffine(p.to_string()));
        };
        out[slot] += c.to_c64();
    }
    Ok(out)
}

impl MarketState {
    pub fn new(w_o: f64, packet_o: WavepacketParams, packet_b: WavepacketParams) -> Result<Self> {
        check((0.0..=1.0).contains(&w_o), "w_o", "must lie in [0, 1]")?;
        Ok(MarketState {
            w_o,
            w_b: 1.0 - w_o,
            packet_o,
            packet_b,
        })
    }

    /// Identical packets on both sides.
    pub fn with_weight(w_o: f64, packet: WavepacketParams) -> Result<Self> {
        MarketState::new(w_o, packet, packet)
    }

    pub fn balanced(packet: WavepacketParams) -> Self {
        MarketState {
            w_o: 0.5,
            w_b: 0.5,
            packet_o: packet,
            packet_b: packet,
        }
    }

    /// `(‖ψ_o‖², ‖ψ_b‖²)`.
    pub fn norms(&self) -> (f64, f64) {
        (self.w_o, self.w_b)
    }

    /// `‖ψ_b‖² - ‖ψ_o‖²`, the buyer excess.
    pub fn imbalance(&self) -> f64 {
        self.w_b - self.w_o
    }

    fn packet(&self, side: usize) -> (f64, &WavepacketParams) {
        if side == 0 {
            (self.w_o, &self.packet_o)
        } else {
            (self.w_b, &self.packet_b)
        }
    }

    /// `⟨ψ_i|(a + b x + c eps) ψ_j⟩` for sides `i, j` (0 = sellers, 1 = buyers).
    fn matrix_element(&self, i: usize, j: usize, f: &[Complex64; 3]) -> Complex64 {
        let (wi, pi) = self.packet(i);
        let (wj, pj) = self.packet(j);
        let ox = gaussian_overlap_1d(pi.x_mid, pi.spread_x, pj.x_mid, pj.spread_x);
        let oe = gaussian_overlap_1d(pi.eps0, pi.spread_eps, pj.eps0, pj.spread_eps);
        let norm = (wi * wj).sqrt() * ox * oe;
        if norm == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let mx = product_mean(pi.x_mid, pi.spread_x, pj.x_mid, pj.spread_x);
        let me = product_mean(pi.eps0, pi.spread_eps, pj.eps0, pj.spread_eps);
        (f[0] + f[1] * mx + f[2] * me) * norm
    }

    /// `⟨ψ_o|ψ_b⟩`, real for real amplitudes.
    pub fn overlap(&self) -> f64 {
        self.matrix_element(0, 1, &[Complex64::new(1.0, 0.0), Complex64::default(), Complex64::default()])
            .re
    }

    /// `⟨ψ|A|ψ⟩` for a matrix whose entries are affine in `x` and `eps`
    /// with numeric coefficients.
    pub fn expect_operator_complex(&self, a: &OpMatrix) -> Result<Complex64> {
        let mut total = Complex64::new(0.0, 0.0);
        for i in 0..2 {
            for j in 0..2 {
                let entry = a.get(i, j);
                if entry.has_derivative() {
                    return Err(ModelError::NotAffine(entry.to_string()));
                }
                let f = affine_parts(entry)?;
                total += self.matrix_element(i, j, &f);
            }
        }
        Ok(total)
    }

    /// Real expectation; rejects operators whose expectation has a
    /// non-negligible imaginary part.
    pub fn expect_operator(&self, a: &OpMatrix) -> Result<f64> {
        let z = self.expect_operator_complex(a)?;
        if z.im.abs() > 1e-12 * (1.0 + z.re.abs()) {
            return Err(ModelError::NonRealExpectation(z.im));
        }
        Ok(z.re)
    }

    /// Expected trade price after rotating the state by `rotation_angle`.
    pub fn rotated_price_expectation(&self, rotation_angle: f64) -> f64 {
        self.expect_operator(&rotated_price_operator(rotation_angle))
            .expect("rotated price operator is affine and self-adjoint")
    }
}
