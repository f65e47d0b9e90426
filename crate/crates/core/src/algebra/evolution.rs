//! Evolution data `(H, L, S, X)` and the coefficients of the price
//! differential `dj(X) = θ dt + α dA + α† dA† + λ dΛ` they generate.

use super::matrix::OpMatrix;
use super::poly::{Generator, NCPoly};
use super::qsd::{ito_mul, Basis, QSDifferential};
use super::scalar::Scalar;
use super::AlgebraError;

/// Hamiltonian, coupling, scattering matrix and price operator.
#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionSpec {
    pub h: OpMatrix,
    pub l: OpMatrix,
    pub s: OpMatrix,
    pub x: OpMatrix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorCoeffs {
    pub theta_drift: OpMatrix,
    pub alpha: OpMatrix,
    pub alpha_dag: OpMatrix,
    pub lambda: OpMatrix,
}

fn gen(g: Generator) -> NCPoly {
    NCPoly::generator(g)
}

/// Trigonometric values that are exactly 0 or ±1 stay exact.
fn trig_scalar(v: f64) -> Scalar {
    if v == 0.0 || v.abs() == 1.0 {
        Scalar::int(v as i64)
    } else {
        Scalar::real(v)
    }
}

/// `diag(x + eps/2, x - eps/2)`: sellers quote the offer, buyers the bid.
pub fn spread_price_operator() -> OpMatrix {
    let half_eps = gen(Generator::PosEps).scale(&Scalar::ratio(1, 2));
    OpMatrix::diag(&gen(Generator::PosX) + &half_eps, &gen(Generator::PosX) - &half_eps)
}

/// `R(θ)* X R(θ)` written out: diagonal `x ± cos(2θ) eps/2`, off-diagonal
/// `-sin(2θ) eps/2`.
pub fn rotated_price_operator(rotation_angle: f64) -> OpMatrix {
    let (s2, c2) = (2.0 * rotation_angle).sin_cos();
    let eps = gen(Generator::PosEps);
    let x = gen(Generator::PosX);
    let half = Scalar::ratio(1, 2);
    let diag_shift = eps.scale(&(&trig_scalar(c2) * &half));
    let off = eps.scale(&-(&trig_scalar(s2) * &half));
    OpMatrix::new(&x + &diag_shift, off.clone(), off, &x - &diag_shift)
}

impl EvolutionSpec {
    /// Validates `H = H*`, that `S` carries no generators, and `S* S = I`.
    pub fn new(h: OpMatrix, l: OpMatrix, s: OpMatrix, x: OpMatrix) -> Result<Self, AlgebraError> {
        if h.adjoint() != h {
            return Err(AlgebraError::NotSelfAdjoint("H"));
        }
        if !s.is_constant() {
            return Err(AlgebraError::NonConstantScattering);
        }
        if &s.adjoint() * &s != OpMatrix::identity() {
            return Err(AlgebraError::NonUnitaryScattering);
        }
        Ok(EvolutionSpec { h, l, s, x })
    }

    /// One-dimensional drift-diffusion model: `L = -i s Dx`, `S = I`,
    /// `H = i (s^2/2) Dx`, `X = x`, acting identically on both components.
    pub fn classical() -> Self {
        let s = NCPoly::param("s");
        let dx = gen(Generator::DerX);
        let l = s.nc_mul(&dx).scale(&-Scalar::i());
        let h = s.pow(2).nc_mul(&dx).scale(&(&Scalar::i() * &Scalar::ratio(1, 2)));
        EvolutionSpec {
            h: OpMatrix::scalar(h),
            l: OpMatrix::scalar(l),
            s: OpMatrix::identity(),
            x: OpMatrix::scalar(gen(Generator::PosX)),
        }
    }

    /// Single-factor model driving both mid-price and spread:
    /// `L = (-i sx Dx - i se De) I`, `S = I`, `H = 0`, with the market
    /// rotation folded into `X`.
    pub fn extended(rotation_angle: f64) -> Self {
        let l = &NCPoly::param("sx").nc_mul(&gen(Generator::DerX)).scale(&-Scalar::i())
            + &NCPoly::param("se").nc_mul(&gen(Generator::DerEps)).scale(&-Scalar::i());
        EvolutionSpec {
            h: OpMatrix::zero(),
            l: OpMatrix::scalar(l),
            s: OpMatrix::identity(),
            x: rotated_price_operator(rotation_angle),
        }
    }

    /// Spread-crossing model: `L = -i s Dx I`, `S = R(π/2)`, `H = 0`,
    /// `X = diag(x + eps/2, x - eps/2)`.
    pub fn spread() -> Self {
        let l = NCPoly::param("s").nc_mul(&gen(Generator::DerX)).scale(&-Scalar::i());
        EvolutionSpec {
            h: OpMatrix::zero(),
            l: OpMatrix::scalar(l),
            s: OpMatrix::rotation(std::f64::consts::FRAC_PI_2),
            x: spread_price_operator(),
        }
    }

    /// `L*LX + XL*L - 2L*XL`, the diffusive part of the drift.
    pub fn lindblad_term(&self) -> OpMatrix {
        let l_dag = self.l.adjoint();
        let ldl = &l_dag * &self.l;
        let a = &ldl * &self.x;
        let b = &self.x * &ldl;
        let c = &(&l_dag * &self.x) * &self.l;
        &(&a + &b) - &c.scale(&Scalar::int(2))
    }

    pub fn generator_coeffs(&self) -> GeneratorCoeffs {
        let l_dag = self.l.adjoint();
        let s_dag = self.s.adjoint();
        let theta_drift = &self.h.commutator(&self.x).scale(&Scalar::i())
            - &self.lindblad_term().scale(&Scalar::ratio(1, 2));
        let alpha = &l_dag.commutator(&self.x) * &self.s;
        let alpha_dag = &s_dag * &self.x.commutator(&self.l);
        let lambda = &(&(&s_dag * &self.x) * &self.s) - &self.x;
        GeneratorCoeffs {
            theta_drift,
            alpha,
            alpha_dag,
            lambda,
        }
    }
}

impl GeneratorCoeffs {
    /// `dj(X)` as a formal differential.
    pub fn differential(&self) -> QSDifferential {
        QSDifferential {
            dt: self.theta_drift.clone(),
            da: self.alpha.clone(),
            da_dag: self.alpha_dag.clone(),
            dlambda: self.lambda.clone(),
        }
    }

    /// Closed form of `dj(X)^k` for `k >= 2`:
    /// `α λ^(k-2) α† dt + α λ^(k-1) dA + λ^(k-1) α† dA† + λ^k dΛ`.
    pub fn power_closed_form(&self, k: u32) -> Result<QSDifferential, AlgebraError> {
        match k {
            0 => Err(AlgebraError::ZeroPower),
            1 => Ok(self.differential()),
            _ => {
                let lam = |e: u32| self.lambda.pow(e);
                Ok(QSDifferential {
                    dt: &(&self.alpha * &lam(k - 2)) * &self.alpha_dag,
                    da: &self.alpha * &lam(k - 1),
                    da_dag: &lam(k - 1) * &self.alpha_dag,
                    dlambda: lam(k),
                })
            }
        }
    }

    /// `dj(X)^2` computed through the multiplication table.
    pub fn quadratic_variation(&self) -> QSDifferential {
        let d = self.differential();
        ito_mul(&d, &d)
    }

    pub fn coeff(&self, b: Basis) -> &OpMatrix {
        match b {
            Basis::Dt => &self.theta_drift,
            Basis::DA => &self.alpha,
            Basis::DAdag => &self.alpha_dag,
            Basis::DLambda => &self.lambda,
        }
    }
}
