//! Formal quantum stochastic differentials `c_t dt + c_A dA + c_A† dA† + c_Λ dΛ`
//! and their multiplication table.

use super::matrix::OpMatrix;
use super::AlgebraError;

/// The four basic differentials.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Basis {
    Dt,
    DA,
    DAdag,
    DLambda,
}

impl Basis {
    pub const ALL: [Basis; 4] = [Basis::DAdag, Basis::DLambda, Basis::DA, Basis::Dt];

    /// Product `self * rhs` of two basic differentials.
    ///
    /// Only four products survive: `dΛ dA† = dA†`, `dΛ dΛ = dΛ`,
    /// `dA dA† = dt` and `dA dΛ = dA`.
    pub fn product(self, rhs: Basis) -> Option<Basis> {
        match (self, rhs) {
            (Basis::DLambda, Basis::DAdag) => Some(Basis::DAdag),
            (Basis::DLambda, Basis::DLambda) => Some(Basis::DLambda),
            (Basis::DA, Basis::DAdag) => Some(Basis::Dt),
            (Basis::DA, Basis::DLambda) => Some(Basis::DA),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct QSDifferential {
    pub dt: OpMatrix,
    pub da: OpMatrix,
    pub da_dag: OpMatrix,
    pub dlambda: OpMatrix,
}

impl QSDifferential {
    pub fn zero() -> Self {
        QSDifferential::default()
    }

    /// `c` times a single basic differential.
    pub fn basis(b: Basis, c: OpMatrix) -> Self {
        let mut d = QSDifferential::zero();
        *d.coeff_mut(b) = c;
        d
    }

    pub fn coeff(&self, b: Basis) -> &OpMatrix {
        match b {
            Basis::Dt => &self.dt,
            Basis::DA => &self.da,
            Basis::DAdag => &self.da_dag,
            Basis::DLambda => &self.dlambda,
        }
    }

    pub fn coeff_mut(&mut self, b: Basis) -> &mut OpMatrix {
        match b {
            Basis::Dt => &mut self.dt,
            Basis::DA => &mut self.da,
            Basis::DAdag => &mut self.da_dag,
            Basis::DLambda => &mut self.dlambda,
        }
    }

    pub fn is_zero(&self) -> bool {
        Basis::ALL.iter().all(|b| self.coeff(*b).is_zero())
    }

    pub fn add(&self, rhs: &QSDifferential) -> QSDifferential {
        QSDifferential {
            dt: &self.dt + &rhs.dt,
            da: &self.da + &rhs.da,
            da_dag: &self.da_dag + &rhs.da_dag,
            dlambda: &self.dlambda + &rhs.dlambda,
        }
    }
}

/// Bilinear product of two differentials. The left coefficient multiplies
/// on the left.
pub fn ito_mul(lhs: &QSDifferential, rhs: &QSDifferential) -> QSDifferential {
    let mut out = QSDifferential::zero();
    for b1 in Basis::ALL {
        let c1 = lhs.coeff(b1);
        if c1.is_zero() {
            continue;
        }
        for b2 in Basis::ALL {
            if let Some(b) = b1.product(b2) {
                let c2 = rhs.coeff(b2);
                if c2.is_zero() {
                    continue;
                }
                let slot = out.coeff_mut(b);
                *slot = &*slot + &(c1 * c2);
            }
        }
    }
    out
}

/// `dX^k` by repeated multiplication.
pub fn qsd_power(dx: &QSDifferential, k: u32) -> Result<QSDifferential, AlgebraError> {
    if k == 0 {
        return Err(AlgebraError::ZeroPower);
    }
    let mut acc = dx.clone();
    for _ in 1..k {
        acc = ito_mul(dx, &acc);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::poly::{Generator, NCPoly};

    fn c(name: &str) -> OpMatrix {
        OpMatrix::scalar(NCPoly::param(name))
    }

    #[test]
    fn annihilation_times_creation_is_time() {
        let d1 = QSDifferential::basis(Basis::DA, c("a"));
        let d2 = QSDifferential::basis(Basis::DAdag, c("b"));
        let p = ito_mul(&d1, &d2);
        assert_eq!(p, QSDifferential::basis(Basis::Dt, &c("a") * &c("b")));
    }

    #[test]
    fn creation_row_is_zero() {
        let d1 = QSDifferential::basis(Basis::DAdag, c("a"));
        for b in Basis::ALL {
            assert!(ito_mul(&d1, &QSDifferential::basis(b, c("b"))).is_zero());
        }
    }

    #[test]
    fn gauge_is_idempotent() {
        let d = QSDifferential::basis(Basis::DLambda, c("a"));
        let e = QSDifferential::basis(Basis::DLambda, c("b"));
        assert_eq!(ito_mul(&d, &e), QSDifferential::basis(Basis::DLambda, &c("a") * &c("b")));
    }

    #[test]
    fn coefficient_order_is_preserved() {
        let x = OpMatrix::scalar(NCPoly::generator(Generator::PosX));
        let dx = OpMatrix::scalar(NCPoly::generator(Generator::DerX));
        let p = ito_mul(
            &QSDifferential::basis(Basis::DA, dx.clone()),
            &QSDifferential::basis(Basis::DAdag, x.clone()),
        );
        assert_eq!(p.dt, &dx * &x);
        assert_ne!(p.dt, &x * &dx);
    }

    #[test]
    fn zero_power_rejected() {
        assert!(qsd_power(&QSDifferential::zero(), 0).is_err());
    }

    #[test]
    fn product_with_zero_is_zero() {
        let d = QSDifferential::basis(Basis::DA, c("a")).add(&QSDifferential::basis(Basis::DLambda, c("b")));
        assert!(ito_mul(&d, &QSDifferential::zero()).is_zero());
        assert!(ito_mul(&QSDifferential::zero(), &d).is_zero());
    }
}
