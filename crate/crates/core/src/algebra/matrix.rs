//! 2x2 matrices of [`NCPoly`] acting on the seller/buyer direct sum.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::poly::NCPoly;
use super::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Default)]
pub struct OpMatrix {
    pub entries: [[NCPoly; 2]; 2],
}

impl OpMatrix {
    pub fn new(a11: NCPoly, a12: NCPoly, a21: NCPoly, a22: NCPoly) -> Self {
        OpMatrix {
            entries: [[a11, a12], [a21, a22]],
        }
    }

    pub fn zero() -> Self {
        OpMatrix::default()
    }

    pub fn identity() -> Self {
        OpMatrix::scalar(NCPoly::one())
    }

    /// `p` times the identity.
    pub fn scalar(p: NCPoly) -> Self {
        OpMatrix::diag(p.clone(), p)
    }

    pub fn diag(a: NCPoly, b: NCPoly) -> Self {
        OpMatrix::new(a, NCPoly::zero(), NCPoly::zero(), b)
    }

    /// Matrix of constant scalars.
    pub fn constant(a11: Scalar, a12: Scalar, a21: Scalar, a22: Scalar) -> Self {
        OpMatrix::new(
            NCPoly::constant(a11),
            NCPoly::constant(a12),
            NCPoly::constant(a21),
            NCPoly::constant(a22),
        )
    }

    /// Rotation `[[cos, -sin], [sin, cos]]` mixing sellers into buyers.
    /// Quarter turns are kept exact.
    pub fn rotation(angle: f64) -> Self {
        let quarter = angle / std::f64::consts::FRAC_PI_2;
        if (quarter - quarter.round()).abs() < 1e-15 {
            let (c, s) = match (quarter.round() as i64).rem_euclid(4) {
                0 => (1, 0),
                1 => (0, 1),
                2 => (-1, 0),
                _ => (0, -1),
            };
            return OpMatrix::constant(Scalar::int(c), Scalar::int(-s), Scalar::int(s), Scalar::int(c));
        }
        let (s, c) = angle.sin_cos();
        OpMatrix::constant(Scalar::real(c), Scalar::real(-s), Scalar::real(s), Scalar::real(c))
    }

    pub fn get(&self, i: usize, j: usize) -> &NCPoly {
        &self.entries[i][j]
    }

    pub fn is_zero(&self) -> bool {
        self.iter().all(NCPoly::is_zero)
    }

    pub fn is_diagonal(&self) -> bool {
        self.entries[0][1].is_zero() && self.entries[1][0].is_zero()
    }

    /// No generator in any entry.
    pub fn is_constant(&self) -> bool {
        self.iter().all(NCPoly::is_scalar)
    }

    /// Returns `p` when the matrix equals `p * I`.
    pub fn as_scalar(&self) -> Option<&NCPoly> {
        (self.is_diagonal() && self.entries[0][0] == self.entries[1][1]).then(|| &self.entries[0][0])
    }

    pub fn iter(&self) -> impl Iterator<Item = &NCPoly> {
        self.entries.iter().flatten()
    }

    pub fn map(&self, f: impl Fn(&NCPoly) -> NCPoly) -> OpMatrix {
        OpMatrix {
            entries: [
                [f(&self.entries[0][0]), f(&self.entries[0][1])],
                [f(&self.entries[1][0]), f(&self.entries[1][1])],
            ],
        }
    }

    pub fn scale(&self, c: &Scalar) -> OpMatrix {
        self.map(|p| p.scale(c))
    }

    pub fn transpose(&self) -> OpMatrix {
        let e = &self.entries;
        OpMatrix::new(e[0][0].clone(), e[1][0].clone(), e[0][1].clone(), e[1][1].clone())
    }

    /// Conjugate transpose with the formal adjoint applied to each entry.
    pub fn adjoint(&self) -> OpMatrix {
        self.transpose().map(NCPoly::adjoint)
    }

    pub fn commutator(&self, rhs: &OpMatrix) -> OpMatrix {
        &(self * rhs) - &(rhs * self)
    }

    pub fn pow(&self, k: u32) -> OpMatrix {
        let mut acc = OpMatrix::identity();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    pub fn substitute(&self, bindings: &[(&str, f64)]) -> OpMatrix {
        self.map(|p| p.substitute(bindings))
    }

    /// Compact rendering: `p` for `p*I`, `diag(a, b)` for diagonal matrices,
    /// the full nested form otherwise. All three are accepted by the parser.
    pub fn to_compact_string(&self) -> String {
        if let Some(p) = self.as_scalar() {
            return p.to_string();
        }
        if self.is_diagonal() {
            return format!("diag({}, {})", self.entries[0][0], self.entries[1][1]);
        }
        self.to_string()
    }
}

impl fmt::Display for OpMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = &self.entries;
        write!(f, "[[{}, {}], [{}, {}]]", e[0][0], e[0][1], e[1][0], e[1][1])
    }
}

impl Add for &OpMatrix {
    type Output = OpMatrix;
    fn add(self, rhs: &OpMatrix) -> OpMatrix {
        let (a, b) = (&self.entries, &rhs.entries);
        OpMatrix::new(&a[0][0] + &b[0][0], &a[0][1] + &b[0][1], &a[1][0] + &b[1][0], &a[1][1] + &b[1][1])
    }
}

impl Sub for &OpMatrix {
    type Output = OpMatrix;
    fn sub(self, rhs: &OpMatrix) -> OpMatrix {
        let (a, b) = (&self.entries, &rhs.entries);
        OpMatrix::new(&a[0][0] - &b[0][0], &a[0][1] - &b[0][1], &a[1][0] - &b[1][0], &a[1][1] - &b[1][1])
    }
}

impl Mul for &OpMatrix {
    type Output = OpMatrix;
    fn mul(self, rhs: &OpMatrix) -> OpMatrix {
        let (a, b) = (&self.entries, &rhs.entries);
        let cell = |i: usize, j: usize| &a[i][0].nc_mul(&b[0][j]) + &a[i][1].nc_mul(&b[1][j]);
        OpMatrix::new(cell(0, 0), cell(0, 1), cell(1, 0), cell(1, 1))
    }
}

impl Neg for &OpMatrix {
    type Output = OpMatrix;
    fn neg(self) -> OpMatrix {
        self.scale(&Scalar::int(-1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::poly::Generator;

    #[test]
    fn quarter_rotation_is_exact() {
        let r = OpMatrix::rotation(std::f64::consts::FRAC_PI_2);
        assert!(r.iter().all(|p| p.terms().all(|(_, c)| c.is_exact())));
        assert_eq!(&r.adjoint() * &r, OpMatrix::identity());
    }

    #[test]
    fn constant_rotation_adjoint_is_transpose() {
        let r = OpMatrix::rotation(0.3);
        assert_eq!(r.adjoint(), r.transpose());
        assert_eq!(&r.adjoint() * &r, OpMatrix::identity());
    }

    #[test]
    fn compact_forms() {
        let x = NCPoly::generator(Generator::PosX);
        assert_eq!(OpMatrix::scalar(x.clone()).to_compact_string(), "x");
        let eps = NCPoly::generator(Generator::PosEps);
        assert_eq!(OpMatrix::diag(-&eps, eps.clone()).to_compact_string(), "diag(-eps, eps)");
    }

    #[test]
    fn commutator_with_self_vanishes() {
        let a = OpMatrix::new(
            NCPoly::generator(Generator::PosX),
            NCPoly::generator(Generator::DerX),
            NCPoly::one(),
            NCPoly::generator(Generator::DerEps),
        );
        assert!(a.commutator(&a).is_zero());
    }
}
