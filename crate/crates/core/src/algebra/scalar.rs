//! Complex coefficients that stay exact (Gaussian rationals) until a
//! floating-point value enters, after which they degrade to `Complex64`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Approximate coefficients at or below this modulus are dropped as zero.
pub const ZERO_TOL: f64 = 1e-14;

/// Tolerance used when comparing approximate coefficients.
pub const EQ_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub enum Scalar {
    Exact(Complex<BigRational>),
    Approx(Complex64),
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn rat_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Exact(Complex::new(rat(0), rat(0)))
    }

    pub fn one() -> Self {
        Scalar::int(1)
    }

    pub fn i() -> Self {
        Scalar::Exact(Complex::new(rat(0), rat(1)))
    }

    pub fn int(n: i64) -> Self {
        Scalar::Exact(Complex::new(rat(n), rat(0)))
    }

    /// Exact rational `num/den`. Panics if `den == 0`.
    pub fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Scalar::Exact(Complex::new(
            BigRational::new(BigInt::from(num), BigInt::from(den)),
            rat(0),
        ))
    }

    pub fn rational(re: BigRational, im: BigRational) -> Self {
        Scalar::Exact(Complex::new(re, im))
    }

    /// Floating-point real value; stays approximate.
    pub fn real(v: f64) -> Self {
        Scalar::Approx(Complex64::new(v, 0.0))
    }

    pub fn complex(v: Complex64) -> Self {
        Scalar::Approx(v)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(c) => c.re.is_zero() && c.im.is_zero(),
            Scalar::Approx(c) => c.norm() <= ZERO_TOL,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Exact(c) => c.re.is_one() && c.im.is_zero(),
            Scalar::Approx(c) => (c - Complex64::new(1.0, 0.0)).norm() <= ZERO_TOL,
        }
    }

    pub fn to_c64(&self) -> Complex64 {
        match self {
            Scalar::Exact(c) => Complex64::new(rat_to_f64(&c.re), rat_to_f64(&c.im)),
            Scalar::Approx(c) => *c,
        }
    }

    pub fn conj(&self) -> Self {
        match self {
            Scalar::Exact(c) => Scalar::Exact(Complex::new(c.re.clone(), -c.im.clone())),
            Scalar::Approx(c) => Scalar::Approx(c.conj()),
        }
    }

    /// Multiplicative inverse, `None` for zero.
    pub fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        Some(match self {
            Scalar::Exact(c) => {
                let den = &c.re * &c.re + &c.im * &c.im;
                Scalar::Exact(Complex::new(&c.re / &den, -(&c.im / &den)))
            }
            Scalar::Approx(c) => Scalar::Approx(c.inv()),
        })
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Scalar::one();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Equality: exact comparison when both sides are exact, otherwise
    /// within [`EQ_TOL`] (absolute, scaled up for large magnitudes).
    pub fn approx_eq(&self, other: &Scalar) -> bool {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a == b,
            _ => {
                let (a, b) = (self.to_c64(), other.to_c64());
                (a - b).norm() <= EQ_TOL * 1f64.max(a.norm()).max(b.norm())
            }
        }
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        self.approx_eq(other)
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::int(n)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                match (self, rhs) {
                    (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a $op b),
                    _ => Scalar::Approx(self.to_c64() $op rhs.to_c64()),
                }
            }
        }
        impl $trait for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                &self $op &rhs
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(c) => Scalar::Exact(-c.clone()),
            Scalar::Approx(c) => Scalar::Approx(-c),
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

fn fmt_rat(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Formats with an explicit leading sign stripped: returns (negative, body)
/// where `body` is empty for a unit coefficient. Used by the polynomial
/// printer so that `-1*x` prints as `-x`.
pub(crate) fn split_sign(s: &Scalar) -> (bool, String) {
    match s {
        Scalar::Exact(c) => {
            let (re0, im0) = (c.re.is_zero(), c.im.is_zero());
            if im0 {
                let neg = c.re.is_negative();
                let a = c.re.abs();
                let body = if a.is_one() { String::new() } else { fmt_rat(&a) };
                (neg, body)
            } else if re0 {
                let neg = c.im.is_negative();
                let a = c.im.abs();
                let body = if a.is_one() {
                    "i".to_string()
                } else {
                    format!("{}*i", fmt_rat(&a))
                };
                (neg, body)
            } else {
                let sep = if c.im.is_negative() { "-" } else { "+" };
                (
                    false,
                    format!("({}{}{}*i)", fmt_rat(&c.re), sep, fmt_rat(&c.im.abs())),
                )
            }
        }
        Scalar::Approx(c) => {
            if c.im == 0.0 {
                let body = if c.re.abs() == 1.0 {
                    String::new()
                } else {
                    format!("{}", c.re.abs())
                };
                (c.re < 0.0, body)
            } else if c.re == 0.0 {
                let body = if c.im.abs() == 1.0 {
                    "i".to_string()
                } else {
                    format!("{}*i", c.im.abs())
                };
                (c.im < 0.0, body)
            } else {
                let sep = if c.im < 0.0 { "-" } else { "+" };
                (false, format!("({}{}{}*i)", c.re, sep, c.im.abs()))
            }
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (neg, body) = split_sign(self);
        let body = if body.is_empty() { "1".to_string() } else { body };
        if neg {
            write!(f, "-{body}")
        } else {
            write!(f, "{body}")
        }
    }
}
