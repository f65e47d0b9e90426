//! Normal-ordered polynomials in the position symbols `x`, `eps` and the
//! derivative symbols `Dx`, `De`, with coefficients that are polynomials in
//! real, commuting scalar parameters.
//!
//! Every word is stored as `x^a eps^b Dx^c De^d`. The only non-trivial
//! commutation relations are `[Dx, x] = 1` and `[De, eps] = 1`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::scalar::{split_sign, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Generator {
    PosX,
    PosEps,
    DerX,
    DerEps,
}

impl Generator {
    pub const ALL: [Generator; 4] = [
        Generator::PosX,
        Generator::PosEps,
        Generator::DerX,
        Generator::DerEps,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            Generator::PosX => "x",
            Generator::PosEps => "eps",
            Generator::DerX => "Dx",
            Generator::DerEps => "De",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Self> {
        Generator::ALL.into_iter().find(|g| g.symbol() == s)
    }

    /// Position in the canonical word order.
    pub fn slot(self) -> usize {
        self as usize
    }

    pub fn is_derivative(self) -> bool {
        matches!(self, Generator::DerX | Generator::DerEps)
    }
}

/// Exponents of `x, eps, Dx, De`, in that order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(pub [u32; 4]);

impl Word {
    pub const ONE: Word = Word([0; 4]);

    pub fn of(g: Generator, power: u32) -> Self {
        let mut w = [0; 4];
        w[g.slot()] = power;
        Word(w)
    }

    pub fn power(&self, g: Generator) -> u32 {
        self.0[g.slot()]
    }

    pub fn is_one(&self) -> bool {
        self.0 == [0; 4]
    }

    pub fn has_derivative(&self) -> bool {
        self.0[2] > 0 || self.0[3] > 0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }
}

/// Product of parameter symbols with positive exponents, sorted by name.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Params(Vec<(String, u32)>);

impl Params {
    pub fn symbol(name: &str) -> Self {
        Params(vec![(name.to_string(), 1)])
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u32)> {
        self.0.iter().map(|(s, e)| (s.as_str(), *e))
    }

    fn mul(&self, other: &Params) -> Params {
        let mut map: BTreeMap<String, u32> = self.0.iter().cloned().collect();
        for (s, e) in &other.0 {
            *map.entry(s.clone()).or_insert(0) += e;
        }
        Params(map.into_iter().collect())
    }
}

/// Binomial coefficient times falling factorial: C(n, k) * (m)_k.
fn leibniz_weight(n: u32, m: u32, k: u32) -> i64 {
    let mut binom: i64 = 1;
    for j in 0..k {
        binom = binom * i64::from(n - j) / i64::from(j + 1);
    }
    let mut falling: i64 = 1;
    for j in 0..k {
        falling *= i64::from(m - j);
    }
    binom * falling
}

/// `D^n * q^m` rewritten as `sum_k C(n,k) (m)_k q^(m-k) D^(n-k)`.
fn reorder_pair(n: u32, m: u32) -> Vec<(u32, u32, i64)> {
    (0..=n.min(m))
        .map(|k| (m - k, n - k, leibniz_weight(n, m, k)))
        .collect()
}

/// Normal-ordered product of two words: `(x^a eps^b Dx^c De^d)(x^a' ...)`.
fn word_product(lhs: Word, rhs: Word) -> Vec<(Word, i64)> {
    let [a, b, c, d] = lhs.0;
    let [a2, b2, c2, d2] = rhs.0;
    let mut out = Vec::new();
    // Dx^c commutes past eps and De, De^d commutes past x, so the two
    // reorderings are independent.
    for (xa, dxc, wx) in reorder_pair(c, a2) {
        for (eb, ded, we) in reorder_pair(d, b2) {
            out.push((Word([a + xa, b + eb, dxc + c2, ded + d2]), wx * we));
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub word: Word,
    pub params: Params,
}

/// A canonical noncommutative polynomial. Zero coefficients are never stored.
#[derive(Clone, Debug, Default)]
pub struct NCPoly {
    terms: BTreeMap<Monomial, Scalar>,
}

impl NCPoly {
    pub fn zero() -> Self {
        NCPoly::default()
    }

    pub fn constant(c: Scalar) -> Self {
        NCPoly::term(c, Word::ONE, Params::default())
    }

    pub fn one() -> Self {
        NCPoly::constant(Scalar::one())
    }

    pub fn generator(g: Generator) -> Self {
        NCPoly::term(Scalar::one(), Word::of(g, 1), Params::default())
    }

    /// A real scalar parameter symbol such as `s` or `sx`.
    pub fn param(name: &str) -> Self {
        NCPoly::term(Scalar::one(), Word::ONE, Params::symbol(name))
    }

    pub fn term(c: Scalar, word: Word, params: Params) -> Self {
        let mut p = NCPoly::zero();
        p.accumulate(Monomial { word, params }, c);
        p
    }

    fn accumulate(&mut self, key: Monomial, c: Scalar) {
        if c.is_zero() {
            return;
        }
        let merged = match self.terms.remove(&key) {
            Some(prev) => &prev + &c,
            None => c,
        };
        if !merged.is_zero() {
            self.terms.insert(key, merged);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// True when no generator appears (parameters are allowed).
    pub fn is_scalar(&self) -> bool {
        self.terms.keys().all(|m| m.word.is_one())
    }

    pub fn has_derivative(&self) -> bool {
        self.terms.keys().any(|m| m.word.has_derivative())
    }

    pub fn has_params(&self) -> bool {
        self.terms.keys().any(|m| !m.params.is_empty())
    }

    pub fn scale(&self, c: &Scalar) -> NCPoly {
        let mut out = NCPoly::zero();
        for (k, v) in &self.terms {
            out.accumulate(k.clone(), v * c);
        }
        out
    }

    /// Normal-ordered product `self * rhs`.
    pub fn nc_mul(&self, rhs: &NCPoly) -> NCPoly {
        let mut out = NCPoly::zero();
        for (k1, c1) in &self.terms {
            for (k2, c2) in &rhs.terms {
                let coeff = c1 * c2;
                let params = k1.params.mul(&k2.params);
                for (word, weight) in word_product(k1.word, k2.word) {
                    out.accumulate(
                        Monomial {
                            word,
                            params: params.clone(),
                        },
                        &coeff * &Scalar::int(weight),
                    );
                }
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> NCPoly {
        let mut acc = NCPoly::one();
        for _ in 0..k {
            acc = acc.nc_mul(self);
        }
        acc
    }

    /// Formal adjoint: reverse each word, conjugate coefficients, with
    /// `x* = x`, `eps* = eps`, `Dx* = -Dx`, `De* = -De`. Parameters are real.
    pub fn adjoint(&self) -> NCPoly {
        let mut out = NCPoly::zero();
        for (k, c) in &self.terms {
            let [a, b, dc, dd] = k.word.0;
            let sign = if (dc + dd) % 2 == 0 { 1 } else { -1 };
            // (x^a eps^b Dx^c De^d)* = (-1)^(c+d) De^d Dx^c eps^b x^a
            let reversed = NCPoly::term(Scalar::one(), Word::of(Generator::DerEps, dd), Params::default())
                .nc_mul(&NCPoly::term(Scalar::one(), Word::of(Generator::DerX, dc), Params::default()))
                .nc_mul(&NCPoly::term(Scalar::one(), Word::of(Generator::PosEps, b), Params::default()))
                .nc_mul(&NCPoly::term(Scalar::one(), Word::of(Generator::PosX, a), Params::default()));
            let coeff = &c.conj() * &Scalar::int(sign);
            for (m, v) in reversed.terms {
                out.accumulate(
                    Monomial {
                        word: m.word,
                        params: k.params.clone(),
                    },
                    &v * &coeff,
                );
            }
        }
        out
    }

    pub fn commutator(&self, rhs: &NCPoly) -> NCPoly {
        &self.nc_mul(rhs) - &rhs.nc_mul(self)
    }

    /// Replace parameter symbols by numeric values. Unbound symbols are kept.
    pub fn substitute(&self, bindings: &[(&str, f64)]) -> NCPoly {
        let mut out = NCPoly::zero();
        for (k, c) in &self.terms {
            let mut coeff = c.clone();
            let mut kept = Vec::new();
            for (name, e) in k.params.iter() {
                match bindings.iter().find(|(n, _)| *n == name) {
                    Some((_, v)) => coeff = &coeff * &Scalar::real(v.powi(e as i32)),
                    None => kept.push((name.to_string(), e)),
                }
            }
            out.accumulate(
                Monomial {
                    word: k.word,
                    params: Params(kept),
                },
                coeff,
            );
        }
        out
    }

    /// Coefficient of a word with no parameters attached.
    pub fn coeff(&self, word: Word) -> Scalar {
        self.terms
            .get(&Monomial {
                word,
                params: Params::default(),
            })
            .cloned()
            .unwrap_or_else(Scalar::zero)
    }

    /// Value of a generator-free, parameter-free polynomial.
    pub fn as_constant(&self) -> Option<Scalar> {
        if self.terms.keys().all(|m| m.word.is_one() && m.params.is_empty()) {
            Some(self.coeff(Word::ONE))
        } else {
            None
        }
    }
}

impl PartialEq for NCPoly {
    fn eq(&self, other: &Self) -> bool {
        (self - other).is_zero()
    }
}

impl Add for &NCPoly {
    type Output = NCPoly;
    fn add(self, rhs: &NCPoly) -> NCPoly {
        let mut out = self.clone();
        for (k, v) in &rhs.terms {
            out.accumulate(k.clone(), v.clone());
        }
        out
    }
}

impl Sub for &NCPoly {
    type Output = NCPoly;
    fn sub(self, rhs: &NCPoly) -> NCPoly {
        let mut out = self.clone();
        for (k, v) in &rhs.terms {
            out.accumulate(k.clone(), -v);
        }
        out
    }
}

impl Mul for &NCPoly {
    type Output = NCPoly;
    fn mul(self, rhs: &NCPoly) -> NCPoly {
        self.nc_mul(rhs)
    }
}

impl Neg for &NCPoly {
    type Output = NCPoly;
    fn neg(self) -> NCPoly {
        self.scale(&Scalar::int(-1))
    }
}

macro_rules! owned_ops {
    ($trait:ident, $method:ident) => {
        impl $trait for NCPoly {
            type Output = NCPoly;
            fn $method(self, rhs: NCPoly) -> NCPoly {
                (&self).$method(&rhs)
            }
        }
    };
}

owned_ops!(Add, add);
owned_ops!(Sub, sub);
owned_ops!(Mul, mul);

impl fmt::Display for NCPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // Highest words first, so `x*Dx + 1` rather than `1 + x*Dx`.
        for (idx, (m, c)) in self.terms.iter().rev().enumerate() {
            let (neg, body) = split_sign(c);
            let mut factors: Vec<String> = Vec::new();
            if !body.is_empty() {
                factors.push(body);
            }
            for (name, e) in m.params.iter() {
                factors.push(if e == 1 { name.to_string() } else { format!("{name}^{e}") });
            }
            for g in Generator::ALL {
                let e = m.word.power(g);
                if e == 1 {
                    factors.push(g.symbol().to_string());
                } else if e > 1 {
                    factors.push(format!("{}^{e}", g.symbol()));
                }
            }
            if factors.is_empty() {
                factors.push("1".to_string());
            }
            let sep = match (idx, neg) {
                (0, false) => "",
                (0, true) => "-",
                (_, false) => " + ",
                (_, true) => " - ",
            };
            write!(f, "{sep}{}", factors.join("*"))?;
        }
        Ok(())
    }
}
