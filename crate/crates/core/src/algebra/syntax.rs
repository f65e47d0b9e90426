//! Text syntax for operator polynomials and matrices.
//!
//! ```text
//! matrix := poly | "diag(" poly "," poly ")" | "[[" poly "," poly "],[" poly "," poly "]]"
//! poly   := ["+"|"-"] term {("+"|"-") term}
//! term   := factor {("*"|"/") factor}
//! factor := number | "i" | name ["^" int] | "(" poly ")"
//! ```
//!
//! Generator names are `x`, `eps`, `Dx`, `De`; any other identifier is a
//! real parameter. Within a term generators must already appear in
//! canonical order (`x`, `eps`, `Dx`, `De`); parenthesised groups and
//! divisors must be generator-free.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::matrix::OpMatrix;
use super::poly::{Generator, NCPoly};
use super::scalar::Scalar;
use super::ParseError;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigRational),
    Ident(String),
    Sym(char),
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn parse_decimal(s: &str) -> Option<BigRational> {
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(p) => (&s[..p], s[p + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (int_part, frac_part) = match mantissa.find('.') {
        Some(p) => (&mantissa[..p], &mantissa[p + 1..]),
        None => (mantissa, ""),
    };
    let digits: BigInt = format!("{int_part}{frac_part}").parse().ok()?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut r = BigRational::from_integer(digits);
    if scale >= 0 {
        r *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        r /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Some(r)
}

fn tokenize(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut col) = (1usize, 1usize);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let value = parse_decimal(&text).ok_or_else(|| ParseError::new(tl, tc, format!("bad number `{text}`")))?;
            col += i - start;
            out.push(Spanned { tok: Tok::Num(value), line: tl, col: tc });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Spanned { tok: Tok::Ident(text), line: tl, col: tc });
            continue;
        }
        if "+-*/^()[],".contains(c) {
            out.push(Spanned { tok: Tok::Sym(c), line: tl, col: tc });
            i += 1;
            col += 1;
            continue;
        }
        return Err(ParseError::new(tl, tc, format!("unexpected character `{c}`")));
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    end: (usize, usize),
}

impl Parser {
    fn new(src: &str) -> Result<Self, ParseError> {
        let toks = tokenize(src)?;
        let line = src.lines().count().max(1);
        let col = src.lines().last().map_or(0, |l| l.chars().count()) + 1;
        Ok(Parser { toks, pos: 0, end: (line, col) })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks.get(self.pos).map_or(self.end, |s| (s.line, s.col))
    }

    fn error(&self, msg: impl Into<String>) -> ParseError {
        let (l, c) = self.here();
        ParseError::new(l, c, msg)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{c}`")))
        }
    }

    fn finish(&self) -> Result<(), ParseError> {
        if self.pos < self.toks.len() {
            Err(self.error("unexpected trailing input"))
        } else {
            Ok(())
        }
    }

    fn matrix(&mut self) -> Result<OpMatrix, ParseError> {
        if self.eat('[') {
            self.expect('[')?;
            let a11 = self.poly()?;
            self.expect(',')?;
            let a12 = self.poly()?;
            self.expect(']')?;
            self.expect(',')?;
            self.expect('[')?;
            let a21 = self.poly()?;
            self.expect(',')?;
            let a22 = self.poly()?;
            self.expect(']')?;
            self.expect(']')?;
            return Ok(OpMatrix::new(a11, a12, a21, a22));
        }
        if self.peek() == Some(&Tok::Ident("diag".into())) {
            self.pos += 1;
            self.expect('(')?;
            let a = self.poly()?;
            self.expect(',')?;
            let b = self.poly()?;
            self.expect(')')?;
            return Ok(OpMatrix::diag(a, b));
        }
        Ok(OpMatrix::scalar(self.poly()?))
    }

    fn poly(&mut self) -> Result<NCPoly, ParseError> {
        let mut negate = false;
        if self.eat('-') {
            negate = true;
        } else {
            self.eat('+');
        }
        let mut acc = self.term()?;
        if negate {
            acc = -&acc;
        }
        loop {
            if self.eat('+') {
                acc = &acc + &self.term()?;
            } else if self.eat('-') {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<NCPoly, ParseError> {
        let mut last_slot: Option<usize> = None;
        let mut acc = self.factor(&mut last_slot)?;
        loop {
            if self.eat('*') {
                let f = self.factor(&mut last_slot)?;
                acc = acc.nc_mul(&f);
            } else if self.peek() == Some(&Tok::Sym('/')) {
                self.pos += 1;
                let here = self.here();
                let mut unused = None;
                let d = self.factor(&mut unused)?;
                let inv = d
                    .as_constant()
                    .and_then(|c| c.recip())
                    .ok_or_else(|| ParseError::new(here.0, here.1, "divisor must be a nonzero number"))?;
                acc = acc.scale(&inv);
            } else {
                return Ok(acc);
            }
        }
    }

    fn exponent(&mut self) -> Result<u32, ParseError> {
        if !self.eat('^') {
            return Ok(1);
        }
        match self.peek().cloned() {
            Some(Tok::Num(n)) if n.is_integer() && n >= BigRational::zero() => {
                self.pos += 1;
                n.to_integer()
                    .to_string()
                    .parse()
                    .map_err(|_| self.error("exponent too large"))
            }
            _ => Err(self.error("expected a non-negative integer exponent")),
        }
    }

    fn factor(&mut self, last_slot: &mut Option<usize>) -> Result<NCPoly, ParseError> {
        let (line, col) = self.here();
        let tok = self.peek().cloned().ok_or_else(|| self.error("unexpected end of input"))?;
        match tok {
            Tok::Num(n) => {
                self.pos += 1;
                let e = self.exponent()?;
                Ok(NCPoly::constant(Scalar::rational(n, BigRational::zero())).pow(e))
            }
            Tok::Sym('(') => {
                self.pos += 1;
                let inner = self.poly()?;
                self.expect(')')?;
                if !inner.is_scalar() {
                    return Err(ParseError::new(line, col, "parenthesised groups must be generator-free"));
                }
                let e = self.exponent()?;
                Ok(inner.pow(e))
            }
            Tok::Ident(name) => {
                self.pos += 1;
                let e = self.exponent()?;
                if name == "i" {
                    return Ok(NCPoly::constant(Scalar::rational(BigRational::zero(), BigRational::one())).pow(e));
                }
                if name == "diag" {
                    return Err(ParseError::new(line, col, "`diag` is only valid as a whole matrix"));
                }
                if let Some(g) = Generator::from_symbol(&name) {
                    if last_slot.is_some_and(|s| s > g.slot()) {
                        return Err(ParseError::new(
                            line,
                            col,
                            format!("non-canonical word: `{name}` must precede earlier generators (order x, eps, Dx, De)"),
                        ));
                    }
                    *last_slot = Some(g.slot());
                    return Ok(NCPoly::generator(g).pow(e));
                }
                Ok(NCPoly::param(&name).pow(e))
            }
            Tok::Sym(c) => Err(ParseError::new(line, col, format!("unexpected `{c}`"))),
        }
    }
}

pub fn parse_poly(src: &str) -> Result<NCPoly, ParseError> {
    let mut p = Parser::new(src)?;
    let out = p.poly()?;
    p.finish()?;
    Ok(out)
}

/// Parses `p` (meaning `p*I`), `diag(a, b)`, or `[[a, b], [c, d]]`.
pub fn parse_matrix(src: &str) -> Result<OpMatrix, ParseError> {
    let mut p = Parser::new(src)?;
    let out = p.matrix()?;
    p.finish()?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_coupling_operator() {
        let p = parse_poly("-i*sx*Dx - i*se*De").unwrap();
        let dx = NCPoly::generator(Generator::DerX);
        let de = NCPoly::generator(Generator::DerEps);
        let expected = &NCPoly::param("sx").nc_mul(&dx).scale(&-Scalar::i())
            + &NCPoly::param("se").nc_mul(&de).scale(&-Scalar::i());
        assert_eq!(p, expected);
        assert_eq!(parse_poly(&p.to_string()).unwrap(), p);
    }

    #[test]
    fn parses_matrices() {
        let m = parse_matrix("[[x + eps/2, 0], [0, x - 0.5*eps]]").unwrap();
        assert_eq!(m, crate::algebra::spread_price_operator());
        let d = parse_matrix("diag(-eps, eps)").unwrap();
        assert_eq!(d.to_compact_string(), "diag(-eps, eps)");
        assert_eq!(parse_matrix("x").unwrap().as_scalar().unwrap().to_string(), "x");
    }

    #[test]
    fn decimals_are_exact() {
        let p = parse_poly("0.25*x").unwrap();
        assert!(p.terms().all(|(_, c)| c.is_exact()));
        assert_eq!(p, parse_poly("x/4").unwrap());
        assert_eq!(parse_poly("1.5e-1").unwrap(), parse_poly("3/20").unwrap());
    }

    #[test]
    fn rejects_non_canonical_word() {
        let err = parse_poly("Dx*x").unwrap_err();
        assert_eq!((err.line, err.col), (1, 4));
        assert!(err.message.contains("non-canonical"));
    }

    #[test]
    fn reports_line_and_column() {
        let err = parse_matrix("[[x, 0],\n [0, x $]]").unwrap_err();
        assert_eq!((err.line, err.col), (2, 8));
        let err = parse_poly("x +").unwrap_err();
        assert_eq!(err.line, 1);
        assert!(parse_poly("x / eps").is_err());
        assert!(parse_poly("(x + 1)*s").is_err());
    }

    #[test]
    fn parameters_and_powers() {
        let p = parse_poly("-1/2*s^2").unwrap();
        assert_eq!(p.to_string(), "-1/2*s^2");
        let q = parse_poly("(1/2-3/4*i)*sx*Dx").unwrap();
        assert_eq!(q.to_string(), "(1/2-3/4*i)*sx*Dx");
    }
}
