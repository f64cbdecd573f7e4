//! Ordinals below ε₀ in Cantor normal form.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `ω^{e_1}·c_1 + ... + ω^{e_k}·c_k` with `e_1 > ... > e_k` and every `c_i > 0`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Cnf {
    terms: Vec<(Cnf, u64)>,
}

impl Cnf {
    pub fn zero() -> Self {
        Cnf::default()
    }

    pub fn nat(n: u64) -> Self {
        if n == 0 {
            Cnf::zero()
        } else {
            Cnf { terms: vec![(Cnf::zero(), n)] }
        }
    }

    pub fn omega() -> Self {
        Cnf::omega_pow(Cnf::nat(1))
    }

    /// `ω^e`.
    pub fn omega_pow(e: Cnf) -> Self {
        Cnf { terms: vec![(e, 1)] }
    }

    /// Builds from terms, checking normal form.
    pub fn from_terms(terms: Vec<(Cnf, u64)>) -> Result<Self> {
        if terms.iter().any(|t| t.1 == 0) {
            return Err(Error::InvalidInput("Cantor normal form coefficients must be positive".into()));
        }
        if terms.windows(2).any(|w| w[0].0 <= w[1].0) {
            return Err(Error::InvalidInput("Cantor normal form exponents must strictly decrease".into()));
        }
        Ok(Cnf { terms })
    }

    pub fn terms(&self) -> &[(Cnf, u64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `Some(n)` when the ordinal is the natural number `n`.
    pub fn as_nat(&self) -> Option<u64> {
        match self.terms.as_slice() {
            [] => Some(0),
            [(e, c)] if e.is_zero() => Some(*c),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.as_nat().is_some()
    }

    /// Nonzero with no finite tail.
    pub fn is_limit(&self) -> bool {
        self.terms.last().is_some_and(|(e, _)| !e.is_zero())
    }

    /// Exponent of the leading term; `None` for zero.
    pub fn leading_exponent(&self) -> Option<&Cnf> {
        self.terms.first().map(|t| &t.0)
    }

    /// `N(Σ ω^{e_i}·c_i) = Σ c_i·(1 + N(e_i))`; finitely many ordinals share a norm.
    pub fn norm(&self) -> u64 {
        self.terms.iter().map(|(e, c)| c * (1 + e.norm())).sum()
    }

    /// The unique `β` with `ω·β = self`, for a limit ordinal `self >= ω²`.
    pub fn divide_by_omega(&self) -> Result<Cnf> {
        if !self.is_limit() {
            return Err(Error::InvalidInput(format!("{self} is not a limit ordinal")));
        }
        let omega_sq = Cnf::omega_pow(Cnf::nat(2));
        if *self < omega_sq {
            return Err(Error::InvalidInput(format!("{self} is below w^2")));
        }
        // Left subtraction of 1 from each exponent: 1 + (k - 1) = k for finite
        // exponents, 1 + e = e for infinite ones.
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| {
                let e = match e.as_nat() {
                    Some(k) => Cnf::nat(k - 1),
                    None => e.clone(),
                };
                (e, *c)
            })
            .collect();
        Ok(Cnf { terms })
    }
}

impl From<u64> for Cnf {
    fn from(n: u64) -> Self {
        Cnf::nat(n)
    }
}

impl Ord for Cnf {
    fn cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.terms.iter().zip(&other.terms) {
            let ord = a.0.cmp(&b.0).then(a.1.cmp(&b.1));
            if ord != Ordering::Equal {
                return ord;
            }
        }
        self.terms.len().cmp(&other.terms.len())
    }
}

impl PartialOrd for Cnf {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for &Cnf {
    type Output = Cnf;

    fn add(self, rhs: &Cnf) -> Cnf {
        let Some((lead, c)) = rhs.terms.first() else {
            return self.clone();
        };
        let mut terms: Vec<(Cnf, u64)> = self.terms.iter().filter(|(e, _)| e > lead).cloned().collect();
        let carried = self.terms.iter().find(|(e, _)| e == lead).map_or(0, |t| t.1);
        terms.push((lead.clone(), carried + c));
        terms.extend(rhs.terms[1..].iter().cloned());
        Cnf { terms }
    }
}

impl Add for Cnf {
    type Output = Cnf;

    fn add(self, rhs: Cnf) -> Cnf {
        &self + &rhs
    }
}

impl Mul for &Cnf {
    type Output = Cnf;

    /// Ordinal product, distributing on the right:
    /// `α·(ω^{b}·c + ...) = α·ω^{b}·c + ...`.
    fn mul(self, rhs: &Cnf) -> Cnf {
        let Some((a0, c0)) = self.terms.first() else {
            return Cnf::zero();
        };
        let mut out = Cnf::zero();
        for (b, c) in &rhs.terms {
            let piece = if b.is_zero() {
                let mut terms = self.terms.clone();
                terms[0].1 = c0 * c;
                Cnf { terms }
            } else {
                Cnf { terms: vec![(a0 + b, *c)] }
            };
            out = &out + &piece;
        }
        out
    }
}

impl Mul for Cnf {
    type Output = Cnf;

    fn mul(self, rhs: Cnf) -> Cnf {
        &self * &rhs
    }
}

impl fmt::Display for Cnf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            match e.as_nat() {
                Some(0) => write!(f, "{c}")?,
                Some(1) => f.write_str("w")?,
                Some(k) => write!(f, "w^{k}")?,
                None if *e == Cnf::omega() => f.write_str("w^w")?,
                None => write!(f, "w^{{{e}}}")?,
            }
            if *c > 1 && !e.is_zero() {
                write!(f, "*{c}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for Cnf {
    type Err = Error;

    /// Parses sums of terms `c`, `w`, `w*c`, `w^k`, `w^w`, `w^{<cnf>}`, with
    /// optional `*c`; `ω` is accepted for `w`.
    fn from_str(s: &str) -> Result<Self> {
        let mut p = Parser { chars: s.chars().filter(|c| !c.is_whitespace()).collect(), pos: 0 };
        let v = p.sum()?;
        if p.pos != p.chars.len() {
            return Err(Error::Parse(format!("trailing input in ordinal {s:?}")));
        }
        Ok(v)
    }
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Result<Cnf> {
        let mut acc = self.term()?;
        while self.eat('+') {
            let t = self.term()?;
            acc = &acc + &t;
        }
        Ok(acc)
    }

    fn nat(&mut self) -> Result<u64> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        let digits: String = self.chars[start..self.pos].iter().collect();
        digits.parse().map_err(|_| Error::Parse(format!("expected a number at offset {start}")))
    }

    fn is_omega(c: Option<char>) -> bool {
        matches!(c, Some('w' | 'ω'))
    }

    fn term(&mut self) -> Result<Cnf> {
        if !Self::is_omega(self.peek()) {
            return Ok(Cnf::nat(self.nat()?));
        }
        self.pos += 1;
        let exp = if self.eat('^') {
            if self.eat('{') {
                let e = self.sum()?;
                if !self.eat('}') {
                    return Err(Error::Parse("unclosed '{' in exponent".into()));
                }
                e
            } else if Self::is_omega(self.peek()) {
                self.pos += 1;
                Cnf::omega()
            } else {
                Cnf::nat(self.nat()?)
            }
        } else {
            Cnf::nat(1)
        };
        let coef = if self.eat('*') { self.nat()? } else { 1 };
        Ok(if coef == 0 { Cnf::zero() } else { Cnf { terms: vec![(exp, coef)] } })
    }
}

impl Serialize for Cnf {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Cnf {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn o(s: &str) -> Cnf {
        s.parse().unwrap()
    }

    #[test]
    fn parse_and_display() {
        for s in ["0", "7", "w", "w*5", "w^2*3 + w*5", "w^w", "w^{w + 1}*2 + w^3 + 4"] {
            assert_eq!(o(s).to_string(), s);
        }
        assert_eq!(o("ω^2"), o("w^2"));
        assert_eq!(o("3 + w"), o("w"));
        assert!("w^".parse::<Cnf>().is_err());
        assert!("w^{2".parse::<Cnf>().is_err());
    }

    #[test]
    fn arithmetic_examples() {
        assert_eq!(&o("1") + &o("w"), o("w"));
        assert_eq!(&o("w") + &o("1"), o("w + 1"));
        assert_eq!(&o("2") * &o("w"), o("w"));
        assert_eq!(&o("w") * &o("2"), o("w*2"));
        assert_eq!(&o("w + 1") * &o("w + 1"), o("w^2 + w + 1"));
        assert_eq!(&o("w") * &o("w^w"), o("w^w"));
        assert_eq!(&o("w^2*3 + 1") * &o("4"), o("w^2*12 + 1"));
    }

    #[test]
    fn ordering() {
        assert!(o("w") > o("1000"));
        assert!(o("w^2") > o("w*1000 + 5"));
        assert!(o("w^w") > o("w^1000"));
        assert!(o("w + 1") > o("w"));
    }

    #[test]
    fn divide_by_omega_examples() {
        assert_eq!(o("w^2").divide_by_omega().unwrap(), o("w"));
        assert_eq!(o("w^2*3 + w*5").divide_by_omega().unwrap(), o("w*3 + 5"));
        assert_eq!(o("w^w").divide_by_omega().unwrap(), o("w^w"));
        assert!(o("w*7").divide_by_omega().is_err());
        assert!(o("w^2 + 1").divide_by_omega().is_err());
    }

    #[test]
    fn norms() {
        assert_eq!(o("0").norm(), 0);
        assert_eq!(o("5").norm(), 5);
        assert_eq!(o("w").norm(), 2);
        assert_eq!(o("w*2 + 1").norm(), 5);
        assert_eq!(o("w^w").norm(), 3);
    }
}
