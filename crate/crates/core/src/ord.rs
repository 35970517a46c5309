//! Ordinals below ε₀ in Cantor normal form.
//!
//! An ordinal is a list of terms `ω^e·c` with strictly decreasing exponents
//! and positive coefficients; the empty list is `0`. Because the derived
//! lexicographic order on that list coincides with the ordinal order, `Ord`
//! is derived.

use crate::error::{Error, Result};
use std::fmt;
use std::str::FromStr;

/// Maximum nesting depth of exponents accepted by the parser.
pub const MAX_DEPTH: usize = 16;
/// Coefficients and finite exponents written in text must be below this.
pub const MAX_COEF: u64 = 1 << 31;

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ordinal {
    terms: Vec<(Ordinal, u64)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Zero,
    Successor,
    Limit,
}

impl Ordinal {
    pub fn zero() -> Ordinal {
        Ordinal { terms: Vec::new() }
    }

    pub fn one() -> Ordinal {
        Ordinal::finite(1)
    }

    pub fn omega() -> Ordinal {
        Ordinal::omega_pow(&Ordinal::one())
    }

    pub fn finite(n: u64) -> Ordinal {
        if n == 0 {
            Ordinal::zero()
        } else {
            Ordinal {
                terms: vec![(Ordinal::zero(), n)],
            }
        }
    }

    /// `ω^a`.
    pub fn omega_pow(a: &Ordinal) -> Ordinal {
        Ordinal {
            terms: vec![(a.clone(), 1)],
        }
    }

    /// Build from raw terms. The caller must supply a valid normal form.
    pub fn from_terms(terms: Vec<(Ordinal, u64)>) -> Result<Ordinal> {
        for w in terms.windows(2) {
            if w[0].0 <= w[1].0 {
                return Err(Error::Parse("exponents must strictly decrease".into()));
            }
        }
        if terms.iter().any(|t| t.1 == 0) {
            return Err(Error::Parse("coefficients must be positive".into()));
        }
        Ok(Ordinal { terms })
    }

    pub fn terms(&self) -> &[(Ordinal, u64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.as_finite().is_some()
    }

    pub fn as_finite(&self) -> Option<u64> {
        match self.terms.as_slice() {
            [] => Some(0),
            [(e, c)] if e.is_zero() => Some(*c),
            _ => None,
        }
    }

    pub fn classify(&self) -> Kind {
        match self.terms.last() {
            None => Kind::Zero,
            Some((e, _)) if e.is_zero() => Kind::Successor,
            _ => Kind::Limit,
        }
    }

    pub fn is_limit(&self) -> bool {
        self.classify() == Kind::Limit
    }

    /// Leading exponent (the degree); `None` for zero.
    pub fn degree(&self) -> Option<&Ordinal> {
        self.terms.first().map(|t| &t.0)
    }

    /// Exponent nesting depth: 0 for finite ordinals, 1 for `ω·2+3`, ...
    pub fn depth(&self) -> usize {
        self.terms
            .iter()
            .filter(|(e, _)| !e.is_zero())
            .map(|(e, _)| 1 + e.depth())
            .max()
            .unwrap_or(0)
    }

    pub fn succ(&self) -> Ordinal {
        self.add(&Ordinal::one())
    }

    /// `β` with `β + 1 = self`, if `self` is a successor.
    pub fn predecessor(&self) -> Option<Ordinal> {
        if self.classify() != Kind::Successor {
            return None;
        }
        let mut terms = self.terms.clone();
        let last = terms.last_mut().unwrap();
        if last.1 == 1 {
            terms.pop();
        } else {
            last.1 -= 1;
        }
        Some(Ordinal { terms })
    }

    /// Ordinal sum `self + b`.
    pub fn add(&self, b: &Ordinal) -> Ordinal {
        let Some((e, c)) = b.terms.first() else {
            return self.clone();
        };
        let mut terms: Vec<(Ordinal, u64)> = Vec::new();
        let mut merged = *c;
        for (ae, ac) in &self.terms {
            match ae.cmp(e) {
                std::cmp::Ordering::Greater => terms.push((ae.clone(), *ac)),
                std::cmp::Ordering::Equal => {
                    merged = merged.checked_add(*ac).expect("ordinal coefficient overflow")
                }
                std::cmp::Ordering::Less => break,
            }
        }
        terms.push((e.clone(), merged));
        terms.extend(b.terms[1..].iter().cloned());
        Ordinal { terms }
    }

    /// Ordinal product `self · b`.
    pub fn mul(&self, b: &Ordinal) -> Ordinal {
        if self.is_zero() || b.is_zero() {
            return Ordinal::zero();
        }
        let (lead_e, lead_c) = &self.terms[0];
        let mut out = Ordinal::zero();
        for (e, c) in &b.terms {
            let part = if e.is_zero() {
                let mut terms = self.terms.clone();
                terms[0].1 = lead_c.checked_mul(*c).expect("ordinal coefficient overflow");
                Ordinal { terms }
            } else {
                Ordinal {
                    terms: vec![(lead_e.add(e), *c)],
                }
            };
            out = out.add(&part);
        }
        out
    }

    /// `λ[n]` for a limit `λ`:
    /// `(γ+ω^(δ+1))[n] = γ+ω^δ·n`, `(γ+ω^λ)[n] = γ+ω^(λ[n])`, `ω[n] = n`.
    pub fn fundamental(&self, n: u64) -> Result<Ordinal> {
        if n == 0 {
            return Err(Error::pre("fundamental sequence index must be positive"));
        }
        let (e, c) = match self.terms.last() {
            None => return Err(Error::pre("0 has no fundamental sequence")),
            Some((e, _)) if e.is_zero() => {
                return Err(Error::pre(format!("{self} is a successor")))
            }
            Some(t) => t.clone(),
        };
        let mut gamma = self.terms.clone();
        if c == 1 {
            gamma.pop();
        } else {
            gamma.last_mut().unwrap().1 -= 1;
        }
        let gamma = Ordinal { terms: gamma };
        let tail = match e.predecessor() {
            Some(d) => Ordinal {
                terms: vec![(d, n)],
            },
            None => Ordinal::omega_pow(&e.fundamental(n)?),
        };
        Ok(gamma.add(&tail))
    }
}

impl From<u64> for Ordinal {
    fn from(n: u64) -> Self {
        Ordinal::finite(n)
    }
}

impl fmt::Display for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, "+")?;
            }
            match e.as_finite() {
                Some(0) => {
                    write!(f, "{c}")?;
                    continue;
                }
                Some(1) => write!(f, "w")?,
                Some(k) => write!(f, "w^{k}")?,
                None => write!(f, "w^({e})")?,
            }
            if *c > 1 {
                write!(f, "*{c}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for Ordinal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Ordinal> {
        let mut p = Parser {
            s: s.trim().as_bytes(),
            pos: 0,
        };
        let v = p.ordinal(0)?;
        if p.pos != p.s.len() {
            return Err(p.err("trailing input"));
        }
        Ok(v)
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse(format!("ordinal: {msg} at byte {}", self.pos))
    }

    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ordinal(&mut self, depth: usize) -> Result<Ordinal> {
        if depth > MAX_DEPTH {
            return Err(self.err("exponent nesting too deep"));
        }
        let mut acc = self.term(depth)?;
        while self.eat(b'+') {
            let t = self.term(depth)?;
            acc = acc.add(&t);
        }
        Ok(acc)
    }

    fn term(&mut self, depth: usize) -> Result<Ordinal> {
        if self.eat(b'w') {
            let exp = if self.eat(b'^') {
                if self.eat(b'(') {
                    let e = self.ordinal(depth + 1)?;
                    if !self.eat(b')') {
                        return Err(self.err("expected ')'"));
                    }
                    e
                } else {
                    Ordinal::finite(self.nat()?)
                }
            } else {
                Ordinal::one()
            };
            let coef = if self.eat(b'*') { self.nat()? } else { 1 };
            if coef == 0 {
                return Ok(Ordinal::zero());
            }
            Ok(Ordinal {
                terms: vec![(exp, coef)],
            })
        } else {
            Ok(Ordinal::finite(self.nat()?))
        }
    }

    fn nat(&mut self) -> Result<u64> {
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a number"));
        }
        let text = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
        match text.parse::<u64>() {
            Ok(v) if v < MAX_COEF => Ok(v),
            _ => Err(self.err("number too large")),
        }
    }
}
