//! Finitely supported rational vectors and the Schreier norms
//! `‖x‖_α = sup_{E∈S_α} |Σ_{i∈E} x_i|`.

use crate::bounds::bounds;
use crate::error::{Error, Result};
use crate::rat::{fmt_q, parse_q, Q};
use crate::schreier::{FinSet, SchreierIndex};
use num_traits::{Signed, Zero};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::fmt;

/// Vector `Σ a_i e_i` with finitely many nonzero rational coordinates.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SchreierVector {
    coords: BTreeMap<u32, Q>,
}

impl SchreierVector {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn unit(i: u32) -> Self {
        Self::from_pairs([(i, Q::from_integer(1.into()))]).expect("unit index must be positive")
    }

    /// Build from `(index, value)` pairs; repeated indices are summed and
    /// zero coordinates dropped.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, Q)>) -> Result<Self> {
        let mut v = Self::zero();
        for (i, a) in pairs {
            if i == 0 {
                return Err(Error::Parse("vector indices start at 1".into()));
            }
            v.add_at(i, &a);
        }
        Ok(v)
    }

    /// Sum of unit vectors `Σ_{i∈F} e_i`.
    pub fn indicator(f: &FinSet) -> Self {
        let mut v = Self::zero();
        for &i in f.elems() {
            v.add_at(i, &Q::from_integer(1.into()));
        }
        v
    }

    fn add_at(&mut self, i: u32, a: &Q) {
        let e = self.coords.entry(i).or_insert_with(Q::zero);
        *e += a;
        if e.is_zero() {
            self.coords.remove(&i);
        }
    }

    pub fn get(&self, i: u32) -> Q {
        self.coords.get(&i).cloned().unwrap_or_else(Q::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &Q)> {
        self.coords.iter().map(|(i, a)| (*i, a))
    }

    pub fn support(&self) -> Vec<u32> {
        self.coords.keys().copied().collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn min_support(&self) -> Option<u32> {
        self.coords.keys().next().copied()
    }

    pub fn max_support(&self) -> Option<u32> {
        self.coords.keys().next_back().copied()
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            coords: self.coords.iter().map(|(i, a)| (*i, a * c)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut v = self.clone();
        for (i, a) in &other.coords {
            v.add_at(*i, a);
        }
        v
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&Q::from_integer((-1).into())))
    }

    /// `Σ c_i v_i`.
    pub fn combination(coeffs: &[Q], vs: &[SchreierVector]) -> Self {
        let mut out = Self::zero();
        for (c, v) in coeffs.iter().zip(vs) {
            if c.is_zero() {
                continue;
            }
            for (i, a) in &v.coords {
                out.add_at(*i, &(a * c));
            }
        }
        out
    }

    /// Move every coordinate `i` to `i + offset`.
    pub fn shifted(&self, offset: u32) -> Self {
        Self {
            coords: self.coords.iter().map(|(i, a)| (i + offset, a.clone())).collect(),
        }
    }

    /// Sum of the coordinates indexed by `e`.
    pub fn sum_over(&self, e: &[u32]) -> Q {
        e.iter().map(|i| self.get(*i)).sum()
    }

    pub fn l1(&self) -> Q {
        self.coords.values().map(|a| a.abs()).sum()
    }

    pub fn to_json(&self) -> Value {
        let coords: Vec<Value> = self.coords.iter().map(|(i, a)| json!([i, fmt_q(a)])).collect();
        json!({ "coords": coords })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = || Error::Parse("vector JSON must be {\"coords\": [[index, \"num/den\"], ...]}".into());
        let arr = v.get("coords").and_then(Value::as_array).ok_or_else(bad)?;
        let mut pairs = Vec::new();
        for item in arr {
            let pair = item.as_array().filter(|p| p.len() == 2).ok_or_else(bad)?;
            let i = pair[0].as_u64().filter(|&i| i >= 1 && i <= u32::MAX as u64).ok_or_else(bad)?;
            let a = match &pair[1] {
                Value::String(s) => parse_q(s)?,
                Value::Number(n) if n.is_i64() => Q::from_integer(n.as_i64().unwrap().into()),
                _ => return Err(bad()),
            };
            pairs.push((i as u32, a));
        }
        Self::from_pairs(pairs)
    }
}

impl fmt::Display for SchreierVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coords.is_empty() {
            return write!(f, "0");
        }
        for (k, (i, a)) in self.coords.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({})e{}", a, i)?;
        }
        Ok(())
    }
}

/// Value of a Schreier norm together with a set attaining it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormCertificate {
    pub value: Q,
    pub witness: FinSet,
}

impl NormCertificate {
    pub fn to_json(&self) -> Value {
        json!({ "value": fmt_q(&self.value), "witness": self.witness.to_string() })
    }
}

/// Exact `‖x‖_α` with the lexicographically least optimal witness.
///
/// Depth-first search over admissible subsets of the support in
/// lexicographic preorder; a branch is cut when the remaining positive or
/// negative mass cannot beat the best value found so far.
pub fn schreier_norm(x: &SchreierVector, alpha: &SchreierIndex) -> Result<NormCertificate> {
    let limit = bounds().support;
    if let Some(m) = x.max_support() {
        if m > limit {
            return Err(Error::BoundExceeded {
                what: "support",
                value: m as usize,
                limit: limit as usize,
            });
        }
    }
    Ok(schreier_norm_unchecked(x, alpha))
}

pub(crate) fn schreier_norm_unchecked(x: &SchreierVector, alpha: &SchreierIndex) -> NormCertificate {
    let idx: Vec<u32> = x.support();
    let vals: Vec<Q> = idx.iter().map(|i| x.get(*i)).collect();
    let n = idx.len();
    // suffix masses of positive and negative parts
    let mut pos = vec![Q::zero(); n + 1];
    let mut neg = vec![Q::zero(); n + 1];
    for j in (0..n).rev() {
        pos[j] = &pos[j + 1] + if vals[j].is_positive() { vals[j].clone() } else { Q::zero() };
        neg[j] = &neg[j + 1] + if vals[j].is_negative() { -vals[j].clone() } else { Q::zero() };
    }
    let mut s = Search {
        idx: &idx,
        vals: &vals,
        pos: &pos,
        neg: &neg,
        alpha,
        best: Q::zero(),
        witness: Vec::new(),
        cur: Vec::new(),
    };
    s.go(0, Q::zero());
    NormCertificate {
        value: s.best,
        witness: FinSet::from_sorted(s.witness),
    }
}

struct Search<'a> {
    idx: &'a [u32],
    vals: &'a [Q],
    pos: &'a [Q],
    neg: &'a [Q],
    alpha: &'a SchreierIndex,
    best: Q,
    witness: Vec<u32>,
    cur: Vec<u32>,
}

impl Search<'_> {
    fn go(&mut self, from: usize, sum: Q) {
        for j in from..self.idx.len() {
            let bound = std::cmp::max(&sum + &self.pos[j], &self.neg[j] - &sum);
            if bound <= self.best {
                return;
            }
            self.cur.push(self.idx[j]);
            if self.alpha.member_at(&self.cur, self.alpha.alpha()) {
                let s = &sum + &self.vals[j];
                if s.abs() > self.best {
                    self.best = s.abs();
                    self.witness = self.cur.clone();
                }
                self.go(j + 1, s);
            }
            self.cur.pop();
        }
    }
}

pub fn sup_norm(x: &SchreierVector) -> Q {
    x.coords.values().map(|a| a.abs()).max().unwrap_or_else(Q::zero)
}

/// `P_k x` (coordinates `≤ k`) or, with `complement`, `(I − P_k) x`.
pub fn project(x: &SchreierVector, k: u32, complement: bool) -> SchreierVector {
    SchreierVector {
        coords: x
            .coords
            .iter()
            .filter(|(i, _)| (**i <= k) != complement)
            .map(|(i, a)| (*i, a.clone()))
            .collect(),
    }
}
