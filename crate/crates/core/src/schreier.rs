//! Schreier families `S_α`: membership, enumeration, maximality and the
//! rank of nodes in `Tree(S_α)` under end-extension order.

use crate::bounds::bounds;
use crate::error::{Error, Result};
use crate::ord::{Kind, Ordinal};
use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Mutex;

/// Finite strictly increasing set of positive integers.
///
/// The derived order is lexicographic on the element list (a proper prefix
/// is smaller); use [`FinSet::enum_key`] for the enumeration order.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FinSet(Vec<u32>);

impl FinSet {
    pub fn new(mut elems: Vec<u32>) -> Result<FinSet> {
        elems.sort_unstable();
        if elems.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Parse("repeated element in set".into()));
        }
        if elems.first() == Some(&0) {
            return Err(Error::Parse("set elements must be positive".into()));
        }
        Ok(FinSet(elems))
    }

    /// Wrap an already strictly increasing list of positive integers.
    pub fn from_sorted(elems: Vec<u32>) -> FinSet {
        debug_assert!(elems.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(elems.first().is_none_or(|&m| m >= 1));
        FinSet(elems)
    }

    pub fn empty() -> FinSet {
        FinSet(Vec::new())
    }

    pub fn singleton(n: u32) -> FinSet {
        FinSet(vec![n])
    }

    pub fn elems(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn min_elem(&self) -> Option<u32> {
        self.0.first().copied()
    }

    pub fn max_elem(&self) -> Option<u32> {
        self.0.last().copied()
    }

    /// `self ⪯ other`: `self` is an initial segment of `other`.
    pub fn is_initial_segment_of(&self, other: &FinSet) -> bool {
        other.0.starts_with(&self.0)
    }

    /// `self ≺ other`: proper initial segment.
    pub fn precedes(&self, other: &FinSet) -> bool {
        self.0.len() < other.0.len() && self.is_initial_segment_of(other)
    }

    /// `self ∪ {n}` for `n > max self`.
    pub fn extended(&self, n: u32) -> FinSet {
        debug_assert!(self.max_elem().is_none_or(|m| n > m));
        let mut v = self.0.clone();
        v.push(n);
        FinSet(v)
    }

    /// Drop the largest element.
    pub fn parent(&self) -> Option<FinSet> {
        if self.0.is_empty() {
            None
        } else {
            Some(FinSet(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    /// Sort key of the enumeration order: by maximum, then size, then
    /// lexicographically.
    pub fn enum_key(&self) -> (u32, usize, &[u32]) {
        (self.max_elem().unwrap_or(0), self.0.len(), &self.0)
    }
}

impl fmt::Display for FinSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "}}")
    }
}

impl FromStr for FinSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<FinSet> {
        let inner = s
            .trim()
            .strip_prefix('{')
            .and_then(|r| r.strip_suffix('}'))
            .ok_or_else(|| Error::Parse(format!("set must be braced: {s:?}")))?;
        if inner.trim().is_empty() {
            return Ok(FinSet::empty());
        }
        let elems = inner
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<u32>()
                    .map_err(|_| Error::Parse(format!("bad set element {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if elems.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Parse("set elements must increase".into()));
        }
        FinSet::new(elems)
    }
}

/// A Schreier index `α` together with memo tables for the fundamental
/// sequences and ranks used below it.
pub struct SchreierIndex {
    alpha: Ordinal,
    fund_memo: Mutex<HashMap<(Ordinal, u32), Ordinal>>,
    root_memo: Mutex<HashMap<Ordinal, Result<Ordinal>>>,
}

impl Clone for SchreierIndex {
    fn clone(&self) -> Self {
        SchreierIndex::new(self.alpha.clone())
    }
}

impl fmt::Debug for SchreierIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SchreierIndex({})", self.alpha)
    }
}

/// How far the limit detector looks before giving up.
const TEMPLATE_HORIZON: u32 = 64;

impl SchreierIndex {
    pub fn new(alpha: Ordinal) -> SchreierIndex {
        SchreierIndex {
            alpha,
            fund_memo: Mutex::new(HashMap::new()),
            root_memo: Mutex::new(HashMap::new()),
        }
    }

    pub fn finite(n: u64) -> SchreierIndex {
        SchreierIndex::new(Ordinal::finite(n))
    }

    pub fn alpha(&self) -> &Ordinal {
        &self.alpha
    }

    /// Index for `α+1`, used for `S_{α+1}` in the `Q_k` projections.
    pub fn successor(&self) -> SchreierIndex {
        SchreierIndex::new(self.alpha.succ())
    }

    fn fund(&self, beta: &Ordinal, n: u32) -> Ordinal {
        let key = (beta.clone(), n);
        if let Some(v) = self.fund_memo.lock().unwrap().get(&key) {
            return v.clone();
        }
        let v = beta
            .fundamental(n as u64)
            .expect("fundamental sequence of a limit ordinal");
        self.fund_memo.lock().unwrap().insert(key, v.clone());
        v
    }

    /// `F ∈ S_α`.
    pub fn contains(&self, f: &FinSet) -> bool {
        self.member_at(&f.0, &self.alpha)
    }

    /// `F ∈ S_β` for an arbitrary `β` (sharing this index's memo).
    pub fn member_at(&self, f: &[u32], beta: &Ordinal) -> bool {
        if f.is_empty() {
            return true;
        }
        match beta.classify() {
            Kind::Zero => f.len() <= 1,
            Kind::Successor => {
                let pred = beta.predecessor().unwrap();
                if pred.is_zero() {
                    return f.len() <= f[0] as usize;
                }
                self.greedy_blocks(f, &pred).len() <= f[0] as usize
            }
            Kind::Limit => {
                let b = self.fund(beta, f[0]);
                self.member_at(f, &b)
            }
        }
    }

    /// Start indices of the greedy decomposition of `f` into consecutive
    /// blocks from `S_γ`, each block the longest admissible prefix of the
    /// remainder. Since `S_γ` is hereditary this uses the fewest blocks.
    pub fn greedy_blocks(&self, f: &[u32], gamma: &Ordinal) -> Vec<usize> {
        let mut starts = Vec::new();
        let mut i = 0;
        while i < f.len() {
            starts.push(i);
            let mut j = i + 1;
            while j < f.len() && self.member_at(&f[i..=j], gamma) {
                j += 1;
            }
            i = j;
        }
        starts
    }

    /// `{F ∈ S_α : F ⊆ [1..n]}` in enumeration order.
    pub fn enumerate(&self, n: u32) -> Result<Vec<FinSet>> {
        let limit = bounds().enum_n;
        if n > limit {
            return Err(Error::BoundExceeded {
                what: "N",
                value: n as usize,
                limit: limit as usize,
            });
        }
        Ok(self.enumerate_unchecked(n))
    }

    pub(crate) fn enumerate_unchecked(&self, n: u32) -> Vec<FinSet> {
        let mut out = vec![FinSet::empty()];
        let mut cur = Vec::new();
        self.dfs(1, n, &mut cur, &mut out);
        out.sort_by(|a, b| a.enum_key().cmp(&b.enum_key()));
        out
    }

    fn dfs(&self, from: u32, n: u32, cur: &mut Vec<u32>, out: &mut Vec<FinSet>) {
        for x in from..=n {
            cur.push(x);
            // hereditary: a non-member has no member supersets
            if self.member_at(cur, &self.alpha) {
                out.push(FinSet(cur.clone()));
                self.dfs(x + 1, n, cur, out);
            }
            cur.pop();
        }
    }

    /// Members with maximum exactly `m`, given all members inside `[1..m-1]`.
    pub fn layer(&self, m: u32, below: &[FinSet]) -> Vec<FinSet> {
        let mut out: Vec<FinSet> = below
            .iter()
            .filter(|x| x.max_elem().is_none_or(|mx| mx < m))
            .map(|x| x.extended(m))
            .filter(|x| self.contains(x))
            .collect();
        out.sort_by(|a, b| a.enum_key().cmp(&b.enum_key()));
        out
    }

    /// No one-point end-extension of `F` lies in `S_α`.
    ///
    /// For nonempty `F`, whether `F ∪ {n}` is admissible does not depend on
    /// `n > max F`, so testing `n = max F + 1` decides it.
    pub fn is_maximal(&self, f: &FinSet) -> Result<bool> {
        if !self.contains(f) {
            return Err(Error::pre(format!("{f} is not in S_{}", self.alpha)));
        }
        match f.max_elem() {
            None => Ok(false),
            Some(m) => Ok(!self.contains(&f.extended(m + 1))),
        }
    }

    /// Order of the subtree `{G ∈ S_α : F ⪯ G}` of `Tree(S_α)`.
    pub fn node_order(&self, f: &FinSet) -> Result<Ordinal> {
        if !self.contains(f) {
            return Err(Error::pre(format!("{f} is not in S_{}", self.alpha)));
        }
        check_symbolic(&self.alpha)?;
        if f.is_empty() {
            return Ok(self.root_rank(&self.alpha)?.succ());
        }
        Ok(self.rank(&f.0, &self.alpha)?.succ())
    }

    /// Rank of a nonempty member `f` of `S_β` (terminal nodes have rank 0).
    ///
    /// For `β = γ+1` with greedy blocks `B_1..B_k` and `r = min F − k` unused
    /// blocks, `rank = ρ_γ·r + rank_γ(B_k)` where `ρ_γ` is the rank of the
    /// root of `Tree(S_γ)`. For a limit `β` the subtree of `F` is that of
    /// `S_{β[min F]}`.
    fn rank(&self, f: &[u32], beta: &Ordinal) -> Result<Ordinal> {
        debug_assert!(!f.is_empty());
        match beta.classify() {
            Kind::Zero => Ok(Ordinal::zero()),
            Kind::Successor => {
                let gamma = beta.predecessor().unwrap();
                let starts = self.greedy_blocks(f, &gamma);
                let k = starts.len() as u64;
                let r = f[0] as u64 - k;
                let last = &f[*starts.last().unwrap()..];
                let tail = self.rank(last, &gamma)?;
                if r == 0 {
                    return Ok(tail);
                }
                let root = self.root_rank(&gamma)?;
                Ok(root.mul(&Ordinal::finite(r)).add(&tail))
            }
            Kind::Limit => {
                let b = self.fund(beta, f[0]);
                self.rank(f, &b)
            }
        }
    }

    /// Rank of `∅` in `Tree(S_β)`: `sup_n (rank({n}) + 1)`, with the
    /// supremum found by the template detector.
    fn root_rank(&self, beta: &Ordinal) -> Result<Ordinal> {
        if let Some(v) = self.root_memo.lock().unwrap().get(beta) {
            return v.clone();
        }
        let v = if beta.is_zero() {
            Ok(Ordinal::one())
        } else {
            limit_of(&|n| Ok(self.rank(&[n], beta)?.succ()), 1)
        };
        self.root_memo
            .lock()
            .unwrap()
            .insert(beta.clone(), v.clone());
        v
    }

    /// Order of the finite tree `S_α ∩ 2^[1..n]` under end-extension,
    /// by literal iterated derivation.
    pub fn restricted_order(&self, n: u32) -> Result<u64> {
        let mut nodes: HashSet<FinSet> = self.enumerate(n)?.into_iter().collect();
        let mut order = 0;
        while !nodes.is_empty() {
            let mut derived = HashSet::new();
            for x in &nodes {
                for len in 0..x.len() {
                    let p = FinSet(x.0[..len].to_vec());
                    if nodes.contains(&p) {
                        derived.insert(p);
                    }
                }
            }
            nodes = derived;
            order += 1;
        }
        Ok(order)
    }
}

fn check_symbolic(alpha: &Ordinal) -> Result<()> {
    if alpha.depth() > 2 {
        return Err(Error::Undetermined(format!(
            "symbolic ranks are limited to exponent depth 2, got {alpha}"
        )));
    }
    Ok(())
}

/// Supremum of an increasing ordinal sequence `v(n)`, recognised by a
/// template: past a common prefix `P`, either the coefficient of a fixed
/// power `ω^e` grows affinely (limit `P + ω^(e+1)`), or the exponent of the
/// next term increases and has a recognisable limit `E` (limit `P + ω^E`),
/// or the sequence is constant. Four consecutive values must agree with the
/// template; otherwise the window slides, up to a fixed horizon.
fn limit_of(v: &dyn Fn(u32) -> Result<Ordinal>, nested: usize) -> Result<Ordinal> {
    if nested > 3 {
        return Err(Error::Undetermined("limit template nested too deeply".into()));
    }
    let mut cache: Vec<Option<Ordinal>> = vec![None; TEMPLATE_HORIZON as usize + 4];
    let mut get = |n: u32| -> Result<Ordinal> {
        if let Some(x) = &cache[n as usize] {
            return Ok(x.clone());
        }
        let x = v(n)?;
        cache[n as usize] = Some(x.clone());
        Ok(x)
    };
    for n0 in 1..=TEMPLATE_HORIZON - 3 {
        let w: Vec<Ordinal> = (n0..n0 + 4).map(&mut get).collect::<Result<_>>()?;
        if w.iter().all(|x| *x == w[0]) {
            return Ok(w[0].clone());
        }
        if w.windows(2).any(|p| p[0] >= p[1]) {
            continue;
        }
        let terms: Vec<&[(Ordinal, u64)]> = w.iter().map(|x| x.terms()).collect();
        let mut i = 0;
        while terms.iter().all(|t| t.len() > i) && terms.iter().all(|t| t[i] == terms[0][i]) {
            i += 1;
        }
        if terms.iter().any(|t| t.len() <= i) {
            continue;
        }
        let prefix = Ordinal::from_terms(terms[0][..i].to_vec())?;
        let exps: Vec<&Ordinal> = terms.iter().map(|t| &t[i].0).collect();
        if exps.iter().all(|e| *e == exps[0]) {
            let c: Vec<i128> = terms.iter().map(|t| t[i].1 as i128).collect();
            let d = c[1] - c[0];
            if d > 0 && c.windows(2).all(|p| p[1] - p[0] == d) {
                return Ok(prefix.add(&Ordinal::omega_pow(&exps[0].succ())));
            }
            continue;
        }
        if exps.windows(2).all(|p| p[0] < p[1]) {
            // the exponent sequence, with the window re-based at n0
            let exp_at = |k: u32| -> Result<Ordinal> {
                let x = v(n0 + k - 1)?;
                let t = x.terms();
                if t.len() <= i || t[..i] != terms[0][..i] {
                    return Err(Error::Undetermined("exponent template broke".into()));
                }
                Ok(t[i].0.clone())
            };
            if let Ok(e) = limit_of(&exp_at, nested + 1) {
                if e.is_limit() {
                    return Ok(prefix.add(&Ordinal::omega_pow(&e)));
                }
            }
        }
    }
    Err(Error::Undetermined(format!(
        "no limit template within n <= {TEMPLATE_HORIZON}"
    )))
}
