//! `C(ω^(ω^α))` through its node basis, and step functions on ordinal
//! intervals.
//!
//! `S_α` with the pointwise topology is homeomorphic to `[1, ω^(ω^α)]`, so a
//! continuous function is a function on `S_α`. The node basis element
//! `χ_F` is the indicator of `{G ∈ S_α : F ⪯ G}` (end-extensions of `F`).

use crate::bounds::bounds;
use crate::error::{Error, Result};
use crate::ord::Ordinal;
use crate::rat::{fmt_q, parse_q, Q};
use crate::schreier::{FinSet, SchreierIndex};
use crate::seqcheck::{l1_lower, AmbientSpace};
use crate::trees::{IndexTree, Payload};
use crate::xnorm::SchreierVector;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use std::collections::{BTreeMap, BTreeSet};

/// Candidate search horizon for the greedy embeddings.
const SEARCH_HORIZON: u32 = 4096;

/// Finite combination `Σ a_F χ_F` of node basis elements of `C(S_α)`.
#[derive(Clone, Debug)]
pub struct NodeFunction {
    alpha: SchreierIndex,
    combo: BTreeMap<FinSet, Q>,
}

impl PartialEq for NodeFunction {
    fn eq(&self, other: &Self) -> bool {
        self.alpha.alpha() == other.alpha.alpha() && self.combo == other.combo
    }
}

impl NodeFunction {
    pub fn zero(alpha: SchreierIndex) -> Self {
        NodeFunction {
            alpha,
            combo: BTreeMap::new(),
        }
    }

    pub fn chi(alpha: SchreierIndex, f: FinSet) -> Result<Self> {
        Self::from_pairs(alpha, [(f, Q::one())])
    }

    /// Every key must lie in `S_α`; repeated keys are summed.
    pub fn from_pairs(alpha: SchreierIndex, pairs: impl IntoIterator<Item = (FinSet, Q)>) -> Result<Self> {
        let mut out = Self::zero(alpha);
        for (f, a) in pairs {
            if !out.alpha.contains(&f) {
                return Err(Error::pre(format!("{f} is not in S_{}", out.alpha.alpha())));
            }
            out.add_term(f, &a);
        }
        Ok(out)
    }

    fn add_term(&mut self, f: FinSet, a: &Q) {
        let v = self.get(&f) + a;
        if v.is_zero() {
            self.combo.remove(&f);
        } else {
            self.combo.insert(f, v);
        }
    }

    pub fn alpha(&self) -> &SchreierIndex {
        &self.alpha
    }

    pub fn combo(&self) -> &BTreeMap<FinSet, Q> {
        &self.combo
    }

    pub fn get(&self, f: &FinSet) -> Q {
        self.combo.get(f).cloned().unwrap_or_else(Q::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.combo.is_empty()
    }

    pub fn scale(&self, c: &Q) -> Self {
        let mut out = Self::zero(self.alpha.clone());
        for (f, a) in &self.combo {
            out.add_term(f.clone(), &(a * c));
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (f, a) in &other.combo {
            out.add_term(f.clone(), a);
        }
        out
    }

    /// Value at the point `G ∈ S_α`.
    pub fn eval(&self, g: &FinSet) -> Q {
        (0..=g.len())
            .filter_map(|l| self.combo.get(&FinSet::from_sorted(g.elems()[..l].to_vec())))
            .sum()
    }

    pub fn to_json(&self) -> Value {
        let combo: Vec<Value> = self
            .combo
            .iter()
            .map(|(f, a)| json!([f.to_string(), fmt_q(a)]))
            .collect();
        json!({ "alpha": self.alpha.alpha().to_string(), "combo": combo })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let alpha: Ordinal = v
            .get("alpha")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Parse("node function needs alpha".into()))?
            .parse()?;
        let items = v
            .get("combo")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("node function needs combo".into()))?;
        let mut pairs = Vec::new();
        for it in items {
            let (Some(f), Some(a)) = (it.get(0).and_then(Value::as_str), it.get(1).and_then(Value::as_str)) else {
                return Err(Error::Parse("combo entries are [set, \"n/d\"]".into()));
            };
            pairs.push((f.parse::<FinSet>()?, parse_q(a)?));
        }
        Self::from_pairs(SchreierIndex::new(alpha), pairs)
    }
}

/// Exact sup norm. The keys `⪯ G` form a chain whose largest member `F`
/// sees the same keys as `G`, so the sup is attained at a key, or is `0`
/// at `∅` when `∅` is not a key.
pub fn cnorm(f: &NodeFunction) -> Q {
    let mut best = if f.combo.contains_key(&FinSet::empty()) {
        None
    } else {
        Some(Q::zero())
    };
    for key in f.combo.keys() {
        let v = f.eval(key).abs();
        if best.as_ref().is_none_or(|b| v > *b) {
            best = Some(v);
        }
    }
    best.unwrap_or_else(Q::zero)
}

/// Listing of node basis elements in which initial segments come first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdmissibleEnumeration {
    pub order: Vec<FinSet>,
}

impl AdmissibleEnumeration {
    /// First pair `(i, j)` with `i > j` but `order[i] ≺ order[j]`.
    pub fn violation(&self) -> Option<(usize, usize)> {
        for (j, b) in self.order.iter().enumerate() {
            for (i, a) in self.order.iter().enumerate().skip(j + 1) {
                if a.precedes(b) {
                    return Some((i, j));
                }
            }
        }
        None
    }

    pub fn position(&self, f: &FinSet) -> Option<usize> {
        self.order.iter().position(|g| g == f)
    }
}

/// `S_α ∩ 2^[1..n]` ordered by `(max, size, lex)`, starting with `∅`.
pub fn admissible_enumeration(alpha: &SchreierIndex, n: u32) -> Result<AdmissibleEnumeration> {
    Ok(AdmissibleEnumeration {
        order: alpha.enumerate(n)?,
    })
}

/// Norms of the partial sums `Σ_{i≤k} a_i χ_{F_i}` along the enumeration
/// (only positions carrying a key). They never decrease.
pub fn monotone_check(f: &NodeFunction, en: &AdmissibleEnumeration) -> Result<Vec<Q>> {
    let listed: BTreeSet<&FinSet> = en.order.iter().collect();
    if let Some(k) = f.combo.keys().find(|k| !listed.contains(k)) {
        return Err(Error::pre(format!("{k} is not in the enumeration")));
    }
    let mut partial = NodeFunction::zero(f.alpha.clone());
    let mut out: Vec<Q> = Vec::new();
    for g in &en.order {
        if let Some(a) = f.combo.get(g) {
            partial.add_term(g.clone(), a);
            let n = cnorm(&partial);
            if out.last().is_some_and(|p| n < *p) {
                return Err(Error::Internal(format!("partial sum norm decreased at {g}")));
            }
            out.push(n);
        }
    }
    Ok(out)
}

fn key_lt(a: &FinSet, b: &FinSet) -> bool {
    a.enum_key() < b.enum_key()
}

/// Least `base ∪ {t}` in `target` that comes after `last` in the
/// enumeration and whose subtree order is at least `rank`.
fn least_successor(
    target: &SchreierIndex,
    base: &FinSet,
    last: Option<&FinSet>,
    rank: &Ordinal,
) -> Result<FinSet> {
    let lo = base
        .max_elem()
        .map_or(1, |m| m + 1)
        .max(last.and_then(FinSet::max_elem).unwrap_or(1));
    for t in lo..lo + SEARCH_HORIZON {
        let cand = base.extended(t);
        if last.is_some_and(|l| !key_lt(l, &cand)) || !target.contains(&cand) {
            continue;
        }
        if target.node_order(&cand)? >= *rank {
            return Ok(cand);
        }
    }
    Err(Error::Undetermined(format!("no admissible successor of {base} within the search horizon")))
}

/// The tree isomorphism `ψ` of `S_α ∩ 2^[1..n]` into `S_α`, built greedily.
#[derive(Clone, Debug)]
pub struct Psi {
    alpha: SchreierIndex,
    n: u32,
    pairs: Vec<(FinSet, FinSet)>,
    forward: BTreeMap<FinSet, FinSet>,
    backward: BTreeMap<FinSet, FinSet>,
}

/// `ψ(∅) = ∅`; each later `G` goes to the least immediate successor of
/// `ψ(G minus max G)` beyond the previous image whose subtree order
/// dominates that of `G`.
pub fn build_psi(alpha: &SchreierIndex, n: u32) -> Result<Psi> {
    let domain = alpha.enumerate(n)?;
    let mut forward = BTreeMap::new();
    let mut pairs = Vec::with_capacity(domain.len());
    let mut last: Option<FinSet> = None;
    for g in domain {
        let img = match g.parent() {
            None => FinSet::empty(),
            Some(p) => {
                let base = forward.get(&p).cloned().ok_or_else(|| Error::Internal(format!("{p} unmapped")))?;
                least_successor(alpha, &base, last.as_ref(), &alpha.node_order(&g)?)?
            }
        };
        forward.insert(g.clone(), img.clone());
        pairs.push((g, img.clone()));
        last = Some(img);
    }
    let backward = pairs.iter().map(|(g, f)| (f.clone(), g.clone())).collect();
    Ok(Psi {
        alpha: alpha.clone(),
        n,
        pairs,
        forward,
        backward,
    })
}

impl Psi {
    pub fn alpha(&self) -> &SchreierIndex {
        &self.alpha
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn get(&self, g: &FinSet) -> Option<&FinSet> {
        self.forward.get(g)
    }

    /// `(G, ψG)` in domain enumeration order.
    pub fn pairs(&self) -> &[(FinSet, FinSet)] {
        &self.pairs
    }

    /// Largest element of any image.
    pub fn image_max(&self) -> u32 {
        self.pairs.iter().filter_map(|(_, f)| f.max_elem()).max().unwrap_or(0)
    }

    /// `φ(F) = {max G : ψG ⪯ F}`.
    pub fn phi(&self, f: &FinSet) -> FinSet {
        let elems: Vec<u32> = (1..=f.len())
            .filter_map(|l| self.backward.get(&FinSet::from_sorted(f.elems()[..l].to_vec())))
            .filter_map(FinSet::max_elem)
            .collect();
        FinSet::from_sorted(elems)
    }

    /// `U x = Σ_i x_i Σ_{max G = i} χ_{ψG}`.
    pub fn embed_u(&self, x: &SchreierVector) -> Result<NodeFunction> {
        if x.max_support().is_some_and(|m| m > self.n) {
            return Err(Error::pre(format!("support of x exceeds the domain [1..{}]", self.n)));
        }
        let mut out = NodeFunction::zero(self.alpha.clone());
        for (g, img) in &self.pairs {
            if let Some(m) = g.max_elem() {
                let a = x.get(m);
                if !a.is_zero() {
                    out.add_term(img.clone(), &a);
                }
            }
        }
        Ok(out)
    }

    /// `o(T_G) ≤ o(T_{ψG})` for every mapped pair.
    pub fn rank_condition(&self) -> Result<bool> {
        for (g, f) in &self.pairs {
            if self.alpha.node_order(g)? > self.alpha.node_order(f)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// `Q_k g = (Σ_{l=2}^{k+1} χ_{{l}})·g`: keeps keys starting at some
/// `l ∈ [2, k+1]` and spreads the `χ_∅` coefficient over those `χ_{{l}}`.
pub fn project_qk(f: &NodeFunction, k: u32) -> Result<NodeFunction> {
    let mut out = NodeFunction::zero(f.alpha.clone());
    for (key, a) in &f.combo {
        match key.min_elem() {
            None => {
                for l in 2..=k + 1 {
                    out.add_term(FinSet::singleton(l), a);
                }
            }
            Some(m) if (2..=k + 1).contains(&m) => out.add_term(key.clone(), a),
            Some(_) => {}
        }
    }
    if cnorm(&out) > cnorm(f) {
        return Err(Error::Internal("Q_k increased the norm".into()));
    }
    Ok(out)
}

/// Block-basis embedding of the node basis of
/// `(C(ω^(ω^n)) ⊕ … ⊕ C(ω^(ω^n·k)))_∞`, realised inside `C(S_{n+1})` as
/// the keys with minimum in `[2, k+1]`, into the node basis of `C(S_n)`.
#[derive(Clone, Debug)]
pub struct SumEmbedding {
    pub n: u64,
    pub k: u32,
    source: SchreierIndex,
    target: SchreierIndex,
    pairs: Vec<(FinSet, FinSet)>,
    /// start of the last greedy `S_n` block of each domain set
    block_start: Vec<usize>,
    forward: BTreeMap<FinSet, FinSet>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Distortion {
    /// largest `‖Sf‖/‖f‖` seen
    pub upper: Q,
    /// largest `‖f‖/‖Sf‖` seen
    pub lower: Q,
    pub product: Q,
    pub bound: Q,
    pub samples: usize,
}

impl Distortion {
    pub fn to_json(&self) -> Value {
        json!({
            "upper": fmt_q(&self.upper),
            "lower": fmt_q(&self.lower),
            "product": fmt_q(&self.product),
            "bound": fmt_q(&self.bound),
            "samples": self.samples,
        })
    }
}

/// Greedy least-index construction. A domain set whose last greedy
/// `S_n`-block is a singleton starts a new subtree and goes to a singleton;
/// any other set goes to an immediate successor of its parent's image, with
/// subtree order at least that of its last block.
pub fn embed_sum(n: u64, k: u32, big_n: u32) -> Result<SumEmbedding> {
    if n > 2 || k == 0 || k > 3 {
        return Err(Error::pre("embed_sum supports n ≤ 2 and 1 ≤ k ≤ 3"));
    }
    let source = SchreierIndex::finite(n + 1);
    let target = SchreierIndex::finite(n);
    let gamma = Ordinal::finite(n);
    let domain: Vec<FinSet> = source
        .enumerate(big_n)?
        .into_iter()
        .filter(|f| f.min_elem().is_some_and(|m| (2..=k + 1).contains(&m)))
        .collect();
    let mut forward: BTreeMap<FinSet, FinSet> = BTreeMap::new();
    let mut pairs = Vec::new();
    let mut block_start = Vec::new();
    let mut last: Option<FinSet> = None;
    for e in domain {
        let start = *target.greedy_blocks(e.elems(), &gamma).last().expect("nonempty");
        let block = FinSet::from_sorted(e.elems()[start..].to_vec());
        let rank = target.node_order(&block)?;
        let base = if block.len() == 1 {
            FinSet::empty()
        } else {
            let p = e.parent().expect("nonempty");
            forward.get(&p).cloned().ok_or_else(|| Error::Internal(format!("{p} unmapped")))?
        };
        let img = least_successor(&target, &base, last.as_ref(), &rank)?;
        forward.insert(e.clone(), img.clone());
        pairs.push((e, img.clone()));
        block_start.push(start);
        last = Some(img);
    }
    Ok(SumEmbedding {
        n,
        k,
        source,
        target,
        pairs,
        block_start,
        forward,
    })
}

impl SumEmbedding {
    pub fn pairs(&self) -> &[(FinSet, FinSet)] {
        &self.pairs
    }

    pub fn source(&self) -> &SchreierIndex {
        &self.source
    }

    pub fn target(&self) -> &SchreierIndex {
        &self.target
    }

    pub fn get(&self, e: &FinSet) -> Option<&FinSet> {
        self.forward.get(e)
    }

    /// Whether the domain set starts a new block subtree.
    pub fn is_initial(&self, i: usize) -> bool {
        self.pairs[i].0.len() == self.block_start[i] + 1
    }

    /// Sends `Σ a_E χ_E` to `Σ a_E ζ_{ψE}`.
    pub fn apply(&self, f: &NodeFunction) -> Result<NodeFunction> {
        let mut out = NodeFunction::zero(self.target.clone());
        for (e, a) in &f.combo {
            let img = self
                .forward
                .get(e)
                .ok_or_else(|| Error::pre(format!("{e} is outside the embedded domain")))?;
            out.add_term(img.clone(), a);
        }
        Ok(out)
    }

    /// Checks the five defining conditions; returns the first failure.
    pub fn check_conditions(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Certification(m));
        let mut prev: Option<&FinSet> = None;
        for (i, (e, img)) in self.pairs.iter().enumerate() {
            if img.is_empty() {
                return fail(format!("ζ_∅ is the image of {e}"));
            }
            if self.is_initial(i) && img.len() != 1 {
                return fail(format!("initial node {e} maps to non-singleton {img}"));
            }
            if prev.is_some_and(|p| !key_lt(p, img)) {
                return fail(format!("image indices not increasing at {e}"));
            }
            prev = Some(img);
            let block = FinSet::from_sorted(e.elems()[self.block_start[i]..].to_vec());
            if self.target.node_order(&block)? > self.target.node_order(img)? {
                return fail(format!("order of {e} not dominated by {img}"));
            }
        }
        // within one block subtree, ≺ is preserved and reflected
        for (i, (e1, f1)) in self.pairs.iter().enumerate() {
            for (j, (e2, f2)) in self.pairs.iter().enumerate() {
                if i == j || self.block_start[i] != self.block_start[j] {
                    continue;
                }
                let s = self.block_start[i];
                if e1.elems()[..=s] != e2.elems()[..=s] {
                    continue;
                }
                if e1.precedes(e2) != f1.precedes(f2) {
                    return fail(format!("{e1} ≺ {e2} is not matched by {f1} ≺ {f2}"));
                }
            }
        }
        Ok(())
    }

    /// Exact norm ratios on seeded random finite combinations.
    pub fn distortion(&self, samples: usize, seed: u64) -> Result<Distortion> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut upper = Q::zero();
        let mut lower = Q::zero();
        let mut done = 0;
        while done < samples {
            let terms = rng.gen_range(1..=6usize);
            let mut pairs = Vec::new();
            for _ in 0..terms {
                let (e, _) = &self.pairs[rng.gen_range(0..self.pairs.len())];
                let a = Q::new(rng.gen_range(-6i64..=6).into(), rng.gen_range(1i64..=4).into());
                pairs.push((e.clone(), a));
            }
            let f = NodeFunction::from_pairs(self.source.clone(), pairs)?;
            let nf = cnorm(&f);
            if nf.is_zero() {
                continue;
            }
            let ns = cnorm(&self.apply(&f)?);
            if ns.is_zero() {
                return Err(Error::Certification("a nonzero combination maps to zero".into()));
            }
            upper = upper.max(&ns / &nf);
            lower = lower.max(&nf / &ns);
            done += 1;
        }
        let bound = Q::from_integer((2 * (self.k as i64 + 1)).into());
        let product = &upper * &lower;
        if product > bound {
            return Err(Error::Certification(format!(
                "distortion {} exceeds {}",
                fmt_q(&product),
                fmt_q(&bound)
            )));
        }
        Ok(Distortion {
            upper,
            lower,
            product,
            bound,
            samples,
        })
    }
}

/// Function on `[1, top]`, constant on the clopen intervals
/// `(r_{i−1}, r_i]` with `r_{−1} = 0` and the last `r_i = top`.
///
/// Products `[1, ω^a] × {1..p}` are encoded lexicographically as
/// `[1, ω^a·p]`, the point `(β, j)` sitting at `ω^a·(j−1) + β`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StepFunction {
    ends: Vec<Ordinal>,
    values: Vec<Q>,
}

impl StepFunction {
    pub fn constant(top: Ordinal, v: Q) -> Result<Self> {
        if top.is_zero() {
            return Err(Error::pre("a step function needs a nonempty domain"));
        }
        Ok(StepFunction {
            ends: vec![top],
            values: vec![v],
        })
    }

    /// Pieces `((l, r], value)` in increasing order; they must tile
    /// `[1, top]` exactly.
    pub fn new(top: Ordinal, pieces: Vec<((Ordinal, Ordinal), Q)>) -> Result<Self> {
        let mut at = Ordinal::zero();
        let mut ends = Vec::new();
        let mut values = Vec::new();
        for ((l, r), v) in pieces {
            if l != at || r <= l {
                return Err(Error::pre(format!("malformed interval ({l}, {r}] after {at}")));
            }
            at = r.clone();
            ends.push(r);
            values.push(v);
        }
        if at != top || ends.is_empty() {
            return Err(Error::pre(format!("intervals do not cover [1, {top}]")));
        }
        Ok(Self::canonical(ends, values))
    }

    fn canonical(ends: Vec<Ordinal>, values: Vec<Q>) -> Self {
        let mut e: Vec<Ordinal> = Vec::new();
        let mut v: Vec<Q> = Vec::new();
        for (r, x) in ends.into_iter().zip(values) {
            if v.last() == Some(&x) {
                *e.last_mut().unwrap() = r;
            } else {
                e.push(r);
                v.push(x);
            }
        }
        StepFunction { ends: e, values: v }
    }

    pub fn top(&self) -> &Ordinal {
        self.ends.last().expect("nonempty")
    }

    pub fn pieces(&self) -> Vec<((Ordinal, Ordinal), Q)> {
        let mut at = Ordinal::zero();
        let mut out = Vec::new();
        for (r, v) in self.ends.iter().zip(&self.values) {
            out.push(((at.clone(), r.clone()), v.clone()));
            at = r.clone();
        }
        out
    }

    /// Value at `β ∈ [1, top]`.
    pub fn eval(&self, beta: &Ordinal) -> Result<Q> {
        if beta.is_zero() || beta > self.top() {
            return Err(Error::pre(format!("{beta} is outside [1, {}]", self.top())));
        }
        let i = self.ends.partition_point(|r| r < beta);
        Ok(self.values[i].clone())
    }

    /// Vanishes at the top point (the `C_0` convention).
    pub fn is_c0(&self) -> bool {
        self.values.last().is_some_and(Q::is_zero)
    }

    pub fn sup_norm(&self) -> Q {
        self.values.iter().map(Q::abs).max().unwrap_or_else(Q::zero)
    }

    pub fn scale(&self, c: &Q) -> Self {
        Self::canonical(self.ends.clone(), self.values.iter().map(|v| v * c).collect())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.top() != other.top() {
            return Err(Error::pre(format!("domains [1, {}] and [1, {}] differ", self.top(), other.top())));
        }
        let ends: Vec<Ordinal> = self
            .ends
            .iter()
            .chain(&other.ends)
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let values = ends
            .iter()
            .map(|r| Ok(self.eval(r)? + other.eval(r)?))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::canonical(ends, values))
    }

    /// `f` placed on `(offset, offset + top f]` inside `[1, top]`, zero
    /// elsewhere.
    pub fn placed(&self, offset: &Ordinal, top: &Ordinal) -> Result<Self> {
        let end = offset.add(self.top());
        if end > *top {
            return Err(Error::pre(format!("{offset} + {} overflows {top}", self.top())));
        }
        let mut ends = Vec::new();
        let mut values = Vec::new();
        if !offset.is_zero() {
            ends.push(offset.clone());
            values.push(Q::zero());
        }
        for (r, v) in self.ends.iter().zip(&self.values) {
            ends.push(offset.add(r));
            values.push(v.clone());
        }
        if end < *top {
            ends.push(top.clone());
            values.push(Q::zero());
        }
        Ok(Self::canonical(ends, values))
    }

    /// Values on the atoms of a refinement given by right endpoints.
    fn sample(&self, ends: &[Ordinal]) -> Result<Vec<Q>> {
        ends.iter().map(|r| self.eval(r)).collect()
    }
}

/// `(κf)(β, j) = f(β)` on `[1, top f] × {1..p}`.
pub fn kappa(f: &StepFunction, p: u64) -> Result<StepFunction> {
    if p == 0 {
        return Err(Error::pre("κ needs at least one copy"));
    }
    let block = f.top().clone();
    let mut ends = Vec::new();
    let mut values = Vec::new();
    for j in 0..p {
        let off = block.mul(&Ordinal::finite(j));
        for (r, v) in f.ends.iter().zip(&f.values) {
            ends.push(off.add(r));
            values.push(v.clone());
        }
    }
    Ok(StepFunction::canonical(ends, values))
}

/// `(ιg)(β, j) = g(j)` on `[1, block] × {1..len g}`.
pub fn iota(g: &[Q], block: &Ordinal) -> Result<StepFunction> {
    if g.is_empty() || block.is_zero() {
        return Err(Error::pre("ι needs a nonempty block and function"));
    }
    let ends = (1..=g.len() as u64).map(|j| block.mul(&Ordinal::finite(j))).collect();
    Ok(StepFunction::canonical(ends, g.to_vec()))
}

/// `r_m(j) = (−1)^⌊(j−1)/2^(n−m)⌋` on `{1..2^n}`, `1 ≤ m ≤ n`.
pub fn rademacher(m: u32, n: u32) -> Result<Vec<Q>> {
    if m == 0 || m > n || n > 20 {
        return Err(Error::pre(format!("need 1 ≤ m ≤ n ≤ 20, got m={m}, n={n}")));
    }
    let step = 1u64 << (n - m);
    Ok((0..1u64 << n)
        .map(|j| if (j / step).is_multiple_of(2) { Q::one() } else { -Q::one() })
        .collect())
}

/// `κf + ι Σ a_m r_m` on `[1, top f] × {1..2^n}`, together with the check
/// that its norm is `‖f‖ + Σ|a_m|`.
pub fn kappa_iota_sum(f: &StepFunction, a: &[Q]) -> Result<(StepFunction, Q)> {
    let n = a.len() as u32;
    let mut g = vec![Q::zero(); 1 << n];
    for (m, am) in a.iter().enumerate() {
        for (gj, r) in g.iter_mut().zip(rademacher(m as u32 + 1, n)?) {
            *gj += am * r;
        }
    }
    let h = kappa(f, 1 << n)?.add(&iota(&g, f.top())?)?;
    let norm = h.sup_norm();
    let expect = f.sup_norm() + a.iter().map(Q::abs).sum::<Q>();
    if norm != expect {
        return Err(Error::Internal(format!(
            "‖κf + ιΣa_m r_m‖ = {} but ‖f‖ + Σ|a_m| = {}",
            fmt_q(&norm),
            fmt_q(&expect)
        )));
    }
    Ok((h, norm))
}

/// A finite tree of step functions on `C_0(ω^exponent)`; nodes are listed
/// with every proper prefix present.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct C0Tree {
    pub exponent: Ordinal,
    pub nodes: Vec<Vec<StepFunction>>,
}

impl C0Tree {
    pub fn empty(exponent: Ordinal) -> Self {
        C0Tree {
            exponent,
            nodes: Vec::new(),
        }
    }

    pub fn top(&self) -> Ordinal {
        Ordinal::omega_pow(&self.exponent)
    }

    /// Shape of the tree with one token per distinct function.
    pub fn to_index_tree(&self) -> IndexTree {
        let mut ids: BTreeMap<&StepFunction, usize> = BTreeMap::new();
        let nodes = self.nodes.iter().map(|node| {
            node.iter()
                .map(|f| {
                    let next = ids.len();
                    Payload::Token(format!("f{}", *ids.entry(f).or_insert(next)))
                })
                .collect::<Vec<_>>()
        });
        IndexTree::from_nodes(nodes.collect::<Vec<_>>())
    }

    pub fn order(&self) -> u64 {
        self.to_index_tree().order_finite()
    }

    /// Exact ℓ1 lower constant `min ‖Σ a_i x_i‖_∞` over `Σ|a_i| = 1` of
    /// every node, in node order.
    pub fn certify(&self) -> Result<Vec<Q>> {
        self.nodes.iter().map(|node| node_l1_constant(node)).collect()
    }
}

/// ℓ1 lower constant of a sequence of step functions, via the sup norm on
/// the atoms of their common refinement.
pub fn node_l1_constant(node: &[StepFunction]) -> Result<Q> {
    let ends: Vec<Ordinal> = node
        .iter()
        .flat_map(|f| f.ends.iter().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let seq = node
        .iter()
        .map(|f| {
            let vals = f.sample(&ends)?;
            SchreierVector::from_pairs(vals.into_iter().enumerate().map(|(i, v)| (i as u32 + 1, v)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(l1_lower(&seq, &AmbientSpace::finite_sup(ends.len() as u32))?.0)
}

/// Extends an ℓ1-1 tree on `C_0(ω^α)` to one on `C_0(ω^(α+γ))` for finite
/// `γ ≤ 2`, truncated to `breadth` blocks and nodes of length ≤ `depth`.
///
/// One step writes `C_0(ω^(a+1))` as the `c_0`-sum of the spaces
/// `C_0(ω^a × (2^j, 2^(j+1)])`; block `j` contributes the Rademacher chain
/// `(r^j_1), …, (r^j_1,…,r^j_j)` followed by `κ_j`-images of the base tree.
pub fn l1_tree_c0(gamma: &Ordinal, base: &C0Tree, depth: usize, breadth: u32) -> Result<C0Tree> {
    let g = match gamma.as_finite() {
        Some(g) if g <= 2 => g,
        _ => return Err(Error::pre(format!("γ must be a finite ordinal ≤ 2, got {gamma}"))),
    };
    if breadth > 6 {
        return Err(Error::BoundExceeded {
            what: "breadth",
            value: breadth as usize,
            limit: 6,
        });
    }
    let mut cur = base.clone();
    for _ in 0..g {
        cur = c0_step(&cur, depth, breadth)?;
    }
    Ok(cur)
}

fn c0_step(base: &C0Tree, depth: usize, breadth: u32) -> Result<C0Tree> {
    let block = base.top();
    let exponent = base.exponent.succ();
    let top = Ordinal::omega_pow(&exponent);
    let mut nodes = Vec::new();
    for j in 1..=breadth {
        let lo = 1u64 << j;
        let offset = block.mul(&Ordinal::finite(lo));
        let rs = (1..=j)
            .map(|i| iota(&rademacher(i, j)?, &block)?.placed(&offset, &top))
            .collect::<Result<Vec<_>>>()?;
        for i in 1..=(j as usize).min(depth) {
            nodes.push(rs[..i].to_vec());
        }
        for node in &base.nodes {
            if j as usize + node.len() > depth {
                continue;
            }
            let mut v = rs.clone();
            for f in node {
                v.push(kappa(f, lo)?.placed(&offset, &top)?);
            }
            nodes.push(v);
        }
        if nodes.len() > bounds().tree_nodes {
            return Err(Error::BoundExceeded {
                what: "tree nodes",
                value: nodes.len(),
                limit: bounds().tree_nodes,
            });
        }
    }
    Ok(C0Tree { exponent, nodes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{q, qi};
    use crate::xnorm::schreier_norm;

    fn s(x: &str) -> FinSet {
        x.parse().unwrap()
    }

    fn nf(alpha: u64, pairs: &[(&str, Q)]) -> NodeFunction {
        NodeFunction::from_pairs(SchreierIndex::finite(alpha), pairs.iter().map(|(f, a)| (s(f), a.clone()))).unwrap()
    }

    /// sup over every `G ∈ S_α ∩ 2^[1..M]` of the pointwise value, with the
    /// prefix test written out directly.
    fn brute_cnorm(f: &NodeFunction, m: u32) -> Q {
        f.alpha()
            .enumerate(m)
            .unwrap()
            .iter()
            .map(|g| {
                f.combo()
                    .iter()
                    .filter(|(k, _)| g.elems().starts_with(k.elems()))
                    .map(|(_, a)| a.clone())
                    .sum::<Q>()
                    .abs()
            })
            .max()
            .unwrap()
    }

    fn random_combo(rng: &mut ChaCha8Rng, keys: &[FinSet], alpha: u64) -> NodeFunction {
        let t = rng.gen_range(1..=6);
        let pairs: Vec<(FinSet, Q)> = (0..t)
            .map(|_| {
                let k = keys[rng.gen_range(0..keys.len())].clone();
                (k, q(rng.gen_range(-9..=9), rng.gen_range(1..=5)))
            })
            .collect();
        NodeFunction::from_pairs(SchreierIndex::finite(alpha), pairs).unwrap()
    }

    #[test]
    fn cnorm_examples() {
        assert_eq!(cnorm(&nf(1, &[("{}", q(-7, 3))])), q(7, 3));
        assert_eq!(cnorm(&nf(1, &[("{}", qi(1)), ("{1}", qi(1))])), qi(2));
        assert_eq!(cnorm(&nf(1, &[("{2}", qi(1)), ("{2,3}", qi(-1))])), qi(1));
        let f = nf(1, &[("{}", qi(1)), ("{1}", qi(1))]);
        assert_eq!(brute_cnorm(&f, 3), qi(2));
        let g = nf(1, &[("{2}", qi(1)), ("{2,3}", qi(-1))]);
        assert_eq!(brute_cnorm(&g, 3), qi(1));
    }

    #[test]
    fn cnorm_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for alpha in [0, 1, 2] {
            let keys = SchreierIndex::finite(alpha).enumerate(6).unwrap();
            for _ in 0..200 {
                let f = random_combo(&mut rng, &keys, alpha);
                let m = f.combo().keys().filter_map(FinSet::max_elem).max().unwrap_or(0) + 1;
                assert_eq!(cnorm(&f), brute_cnorm(&f, m), "{}", f.to_json());
            }
        }
    }

    #[test]
    fn members_are_checked_and_json_round_trips() {
        assert!(NodeFunction::chi(SchreierIndex::finite(1), s("{1,2}")).is_err());
        let f = nf(2, &[("{2,3}", q(1, 2)), ("{}", qi(-3))]);
        assert_eq!(NodeFunction::from_json(&f.to_json()).unwrap(), f);
        assert_eq!(f.add(&f.scale(&qi(-1))), NodeFunction::zero(SchreierIndex::finite(2)));
    }

    #[test]
    fn enumeration_examples() {
        let e = admissible_enumeration(&SchreierIndex::finite(1), 3).unwrap();
        let want: Vec<FinSet> = ["{}", "{1}", "{2}", "{3}", "{2,3}"].iter().map(|x| s(x)).collect();
        assert_eq!(e.order, want);
        let e0 = admissible_enumeration(&SchreierIndex::finite(0), 2).unwrap();
        assert_eq!(e0.order, vec![s("{}"), s("{1}"), s("{2}")]);
        let e2 = admissible_enumeration(&SchreierIndex::finite(2), 5).unwrap();
        // pairwise check written independently of `violation`
        for (i, a) in e2.order.iter().enumerate() {
            for b in &e2.order[..i] {
                assert!(!(a.len() < b.len() && b.elems().starts_with(a.elems())));
            }
        }
        assert_eq!(e2.violation(), None);
        assert!(admissible_enumeration(&SchreierIndex::finite(1), 1000).is_err());
    }

    #[test]
    fn monotone_examples() {
        let e = admissible_enumeration(&SchreierIndex::finite(1), 3).unwrap();
        let f = nf(1, &[("{}", qi(1)), ("{1}", qi(1))]);
        assert_eq!(monotone_check(&f, &e).unwrap(), vec![qi(1), qi(2)]);
        assert_eq!(monotone_check(&nf(1, &[("{3}", qi(5))]), &e).unwrap(), vec![qi(5)]);
        let g = nf(1, &[("{2}", qi(1)), ("{2,3}", qi(-1))]);
        assert_eq!(monotone_check(&g, &e).unwrap(), vec![qi(1), qi(1)]);
        assert!(monotone_check(&nf(1, &[("{4}", qi(1))]), &e).is_err());
    }

    #[test]
    fn monotone_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let alpha = SchreierIndex::finite(2);
        let e = admissible_enumeration(&alpha, 6).unwrap();
        for _ in 0..100 {
            let f = random_combo(&mut rng, &e.order, 2);
            let p = monotone_check(&f, &e).unwrap();
            assert!(p.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn psi_examples() {
        let alpha = SchreierIndex::finite(1);
        let psi = build_psi(&alpha, 6).unwrap();
        assert_eq!(psi.get(&FinSet::empty()), Some(&FinSet::empty()));
        assert_eq!(psi.get(&s("{1}")), Some(&s("{1}")));
        for (g, f) in psi.pairs() {
            assert!(alpha.node_order(g).unwrap() <= alpha.node_order(f).unwrap());
        }
        assert!(psi.rank_condition().unwrap());
        let psi5 = build_psi(&alpha, 5).unwrap();
        assert_eq!(psi5.phi(psi5.get(&s("{2,3}")).unwrap()), s("{2,3}"));
        assert_eq!(psi5.phi(&FinSet::empty()), FinSet::empty());
        // range of φ over all of S_α below the images is S_α ∩ 2^[1..5]
        let range: BTreeSet<FinSet> = alpha
            .enumerate(psi5.image_max())
            .unwrap()
            .iter()
            .map(|f| psi5.phi(f))
            .collect();
        let want: BTreeSet<FinSet> = alpha.enumerate(5).unwrap().into_iter().collect();
        assert_eq!(range, want);
    }

    #[test]
    fn psi_preserves_tree_structure() {
        for a in [1, 2] {
            let alpha = SchreierIndex::finite(a);
            let psi = build_psi(&alpha, 7).unwrap();
            for (g1, f1) in psi.pairs() {
                assert_eq!(&psi.phi(f1), g1);
                for (g2, f2) in psi.pairs() {
                    assert_eq!(g1.precedes(g2), f1.precedes(f2));
                }
            }
        }
    }

    #[test]
    fn embed_u_examples() {
        let alpha = SchreierIndex::finite(1);
        let psi = build_psi(&alpha, 8).unwrap();
        assert_eq!(cnorm(&psi.embed_u(&SchreierVector::unit(3)).unwrap()), qi(1));
        assert!(psi.embed_u(&SchreierVector::zero()).unwrap().is_zero());
        let x = SchreierVector::from_pairs((1..=5).map(|i| (i, qi(1)))).unwrap();
        assert_eq!(cnorm(&psi.embed_u(&x).unwrap()), qi(3));
        assert_eq!(schreier_norm(&x, &alpha).unwrap().value, qi(3));
        assert!(psi.embed_u(&SchreierVector::unit(9)).is_err());
    }

    #[test]
    fn embed_u_is_isometric_and_blocked() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for a in [1, 2] {
            let alpha = SchreierIndex::finite(a);
            let psi = build_psi(&alpha, 8).unwrap();
            let e = admissible_enumeration(&alpha, psi.image_max()).unwrap();
            let mut last_pos = 0;
            for i in 1..=8 {
                let u = psi.embed_u(&SchreierVector::unit(i)).unwrap();
                let pos: Vec<usize> = u.combo().keys().map(|k| e.position(k).unwrap()).collect();
                assert!(pos.iter().all(|&p| p > last_pos));
                last_pos = *pos.iter().max().unwrap();
            }
            for _ in 0..100 {
                let x = SchreierVector::from_pairs(
                    (1..=8).map(|i| (i, q(rng.gen_range(-5..=5), rng.gen_range(1..=3)))),
                )
                .unwrap();
                let u = psi.embed_u(&x).unwrap();
                assert_eq!(cnorm(&u), schreier_norm(&x, &alpha).unwrap().value);
            }
        }
    }

    #[test]
    fn qk_examples() {
        let f = nf(2, &[("{2,3}", qi(1))]);
        assert_eq!(project_qk(&f, 1).unwrap(), f);
        let g = nf(2, &[("{5,6}", qi(1))]);
        assert!(project_qk(&g, 2).unwrap().is_zero());
        let h = nf(2, &[("{}", qi(2))]);
        assert_eq!(project_qk(&h, 2).unwrap(), nf(2, &[("{2}", qi(2)), ("{3}", qi(2))]));
    }

    #[test]
    fn qk_is_a_norm_one_projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let keys = SchreierIndex::finite(2).enumerate(6).unwrap();
        for _ in 0..200 {
            let f = random_combo(&mut rng, &keys, 2);
            let k = rng.gen_range(1..=4);
            let p = project_qk(&f, k).unwrap();
            assert!(cnorm(&p) <= cnorm(&f));
            assert_eq!(project_qk(&p, k).unwrap(), p);
            // pointwise: Q_k f (G) = f(G) when min G ∈ [2, k+1], else 0
            for g in SchreierIndex::finite(2).enumerate(7).unwrap() {
                let inside = g.min_elem().is_some_and(|m| (2..=k + 1).contains(&m));
                let want = if inside { f.eval(&g) } else { Q::zero() };
                assert_eq!(p.eval(&g), want);
            }
        }
    }

    #[test]
    fn embed_sum_n0_is_the_singleton_tail() {
        let e = embed_sum(0, 1, 7).unwrap();
        e.check_conditions().unwrap();
        for (i, (_, img)) in e.pairs().iter().enumerate() {
            assert_eq!(img, &FinSet::singleton(i as u32 + 1));
        }
        let d = e.distortion(200, 1).unwrap();
        assert!(d.product <= qi(4));
    }

    #[test]
    fn embed_sum_conditions_and_distortion() {
        let e = embed_sum(1, 2, 7).unwrap();
        e.check_conditions().unwrap();
        let d = e.distortion(50, 7).unwrap();
        assert!(d.upper <= qi(6) && d.lower <= qi(6));
        assert!(d.product <= qi(6));
        let e2 = embed_sum(2, 3, 7).unwrap();
        e2.check_conditions().unwrap();
        assert!(e2.distortion(30, 3).unwrap().product <= qi(8));
        assert!(embed_sum(3, 1, 5).is_err());
    }

    fn w() -> Ordinal {
        Ordinal::omega()
    }

    #[test]
    fn step_function_basics() {
        let top = w().mul(&Ordinal::finite(2));
        let f = StepFunction::new(
            top.clone(),
            vec![
                ((Ordinal::zero(), Ordinal::finite(3)), qi(2)),
                ((Ordinal::finite(3), w()), qi(-1)),
                ((w(), top.clone()), qi(0)),
            ],
        )
        .unwrap();
        assert_eq!(f.sup_norm(), qi(2));
        assert!(f.is_c0());
        assert_eq!(f.eval(&w()).unwrap(), qi(-1));
        assert_eq!(f.eval(&w().add(&Ordinal::one())).unwrap(), qi(0));
        assert!(StepFunction::new(w(), vec![((Ordinal::one(), w()), qi(1))]).is_err());
        assert!(StepFunction::new(w(), vec![((Ordinal::zero(), Ordinal::finite(4)), qi(1))]).is_err());
    }

    #[test]
    fn rademacher_values() {
        let r1 = rademacher(1, 2).unwrap();
        let r2 = rademacher(2, 2).unwrap();
        assert_eq!(r1, vec![qi(1), qi(1), qi(-1), qi(-1)]);
        assert_eq!(r2, vec![qi(1), qi(-1), qi(1), qi(-1)]);
        assert_eq!(iota(&r1, &w()).unwrap().sup_norm(), qi(1));
    }

    #[test]
    fn kappa_iota_identity() {
        let f = StepFunction::new(
            w(),
            vec![
                ((Ordinal::zero(), Ordinal::finite(5)), qi(-2)),
                ((Ordinal::finite(5), w()), qi(1)),
            ],
        )
        .unwrap();
        let (_, n) = kappa_iota_sum(&f, &[qi(1), qi(-1)]).unwrap();
        assert_eq!(n, qi(4));
        let (h, n0) = kappa_iota_sum(&f, &[qi(0), qi(0)]).unwrap();
        assert_eq!(n0, qi(2));
        assert_eq!(h, kappa(&f, 4).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let cuts = rng.gen_range(1..=4u64);
            let mut pieces = Vec::new();
            for c in 0..cuts {
                pieces.push(((Ordinal::finite(c), Ordinal::finite(c + 1)), q(rng.gen_range(-9..=9), 2)));
            }
            pieces.push(((Ordinal::finite(cuts), w()), q(rng.gen_range(-9..=9), 3)));
            let f = StepFunction::new(w(), pieces).unwrap();
            let a: Vec<Q> = (0..rng.gen_range(1..=4)).map(|_| q(rng.gen_range(-5..=5), 4)).collect();
            kappa_iota_sum(&f, &a).unwrap();
        }
    }

    #[test]
    fn c0_tree_from_empty_base() {
        let base = C0Tree::empty(Ordinal::zero());
        let t = l1_tree_c0(&Ordinal::one(), &base, 10, 4).unwrap();
        assert_eq!(t.order(), 4);
        assert!(t.certify().unwrap().iter().all(Q::is_one));
        let full: Vec<&Vec<StepFunction>> = t.nodes.iter().filter(|n| n.len() == 3).collect();
        assert_eq!(node_l1_constant(full[0]).unwrap(), qi(1));
        assert_eq!(l1_tree_c0(&Ordinal::zero(), &base, 5, 3).unwrap(), base);
        assert_eq!(l1_tree_c0(&Ordinal::one(), &base, 2, 4).unwrap().order(), 2);
    }

    #[test]
    fn c0_tree_two_steps() {
        let base = C0Tree::empty(Ordinal::zero());
        let t1 = l1_tree_c0(&Ordinal::one(), &base, 10, 2).unwrap();
        let t2 = l1_tree_c0(&Ordinal::one(), &t1, 10, 2).unwrap();
        assert_eq!(t2.exponent, Ordinal::finite(2));
        assert_eq!(t2.order(), 2 + t1.order());
        assert!(t2.certify().unwrap().iter().all(Q::is_one));
        assert_eq!(l1_tree_c0(&Ordinal::finite(2), &base, 10, 2).unwrap(), t2);
        assert!(t2.nodes.iter().flatten().all(StepFunction::is_c0));
    }
}
