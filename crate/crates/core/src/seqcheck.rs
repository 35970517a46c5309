//! Classification of finite sequences in polyhedral-norm spaces: basis
//! constants, ℓ1 / ℓ1⁺ / ℓ∞⁺ constants, wide-(s) and wide-(c) constants,
//! branch functionals, the conversions between these notions, and the
//! concatenation criterion.
//!
//! Every norm here is `max_r |g_r(x)|` over a finite list of extreme dual
//! functionals `g_r`, so all constants are optima of rational LPs.

use crate::bounds::bounds;
use crate::error::{Error, Result};
use crate::lp::{Cmp, Lp, LpResult};
use crate::ord::Ordinal;
use crate::rat::{fmt_q, parse_q, Q};
use crate::schreier::{FinSet, SchreierIndex};
use crate::xnorm::{project, schreier_norm_unchecked, sup_norm, SchreierVector};
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::str::FromStr;

/// An extreme functional of the dual unit ball.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Functional {
    /// `x ↦ Σ_{i∈E} x_i` on a Schreier space
    Set(FinSet),
    /// coordinate functional on a finite sup-normed space
    Coord(u32),
    /// point evaluation at a node `G` on a node-basis span
    Point(FinSet),
}

impl Functional {
    fn to_json(&self) -> Value {
        match self {
            Functional::Set(e) => json!({ "set": e.to_string() }),
            Functional::Coord(i) => json!({ "index": i }),
            Functional::Point(g) => json!({ "point": g.to_string() }),
        }
    }

    fn from_json(v: &Value) -> Result<Self> {
        if let Some(s) = v.get("set").and_then(Value::as_str) {
            return Ok(Functional::Set(s.parse()?));
        }
        if let Some(s) = v.get("point").and_then(Value::as_str) {
            return Ok(Functional::Point(s.parse()?));
        }
        if let Some(i) = v.get("index").and_then(Value::as_u64) {
            return Ok(Functional::Coord(i as u32));
        }
        Err(Error::Parse(format!("bad functional: {v}")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignedTerm {
    pub sign: i8,
    pub functional: Functional,
    pub weight: Q,
}

/// A finite signed combination of extreme functionals; its dual norm is at
/// most the sum of the weights.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualCertificate {
    pub combo: Vec<SignedTerm>,
    pub norm_bound: Q,
}

impl DualCertificate {
    pub fn single(f: Functional) -> Self {
        DualCertificate {
            combo: vec![SignedTerm {
                sign: 1,
                functional: f,
                weight: Q::one(),
            }],
            norm_bound: Q::one(),
        }
    }

    pub fn total_weight(&self) -> Q {
        self.combo.iter().map(|t| t.weight.clone()).sum()
    }

    pub fn eval(&self, space: &AmbientSpace, x: &SchreierVector) -> Q {
        self.combo
            .iter()
            .map(|t| {
                let v = space.eval(&t.functional, x) * &t.weight;
                if t.sign < 0 {
                    -v
                } else {
                    v
                }
            })
            .sum()
    }

    pub fn to_json(&self) -> Value {
        let combo: Vec<Value> = self
            .combo
            .iter()
            .map(|t| {
                let mut f = t.functional.to_json();
                f["sign"] = json!(t.sign);
                f["weight"] = json!(fmt_q(&t.weight));
                f
            })
            .collect();
        json!({ "combo": combo, "norm_bound": fmt_q(&self.norm_bound) })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = || Error::Parse("functional JSON must be {combo:[{sign,weight,set|index|point}], norm_bound}".into());
        let arr = v.get("combo").and_then(Value::as_array).ok_or_else(bad)?;
        let mut combo = Vec::new();
        for t in arr {
            let sign = t.get("sign").and_then(Value::as_i64).unwrap_or(1);
            let weight = match t.get("weight").and_then(Value::as_str) {
                Some(s) => parse_q(s)?,
                None => Q::one(),
            };
            if weight.is_negative() || (sign != 1 && sign != -1) {
                return Err(bad());
            }
            combo.push(SignedTerm {
                sign: sign as i8,
                functional: Functional::from_json(t)?,
                weight,
            });
        }
        let c = DualCertificate {
            norm_bound: Q::zero(),
            combo,
        };
        let norm_bound = match v.get("norm_bound").and_then(Value::as_str) {
            Some(s) => parse_q(s)?,
            None => c.total_weight(),
        };
        if c.total_weight() > norm_bound {
            return Err(Error::Parse("weights exceed norm_bound".into()));
        }
        Ok(DualCertificate { norm_bound, ..c })
    }
}

/// A space with polyhedral norm in which finite sequences live.
#[derive(Clone, Debug)]
pub enum AmbientSpace {
    /// `X_α`, the completion of `c_00` under the Schreier norm
    Schreier(SchreierIndex),
    /// `ℓ∞^d`
    FiniteSup(u32),
    /// span of the node basis `χ_{F_0}, …, χ_{F_{k−1}}` in `C(S_α)`, where
    /// `F_0, F_1, …` enumerate `S_α ∩ 2^{[1,N]}` admissibly; coordinate
    /// `i` of a vector is the coefficient of `χ_{F_{i−1}}`
    NodeBasisSpan {
        alpha: SchreierIndex,
        n: u32,
        nodes: Vec<FinSet>,
    },
}

impl AmbientSpace {
    pub fn schreier(alpha: Ordinal) -> Self {
        AmbientSpace::Schreier(SchreierIndex::new(alpha))
    }

    pub fn finite_sup(d: u32) -> Self {
        AmbientSpace::FiniteSup(d)
    }

    pub fn node_basis_span(alpha: Ordinal, n: u32) -> Result<Self> {
        let alpha = SchreierIndex::new(alpha);
        let nodes = alpha.enumerate(n)?;
        Ok(AmbientSpace::NodeBasisSpan { alpha, n, nodes })
    }

    pub fn to_json(&self) -> Value {
        match self {
            AmbientSpace::Schreier(a) => json!({ "kind": "schreier", "alpha": a.alpha().to_string() }),
            AmbientSpace::FiniteSup(d) => json!({ "kind": "finite_sup", "dim": d }),
            AmbientSpace::NodeBasisSpan { alpha, n, .. } => {
                json!({ "kind": "node_basis_span", "alpha": alpha.alpha().to_string(), "n": n })
            }
        }
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let alpha = || -> Result<Ordinal> {
            v.get("alpha")
                .and_then(Value::as_str)
                .ok_or_else(|| Error::Parse("space needs alpha".into()))?
                .parse()
        };
        let num = |k: &str| -> Result<u32> {
            v.get(k)
                .and_then(Value::as_u64)
                .map(|d| d as u32)
                .ok_or_else(|| Error::Parse(format!("space needs {k}")))
        };
        match v.get("kind").and_then(Value::as_str) {
            Some("schreier") => Ok(Self::schreier(alpha()?)),
            Some("finite_sup") => Ok(Self::finite_sup(num("dim")?)),
            Some("node_basis_span") => Self::node_basis_span(alpha()?, num("n")?),
            _ => Err(Error::Parse("space kind must be schreier|finite_sup|node_basis_span".into())),
        }
    }

    fn check_vector(&self, x: &SchreierVector) -> Result<()> {
        let m = x.max_support().unwrap_or(0);
        let (limit, what) = match self {
            AmbientSpace::Schreier(_) => (bounds().support, "support"),
            AmbientSpace::FiniteSup(d) => (*d, "dimension"),
            AmbientSpace::NodeBasisSpan { nodes, .. } => (nodes.len() as u32, "node basis length"),
        };
        if m > limit {
            return Err(match self {
                AmbientSpace::Schreier(_) => Error::BoundExceeded {
                    what: "support",
                    value: m as usize,
                    limit: limit as usize,
                },
                _ => Error::pre(format!("coordinate {m} exceeds the {what} {limit}")),
            });
        }
        Ok(())
    }

    pub fn norm(&self, x: &SchreierVector) -> Result<Q> {
        self.check_vector(x)?;
        Ok(match self {
            AmbientSpace::Schreier(a) => schreier_norm_unchecked(x, a).value,
            AmbientSpace::FiniteSup(_) => sup_norm(x),
            AmbientSpace::NodeBasisSpan { nodes, .. } => nodes
                .iter()
                .map(|g| self.eval(&Functional::Point(g.clone()), x).abs())
                .max()
                .unwrap_or_else(Q::zero),
        })
    }

    pub fn eval(&self, f: &Functional, x: &SchreierVector) -> Q {
        match (self, f) {
            (AmbientSpace::NodeBasisSpan { nodes, .. }, Functional::Point(g)) => x
                .iter()
                .filter(|(i, _)| nodes.get(*i as usize - 1).is_some_and(|fnode| fnode.is_initial_segment_of(g)))
                .map(|(_, a)| a.clone())
                .sum(),
            (_, Functional::Set(e)) => x.sum_over(e.elems()),
            (_, Functional::Coord(i)) => x.get(*i),
            (_, Functional::Point(_)) => Q::zero(),
        }
    }

    /// Distinct nonzero rows `(g(x_1), …, g(x_m))` up to sign, over the
    /// extreme functionals that can see the union of the supports.
    fn rows(&self, seq: &[SchreierVector]) -> Result<Rows> {
        for x in seq {
            self.check_vector(x)?;
        }
        let mut acc = RowAcc::default();
        match self {
            AmbientSpace::Schreier(alpha) => {
                let mut u: Vec<u32> = seq.iter().flat_map(|x| x.support()).collect();
                u.sort_unstable();
                u.dedup();
                let mut cur = Vec::new();
                let mut row = vec![Q::zero(); seq.len()];
                let mut visited = 0usize;
                schreier_rows(alpha, seq, &u, 0, &mut cur, &mut row, &mut acc, &mut visited)?;
            }
            AmbientSpace::FiniteSup(_) => {
                let mut u: Vec<u32> = seq.iter().flat_map(|x| x.support()).collect();
                u.sort_unstable();
                u.dedup();
                for i in u {
                    let f = Functional::Coord(i);
                    acc.push(seq.iter().map(|x| self.eval(&f, x)).collect(), f);
                }
            }
            AmbientSpace::NodeBasisSpan { nodes, .. } => {
                for g in nodes {
                    let f = Functional::Point(g.clone());
                    acc.push(seq.iter().map(|x| self.eval(&f, x)).collect(), f);
                }
            }
        }
        Ok(acc.finish())
    }
}

#[allow(clippy::too_many_arguments)]
fn schreier_rows(
    alpha: &SchreierIndex,
    seq: &[SchreierVector],
    u: &[u32],
    from: usize,
    cur: &mut Vec<u32>,
    row: &mut Vec<Q>,
    acc: &mut RowAcc,
    visited: &mut usize,
) -> Result<()> {
    for j in from..u.len() {
        cur.push(u[j]);
        if alpha.member_at(cur, alpha.alpha()) {
            *visited += 1;
            let limit = bounds().tree_nodes;
            if *visited > limit {
                return Err(Error::BoundExceeded {
                    what: "admissible functionals",
                    value: *visited,
                    limit,
                });
            }
            for (r, x) in row.iter_mut().zip(seq) {
                *r += x.get(u[j]);
            }
            acc.push(row.clone(), Functional::Set(FinSet::from_sorted(cur.clone())));
            schreier_rows(alpha, seq, u, j + 1, cur, row, acc, visited)?;
            for (r, x) in row.iter_mut().zip(seq) {
                *r -= x.get(u[j]);
            }
        }
        cur.pop();
    }
    Ok(())
}

#[derive(Default)]
struct RowAcc {
    seen: BTreeMap<Vec<Q>, (i8, Functional)>,
}

impl RowAcc {
    fn push(&mut self, mut row: Vec<Q>, f: Functional) {
        let Some(first) = row.iter().find(|a| !a.is_zero()) else {
            return;
        };
        let sign = if first.is_negative() {
            for a in row.iter_mut() {
                *a = -a.clone();
            }
            -1
        } else {
            1
        };
        self.seen.entry(row).or_insert((sign, f));
    }

    fn finish(self) -> Rows {
        let (m, labels) = self.seen.into_iter().unzip();
        Rows { m, labels }
    }
}

/// Row `r` equals `labels[r].0 · labels[r].1` evaluated on the sequence.
struct Rows {
    m: Vec<Vec<Q>>,
    labels: Vec<(i8, Functional)>,
}

impl Rows {
    fn width(&self) -> usize {
        self.m.first().map_or(0, Vec::len)
    }

    fn apply(&self, r: usize, a: &[Q]) -> Q {
        self.m[r].iter().zip(a).map(|(x, y)| x * y).sum()
    }

    fn certificate(&self, signed_weights: &[Q], scale: &Q, norm_bound: Q) -> DualCertificate {
        let combo = signed_weights
            .iter()
            .enumerate()
            .filter(|(_, w)| !w.is_zero())
            .map(|(r, w)| {
                let (s, f) = &self.labels[r];
                let sign = if w.is_negative() { -s } else { *s };
                SignedTerm {
                    sign,
                    functional: f.clone(),
                    weight: w.abs() * scale,
                }
            })
            .collect();
        DualCertificate { combo, norm_bound }
    }
}

fn lp_err(what: &str, r: LpResult) -> Error {
    Error::Internal(format!("{what}: unexpected LP outcome {r:?}"))
}

/// `max_{λ} min_i (λᵀM)_i` over `Σ|λ_r| ≤ 1`: the value of `c⁺` from the
/// dual side. Returns the value and signed row weights.
fn cplus_dual(rows: &Rows) -> Result<(Q, Vec<Q>)> {
    let (r, m) = (rows.m.len(), rows.width());
    let mut lp = Lp::new(2 * r + 1);
    lp.set_free(2 * r);
    let mut obj = vec![Q::zero(); 2 * r + 1];
    obj[2 * r] = Q::one();
    lp.maximize(obj);
    for i in 0..m {
        let mut c = vec![Q::zero(); 2 * r + 1];
        for k in 0..r {
            c[k] = rows.m[k][i].clone();
            c[r + k] = -rows.m[k][i].clone();
        }
        c[2 * r] = -Q::one();
        lp.constraint(c, Cmp::Ge, Q::zero());
    }
    let mut c = vec![Q::one(); 2 * r + 1];
    c[2 * r] = Q::zero();
    lp.constraint(c, Cmp::Le, Q::one());
    match lp.solve() {
        LpResult::Optimal { x, value } => {
            let w = (0..r).map(|k| &x[k] - &x[r + k]).collect();
            Ok((value, w))
        }
        other => Err(lp_err("c+ dual", other)),
    }
}

enum Domain<'a> {
    Simplex,
    Box(&'a Q),
}

/// `min_a max_r |M_r a|` over the simplex or the box `[lo,1]^m`, by adding
/// violated rows to an active set until the relaxed optimum is feasible.
fn minmax_primal(rows: &Rows, dom: Domain, init: &[usize]) -> Result<(Q, Vec<Q>)> {
    let m = rows.width();
    let mut active: Vec<usize> = init.to_vec();
    if active.is_empty() && !rows.m.is_empty() {
        active.push(0);
    }
    loop {
        let mut lp = Lp::new(m + 1);
        let mut obj = vec![Q::zero(); m + 1];
        obj[m] = Q::one();
        lp.minimize(obj);
        for &r in &active {
            for s in [Q::one(), -Q::one()] {
                let mut c: Vec<Q> = rows.m[r].iter().map(|x| x * &s).collect();
                c.push(-Q::one());
                lp.constraint(c, Cmp::Le, Q::zero());
            }
        }
        match dom {
            Domain::Simplex => {
                let mut c = vec![Q::one(); m + 1];
                c[m] = Q::zero();
                lp.constraint(c, Cmp::Eq, Q::one());
            }
            Domain::Box(lo) => {
                for i in 0..m {
                    let mut c = vec![Q::zero(); m + 1];
                    c[i] = Q::one();
                    lp.constraint(c.clone(), Cmp::Ge, lo.clone());
                    lp.constraint(c, Cmp::Le, Q::one());
                }
            }
        }
        let (x, t) = lp.solve().optimal().ok_or_else(|| Error::Internal("min-max LP failed".into()))?;
        let a = x[..m].to_vec();
        let worst = (0..rows.m.len()).max_by_key(|&r| rows.apply(r, &a).abs());
        match worst {
            Some(r) if rows.apply(r, &a).abs() > t => active.push(r),
            _ => return Ok((t, a)),
        }
    }
}

/// `max ⟨h,a⟩` over `max_r |M_r a| ≤ 1`, computed as the least `Σ|μ_r|`
/// with `μᵀM = h`. Infeasible means `h` is not controlled by the norm,
/// i.e. the vectors are linearly dependent in a way `h` detects.
fn dual_norm(rows: &Rows, h: &[Q]) -> Result<Option<(Q, Vec<Q>)>> {
    let r = rows.m.len();
    let mut lp = Lp::new(2 * r);
    lp.minimize(vec![Q::one(); 2 * r]);
    for (i, hi) in h.iter().enumerate() {
        let mut c = vec![Q::zero(); 2 * r];
        for k in 0..r {
            c[k] = rows.m[k][i].clone();
            c[r + k] = -rows.m[k][i].clone();
        }
        lp.constraint(c, Cmp::Eq, hi.clone());
    }
    match lp.solve() {
        LpResult::Optimal { x, value } => Ok(Some((value, (0..r).map(|k| &x[k] - &x[r + k]).collect()))),
        LpResult::Infeasible => Ok(None),
        other => Err(lp_err("dual norm", other)),
    }
}

/// Primal maximiser for [`dual_norm`], seeded with the rows the dual uses.
fn dual_norm_witness(rows: &Rows, h: &[Q], mu: &[Q]) -> Result<Vec<Q>> {
    let m = rows.width();
    let mut active: Vec<usize> = (0..mu.len()).filter(|&k| !mu[k].is_zero()).collect();
    loop {
        let mut lp = Lp::new(m);
        for i in 0..m {
            lp.set_free(i);
        }
        lp.maximize(h.to_vec());
        for &r in &active {
            lp.constraint(rows.m[r].clone(), Cmp::Le, Q::one());
            lp.constraint(rows.m[r].clone(), Cmp::Ge, -Q::one());
        }
        let (a, _) = lp.solve().optimal().ok_or_else(|| Error::Internal("witness LP failed".into()))?;
        match (0..rows.m.len()).find(|&r| rows.apply(r, &a).abs() > Q::one()) {
            Some(r) => active.push(r),
            None => return Ok(a),
        }
    }
}

fn check_seq(seq: &[SchreierVector], max_len: usize) -> Result<()> {
    if seq.is_empty() {
        return Err(Error::pre("sequence must be nonempty"));
    }
    if seq.len() > max_len {
        return Err(Error::BoundExceeded {
            what: "sequence length",
            value: seq.len(),
            limit: max_len,
        });
    }
    if seq.iter().any(SchreierVector::is_zero) {
        return Err(Error::pre("sequence contains the zero vector"));
    }
    Ok(())
}

fn qvec_json(a: &[Q]) -> Value {
    Value::Array(a.iter().map(|x| json!(fmt_q(x))).collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PositiveL1 {
    pub value: Q,
    /// a point of the simplex with `‖Σ a_i x_i‖ = value`
    pub primal: Vec<Q>,
    /// `f` with `‖f‖* ≤ 1` and `min_i f(x_i) = value`
    pub dual: DualCertificate,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinftyPlus {
    pub constant: Q,
    pub witness: Vec<Q>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeqReport {
    pub m: usize,
    pub norms: Vec<Q>,
    pub normalized: bool,
    pub basis_constant: Q,
    /// `(k, a)` with `‖Σ a_i x_i‖ = 1` and `‖Σ_{i≤k} a_i x_i‖ = basis_constant`
    pub basis_witness: Option<(usize, Vec<Q>)>,
    pub l1_constant: Q,
    /// `a` with `Σ|a_i| = 1` and `‖Σ a_i x_i‖ = l1_constant`
    pub l1_witness: Vec<Q>,
    pub positive_l1: PositiveL1,
    /// least `K` for which the (normalized) sequence is ℓ1⁺-K
    pub l1_plus_k: Option<Q>,
    /// least `K` for which the (normalized) sequence is K-equivalent to the
    /// unit vector basis of ℓ1
    pub l1_k: Option<Q>,
    pub linfty_plus: Option<LinftyPlus>,
    pub wide_s_lambda: Q,
    pub wide_c_lambda: Option<Q>,
}

impl SeqReport {
    pub fn positive_l1_constant(&self) -> &Q {
        &self.positive_l1.value
    }

    pub fn to_json(&self) -> Value {
        let opt = |x: &Option<Q>| x.as_ref().map(|v| json!(fmt_q(v))).unwrap_or(Value::Null);
        json!({
            "m": self.m,
            "norms": qvec_json(&self.norms),
            "normalized": self.normalized,
            "basis_constant": fmt_q(&self.basis_constant),
            "basis_witness": self.basis_witness.as_ref().map(|(k, a)| json!({"k": k, "a": qvec_json(a)})),
            "l1_constant": fmt_q(&self.l1_constant),
            "l1_witness": qvec_json(&self.l1_witness),
            "positive_l1_constant": fmt_q(&self.positive_l1.value),
            "positive_l1_primal": qvec_json(&self.positive_l1.primal),
            "positive_l1_dual": self.positive_l1.dual.to_json(),
            "l1_plus_k": opt(&self.l1_plus_k),
            "l1_k": opt(&self.l1_k),
            "linfty_plus": self.linfty_plus.as_ref().map(|l| json!({
                "constant": fmt_q(&l.constant), "witness": qvec_json(&l.witness)
            })),
            "wide_s_lambda": fmt_q(&self.wide_s_lambda),
            "wide_c_lambda": opt(&self.wide_c_lambda),
        })
    }
}

/// Exact `c⁺ = min_{a ∈ simplex} ‖Σ a_i x_i‖` with matching primal and dual
/// optima.
fn positive_l1(rows: &Rows) -> Result<PositiveL1> {
    let (dv, w) = cplus_dual(rows)?;
    let init: Vec<usize> = (0..w.len()).filter(|&k| !w[k].is_zero()).collect();
    let (pv, a) = minmax_primal(rows, Domain::Simplex, &init)?;
    if pv != dv {
        return Err(Error::Internal(format!("duality gap: {pv} vs {dv}")));
    }
    let dual = rows.certificate(&w, &Q::one(), Q::one());
    Ok(PositiveL1 {
        value: dv,
        primal: a,
        dual,
    })
}

fn signed_rows(rows: &Rows, sigma: &[bool]) -> Rows {
    Rows {
        m: rows
            .m
            .iter()
            .map(|r| r.iter().zip(sigma).map(|(x, neg)| if *neg { -x } else { x.clone() }).collect())
            .collect(),
        labels: rows.labels.clone(),
    }
}

fn l1_constant(rows: &Rows) -> Result<(Q, Vec<Q>)> {
    let m = rows.width();
    let mut best: Option<(Q, Vec<bool>)> = None;
    // by symmetry a_1 ≥ 0
    for mask in 0u32..(1 << (m - 1)) {
        let sigma: Vec<bool> = (0..m).map(|i| i > 0 && mask >> (i - 1) & 1 == 1).collect();
        let (v, _) = cplus_dual(&signed_rows(rows, &sigma))?;
        if best.as_ref().is_none_or(|(b, _)| v < *b) {
            best = Some((v, sigma));
        }
    }
    let (v, sigma) = best.expect("at least one sign pattern");
    let (_, a) = minmax_primal(&signed_rows(rows, &sigma), Domain::Simplex, &[])?;
    let a = a.into_iter().zip(&sigma).map(|(x, neg)| if *neg { -x } else { x }).collect();
    Ok((v, a))
}

fn basis_constant(rows: &Rows) -> Result<(Q, Option<(usize, Vec<Q>)>)> {
    let m = rows.width();
    let mut best = Q::one();
    let mut arg: Option<(usize, Vec<Q>, Vec<Q>)> = None;
    for k in 1..m {
        let mut hs = RowAcc::default();
        for r in &rows.m {
            let h: Vec<Q> = (0..m).map(|i| if i < k { r[i].clone() } else { Q::zero() }).collect();
            hs.push(h, Functional::Coord(0));
        }
        for h in hs.finish().m {
            let (v, mu) = dual_norm(rows, &h)?
                .ok_or_else(|| Error::pre("sequence is linearly dependent; basis constant is infinite"))?;
            if v > best {
                best = v;
                arg = Some((k, h, mu));
            }
        }
    }
    // every basis vector must also be recoverable
    for i in 0..m {
        let mut h = vec![Q::zero(); m];
        h[i] = Q::one();
        if dual_norm(rows, &h)?.is_none() {
            return Err(Error::pre("sequence is linearly dependent; basis constant is infinite"));
        }
    }
    let witness = match arg {
        Some((k, h, mu)) => Some((k, dual_norm_witness(rows, &h, &mu)?)),
        None => None,
    };
    Ok((best, witness))
}

/// `sup { |Σ_{i≥k} a_i| : ‖Σ a_i x_i‖ ≤ 1 }` maximised over `k`.
fn tail_constant(rows: &Rows) -> Result<Q> {
    let m = rows.width();
    let mut best = Q::zero();
    for k in 0..m {
        let h: Vec<Q> = (0..m).map(|i| if i >= k { Q::one() } else { Q::zero() }).collect();
        let (v, _) = dual_norm(rows, &h)?.ok_or_else(|| Error::pre("sequence is linearly dependent"))?;
        best = best.max(v);
    }
    Ok(best)
}

/// Exact classification of a finite sequence.
pub fn analyze(seq: &[SchreierVector], space: &AmbientSpace) -> Result<SeqReport> {
    check_seq(seq, bounds().seq_len)?;
    let rows = space.rows(seq)?;
    let norms: Vec<Q> = seq.iter().map(|x| space.norm(x)).collect::<Result<_>>()?;
    let normalized = norms.iter().all(Q::is_one);
    let (basis, basis_witness) = basis_constant(&rows)?;
    let (l1, l1_witness) = l1_constant(&rows)?;
    let pos = positive_l1(&rows)?;
    let l1_plus_k = (normalized && pos.value.is_positive()).then(|| basis.clone().max(pos.value.recip()));
    let l1_k = (normalized && l1.is_positive()).then(|| l1.recip());
    let linfty_plus = if normalized {
        let (g, a) = minmax_primal(&rows, Domain::Box(&basis.recip()), &[])?;
        Some(LinftyPlus {
            constant: basis.clone().max(g),
            witness: a,
        })
    } else {
        None
    };
    let max_norm = norms.iter().max().cloned().unwrap_or_else(Q::zero);
    let tail = tail_constant(&rows)?;
    let wide_s_lambda = (&basis / Q::from_integer(2.into())).max(max_norm.clone()).max(tail);
    let wide_c_lambda = if max_norm <= Q::one() {
        let sum = seq.iter().fold(SchreierVector::zero(), |s, x| s.add(x));
        let min_norm = norms.iter().min().cloned().expect("nonempty");
        Some(basis.clone().max(min_norm.recip()).max(space.norm(&sum)?))
    } else {
        None
    };
    Ok(SeqReport {
        m: seq.len(),
        norms,
        normalized,
        basis_constant: basis,
        basis_witness,
        l1_constant: l1,
        l1_witness,
        positive_l1: pos,
        l1_plus_k,
        l1_k,
        linfty_plus,
        wide_s_lambda,
        wide_c_lambda,
    })
}

/// Only the ℓ1 part of [`analyze`]: `min ‖Σ a_i x_i‖` over `Σ|a_i| = 1`,
/// with a minimizer.
pub fn l1_lower(seq: &[SchreierVector], space: &AmbientSpace) -> Result<(Q, Vec<Q>)> {
    check_seq(seq, bounds().seq_len)?;
    l1_constant(&space.rows(seq)?)
}

/// Whether a normalized sequence is ℓ∞⁺-K; returns the witnessing
/// coefficients in `[1/K, 1]`.
pub fn linfty_plus_witness(seq: &[SchreierVector], k: &Q, space: &AmbientSpace) -> Result<Option<Vec<Q>>> {
    let rep = analyze(seq, space)?;
    if !rep.normalized || rep.basis_constant > *k || !k.is_positive() {
        return Ok(None);
    }
    let rows = space.rows(seq)?;
    let (g, a) = minmax_primal(&rows, Domain::Box(&k.recip()), &[])?;
    Ok((g <= *k).then_some(a))
}

/// A functional `f` with `‖f‖* ≤ K` and `f(x_i) ≥ 1` for every `i`.
///
/// Exists iff `K·c⁺ ≥ 1`; otherwise the error carries a simplex point `a`
/// with `‖Σ a_i x_i‖ < 1/K`, which rules out every such `f`.
pub fn branch_functional(seq: &[SchreierVector], k: &Q, space: &AmbientSpace) -> Result<DualCertificate> {
    check_seq(seq, bounds().seq_len)?;
    if *k < Q::one() {
        return Err(Error::pre("K must be at least 1"));
    }
    let rows = space.rows(seq)?;
    let pos = positive_l1(&rows)?;
    if !pos.value.is_positive() || &pos.value * k < Q::one() {
        let a: Vec<String> = pos.primal.iter().map(fmt_q).collect();
        return Err(Error::Infeasible(format!(
            "no functional of norm <= {} is >= 1 on the sequence: a = [{}] has norm {} < 1/K",
            fmt_q(k),
            a.join(", "),
            fmt_q(&pos.value)
        )));
    }
    let (_, w) = cplus_dual(&rows)?;
    Ok(rows.certificate(&w, &pos.value.recip(), k.clone()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConvertMode {
    L1PlusToWideS,
    WideSToL1Plus,
    LinftyPlusToWideC,
    WideCToLinftyPlus,
    Difference,
    Summing,
}

impl FromStr for ConvertMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "l1plus_to_wide_s" => ConvertMode::L1PlusToWideS,
            "wide_s_to_l1plus" => ConvertMode::WideSToL1Plus,
            "linftyplus_to_wide_c" => ConvertMode::LinftyPlusToWideC,
            "wide_c_to_linftyplus" => ConvertMode::WideCToLinftyPlus,
            "difference" => ConvertMode::Difference,
            "summing" => ConvertMode::Summing,
            _ => return Err(Error::Parse(format!("unknown conversion mode {s:?}"))),
        })
    }
}

/// Extra data a conversion may need.
#[derive(Clone, Debug, Default)]
pub struct ConvertInput {
    pub functional: Option<DualCertificate>,
    pub k: Option<Q>,
    pub lambda: Option<Q>,
    pub coefficients: Option<Vec<Q>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Converted {
    pub seq: Vec<SchreierVector>,
    /// constant promised by the recipe; `None` where no formula is known
    pub claimed: Option<Q>,
    /// the target constant measured exactly on the output
    pub measured: Option<Q>,
}

impl Converted {
    pub fn to_json(&self) -> Value {
        let opt = |x: &Option<Q>| x.as_ref().map(|v| json!(fmt_q(v))).unwrap_or(Value::Null);
        json!({
            "sequence": self.seq.iter().map(SchreierVector::to_json).collect::<Vec<_>>(),
            "claimed_constant": opt(&self.claimed),
            "measured_constant": opt(&self.measured),
        })
    }
}

fn need<'a, T>(x: &'a Option<T>, what: &str) -> Result<&'a T> {
    x.as_ref().ok_or_else(|| Error::pre(format!("conversion needs {what}")))
}

fn uncertified(msg: impl Into<String>) -> Error {
    Error::Certification(msg.into())
}

pub fn convert(
    seq: &[SchreierVector],
    mode: ConvertMode,
    input: &ConvertInput,
    space: &AmbientSpace,
) -> Result<Converted> {
    match mode {
        ConvertMode::L1PlusToWideS => {
            l1plus_to_wide_s(seq, need(&input.functional, "a functional")?, need(&input.k, "K")?, space)
        }
        ConvertMode::WideSToL1Plus => wide_s_to_l1plus(seq, need(&input.lambda, "lambda")?, space),
        ConvertMode::LinftyPlusToWideC => linftyplus_to_wide_c(
            seq,
            need(&input.coefficients, "coefficients")?,
            need(&input.k, "K")?,
            space,
        ),
        ConvertMode::WideCToLinftyPlus => wide_c_to_linftyplus(seq, need(&input.lambda, "lambda")?, space),
        ConvertMode::Difference => {
            let out = difference(seq);
            let measured = analyze(&out, space)?.wide_c_lambda;
            Ok(Converted {
                seq: out,
                claimed: None,
                measured,
            })
        }
        ConvertMode::Summing => {
            let out = summing(seq);
            let measured = Some(analyze(&out, space)?.wide_s_lambda);
            Ok(Converted {
                seq: out,
                claimed: None,
                measured,
            })
        }
    }
}

fn certify_l1_plus(seq: &[SchreierVector], k: &Q, space: &AmbientSpace) -> Result<SeqReport> {
    let rep = analyze(seq, space)?;
    match &rep.l1_plus_k {
        Some(c) if c <= k => Ok(rep),
        _ => Err(uncertified(format!("input is not a normalized l1+ sequence with K = {}", fmt_q(k)))),
    }
}

/// `(x_i / f(x_i))`, a 2K-wide-(s) sequence when `(x_i)` is ℓ1⁺-K and
/// `f ∈ B_{X*}` has `f(x_i) ≥ 1/K`.
pub fn l1plus_to_wide_s(
    seq: &[SchreierVector],
    f: &DualCertificate,
    k: &Q,
    space: &AmbientSpace,
) -> Result<Converted> {
    certify_l1_plus(seq, k, space)?;
    if f.total_weight() > Q::one() {
        return Err(uncertified("functional must lie in the dual unit ball"));
    }
    let vals: Vec<Q> = seq.iter().map(|x| f.eval(space, x)).collect();
    if vals.iter().any(|v| v * k < Q::one()) {
        return Err(uncertified("functional must be at least 1/K on every vector"));
    }
    let out: Vec<SchreierVector> = seq.iter().zip(&vals).map(|(x, v)| x.scale(&v.recip())).collect();
    let measured = Some(analyze(&out, space)?.wide_s_lambda);
    Ok(Converted {
        seq: out,
        claimed: Some(k * Q::from_integer(2.into())),
        measured,
    })
}

/// Normalize a λ-wide-(s) sequence; the result is ℓ1⁺ with constant
/// `max(2λ, λ²)`.
pub fn wide_s_to_l1plus(seq: &[SchreierVector], lambda: &Q, space: &AmbientSpace) -> Result<Converted> {
    let rep = analyze(seq, space)?;
    if rep.wide_s_lambda > *lambda {
        return Err(uncertified(format!("input is not {}-wide-(s)", fmt_q(lambda))));
    }
    let out: Vec<SchreierVector> = seq.iter().zip(&rep.norms).map(|(x, n)| x.scale(&n.recip())).collect();
    let measured = analyze(&out, space)?.l1_plus_k;
    let two = Q::from_integer(2.into());
    Ok(Converted {
        seq: out,
        claimed: Some((&two * lambda).max(lambda * lambda)),
        measured,
    })
}

/// `(b_i x_i)` for an ℓ∞⁺-K sequence with witness `b ⊂ [1/K, 1]`; the
/// result is K-wide-(c).
pub fn linftyplus_to_wide_c(
    seq: &[SchreierVector],
    b: &[Q],
    k: &Q,
    space: &AmbientSpace,
) -> Result<Converted> {
    let rep = analyze(seq, space)?;
    if !rep.normalized || rep.basis_constant > *k || b.len() != seq.len() {
        return Err(uncertified("input is not a normalized K-basic sequence of matching length"));
    }
    let lo = k.recip();
    if b.iter().any(|x| *x < lo || *x > Q::one()) {
        return Err(uncertified("coefficients must lie in [1/K, 1]"));
    }
    if space.norm(&SchreierVector::combination(b, seq))? > *k {
        return Err(uncertified("coefficients do not witness the l-infinity+ property"));
    }
    let out: Vec<SchreierVector> = seq.iter().zip(b).map(|(x, c)| x.scale(c)).collect();
    let measured = analyze(&out, space)?.wide_c_lambda;
    Ok(Converted {
        seq: out,
        claimed: Some(k.clone()),
        measured,
    })
}

/// Normalize a λ-wide-(c) sequence; the result is ℓ∞⁺-λ.
pub fn wide_c_to_linftyplus(seq: &[SchreierVector], lambda: &Q, space: &AmbientSpace) -> Result<Converted> {
    let rep = analyze(seq, space)?;
    match &rep.wide_c_lambda {
        Some(l) if l <= lambda => {}
        _ => return Err(uncertified(format!("input is not {}-wide-(c)", fmt_q(lambda)))),
    }
    let out: Vec<SchreierVector> = seq.iter().zip(&rep.norms).map(|(x, n)| x.scale(&n.recip())).collect();
    let measured = analyze(&out, space)?.linfty_plus.map(|l| l.constant);
    Ok(Converted {
        seq: out,
        claimed: Some(lambda.clone()),
        measured,
    })
}

/// `e_1 = b_1`, `e_j = b_j − b_{j−1}`.
pub fn difference(b: &[SchreierVector]) -> Vec<SchreierVector> {
    (0..b.len())
        .map(|j| if j == 0 { b[0].clone() } else { b[j].sub(&b[j - 1]) })
        .collect()
}

/// `b_j = e_1 + … + e_j`; inverse of [`difference`].
pub fn summing(e: &[SchreierVector]) -> Vec<SchreierVector> {
    let mut acc = SchreierVector::zero();
    e.iter()
        .map(|x| {
            acc = acc.add(x);
            acc.clone()
        })
        .collect()
}

/// Tolerances for conversions fed with approximate data:
/// `ε_i = ε / (K² · 2^{i+1})`, so that `2K²·Σε_i ≤ ε`.
pub fn perturbation_schedule(eps: &Q, k: &Q, m: usize) -> Vec<Q> {
    (1..=m)
        .map(|i| eps / (k * k * Q::from_integer(num_bigint::BigInt::from(2u32).pow(i as u32 + 1))))
        .collect()
}

/// [`l1plus_to_wide_s`] when only approximations `c_i ∈ [1/K, 1]` of the
/// values `f(x_i)` are available, with `|f(x_i) − c_i| ≤ ε_i`. The output
/// `(x_i / c_i)` is `(2K + ε)`-wide-(s).
pub fn l1plus_to_wide_s_approx(
    seq: &[SchreierVector],
    f: &DualCertificate,
    approx: &[Q],
    k: &Q,
    eps: &Q,
    space: &AmbientSpace,
) -> Result<Converted> {
    certify_l1_plus(seq, k, space)?;
    if f.total_weight() > Q::one() || approx.len() != seq.len() {
        return Err(uncertified("functional must lie in the dual unit ball"));
    }
    let sched = perturbation_schedule(eps, k, seq.len());
    let lo = k.recip();
    for ((x, c), e) in seq.iter().zip(approx).zip(&sched) {
        if *c < lo || *c > Q::one() || (f.eval(space, x) - c).abs() > *e {
            return Err(uncertified("approximations outside the tolerance schedule"));
        }
    }
    let out: Vec<SchreierVector> = seq.iter().zip(approx).map(|(x, c)| x.scale(&c.recip())).collect();
    let measured = Some(analyze(&out, space)?.wide_s_lambda);
    Ok(Converted {
        seq: out,
        claimed: Some(k * Q::from_integer(2.into()) + eps),
        measured,
    })
}

/// [`linftyplus_to_wide_c`] with approximate coefficients `c_i ∈ [1/K, 1]`,
/// `|c_i − b_i| ≤ ε_i`; the output `(c_i x_i)` is `(K + ε)`-wide-(c).
pub fn linftyplus_to_wide_c_approx(
    seq: &[SchreierVector],
    b: &[Q],
    approx: &[Q],
    k: &Q,
    eps: &Q,
    space: &AmbientSpace,
) -> Result<Converted> {
    linftyplus_to_wide_c(seq, b, k, space)?;
    let sched = perturbation_schedule(eps, k, seq.len());
    let lo = k.recip();
    if approx.len() != seq.len()
        || approx
            .iter()
            .zip(b)
            .zip(&sched)
            .any(|((c, b), e)| *c < lo || *c > Q::one() || (c - b).abs() > *e)
    {
        return Err(uncertified("approximations outside the tolerance schedule"));
    }
    let out: Vec<SchreierVector> = seq.iter().zip(approx).map(|(x, c)| x.scale(c)).collect();
    let measured = analyze(&out, space)?.wide_c_lambda;
    Ok(Converted {
        seq: out,
        claimed: Some(k + eps),
        measured,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConcatBound {
    pub epsilon: Q,
    pub delta: Q,
    pub bound: Q,
    pub samples_checked: usize,
}

impl ConcatBound {
    pub fn to_json(&self) -> Value {
        json!({
            "epsilon": fmt_q(&self.epsilon),
            "delta": fmt_q(&self.delta),
            "bound": fmt_q(&self.bound),
            "samples_checked": self.samples_checked,
        })
    }
}

/// `sup { ‖T Σa_i v_i‖ : ‖Σa_i v_i‖ ≤ 1 }` for `T = I − P_k`, or `None`
/// when the supremum is infinite.
fn operator_norm(from: &[SchreierVector], to: &[SchreierVector], space: &AmbientSpace) -> Result<Option<Q>> {
    let src = space.rows(from)?;
    let dst = space.rows(to)?;
    let mut best = Q::zero();
    for h in &dst.m {
        match dual_norm(&src, h)? {
            Some((v, _)) => best = best.max(v),
            None => return Ok(None),
        }
    }
    Ok(Some(best))
}

/// `4/(δ − 2ε)` where `ε = sup ‖(I−P_k)x‖` over the unit sphere of
/// `span(xseq)` and `δ = inf ‖(I−P_k)y‖` over that of `span(yseq)`; then
/// `max(‖x‖, ‖y‖) ≤ bound·‖x + y‖` on the two spans, which is checked
/// on seeded random samples.
pub fn concat_bound(
    xseq: &[SchreierVector],
    yseq: &[SchreierVector],
    k: u32,
    space: &AmbientSpace,
) -> Result<ConcatBound> {
    check_seq(xseq, 6)?;
    check_seq(yseq, 6)?;
    let tail = |s: &[SchreierVector]| -> Vec<SchreierVector> { s.iter().map(|x| project(x, k, true)).collect() };
    let (xt, yt) = (tail(xseq), tail(yseq));
    let epsilon = if xt.iter().all(SchreierVector::is_zero) {
        Q::zero()
    } else {
        operator_norm(xseq, &xt, space)?.ok_or_else(|| Error::pre("x-sequence is linearly dependent"))?
    };
    // δ = 1 / ‖((I−P_k)|_Y)^{-1}‖, zero when the restriction is not injective
    let delta = if yt.iter().any(SchreierVector::is_zero) {
        Q::zero()
    } else {
        match operator_norm(&yt, yseq, space)? {
            Some(v) if v.is_positive() => v.recip(),
            _ => Q::zero(),
        }
    };
    let two_eps = &epsilon * Q::from_integer(2.into());
    if two_eps >= delta {
        return Err(Error::pre(format!(
            "criterion inapplicable: 2*epsilon = {} >= delta = {}",
            fmt_q(&two_eps),
            fmt_q(&delta)
        )));
    }
    let bound = Q::from_integer(4.into()) / (&delta - two_eps);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut coeffs = |n: usize| -> Vec<Q> {
        (0..n)
            .map(|_| Q::new(rng.gen_range(-9i64..=9).into(), rng.gen_range(1i64..=5).into()))
            .collect()
    };
    let samples = 100;
    for _ in 0..samples {
        let x = SchreierVector::combination(&coeffs(xseq.len()), xseq);
        let y = SchreierVector::combination(&coeffs(yseq.len()), yseq);
        let lhs = space.norm(&x)?.max(space.norm(&y)?);
        if lhs > &bound * space.norm(&x.add(&y))? {
            return Err(Error::Internal(format!("concatenation bound {} violated", fmt_q(&bound))));
        }
    }
    Ok(ConcatBound {
        epsilon,
        delta,
        bound,
        samples_checked: samples,
    })
}
