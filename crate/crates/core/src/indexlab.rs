//! Index certificates: canonical ℓ1-trees on `X_α` (lower bounds), the
//! small sup-norm combination LP, James' blocking, and the staircase walk
//! that produces small convex block combinations in trees of too high
//! order.

use crate::bounds::bounds;
use crate::cspace::l1_tree_c0;
use crate::cspace::C0Tree;
use crate::error::{Error, Result};
use crate::lp::{Cmp, Lp, LpResult};
use crate::ord::Ordinal;
use crate::rat::{fmt_q, sqrt_upper, Q};
use crate::schreier::{FinSet, SchreierIndex};
use crate::seqcheck::{analyze, l1_lower, AmbientSpace};
use crate::trees::{glue, replacement_tree, restrict, IndexTree, Node, Payload, Replace, ReplacementMap};
use crate::xnorm::{project, sup_norm, SchreierVector};
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use std::collections::{BTreeMap, BTreeSet};

/// Schema version of the dossier JSON.
pub const DOSSIER_SCHEMA: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalNode {
    pub set: FinSet,
    pub positive_l1: Q,
    pub l1_constant: Q,
}

#[derive(Clone, Debug)]
pub struct CanonicalTree {
    pub tree: IndexTree,
    pub nodes: Vec<CanonicalNode>,
}

impl CanonicalTree {
    pub fn to_json(&self) -> Value {
        json!({
            "order": self.tree.order_finite(),
            "nodes": self.nodes.iter().map(|c| json!({
                "set": c.set.to_string(),
                "positive_l1": fmt_q(&c.positive_l1),
                "l1_constant": fmt_q(&c.l1_constant),
            })).collect::<Vec<_>>(),
        })
    }
}

fn unit_node(f: &FinSet) -> Node {
    f.elems().iter().map(|&i| Payload::Vector(SchreierVector::unit(i))).collect()
}

/// `{(e_i)_{i∈F} : ∅ ≠ F ∈ S_α ∩ 2^[1..n]}` with every node certified:
/// ℓ1⁺ constant exactly 1 and ℓ1 constant in `[1/2, 1]`.
pub fn canonical_l1_tree(alpha: &SchreierIndex, n: u32) -> Result<CanonicalTree> {
    let space = AmbientSpace::Schreier(alpha.clone());
    let half = Q::new(1.into(), 2.into());
    let mut tree = IndexTree::new();
    let mut nodes = Vec::new();
    for f in alpha.enumerate(n)?.into_iter().filter(|f| !f.is_empty()) {
        let seq: Vec<SchreierVector> = f.elems().iter().map(|&i| SchreierVector::unit(i)).collect();
        let rep = analyze(&seq, &space)?;
        let pos = rep.positive_l1.value.clone();
        if !pos.is_one() || rep.l1_constant < half || rep.l1_constant > Q::one() {
            return Err(Error::Certification(format!(
                "node {f}: positive constant {}, ℓ1 constant {}",
                fmt_q(&pos),
                fmt_q(&rep.l1_constant)
            )));
        }
        tree.insert(unit_node(&f));
        nodes.push(CanonicalNode {
            set: f,
            positive_l1: pos,
            l1_constant: rep.l1_constant,
        });
    }
    Ok(CanonicalTree { tree, nodes })
}

/// Minimum of `‖Σ a_i x_i‖_∞` over `Σ|a_i| = 1`, with the dual functional
/// proving optimality on the winning sign facet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmallSup {
    pub coefficients: Vec<Q>,
    pub value: Q,
    /// `(coordinate, weight)` with `Σ|weight| ≤ 1` and
    /// `Σ_j w_j (Σ_i σ_i b_i x_i)(j) ≥ value` on the whole facet
    pub dual: Vec<(u32, Q)>,
}

impl SmallSup {
    pub fn to_json(&self) -> Value {
        json!({
            "value": fmt_q(&self.value),
            "coefficients": self.coefficients.iter().map(fmt_q).collect::<Vec<_>>(),
            "dual": self.dual.iter().map(|(j, w)| json!([j, fmt_q(w)])).collect::<Vec<_>>(),
        })
    }
}

fn lp_fail(what: &str, r: LpResult) -> Error {
    Error::Internal(format!("{what} LP ended {r:?}"))
}

/// One LP per sign facet `a = σ∘b`, `b` in the simplex (`σ_1 = +` by
/// symmetry), each solved in primal and dual form; the two optima must
/// agree.
pub fn small_sup_combination(seq: &[SchreierVector]) -> Result<SmallSup> {
    let n = seq.len();
    if n == 0 {
        return Err(Error::pre("sequence must be nonempty"));
    }
    if n > bounds().small_sup_len {
        return Err(Error::BoundExceeded {
            what: "sequence length",
            value: n,
            limit: bounds().small_sup_len,
        });
    }
    let coords: Vec<u32> = seq.iter().flat_map(|x| x.support()).collect::<BTreeSet<_>>().into_iter().collect();
    if coords.is_empty() {
        let mut a = vec![Q::zero(); n];
        a[0] = Q::one();
        return Ok(SmallSup {
            coefficients: a,
            value: Q::zero(),
            dual: Vec::new(),
        });
    }
    let d = coords.len();
    let mut best: Option<SmallSup> = None;
    for mask in 0u32..1 << (n - 1) {
        let sigma: Vec<Q> = (0..n)
            .map(|i| if i > 0 && mask >> (i - 1) & 1 == 1 { -Q::one() } else { Q::one() })
            .collect();
        // M[j][i] = σ_i x_i(coord j)
        let mat: Vec<Vec<Q>> = coords
            .iter()
            .map(|&c| (0..n).map(|i| &sigma[i] * seq[i].get(c)).collect())
            .collect();
        // primal: variables b_1..b_n, t
        let mut lp = Lp::new(n + 1);
        let mut obj = vec![Q::zero(); n + 1];
        obj[n] = Q::one();
        lp.minimize(obj);
        for row in &mat {
            let mut up: Vec<Q> = row.clone();
            up.push(-Q::one());
            lp.constraint(up, Cmp::Le, Q::zero());
            let mut lo: Vec<Q> = row.iter().map(|v| -v).collect();
            lo.push(-Q::one());
            lp.constraint(lo, Cmp::Le, Q::zero());
        }
        let mut simplex = vec![Q::one(); n];
        simplex.push(Q::zero());
        lp.constraint(simplex, Cmp::Eq, Q::one());
        let (x, pval) = lp.solve().optimal().ok_or_else(|| Error::Internal("small-sup primal LP failed".into()))?;
        if best.as_ref().is_some_and(|b| pval >= b.value) {
            continue;
        }
        // dual: λ⁺, λ⁻ ≥ 0 per coordinate, s free
        let mut dl = Lp::new(2 * d + 1);
        dl.set_free(2 * d);
        let mut obj = vec![Q::zero(); 2 * d + 1];
        obj[2 * d] = Q::one();
        dl.maximize(obj);
        for i in 0..n {
            let mut c = vec![Q::zero(); 2 * d + 1];
            for j in 0..d {
                c[j] = mat[j][i].clone();
                c[d + j] = -mat[j][i].clone();
            }
            c[2 * d] = -Q::one();
            dl.constraint(c, Cmp::Ge, Q::zero());
        }
        let mut c = vec![Q::one(); 2 * d + 1];
        c[2 * d] = Q::zero();
        dl.constraint(c, Cmp::Le, Q::one());
        let (y, dval) = match dl.solve() {
            LpResult::Optimal { x, value } => (x, value),
            other => return Err(lp_fail("small-sup dual", other)),
        };
        if dval != pval {
            return Err(Error::Certification(format!(
                "primal {} and dual {} disagree",
                fmt_q(&pval),
                fmt_q(&dval)
            )));
        }
        let coefficients = (0..n).map(|i| &sigma[i] * &x[i]).collect();
        let dual = (0..d)
            .map(|j| (coords[j], &y[j] - &y[d + j]))
            .filter(|(_, w)| !w.is_zero())
            .collect();
        best = Some(SmallSup {
            coefficients,
            value: pval,
            dual,
        });
    }
    Ok(best.expect("at least one facet"))
}

/// `s = ⌈log₂(log K / log(1+δ))⌉` (at least 0) and the length `k^(2^s)`
/// after which `s` squaring stages reach constant `1+δ`.
pub fn james_threshold(k_const: &Q, k: u32, delta: &Q) -> Result<(u32, u64)> {
    use num_traits::ToPrimitive;
    if k_const < &Q::one() || !delta.is_positive() || k == 0 {
        return Err(Error::pre("need K ≥ 1, δ > 0 and k ≥ 1"));
    }
    let kf = k_const.to_f64().unwrap_or(f64::INFINITY);
    let df = delta.to_f64().unwrap_or(0.0);
    let ratio = kf.ln() / df.ln_1p();
    let s = if ratio <= 1.0 { 0 } else { ratio.log2().ceil() as u32 };
    if s > 5 {
        return Err(Error::pre(format!("{s} squaring stages are beyond reach")));
    }
    let n = (k as u64)
        .checked_pow(1 << s)
        .ok_or_else(|| Error::pre("threshold overflows"))?;
    Ok((s, n))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JamesBlocks {
    pub blocks: Vec<SchreierVector>,
    /// exact `min ‖Σ a_i y_i‖` over `Σ|a_i| = 1`
    pub l1_constant: Q,
    pub stages: u32,
}

fn normalize(x: &SchreierVector, space: &AmbientSpace) -> Result<SchreierVector> {
    let n = space.norm(x)?;
    if n.is_zero() {
        return Err(Error::Internal("block combination vanished".into()));
    }
    Ok(x.scale(&n.recip()))
}

/// Squaring iteration: a K-ℓ1 sequence of length `g²`, cut into `g`
/// consecutive groups, either has a group with constant `≥ √(1/K)` or
/// the worst combinations of all groups form a `√K`-ℓ1 block sequence.
pub fn james_blocks(
    seq: &[SchreierVector],
    space: &AmbientSpace,
    k_const: &Q,
    k: u32,
    delta: &Q,
) -> Result<JamesBlocks> {
    let (s, need) = james_threshold(k_const, k, delta)?;
    if (seq.len() as u64) < need {
        return Err(Error::pre(format!("need at least {need} vectors, got {}", seq.len())));
    }
    for x in seq {
        if !space.norm(x)?.is_one() {
            return Err(Error::pre("sequence must be normalized"));
        }
    }
    let mut c = k_const.recip();
    if seq.len() <= bounds().seq_len {
        let (actual, _) = l1_lower(seq, space)?;
        if actual < c {
            return Err(Error::pre(format!("sequence is not {}-ℓ1", fmt_q(k_const))));
        }
    }
    let mut cur: Vec<SchreierVector> = seq[..need as usize].to_vec();
    for stage in 0..s {
        let g = (k as u64).pow(1 << (s - stage - 1)) as usize;
        let tau = sqrt_upper(&c.recip(), 1_000_000).recip();
        let mut next = None;
        let mut combos = Vec::with_capacity(g);
        for group in cur.chunks(g) {
            let (cg, a) = l1_lower(group, space)?;
            if cg >= tau {
                next = Some(group.to_vec());
                break;
            }
            let y = group.iter().zip(&a).fold(SchreierVector::zero(), |acc, (x, ai)| acc.add(&x.scale(ai)));
            combos.push(normalize(&y, space)?);
        }
        cur = match next {
            Some(group) => group,
            None => combos,
        };
        c = tau;
    }
    let (constant, _) = l1_lower(&cur, space)?;
    let target = (Q::one() + delta).recip();
    if constant < target {
        return Err(Error::Certification(format!(
            "after {s} stages the constant is {}, below {}",
            fmt_q(&constant),
            fmt_q(&target)
        )));
    }
    Ok(JamesBlocks {
        blocks: cur,
        l1_constant: constant,
        stages: s,
    })
}

/// Increasing projections cutting vectors into stages.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Filtration {
    /// `P_k`: coordinates `≤ k` of a vector in `X_α` or `ℓ∞^d`
    Coordinates,
    /// `Q_k = (Σ_{l=2}^{k+1} χ_{{l}})·`, on node-basis coordinates
    InitialNodes,
}

fn span_nodes(space: &AmbientSpace) -> Result<&[FinSet]> {
    match space {
        AmbientSpace::NodeBasisSpan { nodes, .. } => Ok(nodes),
        _ => Err(Error::pre("the Q_k filtration needs a node basis span")),
    }
}

impl Filtration {
    pub fn project(&self, k: u32, x: &SchreierVector, space: &AmbientSpace) -> Result<SchreierVector> {
        match self {
            Filtration::Coordinates => Ok(project(x, k, false)),
            Filtration::InitialNodes => {
                let nodes = span_nodes(space)?;
                let coord = |f: &FinSet| -> Result<u32> {
                    nodes
                        .iter()
                        .position(|g| g == f)
                        .map(|p| p as u32 + 1)
                        .ok_or_else(|| Error::pre(format!("{f} is outside the node basis span")))
                };
                let mut pairs = Vec::new();
                for (i, a) in x.iter() {
                    let f = &nodes[i as usize - 1];
                    match f.min_elem() {
                        None => {
                            for l in 2..=k + 1 {
                                pairs.push((coord(&FinSet::singleton(l))?, a.clone()));
                            }
                        }
                        Some(m) if (2..=k + 1).contains(&m) => pairs.push((i, a.clone())),
                        Some(_) => {}
                    }
                }
                SchreierVector::from_pairs(pairs)
            }
        }
    }

    /// Least `k` with `project(k, x) = x`.
    pub fn level(&self, x: &SchreierVector, space: &AmbientSpace) -> Result<u32> {
        match self {
            Filtration::Coordinates => Ok(x.max_support().unwrap_or(0)),
            Filtration::InitialNodes => {
                let nodes = span_nodes(space)?;
                let mut k = 0;
                for (i, _) in x.iter() {
                    match nodes[i as usize - 1].min_elem() {
                        Some(m) if m >= 2 => k = k.max(m - 1),
                        _ => return Err(Error::pre("vector has a component outside every Q_k range")),
                    }
                }
                Ok(k)
            }
        }
    }
}

/// How a stage finds its small combination.
#[derive(Clone, Debug)]
pub enum Inner {
    /// exact minimum of the coordinate sup norm ([`small_sup_combination`])
    Sup,
    /// exact minimum of a polyhedral norm over `Σ|b| = 1`
    Norm(AmbientSpace),
}

impl Inner {
    fn minimize(&self, ys: &[SchreierVector]) -> Result<(Vec<Q>, Q)> {
        if let Some(j) = ys.iter().position(SchreierVector::is_zero) {
            let mut b = vec![Q::zero(); ys.len()];
            b[j] = Q::one();
            return Ok((b, Q::zero()));
        }
        match self {
            Inner::Sup => {
                let r = small_sup_combination(ys)?;
                Ok((r.coefficients, r.value))
            }
            Inner::Norm(space) => {
                let (v, b) = l1_lower(ys, space)?;
                Ok((b, v))
            }
        }
    }
}

/// A replacement tree `T(m, β)` with vectors on its tokens and the defining
/// map onto the chain `T_m = {a_1 < … < a_m}`.
#[derive(Clone, Debug)]
pub struct StructuredTree {
    pub tree: IndexTree,
    pub map: ReplacementMap,
    pub tm: IndexTree,
    pub vectors: BTreeMap<Payload, SchreierVector>,
    pub space: AmbientSpace,
}

impl StructuredTree {
    pub fn new(
        tree: IndexTree,
        map: ReplacementMap,
        tm: IndexTree,
        vectors: BTreeMap<Payload, SchreierVector>,
        space: AmbientSpace,
    ) -> Result<Self> {
        for n in tree.nodes() {
            if !map.assignment.contains_key(n) {
                return Err(Error::pre("defining map is not total"));
            }
            if let Some(p) = n.last() {
                if vectors.get(p).is_none_or(SchreierVector::is_zero) {
                    return Err(Error::pre("every token needs a nonzero vector"));
                }
            }
        }
        if tm.nodes().any(|a| a.len() > 1 && !tm.contains(&a[..a.len() - 1])) {
            return Err(Error::pre("T_m is not a tree"));
        }
        Ok(StructuredTree {
            tree,
            map,
            tm,
            vectors,
            space,
        })
    }

    /// `m`, the length of the chain `T_m`.
    pub fn m(&self) -> usize {
        self.tm.nodes().map(Vec::len).max().unwrap_or(0)
    }

    fn stage(&self, node: &[Payload]) -> usize {
        self.map.assignment.get(node).map_or(0, Vec::len)
    }

    fn vectors_of(&self, node: &[Payload]) -> Vec<SchreierVector> {
        node.iter().map(|p| self.vectors[p].clone()).collect()
    }

    /// Seeded demonstration data on `T(m, ω)`. Stage `i` reuses one small
    /// coordinate range (or key family) per stage, and every chain holds
    /// near-copies of one vector whose differences are tiny, so the stage
    /// tolerances are met by genuine cancellation.
    ///
    /// `Coordinates`: vectors in `X_1`, stage `i` on `[c_i, c_i + breadth]`.
    /// `InitialNodes`: node functions of `C(S_1)` over `S_1 ∩ 2^[1..m+1]`,
    /// stage `i` carrying `χ_{{i+1}}` plus small terms on keys starting at 2.
    pub fn synthetic(m: u32, breadth: u64, filtration: Filtration, seed: u64) -> Result<Self> {
        if m == 0 || breadth == 0 || breadth > 2 {
            return Err(Error::pre("synthetic trees need m ≥ 1 and breadth 1 or 2"));
        }
        let stride = breadth as u32 + 1;
        let space = match filtration {
            Filtration::Coordinates => {
                if m * stride > bounds().support {
                    return Err(Error::BoundExceeded {
                        what: "support",
                        value: (m * stride) as usize,
                        limit: bounds().support as usize,
                    });
                }
                AmbientSpace::schreier(Ordinal::one())
            }
            Filtration::InitialNodes => AmbientSpace::node_basis_span(Ordinal::one(), (m + 1).max(stride + 1))?,
        };
        let depth = m as u64 * (breadth + 1);
        let rep = replacement_tree(&Ordinal::finite(m as u64), &Replace::Ordinal(Ordinal::omega()), depth, breadth)?;
        let (map, tm) = rep.map.ok_or_else(|| Error::Internal("replacement tree without map".into()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut vectors = BTreeMap::new();
        let stage_of = |n: &[Payload]| map.assignment.get(n).map_or(0, Vec::len) as u32;
        for node in rep.tree.nodes() {
            let i = stage_of(node);
            let pos = (1..=node.len()).filter(|&l| stage_of(&node[..l]) == i).count() as u32;
            let r: i64 = rng.gen_range(1..=4);
            let t = Q::new(1.into(), (r << (i + 8)).into());
            let v = match filtration {
                Filtration::Coordinates => {
                    let c = (i - 1) * stride + 1;
                    if pos == 1 {
                        SchreierVector::unit(c)
                    } else {
                        SchreierVector::from_pairs([(c, Q::one() - &t), (c + pos - 1, t)])?
                    }
                }
                Filtration::InitialNodes => {
                    let coord = |f: FinSet| -> Result<u32> {
                        span_nodes(&space)?
                            .iter()
                            .position(|g| *g == f)
                            .map(|p| p as u32 + 1)
                            .ok_or_else(|| Error::Internal(format!("{f} missing from the span")))
                    };
                    let small = if pos == 1 {
                        FinSet::singleton(2)
                    } else {
                        FinSet::from_sorted(vec![2, pos + 1])
                    };
                    if i == 1 && pos == 1 {
                        SchreierVector::unit(coord(FinSet::singleton(2))?)
                    } else if i == 1 {
                        SchreierVector::from_pairs([(coord(FinSet::singleton(2))?, Q::one() - &t), (coord(small)?, t)])?
                    } else {
                        SchreierVector::from_pairs([
                            (coord(FinSet::singleton(i + 1))?, Q::one() - &t),
                            (coord(small)?, t),
                        ])?
                    }
                }
            };
            vectors.insert(node.last().expect("nonempty").clone(), v);
        }
        Self::new(rep.tree, map, tm, vectors, space)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StaircaseResult {
    /// the node of `T(m)` walked to
    pub node: Node,
    /// coefficient of each element of `node` in `x`
    pub coefficients: Vec<Q>,
    pub x: SchreierVector,
    /// exact ambient norm of `x`
    pub value: Q,
    /// `2/m`
    pub bound: Q,
    /// `k_1, …, k_m`
    pub levels: Vec<u32>,
    /// inner value reached at stages `2..=m`, with its tolerance
    pub stage_values: Vec<(Q, Q)>,
}

impl StaircaseResult {
    pub fn to_json(&self) -> Value {
        json!({
            "length": self.node.len(),
            "coefficients": self.coefficients.iter().map(fmt_q).collect::<Vec<_>>(),
            "x": self.x.to_json(),
            "value": fmt_q(&self.value),
            "bound": fmt_q(&self.bound),
            "levels": self.levels,
            "stages": self.stage_values.iter().map(|(v, t)| json!({"value": fmt_q(v), "tolerance": fmt_q(t)})).collect::<Vec<_>>(),
        })
    }
}

/// The staircase walk on `T(m)`: a terminal node of `F⁻¹(a_1)` gives
/// `x_1`; at stage `i` the restricted tree `R(S′ ∩ F⁻¹(a_i))` after the
/// current node is searched for a terminal node admitting a combination
/// with inner value below `1/(2^(i−1)·k_{i−1})`; finally
/// `x = (1/m)Σ x_i` is certified to have norm at most `2/m`.
pub fn staircase(tree: &StructuredTree, m: usize, filtration: Filtration, inner: &Inner) -> Result<StaircaseResult> {
    if m == 0 || m != tree.m() {
        return Err(Error::pre(format!("tree is structured over T_{} , not T_{m}", tree.m())));
    }
    let space = &tree.space;
    let mut node: Node = Vec::new();
    let mut coefficients: Vec<Q> = Vec::new();
    let mut xs: Vec<SchreierVector> = Vec::new();
    let mut levels: Vec<u32> = Vec::new();
    let mut stage_values = Vec::new();
    for i in 1..=m {
        // S′ ∩ F⁻¹(a_i), re-rooted
        let part = IndexTree::from_nodes(
            tree.tree
                .nodes()
                .filter(|z| z.len() > node.len() && z.starts_with(&node) && tree.stage(z) == i)
                .cloned(),
        );
        if part.is_empty() {
            return Err(Error::pre(format!("no part of the tree maps to a_{i} after the current node")));
        }
        let restricted = restrict(&part, &tree.tree)?;
        let terminals: Vec<Node> = restricted.terminal_nodes().into_iter().cloned().collect();
        let (suffix, b, x) = if i == 1 {
            let t = terminals[0].clone();
            let mut b = vec![Q::zero(); t.len()];
            b[0] = Q::one();
            let x = tree.vectors_of(&t[..1])[0].clone();
            (t, b, x)
        } else {
            let prev = *levels.last().expect("stage 1 done");
            let tol = Q::new(1.into(), ((1i64 << (i - 1)) * prev.max(1) as i64).into());
            let mut best: Option<(Q, Node, Vec<Q>)> = None;
            for t in &terminals {
                let vs = tree.vectors_of(t);
                let ys = match filtration {
                    Filtration::Coordinates => vs.clone(),
                    Filtration::InitialNodes => vs
                        .iter()
                        .map(|v| filtration.project(prev, v, space))
                        .collect::<Result<_>>()?,
                };
                let (b, v) = inner.minimize(&ys)?;
                if best.as_ref().is_none_or(|(bv, _, _)| v < *bv) {
                    best = Some((v.clone(), t.clone(), b));
                }
                if v < tol {
                    break;
                }
            }
            let (v, t, b) = best.expect("at least one terminal node");
            if v >= tol {
                return Err(Error::Certification(format!(
                    "stage {i}: best inner value {} does not beat the tolerance {}",
                    fmt_q(&v),
                    fmt_q(&tol)
                )));
            }
            stage_values.push((v, tol));
            let vs = tree.vectors_of(&t);
            let x = vs.iter().zip(&b).fold(SchreierVector::zero(), |acc, (y, c)| acc.add(&y.scale(c)));
            (t, b, x)
        };
        let k = filtration.level(&x, space)?;
        levels.push(match levels.last() {
            Some(&p) => k.max(p + 1),
            None => k,
        });
        node.extend(suffix);
        coefficients.extend(b);
        xs.push(x);
    }
    let mq = Q::from_integer((m as i64).into());
    let x = xs.iter().fold(SchreierVector::zero(), |acc, y| acc.add(y)).scale(&mq.recip());
    let coefficients = coefficients.iter().map(|c| c / &mq).collect();
    let value = space.norm(&x)?;
    let bound = Q::from_integer(2.into()) / &mq;
    if value > bound {
        return Err(Error::Certification(format!(
            "staircase vector has norm {} above 2/m = {}",
            fmt_q(&value),
            fmt_q(&bound)
        )));
    }
    if !tree.tree.contains(&node) {
        return Err(Error::Internal("walked node is not in the tree".into()));
    }
    Ok(StaircaseResult {
        node,
        coefficients,
        x,
        value,
        bound,
        levels,
        stage_values,
    })
}

/// `ω^(n+1)·k` and `ω^(n+1) + ω·(ω^n·(k−1))`, which must coincide.
pub fn c0_order_identity(n: u64, k: u64) -> (Ordinal, Ordinal) {
    let w = Ordinal::omega();
    let wn1 = Ordinal::omega_pow(&Ordinal::finite(n + 1));
    let wn = Ordinal::omega_pow(&Ordinal::finite(n));
    let lhs = wn1.mul(&Ordinal::finite(k));
    let rhs = wn1.add(&w.mul(&wn.mul(&Ordinal::finite(k - 1))));
    (lhs, rhs)
}

/// Evidence dossier for the ℓ1-index lower bound of `X_α` and the `C_0`
/// constructions. Every number in it is recomputed by
/// [`validate_dossier`].
pub fn certify_index_lower_bound(alpha: &SchreierIndex, n: u32) -> Result<Value> {
    let canonical = canonical_l1_tree(alpha, n)?;
    let root_order = match alpha.node_order(&FinSet::empty()) {
        Ok(o) => o.to_string(),
        Err(Error::Undetermined(_)) => "undetermined".to_string(),
        Err(e) => return Err(e),
    };
    let space = AmbientSpace::Schreier(alpha.clone());
    let head = canonical_l1_tree(alpha, n.min(4))?.tree;
    let tail = IndexTree::chain(&[SchreierVector::unit(1), SchreierVector::unit(2)]);
    let glued = glue(&head, &tail, &space)?;
    let c0 = match alpha.alpha().as_finite() {
        Some(a) if a <= 5 => {
            let ids: Vec<Value> = (1..=5)
                .map(|k| {
                    let (l, r) = c0_order_identity(a, k);
                    json!({"k": k, "lhs": l.to_string(), "rhs": r.to_string(), "equal": l == r})
                })
                .collect();
            if ids.iter().any(|v| v["equal"] != json!(true)) {
                return Err(Error::Certification("ordinal identity failed".into()));
            }
            let t = l1_tree_c0(&Ordinal::one(), &C0Tree::empty(Ordinal::zero()), 4, 3)?;
            let consts = t.certify()?;
            if !consts.iter().all(Q::is_one) {
                return Err(Error::Certification("C_0 tree node with ℓ1 constant below 1".into()));
            }
            json!({
                "n": a,
                "identities": ids,
                "tree": {"order": t.order(), "nodes": consts.len(), "l1_constants": consts.iter().map(fmt_q).collect::<Vec<_>>()},
            })
        }
        _ => Value::Null,
    };
    Ok(json!({
        "schema": DOSSIER_SCHEMA,
        "version": crate::VERSION,
        "convention": crate::CONVENTION,
        "alpha": alpha.alpha().to_string(),
        "n": n,
        "canonical": {
            "restricted_order": alpha.restricted_order(n)?,
            "tree_order": canonical.tree.order_finite(),
            "root_order": root_order,
            "certificate": canonical.to_json(),
        },
        "glue": {
            "head_order": head.order_finite(),
            "tail_order": tail.order_finite(),
            "glued_order": glued.order,
            "report": glued.to_json(),
        },
        "c0": c0,
    }))
}

/// Recomputes a dossier from its parameters and compares it field by field.
pub fn validate_dossier(d: &Value) -> Result<bool> {
    let alpha: Ordinal = d
        .get("alpha")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::Parse("dossier needs alpha".into()))?
        .parse()?;
    let n = d
        .get("n")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::Parse("dossier needs n".into()))? as u32;
    if d.get("schema") != Some(&json!(DOSSIER_SCHEMA)) {
        return Err(Error::Parse("unknown dossier schema".into()));
    }
    Ok(certify_index_lower_bound(&SchreierIndex::new(alpha), n)? == *d)
}

/// Plain sup norm, re-exported for callers comparing with
/// [`small_sup_combination`].
pub fn coordinate_sup(x: &SchreierVector) -> Q {
    sup_norm(x)
}
