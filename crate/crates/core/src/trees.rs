//! Trees on a set: finite sets of sequences ordered by end-extension.
//! Derivation and order, minimal trees `T_α`, replacement trees
//! `T(α,β)` and `T(α,s)`, restricted subtrees, block trees and gluing.

use crate::bounds::bounds;
use crate::error::{Error, Result};
use crate::ord::{Kind, Ordinal};
use crate::rat::{fmt_q, Q};
use crate::schreier::SchreierIndex;
use crate::seqcheck::{analyze, concat_bound, AmbientSpace};
use crate::xnorm::SchreierVector;
use num_traits::{One, Zero};
use serde_json::{json, Value};
use std::collections::{BTreeMap, BTreeSet, HashMap};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Payload {
    Vector(SchreierVector),
    Token(String),
}

impl Payload {
    pub fn as_vector(&self) -> Option<&SchreierVector> {
        match self {
            Payload::Vector(v) => Some(v),
            Payload::Token(_) => None,
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Payload::Vector(v) => v.to_json(),
            Payload::Token(t) => json!(t),
        }
    }

    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::String(s) => Ok(Payload::Token(s.clone())),
            _ => Ok(Payload::Vector(SchreierVector::from_json(v)?)),
        }
    }
}

pub type Node = Vec<Payload>;

/// `a ≤ b` in the end-extension order.
pub fn node_le(a: &[Payload], b: &[Payload]) -> bool {
    a.len() <= b.len() && b.starts_with(a)
}

pub fn node_lt(a: &[Payload], b: &[Payload]) -> bool {
    a.len() < b.len() && b.starts_with(a)
}

/// A finite tree on a set. Not necessarily closed under prefixes; the
/// empty sequence is allowed and then serves as the root.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IndexTree {
    nodes: BTreeSet<Node>,
}

impl IndexTree {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_nodes(nodes: impl IntoIterator<Item = Node>) -> Self {
        IndexTree {
            nodes: nodes.into_iter().collect(),
        }
    }

    pub fn insert(&mut self, n: Node) -> bool {
        self.nodes.insert(n)
    }

    pub fn contains(&self, n: &[Payload]) -> bool {
        self.nodes.contains(n)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter()
    }

    pub fn is_subtree_of(&self, t: &IndexTree) -> bool {
        self.nodes.is_subset(&t.nodes)
    }

    /// Nodes that are proper prefixes of some other node.
    fn nonterminal(&self) -> BTreeSet<Node> {
        let mut out = BTreeSet::new();
        for y in &self.nodes {
            for l in 0..y.len() {
                if !out.contains(&y[..l]) && self.nodes.contains(&y[..l]) {
                    out.insert(y[..l].to_vec());
                }
            }
        }
        out
    }

    pub fn terminal_nodes(&self) -> Vec<&Node> {
        let nt = self.nonterminal();
        self.nodes.iter().filter(|x| !nt.contains(*x)).collect()
    }

    /// The predecessor node: the longest proper prefix present in the tree.
    pub fn predecessor(&self, x: &[Payload]) -> Option<&Node> {
        (0..x.len()).rev().find_map(|l| self.nodes.get(&x[..l]))
    }

    pub fn initial_nodes(&self) -> Vec<&Node> {
        self.nodes.iter().filter(|x| self.predecessor(x).is_none()).collect()
    }

    pub fn immediate_successors(&self, x: &[Payload]) -> Vec<&Node> {
        self.nodes
            .iter()
            .filter(|y| node_lt(x, y) && self.predecessor(y).map(Vec::as_slice) == Some(x))
            .collect()
    }

    /// `D(T)`: the tree minus its terminal nodes.
    pub fn derive(&self) -> IndexTree {
        IndexTree {
            nodes: self.nonterminal(),
        }
    }

    /// Least `n` with `D^n(T) = ∅`.
    pub fn order_finite(&self) -> u64 {
        let mut t = self.clone();
        let mut n = 0;
        while !t.is_empty() {
            t = t.derive();
            n += 1;
        }
        n
    }

    pub fn to_json(&self) -> Value {
        let nodes: Vec<Value> = self
            .nodes
            .iter()
            .map(|n| json!({ "seq": n.iter().map(Payload::to_json).collect::<Vec<_>>() }))
            .collect();
        json!({ "nodes": nodes })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = || Error::Parse("tree JSON must be {\"nodes\": [{\"seq\": [payload, ...]}, ...]}".into());
        let arr = v.get("nodes").and_then(Value::as_array).ok_or_else(bad)?;
        let mut t = IndexTree::new();
        for n in arr {
            let seq = n.get("seq").and_then(Value::as_array).ok_or_else(bad)?;
            t.insert(seq.iter().map(Payload::from_json).collect::<Result<_>>()?);
        }
        Ok(t)
    }

    /// `Tree(S_α ∩ 2^{[1,N]})`: admissible sets as increasing sequences of
    /// tokens, rooted at the empty set.
    pub fn schreier(alpha: &SchreierIndex, n: u32) -> Result<IndexTree> {
        Ok(IndexTree::from_nodes(
            alpha
                .enumerate(n)?
                .into_iter()
                .map(|f| f.elems().iter().map(|i| Payload::Token(i.to_string())).collect()),
        ))
    }

    /// A chain `(x_1) < (x_1,x_2) < …` of the given vectors.
    pub fn chain(vs: &[SchreierVector]) -> IndexTree {
        IndexTree::from_nodes((1..=vs.len()).map(|k| vs[..k].iter().cloned().map(Payload::Vector).collect()))
    }

    fn vectors(node: &[Payload]) -> Result<Vec<SchreierVector>> {
        node.iter()
            .map(|p| p.as_vector().cloned().ok_or_else(|| Error::pre("node payloads must be vectors")))
            .collect()
    }
}

struct Fresh(usize);

impl Fresh {
    fn token(&mut self) -> Payload {
        self.0 += 1;
        Payload::Token(format!("t{}", self.0))
    }
}

fn node_budget(count: usize) -> Result<()> {
    let limit = bounds().tree_nodes;
    if count > limit {
        return Err(Error::BoundExceeded {
            what: "tree nodes",
            value: count,
            limit,
        });
    }
    Ok(())
}

/// Limit stages use the successor ordinals `α[n] + 1`, `n = 1..=breadth`.
fn stages(alpha: &Ordinal, breadth: u64) -> Result<Vec<Ordinal>> {
    (1..=breadth).map(|n| Ok(alpha.fundamental(n)?.succ())).collect()
}

fn build_minimal(alpha: &Ordinal, depth: u64, breadth: u64, fresh: &mut Fresh, out: &mut Vec<Node>) -> Result<()> {
    if depth == 0 {
        return Ok(());
    }
    match alpha.classify() {
        Kind::Zero => {}
        Kind::Successor => {
            let z = fresh.token();
            out.push(vec![z.clone()]);
            let mut sub = Vec::new();
            build_minimal(&alpha.predecessor().expect("successor"), depth - 1, breadth, fresh, &mut sub)?;
            out.extend(sub.into_iter().map(|s| std::iter::once(z.clone()).chain(s).collect()));
        }
        Kind::Limit => {
            for a in stages(alpha, breadth)? {
                build_minimal(&a, depth, breadth, fresh, out)?;
            }
        }
    }
    node_budget(out.len())
}

/// Truncation of `T_α`: successor stages prepend a root, limit stages take
/// the disjoint union of `T_{α[n]+1}` for `n ≤ breadth`; nodes deeper than
/// `depth` are cut. Exact for finite `α ≤ depth`.
pub fn minimal_tree(alpha: &Ordinal, depth: u64, breadth: u64) -> Result<IndexTree> {
    let mut out = Vec::new();
    build_minimal(alpha, depth, breadth, &mut Fresh(0), &mut out)?;
    Ok(IndexTree::from_nodes(out))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Replace {
    Ordinal(Ordinal),
    /// the infinitely branching `s`
    S,
}

/// The defining map of a replacement tree `T(α,β) → T_α`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ReplacementMap {
    pub assignment: BTreeMap<Node, Node>,
}

impl ReplacementMap {
    pub fn is_order_preserving(&self) -> bool {
        let entries: Vec<(&Node, &Node)> = self.assignment.iter().collect();
        entries
            .iter()
            .all(|(a, fa)| entries.iter().all(|(b, fb)| !node_le(a, b) || node_le(fa, fb)))
    }

    /// `f^{-1}(x)`.
    pub fn preimage(&self, x: &[Payload]) -> IndexTree {
        IndexTree::from_nodes(
            self.assignment
                .iter()
                .filter(|(_, fx)| fx.as_slice() == x)
                .map(|(a, _)| a.clone()),
        )
    }
}

#[derive(Clone, Debug)]
pub struct Replacement {
    pub tree: IndexTree,
    /// for `T(α,β)`: the map onto `T_α` and `T_α` itself
    pub map: Option<(ReplacementMap, IndexTree)>,
    /// for `T(α,s)`: every s-node, its elements listed in ψ-order
    pub s_nodes: Vec<Vec<Node>>,
}

fn relabel(node: &[Payload], table: &mut HashMap<Payload, Payload>, fresh: &mut Fresh) -> Node {
    node.iter()
        .map(|p| table.entry(p.clone()).or_insert_with(|| fresh.token()).clone())
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn attach(
    x: &Node,
    prefix: &Node,
    ta: &IndexTree,
    tb: &IndexTree,
    single: &dyn Fn(&Node) -> bool,
    breadth: u64,
    fresh: &mut Fresh,
    out: &mut ReplacementMap,
) -> Result<()> {
    let copies = if single(x) { 1 } else { breadth };
    let terminals: Vec<&Node> = tb.terminal_nodes();
    for _ in 0..copies {
        let mut table = HashMap::new();
        for b in tb.nodes() {
            let n: Node = prefix.iter().cloned().chain(relabel(b, &mut table, fresh)).collect();
            out.assignment.insert(n, x.clone());
        }
        node_budget(out.assignment.len())?;
        for term in &terminals {
            let p: Node = prefix.iter().cloned().chain(relabel(term, &mut table, fresh)).collect();
            for y in ta.immediate_successors(x) {
                attach(y, &p, ta, tb, single, breadth, fresh, out)?;
            }
        }
    }
    Ok(())
}

fn build_s(alpha: &Ordinal, depth: u64, breadth: u64, fresh: &mut Fresh, out: &mut Vec<Node>) -> Result<()> {
    if depth == 0 {
        return Ok(());
    }
    match alpha.classify() {
        Kind::Zero => {}
        Kind::Successor => {
            let pred = alpha.predecessor().expect("successor");
            for _ in 0..breadth {
                let z = fresh.token();
                out.push(vec![z.clone()]);
                let mut sub = Vec::new();
                build_s(&pred, depth - 1, breadth, fresh, &mut sub)?;
                out.extend(sub.into_iter().map(|s| std::iter::once(z.clone()).chain(s).collect()));
                node_budget(out.len())?;
            }
        }
        Kind::Limit => {
            for a in stages(alpha, breadth)? {
                build_s(&a, depth, breadth, fresh, out)?;
            }
        }
    }
    Ok(())
}

/// Truncated replacement trees. `T(α,β)` replaces every node `x` of `T_α`
/// by one copy of `T_β` (when `β` is finite, or `x` is the unique initial
/// node of a successor `α`) or by `breadth` incomparable copies, each
/// terminal node of a copy leading on to the copies for the successors of
/// `x`. `T(α,s)` puts `breadth` incomparable nodes at every stage.
pub fn replacement_tree(alpha: &Ordinal, with: &Replace, depth: u64, breadth: u64) -> Result<Replacement> {
    match with {
        Replace::Ordinal(beta) => {
            let ta = minimal_tree(alpha, depth, breadth)?;
            let tb = minimal_tree(beta, depth, breadth)?;
            let unique_root = !alpha.is_limit() && ta.initial_nodes().len() == 1;
            let roots: Vec<Node> = ta.initial_nodes().into_iter().cloned().collect();
            let beta_finite = beta.is_finite();
            let single = move |x: &Node| beta_finite || (unique_root && roots.first() == Some(x));
            let mut map = ReplacementMap::default();
            let mut fresh = Fresh(0);
            for x in ta.initial_nodes() {
                attach(x, &Vec::new(), &ta, &tb, &single, breadth, &mut fresh, &mut map)?;
            }
            Ok(Replacement {
                tree: IndexTree::from_nodes(map.assignment.keys().cloned()),
                map: Some((map, ta)),
                s_nodes: Vec::new(),
            })
        }
        Replace::S => {
            let mut out = Vec::new();
            build_s(alpha, depth, breadth, &mut Fresh(0), &mut out)?;
            // group immediate successors in materialization order
            let mut groups: Vec<(Node, Vec<Node>)> = Vec::new();
            for n in &out {
                let parent = n[..n.len() - 1].to_vec();
                match groups.iter_mut().find(|(p, _)| *p == parent) {
                    Some((_, g)) => g.push(n.clone()),
                    None => groups.push((parent, vec![n.clone()])),
                }
            }
            Ok(Replacement {
                tree: IndexTree::from_nodes(out),
                map: None,
                s_nodes: groups.into_iter().map(|(_, g)| g).collect(),
            })
        }
    }
}

/// `R(T′)`: each node `z` of `T′` is cut just past the `T`-predecessor of
/// the initial node of `T′` below `z`.
pub fn restrict(tprime: &IndexTree, t: &IndexTree) -> Result<IndexTree> {
    if !tprime.is_subtree_of(t) {
        return Err(Error::pre("T' is not a subtree of T"));
    }
    let mut out = IndexTree::new();
    for z in tprime.nodes() {
        let y = (0..=z.len())
            .find(|&l| tprime.contains(&z[..l]))
            .expect("z itself is in T'");
        let k = t.predecessor(&z[..y]).map_or(0, Vec::len);
        out.insert(z[k..].to_vec());
    }
    Ok(out)
}

/// Coefficients of `y` in the basis `xs`, if `y` is in their span and they
/// are independent.
fn express(y: &SchreierVector, xs: &[SchreierVector]) -> Option<Vec<Q>> {
    let mut coords: BTreeSet<u32> = y.support().into_iter().collect();
    for x in xs {
        coords.extend(x.support());
    }
    let m = xs.len();
    // augmented rows: one per coordinate
    let mut rows: Vec<Vec<Q>> = coords
        .iter()
        .map(|&c| xs.iter().map(|x| x.get(c)).chain(std::iter::once(y.get(c))).collect())
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..m {
        let p = (r..rows.len()).find(|&i| !rows[i][col].is_zero())?;
        rows.swap(r, p);
        let pv = rows[r][col].clone();
        for v in rows[r].iter_mut() {
            *v /= &pv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][col].is_zero() {
                let f = rows[i][col].clone();
                let pr = rows[r].clone();
                for (v, w) in rows[i].iter_mut().zip(&pr) {
                    *v -= &f * w;
                }
            }
        }
        pivots.push(r);
        r += 1;
    }
    if rows[r..].iter().any(|row| !row[m].is_zero()) {
        return None;
    }
    Some(pivots.iter().map(|&i| rows[i][m].clone()).collect())
}

/// If `ys` is a normalized block basis of `xs`, the first index of each
/// block.
fn block_starts(ys: &[SchreierVector], xs: &[SchreierVector], space: &AmbientSpace) -> Result<Option<Vec<usize>>> {
    let mut starts = Vec::with_capacity(ys.len());
    let mut last: Option<usize> = None;
    for y in ys {
        if !space.norm(y)?.is_one() {
            return Ok(None);
        }
        let Some(c) = express(y, xs) else { return Ok(None) };
        let first = c.iter().position(|a| !a.is_zero()).expect("y is nonzero");
        let end = c.iter().rposition(|a| !a.is_zero()).expect("y is nonzero");
        if last.is_some_and(|l| first <= l) {
            return Ok(None);
        }
        starts.push(first);
        last = Some(end);
    }
    Ok(Some(starts))
}

/// Whether `S ⪯ T`: some subtree `T′ ⊂ T` is isomorphic to `S` by a map
/// sending each node to a normalized block basis of it, compatibly with
/// prefixes. Backtracking over assignments of `S`-nodes to `T`-nodes.
pub fn is_block_tree(s: &IndexTree, t: &IndexTree, space: &AmbientSpace) -> Result<bool> {
    let snodes: Vec<&Node> = {
        let mut v: Vec<&Node> = s.nodes().collect();
        v.sort_by_key(|n| n.len());
        v
    };
    let tnodes: Vec<&Node> = t.nodes().collect();
    let svec: Vec<Vec<SchreierVector>> = snodes.iter().map(|n| IndexTree::vectors(n)).collect::<Result<_>>()?;
    let tvec: Vec<Vec<SchreierVector>> = tnodes.iter().map(|n| IndexTree::vectors(n)).collect::<Result<_>>()?;
    // candidate images with the block starts of each
    let mut cands: Vec<Vec<(usize, Vec<usize>)>> = Vec::with_capacity(snodes.len());
    for ys in &svec {
        let mut c = Vec::new();
        for (j, xs) in tvec.iter().enumerate() {
            if let Some(st) = block_starts(ys, xs, space)? {
                c.push((j, st));
            }
        }
        if c.is_empty() {
            return Ok(false);
        }
        cands.push(c);
    }
    let mut assign: Vec<usize> = Vec::with_capacity(snodes.len());
    Ok(search(0, &snodes, &tnodes, &cands, &mut assign))
}

fn search(
    i: usize,
    snodes: &[&Node],
    tnodes: &[&Node],
    cands: &[Vec<(usize, Vec<usize>)>],
    assign: &mut Vec<usize>,
) -> bool {
    if i == snodes.len() {
        return true;
    }
    'cand: for (j, starts) in &cands[i] {
        let t = tnodes[*j];
        for (p, &tj) in assign.iter().enumerate() {
            let (sp, tp) = (snodes[p], tnodes[tj]);
            if tj == *j || node_lt(sp, snodes[i]) != node_lt(tp, t) || node_lt(snodes[i], sp) != node_lt(t, tp) {
                continue 'cand;
            }
            // the blocks past an assigned prefix lie past its image
            if node_lt(sp, snodes[i]) && starts.get(sp.len()).is_some_and(|&st| st < tp.len()) {
                continue 'cand;
            }
        }
        assign.push(*j);
        if search(i + 1, snodes, tnodes, cands, assign) {
            return true;
        }
        assign.pop();
    }
    false
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JunctionBound {
    /// ℓ1 constants `min_{Σ|a|=1} ‖Σ a x‖` of the two parts
    pub head_l1: Q,
    pub tail_l1: Q,
    /// `C = 4/(δ−2ε)` from the concatenation criterion
    pub concat: Q,
    /// the resulting bound `2·C·max(1/c_head, 1/c_tail)` on `1/c` of the node
    pub derived_k: Q,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GluedNode {
    pub node: Node,
    pub l1_constant: Q,
    pub junction: Option<JunctionBound>,
}

#[derive(Clone, Debug)]
pub struct GlueReport {
    pub tree: IndexTree,
    pub order: u64,
    pub nodes: Vec<GluedNode>,
}

impl GlueReport {
    pub fn to_json(&self) -> Value {
        json!({
            "order": self.order,
            "tree": self.tree.to_json(),
            "nodes": self.nodes.iter().map(|g| json!({
                "length": g.node.len(),
                "l1_constant": fmt_q(&g.l1_constant),
                "junction": g.junction.as_ref().map(|j| json!({
                    "head_l1": fmt_q(&j.head_l1),
                    "tail_l1": fmt_q(&j.tail_l1),
                    "concat_bound": fmt_q(&j.concat),
                    "derived_k": fmt_q(&j.derived_k),
                })),
            })).collect::<Vec<_>>(),
        })
    }
}

fn support_range(t: &IndexTree) -> Option<(u32, u32)> {
    let mut r: Option<(u32, u32)> = None;
    for n in t.nodes() {
        for p in n {
            if let Some(v) = p.as_vector() {
                if let (Some(a), Some(b)) = (v.min_support(), v.max_support()) {
                    r = Some(r.map_or((a, b), |(x, y)| (x.min(a), y.max(b))));
                }
            }
        }
    }
    r
}

fn shift_tree(t: &IndexTree, offset: u32) -> IndexTree {
    IndexTree::from_nodes(t.nodes().map(|n| {
        n.iter()
            .map(|p| match p {
                Payload::Vector(v) => Payload::Vector(v.shifted(offset)),
                other => other.clone(),
            })
            .collect()
    }))
}

/// Extend every terminal node `z` of `S` by a copy of `T` shifted past
/// `max supp(z)`; see [`glue_copies`].
pub fn glue(s: &IndexTree, t: &IndexTree, space: &AmbientSpace) -> Result<GlueReport> {
    let min_t = support_range(t).map(|r| r.0);
    let copies: Vec<(Node, IndexTree)> = s
        .terminal_nodes()
        .into_iter()
        .map(|z| {
            let top = IndexTree::vectors(z)?.iter().filter_map(SchreierVector::max_support).max().unwrap_or(0);
            let offset = match min_t {
                Some(m) if m <= top => top - m + 1,
                _ => 0,
            };
            Ok((z.clone(), shift_tree(t, offset)))
        })
        .collect::<Result<_>>()?;
    glue_copies(s, &copies, space)
}

/// `⋃_z S(z)` with `S(z) = {z⌢y : y ∈ T(z)} ∪ {x ∈ S : x ≤ z}`, every
/// node's ℓ1 constant computed exactly, and for nodes crossing a junction
/// the bound obtained from the concatenation criterion with `k = max
/// supp(z)`.
pub fn glue_copies(s: &IndexTree, copies: &[(Node, IndexTree)], space: &AmbientSpace) -> Result<GlueReport> {
    let mut tree = s.clone();
    let mut junctions: BTreeMap<Node, (usize, u32)> = BTreeMap::new();
    for (z, tz) in copies {
        if !s.contains(z) {
            return Err(Error::pre("glued copy attached to a node outside S"));
        }
        let zv = IndexTree::vectors(z)?;
        let k = zv.iter().filter_map(SchreierVector::max_support).max().unwrap_or(0);
        for y in tz.nodes() {
            let n: Node = z.iter().chain(y.iter()).cloned().collect();
            junctions.insert(n.clone(), (z.len(), k));
            tree.insert(n);
        }
    }
    node_budget(tree.len())?;
    let mut nodes = Vec::new();
    for n in tree.nodes() {
        if n.is_empty() {
            continue;
        }
        let v = IndexTree::vectors(n)?;
        let c = analyze(&v, space)?.l1_constant;
        let junction = match junctions.get(n) {
            Some(&(zl, k)) if zl > 0 && zl < v.len() => {
                let (head, tail) = v.split_at(zl);
                let cb = concat_bound(head, tail, k, space).map_err(|e| match e {
                    Error::Precondition(m) => Error::pre(format!("support collision: {m}")),
                    other => other,
                })?;
                let hc = analyze(head, space)?.l1_constant;
                let tc = analyze(tail, space)?.l1_constant;
                let kmax = hc.recip().max(tc.recip());
                Some(JunctionBound {
                    derived_k: Q::from_integer(2.into()) * &cb.bound * kmax,
                    head_l1: hc,
                    tail_l1: tc,
                    concat: cb.bound,
                })
            }
            _ => None,
        };
        nodes.push(GluedNode {
            node: n.clone(),
            l1_constant: c,
            junction,
        });
    }
    Ok(GlueReport {
        order: tree.order_finite(),
        tree,
        nodes,
    })
}
