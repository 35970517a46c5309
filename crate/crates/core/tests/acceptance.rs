//! One line per acceptance criterion. Every check compares the library
//! against an oracle written here, independently of the code under test.

use num_traits::{One, Signed, Zero};
use ordlab::cspace::{self, NodeFunction, StepFunction};
use ordlab::indexlab::{self, Filtration, Inner, StructuredTree};
use ordlab::rat::{fmt_q, q, qi};
use ordlab::seqcheck::{analyze, branch_functional, AmbientSpace, Functional};
use ordlab::trees::{replacement_tree, Payload, Replace};
use ordlab::xnorm::schreier_norm;
use ordlab::{FinSet, Ordinal, SchreierIndex, SchreierVector, Q};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeSet, HashSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

/// Literal iterated derivation: strip terminal nodes until nothing is left.
fn derivation_rounds<T: Ord + Clone>(nodes: &BTreeSet<Vec<T>>) -> u64 {
    let mut cur = nodes.clone();
    let mut rounds = 0;
    while !cur.is_empty() {
        let inner: BTreeSet<Vec<T>> = cur
            .iter()
            .filter(|n| !n.is_empty())
            .map(|n| n[..n.len() - 1].to_vec())
            .collect();
        cur.retain(|n| inner.contains(n));
        rounds += 1;
    }
    rounds
}

fn c1_tree_orders() -> Check {
    for a in 1..=6u64 {
        for b in 1..=6u64 {
            let r = ok(replacement_tree(&Ordinal::finite(a), &Replace::Ordinal(Ordinal::finite(b)), a * b + 2, 1))?;
            let got = r.tree.order_finite();
            let nodes: BTreeSet<Vec<Payload>> = r.tree.nodes().cloned().collect();
            let oracle = derivation_rounds(&nodes);
            ensure(got == a * b && oracle == a * b, || format!("T({a},{b}): order {got}, derivation {oracle}"))?;
        }
    }
    Ok("36 trees, o(T(a,b)) = b·a".into())
}

/// `S_1 ∩ 2^[1..n]` straight from `|F| ≤ min F`.
fn s1_family(n: u32) -> BTreeSet<Vec<u32>> {
    let mut out = BTreeSet::new();
    for mask in 0u32..1 << n {
        let f: Vec<u32> = (1..=n).filter(|i| mask >> (i - 1) & 1 == 1).collect();
        if f.first().is_none_or(|&m| f.len() as u32 <= m) {
            out.insert(f);
        }
    }
    out
}

fn c2_schreier_rank() -> Check {
    for a in 0..=3u64 {
        let idx = SchreierIndex::finite(a);
        let got = ok(idx.node_order(&FinSet::empty()))?;
        let want = Ordinal::omega_pow(&Ordinal::finite(a)).add(&Ordinal::one());
        ensure(got == want, || format!("node_order(∅, {a}) = {got}"))?;
    }
    let idx = SchreierIndex::finite(1);
    let mut prev = 0;
    for n in 1..=12 {
        let got = ok(idx.restricted_order(n))?;
        let oracle = derivation_rounds(&s1_family(n));
        ensure(got == oracle, || format!("restricted_order(1, {n}) = {got}, oracle {oracle}"))?;
        ensure(got >= prev, || format!("restricted_order decreases at {n}"))?;
        prev = got;
    }
    Ok(format!("ω^α+1 for α ≤ 3; restricted orders up to {prev} at N = 12"))
}

fn random_member(idx: &SchreierIndex, rng: &mut ChaCha8Rng) -> Vec<u32> {
    let mut f = vec![rng.gen_range(1..=8)];
    while f.len() < 10 && rng.gen_bool(0.8) {
        let next = f.last().unwrap() + rng.gen_range(1..=3);
        let mut g = f.clone();
        g.push(next);
        if !idx.contains(&FinSet::from_sorted(g.clone())) {
            break;
        }
        f = g;
    }
    f
}

fn c3_family_laws() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let w = Ordinal::omega();
    let alphas = [Ordinal::finite(1), Ordinal::finite(2), Ordinal::finite(3), w.clone(), w.succ()];
    for a in &alphas {
        let idx = SchreierIndex::new(a.clone());
        for _ in 0..10_000 {
            let f = random_member(&idx, &mut rng);
            ensure(idx.contains(&FinSet::from_sorted(f.clone())), || format!("generator left S_{a}"))?;
            let mut g: Vec<u32> = Vec::with_capacity(f.len());
            for &x in &f {
                let lo = g.last().map_or(x, |&p| x.max(p + 1));
                g.push(lo + rng.gen_range(0..=3));
            }
            ensure(idx.contains(&FinSet::from_sorted(g.clone())), || format!("spreading fails in S_{a}: {f:?} → {g:?}"))?;
            let e: Vec<u32> = f.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
            ensure(idx.contains(&FinSet::from_sorted(e.clone())), || format!("hereditary fails in S_{a}: {f:?} ⊇ {e:?}"))?;
        }
        for n in 1..=10u32 {
            let listed: BTreeSet<FinSet> = ok(idx.enumerate(n))?.into_iter().collect();
            let filtered: BTreeSet<FinSet> = (0u32..1 << n)
                .map(|mask| FinSet::from_sorted((1..=n).filter(|i| mask >> (i - 1) & 1 == 1).collect()))
                .filter(|f| idx.contains(f))
                .collect();
            ensure(listed == filtered, || format!("enumerate(S_{a}, {n}) differs from the membership filter"))?;
        }
    }
    Ok("5 indices × 10⁴ spreading and hereditary instances; enumeration exhaustive to N = 10".into())
}

fn random_vector(rng: &mut ChaCha8Rng, max: u32) -> SchreierVector {
    let mut pairs = Vec::new();
    for i in 1..=max {
        if rng.gen_bool(0.6) {
            pairs.push((i, q(rng.gen_range(-6..=6), rng.gen_range(1..=4))));
        }
    }
    SchreierVector::from_pairs(pairs).unwrap()
}

/// `max_G |Σ_{F ⪯ G} c_F|` over every node `G` of `S_α ∩ 2^[1..n]`.
fn brute_cnorm(alpha: &SchreierIndex, n: u32, combo: &[(FinSet, Q)]) -> Q {
    alpha
        .enumerate(n)
        .unwrap()
        .iter()
        .map(|g| {
            combo
                .iter()
                .filter(|(f, _)| f.len() <= g.len() && f.elems() == &g.elems()[..f.len()])
                .map(|(_, c)| c.clone())
                .sum::<Q>()
                .abs()
        })
        .max()
        .unwrap_or_else(Q::zero)
}

/// `max_E |Σ_{i∈E} x_i|` over every admissible `E` inside `[1..n]`.
fn brute_norm(alpha: &SchreierIndex, n: u32, x: &SchreierVector) -> Q {
    alpha.enumerate(n).unwrap().iter().map(|e| x.sum_over(e.elems()).abs()).max().unwrap()
}

fn c4_isometry() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for a in 1..=2u64 {
        let idx = SchreierIndex::finite(a);
        let psi = ok(cspace::build_psi(&idx, 8))?;
        let image_n = psi.image_max();
        for _ in 0..1000 {
            let x = random_vector(&mut rng, 8);
            let u = ok(psi.embed_u(&x))?;
            let c = cspace::cnorm(&u);
            let norm = ok(schreier_norm(&x, &idx))?.value;
            let oracle = brute_norm(&idx, 8, &x);
            ensure(c == norm && norm == oracle, || format!("α={a}, x={x}: cnorm {} vs ‖x‖ {}", fmt_q(&c), fmt_q(&oracle)))?;
        }
        // the chain formula against all nodes of the image range
        for _ in 0..50 {
            let x = random_vector(&mut rng, 8);
            let u = ok(psi.embed_u(&x))?;
            let combo: Vec<(FinSet, Q)> = u.combo().iter().map(|(f, c)| (f.clone(), c.clone())).collect();
            if image_n <= 16 {
                ensure(brute_cnorm(&idx, image_n, &combo) == cspace::cnorm(&u), || "brute image norm differs".into())?;
            }
        }
        let domain: BTreeSet<FinSet> = ok(idx.enumerate(8))?.into_iter().collect();
        let mut range = BTreeSet::new();
        for (g, h) in psi.pairs() {
            ensure(psi.phi(h) == *g, || format!("φψ({g}) = {}", psi.phi(h)))?;
            ensure(idx.contains(h), || format!("ψ({g}) = {h} is not admissible"))?;
            range.insert(psi.phi(h));
        }
        ensure(range == domain, || format!("range of φ differs from S_{a} ∩ [1..8]"))?;
    }
    Ok("2 × 10³ vectors, cnorm(Ux) = ‖x‖; φψ = id; range(φ) = S_α".into())
}

fn c5_monotone() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checked = 0;
    for a in 1..=2u64 {
        let idx = SchreierIndex::finite(a);
        let n = 7;
        let sets = ok(idx.enumerate(n))?;
        let en = ok(cspace::admissible_enumeration(&idx, n))?;
        ensure(en.violation().is_none(), || "enumeration is not admissible".into())?;
        for _ in 0..500 {
            let combo: Vec<(FinSet, Q)> = (0..rng.gen_range(1..=8))
                .map(|_| (sets[rng.gen_range(0..sets.len())].clone(), q(rng.gen_range(-7..=7), rng.gen_range(1..=3))))
                .collect();
            let f = ok(NodeFunction::from_pairs(idx.clone(), combo.clone()))?;
            let prefix = ok(cspace::monotone_check(&f, &en))?;
            ensure(prefix.windows(2).all(|w| w[0] <= w[1]), || "prefix norms decrease".into())?;
            // the last prefix is the whole function, whose norm the brute oracle knows
            let merged: Vec<(FinSet, Q)> = f.combo().iter().map(|(k, v)| (k.clone(), v.clone())).collect();
            let brute = brute_cnorm(&idx, n, &merged);
            ensure(prefix.last().cloned().unwrap_or_else(Q::zero) == brute, || "final prefix norm differs from brute force".into())?;
            checked += 1;
        }
    }
    Ok(format!("{checked} combinations, prefix norms nondecreasing"))
}

fn random_step(rng: &mut ChaCha8Rng) -> StepFunction {
    let w = Ordinal::omega();
    let cuts = rng.gen_range(0..=4u64);
    let mut pieces = Vec::new();
    for c in 0..cuts {
        pieces.push(((Ordinal::finite(c), Ordinal::finite(c + 1)), q(rng.gen_range(-9..=9), 2)));
    }
    pieces.push(((Ordinal::finite(cuts), w.clone()), q(rng.gen_range(-9..=9), 3)));
    StepFunction::new(w, pieces).unwrap()
}

fn c6_rademacher() -> Check {
    for n in 1..=5u32 {
        let rs: Vec<Vec<Q>> = (1..=n).map(|m| cspace::rademacher(m, n).unwrap()).collect();
        // every sign pattern occurs at some point, so ‖Σ a_m r_m‖ = Σ|a_m|
        let patterns: HashSet<Vec<bool>> = (0..1usize << n).map(|j| rs.iter().map(|r| r[j].is_positive()).collect()).collect();
        ensure(patterns.len() == 1 << n, || format!("n={n}: only {} sign patterns", patterns.len()))?;
        let seq: Vec<SchreierVector> = rs
            .iter()
            .map(|r| SchreierVector::from_pairs(r.iter().enumerate().map(|(j, v)| (j as u32 + 1, v.clone()))).unwrap())
            .collect();
        let rep = ok(analyze(&seq, &AmbientSpace::finite_sup(1 << n)))?;
        ensure(rep.l1_constant.is_one(), || format!("n={n}: constant {}", fmt_q(&rep.l1_constant)))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..1000 {
        let f = random_step(&mut rng);
        let a: Vec<Q> = (0..rng.gen_range(1..=4)).map(|_| q(rng.gen_range(-5..=5), 4)).collect();
        let (h, v) = ok(cspace::kappa_iota_sum(&f, &a))?;
        let expect = f.sup_norm() + a.iter().map(Q::abs).sum::<Q>();
        ensure(h.sup_norm() == expect && v == expect, || "κι identity fails".into())?;
    }
    Ok("Rademacher constant 1 for n ≤ 5; 10³ κι identities".into())
}

fn c7_canonical() -> Check {
    let idx = SchreierIndex::finite(1);
    let space = AmbientSpace::Schreier(idx.clone());
    let t = ok(indexlab::canonical_l1_tree(&idx, 8))?;
    let want: Vec<FinSet> = ok(idx.enumerate(8))?.into_iter().filter(|f| !f.is_empty()).collect();
    ensure(t.nodes.len() == want.len(), || "canonical tree misses nodes".into())?;
    for node in &t.nodes {
        let seq: Vec<SchreierVector> = node.set.elems().iter().map(|&i| SchreierVector::unit(i)).collect();
        ensure(node.positive_l1.is_one(), || format!("{}: positive constant {}", node.set, fmt_q(&node.positive_l1)))?;
        ensure(node.l1_constant >= q(1, 2) && node.l1_constant <= qi(1), || format!("{}: ℓ1 constant {}", node.set, fmt_q(&node.l1_constant)))?;
        // lower bounds: the dual functional 1_F sees every unit vector with
        // value 1; splitting any combination into its signs gives 1/2
        ensure(idx.contains(&node.set), || "node set is not admissible".into())?;
        // upper bound: the reported minimizer attains the constant
        let rep = ok(analyze(&seq, &space))?;
        let x = SchreierVector::combination(&rep.l1_witness, &seq);
        let sum: Q = rep.l1_witness.iter().map(Q::abs).sum();
        ensure(sum.is_one() && ok(schreier_norm(&x, &idx))?.value == node.l1_constant, || format!("{}: witness fails", node.set))?;
    }
    Ok(format!("{} nodes: positive constant 1, ℓ1 constant in [1/2, 1]", t.nodes.len()))
}

fn c8_staircase() -> Check {
    let mut lines = Vec::new();
    for m in [2u32, 4, 8] {
        let breadth = if m > 4 { 1 } else { 2 };
        for f in [Filtration::Coordinates, Filtration::InitialNodes] {
            let t = ok(StructuredTree::synthetic(m, breadth, f, 8))?;
            let inner = match f {
                Filtration::Coordinates => Inner::Sup,
                Filtration::InitialNodes => Inner::Norm(t.space.clone()),
            };
            let r = ok(indexlab::staircase(&t, m as usize, f, &inner))?;
            // rebuild x from the node and recompute its norm independently
            let vs: Vec<SchreierVector> = r.node.iter().map(|p| t.vectors[p].clone()).collect();
            let x = SchreierVector::combination(&r.coefficients, &vs);
            ensure(x == r.x && t.tree.contains(&r.node), || "staircase vector is not the stated combination".into())?;
            let norm = match (&t.space, f) {
                (AmbientSpace::Schreier(idx), _) => ok(schreier_norm(&x, idx))?.value,
                (AmbientSpace::NodeBasisSpan { alpha, nodes, .. }, _) => {
                    let g = ok(NodeFunction::from_pairs(
                        alpha.clone(),
                        x.iter().map(|(i, c)| (nodes[i as usize - 1].clone(), c.clone())),
                    ))?;
                    cspace::cnorm(&g)
                }
                _ => return Err("unexpected ambient space".into()),
            };
            let bound = q(2, m as i64);
            ensure(norm == r.value && norm <= bound, || format!("m={m}: ‖x‖ = {} > 2/m", fmt_q(&norm)))?;
            lines.push(format!("{}:{}", if f == Filtration::Coordinates { "P" } else { "Q" }, fmt_q(&norm)));
        }
    }
    Ok(format!("m = 2, 4, 8: {}", lines.join(" ")))
}

/// `min t` over each sign facet by enumerating the vertices of
/// `{(b, t) : ±(M b)_j ≤ t, b ≥ 0, Σ b = 1}`.
fn facet_vertex_min(seq: &[SchreierVector]) -> Q {
    let n = seq.len();
    let coords: Vec<u32> = seq.iter().flat_map(|x| x.support()).collect::<BTreeSet<_>>().into_iter().collect();
    let mut best: Option<Q> = None;
    for mask in 0u32..1 << (n - 1) {
        let sg = |i: usize| if i > 0 && mask >> (i - 1) & 1 == 1 { -Q::one() } else { Q::one() };
        // rows a·(b, t) ≤ c
        let mut rows: Vec<Vec<Q>> = Vec::new();
        for &c in &coords {
            let row: Vec<Q> = (0..n).map(|i| sg(i) * seq[i].get(c)).collect();
            let mut up = row.clone();
            up.push(-Q::one());
            let mut lo: Vec<Q> = row.iter().map(|v| -v).collect();
            lo.push(-Q::one());
            rows.push(up);
            rows.push(lo);
        }
        for i in 0..n {
            let mut r = vec![Q::zero(); n + 1];
            r[i] = -Q::one();
            rows.push(r);
        }
        let mut eq = vec![Q::one(); n];
        eq.push(Q::zero());
        for pick in combinations(rows.len(), n) {
            let mut a: Vec<Vec<Q>> = pick.iter().map(|&k| rows[k].clone()).collect();
            let mut b = vec![Q::zero(); n];
            a.push(eq.clone());
            b.push(Q::one());
            let Some(x) = solve(a, b) else { continue };
            let feasible = rows.iter().all(|r| r.iter().zip(&x).map(|(u, v)| u * v).sum::<Q>() <= Q::zero());
            if feasible {
                let t = x[n].clone();
                best = Some(best.map_or(t.clone(), |bv: Q| bv.min(t)));
            }
        }
    }
    best.expect("a bounded feasible polytope has vertices")
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    go(0, n, k, &mut cur, &mut out);
    out
}

/// Gauss–Jordan on a square system; `None` when singular.
fn solve(mut a: Vec<Vec<Q>>, mut b: Vec<Q>) -> Option<Vec<Q>> {
    let n = b.len();
    for col in 0..n {
        let p = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, p);
        b.swap(col, p);
        let inv = a[col][col].recip();
        for j in col..n {
            a[col][j] = &a[col][j] * &inv;
        }
        b[col] = &b[col] * &inv;
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for j in col..n {
                    let d = &f * &a[col][j];
                    a[r][j] -= d;
                }
                let d = &f * &b[col];
                b[r] -= d;
            }
        }
    }
    Some(b)
}

fn c9_duality() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let idx = SchreierIndex::finite(1);
    let spaces = [AmbientSpace::Schreier(idx.clone()), AmbientSpace::finite_sup(6)];
    let mut branch = 0;
    for s in 0..500 {
        let space = &spaces[s % 2];
        let len = rng.gen_range(1..=6);
        // redraw until linearly independent, which analyze requires
        let (seq, rep) = loop {
            let seq: Vec<SchreierVector> = (0..len)
                .map(|_| loop {
                    let v = random_vector(&mut rng, 6);
                    if !v.is_zero() {
                        let n = space.norm(&v).unwrap();
                        break v.scale(&n.recip());
                    }
                })
                .collect();
            match analyze(&seq, space) {
                Ok(rep) => break (seq, rep),
                Err(ordlab::Error::Precondition(_)) => continue,
                Err(e) => return Err(e.to_string()),
            }
        };
        let p = &rep.positive_l1;
        // primal side: a point of the simplex attaining the value
        let on_simplex = p.primal.iter().all(|a| !a.is_negative()) && p.primal.iter().sum::<Q>().is_one();
        let attained = ok(space.norm(&SchreierVector::combination(&p.primal, &seq)))? == p.value;
        // dual side: a functional of norm ≤ 1 with min_i f(x_i) = value
        let admissible = p.dual.combo.iter().all(|t| match &t.functional {
            Functional::Set(e) => idx.contains(e),
            Functional::Coord(c) => (1..=6).contains(c),
            Functional::Point(_) => false,
        });
        let weight = p.dual.combo.iter().map(|t| t.weight.abs()).sum::<Q>();
        let dual_min = seq.iter().map(|x| p.dual.eval(space, x)).min().unwrap();
        ensure(on_simplex && attained && admissible && weight <= qi(1) && dual_min == p.value, || {
            format!("sequence {s}: primal/dual certificate fails at value {}", fmt_q(&p.value))
        })?;
        if p.value.is_positive() {
            // the branch-functional LP, solved in dual form: ‖f‖* ≤ K and
            // f(x_i) ≥ 1 with K = 1/value, i.e. max-min of f/K is the value
            let k = p.value.recip();
            let f = ok(branch_functional(&seq, &k, space))?;
            let low = seq.iter().map(|x| f.eval(space, x)).min().unwrap();
            ensure(low >= qi(1) && f.total_weight() <= k, || format!("sequence {s}: branch functional too weak"))?;
            branch += 1;
        }
    }
    for trial in 0..24 {
        let n = 1 + trial % 6;
        let d = if n >= 5 { 2 } else { 3 };
        let seq: Vec<SchreierVector> = (0..n)
            .map(|_| loop {
                let v = random_vector(&mut rng, d);
                if !v.is_zero() {
                    break v;
                }
            })
            .collect();
        let r = ok(indexlab::small_sup_combination(&seq))?;
        let oracle = facet_vertex_min(&seq);
        ensure(r.value == oracle, || format!("small-sup {} vs vertex minimum {}", fmt_q(&r.value), fmt_q(&oracle)))?;
    }
    Ok(format!("500 sequences with matching primal and dual ({branch} branch functionals); 24 small-sup LPs"))
}

fn random_ordinal(rng: &mut ChaCha8Rng, depth: u32) -> Ordinal {
    let terms = rng.gen_range(0..=3);
    let mut exps: Vec<Ordinal> = (0..terms)
        .map(|_| if depth == 0 || rng.gen_bool(0.6) { Ordinal::finite(rng.gen_range(0..=3)) } else { random_ordinal(rng, depth - 1) })
        .collect();
    exps.sort();
    exps.dedup();
    exps.reverse();
    Ordinal::from_terms(exps.into_iter().map(|e| (e, rng.gen_range(1..=3))).collect()).unwrap()
}

fn c10_ordinal_identity() -> Check {
    for n in 0..=5u64 {
        for k in 1..=5u64 {
            let (l, r) = indexlab::c0_order_identity(n, k);
            let want = Ordinal::from_terms(vec![(Ordinal::finite(n + 1), k)]).unwrap();
            ensure(l == want && r == want, || format!("n={n}, k={k}: {l} vs {r}"))?;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..2000 {
        let (a, b, c) = (random_ordinal(&mut rng, 2), random_ordinal(&mut rng, 2), random_ordinal(&mut rng, 2));
        ensure(a.add(&b).add(&c) == a.add(&b.add(&c)), || format!("({a}+{b})+{c}"))?;
        ensure(a.mul(&b).mul(&c) == a.mul(&b.mul(&c)), || format!("({a}·{b})·{c}"))?;
        ensure(a.mul(&b.add(&c)) == a.mul(&b).add(&a.mul(&c)), || format!("{a}·({b}+{c})"))?;
        ensure(a.add(&b) >= a && a.add(&b) >= b, || format!("{a}+{b} below a summand"))?;
    }
    for _ in 0..500 {
        let (x, y) = (rng.gen_range(0..50u64), rng.gen_range(0..50u64));
        let (a, b) = (Ordinal::finite(x), Ordinal::finite(y));
        ensure(a.add(&b) == Ordinal::finite(x + y) && a.mul(&b) == Ordinal::finite(x * y), || format!("{x}, {y}"))?;
    }
    Ok("30 identities; 2000 associativity/distributivity triples".into())
}

fn main() {
    let criteria: [(&str, u64, fn() -> Check); 10] = [
        ("tree-order law", 10, c1_tree_orders),
        ("Schreier tree rank", 60, c2_schreier_rank),
        ("family laws", 30, c3_family_laws),
        ("isometric embedding", 120, c4_isometry),
        ("monotone basis", 30, c5_monotone),
        ("Rademacher identities", 60, c6_rademacher),
        ("canonical tree constants", 60, c7_canonical),
        ("staircase bound", 120, c8_staircase),
        ("LP duality", 120, c9_duality),
        ("ordinal identity", 5, c10_ordinal_identity),
    ];
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let r = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        let r = match r {
            Ok(detail) if took > Duration::from_secs(*budget) => Err(format!("{detail}, but over the {budget} s budget")),
            other => other,
        };
        match r {
            Ok(detail) => println!("criterion {:>2} PASS  {name} ({:.2} s): {detail}", i + 1, took.as_secs_f64()),
            Err(e) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} ({:.2} s): {e}", i + 1, took.as_secs_f64());
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all 10 criteria pass");
}
