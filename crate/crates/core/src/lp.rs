//! Exact linear programming over the rationals: dense two-phase simplex
//! with Bland's anti-cycling rule.

use crate::rat::Q;
use num_traits::{One, Signed, Zero};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpResult {
    Optimal { x: Vec<Q>, value: Q },
    Infeasible,
    Unbounded,
}

impl LpResult {
    pub fn optimal(self) -> Option<(Vec<Q>, Q)> {
        match self {
            LpResult::Optimal { x, value } => Some((x, value)),
            _ => None,
        }
    }
}

/// A linear program over `n` variables, nonnegative unless marked free.
#[derive(Clone, Debug)]
pub struct Lp {
    n: usize,
    free: Vec<bool>,
    objective: Vec<Q>,
    maximize: bool,
    rows: Vec<(Vec<Q>, Cmp, Q)>,
}

impl Lp {
    pub fn new(n: usize) -> Lp {
        Lp {
            n,
            free: vec![false; n],
            objective: vec![Q::zero(); n],
            maximize: true,
            rows: Vec::new(),
        }
    }

    pub fn set_free(&mut self, j: usize) -> &mut Self {
        self.free[j] = true;
        self
    }

    pub fn maximize(&mut self, c: Vec<Q>) -> &mut Self {
        assert_eq!(c.len(), self.n);
        self.objective = c;
        self.maximize = true;
        self
    }

    pub fn minimize(&mut self, c: Vec<Q>) -> &mut Self {
        assert_eq!(c.len(), self.n);
        self.objective = c;
        self.maximize = false;
        self
    }

    pub fn constraint(&mut self, a: Vec<Q>, cmp: Cmp, b: Q) -> &mut Self {
        assert_eq!(a.len(), self.n);
        self.rows.push((a, cmp, b));
        self
    }

    pub fn solve(&self) -> LpResult {
        Tableau::build(self).run(self)
    }
}

struct Tableau {
    /// rows of `[A | b]`
    t: Vec<Vec<Q>>,
    basis: Vec<usize>,
    ncols: usize,
    /// first artificial column; columns at or after it are artificial
    art_start: usize,
    /// column of each original variable's positive and negative part
    pos_col: Vec<usize>,
    neg_col: Vec<Option<usize>>,
}

impl Tableau {
    fn build(lp: &Lp) -> Tableau {
        let mut pos_col = Vec::with_capacity(lp.n);
        let mut neg_col = Vec::with_capacity(lp.n);
        let mut c = 0;
        for j in 0..lp.n {
            pos_col.push(c);
            c += 1;
            if lp.free[j] {
                neg_col.push(Some(c));
                c += 1;
            } else {
                neg_col.push(None);
            }
        }
        // normalise to nonnegative right-hand sides
        let rows: Vec<(Vec<Q>, Cmp, Q)> = lp
            .rows
            .iter()
            .map(|(a, cmp, b)| {
                if b.is_negative() {
                    let flip = match cmp {
                        Cmp::Le => Cmp::Ge,
                        Cmp::Ge => Cmp::Le,
                        Cmp::Eq => Cmp::Eq,
                    };
                    (a.iter().map(|x| -x).collect(), flip, -b)
                } else {
                    (a.clone(), *cmp, b.clone())
                }
            })
            .collect();
        let n_slack = rows.iter().filter(|r| r.1 != Cmp::Eq).count();
        let n_art = rows.iter().filter(|r| r.1 != Cmp::Le).count();
        let slack_start = c;
        let art_start = slack_start + n_slack;
        let ncols = art_start + n_art;
        let mut t = Vec::with_capacity(rows.len());
        let mut basis = Vec::with_capacity(rows.len());
        let (mut s, mut a) = (slack_start, art_start);
        for (coef, cmp, b) in rows {
            let mut row = vec![Q::zero(); ncols + 1];
            for j in 0..lp.n {
                if coef[j].is_zero() {
                    continue;
                }
                row[pos_col[j]] = coef[j].clone();
                if let Some(nc) = neg_col[j] {
                    row[nc] = -coef[j].clone();
                }
            }
            row[ncols] = b;
            match cmp {
                Cmp::Le => {
                    row[s] = Q::one();
                    basis.push(s);
                    s += 1;
                }
                Cmp::Ge => {
                    row[s] = -Q::one();
                    s += 1;
                    row[a] = Q::one();
                    basis.push(a);
                    a += 1;
                }
                Cmp::Eq => {
                    row[a] = Q::one();
                    basis.push(a);
                    a += 1;
                }
            }
            t.push(row);
        }
        Tableau {
            t,
            basis,
            ncols,
            art_start,
            pos_col,
            neg_col,
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[r][c].clone();
        for x in self.t[r].iter_mut() {
            if !x.is_zero() {
                *x /= &p;
            }
        }
        let prow = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, y) in row.iter_mut().zip(&prow) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Maximise `cost·x` over columns `< allowed`. Returns false if unbounded.
    fn simplex(&mut self, cost: &[Q], allowed: usize) -> bool {
        loop {
            // reduced costs d_j = c_j - c_B·column_j; Bland: first improving column
            let mut enter = None;
            for j in 0..allowed {
                if self.basis.contains(&j) {
                    continue;
                }
                let mut d = cost[j].clone();
                for (i, row) in self.t.iter().enumerate() {
                    let cb = &cost[self.basis[i]];
                    if !cb.is_zero() && !row[j].is_zero() {
                        d -= cb * &row[j];
                    }
                }
                if d.is_positive() {
                    enter = Some(j);
                    break;
                }
            }
            let Some(j) = enter else {
                return true;
            };
            let mut leave: Option<(usize, Q)> = None;
            for (i, row) in self.t.iter().enumerate() {
                if !row[j].is_positive() {
                    continue;
                }
                let ratio = &row[self.ncols] / &row[j];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            match leave {
                None => return false,
                Some((i, _)) => self.pivot(i, j),
            }
        }
    }

    fn run(mut self, lp: &Lp) -> LpResult {
        if self.art_start < self.ncols {
            let mut cost = vec![Q::zero(); self.ncols];
            for c in cost.iter_mut().skip(self.art_start) {
                *c = -Q::one();
            }
            self.simplex(&cost, self.ncols);
            let infeas: Q = self
                .basis
                .iter()
                .zip(&self.t)
                .filter(|(b, _)| **b >= self.art_start)
                .map(|(_, row)| row[self.ncols].clone())
                .sum();
            if infeas.is_positive() {
                return LpResult::Infeasible;
            }
            // drive zero-level artificials out of the basis, dropping redundant rows
            let mut i = 0;
            while i < self.t.len() {
                if self.basis[i] >= self.art_start {
                    match (0..self.art_start).find(|&j| !self.t[i][j].is_zero()) {
                        Some(j) => {
                            self.pivot(i, j);
                            i += 1;
                        }
                        None => {
                            self.t.remove(i);
                            self.basis.remove(i);
                        }
                    }
                } else {
                    i += 1;
                }
            }
        }
        let sign = if lp.maximize { Q::one() } else { -Q::one() };
        let mut cost = vec![Q::zero(); self.ncols];
        for j in 0..lp.n {
            let c = &lp.objective[j] * &sign;
            if let Some(nc) = self.neg_col[j] {
                cost[nc] = -c.clone();
            }
            cost[self.pos_col[j]] = c;
        }
        if !self.simplex(&cost, self.art_start) {
            return LpResult::Unbounded;
        }
        let mut col_val = vec![Q::zero(); self.ncols];
        for (i, b) in self.basis.iter().enumerate() {
            col_val[*b] = self.t[i][self.ncols].clone();
        }
        let x: Vec<Q> = (0..lp.n)
            .map(|j| {
                let p = col_val[self.pos_col[j]].clone();
                match self.neg_col[j] {
                    Some(nc) => p - &col_val[nc],
                    None => p,
                }
            })
            .collect();
        let value = x.iter().zip(&lp.objective).map(|(a, b)| a * b).sum();
        LpResult::Optimal { x, value }
    }
}
