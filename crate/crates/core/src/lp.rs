//! A small exact linear-program solver: two-phase simplex with Bland's rule.
//!
//! Solves `min c·x` subject to `A x <= b` and `x >= 0`.

use crate::time::TimeValue;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { value: TimeValue, x: Vec<TimeValue> },
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, Default)]
pub struct Lp {
    pub vars: usize,
    pub cost: Vec<TimeValue>,
    pub rows: Vec<(Vec<TimeValue>, TimeValue)>,
}

impl Lp {
    pub fn new(vars: usize) -> Self {
        Lp { vars, cost: vec![TimeValue::zero(); vars], rows: Vec::new() }
    }

    /// Adds `Σ coeff·x_var <= rhs`.
    pub fn le(&mut self, terms: &[(usize, TimeValue)], rhs: TimeValue) {
        let mut row = vec![TimeValue::zero(); self.vars];
        for (v, c) in terms {
            row[*v] = &row[*v] + c;
        }
        self.rows.push((row, rhs));
    }

    /// Adds `Σ coeff·x_var >= rhs`.
    pub fn ge(&mut self, terms: &[(usize, TimeValue)], rhs: TimeValue) {
        let neg: Vec<(usize, TimeValue)> = terms.iter().map(|(v, c)| (*v, -c)).collect();
        self.le(&neg, -rhs);
    }

    pub fn solve(&self) -> LpOutcome {
        Tableau::build(self).run(&self.cost)
    }
}

struct Tableau {
    rows: Vec<Vec<TimeValue>>,
    basis: Vec<usize>,
    vars: usize,
    /// Columns of artificial variables start here.
    art: usize,
    width: usize,
}

impl Tableau {
    fn build(lp: &Lp) -> Self {
        let m = lp.rows.len();
        let needs_art: Vec<bool> = lp.rows.iter().map(|(_, b)| b.is_negative()).collect();
        let arts = needs_art.iter().filter(|&&x| x).count();
        let art = lp.vars + m;
        let width = art + arts + 1;
        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut next_art = art;
        for (i, (a, b)) in lp.rows.iter().enumerate() {
            let mut row = vec![TimeValue::zero(); width];
            let sign = if needs_art[i] { TimeValue::from_integer(-1) } else { TimeValue::one() };
            for (j, v) in a.iter().enumerate() {
                row[j] = v * &sign;
            }
            row[lp.vars + i] = sign.clone();
            row[width - 1] = b * &sign;
            if needs_art[i] {
                row[next_art] = TimeValue::one();
                basis.push(next_art);
                next_art += 1;
            } else {
                basis.push(lp.vars + i);
            }
            rows.push(row);
        }
        Tableau { rows, basis, vars: lp.vars, art, width }
    }

    fn rhs(&self) -> usize {
        self.width - 1
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            *v = v.div(&p);
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v = &*v - &(&f * pv);
                }
            }
        }
        self.basis[r] = c;
    }

    /// Runs simplex on `cost` over the allowed columns; false when unbounded.
    fn optimize(&mut self, cost: &[TimeValue], allowed: usize) -> bool {
        loop {
            let mut entering = None;
            for j in 0..allowed {
                if self.basis.contains(&j) {
                    continue;
                }
                let mut reduced = cost[j].clone();
                for (r, row) in self.rows.iter().enumerate() {
                    if !row[j].is_zero() {
                        reduced = &reduced - &(&cost[self.basis[r]] * &row[j]);
                    }
                }
                if reduced.is_negative() {
                    entering = Some(j);
                    break;
                }
            }
            let Some(j) = entering else { return true };
            let rhs = self.rhs();
            let mut leave: Option<(usize, TimeValue)> = None;
            for (r, row) in self.rows.iter().enumerate() {
                if row[j] > 0 {
                    let ratio = row[rhs].div(&row[j]);
                    let better = match &leave {
                        None => true,
                        Some((lr, lv)) => ratio < *lv || (ratio == *lv && self.basis[r] < self.basis[*lr]),
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            let Some((r, _)) = leave else { return false };
            self.pivot(r, j);
        }
    }

    fn run(mut self, cost: &[TimeValue]) -> LpOutcome {
        let all = self.width - 1;
        if self.art < all {
            let mut phase1 = vec![TimeValue::zero(); all];
            for c in phase1.iter_mut().skip(self.art) {
                *c = TimeValue::one();
            }
            self.optimize(&phase1, all);
            let rhs = self.rhs();
            let infeasible = self
                .rows
                .iter()
                .zip(&self.basis)
                .any(|(row, &b)| b >= self.art && !row[rhs].is_zero());
            if infeasible {
                return LpOutcome::Infeasible;
            }
            // drive zero-level artificials out of the basis or drop their rows
            let mut r = 0;
            while r < self.rows.len() {
                if self.basis[r] >= self.art {
                    if let Some(c) = (0..self.art).find(|&c| !self.rows[r][c].is_zero()) {
                        self.pivot(r, c);
                    } else {
                        self.rows.remove(r);
                        self.basis.remove(r);
                        continue;
                    }
                }
                r += 1;
            }
        }
        let mut full = vec![TimeValue::zero(); all];
        full[..self.vars].clone_from_slice(cost);
        if !self.optimize(&full, self.art) {
            return LpOutcome::Unbounded;
        }
        let rhs = self.rhs();
        let mut x = vec![TimeValue::zero(); self.vars];
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            if b < self.vars {
                x[b] = row[rhs].clone();
            }
        }
        let value = x.iter().zip(cost).map(|(xi, ci)| xi * ci).sum();
        LpOutcome::Optimal { value, x }
    }
}
