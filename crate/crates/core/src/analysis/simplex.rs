//! Dense two-phase primal simplex with Bland's anti-cycling rule.

const EPS: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

/// `maximize c.x` subject to the constraints and `x >= 0`.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    vars: usize,
    objective: Vec<f64>,
    constraints: Vec<Constraint>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

impl LinearProgram {
    pub fn new(vars: usize) -> Self {
        Self { vars, objective: vec![0.0; vars], constraints: Vec::new() }
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn set_objective(&mut self, var: usize, coeff: f64) {
        self.objective[var] = coeff;
    }

    pub fn add(&mut self, coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) {
        debug_assert!(coeffs.iter().all(|&(j, _)| j < self.vars));
        self.constraints.push(Constraint { coeffs, relation, rhs });
    }

    pub fn solve(&self) -> LpOutcome {
        Tableau::build(self).solve(&self.objective, self.vars)
    }
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    cols: usize,
    /// Columns at or beyond this index are artificial.
    first_artificial: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let m = lp.constraints.len();
        // flip rows so every right-hand side is nonnegative
        let norm: Vec<(f64, Relation)> = lp
            .constraints
            .iter()
            .map(|c| {
                if c.rhs < 0.0 {
                    let r = match c.relation {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    };
                    (-1.0, r)
                } else {
                    (1.0, c.relation)
                }
            })
            .collect();
        let slacks = norm.iter().filter(|(_, r)| *r != Relation::Eq).count();
        let artificials = norm.iter().filter(|(_, r)| *r != Relation::Le).count();
        let first_artificial = lp.vars + slacks;
        let cols = first_artificial + artificials;
        let mut rows = vec![vec![0.0; cols]; m];
        let mut rhs = vec![0.0; m];
        let mut basis = vec![0; m];
        let (mut s, mut a) = (lp.vars, first_artificial);
        for (i, (c, &(sign, rel))) in lp.constraints.iter().zip(&norm).enumerate() {
            for &(j, v) in &c.coeffs {
                rows[i][j] += sign * v;
            }
            rhs[i] = sign * c.rhs;
            match rel {
                Relation::Le => {
                    rows[i][s] = 1.0;
                    basis[i] = s;
                    s += 1;
                }
                Relation::Ge => {
                    rows[i][s] = -1.0;
                    s += 1;
                    rows[i][a] = 1.0;
                    basis[i] = a;
                    a += 1;
                }
                Relation::Eq => {
                    rows[i][a] = 1.0;
                    basis[i] = a;
                    a += 1;
                }
            }
        }
        Self { rows, rhs, basis, cols, first_artificial }
    }

    fn pivot(&mut self, r: usize, c: usize, reduced: &mut [f64], value: &mut f64) {
        let p = self.rows[r][c];
        for v in &mut self.rows[r] {
            *v /= p;
        }
        self.rhs[r] /= p;
        let pivot_row = std::mem::take(&mut self.rows[r]);
        let pivot_rhs = self.rhs[r];
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (x, &y) in row.iter_mut().zip(&pivot_row) {
                    *x -= f * y;
                }
                row[c] = 0.0;
                self.rhs[i] -= f * pivot_rhs;
            }
        }
        let f = reduced[c];
        if f != 0.0 {
            for (x, &y) in reduced.iter_mut().zip(&pivot_row) {
                *x -= f * y;
            }
            reduced[c] = 0.0;
            *value += f * pivot_rhs;
        }
        self.rows[r] = pivot_row;
        self.basis[r] = c;
    }

    /// Maximizes with the given reduced costs over columns `< limit`.
    /// Returns false when unbounded.
    fn optimize(&mut self, reduced: &mut [f64], value: &mut f64, limit: usize) -> bool {
        loop {
            let Some(c) = (0..limit).find(|&j| reduced[j] > EPS) else {
                return true;
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][c];
                if a > EPS {
                    let ratio = self.rhs[i] / a;
                    let better = match leave {
                        None => true,
                        Some((l, best)) => ratio < best - EPS || (ratio <= best + EPS && self.basis[i] < self.basis[l]),
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, c, reduced, value),
                None => return false,
            }
        }
    }

    fn solve(mut self, objective: &[f64], vars: usize) -> LpOutcome {
        let m = self.rows.len();
        // phase 1: maximize -(sum of artificials)
        let mut reduced = vec![0.0; self.cols];
        let mut value = 0.0;
        for j in self.first_artificial..self.cols {
            reduced[j] = -1.0;
        }
        for i in 0..m {
            if self.basis[i] >= self.first_artificial {
                for j in 0..self.cols {
                    reduced[j] += self.rows[i][j];
                }
                value -= self.rhs[i];
            }
        }
        if self.first_artificial < self.cols {
            self.optimize(&mut reduced, &mut value, self.cols);
            let residual: f64 = (0..m).filter(|&i| self.basis[i] >= self.first_artificial).map(|i| self.rhs[i]).sum();
            let scale = 1.0 + self.rhs.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
            if residual > 1e-9 * scale {
                return LpOutcome::Infeasible;
            }
            // drive remaining artificials out of the basis
            for i in 0..m {
                if self.basis[i] >= self.first_artificial {
                    if let Some(c) = (0..self.first_artificial).find(|&j| self.rows[i][j].abs() > 1e-9) {
                        let mut dummy = vec![0.0; self.cols];
                        let mut dv = 0.0;
                        self.pivot(i, c, &mut dummy, &mut dv);
                    }
                }
            }
        }
        // phase 2
        let mut reduced = vec![0.0; self.cols];
        reduced[..vars].copy_from_slice(objective);
        let mut value = 0.0;
        for i in 0..m {
            let cb = if self.basis[i] < vars { objective[self.basis[i]] } else { 0.0 };
            if cb != 0.0 {
                for j in 0..self.cols {
                    reduced[j] -= cb * self.rows[i][j];
                }
                value += cb * self.rhs[i];
            }
        }
        if !self.optimize(&mut reduced, &mut value, self.first_artificial) {
            return LpOutcome::Unbounded;
        }
        let mut x = vec![0.0; vars];
        for i in 0..m {
            if self.basis[i] < vars {
                x[self.basis[i]] = self.rhs[i].max(0.0);
            }
        }
        let value = objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        LpOutcome::Optimal { x, value }
    }
}
