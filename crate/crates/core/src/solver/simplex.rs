//! Dense-tableau bounded-variable primal simplex.
//!
//! Every row `a x (<=|=|>=) b` becomes `a x + s = b` with the slack bounded
//! accordingly, so the slack columns double as an identity block from which
//! row duals are read at the end. Phase 1 minimizes the sum of artificials
//! that cover rows the starting point violates.

use crate::milp::{MilpModel, Sense};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
    Numerical,
}

#[derive(Debug, Clone)]
pub struct LpResult {
    pub status: LpStatus,
    pub objective: f64,
    /// Structural variable values in model order.
    pub x: Vec<f64>,
    /// One multiplier per row, for the objective `min c x`.
    pub duals: Vec<f64>,
    pub iterations: usize,
}

const PIVOT_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 100;
const STALL_LIMIT: usize = 50;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Pricing {
    Dantzig,
    Bland,
}

struct Tableau {
    m: usize,
    ncol: usize,
    /// Current `B^-1 A`, row major.
    t: Vec<f64>,
    /// Scaled original matrix, for refactorization.
    orig: Vec<f64>,
    rhs: Vec<f64>,
    lo: Vec<f64>,
    up: Vec<f64>,
    x: Vec<f64>,
    basis: Vec<usize>,
    /// Row of a basic column, `usize::MAX` when nonbasic.
    row_of: Vec<usize>,
    cost: Vec<f64>,
    d: Vec<f64>,
    iterations: usize,
    since_refactor: usize,
}

fn pow2_near(v: f64) -> f64 {
    if !(v.is_finite() && v > 0.0) {
        return 1.0;
    }
    2f64.powi(v.log2().round().clamp(-60.0, 60.0) as i32)
}

/// Solves the continuous relaxation of `model` with `bounds` replacing the
/// model's variable bounds. Integrality flags are ignored.
pub fn solve_bounded(model: &MilpModel, bounds: &[(f64, f64)], feas_tol: f64, max_iter: Option<usize>) -> LpResult {
    let n = model.num_vars();
    let m = model.num_rows();
    let ncol = n + 2 * m;

    let mut dense = vec![0.0; m * n];
    for (i, row) in model.constraints().iter().enumerate() {
        for &(v, a) in &row.terms {
            dense[i * n + v.0] += a;
        }
    }

    // Geometric-mean equilibration in powers of two, so scaling is exact.
    let mut row_scale = vec![1.0; m];
    let mut col_scale = vec![1.0; n];
    for _ in 0..6 {
        for i in 0..m {
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for j in 0..n {
                let a = (dense[i * n + j] * col_scale[j]).abs();
                if a > 0.0 {
                    lo = lo.min(a);
                    hi = hi.max(a);
                }
            }
            if hi > 0.0 {
                row_scale[i] = pow2_near(1.0 / (lo * hi).sqrt());
            }
        }
        for j in 0..n {
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for i in 0..m {
                let a = (dense[i * n + j] * row_scale[i]).abs();
                if a > 0.0 {
                    lo = lo.min(a);
                    hi = hi.max(a);
                }
            }
            if hi > 0.0 {
                col_scale[j] = pow2_near(1.0 / (lo * hi).sqrt());
            }
        }
    }

    let mut orig = vec![0.0; m * ncol];
    let mut rhs = vec![0.0; m];
    let mut lo = vec![0.0; ncol];
    let mut up = vec![0.0; ncol];
    for i in 0..m {
        for j in 0..n {
            orig[i * ncol + j] = dense[i * n + j] * row_scale[i] * col_scale[j];
        }
        orig[i * ncol + n + i] = 1.0;
        let row = &model.constraints()[i];
        rhs[i] = row.rhs * row_scale[i];
        let (sl, su) = match row.sense {
            Sense::Le => (0.0, f64::INFINITY),
            Sense::Ge => (f64::NEG_INFINITY, 0.0),
            Sense::Eq => (0.0, 0.0),
        };
        lo[n + i] = sl;
        up[n + i] = su;
    }
    for j in 0..n {
        lo[j] = bounds[j].0 / col_scale[j];
        up[j] = bounds[j].1 / col_scale[j];
        if lo[j] > up[j] {
            return LpResult {
                status: LpStatus::Infeasible,
                objective: f64::NAN,
                x: vec![f64::NAN; n],
                duals: vec![0.0; m],
                iterations: 0,
            };
        }
    }
    let raw_cost: Vec<f64> = (0..n).map(|j| model.objective()[j] * col_scale[j]).collect();
    let cmax = raw_cost.iter().fold(0.0f64, |a, c| a.max(c.abs()));
    let kappa = if cmax > 0.0 { pow2_near(1.0 / cmax) } else { 1.0 };
    let mut cost = vec![0.0; ncol];
    for j in 0..n {
        cost[j] = raw_cost[j] * kappa;
    }

    // Starting point: structurals at a finite bound (0 when free).
    let mut x = vec![0.0; ncol];
    for j in 0..n {
        x[j] = if lo[j].is_finite() {
            lo[j]
        } else if up[j].is_finite() {
            up[j]
        } else {
            0.0
        };
    }
    let mut basis = vec![0; m];
    let mut row_of = vec![usize::MAX; ncol];
    let mut phase1 = vec![0.0; ncol];
    for i in 0..m {
        let mut r = rhs[i];
        for j in 0..n {
            r -= orig[i * ncol + j] * x[j];
        }
        let (sl, su) = (lo[n + i], up[n + i]);
        let art = n + m + i;
        if r >= sl && r <= su {
            x[n + i] = r;
            basis[i] = n + i;
            row_of[n + i] = i;
            lo[art] = 0.0;
            up[art] = 0.0;
        } else {
            let s = if r < sl { sl } else { su };
            x[n + i] = s;
            let sign = if r - s >= 0.0 { 1.0 } else { -1.0 };
            orig[i * ncol + art] = sign;
            x[art] = (r - s).abs();
            lo[art] = 0.0;
            up[art] = f64::INFINITY;
            basis[i] = art;
            row_of[art] = i;
            phase1[art] = 1.0;
        }
    }

    let mut tab = Tableau {
        m,
        ncol,
        t: orig.clone(),
        orig,
        rhs,
        lo,
        up,
        x,
        basis,
        row_of,
        cost: phase1,
        d: vec![0.0; ncol],
        iterations: 0,
        since_refactor: 0,
    };
    let limit = max_iter.unwrap_or(50 * (m + n) + 1000);
    if !tab.refactor() {
        return tab.failure(LpStatus::Numerical, n);
    }

    let needs_phase1 = tab.basis.iter().any(|&b| b >= n + m);
    if needs_phase1 {
        match tab.run(limit) {
            LpStatus::Optimal => {}
            LpStatus::Unbounded => return tab.failure(LpStatus::Numerical, n),
            other => return tab.failure(other, n),
        }
        let infeasibility: f64 = (n + m..ncol).map(|j| tab.x[j]).sum();
        let rhs_scale = tab.rhs.iter().fold(1.0f64, |a, b| a.max(b.abs()));
        if infeasibility > feas_tol * rhs_scale {
            return tab.failure(LpStatus::Infeasible, n);
        }
        tab.drive_out_artificials(n + m);
        for j in n + m..ncol {
            tab.lo[j] = 0.0;
            tab.up[j] = 0.0;
            if tab.row_of[j] == usize::MAX {
                tab.x[j] = 0.0;
            }
        }
    }

    tab.cost = cost;
    if !tab.refactor() {
        return tab.failure(LpStatus::Numerical, n);
    }
    let status = tab.run(limit);
    if status != LpStatus::Optimal {
        return tab.failure(status, n);
    }
    if !tab.refactor() {
        return tab.failure(LpStatus::Numerical, n);
    }

    let mut xs = vec![0.0; n];
    for j in 0..n {
        let v = tab.x[j] * col_scale[j];
        xs[j] = v.clamp(bounds[j].0, bounds[j].1);
    }
    let duals = (0..m).map(|i| -tab.d[n + i] * row_scale[i] / kappa).collect();
    LpResult {
        status: LpStatus::Optimal,
        objective: model.evaluate(&xs),
        x: xs,
        duals,
        iterations: tab.iterations,
    }
}

impl Tableau {
    fn failure(&self, status: LpStatus, n: usize) -> LpResult {
        LpResult {
            status,
            objective: f64::NAN,
            x: vec![f64::NAN; n],
            duals: vec![0.0; self.m],
            iterations: self.iterations,
        }
    }

    /// Recomputes `B^-1 A`, basic values and reduced costs from scratch.
    fn refactor(&mut self) -> bool {
        let (m, ncol) = (self.m, self.ncol);
        self.since_refactor = 0;
        if m == 0 {
            self.d.copy_from_slice(&self.cost);
            return true;
        }
        // Gauss-Jordan on [B | A | rhs] with partial pivoting.
        let w = m + ncol + 1;
        let mut aug = vec![0.0; m * w];
        for i in 0..m {
            for (r, &col) in self.basis.iter().enumerate() {
                aug[i * w + r] = self.orig[i * ncol + col];
            }
            aug[i * w + m..i * w + m + ncol].copy_from_slice(&self.orig[i * ncol..(i + 1) * ncol]);
            aug[i * w + m + ncol] = self.rhs[i];
        }
        for c in 0..m {
            let p = (c..m)
                .max_by(|&a, &b| aug[a * w + c].abs().total_cmp(&aug[b * w + c].abs()))
                .unwrap();
            if aug[p * w + c].abs() < 1e-12 {
                return false;
            }
            if p != c {
                for k in 0..w {
                    aug.swap(p * w + k, c * w + k);
                }
            }
            let inv = 1.0 / aug[c * w + c];
            for k in c..w {
                aug[c * w + k] *= inv;
            }
            let pivot_row: Vec<(usize, f64)> =
                (c..w).filter_map(|k| (aug[c * w + k] != 0.0).then(|| (k, aug[c * w + k]))).collect();
            for i in 0..m {
                if i == c {
                    continue;
                }
                let f = aug[i * w + c];
                if f != 0.0 {
                    for &(k, v) in &pivot_row {
                        aug[i * w + k] -= f * v;
                    }
                }
            }
        }
        for i in 0..m {
            self.t[i * ncol..(i + 1) * ncol].copy_from_slice(&aug[i * w + m..i * w + m + ncol]);
        }
        for i in 0..m {
            let mut v = aug[i * w + m + ncol];
            for j in 0..ncol {
                if self.row_of[j] == usize::MAX && self.x[j] != 0.0 {
                    v -= self.t[i * ncol + j] * self.x[j];
                }
            }
            self.x[self.basis[i]] = v;
        }
        self.reprice();
        true
    }

    fn reprice(&mut self) {
        let (m, ncol) = (self.m, self.ncol);
        self.d.copy_from_slice(&self.cost);
        for i in 0..m {
            let cb = self.cost[self.basis[i]];
            if cb != 0.0 {
                for j in 0..ncol {
                    self.d[j] -= cb * self.t[i * ncol + j];
                }
            }
        }
        for &b in &self.basis {
            self.d[b] = 0.0;
        }
    }

    /// Direction in which moving a nonbasic column improves the objective.
    fn improving_direction(&self, j: usize) -> Option<f64> {
        if self.row_of[j] != usize::MAX || self.lo[j] == self.up[j] {
            return None;
        }
        let dj = self.d[j];
        let at_lower = self.x[j] <= self.lo[j];
        let at_upper = self.x[j] >= self.up[j];
        if dj < -DUAL_TOL && !at_upper {
            Some(1.0)
        } else if dj > DUAL_TOL && !at_lower {
            Some(-1.0)
        } else {
            None
        }
    }

    fn run(&mut self, limit: usize) -> LpStatus {
        let mut pricing = Pricing::Dantzig;
        let mut stalled = 0;
        loop {
            if self.iterations >= limit {
                return LpStatus::IterationLimit;
            }
            if self.since_refactor >= REFACTOR_EVERY && !self.refactor() {
                return LpStatus::Numerical;
            }
            let entering = match pricing {
                Pricing::Dantzig => {
                    let mut best: Option<(usize, f64)> = None;
                    for j in 0..self.ncol {
                        if let Some(dir) = self.improving_direction(j) {
                            let score = self.d[j].abs();
                            if best.is_none_or(|(_, s)| score > s) {
                                best = Some((j, dir));
                            }
                        }
                    }
                    best
                }
                Pricing::Bland => (0..self.ncol).find_map(|j| self.improving_direction(j).map(|d| (j, d))),
            };
            let Some((q, dir)) = entering else {
                return LpStatus::Optimal;
            };

            // Ratio test: basic i moves by -dir * t[i][q] per unit step.
            let ncol = self.ncol;
            let mut step = if self.lo[q].is_finite() && self.up[q].is_finite() {
                self.up[q] - self.lo[q]
            } else {
                f64::INFINITY
            };
            let mut leave: Option<usize> = None;
            let mut leave_alpha = 0.0;
            for i in 0..self.m {
                let alpha = dir * self.t[i * ncol + q];
                if alpha.abs() <= PIVOT_TOL {
                    continue;
                }
                let b = self.basis[i];
                let ratio = if alpha > 0.0 {
                    if !self.lo[b].is_finite() {
                        continue;
                    }
                    ((self.x[b] - self.lo[b]) / alpha).max(0.0)
                } else {
                    if !self.up[b].is_finite() {
                        continue;
                    }
                    ((self.up[b] - self.x[b]) / -alpha).max(0.0)
                };
                let better = if ratio < step - 1e-12 {
                    true
                } else if ratio <= step + 1e-12 {
                    match (leave, pricing) {
                        (Some(_), Pricing::Dantzig) => alpha.abs() > leave_alpha,
                        (Some(l), Pricing::Bland) => b < self.basis[l],
                        // A tie with the bound flip keeps the flip.
                        (None, _) => false,
                    }
                } else {
                    false
                };
                if better {
                    step = ratio;
                    leave = Some(i);
                    leave_alpha = alpha.abs();
                }
            }
            if !step.is_finite() {
                return LpStatus::Unbounded;
            }

            self.iterations += 1;
            if step < 1e-12 {
                stalled += 1;
                if stalled >= STALL_LIMIT {
                    pricing = Pricing::Bland;
                }
            } else {
                stalled = 0;
                pricing = Pricing::Dantzig;
            }

            if step != 0.0 {
                self.x[q] += dir * step;
                for i in 0..self.m {
                    let a = self.t[i * ncol + q];
                    if a != 0.0 {
                        self.x[self.basis[i]] -= dir * step * a;
                    }
                }
            }
            match leave {
                None => {
                    // Bound flip.
                    self.x[q] = if dir > 0.0 { self.up[q] } else { self.lo[q] };
                }
                Some(r) => {
                    let out = self.basis[r];
                    let alpha = dir * self.t[r * ncol + q];
                    self.x[out] = if alpha > 0.0 { self.lo[out] } else { self.up[out] };
                    self.pivot(r, q);
                }
            }
        }
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let ncol = self.ncol;
        let inv = 1.0 / self.t[r * ncol + q];
        for k in 0..ncol {
            self.t[r * ncol + k] *= inv;
        }
        let row: Vec<(usize, f64)> = (0..ncol)
            .filter_map(|k| {
                let v = self.t[r * ncol + k];
                (v != 0.0).then_some((k, v))
            })
            .collect();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.t[i * ncol + q];
            if f != 0.0 {
                for &(k, v) in &row {
                    self.t[i * ncol + k] -= f * v;
                }
                self.t[i * ncol + q] = 0.0;
            }
        }
        let dq = self.d[q];
        if dq != 0.0 {
            for &(k, v) in &row {
                self.d[k] -= dq * v;
            }
        }
        self.d[q] = 0.0;
        let out = self.basis[r];
        self.row_of[out] = usize::MAX;
        self.basis[r] = q;
        self.row_of[q] = r;
        self.since_refactor += 1;
    }

    /// Replaces basic artificials (at zero after phase 1) by real columns
    /// where the row allows it; rows that cannot are redundant.
    fn drive_out_artificials(&mut self, first_art: usize) {
        let ncol = self.ncol;
        for r in 0..self.m {
            if self.basis[r] < first_art {
                continue;
            }
            let candidate = (0..first_art)
                .filter(|&j| self.row_of[j] == usize::MAX)
                .max_by(|&a, &b| self.t[r * ncol + a].abs().total_cmp(&self.t[r * ncol + b].abs()));
            if let Some(j) = candidate {
                if self.t[r * ncol + j].abs() > 1e-7 {
                    let out = self.basis[r];
                    self.pivot(r, j);
                    self.x[out] = 0.0;
                }
            }
        }
    }
}
