//! Bounded-variable revised dual simplex with an explicit dense basis inverse.
//!
//! Every row `i` gets a logical variable `r_i = a_i·x` whose bounds encode the
//! row sense, so the working system is `A x − r = 0` with all variables boxed
//! (possibly by infinite bounds). The engine keeps its basis between calls:
//! tightening bounds (branching) or appending rows (cuts) preserves dual
//! feasibility, so re-solves continue from the previous optimal basis.
//!
//! Variables whose reduced cost pushes them towards an infinite bound get an
//! artificial bound of magnitude [`ARTIFICIAL_BOUND`]; an optimum that rests
//! on such a bound is reported as unbounded.

use super::{MilpProblem, Sense};

const ARTIFICIAL_BOUND: f64 = 1e9;
const REFACTOR_EVERY: usize = 100;
const PIVOT_TOL: f64 = 1e-9;
const SINGULAR_TOL: f64 = 1e-11;
/// Consecutive zero-length dual steps before switching to Bland's rule.
const STALL_LIMIT: usize = 50;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Iteration limit or a basis that could not be repaired.
    NumericFailure,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
enum State {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic with both bounds infinite, parked at zero.
    Free,
}

/// A persistent LP relaxation that supports warm-started re-solves.
#[derive(Clone, Debug)]
pub struct LpEngine {
    /// Number of structural columns.
    n: usize,
    /// Number of rows (and logical columns).
    m: usize,
    cols: Vec<Vec<(usize, f64)>>,
    cost: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    /// Bounds as given, before artificial bounding.
    user_lower: Vec<f64>,
    user_upper: Vec<f64>,
    state: Vec<State>,
    basis: Vec<usize>,
    x: Vec<f64>,
    d: Vec<f64>,
    /// Row-major `m x m` inverse of the basis matrix; row `i` belongs to basis position `i`.
    binv: Vec<f64>,
    since_refactor: usize,
    primal_dirty: bool,
    iterations: usize,
    refactors: usize,
    ptol: f64,
    dtol: f64,
}

impl LpEngine {
    /// Builds the LP relaxation of `problem` (integrality dropped) with an all-logical basis.
    pub fn new(problem: &MilpProblem) -> Self {
        let n = problem.variables.len();
        let mut engine = LpEngine {
            n,
            m: 0,
            cols: vec![Vec::new(); n],
            cost: problem.variables.iter().map(|v| v.cost).collect(),
            lower: problem.variables.iter().map(|v| v.lower).collect(),
            upper: problem.variables.iter().map(|v| v.upper).collect(),
            user_lower: Vec::new(),
            user_upper: Vec::new(),
            state: vec![State::AtLower; n],
            basis: Vec::new(),
            x: vec![0.0; n],
            d: problem.variables.iter().map(|v| v.cost).collect(),
            binv: Vec::new(),
            since_refactor: 0,
            primal_dirty: true,
            iterations: 0,
            refactors: 0,
            ptol: 1e-9,
            dtol: 1e-9,
        };
        engine.user_lower = engine.lower.clone();
        engine.user_upper = engine.upper.clone();
        for j in 0..n {
            engine.place_nonbasic(j);
        }
        for c in &problem.constraints {
            let (lo, hi) = row_bounds(c.sense, c.rhs);
            engine.push_row(&c.coefs, lo, hi);
        }
        engine.primal_dirty = true;
        engine
    }

    pub fn num_rows(&self) -> usize {
        self.m
    }

    pub fn num_cols(&self) -> usize {
        self.n
    }

    /// Total simplex pivots performed so far.
    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn refactorizations(&self) -> usize {
        self.refactors
    }

    /// Structural variable values at the current basis.
    pub fn values(&self) -> Vec<f64> {
        self.x[..self.n].to_vec()
    }

    pub fn objective(&self) -> f64 {
        (0..self.n).map(|j| self.cost[j] * self.x[j]).sum()
    }

    pub fn bounds(&self, j: usize) -> (f64, f64) {
        (self.user_lower[j], self.user_upper[j])
    }

    /// Changes the bounds of structural variable `j`. Basis is kept.
    pub fn set_bounds(&mut self, j: usize, lower: f64, upper: f64) {
        self.user_lower[j] = lower;
        self.user_upper[j] = upper;
        self.lower[j] = lower;
        self.upper[j] = upper;
        if self.state[j] != State::Basic {
            self.place_nonbasic(j);
            self.primal_dirty = true;
        }
    }

    /// Appends a row `lo ≤ a·x ≤ hi`; its logical enters the basis.
    pub fn add_row(&mut self, coefs: &[(usize, f64)], sense: Sense, rhs: f64) {
        let (lo, hi) = row_bounds(sense, rhs);
        self.push_row(coefs, lo, hi);
    }

    fn push_row(&mut self, coefs: &[(usize, f64)], lo: f64, hi: f64) {
        let m = self.m;
        let row = m;
        for &(j, a) in coefs {
            if a != 0.0 {
                self.cols[j].push((row, a));
            }
        }
        // New basis inverse [[B⁻¹, 0], [a_Bᵀ B⁻¹, −1]].
        let mut new_row = vec![0.0; m + 1];
        for &(j, a) in coefs {
            if a != 0.0 && self.state[j] == State::Basic {
                let pos = self.position_of(j);
                let src = &self.binv[pos * m..(pos + 1) * m];
                for (t, v) in new_row[..m].iter_mut().zip(src) {
                    *t += a * v;
                }
            }
        }
        new_row[m] = -1.0;
        let mut binv = vec![0.0; (m + 1) * (m + 1)];
        for i in 0..m {
            binv[i * (m + 1)..i * (m + 1) + m].copy_from_slice(&self.binv[i * m..(i + 1) * m]);
        }
        binv[m * (m + 1)..].copy_from_slice(&new_row);
        self.binv = binv;

        let activity: f64 = coefs.iter().map(|&(j, a)| a * self.x[j]).sum();
        let logical = self.n + m;
        self.cost.push(0.0);
        self.lower.push(lo);
        self.upper.push(hi);
        self.user_lower.push(lo);
        self.user_upper.push(hi);
        self.state.push(State::Basic);
        self.x.push(activity);
        self.d.push(0.0);
        self.basis.push(logical);
        self.m += 1;
    }

    fn position_of(&self, j: usize) -> usize {
        self.basis
            .iter()
            .position(|&b| b == j)
            .expect("basic variable has a position")
    }

    fn column_dot(&self, j: usize, v: &[f64]) -> f64 {
        if j < self.n {
            self.cols[j].iter().map(|&(i, a)| a * v[i]).sum()
        } else {
            -v[j - self.n]
        }
    }

    /// `B⁻¹ a_j`.
    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let mut u = vec![0.0; m];
        if j < self.n {
            for &(row, a) in &self.cols[j] {
                for (i, ui) in u.iter_mut().enumerate() {
                    *ui += a * self.binv[i * m + row];
                }
            }
        } else {
            let row = j - self.n;
            for (i, ui) in u.iter_mut().enumerate() {
                *ui = -self.binv[i * m + row];
            }
        }
        u
    }

    /// Moves nonbasic `j` onto a bound consistent with its reduced cost.
    fn place_nonbasic(&mut self, j: usize) {
        let (lo, hi) = (self.lower[j], self.upper[j]);
        let dj = self.d[j];
        let state = if lo == hi {
            State::AtLower
        } else if dj > self.dtol {
            if lo.is_infinite() {
                self.lower[j] = -ARTIFICIAL_BOUND.max(hi.abs() * 10.0);
            }
            State::AtLower
        } else if dj < -self.dtol {
            if hi.is_infinite() {
                self.upper[j] = ARTIFICIAL_BOUND.max(lo.abs() * 10.0);
            }
            State::AtUpper
        } else {
            match self.state[j] {
                State::AtUpper if hi.is_finite() => State::AtUpper,
                State::AtLower if lo.is_finite() => State::AtLower,
                _ if lo.is_finite() => State::AtLower,
                _ if hi.is_finite() => State::AtUpper,
                _ => State::Free,
            }
        };
        self.state[j] = state;
        self.x[j] = match state {
            State::AtLower => self.lower[j],
            State::AtUpper => self.upper[j],
            _ => 0.0,
        };
    }

    /// Re-places every nonbasic variable whose reduced cost has the wrong sign.
    fn restore_dual_feasibility(&mut self) -> bool {
        let mut changed = false;
        for j in 0..self.n + self.m {
            let wrong = match self.state[j] {
                State::Basic => false,
                State::AtLower => self.d[j] < -self.dtol && self.lower[j] != self.upper[j],
                State::AtUpper => self.d[j] > self.dtol && self.lower[j] != self.upper[j],
                State::Free => self.d[j].abs() > self.dtol,
            };
            let stale = match self.state[j] {
                State::AtLower => self.x[j] != self.lower[j],
                State::AtUpper => self.x[j] != self.upper[j],
                _ => false,
            };
            if wrong || stale {
                self.place_nonbasic(j);
                changed = true;
            }
        }
        if changed {
            self.primal_dirty = true;
        }
        changed
    }

    fn reset_to_logical_basis(&mut self) {
        let total = self.n + self.m;
        for j in 0..total {
            self.state[j] = State::AtLower;
        }
        self.basis = (self.n..total).collect();
        for &b in &self.basis {
            self.state[b] = State::Basic;
        }
        self.d[..self.n].copy_from_slice(&self.cost[..self.n]);
        for j in self.n..total {
            self.d[j] = 0.0;
        }
        for j in 0..self.n {
            self.place_nonbasic(j);
        }
        let m = self.m;
        self.binv = vec![0.0; m * m];
        for i in 0..m {
            self.binv[i * m + i] = -1.0;
        }
        self.since_refactor = 0;
        self.recompute_primal();
        self.recompute_duals();
    }

    /// Rebuilds `B⁻¹` from scratch. Structural basics form a kernel `M` on the
    /// rows not covered by basic logicals; only `M` is inverted densely.
    fn refactor(&mut self) -> bool {
        self.refactors += 1;
        let m = self.m;
        let n = self.n;
        let mut logical_pos_of_row = vec![usize::MAX; m];
        let mut struct_pos = Vec::new();
        for (pos, &b) in self.basis.iter().enumerate() {
            if b >= n {
                logical_pos_of_row[b - n] = pos;
            } else {
                struct_pos.push(pos);
            }
        }
        let kernel_rows: Vec<usize> = (0..m).filter(|&i| logical_pos_of_row[i] == usize::MAX).collect();
        let k = struct_pos.len();
        if kernel_rows.len() != k {
            return false;
        }
        let mut kernel_index = vec![usize::MAX; m];
        for (a, &row) in kernel_rows.iter().enumerate() {
            kernel_index[row] = a;
        }
        let mut kernel = vec![0.0; k * k];
        for (b, &pos) in struct_pos.iter().enumerate() {
            for &(row, a) in &self.cols[self.basis[pos]] {
                let ka = kernel_index[row];
                if ka != usize::MAX {
                    kernel[ka * k + b] += a;
                }
            }
        }
        let Some(kinv) = invert_dense(&mut kernel, k) else {
            return false;
        };

        let mut binv = vec![0.0; m * m];
        for (t, &pos) in struct_pos.iter().enumerate() {
            let dst = &mut binv[pos * m..(pos + 1) * m];
            for (c, &row) in kernel_rows.iter().enumerate() {
                dst[row] = kinv[t * k + c];
            }
        }
        for row in 0..m {
            let pos = logical_pos_of_row[row];
            if pos != usize::MAX {
                binv[pos * m + row] = -1.0;
            }
        }
        for &spos in &struct_pos {
            let j = self.basis[spos];
            for &(row, a) in &self.cols[j] {
                let lpos = logical_pos_of_row[row];
                if lpos == usize::MAX {
                    continue;
                }
                for c in &kernel_rows {
                    let v = binv[spos * m + c];
                    if v != 0.0 {
                        binv[lpos * m + c] += a * v;
                    }
                }
            }
        }
        self.binv = binv;
        self.since_refactor = 0;
        self.recompute_primal();
        self.recompute_duals();
        true
    }

    fn recompute_primal(&mut self) {
        let m = self.m;
        let mut v = vec![0.0; m];
        for j in 0..self.n + m {
            if self.state[j] == State::Basic || self.x[j] == 0.0 {
                continue;
            }
            let xj = self.x[j];
            if j < self.n {
                for &(i, a) in &self.cols[j] {
                    v[i] += a * xj;
                }
            } else {
                v[j - self.n] -= xj;
            }
        }
        for pos in 0..m {
            let row = &self.binv[pos * m..(pos + 1) * m];
            let val: f64 = row.iter().zip(&v).map(|(a, b)| a * b).sum();
            self.x[self.basis[pos]] = -val;
        }
        self.primal_dirty = false;
    }

    fn recompute_duals(&mut self) {
        let m = self.m;
        let mut y = vec![0.0; m];
        for pos in 0..m {
            let cb = self.cost[self.basis[pos]];
            if cb != 0.0 {
                let row = &self.binv[pos * m..(pos + 1) * m];
                for (yi, a) in y.iter_mut().zip(row) {
                    *yi += cb * a;
                }
            }
        }
        for j in 0..self.n + m {
            self.d[j] = if self.state[j] == State::Basic {
                0.0
            } else {
                self.cost[j] - self.column_dot(j, &y)
            };
        }
    }

    fn primal_infeasibility(&self, j: usize) -> f64 {
        let x = self.x[j];
        let tol = self.ptol * (1.0 + x.abs().min(1e6));
        if x < self.lower[j] - tol {
            self.lower[j] - x
        } else if x > self.upper[j] + tol {
            x - self.upper[j]
        } else {
            0.0
        }
    }

    /// Runs the dual simplex from the current basis to optimality.
    pub fn solve(&mut self) -> LpStatus {
        let status = self.solve_inner();
        if status == LpStatus::NumericFailure {
            log::debug!("lp: numeric trouble, restarting from the logical basis");
            self.reset_to_logical_basis();
            return self.solve_inner();
        }
        status
    }

    fn solve_inner(&mut self) -> LpStatus {
        let max_iter = 20 * (self.n + self.m) + 10_000;
        let start = self.iterations;
        let mut stalled = 0usize;
        let mut verified_once = false;

        if self.since_refactor > REFACTOR_EVERY / 2 {
            if !self.refactor() {
                self.reset_to_logical_basis();
            }
        }
        self.restore_dual_feasibility();
        if self.primal_dirty {
            self.recompute_primal();
        }

        loop {
            if self.iterations - start > max_iter {
                return LpStatus::NumericFailure;
            }
            let bland = stalled >= STALL_LIMIT;

            // Leaving row: largest bound violation (Bland: lowest variable index).
            let mut leave: Option<(usize, f64)> = None;
            for pos in 0..self.m {
                let j = self.basis[pos];
                let inf = self.primal_infeasibility(j);
                if inf > 0.0 {
                    let better = match leave {
                        None => true,
                        Some((p, v)) => {
                            if bland {
                                j < self.basis[p]
                            } else {
                                inf > v
                            }
                        }
                    };
                    if better {
                        leave = Some((pos, inf));
                    }
                }
            }

            let Some((r, _)) = leave else {
                // Primal feasible: verify with a fresh factorization, then check duals.
                if self.since_refactor > 0 && !verified_once {
                    verified_once = true;
                    if !self.refactor() {
                        return LpStatus::NumericFailure;
                    }
                    self.restore_dual_feasibility();
                    if self.primal_dirty {
                        self.recompute_primal();
                    }
                    continue;
                }
                if self.restore_dual_feasibility() {
                    self.recompute_primal();
                    continue;
                }
                return self.final_status();
            };

            let leaving = self.basis[r];
            let to_lower = self.x[leaving] < self.lower[leaving];
            let target = if to_lower {
                self.lower[leaving]
            } else {
                self.upper[leaving]
            };

            // Pivot row α_j = (e_rᵀ B⁻¹) a_j.
            let m = self.m;
            let rho: Vec<f64> = self.binv[r * m..(r + 1) * m].to_vec();
            let total = self.n + m;
            let mut alpha = vec![0.0; total];
            let mut candidates: Vec<usize> = Vec::new();
            for j in 0..total {
                let st = self.state[j];
                if st == State::Basic || self.lower[j] == self.upper[j] {
                    continue;
                }
                let a = self.column_dot(j, &rho);
                if a.abs() <= PIVOT_TOL {
                    continue;
                }
                alpha[j] = a;
                // Moving x_j must push x_leaving towards `target`: Δx_leaving = −α_j Δx_j.
                let eligible = match st {
                    State::AtLower => (to_lower && a < 0.0) || (!to_lower && a > 0.0),
                    State::AtUpper => (to_lower && a > 0.0) || (!to_lower && a < 0.0),
                    State::Free => true,
                    State::Basic => false,
                };
                if eligible {
                    candidates.push(j);
                }
            }
            if candidates.is_empty() {
                if self.since_refactor > 0 {
                    if !self.refactor() {
                        return LpStatus::NumericFailure;
                    }
                    self.restore_dual_feasibility();
                    if self.primal_dirty {
                        self.recompute_primal();
                    }
                    continue;
                }
                return LpStatus::Infeasible;
            }

            let entering = if bland {
                // Candidates are in index order, so ties keep the lowest index.
                let mut best = f64::INFINITY;
                let mut pick = candidates[0];
                for &j in &candidates {
                    let ratio = self.d[j].abs() / alpha[j].abs();
                    if ratio < best - 1e-12 {
                        best = ratio;
                        pick = j;
                    }
                }
                pick
            } else {
                // Harris two-pass ratio test.
                let bound = candidates
                    .iter()
                    .map(|&j| (self.d[j].abs() + self.dtol) / alpha[j].abs())
                    .fold(f64::INFINITY, f64::min);
                let mut pick = candidates[0];
                let mut best_alpha = -1.0;
                for &j in &candidates {
                    let ratio = self.d[j].abs() / alpha[j].abs();
                    if ratio <= bound && alpha[j].abs() > best_alpha {
                        best_alpha = alpha[j].abs();
                        pick = j;
                    }
                }
                pick
            };

            let u = self.ftran(entering);
            let pivot = u[r];
            if pivot.abs() <= PIVOT_TOL || (pivot - alpha[entering]).abs() > 1e-6 * (1.0 + pivot.abs()) {
                if self.since_refactor == 0 {
                    return LpStatus::NumericFailure;
                }
                if !self.refactor() {
                    return LpStatus::NumericFailure;
                }
                self.restore_dual_feasibility();
                if self.primal_dirty {
                    self.recompute_primal();
                }
                continue;
            }

            // Dual update.
            let step = self.d[entering] / alpha[entering];
            if step.abs() <= 1e-12 {
                stalled += 1;
            } else {
                stalled = 0;
            }
            for j in 0..total {
                if alpha[j] != 0.0 {
                    self.d[j] -= step * alpha[j];
                }
            }
            self.d[entering] = 0.0;
            self.d[leaving] = -step;

            // Primal update.
            let theta = (self.x[leaving] - target) / pivot;
            for pos in 0..m {
                if u[pos] != 0.0 {
                    let b = self.basis[pos];
                    self.x[b] -= theta * u[pos];
                }
            }
            self.x[entering] += theta;
            self.x[leaving] = target;
            self.state[leaving] = if to_lower {
                State::AtLower
            } else {
                State::AtUpper
            };
            self.state[entering] = State::Basic;
            self.basis[r] = entering;

            // Basis inverse update.
            let inv_pivot = 1.0 / pivot;
            for v in &mut self.binv[r * m..(r + 1) * m] {
                *v *= inv_pivot;
            }
            let pivot_row: Vec<f64> = self.binv[r * m..(r + 1) * m].to_vec();
            for pos in 0..m {
                if pos == r || u[pos] == 0.0 {
                    continue;
                }
                let f = u[pos];
                let dst = &mut self.binv[pos * m..(pos + 1) * m];
                for (a, b) in dst.iter_mut().zip(&pivot_row) {
                    *a -= f * b;
                }
            }

            self.iterations += 1;
            self.since_refactor += 1;
            verified_once = false;
            if self.since_refactor >= REFACTOR_EVERY {
                if !self.refactor() {
                    return LpStatus::NumericFailure;
                }
                self.restore_dual_feasibility();
                if self.primal_dirty {
                    self.recompute_primal();
                }
            }
        }
    }

    fn final_status(&self) -> LpStatus {
        for j in 0..self.n + self.m {
            let artificial = (self.user_lower[j].is_infinite() && self.x[j] <= -0.5 * ARTIFICIAL_BOUND)
                || (self.user_upper[j].is_infinite() && self.x[j] >= 0.5 * ARTIFICIAL_BOUND);
            if artificial {
                return LpStatus::Unbounded;
            }
        }
        LpStatus::Optimal
    }
}

fn row_bounds(sense: Sense, rhs: f64) -> (f64, f64) {
    match sense {
        Sense::Le => (f64::NEG_INFINITY, rhs),
        Sense::Ge => (rhs, f64::INFINITY),
        Sense::Eq => (rhs, rhs),
    }
}

/// Gauss–Jordan inversion with partial pivoting; `None` when singular.
fn invert_dense(a: &mut [f64], k: usize) -> Option<Vec<f64>> {
    let mut inv = vec![0.0; k * k];
    for i in 0..k {
        inv[i * k + i] = 1.0;
    }
    for col in 0..k {
        let (piv, best) = (col..k)
            .map(|r| (r, a[r * k + col].abs()))
            .fold((col, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best <= SINGULAR_TOL {
            return None;
        }
        if piv != col {
            for c in 0..k {
                a.swap(piv * k + c, col * k + c);
                inv.swap(piv * k + c, col * k + c);
            }
        }
        let p = 1.0 / a[col * k + col];
        for c in 0..k {
            a[col * k + c] *= p;
            inv[col * k + c] *= p;
        }
        for r in 0..k {
            if r == col {
                continue;
            }
            let f = a[r * k + col];
            if f == 0.0 {
                continue;
            }
            for c in 0..k {
                a[r * k + c] -= f * a[col * k + c];
                inv[r * k + c] -= f * inv[col * k + c];
            }
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::MilpProblem;

    fn lp(costs: &[f64], bounds: &[(f64, f64)]) -> MilpProblem {
        let mut p = MilpProblem::new();
        for (j, (&c, &(lo, hi))) in costs.iter().zip(bounds).enumerate() {
            p.add_continuous(format!("x{j}"), "x", lo, hi, c);
        }
        p
    }

    #[test]
    fn single_lower_row() {
        let mut p = lp(&[1.0], &[(0.0, 10.0)]);
        p.add_constraint(vec![(0, 1.0)], Sense::Ge, 3.0);
        let mut e = LpEngine::new(&p);
        assert_eq!(e.solve(), LpStatus::Optimal);
        assert!((e.values()[0] - 3.0).abs() < 1e-12);
        assert!((e.objective() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn contradictory_rows_are_infeasible() {
        let mut p = lp(&[0.0], &[(f64::NEG_INFINITY, f64::INFINITY)]);
        p.add_constraint(vec![(0, 1.0)], Sense::Ge, 2.0);
        p.add_constraint(vec![(0, 1.0)], Sense::Le, 1.0);
        let mut e = LpEngine::new(&p);
        assert_eq!(e.solve(), LpStatus::Infeasible);
    }

    #[test]
    fn degenerate_optimum() {
        let mut p = lp(&[-1.0, -1.0], &[(0.0, 1.0), (0.0, 1.0)]);
        p.add_constraint(vec![(0, 1.0), (1, 1.0)], Sense::Le, 1.0);
        let mut e = LpEngine::new(&p);
        assert_eq!(e.solve(), LpStatus::Optimal);
        let x = e.values();
        assert!((e.objective() + 1.0).abs() < 1e-12);
        assert!((x[0] + x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unbounded_direction_detected() {
        let mut p = lp(&[-1.0, 0.0], &[(0.0, f64::INFINITY), (0.0, 1.0)]);
        p.add_constraint(vec![(0, 1.0), (1, -1.0)], Sense::Ge, 0.0);
        let mut e = LpEngine::new(&p);
        assert_eq!(e.solve(), LpStatus::Unbounded);
    }

    #[test]
    fn added_row_warm_starts() {
        // min -x - 2y, x + y <= 4, x,y in [0, 3]
        let mut p = lp(&[-1.0, -2.0], &[(0.0, 3.0), (0.0, 3.0)]);
        p.add_constraint(vec![(0, 1.0), (1, 1.0)], Sense::Le, 4.0);
        let mut e = LpEngine::new(&p);
        assert_eq!(e.solve(), LpStatus::Optimal);
        assert!((e.objective() + 7.0).abs() < 1e-12);
        let before = e.iterations();
        e.add_row(&[(1, 1.0)], Sense::Le, 2.0);
        assert_eq!(e.solve(), LpStatus::Optimal);
        assert!((e.objective() + 6.0).abs() < 1e-12);
        // one dual pivot suffices after the cut
        assert_eq!(e.iterations() - before, 1);
    }

    #[test]
    fn bound_change_resolves() {
        let mut p = lp(&[-1.0, -1.0], &[(0.0, 1.0), (0.0, 1.0)]);
        p.add_constraint(vec![(0, 2.0), (1, 2.0)], Sense::Le, 3.0);
        let mut e = LpEngine::new(&p);
        assert_eq!(e.solve(), LpStatus::Optimal);
        assert!((e.objective() + 1.5).abs() < 1e-12);
        e.set_bounds(0, 1.0, 1.0);
        e.set_bounds(1, 1.0, 1.0);
        assert_eq!(e.solve(), LpStatus::Infeasible);
        e.set_bounds(1, 0.0, 0.0);
        assert_eq!(e.solve(), LpStatus::Optimal);
        assert!((e.objective() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn equality_rows() {
        // min x + y s.t. x + y = 2, x - y = 0.5
        let mut p = lp(&[1.0, 1.0], &[(0.0, 5.0), (0.0, 5.0)]);
        p.add_constraint(vec![(0, 1.0), (1, 1.0)], Sense::Eq, 2.0);
        p.add_constraint(vec![(0, 1.0), (1, -1.0)], Sense::Eq, 0.5);
        let mut e = LpEngine::new(&p);
        assert_eq!(e.solve(), LpStatus::Optimal);
        let x = e.values();
        assert!((x[0] - 1.25).abs() < 1e-12 && (x[1] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn kernel_inverse_matches_updates() {
        let mut p = lp(&[-3.0, -2.0, -4.0], &[(0.0, 4.0), (0.0, 4.0), (0.0, 4.0)]);
        p.add_constraint(vec![(0, 1.0), (1, 1.0), (2, 2.0)], Sense::Le, 4.0);
        p.add_constraint(vec![(0, 2.0), (2, 3.0)], Sense::Le, 5.0);
        p.add_constraint(vec![(1, 1.0), (2, 1.0)], Sense::Ge, 1.0);
        let mut e = LpEngine::new(&p);
        assert_eq!(e.solve(), LpStatus::Optimal);
        let updated = e.binv.clone();
        assert!(e.refactor());
        for (a, b) in updated.iter().zip(&e.binv) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
