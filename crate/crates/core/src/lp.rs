//! Bounded-variable two-phase primal simplex.
//!
//! Each row `i` gets a logical column `s_i` with `a_i x - s_i = 0` and the
//! row's activity interval as bounds, so every constraint becomes a bound.
//! Rows whose crash value violates the slack bounds receive an artificial
//! column that phase 1 drives to zero. The basis inverse is kept dense and
//! updated in product form, with a full refactorization every
//! `refactor_interval` pivots.
//!
//! An [`LpSolver`] owns its basis. Changing only the objective keeps the
//! basis primal feasible, so the next solve starts directly in phase 2.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{MilpInstance, VarKind};

#[derive(Debug, Clone, PartialEq)]
pub struct LpOptions {
    /// Defaults to `50 * (n + m)` when `None`.
    pub max_iterations: Option<usize>,
    pub feasibility_tol: f64,
    pub optimality_tol: f64,
    /// Degenerate pivots tolerated before switching to Bland's rule;
    /// defaults to `3 * (n + m)`.
    pub bland_after: Option<usize>,
    pub refactor_interval: usize,
    /// Reuse the previous basis when only the objective changed.
    pub warm_start: bool,
}

impl Default for LpOptions {
    fn default() -> Self {
        LpOptions {
            max_iterations: None,
            feasibility_tol: 1e-7,
            optimality_tol: 1e-7,
            bland_after: None,
            refactor_interval: 100,
            warm_start: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ColumnStatus {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free column resting at zero.
    Free,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpResult {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    /// Reduced costs of the structural columns at termination.
    pub reduced_costs: Vec<f64>,
    pub column_status: Vec<ColumnStatus>,
    /// Whether the solve started from a previously optimal basis.
    pub warm_started: bool,
}

/// Drops integrality: every column becomes continuous. Binary columns keep
/// their `[0, 1]` box and general integers keep their numeric bounds.
pub fn relax(instance: &MilpInstance) -> MilpInstance {
    if !instance.has_integers() {
        return instance.clone();
    }
    let kinds = vec![VarKind::Continuous; instance.num_cols()];
    instance.with_columns(instance.lower().to_vec(), instance.upper().to_vec(), kinds)
}

/// Solves a continuous instance from scratch.
pub fn solve_lp(instance: &MilpInstance, opts: &LpOptions) -> Result<LpResult> {
    let mut solver = LpSolver::new(instance)?;
    Ok(solver.solve(opts))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Basic(usize),
    Lower,
    Upper,
    Zero,
}

/// Reusable simplex context for one constraint matrix.
#[derive(Debug, Clone)]
pub struct LpSolver {
    n: usize,
    m: usize,
    /// Structural columns, then slacks, then artificials.
    columns: Vec<Vec<(usize, f64)>>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    x: Vec<f64>,
    state: Vec<State>,
    basis: Vec<usize>,
    binv: Vec<f64>,
    pivots_since_refactor: usize,
    /// Basis is primal feasible for the current bounds.
    feasible_basis: bool,
}

const PIVOT_TOL: f64 = 1e-9;
const DEGENERATE_STEP: f64 = 1e-12;

enum PhaseOutcome {
    Optimal,
    Unbounded,
    IterationLimit,
}

impl LpSolver {
    pub fn new(instance: &MilpInstance) -> Result<Self> {
        if instance.has_integers() {
            return Err(Error::Input(
                "solve_lp needs a continuous instance; relax it first".into(),
            ));
        }
        instance.validate()?;
        let n = instance.num_cols();
        let m = instance.num_rows();
        let mut columns = instance.matrix().columns();
        let mut lower = instance.lower().to_vec();
        let mut upper = instance.upper().to_vec();
        for i in 0..m {
            columns.push(vec![(i, -1.0)]);
            let (lo, hi) = instance.row_bounds(i);
            lower.push(lo);
            upper.push(hi);
        }
        let mut cost = instance.costs().to_vec();
        cost.resize(n + m, 0.0);
        Ok(LpSolver {
            n,
            m,
            x: vec![0.0; n + m],
            state: vec![State::Lower; n + m],
            columns,
            lower,
            upper,
            cost,
            basis: Vec::new(),
            binv: Vec::new(),
            pivots_since_refactor: 0,
            feasible_basis: false,
        })
    }

    pub fn num_cols(&self) -> usize {
        self.n
    }

    /// Replaces the structural objective; the basis stays valid.
    pub fn set_objective(&mut self, c: &[f64]) -> Result<()> {
        if c.len() != self.n {
            return Err(Error::Dimension { expected: self.n, got: c.len() });
        }
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("objective contains non-finite values".into()));
        }
        self.cost[..self.n].copy_from_slice(c);
        Ok(())
    }

    /// Replaces structural bounds. The current basis is kept only when it
    /// stays primal feasible under the new bounds.
    pub fn set_bounds(&mut self, lower: &[f64], upper: &[f64]) -> Result<()> {
        if lower.len() != self.n || upper.len() != self.n {
            return Err(Error::Dimension { expected: self.n, got: lower.len().min(upper.len()) });
        }
        self.lower[..self.n].copy_from_slice(lower);
        self.upper[..self.n].copy_from_slice(upper);
        if !self.feasible_basis {
            return Ok(());
        }
        for j in 0..self.n {
            match self.state[j] {
                State::Basic(_) => {}
                _ => {
                    let (st, v) = nonbasic_position(lower[j], upper[j]);
                    self.state[j] = st;
                    self.x[j] = v;
                }
            }
        }
        self.recompute_basic_values();
        let tol = 1e-9;
        self.feasible_basis = self.basis.iter().all(|&b| {
            self.x[b] >= self.lower[b] - tol && self.x[b] <= self.upper[b] + tol
        });
        Ok(())
    }

    /// Runs the simplex method from the current state.
    pub fn solve(&mut self, opts: &LpOptions) -> LpResult {
        let total = self.n + self.m;
        let max_iter = opts.max_iterations.unwrap_or(50 * total.max(1));
        let bland_after = opts.bland_after.unwrap_or(3 * total.max(1));
        let mut iterations = 0;

        let warm = opts.warm_start && self.feasible_basis && self.basis.len() == self.m;
        if !warm {
            self.crash();
            let has_artificials = self.columns.len() > total;
            if has_artificials {
                let mut phase1 = vec![0.0; self.columns.len()];
                phase1[total..].iter_mut().for_each(|c| *c = 1.0);
                let outcome =
                    self.run_phase(&phase1, opts, max_iter, bland_after, &mut iterations);
                if let PhaseOutcome::IterationLimit = outcome {
                    return self.result(LpStatus::IterationLimit, iterations, &phase1, false);
                }
                let infeasibility: f64 = self.x[total..].iter().sum();
                if infeasibility > opts.feasibility_tol {
                    return self.result(LpStatus::Infeasible, iterations, &phase1, false);
                }
                self.retire_artificials();
            }
            self.feasible_basis = true;
        }

        let mut cost = self.cost.clone();
        cost.resize(self.columns.len(), 0.0);
        let outcome = self.run_phase(&cost, opts, max_iter, bland_after, &mut iterations);
        let status = match outcome {
            PhaseOutcome::Optimal => LpStatus::Optimal,
            PhaseOutcome::Unbounded => LpStatus::Unbounded,
            PhaseOutcome::IterationLimit => LpStatus::IterationLimit,
        };
        if status == LpStatus::Optimal {
            self.refactor();
        }
        self.result(status, iterations, &cost, warm)
    }

    fn result(&self, status: LpStatus, iterations: usize, cost: &[f64], warm: bool) -> LpResult {
        let x = self.x[..self.n].to_vec();
        let objective = self.cost[..self.n].iter().zip(&x).map(|(c, v)| c * v).sum();
        let y = self.duals(cost);
        let reduced_costs = (0..self.n).map(|j| self.reduced_cost(j, cost, &y)).collect();
        let column_status = (0..self.n)
            .map(|j| match self.state[j] {
                State::Basic(_) => ColumnStatus::Basic,
                State::Lower => ColumnStatus::AtLower,
                State::Upper => ColumnStatus::AtUpper,
                State::Zero => ColumnStatus::Free,
            })
            .collect();
        LpResult {
            status,
            x,
            objective,
            iterations,
            reduced_costs,
            column_status,
            warm_started: warm,
        }
    }

    /// Slack basis with structurals at a bound; artificials cover rows whose
    /// slack would start outside its bounds.
    fn crash(&mut self) {
        let total = self.n + self.m;
        self.columns.truncate(total);
        self.lower.truncate(total);
        self.upper.truncate(total);
        self.x.truncate(total);
        self.state.truncate(total);

        for j in 0..self.n {
            let (st, v) = nonbasic_position(self.lower[j], self.upper[j]);
            self.state[j] = st;
            self.x[j] = v;
        }
        let mut activity = vec![0.0; self.m];
        for j in 0..self.n {
            if self.x[j] != 0.0 {
                for &(r, a) in &self.columns[j] {
                    activity[r] += a * self.x[j];
                }
            }
        }
        self.basis = vec![0; self.m];
        self.binv = vec![0.0; self.m * self.m];
        for i in 0..self.m {
            let s = self.n + i;
            let act = activity[i];
            let (lo, hi) = (self.lower[s], self.upper[s]);
            if act >= lo && act <= hi {
                self.state[s] = State::Basic(i);
                self.x[s] = act;
                self.basis[i] = s;
                self.binv[i * self.m + i] = -1.0;
            } else {
                let bound = if act < lo { lo } else { hi };
                self.state[s] = if act < lo { State::Lower } else { State::Upper };
                self.x[s] = bound;
                // a x - s + sigma * art = 0  =>  sigma * art = bound - act
                let sigma = if bound - act > 0.0 { 1.0 } else { -1.0 };
                let a = self.columns.len();
                self.columns.push(vec![(i, sigma)]);
                self.lower.push(0.0);
                self.upper.push(f64::INFINITY);
                self.x.push((bound - act).abs());
                self.state.push(State::Basic(i));
                self.basis[i] = a;
                self.binv[i * self.m + i] = sigma;
            }
        }
        self.pivots_since_refactor = 0;
    }

    /// Pins artificials at zero so they can never re-enter.
    fn retire_artificials(&mut self) {
        let total = self.n + self.m;
        for a in total..self.columns.len() {
            self.upper[a] = 0.0;
            if !matches!(self.state[a], State::Basic(_)) {
                self.x[a] = 0.0;
                self.state[a] = State::Lower;
            }
        }
    }

    fn duals(&self, cost: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (pos, &b) in self.basis.iter().enumerate() {
            let cb = cost[b];
            if cb != 0.0 {
                let row = &self.binv[pos * m..(pos + 1) * m];
                for (yk, &v) in y.iter_mut().zip(row) {
                    *yk += cb * v;
                }
            }
        }
        y
    }

    fn reduced_cost(&self, j: usize, cost: &[f64], y: &[f64]) -> f64 {
        let mut d = cost[j];
        for &(r, a) in &self.columns[j] {
            d -= y[r] * a;
        }
        d
    }

    /// `B^{-1} a_j`.
    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let mut alpha = vec![0.0; m];
        for &(r, a) in &self.columns[j] {
            for (i, out) in alpha.iter_mut().enumerate() {
                *out += self.binv[i * m + r] * a;
            }
        }
        alpha
    }

    fn run_phase(
        &mut self,
        cost: &[f64],
        opts: &LpOptions,
        max_iter: usize,
        bland_after: usize,
        iterations: &mut usize,
    ) -> PhaseOutcome {
        let mut degenerate = 0usize;
        let mut bland = false;
        loop {
            if self.pivots_since_refactor >= opts.refactor_interval {
                self.refactor();
            }
            let y = self.duals(cost);

            // pricing
            let mut entering: Option<(usize, f64, f64)> = None;
            for j in 0..self.columns.len() {
                let dir = match self.state[j] {
                    State::Basic(_) => continue,
                    _ if self.lower[j] == self.upper[j] => continue,
                    st => {
                        let d = self.reduced_cost(j, cost, &y);
                        match st {
                            State::Lower if d < -opts.optimality_tol => (1.0, d),
                            State::Upper if d > opts.optimality_tol => (-1.0, d),
                            State::Zero if d.abs() > opts.optimality_tol => {
                                (if d < 0.0 { 1.0 } else { -1.0 }, d)
                            }
                            _ => continue,
                        }
                    }
                };
                match entering {
                    None => entering = Some((j, dir.0, dir.1)),
                    Some((_, _, best)) if !bland && dir.1.abs() > best.abs() => {
                        entering = Some((j, dir.0, dir.1))
                    }
                    _ => {}
                }
                if bland {
                    break;
                }
            }
            let Some((q, dir, _)) = entering else {
                return PhaseOutcome::Optimal;
            };
            if *iterations >= max_iter {
                return PhaseOutcome::IterationLimit;
            }
            *iterations += 1;

            let alpha = self.ftran(q);
            // ratio test: basic values move by -dir * t * alpha
            let mut best: Option<(usize, bool, f64, f64)> = None;
            for (pos, &a) in alpha.iter().enumerate() {
                if a.abs() <= PIVOT_TOL {
                    continue;
                }
                let b = self.basis[pos];
                let delta = -dir * a;
                let (limit, to_upper) = if delta < 0.0 {
                    if self.lower[b] == f64::NEG_INFINITY {
                        continue;
                    }
                    (((self.x[b] - self.lower[b]) / -delta).max(0.0), false)
                } else {
                    if self.upper[b] == f64::INFINITY {
                        continue;
                    }
                    (((self.upper[b] - self.x[b]) / delta).max(0.0), true)
                };
                let replace = match best {
                    None => true,
                    Some((bpos, _, blimit, bpivot)) => {
                        if limit < blimit - DEGENERATE_STEP {
                            true
                        } else if limit <= blimit + DEGENERATE_STEP {
                            if bland {
                                b < self.basis[bpos]
                            } else {
                                a.abs() > bpivot
                            }
                        } else {
                            false
                        }
                    }
                };
                if replace {
                    best = Some((pos, to_upper, limit, a.abs()));
                }
            }
            let flip = self.upper[q] - self.lower[q];
            let (step, leaving) = match best {
                Some((pos, to_upper, limit, _)) if limit < flip => (limit, Some((pos, to_upper))),
                _ if flip.is_finite() => (flip, None),
                _ => return PhaseOutcome::Unbounded,
            };

            if step <= DEGENERATE_STEP {
                degenerate += 1;
                if degenerate > bland_after {
                    bland = true;
                }
            }

            self.x[q] += dir * step;
            for (pos, &a) in alpha.iter().enumerate() {
                if a != 0.0 {
                    let b = self.basis[pos];
                    self.x[b] -= dir * step * a;
                }
            }

            match leaving {
                None => {
                    // bound flip
                    if dir > 0.0 {
                        self.state[q] = State::Upper;
                        self.x[q] = self.upper[q];
                    } else {
                        self.state[q] = State::Lower;
                        self.x[q] = self.lower[q];
                    }
                }
                Some((pos, to_upper)) => {
                    let out = self.basis[pos];
                    if to_upper {
                        self.state[out] = State::Upper;
                        self.x[out] = self.upper[out];
                    } else {
                        self.state[out] = State::Lower;
                        self.x[out] = self.lower[out];
                    }
                    self.basis[pos] = q;
                    self.state[q] = State::Basic(pos);
                    self.pivot(pos, &alpha);
                }
            }
        }
    }

    fn pivot(&mut self, r: usize, alpha: &[f64]) {
        let m = self.m;
        let p = alpha[r];
        for k in 0..m {
            self.binv[r * m + k] /= p;
        }
        for i in 0..m {
            if i == r || alpha[i] == 0.0 {
                continue;
            }
            let f = alpha[i];
            for k in 0..m {
                self.binv[i * m + k] -= f * self.binv[r * m + k];
            }
        }
        self.pivots_since_refactor += 1;
    }

    /// Recomputes `B^{-1}` by Gauss-Jordan elimination and refreshes the
    /// basic values.
    fn refactor(&mut self) {
        let m = self.m;
        if m == 0 {
            self.pivots_since_refactor = 0;
            return;
        }
        let mut work = vec![0.0; m * m];
        for (pos, &b) in self.basis.iter().enumerate() {
            for &(r, a) in &self.columns[b] {
                work[r * m + pos] = a;
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for col in 0..m {
            let piv = (col..m)
                .max_by(|&a, &b| work[a * m + col].abs().total_cmp(&work[b * m + col].abs()))
                .unwrap();
            if work[piv * m + col].abs() < 1e-14 {
                // keep the product-form inverse if the basis looks singular
                log::debug!("refactorization found a near-singular basis; skipped");
                self.pivots_since_refactor = 0;
                return;
            }
            if piv != col {
                for k in 0..m {
                    work.swap(piv * m + k, col * m + k);
                    inv.swap(piv * m + k, col * m + k);
                }
            }
            let d = work[col * m + col];
            for k in 0..m {
                work[col * m + k] /= d;
                inv[col * m + k] /= d;
            }
            for i in 0..m {
                if i == col {
                    continue;
                }
                let f = work[i * m + col];
                if f != 0.0 {
                    for k in 0..m {
                        work[i * m + k] -= f * work[col * m + k];
                        inv[i * m + k] -= f * inv[col * m + k];
                    }
                }
            }
        }
        self.binv = inv;
        self.pivots_since_refactor = 0;
        self.recompute_basic_values();
    }

    /// `x_B = -B^{-1} N x_N`.
    fn recompute_basic_values(&mut self) {
        let m = self.m;
        if self.basis.len() != m {
            return;
        }
        let mut rhs = vec![0.0; m];
        for j in 0..self.columns.len() {
            if matches!(self.state[j], State::Basic(_)) || self.x[j] == 0.0 {
                continue;
            }
            for &(r, a) in &self.columns[j] {
                rhs[r] += a * self.x[j];
            }
        }
        for (pos, &b) in self.basis.iter().enumerate() {
            let row = &self.binv[pos * m..(pos + 1) * m];
            self.x[b] = -row.iter().zip(&rhs).map(|(u, v)| u * v).sum::<f64>();
        }
    }
}

fn nonbasic_position(lower: f64, upper: f64) -> (State, f64) {
    if lower.is_finite() {
        (State::Lower, lower)
    } else if upper.is_finite() {
        (State::Upper, upper)
    } else {
        (State::Zero, 0.0)
    }
}
