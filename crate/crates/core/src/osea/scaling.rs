//! Objective-scaling phase: repeatedly solve the LP relaxation with
//! attenuated integer costs and record each relaxed solution.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{relax, LpOptions, LpSolver, LpStatus};
use crate::model::MilpInstance;

/// One relaxed solution of the scaling sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingIterate {
    /// Zero-based iteration index `n`.
    pub iteration: usize,
    pub x: Vec<f64>,
    /// Objective of the scaled LP at `x`.
    pub scaled_objective: f64,
    /// Original objective `c·x` (minimization orientation).
    pub original_objective: f64,
}

/// Scaled integer costs and the iterate history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingState {
    /// Integer column indices; `c_bar[k]` belongs to column `integer[k]`.
    pub integer: Vec<usize>,
    pub c_bar: Vec<f64>,
    pub iteration: usize,
    /// Scale used for the initial costs, after clamping to at least 1.
    pub m_scale: f64,
    /// The raw sum of absolute integer costs was below 1.
    pub m_clamped: bool,
    /// `cost_history[n]` holds the integer costs used by LP `n`.
    pub cost_history: Vec<Vec<f64>>,
    pub history: Vec<ScalingIterate>,
    pub support_tol: f64,
}

/// Initial costs `c_j / M` with `M = max(1, sum of |c_j|)` over integer columns.
pub fn init_scaled_costs(instance: &MilpInstance, support_tol: f64) -> Result<ScalingState> {
    let integer = instance.integer_indices();
    if integer.is_empty() {
        return Err(Error::NotApplicable(
            "objective scaling requires at least one integer variable".into(),
        ));
    }
    let c = instance.costs();
    let raw: f64 = integer.iter().map(|&j| c[j].abs()).sum();
    let m_scale = raw.max(1.0);
    let c_bar: Vec<f64> = integer.iter().map(|&j| c[j] / m_scale).collect();
    Ok(ScalingState {
        integer,
        cost_history: vec![c_bar.clone()],
        c_bar,
        iteration: 0,
        m_scale,
        m_clamped: raw < 1.0,
        history: Vec::new(),
        support_tol,
    })
}

impl ScalingState {
    /// Scaled cost of column `j` given its original cost and relaxed value.
    pub fn attenuate(cost: f64, value: f64) -> f64 {
        cost / (value + 1.0)
    }

    /// Applies the update rule for the relaxed solution `x_tilde` and
    /// records it. Returns whether any integer cost changed.
    pub fn update(&mut self, x_tilde: &[f64], original_c: &[f64]) -> Result<bool> {
        if x_tilde.len() != original_c.len() {
            return Err(Error::Dimension { expected: original_c.len(), got: x_tilde.len() });
        }
        for &j in &self.integer {
            if x_tilde[j] < -self.support_tol {
                return Err(Error::Numerical(format!(
                    "relaxed value {} of integer column {j} is negative",
                    x_tilde[j]
                )));
            }
        }
        let mut scaled = self.full_costs(original_c);
        let scaled_objective = dot(&scaled, x_tilde);
        let original_objective = dot(original_c, x_tilde);
        let mut changed = false;
        for (k, &j) in self.integer.iter().enumerate() {
            if x_tilde[j] > self.support_tol {
                let next = Self::attenuate(original_c[j], x_tilde[j]);
                if next != self.c_bar[k] {
                    changed = true;
                }
                self.c_bar[k] = next;
                scaled[j] = next;
            }
        }
        self.history.push(ScalingIterate {
            iteration: self.iteration,
            x: x_tilde.to_vec(),
            scaled_objective,
            original_objective,
        });
        self.iteration += 1;
        self.cost_history.push(self.c_bar.clone());
        Ok(changed)
    }

    /// Full cost vector: original costs on continuous columns, scaled costs
    /// on integer columns.
    pub fn full_costs(&self, original_c: &[f64]) -> Vec<f64> {
        let mut c = original_c.to_vec();
        for (k, &j) in self.integer.iter().enumerate() {
            c[j] = self.c_bar[k];
        }
        c
    }
}

/// Pure form of [`ScalingState::update`].
pub fn scaling_update(state: &ScalingState, x_tilde: &[f64], original_c: &[f64]) -> Result<ScalingState> {
    let mut next = state.clone();
    next.update(x_tilde, original_c)?;
    Ok(next)
}

/// The relaxation of `instance` with the state's spliced objective.
pub fn build_scaled_lp(instance: &MilpInstance, state: &ScalingState) -> Result<MilpInstance> {
    relax(instance).with_costs(state.full_costs(instance.costs()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StopReason {
    /// No integer cost changed between consecutive iterations.
    CoefficientStall,
    IterationCap,
    TimeBudget,
    LpInfeasible,
    LpUnbounded,
    LpIterationLimit,
    /// A relaxed integer value came back negative beyond tolerance.
    NumericalIntegrity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingOptions {
    pub n_max: usize,
    pub time_budget: Option<Duration>,
    pub support_tol: f64,
    pub warm_start: bool,
    pub lp: LpOptions,
}

impl Default for ScalingOptions {
    fn default() -> Self {
        ScalingOptions {
            n_max: 50,
            time_budget: None,
            support_tol: 1e-9,
            warm_start: true,
            lp: LpOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingOutcome {
    pub state: ScalingState,
    pub stop: StopReason,
    pub lp_solves: usize,
    pub lp_iterations: u64,
}

/// Iterates LP solve and cost update until the costs stall, `n_max` LPs
/// have been solved, or the time budget runs out. An infeasible relaxation
/// leaves the history empty.
pub fn run_scaling_phase(instance: &MilpInstance, opts: &ScalingOptions) -> Result<ScalingOutcome> {
    let start = Instant::now();
    let mut state = init_scaled_costs(instance, opts.support_tol)?;
    let original_c = instance.costs().to_vec();
    let mut solver = LpSolver::new(&relax(instance))?;
    let lp_opts = LpOptions { warm_start: opts.warm_start, ..opts.lp.clone() };
    let mut lp_iterations = 0u64;
    let mut lp_solves = 0usize;

    let stop = loop {
        if lp_solves >= opts.n_max.max(1) {
            break StopReason::IterationCap;
        }
        solver.set_objective(&state.full_costs(&original_c))?;
        let res = solver.solve(&lp_opts);
        lp_solves += 1;
        lp_iterations += res.iterations as u64;
        match res.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => {
                state.history.clear();
                state.cost_history.truncate(1);
                break StopReason::LpInfeasible;
            }
            LpStatus::Unbounded => break StopReason::LpUnbounded,
            LpStatus::IterationLimit => break StopReason::LpIterationLimit,
        }
        match state.update(&res.x, &original_c) {
            Ok(true) => {}
            Ok(false) => break StopReason::CoefficientStall,
            Err(Error::Numerical(msg)) => {
                log::warn!("scaling aborted: {msg}");
                break StopReason::NumericalIntegrity;
            }
            Err(e) => return Err(e),
        }
        log::debug!(
            "scaling iteration {}: scaled {} original {}",
            state.iteration - 1,
            state.history.last().map_or(f64::NAN, |h| h.scaled_objective),
            state.history.last().map_or(f64::NAN, |h| h.original_objective),
        );
        if opts.time_budget.is_some_and(|b| start.elapsed() >= b) {
            break StopReason::TimeBudget;
        }
    };
    Ok(ScalingOutcome { state, stop, lp_solves, lp_iterations })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
