//! Objective scaling ensemble heuristic.
//!
//! The pipeline seeds an ensemble with a short branch-and-bound incumbent,
//! runs LP relaxations whose integer costs are attenuated by the previous
//! relaxed values, keeps a subset of those relaxed solutions, fixes to zero
//! every integer column that all members leave at zero, and solves the
//! reduced problem exactly with the rest of the budget.

pub mod ensemble;
pub mod scaling;

use std::collections::BTreeSet;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::mip::{find_incumbent, solve_mip, BnbOptions, BnbStatus};
use crate::model::{MilpInstance, Solution};

pub use ensemble::{
    aggregate_fix_set, select_subset, AllIterates, BestWorstMedian, Ensemble, EnsembleMember,
    Provenance, SubsetRegistry, SubsetRule,
};
pub use scaling::{
    build_scaled_lp, init_scaled_costs, run_scaling_phase, scaling_update, ScalingIterate,
    ScalingOptions, ScalingOutcome, ScalingState, StopReason,
};

/// Nominal cost of one simplex pivot when timings are reported as work.
pub const WORK_SECONDS_PER_PIVOT: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OseaOptions {
    pub n_max: usize,
    /// Separate cap on the scaling phase, in seconds.
    pub scaling_time_budget: Option<f64>,
    pub incumbent_budget: Budget,
    pub total_budget: Budget,
    pub support_tol: f64,
    pub subset_rule: String,
    pub warm_start: bool,
}

impl Default for OseaOptions {
    fn default() -> Self {
        OseaOptions {
            n_max: 50,
            scaling_time_budget: None,
            incumbent_budget: Budget::Seconds(1.0),
            total_budget: Budget::Seconds(60.0),
            support_tol: 1e-9,
            subset_rule: "best-worst-median".into(),
            warm_start: true,
        }
    }
}

impl OseaOptions {
    pub fn validate(&self) -> Result<()> {
        if self.n_max == 0 {
            return Err(Error::Input("n_max must be at least 1".into()));
        }
        if let Some(s) = self.scaling_time_budget {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::Input(format!("scaling time budget {s} must be positive")));
            }
        }
        if !(self.support_tol.is_finite() && self.support_tol >= 0.0) {
            return Err(Error::Input(format!("support tolerance {} is invalid", self.support_tol)));
        }
        Ok(())
    }

    /// Whether every limit is counted in nodes or iterations, so that a run
    /// is reproducible and timings are reported as work.
    pub fn is_deterministic(&self) -> bool {
        self.incumbent_budget.is_deterministic()
            && self.total_budget.is_deterministic()
            && self.scaling_time_budget.is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimingBasis {
    /// Monotonic clock seconds.
    Wall,
    /// Simplex pivots times [`WORK_SECONDS_PER_PIVOT`].
    Work,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct OseaTimings {
    pub incumbent: f64,
    pub scaling: f64,
    pub aggregation: f64,
    pub reduced: f64,
    pub total: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OseaStatus {
    Feasible,
    NoSolutionFound,
    /// The original instance was proven infeasible.
    Infeasible,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolutionSource {
    ReducedSolve,
    SeededIncumbent,
    EnsembleMember,
    FallbackSolve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OseaResult {
    pub status: OseaStatus,
    /// Checked against the original instance.
    pub solution: Option<Solution>,
    /// Minimization-oriented objective.
    pub objective: Option<f64>,
    /// Objective in the instance's own sense, offset included.
    pub reported_objective: Option<f64>,
    pub source: Option<SolutionSource>,
    pub gamma: f64,
    pub fix_set: Vec<usize>,
    pub integer_indices: Vec<usize>,
    pub iterations_run: usize,
    pub stop_reason: Option<StopReason>,
    pub timing_basis: TimingBasis,
    pub timings: OseaTimings,
    pub reduced_status: Option<BnbStatus>,
    pub incumbent_objective: Option<f64>,
    pub m_scale: f64,
    pub m_clamped: bool,
    pub all_integer_costs_zero: bool,
    /// The ensemble was empty and the original instance was solved instead.
    pub fallback: bool,
    pub ensemble: Ensemble,
    /// Integer costs used by each scaling LP, aligned with `integer_indices`.
    pub scaled_cost_history: Vec<Vec<f64>>,
    pub nodes: u64,
    pub lp_iterations: u64,
}

struct Clock {
    start: Instant,
    basis: TimingBasis,
    pivots: u64,
}

impl Clock {
    fn now(&self) -> f64 {
        match self.basis {
            TimingBasis::Wall => self.start.elapsed().as_secs_f64(),
            TimingBasis::Work => self.pivots as f64 * WORK_SECONDS_PER_PIVOT,
        }
    }
}

/// Runs the full heuristic on `instance`.
pub fn run_osea(instance: &MilpInstance, opts: &OseaOptions) -> Result<OseaResult> {
    opts.validate()?;
    if !instance.has_integers() {
        return Err(Error::NotApplicable(
            "objective scaling requires at least one integer variable".into(),
        ));
    }
    let rules = SubsetRegistry::default();
    let rule = rules.get(&opts.subset_rule)?;
    let basis = if opts.is_deterministic() { TimingBasis::Work } else { TimingBasis::Wall };
    let mut clock = Clock { start: Instant::now(), basis, pivots: 0 };
    let mut timings = OseaTimings::default();

    let norm = instance.normalize();
    let integer = norm.integer_indices();
    let all_integer_costs_zero = integer.iter().all(|&j| norm.costs()[j] == 0.0);
    if all_integer_costs_zero {
        log::info!("all integer objective coefficients are zero");
    }

    let search = find_incumbent(&norm, opts.incumbent_budget)?;
    clock.pivots += search.result.lp_iterations;
    let mut nodes = search.result.nodes;
    timings.incumbent = clock.now();
    let seeded = match &search.incumbent {
        Some(s) => Some(Solution::assess(instance, s.x.clone())?),
        None => None,
    };
    let incumbent_objective = seeded.as_ref().filter(|s| s.is_feasible()).map(|s| s.objective);

    let mut result = OseaResult {
        status: OseaStatus::NoSolutionFound,
        solution: None,
        objective: None,
        reported_objective: None,
        source: None,
        gamma: 0.0,
        fix_set: Vec::new(),
        integer_indices: integer.clone(),
        iterations_run: 0,
        stop_reason: None,
        timing_basis: basis,
        timings,
        reduced_status: None,
        incumbent_objective,
        m_scale: 1.0,
        m_clamped: false,
        all_integer_costs_zero,
        fallback: false,
        ensemble: Ensemble::default(),
        scaled_cost_history: Vec::new(),
        nodes,
        lp_iterations: clock.pivots,
    };
    if search.proven_infeasible {
        result.status = OseaStatus::Infeasible;
        result.timings.total = clock.now();
        return Ok(result);
    }

    let mut ensemble = Ensemble::default();
    if let Some(s) = &seeded {
        ensemble.push(EnsembleMember {
            solution: s.clone(),
            provenance: vec![Provenance::SeededIncumbent],
            iteration: None,
        });
    }

    let scaling_cap = match opts.total_budget {
        Budget::Seconds(total) => {
            let left = (total - clock.now()).max(0.0);
            Some(opts.scaling_time_budget.map_or(left, |s| s.min(left)))
        }
        Budget::Nodes(_) => opts.scaling_time_budget,
    };
    let scaling_opts = ScalingOptions {
        n_max: opts.n_max,
        time_budget: scaling_cap.map(std::time::Duration::from_secs_f64),
        support_tol: opts.support_tol,
        warm_start: opts.warm_start,
        ..ScalingOptions::default()
    };
    let outcome = run_scaling_phase(&norm, &scaling_opts)?;
    clock.pivots += outcome.lp_iterations;
    let phase_start = clock.now();
    result.timings.scaling = phase_start - timings.incumbent;
    result.iterations_run = outcome.lp_solves;
    result.stop_reason = Some(outcome.stop);
    result.m_scale = outcome.state.m_scale;
    result.m_clamped = outcome.state.m_clamped;
    result.scaled_cost_history = outcome.state.cost_history.clone();

    let history = &outcome.state.history;
    ensemble.add_selection(instance, history, &rule.select(history))?;
    let fix_set = aggregate_fix_set(&ensemble, &norm, opts.support_tol);
    result.gamma = fix_set.len() as f64 / integer.len() as f64;
    result.fix_set = fix_set.iter().copied().collect();
    let reduced = norm.fix_variables_to_zero(&fix_set)?;
    result.timings.aggregation = clock.now() - phase_start;

    let remaining = match opts.total_budget {
        Budget::Seconds(total) => Budget::Seconds((total - clock.now()).max(1.0)),
        Budget::Nodes(total) => Budget::Nodes(total.saturating_sub(nodes).max(1)),
    };
    result.fallback = ensemble.is_empty();
    if result.fallback {
        log::warn!("ensemble is empty; solving the original instance");
    }
    let reduced_start = clock.now();
    let solved = solve_mip(if result.fallback { &norm } else { &reduced }, &BnbOptions::with_budget(remaining))?;
    clock.pivots += solved.lp_iterations;
    nodes += solved.nodes;
    result.timings.reduced = clock.now() - reduced_start;
    result.reduced_status = Some(solved.status);

    let mut candidates: Vec<(Solution, SolutionSource)> = Vec::new();
    if let Some(s) = &solved.incumbent {
        let src = if result.fallback { SolutionSource::FallbackSolve } else { SolutionSource::ReducedSolve };
        candidates.push((Solution::assess(instance, s.x.clone())?, src));
    }
    for m in &ensemble.members {
        let src = if m.provenance.contains(&Provenance::SeededIncumbent) {
            SolutionSource::SeededIncumbent
        } else {
            SolutionSource::EnsembleMember
        };
        candidates.push((m.solution.clone(), src));
    }
    let best = candidates
        .into_iter()
        .filter(|(s, _)| s.is_feasible())
        .fold(None::<(Solution, SolutionSource)>, |acc, cand| match acc {
            Some(a) if a.0.objective <= cand.0.objective => Some(a),
            _ => Some(cand),
        });

    if let Some((sol, src)) = best {
        result.status = OseaStatus::Feasible;
        result.objective = Some(sol.objective);
        result.reported_objective = Some(instance.report_objective(sol.objective));
        result.source = Some(src);
        result.solution = Some(sol);
    } else if result.fallback && solved.status == BnbStatus::Infeasible {
        result.status = OseaStatus::Infeasible;
    }
    result.ensemble = ensemble;
    result.nodes = nodes;
    result.lp_iterations = clock.pivots;
    result.timings.total = clock.now();
    Ok(result)
}

/// Number of integer columns fixed by `fix_set`, as a fraction of all
/// integer columns.
pub fn gamma(fix_set: &BTreeSet<usize>, integer_count: usize) -> f64 {
    if integer_count == 0 {
        0.0
    } else {
        fix_set.len() as f64 / integer_count as f64
    }
}
