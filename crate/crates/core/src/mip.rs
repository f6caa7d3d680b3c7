//! LP-based branch-and-bound.
//!
//! Branching picks the most fractional integer column (lowest index on
//! ties). Nodes are explored depth-first until the first incumbent appears,
//! then in best-bound order. A rounding heuristic runs once at the root.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::error::Result;
use crate::lp::{relax, LpOptions, LpSolver, LpStatus};
use crate::model::{MilpInstance, Solution, SolutionStatus};

#[derive(Debug, Clone, PartialEq)]
pub struct BnbOptions {
    pub time_limit: Option<Duration>,
    pub node_limit: Option<u64>,
    /// Relative optimality gap at which a node is pruned.
    pub gap_tolerance: f64,
    pub integrality_tol: f64,
    pub root_rounding: bool,
    pub lp: LpOptions,
}

impl Default for BnbOptions {
    fn default() -> Self {
        BnbOptions {
            time_limit: None,
            node_limit: None,
            gap_tolerance: 1e-6,
            integrality_tol: 1e-6,
            root_rounding: true,
            lp: LpOptions::default(),
        }
    }
}

impl BnbOptions {
    pub fn with_budget(budget: Budget) -> Self {
        let mut opts = BnbOptions::default();
        opts.apply_budget(budget);
        opts
    }

    pub fn apply_budget(&mut self, budget: Budget) {
        match budget {
            Budget::Seconds(_) => {
                self.time_limit = budget.as_duration();
                self.node_limit = None;
            }
            Budget::Nodes(n) => {
                self.node_limit = Some(n);
                self.time_limit = None;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BnbStatus {
    Optimal,
    /// A limit was hit with an incumbent in hand.
    Feasible,
    Infeasible,
    /// The root relaxation is unbounded.
    Unbounded,
    NoSolutionFound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BnbResult {
    pub status: BnbStatus,
    pub incumbent: Option<Solution>,
    /// Lower bound in minimization orientation.
    pub bound: f64,
    pub nodes: u64,
    pub wall_time: f64,
    pub lp_iterations: u64,
    /// `(node, objective)` each time the incumbent improved.
    pub incumbent_trace: Vec<(u64, f64)>,
}

impl BnbResult {
    pub fn objective(&self) -> Option<f64> {
        self.incumbent.as_ref().map(|s| s.objective)
    }
}

#[derive(Debug, Clone)]
struct Node {
    id: u64,
    bound: f64,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // max-heap: smallest bound first, then oldest node
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.id.cmp(&self.id))
    }
}

struct Search<'a> {
    instance: &'a MilpInstance,
    opts: &'a BnbOptions,
    integer: Vec<usize>,
    incumbent: Option<Solution>,
    trace: Vec<(u64, f64)>,
    nodes: u64,
    lp_iterations: u64,
    next_id: u64,
    /// Smallest LP bound among nodes pruned only by the gap tolerance.
    gap_pruned: f64,
    /// Some subtree could not be bounded (LP iteration limit).
    incomplete: bool,
}

impl Search<'_> {
    fn cutoff(&self) -> f64 {
        match &self.incumbent {
            Some(s) => s.objective - self.opts.gap_tolerance * s.objective.abs().max(1.0),
            None => f64::INFINITY,
        }
    }

    fn offer(&mut self, x: Vec<f64>) -> bool {
        let mut snapped = x.clone();
        for &j in &self.integer {
            snapped[j] = snapped[j].round();
        }
        let candidate = [snapped, x].into_iter().find_map(|cand| {
            let sol = Solution::assess(self.instance, cand).ok()?;
            (sol.status == SolutionStatus::Feasible).then_some(sol)
        });
        match candidate {
            Some(sol)
                if self.incumbent.as_ref().is_none_or(|inc| sol.objective < inc.objective) =>
            {
                log::debug!("node {}: incumbent {}", self.nodes, sol.objective);
                self.trace.push((self.nodes, sol.objective));
                self.incumbent = Some(sol);
                true
            }
            _ => false,
        }
    }

    fn most_fractional(&self, x: &[f64]) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for &j in &self.integer {
            let frac = x[j] - x[j].floor();
            let dist = frac.min(1.0 - frac);
            if dist > self.opts.integrality_tol && best.is_none_or(|(_, d)| dist > d) {
                best = Some((j, dist));
            }
        }
        best.map(|(j, _)| j)
    }

    fn child(&mut self, parent: &Node, bound: f64) -> Node {
        self.next_id += 1;
        Node { id: self.next_id, bound, lower: parent.lower.clone(), upper: parent.upper.clone() }
    }
}

/// Branch-and-bound on `instance` (maximization is handled by normalizing).
pub fn solve_mip(instance: &MilpInstance, opts: &BnbOptions) -> Result<BnbResult> {
    instance.validate()?;
    let start = Instant::now();
    let normalized = instance.normalize();
    let relaxed = relax(&normalized);
    let mut lp = LpSolver::new(&relaxed)?;

    let mut search = Search {
        instance: &normalized,
        opts,
        integer: normalized.integer_indices(),
        incumbent: None,
        trace: Vec::new(),
        nodes: 0,
        lp_iterations: 0,
        next_id: 0,
        gap_pruned: f64::INFINITY,
        incomplete: false,
    };

    let root = Node {
        id: 0,
        bound: f64::NEG_INFINITY,
        lower: normalized.lower().to_vec(),
        upper: normalized.upper().to_vec(),
    };
    let mut heap: BinaryHeap<Node> = BinaryHeap::new();
    let mut dive: Option<Node> = Some(root);
    let mut limit_hit = false;
    let mut unbounded = false;

    loop {
        let node = match dive.take() {
            Some(n) => n,
            None => match heap.pop() {
                Some(n) => n,
                None => break,
            },
        };
        if node.bound >= search.cutoff() {
            if search.incumbent.as_ref().is_some_and(|inc| node.bound < inc.objective) {
                search.gap_pruned = search.gap_pruned.min(node.bound);
            }
            continue;
        }
        let out_of_nodes = opts.node_limit.is_some_and(|lim| search.nodes >= lim);
        let out_of_time = opts.time_limit.is_some_and(|lim| start.elapsed() >= lim);
        if out_of_nodes || out_of_time {
            heap.push(node);
            limit_hit = true;
            break;
        }
        search.nodes += 1;

        lp.set_bounds(&node.lower, &node.upper)?;
        let res = lp.solve(&opts.lp);
        search.lp_iterations += res.iterations as u64;
        match res.status {
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => {
                if search.nodes == 1 {
                    unbounded = true;
                    break;
                }
                // a child of a bounded parent cannot be unbounded; treat as unresolved
                search.incomplete = true;
                search.gap_pruned = search.gap_pruned.min(node.bound);
                continue;
            }
            LpStatus::IterationLimit => {
                log::warn!("node {}: LP iteration limit, subtree left unexplored", search.nodes);
                search.incomplete = true;
                search.gap_pruned = search.gap_pruned.min(node.bound);
                continue;
            }
            LpStatus::Optimal => {}
        }
        let node_bound = res.objective.max(node.bound);
        if node_bound >= search.cutoff() {
            if search.incumbent.as_ref().is_some_and(|inc| node_bound < inc.objective) {
                search.gap_pruned = search.gap_pruned.min(node_bound);
            }
            continue;
        }
        if search.nodes == 1 && opts.root_rounding {
            let mut rounded = res.x.clone();
            for &j in &search.integer {
                rounded[j] = rounded[j].round();
            }
            search.offer(rounded);
        }
        let Some(j) = search.most_fractional(&res.x) else {
            search.offer(res.x);
            continue;
        };
        let v = res.x[j];
        let mut down = search.child(&node, node_bound);
        down.upper[j] = v.floor();
        let mut up = search.child(&node, node_bound);
        up.lower[j] = v.ceil();
        if search.incumbent.is_none() {
            // plunge toward the nearer integer
            let (first, second) = if v - v.floor() > 0.5 { (up, down) } else { (down, up) };
            heap.push(second);
            dive = Some(first);
        } else {
            heap.push(down);
            heap.push(up);
        }
    }

    let wall_time = start.elapsed().as_secs_f64();
    let open_bound = heap.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min);
    let incumbent_obj = search.objective();
    let status = if unbounded {
        BnbStatus::Unbounded
    } else if limit_hit || search.incomplete {
        if search.incumbent.is_some() { BnbStatus::Feasible } else { BnbStatus::NoSolutionFound }
    } else if search.incumbent.is_some() {
        BnbStatus::Optimal
    } else {
        BnbStatus::Infeasible
    };
    let bound = match status {
        BnbStatus::Unbounded => f64::NEG_INFINITY,
        BnbStatus::Infeasible => f64::INFINITY,
        _ => open_bound.min(search.gap_pruned).min(incumbent_obj.unwrap_or(f64::INFINITY)),
    };
    Ok(BnbResult {
        status,
        incumbent: search.incumbent,
        bound,
        nodes: search.nodes,
        wall_time,
        lp_iterations: search.lp_iterations,
        incumbent_trace: search.trace,
    })
}

impl Search<'_> {
    fn objective(&self) -> Option<f64> {
        self.incumbent.as_ref().map(|s| s.objective)
    }
}

/// Outcome of a short incumbent search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncumbentSearch {
    pub incumbent: Option<Solution>,
    /// The search proved the instance has no feasible point.
    pub proven_infeasible: bool,
    pub result: BnbResult,
}

/// Runs branch-and-bound under `budget` and keeps whatever incumbent it found.
pub fn find_incumbent(instance: &MilpInstance, budget: Budget) -> Result<IncumbentSearch> {
    let result = solve_mip(instance, &BnbOptions::with_budget(budget))?;
    Ok(IncumbentSearch {
        incumbent: result.incumbent.clone(),
        proven_infeasible: result.status == BnbStatus::Infeasible,
        result,
    })
}
