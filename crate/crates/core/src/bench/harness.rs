//! Method registry and the benchmark driver.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::bench::metrics::{
    build_profile, compute_gap, default_tau_grid, paired_t_test, performance_ratios, Metric,
    PairedTest, ProfileCurve,
};
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::lp::{relax, solve_lp, LpOptions, LpStatus};
use crate::mip::{solve_mip, BnbOptions, BnbStatus};
use crate::model::MilpInstance;
use crate::osea::{run_osea, OseaOptions, WORK_SECONDS_PER_PIVOT};

/// One (problem, method) observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub problem_id: String,
    pub method: String,
    pub status: String,
    pub wall_time: f64,
    /// Minimization-oriented objective.
    pub objective: Option<f64>,
    pub gap_percent: Option<f64>,
    pub gamma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchBudgets {
    pub total: Budget,
    pub incumbent: Budget,
    pub n_max: usize,
    /// Limit for the reference solve that supplies the bound; `None` is uncapped.
    pub oracle: Option<Budget>,
}

impl Default for BenchBudgets {
    fn default() -> Self {
        BenchBudgets {
            total: Budget::Seconds(60.0),
            incumbent: Budget::Seconds(1.0),
            n_max: 50,
            oracle: None,
        }
    }
}

/// What a method reports for one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodRun {
    pub status: String,
    pub objective: Option<f64>,
    pub gamma: Option<f64>,
    pub wall_time: f64,
}

/// A solution method the harness can compare.
pub trait SolveMethod: Send + Sync {
    fn name(&self) -> &'static str;
    fn run(&self, instance: &MilpInstance, budgets: &BenchBudgets) -> Result<MethodRun>;
}

/// Branch-and-bound on the whole instance under the total budget.
#[derive(Debug, Clone, Copy, Default)]
pub struct StandardMethod;

impl SolveMethod for StandardMethod {
    fn name(&self) -> &'static str {
        "Standard"
    }

    fn run(&self, instance: &MilpInstance, budgets: &BenchBudgets) -> Result<MethodRun> {
        let res = solve_mip(instance, &BnbOptions::with_budget(budgets.total))?;
        let wall_time = if budgets.total.is_deterministic() {
            res.lp_iterations as f64 * WORK_SECONDS_PER_PIVOT
        } else {
            res.wall_time
        };
        Ok(MethodRun {
            status: format!("{:?}", res.status),
            objective: res.objective(),
            gamma: None,
            wall_time,
        })
    }
}

/// The objective scaling ensemble pipeline.
#[derive(Debug, Clone, Copy, Default)]
pub struct OseaMethod;

impl SolveMethod for OseaMethod {
    fn name(&self) -> &'static str {
        "OSEA"
    }

    fn run(&self, instance: &MilpInstance, budgets: &BenchBudgets) -> Result<MethodRun> {
        let opts = OseaOptions {
            n_max: budgets.n_max,
            incumbent_budget: budgets.incumbent,
            total_budget: budgets.total,
            ..OseaOptions::default()
        };
        let res = run_osea(instance, &opts)?;
        Ok(MethodRun {
            status: format!("{:?}", res.status),
            objective: res.objective,
            gamma: Some(res.gamma),
            wall_time: res.timings.total,
        })
    }
}

/// Methods by name.
#[derive(Clone)]
pub struct MethodRegistry {
    methods: BTreeMap<&'static str, Arc<dyn SolveMethod>>,
}

impl Default for MethodRegistry {
    fn default() -> Self {
        let mut reg = MethodRegistry { methods: BTreeMap::new() };
        reg.register(Arc::new(OseaMethod));
        reg.register(Arc::new(StandardMethod));
        reg
    }
}

impl MethodRegistry {
    pub fn register(&mut self, method: Arc<dyn SolveMethod>) {
        self.methods.insert(method.name(), method);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn SolveMethod>> {
        self.methods
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case(name))
            .map(|(_, m)| m.clone())
            .ok_or_else(|| Error::Input(format!("unknown method `{name}`")))
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.methods.keys().copied().collect()
    }
}

#[derive(Debug, Clone)]
pub struct BenchInstance {
    pub id: String,
    pub instance: MilpInstance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub budgets: BenchBudgets,
    pub workers: usize,
    pub tau_grid: Vec<f64>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig { budgets: BenchBudgets::default(), workers: 1, tau_grid: default_tau_grid() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: String,
    pub runs: usize,
    pub with_solution: usize,
    pub mean_time: f64,
    pub mean_gap: Option<f64>,
    pub mean_gamma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSummary {
    pub first: String,
    pub second: String,
    pub time_wins: (usize, usize),
    pub time_ties: usize,
    pub gap_wins: (usize, usize),
    pub gap_ties: usize,
    /// Paired test of `first - second`.
    pub time_test: Option<PairedTest>,
    pub gap_test: Option<PairedTest>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub problems: usize,
    pub methods: Vec<MethodSummary>,
    pub pairs: Vec<PairSummary>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub records: Vec<RunRecord>,
    pub summary: Summary,
    pub profiles: Vec<ProfileCurve>,
}

/// Reference bound: the optimum when the oracle proves it, else the root
/// LP relaxation value. `None` for infeasible instances.
pub fn reference_bound(instance: &MilpInstance, oracle: Option<Budget>) -> Result<Option<f64>> {
    let mut opts = BnbOptions::default();
    if let Some(b) = oracle {
        opts.apply_budget(b);
    }
    let res = solve_mip(instance, &opts)?;
    match res.status {
        BnbStatus::Optimal => Ok(res.objective()),
        BnbStatus::Infeasible | BnbStatus::Unbounded => Ok(None),
        BnbStatus::Feasible | BnbStatus::NoSolutionFound => {
            let lp = solve_lp(&relax(&instance.normalize()), &LpOptions::default())?;
            Ok((lp.status == LpStatus::Optimal).then_some(lp.objective))
        }
    }
}

fn run_one(
    item: &BenchInstance,
    methods: &[Arc<dyn SolveMethod>],
    budgets: &BenchBudgets,
) -> Vec<RunRecord> {
    let bound = match reference_bound(&item.instance, budgets.oracle) {
        Ok(b) => b,
        Err(e) => {
            log::warn!("{}: reference solve failed: {e}", item.id);
            None
        }
    };
    methods
        .iter()
        .map(|m| {
            let mut rec = RunRecord {
                problem_id: item.id.clone(),
                method: m.name().to_string(),
                status: String::new(),
                wall_time: 0.0,
                objective: None,
                gap_percent: None,
                gamma: None,
            };
            match m.run(&item.instance, budgets) {
                Ok(run) => {
                    rec.status = run.status;
                    rec.wall_time = run.wall_time;
                    rec.objective = run.objective;
                    rec.gamma = run.gamma;
                    rec.gap_percent = match (bound, run.objective) {
                        (Some(zb), Some(z)) => compute_gap(zb, z).ok(),
                        _ => None,
                    };
                }
                Err(Error::NotApplicable(msg)) => {
                    log::info!("{}: {} not applicable: {msg}", item.id, m.name());
                    rec.status = "NotApplicable".into();
                }
                Err(e) => {
                    log::warn!("{}: {} failed: {e}", item.id, m.name());
                    rec.status = "Error".into();
                }
            }
            rec
        })
        .collect()
}

/// Runs every method on every instance. Records come back sorted by
/// problem id, then method name, whatever the worker count.
pub fn run_benchmark(
    instances: &[BenchInstance],
    methods: &[Arc<dyn SolveMethod>],
    config: &BenchConfig,
) -> Result<BenchReport> {
    if methods.is_empty() {
        return Err(Error::Input("no methods selected".into()));
    }
    let next = AtomicUsize::new(0);
    let collected = Mutex::new(Vec::new());
    let workers = config.workers.clamp(1, instances.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(item) = instances.get(i) else { break };
                let recs = run_one(item, methods, &config.budgets);
                collected.lock().expect("worker panicked").extend(recs);
            });
        }
    });
    let mut records = collected.into_inner().expect("worker panicked");
    records.sort_by(|a, b| (&a.problem_id, &a.method).cmp(&(&b.problem_id, &b.method)));

    let names: Vec<String> = methods.iter().map(|m| m.name().to_string()).collect();
    let summary = summarize(&records, &names);
    let mut profiles = Vec::new();
    for metric in [Metric::Time, Metric::Gap] {
        let ratios = collect_ratios(&records, &names, metric);
        if ratios.values().any(|v| !v.is_empty()) {
            profiles.extend(build_profile(&ratios, &config.tau_grid, metric));
        }
    }
    Ok(BenchReport { records, summary, profiles })
}

fn metric_value(r: &RunRecord, metric: Metric) -> Option<f64> {
    match metric {
        Metric::Time => (r.status != "Error" && r.status != "NotApplicable").then_some(r.wall_time),
        Metric::Gap => r.gap_percent,
    }
}

fn by_problem(records: &[RunRecord]) -> BTreeMap<&str, BTreeMap<&str, &RunRecord>> {
    let mut out: BTreeMap<&str, BTreeMap<&str, &RunRecord>> = BTreeMap::new();
    for r in records {
        out.entry(&r.problem_id).or_default().insert(&r.method, r);
    }
    out
}

/// Per-method ratio lists over the problems where every method has a value.
pub fn collect_ratios(
    records: &[RunRecord],
    methods: &[String],
    metric: Metric,
) -> BTreeMap<String, Vec<f64>> {
    let mut out: BTreeMap<String, Vec<f64>> =
        methods.iter().map(|m| (m.clone(), Vec::new())).collect();
    for (problem, recs) in by_problem(records) {
        let values: Option<BTreeMap<String, f64>> = methods
            .iter()
            .map(|m| recs.get(m.as_str()).and_then(|r| metric_value(r, metric)).map(|v| (m.clone(), v)))
            .collect();
        let Some(values) = values else {
            log::warn!("{problem}: excluded from {} profile, a method has no value", metric.label());
            continue;
        };
        for (m, r) in performance_ratios(&values) {
            out.get_mut(&m).expect("method listed").push(r);
        }
    }
    out
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

pub fn summarize(records: &[RunRecord], methods: &[String]) -> Summary {
    let grouped = by_problem(records);
    let method_summaries = methods
        .iter()
        .map(|m| {
            let mine: Vec<&RunRecord> = records.iter().filter(|r| &r.method == m).collect();
            let times: Vec<f64> = mine.iter().filter_map(|r| metric_value(r, Metric::Time)).collect();
            let gaps: Vec<f64> = mine.iter().filter_map(|r| r.gap_percent).collect();
            let gammas: Vec<f64> = mine.iter().filter_map(|r| r.gamma).collect();
            MethodSummary {
                method: m.clone(),
                runs: mine.len(),
                with_solution: mine.iter().filter(|r| r.objective.is_some()).count(),
                mean_time: mean(&times).unwrap_or(0.0),
                mean_gap: mean(&gaps),
                mean_gamma: mean(&gammas),
            }
        })
        .collect();

    let mut pairs = Vec::new();
    for (i, a) in methods.iter().enumerate() {
        for b in &methods[i + 1..] {
            let mut pair = PairSummary {
                first: a.clone(),
                second: b.clone(),
                time_wins: (0, 0),
                time_ties: 0,
                gap_wins: (0, 0),
                gap_ties: 0,
                time_test: None,
                gap_test: None,
            };
            for metric in [Metric::Time, Metric::Gap] {
                let (mut xa, mut xb) = (Vec::new(), Vec::new());
                for recs in grouped.values() {
                    let va = recs.get(a.as_str()).and_then(|r| metric_value(r, metric));
                    let vb = recs.get(b.as_str()).and_then(|r| metric_value(r, metric));
                    if let (Some(va), Some(vb)) = (va, vb) {
                        xa.push(va);
                        xb.push(vb);
                    }
                }
                let wins = (
                    xa.iter().zip(&xb).filter(|(x, y)| x < y).count(),
                    xa.iter().zip(&xb).filter(|(x, y)| x > y).count(),
                );
                let ties = xa.iter().zip(&xb).filter(|(x, y)| x == y).count();
                let test = paired_t_test(&xa, &xb);
                match metric {
                    Metric::Time => {
                        pair.time_wins = wins;
                        pair.time_ties = ties;
                        pair.time_test = test;
                    }
                    Metric::Gap => {
                        pair.gap_wins = wins;
                        pair.gap_ties = ties;
                        pair.gap_test = test;
                    }
                }
            }
            pairs.push(pair);
        }
    }
    Summary { problems: grouped.len(), methods: method_summaries, pairs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::generate::{generate_instances, GeneratorSpec};

    fn batch(count: usize) -> Vec<BenchInstance> {
        let spec = GeneratorSpec { count, n: 6..=8, m: 3..=5, ..GeneratorSpec::default() };
        generate_instances(3, &spec)
            .unwrap()
            .into_iter()
            .map(|g| BenchInstance { id: g.instance.name().to_string(), instance: g.instance })
            .collect()
    }

    fn det_config(workers: usize) -> BenchConfig {
        BenchConfig {
            budgets: BenchBudgets {
                total: Budget::Nodes(500),
                incumbent: Budget::Nodes(5),
                n_max: 20,
                oracle: None,
            },
            workers,
            ..BenchConfig::default()
        }
    }

    fn both() -> Vec<Arc<dyn SolveMethod>> {
        let reg = MethodRegistry::default();
        vec![reg.get("OSEA").unwrap(), reg.get("standard").unwrap()]
    }

    #[test]
    fn one_record_per_pair() {
        let report = run_benchmark(&batch(5), &both(), &det_config(1)).unwrap();
        assert_eq!(report.records.len(), 10);
        assert_eq!(report.summary.problems, 5);
        assert!(report.records.iter().all(|r| r.gap_percent.is_none() || r.objective.is_some()));
        assert!(report.records.iter().all(|r| r.wall_time >= 0.0));
    }

    #[test]
    fn worker_count_does_not_change_records() {
        let a = run_benchmark(&batch(6), &both(), &det_config(1)).unwrap();
        let b = run_benchmark(&batch(6), &both(), &det_config(3)).unwrap();
        assert_eq!(a.records, b.records);
    }

    /// Same method registered twice under different names.
    struct Alias(&'static str);

    impl SolveMethod for Alias {
        fn name(&self) -> &'static str {
            self.0
        }
        fn run(&self, instance: &MilpInstance, budgets: &BenchBudgets) -> Result<MethodRun> {
            StandardMethod.run(instance, budgets)
        }
    }

    #[test]
    fn self_comparison_is_all_ties() {
        let methods: Vec<Arc<dyn SolveMethod>> = vec![Arc::new(Alias("A")), Arc::new(Alias("B"))];
        let report = run_benchmark(&batch(4), &methods, &det_config(2)).unwrap();
        let names = vec!["A".to_string(), "B".to_string()];
        for ratios in collect_ratios(&report.records, &names, Metric::Time).values() {
            assert!(ratios.iter().all(|&r| r == 1.0));
        }
        let curves: Vec<_> = report.profiles.iter().filter(|c| c.metric == Metric::Time).collect();
        assert_eq!(curves[0].rho, curves[1].rho);
        assert_eq!(report.summary.pairs[0].time_ties, 4);
    }

    #[test]
    fn unknown_method() {
        assert!(MethodRegistry::default().get("gurobi").is_err());
        assert_eq!(MethodRegistry::default().names(), vec!["OSEA", "Standard"]);
    }
}
