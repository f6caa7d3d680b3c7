use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use osea::bench::report::{fmt_g, profiles_csv, records_csv, summary_csv, summary_text};
use osea::bench::{
    generate_instances, run_benchmark, BenchBudgets, BenchConfig, BenchInstance, GeneratorSpec,
    Metric, MethodRegistry, SolveMethod,
};
use osea::mip::{solve_mip, BnbOptions, BnbStatus};
use osea::mps::{read_mps, ParseOptions};
use osea::osea::{run_osea, OseaOptions, OseaResult, OseaStatus};
use osea::{Error, MilpInstance, ObjectiveSense, ProblemClass, VarKind};

use crate::{BenchArgs, CheckArgs, InputArgs, OseaArgs, SolveArgs};

/// Appends a line to the command's output buffer.
macro_rules! w {
    ($o:expr, $($arg:tt)*) => {{
        let _ = writeln!($o, $($arg)*);
    }};
}

pub const EXIT_INPUT: u8 = 2;
pub const EXIT_INFEASIBLE: u8 = 3;
pub const EXIT_INAPPLICABLE: u8 = 4;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotApplicable(_) => EXIT_INAPPLICABLE,
            _ => EXIT_INPUT,
        };
        Failure { code, message: e.to_string() }
    }
}

fn input_failure(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_INPUT, message: message.into() }
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| input_failure(format!("{}: {e}", path.display())))
}

fn load(input: &InputArgs) -> Result<MilpInstance, Failure> {
    let opts = ParseOptions { legacy_integer_bounds: input.legacy_integer_bounds };
    read_mps(&input.path, opts).map_err(|e| input_failure(format!("{}: {e}", input.path.display())))
}

pub fn check(args: &CheckArgs, o: &mut String) -> Result<u8, Failure> {
    let inst = load(&args.input)?;
    let count = |k: VarKind| inst.kinds().iter().filter(|&&v| v == k).count();
    w!(o, "name: {}", inst.name());
    w!(o, "rows: {}", inst.num_rows());
    w!(o, 
        "columns: {} (binary {}, integer {}, continuous {})",
        inst.num_cols(),
        count(VarKind::Binary),
        count(VarKind::Integer),
        count(VarKind::Continuous)
    );
    w!(o, "nonzeros: {}", inst.matrix().nnz());
    w!(o, "objective nonzeros: {}", inst.costs().iter().filter(|c| **c != 0.0).count());
    let sense = match inst.objective_sense() {
        ObjectiveSense::Minimize => "minimize",
        ObjectiveSense::Maximize => "maximize",
    };
    w!(o, "sense: {sense}");
    let class = inst.classify();
    w!(o, "class: {class}");
    if class == ProblemClass::Lp {
        w!(o, "note: OSEA is not applicable (no integer variables)");
    }
    Ok(0)
}

pub fn solve(args: &SolveArgs, o: &mut String) -> Result<u8, Failure> {
    if !(args.gap_tol.is_finite() && args.gap_tol >= 0.0) {
        return Err(input_failure(format!("invalid gap tolerance {}", args.gap_tol)));
    }
    let inst = load(&args.input)?;
    let mut opts = BnbOptions { gap_tolerance: args.gap_tol, ..BnbOptions::default() };
    if let Some(b) = args.time_limit {
        opts.apply_budget(b);
    }
    if let Some(n) = args.node_limit {
        if n == 0 {
            return Err(input_failure("node limit must be at least 1"));
        }
        opts.node_limit = Some(n);
    }
    let res = solve_mip(&inst, &opts)?;
    w!(o, "status: {:?}", res.status);
    match res.objective() {
        Some(z) => w!(o, "objective: {}", fmt_g(inst.report_objective(z))),
        None => w!(o, "objective: none"),
    }
    w!(o, "bound: {}", fmt_g(inst.report_objective(res.bound)));
    w!(o, "nodes: {}", res.nodes);
    w!(o, "lp_iterations: {}", res.lp_iterations);
    w!(o, "time_s: {}", fmt_g(res.wall_time));
    if let Some(path) = &args.write_sol {
        let mut out = String::new();
        if let Some(sol) = &res.incumbent {
            for (name, v) in inst.col_names().iter().zip(&sol.x) {
                if *v != 0.0 {
                    out.push_str(&format!("{name} {}\n", fmt_g(*v)));
                }
            }
        }
        write_file(path, &out)?;
    }
    Ok(if res.status == BnbStatus::Infeasible { EXIT_INFEASIBLE } else { 0 })
}

fn print_osea(inst: &MilpInstance, res: &OseaResult, o: &mut String) {
    w!(o, "status: {:?}", res.status);
    match res.reported_objective {
        Some(z) => w!(o, "objective: {}", fmt_g(z)),
        None => w!(o, "objective: none"),
    }
    if let Some(src) = res.source {
        w!(o, "source: {src:?}");
    }
    w!(o, "gamma: {}", fmt_g(res.gamma));
    w!(o, "fixed: {} of {} integer variables", res.fix_set.len(), res.integer_indices.len());
    w!(o, "iterations_run: {}", res.iterations_run);
    if let Some(stop) = res.stop_reason {
        w!(o, "stop_reason: {stop:?}");
    }
    if let Some(z) = res.incumbent_objective {
        w!(o, "incumbent_objective: {}", fmt_g(inst.report_objective(z)));
    }
    if let Some(s) = res.reduced_status {
        w!(o, "reduced_status: {s:?}");
    }
    w!(o, "ensemble_size: {}", res.ensemble.len());
    for m in &res.ensemble.members {
        let tags: Vec<String> = m.provenance.iter().map(|p| format!("{p:?}")).collect();
        let iter = m.iteration.map_or_else(String::new, |n| format!(" iteration {n}"));
        w!(o, 
            "  member: {}{iter} objective {} {:?}",
            tags.join("+"),
            fmt_g(inst.report_objective(m.solution.objective)),
            m.solution.status
        );
    }
    w!(o, "m_scale: {}", fmt_g(res.m_scale));
    if res.m_clamped {
        w!(o, "note: integer cost scale below 1 was clamped to 1");
    }
    if res.all_integer_costs_zero {
        w!(o, "note: all integer objective coefficients are zero");
    }
    if res.fallback {
        w!(o, "note: ensemble was empty; the original instance was solved directly");
    }
    let t = &res.timings;
    let unit = match res.timing_basis {
        osea::osea::TimingBasis::Wall => "wall",
        osea::osea::TimingBasis::Work => "work",
    };
    w!(o, "timing_basis: {unit}");
    w!(o, "time_incumbent_s: {}", fmt_g(t.incumbent));
    w!(o, "time_scaling_s: {}", fmt_g(t.scaling));
    w!(o, "time_aggregation_s: {}", fmt_g(t.aggregation));
    w!(o, "time_reduced_s: {}", fmt_g(t.reduced));
    w!(o, "time_total_s: {}", fmt_g(t.total));
}

pub fn osea(args: &OseaArgs, o: &mut String) -> Result<u8, Failure> {
    let inst = load(&args.input)?;
    let opts = OseaOptions {
        n_max: args.nmax,
        scaling_time_budget: args.scaling_budget,
        incumbent_budget: args.incumbent_budget,
        total_budget: args.total_budget,
        support_tol: args.support_tol,
        subset_rule: args.subset_rule.clone(),
        warm_start: !args.no_warm_start,
    };
    let res = run_osea(&inst, &opts)?;
    if let Some(path) = &args.report_json {
        let json = serde_json::to_string_pretty(&res)
            .map_err(|e| input_failure(format!("cannot encode report: {e}")))?;
        write_file(path, &(json + "\n"))?;
    }
    print_osea(&inst, &res, o);
    Ok(if res.status == OseaStatus::Infeasible { EXIT_INFEASIBLE } else { 0 })
}

fn is_mps(path: &Path) -> bool {
    let name = path.file_name().map(|n| n.to_string_lossy().to_ascii_lowercase()).unwrap_or_default();
    name.ends_with(".mps") || name.ends_with(".mps.gz")
}

fn problem_id(path: &Path) -> String {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let lower = name.to_ascii_lowercase();
    for ext in [".mps.gz", ".mps"] {
        if lower.ends_with(ext) {
            return name[..name.len() - ext.len()].to_string();
        }
    }
    name
}

fn list_inputs(input: &Path) -> Result<Vec<PathBuf>, Failure> {
    let io = |e: std::io::Error| input_failure(format!("{}: {e}", input.display()));
    if input.is_dir() {
        let mut files: Vec<PathBuf> = fs::read_dir(input)
            .map_err(io)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file() && is_mps(p))
            .collect();
        files.sort();
        return Ok(files);
    }
    let text = fs::read_to_string(input).map_err(io)?;
    let base = input.parent().unwrap_or(Path::new("."));
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| base.join(l))
        .collect())
}

pub fn bench(args: &BenchArgs, o: &mut String) -> Result<u8, Failure> {
    let registry = MethodRegistry::default();
    let methods: Vec<Arc<dyn SolveMethod>> = args
        .methods
        .iter()
        .map(|m| registry.get(m.trim()))
        .collect::<Result<_, _>>()?;
    if args.workers == 0 {
        return Err(input_failure("workers must be at least 1"));
    }

    let instances: Vec<BenchInstance> = match (&args.generate, &args.input) {
        (Some(spec), _) => {
            let spec: GeneratorSpec = spec.parse()?;
            generate_instances(args.seed, &spec)?
                .into_iter()
                .map(|g| BenchInstance { id: g.instance.name().to_string(), instance: g.instance })
                .collect()
        }
        (None, Some(input)) => {
            let mut out = Vec::new();
            for path in list_inputs(input)? {
                match read_mps(&path, ParseOptions::default()) {
                    Ok(instance) => out.push(BenchInstance { id: problem_id(&path), instance }),
                    Err(e) => log::warn!("{}: skipped: {e}", path.display()),
                }
            }
            out
        }
        (None, None) => {
            return Err(input_failure(
                "bench needs an instance directory, a manifest, or --generate <spec>",
            ))
        }
    };
    if instances.is_empty() {
        return Err(input_failure(
            "no instances to benchmark; usage: osea bench <dir|manifest> | --generate <spec> [--seed N] [--out DIR]",
        ));
    }

    let config = BenchConfig {
        budgets: BenchBudgets {
            total: args.total_budget,
            incumbent: args.incumbent_budget,
            n_max: args.nmax,
            oracle: args.oracle_budget,
        },
        workers: args.workers,
        ..BenchConfig::default()
    };
    let report = run_benchmark(&instances, &methods, &config)?;

    fs::create_dir_all(&args.out)
        .map_err(|e| input_failure(format!("{}: {e}", args.out.display())))?;
    write_file(&args.out.join("records.csv"), &records_csv(&report.records)?)?;
    for metric in [Metric::Time, Metric::Gap] {
        let curves: Vec<_> = report.profiles.iter().filter(|c| c.metric == metric).cloned().collect();
        let path = args.out.join(format!("profile_{}.csv", metric.label()));
        write_file(&path, &profiles_csv(&curves)?)?;
    }
    let text = summary_text(&report.summary);
    write_file(&args.out.join("summary.txt"), &text)?;
    write_file(&args.out.join("summary.csv"), &summary_csv(&report.summary)?)?;
    o.push_str(&text);
    w!(o, "records: {}", report.records.len());
    w!(o, "output: {}", args.out.display());
    Ok(0)
}
