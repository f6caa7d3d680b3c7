//! Benchmark harness: instance generation, metrics, method registry and reports.

pub mod generate;
pub mod harness;
pub mod metrics;
pub mod report;

pub use generate::{generate_instances, GeneratedInstance, GeneratorSpec};
pub use harness::{
    reference_bound, run_benchmark, summarize, BenchBudgets, BenchConfig, BenchInstance,
    BenchReport, MethodRegistry, MethodRun, OseaMethod, RunRecord, SolveMethod, StandardMethod,
    Summary,
};
pub use metrics::{
    build_profile, compute_gap, default_tau_grid, paired_t_test, performance_ratios, Metric,
    ProfileCurve,
};
