//! Acceptance suite. Prints one line per criterion and exits nonzero if
//! any criterion fails.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use osea::bench::metrics::{build_profile, compute_gap, default_tau_grid, Metric};
use osea::bench::{generate_instances, GeneratorSpec};
use osea::lp::{solve_lp, LpOptions, LpStatus};
use osea::mip::{solve_mip, BnbOptions, BnbStatus};
use osea::mps::{parse_mps, write_mps};
use osea::osea::{run_osea, run_scaling_phase, OseaOptions, ScalingOptions, StopReason};
use osea::{Budget, ConstraintSense, MilpInstance, ProblemClass, VarKind};
use osea_testkit::{
    binary_enumeration, count_within, lp_vertex_enumeration, zero_agreement_scan, DenseProblem,
    LpOracle,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LP_TOL: f64 = 1e-6;
const OBJ_TOL: f64 = 1e-9;
const TRACE_TOL: f64 = 1e-9;
const GAP_TOL: f64 = 1e-12;
const MIP_TIME_LIMIT: Duration = Duration::from_secs(300);

fn to_dense(inst: &MilpInstance) -> DenseProblem {
    let n = inst.num_cols();
    let m = inst.num_rows();
    let mut rows = vec![vec![0.0; n]; m];
    for e in inst.matrix().entries() {
        rows[e.row][e.col] = e.value;
    }
    let (row_lo, row_hi) = (0..m).map(|i| inst.row_bounds(i)).unzip();
    let c = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            inst.evaluate_objective(&e).unwrap()
        })
        .collect();
    DenseProblem {
        c,
        rows,
        row_lo,
        row_hi,
        lower: inst.lower().to_vec(),
        upper: inst.upper().to_vec(),
        integer: inst.kinds().iter().map(|k| k.is_integer()).collect(),
    }
}

fn mip_oracle() -> String {
    let spec = GeneratorSpec {
        count: 200,
        n: 4..=16,
        m: 1..=12,
        classes: vec![ProblemClass::Bp],
        guaranteed_feasible: false,
        ..GeneratorSpec::default()
    };
    let start = Instant::now();
    let set = generate_instances(2024, &spec).unwrap();
    let mut infeasible = 0;
    for g in &set {
        let inst = &g.instance;
        assert!(inst.num_cols() <= 16 && inst.num_rows() <= 12);
        assert_eq!(inst.classify(), ProblemClass::Bp);
        let res = solve_mip(inst, &BnbOptions::default()).unwrap();
        match binary_enumeration(&to_dense(inst)) {
            None => {
                infeasible += 1;
                assert_eq!(res.status, BnbStatus::Infeasible, "{}", inst.name());
            }
            Some((z, _)) => {
                assert_eq!(res.status, BnbStatus::Optimal, "{}", inst.name());
                let got = res.objective().unwrap();
                assert!((got - z).abs() <= OBJ_TOL, "{}: {got} vs {z}", inst.name());
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed < MIP_TIME_LIMIT, "took {elapsed:?}");
    format!("200/200 agree ({infeasible} infeasible), {:.2} s", elapsed.as_secs_f64())
}

fn random_lp(rng: &mut ChaCha8Rng, k: usize) -> MilpInstance {
    let n = rng.gen_range(1..=6);
    let m = rng.gen_range(0..=6);
    let mut b = MilpInstance::builder(format!("lp{k}"));
    for j in 0..n {
        let lo = rng.gen_range(-3..=1) as f64;
        let up = lo + rng.gen_range(0..=5) as f64;
        b.add_column(format!("x{j}"), rng.gen_range(-6..=6) as f64, lo, up, VarKind::Continuous);
    }
    for i in 0..m {
        let sense = match rng.gen_range(0..4) {
            0 => ConstraintSense::GreaterEqual,
            1 => ConstraintSense::LessEqual,
            2 => ConstraintSense::Equal,
            _ => {
                let low = rng.gen_range(-6..=4) as f64;
                ConstraintSense::Range { low, high: low + rng.gen_range(0..=6) as f64 }
            }
        };
        let r = b.add_row(format!("r{i}"), sense, rng.gen_range(-6..=8) as f64);
        for j in 0..n {
            if rng.gen_bool(0.7) {
                b.set_coefficient(r, j, rng.gen_range(-4..=4) as f64);
            }
        }
    }
    b.build().unwrap()
}

fn lp_oracle() -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let (mut feasible, mut infeasible) = (0, 0);
    for k in 0..200 {
        let inst = random_lp(&mut rng, k);
        let res = solve_lp(&inst, &LpOptions::default()).unwrap();
        match lp_vertex_enumeration(&to_dense(&inst)) {
            LpOracle::Infeasible => {
                infeasible += 1;
                assert_eq!(res.status, LpStatus::Infeasible, "lp{k}");
            }
            LpOracle::Optimal { objective, .. } => {
                feasible += 1;
                assert_eq!(res.status, LpStatus::Optimal, "lp{k}");
                assert!((res.objective - objective).abs() <= LP_TOL, "lp{k}: {} vs {objective}", res.objective);
            }
        }
    }
    format!("{feasible} feasible within {LP_TOL:e}, {infeasible} infeasible statuses agree")
}

struct SoundnessStats {
    runs: usize,
    scaled_costs_checked: usize,
    stops: BTreeMap<String, usize>,
    mean_gamma: f64,
}

fn osea_suite() -> SoundnessStats {
    let spec = GeneratorSpec {
        count: 100,
        n: 6..=30,
        m: 2..=20,
        integer_fraction: 0.7,
        guaranteed_feasible: true,
        ..GeneratorSpec::default()
    };
    let opts = OseaOptions {
        incumbent_budget: Budget::Seconds(1.0),
        total_budget: Budget::Seconds(60.0),
        n_max: 50,
        ..OseaOptions::default()
    };
    let mut stats = SoundnessStats { runs: 0, scaled_costs_checked: 0, stops: BTreeMap::new(), mean_gamma: 0.0 };
    for g in generate_instances(31, &spec).unwrap() {
        let inst = &g.instance;
        let ints = inst.integer_indices().len();
        assert!(inst.num_cols() <= 30 && inst.num_rows() <= 20);
        assert!(2 * ints >= inst.num_cols(), "{}: {ints} of {} integer", inst.name(), inst.num_cols());
        let opt = solve_mip(inst, &BnbOptions::default()).unwrap();
        assert_eq!(opt.status, BnbStatus::Optimal, "{}", inst.name());
        let z_opt = opt.objective().unwrap();
        let res = run_osea(inst, &opts).unwrap();

        let sol = res.solution.as_ref().unwrap_or_else(|| panic!("{}: no solution", inst.name()));
        assert!(inst.check_feasibility(&sol.x, 1e-6).unwrap().is_feasible(), "{}", inst.name());
        let z = res.objective.unwrap();
        assert!(z >= z_opt - OBJ_TOL, "{}: {z} < optimum {z_opt}", inst.name());
        if let Some(z_inc) = res.incumbent_objective {
            assert!(z <= z_inc + OBJ_TOL, "{}: {z} > incumbent {z_inc}", inst.name());
        }
        assert!((0.0..=1.0).contains(&res.gamma));
        let members: Vec<Vec<f64>> = res.ensemble.members.iter().map(|m| m.solution.x.clone()).collect();
        let integer: Vec<bool> = inst.kinds().iter().map(|k| k.is_integer()).collect();
        let recount = zero_agreement_scan(&members, &integer, inst.lower(), inst.upper(), 1e-9);
        assert_eq!(recount, res.fix_set, "{}", inst.name());
        assert_eq!(res.gamma, recount.len() as f64 / ints as f64, "{}", inst.name());

        let c = inst.costs();
        for costs in &res.scaled_cost_history {
            for (k, &j) in res.integer_indices.iter().enumerate() {
                assert!(costs[k].abs() <= c[j].abs(), "{}: scaled cost grew", inst.name());
                stats.scaled_costs_checked += 1;
            }
        }
        let stop = res.stop_reason.expect("scaling ran");
        assert!(
            matches!(stop, StopReason::CoefficientStall | StopReason::IterationCap | StopReason::TimeBudget),
            "{}: stopped by {stop:?}",
            inst.name()
        );
        assert!(res.iterations_run <= 50);
        *stats.stops.entry(format!("{stop:?}")).or_default() += 1;
        stats.mean_gamma += res.gamma;
        stats.runs += 1;
    }
    stats.mean_gamma /= stats.runs as f64;
    stats
}

fn trace_fixture() -> MilpInstance {
    let mut b = MilpInstance::builder("trace");
    b.add_column("a", -4.0, 0.0, 1.0, VarKind::Binary);
    b.add_column("b", -2.7, 0.0, 1.0, VarKind::Binary);
    b.add_column("g", 2.0, 0.0, 3.0, VarKind::Integer);
    b.add_column("y", 0.5, 0.0, 10.0, VarKind::Continuous);
    let r = b.add_row("pick", ConstraintSense::LessEqual, 1.5);
    b.set_coefficient(r, 0, 1.0);
    b.set_coefficient(r, 1, 1.0);
    let r = b.add_row("cover", ConstraintSense::GreaterEqual, 2.5);
    b.set_coefficient(r, 2, 1.0);
    b.set_coefficient(r, 3, 1.0);
    let r = b.add_row("link", ConstraintSense::LessEqual, 0.2);
    b.set_coefficient(r, 1, 1.0);
    b.set_coefficient(r, 2, -0.2);
    b.build().unwrap()
}

fn trace() -> String {
    // hand trace: M = 8.7; each LP optimum worked out from the cost slopes
    let m = 8.7;
    let costs = [
        vec![-4.0 / m, -2.7 / m, 2.0 / m],
        vec![-2.0, -1.8, 4.0 / 7.0],
        vec![-2.0, -1.8, 0.8],
    ];
    let points = [
        vec![1.0, 0.5, 2.5, 0.0],
        vec![1.0, 0.5, 1.5, 1.0],
        vec![1.0, 0.5, 1.5, 1.0],
    ];
    let out = run_scaling_phase(&trace_fixture(), &ScalingOptions::default()).unwrap();
    assert_eq!(out.stop, StopReason::CoefficientStall);
    assert_eq!(out.state.history.len(), 3);
    let mut worst = 0.0f64;
    for n in 0..3 {
        for (got, want) in out.state.cost_history[n].iter().zip(&costs[n]) {
            worst = worst.max((got - want).abs());
        }
        for (got, want) in out.state.history[n].x.iter().zip(&points[n]) {
            worst = worst.max((got - want).abs());
        }
    }
    assert!(worst <= TRACE_TOL, "max deviation {worst:e}");
    format!("3 iterations, stall; max deviation {worst:.1e} <= {TRACE_TOL:e}")
}

const GAP_TABLE: [(f64, f64, f64); 20] = [
    (100.0, 80.0, 25.0),
    (80.0, 100.0, 20.0),
    (50.0, 50.0, 0.0),
    (0.0, 10.0, 100.0),
    (-10.0, -8.0, 25.0),
    (-8.0, -10.0, 20.0),
    (5.0, 0.0, 5e12),
    (-5.0, 0.0, 5e12),
    (0.0, 0.0, 0.0),
    (1.0, 4.0, 75.0),
    (3.0, -1.0, 400.0),
    (-1.0, 3.0, 400.0 / 3.0),
    (1e-11, 2e-11, 10.0),
    (2.5, 2.0, 25.0),
    (1000.0, 1001.0, 100.0 / 1001.0),
    (-7.0, 7.0, 200.0),
    (12.0, 16.0, 25.0),
    (0.5, 0.25, 100.0),
    (1e6, 9e5, 100.0 / 9.0),
    (-3.0, -4.0, 25.0),
];

fn gap_and_profiles() -> String {
    for (zb, z, want) in GAP_TABLE {
        let got = compute_gap(zb, z).unwrap();
        assert!((got - want).abs() <= GAP_TOL * want.abs().max(1.0), "gap({zb}, {z}) = {got}");
    }
    let grid = default_tau_grid();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut points = 0;
    for _ in 0..25 {
        let problems = rng.gen_range(1..60);
        let ratios: BTreeMap<String, Vec<f64>> = ["OSEA", "Standard"]
            .iter()
            .map(|m| {
                let rs = (0..problems)
                    .map(|_| if rng.gen_bool(0.4) { 1.0 } else { 1.0 + rng.gen::<f64>().powi(2) * 4000.0 })
                    .collect();
                (m.to_string(), rs)
            })
            .collect();
        for metric in [Metric::Time, Metric::Gap] {
            for curve in build_profile(&ratios, &grid, metric) {
                let rs = &ratios[&curve.method];
                for (t, rho) in curve.tau.iter().zip(&curve.rho) {
                    assert_eq!(*rho, count_within(rs, *t));
                    points += 1;
                }
                assert!(curve.rho.windows(2).all(|w| w[0] <= w[1]));
                assert_eq!(*curve.rho.last().unwrap(), 1.0);
            }
        }
    }
    format!("20 gap cases within {GAP_TOL:e}; {points} profile points match counting")
}

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

fn round_trip() -> String {
    let mut files: Vec<PathBuf> = std::fs::read_dir(fixture_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "mps"))
        .collect();
    files.sort();
    assert!(files.len() >= 10, "only {} fixtures", files.len());
    for path in &files {
        let first = parse_mps(&std::fs::read_to_string(path).unwrap()).unwrap();
        let second = parse_mps(&write_mps(&first)).unwrap();
        assert_eq!(first, second, "{}", path.display());
    }
    format!("{} fixtures: parse(write(parse)) == parse", files.len())
}

fn bench_twice() -> String {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let out = dir.path().join(sub);
        let status = Command::new(env!("CARGO_BIN_EXE_osea"))
            .args(["bench", "--generate", "count=12,n=10..20", "--seed", "7"])
            .args(["--total-budget", "300nodes", "--incumbent-budget", "3nodes"])
            .arg("--out")
            .arg(&out)
            .env("OSEA_LOG", "off")
            .output()
            .unwrap();
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
        std::fs::read(out.join("records.csv")).unwrap()
    };
    let (a, b) = (run("a"), run("b"));
    assert_eq!(a, b, "records differ between runs");
    let rows = a.iter().filter(|&&c| c == b'\n').count() - 1;
    format!("{rows} records, {} bytes, identical", a.len())
}

fn main() {
    let mut failed = 0;
    let mut report = |id: u32, name: &str, f: &dyn Fn() -> String| {
        match catch_unwind(AssertUnwindSafe(f)) {
            Ok(detail) => println!("criterion {id} [{name}]: PASS ({detail})"),
            Err(e) => {
                failed += 1;
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                println!("criterion {id} [{name}]: FAIL ({msg})");
            }
        }
    };
    report(1, "MIP vs enumeration", &mip_oracle);
    report(2, "LP vs vertex enumeration", &lp_oracle);
    let suite = std::cell::RefCell::new(None);
    report(3, "OSEA soundness", &|| {
        let s = osea_suite();
        let line = format!("{} instances feasible, >= optimum, <= incumbent, gamma recounted; mean gamma {:.3}", s.runs, s.mean_gamma);
        *suite.borrow_mut() = Some(s);
        line
    });
    report(4, "scaling invariants", &|| {
        let guard = suite.borrow();
        let s = guard.as_ref().expect("criterion 3 runs completed");
        format!("{} scaled costs bounded; stops {:?}", s.scaled_costs_checked, s.stops)
    });
    report(5, "hand trace", &trace);
    report(6, "gap and profiles", &gap_and_profiles);
    report(7, "MPS round trip", &round_trip);
    report(8, "bench reproducibility", &bench_twice);
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
