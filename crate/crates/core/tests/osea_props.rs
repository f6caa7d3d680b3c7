mod common;

use osea::bench::{generate_instances, GeneratorSpec};
use osea::mip::{solve_mip, BnbOptions};
use osea::osea::{
    run_osea, run_scaling_phase, OseaOptions, OseaStatus, ScalingOptions, ScalingState, StopReason,
};
use osea::{Budget, MilpInstance, ObjectiveSense};
use osea_testkit::{naive_dot, zero_agreement_scan};
use proptest::prelude::*;

fn one_instance(seed: u64, n: usize) -> MilpInstance {
    let spec = GeneratorSpec { count: 1, n: n..=n, m: 2..=8, ..GeneratorSpec::default() };
    generate_instances(seed, &spec).unwrap().remove(0).instance
}

fn node_opts() -> OseaOptions {
    OseaOptions {
        incumbent_budget: Budget::Nodes(2),
        total_budget: Budget::Nodes(20_000),
        ..OseaOptions::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn scaled_costs_never_exceed_originals(seed in any::<u64>(), n in 3usize..14) {
        let inst = one_instance(seed, n);
        let out = run_scaling_phase(&inst, &ScalingOptions::default()).unwrap();
        let c = inst.costs();
        for costs in &out.state.cost_history {
            for (k, &j) in out.state.integer.iter().enumerate() {
                prop_assert!(costs[k].abs() <= c[j].abs() + 1e-15);
            }
        }
        prop_assert!(out.lp_solves <= 50);
    }

    #[test]
    fn repeated_point_stalls(seed in any::<u64>(), n in 3usize..14) {
        let inst = one_instance(seed, n);
        let out = run_scaling_phase(&inst, &ScalingOptions::default()).unwrap();
        let h = &out.state.history;
        let ints = &out.state.integer;
        for k in 1..h.len() {
            if ints.iter().all(|&j| h[k].x[j] == h[k - 1].x[j]) {
                prop_assert_eq!(h.len(), k + 1);
                prop_assert_eq!(out.stop, StopReason::CoefficientStall);
            }
        }
    }

    #[test]
    fn attenuation_is_monotone(c in -50.0f64..50.0, a in 0.0f64..20.0, b in 0.0f64..20.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (at_lo, at_hi) = (ScalingState::attenuate(c, lo), ScalingState::attenuate(c, hi));
        if c > 0.0 {
            prop_assert!(at_hi <= at_lo);
        } else {
            prop_assert!(at_hi >= at_lo);
        }
        prop_assert!(at_hi.abs() <= c.abs());
    }

    #[test]
    fn fix_set_is_sound(seed in any::<u64>(), n in 3usize..12) {
        let inst = one_instance(seed, n);
        let res = run_osea(&inst, &node_opts()).unwrap();
        let tol = 1e-9;
        for m in &res.ensemble.members {
            for &j in &res.fix_set {
                prop_assert!(m.solution.x[j].abs() <= tol);
            }
        }
        let members: Vec<Vec<f64>> = res.ensemble.members.iter().map(|m| m.solution.x.clone()).collect();
        let integer: Vec<bool> = inst.kinds().iter().map(|k| k.is_integer()).collect();
        let scan = zero_agreement_scan(&members, &integer, inst.lower(), inst.upper(), tol);
        prop_assert_eq!(&scan, &res.fix_set);
        prop_assert_eq!(res.gamma, res.fix_set.len() as f64 / res.integer_indices.len() as f64);
    }

    #[test]
    fn feasible_members_bound_the_result(seed in any::<u64>(), n in 3usize..12) {
        let inst = one_instance(seed, n);
        let res = run_osea(&inst, &node_opts()).unwrap();
        if let Some(best) = res.ensemble.best_feasible() {
            prop_assert_eq!(res.status, OseaStatus::Feasible);
            prop_assert!(res.objective.unwrap() <= best.objective + 1e-9);
        }
        if let Some(sol) = &res.solution {
            prop_assert!(inst.check_feasibility(&sol.x, 1e-6).unwrap().is_feasible());
        }
    }

    #[test]
    fn normalize_is_idempotent(seed in any::<u64>(), n in 2usize..10) {
        let inst = one_instance(seed, n);
        let once = inst.normalize();
        prop_assert_eq!(once.normalize(), once.clone());
        let x: Vec<f64> = inst.lower().to_vec();
        prop_assert_eq!(once.evaluate_objective(&x).unwrap(), inst.evaluate_objective(&x).unwrap());
    }

    #[test]
    fn objective_is_linear(
        c in proptest::collection::vec(-100.0f64..100.0, 20),
        x in proptest::collection::vec(-10.0f64..10.0, 20),
        y in proptest::collection::vec(-10.0f64..10.0, 20),
        a in -3.0f64..3.0,
    ) {
        let mut b = MilpInstance::builder("lin");
        for (j, &cj) in c.iter().enumerate() {
            b.add_column(format!("x{j}"), cj, f64::NEG_INFINITY, f64::INFINITY, osea::VarKind::Continuous);
        }
        let inst = b.build().unwrap();
        let z = |v: &[f64]| inst.evaluate_objective(v).unwrap();
        let combo: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + q).collect();
        prop_assert!((z(&combo) - (a * z(&x) + z(&y))).abs() <= 1e-9 * (1.0 + z(&combo).abs()));
        prop_assert!((z(&x) - naive_dot(&c, &x)).abs() <= 1e-12 * (1.0 + naive_dot(&c, &x).abs()));
    }
}

#[test]
fn osea_never_beats_the_optimum() {
    let spec = GeneratorSpec { count: 30, n: 8..=20, m: 4..=12, ..GeneratorSpec::default() };
    let mut solved = 0;
    for g in generate_instances(99, &spec).unwrap() {
        let opt = solve_mip(&g.instance, &BnbOptions::default()).unwrap().objective().unwrap();
        let res = run_osea(&g.instance, &node_opts()).unwrap();
        if res.ensemble.best_feasible().is_some() {
            assert!(res.solution.is_some(), "{}", g.instance.name());
        }
        let Some(sol) = &res.solution else { continue };
        solved += 1;
        assert!(g.instance.check_feasibility(&sol.x, 1e-6).unwrap().is_feasible());
        assert!(res.objective.unwrap() >= opt - 1e-9, "{}", g.instance.name());
        if let Some(z_inc) = res.incumbent_objective {
            assert!(res.objective.unwrap() <= z_inc + 1e-9);
        }
    }
    assert!(solved >= 20, "only {solved} of 30 solved");
}

#[test]
fn maximization_reports_in_user_sense() {
    let spec = GeneratorSpec { count: 1, n: 8..=8, ..GeneratorSpec::default() };
    let min = generate_instances(5, &spec).unwrap().remove(0).instance;
    let flipped = {
        let neg: Vec<f64> = min.costs().iter().map(|c| -c).collect();
        let text = osea::mps::write_mps(&min.with_costs(neg).unwrap());
        let text = text.replacen("ROWS", "OBJSENSE\n    MAX\nROWS", 1);
        osea::mps::parse_mps(&text).unwrap()
    };
    assert_eq!(flipped.objective_sense(), ObjectiveSense::Maximize);
    let a = run_osea(&min, &node_opts()).unwrap();
    let b = run_osea(&flipped, &node_opts()).unwrap();
    assert!((a.objective.unwrap() - b.objective.unwrap()).abs() < 1e-9);
    assert!((a.reported_objective.unwrap() + b.reported_objective.unwrap()).abs() < 1e-9);
}
