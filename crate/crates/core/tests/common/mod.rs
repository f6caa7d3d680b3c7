#![allow(dead_code)]

use osea::model::{ConstraintSense, MilpInstance, VarKind};
use osea_testkit::DenseProblem;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Dense copy of an instance for the oracles.
pub fn to_dense(inst: &MilpInstance) -> DenseProblem {
    let n = inst.num_cols();
    let m = inst.num_rows();
    let mut rows = vec![vec![0.0; n]; m];
    for e in inst.matrix().entries() {
        rows[e.row][e.col] = e.value;
    }
    let (row_lo, row_hi) = (0..m).map(|i| inst.row_bounds(i)).unzip();
    DenseProblem {
        c: inst.evaluate_objective_costs(),
        rows,
        row_lo,
        row_hi,
        lower: inst.lower().to_vec(),
        upper: inst.upper().to_vec(),
        integer: inst.kinds().iter().map(|k| k.is_integer()).collect(),
    }
}

trait MinCosts {
    fn evaluate_objective_costs(&self) -> Vec<f64>;
}

impl MinCosts for MilpInstance {
    fn evaluate_objective_costs(&self) -> Vec<f64> {
        let n = self.num_cols();
        (0..n)
            .map(|j| {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                self.evaluate_objective(&e).unwrap()
            })
            .collect()
    }
}

/// Small LP with integer data and finite bounds; some draws are infeasible.
pub fn random_lp(rng: &mut ChaCha8Rng, name: &str) -> MilpInstance {
    let n = rng.gen_range(1..=6);
    let m = rng.gen_range(0..=6);
    let mut b = MilpInstance::builder(name);
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

/// Four-column instance with a three-LP scaling trace that can be worked
/// out by hand: binaries `a` and `b`, integer `g` in [0,3], continuous `y`.
pub fn trace_fixture() -> MilpInstance {
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
