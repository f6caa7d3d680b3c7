//! Seeded random MILP instances for desk-scale benchmarking.

use std::ops::RangeInclusive;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{ConstraintSense, MilpInstance, ProblemClass, VarKind};

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub count: usize,
    pub n: RangeInclusive<usize>,
    pub m: RangeInclusive<usize>,
    /// Share of integer columns in classes that mix in continuous ones.
    pub integer_fraction: f64,
    /// Probability that a coefficient is nonzero.
    pub density: f64,
    /// Inclusive integer range for objective coefficients.
    pub cost: RangeInclusive<i64>,
    pub guaranteed_feasible: bool,
    /// Classes assigned round-robin to the generated instances.
    pub classes: Vec<ProblemClass>,
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        GeneratorSpec {
            count: 10,
            n: 10..=20,
            m: 5..=10,
            integer_fraction: 0.6,
            density: 0.5,
            cost: -10..=10,
            guaranteed_feasible: true,
            classes: vec![
                ProblemClass::Bp,
                ProblemClass::Mbp,
                ProblemClass::PureInteger,
                ProblemClass::Milp,
            ],
        }
    }
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Input(format!("generator spec: {m}")));
        if self.n.is_empty() || *self.n.start() == 0 {
            return bad("n range must be nonempty and start at 1 or more");
        }
        if self.m.is_empty() {
            return bad("m range is empty");
        }
        if !(0.0..=1.0).contains(&self.integer_fraction) {
            return bad("integer fraction must lie in [0, 1]");
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return bad("density must lie in (0, 1]");
        }
        if self.cost.is_empty() {
            return bad("cost range is empty");
        }
        if self.classes.is_empty() {
            return bad("no problem classes selected");
        }
        Ok(())
    }
}

fn parse_range<T: FromStr + Copy>(key: &str, v: &str) -> Result<RangeInclusive<T>> {
    let err = || Error::Input(format!("generator spec: bad range for `{key}`: `{v}`"));
    match v.split_once("..") {
        Some((a, b)) => {
            let a = a.trim().parse().map_err(|_| err())?;
            let b = b.trim_start_matches('=').trim().parse().map_err(|_| err())?;
            Ok(a..=b)
        }
        None => {
            let a = v.trim().parse().map_err(|_| err())?;
            Ok(a..=a)
        }
    }
}

impl FromStr for GeneratorSpec {
    type Err = Error;

    /// Comma-separated `key=value` pairs, e.g.
    /// `count=20,n=15..25,m=5..10,int=0.6,density=0.5,cost=-10..10,feasible=true,classes=BP+MILP`.
    /// Missing keys keep their defaults.
    fn from_str(s: &str) -> Result<Self> {
        let mut spec = GeneratorSpec::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::Input(format!("generator spec: expected key=value, got `{part}`")))?;
            let num_err = || Error::Input(format!("generator spec: bad value for `{key}`: `{value}`"));
            match key.trim() {
                "count" => spec.count = value.parse().map_err(|_| num_err())?,
                "n" => spec.n = parse_range(key, value)?,
                "m" => spec.m = parse_range(key, value)?,
                "int" | "integer_fraction" => {
                    spec.integer_fraction = value.parse().map_err(|_| num_err())?
                }
                "density" => spec.density = value.parse().map_err(|_| num_err())?,
                "cost" => spec.cost = parse_range(key, value)?,
                "feasible" => spec.guaranteed_feasible = value.parse().map_err(|_| num_err())?,
                "classes" => {
                    spec.classes = value
                        .split('+')
                        .map(|c| match c.trim().to_ascii_uppercase().as_str() {
                            "LP" => Ok(ProblemClass::Lp),
                            "BP" => Ok(ProblemClass::Bp),
                            "MBP" => Ok(ProblemClass::Mbp),
                            "PUREINTEGER" | "IP" => Ok(ProblemClass::PureInteger),
                            "MILP" => Ok(ProblemClass::Milp),
                            _ => Err(num_err()),
                        })
                        .collect::<Result<_>>()?
                }
                other => {
                    return Err(Error::Input(format!("generator spec: unknown key `{other}`")))
                }
            }
        }
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedInstance {
    pub instance: MilpInstance,
    pub class: ProblemClass,
    /// A point satisfying every row, bound and integrality requirement;
    /// present when the spec asked for guaranteed feasibility.
    pub certificate: Option<Vec<f64>>,
}

/// Generates `spec.count` instances. Instance `i` draws from its own
/// stream of the seeded generator, so prefixes are stable across counts.
pub fn generate_instances(seed: u64, spec: &GeneratorSpec) -> Result<Vec<GeneratedInstance>> {
    spec.validate()?;
    (0..spec.count)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let class = spec.classes[i % spec.classes.len()];
            generate_one(&mut rng, spec, class, &format!("gen{seed}_{i:04}"))
        })
        .collect()
}

/// Column kinds for `class`. Mixed classes get exactly `round(int_frac * n)`
/// integer columns, kept between 1 and `n - 1` so both kinds appear.
fn column_kinds(rng: &mut ChaCha8Rng, n: usize, class: ProblemClass, int_frac: f64) -> Vec<VarKind> {
    use VarKind::*;
    let mut slots: Vec<usize> = (0..n).collect();
    slots.shuffle(rng);
    let mut kinds = vec![Continuous; n];
    let general = |rng: &mut ChaCha8Rng| if rng.gen_bool(0.5) { Binary } else { Integer };
    match class {
        ProblemClass::Lp => {}
        ProblemClass::Bp => kinds.fill(Binary),
        ProblemClass::PureInteger => {
            for k in kinds.iter_mut() {
                *k = general(rng);
            }
            kinds[slots[0]] = Integer;
        }
        ProblemClass::Mbp | ProblemClass::Milp => {
            let count = ((int_frac * n as f64).round() as usize).clamp(1, n.saturating_sub(1).max(1));
            for &j in &slots[..count] {
                kinds[j] = if class == ProblemClass::Mbp { Binary } else { general(rng) };
            }
            if class == ProblemClass::Milp {
                kinds[slots[0]] = Integer;
            }
        }
    }
    kinds
}

fn generate_one(
    rng: &mut ChaCha8Rng,
    spec: &GeneratorSpec,
    class: ProblemClass,
    name: &str,
) -> Result<GeneratedInstance> {
    let n = rng.gen_range(spec.n.clone());
    let m = rng.gen_range(spec.m.clone());
    let kinds = column_kinds(rng, n, class, spec.integer_fraction);

    let mut b = MilpInstance::builder(name);
    let mut point = Vec::with_capacity(n);
    for (j, &kind) in kinds.iter().enumerate() {
        let cost = rng.gen_range(spec.cost.clone()) as f64;
        let (upper, value) = match kind {
            VarKind::Binary => (1.0, rng.gen_range(0..=1) as f64),
            VarKind::Integer => {
                let u = rng.gen_range(2..=6);
                (u as f64, rng.gen_range(0..=u) as f64)
            }
            VarKind::Continuous => {
                let u = rng.gen_range(1..=10);
                (u as f64, rng.gen_range(0..=2 * u) as f64 / 2.0)
            }
        };
        b.add_column(format!("x{j}"), cost, 0.0, upper, kind);
        point.push(value);
    }
    // reference point for rhs placement; perturbed when feasibility is not promised
    for i in 0..m {
        let mut row: Vec<(usize, f64)> = Vec::new();
        for j in 0..n {
            if rng.gen_bool(spec.density) {
                row.push((j, nonzero(rng)));
            }
        }
        if row.is_empty() {
            row.push((rng.gen_range(0..n), nonzero(rng)));
        }
        let activity: f64 = row.iter().map(|&(j, a)| a * point[j]).sum();
        let slack = rng.gen_range(0..=3) as f64;
        let shift = if spec.guaranteed_feasible { 0.0 } else { rng.gen_range(-3..=3) as f64 };
        let (sense, rhs) = match rng.gen_range(0..10) {
            0 => (ConstraintSense::Equal, activity + shift),
            1..=5 => (ConstraintSense::LessEqual, activity + slack + shift),
            _ => (ConstraintSense::GreaterEqual, activity - slack + shift),
        };
        let r = b.add_row(format!("c{i}"), sense, rhs);
        for (j, a) in row {
            b.set_coefficient(r, j, a);
        }
    }
    let instance = b.build()?;
    Ok(GeneratedInstance {
        class: instance.classify(),
        instance,
        certificate: spec.guaranteed_feasible.then_some(point),
    })
}

fn nonzero(rng: &mut ChaCha8Rng) -> f64 {
    let v = rng.gen_range(1..=6) as f64;
    if rng.gen_bool(0.3) { -v } else { v }
}
