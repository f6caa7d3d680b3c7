//! Brute-force reference implementations for the test suites.
//!
//! Nothing in here depends on the solver crate: problems are described by
//! plain dense vectors so each oracle follows a different computational
//! path from the code it checks.

/// Dense problem `min c·x` s.t. `row_lo ≤ A x ≤ row_hi`, `lower ≤ x ≤ upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseProblem {
    pub c: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub row_lo: Vec<f64>,
    pub row_hi: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub integer: Vec<bool>,
}

impl DenseProblem {
    pub fn n(&self) -> usize {
        self.c.len()
    }

    pub fn m(&self) -> usize {
        self.rows.len()
    }
}

/// Accumulates `c·x` one term at a time, left to right.
pub fn naive_dot(c: &[f64], x: &[f64]) -> f64 {
    let mut total = 0.0;
    let mut i = 0;
    while i < c.len() {
        total += c[i] * x[i];
        i += 1;
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleStatus {
    Feasible,
    IntegerInfeasible,
    ConstraintInfeasible,
}

/// Interprets each row and bound independently.
pub fn interpret_feasibility(p: &DenseProblem, x: &[f64], tol: f64) -> OracleStatus {
    for j in 0..p.n() {
        if x[j] < p.lower[j] - tol || x[j] > p.upper[j] + tol {
            return OracleStatus::ConstraintInfeasible;
        }
    }
    for i in 0..p.m() {
        let activity = naive_dot(&p.rows[i], x);
        if activity < p.row_lo[i] - tol || activity > p.row_hi[i] + tol {
            return OracleStatus::ConstraintInfeasible;
        }
    }
    for j in 0..p.n() {
        if p.integer[j] && (x[j] - x[j].round()).abs() > tol {
            return OracleStatus::IntegerInfeasible;
        }
    }
    OracleStatus::Feasible
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOracle {
    Infeasible,
    Optimal { objective: f64, x: Vec<f64> },
}

/// Minimizes over every basic point formed by `n` linearly independent
/// active hyperplanes drawn from the row sides and the variable bounds.
/// All bounds must be finite so the feasible set is a polytope.
pub fn lp_vertex_enumeration(p: &DenseProblem) -> LpOracle {
    let n = p.n();
    assert!(
        p.lower.iter().chain(&p.upper).all(|v| v.is_finite()),
        "vertex enumeration needs finite bounds"
    );
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    for i in 0..p.m() {
        if p.row_lo[i].is_finite() {
            planes.push((p.rows[i].clone(), p.row_lo[i]));
        }
        if p.row_hi[i].is_finite() && p.row_hi[i] != p.row_lo[i] {
            planes.push((p.rows[i].clone(), p.row_hi[i]));
        }
    }
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push((e.clone(), p.lower[j]));
        if p.upper[j] != p.lower[j] {
            planes.push((e, p.upper[j]));
        }
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut consider = |x: Vec<f64>| {
        if interpret_feasibility(p, &x, 1e-7) == OracleStatus::ConstraintInfeasible {
            return;
        }
        let z = naive_dot(&p.c, &x);
        if best.as_ref().map_or(true, |(bz, _)| z < *bz) {
            best = Some((z, x));
        }
    };
    if n == 0 {
        consider(Vec::new());
    } else {
        let mut pick: Vec<usize> = (0..n).collect();
        if planes.len() >= n {
            loop {
                let mat: Vec<Vec<f64>> = pick.iter().map(|&k| planes[k].0.clone()).collect();
                let rhs: Vec<f64> = pick.iter().map(|&k| planes[k].1).collect();
                if let Some(x) = gauss_solve(mat, rhs) {
                    consider(x);
                }
                if !next_combination(&mut pick, planes.len()) {
                    break;
                }
            }
        }
    }
    match best {
        Some((objective, x)) => LpOracle::Optimal { objective, x },
        None => LpOracle::Infeasible,
    }
}

fn next_combination(pick: &mut [usize], total: usize) -> bool {
    let k = pick.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if pick[i] < total - k + i {
            pick[i] += 1;
            for t in i + 1..k {
                pick[t] = pick[t - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Gaussian elimination with partial pivoting; `None` when singular.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if a[r][col].abs() > a[piv][col].abs() {
                piv = r;
            }
        }
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(piv, col);
        b.swap(piv, col);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for k in col..n {
                    a[r][k] -= f * a[col][k];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let mut s = b[r];
        for k in r + 1..n {
            s -= a[r][k] * x[k];
        }
        x[r] = s / a[r][r];
    }
    Some(x)
}

/// Exhaustive search over `{0,1}^n` in Gray-code order. Returns the
/// minimum objective and a minimizer, or `None` when no point is feasible.
/// Variables whose bounds are `[v, v]` are held at `v`.
pub fn binary_enumeration(p: &DenseProblem) -> Option<(f64, Vec<f64>)> {
    let n = p.n();
    assert!(n <= 24, "enumeration limited to 24 binaries");
    let free: Vec<usize> = (0..n).filter(|&j| p.lower[j] != p.upper[j]).collect();
    let mut x: Vec<f64> = p.lower.clone();
    let mut activity: Vec<f64> = p.rows.iter().map(|r| naive_dot(r, &x)).collect();
    let mut z = naive_dot(&p.c, &x);
    let feasible = |act: &[f64]| {
        act.iter()
            .enumerate()
            .all(|(i, &a)| a >= p.row_lo[i] - 1e-9 && a <= p.row_hi[i] + 1e-9)
    };
    let mut best: Option<(f64, Vec<f64>)> = None;
    let total: u64 = 1 << free.len();
    for step in 0..total {
        if step > 0 {
            let bit = step.trailing_zeros() as usize;
            let j = free[bit];
            let delta = if x[j] == 0.0 { 1.0 } else { -1.0 };
            x[j] += delta;
            z += delta * p.c[j];
            for (i, row) in p.rows.iter().enumerate() {
                activity[i] += delta * row[j];
            }
        }
        if feasible(&activity) && best.as_ref().map_or(true, |(bz, _)| z < *bz) {
            best = Some((z, x.clone()));
        }
    }
    best.map(|(_, x)| (naive_dot(&p.c, &x), x))
}

/// Integer columns that are zero in every member and whose bounds admit
/// zero, found by scanning each column across the member list.
pub fn zero_agreement_scan(
    members: &[Vec<f64>],
    integer: &[bool],
    lower: &[f64],
    upper: &[f64],
    tol: f64,
) -> Vec<usize> {
    let mut out = Vec::new();
    for j in 0..integer.len() {
        if !integer[j] || lower[j] > 0.0 || upper[j] < 0.0 {
            continue;
        }
        let mut all_zero = true;
        for s in members {
            if s[j].abs() > tol {
                all_zero = false;
            }
        }
        if all_zero {
            out.push(j);
        }
    }
    out
}

/// Fraction of ratios not exceeding `tau`, by explicit counting.
pub fn count_within(ratios: &[f64], tau: f64) -> f64 {
    let mut count = 0usize;
    for &r in ratios {
        if r <= tau {
            count += 1;
        }
    }
    count as f64 / ratios.len() as f64
}

/// Per-problem ratio of each value to the row minimum, computed cell by
/// cell as a spreadsheet would.
pub fn ratio_table(values: &[Vec<f64>]) -> Vec<Vec<f64>> {
    values
        .iter()
        .map(|row| {
            let mut min = f64::INFINITY;
            for &v in row {
                if v < min {
                    min = v;
                }
            }
            row.iter().map(|&v| v / min).collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vertex_enumeration_small() {
        // min -x - y, x + y <= 1, box [0,1]^2
        let p = DenseProblem {
            c: vec![-1.0, -1.0],
            rows: vec![vec![1.0, 1.0]],
            row_lo: vec![f64::NEG_INFINITY],
            row_hi: vec![1.0],
            lower: vec![0.0, 0.0],
            upper: vec![1.0, 1.0],
            integer: vec![false, false],
        };
        match lp_vertex_enumeration(&p) {
            LpOracle::Optimal { objective, .. } => assert!((objective + 1.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn binary_enumeration_small() {
        let p = DenseProblem {
            c: vec![-1.0, -1.0, -1.0],
            rows: vec![vec![1.0, 1.0, 1.0]],
            row_lo: vec![f64::NEG_INFINITY],
            row_hi: vec![2.0],
            lower: vec![0.0; 3],
            upper: vec![1.0; 3],
            integer: vec![true; 3],
        };
        assert_eq!(binary_enumeration(&p).unwrap().0, -2.0);
    }

    #[test]
    fn combinations_cover_all() {
        let mut pick = vec![0, 1];
        let mut count = 1;
        while next_combination(&mut pick, 5) {
            count += 1;
        }
        assert_eq!(count, 10);
    }
}
