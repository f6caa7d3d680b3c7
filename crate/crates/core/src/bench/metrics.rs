//! Gap, performance ratios and performance profiles.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Denominator guard for [`compute_gap`].
pub const GAP_EPSILON: f64 = 1e-10;

/// Relative gap in percent: `|z_bound - z| / max(|z|, 1e-10) * 100`.
pub fn compute_gap(z_bound: f64, z: f64) -> Result<f64> {
    if !z_bound.is_finite() || !z.is_finite() {
        return Err(Error::Input(format!("gap needs finite values, got bound {z_bound} and objective {z}")));
    }
    Ok((z_bound - z).abs() / z.abs().max(GAP_EPSILON) * 100.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Metric {
    Time,
    Gap,
}

impl Metric {
    pub fn label(self) -> &'static str {
        match self {
            Metric::Time => "time",
            Metric::Gap => "gap",
        }
    }
}

/// Each method's value divided by the smallest value for the problem.
///
/// When the smallest value is zero, methods at zero get ratio 1 and the
/// others get infinity, so they never count as within any factor of the best.
pub fn performance_ratios(values: &BTreeMap<String, f64>) -> BTreeMap<String, f64> {
    let min = values.values().copied().fold(f64::INFINITY, f64::min);
    values
        .iter()
        .map(|(m, &v)| {
            let r = if min > 0.0 {
                v / min
            } else if v == min {
                1.0
            } else {
                f64::INFINITY
            };
            (m.clone(), r)
        })
        .collect()
}

/// Geometric grid of `points` values from 1 to `max`.
pub fn tau_grid(max: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![1.0],
        _ => {
            let step = max.ln() / (points - 1) as f64;
            let mut g: Vec<f64> = (0..points).map(|k| (step * k as f64).exp()).collect();
            g[0] = 1.0;
            g[points - 1] = max;
            g
        }
    }
}

/// 200 geometric points from 1 to 4096.
pub fn default_tau_grid() -> Vec<f64> {
    tau_grid(4096.0, 200)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileCurve {
    pub metric: Metric,
    pub method: String,
    pub tau: Vec<f64>,
    pub rho: Vec<f64>,
}

impl ProfileCurve {
    /// `rho` at the largest grid point not exceeding `tau`.
    pub fn at(&self, tau: f64) -> Option<f64> {
        let k = self.tau.partition_point(|&t| t <= tau);
        (k > 0).then(|| self.rho[k - 1])
    }
}

/// Empirical distribution of each method's ratios over `tau_grid`.
/// `ratios[method][p]` is the ratio of problem `p`.
pub fn build_profile(
    ratios: &BTreeMap<String, Vec<f64>>,
    tau_grid: &[f64],
    metric: Metric,
) -> Vec<ProfileCurve> {
    ratios
        .iter()
        .map(|(method, rs)| {
            let mut sorted = rs.clone();
            sorted.sort_by(f64::total_cmp);
            let total = sorted.len().max(1) as f64;
            let rho = tau_grid
                .iter()
                .map(|&t| sorted.partition_point(|&r| r <= t) as f64 / total)
                .collect();
            ProfileCurve { metric, method: method.clone(), tau: tau_grid.to_vec(), rho }
        })
        .collect()
}

/// Descriptive paired comparison of `a - b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedTest {
    pub n: usize,
    pub mean_difference: f64,
    pub t_statistic: f64,
    /// Two-sided, normal approximation.
    pub p_value: f64,
}

/// Paired t statistic with a two-sided normal-approximation p-value.
/// Needs at least two pairs.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Option<PairedTest> {
    if a.len() != b.len() || a.len() < 2 {
        return None;
    }
    let n = a.len();
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = d.iter().sum::<f64>() / n as f64;
    let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let se = (var / n as f64).sqrt();
    let t = if se > 0.0 {
        mean / se
    } else if mean == 0.0 {
        0.0
    } else {
        mean.signum() * f64::INFINITY
    };
    let p = libm::erfc(t.abs() / std::f64::consts::SQRT_2);
    Some(PairedTest { n, mean_difference: mean, t_statistic: t, p_value: p })
}
