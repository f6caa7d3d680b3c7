//! CSV and text renderings of benchmark results.

use std::fmt::Write as _;

use crate::bench::harness::{RunRecord, Summary};
use crate::bench::metrics::{PairedTest, ProfileCurve};
use crate::error::{Error, Result};

/// Formats like C's `%.10g`: ten significant digits, trailing zeros trimmed.
pub fn fmt_g(v: f64) -> String {
    if v.is_nan() {
        return "NaN".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.9e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("exponent digits");
    if !(-4..10).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (9 - exp).max(0) as usize;
    trim_zeros(&format!("{v:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), fmt_g)
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

pub fn records_csv(records: &[RunRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["problem_id", "method", "status", "wall_time_s", "objective", "gap_percent", "gamma"])
        .map_err(csv_err)?;
    for r in records {
        w.write_record([
            r.problem_id.clone(),
            r.method.clone(),
            r.status.clone(),
            fmt_g(r.wall_time),
            opt(r.objective),
            opt(r.gap_percent),
            opt(r.gamma),
        ])
        .map_err(csv_err)?;
    }
    finish(w)
}

pub fn profiles_csv(curves: &[ProfileCurve]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["metric", "method", "tau", "rho"]).map_err(csv_err)?;
    for c in curves {
        for (t, r) in c.tau.iter().zip(&c.rho) {
            w.write_record([c.metric.label(), &c.method, &fmt_g(*t), &fmt_g(*r)])
                .map_err(csv_err)?;
        }
    }
    finish(w)
}

/// Long-form summary: one `(scope, statistic, value)` row per figure.
pub fn summary_csv(summary: &Summary) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["scope", "statistic", "value"]).map_err(csv_err)?;
    let mut row = |scope: &str, stat: &str, value: String| {
        w.write_record([scope, stat, &value]).map_err(csv_err)
    };
    row("all", "problems", summary.problems.to_string())?;
    for m in &summary.methods {
        row(&m.method, "runs", m.runs.to_string())?;
        row(&m.method, "with_solution", m.with_solution.to_string())?;
        row(&m.method, "mean_time_s", fmt_g(m.mean_time))?;
        row(&m.method, "mean_gap_percent", opt(m.mean_gap))?;
        row(&m.method, "mean_gamma", opt(m.mean_gamma))?;
    }
    for p in &summary.pairs {
        let scope = format!("{} vs {}", p.first, p.second);
        row(&scope, "time_wins_first", p.time_wins.0.to_string())?;
        row(&scope, "time_wins_second", p.time_wins.1.to_string())?;
        row(&scope, "time_ties", p.time_ties.to_string())?;
        row(&scope, "gap_wins_first", p.gap_wins.0.to_string())?;
        row(&scope, "gap_wins_second", p.gap_wins.1.to_string())?;
        row(&scope, "gap_ties", p.gap_ties.to_string())?;
        for (label, t) in [("time", &p.time_test), ("gap", &p.gap_test)] {
            row(&scope, &format!("{label}_mean_difference"), opt(t.map(|t| t.mean_difference)))?;
            row(&scope, &format!("{label}_t"), opt(t.map(|t| t.t_statistic)))?;
            row(&scope, &format!("{label}_p_two_sided"), opt(t.map(|t| t.p_value)))?;
        }
    }
    finish(w)
}

fn test_line(label: &str, t: &Option<PairedTest>) -> String {
    match t {
        Some(t) => format!(
            "  {label:<5} mean diff {}  t {}  p {} (two-sided, n={})",
            fmt_g(t.mean_difference),
            fmt_g(t.t_statistic),
            fmt_g(t.p_value),
            t.n
        ),
        None => format!("  {label:<5} paired test: too few pairs"),
    }
}

pub fn summary_text(summary: &Summary) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "problems: {}", summary.problems);
    let _ = writeln!(
        s,
        "{:<10} {:>6} {:>8} {:>16} {:>16} {:>16}",
        "method", "runs", "solved", "mean time (s)", "mean gap (%)", "mean gamma"
    );
    for m in &summary.methods {
        let _ = writeln!(
            s,
            "{:<10} {:>6} {:>8} {:>16} {:>16} {:>16}",
            m.method,
            m.runs,
            m.with_solution,
            fmt_g(m.mean_time),
            opt(m.mean_gap),
            opt(m.mean_gamma)
        );
    }
    for p in &summary.pairs {
        let _ = writeln!(s, "{} vs {}", p.first, p.second);
        let _ = writeln!(
            s,
            "  time wins {}/{} ties {}; gap wins {}/{} ties {}",
            p.time_wins.0, p.time_wins.1, p.time_ties, p.gap_wins.0, p.gap_wins.1, p.gap_ties
        );
        let _ = writeln!(s, "{}", test_line("time", &p.time_test));
        let _ = writeln!(s, "{}", test_line("gap", &p.gap_test));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g_format() {
        assert_eq!(fmt_g(25.0), "25");
        assert_eq!(fmt_g(-1.0 / 3.0), "-0.3333333333");
        assert_eq!(fmt_g(5e12), "5e+12");
        assert_eq!(fmt_g(1234567890.0), "1234567890");
        assert_eq!(fmt_g(12345678901.0), "1.23456789e+10");
        assert_eq!(fmt_g(0.0001), "0.0001");
        assert_eq!(fmt_g(0.00001234), "1.234e-05");
        assert_eq!(fmt_g(9.9999999999), "10");
        assert_eq!(fmt_g(f64::INFINITY), "inf");
    }

    #[test]
    fn record_rows() {
        let rec = RunRecord {
            problem_id: "p,1".into(),
            method: "OSEA".into(),
            status: "Feasible".into(),
            wall_time: 0.5,
            objective: Some(-3.0),
            gap_percent: None,
            gamma: Some(0.25),
        };
        let out = records_csv(&[rec]).unwrap();
        assert_eq!(
            out,
            "problem_id,method,status,wall_time_s,objective,gap_percent,gamma\n\"p,1\",OSEA,Feasible,0.5,-3,NA,0.25\n"
        );
    }
}
