use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// A solve allowance: wall-clock seconds, or a branch-and-bound node count
/// for reproducible runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Budget {
    Seconds(f64),
    Nodes(u64),
}

impl Budget {
    pub fn as_duration(self) -> Option<Duration> {
        match self {
            Budget::Seconds(s) => Some(Duration::from_secs_f64(s)),
            Budget::Nodes(_) => None,
        }
    }

    pub fn is_deterministic(self) -> bool {
        matches!(self, Budget::Nodes(_))
    }
}

impl FromStr for Budget {
    type Err = Error;

    /// Accepts decimal seconds (`1.5`) or a node count (`200nodes`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some(count) = s.strip_suffix("nodes") {
            let n: u64 = count
                .trim()
                .parse()
                .map_err(|_| Error::Input(format!("invalid node budget `{s}`")))?;
            if n == 0 {
                return Err(Error::Input("node budget must be positive".into()));
            }
            return Ok(Budget::Nodes(n));
        }
        let secs: f64 = s
            .parse()
            .map_err(|_| Error::Input(format!("invalid budget `{s}` (seconds or <n>nodes)")))?;
        if !(secs > 0.0) || !secs.is_finite() {
            return Err(Error::Input(format!("budget must be positive and finite, got `{s}`")));
        }
        Ok(Budget::Seconds(secs))
    }
}

impl fmt::Display for Budget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Budget::Seconds(s) => write!(f, "{s}"),
            Budget::Nodes(n) => write!(f, "{n}nodes"),
        }
    }
}
