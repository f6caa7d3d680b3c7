//! Canonical MILP data model.
//!
//! A [`MilpInstance`] is immutable once built; every transformation
//! (normalization, relaxation, variable fixing, objective replacement)
//! returns a new instance with the same column and row indexing.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default absolute tolerance for row, bound and integrality checks.
pub const DEFAULT_FEAS_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VarKind {
    Binary,
    Integer,
    Continuous,
}

impl VarKind {
    pub fn is_integer(self) -> bool {
        !matches!(self, VarKind::Continuous)
    }
}

/// Row sense. For `Range` rows the right-hand side stored on the instance
/// equals `low`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ConstraintSense {
    GreaterEqual,
    LessEqual,
    Equal,
    Range { low: f64, high: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ObjectiveSense {
    Minimize,
    Maximize,
}

/// Problem taxonomy by which index sets are populated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProblemClass {
    #[serde(rename = "LP")]
    Lp,
    #[serde(rename = "BP")]
    Bp,
    #[serde(rename = "MBP")]
    Mbp,
    PureInteger,
    #[serde(rename = "MILP")]
    Milp,
}

impl fmt::Display for ProblemClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ProblemClass::Lp => "LP",
            ProblemClass::Bp => "BP",
            ProblemClass::Mbp => "MBP",
            ProblemClass::PureInteger => "PureInteger",
            ProblemClass::Milp => "MILP",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

/// Sparse matrix stored as row-major sorted triplets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Entry>,
    row_starts: Vec<usize>,
}

impl SparseMatrix {
    /// Builds a matrix from unordered triplets. Explicit zeros are dropped;
    /// duplicate `(row, col)` pairs are rejected.
    pub fn from_triplets(rows: usize, cols: usize, mut entries: Vec<Entry>) -> Result<Self> {
        for e in &entries {
            if e.row >= rows || e.col >= cols {
                return Err(Error::InvalidInstance(format!(
                    "entry ({}, {}) outside {}x{} matrix",
                    e.row, e.col, rows, cols
                )));
            }
            if !e.value.is_finite() {
                return Err(Error::InvalidInstance(format!(
                    "non-finite coefficient at ({}, {})",
                    e.row, e.col
                )));
            }
        }
        entries.retain(|e| e.value != 0.0);
        entries.sort_by_key(|e| (e.row, e.col));
        if let Some(w) = entries
            .windows(2)
            .find(|w| w[0].row == w[1].row && w[0].col == w[1].col)
        {
            return Err(Error::InvalidInstance(format!(
                "duplicate coefficient at ({}, {})",
                w[0].row, w[0].col
            )));
        }
        let mut row_starts = vec![0; rows + 1];
        for e in &entries {
            row_starts[e.row + 1] += 1;
        }
        for i in 0..rows {
            row_starts[i + 1] += row_starts[i];
        }
        Ok(SparseMatrix {
            rows,
            cols,
            entries,
            row_starts,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[Entry] {
        &self.entries[self.row_starts[i]..self.row_starts[i + 1]]
    }

    /// Column-major copy: `(row, value)` pairs per column, rows ascending.
    pub fn columns(&self) -> Vec<Vec<(usize, f64)>> {
        let mut cols = vec![Vec::new(); self.cols];
        for e in &self.entries {
            cols[e.col].push((e.row, e.value));
        }
        cols
    }

    /// `A x` for a dense `x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        for e in &self.entries {
            out[e.row] += e.value * x[e.col];
        }
        out
    }
}

/// A mixed-integer linear program.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MilpInstance {
    name: String,
    objective_name: String,
    objective_sense: ObjectiveSense,
    /// Constant added to reported objectives, in the user's orientation.
    objective_offset: f64,
    /// True when `normalize` negated a maximization objective.
    flipped: bool,
    c: Vec<f64>,
    matrix: SparseMatrix,
    rhs: Vec<f64>,
    senses: Vec<ConstraintSense>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    kinds: Vec<VarKind>,
    col_names: Vec<String>,
    row_names: Vec<String>,
}

/// Incremental constructor for [`MilpInstance`].
#[derive(Debug, Clone)]
pub struct InstanceBuilder {
    name: String,
    objective_name: String,
    objective_sense: ObjectiveSense,
    objective_offset: f64,
    c: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    kinds: Vec<VarKind>,
    col_names: Vec<String>,
    row_names: Vec<String>,
    rhs: Vec<f64>,
    senses: Vec<ConstraintSense>,
    entries: Vec<Entry>,
}

impl InstanceBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        InstanceBuilder {
            name: name.into(),
            objective_name: "obj".to_string(),
            objective_sense: ObjectiveSense::Minimize,
            objective_offset: 0.0,
            c: Vec::new(),
            lower: Vec::new(),
            upper: Vec::new(),
            kinds: Vec::new(),
            col_names: Vec::new(),
            row_names: Vec::new(),
            rhs: Vec::new(),
            senses: Vec::new(),
            entries: Vec::new(),
        }
    }

    pub fn sense(mut self, sense: ObjectiveSense) -> Self {
        self.objective_sense = sense;
        self
    }

    pub fn objective_name(mut self, name: impl Into<String>) -> Self {
        self.objective_name = name.into();
        self
    }

    pub fn objective_offset(mut self, offset: f64) -> Self {
        self.objective_offset = offset;
        self
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    pub fn set_objective_sense(&mut self, sense: ObjectiveSense) {
        self.objective_sense = sense;
    }

    pub fn set_objective_offset(&mut self, offset: f64) {
        self.objective_offset = offset;
    }

    pub fn set_objective_name(&mut self, name: impl Into<String>) {
        self.objective_name = name.into();
    }

    pub fn num_cols(&self) -> usize {
        self.c.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rhs.len()
    }

    /// Adds a column and returns its index.
    pub fn add_column(
        &mut self,
        name: impl Into<String>,
        cost: f64,
        lower: f64,
        upper: f64,
        kind: VarKind,
    ) -> usize {
        self.c.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.kinds.push(kind);
        self.col_names.push(name.into());
        self.c.len() - 1
    }

    /// Adds a row and returns its index. For `Range` senses `rhs` is
    /// replaced by the range's lower end.
    pub fn add_row(&mut self, name: impl Into<String>, sense: ConstraintSense, rhs: f64) -> usize {
        let rhs = match sense {
            ConstraintSense::Range { low, .. } => low,
            _ => rhs,
        };
        self.row_names.push(name.into());
        self.senses.push(sense);
        self.rhs.push(rhs);
        self.rhs.len() - 1
    }

    pub(crate) fn replace_row(&mut self, row: usize, sense: ConstraintSense, rhs: f64) {
        self.senses[row] = sense;
        self.rhs[row] = match sense {
            ConstraintSense::Range { low, .. } => low,
            _ => rhs,
        };
    }

    pub fn set_coefficient(&mut self, row: usize, col: usize, value: f64) {
        self.entries.push(Entry { row, col, value });
    }

    pub fn set_cost(&mut self, col: usize, cost: f64) {
        self.c[col] = cost;
    }

    pub fn set_bounds(&mut self, col: usize, lower: f64, upper: f64) {
        self.lower[col] = lower;
        self.upper[col] = upper;
    }

    pub fn set_kind(&mut self, col: usize, kind: VarKind) {
        self.kinds[col] = kind;
    }

    pub fn bounds(&self, col: usize) -> (f64, f64) {
        (self.lower[col], self.upper[col])
    }

    pub fn kind(&self, col: usize) -> VarKind {
        self.kinds[col]
    }

    pub fn build(self) -> Result<MilpInstance> {
        let m = self.rhs.len();
        let n = self.c.len();
        let matrix = SparseMatrix::from_triplets(m, n, self.entries)?;
        let inst = MilpInstance {
            name: self.name,
            objective_name: self.objective_name,
            objective_sense: self.objective_sense,
            objective_offset: self.objective_offset,
            flipped: false,
            c: self.c,
            matrix,
            rhs: self.rhs,
            senses: self.senses,
            lower: self.lower,
            upper: self.upper,
            kinds: self.kinds,
            col_names: self.col_names,
            row_names: self.row_names,
        };
        inst.validate()?;
        Ok(inst)
    }
}

impl MilpInstance {
    pub fn builder(name: impl Into<String>) -> InstanceBuilder {
        InstanceBuilder::new(name)
    }

    /// Checks every structural invariant.
    pub fn validate(&self) -> Result<()> {
        let n = self.c.len();
        let m = self.rhs.len();
        let bad = |msg: String| Err(Error::InvalidInstance(msg));
        if self.lower.len() != n
            || self.upper.len() != n
            || self.kinds.len() != n
            || self.col_names.len() != n
        {
            return bad("column vectors have inconsistent lengths".into());
        }
        if self.senses.len() != m || self.row_names.len() != m {
            return bad("row vectors have inconsistent lengths".into());
        }
        if self.matrix.rows() != m || self.matrix.cols() != n {
            return bad("matrix shape disagrees with rows/columns".into());
        }
        if !self.objective_offset.is_finite() {
            return bad("objective offset is not finite".into());
        }
        for j in 0..n {
            let (lo, up) = (self.lower[j], self.upper[j]);
            if !self.c[j].is_finite() {
                return bad(format!("cost of column {} is not finite", self.col_names[j]));
            }
            if lo.is_nan() || up.is_nan() {
                return bad(format!("NaN bound on column {}", self.col_names[j]));
            }
            if lo > up {
                return bad(format!(
                    "column {} has lower bound {} above upper bound {}",
                    self.col_names[j], lo, up
                ));
            }
            if lo == f64::INFINITY || up == f64::NEG_INFINITY {
                return bad(format!("column {} has an empty domain", self.col_names[j]));
            }
            if self.kinds[j] == VarKind::Binary && (lo < 0.0 || up > 1.0) {
                return bad(format!(
                    "binary column {} has bounds [{}, {}] outside [0, 1]",
                    self.col_names[j], lo, up
                ));
            }
        }
        for i in 0..m {
            if !self.rhs[i].is_finite() {
                return bad(format!("rhs of row {} is not finite", self.row_names[i]));
            }
            if let ConstraintSense::Range { low, high } = self.senses[i] {
                if !low.is_finite() || !high.is_finite() || low > high {
                    return bad(format!(
                        "row {} has invalid range [{}, {}]",
                        self.row_names[i], low, high
                    ));
                }
                if self.rhs[i] != low {
                    return bad(format!("row {} rhs disagrees with its range", self.row_names[i]));
                }
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn objective_name(&self) -> &str {
        &self.objective_name
    }

    pub fn objective_sense(&self) -> ObjectiveSense {
        self.objective_sense
    }

    pub fn objective_offset(&self) -> f64 {
        self.objective_offset
    }

    /// Whether `normalize` flipped the objective of a maximization problem.
    pub fn is_flipped(&self) -> bool {
        self.flipped
    }

    pub fn num_cols(&self) -> usize {
        self.c.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn costs(&self) -> &[f64] {
        &self.c
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn senses(&self) -> &[ConstraintSense] {
        &self.senses
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn kinds(&self) -> &[VarKind] {
        &self.kinds
    }

    pub fn col_names(&self) -> &[String] {
        &self.col_names
    }

    pub fn row_names(&self) -> &[String] {
        &self.row_names
    }

    /// Activity interval `[lo, hi]` implied by row `i`'s sense.
    pub fn row_bounds(&self, i: usize) -> (f64, f64) {
        let b = self.rhs[i];
        match self.senses[i] {
            ConstraintSense::GreaterEqual => (b, f64::INFINITY),
            ConstraintSense::LessEqual => (f64::NEG_INFINITY, b),
            ConstraintSense::Equal => (b, b),
            ConstraintSense::Range { low, high } => (low, high),
        }
    }

    /// Indices of binary and general integer columns.
    pub fn integer_indices(&self) -> Vec<usize> {
        (0..self.num_cols()).filter(|&j| self.kinds[j].is_integer()).collect()
    }

    pub fn continuous_indices(&self) -> Vec<usize> {
        (0..self.num_cols()).filter(|&j| !self.kinds[j].is_integer()).collect()
    }

    pub fn has_integers(&self) -> bool {
        self.kinds.iter().any(|k| k.is_integer())
    }

    /// Objective `c·x` in minimization orientation.
    pub fn evaluate_objective(&self, x: &[f64]) -> Result<f64> {
        self.check_len(x)?;
        let v: f64 = self.c.iter().zip(x).map(|(c, x)| c * x).sum();
        Ok(match self.objective_sense {
            ObjectiveSense::Minimize => v,
            ObjectiveSense::Maximize => -v,
        })
    }

    /// Converts an internal minimization objective value back to the
    /// user's orientation, including the objective constant.
    pub fn report_objective(&self, internal: f64) -> f64 {
        let oriented = if self.flipped || self.objective_sense == ObjectiveSense::Maximize {
            -internal
        } else {
            internal
        };
        oriented + self.objective_offset
    }

    /// Checks rows, bounds and integrality of `x`.
    pub fn check_feasibility(&self, x: &[f64], tol: f64) -> Result<FeasibilityReport> {
        self.check_len(x)?;
        if !(tol > 0.0) {
            return Err(Error::Precondition(format!("tolerance must be positive, got {tol}")));
        }
        let mut violations = Vec::new();
        for j in 0..self.num_cols() {
            let v = x[j];
            if v.is_nan() {
                violations.push(Violation::Bound { col: j, amount: f64::INFINITY });
                continue;
            }
            let amount = (self.lower[j] - v).max(v - self.upper[j]);
            if amount > tol {
                violations.push(Violation::Bound { col: j, amount });
            }
        }
        let activity = self.matrix.mul_vec(x);
        for (i, &act) in activity.iter().enumerate() {
            let (lo, hi) = self.row_bounds(i);
            let amount = if act.is_nan() { f64::INFINITY } else { (lo - act).max(act - hi) };
            if amount > tol {
                violations.push(Violation::Row { row: i, amount });
            }
        }
        let constraint_violated = !violations.is_empty();
        for j in 0..self.num_cols() {
            if self.kinds[j].is_integer() {
                let frac = (x[j] - x[j].round()).abs();
                if frac > tol {
                    violations.push(Violation::Integrality { col: j, amount: frac });
                }
            }
        }
        let status = if constraint_violated {
            SolutionStatus::ConstraintInfeasible
        } else if !violations.is_empty() {
            SolutionStatus::IntegerInfeasible
        } else {
            SolutionStatus::Feasible
        };
        Ok(FeasibilityReport { status, violations })
    }

    /// Returns an equivalent minimization instance.
    pub fn normalize(&self) -> MilpInstance {
        match self.objective_sense {
            ObjectiveSense::Minimize => self.clone(),
            ObjectiveSense::Maximize => {
                let mut out = self.clone();
                out.c.iter_mut().for_each(|c| *c = -*c);
                out.objective_sense = ObjectiveSense::Minimize;
                out.flipped = true;
                out
            }
        }
    }

    pub fn classify(&self) -> ProblemClass {
        let mut binary = false;
        let mut general = false;
        let mut continuous = false;
        for k in &self.kinds {
            match k {
                VarKind::Binary => binary = true,
                VarKind::Integer => general = true,
                VarKind::Continuous => continuous = true,
            }
        }
        match (binary, general, continuous) {
            (false, false, _) => ProblemClass::Lp,
            (true, false, false) => ProblemClass::Bp,
            (true, false, true) => ProblemClass::Mbp,
            (_, true, false) => ProblemClass::PureInteger,
            (_, true, true) => ProblemClass::Milp,
        }
    }

    /// Pins every column of `fix_set` to zero through its bounds.
    pub fn fix_variables_to_zero(&self, fix_set: &BTreeSet<usize>) -> Result<MilpInstance> {
        let mut out = self.clone();
        for &j in fix_set {
            if j >= self.num_cols() {
                return Err(Error::Precondition(format!("column {j} out of range")));
            }
            if !self.kinds[j].is_integer() {
                return Err(Error::Precondition(format!(
                    "column {} is continuous and cannot be fixed",
                    self.col_names[j]
                )));
            }
            if self.lower[j] > 0.0 || self.upper[j] < 0.0 {
                return Err(Error::Precondition(format!(
                    "column {} has bounds [{}, {}] excluding zero",
                    self.col_names[j], self.lower[j], self.upper[j]
                )));
            }
            out.lower[j] = 0.0;
            out.upper[j] = 0.0;
        }
        Ok(out)
    }

    /// Copy with a replaced cost vector; all other data unchanged.
    pub fn with_costs(&self, c: Vec<f64>) -> Result<MilpInstance> {
        self.check_len(&c)?;
        let mut out = self.clone();
        out.c = c;
        Ok(out)
    }

    /// Copy with replaced bounds and kinds; used by relaxation and node LPs.
    pub(crate) fn with_columns(
        &self,
        lower: Vec<f64>,
        upper: Vec<f64>,
        kinds: Vec<VarKind>,
    ) -> MilpInstance {
        let mut out = self.clone();
        out.lower = lower;
        out.upper = upper;
        out.kinds = kinds;
        out
    }

    fn check_len(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.num_cols() {
            return Err(Error::Dimension { expected: self.num_cols(), got: x.len() });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SolutionStatus {
    Feasible,
    IntegerInfeasible,
    ConstraintInfeasible,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    Row { row: usize, amount: f64 },
    Bound { col: usize, amount: f64 },
    Integrality { col: usize, amount: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub status: SolutionStatus,
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.status == SolutionStatus::Feasible
    }
}

/// A variable assignment with its minimization-oriented objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub status: SolutionStatus,
}

impl Solution {
    /// Evaluates and checks `x` against `instance`.
    pub fn assess(instance: &MilpInstance, x: Vec<f64>) -> Result<Solution> {
        let objective = instance.evaluate_objective(&x)?;
        let status = instance.check_feasibility(&x, DEFAULT_FEAS_TOL)?.status;
        Ok(Solution { x, objective, status })
    }

    pub fn is_feasible(&self) -> bool {
        self.status == SolutionStatus::Feasible
    }
}
