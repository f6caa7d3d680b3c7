//! MILP toolkit built around the objective scaling ensemble heuristic:
//! MPS I/O, a bounded-variable simplex, branch-and-bound, the scaling and
//! ensemble-fixing pipeline, and a benchmark harness.

pub mod bench;
pub mod budget;
pub mod error;
pub mod model;
pub mod lp;
pub mod mip;
pub mod mps;
pub mod osea;

pub use error::{Error, Result};
pub use model::{
    ConstraintSense, FeasibilityReport, InstanceBuilder, MilpInstance, ObjectiveSense,
    ProblemClass, Solution, SolutionStatus, VarKind,
};
pub use budget::Budget;
