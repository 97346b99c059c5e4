//! Workflow satisfiability with user- and class-independent constraints.
//!
//! The solver enumerates joint patterns (one step labelling per level of a
//! nested user-equivalence hierarchy) by backtracking, prunes them on
//! eligibility and authorization, and checks realizability of complete
//! patterns with layered bipartite matchings. The number of complete
//! patterns it can reach is bounded by the number of nested partitions of
//! the steps, so the running time is exponential in the step count only.
//!
//! Alongside the solver the crate provides a brute-force oracle, a seeded
//! instance generator, an OPB encoder and JSON file formats.

pub mod constraints;
pub mod error;
pub mod generator;
pub mod io;
pub mod matching;
pub mod model;
pub mod oracle;
pub mod patterns;
pub mod pb;
pub mod realize;
pub mod solver;

pub use constraints::{ClassIndependent, Constraint, ConstraintKind};
pub use error::{Result, WspError};
pub use model::{Assignment, EquivalenceHierarchy, PartialPlan, Plan, StepId, StepSet, UserId, Workflow};
pub use patterns::{JointPattern, LevelPattern, StepPartition};
pub use solver::{solve, SolveResult, SolveStats, SolverConfig, Verdict};
