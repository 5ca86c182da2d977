//! Energy-system optimization with an energy-return-on-investment objective.
//!
//! The pipeline: a validated [`EnergySystemModel`] is assembled into an
//! [`LpProblem`], solved by the in-house simplex [`solver`], and the optimal
//! dispatch is post-processed into EROI figures by [`accounting`].
//! [`scenario`] sweeps emission caps and [`gsa`] propagates parameter
//! uncertainty through polynomial-chaos surrogates.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod accounting;
pub mod fixtures;
pub mod gsa;
pub mod io;
pub mod lp;
pub mod model;
pub mod scenario;
pub mod solver;

pub use accounting::{AccountingError, AccountingReport, Dispatch};
pub use lp::{assemble, LpError, LpProblem, ObjectiveSpec, Relation, Row, VarKey, VarKind};
pub use model::{EnergySystemModel, ModelData, ValidationError};
pub use solver::{solve, solve_warm, Basis, BasisStatus, Solution, SolveStatus, SolverError};
