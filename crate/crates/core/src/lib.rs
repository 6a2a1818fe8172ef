//! Block-tridiagonal linear algebra for trajectory-optimization Schur systems.
//!
//! The crate provides:
//!
//! * [`BlockTriMatrix`] / [`BlockVector`]: symmetric block-tridiagonal storage and matvec,
//! * [`stair`]: left/right stair splittings with closed-form block-sparse inverses,
//! * [`precond`]: Jacobi, block-Jacobi, additive stair, symmetric stair and
//!   truncated polynomial preconditioners,
//! * [`pcg`]: preconditioned conjugate gradient with residual telemetry,
//! * [`schur`]: Schur-complement reduction of a trajectory QP and primal recovery,
//! * [`spectrum`]: dense eigenvalue, rank and condition-number analysis,
//! * [`problems`] and [`experiment`]: pendulum / cart-pole benchmarks and the
//!   preconditioner comparison that feeds the CLI.

pub mod blocktri;
pub mod error;
pub mod experiment;
pub mod io;
pub mod linalg;
pub mod pcg;
pub mod precond;
pub mod problems;
pub mod schur;
pub mod spectrum;
pub mod stair;

pub use blocktri::{BlockTriMatrix, BlockVector};
pub use error::{Error, Result};
pub use experiment::{run_experiment, ExperimentOutcome, ExperimentRecord};
pub use pcg::{pcg_solve, PcgConfig, PcgReport, StoppingCriterion};
pub use precond::{Preconditioner, PreconditionerKind, PreconditionerOp};
pub use problems::{linearize_problem, BenchmarkProblem, CostWeights, Integrator, PhysicalParams, ProblemName};
pub use schur::{build_schur, recover_primal, SchurSystem, StateControlStep, TrajoptLinearization};
pub use spectrum::{eig_sym, preconditioned_spectrum, rank_estimate, SpectrumReport};
pub use stair::{StairFactor, StairSide};

pub use nalgebra::{DMatrix, DVector};
