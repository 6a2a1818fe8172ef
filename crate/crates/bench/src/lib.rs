//! Workloads shared by the benchmarks.

use stairsolve_core::{
    build_schur, linearize_problem, BenchmarkProblem, CostWeights, PhysicalParams, ProblemName, SchurSystem,
};

/// Schur system of a benchmark problem with `knots` knot points and `h = 0.1`.
pub fn schur_system(name: ProblemName, knots: usize) -> SchurSystem {
    let p = BenchmarkProblem::with_settings(
        name,
        knots,
        0.1,
        CostWeights::default(),
        PhysicalParams::default_for(name),
    );
    build_schur(&linearize_problem(&p).expect("valid problem")).expect("SPD system")
}
