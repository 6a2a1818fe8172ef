//! Preconditioner comparison on a benchmark problem.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pcg::{pcg_solve, PcgConfig};
use crate::precond::{PreconditionerKind, PreconditionerOp};
use crate::problems::{linearize_problem, BenchmarkProblem};
use crate::schur::{build_schur, SchurSystem};
use crate::spectrum::{preconditioned_spectrum, SpectrumReport};

/// One row of the comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub problem: String,
    pub preconditioner: String,
    pub n: usize,
    pub m: usize,
    pub cond: f64,
    /// `cond` divided by the Jacobi condition number.
    pub cond_rel_jacobi: f64,
    pub pcg_iters: usize,
    pub converged: bool,
    pub tol: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub records: Vec<ExperimentRecord>,
    /// `(problem, preconditioner, spectrum)` per record.
    pub spectra: Vec<(String, String, SpectrumReport)>,
}

/// Builds the problem's Schur system and evaluates every kind on it.
///
/// Jacobi is prepended when missing since it anchors `cond_rel_jacobi`.
/// Non-symmetric kinds are rejected.
pub fn run_experiment(
    problem: &BenchmarkProblem,
    kinds: &[PreconditionerKind],
    cfg: &PcgConfig,
) -> Result<ExperimentOutcome> {
    let name = problem.name.to_string();
    let lin = linearize_problem(problem).map_err(|e| annotate(&name, "linearize", e))?;
    let system = build_schur(&lin).map_err(|e| annotate(&name, "schur", e))?;
    run_on_system(&name, &system, kinds, cfg)
}

/// As [`run_experiment`] for an already-built Schur system.
pub fn run_on_system(
    name: &str,
    system: &SchurSystem,
    kinds: &[PreconditionerKind],
    cfg: &PcgConfig,
) -> Result<ExperimentOutcome> {
    let mut ordered = Vec::with_capacity(kinds.len() + 1);
    if !kinds.contains(&PreconditionerKind::Jacobi) {
        ordered.push(PreconditionerKind::Jacobi);
    }
    for &k in kinds {
        if !ordered.contains(&k) {
            ordered.push(k);
        }
    }

    let s = &system.matrix;
    let mut rows = Vec::with_capacity(ordered.len());
    for kind in ordered {
        let label = kind.to_string();
        let wrap = |e| annotate(name, &label, e);
        if !kind.is_symmetric() {
            return Err(wrap(Error::AsymmetricPreconditioner(label.clone())));
        }
        let op = PreconditionerOp::build(s, kind).map_err(wrap)?;
        let spectrum = preconditioned_spectrum(s, &op).map_err(wrap)?;
        let report = pcg_solve(s, &system.rhs, &op, cfg).map_err(wrap)?;
        rows.push((kind, spectrum, report));
    }

    let cond = |sp: &SpectrumReport| sp.condition_number.unwrap_or(f64::INFINITY);
    let jacobi_cond = rows
        .iter()
        .find(|(k, _, _)| *k == PreconditionerKind::Jacobi)
        .map(|(_, sp, _)| cond(sp))
        .expect("jacobi is always evaluated");

    let mut records = Vec::with_capacity(rows.len());
    let mut spectra = Vec::with_capacity(rows.len());
    for (kind, spectrum, report) in rows {
        let c = cond(&spectrum);
        records.push(ExperimentRecord {
            problem: name.to_string(),
            preconditioner: kind.to_string(),
            n: s.n(),
            m: s.m(),
            cond: c,
            cond_rel_jacobi: if kind == PreconditionerKind::Jacobi {
                1.0
            } else {
                c / jacobi_cond
            },
            pcg_iters: report.iterations,
            converged: report.converged,
            tol: cfg.tol,
            lambda_min: spectrum.lambda_min,
            lambda_max: spectrum.lambda_max,
        });
        spectra.push((name.to_string(), kind.to_string(), spectrum));
    }
    Ok(ExperimentOutcome { records, spectra })
}

fn annotate(problem: &str, kind: &str, source: Error) -> Error {
    Error::Experiment {
        problem: problem.to_string(),
        kind: kind.to_string(),
        source: Box::new(source),
    }
}

pub const CSV_HEADER: &str =
    "problem,preconditioner,n,m,cond,cond_rel_jacobi,pcg_iters,converged,tol,lambda_min,lambda_max";

pub fn write_records_csv<W: Write>(out: &mut W, records: &[ExperimentRecord]) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{:e},{:e},{},{},{:e},{:e},{:e}",
            r.problem,
            r.preconditioner,
            r.n,
            r.m,
            r.cond,
            r.cond_rel_jacobi,
            r.pcg_iters,
            r.converged,
            r.tol,
            r.lambda_min,
            r.lambda_max
        )?;
    }
    Ok(())
}

pub fn write_records_json<W: Write>(out: &mut W, records: &[ExperimentRecord]) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, records)?;
    writeln!(out)?;
    Ok(())
}
