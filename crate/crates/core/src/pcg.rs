//! Preconditioned conjugate gradient on a [`BlockTriMatrix`].

use serde::{Deserialize, Serialize};

use crate::blocktri::{BlockTriMatrix, BlockVector};
use crate::error::{Error, Result};
use crate::precond::Preconditioner;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StoppingCriterion {
    /// `‖r_k‖₂ / ‖γ‖₂ ≤ tol`
    RelativeResidual,
    /// `‖r_k‖₂ ≤ tol`
    AbsoluteResidual,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PcgConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub criterion: StoppingCriterion,
}

impl Default for PcgConfig {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 1000,
            criterion: StoppingCriterion::RelativeResidual,
        }
    }
}

impl PcgConfig {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "tolerance must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidInput("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct PcgReport {
    pub solution: BlockVector,
    /// Matvecs with `S` performed after initialization.
    pub iterations: usize,
    pub converged: bool,
    /// `‖r_k‖₂` for `k = 0..=iterations`.
    pub residual_history: Vec<f64>,
}

impl PcgReport {
    pub fn final_residual(&self) -> f64 {
        *self
            .residual_history
            .last()
            .expect("history holds the initial residual")
    }
}

/// Solves `S λ = γ` from a zero initial guess.
///
/// Each iteration performs one matvec with `S` and one preconditioner
/// application. Returns [`Error::NegativeCurvature`] if `pᵀSp ≤ 0`, and a
/// report with `converged = false` when `max_iter` is exhausted.
pub fn pcg_solve<P: Preconditioner + ?Sized>(
    s: &BlockTriMatrix,
    gamma: &BlockVector,
    precond: &P,
    cfg: &PcgConfig,
) -> Result<PcgReport> {
    cfg.validate()?;
    s.check_vector(gamma)?;
    if !precond.is_symmetric() {
        return Err(Error::AsymmetricPreconditioner(precond.name()));
    }

    let (n, m) = (s.n(), s.m());
    let threshold = match cfg.criterion {
        StoppingCriterion::RelativeResidual => cfg.tol * gamma.norm(),
        StoppingCriterion::AbsoluteResidual => cfg.tol,
    };

    let mut x = BlockVector::zeros(n, m);
    let mut r = gamma.clone();
    let mut history = vec![r.norm()];
    if history[0] == 0.0 || history[0] <= threshold {
        return Ok(PcgReport {
            solution: x,
            iterations: 0,
            converged: true,
            residual_history: history,
        });
    }

    let mut z = precond.apply(&r)?;
    let mut p = z.clone();
    let mut rz = r.dot(&z);

    for k in 1..=cfg.max_iter {
        let sp = s.matvec(&p)?;
        let curvature = p.dot(&sp);
        if curvature.is_nan() || curvature <= 0.0 {
            return Err(Error::NegativeCurvature {
                iteration: k,
                curvature,
            });
        }
        let alpha = rz / curvature;
        x.axpy(alpha, &p);
        r.axpy(-alpha, &sp);
        let res = r.norm();
        history.push(res);
        if res <= threshold {
            return Ok(PcgReport {
                solution: x,
                iterations: k,
                converged: true,
                residual_history: history,
            });
        }
        z = precond.apply(&r)?;
        let rz_next = r.dot(&z);
        let beta = rz_next / rz;
        rz = rz_next;
        p.xpby(&z, beta);
    }

    Ok(PcgReport {
        solution: x,
        iterations: cfg.max_iter,
        converged: false,
        residual_history: history,
    })
}
