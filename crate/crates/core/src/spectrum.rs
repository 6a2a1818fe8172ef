//! Dense spectral analysis used to check preconditioner quality.
//!
//! Everything here is cubic-time and intended for systems with `nm` up to a
//! few hundred.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::blocktri::BlockTriMatrix;
use crate::error::{Error, Result};
use crate::linalg::relative_asymmetry;
use crate::precond::PreconditionerOp;

/// Accepted relative asymmetry of inputs to [`eig_sym`].
pub const EIG_SYMMETRY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// `λ_max / λ_min`; `None` unless the spectrum is strictly positive.
    pub condition_number: Option<f64>,
    pub spectral_radius: f64,
}

impl SpectrumReport {
    pub fn from_eigenvalues(mut eigenvalues: Vec<f64>) -> Self {
        eigenvalues.sort_by(f64::total_cmp);
        let lambda_min = eigenvalues.first().copied().unwrap_or(f64::NAN);
        let lambda_max = eigenvalues.last().copied().unwrap_or(f64::NAN);
        let condition_number = (lambda_min > 0.0).then(|| lambda_max / lambda_min);
        let spectral_radius = eigenvalues.iter().fold(0.0, |a: f64, x| a.max(x.abs()));
        Self {
            eigenvalues,
            lambda_min,
            lambda_max,
            condition_number,
            spectral_radius,
        }
    }
}

/// Eigenvalues and orthonormal eigenvectors (as columns, matching the
/// ascending eigenvalue order).
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

fn check_symmetric(a: &DMatrix<f64>) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(crate::error::dim_mismatch("square matrix", format!("{:?}", a.shape())));
    }
    let deviation = relative_asymmetry(a);
    if deviation > EIG_SYMMETRY_TOL {
        return Err(Error::AsymmetricMatrix { deviation });
    }
    Ok(())
}

/// Full eigendecomposition of a symmetric matrix.
pub fn eigensystem(a: &DMatrix<f64>) -> Result<Eigensystem> {
    check_symmetric(a)?;
    let sym = (a + a.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let cols: Vec<DVector<f64>> = order.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect();
    let vectors = if cols.is_empty() {
        DMatrix::zeros(0, 0)
    } else {
        DMatrix::from_columns(&cols)
    };
    Ok(Eigensystem { values, vectors })
}

/// Spectrum of a symmetric matrix.
pub fn eig_sym(a: &DMatrix<f64>) -> Result<SpectrumReport> {
    Ok(SpectrumReport::from_eigenvalues(eigensystem(a)?.values))
}

/// `Lᵀ S L` where `Φ⁻¹ = L Lᵀ`; symmetric and similar to `Φ⁻¹ S`.
pub fn similar_symmetric_form(s: &DMatrix<f64>, precond_inverse: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let sym = (precond_inverse + precond_inverse.transpose()) * 0.5;
    let l = sym
        .cholesky()
        .ok_or_else(|| Error::NotPositiveDefinite {
            what: "preconditioner inverse".into(),
        })?
        .unpack();
    let t = l.transpose() * s * &l;
    Ok((&t + t.transpose()) * 0.5)
}

/// Spectrum of `Φ⁻¹ S`, computed from the similar symmetric form.
pub fn preconditioned_spectrum(s: &BlockTriMatrix, precond: &PreconditionerOp) -> Result<SpectrumReport> {
    dense_preconditioned_spectrum(&s.to_dense(), &precond.to_dense())
}

/// Like [`preconditioned_spectrum`] for dense inputs.
pub fn dense_preconditioned_spectrum(s: &DMatrix<f64>, precond_inverse: &DMatrix<f64>) -> Result<SpectrumReport> {
    eig_sym(&similar_symmetric_form(s, precond_inverse)?)
}

/// Number of singular values above `rel_tol · σ_max`.
pub fn rank_estimate(a: &DMatrix<f64>, rel_tol: f64) -> usize {
    if a.is_empty() {
        return 0;
    }
    let sv = a.clone().singular_values();
    let top = sv.iter().fold(0.0, |acc: f64, &x| acc.max(x));
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&x| x > rel_tol * top).count()
}

/// Power-iteration estimate of the spectral radius of a general operator.
///
/// Stops once successive estimates agree to `tol` (relative) or after
/// `max_steps`. Uses a fixed, deterministic start vector.
pub fn power_spectral_radius(
    dim: usize,
    mut apply: impl FnMut(&DVector<f64>) -> DVector<f64>,
    tol: f64,
    max_steps: usize,
) -> f64 {
    if dim == 0 {
        return 0.0;
    }
    let mut v = DVector::from_fn(dim, |i, _| 1.0 + (i as f64 * 0.618_033_988_749_895).fract());
    v /= v.norm();
    let mut estimate = 0.0;
    // Two-step ratios handle dominant ± pairs, which plain ratios oscillate on.
    for _ in 0..max_steps {
        let w = apply(&v);
        let w2 = apply(&w);
        let norm2 = w2.norm();
        if norm2 == 0.0 {
            return 0.0;
        }
        let next = norm2.sqrt();
        v = w2 / norm2;
        if (next - estimate).abs() <= tol * next.max(f64::MIN_POSITIVE) {
            return next;
        }
        estimate = next;
    }
    estimate
}

/// Writes `problem,preconditioner,index,eigenvalue` rows.
pub fn write_spectrum_csv<W: Write>(out: &mut W, rows: &[(String, String, SpectrumReport)]) -> Result<()> {
    writeln!(out, "problem,preconditioner,index,eigenvalue")?;
    for (problem, precond, report) in rows {
        for (i, ev) in report.eigenvalues.iter().enumerate() {
            writeln!(out, "{problem},{precond},{i},{ev:e}")?;
        }
    }
    Ok(())
}
