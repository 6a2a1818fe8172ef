//! Small dense helpers shared by the block algorithms.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Pivots below `PIVOT_TOL · max|entry|` mark a block as singular.
pub const PIVOT_TOL: f64 = 1e-12;

fn max_abs(a: &DMatrix<f64>) -> f64 {
    a.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Inverts diagonal block `index`. Symmetric positive definite blocks go
/// through Cholesky; anything else through a fully pivoted LU.
pub fn invert_block(d: &DMatrix<f64>, index: usize) -> Result<DMatrix<f64>> {
    let scale = max_abs(d);
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::SingularBlock { index });
    }
    let threshold = PIVOT_TOL * scale;

    if d == &d.transpose() {
        if let Some(ch) = d.clone().cholesky() {
            let min_pivot = ch.l_dirty().diagonal().iter().fold(f64::INFINITY, |a, &x| a.min(x * x));
            if min_pivot < threshold {
                return Err(Error::SingularBlock { index });
            }
            let inv = ch.inverse();
            return Ok((&inv + inv.transpose()) * 0.5);
        }
    }

    let lu = d.clone().full_piv_lu();
    let min_pivot = lu.u().diagonal().iter().fold(f64::INFINITY, |a, &x| a.min(x.abs()));
    if min_pivot < threshold {
        return Err(Error::SingularBlock { index });
    }
    lu.try_inverse().ok_or(Error::SingularBlock { index })
}

/// Inverse of a matrix that must be symmetric positive definite.
pub fn spd_inverse(a: &DMatrix<f64>, what: impl FnOnce() -> String) -> Result<DMatrix<f64>> {
    let sym = (a + a.transpose()) * 0.5;
    match sym.cholesky() {
        Some(ch) => {
            let inv = ch.inverse();
            Ok((&inv + inv.transpose()) * 0.5)
        }
        None => Err(Error::NotPositiveDefinite { what: what() }),
    }
}

/// Relative asymmetry `max|A − Aᵀ| / max|A|`.
pub fn relative_asymmetry(a: &DMatrix<f64>) -> f64 {
    let scale = max_abs(a);
    if scale == 0.0 {
        return 0.0;
    }
    max_abs(&(a - a.transpose())) / scale
}
