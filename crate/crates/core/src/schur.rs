//! Schur-complement reduction of a trajectory-optimization KKT system.
//!
//! The QP around a nominal trajectory has the KKT system
//!
//! ```text
//! [ G  Cᵀ ] [ δz ]   [ g ]
//! [ C  0  ] [ λ  ] = [ c ]
//! ```
//!
//! with `G = blkdiag(Q_0, R_0, Q_1, R_1, …, Q_{N−1})`, `g` the stacked cost
//! gradients, and `C` the Jacobian of the constraints `x_0 − x_s` and
//! `x_{k+1} − f(x_k, u_k)`. Eliminating `δz` gives `S λ = γ` with
//! `S = −C G⁻¹ Cᵀ` block-tridiagonal:
//!
//! ```text
//! θ_k = −A_k Q_k⁻¹ A_kᵀ − B_k R_k⁻¹ B_kᵀ − Q_{k+1}⁻¹
//! φ_k = A_k Q_k⁻¹
//! ζ_k = A_k Q_k⁻¹ q_k + B_k R_k⁻¹ r_k − Q_{k+1}⁻¹ q_{k+1}
//! S   = tridiag(diag = [−Q_0⁻¹, θ_0, …, θ_{N−2}], sub = [φ_0, …, φ_{N−2}])
//! γ   = c + (−Q_0⁻¹ q_0, ζ_0, …, ζ_{N−2})
//! ```
//!
//! `S` is negative definite. [`build_schur`] returns `−S` (positive definite)
//! together with the unchanged `γ`, so the solution of the returned system is
//! `−λ`. [`SchurSystem::recover_primal`] undoes that sign.

use nalgebra::{DMatrix, DVector};

use crate::blocktri::{BlockTriMatrix, BlockVector};
use crate::error::{dim_mismatch, Error, Result};
use crate::linalg::spd_inverse;

/// One QP linearization of a trajectory problem with `knots` knot points.
///
/// Knot `k` carries state `x_k`; intervals `k = 0..knots−1` carry control
/// `u_k` and the dynamics `x_{k+1} = A_k x_k + B_k u_k + …`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajoptLinearization {
    pub knots: usize,
    pub nx: usize,
    pub nu: usize,
    /// `Q_k`, one per knot.
    pub state_hessians: Vec<DMatrix<f64>>,
    /// `R_k`, one per interval.
    pub control_hessians: Vec<DMatrix<f64>>,
    /// `q_k`, one per knot.
    pub state_gradients: Vec<DVector<f64>>,
    /// `r_k`, one per interval.
    pub control_gradients: Vec<DVector<f64>>,
    /// `A_k = ∂f/∂x`, one per interval.
    pub state_jacobians: Vec<DMatrix<f64>>,
    /// `B_k = ∂f/∂u`, one per interval.
    pub control_jacobians: Vec<DMatrix<f64>>,
    /// Segment 0 is `x_0 − x_s`; segment `k ≥ 1` is the defect of interval `k−1`.
    pub residuals: BlockVector,
}

impl TrajoptLinearization {
    /// Checks sequence lengths and block shapes. Definiteness is checked when
    /// the Hessians are factored.
    pub fn validate(&self) -> Result<()> {
        let (n, nx, nu) = (self.knots, self.nx, self.nu);
        if n == 0 || nx == 0 || nu == 0 {
            return Err(Error::InvalidInput("knots, nx and nu must be positive".into()));
        }
        let intervals = n - 1;
        check_len("state_hessians", self.state_hessians.len(), n)?;
        check_len("state_gradients", self.state_gradients.len(), n)?;
        check_len("control_hessians", self.control_hessians.len(), intervals)?;
        check_len("control_gradients", self.control_gradients.len(), intervals)?;
        check_len("state_jacobians", self.state_jacobians.len(), intervals)?;
        check_len("control_jacobians", self.control_jacobians.len(), intervals)?;
        check_shapes("state_hessians", &self.state_hessians, (nx, nx))?;
        check_shapes("control_hessians", &self.control_hessians, (nu, nu))?;
        check_shapes("state_jacobians", &self.state_jacobians, (nx, nx))?;
        check_shapes("control_jacobians", &self.control_jacobians, (nx, nu))?;
        for (k, q) in self.state_gradients.iter().enumerate() {
            if q.len() != nx {
                return Err(dim_mismatch(format!("state_gradients[{k}] of length {nx}"), q.len()));
            }
        }
        for (k, r) in self.control_gradients.iter().enumerate() {
            if r.len() != nu {
                return Err(dim_mismatch(format!("control_gradients[{k}] of length {nu}"), r.len()));
            }
        }
        if self.residuals.n() != n || self.residuals.m() != nx {
            return Err(dim_mismatch(
                format!("residuals with {n} segments of length {nx}"),
                format!("{}x{}", self.residuals.n(), self.residuals.m()),
            ));
        }
        Ok(())
    }

    /// Length of the interleaved primal vector `(x_0, u_0, …, x_{N−1})`.
    pub fn primal_dim(&self) -> usize {
        self.knots * self.nx + (self.knots - 1) * self.nu
    }

    /// Offset of `x_k` in the interleaved primal vector.
    pub fn state_offset(&self, k: usize) -> usize {
        k * (self.nx + self.nu)
    }

    /// Offset of `u_k` in the interleaved primal vector.
    pub fn control_offset(&self, k: usize) -> usize {
        k * (self.nx + self.nu) + self.nx
    }
}

fn check_len(what: &str, found: usize, expected: usize) -> Result<()> {
    if found != expected {
        return Err(dim_mismatch(format!("{expected} {what}"), found));
    }
    Ok(())
}

fn check_shapes(what: &str, blocks: &[DMatrix<f64>], shape: (usize, usize)) -> Result<()> {
    for (k, b) in blocks.iter().enumerate() {
        if b.shape() != shape {
            return Err(dim_mismatch(
                format!("{what}[{k}] of shape {shape:?}"),
                format!("{:?}", b.shape()),
            ));
        }
    }
    Ok(())
}

/// The positive definite system `(−S) y = γ` whose solution is `y = −λ`.
#[derive(Debug, Clone)]
pub struct SchurSystem {
    /// `−S`: diagonal `Q_0⁻¹, −θ_0, …`; super-diagonal `−φ_kᵀ`.
    pub matrix: BlockTriMatrix,
    /// `γ`.
    pub rhs: BlockVector,
    state_hessian_inv: Vec<DMatrix<f64>>,
    control_hessian_inv: Vec<DMatrix<f64>>,
}

/// The primal step `δz` laid out as `(δx_0, δu_0, …, δu_{N−2}, δx_{N−1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateControlStep {
    pub knots: usize,
    pub nx: usize,
    pub nu: usize,
    pub values: DVector<f64>,
}

impl StateControlStep {
    pub fn state(&self, k: usize) -> DVector<f64> {
        self.values.rows(k * (self.nx + self.nu), self.nx).into_owned()
    }

    pub fn control(&self, k: usize) -> DVector<f64> {
        self.values
            .rows(k * (self.nx + self.nu) + self.nx, self.nu)
            .into_owned()
    }
}

/// Forms the negated Schur complement and `γ` from the block formulas.
pub fn build_schur(lin: &TrajoptLinearization) -> Result<SchurSystem> {
    lin.validate()?;
    let q_inv = lin
        .state_hessians
        .iter()
        .enumerate()
        .map(|(k, q)| spd_inverse(q, || format!("state cost Hessian Q_{k} at knot {k}")))
        .collect::<Result<Vec<_>>>()?;
    let r_inv = lin
        .control_hessians
        .iter()
        .enumerate()
        .map(|(k, r)| spd_inverse(r, || format!("control cost Hessian R_{k} at knot {k}")))
        .collect::<Result<Vec<_>>>()?;

    let (n, nx) = (lin.knots, lin.nx);
    let mut diag = Vec::with_capacity(n);
    let mut offdiag = Vec::with_capacity(n - 1);
    let mut rhs = lin.residuals.clone();

    diag.push(q_inv[0].clone());
    rhs.segment_mut(0).gemv(-1.0, &q_inv[0], &lin.state_gradients[0], 1.0);

    for k in 0..n - 1 {
        let a = &lin.state_jacobians[k];
        let b = &lin.control_jacobians[k];
        let phi = a * &q_inv[k];
        let b_rinv = b * &r_inv[k];

        // −θ_k
        let neg_theta = &phi * a.transpose() + &b_rinv * b.transpose() + &q_inv[k + 1];
        diag.push(neg_theta);
        // −φ_kᵀ at block (k, k+1)
        offdiag.push(-phi.transpose());

        let mut seg = rhs.segment_mut(k + 1);
        seg.gemv(1.0, &phi, &lin.state_gradients[k], 1.0);
        seg.gemv(1.0, &b_rinv, &lin.control_gradients[k], 1.0);
        seg.gemv(-1.0, &q_inv[k + 1], &lin.state_gradients[k + 1], 1.0);
    }
    debug_assert_eq!(rhs.m(), nx);

    Ok(SchurSystem {
        matrix: BlockTriMatrix::new(diag, offdiag)?,
        rhs,
        state_hessian_inv: q_inv,
        control_hessian_inv: r_inv,
    })
}

impl SchurSystem {
    /// Converts a solution `y` of `(−S) y = γ` into the multiplier `λ = −y`.
    pub fn multiplier(&self, solution: &BlockVector) -> Result<BlockVector> {
        self.matrix.check_vector(solution)?;
        let mut lambda = solution.clone();
        lambda.scale(-1.0);
        Ok(lambda)
    }

    /// `δz = G⁻¹(g − Cᵀλ)` with `λ = −solution`, using the cached Hessian inverses.
    pub fn recover_primal(&self, lin: &TrajoptLinearization, solution: &BlockVector) -> Result<StateControlStep> {
        let lambda = self.multiplier(solution)?;
        primal_from_multiplier(lin, &lambda, &self.state_hessian_inv, &self.control_hessian_inv)
    }
}

/// `δz` from a solution of the negated Schur system; factors the Hessians itself.
pub fn recover_primal(lin: &TrajoptLinearization, solution: &BlockVector) -> Result<StateControlStep> {
    build_schur(lin)?.recover_primal(lin, solution)
}

fn primal_from_multiplier(
    lin: &TrajoptLinearization,
    lambda: &BlockVector,
    q_inv: &[DMatrix<f64>],
    r_inv: &[DMatrix<f64>],
) -> Result<StateControlStep> {
    let (n, nx, nu) = (lin.knots, lin.nx, lin.nu);
    let mut values = DVector::zeros(lin.primal_dim());
    for (k, qi) in q_inv.iter().enumerate() {
        // (Cᵀλ)_x_k = λ_k − A_kᵀ λ_{k+1}
        let mut rhs = &lin.state_gradients[k] - lambda.segment(k);
        if k + 1 < n {
            rhs.gemv_tr(1.0, &lin.state_jacobians[k], &lambda.segment(k + 1), 1.0);
        }
        values.rows_mut(lin.state_offset(k), nx).copy_from(&(qi * rhs));
    }
    for (k, ri) in r_inv.iter().enumerate() {
        // (Cᵀλ)_u_k = −B_kᵀ λ_{k+1}
        let mut rhs = lin.control_gradients[k].clone();
        rhs.gemv_tr(1.0, &lin.control_jacobians[k], &lambda.segment(k + 1), 1.0);
        values.rows_mut(lin.control_offset(k), nu).copy_from(&(ri * rhs));
    }
    Ok(StateControlStep {
        knots: n,
        nx,
        nu,
        values,
    })
}
