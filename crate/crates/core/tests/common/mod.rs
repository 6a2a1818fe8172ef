//! Independent dense oracles and random instance generators.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stairsolve_core::{BlockTriMatrix, BlockVector, Preconditioner, Result, TrajoptLinearization};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
}

pub fn uniform_vector(rng: &mut impl Rng, len: usize) -> DVector<f64> {
    DVector::from_fn(len, |_, _| rng.gen_range(-1.0..1.0))
}

/// Random symmetric block-tridiagonal matrix shifted so that its smallest
/// eigenvalue equals `margin`.
pub fn random_spd_with_margin(rng: &mut impl Rng, n: usize, m: usize, margin: f64) -> BlockTriMatrix {
    let diag: Vec<_> = (0..n)
        .map(|_| {
            let a = uniform_matrix(rng, m, m);
            (&a + a.transpose()) * 0.5
        })
        .collect();
    let offdiag: Vec<_> = (0..n.saturating_sub(1)).map(|_| uniform_matrix(rng, m, m)).collect();
    let raw = BlockTriMatrix::new(diag.clone(), offdiag.clone()).unwrap();
    let lmin = raw.to_dense().symmetric_eigenvalues().min();
    let shift = margin - lmin;
    let diag = diag.into_iter().map(|d| d + DMatrix::identity(m, m) * shift).collect();
    BlockTriMatrix::new(diag, offdiag).unwrap()
}

/// Random SPD instance with `λ_min` drawn log-uniformly from `[1e-3, 1]`.
pub fn random_spd(rng: &mut impl Rng, n: usize, m: usize) -> BlockTriMatrix {
    let margin = 10f64.powf(rng.gen_range(-3.0..0.0));
    random_spd_with_margin(rng, n, m, margin)
}

/// Random SPD instance whose off-diagonal blocks are well conditioned.
pub fn random_spd_invertible_offdiag(rng: &mut impl Rng, n: usize, m: usize) -> BlockTriMatrix {
    let diag: Vec<_> = (0..n)
        .map(|_| {
            let a = uniform_matrix(rng, m, m);
            DMatrix::identity(m, m) * (4.0 * m as f64) + (&a + a.transpose()) * 0.5
        })
        .collect();
    let offdiag: Vec<_> = (0..n.saturating_sub(1))
        .map(|_| DMatrix::identity(m, m) * m as f64 + uniform_matrix(rng, m, m) * 0.5)
        .collect();
    BlockTriMatrix::new(diag, offdiag).unwrap()
}

pub fn dense_block_diagonal(s: &BlockTriMatrix) -> DMatrix<f64> {
    s.block_diagonal().to_dense()
}

pub fn rel_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let scale = a.norm().max(b.norm()).max(f64::MIN_POSITIVE);
    (a - b).norm() / scale
}

pub fn rel_diff_vec(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let scale = a.norm().max(b.norm()).max(f64::MIN_POSITIVE);
    (a - b).norm() / scale
}

pub fn dense_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    a.clone().lu().solve(b).expect("nonsingular system")
}

/// Sorted eigenvalues of `Φ⁻¹ S` from a generic (non-symmetric) eigensolver.
pub fn general_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let ev = a.complex_eigenvalues();
    let mut out: Vec<f64> = ev.iter().map(|z| z.re).collect();
    out.sort_by(f64::total_cmp);
    out
}

/// `z = A r` with a dense operator; used for the exact inverse of `S`.
pub struct DenseOperator {
    pub matrix: DMatrix<f64>,
    pub n: usize,
    pub m: usize,
}

impl DenseOperator {
    pub fn exact_inverse(s: &BlockTriMatrix) -> Self {
        Self {
            matrix: s.to_dense().try_inverse().expect("invertible"),
            n: s.n(),
            m: s.m(),
        }
    }
}

impl Preconditioner for DenseOperator {
    fn apply(&self, r: &BlockVector) -> Result<BlockVector> {
        BlockVector::from_dvector(self.n, self.m, &self.matrix * r.as_dvector())
    }

    fn name(&self) -> String {
        "dense".into()
    }
}

/// Random SPD matrix `M Mᵀ + floor·I`.
pub fn random_spd_dense(rng: &mut impl Rng, dim: usize, floor: f64) -> DMatrix<f64> {
    let a = uniform_matrix(rng, dim, dim);
    &a * a.transpose() + DMatrix::identity(dim, dim) * floor
}

pub fn random_linearization(rng: &mut impl Rng, knots: usize, nx: usize, nu: usize) -> TrajoptLinearization {
    let h = 0.1;
    TrajoptLinearization {
        knots,
        nx,
        nu,
        state_hessians: (0..knots).map(|_| random_spd_dense(rng, nx, 0.1)).collect(),
        control_hessians: (0..knots - 1).map(|_| random_spd_dense(rng, nu, 0.1)).collect(),
        state_gradients: (0..knots).map(|_| uniform_vector(rng, nx)).collect(),
        control_gradients: (0..knots - 1).map(|_| uniform_vector(rng, nu)).collect(),
        state_jacobians: (0..knots - 1)
            .map(|_| DMatrix::identity(nx, nx) + uniform_matrix(rng, nx, nx) * h)
            .collect(),
        control_jacobians: (0..knots - 1).map(|_| uniform_matrix(rng, nx, nu) * h).collect(),
        residuals: BlockVector::from_dvector(knots, nx, uniform_vector(rng, knots * nx)).unwrap(),
    }
}

/// Dense KKT data in interleaved primal order `(x_0, u_0, x_1, …, x_{N−1})`.
///
/// Optimality reads `G δz + Cᵀ λ = g`, `C δz = c`.
pub struct DenseKkt {
    pub g_mat: DMatrix<f64>,
    pub c_mat: DMatrix<f64>,
    pub g: DVector<f64>,
    pub c: DVector<f64>,
}

impl DenseKkt {
    pub fn assemble(lin: &TrajoptLinearization) -> Self {
        let (n, nx, nu) = (lin.knots, lin.nx, lin.nu);
        let stride = nx + nu;
        let primal = n * nx + (n - 1) * nu;
        let x_at = |k: usize| k * stride;
        let u_at = |k: usize| k * stride + nx;

        let mut g_mat = DMatrix::zeros(primal, primal);
        let mut g = DVector::zeros(primal);
        for k in 0..n {
            g_mat
                .view_mut((x_at(k), x_at(k)), (nx, nx))
                .copy_from(&lin.state_hessians[k]);
            g.rows_mut(x_at(k), nx).copy_from(&lin.state_gradients[k]);
        }
        for k in 0..n - 1 {
            g_mat
                .view_mut((u_at(k), u_at(k)), (nu, nu))
                .copy_from(&lin.control_hessians[k]);
            g.rows_mut(u_at(k), nu).copy_from(&lin.control_gradients[k]);
        }

        let mut c_mat = DMatrix::zeros(n * nx, primal);
        c_mat.view_mut((0, 0), (nx, nx)).fill_with_identity();
        for k in 0..n - 1 {
            let row = (k + 1) * nx;
            c_mat
                .view_mut((row, x_at(k)), (nx, nx))
                .copy_from(&(-&lin.state_jacobians[k]));
            c_mat
                .view_mut((row, u_at(k)), (nx, nu))
                .copy_from(&(-&lin.control_jacobians[k]));
            c_mat.view_mut((row, x_at(k + 1)), (nx, nx)).fill_with_identity();
        }
        let c = lin.residuals.as_dvector().clone();
        Self { g_mat, c_mat, g, c }
    }

    /// `S = −C G⁻¹ Cᵀ`.
    pub fn schur(&self) -> DMatrix<f64> {
        let g_inv = self.g_mat.clone().try_inverse().expect("invertible G");
        -(&self.c_mat * g_inv * self.c_mat.transpose())
    }

    /// `γ = c − C G⁻¹ g`.
    pub fn gamma(&self) -> DVector<f64> {
        let g_inv_g = dense_solve(&self.g_mat, &self.g);
        &self.c - &self.c_mat * g_inv_g
    }

    pub fn saddle_matrix(&self) -> DMatrix<f64> {
        let (p, d) = (self.g_mat.nrows(), self.c_mat.nrows());
        let mut k = DMatrix::zeros(p + d, p + d);
        k.view_mut((0, 0), (p, p)).copy_from(&self.g_mat);
        k.view_mut((0, p), (p, d)).copy_from(&self.c_mat.transpose());
        k.view_mut((p, 0), (d, p)).copy_from(&self.c_mat);
        k
    }

    pub fn saddle_rhs(&self) -> DVector<f64> {
        let mut v = DVector::zeros(self.g.len() + self.c.len());
        v.rows_mut(0, self.g.len()).copy_from(&self.g);
        v.rows_mut(self.g.len(), self.c.len()).copy_from(&self.c);
        v
    }

    /// `(δz, λ)` from a direct saddle-point solve.
    pub fn solve(&self) -> (DVector<f64>, DVector<f64>) {
        let sol = dense_solve(&self.saddle_matrix(), &self.saddle_rhs());
        let p = self.g.len();
        (sol.rows(0, p).into_owned(), sol.rows(p, self.c.len()).into_owned())
    }

    pub fn residual(&self, dz: &DVector<f64>, lambda: &DVector<f64>) -> f64 {
        let mut v = DVector::zeros(dz.len() + lambda.len());
        v.rows_mut(0, dz.len()).copy_from(dz);
        v.rows_mut(dz.len(), lambda.len()).copy_from(lambda);
        (self.saddle_matrix() * v - self.saddle_rhs()).norm() / self.saddle_rhs().norm()
    }
}

/// Checks that a sorted spectrum pairs up, after dropping `m` trailing ones
/// when `n` is odd, and returns the representative of each pair.
pub fn collapse_pairs(sorted: &[f64], n: usize, m: usize, rel_tol: f64) -> std::result::Result<Vec<f64>, String> {
    let mut vals = sorted.to_vec();
    if n % 2 == 1 {
        for _ in 0..m {
            let top = vals.pop().ok_or("spectrum too short")?;
            if (top - 1.0).abs() > rel_tol {
                return Err(format!("expected an eigenvalue 1 for odd n, found {top}"));
            }
        }
    }
    if !vals.len().is_multiple_of(2) {
        return Err(format!("{} eigenvalues left, cannot pair", vals.len()));
    }
    vals.chunks(2)
        .map(|p| {
            let scale = p[0].abs().max(p[1].abs());
            if (p[0] - p[1]).abs() > rel_tol * scale {
                Err(format!("unpaired eigenvalues {} and {}", p[0], p[1]))
            } else {
                Ok(0.5 * (p[0] + p[1]))
            }
        })
        .collect()
}

/// Predicted spectrum of the additive preconditioner from the symmetric one.
pub fn mapped_additive_spectrum(
    sym_sorted: &[f64],
    n: usize,
    m: usize,
    rel_tol: f64,
) -> std::result::Result<Vec<f64>, String> {
    let reps = collapse_pairs(sym_sorted, n, m, rel_tol)?;
    let mut out = Vec::with_capacity(sym_sorted.len());
    for mu in reps {
        let lambda = (1.0 - mu).max(0.0);
        let root = lambda.sqrt();
        out.push(1.0 - 0.5 * (lambda + root));
        out.push(1.0 - 0.5 * (lambda - root));
    }
    if n % 2 == 1 {
        out.extend(std::iter::repeat_n(1.0, m));
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

pub fn max_rel_mismatch(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}
