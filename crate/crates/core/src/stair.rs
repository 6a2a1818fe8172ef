//! Left and right stair splittings `S = Ψ − P` of a symmetric
//! block-tridiagonal matrix.
//!
//! A stair matrix `Ψ` keeps every diagonal block of `S` and the full
//! off-diagonal row on alternating block rows ("stair rows"):
//!
//! * [`StairSide::Left`] (type 1): stair rows are the even 1-based rows 2, 4, …
//! * [`StairSide::Right`] (type 2): stair rows are the odd 1-based rows 1, 3, …
//!
//! `P = Ψ − S` carries the negated off-diagonal blocks of the remaining rows.
//! Because the off-diagonal part of `Ψ` is nilpotent of index two after
//! scaling by `D⁻¹`, the inverse has the closed form
//!
//! ```text
//! Ψ⁻¹ = D⁻¹ (2D − Ψ) D⁻¹
//! ```
//!
//! so on stair row `i` the inverse carries `−D_i⁻¹ O_{i−1}ᵀ D_{i−1}⁻¹` and
//! `−D_i⁻¹ O_i D_{i+1}⁻¹` next to `D_i⁻¹`, and nothing else off the diagonal.

use nalgebra::{DMatrix, DVector};

use crate::blocktri::{BlockTriMatrix, BlockVector};
use crate::error::Result;
use crate::linalg::invert_block;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StairSide {
    /// Type 1: off-diagonal blocks kept on even 1-based block rows.
    Left,
    /// Type 2: off-diagonal blocks kept on odd 1-based block rows.
    Right,
}

impl StairSide {
    /// Whether 0-based block row `row` carries off-diagonal blocks in `Ψ`.
    pub fn is_stair_row(self, row: usize) -> bool {
        match self {
            StairSide::Left => row % 2 == 1,
            StairSide::Right => row.is_multiple_of(2),
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            StairSide::Left => StairSide::Right,
            StairSide::Right => StairSide::Left,
        }
    }
}

/// One stair splitting with the explicit block-sparse inverse of `Ψ`.
#[derive(Debug, Clone)]
pub struct StairFactor {
    side: StairSide,
    n: usize,
    m: usize,
    diag: Vec<DMatrix<f64>>,
    offdiag: Vec<DMatrix<f64>>,
    inv_diag: Vec<DMatrix<f64>>,
    /// Block `(j+1, j)` of `Ψ⁻¹`, present iff row `j+1` is a stair row.
    inv_lower: Vec<Option<DMatrix<f64>>>,
    /// Block `(j, j+1)` of `Ψ⁻¹`, present iff row `j` is a stair row.
    inv_upper: Vec<Option<DMatrix<f64>>>,
}

impl StairFactor {
    /// Splits `s` on the given side. Fails with [`crate::Error::SingularBlock`]
    /// if some `D_i` cannot be inverted.
    pub fn new(s: &BlockTriMatrix, side: StairSide) -> Result<Self> {
        let inv_diag = s
            .diag()
            .iter()
            .enumerate()
            .map(|(i, d)| invert_block(d, i))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_inverted(s, side, inv_diag))
    }

    /// Builds the factor from precomputed `D_i⁻¹` blocks.
    pub(crate) fn from_inverted(s: &BlockTriMatrix, side: StairSide, inv_diag: Vec<DMatrix<f64>>) -> Self {
        let n = s.n();
        let offdiag = s.offdiag().to_vec();
        let mut inv_lower = vec![None; n.saturating_sub(1)];
        let mut inv_upper = vec![None; n.saturating_sub(1)];
        for (j, o) in offdiag.iter().enumerate() {
            if side.is_stair_row(j + 1) {
                inv_lower[j] = Some(-(&inv_diag[j + 1] * o.transpose() * &inv_diag[j]));
            }
            if side.is_stair_row(j) {
                inv_upper[j] = Some(-(&inv_diag[j] * o * &inv_diag[j + 1]));
            }
        }
        Self {
            side,
            n,
            m: s.m(),
            diag: s.diag().to_vec(),
            offdiag,
            inv_diag,
            inv_lower,
            inv_upper,
        }
    }

    pub fn side(&self) -> StairSide {
        self.side
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// `D_i⁻¹` blocks.
    pub fn inv_diag(&self) -> &[DMatrix<f64>] {
        &self.inv_diag
    }

    pub fn inv_lower(&self) -> &[Option<DMatrix<f64>>] {
        &self.inv_lower
    }

    pub fn inv_upper(&self) -> &[Option<DMatrix<f64>>] {
        &self.inv_upper
    }

    fn check(&self, x: &BlockVector) -> Result<()> {
        if x.n() != self.n || x.m() != self.m {
            return Err(crate::error::dim_mismatch(
                format!("{}x{} block vector", self.n, self.m),
                format!("{}x{}", x.n(), x.m()),
            ));
        }
        Ok(())
    }

    /// `Ψ⁻¹ x`. Output segment `i` reads only input segments `i−1..=i+1`.
    pub fn apply_inverse(&self, x: &BlockVector) -> Result<BlockVector> {
        self.check(x)?;
        let mut y = BlockVector::zeros(self.n, self.m);
        for i in 0..self.n {
            let mut yi = y.segment_mut(i);
            yi.gemv(1.0, &self.inv_diag[i], &x.segment(i), 0.0);
            if i > 0 {
                if let Some(b) = &self.inv_lower[i - 1] {
                    yi.gemv(1.0, b, &x.segment(i - 1), 1.0);
                }
            }
            if i + 1 < self.n {
                if let Some(b) = &self.inv_upper[i] {
                    yi.gemv(1.0, b, &x.segment(i + 1), 1.0);
                }
            }
        }
        Ok(y)
    }

    /// `P x` where `P = Ψ − S`; only non-stair rows are nonzero.
    pub fn apply_complement(&self, x: &BlockVector) -> Result<BlockVector> {
        self.check(x)?;
        let mut y = BlockVector::zeros(self.n, self.m);
        for i in (0..self.n).filter(|&i| !self.side.is_stair_row(i)) {
            let mut yi = y.segment_mut(i);
            if i > 0 {
                yi.gemv_tr(-1.0, &self.offdiag[i - 1], &x.segment(i - 1), 1.0);
            }
            if i + 1 < self.n {
                yi.gemv(-1.0, &self.offdiag[i], &x.segment(i + 1), 1.0);
            }
        }
        Ok(y)
    }

    /// `Ψ x`.
    pub fn apply_psi(&self, x: &BlockVector) -> Result<BlockVector> {
        self.check(x)?;
        let mut y = BlockVector::zeros(self.n, self.m);
        for i in 0..self.n {
            let mut yi = y.segment_mut(i);
            yi.gemv(1.0, &self.diag[i], &x.segment(i), 0.0);
            if self.side.is_stair_row(i) {
                if i > 0 {
                    yi.gemv_tr(1.0, &self.offdiag[i - 1], &x.segment(i - 1), 1.0);
                }
                if i + 1 < self.n {
                    yi.gemv(1.0, &self.offdiag[i], &x.segment(i + 1), 1.0);
                }
            }
        }
        Ok(y)
    }

    /// `Ψ⁻¹ P x`, one step of the splitting iteration matrix.
    pub fn apply_iteration(&self, x: &BlockVector) -> Result<BlockVector> {
        self.apply_inverse(&self.apply_complement(x)?)
    }

    /// Dense `Ψ`.
    pub fn dense_psi(&self) -> DMatrix<f64> {
        self.dense_by_columns(|x| self.apply_psi(x))
    }

    /// Dense `Ψ⁻¹` assembled from the stored blocks.
    pub fn dense_inverse(&self) -> DMatrix<f64> {
        let m = self.m;
        let mut out = DMatrix::zeros(self.n * m, self.n * m);
        for (i, b) in self.inv_diag.iter().enumerate() {
            out.view_mut((i * m, i * m), (m, m)).copy_from(b);
        }
        for j in 0..self.n.saturating_sub(1) {
            if let Some(b) = &self.inv_lower[j] {
                out.view_mut(((j + 1) * m, j * m), (m, m)).copy_from(b);
            }
            if let Some(b) = &self.inv_upper[j] {
                out.view_mut((j * m, (j + 1) * m), (m, m)).copy_from(b);
            }
        }
        out
    }

    /// Dense `P`.
    pub fn dense_complement(&self) -> DMatrix<f64> {
        self.dense_by_columns(|x| self.apply_complement(x))
    }

    fn dense_by_columns(&self, op: impl Fn(&BlockVector) -> Result<BlockVector>) -> DMatrix<f64> {
        let dim = self.n * self.m;
        let cols: Vec<DVector<f64>> = (0..dim)
            .map(|j| {
                op(&BlockVector::unit(self.n, self.m, j))
                    .expect("unit vector has matching shape")
                    .into_dvector()
            })
            .collect();
        DMatrix::from_columns(&cols)
    }
}

/// Both stair splittings of `s`, sharing one set of `D_i⁻¹` blocks.
pub fn stair_pair(s: &BlockTriMatrix) -> Result<(StairFactor, StairFactor)> {
    let left = StairFactor::new(s, StairSide::Left)?;
    let right = StairFactor::from_inverted(s, StairSide::Right, left.inv_diag.clone());
    Ok((left, right))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_tri(d: &[f64], o: &[f64]) -> BlockTriMatrix {
        BlockTriMatrix::new(
            d.iter().map(|&x| DMatrix::from_element(1, 1, x)).collect(),
            o.iter().map(|&x| DMatrix::from_element(1, 1, x)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn block_diagonal_source_gives_trivial_split() {
        let s = scalar_tri(&[2.0, 4.0, 5.0], &[0.0, 0.0]);
        for side in [StairSide::Left, StairSide::Right] {
            let f = StairFactor::new(&s, side).unwrap();
            assert_eq!(f.dense_psi(), s.to_dense());
            assert_eq!(f.dense_complement(), DMatrix::zeros(3, 3));
            let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![0.5, 0.25, 0.2]));
            assert!((f.dense_inverse() - expected).amax() < 1e-15);
        }
    }

    #[test]
    fn left_inverse_of_three_by_three() {
        let s = scalar_tri(&[1.0, 1.0, 1.0], &[0.5, 0.5]);
        let f = StairFactor::new(&s, StairSide::Left).unwrap();
        let expected = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, -0.5, 1.0, -0.5, 0.0, 0.0, 1.0]);
        assert!((f.dense_inverse() - expected).amax() < 1e-15);

        let x = BlockVector::from_vec(3, 1, vec![1.0; 3]).unwrap();
        assert!((f.apply_inverse(&x).unwrap().as_dvector() - DVector::from_vec(vec![1.0, 0.0, 1.0])).amax() < 1e-15);
    }

    #[test]
    fn identity_source_inverse_is_identity() {
        let s = BlockTriMatrix::identity(4, 2);
        let f = StairFactor::new(&s, StairSide::Right).unwrap();
        let x = BlockVector::from_vec(4, 2, (1..=8).map(f64::from).collect()).unwrap();
        assert_eq!(f.apply_inverse(&x).unwrap(), x);
    }

    #[test]
    fn complement_vanishes_without_off_diagonals() {
        let s = scalar_tri(&[1.0, 2.0, 3.0, 4.0], &[0.0; 3]);
        let f = StairFactor::new(&s, StairSide::Left).unwrap();
        let x = BlockVector::from_vec(4, 1, vec![1.0, -2.0, 3.0, -4.0]).unwrap();
        assert_eq!(f.apply_complement(&x).unwrap(), BlockVector::zeros(4, 1));
    }

    #[test]
    fn stair_row_parity() {
        assert!(!StairSide::Left.is_stair_row(0));
        assert!(StairSide::Left.is_stair_row(1));
        assert!(StairSide::Right.is_stair_row(0));
        assert_eq!(StairSide::Left.opposite(), StairSide::Right);
    }

    #[test]
    fn singular_diagonal_block_is_reported() {
        let s = scalar_tri(&[1.0, 0.0, 1.0], &[0.5, 0.5]);
        assert!(matches!(
            StairFactor::new(&s, StairSide::Left),
            Err(crate::Error::SingularBlock { index: 1 })
        ));
    }

    #[test]
    fn odd_part_is_annihilated_by_left_iteration() {
        let s = scalar_tri(&[3.0, 4.0, 5.0, 6.0, 7.0], &[1.0, -1.0, 0.5, 2.0]);
        let (left, right) = stair_pair(&s).unwrap();
        let v = BlockVector::from_vec(5, 1, vec![1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        let (ve, vo) = v.split_even_odd();
        assert!(left.apply_iteration(&vo).unwrap().norm() == 0.0);
        assert!(right.apply_complement(&ve).unwrap().norm() == 0.0);
        assert!(right.apply_iteration(&ve).unwrap().norm() == 0.0);
    }
}
