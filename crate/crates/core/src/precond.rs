//! Preconditioners for symmetric block-tridiagonal systems.
//!
//! All kinds except [`PreconditionerKind::Polynomial`] store `Φ⁻¹` explicitly
//! in block-sparse form, so one application costs about one block-tridiagonal
//! matvec:
//!
//! | kind             | `Φ⁻¹`                                   |
//! |------------------|-----------------------------------------|
//! | Jacobi           | `diag(S)⁻¹`                             |
//! | BlockJacobi      | `block-diag(S)⁻¹ = D⁻¹`                 |
//! | AdditiveStair    | `½(Ψ_l⁻¹ + Ψ_r⁻¹)`                      |
//! | SymmetricStair   | `Ψ_l⁻¹ + Ψ_r⁻¹ − D⁻¹`                   |
//! | Polynomial(k)    | `Σ_{j=0..k} (Ψ_l⁻¹P_l)ʲ Ψ_l⁻¹`          |
//!
//! The symmetric stair inverse is `Ψ_l⁻¹` with its off-diagonal blocks copied
//! across the diagonal: block `(i, i+1)` is `−D_i⁻¹ O_i D_{i+1}⁻¹`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::blocktri::{BlockTriMatrix, BlockVector};
use crate::error::{Error, Result};
use crate::linalg::invert_block;
use crate::stair::{stair_pair, StairFactor, StairSide};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PreconditionerKind {
    Jacobi,
    BlockJacobi,
    AdditiveStair,
    SymmetricStair,
    /// Truncated Neumann series of the left stair splitting.
    Polynomial {
        degree: usize,
    },
}

impl PreconditionerKind {
    /// The four symmetric kinds, in the order used for reports.
    pub const SYMMETRIC: [PreconditionerKind; 4] = [
        PreconditionerKind::Jacobi,
        PreconditionerKind::BlockJacobi,
        PreconditionerKind::AdditiveStair,
        PreconditionerKind::SymmetricStair,
    ];

    pub fn is_symmetric(self) -> bool {
        !matches!(self, PreconditionerKind::Polynomial { .. })
    }
}

impl fmt::Display for PreconditionerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PreconditionerKind::Jacobi => f.write_str("jacobi"),
            PreconditionerKind::BlockJacobi => f.write_str("block-jacobi"),
            PreconditionerKind::AdditiveStair => f.write_str("additive-stair"),
            PreconditionerKind::SymmetricStair => f.write_str("symmetric-stair"),
            PreconditionerKind::Polynomial { degree } => write!(f, "poly:{degree}"),
        }
    }
}

impl FromStr for PreconditionerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "jacobi" => Ok(PreconditionerKind::Jacobi),
            "block-jacobi" => Ok(PreconditionerKind::BlockJacobi),
            "additive-stair" => Ok(PreconditionerKind::AdditiveStair),
            "symmetric-stair" => Ok(PreconditionerKind::SymmetricStair),
            other => {
                let degree = other
                    .strip_prefix("poly:")
                    .and_then(|d| d.parse::<usize>().ok())
                    .ok_or_else(|| Error::InvalidInput(format!("unknown preconditioner `{other}`")))?;
                if degree == 0 {
                    return Err(Error::InvalidInput("polynomial degree must be at least 1".into()));
                }
                Ok(PreconditionerKind::Polynomial { degree })
            }
        }
    }
}

/// Anything PCG can use as `z = Φ⁻¹ r`.
pub trait Preconditioner {
    fn apply(&self, r: &BlockVector) -> Result<BlockVector>;

    /// PCG refuses operators that report `false`.
    fn is_symmetric(&self) -> bool {
        true
    }

    fn name(&self) -> String {
        "custom".into()
    }
}

#[derive(Debug, Clone)]
enum InverseData {
    Diagonal(DVector<f64>),
    BlockDiagonal(Vec<DMatrix<f64>>),
    BlockTri(BlockTriMatrix),
    Polynomial { left: StairFactor, degree: usize },
}

/// A built preconditioner with its application data.
#[derive(Debug, Clone)]
pub struct PreconditionerOp {
    kind: PreconditionerKind,
    n: usize,
    m: usize,
    inverse: InverseData,
}

impl PreconditionerOp {
    pub fn build(s: &BlockTriMatrix, kind: PreconditionerKind) -> Result<Self> {
        let inverse = match kind {
            PreconditionerKind::Jacobi => {
                let mut inv = DVector::zeros(s.dim());
                for (i, d) in s.diag().iter().enumerate() {
                    for k in 0..s.m() {
                        let a = d[(k, k)];
                        if a == 0.0 || !a.is_finite() {
                            return Err(Error::ZeroDiagonal { row: i * s.m() + k });
                        }
                        inv[i * s.m() + k] = 1.0 / a;
                    }
                }
                InverseData::Diagonal(inv)
            }
            PreconditionerKind::BlockJacobi => InverseData::BlockDiagonal(
                s.diag()
                    .iter()
                    .enumerate()
                    .map(|(i, d)| invert_block(d, i))
                    .collect::<Result<_>>()?,
            ),
            PreconditionerKind::AdditiveStair => InverseData::BlockTri(stair_combination(s, 0.5)?),
            PreconditionerKind::SymmetricStair => InverseData::BlockTri(stair_combination(s, 1.0)?),
            PreconditionerKind::Polynomial { degree } => {
                if degree == 0 {
                    return Err(Error::InvalidInput("polynomial degree must be at least 1".into()));
                }
                InverseData::Polynomial {
                    left: StairFactor::new(s, StairSide::Left)?,
                    degree,
                }
            }
        };
        Ok(Self {
            kind,
            n: s.n(),
            m: s.m(),
            inverse,
        })
    }

    pub fn kind(&self) -> PreconditionerKind {
        self.kind
    }

    /// The explicit block-tridiagonal `Φ⁻¹` of the stair kinds.
    pub fn block_inverse(&self) -> Option<&BlockTriMatrix> {
        match &self.inverse {
            InverseData::BlockTri(b) => Some(b),
            _ => None,
        }
    }

    /// Dense `Φ⁻¹`, assembled column by column from [`Preconditioner::apply`].
    pub fn to_dense(&self) -> DMatrix<f64> {
        let dim = self.n * self.m;
        let cols: Vec<DVector<f64>> = (0..dim)
            .map(|j| {
                Preconditioner::apply(self, &BlockVector::unit(self.n, self.m, j))
                    .expect("unit vector has matching shape")
                    .into_dvector()
            })
            .collect();
        DMatrix::from_columns(&cols)
    }
}

impl Preconditioner for PreconditionerOp {
    fn apply(&self, r: &BlockVector) -> Result<BlockVector> {
        if r.n() != self.n || r.m() != self.m {
            return Err(crate::error::dim_mismatch(
                format!("{}x{} block vector", self.n, self.m),
                format!("{}x{}", r.n(), r.m()),
            ));
        }
        match &self.inverse {
            InverseData::Diagonal(inv) => BlockVector::from_dvector(self.n, self.m, inv.component_mul(r.as_dvector())),
            InverseData::BlockDiagonal(blocks) => {
                let mut z = BlockVector::zeros(self.n, self.m);
                for (i, b) in blocks.iter().enumerate() {
                    z.segment_mut(i).gemv(1.0, b, &r.segment(i), 0.0);
                }
                Ok(z)
            }
            InverseData::BlockTri(b) => b.matvec(r),
            InverseData::Polynomial { left, degree } => neumann_series(left, *degree, r),
        }
    }

    fn is_symmetric(&self) -> bool {
        self.kind.is_symmetric()
    }

    fn name(&self) -> String {
        self.kind.to_string()
    }
}

/// `(I + M + … + M^degree) Ψ⁻¹ r` with `M = Ψ⁻¹P`, by Horner's rule.
pub fn neumann_series(f: &StairFactor, degree: usize, r: &BlockVector) -> Result<BlockVector> {
    let y = f.apply_inverse(r)?;
    let mut z = y.clone();
    for _ in 0..degree {
        let mut next = f.apply_iteration(&z)?;
        next.axpy(1.0, &y);
        z = next;
    }
    Ok(z)
}

/// `D⁻¹ + weight · (off-diagonal stair inverse blocks)`, mirrored.
///
/// Each super-diagonal block `(j, j+1)` comes from whichever stair inverse
/// carries it (`Ψ_l⁻¹` on odd `j`, `Ψ_r⁻¹` on even `j`). `weight = 1` gives
/// the symmetric stair inverse, `weight = ½` the additive one.
fn stair_combination(s: &BlockTriMatrix, weight: f64) -> Result<BlockTriMatrix> {
    let (left, right) = stair_pair(s)?;
    let offdiag = (0..s.n() - 1)
        .map(|j| {
            let upper = left.inv_upper()[j]
                .as_ref()
                .or(right.inv_upper()[j].as_ref())
                .expect("exactly one stair side carries each super-diagonal block");
            upper * weight
        })
        .collect();
    BlockTriMatrix::new(left.inv_diag().to_vec(), offdiag)
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
    fn kind_names_round_trip() {
        for name in ["jacobi", "block-jacobi", "additive-stair", "symmetric-stair", "poly:3"] {
            let kind: PreconditionerKind = name.parse().unwrap();
            assert_eq!(kind.to_string(), name);
        }
        assert!("poly:0".parse::<PreconditionerKind>().is_err());
        assert!("poly:x".parse::<PreconditionerKind>().is_err());
        assert!("ilu".parse::<PreconditionerKind>().is_err());
    }

    #[test]
    fn identity_source_gives_identity_for_every_kind() {
        let s = BlockTriMatrix::identity(3, 2);
        for kind in PreconditionerKind::SYMMETRIC
            .into_iter()
            .chain([PreconditionerKind::Polynomial { degree: 2 }])
        {
            let p = PreconditionerOp::build(&s, kind).unwrap();
            assert_eq!(p.to_dense(), DMatrix::identity(6, 6), "{kind}");
        }
    }

    #[test]
    fn two_by_two_stair_inverses() {
        let s = scalar_tri(&[2.0, 2.0], &[1.0]);
        let sym = PreconditionerOp::build(&s, PreconditionerKind::SymmetricStair).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[0.5, -0.25, -0.25, 0.5]);
        assert!((sym.to_dense() - expected).amax() < 1e-15);

        let add = PreconditionerOp::build(&s, PreconditionerKind::AdditiveStair).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[0.5, -0.125, -0.125, 0.5]);
        assert!((add.to_dense() - expected).amax() < 1e-15);

        let r = BlockVector::from_vec(2, 1, vec![1.0, 0.0]).unwrap();
        let z = sym.apply(&r).unwrap();
        assert!((z.as_dvector() - DVector::from_vec(vec![0.5, -0.25])).amax() < 1e-15);
    }

    #[test]
    fn jacobi_scales_by_diagonal() {
        let s = BlockTriMatrix::new(vec![DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 4.0])], vec![]).unwrap();
        let p = PreconditionerOp::build(&s, PreconditionerKind::Jacobi).unwrap();
        let r = BlockVector::from_vec(1, 2, vec![2.0, 4.0]).unwrap();
        assert_eq!(p.apply(&r).unwrap().as_slice(), &[1.0, 1.0]);
    }

    #[test]
    fn zero_diagonal_is_an_error() {
        let s = scalar_tri(&[1.0, 0.0], &[1.0]);
        assert!(matches!(
            PreconditionerOp::build(&s, PreconditionerKind::Jacobi),
            Err(Error::ZeroDiagonal { row: 1 })
        ));
        assert!(matches!(
            PreconditionerOp::build(&s, PreconditionerKind::SymmetricStair),
            Err(Error::SingularBlock { index: 1 })
        ));
    }

    #[test]
    fn neumann_series_without_coupling_is_block_jacobi() {
        let s = scalar_tri(&[2.0, 4.0, 8.0], &[0.0, 0.0]);
        let left = StairFactor::new(&s, StairSide::Left).unwrap();
        let r = BlockVector::from_vec(3, 1, vec![2.0, 4.0, 8.0]).unwrap();
        for degree in 0..4 {
            let z = neumann_series(&left, degree, &r).unwrap();
            assert!(z.as_slice().iter().all(|v| (v - 1.0).abs() < 1e-15));
        }
        assert_eq!(neumann_series(&left, 0, &r).unwrap(), left.apply_inverse(&r).unwrap());
    }

    #[test]
    fn polynomial_reports_asymmetric_and_rejects_degree_zero() {
        let s = scalar_tri(&[2.0, 2.0, 2.0], &[1.0, 1.0]);
        let p = PreconditionerOp::build(&s, PreconditionerKind::Polynomial { degree: 2 }).unwrap();
        assert!(!p.is_symmetric());
        assert!(PreconditionerOp::build(&s, PreconditionerKind::Polynomial { degree: 0 }).is_err());
    }
}
