//! Symmetric block-tridiagonal matrices and block-partitioned vectors.
//!
//! A [`BlockTriMatrix`] with `n` block rows of size `m` represents
//!
//! ```text
//! [ D_1    O_1                 ]
//! [ O_1^T  D_2    O_2          ]
//! [        O_2^T  D_3   ...    ]
//! [               ...   D_n    ]
//! ```
//!
//! Documentation uses 1-based block indices; the API is 0-based.

use nalgebra::{DMatrix, DVector, DVectorView, DVectorViewMut};

use crate::error::{dim_mismatch, Error, Result};

/// Relative tolerance on `‖D − Dᵀ‖_∞ / ‖D‖_∞` accepted when constructing a matrix.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// A vector partitioned into `n` segments of length `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockVector {
    n: usize,
    m: usize,
    data: DVector<f64>,
}

impl BlockVector {
    pub fn zeros(n: usize, m: usize) -> Self {
        Self {
            n,
            m,
            data: DVector::zeros(n * m),
        }
    }

    pub fn from_vec(n: usize, m: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * m {
            return Err(dim_mismatch(n * m, values.len()));
        }
        Ok(Self {
            n,
            m,
            data: DVector::from_vec(values),
        })
    }

    pub fn from_dvector(n: usize, m: usize, data: DVector<f64>) -> Result<Self> {
        if data.len() != n * m {
            return Err(dim_mismatch(n * m, data.len()));
        }
        Ok(Self { n, m, data })
    }

    pub fn from_segments(segments: &[DVector<f64>]) -> Result<Self> {
        let n = segments.len();
        if n == 0 {
            return Err(Error::InvalidInput("block vector needs at least one segment".into()));
        }
        let m = segments[0].len();
        let mut out = Self::zeros(n, m);
        for (i, seg) in segments.iter().enumerate() {
            if seg.len() != m {
                return Err(dim_mismatch(format!("segment {i} of length {m}"), seg.len()));
            }
            out.segment_mut(i).copy_from(seg);
        }
        Ok(out)
    }

    /// The `j`-th unit vector of length `nm`.
    pub fn unit(n: usize, m: usize, j: usize) -> Self {
        let mut v = Self::zeros(n, m);
        v.data[j] = 1.0;
        v
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn segment(&self, i: usize) -> DVectorView<'_, f64> {
        self.data.rows(i * self.m, self.m)
    }

    pub fn segment_mut(&mut self, i: usize) -> DVectorViewMut<'_, f64> {
        self.data.rows_mut(i * self.m, self.m)
    }

    pub fn as_dvector(&self) -> &DVector<f64> {
        &self.data
    }

    pub fn into_dvector(self) -> DVector<f64> {
        self.data
    }

    pub fn as_slice(&self) -> &[f64] {
        self.data.as_slice()
    }

    /// Sequential dot product; the summation order is fixed.
    pub fn dot(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(other.data.iter())
            .fold(0.0, |acc, (a, b)| acc + a * b)
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// `self += alpha * x`
    pub fn axpy(&mut self, alpha: f64, x: &Self) {
        self.data.axpy(alpha, &x.data, 1.0);
    }

    /// `self = x + beta * self`
    pub fn xpby(&mut self, x: &Self, beta: f64) {
        self.data.axpy(1.0, &x.data, beta);
    }

    pub fn scale(&mut self, alpha: f64) {
        self.data *= alpha;
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.n == other.n && self.m == other.m
    }

    /// Keeps the segments with even 1-based index (`v_e`).
    pub fn even_part(&self) -> Self {
        self.masked(|i| i % 2 == 1)
    }

    /// Keeps the segments with odd 1-based index (`v_o`).
    pub fn odd_part(&self) -> Self {
        self.masked(|i| i % 2 == 0)
    }

    /// Splits `v` into `(v_e, v_o)` with `v = v_e + v_o`.
    pub fn split_even_odd(&self) -> (Self, Self) {
        (self.even_part(), self.odd_part())
    }

    // `keep` receives the 0-based segment index.
    fn masked(&self, keep: impl Fn(usize) -> bool) -> Self {
        let mut out = Self::zeros(self.n, self.m);
        for i in (0..self.n).filter(|&i| keep(i)) {
            out.segment_mut(i).copy_from(&self.segment(i));
        }
        out
    }
}

impl std::ops::Add for &BlockVector {
    type Output = BlockVector;

    fn add(self, rhs: &BlockVector) -> BlockVector {
        assert!(self.same_shape(rhs), "block vector shapes differ");
        BlockVector {
            n: self.n,
            m: self.m,
            data: &self.data + &rhs.data,
        }
    }
}

impl std::ops::Sub for &BlockVector {
    type Output = BlockVector;

    fn sub(self, rhs: &BlockVector) -> BlockVector {
        assert!(self.same_shape(rhs), "block vector shapes differ");
        BlockVector {
            n: self.n,
            m: self.m,
            data: &self.data - &rhs.data,
        }
    }
}

/// Symmetric block-tridiagonal matrix stored as `n` diagonal and `n − 1`
/// super-diagonal dense `m×m` blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockTriMatrix {
    n: usize,
    m: usize,
    diag: Vec<DMatrix<f64>>,
    offdiag: Vec<DMatrix<f64>>,
}

impl BlockTriMatrix {
    /// Builds a matrix from its blocks. `offdiag[i]` is the block at
    /// position `(i, i+1)`; its transpose fills `(i+1, i)`.
    ///
    /// Diagonal blocks are replaced by `(D + Dᵀ)/2` after checking that the
    /// asymmetry is within [`SYMMETRY_TOL`].
    pub fn new(diag: Vec<DMatrix<f64>>, offdiag: Vec<DMatrix<f64>>) -> Result<Self> {
        let n = diag.len();
        if n == 0 {
            return Err(Error::InvalidInput("matrix needs at least one block row".into()));
        }
        let m = diag[0].nrows();
        if m == 0 {
            return Err(Error::InvalidInput("block dimension must be positive".into()));
        }
        if offdiag.len() != n - 1 {
            return Err(dim_mismatch(format!("{} off-diagonal blocks", n - 1), offdiag.len()));
        }
        for (i, b) in diag.iter().chain(offdiag.iter()).enumerate() {
            if b.shape() != (m, m) {
                return Err(dim_mismatch(
                    format!("{m}x{m} block"),
                    format!("{:?} at {i}", b.shape()),
                ));
            }
        }
        let diag = diag
            .into_iter()
            .enumerate()
            .map(|(i, d)| symmetrize_checked(d, i))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n, m, diag, offdiag })
    }

    pub fn identity(n: usize, m: usize) -> Self {
        Self {
            n,
            m,
            diag: vec![DMatrix::identity(m, m); n],
            offdiag: vec![DMatrix::zeros(m, m); n.saturating_sub(1)],
        }
    }

    /// Extracts the band blocks of a dense `nm×nm` matrix. Entries outside the
    /// block-tridiagonal band and the strictly lower off-diagonal blocks are ignored.
    pub fn from_dense(dense: &DMatrix<f64>, m: usize) -> Result<Self> {
        if m == 0 || dense.nrows() != dense.ncols() || !dense.nrows().is_multiple_of(m) {
            return Err(dim_mismatch(
                format!("square matrix with size divisible by {m}"),
                format!("{:?}", dense.shape()),
            ));
        }
        let n = dense.nrows() / m;
        let diag = (0..n)
            .map(|i| dense.view((i * m, i * m), (m, m)).into_owned())
            .collect();
        let offdiag = (0..n.saturating_sub(1))
            .map(|i| dense.view((i * m, (i + 1) * m), (m, m)).into_owned())
            .collect();
        Self::new(diag, offdiag)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.n * self.m
    }

    pub fn diag(&self) -> &[DMatrix<f64>] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[DMatrix<f64>] {
        &self.offdiag
    }

    pub fn check_vector(&self, x: &BlockVector) -> Result<()> {
        if x.n() != self.n || x.m() != self.m {
            return Err(dim_mismatch(
                format!("{}x{} block vector", self.n, self.m),
                format!("{}x{}", x.n(), x.m()),
            ));
        }
        Ok(())
    }

    /// `y_i = O_{i−1}ᵀ x_{i−1} + D_i x_i + O_i x_{i+1}`.
    ///
    /// Each output segment depends only on its own row of blocks.
    pub fn matvec(&self, x: &BlockVector) -> Result<BlockVector> {
        self.check_vector(x)?;
        let mut y = BlockVector::zeros(self.n, self.m);
        for i in 0..self.n {
            let mut yi = y.segment_mut(i);
            yi.gemv(1.0, &self.diag[i], &x.segment(i), 0.0);
            if i > 0 {
                yi.gemv_tr(1.0, &self.offdiag[i - 1], &x.segment(i - 1), 1.0);
            }
            if i + 1 < self.n {
                yi.gemv(1.0, &self.offdiag[i], &x.segment(i + 1), 1.0);
            }
        }
        Ok(y)
    }

    /// Dense `nm×nm` reconstruction.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let (n, m) = (self.n, self.m);
        let mut out = DMatrix::zeros(n * m, n * m);
        for i in 0..n {
            out.view_mut((i * m, i * m), (m, m)).copy_from(&self.diag[i]);
        }
        for (i, o) in self.offdiag.iter().enumerate() {
            out.view_mut((i * m, (i + 1) * m), (m, m)).copy_from(o);
            out.view_mut(((i + 1) * m, i * m), (m, m)).copy_from(&o.transpose());
        }
        out
    }

    /// Block-diagonal part `D`, as a block-tridiagonal matrix with zero off-diagonals.
    pub fn block_diagonal(&self) -> Self {
        Self {
            n: self.n,
            m: self.m,
            diag: self.diag.clone(),
            offdiag: vec![DMatrix::zeros(self.m, self.m); self.n - 1],
        }
    }

    /// Scales every block by `alpha`.
    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            n: self.n,
            m: self.m,
            diag: self.diag.iter().map(|b| b * alpha).collect(),
            offdiag: self.offdiag.iter().map(|b| b * alpha).collect(),
        }
    }
}

fn inf_norm(a: &DMatrix<f64>) -> f64 {
    a.row_iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn symmetrize_checked(d: DMatrix<f64>, index: usize) -> Result<DMatrix<f64>> {
    let asym = &d - d.transpose();
    let scale = inf_norm(&d);
    let deviation = if scale > 0.0 { inf_norm(&asym) / scale } else { 0.0 };
    if deviation > SYMMETRY_TOL {
        return Err(Error::AsymmetricBlock { index, deviation });
    }
    Ok((&d + d.transpose()) * 0.5)
}
