//! Fixture file formats.
//!
//! Block-tridiagonal text format:
//!
//! ```text
//! n m
//! <n diagonal blocks, each m rows of m numbers>
//! <n−1 super-diagonal blocks, same layout>
//! ```
//!
//! Tokens are whitespace-separated, so line breaks are cosmetic. Values are
//! written with 17 significant digits and read back exactly.
//!
//! Linearizations are stored as JSON with matrices as arrays of rows.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::blocktri::{BlockTriMatrix, BlockVector};
use crate::error::{Error, Result};
use crate::schur::TrajoptLinearization;

pub fn write_blocktri(s: &BlockTriMatrix) -> String {
    let mut out = format!("{} {}\n", s.n(), s.m());
    for block in s.diag().iter().chain(s.offdiag()) {
        for row in block.row_iter() {
            let line: Vec<String> = row.iter().map(|x| format!("{x:.16e}")).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out.push('\n');
    }
    out
}

pub fn parse_blocktri(text: &str) -> Result<BlockTriMatrix> {
    let mut tokens = text
        .lines()
        .enumerate()
        .flat_map(|(i, line)| line.split_whitespace().map(move |t| (i + 1, t)));

    let mut header = |what: &str| -> Result<usize> {
        let (line, tok) = tokens.next().ok_or_else(|| Error::Parse {
            line: 1,
            message: format!("missing {what}"),
        })?;
        tok.parse::<usize>().map_err(|e| Error::Parse {
            line,
            message: format!("bad {what} `{tok}`: {e}"),
        })
    };
    let n = header("block count n")?;
    let m = header("block size m")?;
    if n == 0 || m == 0 {
        return Err(Error::Parse {
            line: 1,
            message: "n and m must be positive".into(),
        });
    }

    let mut read_block = || -> Result<DMatrix<f64>> {
        let mut vals = Vec::with_capacity(m * m);
        for _ in 0..m * m {
            let (line, tok) = tokens.next().ok_or_else(|| Error::Parse {
                line: text.lines().count(),
                message: "unexpected end of input".into(),
            })?;
            vals.push(tok.parse::<f64>().map_err(|e| Error::Parse {
                line,
                message: format!("bad number `{tok}`: {e}"),
            })?);
        }
        Ok(DMatrix::from_row_slice(m, m, &vals))
    };
    let diag = (0..n).map(|_| read_block()).collect::<Result<Vec<_>>>()?;
    let offdiag = (0..n - 1).map(|_| read_block()).collect::<Result<Vec<_>>>()?;
    if let Some((line, tok)) = tokens.next() {
        return Err(Error::Parse {
            line,
            message: format!("trailing token `{tok}`"),
        });
    }
    BlockTriMatrix::new(diag, offdiag)
}

pub fn read_blocktri_file(path: impl AsRef<Path>) -> Result<BlockTriMatrix> {
    parse_blocktri(&std::fs::read_to_string(path)?)
}

pub fn write_blocktri_file(path: impl AsRef<Path>, s: &BlockTriMatrix) -> Result<()> {
    Ok(std::fs::write(path, write_blocktri(s))?)
}

type Rows = Vec<Vec<f64>>;

/// Serialized form of [`TrajoptLinearization`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearizationFile {
    pub knots: usize,
    pub nx: usize,
    pub nu: usize,
    pub state_hessians: Vec<Rows>,
    pub control_hessians: Vec<Rows>,
    pub state_gradients: Vec<Vec<f64>>,
    pub control_gradients: Vec<Vec<f64>>,
    pub state_jacobians: Vec<Rows>,
    pub control_jacobians: Vec<Rows>,
    pub residuals: Vec<Vec<f64>>,
}

fn to_rows(a: &DMatrix<f64>) -> Rows {
    a.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn from_rows(what: &str, rows: &Rows) -> Result<DMatrix<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::InvalidInput(format!("{what}: ragged rows")));
    }
    Ok(DMatrix::from_row_iterator(nrows, ncols, rows.iter().flatten().copied()))
}

fn matrices(what: &str, blocks: &[Rows]) -> Result<Vec<DMatrix<f64>>> {
    blocks
        .iter()
        .enumerate()
        .map(|(k, b)| from_rows(&format!("{what}[{k}]"), b))
        .collect()
}

impl From<&TrajoptLinearization> for LinearizationFile {
    fn from(lin: &TrajoptLinearization) -> Self {
        let vecs = |v: &[DVector<f64>]| v.iter().map(|x| x.as_slice().to_vec()).collect();
        Self {
            knots: lin.knots,
            nx: lin.nx,
            nu: lin.nu,
            state_hessians: lin.state_hessians.iter().map(to_rows).collect(),
            control_hessians: lin.control_hessians.iter().map(to_rows).collect(),
            state_gradients: vecs(&lin.state_gradients),
            control_gradients: vecs(&lin.control_gradients),
            state_jacobians: lin.state_jacobians.iter().map(to_rows).collect(),
            control_jacobians: lin.control_jacobians.iter().map(to_rows).collect(),
            residuals: (0..lin.residuals.n())
                .map(|i| lin.residuals.segment(i).iter().copied().collect())
                .collect(),
        }
    }
}

impl TryFrom<LinearizationFile> for TrajoptLinearization {
    type Error = Error;

    fn try_from(f: LinearizationFile) -> Result<Self> {
        let vecs = |v: Vec<Vec<f64>>| v.into_iter().map(DVector::from_vec).collect::<Vec<_>>();
        let residual_segments = vecs(f.residuals);
        let lin = TrajoptLinearization {
            knots: f.knots,
            nx: f.nx,
            nu: f.nu,
            state_hessians: matrices("state_hessians", &f.state_hessians)?,
            control_hessians: matrices("control_hessians", &f.control_hessians)?,
            state_gradients: vecs(f.state_gradients),
            control_gradients: vecs(f.control_gradients),
            state_jacobians: matrices("state_jacobians", &f.state_jacobians)?,
            control_jacobians: matrices("control_jacobians", &f.control_jacobians)?,
            residuals: BlockVector::from_segments(&residual_segments)?,
        };
        lin.validate()?;
        Ok(lin)
    }
}

pub fn linearization_to_json(lin: &TrajoptLinearization) -> Result<String> {
    Ok(serde_json::to_string_pretty(&LinearizationFile::from(lin))?)
}

pub fn linearization_from_json(text: &str) -> Result<TrajoptLinearization> {
    serde_json::from_str::<LinearizationFile>(text)?.try_into()
}
