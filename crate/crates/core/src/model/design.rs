use nalgebra::{DMatrix, DVector};

use super::rng::RngStream;
use crate::error::{Error, Result};

/// Default cap on `n * p` for generated designs (400 MB of f64).
pub const DEFAULT_MAX_ENTRIES: usize = 50_000_000;

/// Dense n x p design. Entry `(i, j)` is feature `j` of sample `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignMatrix {
    data: DMatrix<f64>,
}

impl DesignMatrix {
    pub fn from_matrix(data: DMatrix<f64>) -> Result<Self> {
        if data.nrows() == 0 || data.ncols() == 0 {
            return Err(Error::InvalidArgument("design must have n >= 1 and p >= 1".into()));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("design entries must be finite".into()));
        }
        Ok(Self { data })
    }

    pub fn from_row_slice(n: usize, p: usize, values: &[f64]) -> Result<Self> {
        if values.len() != n * p {
            return Err(Error::DimensionMismatch {
                what: "design entries",
                expected: n * p,
                got: values.len(),
            });
        }
        Self::from_matrix(DMatrix::from_row_slice(n, p, values))
    }

    pub fn identity(n: usize) -> Self {
        Self {
            data: DMatrix::identity(n, n),
        }
    }

    pub fn n(&self) -> usize {
        self.data.nrows()
    }

    pub fn p(&self) -> usize {
        self.data.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn column(&self, j: usize) -> &[f64] {
        let n = self.n();
        &self.data.as_slice()[j * n..(j + 1) * n]
    }

    pub fn mul_vec(&self, b: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n()];
        for (j, &bj) in b.iter().enumerate() {
            if bj != 0.0 {
                for (o, x) in out.iter_mut().zip(self.column(j)) {
                    *o += x * bj;
                }
            }
        }
        out
    }

    /// `X^T v`.
    pub fn tr_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.p()).map(|j| dot(self.column(j), v)).collect()
    }

    pub fn column_sq_norms(&self) -> Vec<f64> {
        (0..self.p()).map(|j| dot(self.column(j), self.column(j))).collect()
    }

    pub fn to_dvector(v: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(v)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gaussian design with i.i.d. N(0, 1/n) entries, drawn row by row.
pub fn gen_design(n: usize, p: usize, rng: &mut RngStream) -> Result<DesignMatrix> {
    gen_design_with_budget(n, p, DEFAULT_MAX_ENTRIES, rng)
}

pub fn gen_design_with_budget(
    n: usize,
    p: usize,
    max_entries: usize,
    rng: &mut RngStream,
) -> Result<DesignMatrix> {
    if n == 0 || p == 0 {
        return Err(Error::InvalidArgument("design needs n >= 1 and p >= 1".into()));
    }
    let entries = n.checked_mul(p).unwrap_or(usize::MAX);
    if entries > max_entries {
        return Err(Error::Capacity {
            entries,
            budget: max_entries,
        });
    }
    let sd = 1.0 / (n as f64).sqrt();
    let values: Vec<f64> = (0..entries).map(|_| sd * rng.standard_normal()).collect();
    Ok(DesignMatrix {
        data: DMatrix::from_row_slice(n, p, &values),
    })
}
