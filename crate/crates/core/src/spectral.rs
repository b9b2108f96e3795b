//! Singular value decomposition of the data matrix and the partition of
//! equal singular values.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::Dataset;

pub const DEFAULT_TIE_TOLERANCE: f64 = 1e-9;

/// Inclusive run `first..=last` of 1-based singular value indices that share
/// one value. Index `k` is also the harmonic assigned to that direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TieBlock {
    pub first: usize,
    pub last: usize,
}

impl TieBlock {
    pub fn len(&self) -> usize {
        self.last + 1 - self.first
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone)]
pub struct SvdFactors {
    /// `d × d`, orthogonal.
    pub u: DMatrix<f64>,
    /// Non-increasing, length `d`.
    pub sigma: DVector<f64>,
    /// `N × d` with orthonormal columns.
    pub v: DMatrix<f64>,
    pub tie_partition: Vec<TieBlock>,
}

impl SvdFactors {
    pub fn dim(&self) -> usize {
        self.sigma.len()
    }

    /// `U Σ Vᵀ`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.u * DMatrix::from_diagonal(&self.sigma) * self.v.transpose()
    }
}

pub fn svd(ds: &Dataset) -> Result<SvdFactors> {
    svd_with_tolerance(ds, DEFAULT_TIE_TOLERANCE)
}

/// Thin SVD of the `d × N` data matrix (requires `d <= N`). The largest
/// magnitude entry of every column of `U` is made positive, the lowest row
/// index winning ties, and `V` is flipped alongside.
pub fn svd_with_tolerance(ds: &Dataset, tie_tolerance: f64) -> Result<SvdFactors> {
    svd_of_matrix(&ds.values, tie_tolerance)
}

pub fn svd_of_matrix(x: &DMatrix<f64>, tie_tolerance: f64) -> Result<SvdFactors> {
    let (d, n) = x.shape();
    if d > n {
        return Err(Error::TooFewPoints { d, n });
    }
    for (idx, v) in x.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite {
                feature: idx % d,
                point: idx / d,
            });
        }
    }

    let raw = x.clone().svd(true, true);
    let raw_u = raw.u.expect("u requested");
    let raw_vt = raw.v_t.expect("v_t requested");

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| raw.singular_values[b].total_cmp(&raw.singular_values[a]));

    let mut u = DMatrix::zeros(d, d);
    let mut v = DMatrix::zeros(n, d);
    let mut sigma = DVector::zeros(d);
    for (k, &src) in order.iter().enumerate() {
        sigma[k] = raw.singular_values[src].max(0.0);
        u.set_column(k, &raw_u.column(src));
        v.set_column(k, &raw_vt.row(src).transpose());
    }

    orthonormalize_columns(&mut u);
    orthonormalize_columns(&mut v);

    for k in 0..d {
        let col = u.column(k);
        let mut best = 0;
        for j in 1..d {
            if col[j].abs() > col[best].abs() {
                best = j;
            }
        }
        if col[best] < 0.0 {
            u.column_mut(k).neg_mut();
            v.column_mut(k).neg_mut();
        }
    }

    let tie_partition = group_ties(sigma.as_slice(), tie_tolerance);
    Ok(SvdFactors {
        u,
        sigma,
        v,
        tie_partition,
    })
}

/// Completes a set of columns to an orthonormal set when the decomposition
/// left null-space columns degenerate. A no-op for already orthonormal input.
fn orthonormalize_columns(m: &mut DMatrix<f64>) {
    let k = m.ncols();
    let gram = m.transpose() * &*m;
    if (gram - DMatrix::<f64>::identity(k, k)).amax() < 1e-13 {
        return;
    }
    let rows = m.nrows();
    let mut candidate = 0usize;
    for c in 0..k {
        let mut col = m.column(c).into_owned();
        loop {
            for p in 0..c {
                let prev = m.column(p).into_owned();
                let proj = prev.dot(&col);
                col.axpy(-proj, &prev, 1.0);
            }
            let norm = col.norm();
            if norm > 1e-8 {
                col /= norm;
                break;
            }
            // replace a degenerate column with the next standard basis vector
            col = DVector::zeros(rows);
            col[candidate % rows] = 1.0;
            candidate += 1;
        }
        m.set_column(c, &col);
    }
}

/// Splits `sigma` into maximal runs whose consecutive gaps are at most
/// `rel_tol * max(sigma_1, 1)`. Runs chain transitively.
pub fn group_ties(sigma: &[f64], rel_tol: f64) -> Vec<TieBlock> {
    if sigma.is_empty() {
        return Vec::new();
    }
    let tol = rel_tol * sigma[0].max(1.0);
    let mut blocks = Vec::new();
    let mut first = 1;
    for k in 1..sigma.len() {
        if sigma[k - 1] - sigma[k] > tol {
            blocks.push(TieBlock { first, last: k });
            first = k + 1;
        }
    }
    blocks.push(TieBlock {
        first,
        last: sigma.len(),
    });
    blocks
}
