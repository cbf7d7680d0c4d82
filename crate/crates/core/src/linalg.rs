//! Thin SVD by one-sided (Hestenes) Jacobi rotations.

use crate::error::{Error, Result};
use crate::tensor::Matrix;

const MAX_SWEEPS: usize = 60;
/// Columns whose norm falls below this fraction of `|m|_F` are treated as null.
const NULL_THRESHOLD: f64 = 1e-14;

/// `m = u * diag(s) * v^T` with `r = min(rows, cols)` singular triplets.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdResult {
    pub u: Matrix,
    pub s: Vec<f64>,
    pub v: Matrix,
}

impl SvdResult {
    pub fn reconstruct(&self) -> Matrix {
        let us = Matrix::from_fn(self.u.rows(), self.u.cols(), |i, j| {
            self.u.get(i, j) * self.s[j]
        });
        us.matmul(&self.v.transpose())
            .expect("SVD factors have consistent shapes")
    }
}

/// Thin singular value decomposition.
///
/// Singular values are sorted descending (stable with respect to the sweep
/// order on ties) and every column of `u` has its first nonzero entry
/// positive, with `v` flipped to match, so repeated calls are bit-identical.
/// Left singular vectors belonging to zero singular values are completed to an
/// orthonormal set.
pub fn thin_svd(m: &Matrix) -> Result<SvdResult> {
    if let Some(pos) = m.data().iter().position(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!("SVD input entry {pos} is not finite")));
    }
    let mut svd = if m.rows() >= m.cols() {
        jacobi_tall(m)?
    } else {
        let t = jacobi_tall(&m.transpose())?;
        SvdResult {
            u: t.v,
            s: t.s,
            v: t.u,
        }
    };
    fix_signs(&mut svd);
    Ok(svd)
}

/// The `r` leading left singular vectors of `m`, as orthonormal columns.
pub fn leading_left_singular_vectors(m: &Matrix, r: usize) -> Result<Matrix> {
    let max = m.rows().min(m.cols());
    if r == 0 || r > max {
        return Err(Error::dim(format!(
            "requested {r} singular vectors from a {}x{} matrix (at most {max})",
            m.rows(),
            m.cols()
        )));
    }
    Ok(thin_svd(m)?.u.leading_columns(r))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn jacobi_tall(m: &Matrix) -> Result<SvdResult> {
    let (rows, n) = (m.rows(), m.cols());
    let norm = m.frobenius_norm();
    let floor = NULL_THRESHOLD * norm;
    let rel_tol = f64::EPSILON * rows as f64;

    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| m.column(j)).collect();
    let mut vcols: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();

    let mut converged = false;
    let mut off = 0.0_f64;
    for _ in 0..MAX_SWEEPS {
        off = 0.0;
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(&cols[p], &cols[p]);
                let beta = dot(&cols[q], &cols[q]);
                if alpha.sqrt() <= floor || beta.sqrt() <= floor {
                    continue;
                }
                let gamma = dot(&cols[p], &cols[q]);
                let ratio = gamma.abs() / (alpha * beta).sqrt();
                off = off.max(ratio);
                if ratio <= rel_tol {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut cols, p, q, c, s);
                rotate(&mut vcols, p, q, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Convergence {
            sweeps: MAX_SWEEPS,
            off_diagonal: off,
        });
    }

    let sigma: Vec<f64> = cols
        .iter()
        .map(|c| {
            let s = dot(c, c).sqrt();
            if s <= floor {
                0.0
            } else {
                s
            }
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]));

    let mut ucols: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut s_out = Vec::with_capacity(n);
    for &j in &order {
        if sigma[j] > 0.0 {
            ucols.push(cols[j].iter().map(|v| v / sigma[j]).collect());
        } else {
            ucols.push(complete_basis(&ucols, rows));
        }
        s_out.push(sigma[j]);
    }
    let u = Matrix::from_fn(rows, n, |i, j| ucols[j][i]);
    let v = Matrix::from_fn(n, n, |i, j| vcols[order[j]][i]);
    Ok(SvdResult { u, s: s_out, v })
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (lo, hi) = cols.split_at_mut(q);
    for (x, y) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
        let (a, b) = (*x, *y);
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}

/// A unit vector orthogonal to every column in `basis`, built from the
/// standard basis vector with the largest residual.
fn complete_basis(basis: &[Vec<f64>], rows: usize) -> Vec<f64> {
    let mut best: Option<(f64, Vec<f64>)> = None;
    for e in 0..rows {
        let mut cand = vec![0.0; rows];
        cand[e] = 1.0;
        for _ in 0..2 {
            for b in basis {
                let proj = dot(&cand, b);
                for (c, bv) in cand.iter_mut().zip(b) {
                    *c -= proj * bv;
                }
            }
        }
        let norm = dot(&cand, &cand).sqrt();
        if best.as_ref().is_none_or(|(n, _)| norm > *n) {
            best = Some((norm, cand));
        }
    }
    let (norm, cand) = best.expect("rows > 0");
    cand.into_iter().map(|v| v / norm).collect()
}

fn fix_signs(svd: &mut SvdResult) {
    for j in 0..svd.u.cols() {
        let first = (0..svd.u.rows())
            .map(|i| svd.u.get(i, j))
            .find(|&v| v != 0.0)
            .unwrap_or(0.0);
        if first < 0.0 {
            for i in 0..svd.u.rows() {
                let v = svd.u.get(i, j);
                svd.u.set(i, j, -v);
            }
            for i in 0..svd.v.rows() {
                let v = svd.v.get(i, j);
                svd.v.set(i, j, -v);
            }
        }
    }
}

/// Largest deviation of `q^T q` from the identity.
pub fn orthonormality_defect(q: &Matrix) -> f64 {
    let gram = q.transpose().matmul(q).expect("square product");
    let mut worst = 0.0_f64;
    for i in 0..gram.rows() {
        for j in 0..gram.cols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram.get(i, j) - target).abs());
        }
    }
    worst
}
