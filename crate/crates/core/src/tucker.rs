//! Tucker decomposition: truncated HOSVD, HOOI refinement, reconstruction and
//! parameter accounting.
//!
//! Factor matrices are stored as `full dim x rank`, so the approximation reads
//! `W ≈ G x1 A1 x2 A2 x3 A3` and projections onto the factor subspaces use
//! the transposes.

use crate::error::{Error, Result};
use crate::linalg::leading_left_singular_vectors;
use crate::tensor::{Matrix, Mode, Tensor3};

pub const DEFAULT_HOOI_TOL: f64 = 1e-9;
pub const DEFAULT_HOOI_MAX_SWEEPS: usize = 50;

/// Core tensor plus one factor matrix per mode.
#[derive(Debug, Clone, PartialEq)]
pub struct TuckerFactors {
    pub core: Tensor3,
    pub factors: [Matrix; 3],
}

impl TuckerFactors {
    /// Validates shapes: factor `k` must be `dims[k] x core.dims()[k]`.
    pub fn new(core: Tensor3, factors: [Matrix; 3]) -> Result<Self> {
        for mode in Mode::ALL {
            let f = &factors[mode.axis()];
            if f.cols() != core.dim(mode) {
                return Err(Error::dim(format!(
                    "{mode} factor has {} columns but the core extent is {}",
                    f.cols(),
                    core.dim(mode)
                )));
            }
            if f.cols() > f.rows() {
                return Err(Error::dim(format!(
                    "{mode} rank {} exceeds dimension {}",
                    f.cols(),
                    f.rows()
                )));
            }
        }
        Ok(TuckerFactors { core, factors })
    }

    pub fn ranks(&self) -> [usize; 3] {
        self.core.dims()
    }

    pub fn dims(&self) -> [usize; 3] {
        [
            self.factors[0].rows(),
            self.factors[1].rows(),
            self.factors[2].rows(),
        ]
    }

    pub fn factor(&self, mode: Mode) -> &Matrix {
        &self.factors[mode.axis()]
    }

    pub fn parameter_count(&self) -> usize {
        parameter_count(self.dims(), self.ranks()).factored
    }
}

fn validate_ranks(dims: [usize; 3], ranks: [usize; 3]) -> Result<()> {
    for mode in Mode::ALL {
        let (d, r) = (dims[mode.axis()], ranks[mode.axis()]);
        if r == 0 {
            return Err(Error::dim(format!("{mode} rank must be positive")));
        }
        if r > d {
            return Err(Error::dim(format!("{mode} rank {r} exceeds dimension {d}")));
        }
    }
    Ok(())
}

/// Orthonormal basis for the `r` leading left singular vectors of `m`, padding
/// with zero columns first when `m` has fewer than `r` columns.
fn left_basis(m: &Matrix, r: usize) -> Result<Matrix> {
    if m.cols() >= r {
        return leading_left_singular_vectors(m, r);
    }
    let padded = Matrix::from_fn(m.rows(), r, |i, j| if j < m.cols() { m.get(i, j) } else { 0.0 });
    leading_left_singular_vectors(&padded, r)
}

fn project_all(w: &Tensor3, factors: &[Matrix; 3]) -> Result<Tensor3> {
    w.mode_product(&factors[0].transpose(), Mode::One)?
        .mode_product(&factors[1].transpose(), Mode::Two)?
        .mode_product(&factors[2].transpose(), Mode::Three)
}

/// Truncated higher-order SVD.
pub fn hosvd(w: &Tensor3, ranks: [usize; 3]) -> Result<TuckerFactors> {
    validate_ranks(w.dims(), ranks)?;
    let factors = [
        left_basis(&w.unfold(Mode::One), ranks[0])?,
        left_basis(&w.unfold(Mode::Two), ranks[1])?,
        left_basis(&w.unfold(Mode::Three), ranks[2])?,
    ];
    let core = project_all(w, &factors)?;
    Ok(TuckerFactors { core, factors })
}

/// Result of [`hooi`]: the best factors found plus the reconstruction error
/// trace. `errors[0]` is the HOSVD initialization, `errors[s]` the error after
/// sweep `s`.
#[derive(Debug, Clone)]
pub struct HooiResult {
    pub factors: TuckerFactors,
    pub errors: Vec<f64>,
    pub sweeps: usize,
    /// Reconstruction error of `factors`.
    pub final_error: f64,
}

/// Higher-order orthogonal iteration, initialized from [`hosvd`].
///
/// Each sweep updates factor `k` from the leading left singular vectors of the
/// mode-k unfolding of `w` projected onto the other two factor subspaces.
/// Iteration stops once the relative error decrease drops below `tol` or after
/// `max_sweeps` sweeps; the returned factors are never worse than the previous
/// iterate.
pub fn hooi(w: &Tensor3, ranks: [usize; 3], max_sweeps: usize, tol: f64) -> Result<HooiResult> {
    if max_sweeps == 0 {
        return Err(Error::Input("HOOI needs at least one sweep".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::Input(format!("HOOI tolerance must be positive, got {tol}")));
    }
    let mut best = hosvd(w, ranks)?;
    let mut best_err = reconstruction_error(w, &best)?;
    let mut errors = vec![best_err];
    let floor = 1e-14 * w.frobenius_norm();
    let mut sweeps = 0;

    while sweeps < max_sweeps {
        sweeps += 1;
        let mut factors = best.factors.clone();
        for mode in Mode::ALL {
            let mut y = w.clone();
            for other in Mode::ALL.into_iter().filter(|&m| m != mode) {
                y = y.mode_product(&factors[other.axis()].transpose(), other)?;
            }
            factors[mode.axis()] = left_basis(&y.unfold(mode), ranks[mode.axis()])?;
        }
        let core = project_all(w, &factors)?;
        let candidate = TuckerFactors { core, factors };
        let err = reconstruction_error(w, &candidate)?;
        let prev = best_err;
        errors.push(err);
        if err > prev {
            // roundoff-level regression: keep the previous iterate
            break;
        }
        best = candidate;
        best_err = err;
        if err <= floor || (prev - err) / prev < tol {
            break;
        }
    }
    Ok(HooiResult {
        factors: best,
        errors,
        sweeps,
        final_error: best_err,
    })
}

/// `G x1 A1 x2 A2 x3 A3`.
pub fn reconstruct(f: &TuckerFactors) -> Result<Tensor3> {
    f.core
        .mode_product(&f.factors[0], Mode::One)?
        .mode_product(&f.factors[1], Mode::Two)?
        .mode_product(&f.factors[2], Mode::Three)
}

/// Frobenius norm of `w - reconstruct(f)`.
pub fn reconstruction_error(w: &Tensor3, f: &TuckerFactors) -> Result<f64> {
    if f.dims() != w.dims() {
        return Err(Error::dim(format!(
            "factors describe {:?} but the tensor is {:?}",
            f.dims(),
            w.dims()
        )));
    }
    Ok(w.sub(&reconstruct(f)?)?.frobenius_norm())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParameterCount {
    /// `rd*rc*ra + rd*D + rc*C + ra*A`
    pub factored: usize,
    /// `D*C*A`
    pub full: usize,
}

pub fn parameter_count(dims: [usize; 3], ranks: [usize; 3]) -> ParameterCount {
    let [d, c, a] = dims;
    let [rd, rc, ra] = ranks;
    ParameterCount {
        factored: rd * rc * ra + rd * d + rc * c + ra * a,
        full: d * c * a,
    }
}
