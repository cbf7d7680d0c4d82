//! Dense order-3 tensors, row-major matrices and the multilinear primitives
//! (mode products, unfoldings, Kronecker products, slice norms).
//!
//! `Tensor3` stores its entries with the first index varying fastest, so entry
//! `(i, j, k)` of a `d1 x d2 x d3` tensor lives at `i + d1 * (j + d2 * k)`.
//! The mode-k unfolding places the remaining indices in the columns with the
//! lower mode varying fastest; under this convention
//!
//! ```text
//! unfold(G x1 A1 x2 A2 x3 A3, k) = A_k * unfold(G, k) * (A_hi ⊗ A_lo)^T
//! ```
//!
//! where `hi > lo` are the two modes other than `k`.

use std::fmt;

use crate::error::{Error, Result};

/// One of the three modes of an order-3 tensor.
///
/// Slices along `One` are the "top" slices `W[p, :, :]`, along `Two` the
/// "side" slices `W[:, q, :]` and along `Three` the "front" slices `W[:, :, s]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    One,
    Two,
    Three,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::One, Mode::Two, Mode::Three];

    /// Zero-based axis index.
    pub fn axis(self) -> usize {
        match self {
            Mode::One => 0,
            Mode::Two => 1,
            Mode::Three => 2,
        }
    }

    /// Parses the one-based mode number used in the literature (1, 2 or 3).
    pub fn from_number(k: usize) -> Result<Mode> {
        match k {
            1 => Ok(Mode::One),
            2 => Ok(Mode::Two),
            3 => Ok(Mode::Three),
            _ => Err(Error::Input(format!("mode index {k} is not in {{1, 2, 3}}"))),
        }
    }

    /// The two other modes, ascending.
    pub fn others(self) -> (Mode, Mode) {
        match self {
            Mode::One => (Mode::Two, Mode::Three),
            Mode::Two => (Mode::One, Mode::Three),
            Mode::Three => (Mode::One, Mode::Two),
        }
    }

    pub fn slice_name(self) -> &'static str {
        match self {
            Mode::One => "top",
            Mode::Two => "side",
            Mode::Three => "front",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "mode-{}", self.axis() + 1)
    }
}

fn check_finite(data: &[f64], what: &str) -> Result<()> {
    if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!("{what} entry {pos} is {}", data[pos])));
    }
    Ok(())
}

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::dim(format!("matrix shape {rows}x{cols} has a zero extent")));
        }
        if data.len() != rows * cols {
            return Err(Error::dim(format!(
                "matrix {rows}x{cols} needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        check_finite(&data, "matrix")?;
        Ok(Matrix { rows, cols, data })
    }

    pub(crate) fn from_vec_unchecked(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Matrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix::from_vec_unchecked(rows, cols, vec![0.0; rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix::from_vec_unchecked(rows, cols, data)
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::dim("ragged rows"));
        }
        Matrix::new(rows.len(), cols, rows.concat())
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Matrix::zeros(n, n);
        for (i, v) in values.iter().enumerate() {
            m.data[i * n + i] = *v;
        }
        m
    }

    /// Single-column matrix.
    pub fn column_vector(v: &[f64]) -> Self {
        Matrix::from_vec_unchecked(v.len(), 1, v.to_vec())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::dim(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = vec![0.0; self.rows * other.cols];
        for i in 0..self.rows {
            let orow = &mut out[i * other.cols..(i + 1) * other.cols];
            for (p, &a) in self.row(i).iter().enumerate() {
                for (o, &b) in orow.iter_mut().zip(other.row(p)) {
                    *o += a * b;
                }
            }
        }
        Ok(Matrix::from_vec_unchecked(self.rows, other.cols, out))
    }

    /// `self * v`.
    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(Error::dim(format!(
                "matrix has {} columns but vector has length {}",
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// `self^T * v`.
    pub fn matvec_transposed(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.rows {
            return Err(Error::dim(format!(
                "matrix has {} rows but vector has length {}",
                self.rows,
                v.len()
            )));
        }
        let mut out = vec![0.0; self.cols];
        for (i, &vi) in v.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += a * vi;
            }
        }
        Ok(out)
    }

    /// Keeps the listed columns, in the given order.
    pub fn select_columns(&self, keep: &[usize]) -> Matrix {
        Matrix::from_fn(self.rows, keep.len(), |i, j| self.get(i, keep[j]))
    }

    /// First `n` columns.
    pub fn leading_columns(&self, n: usize) -> Matrix {
        Matrix::from_fn(self.rows, n, |i, j| self.get(i, j))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::dim("matrix shapes differ"));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Matrix::from_vec_unchecked(self.rows, self.cols, data))
    }
}

/// Kronecker product: block `(i, j)` of the result is `a[i, j] * b`.
pub fn kronecker(a: &Matrix, b: &Matrix) -> Matrix {
    let (p, q) = (b.rows, b.cols);
    Matrix::from_fn(a.rows * p, a.cols * q, |r, c| {
        a.get(r / p, c / q) * b.get(r % p, c % q)
    })
}

/// Kronecker product of two vectors: entry `i * v.len() + j` is `u[i] * v[j]`.
pub fn kronecker_vec(u: &[f64], v: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(u.len() * v.len());
    for &a in u {
        out.extend(v.iter().map(|&b| a * b));
    }
    out
}

/// Dense order-3 tensor, first index fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    dims: [usize; 3],
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn new(dims: [usize; 3], data: Vec<f64>) -> Result<Self> {
        if dims.contains(&0) {
            return Err(Error::dim(format!("tensor dims {dims:?} contain a zero extent")));
        }
        let len = dims.iter().product::<usize>();
        if data.len() != len {
            return Err(Error::dim(format!(
                "tensor {dims:?} needs {len} entries, got {}",
                data.len()
            )));
        }
        check_finite(&data, "tensor")?;
        Ok(Tensor3 { dims, data })
    }

    pub(crate) fn from_vec_unchecked(dims: [usize; 3], data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), dims.iter().product::<usize>());
        Tensor3 { dims, data }
    }

    pub fn zeros(dims: [usize; 3]) -> Self {
        Tensor3::from_vec_unchecked(dims, vec![0.0; dims.iter().product()])
    }

    pub fn from_fn(dims: [usize; 3], mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(dims.iter().product());
        for k in 0..dims[2] {
            for j in 0..dims[1] {
                for i in 0..dims[0] {
                    data.push(f(i, j, k));
                }
            }
        }
        Tensor3::from_vec_unchecked(dims, data)
    }

    /// Builds a tensor from its frontal slices `t[:, :, k]`, each given as
    /// `d1` rows of `d2` entries.
    pub fn from_frontal_slices(slices: &[Vec<Vec<f64>>]) -> Result<Self> {
        let d3 = slices.len();
        let d1 = slices.first().map_or(0, Vec::len);
        let d2 = slices.first().and_then(|s| s.first()).map_or(0, Vec::len);
        if slices.iter().any(|s| s.len() != d1 || s.iter().any(|r| r.len() != d2)) {
            return Err(Error::dim("frontal slices have inconsistent shapes"));
        }
        let t = Tensor3::from_fn([d1, d2, d3], |i, j, k| slices[k][i][j]);
        check_finite(&t.data, "tensor")?;
        if t.dims.contains(&0) {
            return Err(Error::dim("empty tensor"));
        }
        Ok(t)
    }

    #[inline]
    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    #[inline]
    pub fn dim(&self, mode: Mode) -> usize {
        self.dims[mode.axis()]
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    fn offset(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.offset(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let o = self.offset(i, j, k);
        self.data[o] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Extents before and after `mode` in the linear layout, i.e. the length
    /// of contiguous runs below the mode and the number of such blocks above.
    fn split(&self, mode: Mode) -> (usize, usize, usize) {
        split_dims(self.dims, mode)
    }

    /// Mode-k product `t x_k m`: every mode-k fiber is multiplied by `m`.
    pub fn mode_product(&self, m: &Matrix, mode: Mode) -> Result<Tensor3> {
        let (inner, n, outer) = self.split(mode);
        if m.cols() != n {
            return Err(Error::dim(format!(
                "{mode} product: tensor extent is {n} but matrix has {} columns",
                m.cols()
            )));
        }
        let l_dim = m.rows();
        let mut dims = self.dims;
        dims[mode.axis()] = l_dim;
        let mut out = vec![0.0; inner * l_dim * outer];
        for o in 0..outer {
            for l in 0..l_dim {
                let dst = &mut out[inner * (l + l_dim * o)..inner * (l + l_dim * o + 1)];
                for (ik, &c) in m.row(l).iter().enumerate() {
                    let src = &self.data[inner * (ik + n * o)..inner * (ik + n * o + 1)];
                    for (d, &s) in dst.iter_mut().zip(src) {
                        *d += c * s;
                    }
                }
            }
        }
        Ok(Tensor3::from_vec_unchecked(dims, out))
    }

    /// Mode-k unfolding: a `dims[k] x (product of the other dims)` matrix whose
    /// columns are the mode-k fibers, lower remaining mode varying fastest.
    pub fn unfold(&self, mode: Mode) -> Matrix {
        let (inner, n, outer) = self.split(mode);
        let cols = inner * outer;
        let mut out = vec![0.0; n * cols];
        for o in 0..outer {
            for ik in 0..n {
                let src = &self.data[inner * (ik + n * o)..inner * (ik + n * o + 1)];
                let start = ik * cols + inner * o;
                out[start..start + inner].copy_from_slice(src);
            }
        }
        Matrix::from_vec_unchecked(n, cols, out)
    }

    /// Inverse of [`Tensor3::unfold`].
    pub fn fold(m: &Matrix, mode: Mode, dims: [usize; 3]) -> Result<Tensor3> {
        let (inner, n, outer) = split_dims(dims, mode);
        if m.rows() != n || m.cols() != inner * outer {
            return Err(Error::dim(format!(
                "cannot fold a {}x{} matrix along {mode} into {dims:?}",
                m.rows(),
                m.cols()
            )));
        }
        let cols = inner * outer;
        let mut data = vec![0.0; n * cols];
        for o in 0..outer {
            for ik in 0..n {
                let start = ik * cols + inner * o;
                data[inner * (ik + n * o)..inner * (ik + n * o + 1)]
                    .copy_from_slice(&m.data()[start..start + inner]);
            }
        }
        Ok(Tensor3::from_vec_unchecked(dims, data))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Frobenius norm of every slice along `mode`.
    pub fn slice_norms(&self, mode: Mode) -> Vec<f64> {
        let (inner, n, outer) = self.split(mode);
        let mut sq = vec![0.0; n];
        for o in 0..outer {
            for (ik, acc) in sq.iter_mut().enumerate() {
                let src = &self.data[inner * (ik + n * o)..inner * (ik + n * o + 1)];
                *acc += src.iter().map(|v| v * v).sum::<f64>();
            }
        }
        sq.into_iter().map(f64::sqrt).collect()
    }

    /// Multiplies slice `index` along `mode` by `factor` in place.
    pub fn scale_slice(&mut self, mode: Mode, index: usize, factor: f64) {
        let (inner, n, outer) = self.split(mode);
        for o in 0..outer {
            for v in &mut self.data[inner * (index + n * o)..inner * (index + n * o + 1)] {
                *v *= factor;
            }
        }
    }

    /// Sets every entry of slice `index` along `mode` to `+0.0`.
    pub fn zero_slice(&mut self, mode: Mode, index: usize) {
        let (inner, n, outer) = self.split(mode);
        for o in 0..outer {
            self.data[inner * (index + n * o)..inner * (index + n * o + 1)].fill(0.0);
        }
    }

    /// Keeps the listed slices along `mode`, in the given order.
    pub fn select_slices(&self, mode: Mode, keep: &[usize]) -> Tensor3 {
        let mut dims = self.dims;
        dims[mode.axis()] = keep.len();
        Tensor3::from_fn(dims, |i, j, k| {
            let mut idx = [i, j, k];
            idx[mode.axis()] = keep[idx[mode.axis()]];
            self.get(idx[0], idx[1], idx[2])
        })
    }

    pub fn sub(&self, other: &Tensor3) -> Result<Tensor3> {
        if self.dims != other.dims {
            return Err(Error::dim(format!(
                "tensor dims differ: {:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Tensor3::from_vec_unchecked(self.dims, data))
    }

    pub fn scaled(&self, factor: f64) -> Tensor3 {
        Tensor3::from_vec_unchecked(self.dims, self.data.iter().map(|v| v * factor).collect())
    }
}

fn split_dims(dims: [usize; 3], mode: Mode) -> (usize, usize, usize) {
    match mode {
        Mode::One => (1, dims[0], dims[1] * dims[2]),
        Mode::Two => (dims[0], dims[1], dims[2]),
        Mode::Three => (dims[0] * dims[1], dims[2], 1),
    }
}

/// Relative Frobenius distance `|a - b| / max(|b|, tiny)`.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let scale: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}
