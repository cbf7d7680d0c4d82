//! Little-endian binary formats: `TNS3` tensors, `TUCK` factor files and
//! `TFCK` model checkpoints.
//!
//! Matrices are written as `rows u64, cols u64` followed by row-major `f64`
//! payload; tensors as `d1 d2 d3 u64` followed by the first-index-fastest
//! payload; vectors as `len u64` plus payload.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fusion::{Encoders, ModelParams, Weights};
use crate::tensor::{Matrix, Tensor3};
use crate::tucker::TuckerFactors;

pub const TENSOR_MAGIC: &[u8; 4] = b"TNS3";
pub const FACTORS_MAGIC: &[u8; 4] = b"TUCK";
pub const CHECKPOINT_MAGIC: &[u8; 4] = b"TFCK";
pub const FORMAT_VERSION: u32 = 1;

/// Cursor over an in-memory file that reports byte offsets on failure.
pub(crate) struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub(crate) fn new(buf: &'a [u8]) -> Self {
        Reader { buf, pos: 0 }
    }

    pub(crate) fn offset(&self) -> u64 {
        self.pos as u64
    }

    pub(crate) fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let remaining = self.buf.len() - self.pos;
        if remaining < n {
            return Err(Error::format(
                self.offset(),
                format!("truncated {what}: expected {n} bytes, found {remaining}"),
            ));
        }
        let out = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    pub(crate) fn magic(&mut self, expected: &[u8; 4]) -> Result<()> {
        let got = self.take(4, "magic")?;
        if got != expected {
            return Err(Error::format(
                0,
                format!(
                    "bad magic {:?}, expected {:?}",
                    String::from_utf8_lossy(got),
                    String::from_utf8_lossy(expected)
                ),
            ));
        }
        Ok(())
    }

    pub(crate) fn version(&mut self) -> Result<()> {
        let at = self.offset();
        let v = self.u32()?;
        if v != FORMAT_VERSION {
            return Err(Error::format(at, format!("unsupported version {v}")));
        }
        Ok(())
    }

    pub(crate) fn u32(&mut self) -> Result<u32> {
        let b = self.take(4, "u32")?;
        Ok(u32::from_le_bytes(b.try_into().expect("4 bytes")))
    }

    pub(crate) fn u64(&mut self) -> Result<u64> {
        let b = self.take(8, "u64")?;
        Ok(u64::from_le_bytes(b.try_into().expect("8 bytes")))
    }

    pub(crate) fn usize(&mut self, what: &str) -> Result<usize> {
        let at = self.offset();
        let v = self.u64()?;
        usize::try_from(v).map_err(|_| Error::format(at, format!("{what} {v} does not fit in memory")))
    }

    pub(crate) fn f64s(&mut self, n: usize, what: &str) -> Result<Vec<f64>> {
        let len = n
            .checked_mul(8)
            .ok_or_else(|| Error::format(self.offset(), format!("{what} length overflows")))?;
        let b = self.take(len, what)?;
        Ok(b.chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }

    pub(crate) fn f32s(&mut self, n: usize, what: &str) -> Result<Vec<f32>> {
        let len = n
            .checked_mul(4)
            .ok_or_else(|| Error::format(self.offset(), format!("{what} length overflows")))?;
        let b = self.take(len, what)?;
        Ok(b.chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect())
    }

    pub(crate) fn finish(&self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(Error::format(
                self.offset(),
                format!("{} trailing bytes", self.buf.len() - self.pos),
            ));
        }
        Ok(())
    }

    fn matrix(&mut self, what: &str) -> Result<Matrix> {
        let rows = self.usize("rows")?;
        let cols = self.usize("cols")?;
        let at = self.offset();
        let n = rows
            .checked_mul(cols)
            .ok_or_else(|| Error::format(at, "matrix size overflows"))?;
        let data = self.f64s(n, what)?;
        Matrix::new(rows, cols, data).map_err(|e| Error::format(at, format!("{what}: {e}")))
    }

    fn vector(&mut self, what: &str) -> Result<Vec<f64>> {
        let len = self.usize("length")?;
        let at = self.offset();
        let v = self.f64s(len, what)?;
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::format(at, format!("{what} has non-finite entries")));
        }
        Ok(v)
    }

    fn tensor(&mut self, what: &str) -> Result<Tensor3> {
        let dims = [self.usize("d1")?, self.usize("d2")?, self.usize("d3")?];
        let at = self.offset();
        let n = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::format(at, "tensor size overflows"))?;
        let data = self.f64s(n, what)?;
        Tensor3::new(dims, data).map_err(|e| Error::format(at, format!("{what}: {e}")))
    }

    fn tucker(&mut self) -> Result<TuckerFactors> {
        let core = self.tensor("core tensor")?;
        let a1 = self.matrix("mode-1 factor")?;
        let a2 = self.matrix("mode-2 factor")?;
        let a3 = self.matrix("mode-3 factor")?;
        let at = self.offset();
        TuckerFactors::new(core, [a1, a2, a3]).map_err(|e| Error::format(at, e.to_string()))
    }
}

pub(crate) fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

pub(crate) fn put_u64(out: &mut Vec<u8>, v: usize) {
    out.extend_from_slice(&(v as u64).to_le_bytes());
}

fn put_f64s(out: &mut Vec<u8>, data: &[f64]) {
    for v in data {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

fn put_matrix(out: &mut Vec<u8>, m: &Matrix) {
    put_u64(out, m.rows());
    put_u64(out, m.cols());
    put_f64s(out, m.data());
}

fn put_vector(out: &mut Vec<u8>, v: &[f64]) {
    put_u64(out, v.len());
    put_f64s(out, v);
}

fn put_tensor(out: &mut Vec<u8>, t: &Tensor3) {
    for d in t.dims() {
        put_u64(out, d);
    }
    put_f64s(out, t.data());
}

fn put_tucker(out: &mut Vec<u8>, f: &TuckerFactors) {
    put_tensor(out, &f.core);
    for a in &f.factors {
        put_matrix(out, a);
    }
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(bytes)?;
    Ok(())
}

pub fn encode_tensor(t: &Tensor3) -> Vec<u8> {
    let mut out = Vec::with_capacity(32 + 8 * t.len());
    out.extend_from_slice(TENSOR_MAGIC);
    put_u32(&mut out, FORMAT_VERSION);
    put_tensor(&mut out, t);
    out
}

pub fn decode_tensor(bytes: &[u8]) -> Result<Tensor3> {
    let mut r = Reader::new(bytes);
    r.magic(TENSOR_MAGIC)?;
    r.version()?;
    let t = r.tensor("tensor payload")?;
    r.finish()?;
    Ok(t)
}

pub fn save_tensor(t: &Tensor3, path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), &encode_tensor(t))
}

pub fn load_tensor(path: impl AsRef<Path>) -> Result<Tensor3> {
    decode_tensor(&fs::read(path)?)
}

pub fn encode_factors(f: &TuckerFactors) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(FACTORS_MAGIC);
    put_u32(&mut out, FORMAT_VERSION);
    put_tucker(&mut out, f);
    out
}

pub fn decode_factors(bytes: &[u8]) -> Result<TuckerFactors> {
    let mut r = Reader::new(bytes);
    r.magic(FACTORS_MAGIC)?;
    r.version()?;
    let f = r.tucker()?;
    r.finish()?;
    Ok(f)
}

pub fn save_factors(f: &TuckerFactors, path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), &encode_factors(f))
}

pub fn load_factors(path: impl AsRef<Path>) -> Result<TuckerFactors> {
    decode_factors(&fs::read(path)?)
}

const FLAG_FACTORED: u32 = 1;

pub fn encode_checkpoint(model: &ModelParams) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(CHECKPOINT_MAGIC);
    put_u32(&mut out, FORMAT_VERSION);
    let e = &model.encoders;
    let [d, c, a] = model.dims();
    let (flags, ranks) = match &model.weights {
        Weights::Full(_) => (0, [0; 3]),
        Weights::Factored(f) => (FLAG_FACTORED, f.ranks()),
    };
    put_u32(&mut out, flags);
    for v in [d, c, a, e.input_dim(), e.attribute_count()] {
        put_u64(&mut out, v);
    }
    for r in ranks {
        put_u64(&mut out, r);
    }
    put_matrix(&mut out, &e.identity);
    put_matrix(&mut out, &e.attribute);
    put_matrix(&mut out, &e.attr_heads);
    put_vector(&mut out, &e.attr_bias);
    match &model.weights {
        Weights::Full(w) => put_tensor(&mut out, w),
        Weights::Factored(f) => put_tucker(&mut out, f),
    }
    out
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<ModelParams> {
    let mut r = Reader::new(bytes);
    r.magic(CHECKPOINT_MAGIC)?;
    r.version()?;
    let flags_at = r.offset();
    let flags = r.u32()?;
    if flags & !FLAG_FACTORED != 0 {
        return Err(Error::format(flags_at, format!("unknown flags {flags:#x}")));
    }
    let header_at = r.offset();
    let mut header = [0usize; 5];
    for (h, name) in header.iter_mut().zip(["D", "C", "A", "P", "s"]) {
        *h = r.usize(name)?;
    }
    let ranks = [r.usize("rank")?, r.usize("rank")?, r.usize("rank")?];
    let [d, c, a, p, s] = header;

    let identity = r.matrix("identity encoder")?;
    let attribute = r.matrix("attribute encoder")?;
    let heads = r.matrix("attribute heads")?;
    let bias = r.vector("attribute bias")?;
    let weights = if flags & FLAG_FACTORED != 0 {
        let f = r.tucker()?;
        if f.ranks() != ranks {
            return Err(Error::format(header_at, "header ranks disagree with the factor payload"));
        }
        Weights::Factored(f)
    } else {
        if ranks != [0; 3] {
            return Err(Error::format(header_at, "full checkpoint carries nonzero ranks"));
        }
        Weights::Full(r.tensor("weight tensor")?)
    };
    r.finish()?;

    let encoders = Encoders::new(identity, attribute, heads, bias)
        .map_err(|e| Error::format(header_at, e.to_string()))?;
    let model = ModelParams::new(encoders, weights).map_err(|e| Error::format(header_at, e.to_string()))?;
    let e = &model.encoders;
    if model.dims() != [d, c, a] || e.input_dim() != p || e.attribute_count() != s {
        return Err(Error::format(header_at, "header dimensions disagree with the payload"));
    }
    Ok(model)
}

pub fn save_checkpoint(model: &ModelParams, path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), &encode_checkpoint(model))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<ModelParams> {
    decode_checkpoint(&fs::read(path)?)
}
