use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::formats::{put_u32, put_u64, write_file, Reader};
use crate::objective::Example;

pub const DATASET_MAGIC: &[u8; 4] = b"ATRD";

/// One input vector with its identity and binary attribute labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub x: Vec<f32>,
    pub label: usize,
    pub attributes: Vec<u8>,
}

impl Sample {
    pub fn to_example(&self) -> Example {
        Example {
            x: self.x.iter().map(|&v| f64::from(v)).collect(),
            label: self.label,
            attributes: self.attributes.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DatasetHeader {
    pub samples: usize,
    pub input_dim: usize,
    pub attributes: usize,
    pub classes: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    input_dim: usize,
    attributes: usize,
    classes: usize,
    samples: Vec<Sample>,
}

/// Gallery and query sample indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub gallery: Vec<usize>,
    pub query: Vec<usize>,
}

impl Dataset {
    pub fn new(input_dim: usize, attributes: usize, classes: usize, samples: Vec<Sample>) -> Result<Self> {
        if input_dim == 0 || attributes == 0 || classes == 0 {
            return Err(Error::Config("dataset dimensions must be positive".into()));
        }
        if samples.len() < classes {
            return Err(Error::Config(format!(
                "{} samples cannot cover {classes} classes",
                samples.len()
            )));
        }
        for (i, s) in samples.iter().enumerate() {
            if s.x.len() != input_dim || s.attributes.len() != attributes {
                return Err(Error::Config(format!("sample {i} has inconsistent lengths")));
            }
            if s.label >= classes {
                return Err(Error::Label {
                    label: s.label,
                    classes,
                });
            }
            if s.attributes.iter().any(|&l| l > 1) {
                return Err(Error::Config(format!("sample {i} has a non-binary attribute label")));
            }
            if s.x.iter().any(|v| !v.is_finite()) {
                return Err(Error::Numeric(format!("sample {i} has a non-finite input")));
            }
        }
        Ok(Dataset {
            input_dim,
            attributes,
            classes,
            samples,
        })
    }

    pub fn header(&self) -> DatasetHeader {
        DatasetHeader {
            samples: self.samples.len(),
            input_dim: self.input_dim,
            attributes: self.attributes,
            classes: self.classes,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn attribute_count(&self) -> usize {
        self.attributes
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Per class, the first `ceil(0.8 n)` samples in file order go to the
    /// gallery and the rest to the query set. Classes with a single sample
    /// contribute only to the gallery.
    pub fn gallery_query_split(&self) -> Split {
        let mut per_class: Vec<Vec<usize>> = vec![Vec::new(); self.classes];
        for (i, s) in self.samples.iter().enumerate() {
            per_class[s.label].push(i);
        }
        let mut gallery = Vec::new();
        let mut query = Vec::new();
        for idx in per_class {
            let n_gallery = (idx.len() * 4).div_ceil(5);
            gallery.extend_from_slice(&idx[..n_gallery]);
            query.extend_from_slice(&idx[n_gallery..]);
        }
        gallery.sort_unstable();
        query.sort_unstable();
        Split { gallery, query }
    }

    pub fn subset(&self, indices: &[usize]) -> Vec<Sample> {
        indices.iter().map(|&i| self.samples[i].clone()).collect()
    }

    /// The gallery part of [`Dataset::gallery_query_split`] as its own dataset.
    pub fn gallery(&self) -> Result<Dataset> {
        let split = self.gallery_query_split();
        Dataset::new(self.input_dim, self.attributes, self.classes, self.subset(&split.gallery))
    }
}

pub fn encode_dataset(ds: &Dataset) -> Vec<u8> {
    let mut out = Vec::with_capacity(40 + ds.len() * (4 + ds.attributes + 4 * ds.input_dim));
    out.extend_from_slice(DATASET_MAGIC);
    put_u32(&mut out, 1);
    for v in [ds.len(), ds.input_dim, ds.attributes, ds.classes] {
        put_u64(&mut out, v);
    }
    for s in &ds.samples {
        put_u32(&mut out, s.label as u32);
        out.extend_from_slice(&s.attributes);
        for v in &s.x {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn decode_dataset(bytes: &[u8]) -> Result<Dataset> {
    let mut r = Reader::new(bytes);
    r.magic(DATASET_MAGIC)?;
    r.version()?;
    let header_at = r.offset();
    let n = r.usize("N")?;
    let p = r.usize("P")?;
    let s = r.usize("s")?;
    let c = r.usize("C")?;
    let record = 4 + s + 4 * p;
    let remaining = bytes.len() as u64 - r.offset();
    let expected = (n as u64).checked_mul(record as u64);
    if expected != Some(remaining) {
        return Err(Error::format(
            r.offset(),
            format!(
                "payload length mismatch: expected {} bytes for {n} samples, found {remaining}",
                expected.map_or_else(|| "overflowing".to_string(), |e| e.to_string())
            ),
        ));
    }
    let mut samples = Vec::with_capacity(n);
    for i in 0..n {
        let at = r.offset();
        let label = r.u32()? as usize;
        let attributes = r.take(s, "attribute labels")?.to_vec();
        if attributes.iter().any(|&l| l > 1) {
            return Err(Error::format(at, format!("sample {i} has a non-binary attribute label")));
        }
        if label >= c {
            return Err(Error::format(at, format!("sample {i} label {label} >= {c} classes")));
        }
        let x = r.f32s(p, "input vector")?;
        samples.push(Sample { x, label, attributes });
    }
    r.finish()?;
    Dataset::new(p, s, c, samples).map_err(|e| Error::format(header_at, e.to_string()))
}

pub fn save_dataset(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), &encode_dataset(ds))
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    decode_dataset(&fs::read(path)?)
}
