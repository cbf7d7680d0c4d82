//! The identity/attribute fusion classifier.
//!
//! With a full weight tensor `W` (D x C x A) the logits are
//! `y_c = sum_{d,a} W[d, c, a] f[d] g[a]`. With Tucker factors the same map is
//! evaluated as `A2 * unfold(G, 2) * (A3^T g ⊗ A1^T f)`: the Kronecker product
//! of the two projected features is the fused feature, `A2 * unfold(G, 2)` is
//! the classifier.

use crate::error::{Error, Result};
use crate::tensor::{kronecker_vec, Matrix, Mode, Tensor3};
use crate::tucker::TuckerFactors;

/// Linear identity/attribute encoders and the per-attribute logistic heads.
#[derive(Debug, Clone, PartialEq)]
pub struct Encoders {
    /// D x P
    pub identity: Matrix,
    /// A x P
    pub attribute: Matrix,
    /// s x A
    pub attr_heads: Matrix,
    /// length s
    pub attr_bias: Vec<f64>,
}

impl Encoders {
    pub fn new(identity: Matrix, attribute: Matrix, attr_heads: Matrix, attr_bias: Vec<f64>) -> Result<Self> {
        if identity.cols() != attribute.cols() {
            return Err(Error::dim(format!(
                "identity encoder reads {} inputs, attribute encoder {}",
                identity.cols(),
                attribute.cols()
            )));
        }
        if attr_heads.cols() != attribute.rows() {
            return Err(Error::dim(format!(
                "attribute heads read {} features, attribute encoder produces {}",
                attr_heads.cols(),
                attribute.rows()
            )));
        }
        if attr_bias.len() != attr_heads.rows() {
            return Err(Error::dim("attribute bias length differs from head count"));
        }
        if attr_bias.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("attribute bias".into()));
        }
        Ok(Encoders {
            identity,
            attribute,
            attr_heads,
            attr_bias,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.identity.cols()
    }

    pub fn identity_dim(&self) -> usize {
        self.identity.rows()
    }

    pub fn attribute_dim(&self) -> usize {
        self.attribute.rows()
    }

    pub fn attribute_count(&self) -> usize {
        self.attr_heads.rows()
    }
}

/// Identity feature `f` and attribute feature `g` of one input.
#[derive(Debug, Clone, PartialEq)]
pub struct FeaturePair {
    pub identity: Vec<f64>,
    pub attribute: Vec<f64>,
}

/// Fusion weights in either parameterization.
#[derive(Debug, Clone, PartialEq)]
pub enum Weights {
    Full(Tensor3),
    Factored(TuckerFactors),
}

impl Weights {
    /// (D, C, A)
    pub fn dims(&self) -> [usize; 3] {
        match self {
            Weights::Full(w) => w.dims(),
            Weights::Factored(f) => f.dims(),
        }
    }

    /// The tensor the group-lasso penalty acts on: the full tensor or the core.
    pub fn sparse_tensor(&self) -> &Tensor3 {
        match self {
            Weights::Full(w) => w,
            Weights::Factored(f) => &f.core,
        }
    }

    pub fn sparse_tensor_mut(&mut self) -> &mut Tensor3 {
        match self {
            Weights::Full(w) => w,
            Weights::Factored(f) => &mut f.core,
        }
    }

    pub fn is_factored(&self) -> bool {
        matches!(self, Weights::Factored(_))
    }
}

/// Named parameter blocks of a model, in a fixed order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParamGroup {
    /// Core tensor (factored) or full weight tensor.
    Core,
    A1,
    A2,
    A3,
    IdentityEncoder,
    AttributeEncoder,
    AttrHeads,
    AttrBias,
}

impl ParamGroup {
    pub const ALL: [ParamGroup; 8] = [
        ParamGroup::Core,
        ParamGroup::A1,
        ParamGroup::A2,
        ParamGroup::A3,
        ParamGroup::IdentityEncoder,
        ParamGroup::AttributeEncoder,
        ParamGroup::AttrHeads,
        ParamGroup::AttrBias,
    ];
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub encoders: Encoders,
    pub weights: Weights,
}

impl ModelParams {
    pub fn new(encoders: Encoders, weights: Weights) -> Result<Self> {
        let [d, _, a] = weights.dims();
        if d != encoders.identity_dim() || a != encoders.attribute_dim() {
            return Err(Error::dim(format!(
                "weights expect D={d}, A={a} but encoders produce D={}, A={}",
                encoders.identity_dim(),
                encoders.attribute_dim()
            )));
        }
        Ok(ModelParams { encoders, weights })
    }

    /// (D, C, A)
    pub fn dims(&self) -> [usize; 3] {
        self.weights.dims()
    }

    pub fn classes(&self) -> usize {
        self.dims()[1]
    }

    /// Same shapes, all entries zero.
    pub fn zeros_like(&self) -> ModelParams {
        let mut z = self.clone();
        for g in z.groups() {
            z.group_mut(g).expect("present").fill(0.0);
        }
        z
    }

    /// Groups present in this parameterization.
    pub fn groups(&self) -> Vec<ParamGroup> {
        ParamGroup::ALL
            .into_iter()
            .filter(|g| self.group(*g).is_some())
            .collect()
    }

    pub fn group(&self, g: ParamGroup) -> Option<&[f64]> {
        let e = &self.encoders;
        match (g, &self.weights) {
            (ParamGroup::Core, w) => Some(w.sparse_tensor().data()),
            (ParamGroup::A1, Weights::Factored(f)) => Some(f.factors[0].data()),
            (ParamGroup::A2, Weights::Factored(f)) => Some(f.factors[1].data()),
            (ParamGroup::A3, Weights::Factored(f)) => Some(f.factors[2].data()),
            (ParamGroup::A1 | ParamGroup::A2 | ParamGroup::A3, Weights::Full(_)) => None,
            (ParamGroup::IdentityEncoder, _) => Some(e.identity.data()),
            (ParamGroup::AttributeEncoder, _) => Some(e.attribute.data()),
            (ParamGroup::AttrHeads, _) => Some(e.attr_heads.data()),
            (ParamGroup::AttrBias, _) => Some(&e.attr_bias),
        }
    }

    pub fn group_mut(&mut self, g: ParamGroup) -> Option<&mut [f64]> {
        let e = &mut self.encoders;
        match (g, &mut self.weights) {
            (ParamGroup::Core, w) => Some(w.sparse_tensor_mut().data_mut()),
            (ParamGroup::A1, Weights::Factored(f)) => Some(f.factors[0].data_mut()),
            (ParamGroup::A2, Weights::Factored(f)) => Some(f.factors[1].data_mut()),
            (ParamGroup::A3, Weights::Factored(f)) => Some(f.factors[2].data_mut()),
            (ParamGroup::A1 | ParamGroup::A2 | ParamGroup::A3, Weights::Full(_)) => None,
            (ParamGroup::IdentityEncoder, _) => Some(e.identity.data_mut()),
            (ParamGroup::AttributeEncoder, _) => Some(e.attribute.data_mut()),
            (ParamGroup::AttrHeads, _) => Some(e.attr_heads.data_mut()),
            (ParamGroup::AttrBias, _) => Some(&mut e.attr_bias),
        }
    }

    /// Total number of scalars in the model.
    pub fn parameter_total(&self) -> usize {
        self.groups().iter().map(|g| self.group(*g).map_or(0, <[f64]>::len)).sum()
    }

    pub fn encode(&self, x: &[f64]) -> Result<FeaturePair> {
        encode(x, &self.encoders)
    }

    pub fn logits(&self, p: &FeaturePair) -> Result<Vec<f64>> {
        match &self.weights {
            Weights::Full(w) => forward_full(w, p),
            Weights::Factored(f) => forward_decomposed(f, p),
        }
    }

    /// The retrieval feature. Factored models use `A3^T g ⊗ A1^T f`; the full
    /// tensor has no fusion projections, so its fused feature is `g ⊗ f`.
    pub fn fused(&self, p: &FeaturePair) -> Result<Vec<f64>> {
        match &self.weights {
            Weights::Full(w) => {
                check_pair(w.dims(), p)?;
                Ok(kronecker_vec(&p.attribute, &p.identity))
            }
            Weights::Factored(f) => fused_feature(&f.factors[0], &f.factors[2], p),
        }
    }

    pub fn predict_attributes(&self, p: &FeaturePair) -> Result<Vec<f64>> {
        predict_attributes(p, &self.encoders)
    }

    pub fn predict_class(&self, x: &[f64]) -> Result<usize> {
        let logits = self.logits(&self.encode(x)?)?;
        Ok(argmax(&logits))
    }
}

pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

fn check_pair(dims: [usize; 3], p: &FeaturePair) -> Result<()> {
    if p.identity.len() != dims[0] || p.attribute.len() != dims[2] {
        return Err(Error::dim(format!(
            "feature lengths ({}, {}) do not match D={} and A={}",
            p.identity.len(),
            p.attribute.len(),
            dims[0],
            dims[2]
        )));
    }
    Ok(())
}

/// `f = W_i x`, `g = W_a x`.
pub fn encode(x: &[f64], e: &Encoders) -> Result<FeaturePair> {
    Ok(FeaturePair {
        identity: e.identity.matvec(x)?,
        attribute: e.attribute.matvec(x)?,
    })
}

/// Logits of the full-tensor model: `W x1 f x3 g`.
pub fn forward_full(w: &Tensor3, p: &FeaturePair) -> Result<Vec<f64>> {
    check_pair(w.dims(), p)?;
    let [d, c, a] = w.dims();
    let data = w.data();
    let mut out = vec![0.0; c];
    for (ai, &ga) in p.attribute.iter().enumerate() {
        for (ci, o) in out.iter_mut().enumerate() {
            let fiber = &data[d * (ci + c * ai)..d * (ci + c * ai + 1)];
            let s: f64 = fiber.iter().zip(&p.identity).map(|(w, f)| w * f).sum();
            *o += s * ga;
        }
    }
    debug_assert_eq!(a, p.attribute.len());
    Ok(out)
}

/// Fused feature `A3^T g ⊗ A1^T f`, of length `r_a * r_d`.
pub fn fused_feature(a1: &Matrix, a3: &Matrix, p: &FeaturePair) -> Result<Vec<f64>> {
    let u = a1.matvec_transposed(&p.identity)?;
    let v = a3.matvec_transposed(&p.attribute)?;
    Ok(kronecker_vec(&v, &u))
}

/// Logits of the factored model: `A2 * unfold(G, 2) * fused`.
pub fn forward_decomposed(tf: &TuckerFactors, p: &FeaturePair) -> Result<Vec<f64>> {
    check_pair(tf.dims(), p)?;
    let z = fused_feature(&tf.factors[0], &tf.factors[2], p)?;
    let h = tf.core.unfold(Mode::Two).matvec(&z)?;
    tf.factors[1].matvec(&h)
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Per-attribute presence probabilities `sigmoid(H g + b)`.
pub fn predict_attributes(p: &FeaturePair, e: &Encoders) -> Result<Vec<f64>> {
    let z = e.attr_heads.matvec(&p.attribute)?;
    Ok(z.iter().zip(&e.attr_bias).map(|(z, b)| sigmoid(z + b)).collect())
}
