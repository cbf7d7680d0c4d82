//! The multi-task training objective and its analytic gradients.
//!
//! ```text
//! L = classification + λ1 * contrastive + λ2 * group_lasso(core) + λ3 * attribute
//! ```
//!
//! The three smooth terms are differentiated here; the group-lasso term is
//! handled by [`prox_group_lasso`], which produces exact zero slices.

use crate::error::{Error, Result};
use crate::fusion::{ModelParams, Weights};
use crate::tensor::{Mode, Tensor3};

pub const PROB_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    /// contrastive
    pub lambda1: f64,
    /// group lasso
    pub lambda2: f64,
    /// attribute prediction
    pub lambda3: f64,
    pub margin: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights {
            lambda1: 0.01,
            lambda2: 1.0,
            lambda3: 1.0,
            margin: 1.0,
        }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        let all = [self.lambda1, self.lambda2, self.lambda3, self.margin];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("loss weights must be finite".into()));
        }
        if self.lambda1 < 0.0 || self.lambda2 < 0.0 || self.lambda3 < 0.0 {
            return Err(Error::Config("loss weights must be nonnegative".into()));
        }
        if self.margin <= 0.0 {
            return Err(Error::Config(format!("margin must be positive, got {}", self.margin)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LossBreakdown {
    pub classification: f64,
    pub contrastive: f64,
    pub ssl: f64,
    pub attribute: f64,
    pub total: f64,
}

/// One training example with its input already in 64-bit.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub x: Vec<f64>,
    pub label: usize,
    pub attributes: Vec<u8>,
}

/// Two batch positions and whether they share an identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pair {
    pub first: usize,
    pub second: usize,
    pub genuine: bool,
}

#[derive(Debug, Clone)]
pub struct Batch<'a> {
    pub examples: Vec<&'a Example>,
    /// Indices into `examples`.
    pub pairs: Vec<Pair>,
}

/// Negative log softmax probability of `label`.
pub fn cross_entropy(logits: &[f64], label: usize) -> Result<f64> {
    if label >= logits.len() {
        return Err(Error::Label {
            label,
            classes: logits.len(),
        });
    }
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
    Ok((lse - logits[label]).max(0.0))
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Genuine pairs cost `d^2 / 2`; imposter pairs cost `max(0, m - d)^2 / 2`.
pub fn contrastive(d: f64, genuine: bool, margin: f64) -> Result<f64> {
    if d.is_nan() {
        return Err(Error::Numeric("pair distance is NaN".into()));
    }
    if d < 0.0 {
        return Err(Error::Input(format!("distance must be nonnegative, got {d}")));
    }
    Ok(if genuine {
        0.5 * d * d
    } else {
        0.5 * (margin - d).max(0.0).powi(2)
    })
}

pub fn pair_distance(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::dim(format!(
            "feature lengths differ: {} vs {}",
            u.len(),
            v.len()
        )));
    }
    Ok(u.iter().zip(v).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
}

/// Sum of the slice norms over all three modes.
pub fn group_lasso(t: &Tensor3) -> f64 {
    Mode::ALL.iter().map(|&m| t.slice_norms(m).iter().sum::<f64>()).sum()
}

/// Mean binary cross-entropy over attributes.
pub fn attribute_loss(probs: &[f64], labels: &[u8]) -> Result<f64> {
    if probs.len() != labels.len() {
        return Err(Error::dim(format!(
            "{} attribute probabilities for {} labels",
            probs.len(),
            labels.len()
        )));
    }
    if probs.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = probs
        .iter()
        .zip(labels)
        .map(|(&p, &l)| {
            let p = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
            if l != 0 {
                -p.ln()
            } else {
                -(1.0 - p).ln()
            }
        })
        .sum();
    Ok(sum / probs.len() as f64)
}

/// Soft-thresholds the slices of `t` mode by mode (top, side, front): each
/// slice is scaled by `max(0, 1 - step * lambda2 / |slice|)`.
pub fn prox_group_lasso(t: &Tensor3, step: f64, lambda2: f64) -> Tensor3 {
    let mut out = t.clone();
    prox_group_lasso_in_place(&mut out, step, lambda2);
    out
}

pub fn prox_group_lasso_in_place(t: &mut Tensor3, step: f64, lambda2: f64) {
    let threshold = step * lambda2;
    if threshold <= 0.0 {
        return;
    }
    for mode in Mode::ALL {
        for (i, norm) in t.slice_norms(mode).into_iter().enumerate() {
            if norm <= threshold {
                t.zero_slice(mode, i);
            } else {
                t.scale_slice(mode, i, 1.0 - threshold / norm);
            }
        }
    }
}

/// Intermediate values of one forward pass.
struct Forward {
    f: Vec<f64>,
    g: Vec<f64>,
    /// `A1^T f` and `A3^T g` (factored only)
    u: Vec<f64>,
    v: Vec<f64>,
    /// `unfold(G, 2) * fused` (factored only)
    h: Vec<f64>,
    fused: Vec<f64>,
    logits: Vec<f64>,
    attr_probs: Vec<f64>,
}

fn forward(model: &ModelParams, x: &[f64]) -> Result<Forward> {
    let pair = model.encode(x)?;
    let attr_probs = model.predict_attributes(&pair)?;
    let (f, g) = (pair.identity, pair.attribute);
    match &model.weights {
        Weights::Full(w) => {
            let [d, c, a] = w.dims();
            let wd = w.data();
            let mut logits = vec![0.0; c];
            for ai in 0..a {
                for (ci, out) in logits.iter_mut().enumerate() {
                    let fiber = &wd[d * (ci + c * ai)..d * (ci + c * ai + 1)];
                    *out += g[ai] * fiber.iter().zip(&f).map(|(w, f)| w * f).sum::<f64>();
                }
            }
            let fused = crate::tensor::kronecker_vec(&g, &f);
            Ok(Forward {
                f,
                g,
                u: Vec::new(),
                v: Vec::new(),
                h: Vec::new(),
                fused,
                logits,
                attr_probs,
            })
        }
        Weights::Factored(tf) => {
            let u = tf.factors[0].matvec_transposed(&f)?;
            let v = tf.factors[2].matvec_transposed(&g)?;
            let [rd, rc, ra] = tf.ranks();
            let core = tf.core.data();
            let mut h = vec![0.0; rc];
            for s in 0..ra {
                for (q, hq) in h.iter_mut().enumerate() {
                    let fiber = &core[rd * (q + rc * s)..rd * (q + rc * s + 1)];
                    *hq += v[s] * fiber.iter().zip(&u).map(|(g, u)| g * u).sum::<f64>();
                }
            }
            let logits = tf.factors[1].matvec(&h)?;
            let fused = crate::tensor::kronecker_vec(&v, &u);
            Ok(Forward {
                f,
                g,
                u,
                v,
                h,
                fused,
                logits,
                attr_probs,
            })
        }
    }
}

/// Loss terms of a batch. Classification and attribute losses are averaged
/// over examples, the contrastive loss over pairs.
pub fn total_loss(model: &ModelParams, batch: &Batch<'_>, weights: &LossWeights) -> Result<LossBreakdown> {
    if batch.examples.is_empty() {
        return Err(Error::Input("empty batch".into()));
    }
    let fwd = batch
        .examples
        .iter()
        .map(|e| forward(model, &e.x))
        .collect::<Result<Vec<_>>>()?;
    let n = batch.examples.len() as f64;
    let mut classification = 0.0;
    let mut attribute = 0.0;
    for (ex, fw) in batch.examples.iter().zip(&fwd) {
        classification += cross_entropy(&fw.logits, ex.label)?;
        attribute += attribute_loss(&fw.attr_probs, &ex.attributes)?;
    }
    let mut contrastive_sum = 0.0;
    for p in &batch.pairs {
        let d = pair_distance(&fwd[p.first].fused, &fwd[p.second].fused)?;
        contrastive_sum += contrastive(d, p.genuine, weights.margin)?;
    }
    let contrastive_mean = if batch.pairs.is_empty() {
        0.0
    } else {
        contrastive_sum / batch.pairs.len() as f64
    };
    let ssl = group_lasso(model.weights.sparse_tensor());
    let mut b = LossBreakdown {
        classification: classification / n,
        contrastive: contrastive_mean,
        ssl,
        attribute: attribute / n,
        total: 0.0,
    };
    b.total = b.classification
        + weights.lambda1 * b.contrastive
        + weights.lambda2 * b.ssl
        + weights.lambda3 * b.attribute;
    Ok(b)
}

/// Gradients of each smooth loss term with respect to every parameter group.
/// Each field has the shape of the model; the term weights `λ` are not applied.
#[derive(Debug, Clone)]
pub struct TermGradients {
    pub classification: ModelParams,
    pub contrastive: ModelParams,
    pub attribute: ModelParams,
    pub loss: LossBreakdown,
}

fn add_outer(dst: &mut [f64], cols: usize, left: &[f64], right: &[f64], scale: f64) {
    for (i, &l) in left.iter().enumerate() {
        let c = l * scale;
        if c == 0.0 {
            continue;
        }
        for (d, &r) in dst[i * cols..(i + 1) * cols].iter_mut().zip(right) {
            *d += c * r;
        }
    }
}

/// Pushes `d/df` and `d/dg` back into the two encoders.
fn backprop_features(grad: &mut ModelParams, x: &[f64], df: &[f64], dg: &[f64]) {
    let p = x.len();
    add_outer(&mut grad.encoders.identity.data_mut()[..], p, df, x, 1.0);
    add_outer(&mut grad.encoders.attribute.data_mut()[..], p, dg, x, 1.0);
}

/// Backpropagates a gradient on the fused feature `z` of one example.
fn backprop_fused(model: &ModelParams, grad: &mut ModelParams, x: &[f64], fw: &Forward, dz: &[f64]) {
    match &model.weights {
        Weights::Full(_) => {
            let d = fw.f.len();
            let df: Vec<f64> = (0..d)
                .map(|di| fw.g.iter().enumerate().map(|(a, ga)| dz[a * d + di] * ga).sum())
                .collect();
            let dg: Vec<f64> = (0..fw.g.len())
                .map(|a| dz[a * d..(a + 1) * d].iter().zip(&fw.f).map(|(z, f)| z * f).sum())
                .collect();
            backprop_features(grad, x, &df, &dg);
        }
        Weights::Factored(_) => {
            let rd = fw.u.len();
            let du: Vec<f64> = (0..rd)
                .map(|p| fw.v.iter().enumerate().map(|(s, vs)| dz[s * rd + p] * vs).sum())
                .collect();
            let dv: Vec<f64> = (0..fw.v.len())
                .map(|s| dz[s * rd..(s + 1) * rd].iter().zip(&fw.u).map(|(z, u)| z * u).sum())
                .collect();
            backprop_projections(model, grad, x, fw, &du, &dv);
        }
    }
}

/// Given `dL/du` and `dL/dv` (u = A1^T f, v = A3^T g), accumulates gradients
/// of A1, A3 and the encoders.
fn backprop_projections(
    model: &ModelParams,
    grad: &mut ModelParams,
    x: &[f64],
    fw: &Forward,
    du: &[f64],
    dv: &[f64],
) {
    let Weights::Factored(tf) = &model.weights else {
        unreachable!("projections exist only in factored models")
    };
    let Weights::Factored(gtf) = &mut grad.weights else {
        unreachable!("gradient mirrors the model")
    };
    let (rd, ra) = (du.len(), dv.len());
    add_outer(gtf.factors[0].data_mut(), rd, &fw.f, du, 1.0);
    add_outer(gtf.factors[2].data_mut(), ra, &fw.g, dv, 1.0);
    let df = tf.factors[0].matvec(du).expect("shapes checked in forward");
    let dg = tf.factors[2].matvec(dv).expect("shapes checked in forward");
    backprop_features(grad, x, &df, &dg);
}

fn backprop_classification(model: &ModelParams, grad: &mut ModelParams, x: &[f64], fw: &Forward, delta: &[f64]) {
    match &model.weights {
        Weights::Full(w) => {
            let [d, c, a] = w.dims();
            let wd = w.data();
            let mut df = vec![0.0; d];
            let mut dg = vec![0.0; a];
            {
                let Weights::Full(gw) = &mut grad.weights else { unreachable!() };
                let gd = gw.data_mut();
                for ai in 0..a {
                    for ci in 0..c {
                        let coef = delta[ci] * fw.g[ai];
                        let off = d * (ci + c * ai);
                        let mut acc = 0.0;
                        for di in 0..d {
                            gd[off + di] += coef * fw.f[di];
                            df[di] += wd[off + di] * coef;
                            acc += wd[off + di] * fw.f[di];
                        }
                        dg[ai] += acc * delta[ci];
                    }
                }
            }
            backprop_features(grad, x, &df, &dg);
        }
        Weights::Factored(tf) => {
            let [rd, rc, ra] = tf.ranks();
            let dh = tf.factors[1].matvec_transposed(delta).expect("shapes checked in forward");
            let core = tf.core.data();
            let mut du = vec![0.0; rd];
            let mut dv = vec![0.0; ra];
            {
                let Weights::Factored(gtf) = &mut grad.weights else { unreachable!() };
                add_outer(gtf.factors[1].data_mut(), rc, delta, &fw.h, 1.0);
                let gcore = gtf.core.data_mut();
                for s in 0..ra {
                    for q in 0..rc {
                        let off = rd * (q + rc * s);
                        let coef = dh[q] * fw.v[s];
                        let mut acc = 0.0;
                        for p in 0..rd {
                            gcore[off + p] += coef * fw.u[p];
                            du[p] += core[off + p] * coef;
                            acc += core[off + p] * fw.u[p];
                        }
                        dv[s] += acc * dh[q];
                    }
                }
            }
            backprop_projections(model, grad, x, fw, &du, &dv);
        }
    }
}

fn backprop_attributes(model: &ModelParams, grad: &mut ModelParams, x: &[f64], fw: &Forward, labels: &[u8], scale: f64) {
    let s = labels.len();
    if s == 0 {
        return;
    }
    let a = fw.g.len();
    let dlogit: Vec<f64> = fw
        .attr_probs
        .iter()
        .zip(labels)
        .map(|(&p, &l)| (p - f64::from(l.min(1))) * scale / s as f64)
        .collect();
    add_outer(grad.encoders.attr_heads.data_mut(), a, &dlogit, &fw.g, 1.0);
    for (b, d) in grad.encoders.attr_bias.iter_mut().zip(&dlogit) {
        *b += d;
    }
    let dg = model
        .encoders
        .attr_heads
        .matvec_transposed(&dlogit)
        .expect("shapes checked in forward");
    add_outer(grad.encoders.attribute.data_mut(), x.len(), &dg, x, 1.0);
}

/// Analytic gradients of the classification, contrastive and attribute terms.
pub fn gradients(model: &ModelParams, batch: &Batch<'_>, weights: &LossWeights) -> Result<TermGradients> {
    let loss = total_loss(model, batch, weights)?;
    let fwd = batch
        .examples
        .iter()
        .map(|e| forward(model, &e.x))
        .collect::<Result<Vec<_>>>()?;
    let n = batch.examples.len() as f64;

    let mut cls = model.zeros_like();
    let mut con = model.zeros_like();
    let mut attr = model.zeros_like();

    for (ex, fw) in batch.examples.iter().zip(&fwd) {
        let mut delta = softmax(&fw.logits);
        delta[ex.label] -= 1.0;
        delta.iter_mut().for_each(|d| *d /= n);
        backprop_classification(model, &mut cls, &ex.x, fw, &delta);
        backprop_attributes(model, &mut attr, &ex.x, fw, &ex.attributes, 1.0 / n);
    }

    if !batch.pairs.is_empty() {
        let np = batch.pairs.len() as f64;
        for p in &batch.pairs {
            let (zj, zk) = (&fwd[p.first].fused, &fwd[p.second].fused);
            let d = pair_distance(zj, zk)?;
            let coef = if p.genuine {
                1.0
            } else if d > 0.0 && d < weights.margin {
                -(weights.margin - d) / d
            } else {
                0.0
            };
            if coef == 0.0 {
                continue;
            }
            let dz: Vec<f64> = zj.iter().zip(zk).map(|(a, b)| coef * (a - b) / np).collect();
            let neg: Vec<f64> = dz.iter().map(|v| -v).collect();
            let (ej, ek) = (batch.examples[p.first], batch.examples[p.second]);
            backprop_fused(model, &mut con, &ej.x, &fwd[p.first], &dz);
            backprop_fused(model, &mut con, &ek.x, &fwd[p.second], &neg);
        }
    }

    Ok(TermGradients {
        classification: cls,
        contrastive: con,
        attribute: attr,
        loss,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fusion::Encoders;
    use crate::tensor::Matrix;
    use crate::tucker::{hosvd, TuckerFactors};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cross_entropy_cases() {
        assert!(cross_entropy(&[30.0, 0.0, 0.0], 0).unwrap() <= 1e-10);
        let c = 7;
        assert!((cross_entropy(&vec![0.3; c], 4).unwrap() - (c as f64).ln()).abs() < 1e-14);
        let v = cross_entropy(&[0.0, 3f64.ln()], 1).unwrap();
        assert!((v - (4.0f64 / 3.0).ln()).abs() < 1e-14);
        assert!((v - 0.2877).abs() < 1e-4);
        assert!(matches!(cross_entropy(&[0.0, 1.0], 2), Err(Error::Label { .. })));
        // large logits stay finite
        assert!(cross_entropy(&[1000.0, -1000.0], 1).unwrap().is_finite());
    }

    #[test]
    fn contrastive_cases() {
        assert_eq!(contrastive(0.0, true, 1.0).unwrap(), 0.0);
        assert_eq!(contrastive(1.0, false, 1.0).unwrap(), 0.0);
        assert_eq!(contrastive(2.5, false, 1.0).unwrap(), 0.0);
        assert_eq!(contrastive(0.5, true, 1.0).unwrap(), 0.125);
        assert_eq!(contrastive(0.5, false, 1.0).unwrap(), 0.125);
        assert!(matches!(contrastive(-0.1, true, 1.0), Err(Error::Input(_))));
        assert!(matches!(contrastive(f64::NAN, true, 1.0), Err(Error::Numeric(_))));
    }

    #[test]
    fn distances() {
        assert_eq!(pair_distance(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert!((pair_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let u = [0.3, -1.2, 2.0];
        let v = [1.1, 0.4, -0.5];
        let d = pair_distance(&u, &v).unwrap();
        let s: Vec<f64> = u.iter().map(|x| -3.0 * x).collect();
        let t: Vec<f64> = v.iter().map(|x| -3.0 * x).collect();
        assert!((pair_distance(&s, &t).unwrap() - 3.0 * d).abs() < 1e-13);
        assert!(pair_distance(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn group_lasso_cases() {
        assert_eq!(group_lasso(&Tensor3::zeros([2, 3, 4])), 0.0);
        let mut t = Tensor3::zeros([2, 3, 4]);
        t.set(1, 0, 2, -1.5);
        assert_eq!(group_lasso(&t), 4.5);
        assert_eq!(group_lasso(&Tensor3::from_fn([2, 2, 2], |_, _, _| 1.0)), 12.0);
    }

    #[test]
    fn attribute_loss_cases() {
        assert!(attribute_loss(&[1.0, 0.0, 1.0], &[1, 0, 1]).unwrap() <= 1e-10);
        assert!((attribute_loss(&[0.5; 4], &[1, 0, 0, 1]).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert!((attribute_loss(&[0.75], &[1]).unwrap() - (4.0f64 / 3.0).ln()).abs() < 1e-15);
        assert!(attribute_loss(&[0.5], &[1, 0]).is_err());
    }

    #[test]
    fn prox_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let t = Tensor3::from_fn([3, 2, 4], |_, _, _| rng.random_range(-1.0..1.0));
        assert_eq!(prox_group_lasso(&t, 0.1, 0.0), t);

        let mut single = Tensor3::zeros([2, 2, 2]);
        single.set(0, 1, 1, 1.0);
        let out = prox_group_lasso(&single, 0.3, 1.0);
        // three sequential scalar soft-thresholds: 1 -> 0.7 -> 0.4 -> 0.1
        assert!((out.get(0, 1, 1) - 0.1).abs() < 1e-15);

        let mut small = t.clone();
        small.scale_slice(Mode::Two, 1, 1e-3);
        let out = prox_group_lasso(&small, 0.5, 0.1);
        assert_eq!(out.slice_norms(Mode::Two)[1], 0.0);
        assert!(out.data().iter().all(|v| v.to_bits() != (-0.0f64).to_bits()));
    }

    fn small_model(factored: bool, rng: &mut ChaCha8Rng) -> ModelParams {
        let (p, d, c, a, s) = (4, 3, 3, 2, 2);
        let mut m = |r: usize, cc: usize| Matrix::from_fn(r, cc, |_, _| rng.random_range(-1.0..1.0));
        let enc = Encoders::new(m(d, p), m(a, p), m(s, a), vec![0.1, -0.2]).unwrap();
        let w = Tensor3::from_fn([d, c, a], |i, j, k| ((i + 2 * j + 3 * k) as f64 * 0.7).sin());
        let weights = if factored {
            Weights::Factored(hosvd(&w, [d, c, a]).unwrap())
        } else {
            Weights::Full(w)
        };
        ModelParams::new(enc, weights).unwrap()
    }

    fn examples(rng: &mut ChaCha8Rng) -> Vec<Example> {
        (0..4)
            .map(|i| Example {
                x: (0..4).map(|_| rng.random_range(-1.0..1.0)).collect(),
                label: i % 3,
                attributes: vec![(i % 2) as u8, 1],
            })
            .collect()
    }

    #[test]
    fn total_loss_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let model = small_model(true, &mut rng);
        let ex = examples(&mut rng);
        let batch = Batch {
            examples: ex.iter().collect(),
            pairs: vec![
                Pair { first: 0, second: 3, genuine: true },
                Pair { first: 1, second: 2, genuine: false },
            ],
        };
        let zero = LossWeights { lambda1: 0.0, lambda2: 0.0, lambda3: 0.0, margin: 1.0 };
        let b = total_loss(&model, &batch, &zero).unwrap();
        assert_eq!(b.total, b.classification);
        let w = LossWeights { lambda1: 0.3, lambda2: 0.2, lambda3: 0.7, margin: 1.5 };
        let b = total_loss(&model, &batch, &w).unwrap();
        let sum = b.classification + 0.3 * b.contrastive + 0.2 * b.ssl + 0.7 * b.attribute;
        assert!((b.total - sum).abs() < 1e-15);

        let zero_model = model.zeros_like();
        let one = Batch { examples: vec![&ex[0]], pairs: vec![] };
        let b = total_loss(&zero_model, &one, &w).unwrap();
        assert!((b.classification - 3f64.ln()).abs() < 1e-15);
        assert_eq!(b.ssl, 0.0);
        assert!(total_loss(&model, &Batch { examples: vec![], pairs: vec![] }, &w).is_err());
    }

    #[test]
    fn full_and_factored_losses_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let full = small_model(false, &mut rng);
        let Weights::Full(w) = &full.weights else { unreachable!() };
        let tf = hosvd(w, w.dims()).unwrap();
        let fac = ModelParams::new(full.encoders.clone(), Weights::Factored(tf)).unwrap();
        let ex = examples(&mut rng);
        let batch = Batch {
            examples: ex.iter().collect(),
            pairs: vec![
                Pair { first: 0, second: 3, genuine: true },
                Pair { first: 1, second: 2, genuine: false },
                Pair { first: 0, second: 1, genuine: false },
            ],
        };
        let wts = LossWeights { lambda2: 0.0, margin: 5.0, ..LossWeights::default() };
        let a = total_loss(&full, &batch, &wts).unwrap();
        let b = total_loss(&fac, &batch, &wts).unwrap();
        assert!((a.total - b.total).abs() <= 1e-10 * a.total.abs());
        assert!((a.contrastive - b.contrastive).abs() <= 1e-10 * a.contrastive.abs());
    }

    #[test]
    fn no_pairs_means_no_contrastive_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let model = small_model(true, &mut rng);
        let ex = examples(&mut rng);
        let batch = Batch { examples: ex.iter().collect(), pairs: vec![] };
        let g = gradients(&model, &batch, &LossWeights::default()).unwrap();
        for grp in g.contrastive.groups() {
            assert!(g.contrastive.group(grp).unwrap().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn genuine_step_reduces_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let u: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
        let d0 = pair_distance(&u, &v).unwrap();
        // d/du of d^2/2 is (u - v)
        let step = 0.1;
        let u2: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a - step * (a - b)).collect();
        let v2: Vec<f64> = v.iter().zip(&u).map(|(b, a)| b - step * (b - a)).collect();
        assert!(pair_distance(&u2, &v2).unwrap() < d0);
    }

    #[test]
    fn factored_gradient_shapes() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let model = small_model(true, &mut rng);
        let ex = examples(&mut rng);
        let batch = Batch { examples: ex.iter().collect(), pairs: vec![Pair { first: 0, second: 3, genuine: true }] };
        let g = gradients(&model, &batch, &LossWeights::default()).unwrap();
        assert!(g.classification.weights.is_factored());
        let Weights::Factored(t) = &g.classification.weights else { unreachable!() };
        let Weights::Factored(m) = &model.weights else { unreachable!() };
        assert_eq!(t.ranks(), m.ranks());
        let _: &TuckerFactors = t;
    }
}
