#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tensorfuse::objective::{gradients, total_loss, Batch, Example, LossBreakdown, LossWeights, Pair};
use tensorfuse::oracles::oracle_model_finite_diff;
use tensorfuse::{Encoders, Matrix, ModelParams, ParamGroup, Tensor3, TuckerFactors, Weights};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::new(rows, cols, uniform(rng, rows * cols)).unwrap()
}

pub fn random_tensor(rng: &mut ChaCha8Rng, dims: [usize; 3]) -> Tensor3 {
    Tensor3::new(dims, uniform(rng, dims.iter().product())).unwrap()
}

pub fn random_factors(rng: &mut ChaCha8Rng, dims: [usize; 3], ranks: [usize; 3]) -> TuckerFactors {
    let core = random_tensor(rng, ranks);
    let factors = [0, 1, 2].map(|k| random_matrix(rng, dims[k], ranks[k]));
    TuckerFactors::new(core, factors).unwrap()
}

/// A small random model: P=5, D=4, C=3, A=3, s=2, ranks (3, 2, 2).
pub fn random_model(rng: &mut ChaCha8Rng, factored: bool) -> ModelParams {
    let (p, d, c, a, s) = (5, 4, 3, 3, 2);
    let enc = Encoders::new(
        random_matrix(rng, d, p),
        random_matrix(rng, a, p),
        random_matrix(rng, s, a),
        uniform(rng, s),
    )
    .unwrap();
    let weights = if factored {
        Weights::Factored(random_factors(rng, [d, c, a], [3, 2, 2]))
    } else {
        Weights::Full(random_tensor(rng, [d, c, a]))
    };
    ModelParams::new(enc, weights).unwrap()
}

pub fn random_examples(rng: &mut ChaCha8Rng, n: usize) -> Vec<Example> {
    (0..n)
        .map(|i| Example {
            x: uniform(rng, 5),
            label: i % 3,
            attributes: vec![rng.random_range(0..2u8), rng.random_range(0..2u8)],
        })
        .collect()
}

/// Every pair of the batch; labels cycle with period 3 so both kinds occur.
pub fn all_pairs(examples: &[Example]) -> Vec<Pair> {
    let mut pairs = Vec::new();
    for i in 0..examples.len() {
        for j in i + 1..examples.len() {
            pairs.push(Pair {
                first: i,
                second: j,
                genuine: examples[i].label == examples[j].label,
            });
        }
    }
    pairs
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Term {
    Classification,
    Contrastive,
    Attribute,
}

pub const TERMS: [Term; 3] = [Term::Classification, Term::Contrastive, Term::Attribute];

fn pick(l: &LossBreakdown, t: Term) -> f64 {
    match t {
        Term::Classification => l.classification,
        Term::Contrastive => l.contrastive,
        Term::Attribute => l.attribute,
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Norm-wise relative error between the analytic and central-difference
/// gradients of one term with respect to one group. The margin is large
/// enough that imposter pairs sit inside it.
pub fn gradient_error(model: &ModelParams, examples: &[Example], term: Term, group: ParamGroup) -> f64 {
    let weights = LossWeights {
        margin: 50.0,
        ..LossWeights::default()
    };
    let batch = Batch {
        examples: examples.iter().collect(),
        pairs: all_pairs(examples),
    };
    let tg = gradients(model, &batch, &weights).unwrap();
    let analytic = match term {
        Term::Classification => &tg.classification,
        Term::Contrastive => &tg.contrastive,
        Term::Attribute => &tg.attribute,
    }
    .group(group)
    .unwrap()
    .to_vec();
    let coords: Vec<usize> = (0..analytic.len()).collect();
    let numeric = oracle_model_finite_diff(model, group, &coords, 1e-5, |m| {
        pick(&total_loss(m, &batch, &weights).unwrap(), term)
    });
    let diff: Vec<f64> = analytic.iter().zip(&numeric).map(|(a, b)| a - b).collect();
    let scale = norm(&numeric).max(norm(&analytic));
    if scale < 1e-12 {
        norm(&diff)
    } else {
        norm(&diff) / scale
    }
}
