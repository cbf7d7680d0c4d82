//! Brute-force reference implementations for tests. They only accept small
//! inputs and are written as directly as possible, without sharing code
//! with the optimized paths.

use crate::fusion::{ModelParams, ParamGroup};
use crate::tensor::{Matrix, Mode, Tensor3};
use crate::tucker::TuckerFactors;

const MAX_DIM: usize = 8;
const MAX_GALLERY: usize = 10;

fn small(dims: &[usize]) {
    assert!(
        dims.iter().all(|&d| d <= MAX_DIM),
        "oracle inputs are limited to dimension {MAX_DIM}, got {dims:?}"
    );
}

/// `Y = T x_k M` by direct summation over the contracted index.
pub fn oracle_mode_product(t: &Tensor3, m: &Matrix, mode: Mode) -> Tensor3 {
    let [d0, d1, d2] = t.dims();
    small(&[d0, d1, d2, m.rows()]);
    let k = mode.axis();
    assert_eq!(m.cols(), t.dims()[k], "matrix columns must match the mode size");
    let mut out_dims = [d0, d1, d2];
    out_dims[k] = m.rows();
    let mut out = Tensor3::zeros(out_dims);
    for i in 0..out_dims[0] {
        for j in 0..out_dims[1] {
            for l in 0..out_dims[2] {
                let mut acc = 0.0;
                for c in 0..t.dims()[k] {
                    let (row, x) = match mode {
                        Mode::One => (i, t.get(c, j, l)),
                        Mode::Two => (j, t.get(i, c, l)),
                        Mode::Three => (l, t.get(i, j, c)),
                    };
                    acc += m.get(row, c) * x;
                }
                out.set(i, j, l, acc);
            }
        }
    }
    out
}

/// `W[i,j,k] = sum_{p,q,s} G[p,q,s] A1[i,p] A2[j,q] A3[k,s]`.
pub fn oracle_reconstruct(f: &TuckerFactors) -> Tensor3 {
    let [d0, d1, d2] = f.dims();
    let [r0, r1, r2] = f.ranks();
    small(&[d0, d1, d2, r0, r1, r2]);
    let [a1, a2, a3] = &f.factors;
    let mut out = Tensor3::zeros([d0, d1, d2]);
    for i in 0..d0 {
        for j in 0..d1 {
            for k in 0..d2 {
                let mut acc = 0.0;
                for p in 0..r0 {
                    for q in 0..r1 {
                        for s in 0..r2 {
                            acc += f.core.get(p, q, s) * a1.get(i, p) * a2.get(j, q) * a3.get(k, s);
                        }
                    }
                }
                out.set(i, j, k, acc);
            }
        }
    }
    out
}

/// Central differences `(L(θ + h e_i) - L(θ - h e_i)) / 2h` for every
/// coordinate.
pub fn oracle_finite_diff(mut loss: impl FnMut(&[f64]) -> f64, params: &[f64], h: f64) -> Vec<f64> {
    let mut theta = params.to_vec();
    (0..theta.len())
        .map(|i| {
            let orig = theta[i];
            theta[i] = orig + h;
            let up = loss(&theta);
            theta[i] = orig - h;
            let down = loss(&theta);
            theta[i] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Central differences of `loss` with respect to selected coordinates of
/// one parameter group.
pub fn oracle_model_finite_diff(
    model: &ModelParams,
    group: ParamGroup,
    coords: &[usize],
    h: f64,
    loss: impl Fn(&ModelParams) -> f64,
) -> Vec<f64> {
    let mut probe = model.clone();
    coords
        .iter()
        .map(|&c| {
            let orig = probe.group(group).expect("group present")[c];
            probe.group_mut(group).expect("group present")[c] = orig + h;
            let up = loss(&probe);
            probe.group_mut(group).expect("group present")[c] = orig - h;
            let down = loss(&probe);
            probe.group_mut(group).expect("group present")[c] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        s += (a[i] - b[i]) * (a[i] - b[i]);
    }
    s.sqrt()
}

/// Full gallery ranking per query by repeated selection of the closest
/// remaining item (lowest index on ties).
pub fn oracle_retrieval(queries: &[Vec<f64>], gallery: &[Vec<f64>]) -> Vec<Vec<usize>> {
    assert!(
        gallery.len() <= MAX_GALLERY,
        "oracle gallery is limited to {MAX_GALLERY} items"
    );
    queries
        .iter()
        .map(|q| {
            let mut used = vec![false; gallery.len()];
            let mut ranking = Vec::new();
            for _ in 0..gallery.len() {
                let mut pick: Option<usize> = None;
                for g in 0..gallery.len() {
                    if used[g] {
                        continue;
                    }
                    pick = match pick {
                        Some(b) if euclid(q, &gallery[b]) <= euclid(q, &gallery[g]) => Some(b),
                        _ => Some(g),
                    };
                }
                let g = pick.expect("items remain");
                used[g] = true;
                ranking.push(g);
            }
            ranking
        })
        .collect()
}

/// CMC from explicit rankings.
pub fn oracle_cmc(rankings: &[Vec<usize>], query_labels: &[usize], gallery_labels: &[usize], max_rank: usize) -> Vec<f64> {
    (1..=max_rank)
        .map(|k| {
            let hits = rankings
                .iter()
                .zip(query_labels)
                .filter(|(r, &ql)| r.iter().take(k).any(|&g| gallery_labels[g] == ql))
                .count();
            hits as f64 / rankings.len() as f64
        })
        .collect()
}

/// mAP from explicit rankings: precision at each relevant position,
/// averaged per query, then over queries.
pub fn oracle_map(rankings: &[Vec<usize>], query_labels: &[usize], gallery_labels: &[usize]) -> f64 {
    let mut sum = 0.0;
    for (r, &ql) in rankings.iter().zip(query_labels) {
        let mut precisions = Vec::new();
        for pos in 0..r.len() {
            if gallery_labels[r[pos]] == ql {
                let relevant_so_far = r[..=pos].iter().filter(|&&g| gallery_labels[g] == ql).count();
                precisions.push(relevant_so_far as f64 / (pos + 1) as f64);
            }
        }
        sum += precisions.iter().sum::<f64>() / precisions.len() as f64;
    }
    sum / rankings.len() as f64
}

/// ROC by counting acceptances (`score >= t`) at `t = +inf` and at every
/// distinct score.
pub fn oracle_roc(genuine: &[f64], imposter: &[f64]) -> Vec<(f64, f64)> {
    let mut thresholds = vec![f64::INFINITY];
    for &s in genuine.iter().chain(imposter) {
        if !thresholds.contains(&s) {
            thresholds.push(s);
        }
    }
    thresholds.sort_by(|a, b| b.partial_cmp(a).expect("no NaN"));
    thresholds
        .into_iter()
        .map(|t| {
            let tp = genuine.iter().filter(|&&s| s >= t).count();
            let fp = imposter.iter().filter(|&&s| s >= t).count();
            (fp as f64 / imposter.len() as f64, tp as f64 / genuine.len() as f64)
        })
        .collect()
}
