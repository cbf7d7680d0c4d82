use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::dataset::Dataset;
use crate::error::{Error, Result};
use crate::fusion::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
}

/// Counts over `bins` uniform bins spanning `[min, max]`. The last bin is
/// closed on the right.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub min: f64,
    pub max: f64,
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn edges(&self) -> Vec<f64> {
        let bins = self.counts.len();
        let width = (self.max - self.min) / bins as f64;
        (0..=bins)
            .map(|i| if i == bins { self.max } else { self.min + width * i as f64 })
            .collect()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub cmc: Vec<f64>,
    pub map: f64,
    pub roc: Vec<RocPoint>,
    pub genuine: Histogram,
    pub imposter: Histogram,
    /// Top gallery indices (with distances) for each query.
    pub ranked: Vec<RankedList>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedList {
    pub query: usize,
    pub label: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Gallery indices ordered by Euclidean distance to `query`, ties broken by
/// ascending gallery index.
pub fn rank_gallery(query: &[f64], gallery: &[Vec<f64>]) -> Vec<usize> {
    let d: Vec<f64> = gallery.iter().map(|g| distance(query, g)).collect();
    let mut order: Vec<usize> = (0..gallery.len()).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]).then(a.cmp(&b)));
    order
}

fn check_inputs(
    queries: &[Vec<f64>],
    query_labels: &[usize],
    gallery: &[Vec<f64>],
    gallery_labels: &[usize],
) -> Result<()> {
    if queries.is_empty() || gallery.is_empty() {
        return Err(Error::Eval("query and gallery must be nonempty".into()));
    }
    if queries.len() != query_labels.len() || gallery.len() != gallery_labels.len() {
        return Err(Error::Eval("feature and label counts differ".into()));
    }
    let width = gallery[0].len();
    if queries.iter().chain(gallery).any(|f| f.len() != width) {
        return Err(Error::Eval("feature vectors have inconsistent lengths".into()));
    }
    let present: BTreeSet<usize> = gallery_labels.iter().copied().collect();
    let missing: BTreeSet<usize> = query_labels
        .iter()
        .copied()
        .filter(|l| !present.contains(l))
        .collect();
    if !missing.is_empty() {
        return Err(Error::Eval(format!(
            "query labels absent from gallery: {missing:?}"
        )));
    }
    Ok(())
}

/// `cmc[k-1]` is the fraction of queries with a same-label item among their
/// `k` nearest gallery items.
pub fn cmc(
    queries: &[Vec<f64>],
    query_labels: &[usize],
    gallery: &[Vec<f64>],
    gallery_labels: &[usize],
    max_rank: usize,
) -> Result<Vec<f64>> {
    check_inputs(queries, query_labels, gallery, gallery_labels)?;
    if max_rank == 0 {
        return Err(Error::Eval("max_rank must be at least 1".into()));
    }
    let mut hits = vec![0usize; max_rank];
    for (q, &ql) in queries.iter().zip(query_labels) {
        let order = rank_gallery(q, gallery);
        let first = order
            .iter()
            .position(|&g| gallery_labels[g] == ql)
            .expect("label presence checked");
        for h in hits.iter_mut().skip(first) {
            *h += 1;
        }
    }
    let n = queries.len() as f64;
    Ok(hits.into_iter().map(|h| h as f64 / n).collect())
}

pub fn mean_average_precision(
    queries: &[Vec<f64>],
    query_labels: &[usize],
    gallery: &[Vec<f64>],
    gallery_labels: &[usize],
) -> Result<f64> {
    check_inputs(queries, query_labels, gallery, gallery_labels)?;
    let mut total = 0.0;
    for (q, &ql) in queries.iter().zip(query_labels) {
        let order = rank_gallery(q, gallery);
        let mut found = 0usize;
        let mut ap = 0.0;
        for (pos, &g) in order.iter().enumerate() {
            if gallery_labels[g] == ql {
                found += 1;
                ap += found as f64 / (pos + 1) as f64;
            }
        }
        total += ap / found as f64;
    }
    Ok(total / queries.len() as f64)
}

/// Stepwise ROC for "accept when score >= t", swept over every distinct
/// score from high to low. Starts at (0, 0) and ends at (1, 1).
pub fn roc(genuine: &[f64], imposter: &[f64]) -> Result<Vec<RocPoint>> {
    if genuine.is_empty() || imposter.is_empty() {
        return Err(Error::Eval("ROC needs nonempty genuine and imposter scores".into()));
    }
    if genuine.iter().chain(imposter).any(|s| s.is_nan()) {
        return Err(Error::Eval("ROC scores contain NaN".into()));
    }
    let mut g = genuine.to_vec();
    let mut im = imposter.to_vec();
    g.sort_by(|a, b| b.total_cmp(a));
    im.sort_by(|a, b| b.total_cmp(a));
    let mut thresholds: Vec<f64> = g.iter().chain(&im).copied().collect();
    thresholds.sort_by(|a, b| b.total_cmp(a));
    thresholds.dedup();

    let (ng, ni) = (g.len() as f64, im.len() as f64);
    let mut points = vec![RocPoint { fpr: 0.0, tpr: 0.0 }];
    let (mut gi, mut ii) = (0usize, 0usize);
    for t in thresholds {
        while gi < g.len() && g[gi] >= t {
            gi += 1;
        }
        while ii < im.len() && im[ii] >= t {
            ii += 1;
        }
        points.push(RocPoint {
            fpr: ii as f64 / ni,
            tpr: gi as f64 / ng,
        });
    }
    Ok(points)
}

pub fn score_histogram(scores: &[f64], bins: usize) -> Histogram {
    let bins = bins.max(1);
    let mut counts = vec![0usize; bins];
    if scores.is_empty() {
        return Histogram { min: 0.0, max: 0.0, counts };
    }
    let min = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = max - min;
    for &s in scores {
        let b = if span > 0.0 {
            (((s - min) / span * bins as f64) as usize).min(bins - 1)
        } else {
            0
        };
        counts[b] += 1;
    }
    Histogram { min, max, counts }
}

pub const DEFAULT_MAX_RANK: usize = 20;
pub const DEFAULT_HIST_BINS: usize = 50;
const RANKED_LIST_LEN: usize = 10;

/// Evaluates `model` on the dataset's gallery/query split using fused
/// features. Verification scores are negated distances over every
/// query/gallery pair.
pub fn evaluate_model(model: &ModelParams, data: &Dataset) -> Result<EvalReport> {
    let split = data.gallery_query_split();
    if split.query.is_empty() {
        return Err(Error::Eval("dataset has no query samples (need >= 2 per class)".into()));
    }
    let features = |idx: &[usize]| -> Result<(Vec<Vec<f64>>, Vec<usize>)> {
        let mut f = Vec::with_capacity(idx.len());
        let mut l = Vec::with_capacity(idx.len());
        for &i in idx {
            let ex = data.samples()[i].to_example();
            f.push(model.fused(&model.encode(&ex.x)?)?);
            l.push(ex.label);
        }
        Ok((f, l))
    };
    let (gf, gl) = features(&split.gallery)?;
    let (qf, ql) = features(&split.query)?;

    let cmc_curve = cmc(&qf, &ql, &gf, &gl, DEFAULT_MAX_RANK)?;
    let map = mean_average_precision(&qf, &ql, &gf, &gl)?;

    let mut genuine = Vec::new();
    let mut imposter = Vec::new();
    let mut ranked = Vec::with_capacity(qf.len());
    for (qi, (q, &label)) in qf.iter().zip(&ql).enumerate() {
        for (g, &glabel) in gf.iter().zip(&gl) {
            let score = -distance(q, g);
            if glabel == label {
                genuine.push(score);
            } else {
                imposter.push(score);
            }
        }
        let entries = rank_gallery(q, &gf)
            .into_iter()
            .take(RANKED_LIST_LEN)
            .map(|g| (split.gallery[g], gl[g], distance(q, &gf[g])))
            .collect();
        ranked.push(RankedList {
            query: split.query[qi],
            label,
            entries,
        });
    }
    let roc_curve = roc(&genuine, &imposter)?;
    Ok(EvalReport {
        cmc: cmc_curve,
        map,
        roc: roc_curve,
        genuine: score_histogram(&genuine, DEFAULT_HIST_BINS),
        imposter: score_histogram(&imposter, DEFAULT_HIST_BINS),
        ranked,
    })
}

fn histogram_csv(h: &Histogram) -> String {
    let edges = h.edges();
    let mut out = String::from("bin,lower,upper,count\n");
    for (i, c) in h.counts.iter().enumerate() {
        let _ = writeln!(out, "{i},{:.16e},{:.16e},{c}", edges[i], edges[i + 1]);
    }
    out
}

impl EvalReport {
    pub fn rank1(&self) -> f64 {
        self.cmc[0]
    }

    /// Writes cmc.csv, map.txt, roc.csv, hist_genuine.csv,
    /// hist_imposter.csv and ranked_lists.txt into `dir`.
    pub fn write_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;

        let mut cmc_csv = String::from("rank,accuracy\n");
        for (k, v) in self.cmc.iter().enumerate() {
            let _ = writeln!(cmc_csv, "{},{v:.16e}", k + 1);
        }
        fs::write(dir.join("cmc.csv"), cmc_csv)?;
        fs::write(dir.join("map.txt"), format!("{:.16e}\n", self.map))?;

        let mut roc_csv = String::from("fpr,tpr\n");
        for p in &self.roc {
            let _ = writeln!(roc_csv, "{:.16e},{:.16e}", p.fpr, p.tpr);
        }
        fs::write(dir.join("roc.csv"), roc_csv)?;
        fs::write(dir.join("hist_genuine.csv"), histogram_csv(&self.genuine))?;
        fs::write(dir.join("hist_imposter.csv"), histogram_csv(&self.imposter))?;

        let mut lists = String::new();
        for r in &self.ranked {
            let _ = write!(lists, "query {} label {}:", r.query, r.label);
            for (g, l, d) in &r.entries {
                let mark = if *l == r.label { "+" } else { "-" };
                let _ = write!(lists, " {g}[{l}{mark}]@{d:.4}");
            }
            lists.push('\n');
        }
        fs::write(dir.join("ranked_lists.txt"), lists)?;
        Ok(())
    }
}
