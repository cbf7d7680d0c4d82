//! Training loop, pair sampling, sparsity reporting, compaction and forward
//! benchmarks.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fusion::{forward_decomposed, Encoders, FeaturePair, ModelParams, ParamGroup, Weights};
use crate::harness::Dataset;
use crate::objective::{gradients, prox_group_lasso_in_place, total_loss, Batch, Example, LossBreakdown, LossWeights, Pair};
use crate::tensor::{Matrix, Mode, Tensor3};
use crate::tucker::TuckerFactors;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Default group-lasso weight used by [`TrainConfig::default`].
pub const DEFAULT_LAMBDA2: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Core ranks (r_d, r_c, r_a); ignored when `use_td` is false.
    pub ranks: [usize; 3],
    /// Identity feature size D.
    pub identity_dim: usize,
    /// Attribute feature size A.
    pub attribute_dim: usize,
    pub weights: LossWeights,
    pub adam: AdamConfig,
    pub batch_size: usize,
    pub pairs_per_batch: usize,
    pub epochs: usize,
    /// Epochs without a training rank-1 improvement before stopping.
    pub patience: usize,
    pub seed: u64,
    /// Tucker-factored weights instead of the full tensor.
    pub use_td: bool,
    /// Apply the group-lasso proximal step after each update.
    pub use_ssl: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            ranks: [12, 12, 8],
            identity_dim: 24,
            attribute_dim: 12,
            weights: LossWeights {
                lambda2: DEFAULT_LAMBDA2,
                ..LossWeights::default()
            },
            adam: AdamConfig::default(),
            batch_size: 64,
            pairs_per_batch: 64,
            epochs: 200,
            patience: 10,
            seed: 0,
            use_td: true,
            use_ssl: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        self.weights.validate()?;
        let a = &self.adam;
        if !(a.learning_rate > 0.0 && a.learning_rate.is_finite()) {
            return Err(Error::Config(format!("learning rate must be positive, got {}", a.learning_rate)));
        }
        if !(0.0..1.0).contains(&a.beta1) || !(0.0..1.0).contains(&a.beta2) {
            return Err(Error::Config("Adam betas must lie in [0, 1)".into()));
        }
        if !(a.eps > 0.0) {
            return Err(Error::Config("Adam eps must be positive".into()));
        }
        if self.identity_dim == 0 || self.attribute_dim == 0 {
            return Err(Error::Config("feature dimensions must be positive".into()));
        }
        if self.batch_size == 0 || self.pairs_per_batch == 0 {
            return Err(Error::Config("batch size and pairs per batch must be positive".into()));
        }
        if self.weights.lambda1 > 0.0 && self.batch_size < 2 {
            return Err(Error::Config("contrastive term needs batch size >= 2".into()));
        }
        if self.use_td {
            let [rd, rc, ra] = self.ranks;
            if rd == 0 || rc == 0 || ra == 0 {
                return Err(Error::Config("ranks must be positive".into()));
            }
            if rd > self.identity_dim || ra > self.attribute_dim {
                return Err(Error::Config(format!(
                    "ranks {:?} exceed feature dimensions D={}, A={}",
                    self.ranks, self.identity_dim, self.attribute_dim
                )));
            }
        }
        Ok(())
    }
}

/// Picks up to `count` distinct pairs, half genuine and half imposter when
/// the batch allows it, topping up from the other kind otherwise. The flag
/// is set when the batch contains no genuine pair at all.
pub fn sample_pairs(labels: &[usize], count: usize, rng: &mut impl Rng) -> (Vec<Pair>, bool) {
    let mut genuine = Vec::new();
    let mut imposter = Vec::new();
    for i in 0..labels.len() {
        for j in i + 1..labels.len() {
            let p = Pair {
                first: i,
                second: j,
                genuine: labels[i] == labels[j],
            };
            if p.genuine {
                genuine.push(p);
            } else {
                imposter.push(p);
            }
        }
    }
    let no_genuine = genuine.is_empty() && labels.len() >= 2;
    genuine.shuffle(rng);
    imposter.shuffle(rng);
    let want_genuine = count.div_ceil(2);
    let n_gen = want_genuine.min(genuine.len());
    let n_imp = (count - n_gen).min(imposter.len());
    let n_gen = (count - n_imp).min(genuine.len());
    let mut out: Vec<Pair> = genuine[..n_gen].to_vec();
    out.extend_from_slice(&imposter[..n_imp]);
    (out, no_genuine)
}

/// First and second moment estimates, shaped like the model.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub m: ModelParams,
    pub v: ModelParams,
    pub step: u64,
}

impl AdamState {
    pub fn new(model: &ModelParams) -> Self {
        AdamState {
            m: model.zeros_like(),
            v: model.zeros_like(),
            step: 0,
        }
    }
}

/// One bias-corrected Adam update over every parameter group.
pub fn adam_step(params: &mut ModelParams, grads: &ModelParams, state: &mut AdamState, cfg: &AdamConfig) -> Result<()> {
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - cfg.beta1.powi(t);
    let c2 = 1.0 - cfg.beta2.powi(t);
    for g in params.groups() {
        let grad = grads.group(g).ok_or_else(|| Error::dim(format!("gradient lacks {g:?}")))?;
        let m = state.m.group_mut(g).ok_or_else(|| Error::dim(format!("state lacks {g:?}")))?;
        if m.len() != grad.len() {
            return Err(Error::dim(format!("{g:?} gradient has {} entries, expected {}", grad.len(), m.len())));
        }
        for (mi, gi) in m.iter_mut().zip(grad) {
            *mi = cfg.beta1 * *mi + (1.0 - cfg.beta1) * gi;
        }
        let v = state.v.group_mut(g).expect("state mirrors model");
        for (vi, gi) in v.iter_mut().zip(grad) {
            *vi = cfg.beta2 * *vi + (1.0 - cfg.beta2) * gi * gi;
        }
        let m = state.m.group(g).expect("state mirrors model");
        let v = state.v.group(g).expect("state mirrors model");
        let p = params.group_mut(g).expect("listed group");
        for ((pi, mi), vi) in p.iter_mut().zip(m).zip(v) {
            *pi -= cfg.learning_rate * (mi / c1) / ((vi / c2).sqrt() + cfg.eps);
        }
    }
    Ok(())
}

/// Largest possible per-coordinate Adam displacement, in units of the
/// learning rate, over any gradient sequence (eps ignored).
pub fn adam_step_bound(cfg: &AdamConfig) -> f64 {
    let (b1, b2) = (cfg.beta1, cfg.beta2);
    let ratio = b1 * b1 / b2;
    let mut series = 0.0;
    let mut best: f64 = 0.0;
    let mut pow = 1.0;
    for t in 1..=100_000 {
        series += pow;
        pow *= ratio;
        let bound = (1.0 - b1) / (1.0 - b2).sqrt() * series.sqrt() * (1.0 - b2.powi(t)).sqrt() / (1.0 - b1.powi(t));
        best = best.max(bound);
    }
    best
}

/// A group-lasso weight large enough that the first proximal step zeroes
/// every slice of the sparse tensor and no later Adam step can revive one.
pub fn prox_dominance_lambda2(model: &ModelParams, cfg: &AdamConfig) -> f64 {
    let t = model.weights.sparse_tensor();
    let [n0, n1, n2] = t.dims();
    let largest_slice = (n1 * n2).max(n0 * n2).max(n0 * n1) as f64;
    let max_norm = Mode::ALL
        .iter()
        .flat_map(|&m| t.slice_norms(m))
        .fold(0.0, f64::max);
    max_norm / cfg.learning_rate + adam_step_bound(cfg) * largest_slice.sqrt()
}

fn uniform_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, fan_in: usize) -> Matrix {
    let bound = 1.0 / (fan_in as f64).sqrt();
    Matrix::from_fn(rows, cols, |_, _| rng.random_range(-bound..bound))
}

/// Seeded uniform initialization in `[-1/sqrt(fan_in), 1/sqrt(fan_in))`.
pub fn init_model(input_dim: usize, attributes: usize, classes: usize, cfg: &TrainConfig) -> Result<ModelParams> {
    cfg.validate()?;
    let (p, s, c) = (input_dim, attributes, classes);
    let (d, a) = (cfg.identity_dim, cfg.attribute_dim);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let identity = uniform_matrix(&mut rng, d, p, p);
    let attribute = uniform_matrix(&mut rng, a, p, p);
    let heads = uniform_matrix(&mut rng, s, a, a);
    let encoders = Encoders::new(identity, attribute, heads, vec![0.0; s])?;
    let weights = if cfg.use_td {
        let [rd, rc, ra] = cfg.ranks;
        if rc > c {
            return Err(Error::Config(format!("class rank {rc} exceeds {c} classes")));
        }
        let a1 = uniform_matrix(&mut rng, d, rd, d);
        let a2 = uniform_matrix(&mut rng, c, rc, rc);
        let a3 = uniform_matrix(&mut rng, a, ra, a);
        let bound = 1.0 / ((rd * ra) as f64).sqrt();
        let core = Tensor3::from_fn([rd, rc, ra], |_, _, _| rng.random_range(-bound..bound));
        Weights::Factored(TuckerFactors::new(core, [a1, a2, a3])?)
    } else {
        let bound = 1.0 / ((d * a) as f64).sqrt();
        Weights::Full(Tensor3::from_fn([d, c, a], |_, _, _| rng.random_range(-bound..bound)))
    };
    ModelParams::new(encoders, weights)
}

/// Which smooth term trains a parameter group: classification trains the
/// identity encoder and the classifier (A2 and the core), contrastive
/// trains the fusion projections A1 and A3, attribute prediction trains the
/// attribute encoder and its heads.
fn owning_term(g: ParamGroup) -> Term {
    match g {
        ParamGroup::IdentityEncoder | ParamGroup::A2 | ParamGroup::Core => Term::Classification,
        ParamGroup::A1 | ParamGroup::A3 => Term::Contrastive,
        ParamGroup::AttributeEncoder | ParamGroup::AttrHeads | ParamGroup::AttrBias => Term::Attribute,
    }
}

#[derive(Clone, Copy)]
enum Term {
    Classification,
    Contrastive,
    Attribute,
}

/// Combines the per-term gradients, each restricted to the groups it trains.
pub fn targeted_gradient(model: &ModelParams, batch: &Batch<'_>, weights: &LossWeights) -> Result<(ModelParams, LossBreakdown)> {
    let tg = gradients(model, batch, weights)?;
    let mut out = model.zeros_like();
    for g in model.groups() {
        let (src, scale) = match owning_term(g) {
            Term::Classification => (&tg.classification, 1.0),
            Term::Contrastive => (&tg.contrastive, weights.lambda1),
            Term::Attribute => (&tg.attribute, weights.lambda3),
        };
        let dst = out.group_mut(g).expect("listed group");
        for (d, s) in dst.iter_mut().zip(src.group(g).expect("gradients mirror the model")) {
            *d = scale * s;
        }
    }
    Ok((out, tg.loss))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss: LossBreakdown,
    pub train_rank1: f64,
    /// Percent of exactly-zero slices per mode (top, side, front).
    pub zero_pct: [f64; 3],
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: ModelParams,
    pub history: Vec<EpochRecord>,
    pub stopped_early: bool,
    /// Batches whose pairs had to be all imposters.
    pub imposter_only_batches: usize,
}

pub fn zero_slice_percentages(t: &Tensor3) -> [f64; 3] {
    Mode::ALL.map(|m| {
        let norms = t.slice_norms(m);
        100.0 * norms.iter().filter(|&&n| n == 0.0).count() as f64 / norms.len() as f64
    })
}

/// Fraction of examples whose arg-max logit is the true class.
pub fn classification_accuracy(model: &ModelParams, examples: &[Example]) -> Result<f64> {
    let mut hits = 0usize;
    for ex in examples {
        if model.predict_class(&ex.x)? == ex.label {
            hits += 1;
        }
    }
    Ok(hits as f64 / examples.len() as f64)
}

/// Trains on every sample of `data`. Each epoch reshuffles, steps Adam on
/// every minibatch with per-term targeted gradients, and optionally applies
/// the group-lasso prox to the core. Per-epoch losses are measured on the
/// whole training set with a fixed pair sample.
pub fn train(data: &Dataset, cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::Config("empty training set".into()));
    }
    let mut model = init_model(data.input_dim(), data.attribute_count(), data.classes(), cfg)?;
    let examples: Vec<Example> = data.samples().iter().map(|s| s.to_example()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_7a11);

    let labels: Vec<usize> = examples.iter().map(|e| e.label).collect();
    let (eval_pairs, _) = sample_pairs(&labels, examples.len(), &mut rng);
    let eval_batch = Batch {
        examples: examples.iter().collect(),
        pairs: eval_pairs,
    };

    let mut state = AdamState::new(&model);
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut best = f64::NEG_INFINITY;
    let mut stale = 0;
    let mut stopped_early = false;
    let mut imposter_only_batches = 0;

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(cfg.batch_size) {
            let batch_labels: Vec<usize> = chunk.iter().map(|&i| labels[i]).collect();
            let pairs = if cfg.weights.lambda1 > 0.0 {
                let (pairs, fallback) = sample_pairs(&batch_labels, cfg.pairs_per_batch, &mut rng);
                imposter_only_batches += usize::from(fallback);
                pairs
            } else {
                Vec::new()
            };
            let batch = Batch {
                examples: chunk.iter().map(|&i| &examples[i]).collect(),
                pairs,
            };
            let (grad, _) = targeted_gradient(&model, &batch, &cfg.weights)?;
            adam_step(&mut model, &grad, &mut state, &cfg.adam)?;
            if cfg.use_ssl {
                let core = model.weights.sparse_tensor_mut();
                prox_group_lasso_in_place(core, cfg.adam.learning_rate, cfg.weights.lambda2);
            }
        }
        let loss = total_loss(&model, &eval_batch, &cfg.weights)?;
        if !loss.total.is_finite() {
            return Err(Error::Numeric(format!("loss diverged at epoch {epoch}")));
        }
        let train_rank1 = classification_accuracy(&model, &examples)?;
        history.push(EpochRecord {
            epoch,
            loss,
            train_rank1,
            zero_pct: zero_slice_percentages(model.weights.sparse_tensor()),
        });
        if train_rank1 > best {
            best = train_rank1;
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.patience {
                stopped_early = epoch < cfg.epochs;
                break;
            }
        }
    }
    Ok(TrainOutcome {
        model,
        history,
        stopped_early,
        imposter_only_batches,
    })
}

pub const METRICS_HEADER: &str =
    "epoch,classification,contrastive,ssl,attribute,total,train_rank1,zero_pct_top,zero_pct_side,zero_pct_front";

pub fn metrics_csv(history: &[EpochRecord]) -> String {
    let mut out = String::from(METRICS_HEADER);
    out.push('\n');
    for r in history {
        let l = &r.loss;
        let _ = write!(out, "{}", r.epoch);
        for v in [l.classification, l.contrastive, l.ssl, l.attribute, l.total, r.train_rank1] {
            let _ = write!(out, ",{v:.16e}");
        }
        for v in r.zero_pct {
            let _ = write!(out, ",{v:.16e}");
        }
        out.push('\n');
    }
    out
}

pub fn write_metrics_csv(history: &[EpochRecord], path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, metrics_csv(history))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparsityReport {
    /// Percent of zero slices per mode (top, side, front).
    pub zero_pct: [f64; 3],
    pub zero_slices: [Vec<usize>; 3],
    pub params_before: usize,
    pub params_after: usize,
}

impl SparsityReport {
    pub fn mean_zero_pct(&self) -> f64 {
        self.zero_pct.iter().sum::<f64>() / 3.0
    }
}

fn factored(model: &ModelParams) -> Result<&TuckerFactors> {
    match &model.weights {
        Weights::Factored(f) => Ok(f),
        Weights::Full(_) => Err(Error::Unsupported("operation needs a Tucker-factored model".into())),
    }
}

/// Slices whose norm is at most `zero_tol` count as zero.
pub fn sparsity_report(model: &ModelParams, zero_tol: f64) -> Result<SparsityReport> {
    let tf = factored(model)?;
    let zero_slices = Mode::ALL.map(|m| {
        tf.core
            .slice_norms(m)
            .iter()
            .enumerate()
            .filter(|(_, &n)| n <= zero_tol)
            .map(|(i, _)| i)
            .collect::<Vec<_>>()
    });
    let ranks = tf.ranks();
    let zero_pct = [0, 1, 2].map(|k| 100.0 * zero_slices[k].len() as f64 / ranks[k] as f64);
    let kept = [0, 1, 2].map(|k| ranks[k] - zero_slices[k].len());
    let params_after = if kept.contains(&0) {
        0
    } else {
        crate::tucker::parameter_count(tf.dims(), kept).factored
    };
    Ok(SparsityReport {
        zero_pct,
        zero_slices,
        params_before: tf.parameter_count(),
        params_after,
    })
}

/// Drops exactly-zero core slices in every mode with the matching factor
/// columns. Returns the compact model and, per mode, the kept original
/// indices.
pub fn compact(model: &ModelParams) -> Result<(ModelParams, [Vec<usize>; 3])> {
    let tf = factored(model)?;
    let keep = Mode::ALL.map(|m| {
        tf.core
            .slice_norms(m)
            .iter()
            .enumerate()
            .filter(|(_, &n)| n != 0.0)
            .map(|(i, _)| i)
            .collect::<Vec<_>>()
    });
    if let Some(k) = (0..3).find(|&k| keep[k].is_empty()) {
        return Err(Error::DegenerateModel(format!(
            "every {} slice of the core is zero",
            Mode::ALL[k].slice_name()
        )));
    }
    let mut core = tf.core.clone();
    for m in Mode::ALL {
        core = core.select_slices(m, &keep[m.axis()]);
    }
    let factors = [0, 1, 2].map(|k| tf.factors[k].select_columns(&keep[k]));
    let compacted = ModelParams::new(
        model.encoders.clone(),
        Weights::Factored(TuckerFactors::new(core, factors)?),
    )?;
    Ok((compacted, keep))
}

/// Floating-point operations of one factored forward pass from features to
/// logits; a multiply-add counts as two.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlopCount {
    /// `A1^T f` and `A3^T g`
    pub projections: usize,
    /// the Kronecker product
    pub fusion: usize,
    /// `unfold(G, 2) * z`
    pub core: usize,
    /// `A2 * h`
    pub classifier: usize,
}

impl FlopCount {
    pub fn new(dims: [usize; 3], ranks: [usize; 3]) -> Self {
        let [d, c, a] = dims;
        let [rd, rc, ra] = ranks;
        FlopCount {
            projections: 2 * (d * rd + a * ra),
            fusion: rd * ra,
            core: 2 * rd * rc * ra,
            classifier: 2 * c * rc,
        }
    }

    pub fn total(&self) -> usize {
        self.projections + self.fusion + self.core + self.classifier
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub sparsity: SparsityReport,
    pub ranks_before: [usize; 3],
    pub ranks_after: [usize; 3],
    pub flops_before: FlopCount,
    pub flops_after: FlopCount,
    /// Median seconds for `n_inputs` forward passes.
    pub seconds_before: f64,
    pub seconds_after: f64,
}

impl BenchReport {
    /// Fraction of core-term work removed by compaction.
    pub fn core_flop_reduction(&self) -> f64 {
        1.0 - self.flops_after.core as f64 / self.flops_before.core as f64
    }

    pub fn flop_speedup(&self) -> f64 {
        self.flops_before.total() as f64 / self.flops_after.total() as f64
    }

    pub fn time_speedup(&self) -> f64 {
        self.seconds_before / self.seconds_after
    }

    pub fn to_csv(&self) -> String {
        let s = &self.sparsity;
        let mut out = String::from("metric,value\n");
        let rows: [(&str, String); 14] = [
            ("zero_pct_top", format!("{:.6}", s.zero_pct[0])),
            ("zero_pct_side", format!("{:.6}", s.zero_pct[1])),
            ("zero_pct_front", format!("{:.6}", s.zero_pct[2])),
            ("zero_pct_mean", format!("{:.6}", s.mean_zero_pct())),
            ("ranks_before", format!("{}x{}x{}", self.ranks_before[0], self.ranks_before[1], self.ranks_before[2])),
            ("ranks_after", format!("{}x{}x{}", self.ranks_after[0], self.ranks_after[1], self.ranks_after[2])),
            ("params_before", s.params_before.to_string()),
            ("params_after", s.params_after.to_string()),
            ("flops_before", self.flops_before.total().to_string()),
            ("flops_after", self.flops_after.total().to_string()),
            ("core_flop_reduction", format!("{:.6}", self.core_flop_reduction())),
            ("seconds_before", format!("{:.9}", self.seconds_before)),
            ("seconds_after", format!("{:.9}", self.seconds_after)),
            ("time_speedup", format!("{:.6}", self.time_speedup())),
        ];
        for (k, v) in rows {
            let _ = writeln!(out, "{k},{v}");
        }
        out
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn time_forward(tf: &TuckerFactors, inputs: &[FeaturePair], repeats: usize) -> Result<f64> {
    let mut times = Vec::with_capacity(repeats);
    let mut sink = 0.0;
    for _ in 0..repeats {
        let start = Instant::now();
        for p in inputs {
            sink += forward_decomposed(tf, p)?[0];
        }
        times.push(start.elapsed().as_secs_f64());
    }
    std::hint::black_box(sink);
    Ok(median(times))
}

/// Times the factored forward pass (features to logits) before and after
/// compaction on `n_inputs` seeded random feature pairs, taking the median
/// of `repeats` runs. The two models are timed in alternating order.
pub fn bench_forward(model: &ModelParams, n_inputs: usize, repeats: usize, seed: u64) -> Result<BenchReport> {
    if n_inputs == 0 || repeats == 0 {
        return Err(Error::Config("bench needs at least one input and one repeat".into()));
    }
    let tf = factored(model)?;
    let sparsity = sparsity_report(model, 0.0)?;
    let (compacted, _) = compact(model)?;
    let ctf = factored(&compacted)?;
    let [d, _, a] = tf.dims();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inputs: Vec<FeaturePair> = (0..n_inputs)
        .map(|_| FeaturePair {
            identity: (0..d).map(|_| rng.random_range(-1.0..1.0)).collect(),
            attribute: (0..a).map(|_| rng.random_range(-1.0..1.0)).collect(),
        })
        .collect();
    // warm up both paths
    time_forward(tf, &inputs, 1)?;
    time_forward(ctf, &inputs, 1)?;
    let mut before = Vec::with_capacity(repeats);
    let mut after = Vec::with_capacity(repeats);
    for _ in 0..repeats {
        before.push(time_forward(tf, &inputs, 1)?);
        after.push(time_forward(ctf, &inputs, 1)?);
    }
    Ok(BenchReport {
        sparsity,
        ranks_before: tf.ranks(),
        ranks_after: ctf.ranks(),
        flops_before: FlopCount::new(tf.dims(), tf.ranks()),
        flops_after: FlopCount::new(ctf.dims(), ctf.ranks()),
        seconds_before: median(before),
        seconds_after: median(after),
    })
}
