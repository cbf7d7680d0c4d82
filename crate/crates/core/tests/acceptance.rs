//! Acceptance report: one PASS/FAIL line per criterion.
//!
//! The process exits successfully even when a criterion fails so the rest
//! of the test suite stays usable; set `ACCEPTANCE_STRICT=1` to turn any
//! failure into a nonzero exit status.

mod common;

use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use common::{gradient_error, random_examples, random_factors, random_matrix, random_model, random_tensor, rng, uniform, TERMS};
use rand::Rng;
use tensorfuse::formats::{
    decode_checkpoint, decode_factors, decode_tensor, encode_checkpoint, encode_factors, encode_tensor, save_checkpoint,
    save_factors, save_tensor,
};
use tensorfuse::fusion::{forward_decomposed, forward_full};
use tensorfuse::harness::{
    cmc, decode_dataset, encode_dataset, evaluate_model, generate_synthetic, mean_average_precision, roc, save_dataset,
};
use tensorfuse::oracles::{oracle_cmc, oracle_map, oracle_mode_product, oracle_retrieval, oracle_roc};
use tensorfuse::pipeline::{bench_forward, compact, metrics_csv, sparsity_report, train, FlopCount};
use tensorfuse::tensor::{kronecker, relative_error};
use tensorfuse::tucker::{hooi, hosvd, reconstruct, reconstruction_error};
use tensorfuse::{Dataset, FeaturePair, Mode, ModelParams, SyntheticConfig, TrainConfig, Weights};

struct Verdict {
    pass: bool,
    detail: String,
    notes: Vec<String>,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Verdict {
            pass,
            detail: detail.into(),
            notes: Vec::new(),
        }
    }
}

fn ac1() -> Verdict {
    let (mut product, mut commute, mut compose, mut unfold) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for case in 0..200 {
        let mut r = rng(10_000 + case);
        let d = [0; 3].map(|_| r.random_range(1..=6));
        let t = random_tensor(&mut r, d);
        let modes = Mode::ALL;
        let m = modes[r.random_range(0..3)];
        let n = modes[(m.axis() + r.random_range(1..3)) % 3];
        let (p, q) = (r.random_range(1..=6), r.random_range(1..=6));

        let a = random_matrix(&mut r, p, d[m.axis()]);
        let fast = t.mode_product(&a, m).unwrap();
        product = product.max(relative_error(fast.data(), oracle_mode_product(&t, &a, m).data()));

        let b = random_matrix(&mut r, q, d[n.axis()]);
        let lhs = t.mode_product(&a, m).unwrap().mode_product(&b, n).unwrap();
        let rhs = t.mode_product(&b, n).unwrap().mode_product(&a, m).unwrap();
        commute = commute.max(relative_error(lhs.data(), rhs.data()));

        let c = random_matrix(&mut r, q, p);
        let lhs = t.mode_product(&a, m).unwrap().mode_product(&c, m).unwrap();
        let rhs = t.mode_product(&c.matmul(&a).unwrap(), m).unwrap();
        compose = compose.max(relative_error(lhs.data(), rhs.data()));

        let core = [0; 3].map(|_| r.random_range(1..=6));
        let g = random_tensor(&mut r, core);
        let f = [0, 1, 2].map(|k| random_matrix(&mut r, d[k], core[k]));
        let x = g
            .mode_product(&f[0], Mode::One)
            .unwrap()
            .mode_product(&f[1], Mode::Two)
            .unwrap()
            .mode_product(&f[2], Mode::Three)
            .unwrap();
        for k in Mode::ALL {
            let (lo, hi) = k.others();
            let rhs = f[k.axis()]
                .matmul(&g.unfold(k))
                .unwrap()
                .matmul(&kronecker(&f[hi.axis()], &f[lo.axis()]).transpose())
                .unwrap();
            unfold = unfold.max(relative_error(x.unfold(k).data(), rhs.data()));
        }
    }
    Verdict::new(
        product <= 1e-12 && commute <= 1e-12 && compose <= 1e-12 && unfold <= 1e-10,
        format!(
            "200 cases: oracle {product:.1e}, (a) {commute:.1e}, (b) {compose:.1e} (<= 1e-12); unfolding {unfold:.1e} (<= 1e-10)"
        ),
    )
}

fn ac2() -> Verdict {
    let (mut exact, mut rise, mut planted, mut versus) = (0.0f64, f64::NEG_INFINITY, 0.0f64, f64::NEG_INFINITY);
    for case in 0..50 {
        let mut r = rng(20_000 + case);
        let d = [0; 3].map(|_| r.random_range(2..=8));
        let w = random_tensor(&mut r, d);
        let norm = w.frobenius_norm();

        let full = hosvd(&w, d).unwrap();
        exact = exact.max(reconstruction_error(&w, &full).unwrap() / norm);

        let ranks = loop {
            let c = [0, 1, 2].map(|k| r.random_range(1..=d[k].min(4)));
            if c[0] <= c[1] * c[2] && c[1] <= c[0] * c[2] && c[2] <= c[0] * c[1] {
                break c;
            }
        };
        let h = hosvd(&w, ranks).unwrap();
        let o = hooi(&w, ranks, 50, 1e-12).unwrap();
        for pair in o.errors.windows(2) {
            rise = rise.max((pair[1] - pair[0]) / norm);
        }
        versus = versus.max(o.final_error - reconstruction_error(&w, &h).unwrap());

        let tf = random_factors(&mut r, d, ranks);
        let planted_w = reconstruct(&tf).unwrap();
        let rec = hosvd(&planted_w, ranks).unwrap();
        planted = planted.max(reconstruction_error(&planted_w, &rec).unwrap() / planted_w.frobenius_norm());
    }
    // a sweep may regress by roundoff, in which case the previous iterate is kept
    let monotone = rise <= 1e-12;
    Verdict::new(
        exact <= 1e-10 && monotone && planted <= 1e-8 && versus <= 1e-12,
        format!(
            "50 tensors: full-rank {exact:.1e} (<= 1e-10), largest per-sweep rise {:.1e} (<= 1e-12 roundoff), planted {planted:.1e} (<= 1e-8), HOOI - HOSVD {versus:.1e} (<= 1e-12)",
            rise.max(0.0)
        ),
    )
}

fn ac3() -> Verdict {
    let mut worst = 0.0f64;
    for draw in 0..100 {
        let mut r = rng(30_000 + draw);
        let d = [0; 3].map(|_| r.random_range(1..=12));
        let ranks = [0, 1, 2].map(|k| r.random_range(1..=d[k]));
        let tf = random_factors(&mut r, d, ranks);
        let p = FeaturePair {
            identity: uniform(&mut r, d[0]),
            attribute: uniform(&mut r, d[2]),
        };
        let full = forward_full(&reconstruct(&tf).unwrap(), &p).unwrap();
        let fact = forward_decomposed(&tf, &p).unwrap();
        worst = worst.max(relative_error(&fact, &full));
    }
    Verdict::new(worst <= 1e-10, format!("100 draws: worst relative error {worst:.1e} (<= 1e-10)"))
}

fn ac4() -> Verdict {
    let mut worst = 0.0f64;
    let mut checks = 0;
    for factored in [true, false] {
        for point in 0..20 {
            let mut r = rng(40_000 + point + if factored { 0 } else { 100 });
            let model = random_model(&mut r, factored);
            let ex = random_examples(&mut r, 6);
            for g in model.groups() {
                for t in TERMS {
                    worst = worst.max(gradient_error(&model, &ex, t, g));
                    checks += 1;
                }
            }
        }
    }
    Verdict::new(
        worst <= 1e-6,
        format!("{checks} (point, group, term) checks over factored and full models: worst {worst:.1e} (<= 1e-6)"),
    )
}

fn acceptance_data(seed: u64) -> Dataset {
    generate_synthetic(&SyntheticConfig::acceptance(seed)).unwrap()
}

struct Run {
    rank1: f64,
    map: f64,
    train_acc: f64,
    zero_mean: f64,
    model: ModelParams,
}

fn run(data: &Dataset, cfg: &TrainConfig) -> Run {
    let out = train(&data.gallery().unwrap(), cfg).unwrap();
    let report = evaluate_model(&out.model, data).unwrap();
    let last = out.history.last().unwrap();
    Run {
        rank1: report.rank1(),
        map: report.map,
        train_acc: last.train_rank1,
        zero_mean: last.zero_pct.iter().sum::<f64>() / 3.0,
        model: out.model,
    }
}

const AC5_SEEDS: [u64; 3] = [1, 2, 3];

fn ac5() -> Verdict {
    let defaults = TrainConfig::default();
    let mut pass = true;
    let mut notes = Vec::new();
    for seed in AC5_SEEDS {
        let data = acceptance_data(seed);
        let shipped = run(&data, &TrainConfig { seed, ..defaults.clone() });
        let mut off = TrainConfig { seed, ..defaults.clone() };
        off.weights.lambda2 = 0.0;
        let off = run(&data, &off);
        let ok = off.zero_mean == 0.0
            && (15.0..=35.0).contains(&shipped.zero_mean)
            && (shipped.rank1 - off.rank1).abs() <= 0.03;
        pass &= ok;
        notes.push(format!(
            "seed {seed}: lambda2={} zero slices {:.1}% rank-1 {:.3} (train acc {:.3}); lambda2=0 zero slices {:.1}% rank-1 {:.3} (train acc {:.3})",
            defaults.weights.lambda2, shipped.zero_mean, shipped.rank1, shipped.train_acc, off.zero_mean, off.rank1, off.train_acc
        ));
    }
    let data = acceptance_data(AC5_SEEDS[0]);
    let sweep: Vec<String> = [0.5, 1.0, 2.0, 2.5, 3.0, 3.5, 4.0]
        .into_iter()
        .map(|l2| {
            let mut cfg = TrainConfig { seed: AC5_SEEDS[0], ..defaults.clone() };
            cfg.weights.lambda2 = l2;
            let r = run(&data, &cfg);
            format!("{l2}: {:.1}%/{:.3}", r.zero_mean, r.train_acc)
        })
        .collect();
    notes.push(format!("seed {} sweep, lambda2: zero slices/train acc = {}", AC5_SEEDS[0], sweep.join(", ")));
    Verdict {
        pass,
        detail: format!(
            "shipped lambda2={} needs 15-35% zero slices with rank-1 within 0.03 of lambda2=0, seeds {AC5_SEEDS:?}",
            defaults.weights.lambda2
        ),
        notes,
    }
}

fn zero_fraction(model: &ModelParams) -> f64 {
    let core = model.weights.sparse_tensor();
    core.data().iter().filter(|&&v| v == 0.0).count() as f64 / core.len() as f64
}

fn ac6() -> Verdict {
    let data = acceptance_data(1);
    let trained = run(&data, &TrainConfig { seed: 1, ..TrainConfig::default() }).model;
    let mut worst_out = 0.0f64;
    let mut worst_gap = 0.0f64;
    let mut worst_ratio = f64::INFINITY;
    let mut worst_param_gap = 0.0f64;
    let mut notes = Vec::new();
    // prune the weakest slices of the trained core at several levels
    for (level, fraction) in [0.0, 0.25, 0.5].into_iter().enumerate() {
        let mut model = trained.clone();
        if let Weights::Factored(tf) = &mut model.weights {
            for mode in Mode::ALL {
                let norms = tf.core.slice_norms(mode);
                let mut order: Vec<usize> = (0..norms.len()).collect();
                order.sort_by(|&a, &b| norms[a].total_cmp(&norms[b]));
                for &i in order.iter().take((norms.len() as f64 * fraction) as usize) {
                    tf.core.zero_slice(mode, i);
                }
            }
        }
        let (small, _) = compact(&model).unwrap();
        for s in data.samples() {
            let x: Vec<f64> = s.x.iter().map(|&v| f64::from(v)).collect();
            let a = model.logits(&model.encode(&x).unwrap()).unwrap();
            let b = small.logits(&small.encode(&x).unwrap()).unwrap();
            worst_out = worst_out.max(relative_error(&b, &a));
        }
        let Weights::Factored(big) = &model.weights else { unreachable!() };
        let Weights::Factored(tiny) = &small.weights else { unreachable!() };
        let before = FlopCount::new(big.dims(), big.ranks());
        let after = FlopCount::new(tiny.dims(), tiny.ranks());
        let analytic = 1.0 - after.core as f64 / before.core as f64;
        let measured = zero_fraction(&model);
        worst_gap = worst_gap.max((analytic - measured).abs());
        let report = sparsity_report(&model, 0.0).unwrap();
        let flop_ratio = after.total() as f64 / before.total() as f64;
        let param_ratio = report.params_after as f64 / report.params_before as f64;
        worst_param_gap = worst_param_gap.max((flop_ratio - param_ratio).abs());
        let mut line = format!(
            "level {level}: zero slices {:?}, core FLOP reduction {analytic:.4}, zero core entries {measured:.4}, FLOP ratio {flop_ratio:.4}, parameter ratio {param_ratio:.4}",
            report.zero_pct
        );
        if fraction > 0.0 {
            let bench = bench_forward(&model, 2000, 21, 7).unwrap();
            worst_ratio = worst_ratio.min(bench.time_speedup());
            line.push_str(&format!(", forward time ratio {:.3}", bench.time_speedup()));
        }
        notes.push(line);
    }
    Verdict {
        pass: worst_out <= 1e-12 && worst_gap <= 0.02 && worst_param_gap <= 0.02 && worst_ratio >= 1.0,
        detail: format!(
            "compaction output change {worst_out:.1e} (<= 1e-12), FLOP vs sparsity gap {worst_gap:.4} and FLOP vs parameter ratio gap {worst_param_gap:.4} (<= 0.02), time ratio {worst_ratio:.3} (>= 1)"
        ),
        notes,
    }
}

fn ac7() -> Verdict {
    let mut sums = [0.0f64; 3];
    let mut maps = 0.0f64;
    let mut floor_ok = true;
    let mut notes = Vec::new();
    for seed in 1..=5u64 {
        let data = acceptance_data(seed);
        let base = TrainConfig { seed, ..TrainConfig::default() };
        let variants = [
            base.clone(),
            TrainConfig { use_ssl: false, ..base.clone() },
            TrainConfig { use_td: false, use_ssl: false, ..base.clone() },
        ];
        let runs: Vec<Run> = variants.iter().map(|c| run(&data, c)).collect();
        floor_ok &= runs[0].rank1 >= 0.95 && runs[0].map >= 0.90;
        maps += runs[0].map;
        for (s, r) in sums.iter_mut().zip(&runs) {
            *s += r.rank1;
        }
        notes.push(format!(
            "seed {seed}: TD+SSL rank-1 {:.4} mAP {:.4}; TD {:.4}; full {:.4}",
            runs[0].rank1, runs[0].map, runs[1].rank1, runs[2].rank1
        ));
    }
    let [ssl, td, full] = sums.map(|s| s / 5.0);
    Verdict {
        pass: floor_ok && ssl >= td && td >= full,
        detail: format!(
            "TD+SSL rank-1 >= 0.95 and mAP >= 0.90 on every seed: {floor_ok} (mean mAP {:.4}); mean rank-1 TD+SSL {ssl:.4} >= TD {td:.4} >= full {full:.4}",
            maps / 5.0
        ),
        notes,
    }
}

fn ac8() -> Verdict {
    let mut mismatches = 0;
    for case in 0..500u64 {
        let mut r = rng(80_000 + case);
        let n_gallery = r.random_range(1..=10);
        let n_query = r.random_range(1..=6);
        let classes = r.random_range(1..=4usize);
        let dim = r.random_range(1..=3);
        // integer grid so that distance ties occur
        let point = |r: &mut rand_chacha::ChaCha8Rng| -> Vec<f64> { (0..dim).map(|_| f64::from(r.random_range(-2..=2))).collect() };
        let gallery: Vec<Vec<f64>> = (0..n_gallery).map(|_| point(&mut r)).collect();
        let gl: Vec<usize> = (0..n_gallery).map(|_| r.random_range(0..classes)).collect();
        let queries: Vec<Vec<f64>> = (0..n_query).map(|_| point(&mut r)).collect();
        let ql: Vec<usize> = (0..n_query).map(|_| gl[r.random_range(0..n_gallery)]).collect();
        let rankings = oracle_retrieval(&queries, &gallery);
        let curve = cmc(&queries, &ql, &gallery, &gl, n_gallery).unwrap();
        let map = mean_average_precision(&queries, &ql, &gallery, &gl).unwrap();
        if curve != oracle_cmc(&rankings, &ql, &gl, n_gallery) || map != oracle_map(&rankings, &ql, &gl) {
            mismatches += 1;
        }
        let genuine: Vec<f64> = (0..r.random_range(1..=8)).map(|_| f64::from(r.random_range(-4..=4))).collect();
        let imposter: Vec<f64> = (0..r.random_range(1..=8)).map(|_| f64::from(r.random_range(-4..=4))).collect();
        let fast: Vec<(f64, f64)> = roc(&genuine, &imposter).unwrap().iter().map(|p| (p.fpr, p.tpr)).collect();
        if fast != oracle_roc(&genuine, &imposter) {
            mismatches += 1;
        }
    }
    Verdict::new(mismatches == 0, format!("500 cases (CMC, mAP, ROC) compared for exact equality: {mismatches} mismatches"))
}

fn cli(args: &[&str]) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_tensorfuse"))
        .args(args)
        .output()
        .unwrap()
        .status
        .code()
        .unwrap_or(-1)
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn ac9() -> Verdict {
    let mut failures = Vec::new();
    let data = acceptance_data(4);
    let cfg = TrainConfig { seed: 4, ..TrainConfig::default() };
    let a = train(&data.gallery().unwrap(), &cfg).unwrap();
    let b = train(&data.gallery().unwrap(), &cfg).unwrap();
    if encode_checkpoint(&a.model) != encode_checkpoint(&b.model) || metrics_csv(&a.history) != metrics_csv(&b.history) {
        failures.push("training is not bit-reproducible".to_string());
    }

    let mut r = rng(90_000);
    let t = random_tensor(&mut r, [3, 4, 5]);
    let f = random_factors(&mut r, [5, 4, 3], [2, 3, 2]);
    let full = random_model(&mut r, false);
    let round_trips = [
        decode_tensor(&encode_tensor(&t)).map(|x| encode_tensor(&x) == encode_tensor(&t) && x == t),
        decode_factors(&encode_factors(&f)).map(|x| encode_factors(&x) == encode_factors(&f) && x == f),
        decode_checkpoint(&encode_checkpoint(&a.model)).map(|x| encode_checkpoint(&x) == encode_checkpoint(&a.model)),
        decode_checkpoint(&encode_checkpoint(&full)).map(|x| x == full),
        decode_dataset(&encode_dataset(&data)).map(|x| encode_dataset(&x) == encode_dataset(&data) && x == data),
    ];
    for (name, ok) in ["tensor", "factors", "checkpoint", "full checkpoint", "dataset"].iter().zip(round_trips) {
        if !matches!(ok, Ok(true)) {
            failures.push(format!("{name} round trip"));
        }
    }

    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let small = generate_synthetic(&SyntheticConfig { per_class: 6, ..SyntheticConfig::acceptance(5) }).unwrap();
    save_dataset(&small, d.join("data.atrd")).unwrap();
    save_tensor(&t, d.join("t.tns3")).unwrap();
    save_factors(&f, d.join("f.tuck")).unwrap();
    save_checkpoint(&a.model, d.join("m.tfck")).unwrap();
    let truncate = |name: &str, keep: usize| {
        let bytes = std::fs::read(d.join(name)).unwrap();
        let bad = d.join(format!("bad_{name}"));
        std::fs::write(&bad, &bytes[..keep.min(bytes.len() - 1)]).unwrap();
        bad
    };
    let bad_data = truncate("data.atrd", 100);
    let bad_tensor = truncate("t.tns3", 30);
    let bad_model = truncate("m.tfck", 200);
    let mut flipped = std::fs::read(d.join("m.tfck")).unwrap();
    flipped[0] = b'X';
    let bad_magic = d.join("magic.tfck");
    std::fs::write(&bad_magic, flipped).unwrap();
    let out = d.join("out");
    let report = d.join("report");
    let (data_file, tensor_file) = (d.join("data.atrd"), d.join("t.tns3"));
    let cases: Vec<(&str, Vec<&str>, i32)> = vec![
        ("truncated dataset", vec!["train", "--data", path(&bad_data), "-o", path(&out)], 3),
        ("truncated tensor", vec!["decompose", "--tensor-in", path(&bad_tensor), "--ranks", "1,1,1", "-o", path(&out)], 3),
        ("truncated checkpoint", vec!["bench", "--model", path(&bad_model)], 3),
        ("bad magic", vec!["eval", "--model", path(&bad_magic), "--data", path(&data_file), "--report-dir", path(&report)], 3),
        ("zero rank", vec!["decompose", "--tensor-in", path(&tensor_file), "--ranks", "0,1,1", "-o", path(&out)], 2),
        ("negative learning rate", vec!["train", "--data", path(&data_file), "--lr", "-0.1", "-o", path(&out)], 2),
        (
            "diverging learning rate",
            vec![
                "train", "--data", path(&data_file), "--ranks", "4,4,4", "--identity-dim", "6", "--attr-dim", "4",
                "--lr", "1e300", "--epochs", "3", "-o", path(&out),
            ],
            4,
        ),
    ];
    for (name, args, want) in cases {
        let got = cli(&args);
        if got != want {
            failures.push(format!("{name}: exit {got}, expected {want}"));
        }
    }
    Verdict::new(
        failures.is_empty(),
        if failures.is_empty() {
            "bit-identical checkpoint and metrics for equal seeds; 5 formats round-trip; 7 corrupted/invalid CLI inputs give exit codes 2/3/4".to_string()
        } else {
            failures.join("; ")
        },
    )
}

fn main() {
    let criteria: [(&str, &str, fn() -> Verdict, Option<u64>); 9] = [
        ("AC1", "multilinear algebra", ac1, Some(5)),
        ("AC2", "Tucker decomposition", ac2, Some(30)),
        ("AC3", "factored/full equivalence", ac3, None),
        ("AC4", "analytic gradients", ac4, None),
        ("AC5", "slice sparsity at the shipped lambda2", ac5, Some(300)),
        ("AC6", "compaction and speedup", ac6, None),
        ("AC7", "end-to-end training and ablation order", ac7, Some(600)),
        ("AC8", "retrieval metrics against oracles", ac8, None),
        ("AC9", "reproducibility and file formats", ac9, None),
    ];
    let mut failed = Vec::new();
    for (id, title, check, budget) in criteria {
        let start = Instant::now();
        let verdict = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|_| Verdict::new(false, "panicked"));
        let elapsed = start.elapsed();
        let in_budget = budget.is_none_or(|b| elapsed <= Duration::from_secs(b));
        let pass = verdict.pass && in_budget;
        let limit = budget.map_or(String::new(), |b| format!(", budget {b}s"));
        println!(
            "{id} {} {title}: {} [{:.1}s{limit}]",
            if pass { "PASS" } else { "FAIL" },
            verdict.detail,
            elapsed.as_secs_f64(),
        );
        for n in &verdict.notes {
            println!("    {n}");
        }
        if !pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria pass");
    } else {
        println!("acceptance: failing {}", failed.join(", "));
        if std::env::var_os("ACCEPTANCE_STRICT").is_some_and(|v| v == "1") {
            std::process::exit(1);
        }
    }
}
