//! Prunes a trained core by zeroing slices, compacts the model and
//! measures the forward-pass speedup.
//!
//! cargo run --release --example sparsity_speedup -- [lambda2]

use tensorfuse::harness::generate_synthetic;
use tensorfuse::pipeline::{bench_forward, compact, sparsity_report, train};
use tensorfuse::tensor::relative_error;
use tensorfuse::{Mode, SyntheticConfig, TrainConfig, Weights};

fn main() -> tensorfuse::Result<()> {
    let lambda2: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1.0);
    let data = generate_synthetic(&SyntheticConfig::acceptance(1))?;
    let mut cfg = TrainConfig { seed: 1, ..TrainConfig::default() };
    cfg.weights.lambda2 = lambda2;
    let mut model = train(&data.gallery()?, &cfg)?.model;

    let report = sparsity_report(&model, 0.0)?;
    println!("lambda2 {lambda2}: zero slices after training {:?}", report.zero_pct);

    // prune the weakest quarter of the slices in each mode by hand so the
    // compaction path has something to remove
    if let Weights::Factored(tf) = &mut model.weights {
        for mode in Mode::ALL {
            let norms = tf.core.slice_norms(mode);
            let mut order: Vec<usize> = (0..norms.len()).collect();
            order.sort_by(|&a, &b| norms[a].total_cmp(&norms[b]));
            for &i in order.iter().take(norms.len() / 4) {
                tf.core.zero_slice(mode, i);
            }
        }
    }
    let report = sparsity_report(&model, 0.0)?;
    println!("after pruning: {:?} ({:.1}% mean)", report.zero_pct, report.mean_zero_pct());

    let (small, kept) = compact(&model)?;
    let x: Vec<f64> = data.samples()[0].x.iter().map(|&v| f64::from(v)).collect();
    let before = model.logits(&model.encode(&x)?)?;
    let after = small.logits(&small.encode(&x)?)?;
    println!("kept slices per mode: {:?}", kept.map(|k| k.len()));
    println!("compaction changes logits by {:e}", relative_error(&before, &after));

    let bench = bench_forward(&model, 2000, 15, 0)?;
    print!("{}", bench.to_csv());
    Ok(())
}
