//! Generates the synthetic identity/attribute set, trains the sparse
//! factored model on its gallery split and evaluates retrieval on the
//! held-out queries.
//!
//! cargo run --release --example train_synthetic -- [seed]

use tensorfuse::harness::{evaluate_model, generate_synthetic};
use tensorfuse::pipeline::train;
use tensorfuse::{SyntheticConfig, TrainConfig};

fn main() -> tensorfuse::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let data = generate_synthetic(&SyntheticConfig::acceptance(seed))?;
    let cfg = TrainConfig { seed, ..TrainConfig::default() };
    let out = train(&data.gallery()?, &cfg)?;

    for r in out.history.iter().step_by(5) {
        println!(
            "epoch {:3}  loss {:9.4}  (ce {:.4})  train rank-1 {:.3}  zero slices {:?}",
            r.epoch, r.loss.total, r.loss.classification, r.train_rank1, r.zero_pct
        );
    }
    if out.stopped_early {
        println!("stopped early after {} epochs", out.history.len());
    }

    let report = evaluate_model(&out.model, &data)?;
    println!("query rank-1 {:.4}, rank-5 {:.4}, mAP {:.4}", report.rank1(), report.cmc[4], report.map);
    Ok(())
}
