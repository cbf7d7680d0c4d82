//! Baseline (full tensor), TD, SSL and TD+SSL variants over a few seeds.
//!
//! cargo run --release --example ablation -- [n_seeds]

use tensorfuse::harness::{evaluate_model, generate_synthetic};
use tensorfuse::pipeline::train;
use tensorfuse::{SyntheticConfig, TrainConfig};

fn main() -> tensorfuse::Result<()> {
    let n: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let variants = [("baseline", false, false), ("SSL", false, true), ("TD", true, false), ("TD+SSL", true, true)];
    println!("{:<10} {:>8} {:>8} {:>8}", "variant", "rank-1", "mAP", "train");
    for (name, use_td, use_ssl) in variants {
        let (mut r1, mut map, mut acc) = (0.0, 0.0, 0.0);
        for seed in 1..=n {
            let data = generate_synthetic(&SyntheticConfig::acceptance(seed))?;
            let cfg = TrainConfig { seed, use_td, use_ssl, ..TrainConfig::default() };
            let out = train(&data.gallery()?, &cfg)?;
            let report = evaluate_model(&out.model, &data)?;
            r1 += report.rank1();
            map += report.map;
            acc += out.history.last().map_or(0.0, |r| r.train_rank1);
        }
        let k = n as f64;
        println!("{name:<10} {:>8.4} {:>8.4} {:>8.4}", r1 / k, map / k, acc / k);
    }
    Ok(())
}
