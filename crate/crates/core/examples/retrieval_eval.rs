//! CMC, mAP, ROC and score histograms on a hand-made embedding set, then
//! the same report written to disk for a trained model.

use tensorfuse::harness::{cmc, evaluate_model, generate_synthetic, mean_average_precision, roc, score_histogram};
use tensorfuse::pipeline::train;
use tensorfuse::{SyntheticConfig, TrainConfig};

fn main() -> tensorfuse::Result<()> {
    // two well separated clusters plus one ambiguous query
    let gallery = vec![vec![0.0, 0.0], vec![0.2, 0.1], vec![5.0, 5.0], vec![5.1, 4.8]];
    let gallery_labels = vec![0, 0, 1, 1];
    let queries = vec![vec![0.1, -0.1], vec![4.9, 5.2], vec![2.6, 2.5]];
    let query_labels = vec![0, 1, 0];

    let curve = cmc(&queries, &query_labels, &gallery, &gallery_labels, 4)?;
    let map = mean_average_precision(&queries, &query_labels, &gallery, &gallery_labels)?;
    println!("CMC {curve:?}");
    println!("mAP {map:.4}");

    let genuine = [-0.2, -0.3, -1.5, -0.1];
    let imposter = [-3.0, -1.2, -4.0, -2.5];
    for p in roc(&genuine, &imposter)? {
        println!("fpr {:.2} tpr {:.2}", p.fpr, p.tpr);
    }
    let h = score_histogram(&genuine, 3);
    println!("genuine histogram over [{}, {}]: {:?}", h.min, h.max, h.counts);

    let dir = std::env::temp_dir().join("tensorfuse_retrieval_example");
    let data = generate_synthetic(&SyntheticConfig::acceptance(1))?;
    let cfg = TrainConfig { epochs: 20, ..TrainConfig::default() };
    let model = train(&data.gallery()?, &cfg)?.model;
    evaluate_model(&model, &data)?.write_dir(&dir)?;
    println!("report files in {}", dir.display());
    Ok(())
}
