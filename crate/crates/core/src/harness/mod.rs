//! Datasets, the synthetic planted-structure generator and retrieval
//! evaluation (CMC, mAP, ROC, score histograms).

mod dataset;
mod retrieval;
mod synthetic;

pub use dataset::{decode_dataset, encode_dataset, load_dataset, save_dataset, Dataset, DatasetHeader, Sample, Split, DATASET_MAGIC};
pub use retrieval::{
    cmc, evaluate_model, mean_average_precision, rank_gallery, roc, score_histogram, EvalReport,
    Histogram, RankedList, RocPoint, DEFAULT_HIST_BINS, DEFAULT_MAX_RANK,
};
pub use synthetic::{generate_synthetic, SyntheticConfig};
