//! Identity/attribute feature fusion through a Tucker-factored weight
//! tensor, trained with a multi-task objective and a slice-wise group-lasso
//! penalty that prunes whole core slices.
//!
//! The crate is organised bottom-up:
//!
//! - [`tensor`]: dense matrices, order-3 tensors, mode products and unfoldings
//! - [`linalg`]: thin SVD
//! - [`tucker`]: HOSVD, HOOI and reconstruction
//! - [`fusion`]: encoders and the full or factored fusion classifier
//! - [`objective`]: losses, analytic gradients and the group-lasso prox
//! - [`pipeline`]: training, compaction and forward benchmarks
//! - [`harness`]: datasets, synthetic data and retrieval metrics
//! - [`formats`]: binary tensor, factor and checkpoint files
//! - [`oracles`]: slow reference implementations used by the tests

pub mod error;
pub mod formats;
pub mod fusion;
pub mod harness;
pub mod linalg;
pub mod objective;
pub mod oracles;
pub mod pipeline;
pub mod tensor;
pub mod tucker;

pub use error::{Error, Result};
pub use fusion::{Encoders, FeaturePair, ModelParams, ParamGroup, Weights};
pub use harness::{Dataset, Sample, SyntheticConfig};
pub use objective::{LossBreakdown, LossWeights};
pub use pipeline::{TrainConfig, TrainOutcome};
pub use tensor::{Matrix, Mode, Tensor3};
pub use tucker::TuckerFactors;
