//! Two-perspective NNUE: feature encoding, inference, incrementally updated
//! accumulators and a from-scratch trainer.

mod accumulator;
mod features;
mod model;
mod train;

pub use accumulator::{nnue_evaluate, Accumulator};
pub use features::{encode_features, feature_index, FeatureDelta, FeatureSet, PLANES, STANDARD_INPUT_DIM};
pub use model::{clipped, load_model, logistic, save_model, ModelError, Network, NnueModel, HIDDEN};
pub use train::{
    batch_gradient, batch_loss, train, EpochLog, TrainConfig, TrainError, TrainSample, TrainedModel,
};

use crate::board::Centipawns;

/// Default centipawn scale of the win-probability mapping.
pub const DEFAULT_WDL_SCALE: f32 = 400.0;

/// Training target for a centipawn label: `logistic(cp / scale)`.
pub fn cp_to_wdl(cp: Centipawns, scale: f32) -> f32 {
    logistic(cp as f32 / scale)
}

/// Inverse of [`cp_to_wdl`], unrounded.
pub fn wdl_to_cp(p: f32, scale: f32) -> f32 {
    scale * (p / (1.0 - p)).ln()
}
