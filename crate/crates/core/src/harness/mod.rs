//! Evaluation: metrics, synthetic scenes, experiment matrices, robustness
//! sweeps and reports.

pub mod config;
mod dataset;
mod experiment;
mod gradcheck;
mod metrics;
mod report;
mod scene;

use std::path::PathBuf;

use crate::imagedata::ImageError;
use crate::reconstruct::ReconstructError;
use crate::samplers::SamplerError;
use crate::ssa::SsaError;
use crate::superpixel::SuperpixelError;

pub use dataset::{load_dataset, save_dataset};
pub use experiment::{
    jitter_experiment, jitter_mask, run_matrix, sample_mask, temporal_experiment, ExperimentConfig,
    Perturbation, SamplingMethod,
};
pub use gradcheck::{gradient_check, GradCheckReport};
pub use metrics::{error_stats, mae, rmse, ErrorStats};
pub use report::{AggregateRow, CellResult, EvalReport, PerturbationCurve, CSV_HEADER};
pub use scene::{
    gen_scene, gen_scenes, gen_sequence, RampCoefficients, Scene, SceneKind, SyntheticScene,
};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("dataset: {0}")]
    Dataset(String),
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error(transparent)]
    Superpixel(#[from] SuperpixelError),
    #[error(transparent)]
    Ssa(#[from] SsaError),
    #[error(transparent)]
    Reconstruct(#[from] ReconstructError),
}
