//! Error growth under sample-position jitter and under a delay between
//! the frame that plans the mask and the frame that is measured.

use adaptive_depth::harness::{
    gen_scenes, gen_sequence, jitter_experiment, temporal_experiment, ExperimentConfig,
    SamplingMethod, SceneKind,
};
use adaptive_depth::reconstruct::ReconstructorKind;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ExperimentConfig {
        rates: vec![0.0025],
        samplers: vec![SamplingMethod::Sps, SamplingMethod::Random],
        reconstructors: vec![ReconstructorKind::Colorization],
        ..ExperimentConfig::default()
    };

    let scenes = gen_scenes(SceneKind::PiecewiseConstant, 4, 120, 160, 2)?;
    let jitter = jitter_experiment(&scenes, &[0.0, 3.0, 7.0, 15.0], &cfg)?;
    print!("{}", jitter.to_csv());

    let frames = gen_sequence(SceneKind::PiecewiseConstant, 120, 160, 2, 12, 2.0)?;
    let delay = temporal_experiment(&frames, &[0, 1, 2, 3, 4, 5], &cfg)?;
    print!("{}", delay.to_csv());
    Ok(())
}
