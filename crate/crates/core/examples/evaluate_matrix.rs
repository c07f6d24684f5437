//! Sampler x reconstructor matrix on synthetic piecewise-constant scenes,
//! printed as the CSV report.

use adaptive_depth::harness::{
    gen_scenes, run_matrix, ExperimentConfig, SamplingMethod, SceneKind,
};
use adaptive_depth::reconstruct::ReconstructorKind;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scenes = gen_scenes(SceneKind::PiecewiseConstant, 5, 120, 160, 1)?;
    let cfg = ExperimentConfig {
        rates: vec![0.01, 0.0025],
        samplers: vec![
            SamplingMethod::Random,
            SamplingMethod::Grid,
            SamplingMethod::Poisson,
            SamplingMethod::Sps,
        ],
        reconstructors: vec![ReconstructorKind::Colorization, ReconstructorKind::Nearest],
        seeds: vec![0, 1],
        ..ExperimentConfig::default()
    };
    let report = run_matrix(&cfg, &scenes)?;
    print!("{}", report.to_csv());
    eprintln!(
        "{} cells, {} failed",
        report.rows.len(),
        report.failures().count()
    );
    Ok(())
}
