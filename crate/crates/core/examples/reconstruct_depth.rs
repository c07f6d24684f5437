//! Dense depth from RGB plus superpixel-placed samples with each
//! reconstructor.

use adaptive_depth::harness::{error_stats, gen_scene, sample_mask, SamplingMethod, SceneKind};
use adaptive_depth::imagedata::rgb_to_lab;
use adaptive_depth::reconstruct::{reconstruct, ReconstructParams, ReconstructorKind};
use adaptive_depth::samplers::apply_mask;
use adaptive_depth::superpixel::SlicParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for kind in [
        SceneKind::StepEdge,
        SceneKind::PlanarRamp,
        SceneKind::Textured,
    ] {
        let scene = gen_scene(kind, 96, 128, 5)?.scene;
        let lab = rgb_to_lab(&scene.rgb);
        let mask = sample_mask(
            SamplingMethod::Sps,
            &scene.rgb,
            None,
            0.005,
            0,
            SlicParams::default(),
        )?;
        let sparse = apply_mask(&scene.depth, &mask)?;
        println!("{kind} scene, {} samples:", mask.count());
        for recon in ReconstructorKind::ALL {
            let r = reconstruct(recon, &lab, &sparse, &ReconstructParams::default())?;
            let e = error_stats(&r.depth, &scene.depth)?;
            println!(
                "  {recon:>12}: mae {:8.2} mm  rmse {:8.2} mm  ({} iterations)",
                e.mae, e.rmse, r.iterations
            );
        }
    }
    Ok(())
}
