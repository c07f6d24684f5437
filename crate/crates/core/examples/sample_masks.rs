//! Builds every kind of sampling mask for one synthetic scene and writes
//! them as PGM files.
//!
//! cargo run --example sample_masks -- [OUT_DIR]

use std::path::PathBuf;

use adaptive_depth::harness::{gen_scene, sample_mask, SamplingMethod, SceneKind};
use adaptive_depth::imagedata::{save_mask, save_ppm};
use adaptive_depth::samplers::{poisson_mask, target_count};
use adaptive_depth::superpixel::SlicParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("adaptive-depth-masks"));
    std::fs::create_dir_all(&out)?;

    let scene = gen_scene(SceneKind::PiecewiseConstant, 120, 160, 7)?.scene;
    save_ppm(&scene.rgb, out.join("scene_rgb.ppm"))?;
    let rate = 0.01;
    let n = target_count(rate, 120, 160)?;
    println!("budget at c={rate}: {n} samples");

    for method in SamplingMethod::ALL {
        let mask = sample_mask(
            method,
            &scene.rgb,
            Some(&scene.depth),
            rate,
            3,
            SlicParams::default(),
        )?;
        let path = out.join(format!("mask_{method}.pgm"));
        save_mask(&mask, &path)?;
        println!(
            "{method:>12}: {} samples -> {}",
            mask.count(),
            path.display()
        );
    }

    let disk = poisson_mask(120, 160, n, 3)?;
    println!("poisson-disk spacing radius: {:.2} px", disk.radius);
    Ok(())
}
