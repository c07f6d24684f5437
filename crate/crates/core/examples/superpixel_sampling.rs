//! SLIC superpixels, soft association and superpixel-center sampling.

use adaptive_depth::harness::{gen_scene, SceneKind};
use adaptive_depth::imagedata::rgb_to_lab;
use adaptive_depth::superpixel::{
    centers, slic_init, slic_iterate, slic_loss, soft_association, sps_sample_detailed, SlicParams,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scene = gen_scene(SceneKind::PiecewiseConstant, 60, 80, 11)?.scene;
    let lab = rgb_to_lab(&scene.rgb);
    let m = 1.0;

    let init = slic_init(&lab, 48);
    for iters in [0, 1, 5, 10] {
        let seg = slic_iterate(&init, &lab, m, iters);
        let sizes = seg.sizes();
        let smallest = sizes.iter().min().copied().unwrap_or(0);
        let largest = sizes.iter().max().copied().unwrap_or(0);
        println!(
            "iters={iters:>2}: {} superpixels, sizes {smallest}..={largest}",
            seg.len()
        );
    }

    let seg = slic_iterate(&init, &lab, m, 10);
    for tau in [0.1, 1.0, 10.0] {
        let assoc = soft_association(&seg, &lab, m, tau)?;
        println!(
            "tau={tau:>4}: soft SLIC loss {:.1}",
            slic_loss(&assoc, &lab, m)
        );
    }
    let summary = centers(&soft_association(&seg, &lab, m, 1.0)?, &lab);
    let c = summary.locations[0];
    println!("superpixel 0 mass center: ({:.2}, {:.2})", c.x, c.y);

    let sps = sps_sample_detailed(&scene.rgb, 48, SlicParams::default())?;
    println!("sps placed {} samples; first five:", sps.samples.len());
    for l in sps.samples.iter().take(5) {
        println!("  ({:.2}, {:.2})", l.x, l.y);
    }
    Ok(())
}
