//! Soft sampling versus bilinear and nearest-pixel reads, plus gradient
//! descent on sample locations through the soft sampler.

use adaptive_depth::imagedata::{DepthMap, Location, SampleSet};
use adaptive_depth::ssa::{
    bilinear_sample, hard_sample, refine_locations, ssa_sample, Schedule, SsaConfig,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Depth rises 100 mm per pixel to the right.
    let depth = DepthMap::from_fn(11, 5, |x, _| 1000.0 + 100.0 * x as f64)?;
    let loc = Location::new(4.3, 2.0);

    println!("reading at ({}, {}):", loc.x, loc.y);
    println!("  nearest  {:.2}", hard_sample(&depth, loc)?.depth);
    println!("  bilinear {:.2}", bilinear_sample(&depth, loc)?.value);
    for t in [2.0, 1.0, 0.5, 0.1, 0.01] {
        let s = ssa_sample(&depth, loc, &SsaConfig::default().with_temperature(t))?;
        println!(
            "  soft t={t:<5} {:.2}  d/dx={:.2} d/dy={:.2}",
            s.value, s.gradient[0], s.gradient[1]
        );
    }

    let start = SampleSet::new(vec![Location::new(2.0, 2.0)], 11, 5)?;
    let cfg = SsaConfig {
        schedule: Schedule {
            t_start: 1.0,
            t_end: 0.3,
            steps: 200,
        },
        ..SsaConfig::default()
    };
    let refined = refine_locations(&depth, &start, &[1500.0], &cfg, 2e-5, 200)?;
    let l = refined.samples.locations()[0];
    println!(
        "refined (2, 2) toward 1500 mm: now ({:.3}, {:.3}), loss {:.3e} -> {:.3e}",
        l.x,
        l.y,
        refined.losses[0],
        refined.losses.last().copied().unwrap_or(0.0)
    );
    Ok(())
}
