use std::time::Instant;

use rand::Rng;

use super::HarnessError;
use crate::imagedata::{DepthMap, Location};
use crate::rng;
use crate::ssa::{ssa_sample, SsaConfig};

const STEP: f64 = 1e-4;
/// Guards the relative error against an exactly zero gradient.
const GRADIENT_FLOOR: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradCheckReport {
    pub cases: usize,
    pub max_rel_error: f64,
    pub elapsed_ms: f64,
}

fn near_seam(v: f64) -> bool {
    let frac = v - v.floor();
    (frac - 0.5).abs() < 1e-3
}

/// Compares the soft sampler's analytic location gradient with central
/// finite differences on `cases` random depth patches and locations.
///
/// Patches are `window + 2` pixels square with depths drawn from
/// [500, 5000] mm; temperatures come from `[t_min, t_max]`. Locations
/// within 1e-3 px of a rounding seam are redrawn, since the window jumps
/// there and the sampler is not differentiable across the jump. The error
/// is `|g - g_fd| / |g_fd|`.
pub fn gradient_check(
    cases: usize,
    window: usize,
    t_min: f64,
    t_max: f64,
    seed: u64,
) -> Result<GradCheckReport, HarnessError> {
    if !(t_min > 0.0 && t_max >= t_min) {
        return Err(HarnessError::Parameter(format!(
            "temperature range [{t_min}, {t_max}] is not positive"
        )));
    }
    let base = SsaConfig {
        window,
        ..SsaConfig::default()
    };
    base.validate()?;
    let clock = Instant::now();
    let mut rng = rng::seeded(seed);
    let side = window + 2;
    let mut worst: f64 = 0.0;

    for _ in 0..cases {
        let depths: Vec<f64> = (0..side * side)
            .map(|_| rng.gen_range(500.0..5000.0))
            .collect();
        let depth = DepthMap::dense(side, side, depths)?;
        let t = if t_max > t_min {
            rng.gen_range(t_min..=t_max)
        } else {
            t_min
        };
        let cfg = base.with_temperature(t);
        let hi = (side - 2) as f64;
        let loc = loop {
            let l = Location::new(rng.gen_range(1.0..hi), rng.gen_range(1.0..hi));
            if !near_seam(l.x) && !near_seam(l.y) {
                break l;
            }
        };
        let g = ssa_sample(&depth, loc, &cfg)?.gradient;
        let at = |x: f64, y: f64| ssa_sample(&depth, Location::new(x, y), &cfg).map(|s| s.value);
        let fd = [
            (at(loc.x + STEP, loc.y)? - at(loc.x - STEP, loc.y)?) / (2.0 * STEP),
            (at(loc.x, loc.y + STEP)? - at(loc.x, loc.y - STEP)?) / (2.0 * STEP),
        ];
        let diff = ((g[0] - fd[0]).powi(2) + (g[1] - fd[1]).powi(2)).sqrt();
        let scale = (fd[0] * fd[0] + fd[1] * fd[1]).sqrt().max(GRADIENT_FLOOR);
        worst = worst.max(diff / scale);
    }
    Ok(GradCheckReport {
        cases,
        max_rel_error: worst,
        elapsed_ms: clock.elapsed().as_secs_f64() * 1e3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_check_passes() {
        let r = gradient_check(50, 5, 0.2, 2.0, 1).unwrap();
        assert_eq!(r.cases, 50);
        assert!(r.max_rel_error < 1e-4, "{}", r.max_rel_error);
        assert!(gradient_check(1, 4, 0.2, 2.0, 1).is_err());
    }
}
