//! Soft sampling: depth at a continuous location as a temperature-scaled
//! Gaussian-softmax average of a pixel window, with analytic gradients
//! with respect to the location.
//!
//! For a location `l` and window pixels `w_i` with depths `d_i`:
//!
//! ```text
//! k_i = exp(-|l - w_i|^2 / t^2) / sum_j exp(-|l - w_j|^2 / t^2)
//! d   = sum_i k_i d_i
//! dd/dl = -(2 / t^2) * sum_i k_i (d_i - d) (l - w_i)
//! ```
//!
//! As `t -> 0` the weights collapse onto the nearest pixel, which is what
//! [`hard_sample`] returns directly. The window is centered on the nearest
//! pixel and clipped at the image border; invalid pixels are left out and
//! the remaining weights renormalized.

use crate::imagedata::{DepthMap, Location, SampleSet};

pub const DEFAULT_WINDOW: usize = 5;

#[derive(Debug, thiserror::Error)]
pub enum SsaError {
    #[error("invalid soft-sampling parameter: {0}")]
    Parameter(String),
    #[error("no valid depth around ({x}, {y})")]
    NoValidDepth { x: f64, y: f64 },
    #[error("refinement diverged at step {step}")]
    Diverged { step: usize, last_stable: SampleSet },
}

/// Linear temperature annealing from `t_start` to `t_end` over `steps`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Schedule {
    pub t_start: f64,
    pub t_end: f64,
    pub steps: usize,
}

impl Default for Schedule {
    fn default() -> Self {
        Self {
            t_start: 1.0,
            t_end: 0.1,
            steps: 100,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SsaConfig {
    /// Odd side length of the square window.
    pub window: usize,
    pub temperature: f64,
    pub schedule: Schedule,
}

impl Default for SsaConfig {
    fn default() -> Self {
        Self {
            window: DEFAULT_WINDOW,
            temperature: 1.0,
            schedule: Schedule::default(),
        }
    }
}

impl SsaConfig {
    pub fn with_temperature(mut self, t: f64) -> Self {
        self.temperature = t;
        self
    }

    pub fn validate(&self) -> Result<(), SsaError> {
        if self.window < 3 || self.window.is_multiple_of(2) {
            return Err(SsaError::Parameter(format!(
                "window must be odd and >= 3, got {}",
                self.window
            )));
        }
        if !(self.temperature > 0.0) {
            return Err(SsaError::Parameter(format!(
                "temperature must be positive, got {}",
                self.temperature
            )));
        }
        let s = self.schedule;
        if !(s.t_end > 0.0 && s.t_start >= s.t_end) {
            return Err(SsaError::Parameter(format!(
                "schedule needs t_start >= t_end > 0, got {} -> {}",
                s.t_start, s.t_end
            )));
        }
        Ok(())
    }
}

/// A differentiable depth reading.
#[derive(Clone, Debug, PartialEq)]
pub struct SoftSample {
    pub value: f64,
    /// `(pixel index, weight)` for every pixel that contributed.
    pub weights: Vec<(usize, f64)>,
    /// `[dd/dx, dd/dy]`.
    pub gradient: [f64; 2],
}

/// Softmax weights of `-rho_i^2 / t^2`, stabilized by subtracting the
/// largest exponent.
pub fn ssa_weights(loc: Location, window: &[Location], t: f64) -> Vec<f64> {
    let t2 = t * t;
    let exponents: Vec<f64> = window.iter().map(|w| -loc.distance_sq(w) / t2).collect();
    let max = exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut k: Vec<f64> = exponents.iter().map(|e| (e - max).exp()).collect();
    let total: f64 = k.iter().sum();
    for v in &mut k {
        *v /= total;
    }
    k
}

fn check_location(depth: &DepthMap, loc: Location) -> Result<(), SsaError> {
    if !loc.in_bounds(depth.width(), depth.height()) {
        return Err(SsaError::Parameter(format!(
            "location ({}, {}) outside {}x{} map",
            loc.x,
            loc.y,
            depth.width(),
            depth.height()
        )));
    }
    Ok(())
}

/// Valid pixels of the clipped window around the nearest pixel, scan order.
fn window_pixels(depth: &DepthMap, loc: Location, window: usize) -> Vec<(usize, Location, f64)> {
    let (cx, cy) = loc.nearest_pixel();
    let half = window / 2;
    let (w, h) = (depth.width(), depth.height());
    let mut out = Vec::with_capacity(window * window);
    for y in cy.saturating_sub(half)..(cy + half + 1).min(h) {
        for x in cx.saturating_sub(half)..(cx + half + 1).min(w) {
            if depth.is_valid(x, y) {
                out.push((
                    y * w + x,
                    Location::new(x as f64, y as f64),
                    depth.get(x, y),
                ));
            }
        }
    }
    out
}

/// Soft depth reading at `loc` with temperature `cfg.temperature`.
pub fn ssa_sample(
    depth: &DepthMap,
    loc: Location,
    cfg: &SsaConfig,
) -> Result<SoftSample, SsaError> {
    cfg.validate()?;
    check_location(depth, loc)?;
    let pixels = window_pixels(depth, loc, cfg.window);
    if pixels.is_empty() {
        return Err(SsaError::NoValidDepth { x: loc.x, y: loc.y });
    }
    let positions: Vec<Location> = pixels.iter().map(|p| p.1).collect();
    let k = ssa_weights(loc, &positions, cfg.temperature);
    // Offsets from one window depth keep flat windows exactly flat.
    let base = pixels[0].2;
    let value = base
        + k.iter()
            .zip(&pixels)
            .map(|(ki, p)| ki * (p.2 - base))
            .sum::<f64>();
    let scale = -2.0 / (cfg.temperature * cfg.temperature);
    let mut gradient = [0.0; 2];
    for (ki, p) in k.iter().zip(&pixels) {
        let c = ki * (p.2 - value);
        gradient[0] += c * (loc.x - p.1.x);
        gradient[1] += c * (loc.y - p.1.y);
    }
    gradient[0] *= scale;
    gradient[1] *= scale;
    Ok(SoftSample {
        value,
        weights: pixels.iter().map(|p| p.0).zip(k).collect(),
        gradient,
    })
}

/// 2x2 bilinear interpolation with its piecewise-constant gradient.
pub fn bilinear_sample(depth: &DepthMap, loc: Location) -> Result<SoftSample, SsaError> {
    check_location(depth, loc)?;
    let (w, h) = (depth.width(), depth.height());
    let x0 = (loc.x.floor() as usize).min(w.saturating_sub(2));
    let y0 = (loc.y.floor() as usize).min(h.saturating_sub(2));
    let x1 = (x0 + 1).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    let fx = loc.x - x0 as f64;
    let fy = loc.y - y0 as f64;

    // (pixel, weight, dweight/dx, dweight/dy)
    let corners = [
        ((x0, y0), (1.0 - fx) * (1.0 - fy), -(1.0 - fy), -(1.0 - fx)),
        ((x1, y0), fx * (1.0 - fy), 1.0 - fy, -fx),
        ((x0, y1), (1.0 - fx) * fy, -fy, 1.0 - fx),
        ((x1, y1), fx * fy, fy, fx),
    ];
    let valid: Vec<_> = corners
        .iter()
        .filter(|((x, y), ..)| depth.is_valid(*x, *y))
        .copied()
        .collect();
    if valid.is_empty() {
        return Err(SsaError::NoValidDepth { x: loc.x, y: loc.y });
    }
    let total: f64 = valid.iter().map(|c| c.1).sum();
    if total <= 0.0 {
        // The location sits on an invalid pixel whose valid neighbors carry
        // zero weight; fall back to their plain mean.
        let value = valid
            .iter()
            .map(|((x, y), ..)| depth.get(*x, *y))
            .sum::<f64>()
            / valid.len() as f64;
        return Ok(SoftSample {
            value,
            weights: valid
                .iter()
                .map(|((x, y), ..)| (y * w + x, 1.0 / valid.len() as f64))
                .collect(),
            gradient: [0.0; 2],
        });
    }
    let num: f64 = valid
        .iter()
        .map(|((x, y), k, ..)| k * depth.get(*x, *y))
        .sum();
    let dnum_dx: f64 = valid
        .iter()
        .map(|((x, y), _, gx, _)| gx * depth.get(*x, *y))
        .sum();
    let dnum_dy: f64 = valid
        .iter()
        .map(|((x, y), _, _, gy)| gy * depth.get(*x, *y))
        .sum();
    let dden_dx: f64 = valid.iter().map(|c| c.2).sum();
    let dden_dy: f64 = valid.iter().map(|c| c.3).sum();
    let value = num / total;

    // Corners that coincide on one-pixel-wide maps would be counted twice.
    let mut weights: Vec<(usize, f64)> = Vec::with_capacity(4);
    for ((x, y), k, ..) in &valid {
        let i = y * w + x;
        match weights.iter_mut().find(|e| e.0 == i) {
            Some(e) => e.1 += k / total,
            None => weights.push((i, k / total)),
        }
    }
    let gx = if x1 == x0 {
        0.0
    } else {
        (dnum_dx - value * dden_dx) / total
    };
    let gy = if y1 == y0 {
        0.0
    } else {
        (dnum_dy - value * dden_dy) / total
    };
    Ok(SoftSample {
        value,
        weights,
        gradient: [gx, gy],
    })
}

/// Test-time reading at the nearest pixel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HardSample {
    pub x: usize,
    pub y: usize,
    pub depth: f64,
}

/// Depth at the nearest pixel (halves round toward the smaller index). If
/// that pixel is invalid, the closest valid pixel in the default window is
/// used instead, ties going to the earlier pixel in scan order.
pub fn hard_sample(depth: &DepthMap, loc: Location) -> Result<HardSample, SsaError> {
    check_location(depth, loc)?;
    let (x, y) = loc.nearest_pixel();
    if depth.is_valid(x, y) {
        return Ok(HardSample {
            x,
            y,
            depth: depth.get(x, y),
        });
    }
    window_pixels(depth, loc, DEFAULT_WINDOW)
        .into_iter()
        .min_by(|a, b| {
            loc.distance_sq(&a.1)
                .total_cmp(&loc.distance_sq(&b.1))
                .then(a.0.cmp(&b.0))
        })
        .map(|(_, p, d)| HardSample {
            x: p.x as usize,
            y: p.y as usize,
            depth: d,
        })
        .ok_or(SsaError::NoValidDepth { x: loc.x, y: loc.y })
}

/// Temperature at `step`, linear from `t_start` (step 0) to `t_end`
/// (step `steps`). Steps past the end hold `t_end`.
pub fn temperature(step: usize, schedule: &Schedule) -> f64 {
    if schedule.steps == 0 {
        return schedule.t_end;
    }
    let frac = step.min(schedule.steps) as f64 / schedule.steps as f64;
    schedule.t_start + (schedule.t_end - schedule.t_start) * frac
}

/// Outcome of [`refine_locations`].
#[derive(Clone, Debug, PartialEq)]
pub struct Refinement {
    pub samples: SampleSet,
    /// Objective value after each step.
    pub losses: Vec<f64>,
}

/// Gradient descent on `sum_s (d_s(l_s) - target_s)^2` through the soft
/// sampler, annealing the temperature over `steps` and clipping locations
/// to the image after every update.
///
/// Fails with [`SsaError::Diverged`] once the objective has risen for ten
/// consecutive steps; the error carries the locations from before the rise.
pub fn refine_locations(
    depth: &DepthMap,
    samples: &SampleSet,
    targets: &[f64],
    cfg: &SsaConfig,
    lr: f64,
    steps: usize,
) -> Result<Refinement, SsaError> {
    cfg.validate()?;
    if !(lr > 0.0) {
        return Err(SsaError::Parameter(format!(
            "learning rate must be positive, got {lr}"
        )));
    }
    if targets.len() != samples.len() {
        return Err(SsaError::Parameter(format!(
            "{} targets for {} samples",
            targets.len(),
            samples.len()
        )));
    }
    let schedule = Schedule {
        steps,
        ..cfg.schedule
    };
    let (w, h) = (depth.width(), depth.height());
    let mut locs: Vec<Location> = samples.locations().to_vec();
    let mut losses = Vec::with_capacity(steps);
    let mut stable = locs.clone();
    let mut rising = 0usize;

    for step in 0..steps {
        let step_cfg = cfg.with_temperature(temperature(step, &schedule));
        let mut loss = 0.0;
        let mut next = Vec::with_capacity(locs.len());
        for (l, &target) in locs.iter().zip(targets) {
            let s = ssa_sample(depth, *l, &step_cfg)?;
            let r = s.value - target;
            loss += r * r;
            let moved = Location::new(
                l.x - lr * 2.0 * r * s.gradient[0],
                l.y - lr * 2.0 * r * s.gradient[1],
            );
            next.push(moved.clamped(w, h));
        }
        match losses.last() {
            Some(&prev) if loss > prev => {
                rising += 1;
                if rising >= 10 {
                    return Err(SsaError::Diverged {
                        step,
                        last_stable: SampleSet::new_unchecked(stable),
                    });
                }
            }
            _ => {
                rising = 0;
                stable = locs.clone();
            }
        }
        losses.push(loss);
        locs = next;
    }
    Ok(Refinement {
        samples: SampleSet::new_unchecked(locs),
        losses,
    })
}
