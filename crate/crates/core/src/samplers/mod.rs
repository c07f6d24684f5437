//! Baseline sampling masks, continuous-to-discrete sample placement and
//! mask application.
//!
//! All mask constructors take dimensions as `(height, width)` and return
//! exactly the requested number of samples.

mod placement;
mod poisson;

use std::fmt;
use std::str::FromStr;

use rand::seq::index;

use crate::imagedata::{DepthMap, ImageError, SamplingMask};
use crate::rng;

pub use placement::{locations_to_mask, ring_offsets};
pub use poisson::{poisson_mask, PoissonDisk};

#[derive(Debug, thiserror::Error)]
pub enum SamplerError {
    #[error("invalid sampler parameter: {0}")]
    Parameter(String),
    #[error("cannot place {requested} samples in {capacity} pixels")]
    Capacity { requested: usize, capacity: usize },
    #[error(transparent)]
    Image(#[from] ImageError),
}

/// Content-independent baselines.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SamplerKind {
    Random,
    Grid,
    Poisson,
}

impl SamplerKind {
    pub fn name(self) -> &'static str {
        match self {
            SamplerKind::Random => "random",
            SamplerKind::Grid => "grid",
            SamplerKind::Poisson => "poisson",
        }
    }
}

impl fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for SamplerKind {
    type Err = SamplerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random" => Ok(SamplerKind::Random),
            "grid" => Ok(SamplerKind::Grid),
            "poisson" => Ok(SamplerKind::Poisson),
            other => Err(SamplerError::Parameter(format!(
                "unknown sampler {other:?}"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplerConfig {
    pub rate: f64,
    pub seed: u64,
    pub kind: SamplerKind,
}

impl SamplerConfig {
    pub fn build(&self, height: usize, width: usize) -> Result<SamplingMask, SamplerError> {
        let n = target_count(self.rate, height, width)?;
        match self.kind {
            SamplerKind::Random => random_mask(height, width, n, self.seed),
            SamplerKind::Grid => grid_mask(height, width, n),
            SamplerKind::Poisson => poisson_mask(height, width, n, self.seed).map(|p| p.mask),
        }
    }
}

/// Sample budget `round(c * H * W)`, clamped to `[1, H * W]`.
pub fn target_count(rate: f64, height: usize, width: usize) -> Result<usize, SamplerError> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(SamplerError::Parameter(format!(
            "sampling rate must lie in (0, 1], got {rate}"
        )));
    }
    let pixels = height * width;
    if pixels == 0 {
        return Err(SamplerError::Parameter("empty image".into()));
    }
    let n = (rate * pixels as f64).round() as usize;
    Ok(n.clamp(1, pixels))
}

fn check_capacity(height: usize, width: usize, n: usize) -> Result<(), SamplerError> {
    if height == 0 || width == 0 {
        return Err(SamplerError::Parameter("empty image".into()));
    }
    if n > height * width {
        return Err(SamplerError::Capacity {
            requested: n,
            capacity: height * width,
        });
    }
    Ok(())
}

/// `n` distinct pixels drawn uniformly without replacement.
pub fn random_mask(
    height: usize,
    width: usize,
    n: usize,
    seed: u64,
) -> Result<SamplingMask, SamplerError> {
    check_capacity(height, width, n)?;
    let mut rng = rng::seeded(seed);
    let picks = index::sample(&mut rng, height * width, n);
    Ok(SamplingMask::from_indices(width, height, picks)?)
}

/// Lattice shape `(rows, cols)` used by [`grid_mask`].
pub fn grid_shape(height: usize, width: usize, n: usize) -> (usize, usize) {
    let rows = ((n as f64 * height as f64 / width as f64).sqrt().round() as usize).clamp(1, height);
    let mut cols = n.div_ceil(rows);
    let mut rows = rows;
    if cols > width {
        cols = width;
        rows = n.div_ceil(width);
    }
    (rows, cols)
}

/// Regular lattice with half-step margins, trimmed in scan order to `n`.
pub fn grid_mask(height: usize, width: usize, n: usize) -> Result<SamplingMask, SamplerError> {
    check_capacity(height, width, n)?;
    let (rows, cols) = grid_shape(height, width, n);
    let step_y = height as f64 / rows as f64;
    let step_x = width as f64 / cols as f64;
    let points = (0..rows)
        .flat_map(|r| (0..cols).map(move |c| (r, c)))
        .take(n)
        .map(|(r, c)| {
            let y = ((r as f64 + 0.5) * step_y).floor() as usize;
            let x = ((c as f64 + 0.5) * step_x).floor() as usize;
            y.min(height - 1) * width + x.min(width - 1)
        });
    let mask = SamplingMask::from_indices(width, height, points)?;
    debug_assert_eq!(mask.count(), n);
    Ok(mask)
}

/// Sparse measurement `D ⊙ B`: a pixel is valid only where the mask is set
/// and the ground truth is valid.
pub fn apply_mask(depth: &DepthMap, mask: &SamplingMask) -> Result<DepthMap, SamplerError> {
    if depth.width() != mask.width() || depth.height() != mask.height() {
        return Err(SamplerError::Parameter(format!(
            "depth is {}x{} but mask is {}x{}",
            depth.width(),
            depth.height(),
            mask.width(),
            mask.height()
        )));
    }
    let valid: Vec<bool> = depth
        .validity()
        .iter()
        .zip(mask.bits())
        .map(|(&v, &b)| v && b)
        .collect();
    let values = depth
        .depths()
        .iter()
        .zip(&valid)
        .map(|(&d, &v)| if v { d } else { 0.0 })
        .collect();
    Ok(DepthMap::new(depth.width(), depth.height(), values, valid)?)
}
