//! Superpixel clustering and superpixel-center sampling.
//!
//! The sampler places one depth sample per superpixel, at the superpixel's
//! association-weighted mass center. Clustering is SLIC over CIELAB color
//! and pixel position with the spatial term normalized by the expected
//! superpixel spacing `S = sqrt(H * W / N)`, so the compactness weight `m`
//! means the same thing at every sampling rate.

mod slic;
mod soft;

use crate::imagedata::{rgb_to_lab, Location, RgbImage, SampleSet};

pub use slic::{
    enforce_connectivity, slic_distance, slic_init, slic_iterate, slic_step, Seed, SeedGrid,
    Segmentation,
};
pub use soft::{
    centers, slic_loss, soft_association, Association, SoftAssociation, SuperpixelSummary,
};

#[derive(Debug, thiserror::Error)]
pub enum SuperpixelError {
    #[error("invalid superpixel parameter: {0}")]
    Parameter(String),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlicParams {
    /// Color vs. spatial compactness weight.
    pub m: f64,
    pub iters: usize,
}

impl Default for SlicParams {
    fn default() -> Self {
        Self { m: 1.0, iters: 10 }
    }
}

/// Sample locations together with the segmentation that produced them.
#[derive(Clone, Debug)]
pub struct SpsSampling {
    pub samples: SampleSet,
    pub segmentation: Segmentation,
}

/// One sample per superpixel at its center of mass.
pub fn sps_sample(
    img: &RgbImage,
    n: usize,
    params: SlicParams,
) -> Result<SampleSet, SuperpixelError> {
    sps_sample_detailed(img, n, params).map(|s| s.samples)
}

/// Like [`sps_sample`], also returning the segmentation.
///
/// A center that falls outside its own (non-convex) superpixel is snapped
/// to the member pixel closest to it.
pub fn sps_sample_detailed(
    img: &RgbImage,
    n: usize,
    params: SlicParams,
) -> Result<SpsSampling, SuperpixelError> {
    let pixels = img.width() * img.height();
    if n == 0 || n > pixels {
        return Err(SuperpixelError::Parameter(format!(
            "cannot form {n} superpixels from {pixels} pixels"
        )));
    }
    if !(params.m > 0.0) || params.iters == 0 {
        return Err(SuperpixelError::Parameter(format!(
            "need m > 0 and iters >= 1, got m={} iters={}",
            params.m, params.iters
        )));
    }
    let lab = rgb_to_lab(img);
    let init = slic_init(&lab, n);
    let seg = slic_iterate(&init, &lab, params.m, params.iters);
    let summary = centers(&seg, &lab);
    let width = img.width();

    let mut nearest_member: Vec<Option<(f64, usize)>> = vec![None; n];
    let needs_snap: Vec<bool> = summary
        .locations
        .iter()
        .enumerate()
        .map(|(s, l)| {
            let (x, y) = l.nearest_pixel();
            seg.label(x, y) != s
        })
        .collect();
    if needs_snap.iter().any(|&b| b) {
        for (p, &label) in seg.labels().iter().enumerate() {
            let s = label as usize;
            if !needs_snap[s] {
                continue;
            }
            let l = summary.locations[s];
            let d = Location::new((p % width) as f64, (p / width) as f64).distance_sq(&l);
            if nearest_member[s].is_none_or(|(best, _)| d < best) {
                nearest_member[s] = Some((d, p));
            }
        }
    }
    let locations = summary
        .locations
        .iter()
        .enumerate()
        .map(|(s, &l)| match nearest_member[s] {
            Some((_, p)) => Location::new((p % width) as f64, (p / width) as f64),
            None => l,
        })
        .collect();
    let samples = SampleSet::new(locations, img.width(), img.height())
        .expect("centers are convex combinations of pixel coordinates");
    Ok(SpsSampling {
        samples,
        segmentation: seg,
    })
}
