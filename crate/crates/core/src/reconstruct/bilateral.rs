use rayon::prelude::*;

use super::nearest::SampleIndex;
use super::ReconstructError;
use crate::imagedata::{DepthMap, LabImage};

/// Joint bilateral interpolation of sparse samples guided by color.
///
/// Each pixel averages the samples within `radius`, weighted by a spatial
/// Gaussian (`sigma_s`, pixels) times a color Gaussian (`sigma_c`, Lab
/// units) on the color difference between the pixel and the sample's
/// pixel. Pixels with no sample in range, or whose weights underflow, take
/// the nearest sample.
pub fn bilateral_reconstruct(
    lab: &LabImage,
    sparse: &DepthMap,
    sigma_s: f64,
    sigma_c: f64,
    radius: f64,
) -> Result<DepthMap, ReconstructError> {
    if !(sigma_s > 0.0 && sigma_c > 0.0 && radius >= 0.0) {
        return Err(ReconstructError::Parameter(format!(
            "need sigma_s > 0, sigma_c > 0, radius >= 0; got {sigma_s}, {sigma_c}, {radius}"
        )));
    }
    super::check_dims(lab, sparse)?;
    let index = SampleIndex::new(sparse)?;
    let (w, h) = (sparse.width(), sparse.height());
    let inv_s = 1.0 / (2.0 * sigma_s * sigma_s);
    let inv_c = 1.0 / (2.0 * sigma_c * sigma_c);
    let colors = lab.pixels();

    let depth: Vec<f64> = (0..w * h)
        .into_par_iter()
        .map(|p| {
            let f = colors[p];
            let (px, py) = ((p % w) as f64, (p / w) as f64);
            let mut num = 0.0;
            let mut den = 0.0;
            index.within(p, radius, |q, d| {
                let g = colors[q];
                let ds = (px - (q % w) as f64).powi(2) + (py - (q / w) as f64).powi(2);
                let dc = (f[0] - g[0]).powi(2) + (f[1] - g[1]).powi(2) + (f[2] - g[2]).powi(2);
                let wgt = (-ds * inv_s - dc * inv_c).exp();
                num += wgt * d;
                den += wgt;
            });
            if den > 0.0 {
                num / den
            } else {
                index.nearest(p).1
            }
        })
        .collect();
    Ok(DepthMap::dense(w, h, depth)?)
}
