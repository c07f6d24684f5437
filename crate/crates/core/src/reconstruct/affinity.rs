use rayon::prelude::*;

use super::ReconstructError;
use crate::imagedata::LabImage;

/// Gaussian color affinities below this are clamped so the graph stays
/// connected under extreme color contrast.
pub const MIN_AFFINITY: f64 = 1e-12;

/// 8-connected color-affinity graph. `weights` are row-normalized
/// (`w_ij = a_ij / deg_i`); the raw affinities `a_ij` are symmetric.
#[derive(Clone, Debug, PartialEq)]
pub struct AffinityGraph {
    width: usize,
    height: usize,
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    raw: Vec<f64>,
    weights: Vec<f64>,
    degree: Vec<f64>,
}

impl AffinityGraph {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.degree.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degree.is_empty()
    }

    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.neighbors[self.offsets[i]..self.offsets[i + 1]]
    }

    /// Row-normalized weights aligned with [`Self::neighbors`].
    pub fn weights(&self, i: usize) -> &[f64] {
        &self.weights[self.offsets[i]..self.offsets[i + 1]]
    }

    /// Unnormalized affinities aligned with [`Self::neighbors`].
    pub fn raw_weights(&self, i: usize) -> &[f64] {
        &self.raw[self.offsets[i]..self.offsets[i + 1]]
    }

    /// Sum of raw affinities of pixel `i`.
    pub fn degree(&self, i: usize) -> f64 {
        self.degree[i]
    }
}

const OFFSETS: [(i64, i64); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

/// `a_ij = exp(-|f(i) - f(j)|^2 / (2 sigma_c^2))` over the 8-neighborhood.
pub fn build_affinity(lab: &LabImage, sigma_c: f64) -> Result<AffinityGraph, ReconstructError> {
    if !(sigma_c > 0.0) {
        return Err(ReconstructError::Parameter(format!(
            "sigma_c must be positive, got {sigma_c}"
        )));
    }
    let (w, h) = (lab.width(), lab.height());
    let inv = 1.0 / (2.0 * sigma_c * sigma_c);
    let rows: Vec<Vec<(u32, f64)>> = (0..w * h)
        .into_par_iter()
        .map(|i| {
            let (x, y) = ((i % w) as i64, (i / w) as i64);
            let f = lab.pixels()[i];
            OFFSETS
                .iter()
                .filter_map(|&(dx, dy)| {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                        return None;
                    }
                    let j = ny as usize * w + nx as usize;
                    let g = lab.pixels()[j];
                    let d2 = (f[0] - g[0]).powi(2) + (f[1] - g[1]).powi(2) + (f[2] - g[2]).powi(2);
                    Some((j as u32, (-d2 * inv).exp().max(MIN_AFFINITY)))
                })
                .collect()
        })
        .collect();

    let mut offsets = Vec::with_capacity(w * h + 1);
    let mut neighbors = Vec::with_capacity(w * h * 8);
    let mut raw = Vec::with_capacity(w * h * 8);
    let mut weights = Vec::with_capacity(w * h * 8);
    let mut degree = Vec::with_capacity(w * h);
    offsets.push(0);
    for row in rows {
        let deg: f64 = row.iter().map(|e| e.1).sum();
        for (j, a) in row {
            neighbors.push(j);
            raw.push(a);
            weights.push(if deg > 0.0 { a / deg } else { 0.0 });
        }
        degree.push(deg);
        offsets.push(neighbors.len());
    }
    Ok(AffinityGraph {
        width: w,
        height: h,
        offsets,
        neighbors,
        raw,
        weights,
        degree,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imagedata::{rgb_to_lab, RgbImage};

    #[test]
    fn uniform_image_has_equal_weights() {
        let lab = rgb_to_lab(&RgbImage::filled(4, 3, [40, 80, 120]).unwrap());
        let g = build_affinity(&lab, 10.0).unwrap();
        for i in 0..g.len() {
            let n = g.neighbors(i).len();
            assert!(g
                .weights(i)
                .iter()
                .all(|&v| (v - 1.0 / n as f64).abs() < 1e-15));
            assert!((g.weights(i).iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        assert_eq!(g.neighbors(0).len(), 3);
        assert_eq!(g.neighbors(5).len(), 8);
    }

    #[test]
    fn structure_is_symmetric() {
        let lab = rgb_to_lab(
            &RgbImage::from_fn(5, 4, |x, y| [(x * 50) as u8, (y * 60) as u8, 7]).unwrap(),
        );
        let g = build_affinity(&lab, 5.0).unwrap();
        for i in 0..g.len() {
            for (k, &j) in g.neighbors(i).iter().enumerate() {
                let back = g
                    .neighbors(j as usize)
                    .iter()
                    .position(|&n| n as usize == i)
                    .unwrap();
                assert_eq!(g.raw_weights(i)[k], g.raw_weights(j as usize)[back]);
                assert!(g.weights(i)[k] > 0.0);
            }
        }
    }

    #[test]
    fn rejects_bad_sigma() {
        let lab = rgb_to_lab(&RgbImage::filled(2, 2, [0, 0, 0]).unwrap());
        assert!(build_affinity(&lab, 0.0).is_err());
    }
}
