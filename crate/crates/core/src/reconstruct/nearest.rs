//! Exact nearest-sample queries over a bucket grid.

use rayon::prelude::*;

use super::ReconstructError;
use crate::imagedata::DepthMap;

/// Valid samples of a sparse map bucketed into square cells.
pub(crate) struct SampleIndex {
    cell: usize,
    cols: usize,
    rows: usize,
    buckets: Vec<Vec<(usize, f64)>>,
    width: usize,
}

impl SampleIndex {
    pub(crate) fn new(sparse: &DepthMap) -> Result<Self, ReconstructError> {
        let (w, h) = (sparse.width(), sparse.height());
        let count = sparse.valid_count();
        if count == 0 {
            return Err(ReconstructError::NoSamples);
        }
        let cell = (((w * h) as f64 / count as f64).sqrt().ceil() as usize).max(1);
        let cols = w.div_ceil(cell);
        let rows = h.div_ceil(cell);
        let mut buckets = vec![Vec::new(); cols * rows];
        for (i, d) in sparse.valid_samples() {
            let (x, y) = (i % w, i / w);
            buckets[(y / cell) * cols + x / cell].push((i, d));
        }
        Ok(Self {
            cell,
            cols,
            rows,
            buckets,
            width: w,
        })
    }

    fn dist2(&self, p: usize, q: usize) -> usize {
        let (px, py) = ((p % self.width) as i64, (p / self.width) as i64);
        let (qx, qy) = ((q % self.width) as i64, (q / self.width) as i64);
        ((px - qx).pow(2) + (py - qy).pow(2)) as usize
    }

    /// Nearest sample to pixel `p`; equal distances go to the smaller
    /// sample index.
    pub(crate) fn nearest(&self, p: usize) -> (usize, f64) {
        let (cx, cy) = ((p % self.width) / self.cell, (p / self.width) / self.cell);
        let mut best: Option<(usize, usize, f64)> = None;
        let max_ring = self.cols.max(self.rows);
        for r in 0..=max_ring {
            if let Some((d2, ..)) = best {
                // Cells on ring r are at least (r - 1) * cell away.
                let reach = (r.saturating_sub(1) * self.cell).pow(2);
                if r > 0 && reach > d2 {
                    break;
                }
            }
            for gy in cy.saturating_sub(r)..=(cy + r).min(self.rows - 1) {
                for gx in cx.saturating_sub(r)..=(cx + r).min(self.cols - 1) {
                    if gx.abs_diff(cx).max(gy.abs_diff(cy)) != r {
                        continue;
                    }
                    for &(q, d) in &self.buckets[gy * self.cols + gx] {
                        let d2 = self.dist2(p, q);
                        let better = match best {
                            None => true,
                            Some((bd, bq, _)) => d2 < bd || (d2 == bd && q < bq),
                        };
                        if better {
                            best = Some((d2, q, d));
                        }
                    }
                }
            }
        }
        let (_, q, d) = best.expect("index holds at least one sample");
        (q, d)
    }

    /// Samples within Euclidean `radius` of pixel `p`.
    pub(crate) fn within(&self, p: usize, radius: f64, mut f: impl FnMut(usize, f64)) {
        let (px, py) = (p % self.width, p / self.width);
        let r = radius.max(0.0);
        let ri = r.ceil() as usize;
        let gx0 = px.saturating_sub(ri) / self.cell;
        let gy0 = py.saturating_sub(ri) / self.cell;
        let gx1 = ((px + ri) / self.cell).min(self.cols - 1);
        let gy1 = ((py + ri) / self.cell).min(self.rows - 1);
        let r2 = r * r;
        for gy in gy0..=gy1 {
            for gx in gx0..=gx1 {
                for &(q, d) in &self.buckets[gy * self.cols + gx] {
                    if self.dist2(p, q) as f64 <= r2 {
                        f(q, d);
                    }
                }
            }
        }
    }
}

/// Every pixel takes the depth of its nearest valid sample.
pub fn nn_reconstruct(sparse: &DepthMap) -> Result<DepthMap, ReconstructError> {
    let index = SampleIndex::new(sparse)?;
    let (w, h) = (sparse.width(), sparse.height());
    let depth: Vec<f64> = (0..w * h)
        .into_par_iter()
        .map(|p| index.nearest(p).1)
        .collect();
    Ok(DepthMap::dense(w, h, depth)?)
}
