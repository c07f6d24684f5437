//! Blue-noise masks from Bridson's dart throwing on the pixel lattice.
//!
//! The disk radius is not an input: it is bisected so that a maximal
//! throw yields at least the requested budget, then the throw is trimmed
//! uniformly at random to the exact count.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{check_capacity, SamplerError};
use crate::imagedata::SamplingMask;
use crate::rng;

/// Candidate attempts per active point before it is retired.
const ATTEMPTS: usize = 30;
const BISECTION_STEPS: usize = 24;

#[derive(Clone, Debug, PartialEq)]
pub struct PoissonDisk {
    pub mask: SamplingMask,
    /// Every pair of set pixels is at least this far apart.
    pub radius: f64,
}

struct BackgroundGrid {
    cell: f64,
    cols: usize,
    rows: usize,
    slots: Vec<Option<(usize, usize)>>,
}

impl BackgroundGrid {
    fn new(height: usize, width: usize, radius: f64) -> Self {
        let cell = radius / std::f64::consts::SQRT_2;
        let cols = (width as f64 / cell).ceil() as usize + 1;
        let rows = (height as f64 / cell).ceil() as usize + 1;
        Self {
            cell,
            cols,
            rows,
            slots: vec![None; cols * rows],
        }
    }

    fn cell_of(&self, p: (usize, usize)) -> (usize, usize) {
        (
            (p.0 as f64 / self.cell) as usize,
            (p.1 as f64 / self.cell) as usize,
        )
    }

    fn insert(&mut self, p: (usize, usize)) {
        let (cx, cy) = self.cell_of(p);
        self.slots[cy * self.cols + cx] = Some(p);
    }

    fn is_clear(&self, p: (usize, usize), radius: f64) -> bool {
        let (cx, cy) = self.cell_of(p);
        let r2 = radius * radius;
        let y0 = cy.saturating_sub(2);
        let x0 = cx.saturating_sub(2);
        for gy in y0..(cy + 3).min(self.rows) {
            for gx in x0..(cx + 3).min(self.cols) {
                if let Some(q) = self.slots[gy * self.cols + gx] {
                    let dx = p.0 as f64 - q.0 as f64;
                    let dy = p.1 as f64 - q.1 as f64;
                    if dx * dx + dy * dy < r2 {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// One maximal throw at a fixed radius; points are `(x, y)` pixels.
fn throw(height: usize, width: usize, radius: f64, seed: u64) -> Vec<(usize, usize)> {
    let mut rng = rng::seeded(seed);
    let mut grid = BackgroundGrid::new(height, width, radius);
    let first = (rng.gen_range(0..width), rng.gen_range(0..height));
    grid.insert(first);
    let mut points = vec![first];
    let mut active = vec![0usize];

    while !active.is_empty() {
        let slot = rng.gen_range(0..active.len());
        let parent = points[active[slot]];
        let mut placed = false;
        for _ in 0..ATTEMPTS {
            let theta = rng.gen_range(0.0..std::f64::consts::TAU);
            let dist = rng.gen_range(radius..2.0 * radius);
            let x = (parent.0 as f64 + dist * theta.cos()).round();
            let y = (parent.1 as f64 + dist * theta.sin()).round();
            if x < 0.0 || y < 0.0 || x >= width as f64 || y >= height as f64 {
                continue;
            }
            let candidate = (x as usize, y as usize);
            if grid.is_clear(candidate, radius) {
                grid.insert(candidate);
                active.push(points.len());
                points.push(candidate);
                placed = true;
                break;
            }
        }
        if !placed {
            active.swap_remove(slot);
        }
    }
    points
}

/// Poisson-disk mask with exactly `n` samples.
pub fn poisson_mask(
    height: usize,
    width: usize,
    n: usize,
    seed: u64,
) -> Result<PoissonDisk, SamplerError> {
    check_capacity(height, width, n)?;
    let throw_seed = rng::derive(seed, 0);

    // Upper bracket: a radius too large to fit `n` disks.
    let mut hi = 2.0 * ((height * width) as f64 / n as f64).sqrt() + 2.0;
    let diag = ((height * height + width * width) as f64).sqrt();
    while hi <= diag && throw(height, width, hi, throw_seed).len() >= n {
        hi *= 2.0;
    }

    let mut lo = 1.0;
    let mut best: Option<(f64, Vec<(usize, usize)>)> = None;
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        let pts = throw(height, width, mid, throw_seed);
        if pts.len() >= n {
            lo = mid;
            best = Some((mid, pts));
        } else {
            hi = mid;
        }
    }

    let mut rng = rng::seeded(rng::derive(seed, 1));
    let (radius, mut points) = match best {
        Some(found) => found,
        None => {
            // Distinct pixels are always at least one unit apart, so any
            // completion of a unit-radius throw keeps the guarantee.
            let mut pts = throw(height, width, 1.0, throw_seed);
            if pts.len() < n {
                let mut taken = vec![false; height * width];
                for &(x, y) in &pts {
                    taken[y * width + x] = true;
                }
                let mut free: Vec<usize> = (0..height * width).filter(|&i| !taken[i]).collect();
                free.shuffle(&mut rng);
                pts.extend(
                    free.into_iter()
                        .take(n - pts.len())
                        .map(|i| (i % width, i / width)),
                );
            }
            (1.0, pts)
        }
    };

    points.shuffle(&mut rng);
    points.truncate(n);
    let mask =
        SamplingMask::from_indices(width, height, points.iter().map(|&(x, y)| y * width + x))?;
    debug_assert_eq!(mask.count(), n);
    Ok(PoissonDisk { mask, radius })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn min_distance(mask: &SamplingMask) -> f64 {
        let pts: Vec<(f64, f64)> = mask
            .indices()
            .into_iter()
            .map(|i| ((i % mask.width()) as f64, (i / mask.width()) as f64))
            .collect();
        let mut best = f64::INFINITY;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                let d = ((pts[i].0 - pts[j].0).powi(2) + (pts[i].1 - pts[j].1).powi(2)).sqrt();
                best = best.min(d);
            }
        }
        best
    }

    #[test]
    fn sixteen_on_64() {
        let p = poisson_mask(64, 64, 16, 7).unwrap();
        assert_eq!(p.mask.count(), 16);
        assert!(p.radius >= 8.0, "radius {}", p.radius);
        assert!(min_distance(&p.mask) >= p.radius);
        assert!(min_distance(&p.mask) >= 8.0);
    }

    #[test]
    fn full_budget_falls_back_to_unit_radius() {
        let p = poisson_mask(5, 6, 30, 1).unwrap();
        assert_eq!(p.mask.count(), 30);
        assert_eq!(p.radius, 1.0);
        let p = poisson_mask(5, 6, 25, 1).unwrap();
        assert_eq!(p.mask.count(), 25);
    }

    #[test]
    fn deterministic() {
        assert_eq!(
            poisson_mask(40, 50, 30, 5).unwrap(),
            poisson_mask(40, 50, 30, 5).unwrap()
        );
    }

    #[test]
    fn single_pixel_image() {
        let p = poisson_mask(1, 1, 1, 0).unwrap();
        assert_eq!(p.mask.count(), 1);
    }
}
