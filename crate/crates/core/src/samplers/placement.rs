use super::SamplerError;
use crate::imagedata::{SampleSet, SamplingMask};

/// Offsets on the Chebyshev ring of radius `r`, in probe order.
///
/// Order: increasing Euclidean distance; equal distances are visited
/// clockwise (image coordinates, y down) starting from the north-east
/// diagonal. Ring 1 therefore reads E, S, W, N, NE, SE, SW, NW.
pub fn ring_offsets(r: i64) -> Vec<(i64, i64)> {
    if r == 0 {
        return vec![(0, 0)];
    }
    let mut ring: Vec<(i64, i64)> = (-r..=r)
        .flat_map(|dy| (-r..=r).map(move |dx| (dx, dy)))
        .filter(|&(dx, dy)| dx.abs().max(dy.abs()) == r)
        .collect();
    let angle = |&(dx, dy): &(i64, i64)| {
        let a = (dy as f64).atan2(dx as f64).to_degrees();
        if a < -45.0 {
            a + 360.0
        } else {
            a
        }
    };
    ring.sort_by(|a, b| {
        (a.0 * a.0 + a.1 * a.1)
            .cmp(&(b.0 * b.0 + b.1 * b.1))
            .then(angle(a).total_cmp(&angle(b)))
    });
    ring
}

/// Snaps continuous locations to pixels without losing samples.
///
/// Each location goes to its nearest pixel (halves round down). A location
/// landing on an occupied pixel is moved to the first free pixel found by
/// probing Chebyshev rings of growing radius in [`ring_offsets`] order.
pub fn locations_to_mask(
    samples: &SampleSet,
    height: usize,
    width: usize,
) -> Result<SamplingMask, SamplerError> {
    let capacity = height * width;
    if samples.len() > capacity {
        return Err(SamplerError::Capacity {
            requested: samples.len(),
            capacity,
        });
    }
    let mut taken = vec![false; capacity];
    let mut rings: Vec<Vec<(i64, i64)>> = Vec::new();
    let max_ring = height.max(width) as i64;

    for loc in samples.iter() {
        if !loc.in_bounds(width, height) {
            return Err(SamplerError::Parameter(format!(
                "location ({}, {}) outside {}x{} image",
                loc.x, loc.y, width, height
            )));
        }
        let (px, py) = loc.nearest_pixel();
        let home = py * width + px;
        if !taken[home] {
            taken[home] = true;
            continue;
        }
        let mut placed = false;
        'search: for r in 1..=max_ring {
            while rings.len() < r as usize {
                rings.push(ring_offsets(rings.len() as i64 + 1));
            }
            for &(dx, dy) in &rings[r as usize - 1] {
                let x = px as i64 + dx;
                let y = py as i64 + dy;
                if x < 0 || y < 0 || x >= width as i64 || y >= height as i64 {
                    continue;
                }
                let i = y as usize * width + x as usize;
                if !taken[i] {
                    taken[i] = true;
                    placed = true;
                    break 'search;
                }
            }
        }
        debug_assert!(placed, "capacity check guarantees a free pixel");
    }
    Ok(SamplingMask::new(width, height, taken)?)
}
