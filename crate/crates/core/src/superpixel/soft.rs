//! Soft pixel-to-superpixel association, weighted centers and the
//! reconstruction loss built on them.

use super::slic::{slic_distance, Segmentation};
use super::SuperpixelError;
use crate::imagedata::{LabImage, Location};

/// Per-pixel association weights `q_s(p)` over a small set of candidate
/// superpixels. Rows are non-negative and sum to one.
#[derive(Clone, Debug, PartialEq)]
pub struct SoftAssociation {
    width: usize,
    height: usize,
    superpixels: usize,
    offsets: Vec<usize>,
    entries: Vec<(u32, f64)>,
    fallback: Vec<Location>,
}

impl SoftAssociation {
    /// Builds an association from explicit per-pixel rows of
    /// `(superpixel, weight)` pairs.
    pub fn from_rows(
        width: usize,
        height: usize,
        superpixels: usize,
        rows: Vec<Vec<(usize, f64)>>,
    ) -> Result<Self, SuperpixelError> {
        if rows.len() != width * height {
            return Err(SuperpixelError::Parameter(format!(
                "{} association rows for a {width}x{height} image",
                rows.len()
            )));
        }
        let mut offsets = Vec::with_capacity(rows.len() + 1);
        let mut entries = Vec::new();
        offsets.push(0);
        for (p, row) in rows.into_iter().enumerate() {
            let mut total = 0.0;
            for (s, q) in row {
                if s >= superpixels || !(q >= 0.0) || !q.is_finite() {
                    return Err(SuperpixelError::Parameter(format!(
                        "pixel {p}: bad entry ({s}, {q})"
                    )));
                }
                total += q;
                entries.push((s as u32, q));
            }
            if (total - 1.0).abs() > 1e-9 {
                return Err(SuperpixelError::Parameter(format!(
                    "pixel {p}: weights sum to {total}"
                )));
            }
            offsets.push(entries.len());
        }
        let center = Location::new((width - 1) as f64 / 2.0, (height - 1) as f64 / 2.0);
        Ok(Self {
            width,
            height,
            superpixels,
            offsets,
            entries,
            fallback: vec![center; superpixels],
        })
    }

    /// One-hot association equal to the hard labels.
    pub fn from_segmentation(seg: &Segmentation) -> Self {
        let n = seg.labels().len();
        Self {
            width: seg.width(),
            height: seg.height(),
            superpixels: seg.len(),
            offsets: (0..=n).collect(),
            entries: seg.labels().iter().map(|&l| (l, 1.0)).collect(),
            fallback: seed_locations(seg),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn superpixels(&self) -> usize {
        self.superpixels
    }

    /// `(superpixel, weight)` pairs of one pixel.
    pub fn row(&self, pixel: usize) -> &[(u32, f64)] {
        &self.entries[self.offsets[pixel]..self.offsets[pixel + 1]]
    }
}

fn seed_locations(seg: &Segmentation) -> Vec<Location> {
    seg.seeds()
        .iter()
        .map(|s| Location::new(s.x, s.y))
        .collect()
}

/// Anything that yields per-pixel superpixel weights.
pub trait Association {
    fn dims(&self) -> (usize, usize);
    fn superpixels(&self) -> usize;
    /// Calls `f(pixel, superpixel, weight)` for every stored weight, in
    /// pixel order.
    fn for_each_weight(&self, f: &mut dyn FnMut(usize, usize, f64));
    /// Location reported for a superpixel that received no weight.
    fn fallback_location(&self, s: usize) -> Location;
}

impl Association for SoftAssociation {
    fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    fn superpixels(&self) -> usize {
        self.superpixels
    }

    fn for_each_weight(&self, f: &mut dyn FnMut(usize, usize, f64)) {
        for p in 0..self.width * self.height {
            for &(s, q) in self.row(p) {
                f(p, s as usize, q);
            }
        }
    }

    fn fallback_location(&self, s: usize) -> Location {
        self.fallback[s]
    }
}

impl Association for Segmentation {
    fn dims(&self) -> (usize, usize) {
        (self.width(), self.height())
    }

    fn superpixels(&self) -> usize {
        self.len()
    }

    fn for_each_weight(&self, f: &mut dyn FnMut(usize, usize, f64)) {
        for (p, &l) in self.labels().iter().enumerate() {
            f(p, l as usize, 1.0);
        }
    }

    fn fallback_location(&self, s: usize) -> Location {
        let seed = self.seeds()[s];
        Location::new(seed.x, seed.y)
    }
}

/// Softmax of `-d(p, s) / tau` over the lattice neighborhood of each
/// pixel's hard label.
pub fn soft_association(
    seg: &Segmentation,
    lab: &LabImage,
    m: f64,
    tau: f64,
) -> Result<SoftAssociation, SuperpixelError> {
    if !(tau > 0.0) {
        return Err(SuperpixelError::Parameter(format!(
            "tau must be positive, got {tau}"
        )));
    }
    if (seg.width(), seg.height()) != (lab.width(), lab.height()) {
        return Err(SuperpixelError::Parameter(
            "segmentation/image size mismatch".into(),
        ));
    }
    let neighborhoods: Vec<Vec<usize>> =
        (0..seg.len()).map(|s| seg.grid().neighborhood(s)).collect();
    let width = seg.width();
    let mut offsets = Vec::with_capacity(seg.labels().len() + 1);
    let mut entries = Vec::with_capacity(seg.labels().len() * 9);
    offsets.push(0);
    let mut dist = Vec::with_capacity(9);
    for (p, &label) in seg.labels().iter().enumerate() {
        let (x, y) = ((p % width) as f64, (p / width) as f64);
        let f = lab.pixels()[p];
        let hood = &neighborhoods[label as usize];
        dist.clear();
        dist.extend(
            hood.iter()
                .map(|&s| slic_distance(f, x, y, &seg.seeds()[s], m, seg.step())),
        );
        let dmin = dist.iter().copied().fold(f64::INFINITY, f64::min);
        let mut total = 0.0;
        let start = entries.len();
        for (&s, &d) in hood.iter().zip(&dist) {
            let e = (-(d - dmin) / tau).exp();
            total += e;
            entries.push((s as u32, e));
        }
        for e in &mut entries[start..] {
            e.1 /= total;
        }
        offsets.push(entries.len());
    }
    Ok(SoftAssociation {
        width,
        height: seg.height(),
        superpixels: seg.len(),
        offsets,
        entries,
        fallback: seed_locations(seg),
    })
}

/// Per-superpixel mean color `u_s`, weighted mass center `l_s`, number of
/// pixels with non-zero weight, and total weight.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperpixelSummary {
    pub colors: Vec<[f64; 3]>,
    pub locations: Vec<Location>,
    pub members: Vec<usize>,
    pub weights: Vec<f64>,
}

/// Association-weighted color means and mass centers. A superpixel with no
/// weight keeps its fallback location and reports a zero color.
pub fn centers(assoc: &impl Association, lab: &LabImage) -> SuperpixelSummary {
    let k = assoc.superpixels();
    let width = lab.width();
    let mut sums = vec![[0.0f64; 5]; k];
    let mut weights = vec![0.0; k];
    let mut members = vec![0usize; k];
    assoc.for_each_weight(&mut |p, s, q| {
        if q > 0.0 {
            let f = lab.pixels()[p];
            let acc = &mut sums[s];
            acc[0] += q * f[0];
            acc[1] += q * f[1];
            acc[2] += q * f[2];
            acc[3] += q * (p % width) as f64;
            acc[4] += q * (p / width) as f64;
            weights[s] += q;
            members[s] += 1;
        }
    });
    let mut colors = Vec::with_capacity(k);
    let mut locations = Vec::with_capacity(k);
    for s in 0..k {
        let w = weights[s];
        if w > 0.0 {
            colors.push([sums[s][0] / w, sums[s][1] / w, sums[s][2] / w]);
            locations.push(Location::new(sums[s][3] / w, sums[s][4] / w));
        } else {
            colors.push([0.0; 3]);
            locations.push(assoc.fallback_location(s));
        }
    }
    SuperpixelSummary {
        colors,
        locations,
        members,
        weights,
    }
}

/// Color + position reconstruction loss: for each pixel, the color and
/// coordinates are rebuilt as association-weighted mixtures of superpixel
/// means and compared with the originals (unsquared Euclidean norms).
pub fn slic_loss(assoc: &impl Association, lab: &LabImage, m: f64) -> f64 {
    let summary = centers(assoc, lab);
    let n = lab.width() * lab.height();
    let mut recon = vec![[0.0f64; 5]; n];
    assoc.for_each_weight(&mut |p, s, q| {
        let u = summary.colors[s];
        let l = summary.locations[s];
        let r = &mut recon[p];
        r[0] += q * u[0];
        r[1] += q * u[1];
        r[2] += q * u[2];
        r[3] += q * l.x;
        r[4] += q * l.y;
    });
    let width = lab.width();
    recon
        .iter()
        .enumerate()
        .map(|(p, r)| {
            let f = lab.pixels()[p];
            let color =
                ((f[0] - r[0]).powi(2) + (f[1] - r[1]).powi(2) + (f[2] - r[2]).powi(2)).sqrt();
            let dx = (p % width) as f64 - r[3];
            let dy = (p / width) as f64 - r[4];
            color + m * (dx * dx + dy * dy).sqrt()
        })
        .sum()
}
