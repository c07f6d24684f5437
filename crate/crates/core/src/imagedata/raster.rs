//! Raster containers shared by every stage of the pipeline.

use super::ImageError;

/// An 8-bit sRGB image stored row-major, top-left origin.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<[u8; 3]>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, data: Vec<[u8; 3]>) -> Result<Self, ImageError> {
        check_dims(width, height)?;
        if data.len() != width * height {
            return Err(ImageError::Dimensions(format!(
                "rgb payload has {} pixels, expected {}x{}",
                data.len(),
                width,
                height
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// An image filled with one color.
    pub fn filled(width: usize, height: usize, color: [u8; 3]) -> Result<Self, ImageError> {
        Self::new(width, height, vec![color; width * height])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> [u8; 3],
    ) -> Result<Self, ImageError> {
        check_dims(width, height)?;
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        self.data[y * self.width + x]
    }
}

/// CIELAB view of an [`RgbImage`], one `[L, a, b]` triple per pixel.
#[derive(Clone, Debug, PartialEq)]
pub struct LabImage {
    width: usize,
    height: usize,
    data: Vec<[f64; 3]>,
}

impl LabImage {
    pub fn new(width: usize, height: usize, data: Vec<[f64; 3]>) -> Result<Self, ImageError> {
        check_dims(width, height)?;
        if data.len() != width * height {
            return Err(ImageError::Dimensions(format!(
                "lab payload has {} pixels, expected {}x{}",
                data.len(),
                width,
                height
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[[f64; 3]] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> [f64; 3] {
        self.data[y * self.width + x]
    }
}

/// Depth raster in millimeters. A pixel without a measurement is invalid and
/// always stores depth `0.0`.
#[derive(Clone, Debug, PartialEq)]
pub struct DepthMap {
    width: usize,
    height: usize,
    depth: Vec<f64>,
    valid: Vec<bool>,
}

impl DepthMap {
    pub fn new(
        width: usize,
        height: usize,
        depth: Vec<f64>,
        valid: Vec<bool>,
    ) -> Result<Self, ImageError> {
        check_dims(width, height)?;
        let n = width * height;
        if depth.len() != n || valid.len() != n {
            return Err(ImageError::Dimensions(format!(
                "depth map buffers have {} / {} entries, expected {}",
                depth.len(),
                valid.len(),
                n
            )));
        }
        if let Some(i) = depth.iter().position(|d| !d.is_finite() || *d < 0.0) {
            return Err(ImageError::Value(format!(
                "depth at index {i} is {} (must be finite and non-negative)",
                depth[i]
            )));
        }
        let depth = depth
            .into_iter()
            .zip(&valid)
            .map(|(d, &v)| if v { d } else { 0.0 })
            .collect();
        Ok(Self {
            width,
            height,
            depth,
            valid,
        })
    }

    /// Dense map: every pixel valid.
    pub fn dense(width: usize, height: usize, depth: Vec<f64>) -> Result<Self, ImageError> {
        let valid = vec![true; depth.len()];
        Self::new(width, height, depth, valid)
    }

    /// Treats zero as "no measurement", matching the 16-bit file convention.
    pub fn from_zero_invalid(
        width: usize,
        height: usize,
        depth: Vec<f64>,
    ) -> Result<Self, ImageError> {
        let valid = depth.iter().map(|&d| d != 0.0).collect();
        Self::new(width, height, depth, valid)
    }

    pub fn constant(width: usize, height: usize, value: f64) -> Result<Self, ImageError> {
        Self::dense(width, height, vec![value; width * height])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self, ImageError> {
        let mut depth = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                depth.push(f(x, y));
            }
        }
        Self::dense(width, height, depth)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn depths(&self) -> &[f64] {
        &self.depth
    }

    pub fn validity(&self) -> &[bool] {
        &self.valid
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.depth[y * self.width + x]
    }

    pub fn is_valid(&self, x: usize, y: usize) -> bool {
        self.valid[y * self.width + x]
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }

    /// Iterator over `(index, depth)` of valid pixels in scan order.
    pub fn valid_samples(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.depth
            .iter()
            .zip(&self.valid)
            .enumerate()
            .filter(|(_, (_, &v))| v)
            .map(|(i, (&d, _))| (i, d))
    }

    /// Returns a copy with one pixel replaced.
    pub fn with_value(&self, x: usize, y: usize, value: f64) -> Self {
        let mut out = self.clone();
        let i = y * self.width + x;
        out.depth[i] = value;
        out.valid[i] = true;
        out
    }
}

/// Binary sampling plan; `true` marks a measured pixel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SamplingMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
    count: usize,
}

impl SamplingMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self, ImageError> {
        check_dims(width, height)?;
        if bits.len() != width * height {
            return Err(ImageError::Dimensions(format!(
                "mask has {} entries, expected {}x{}",
                bits.len(),
                width,
                height
            )));
        }
        let count = bits.iter().filter(|&&b| b).count();
        Ok(Self {
            width,
            height,
            bits,
            count,
        })
    }

    pub fn empty(width: usize, height: usize) -> Result<Self, ImageError> {
        Self::new(width, height, vec![false; width * height])
    }

    /// Builds a mask from row-major pixel indices. Duplicates collapse.
    pub fn from_indices(
        width: usize,
        height: usize,
        indices: impl IntoIterator<Item = usize>,
    ) -> Result<Self, ImageError> {
        let mut bits = vec![false; width * height];
        for i in indices {
            if i >= bits.len() {
                return Err(ImageError::Dimensions(format!(
                    "pixel index {i} outside {width}x{height} mask"
                )));
            }
            bits[i] = true;
        }
        Self::new(width, height, bits)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    /// Row-major indices of set pixels.
    pub fn indices(&self) -> Vec<usize> {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i)
            .collect()
    }

    /// Pixel centers of set pixels as continuous locations, scan order.
    pub fn to_sample_set(&self) -> SampleSet {
        SampleSet::new_unchecked(
            self.indices()
                .into_iter()
                .map(|i| Location::new((i % self.width) as f64, (i / self.width) as f64))
                .collect(),
        )
    }
}

/// A continuous sampling location in pixel units; `(0, 0)` is the center
/// of the top-left pixel, `x` runs along columns.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Location {
    pub x: f64,
    pub y: f64,
}

impl Location {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance_sq(&self, other: &Location) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn in_bounds(&self, width: usize, height: usize) -> bool {
        self.x >= 0.0
            && self.y >= 0.0
            && self.x <= (width - 1) as f64
            && self.y <= (height - 1) as f64
    }

    pub fn clamped(&self, width: usize, height: usize) -> Self {
        Self {
            x: self.x.clamp(0.0, (width - 1) as f64),
            y: self.y.clamp(0.0, (height - 1) as f64),
        }
    }

    /// Nearest pixel with ties resolved toward the smaller index.
    pub fn nearest_pixel(&self) -> (usize, usize) {
        (round_half_down(self.x), round_half_down(self.y))
    }
}

/// Rounds to the nearest integer, sending exact halves down (`1.5 -> 1`).
pub fn round_half_down(v: f64) -> usize {
    let r = (v - 0.5).ceil();
    if r <= 0.0 {
        0
    } else {
        r as usize
    }
}

/// Ordered list of continuous sampling locations.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SampleSet {
    locations: Vec<Location>,
}

impl SampleSet {
    /// Validates that every location lies in `[0, W-1] x [0, H-1]`.
    pub fn new(locations: Vec<Location>, width: usize, height: usize) -> Result<Self, ImageError> {
        if let Some(l) = locations.iter().find(|l| !l.in_bounds(width, height)) {
            return Err(ImageError::Value(format!(
                "location ({}, {}) outside {}x{} image",
                l.x, l.y, width, height
            )));
        }
        Ok(Self { locations })
    }

    pub(crate) fn new_unchecked(locations: Vec<Location>) -> Self {
        Self { locations }
    }

    pub fn locations(&self) -> &[Location] {
        &self.locations
    }

    pub fn len(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Location> {
        self.locations.iter()
    }
}

fn check_dims(width: usize, height: usize) -> Result<(), ImageError> {
    if width == 0 || height == 0 {
        return Err(ImageError::Dimensions(format!(
            "image dimensions must be positive, got {width}x{height}"
        )));
    }
    Ok(())
}
