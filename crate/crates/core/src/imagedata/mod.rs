//! Rasters, color conversion and file formats.

mod color;
pub mod io;
mod raster;

use std::path::PathBuf;

pub use color::{rgb_to_lab, srgb_to_lab};
pub use io::{
    load_mask, load_pgm16, load_ppm, load_samples, save_labels, save_mask, save_pgm16, save_ppm,
    save_samples,
};
pub use raster::{
    round_half_down, DepthMap, LabImage, Location, RgbImage, SampleSet, SamplingMask,
};

#[derive(Debug, thiserror::Error)]
pub enum ImageError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed file at byte {offset}: {message}")]
    Format { offset: usize, message: String },
    #[error("truncated file at byte {offset}: needed {expected} payload bytes, found {found}")]
    Truncated {
        offset: usize,
        expected: usize,
        found: usize,
    },
    #[error("dimension mismatch: {0}")]
    Dimensions(String),
    #[error("invalid value: {0}")]
    Value(String),
}
