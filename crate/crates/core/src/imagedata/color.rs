//! sRGB (D65) to CIELAB conversion.

use super::{LabImage, RgbImage};

// D65 reference white, normalized so Y = 1.
const WHITE_X: f64 = 0.95047;
const WHITE_Y: f64 = 1.0;
const WHITE_Z: f64 = 1.08883;

fn srgb_to_linear(c: u8) -> f64 {
    let c = f64::from(c) / 255.0;
    if c <= 0.04045 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

fn lab_f(t: f64) -> f64 {
    const DELTA: f64 = 6.0 / 29.0;
    if t > DELTA * DELTA * DELTA {
        t.cbrt()
    } else {
        t / (3.0 * DELTA * DELTA) + 4.0 / 29.0
    }
}

/// Converts a single sRGB triple to `[L, a, b]`.
pub fn srgb_to_lab(rgb: [u8; 3]) -> [f64; 3] {
    let r = srgb_to_linear(rgb[0]);
    let g = srgb_to_linear(rgb[1]);
    let b = srgb_to_linear(rgb[2]);

    let x = 0.412_456_4 * r + 0.357_576_1 * g + 0.180_437_5 * b;
    let y = 0.212_672_9 * r + 0.715_152_2 * g + 0.072_175_0 * b;
    let z = 0.019_333_9 * r + 0.119_192_0 * g + 0.950_304_1 * b;

    let fx = lab_f(x / WHITE_X);
    let fy = lab_f(y / WHITE_Y);
    let fz = lab_f(z / WHITE_Z);

    let l = (116.0 * fy - 16.0).clamp(0.0, 100.0);
    [l, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

/// Per-pixel CIELAB view of an sRGB image.
pub fn rgb_to_lab(img: &RgbImage) -> LabImage {
    let data = img.pixels().iter().map(|&p| srgb_to_lab(p)).collect();
    LabImage::new(img.width(), img.height(), data).expect("dimensions copied from a valid image")
}
