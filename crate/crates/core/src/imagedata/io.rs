//! Binary Netpbm readers/writers and the sample-set CSV format.
//!
//! Layouts:
//! - RGB images: `P6`, maxval 255, interleaved RGB bytes.
//! - Depth maps: `P5`, maxval 65535, big-endian 16-bit samples in millimeters,
//!   `0` meaning "no measurement".
//! - Sampling masks: `P5`, maxval 255, `255` for sampled pixels, `0` otherwise.
//! - Sample sets: one `x,y` line per location, six decimal places.
//!
//! Writers always emit the canonical header `P?\n<w> <h>\n<maxval>\n`.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::{DepthMap, ImageError, Location, RgbImage, SampleSet, SamplingMask};

struct Header {
    width: usize,
    height: usize,
    maxval: u32,
    payload_offset: usize,
}

fn parse_header(bytes: &[u8], magic: &[u8; 2]) -> Result<Header, ImageError> {
    if bytes.len() < 2 || &bytes[..2] != magic {
        let found = String::from_utf8_lossy(&bytes[..bytes.len().min(2)]).into_owned();
        return Err(ImageError::Format {
            offset: 0,
            message: format!(
                "expected magic {:?}, found {:?}",
                String::from_utf8_lossy(magic),
                found
            ),
        });
    }
    let mut pos = 2;
    let width = read_header_number(bytes, &mut pos, "width")?;
    let height = read_header_number(bytes, &mut pos, "height")?;
    let maxval = read_header_number(bytes, &mut pos, "maxval")?;
    // Exactly one whitespace byte separates the header from the payload.
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        Some(_) => {
            return Err(ImageError::Format {
                offset: pos,
                message: "expected whitespace after maxval".into(),
            })
        }
        None => {
            return Err(ImageError::Truncated {
                offset: pos,
                expected: 1,
                found: 0,
            })
        }
    }
    if width == 0 || height == 0 {
        return Err(ImageError::Format {
            offset: 2,
            message: format!("zero dimension {width}x{height}"),
        });
    }
    let maxval = u32::try_from(maxval).map_err(|_| ImageError::Format {
        offset: pos,
        message: format!("maxval {maxval} out of range"),
    })?;
    Ok(Header {
        width,
        height,
        maxval,
        payload_offset: pos,
    })
}

fn read_header_number(bytes: &[u8], pos: &mut usize, what: &str) -> Result<usize, ImageError> {
    // Skip whitespace and `#` comments running to end of line.
    loop {
        match bytes.get(*pos) {
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(b'#') => {
                while let Some(&b) = bytes.get(*pos) {
                    *pos += 1;
                    if b == b'\n' || b == b'\r' {
                        break;
                    }
                }
            }
            _ => break,
        }
    }
    let start = *pos;
    while bytes.get(*pos).is_some_and(u8::is_ascii_digit) {
        *pos += 1;
    }
    if start == *pos {
        return match bytes.get(start) {
            None => Err(ImageError::Truncated {
                offset: start,
                expected: 1,
                found: 0,
            }),
            Some(_) => Err(ImageError::Format {
                offset: start,
                message: format!("expected decimal {what}"),
            }),
        };
    }
    std::str::from_utf8(&bytes[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| ImageError::Format {
            offset: start,
            message: format!("{what} does not fit in an integer"),
        })
}

fn payload<'a>(
    bytes: &'a [u8],
    header: &Header,
    bytes_per_px: usize,
) -> Result<&'a [u8], ImageError> {
    let expected = header.width * header.height * bytes_per_px;
    let available = bytes.len() - header.payload_offset;
    if available < expected {
        return Err(ImageError::Truncated {
            offset: bytes.len(),
            expected,
            found: available,
        });
    }
    Ok(&bytes[header.payload_offset..header.payload_offset + expected])
}

/// Decodes an in-memory binary PPM (`P6`, maxval 255).
pub fn decode_ppm(bytes: &[u8]) -> Result<RgbImage, ImageError> {
    let header = parse_header(bytes, b"P6")?;
    if header.maxval != 255 {
        return Err(ImageError::Format {
            offset: header.payload_offset - 1,
            message: format!("unsupported PPM maxval {} (need 255)", header.maxval),
        });
    }
    let data = payload(bytes, &header, 3)?
        .chunks_exact(3)
        .map(|c| [c[0], c[1], c[2]])
        .collect();
    RgbImage::new(header.width, header.height, data)
}

pub fn encode_ppm(img: &RgbImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.reserve(img.pixels().len() * 3);
    for px in img.pixels() {
        out.extend_from_slice(px);
    }
    out
}

/// Decodes a 16-bit depth PGM (`P5`, maxval 65535, big-endian).
pub fn decode_pgm16(bytes: &[u8]) -> Result<DepthMap, ImageError> {
    let header = parse_header(bytes, b"P5")?;
    if header.maxval != 65535 {
        return Err(ImageError::Format {
            offset: header.payload_offset - 1,
            message: format!("depth PGM must have maxval 65535, found {}", header.maxval),
        });
    }
    let depth = payload(bytes, &header, 2)?
        .chunks_exact(2)
        .map(|c| f64::from(u16::from_be_bytes([c[0], c[1]])))
        .collect();
    DepthMap::from_zero_invalid(header.width, header.height, depth)
}

/// Quantizes a depth value to its 16-bit file sample. Valid pixels never
/// encode to 0 so they survive a round trip.
pub fn depth_to_sample(depth: f64, valid: bool) -> u16 {
    if !valid {
        return 0;
    }
    depth.round().clamp(1.0, 65535.0) as u16
}

pub fn encode_pgm16(depth: &DepthMap) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n65535\n", depth.width(), depth.height()).into_bytes();
    out.reserve(depth.depths().len() * 2);
    for (&d, &v) in depth.depths().iter().zip(depth.validity()) {
        out.extend_from_slice(&depth_to_sample(d, v).to_be_bytes());
    }
    out
}

pub fn encode_mask(mask: &SamplingMask) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", mask.width(), mask.height()).into_bytes();
    out.extend(mask.bits().iter().map(|&b| if b { 255u8 } else { 0 }));
    out
}

/// Decodes an 8-bit mask PGM; any non-zero sample counts as sampled.
pub fn decode_mask(bytes: &[u8]) -> Result<SamplingMask, ImageError> {
    let header = parse_header(bytes, b"P5")?;
    if header.maxval != 255 {
        return Err(ImageError::Format {
            offset: header.payload_offset - 1,
            message: format!("mask PGM must have maxval 255, found {}", header.maxval),
        });
    }
    let bits = payload(bytes, &header, 1)?
        .iter()
        .map(|&b| b != 0)
        .collect();
    SamplingMask::new(header.width, header.height, bits)
}

/// 16-bit label raster for inspecting segmentations.
pub fn encode_labels(width: usize, height: usize, labels: &[u32]) -> Vec<u8> {
    let mut out = format!("P5\n{width} {height}\n65535\n").into_bytes();
    for &l in labels {
        out.extend_from_slice(&(l.min(65535) as u16).to_be_bytes());
    }
    out
}

pub fn encode_samples(samples: &SampleSet) -> String {
    let mut out = String::with_capacity(samples.len() * 24);
    for l in samples.iter() {
        out.push_str(&format!("{:.6},{:.6}\n", l.x, l.y));
    }
    out
}

pub fn decode_samples(text: &str) -> Result<Vec<Location>, ImageError> {
    let mut offset = 0;
    let mut out = Vec::new();
    for line in text.split_inclusive('\n') {
        let trimmed = line.trim();
        if !trimmed.is_empty() {
            let parsed = trimmed.split_once(',').and_then(|(x, y)| {
                Some(Location::new(
                    x.trim().parse().ok()?,
                    y.trim().parse().ok()?,
                ))
            });
            match parsed {
                Some(l) if l.x.is_finite() && l.y.is_finite() => out.push(l),
                _ => {
                    return Err(ImageError::Format {
                        offset,
                        message: format!("expected \"x,y\", found {trimmed:?}"),
                    })
                }
            }
        }
        offset += line.len();
    }
    Ok(out)
}

fn read(path: &Path) -> Result<Vec<u8>, ImageError> {
    fs::read(path).map_err(|source| ImageError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), ImageError> {
    fs::File::create(path)
        .and_then(|mut f| f.write_all(bytes))
        .map_err(|source| ImageError::Io {
            path: path.to_path_buf(),
            source,
        })
}

pub fn load_ppm(path: impl AsRef<Path>) -> Result<RgbImage, ImageError> {
    decode_ppm(&read(path.as_ref())?)
}

pub fn save_ppm(img: &RgbImage, path: impl AsRef<Path>) -> Result<(), ImageError> {
    write(path.as_ref(), &encode_ppm(img))
}

pub fn load_pgm16(path: impl AsRef<Path>) -> Result<DepthMap, ImageError> {
    decode_pgm16(&read(path.as_ref())?)
}

pub fn save_pgm16(depth: &DepthMap, path: impl AsRef<Path>) -> Result<(), ImageError> {
    write(path.as_ref(), &encode_pgm16(depth))
}

pub fn load_mask(path: impl AsRef<Path>) -> Result<SamplingMask, ImageError> {
    decode_mask(&read(path.as_ref())?)
}

pub fn save_mask(mask: &SamplingMask, path: impl AsRef<Path>) -> Result<(), ImageError> {
    write(path.as_ref(), &encode_mask(mask))
}

pub fn save_labels(
    width: usize,
    height: usize,
    labels: &[u32],
    path: impl AsRef<Path>,
) -> Result<(), ImageError> {
    write(path.as_ref(), &encode_labels(width, height, labels))
}

pub fn save_samples(samples: &SampleSet, path: impl AsRef<Path>) -> Result<(), ImageError> {
    write(path.as_ref(), encode_samples(samples).as_bytes())
}

/// Reads a sample CSV; locations are checked against the image bounds.
pub fn load_samples(
    path: impl AsRef<Path>,
    width: usize,
    height: usize,
) -> Result<SampleSet, ImageError> {
    let path = path.as_ref();
    let text = String::from_utf8(read(path)?).map_err(|e| ImageError::Format {
        offset: e.utf8_error().valid_up_to(),
        message: "sample file is not UTF-8".into(),
    })?;
    SampleSet::new(decode_samples(&text)?, width, height)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_red_pixel() {
        let img = decode_ppm(b"P6\n1 1\n255\n\xff\x00\x00").unwrap();
        assert_eq!(img.pixels(), &[[255, 0, 0]]);
    }

    #[test]
    fn comment_after_magic_is_skipped() {
        let mut bytes = b"P6\n# made by hand\n2 2\n255\n".to_vec();
        bytes.extend((0..12u8).collect::<Vec<_>>());
        let img = decode_ppm(&bytes).unwrap();
        assert_eq!(img.width(), 2);
        assert_eq!(img.get(1, 1), [9, 10, 11]);
    }

    #[test]
    fn wrong_magic_is_format_error() {
        let err = decode_ppm(b"P5\n1 1\n255\n\x00").unwrap_err();
        assert!(matches!(err, ImageError::Format { offset: 0, .. }), "{err}");
    }

    #[test]
    fn truncated_payload_names_offset() {
        let err = decode_ppm(b"P6\n2 1\n255\n\x01\x02\x03").unwrap_err();
        match err {
            ImageError::Truncated {
                offset,
                expected,
                found,
            } => {
                assert_eq!((offset, expected, found), (14, 6, 3));
            }
            other => panic!("unexpected {other}"),
        }
        assert!(matches!(
            decode_pgm16(b"P5\n1 1\n65535\n\x01"),
            Err(ImageError::Truncated { .. })
        ));
    }

    #[test]
    fn pgm16_samples_and_validity() {
        let d = decode_pgm16(b"P5\n1 1\n65535\n\x13\x88").unwrap();
        assert_eq!(d.depths(), &[5000.0]);
        assert_eq!(d.validity(), &[true]);
        let d = decode_pgm16(b"P5\n2 1\n65535\n\x00\x00\x04\xb0").unwrap();
        assert_eq!(d.depths(), &[0.0, 1200.0]);
        assert_eq!(d.validity(), &[false, true]);
    }

    #[test]
    fn pgm16_rejects_8bit_maxval() {
        let err = decode_pgm16(b"P5\n1 1\n255\n\x00").unwrap_err();
        assert!(matches!(err, ImageError::Format { .. }));
    }

    #[test]
    fn canonical_pgm16_round_trips_bytes() {
        let bytes = b"P5\n3 1\n65535\n\x00\x00\x13\x88\xff\xff".to_vec();
        let d = decode_pgm16(&bytes).unwrap();
        assert_eq!(d.get(2, 0), 65535.0);
        assert_eq!(encode_pgm16(&d), bytes);
    }

    #[test]
    fn empty_mask_is_all_zero() {
        let m = SamplingMask::empty(3, 2).unwrap();
        let bytes = encode_mask(&m);
        assert_eq!(&bytes[..11], b"P5\n3 2\n255\n");
        assert!(bytes[11..].iter().all(|&b| b == 0));
        assert_eq!(bytes.len(), 17);
    }

    #[test]
    fn sample_csv_line() {
        let s = SampleSet::new(vec![Location::new(1.5, 2.25)], 4, 4).unwrap();
        assert_eq!(encode_samples(&s), "1.500000,2.250000\n");
    }

    #[test]
    fn bad_csv_line_reports_offset() {
        let err = decode_samples("1,2\nfoo\n").unwrap_err();
        assert!(matches!(err, ImageError::Format { offset: 4, .. }));
    }

    #[test]
    fn valid_subunit_depth_stays_valid() {
        assert_eq!(depth_to_sample(0.2, true), 1);
        assert_eq!(depth_to_sample(0.2, false), 0);
        assert_eq!(depth_to_sample(1e9, true), 65535);
    }
}
