use adaptive_depth::imagedata::io::{
    decode_mask, decode_pgm16, decode_ppm, decode_samples, encode_mask, encode_pgm16, encode_ppm,
    encode_samples,
};
use adaptive_depth::imagedata::{
    load_mask, load_pgm16, load_ppm, load_samples, rgb_to_lab, save_mask, save_pgm16, save_ppm,
    save_samples, srgb_to_lab, DepthMap, ImageError, Location, RgbImage, SampleSet, SamplingMask,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Textbook sRGB -> XYZ -> CIELAB with the CIE epsilon/kappa constants.
fn lab_oracle(rgb: [u8; 3]) -> [f64; 3] {
    let lin = |c: u8| {
        let v = c as f64 / 255.0;
        if v <= 0.04045 {
            v / 12.92
        } else {
            ((v + 0.055) / 1.055).powf(2.4)
        }
    };
    let (r, g, b) = (lin(rgb[0]), lin(rgb[1]), lin(rgb[2]));
    let m = [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ];
    let xyz: Vec<f64> = m
        .iter()
        .map(|row| row[0] * r + row[1] * g + row[2] * b)
        .collect();
    let white = [0.95047, 1.0, 1.08883];
    let eps = 216.0 / 24389.0;
    let kappa = 24389.0 / 27.0;
    let f = |t: f64| {
        if t > eps {
            t.powf(1.0 / 3.0)
        } else {
            (kappa * t + 16.0) / 116.0
        }
    };
    let fx = f(xyz[0] / white[0]);
    let fy = f(xyz[1] / white[1]);
    let fz = f(xyz[2] / white[2]);
    [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

#[test]
fn red_matches_reference_lab() {
    let lab = srgb_to_lab([255, 0, 0]);
    let oracle = lab_oracle([255, 0, 0]);
    // Offline evaluation of the same published formulas.
    let offline = [53.24079414130722, 80.09245959641109, 67.20319651585301];
    for c in 0..3 {
        assert!(
            (lab[c] - oracle[c]).abs() < 0.05,
            "channel {c}: {lab:?} vs {oracle:?}"
        );
        assert!(
            (lab[c] - offline[c]).abs() < 0.05,
            "channel {c}: {lab:?} vs {offline:?}"
        );
    }
}

#[test]
fn image_conversion_is_pixelwise() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let img = RgbImage::from_fn(20, 10, |_, _| [rng.gen(), rng.gen(), rng.gen()]).unwrap();
    let lab = rgb_to_lab(&img);
    let mut pick = ChaCha8Rng::seed_from_u64(18);
    for _ in 0..100 {
        let (x, y) = (pick.gen_range(0..20), pick.gen_range(0..10));
        let expected = lab_oracle(img.get(x, y));
        let got = lab.get(x, y);
        assert_eq!(got, srgb_to_lab(img.get(x, y)));
        for c in 0..3 {
            assert!((got[c] - expected[c]).abs() < 1e-3);
        }
        assert!((0.0..=100.0).contains(&got[0]));
    }
}

#[test]
fn ppm_single_pixel_and_comments() {
    let img = decode_ppm(b"P6\n1 1\n255\n\xff\x00\x00").unwrap();
    assert_eq!((img.width(), img.height()), (1, 1));
    assert_eq!(img.pixels(), &[[255, 0, 0]]);

    let mut bytes = b"P6\n# made by hand\n2 2\n255\n".to_vec();
    bytes.extend_from_slice(&[1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12]);
    let img = decode_ppm(&bytes).unwrap();
    assert_eq!(img.get(1, 1), [10, 11, 12]);
}

#[test]
fn malformed_files_report_offsets() {
    assert!(matches!(
        decode_ppm(b"P5\n1 1\n255\n\x00"),
        Err(ImageError::Format { .. })
    ));
    match decode_ppm(b"P6\n2 1\n255\n\x01\x02\x03") {
        Err(ImageError::Truncated {
            expected, found, ..
        }) => {
            assert_eq!((expected, found), (6, 3));
        }
        other => panic!("expected truncation, got {other:?}"),
    }
    assert!(matches!(
        decode_pgm16(b"P5\n1 1\n255\n\x00"),
        Err(ImageError::Format { .. })
    ));
    assert!(matches!(
        decode_pgm16(b"P5\n2 1\n65535\n\x00\x01"),
        Err(ImageError::Truncated { .. })
    ));
}

#[test]
fn pgm16_values_and_validity() {
    let d = decode_pgm16(b"P5\n1 1\n65535\n\x13\x88").unwrap();
    assert_eq!(d.depths(), &[5000.0]);
    assert_eq!(d.validity(), &[true]);
    let d = decode_pgm16(b"P5\n2 1\n65535\n\x00\x00\x04\xb0").unwrap();
    assert_eq!(d.validity(), &[false, true]);
    assert_eq!(d.get(1, 0), 1200.0);

    let max = DepthMap::constant(1, 1, 65535.0).unwrap();
    assert_eq!(
        &encode_pgm16(&max)[encode_pgm16(&max).len() - 2..],
        &[0xff, 0xff]
    );
}

#[test]
fn empty_mask_encodes_all_zero() {
    let m = SamplingMask::empty(3, 2).unwrap();
    let bytes = encode_mask(&m);
    assert!(bytes.starts_with(b"P5\n3 2\n255\n"));
    assert!(bytes[bytes.len() - 6..].iter().all(|&b| b == 0));
}

#[test]
fn sample_csv_format() {
    let s = SampleSet::new(vec![Location::new(1.5, 2.25)], 4, 4).unwrap();
    assert_eq!(encode_samples(&s), "1.500000,2.250000\n");
    assert!(SampleSet::new(vec![Location::new(4.0, 0.0)], 4, 4).is_err());
}

#[test]
fn files_round_trip_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    let img = RgbImage::from_fn(5, 3, |x, y| [x as u8 * 40, y as u8 * 60, 7]).unwrap();
    save_ppm(&img, dir.path().join("a.ppm")).unwrap();
    assert_eq!(load_ppm(dir.path().join("a.ppm")).unwrap(), img);

    let depth = DepthMap::from_zero_invalid(3, 2, vec![0.0, 1.0, 2.0, 65535.0, 0.0, 17.0]).unwrap();
    save_pgm16(&depth, dir.path().join("d.pgm")).unwrap();
    assert_eq!(load_pgm16(dir.path().join("d.pgm")).unwrap(), depth);

    let mask = SamplingMask::from_indices(3, 2, [0, 4]).unwrap();
    save_mask(&mask, dir.path().join("m.pgm")).unwrap();
    assert_eq!(load_mask(dir.path().join("m.pgm")).unwrap(), mask);

    let samples = SampleSet::new(
        vec![Location::new(0.25, 1.0), Location::new(2.0, 0.5)],
        3,
        2,
    )
    .unwrap();
    save_samples(&samples, dir.path().join("s.csv")).unwrap();
    assert_eq!(
        load_samples(dir.path().join("s.csv"), 3, 2).unwrap(),
        samples
    );

    assert!(matches!(
        load_ppm(dir.path().join("missing.ppm")),
        Err(ImageError::Io { .. })
    ));
}

proptest! {
    #[test]
    fn ppm_round_trip(w in 1usize..12, h in 1usize..12, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let img = RgbImage::from_fn(w, h, |_, _| [rng.gen(), rng.gen(), rng.gen()]).unwrap();
        let bytes = encode_ppm(&img);
        let back = decode_ppm(&bytes).unwrap();
        prop_assert_eq!(&back, &img);
        prop_assert_eq!(encode_ppm(&back), bytes);
    }

    #[test]
    fn pgm16_round_trip(samples in prop::collection::vec(any::<u16>(), 1..64), w in 1usize..8) {
        let h = samples.len().div_ceil(w);
        let mut s = samples.clone();
        s.resize(w * h, 0);
        let mut bytes = format!("P5\n{w} {h}\n65535\n").into_bytes();
        for v in &s {
            bytes.extend_from_slice(&v.to_be_bytes());
        }
        let d = decode_pgm16(&bytes).unwrap();
        prop_assert_eq!(encode_pgm16(&d), bytes);
        for (i, v) in s.iter().enumerate() {
            prop_assert_eq!(d.validity()[i], *v != 0);
        }
    }

    #[test]
    fn mask_round_trip(bits in prop::collection::vec(any::<bool>(), 1..80), w in 1usize..9) {
        let h = bits.len().div_ceil(w);
        let mut b = bits.clone();
        b.resize(w * h, false);
        let m = SamplingMask::new(w, h, b.clone()).unwrap();
        prop_assert_eq!(m.count(), b.iter().filter(|&&x| x).count());
        prop_assert_eq!(decode_mask(&encode_mask(&m)).unwrap(), m);
    }

    #[test]
    fn sample_csv_round_trip(pts in prop::collection::vec((0.0f64..99.0, 0.0f64..49.0), 0..30)) {
        let locs: Vec<Location> = pts.iter().map(|&(x, y)| Location::new(x, y)).collect();
        let s = SampleSet::new(locs.clone(), 100, 50).unwrap();
        let back = decode_samples(&encode_samples(&s)).unwrap();
        prop_assert_eq!(back.len(), locs.len());
        for (a, b) in back.iter().zip(&locs) {
            prop_assert!((a.x - b.x).abs() <= 1e-6 && (a.y - b.y).abs() <= 1e-6);
        }
    }
}
