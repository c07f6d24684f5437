mod common;

use adaptive_depth::imagedata::{rgb_to_lab, srgb_to_lab, DepthMap, Location, RgbImage, SampleSet};
use adaptive_depth::reconstruct::{
    bilateral_reconstruct, build_affinity, colorization_reconstruct, nn_reconstruct, reconstruct,
    ReconstructError, ReconstructParams, ReconstructorKind, SolverConfig,
};
use adaptive_depth::samplers::{apply_mask, locations_to_mask};
use common::{dense_solve, gaussian, random_rgb, random_sparse};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn uniform_image_has_equal_weights() {
    let lab = rgb_to_lab(&RgbImage::filled(5, 4, [30, 140, 200]).unwrap());
    let g = build_affinity(&lab, 10.0).unwrap();
    for i in 0..g.len() {
        let deg = g.neighbors(i).len() as f64;
        assert!(g.weights(i).iter().all(|&w| (w - 1.0 / deg).abs() < 1e-15));
        assert!((g.weights(i).iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
    assert_eq!(g.neighbors(0).len(), 3);
    assert_eq!(g.neighbors(6).len(), 8);
}

#[test]
fn outlier_center_matches_hand_evaluation() {
    let img = RgbImage::from_fn(3, 3, |x, y| match (x, y) {
        (1, 1) => [180, 60, 40],
        (0, _) => [120, 110, 100],
        _ => [100, 120, 110],
    })
    .unwrap();
    let lab = rgb_to_lab(&img);
    let sigma = 25.0;
    let g = build_affinity(&lab, sigma).unwrap();
    let center = srgb_to_lab([180, 60, 40]);
    let mut expected = Vec::new();
    for j in g.neighbors(4) {
        let (x, y) = (*j as usize % 3, *j as usize / 3);
        let c = srgb_to_lab(img.get(x, y));
        let d2 =
            (center[0] - c[0]).powi(2) + (center[1] - c[1]).powi(2) + (center[2] - c[2]).powi(2);
        expected.push((-d2 / (2.0 * sigma * sigma)).exp());
    }
    let total: f64 = expected.iter().sum();
    assert_eq!(g.neighbors(4).len(), 8);
    for (got, raw) in g.weights(4).iter().zip(&expected) {
        let want = raw / total;
        assert!((got - want).abs() <= 1e-10 * want, "{got} vs {want}");
        assert!(*got > 0.0);
    }
}

#[test]
fn affinity_structure_is_symmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let lab = rgb_to_lab(&random_rgb(7, 5, &mut rng));
    let g = build_affinity(&lab, 10.0).unwrap();
    for i in 0..g.len() {
        for (&j, &a) in g.neighbors(i).iter().zip(g.raw_weights(i)) {
            let back = g
                .neighbors(j as usize)
                .iter()
                .position(|&k| k as usize == i)
                .unwrap();
            assert_eq!(g.raw_weights(j as usize)[back], a);
        }
        assert!(g.weights(i).iter().all(|&w| w > 0.0));
    }
    assert!(build_affinity(&lab, 0.0).is_err());
}

#[test]
fn constant_samples_give_constant_depth() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let lab = rgb_to_lab(&random_rgb(20, 15, &mut rng));
    for count in [1, 7, 40] {
        let mut sparse = random_sparse(20, 15, count, &mut rng);
        let values: Vec<f64> = sparse.depths().iter().map(|_| 1500.0).collect();
        sparse = DepthMap::new(20, 15, values, sparse.validity().to_vec()).unwrap();
        let out = colorization_reconstruct(&lab, &sparse, &SolverConfig::default()).unwrap();
        assert!(out.converged);
        assert!(out
            .depth
            .depths()
            .iter()
            .all(|&d| (d - 1500.0).abs() <= 1500.0 * 1e-6));
        let bil = bilateral_reconstruct(&lab, &sparse, 3.0, 10.0, 9.0).unwrap();
        assert!(bil.depths().iter().all(|&d| (d - 1500.0).abs() < 1e-9));
    }
}

#[test]
fn samples_are_kept_bit_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let lab = rgb_to_lab(&random_rgb(16, 12, &mut rng));
        let sparse = random_sparse(16, 12, 15, &mut rng);
        for kind in [ReconstructorKind::Colorization, ReconstructorKind::Nearest] {
            let out = reconstruct(kind, &lab, &sparse, &ReconstructParams::default()).unwrap();
            for (i, d) in sparse.valid_samples() {
                assert_eq!(out.depth.depths()[i].to_bits(), d.to_bits(), "{kind}");
            }
        }
    }
}

#[test]
fn uniform_row_interpolates_linearly() {
    let lab = rgb_to_lab(&RgbImage::filled(9, 1, [90, 90, 90]).unwrap());
    let mut depth = vec![0.0; 9];
    let mut valid = vec![false; 9];
    depth[8] = 800.0;
    valid[0] = true;
    valid[8] = true;
    let sparse = DepthMap::new(9, 1, depth, valid).unwrap();
    let out = colorization_reconstruct(&lab, &sparse, &SolverConfig::default()).unwrap();
    for x in 0..9 {
        assert!(
            (out.depth.get(x, 0) - 100.0 * x as f64).abs() <= 0.5,
            "x={x}"
        );
    }
}

#[test]
fn matches_dense_direct_solve() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let sigma = 30.0;
    let cfg = SolverConfig {
        sigma_c: sigma,
        tol: 1e-12,
        ..SolverConfig::default()
    };
    for case in 0..20 {
        let lab = rgb_to_lab(&random_rgb(8, 8, &mut rng));
        let count = rng.gen_range(1..=12);
        let sparse = random_sparse(8, 8, count, &mut rng);
        let got = colorization_reconstruct(&lab, &sparse, &cfg).unwrap();
        assert!(got.converged);
        let want = dense_solve(&lab, &sparse, sigma);
        for (g, w) in got.depth.depths().iter().zip(&want) {
            assert!((g - w).abs() <= 1e-6 * w.abs(), "case {case}: {g} vs {w}");
        }
    }
}

#[test]
fn converged_solutions_meet_tolerance() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let lab = rgb_to_lab(&random_rgb(30, 20, &mut rng));
    let sparse = random_sparse(30, 20, 12, &mut rng);
    let cfg = SolverConfig::default();
    let out = colorization_reconstruct(&lab, &sparse, &cfg).unwrap();
    assert!(out.converged);
    assert!(out.relative_residual <= cfg.tol);

    let starved = SolverConfig {
        max_iters: 1,
        ..cfg
    };
    let out = colorization_reconstruct(&lab, &sparse, &starved).unwrap();
    assert!(!out.converged);
    assert!(out.relative_residual > starved.tol);
}

#[test]
fn colorization_obeys_maximum_principle() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for case in 0..100 {
        let (w, h) = (rng.gen_range(3..14), rng.gen_range(3..14));
        let lab = rgb_to_lab(&random_rgb(w, h, &mut rng));
        let count = rng.gen_range(1..=(w * h / 4).max(1));
        let sparse = random_sparse(w, h, count, &mut rng);
        let lo = sparse
            .valid_samples()
            .map(|s| s.1)
            .fold(f64::INFINITY, f64::min);
        let hi = sparse
            .valid_samples()
            .map(|s| s.1)
            .fold(f64::NEG_INFINITY, f64::max);
        let out = colorization_reconstruct(&lab, &sparse, &SolverConfig::default()).unwrap();
        for &d in out.depth.depths() {
            assert!(
                d >= lo - 1e-6 && d <= hi + 1e-6,
                "case {case}: {d} outside [{lo}, {hi}]"
            );
        }
    }
}

#[test]
fn nearest_fill_examples() {
    let single = DepthMap::new(
        4,
        3,
        (0..12).map(|i| if i == 5 { 777.0 } else { 0.0 }).collect(),
        (0..12).map(|i| i == 5).collect(),
    )
    .unwrap();
    let out = nn_reconstruct(&single).unwrap();
    assert!(out.depths().iter().all(|&d| d == 777.0));

    let mut depth = vec![0.0; 10];
    depth[0] = 100.0;
    depth[9] = 900.0;
    let sparse = DepthMap::from_zero_invalid(10, 1, depth).unwrap();
    let out = nn_reconstruct(&sparse).unwrap();
    let want = [
        100.0, 100.0, 100.0, 100.0, 100.0, 900.0, 900.0, 900.0, 900.0, 900.0,
    ];
    assert_eq!(out.depths(), &want);
}

#[test]
fn nearest_fill_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let sparse = random_sparse(17, 11, rng.gen_range(1..20), &mut rng);
        let out = nn_reconstruct(&sparse).unwrap();
        let samples: Vec<(usize, f64)> = sparse.valid_samples().collect();
        for p in 0..17 * 11 {
            let (px, py) = ((p % 17) as f64, (p / 17) as f64);
            let best = samples
                .iter()
                .map(|&(i, d)| {
                    (
                        ((i % 17) as f64 - px).powi(2) + ((i / 17) as f64 - py).powi(2),
                        d,
                    )
                })
                .min_by(|a, b| a.0.total_cmp(&b.0))
                .unwrap();
            assert_eq!(out.depths()[p], best.1);
        }
    }
}

#[test]
fn bilateral_respects_color_edges() {
    let img = RgbImage::from_fn(
        10,
        1,
        |x, _| if x < 5 { [0, 0, 0] } else { [255, 255, 255] },
    )
    .unwrap();
    let lab = rgb_to_lab(&img);
    let mut depth = vec![0.0; 10];
    depth[2] = 100.0;
    depth[7] = 900.0;
    let sparse = DepthMap::from_zero_invalid(10, 1, depth).unwrap();
    let (sigma_s, sigma_c) = (3.0, 1.0);
    let out = bilateral_reconstruct(&lab, &sparse, sigma_s, sigma_c, 10.0).unwrap();

    // Weight sum at the last dark pixel, evaluated directly.
    let f = lab.pixels()[4];
    let weight = |q: usize| {
        let ds = (4.0 - q as f64).powi(2) / (2.0 * sigma_s * sigma_s);
        (-ds).exp() * gaussian(f, lab.pixels()[q], sigma_c)
    };
    let want = (weight(2) * 100.0 + weight(7) * 900.0) / (weight(2) + weight(7));
    assert!((out.get(4, 0) - want).abs() < 1e-9);
    assert!((out.get(4, 0) - 100.0).abs() < 1.0);
    assert!((out.get(5, 0) - 900.0).abs() < 1.0);
}

#[test]
fn bilateral_isolated_sample_and_fallback() {
    let lab = rgb_to_lab(&RgbImage::filled(12, 1, [40, 40, 40]).unwrap());
    let mut depth = vec![0.0; 12];
    depth[1] = 300.0;
    depth[10] = 600.0;
    let sparse = DepthMap::from_zero_invalid(12, 1, depth).unwrap();
    let out = bilateral_reconstruct(&lab, &sparse, 1.0, 10.0, 2.0).unwrap();
    assert_eq!(out.get(1, 0), 300.0);
    assert_eq!(out.get(10, 0), 600.0);
    assert_eq!(out.get(4, 0), 300.0);
    assert_eq!(out.get(7, 0), 600.0);
}

#[test]
fn reconstructors_ignore_sample_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let img = random_rgb(20, 14, &mut rng);
    let lab = rgb_to_lab(&img);
    let depth =
        DepthMap::from_fn(20, 14, |x, y| 1000.0 + 37.0 * x as f64 + 11.0 * y as f64).unwrap();
    let mut locs: Vec<Location> = (0..25)
        .map(|_| Location::new(rng.gen_range(0.0..19.0), rng.gen_range(0.0..13.0)))
        .collect();
    let sparse_of = |locs: &[Location]| {
        let set = SampleSet::new(locs.to_vec(), 20, 14).unwrap();
        apply_mask(&depth, &locations_to_mask(&set, 14, 20).unwrap()).unwrap()
    };
    let a = sparse_of(&locs);
    locs.reverse();
    let b = sparse_of(&locs);
    for kind in ReconstructorKind::ALL {
        let ra = reconstruct(kind, &lab, &a, &ReconstructParams::default()).unwrap();
        let rb = reconstruct(kind, &lab, &b, &ReconstructParams::default()).unwrap();
        assert_eq!(ra.depth, rb.depth, "{kind}");
    }
}

#[test]
fn errors_are_reported() {
    let lab = rgb_to_lab(&RgbImage::filled(4, 4, [1, 2, 3]).unwrap());
    let empty = DepthMap::new(4, 4, vec![0.0; 16], vec![false; 16]).unwrap();
    for kind in ReconstructorKind::ALL {
        assert!(matches!(
            reconstruct(kind, &lab, &empty, &ReconstructParams::default()),
            Err(ReconstructError::NoSamples)
        ));
    }
    let wrong = DepthMap::constant(3, 4, 10.0).unwrap();
    assert!(colorization_reconstruct(&lab, &wrong, &SolverConfig::default()).is_err());
    assert!("splines".parse::<ReconstructorKind>().is_err());
    assert_eq!(
        "bilateral".parse::<ReconstructorKind>().unwrap(),
        ReconstructorKind::Bilateral
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn every_estimator_stays_in_sample_range(seed in 0u64..10_000, count in 1usize..30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lab = rgb_to_lab(&random_rgb(12, 9, &mut rng));
        let sparse = random_sparse(12, 9, count, &mut rng);
        let lo = sparse.valid_samples().map(|s| s.1).fold(f64::INFINITY, f64::min);
        let hi = sparse.valid_samples().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
        for kind in ReconstructorKind::ALL {
            let out = reconstruct(kind, &lab, &sparse, &ReconstructParams::default()).unwrap();
            prop_assert_eq!(out.depth.valid_count(), 12 * 9);
            for &d in out.depth.depths() {
                prop_assert!(d >= lo - 1e-6 && d <= hi + 1e-6);
            }
        }
    }
}
