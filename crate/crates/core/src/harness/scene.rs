//! Deterministic synthetic RGB-D scenes.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::HarnessError;
use crate::imagedata::{DepthMap, RgbImage};
use crate::rng;

/// An RGB image with its dense ground-truth depth. `id` seeds any
/// per-frame randomness (e.g. random masks) and names files on disk.
#[derive(Clone, Debug, PartialEq)]
pub struct Scene {
    pub id: u64,
    pub rgb: RgbImage,
    pub depth: DepthMap,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SceneKind {
    /// 3 to 8 flat Voronoi regions, each with its own color and depth.
    PiecewiseConstant,
    /// Depth affine in (x, y) under a smooth color gradient.
    PlanarRamp,
    /// Two half-planes with different color and depth.
    StepEdge,
    /// Smooth depth under high-frequency color texture.
    Textured,
}

impl SceneKind {
    pub const ALL: [SceneKind; 4] = [
        SceneKind::PiecewiseConstant,
        SceneKind::PlanarRamp,
        SceneKind::StepEdge,
        SceneKind::Textured,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SceneKind::PiecewiseConstant => "piecewise-constant",
            SceneKind::PlanarRamp => "planar-ramp",
            SceneKind::StepEdge => "step-edge",
            SceneKind::Textured => "textured",
        }
    }
}

impl fmt::Display for SceneKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for SceneKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SceneKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| HarnessError::Parameter(format!("unknown scene kind {s:?}")))
    }
}

/// `depth(x, y) = offset + dx * x + dy * y` in millimeters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RampCoefficients {
    pub offset: f64,
    pub dx: f64,
    pub dy: f64,
}

impl RampCoefficients {
    pub fn depth_at(&self, x: f64, y: f64) -> f64 {
        self.offset + self.dx * x + self.dy * y
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticScene {
    pub kind: SceneKind,
    pub scene: Scene,
    /// Present for [`SceneKind::PlanarRamp`].
    pub ramp: Option<RampCoefficients>,
}

const PALETTE: [[u8; 3]; 14] = [
    [230, 25, 75],
    [60, 180, 75],
    [255, 225, 25],
    [0, 130, 200],
    [245, 130, 48],
    [145, 30, 180],
    [70, 240, 240],
    [240, 50, 230],
    [210, 245, 60],
    [0, 128, 128],
    [170, 110, 40],
    [128, 0, 0],
    [0, 0, 128],
    [128, 128, 128],
];

const MIN_DEPTH: f64 = 500.0;
const MAX_DEPTH: f64 = 20_000.0;

/// Parametric scene, rendered at a horizontal offset so sequences can
/// translate content.
enum Model {
    Regions {
        sites: Vec<(f64, f64)>,
        colors: Vec<[u8; 3]>,
        depths: Vec<f64>,
    },
    Ramp(RampCoefficients),
    Step {
        normal: (f64, f64),
        offset: f64,
        colors: [[u8; 3]; 2],
        depths: [f64; 2],
    },
    Texture {
        base: f64,
        amp: (f64, f64),
        freq: (f64, f64),
        period: usize,
        colors: [[u8; 3]; 2],
    },
}

fn distinct_depths(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(n);
    while out.len() < n {
        let d = rng.gen_range(MIN_DEPTH..MAX_DEPTH).round();
        if out.iter().all(|o| (o - d).abs() >= 1000.0) {
            out.push(d);
        }
    }
    out
}

impl Model {
    fn new(kind: SceneKind, height: usize, width: usize, seed: u64) -> Self {
        let mut rng = rng::seeded(seed);
        let (w, h) = (width as f64, height as f64);
        let mut palette = PALETTE.to_vec();
        palette.shuffle(&mut rng);
        match kind {
            SceneKind::PiecewiseConstant => {
                let n = rng.gen_range(3..=8);
                let sites = (0..n)
                    .map(|_| (rng.gen_range(0.0..w), rng.gen_range(0.0..h)))
                    .collect();
                Model::Regions {
                    sites,
                    colors: palette[..n].to_vec(),
                    depths: distinct_depths(&mut rng, n),
                }
            }
            SceneKind::PlanarRamp => Model::Ramp(RampCoefficients {
                offset: rng.gen_range(9000.0..11000.0_f64).round(),
                dx: rng.gen_range(-1.0..1.0) * 4000.0 / w,
                dy: rng.gen_range(-1.0..1.0) * 4000.0 / h,
            }),
            SceneKind::StepEdge => {
                let angle: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                let normal = (angle.cos(), angle.sin());
                let cx = rng.gen_range(0.3 * w..0.7 * w);
                let cy = rng.gen_range(0.3 * h..0.7 * h);
                let d = distinct_depths(&mut rng, 2);
                Model::Step {
                    normal,
                    offset: normal.0 * cx + normal.1 * cy,
                    colors: [palette[0], palette[1]],
                    depths: [d[0], d[1]],
                }
            }
            SceneKind::Textured => Model::Texture {
                base: rng.gen_range(6000.0..12000.0),
                amp: (rng.gen_range(1000.0..3000.0), rng.gen_range(1000.0..2500.0)),
                freq: (rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0)),
                period: rng.gen_range(3..=6),
                colors: [palette[0], palette[1]],
            },
        }
    }

    fn sample(&self, x: f64, y: f64, width: f64, height: f64) -> ([u8; 3], f64) {
        match self {
            Model::Regions {
                sites,
                colors,
                depths,
            } => {
                let mut best = (f64::INFINITY, 0);
                for (i, s) in sites.iter().enumerate() {
                    let d = (x - s.0).powi(2) + (y - s.1).powi(2);
                    if d < best.0 {
                        best = (d, i);
                    }
                }
                (colors[best.1], depths[best.1])
            }
            Model::Ramp(c) => {
                let r = (60.0 + 120.0 * (x / width).clamp(0.0, 1.0)) as u8;
                let g = (80.0 + 100.0 * (y / height).clamp(0.0, 1.0)) as u8;
                ([r, g, 150], c.depth_at(x, y))
            }
            Model::Step {
                normal,
                offset,
                colors,
                depths,
            } => {
                let side = usize::from(normal.0 * x + normal.1 * y >= *offset);
                (colors[side], depths[side])
            }
            Model::Texture {
                base,
                amp,
                freq,
                period,
                colors,
            } => {
                use std::f64::consts::TAU;
                let depth = base
                    + amp.0 * (TAU * freq.0 * x / width).sin()
                    + amp.1 * (TAU * freq.1 * y / height).cos();
                let cell = (x.floor() as i64).div_euclid(*period as i64)
                    + (y.floor() as i64).div_euclid(*period as i64);
                (colors[cell.rem_euclid(2) as usize], depth)
            }
        }
    }

    fn render(&self, id: u64, height: usize, width: usize, shift: f64) -> Scene {
        let (w, h) = (width as f64, height as f64);
        let mut rgb = Vec::with_capacity(width * height);
        let mut depth = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                let (c, d) = self.sample(x as f64 - shift, y as f64, w, h);
                rgb.push(c);
                depth.push(d.clamp(MIN_DEPTH, MAX_DEPTH));
            }
        }
        Scene {
            id,
            rgb: RgbImage::new(width, height, rgb).expect("dimensions match"),
            depth: DepthMap::dense(width, height, depth).expect("depths finite"),
        }
    }
}

fn check_dims(height: usize, width: usize) -> Result<(), HarnessError> {
    if height == 0 || width == 0 {
        return Err(HarnessError::Parameter(format!(
            "scene dimensions must be positive, got {height}x{width}"
        )));
    }
    Ok(())
}

/// One synthetic scene; identical arguments give identical scenes.
pub fn gen_scene(
    kind: SceneKind,
    height: usize,
    width: usize,
    seed: u64,
) -> Result<SyntheticScene, HarnessError> {
    check_dims(height, width)?;
    let model = Model::new(kind, height, width, seed);
    let ramp = match &model {
        Model::Ramp(c) => Some(*c),
        _ => None,
    };
    Ok(SyntheticScene {
        kind,
        scene: model.render(0, height, width, 0.0),
        ramp,
    })
}

/// `count` independent scenes with ids `0..count`.
pub fn gen_scenes(
    kind: SceneKind,
    count: usize,
    height: usize,
    width: usize,
    seed: u64,
) -> Result<Vec<Scene>, HarnessError> {
    (0..count)
        .map(|i| {
            let mut s = gen_scene(kind, height, width, rng::derive(seed, i as u64))?.scene;
            s.id = i as u64;
            Ok(s)
        })
        .collect()
}

/// A sequence whose content translates `velocity` pixels per frame to the
/// right. Frame ids are frame indices. `velocity = 0` gives a static
/// sequence of identical frames.
pub fn gen_sequence(
    kind: SceneKind,
    height: usize,
    width: usize,
    seed: u64,
    frames: usize,
    velocity: f64,
) -> Result<Vec<Scene>, HarnessError> {
    check_dims(height, width)?;
    let model = Model::new(kind, height, width, seed);
    Ok((0..frames)
        .map(|f| model.render(f as u64, height, width, velocity * f as f64))
        .collect())
}
