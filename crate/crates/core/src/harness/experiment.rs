use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

use super::metrics::error_stats;
use super::report::{CellResult, EvalReport, PerturbationCurve};
use super::{HarnessError, Scene};
use crate::imagedata::{
    rgb_to_lab, DepthMap, LabImage, Location, RgbImage, SampleSet, SamplingMask,
};
use crate::reconstruct::{reconstruct, ReconstructParams, ReconstructorKind};
use crate::rng;
use crate::samplers::{
    apply_mask, grid_mask, locations_to_mask, poisson_mask, random_mask, target_count,
};
use crate::ssa::{refine_locations, SsaConfig, SsaError};
use crate::superpixel::{sps_sample, sps_sample_detailed, SlicParams};

const JITTER_STREAM: u64 = 0x6a69_7474_6572;
const REFINE_STEPS: usize = 50;

/// Every way the harness can choose sample locations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SamplingMethod {
    Random,
    Grid,
    Poisson,
    /// One sample per superpixel center.
    Sps,
    /// Superpixel centers nudged through the soft sampler toward the
    /// median ground-truth depth of their superpixel.
    SsaRefined,
}

impl SamplingMethod {
    pub const ALL: [SamplingMethod; 5] = [
        SamplingMethod::Random,
        SamplingMethod::Grid,
        SamplingMethod::Poisson,
        SamplingMethod::Sps,
        SamplingMethod::SsaRefined,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SamplingMethod::Random => "random",
            SamplingMethod::Grid => "grid",
            SamplingMethod::Poisson => "poisson",
            SamplingMethod::Sps => "sps",
            SamplingMethod::SsaRefined => "ssa-refined",
        }
    }

    pub fn needs_depth(self) -> bool {
        self == SamplingMethod::SsaRefined
    }
}

impl fmt::Display for SamplingMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for SamplingMethod {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SamplingMethod::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| HarnessError::Parameter(format!("unknown sampling method {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Perturbation {
    None,
    /// Mask computed from frame `t - dt`, depth measured at frame `t`.
    Temporal(usize),
    /// Each sample moved by uniform noise in `[-k, k]^2` pixels.
    Jitter(f64),
}

impl Perturbation {
    fn level(self) -> f64 {
        match self {
            Perturbation::None => 0.0,
            Perturbation::Temporal(dt) => dt as f64,
            Perturbation::Jitter(k) => k,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub dataset: Option<PathBuf>,
    pub rates: Vec<f64>,
    pub samplers: Vec<SamplingMethod>,
    pub reconstructors: Vec<ReconstructorKind>,
    pub seeds: Vec<u64>,
    pub perturbation: Perturbation,
    pub slic: SlicParams,
    pub recon: ReconstructParams,
    /// Record wall time per cell. Off by default so reports are
    /// byte-for-byte reproducible.
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dataset: None,
            rates: vec![0.01, 0.0025, 0.000625],
            samplers: vec![
                SamplingMethod::Random,
                SamplingMethod::Grid,
                SamplingMethod::Poisson,
                SamplingMethod::Sps,
            ],
            reconstructors: ReconstructorKind::ALL.to_vec(),
            seeds: vec![0],
            perturbation: Perturbation::None,
            slic: SlicParams::default(),
            recon: ReconstructParams::default(),
            timing: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if let Some(r) = self.rates.iter().find(|r| !(**r > 0.0 && **r <= 1.0)) {
            return Err(HarnessError::Parameter(format!("rate {r} outside (0, 1]")));
        }
        if let Perturbation::Jitter(k) = self.perturbation {
            if !(k >= 0.0) {
                return Err(HarnessError::Parameter(format!(
                    "jitter range {k} is negative"
                )));
            }
        }
        for (name, empty) in [
            ("rates", self.rates.is_empty()),
            ("samplers", self.samplers.is_empty()),
            ("reconstructors", self.reconstructors.is_empty()),
            ("seeds", self.seeds.is_empty()),
        ] {
            if empty {
                return Err(HarnessError::Parameter(format!("no {name} configured")));
            }
        }
        Ok(())
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn ssa_refined(
    rgb: &RgbImage,
    depth: &DepthMap,
    n: usize,
    slic: SlicParams,
) -> Result<SampleSet, HarnessError> {
    let sps = sps_sample_detailed(rgb, n, slic)?;
    let seg = &sps.segmentation;
    let mut per_label: Vec<Vec<f64>> = vec![Vec::new(); seg.len()];
    for (p, &l) in seg.labels().iter().enumerate() {
        if depth.validity()[p] {
            per_label[l as usize].push(depth.depths()[p]);
        }
    }
    let (w, h) = (depth.width(), depth.height());
    let targets: Vec<f64> = per_label
        .iter_mut()
        .zip(sps.samples.iter())
        .map(|(v, loc)| {
            if v.is_empty() {
                let (x, y) = loc.clamped(w, h).nearest_pixel();
                depth.get(x, y)
            } else {
                median(v)
            }
        })
        .collect();
    let max_depth = depth
        .valid_samples()
        .map(|(_, d)| d)
        .fold(1.0_f64, f64::max);
    let lr = 0.25 / (max_depth * max_depth);
    match refine_locations(
        depth,
        &sps.samples,
        &targets,
        &SsaConfig::default(),
        lr,
        REFINE_STEPS,
    ) {
        Ok(r) => Ok(r.samples),
        Err(SsaError::Diverged { last_stable, .. }) => Ok(last_stable),
        Err(e) => Err(e.into()),
    }
}

/// Builds a mask of exactly `round(rate * H * W)` samples.
///
/// `depth` is read only by [`SamplingMethod::SsaRefined`], which requires
/// it. `seed` drives the random and Poisson baselines.
pub fn sample_mask(
    method: SamplingMethod,
    rgb: &RgbImage,
    depth: Option<&DepthMap>,
    rate: f64,
    seed: u64,
    slic: SlicParams,
) -> Result<SamplingMask, HarnessError> {
    let (w, h) = (rgb.width(), rgb.height());
    let n = target_count(rate, h, w)?;
    let mask = match method {
        SamplingMethod::Random => random_mask(h, w, n, seed)?,
        SamplingMethod::Grid => grid_mask(h, w, n)?,
        SamplingMethod::Poisson => poisson_mask(h, w, n, seed)?.mask,
        SamplingMethod::Sps => locations_to_mask(&sps_sample(rgb, n, slic)?, h, w)?,
        SamplingMethod::SsaRefined => {
            let depth = depth.ok_or_else(|| {
                HarnessError::Parameter("ssa-refined sampling needs a depth map".into())
            })?;
            if (depth.width(), depth.height()) != (w, h) {
                return Err(HarnessError::Parameter(format!(
                    "image is {w}x{h} but depth is {}x{}",
                    depth.width(),
                    depth.height()
                )));
            }
            locations_to_mask(&ssa_refined(rgb, depth, n, slic)?, h, w)?
        }
    };
    Ok(mask)
}

/// Moves every sample of `mask` by independent uniform noise in
/// `[-k, k]^2`, clips to the image and re-places collisions. The sample
/// count is preserved; `k = 0` returns the mask unchanged.
pub fn jitter_mask(mask: &SamplingMask, k: f64, seed: u64) -> Result<SamplingMask, HarnessError> {
    if !(k >= 0.0) {
        return Err(HarnessError::Parameter(format!(
            "jitter range {k} is negative"
        )));
    }
    let (w, h) = (mask.width(), mask.height());
    let mut rng = rng::seeded(seed);
    let moved: Vec<Location> = mask
        .indices()
        .into_iter()
        .map(|p| {
            let (dx, dy) = if k > 0.0 {
                (rng.gen_range(-k..=k), rng.gen_range(-k..=k))
            } else {
                (0.0, 0.0)
            };
            Location::new((p % w) as f64 + dx, (p / w) as f64 + dy).clamped(w, h)
        })
        .collect();
    Ok(locations_to_mask(&SampleSet::new(moved, w, h)?, h, w)?)
}

struct Unit {
    sampler: SamplingMethod,
    rate: f64,
    seed: u64,
    /// Frame whose RGB (and depth, for refinement) builds the mask.
    source: usize,
    /// Frame measured and evaluated.
    target: usize,
}

fn failed(
    unit: &Unit,
    scene: &Scene,
    recon: ReconstructorKind,
    level: f64,
    err: String,
) -> CellResult {
    CellResult {
        scene: scene.id,
        sampler: unit.sampler,
        reconstructor: recon,
        rate: unit.rate,
        seed: unit.seed,
        level,
        samples: 0,
        valid_pixels: 0,
        mae: None,
        rmse: None,
        time_ms: 0.0,
        converged: false,
        iterations: 0,
        error: Some(err),
    }
}

fn run_unit(
    cfg: &ExperimentConfig,
    scenes: &[Scene],
    labs: &[LabImage],
    unit: &Unit,
) -> Vec<CellResult> {
    let source = &scenes[unit.source];
    let target = &scenes[unit.target];
    let level = cfg.perturbation.level();
    let fail_all = |e: HarnessError| {
        cfg.reconstructors
            .iter()
            .map(|&r| failed(unit, target, r, level, e.to_string()))
            .collect::<Vec<_>>()
    };
    let clock = Instant::now();
    // Seeded by the measured frame, so a delay only changes which RGB
    // drives the mask.
    let mask_seed = rng::derive(unit.seed, target.id);
    let mask = sample_mask(
        unit.sampler,
        &source.rgb,
        Some(&source.depth),
        unit.rate,
        mask_seed,
        cfg.slic,
    )
    .and_then(|m| match cfg.perturbation {
        Perturbation::Jitter(k) => jitter_mask(&m, k, rng::derive(mask_seed, JITTER_STREAM)),
        _ => Ok(m),
    })
    .and_then(|m| {
        if (m.width(), m.height()) != (target.depth.width(), target.depth.height()) {
            return Err(HarnessError::Dataset(format!(
                "frames {} and {} differ in size",
                source.id, target.id
            )));
        }
        Ok(m)
    });
    let mask = match mask {
        Ok(m) => m,
        Err(e) => return fail_all(e),
    };
    let mask_ms = clock.elapsed().as_secs_f64() * 1e3;
    let sparse = match apply_mask(&target.depth, &mask) {
        Ok(s) => s,
        Err(e) => return fail_all(e.into()),
    };

    cfg.reconstructors
        .iter()
        .map(|&recon| {
            let clock = Instant::now();
            let outcome = reconstruct(recon, &labs[unit.target], &sparse, &cfg.recon)
                .map_err(HarnessError::from)
                .and_then(|r| Ok((error_stats(&r.depth, &target.depth)?, r)));
            let time_ms = if cfg.timing {
                mask_ms + clock.elapsed().as_secs_f64() * 1e3
            } else {
                0.0
            };
            match outcome {
                Ok((stats, r)) => CellResult {
                    scene: target.id,
                    sampler: unit.sampler,
                    reconstructor: recon,
                    rate: unit.rate,
                    seed: unit.seed,
                    level,
                    samples: mask.count(),
                    valid_pixels: stats.pixels,
                    mae: Some(stats.mae),
                    rmse: Some(stats.rmse),
                    time_ms,
                    converged: r.converged,
                    iterations: r.iterations,
                    error: None,
                },
                Err(e) => failed(unit, target, recon, level, e.to_string()),
            }
        })
        .collect()
}

fn run_cells(
    cfg: &ExperimentConfig,
    scenes: &[Scene],
    first_frame: usize,
) -> Result<EvalReport, HarnessError> {
    cfg.validate()?;
    if scenes.is_empty() {
        return Err(HarnessError::Dataset("no scenes to evaluate".into()));
    }
    let delay = match cfg.perturbation {
        Perturbation::Temporal(dt) => dt,
        _ => 0,
    };
    if scenes.len() <= first_frame.max(delay) {
        return Err(HarnessError::Parameter(format!(
            "sequence of {} frames is too short for a delay of {}",
            scenes.len(),
            first_frame.max(delay)
        )));
    }
    let labs: Vec<LabImage> = scenes.par_iter().map(|s| rgb_to_lab(&s.rgb)).collect();

    let mut samplers = cfg.samplers.clone();
    samplers.sort();
    samplers.dedup();
    let mut rates = cfg.rates.clone();
    rates.sort_by(f64::total_cmp);
    rates.dedup();
    let mut seeds = cfg.seeds.clone();
    seeds.sort();
    seeds.dedup();

    let mut units = Vec::new();
    for &sampler in &samplers {
        for &rate in &rates {
            for &seed in &seeds {
                for t in first_frame.max(delay)..scenes.len() {
                    units.push(Unit {
                        sampler,
                        rate,
                        seed,
                        source: t - delay,
                        target: t,
                    });
                }
            }
        }
    }
    let mut rows: Vec<CellResult> = units
        .par_iter()
        .flat_map_iter(|u| run_unit(cfg, scenes, &labs, u))
        .collect();
    rows.sort_by(|a, b| a.sort_key_cmp(b));
    Ok(EvalReport {
        rows,
        timing: cfg.timing,
    })
}

/// Evaluates every (scene, sampler, reconstructor, rate, seed) cell:
/// sample, measure, reconstruct, score. Failed cells are kept in the report
/// with their error; the run continues.
///
/// Cells run in parallel; rows come back in a fixed order (sampler,
/// reconstructor, rate, seed, scene). With [`Perturbation::Temporal`] the
/// scenes are read as an ordered sequence and frames before the delay are
/// skipped.
pub fn run_matrix(cfg: &ExperimentConfig, scenes: &[Scene]) -> Result<EvalReport, HarnessError> {
    run_cells(cfg, scenes, 0)
}

/// Runs the matrix once per frame delay. All delays are scored on the same
/// frames `max(delays)..len`, so the curve compares like with like.
pub fn temporal_experiment(
    frames: &[Scene],
    delays: &[usize],
    cfg: &ExperimentConfig,
) -> Result<PerturbationCurve, HarnessError> {
    let first = delays
        .iter()
        .copied()
        .max()
        .ok_or_else(|| HarnessError::Parameter("no frame delays given".into()))?;
    let reports = delays
        .iter()
        .map(|&dt| {
            let cfg = ExperimentConfig {
                perturbation: Perturbation::Temporal(dt),
                ..cfg.clone()
            };
            run_cells(&cfg, frames, first)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PerturbationCurve {
        parameter: "delay_frames",
        levels: delays.iter().map(|&d| d as f64).collect(),
        reports,
    })
}

/// Runs the matrix once per jitter range `k` (pixels).
pub fn jitter_experiment(
    scenes: &[Scene],
    ranges: &[f64],
    cfg: &ExperimentConfig,
) -> Result<PerturbationCurve, HarnessError> {
    if ranges.is_empty() {
        return Err(HarnessError::Parameter("no jitter ranges given".into()));
    }
    let reports = ranges
        .iter()
        .map(|&k| {
            let cfg = ExperimentConfig {
                perturbation: Perturbation::Jitter(k),
                ..cfg.clone()
            };
            run_matrix(&cfg, scenes)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PerturbationCurve {
        parameter: "jitter_px",
        levels: ranges.to_vec(),
        reports,
    })
}
