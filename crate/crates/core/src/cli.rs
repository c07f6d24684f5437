//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error (unreadable or
//! malformed input, failed gradient check).

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::harness::{
    self, config, gen_scenes, gen_sequence, gradient_check, load_dataset, run_matrix, sample_mask,
    save_dataset, ExperimentConfig, HarnessError, Perturbation, SamplingMethod, SceneKind,
};
use crate::imagedata::{
    load_pgm16, load_ppm, rgb_to_lab, save_labels, save_mask, save_pgm16, save_samples,
};
use crate::reconstruct::{reconstruct, ReconstructParams, ReconstructorKind, SolverConfig};
use crate::samplers::target_count;
use crate::superpixel::{sps_sample_detailed, SlicParams};

#[derive(Parser, Debug)]
#[command(
    name = "adaptive-depth",
    version,
    about = "Adaptive depth sampling and reconstruction"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a sampling mask for one RGB image.
    #[command(args_override_self = true)]
    Sample(SampleArgs),
    /// Densify sparse depth guided by an RGB image.
    #[command(args_override_self = true)]
    Reconstruct(ReconstructArgs),
    /// Score an estimated depth map against ground truth.
    #[command(args_override_self = true)]
    Eval(EvalArgs),
    /// Sample, reconstruct and score every scene of a dataset.
    #[command(args_override_self = true)]
    Pipeline(PipelineArgs),
    /// Compare soft-sampling gradients with finite differences.
    #[command(name = "grad-check", args_override_self = true)]
    GradCheck(GradCheckArgs),
    /// Write synthetic RGB-D scenes.
    #[command(name = "gen-scenes", args_override_self = true)]
    GenScenes(GenScenesArgs),
}

#[derive(Args, Debug)]
struct ConfigArg {
    /// key = value file; flags on the command line take precedence.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SlicArgs {
    /// Superpixel compactness.
    #[arg(long, default_value_t = 1.0)]
    m: f64,
    /// SLIC iterations.
    #[arg(long, default_value_t = 10)]
    iters: usize,
}

impl SlicArgs {
    fn params(&self) -> SlicParams {
        SlicParams {
            m: self.m,
            iters: self.iters,
        }
    }
}

#[derive(Args, Debug)]
struct SolverArgs {
    /// Color bandwidth in Lab units.
    #[arg(long, default_value_t = 10.0)]
    sigma_c: f64,
    /// Relative residual tolerance of the propagation solver.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 20_000)]
    max_iters: usize,
    /// Spatial bandwidth of the bilateral estimator (pixels).
    #[arg(long)]
    sigma_s: Option<f64>,
    /// Search radius of the bilateral estimator (pixels).
    #[arg(long)]
    radius: Option<f64>,
}

impl SolverArgs {
    fn params(&self) -> ReconstructParams {
        ReconstructParams {
            solver: SolverConfig {
                sigma_c: self.sigma_c,
                max_iters: self.max_iters,
                tol: self.tol,
            },
            sigma_s: self.sigma_s,
            radius: self.radius,
        }
    }
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long, value_parser = parse_method)]
    method: SamplingMethod,
    #[arg(long)]
    rate: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// RGB image (binary PPM).
    #[arg(long)]
    rgb: PathBuf,
    /// Ground-truth depth (16-bit PGM); required by ssa-refined.
    #[arg(long)]
    depth: Option<PathBuf>,
    /// Output mask (PGM, 255 = sampled).
    #[arg(long)]
    out: PathBuf,
    /// Also write the sampled pixel coordinates as x,y lines.
    #[arg(long)]
    samples_out: Option<PathBuf>,
    /// For sps: dump the segmentation as a 16-bit label PGM.
    #[arg(long)]
    labels_out: Option<PathBuf>,
    #[command(flatten)]
    slic: SlicArgs,
}

#[derive(Args, Debug)]
struct ReconstructArgs {
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long, value_parser = parse_recon)]
    method: ReconstructorKind,
    #[arg(long)]
    rgb: PathBuf,
    /// Sparse depth (16-bit PGM, 0 = no sample).
    #[arg(long)]
    sparse: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long)]
    est: PathBuf,
    #[arg(long)]
    gt: PathBuf,
}

#[derive(Args, Debug)]
struct PipelineArgs {
    #[command(flatten)]
    config: ConfigArg,
    /// Sampling methods, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "sps", value_parser = parse_method)]
    method: Vec<SamplingMethod>,
    /// Sampling rates, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0.01,0.0025,0.000625")]
    rate: Vec<f64>,
    /// Reconstructors, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "colorization", value_parser = parse_recon)]
    recon: Vec<ReconstructorKind>,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    seed: Vec<u64>,
    /// Dataset directory of NNN_rgb.ppm / NNN_depth.pgm pairs.
    #[arg(long = "in")]
    input: PathBuf,
    /// CSV report; a JSON mirror is written next to it.
    #[arg(long)]
    out: PathBuf,
    /// Jitter every sample by up to this many pixels.
    #[arg(long, conflicts_with = "delay")]
    jitter: Option<f64>,
    /// Build masks from the frame this many steps earlier.
    #[arg(long)]
    delay: Option<usize>,
    /// Record wall time per cell (the CSV is then no longer reproducible).
    #[arg(long)]
    timing: bool,
    #[command(flatten)]
    slic: SlicArgs,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args, Debug)]
struct GradCheckArgs {
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long, default_value_t = 1000)]
    cases: usize,
    #[arg(long, default_value_t = crate::ssa::DEFAULT_WINDOW)]
    window: usize,
    /// Fixed temperature; otherwise drawn from the schedule range.
    #[arg(long, conflicts_with = "schedule")]
    temp: Option<f64>,
    /// Temperature range as T_START,T_END.
    #[arg(long, value_delimiter = ',', num_args = 2, default_value = "2,0.2")]
    schedule: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest accepted relative error.
    #[arg(long, default_value_t = 1e-4)]
    threshold: f64,
}

#[derive(Args, Debug)]
struct GenScenesArgs {
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long, value_parser = parse_kind)]
    kind: SceneKind,
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(long, default_value_t = 120)]
    height: usize,
    #[arg(long, default_value_t = 160)]
    width: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write one translating sequence moving this many pixels per frame
    /// instead of independent scenes.
    #[arg(long)]
    velocity: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

fn parse_method(s: &str) -> Result<SamplingMethod, String> {
    s.parse().map_err(|e: HarnessError| e.to_string())
}

fn parse_recon(s: &str) -> Result<ReconstructorKind, String> {
    s.parse()
        .map_err(|e: crate::reconstruct::ReconstructError| e.to_string())
}

fn parse_kind(s: &str) -> Result<SceneKind, String> {
    s.parse().map_err(|e: HarnessError| e.to_string())
}

enum Failure {
    Usage(String),
    Data(String),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        use crate::reconstruct::ReconstructError;
        use crate::samplers::SamplerError;
        use crate::ssa::SsaError;
        match e {
            HarnessError::Parameter(m) => Failure::Usage(m),
            HarnessError::Sampler(SamplerError::Parameter(_))
            | HarnessError::Superpixel(_)
            | HarnessError::Ssa(SsaError::Parameter(_))
            | HarnessError::Reconstruct(ReconstructError::Parameter(_)) => {
                Failure::Usage(e.to_string())
            }
            other => Failure::Data(other.to_string()),
        }
    }
}

macro_rules! data_err {
    ($e:expr) => {
        $e.map_err(|e| Failure::from(HarnessError::from(e)))
    };
}

/// Splices `--config FILE` entries in right after the subcommand. Keys
/// also given as flags on the command line are dropped, so flags win.
fn expand_config(argv: Vec<OsString>) -> Result<Vec<OsString>, Failure> {
    let mut path = None;
    for (i, a) in argv.iter().enumerate().skip(2) {
        let s = a.to_string_lossy();
        if s == "--config" {
            path = argv.get(i + 1).map(PathBuf::from);
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(PathBuf::from(p));
        }
    }
    let Some(path) = path else { return Ok(argv) };
    if argv.len() < 2 {
        return Ok(argv);
    }
    let file = config::load_config(&path).map_err(|e| match e {
        HarnessError::Io { .. } => Failure::Data(e.to_string()),
        other => Failure::Usage(other.to_string()),
    })?;
    let explicit: Vec<String> = argv[2..]
        .iter()
        .filter_map(|a| a.to_str()?.strip_prefix("--"))
        .map(|a| a.split('=').next().unwrap_or(a).to_string())
        .collect();
    let mut extra: Vec<OsString> = Vec::new();
    for (key, value) in &file.entries {
        if key == "config" {
            return Err(Failure::Usage(
                "a config file cannot name another config".into(),
            ));
        }
        if explicit.contains(key) {
            continue;
        }
        match value.as_str() {
            "true" => extra.push(format!("--{key}").into()),
            "false" => {}
            v => {
                extra.push(format!("--{key}").into());
                extra.push(v.into());
            }
        }
    }
    let mut out = argv[..2].to_vec();
    out.extend(extra);
    out.extend_from_slice(&argv[2..]);
    Ok(out)
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let outcome = expand_config(argv).and_then(|argv| {
        let cli = match Cli::try_parse_from(argv) {
            Ok(c) => c,
            Err(e) => {
                let _ = e.print();
                return match e.kind() {
                    clap::error::ErrorKind::DisplayHelp
                    | clap::error::ErrorKind::DisplayVersion => Ok(()),
                    _ => Err(Failure::Usage(String::new())),
                };
            }
        };
        dispatch(cli.command)
    });
    match outcome {
        Ok(()) => 0,
        Err(Failure::Usage(m)) => {
            if !m.is_empty() {
                eprintln!("error: {m}");
            }
            1
        }
        Err(Failure::Data(m)) => {
            eprintln!("error: {m}");
            2
        }
    }
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Sample(a) => cmd_sample(a),
        Command::Reconstruct(a) => cmd_reconstruct(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Pipeline(a) => cmd_pipeline(a),
        Command::GradCheck(a) => cmd_grad_check(a),
        Command::GenScenes(a) => cmd_gen_scenes(a),
    }
}

fn cmd_sample(a: SampleArgs) -> Result<(), Failure> {
    let rgb = data_err!(load_ppm(&a.rgb))?;
    let depth = a.depth.as_ref().map(load_pgm16).transpose();
    let depth = data_err!(depth)?;
    if a.method.needs_depth() && depth.is_none() {
        return Err(Failure::Usage(format!(
            "--method {} needs --depth",
            a.method
        )));
    }
    let mask = sample_mask(
        a.method,
        &rgb,
        depth.as_ref(),
        a.rate,
        a.seed,
        a.slic.params(),
    )?;
    data_err!(save_mask(&mask, &a.out))?;
    if let Some(p) = &a.samples_out {
        data_err!(save_samples(&mask.to_sample_set(), p))?;
    }
    if let Some(p) = &a.labels_out {
        if a.method != SamplingMethod::Sps && a.method != SamplingMethod::SsaRefined {
            return Err(Failure::Usage(
                "--labels-out needs a superpixel method".into(),
            ));
        }
        let n = data_err!(target_count(a.rate, rgb.height(), rgb.width()))?;
        let seg = data_err!(sps_sample_detailed(&rgb, n, a.slic.params()))?.segmentation;
        data_err!(save_labels(seg.width(), seg.height(), seg.labels(), p))?;
    }
    println!("samples={}", mask.count());
    Ok(())
}

fn cmd_reconstruct(a: ReconstructArgs) -> Result<(), Failure> {
    let rgb = data_err!(load_ppm(&a.rgb))?;
    let sparse = data_err!(load_pgm16(&a.sparse))?;
    let lab = rgb_to_lab(&rgb);
    let r = reconstruct(a.method, &lab, &sparse, &a.solver.params()).map_err(|e| match e {
        crate::reconstruct::ReconstructError::Parameter(m) => Failure::Usage(m),
        other => Failure::Data(other.to_string()),
    })?;
    data_err!(save_pgm16(&r.depth, &a.out))?;
    println!(
        "converged={} iterations={} relative_residual={:.3e}",
        r.converged, r.iterations, r.relative_residual
    );
    Ok(())
}

fn cmd_eval(a: EvalArgs) -> Result<(), Failure> {
    let est = data_err!(load_pgm16(&a.est))?;
    let gt = data_err!(load_pgm16(&a.gt))?;
    let s = harness::error_stats(&est, &gt).map_err(|e| Failure::Data(e.to_string()))?;
    println!("mae_mm={:.6} rmse_mm={:.6}", s.mae, s.rmse);
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|source| {
        Failure::Data(
            HarnessError::Io {
                path: path.to_path_buf(),
                source,
            }
            .to_string(),
        )
    })
}

fn cmd_pipeline(a: PipelineArgs) -> Result<(), Failure> {
    let perturbation = match (a.jitter, a.delay) {
        (Some(k), _) => Perturbation::Jitter(k),
        (_, Some(dt)) => Perturbation::Temporal(dt),
        _ => Perturbation::None,
    };
    let cfg = ExperimentConfig {
        dataset: Some(a.input.clone()),
        rates: a.rate,
        samplers: a.method,
        reconstructors: a.recon,
        seeds: a.seed,
        perturbation,
        slic: a.slic.params(),
        recon: a.solver.params(),
        timing: a.timing,
    };
    cfg.validate()?;
    let scenes = load_dataset(&a.input).map_err(|e| Failure::Data(e.to_string()))?;
    let report = run_matrix(&cfg, &scenes)?;
    write_text(&a.out, &report.to_csv())?;
    write_text(&a.out.with_extension("json"), &report.to_json())?;
    let failures = report.failures().count();
    if failures > 0 {
        eprintln!(
            "warning: {failures} of {} cells failed; see the JSON report",
            report.rows.len()
        );
    }
    println!(
        "cells={} failures={} report={}",
        report.rows.len(),
        failures,
        a.out.display()
    );
    Ok(())
}

fn cmd_grad_check(a: GradCheckArgs) -> Result<(), Failure> {
    let (lo, hi) = match a.temp {
        Some(t) => (t, t),
        None => {
            let (s, e) = (a.schedule[0], a.schedule[1]);
            (s.min(e), s.max(e))
        }
    };
    let r = gradient_check(a.cases, a.window, lo, hi, a.seed)?;
    println!(
        "max_rel_error={:.3e} cases={} elapsed_ms={:.1}",
        r.max_rel_error, r.cases, r.elapsed_ms
    );
    if r.max_rel_error < a.threshold {
        Ok(())
    } else {
        Err(Failure::Data(format!(
            "gradient check failed: {:.3e} >= {:.3e}",
            r.max_rel_error, a.threshold
        )))
    }
}

fn cmd_gen_scenes(a: GenScenesArgs) -> Result<(), Failure> {
    let scenes = match a.velocity {
        Some(v) => gen_sequence(a.kind, a.height, a.width, a.seed, a.count, v)?,
        None => gen_scenes(a.kind, a.count, a.height, a.width, a.seed)?,
    };
    save_dataset(&a.out, &scenes).map_err(|e| Failure::Data(e.to_string()))?;
    println!("scenes={} dir={}", scenes.len(), a.out.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(os(&["adaptive-depth", "eval", "--bogus"])), 1);
        assert_eq!(run(os(&["adaptive-depth"])), 1);
        assert_eq!(run(os(&["adaptive-depth", "--help"])), 0);
    }

    #[test]
    fn config_entries_precede_flags() {
        let dir = std::env::temp_dir().join(format!("adaptive-depth-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.cfg");
        std::fs::write(
            &path,
            "rate = 0.5\ntiming = true\nverbose = false\nseed = 4\n",
        )
        .unwrap();
        let argv = os(&[
            "bin",
            "pipeline",
            "--config",
            path.to_str().unwrap(),
            "--rate",
            "0.1",
        ]);
        let out = expand_config(argv).ok().unwrap();
        let text: Vec<String> = out
            .iter()
            .map(|s| s.to_string_lossy().into_owned())
            .collect();
        assert_eq!(&text[..5], ["bin", "pipeline", "--timing", "--seed", "4"]);
        assert_eq!(text.iter().filter(|t| *t == "--rate").count(), 1);
        assert_eq!(text.last().unwrap(), "0.1");
        std::fs::remove_dir_all(dir).unwrap();
    }
}
