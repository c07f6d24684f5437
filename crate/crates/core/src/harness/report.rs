use std::cmp::Ordering;
use std::fmt::Write as _;

use serde_json::{json, Value};

use super::SamplingMethod;
use crate::reconstruct::ReconstructorKind;

/// Column schema of [`EvalReport::to_csv`].
pub const CSV_HEADER: &str = "sampler,reconstructor,rate,seed,mae_mm,rmse_mm,samples,time_ms";

/// Outcome of one (scene, sampler, reconstructor, rate, seed) cell.
#[derive(Clone, Debug, PartialEq)]
pub struct CellResult {
    pub scene: u64,
    pub sampler: SamplingMethod,
    pub reconstructor: ReconstructorKind,
    pub rate: f64,
    pub seed: u64,
    /// Perturbation level: frame delay or jitter range, 0 when unperturbed.
    pub level: f64,
    pub samples: usize,
    pub valid_pixels: usize,
    pub mae: Option<f64>,
    pub rmse: Option<f64>,
    pub time_ms: f64,
    pub converged: bool,
    pub iterations: usize,
    pub error: Option<String>,
}

impl CellResult {
    pub(crate) fn sort_key_cmp(&self, other: &Self) -> Ordering {
        (self.sampler, self.reconstructor)
            .cmp(&(other.sampler, other.reconstructor))
            .then(self.rate.total_cmp(&other.rate))
            .then(self.seed.cmp(&other.seed))
            .then(self.scene.cmp(&other.scene))
    }

    fn to_json(&self) -> Value {
        json!({
            "scene": self.scene,
            "sampler": self.sampler.name(),
            "reconstructor": self.reconstructor.name(),
            "rate": self.rate,
            "seed": self.seed,
            "level": self.level,
            "samples": self.samples,
            "valid_pixels": self.valid_pixels,
            "mae_mm": self.mae,
            "rmse_mm": self.rmse,
            "time_ms": self.time_ms,
            "converged": self.converged,
            "iterations": self.iterations,
            "error": self.error,
        })
    }
}

/// Mean over scenes of one (sampler, reconstructor, rate, seed) group.
/// Every scene counts equally; failed cells are left out of the means.
#[derive(Clone, Debug, PartialEq)]
pub struct AggregateRow {
    pub sampler: SamplingMethod,
    pub reconstructor: ReconstructorKind,
    pub rate: f64,
    pub seed: u64,
    pub mae: Option<f64>,
    pub rmse: Option<f64>,
    pub samples: usize,
    pub time_ms: f64,
    pub scenes: usize,
    pub failures: usize,
    pub converged: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EvalReport {
    /// One row per cell in (sampler, reconstructor, rate, seed, scene)
    /// order.
    pub rows: Vec<CellResult>,
    pub timing: bool,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "nan".to_string(), |v| format!("{v:.6}"))
}

impl EvalReport {
    pub fn aggregate(&self) -> Vec<AggregateRow> {
        let mut out = Vec::new();
        let same = |a: &CellResult, b: &CellResult| {
            a.sampler == b.sampler
                && a.reconstructor == b.reconstructor
                && a.rate.total_cmp(&b.rate).is_eq()
                && a.seed == b.seed
        };
        for group in self.rows.chunk_by(same) {
            let ok: Vec<&CellResult> = group.iter().filter(|r| r.error.is_none()).collect();
            let head = &group[0];
            out.push(AggregateRow {
                sampler: head.sampler,
                reconstructor: head.reconstructor,
                rate: head.rate,
                seed: head.seed,
                mae: mean(ok.iter().filter_map(|r| r.mae)),
                rmse: mean(ok.iter().filter_map(|r| r.rmse)),
                samples: mean(ok.iter().map(|r| r.samples as f64))
                    .map_or(0, |m| m.round() as usize),
                time_ms: mean(group.iter().map(|r| r.time_ms)).unwrap_or(0.0),
                scenes: ok.len(),
                failures: group.len() - ok.len(),
                converged: ok.iter().all(|r| r.converged),
            });
        }
        out
    }

    /// Mean RMSE over every successful cell with this sampler and
    /// reconstructor.
    pub fn mean_rmse(&self, sampler: SamplingMethod, recon: ReconstructorKind) -> Option<f64> {
        mean(
            self.rows
                .iter()
                .filter(|r| r.sampler == sampler && r.reconstructor == recon)
                .filter_map(|r| r.rmse),
        )
    }

    pub fn failures(&self) -> impl Iterator<Item = &CellResult> {
        self.rows.iter().filter(|r| r.error.is_some())
    }

    /// Scene-averaged rows under [`CSV_HEADER`].
    pub fn to_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for r in self.aggregate() {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{:.3}",
                r.sampler,
                r.reconstructor,
                r.rate,
                r.seed,
                fmt_opt(r.mae),
                fmt_opt(r.rmse),
                r.samples,
                r.time_ms
            );
        }
        s
    }

    /// The CSV rows plus every individual cell, as pretty-printed JSON.
    pub fn to_json(&self) -> String {
        let summary: Vec<Value> = self
            .aggregate()
            .iter()
            .map(|r| {
                json!({
                    "sampler": r.sampler.name(),
                    "reconstructor": r.reconstructor.name(),
                    "rate": r.rate,
                    "seed": r.seed,
                    "mae_mm": r.mae,
                    "rmse_mm": r.rmse,
                    "samples": r.samples,
                    "time_ms": r.time_ms,
                    "scenes": r.scenes,
                    "failures": r.failures,
                    "converged": r.converged,
                })
            })
            .collect();
        let cells: Vec<Value> = self.rows.iter().map(CellResult::to_json).collect();
        let mut text = serde_json::to_string_pretty(&json!({
            "summary": summary,
            "cells": cells,
        }))
        .expect("report serializes");
        text.push('\n');
        text
    }
}

/// Reports for a sweep over one perturbation parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationCurve {
    /// Column name of the swept parameter.
    pub parameter: &'static str,
    pub levels: Vec<f64>,
    pub reports: Vec<EvalReport>,
}

impl PerturbationCurve {
    /// Mean RMSE at each level for one sampler and reconstructor.
    pub fn rmse_curve(
        &self,
        sampler: SamplingMethod,
        recon: ReconstructorKind,
    ) -> Vec<Option<f64>> {
        self.reports
            .iter()
            .map(|r| r.mean_rmse(sampler, recon))
            .collect()
    }

    /// Error versus perturbation, averaged over scenes and seeds.
    pub fn to_csv(&self) -> String {
        let mut s = format!(
            "{},sampler,reconstructor,rate,mae_mm,rmse_mm,cells\n",
            self.parameter
        );
        for (level, report) in self.levels.iter().zip(&self.reports) {
            let rows = &report.rows;
            let same = |a: &CellResult, b: &CellResult| {
                a.sampler == b.sampler
                    && a.reconstructor == b.reconstructor
                    && a.rate.total_cmp(&b.rate).is_eq()
            };
            for group in rows.chunk_by(same) {
                let h = &group[0];
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{}",
                    level,
                    h.sampler,
                    h.reconstructor,
                    h.rate,
                    fmt_opt(mean(group.iter().filter_map(|r| r.mae))),
                    fmt_opt(mean(group.iter().filter_map(|r| r.rmse))),
                    group.iter().filter(|r| r.error.is_none()).count()
                );
            }
        }
        s
    }
}
