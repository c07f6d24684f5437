//! Color-guided depth propagation.
//!
//! Unknown pixels satisfy `D_i = sum_j w_ij D_j` with the row-normalized
//! affinities of [`build_affinity`]; sampled pixels are fixed. Scaling row
//! `i` by its degree turns this into the graph-Laplacian system
//! `deg_i D_i - sum_{j unknown} a_ij D_j = sum_{k sampled} a_ik d_k`,
//! which is symmetric positive definite and solved with conjugate gradient.
//! Because each unknown is a convex combination of its neighbors, the
//! solution never leaves the range of the sample values.

use super::affinity::{build_affinity, AffinityGraph};
use super::cg::{conjugate_gradient, CgOutcome};
use super::nearest::nn_reconstruct;
use super::ReconstructError;
use crate::imagedata::{DepthMap, LabImage};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    /// Lab-distance bandwidth of the affinities.
    pub sigma_c: f64,
    pub max_iters: usize,
    /// Relative residual threshold.
    pub tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            sigma_c: 10.0,
            max_iters: 20_000,
            tol: 1e-6,
        }
    }
}

/// A dense estimate plus solver diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct Reconstruction {
    pub depth: DepthMap,
    pub converged: bool,
    pub iterations: usize,
    pub relative_residual: f64,
}

pub fn colorization_reconstruct(
    lab: &LabImage,
    sparse: &DepthMap,
    cfg: &SolverConfig,
) -> Result<Reconstruction, ReconstructError> {
    if !(cfg.tol > 0.0) {
        return Err(ReconstructError::Parameter(format!(
            "tol must be positive, got {}",
            cfg.tol
        )));
    }
    super::check_dims(lab, sparse)?;
    let graph = build_affinity(lab, cfg.sigma_c)?;
    solve_with_graph(&graph, sparse, cfg)
}

/// Propagation over a prebuilt affinity graph.
pub fn solve_with_graph(
    graph: &AffinityGraph,
    sparse: &DepthMap,
    cfg: &SolverConfig,
) -> Result<Reconstruction, ReconstructError> {
    if sparse.valid_count() == 0 {
        return Err(ReconstructError::NoSamples);
    }
    let n = graph.len();
    let known = sparse.validity();
    let mut unknown_of = vec![usize::MAX; n];
    let mut unknowns = Vec::new();
    for (i, &k) in known.iter().enumerate() {
        if !k {
            unknown_of[i] = unknowns.len();
            unknowns.push(i);
        }
    }

    let mut out: Vec<f64> = sparse.depths().to_vec();
    let mut outcome = CgOutcome {
        iterations: 0,
        relative_residual: 0.0,
        converged: true,
    };

    if !unknowns.is_empty() {
        let values = sparse.depths();
        let mut rhs = vec![0.0; unknowns.len()];
        let mut diag = vec![0.0; unknowns.len()];
        for (u, &i) in unknowns.iter().enumerate() {
            diag[u] = graph.degree(i);
            rhs[u] = graph
                .neighbors(i)
                .iter()
                .zip(graph.raw_weights(i))
                .filter(|(&j, _)| known[j as usize])
                .map(|(&j, &a)| a * values[j as usize])
                .sum();
        }
        let apply = |v: &[f64], dst: &mut [f64]| {
            for (u, &i) in unknowns.iter().enumerate() {
                let mut acc = diag[u] * v[u];
                for (&j, &a) in graph.neighbors(i).iter().zip(graph.raw_weights(i)) {
                    let ju = unknown_of[j as usize];
                    if ju != usize::MAX {
                        acc -= a * v[ju];
                    }
                }
                dst[u] = acc;
            }
        };
        // Warm start from the nearest-sample fill.
        let guess = nn_reconstruct(sparse)?;
        let mut x: Vec<f64> = unknowns.iter().map(|&i| guess.depths()[i]).collect();
        outcome = conjugate_gradient(apply, &diag, &rhs, &mut x, cfg.tol, cfg.max_iters);
        // The exact solution lies within the sample range; clamping the
        // iterate there only removes solver error.
        let (lo, hi) = sparse
            .valid_samples()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, d)| {
                (lo.min(d), hi.max(d))
            });
        for (u, &i) in unknowns.iter().enumerate() {
            out[i] = x[u].clamp(lo, hi);
        }
    }

    Ok(Reconstruction {
        depth: DepthMap::dense(graph.width(), graph.height(), out)?,
        converged: outcome.converged,
        iterations: outcome.iterations,
        relative_residual: outcome.relative_residual,
    })
}
