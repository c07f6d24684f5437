//! Dense depth from RGB plus sparse samples.
//!
//! Three estimators share one interface: color-guided propagation solved
//! as a sparse linear system, joint bilateral interpolation, and plain
//! nearest-sample fill.

mod affinity;
mod bilateral;
pub mod cg;
mod colorization;
mod nearest;

use std::fmt;
use std::str::FromStr;

use crate::imagedata::{DepthMap, ImageError, LabImage};

pub use affinity::{build_affinity, AffinityGraph, MIN_AFFINITY};
pub use bilateral::bilateral_reconstruct;
pub use colorization::{colorization_reconstruct, solve_with_graph, Reconstruction, SolverConfig};
pub use nearest::nn_reconstruct;

#[derive(Debug, thiserror::Error)]
pub enum ReconstructError {
    #[error("invalid reconstruction parameter: {0}")]
    Parameter(String),
    #[error("sparse depth has no valid samples")]
    NoSamples,
    #[error(transparent)]
    Image(#[from] ImageError),
}

fn check_dims(lab: &LabImage, sparse: &DepthMap) -> Result<(), ReconstructError> {
    if (lab.width(), lab.height()) != (sparse.width(), sparse.height()) {
        return Err(ReconstructError::Parameter(format!(
            "image is {}x{} but depth is {}x{}",
            lab.width(),
            lab.height(),
            sparse.width(),
            sparse.height()
        )));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ReconstructorKind {
    Colorization,
    Bilateral,
    Nearest,
}

impl ReconstructorKind {
    pub const ALL: [ReconstructorKind; 3] = [
        ReconstructorKind::Colorization,
        ReconstructorKind::Bilateral,
        ReconstructorKind::Nearest,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ReconstructorKind::Colorization => "colorization",
            ReconstructorKind::Bilateral => "bilateral",
            ReconstructorKind::Nearest => "nearest",
        }
    }
}

impl fmt::Display for ReconstructorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for ReconstructorKind {
    type Err = ReconstructError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "colorization" => Ok(ReconstructorKind::Colorization),
            "bilateral" => Ok(ReconstructorKind::Bilateral),
            "nearest" => Ok(ReconstructorKind::Nearest),
            other => Err(ReconstructError::Parameter(format!(
                "unknown reconstructor {other:?}"
            ))),
        }
    }
}

/// Settings for every estimator. Bilateral defaults track the sample
/// spacing `S = sqrt(H * W / N)`: `sigma_s = S / 2`, `radius = 3 sigma_s`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ReconstructParams {
    pub solver: SolverConfig,
    pub sigma_s: Option<f64>,
    pub radius: Option<f64>,
}

/// Runs the chosen estimator.
pub fn reconstruct(
    kind: ReconstructorKind,
    lab: &LabImage,
    sparse: &DepthMap,
    params: &ReconstructParams,
) -> Result<Reconstruction, ReconstructError> {
    let done = |depth| Reconstruction {
        depth,
        converged: true,
        iterations: 0,
        relative_residual: 0.0,
    };
    match kind {
        ReconstructorKind::Colorization => colorization_reconstruct(lab, sparse, &params.solver),
        ReconstructorKind::Nearest => nn_reconstruct(sparse).map(done),
        ReconstructorKind::Bilateral => {
            let samples = sparse.valid_count().max(1);
            let spacing = ((sparse.width() * sparse.height()) as f64 / samples as f64).sqrt();
            let sigma_s = params.sigma_s.unwrap_or(0.5 * spacing);
            let radius = params.radius.unwrap_or(3.0 * sigma_s);
            bilateral_reconstruct(lab, sparse, sigma_s, params.solver.sigma_c, radius).map(done)
        }
    }
}
