//! Adaptive depth sampling toolkit.
//!
//! Builds depth-sampling plans from RGB images (superpixel centers or
//! content-independent baselines), simulates sparse LiDAR measurement
//! including a differentiable soft sampler, reconstructs dense depth from
//! RGB plus sparse samples, and evaluates the combinations.
//!
//! | module | contents |
//! |--------|----------|
//! | [`imagedata`] | rasters, CIELAB conversion, Netpbm/CSV I/O |
//! | [`samplers`] | random / grid / Poisson-disk masks, sample placement |
//! | [`superpixel`] | SLIC, soft association, superpixel-center sampling |
//! | [`ssa`] | soft sampling with gradients, bilinear and hard sampling |
//! | [`reconstruct`] | propagation solver, bilateral and nearest fill |
//! | [`harness`] | metrics, synthetic scenes, experiments, reports |
//! | [`cli`] | the command-line front end |

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod harness;
pub mod imagedata;
pub mod reconstruct;
pub mod rng;
pub mod samplers;
pub mod ssa;
pub mod superpixel;
