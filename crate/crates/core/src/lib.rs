//! Point-cloud skeletonization for trees.
//!
//! The crate is `no_std` (with `alloc`) and holds every numeric stage of the
//! pipeline:
//!
//! - [`restore`]: ground alignment, region-of-interest crop, statistical and
//!   sky-color denoising.
//! - [`scale`]: metric scale from multi-view marker corner rays.
//! - [`laplacian`] and [`contraction`]: cotangent Laplacian on point
//!   neighborhoods and (semantic) Laplacian-based contraction.
//! - [`topology`]: farthest point sampling, spanning tree, degree-2 removal.
//! - [`evaluate`]: synthetic trees, corruption, voxel grid and Chamfer scoring.
//!
//! File formats and the command-line front end live in the `treeskel` crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod contraction;
pub mod error;
pub mod evaluate;
pub mod hull;
pub mod laplacian;
pub mod math;
pub mod restore;
pub mod scale;
pub mod sparse;
pub mod spatial;
pub mod topology;
pub mod types;

pub use error::{Error, Result};
pub use math::{Mat3, Vec3};
pub use types::{
    CameraModel, CameraPose, Intrinsics, LabeledPointCloud, MarkerObservation, Rgb, SemanticLabel,
    SkeletonGraph,
};
