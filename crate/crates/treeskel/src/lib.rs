//! File formats, configuration and pipeline stages around `treeskel-core`.
//!
//! - [`ply`]: labeled point clouds (ASCII and binary little-endian).
//! - [`colmap`]: COLMAP text camera models.
//! - [`text`]: marker detections, sky color samples, label overrides.
//! - [`graph`]: skeleton graphs as edge lists or OBJ line sets.
//! - [`config`]: TOML configuration with environment overrides.
//! - [`stages`]: restore, scale, skeletonize, eval and the chained pipeline.

pub mod colmap;
pub mod config;
pub mod error;
pub mod graph;
pub mod ply;
pub mod stages;
pub mod text;

pub use error::{Error, Result};
pub use treeskel_core as core;
