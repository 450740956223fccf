//! Pipeline configuration.
//!
//! A TOML file of `key = value` lines grouped into sections (`[restore]`,
//! `[contraction]`, ...). Every key can be overridden by an environment
//! variable `TREESKEL_<SECTION>__<KEY>` (top-level keys: `TREESKEL_<KEY>`)
//! or by `section.key=value` assignments, applied in that order. Values are
//! read as TOML literals and fall back to plain strings.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use treeskel_core::contraction::ContractionParams;
use treeskel_core::evaluate::{DatasetParams, SyntheticTreeParams};
use treeskel_core::restore::RestoreParams;

use crate::error::{Error, Result};

pub const ENV_PREFIX: &str = "TREESKEL_";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Seeds RANSAC, sky color jitter and the evaluation dataset.
    pub seed: u64,
    pub input: InputConfig,
    pub output: OutputConfig,
    pub restore: RestoreConfig,
    pub scale: ScaleConfig,
    pub contraction: ContractionConfig,
    pub topology: TopologyConfig,
    pub eval: EvalConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            input: InputConfig::default(),
            output: OutputConfig::default(),
            restore: RestoreConfig::default(),
            scale: ScaleConfig::default(),
            contraction: ContractionConfig::default(),
            topology: TopologyConfig::default(),
            eval: EvalConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputConfig {
    /// Labeled dense cloud (PLY).
    pub cloud: Option<PathBuf>,
    /// Directory with COLMAP `cameras.txt` and `images.txt`.
    pub colmap: Option<PathBuf>,
    pub markers: Option<PathBuf>,
    pub sky: Option<PathBuf>,
    /// One label code per line, replacing the cloud's labels.
    pub labels: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Write ASCII instead of binary PLY.
    pub ascii: bool,
    /// Store coordinates as `double` instead of `float`.
    pub double: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("treeskel-out"),
            ascii: false,
            double: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RestoreConfig {
    /// Crop to the camera bounding box (needs a camera model).
    pub crop: bool,
    pub skip_sky: bool,
    pub ransac_threshold: Option<f64>,
    pub ransac_iterations: usize,
    pub sor_k: usize,
    pub sor_std_ratio: f64,
    pub dbscan_eps: f64,
    pub dbscan_min_pts: usize,
    pub sky_color_tolerance: f64,
}

impl Default for RestoreConfig {
    fn default() -> Self {
        let p = RestoreParams::default();
        Self {
            crop: true,
            skip_sky: false,
            ransac_threshold: p.ransac_threshold,
            ransac_iterations: p.ransac_iterations,
            sor_k: p.sor_k,
            sor_std_ratio: p.sor_std_ratio,
            dbscan_eps: p.dbscan_eps,
            dbscan_min_pts: p.dbscan_min_pts,
            sky_color_tolerance: p.sky_color_tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScaleConfig {
    /// Marker side length in meters.
    pub d_aruco: Option<f64>,
    /// Reject the estimate when any corner's RMS ray distance exceeds this
    /// (scene units).
    pub max_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContractionConfig {
    /// Use the semantic (trunk-weighted) variant in `skeletonize`.
    pub semantic: bool,
    /// Contract only trunk and branch points when the cloud has any.
    pub tree_points_only: bool,
    pub initial_contraction: Option<f64>,
    pub initial_attraction: f64,
    pub contraction_amplification: f64,
    pub max_contraction: f64,
    pub max_attraction: f64,
    pub max_iterations: usize,
    pub termination_ratio: f64,
    pub neighbors: usize,
    pub lambda_t: f64,
    pub stop_on_area_rebound: bool,
}

impl Default for ContractionConfig {
    fn default() -> Self {
        let p = ContractionParams::default();
        Self {
            semantic: false,
            tree_points_only: true,
            initial_contraction: p.initial_contraction,
            initial_attraction: p.initial_attraction,
            contraction_amplification: p.contraction_amplification,
            max_contraction: p.max_contraction,
            max_attraction: p.max_attraction,
            max_iterations: p.max_iterations,
            termination_ratio: p.termination_ratio,
            neighbors: p.neighbors,
            lambda_t: p.trunk_weight,
            stop_on_area_rebound: p.stop_on_area_rebound,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopologyConfig {
    /// Farthest-point samples; default `max(100, N/50)`.
    pub samples: Option<usize>,
    /// Index of the first sample; default the point farthest from the centroid.
    pub start_index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub trees: usize,
    pub noise_factor: f64,
    pub holes: usize,
    pub hole_radius: f64,
    pub voxel_size: f64,
    pub ground_truth_spacing: f64,
    /// Quarter the surface sampling density for a fast smoke run.
    pub quick: bool,
    /// Persist each tree's corrupted clouds and ground truth.
    pub save_clouds: bool,
    pub tree: TreeConfig,
}

impl Default for EvalConfig {
    fn default() -> Self {
        let d = DatasetParams::default();
        Self {
            trees: d.trees,
            noise_factor: d.noise_factor,
            holes: d.holes,
            hole_radius: d.hole_radius,
            voxel_size: d.voxel_size,
            ground_truth_spacing: d.ground_truth_spacing,
            quick: false,
            save_clouds: true,
            tree: TreeConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TreeConfig {
    pub trunk_height: f64,
    pub trunk_radius: f64,
    pub taper: f64,
    pub trunk_segments: usize,
    pub branch_segments: usize,
    pub bend: f64,
    pub levels: usize,
    pub branches_per_level: usize,
    pub length_decay: f64,
    pub radius_decay: f64,
    pub point_density: f64,
}

impl Default for TreeConfig {
    fn default() -> Self {
        let t = SyntheticTreeParams::default();
        Self {
            trunk_height: t.trunk_height,
            trunk_radius: t.trunk_radius,
            taper: t.taper,
            trunk_segments: t.trunk_segments,
            branch_segments: t.branch_segments,
            bend: t.bend,
            levels: t.levels,
            branches_per_level: t.branches_per_level,
            length_decay: t.length_decay,
            radius_decay: t.radius_decay,
            point_density: t.point_density,
        }
    }
}

/// Density divisor applied by `quick`.
pub const QUICK_DENSITY_DIVISOR: f64 = 4.0;

impl PipelineConfig {
    /// Reads `path` (if any), then applies environment and explicit overrides.
    pub fn load<'a>(
        path: Option<&Path>,
        env: impl IntoIterator<Item = (String, String)>,
        assignments: impl IntoIterator<Item = &'a str>,
    ) -> Result<Self> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                text.parse::<toml::Table>()
                    .map_err(|e| Error::parse(p, "toml", e.to_string()))?
            }
            None => toml::Table::new(),
        };
        for (name, value) in env {
            if let Some(key) = name.strip_prefix(ENV_PREFIX) {
                let segments: Vec<String> = key.split("__").map(str::to_ascii_lowercase).collect();
                set_value(&mut table, &segments, &value).map_err(|e| Error::Config(format!("{name}: {e}")))?;
            }
        }
        for assignment in assignments {
            let (key, value) = assignment
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("`{assignment}` is not of the form section.key=value")))?;
            let segments: Vec<String> = key.trim().split('.').map(str::to_string).collect();
            set_value(&mut table, &segments, value.trim()).map_err(|e| Error::Config(format!("{key}: {e}")))?;
        }
        toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))
    }

    /// Parses a configuration from TOML text alone.
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn restore_params(&self) -> RestoreParams {
        let r = &self.restore;
        RestoreParams {
            ransac_threshold: r.ransac_threshold,
            ransac_iterations: r.ransac_iterations,
            sor_k: r.sor_k,
            sor_std_ratio: r.sor_std_ratio,
            dbscan_eps: r.dbscan_eps,
            dbscan_min_pts: r.dbscan_min_pts,
            sky_color_tolerance: r.sky_color_tolerance,
            seed: self.seed,
        }
    }

    pub fn contraction_params(&self) -> ContractionParams {
        let c = &self.contraction;
        ContractionParams {
            initial_contraction: c.initial_contraction,
            initial_attraction: c.initial_attraction,
            contraction_amplification: c.contraction_amplification,
            max_contraction: c.max_contraction,
            max_attraction: c.max_attraction,
            max_iterations: c.max_iterations,
            termination_ratio: c.termination_ratio,
            neighbors: c.neighbors,
            trunk_weight: c.lambda_t,
            stop_on_area_rebound: c.stop_on_area_rebound,
        }
    }

    pub fn dataset_params(&self) -> DatasetParams {
        let e = &self.eval;
        let t = &e.tree;
        let density = if e.quick { t.point_density / QUICK_DENSITY_DIVISOR } else { t.point_density };
        DatasetParams {
            trees: e.trees,
            tree: SyntheticTreeParams {
                trunk_height: t.trunk_height,
                trunk_radius: t.trunk_radius,
                taper: t.taper,
                trunk_segments: t.trunk_segments,
                branch_segments: t.branch_segments,
                bend: t.bend,
                levels: t.levels,
                branches_per_level: t.branches_per_level,
                length_decay: t.length_decay,
                radius_decay: t.radius_decay,
                point_density: density,
                seed: 0,
            },
            noise_factor: e.noise_factor,
            holes: e.holes,
            hole_radius: e.hole_radius,
            voxel_size: e.voxel_size,
            ground_truth_spacing: e.ground_truth_spacing,
            seed: self.seed,
        }
    }
}

fn parse_literal(value: &str) -> toml::Value {
    format!("v = {value}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(value.to_string()))
}

fn set_value(table: &mut toml::Table, segments: &[String], value: &str) -> Result<(), String> {
    let (last, parents) = segments.split_last().ok_or("empty key")?;
    if segments.iter().any(|s| s.is_empty()) {
        return Err("empty key segment".into());
    }
    let mut cur = table;
    for seg in parents {
        cur = cur
            .entry(seg.clone())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| format!("`{seg}` is not a section"))?;
    }
    cur.insert(last.clone(), parse_literal(value));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_env() -> Vec<(String, String)> {
        Vec::new()
    }

    #[test]
    fn defaults_match_core_defaults() {
        let c = PipelineConfig::default();
        assert_eq!(c.contraction_params(), ContractionParams::default());
        assert_eq!(c.restore_params(), RestoreParams::default());
        let d = c.dataset_params();
        assert_eq!(d.tree.point_density, SyntheticTreeParams::default().point_density);
        assert_eq!(PipelineConfig::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn sections_env_and_assignments_layer() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(
            &path,
            "seed = 4\n[contraction]\nlambda_t = 5.0\nmax_iterations = 7\n[input]\ncloud = \"a.ply\"\n",
        )
        .unwrap();
        let env = vec![
            ("TREESKEL_CONTRACTION__LAMBDA_T".to_string(), "8".to_string()),
            ("TREESKEL_SCALE__D_ARUCO".to_string(), "0.15".to_string()),
            ("OTHER".to_string(), "x".to_string()),
        ];
        let c = PipelineConfig::load(Some(&path), env, ["contraction.max_iterations=3", "output.dir=out/x"]).unwrap();
        assert_eq!(c.seed, 4);
        assert_eq!(c.contraction.lambda_t, 8.0);
        assert_eq!(c.contraction.max_iterations, 3);
        assert_eq!(c.scale.d_aruco, Some(0.15));
        assert_eq!(c.input.cloud, Some(PathBuf::from("a.ply")));
        assert_eq!(c.output.dir, PathBuf::from("out/x"));
    }

    #[test]
    fn unknown_keys_and_bad_types_are_errors() {
        assert!(PipelineConfig::load(None, no_env(), ["contraction.lambda=3"]).is_err());
        assert!(PipelineConfig::load(None, no_env(), ["contraction.max_iterations=many"]).is_err());
        assert!(PipelineConfig::load(None, no_env(), ["noequals"]).is_err());
        assert!(PipelineConfig::load(None, vec![("TREESKEL_SEED__X".into(), "1".into())], Vec::<&str>::new()).is_err());
    }

    #[test]
    fn quick_reduces_density() {
        let mut c = PipelineConfig::default();
        c.eval.quick = true;
        let d = c.dataset_params();
        assert_eq!(d.tree.point_density * QUICK_DENSITY_DIVISOR, c.eval.tree.point_density);
    }
}
