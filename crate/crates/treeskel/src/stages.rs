//! Pipeline stages behind the command-line front end.
//!
//! Each stage reads its inputs, writes artifacts with fixed names into the
//! output directory and returns a [`StageReport`] of `key=value` records,
//! one per step. Nothing here depends on wall-clock time, so identical
//! configurations produce identical files.

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use treeskel_core::contraction::{contract_observed, IterationRecord};
use treeskel_core::evaluate::{evaluate_case, prepare_tree, ComparisonReport, Score};
use treeskel_core::laplacian::build_neighborhoods;
use treeskel_core::restore::{align_to_ground, crop_roi, fit_ground_plane, remove_sky_silhouette, statistical_outlier_removal};
use treeskel_core::scale::{apply_scale, estimate_scale, ScaleEstimate};
use treeskel_core::topology::{default_sample_count, farthest_point_sampling, minimum_spanning_tree, simplify_graph, StartRule};
use treeskel_core::{CameraModel, Error as CoreError, LabeledPointCloud, SemanticLabel, SkeletonGraph, Vec3};

use crate::colmap::{read_colmap_model, write_colmap_model};
use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::graph::{encode_graph, GraphFormat};
use crate::ply::{read_ply, write_ply, PlyEncoding, PlyOptions, PlyPrecision};
use crate::text::{apply_labels, read_labels, read_marker_detections, read_sky_samples};

pub const RESTORED_CLOUD: &str = "restored.ply";
pub const RESTORED_MODEL: &str = "restored_model";
pub const SCALED_CLOUD: &str = "scaled.ply";
pub const SCALED_MODEL: &str = "scaled_model";
pub const CONTRACTED_CLOUD: &str = "contracted.ply";
pub const SKELETON_GRAPH: &str = "skeleton.graph";
pub const SKELETON_OBJ: &str = "skeleton.obj";
pub const MST_GRAPH: &str = "mst.graph";
pub const CONTRACTION_LOG: &str = "contraction.log";
pub const EVAL_DIR: &str = "eval";

/// Pipeline stages in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, clap::ValueEnum)]
pub enum Stage {
    Restore,
    Scale,
    Skeletonize,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Restore => "restore",
            Stage::Scale => "scale",
            Stage::Skeletonize => "skeletonize",
        }
    }
}

/// Machine-readable step records of one stage.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StageReport {
    pub stage: &'static str,
    pub records: Vec<String>,
}

impl StageReport {
    fn new(stage: &'static str) -> Self {
        Self {
            stage,
            records: Vec::new(),
        }
    }

    fn step(&mut self, step: &str, fields: Vec<(&str, String)>) {
        let mut line = format!("stage={} step={step}", self.stage);
        for (k, v) in fields {
            line.push(' ');
            line.push_str(k);
            line.push('=');
            line.push_str(&v);
        }
        self.records.push(line);
    }

    pub fn text(&self) -> String {
        self.records.iter().map(|r| format!("{r}\n")).collect()
    }

    /// Value of `key` in the first record of `step`.
    pub fn field(&self, step: &str, key: &str) -> Option<&str> {
        let step_tag = format!("step={step}");
        let key_tag = format!("{key}=");
        self.records
            .iter()
            .find(|r| r.split(' ').any(|t| t == step_tag))?
            .split(' ')
            .find_map(|t| t.strip_prefix(key_tag.as_str()))
    }
}

/// Floats in reports use the shortest representation that reads back exactly.
fn num(v: f64) -> String {
    format!("{v:?}")
}

fn vec3(v: Vec3) -> String {
    format!("{:?},{:?},{:?}", v.0[0], v.0[1], v.0[2])
}

fn int(v: impl Display) -> String {
    v.to_string()
}

pub struct Runner {
    pub config: PipelineConfig,
    /// Compute and report without writing artifacts.
    pub dry_run: bool,
}

/// Output of the restore stage.
pub struct Restored {
    pub cloud: LabeledPointCloud,
    pub cameras: Option<CameraModel>,
    pub report: StageReport,
}

pub struct Scaled {
    pub estimate: ScaleEstimate,
    pub cloud: LabeledPointCloud,
    pub report: StageReport,
}

pub struct Skeletonized {
    pub contracted: LabeledPointCloud,
    pub iterations: Vec<IterationRecord>,
    pub mst: SkeletonGraph,
    pub skeleton: SkeletonGraph,
    pub report: StageReport,
}

fn required<'a>(value: &'a Option<PathBuf>, what: &str) -> Result<&'a Path> {
    value
        .as_deref()
        .ok_or_else(|| Error::Config(format!("missing {what}")))
}

impl Runner {
    pub fn new(config: PipelineConfig) -> Self {
        Self { config, dry_run: false }
    }

    fn out(&self, name: &str) -> PathBuf {
        self.config.output.dir.join(name)
    }

    fn ply_options(&self) -> PlyOptions {
        PlyOptions {
            encoding: if self.config.output.ascii { PlyEncoding::Ascii } else { PlyEncoding::BinaryLittleEndian },
            precision: if self.config.output.double { PlyPrecision::Double } else { PlyPrecision::Float },
        }
    }

    fn prepare_output(&self) -> Result<()> {
        if self.dry_run {
            return Ok(());
        }
        let dir = &self.config.output.dir;
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
    }

    fn write_text(&self, name: &str, text: &str) -> Result<()> {
        if self.dry_run {
            return Ok(());
        }
        let path = self.out(name);
        fs::write(&path, text).map_err(|e| Error::io(path, e))
    }

    fn write_cloud(&self, name: &str, cloud: &LabeledPointCloud) -> Result<()> {
        if self.dry_run {
            return Ok(());
        }
        write_ply(cloud, self.out(name), self.ply_options())
    }

    fn write_model(&self, name: &str, model: &CameraModel) -> Result<()> {
        if self.dry_run {
            return Ok(());
        }
        write_colmap_model(model, self.out(name))
    }

    fn load_cloud(&self, path: &Path) -> Result<LabeledPointCloud> {
        let cloud = read_ply(path)?;
        match &self.config.input.labels {
            Some(labels) => apply_labels(&cloud, read_labels(labels)?, labels),
            None => Ok(cloud),
        }
    }

    /// Checks that every input needed by the stages `from..=Skeletonize` is
    /// configured, before any work starts.
    pub fn check_pipeline(&self, from: Stage) -> Result<()> {
        let c = &self.config;
        if from == Stage::Restore {
            required(&c.input.cloud, "input.cloud (point cloud PLY)").map_err(|e| e.in_stage("restore"))?;
            if c.restore.crop {
                required(&c.input.colmap, "input.colmap (camera model for the ROI crop)").map_err(|e| e.in_stage("restore"))?;
            }
            if !c.restore.skip_sky {
                required(&c.input.sky, "input.sky (sky color samples; or use --skip-sky)").map_err(|e| e.in_stage("restore"))?;
            }
            c.restore_params().validate().map_err(|e| Error::from(e).in_stage("restore"))?;
        }
        if from <= Stage::Scale {
            let scale = |e: Error| e.in_stage("scale");
            match c.scale.d_aruco {
                None => return Err(scale(Error::Config("missing scale.d_aruco (marker side length in meters)".into()))),
                Some(d) if !(d > 0.0) => return Err(scale(Error::Config(format!("scale.d_aruco must be positive, got {d}")))),
                _ => {}
            }
            required(&c.input.markers, "input.markers (marker detections)").map_err(scale)?;
            if from == Stage::Scale {
                for p in [self.out(RESTORED_CLOUD), self.out(RESTORED_MODEL).join("images.txt")] {
                    if !p.exists() {
                        return Err(scale(Error::Config(format!("cannot resume: {} does not exist", p.display()))));
                    }
                }
            }
        }
        c.contraction_params().validate().map_err(|e| Error::from(e).in_stage("skeletonize"))?;
        if from == Stage::Skeletonize && !self.out(SCALED_CLOUD).exists() {
            return Err(Error::Config(format!("cannot resume: {} does not exist", self.out(SCALED_CLOUD).display()))
                .in_stage("skeletonize"));
        }
        Ok(())
    }

    /// Runs `from..=Skeletonize`, each stage reading the previous one's
    /// artifacts from the output directory.
    pub fn pipeline(&self, from: Stage) -> Result<Vec<StageReport>> {
        self.check_pipeline(from)?;
        let mut reports = Vec::new();
        if from <= Stage::Restore {
            let c = &self.config.input;
            reports.push(self.restore_from(required(&c.cloud, "input.cloud")?, c.colmap.as_deref())?.report);
        }
        if from <= Stage::Scale {
            let (cloud, model) = (self.out(RESTORED_CLOUD), self.out(RESTORED_MODEL));
            reports.push(self.scale_from(&cloud, &model)?.report);
        }
        reports.push(self.skeletonize_from(&self.out(SCALED_CLOUD))?.report);
        Ok(reports)
    }

    pub fn restore(&self) -> Result<Restored> {
        let c = &self.config.input;
        let cloud = required(&c.cloud, "input.cloud (point cloud PLY)").map_err(|e| e.in_stage("restore"))?;
        self.restore_from(cloud, c.colmap.as_deref())
    }

    fn restore_from(&self, cloud_path: &Path, colmap: Option<&Path>) -> Result<Restored> {
        self.restore_inner(cloud_path, colmap).map_err(|e| e.in_stage("restore"))
    }

    fn restore_inner(&self, cloud_path: &Path, colmap: Option<&Path>) -> Result<Restored> {
        let cfg = &self.config;
        let params = cfg.restore_params();
        params.validate()?;
        if cfg.restore.crop && colmap.is_none() {
            return Err(Error::Config("the ROI crop needs a camera model (input.colmap); set restore.crop = false to skip it".into()));
        }
        let sky = match (&cfg.input.sky, cfg.restore.skip_sky) {
            (_, true) => None,
            (Some(p), false) => Some(read_sky_samples(p)?),
            (None, false) => return Err(Error::Config("missing input.sky (sky color samples; or use --skip-sky)".into())),
        };
        let cloud = self.load_cloud(cloud_path)?;
        let cameras = colmap.map(read_colmap_model).transpose()?;
        let mut report = StageReport::new("restore");
        info!("restore: {} points", cloud.len());

        let plane = fit_ground_plane(&cloud, &params)?;
        let aligned = align_to_ground(&cloud, cameras.as_ref(), &plane)?;
        report.step(
            "align",
            vec![
                ("points_in", int(cloud.len())),
                ("points_out", int(aligned.cloud.len())),
                ("normal", vec3(plane.normal)),
                ("offset", num(plane.offset)),
                ("inliers", int(plane.inliers.len())),
                ("flipped", int(aligned.flipped)),
            ],
        );

        let cropped = match (&aligned.cameras, cfg.restore.crop) {
            (Some(cams), true) => {
                let out = crop_roi(&aligned.cloud, cams)?;
                report.step("crop", vec![("points_in", int(aligned.cloud.len())), ("points_out", int(out.len())), ("removed", int(aligned.cloud.len() - out.len()))]);
                out
            }
            _ => {
                report.step("crop", vec![("status", "skipped".into()), ("points_out", int(aligned.cloud.len()))]);
                aligned.cloud.clone()
            }
        };

        let denoised = statistical_outlier_removal(&cropped, params.sor_k, params.sor_std_ratio)?;
        report.step(
            "sor",
            vec![
                ("points_in", int(cropped.len())),
                ("points_out", int(denoised.len())),
                ("removed", int(cropped.len() - denoised.len())),
                ("k", int(params.sor_k)),
                ("std_ratio", num(params.sor_std_ratio)),
            ],
        );

        let restored = match sky {
            Some(samples) => {
                let removal = remove_sky_silhouette(&denoised, &samples, &params)?;
                report.step(
                    "sky",
                    vec![
                        ("points_in", int(denoised.len())),
                        ("points_out", int(removal.cloud.len())),
                        ("removed", int(removal.removed)),
                        ("clusters", int(removal.centroids.len())),
                    ],
                );
                removal.cloud
            }
            None => {
                report.step("sky", vec![("status", "skipped".into()), ("points_out", int(denoised.len()))]);
                denoised
            }
        };

        self.prepare_output()?;
        self.write_cloud(RESTORED_CLOUD, &restored)?;
        if let Some(cams) = &aligned.cameras {
            self.write_model(RESTORED_MODEL, cams)?;
        }
        self.write_text("restore.report", &report.text())?;
        Ok(Restored {
            cloud: restored,
            cameras: aligned.cameras,
            report,
        })
    }

    pub fn scale(&self) -> Result<Scaled> {
        let c = &self.config.input;
        let cloud = required(&c.cloud, "input.cloud (point cloud PLY)").map_err(|e| e.in_stage("scale"))?;
        let model = required(&c.colmap, "input.colmap (camera model)").map_err(|e| e.in_stage("scale"))?;
        self.scale_from(cloud, model)
    }

    fn scale_from(&self, cloud_path: &Path, model: &Path) -> Result<Scaled> {
        self.scale_inner(cloud_path, model).map_err(|e| e.in_stage("scale"))
    }

    fn scale_inner(&self, cloud_path: &Path, model: &Path) -> Result<Scaled> {
        let cfg = &self.config;
        let d_aruco = cfg
            .scale
            .d_aruco
            .ok_or_else(|| Error::Config("missing scale.d_aruco (marker side length in meters)".into()))?;
        let markers = read_marker_detections(required(&cfg.input.markers, "input.markers (marker detections)")?)?;
        let cameras = read_colmap_model(model)?;
        let cloud = self.load_cloud(cloud_path)?;
        let estimate = estimate_scale(&markers, &cameras, d_aruco)?;
        let mut report = StageReport::new("scale");
        let mut fields = vec![
            ("observations", int(markers.len())),
            ("scale", num(estimate.scale)),
            ("mean_side", num(estimate.mean_side)),
            ("d_aruco", num(d_aruco)),
        ];
        let names = ["residual_1", "residual_2", "residual_3", "residual_4"];
        for (name, r) in names.iter().zip(estimate.corner_residuals) {
            fields.push((name, num(r)));
        }
        report.step("estimate", fields);
        if let Some(limit) = cfg.scale.max_residual {
            let worst = estimate.corner_residuals.iter().cloned().fold(0.0, f64::max);
            if worst > limit {
                return Err(CoreError::Degenerate(format!("corner residual {worst} exceeds scale.max_residual {limit}")).into());
            }
        }
        let (scaled, scaled_cams) = apply_scale(&cloud, Some(&cameras), estimate.scale)?;
        report.step("apply", vec![("points", int(scaled.len())), ("dry_run", int(self.dry_run))]);
        self.prepare_output()?;
        self.write_cloud(SCALED_CLOUD, &scaled)?;
        if let Some(cams) = &scaled_cams {
            self.write_model(SCALED_MODEL, cams)?;
        }
        self.write_text("scale.report", &report.text())?;
        Ok(Scaled {
            estimate,
            cloud: scaled,
            report,
        })
    }

    pub fn skeletonize(&self) -> Result<Skeletonized> {
        let cloud = required(&self.config.input.cloud, "input.cloud (point cloud PLY)").map_err(|e| e.in_stage("skeletonize"))?;
        self.skeletonize_from(cloud)
    }

    fn skeletonize_from(&self, cloud_path: &Path) -> Result<Skeletonized> {
        self.skeletonize_inner(cloud_path).map_err(|e| e.in_stage("skeletonize"))
    }

    fn skeletonize_inner(&self, cloud_path: &Path) -> Result<Skeletonized> {
        let cfg = &self.config;
        let params = cfg.contraction_params();
        params.validate()?;
        let loaded = self.load_cloud(cloud_path)?;
        let semantic = cfg.contraction.semantic;
        let mut report = StageReport::new("skeletonize");
        let is_tree = |l: &SemanticLabel| matches!(l, SemanticLabel::Trunk | SemanticLabel::Branch);
        let cloud = if cfg.contraction.tree_points_only && loaded.labels().iter().any(is_tree) {
            let keep: Vec<bool> = loaded.labels().iter().map(is_tree).collect();
            let tree = loaded.filter_mask(&keep);
            report.step("select", vec![("points_in", int(loaded.len())), ("points_out", int(tree.len()))]);
            tree
        } else {
            loaded
        };
        let trunk = cloud.count_label(SemanticLabel::Trunk);
        if semantic && trunk == 0 {
            warn!("skeletonize: --semantic requested but the cloud has no trunk-labeled points; every row keeps weight 1 (plain contraction)");
            report.step("warning", vec![("reason", "no-trunk-labels".into())]);
        }
        if cloud.len() < 4 {
            return Err(CoreError::TooFewPoints {
                what: "contraction",
                needed: 4,
                got: cloud.len(),
            }
            .into());
        }
        let nbhd = build_neighborhoods(cloud.positions(), params.neighbors)?;
        let mut log = String::new();
        let result = contract_observed(&cloud, &nbhd, &params, semantic, &mut |rec, _| {
            let line = format!(
                "iteration={} contraction_weight={} attraction_weight={} volume_ratio={} area_ratio={} residual={}",
                rec.iteration,
                num(rec.contraction_weight),
                num(rec.mean_attraction_weight),
                num(rec.volume_ratio),
                num(rec.area_ratio),
                num(rec.residual)
            );
            info!("skeletonize: {line}");
            log.push_str(&line);
            log.push('\n');
        })?;
        log.push_str(&format!("isolated={} stop={}\n", result.isolated.len(), result.stop.name()));
        report.step(
            "contract",
            vec![
                ("points", int(cloud.len())),
                ("semantic", int(semantic)),
                ("lambda_t", num(params.trunk_weight)),
                ("trunk_rows", int(result.trunk_rows)),
                ("iterations", int(result.iterations.len())),
                ("stop", result.stop.name().into()),
                ("isolated", int(result.isolated.len())),
            ],
        );

        let points = result.cloud.positions();
        let samples = cfg.topology.samples.unwrap_or_else(|| default_sample_count(points.len()));
        let start = cfg.topology.start_index.map_or(StartRule::FarthestFromCentroid, StartRule::Index);
        let picked = farthest_point_sampling(points, samples, start)?;
        let sampled: Vec<Vec3> = picked.iter().map(|&i| points[i]).collect();
        let mst = minimum_spanning_tree(&sampled);
        report.step("mst", vec![("samples", int(sampled.len())), ("edges", int(mst.edges.len())), ("length", num(mst.total_length()))]);
        let skeleton = simplify_graph(&mst)?;
        let degrees = skeleton.degrees();
        report.step(
            "simplify",
            vec![
                ("nodes", int(skeleton.nodes.len())),
                ("edges", int(skeleton.edges.len())),
                ("tips", int(degrees.iter().filter(|&&d| d == 1).count())),
                ("junctions", int(degrees.iter().filter(|&&d| d >= 3).count())),
            ],
        );

        self.prepare_output()?;
        self.write_cloud(CONTRACTED_CLOUD, &result.cloud)?;
        self.write_text(MST_GRAPH, &encode_graph(&mst, GraphFormat::EdgeList))?;
        self.write_text(SKELETON_GRAPH, &encode_graph(&skeleton, GraphFormat::EdgeList))?;
        self.write_text(SKELETON_OBJ, &encode_graph(&skeleton, GraphFormat::Obj))?;
        self.write_text(CONTRACTION_LOG, &log)?;
        self.write_text("skeletonize.report", &report.text())?;
        Ok(Skeletonized {
            contracted: result.cloud,
            iterations: result.iterations,
            mst,
            skeleton,
            report,
        })
    }

    /// Runs the LBC / S-LBC comparison, trees in parallel.
    pub fn eval(&self) -> Result<ComparisonReport> {
        self.eval_inner().map_err(|e| e.in_stage("eval"))
    }

    fn eval_inner(&self) -> Result<ComparisonReport> {
        let dataset = self.config.dataset_params();
        dataset.validate()?;
        let params = self.config.contraction_params();
        params.validate()?;
        let dir = self.out(EVAL_DIR);
        let save = self.config.eval.save_clouds && !self.dry_run;
        if !self.dry_run {
            fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        }
        let per_tree: Vec<Vec<Score>> = (0..dataset.trees)
            .into_par_iter()
            .map(|tree| -> Result<Vec<Score>> {
                let case = prepare_tree(&dataset, tree)?;
                info!("eval: tree {tree}: {} noisy / {} occluded points", case.noisy.len(), case.occluded.len());
                if save {
                    let opts = self.ply_options();
                    write_ply(&case.noisy, dir.join(format!("tree_{tree:03}_noisy.ply")), opts)?;
                    write_ply(&case.occluded, dir.join(format!("tree_{tree:03}_occluded.ply")), opts)?;
                    let truth = dir.join(format!("tree_{tree:03}_truth.graph"));
                    fs::write(&truth, encode_graph(&case.skeleton.to_graph(), GraphFormat::EdgeList))
                        .map_err(|e| Error::io(&truth, e))?;
                }
                let scores = evaluate_case(&dataset, &params, &case)?;
                for s in &scores {
                    info!("eval: tree {tree} {} {} chamfer={:e}", s.algorithm.name(), s.corruption.name(), s.chamfer);
                }
                Ok(scores)
            })
            .collect::<Result<_>>()?;
        let report = ComparisonReport::new(per_tree.into_iter().flatten().collect());
        if !self.dry_run {
            for (name, text) in [("report.tsv", report.to_tsv()), ("summary.txt", report.summary_table())] {
                let path = dir.join(name);
                fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
            }
        }
        Ok(report)
    }
}
