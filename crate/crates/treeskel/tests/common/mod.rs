//! Synthetic input scene shared by the CLI and acceptance tests.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use treeskel::colmap::write_colmap_model;
use treeskel::core::evaluate::{generate_synthetic_tree, SyntheticTreeParams};
use treeskel::core::{CameraModel, CameraPose, Intrinsics, LabeledPointCloud, Mat3, SemanticLabel, Vec3};
use treeskel::ply::{write_ply, PlyOptions};

/// Scene units per meter; the scale stage should recover `1 / SCENE_SCALE`.
pub const SCENE_SCALE: f64 = 2.5;
pub const MARKER_SIDE_M: f64 = 0.15;
pub const SKY: [f64; 3] = [0.55, 0.75, 0.95];

pub struct Scene {
    pub dir: PathBuf,
    pub cloud: PathBuf,
    pub colmap: PathBuf,
    pub markers: PathBuf,
    pub sky: PathBuf,
    pub config: PathBuf,
    /// Tree points (trunk + branch) in the written cloud.
    pub tree_points: usize,
}

fn look_at(origin: Vec3, target: Vec3) -> Mat3 {
    let f = (target - origin).normalized().unwrap();
    let right = f.cross(Vec3::Z).normalized().unwrap();
    let down = f.cross(right);
    Mat3::from_cols(right, down, f)
}

/// Writes a tilted, unscaled scene of one labeled tree on a ground patch
/// with outliers, sky-colored silhouette points, eight cameras and marker
/// detections, plus a matching config file.
pub fn write_scene(dir: &Path) -> Scene {
    std::fs::create_dir_all(dir).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (tree, _) = generate_synthetic_tree(&SyntheticTreeParams {
        point_density: 1500.0,
        seed: 5,
        ..Default::default()
    })
    .unwrap();
    let mut positions: Vec<Vec3> = tree.positions().to_vec();
    let mut labels: Vec<SemanticLabel> = tree.labels().to_vec();
    let mut colors: Vec<[f64; 3]> = vec![[0.40, 0.26, 0.13]; positions.len()];
    let tree_points = positions.len();

    // ground patch, wider than the camera ring so the crop has work to do
    for i in 0..36 {
        for j in 0..36 {
            let x = -4.0 + 8.0 * i as f64 / 35.0 + rng.random_range(-0.02..0.02);
            let y = -4.0 + 8.0 * j as f64 / 35.0 + rng.random_range(-0.02..0.02);
            positions.push(Vec3::new(x, y, rng.random_range(-0.004..0.004)));
            labels.push(SemanticLabel::Ground);
            colors.push([0.2, 0.5, 0.2]);
        }
    }
    // floating outliers inside the ROI
    for k in 0..6 {
        positions.push(Vec3::new(-1.5 + 0.5 * k as f64, 1.0, 6.0 + k as f64));
        labels.push(SemanticLabel::Branch);
        colors.push([0.4, 0.4, 0.4]);
    }
    // sky fused into the crown
    for k in 0..40 {
        let a = k as f64 * 0.61;
        positions.push(Vec3::new(0.3 * a.cos(), 0.3 * a.sin(), 2.0 + 0.01 * k as f64));
        labels.push(SemanticLabel::Branch);
        colors.push(SKY);
    }

    let intrinsics = Intrinsics::new(800.0, 800.0, 640.0, 480.0).unwrap();
    let target = Vec3::new(0.0, 0.0, 0.8);
    let poses: Vec<CameraPose> = (0..8)
        .map(|i| {
            let a = i as f64 * std::f64::consts::TAU / 8.0;
            let origin = Vec3::new(3.0 * a.cos(), 3.0 * a.sin(), 1.5);
            CameraPose::new(i + 1, format!("img{:02}.jpg", i + 1), look_at(origin, target), origin).unwrap()
        })
        .collect();
    let model_m = CameraModel::new(intrinsics, poses.clone());

    let c = Vec3::new(0.8, 0.4, 0.001);
    let h = MARKER_SIDE_M / 2.0;
    let corners = [
        c + Vec3::new(-h, -h, 0.0),
        c + Vec3::new(h, -h, 0.0),
        c + Vec3::new(h, h, 0.0),
        c + Vec3::new(-h, h, 0.0),
    ];
    let mut markers = String::from("# image u1 v1 u2 v2 u3 v3 u4 v4\n");
    for pose in model_m.poses() {
        let px: Vec<[f64; 2]> = corners.iter().map(|&p| intrinsics.project(pose.world_to_camera(p))).collect();
        let fields: Vec<String> = px.iter().flat_map(|p| [format!("{:.4}", p[0]), format!("{:.4}", p[1])]).collect();
        markers.push_str(&format!("{} {}\n", pose.image_id, fields.join(" ")));
    }

    // similarity into arbitrary scene units: tilt, scale and shift
    let tilt = Mat3::rotation(Vec3::new(1.0, 0.4, 0.0).normalized().unwrap(), 0.25);
    let shift = Vec3::new(0.5, -0.2, 3.0);
    let to_scene = |p: Vec3| tilt * (p * SCENE_SCALE) + shift;
    let positions: Vec<Vec3> = positions.into_iter().map(to_scene).collect();
    let poses_scene = poses
        .iter()
        .map(|p| CameraPose::new(p.image_id, p.name.clone(), tilt * p.rotation, to_scene(p.origin)).unwrap());
    let model = CameraModel::new(intrinsics, poses_scene);

    let cloud = LabeledPointCloud::new(positions, colors, labels).unwrap();
    let scene = Scene {
        dir: dir.to_path_buf(),
        cloud: dir.join("scene.ply"),
        colmap: dir.join("sparse"),
        markers: dir.join("markers.txt"),
        sky: dir.join("sky.txt"),
        config: dir.join("treeskel.toml"),
        tree_points,
    };
    write_ply(&cloud, &scene.cloud, PlyOptions { precision: treeskel::ply::PlyPrecision::Double, ..Default::default() }).unwrap();
    write_colmap_model(&model, &scene.colmap).unwrap();
    std::fs::write(&scene.markers, markers).unwrap();
    let mut sky = String::new();
    for _ in 0..60 {
        let j: [f64; 3] = std::array::from_fn(|k| (SKY[k] + rng.random_range(-0.004..0.004)).clamp(0.0, 1.0));
        sky.push_str(&format!("{} {} {}\n", j[0], j[1], j[2]));
    }
    std::fs::write(&scene.sky, sky).unwrap();
    std::fs::write(
        &scene.config,
        format!(
            "seed = 3\n\n[input]\ncloud = {:?}\ncolmap = {:?}\nmarkers = {:?}\nsky = {:?}\n\n[scale]\nd_aruco = {MARKER_SIDE_M}\n\n[contraction]\nsemantic = true\n",
            scene.cloud, scene.colmap, scene.markers, scene.sky
        ),
    )
    .unwrap();
    scene
}

pub fn treeskel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_treeskel"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("treeskel binary runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Every file under `dir` (recursively) with its bytes, sorted by path.
pub fn snapshot(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push((path.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}
