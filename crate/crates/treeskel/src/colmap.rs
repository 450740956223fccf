//! COLMAP sparse text models (`cameras.txt`, `images.txt`).
//!
//! COLMAP stores world-to-camera poses: a camera-frame point is
//! `R(q)·X + t`. The reader converts them to the camera-to-world form used
//! by [`CameraPose`]: rotation `R(q)ᵀ` and camera origin `−R(q)ᵀ·t`. The
//! writer does the inverse.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use treeskel_core::{CameraModel, CameraPose, Intrinsics, Mat3, Vec3};

use crate::error::{Error, Result};

/// Allowed deviation of a stored quaternion's norm from 1.
pub const QUATERNION_NORM_TOLERANCE: f64 = 1e-6;

pub fn read_colmap_model(dir: impl AsRef<Path>) -> Result<CameraModel> {
    let dir = dir.as_ref();
    let cameras_path = dir.join("cameras.txt");
    let images_path = dir.join("images.txt");
    let cameras = std::fs::read_to_string(&cameras_path).map_err(|e| Error::io(&cameras_path, e))?;
    let images = std::fs::read_to_string(&images_path).map_err(|e| Error::io(&images_path, e))?;
    parse_colmap_model(&cameras, &images, &cameras_path, &images_path)
}

fn numbers<const N: usize>(tokens: &[&str], path: &Path, line: usize) -> Result<[f64; N]> {
    let mut out = [0.0; N];
    for (o, t) in out.iter_mut().zip(tokens) {
        *o = t
            .parse()
            .map_err(|_| Error::parse(path, format!("line {line}"), format!("`{t}` is not a number")))?;
    }
    Ok(out)
}

/// Parses `cameras.txt` into intrinsics keyed by camera id.
pub fn parse_cameras(text: &str, path: &Path) -> Result<BTreeMap<u32, Intrinsics>> {
    let mut cameras = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let no = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| Error::parse(path, format!("line {no}"), msg);
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() < 4 {
            return Err(err("expected CAMERA_ID MODEL WIDTH HEIGHT PARAMS".into()));
        }
        let id: u32 = tokens[0].parse().map_err(|_| err(format!("bad camera id `{}`", tokens[0])))?;
        let params = &tokens[4..];
        let intrinsics = match (tokens[1], params.len()) {
            ("PINHOLE", 4) => {
                let [fx, fy, cx, cy] = numbers(params, path, no)?;
                Intrinsics::new(fx, fy, cx, cy)
            }
            ("SIMPLE_PINHOLE", 3) => {
                let [f, cx, cy] = numbers(params, path, no)?;
                Intrinsics::new(f, f, cx, cy)
            }
            ("PINHOLE" | "SIMPLE_PINHOLE", n) => return Err(err(format!("{} takes {} parameters, got {n}", tokens[1], if tokens[1] == "PINHOLE" { 4 } else { 3 }))),
            (model, _) => return Err(err(format!("unsupported camera model `{model}` (PINHOLE or SIMPLE_PINHOLE only)"))),
        }
        .map_err(|e| err(e.to_string()))?;
        cameras.insert(id, intrinsics);
    }
    Ok(cameras)
}

pub fn parse_colmap_model(cameras: &str, images: &str, cameras_path: &Path, images_path: &Path) -> Result<CameraModel> {
    let cameras = parse_cameras(cameras, cameras_path)?;
    let mut shared: Option<Intrinsics> = None;
    let mut poses = Vec::new();
    // Each image takes two lines; the second (observed 2D points) may be empty.
    let mut lines = images.lines().enumerate().filter(|(_, l)| !l.trim_start().starts_with('#'));
    while let Some((i, line)) = lines.next() {
        let no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let _points = lines.next();
        let err = |msg: String| Error::parse(images_path, format!("line {no}"), msg);
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() < 10 {
            return Err(err("expected IMAGE_ID QW QX QY QZ TX TY TZ CAMERA_ID NAME".into()));
        }
        let id: u32 = tokens[0].parse().map_err(|_| err(format!("bad image id `{}`", tokens[0])))?;
        let [qw, qx, qy, qz, tx, ty, tz] = numbers(&tokens[1..8], images_path, no)?;
        let camera_id: u32 = tokens[8].parse().map_err(|_| err(format!("bad camera id `{}`", tokens[8])))?;
        let name = tokens[9..].join(" ");

        let norm = (qw * qw + qx * qx + qy * qy + qz * qz).sqrt();
        if !((norm - 1.0).abs() <= QUATERNION_NORM_TOLERANCE) {
            return Err(err(format!("quaternion norm {norm} deviates from 1 by more than {QUATERNION_NORM_TOLERANCE}")));
        }
        let world_to_camera = Mat3::from_quaternion(qw / norm, qx / norm, qy / norm, qz / norm);
        let rotation = world_to_camera.transpose();
        let origin = -(rotation * Vec3::new(tx, ty, tz));

        let intr = *cameras
            .get(&camera_id)
            .ok_or_else(|| err(format!("image {id} references unknown camera {camera_id}")))?;
        match shared {
            None => shared = Some(intr),
            Some(s) if s == intr => {}
            Some(_) => return Err(err("images use different intrinsics; one shared camera is required".into())),
        }
        poses.push(CameraPose::new(id, name, rotation, origin).map_err(|e| err(e.to_string()))?);
    }
    let intrinsics = match (shared, cameras.values().next()) {
        (Some(i), _) | (None, Some(&i)) => i,
        (None, None) => return Err(Error::parse(cameras_path, "file", "no cameras defined")),
    };
    Ok(CameraModel::new(intrinsics, poses))
}

/// Writes the model as one PINHOLE camera (id 1) plus its images. Image size
/// is not tracked, so width and height are written as `2·cx` and `2·cy`.
pub fn write_colmap_model(model: &CameraModel, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let (cameras, images) = encode_colmap_model(model);
    for (name, text) in [("cameras.txt", cameras), ("images.txt", images)] {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

/// Text of `cameras.txt` and `images.txt`.
pub fn encode_colmap_model(model: &CameraModel) -> (String, String) {
    let k = model.intrinsics;
    let size = |c: f64| ((2.0 * c).round() as i64).max(1);
    let cameras = format!(
        "# CAMERA_ID, MODEL, WIDTH, HEIGHT, PARAMS[]\n1 PINHOLE {} {} {:?} {:?} {:?} {:?}\n",
        size(k.cx),
        size(k.cy),
        k.fx,
        k.fy,
        k.cx,
        k.cy
    );
    let mut images = String::from("# IMAGE_ID, QW, QX, QY, QZ, TX, TY, TZ, CAMERA_ID, NAME\n# POINTS2D[] as (X, Y, POINT3D_ID)\n");
    for pose in model.poses() {
        let world_to_camera = pose.rotation.transpose();
        let [w, x, y, z] = world_to_camera.to_quaternion();
        let t = -(world_to_camera * pose.origin);
        let name = if pose.name.is_empty() { format!("image{}", pose.image_id) } else { pose.name.clone() };
        let _ = writeln!(
            images,
            "{} {w:?} {x:?} {y:?} {z:?} {:?} {:?} {:?} 1 {name}\n",
            pose.image_id, t.0[0], t.0[1], t.0[2]
        );
    }
    (cameras, images)
}
