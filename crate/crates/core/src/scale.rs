//! Metric scale recovery from multi-view observations of one square marker.
//!
//! Each detected marker corner back-projects to a ray from its camera center.
//! Rays for the same corner across images are intersected in the
//! least-squares sense, and the mean side length of the recovered square
//! relates scene units to meters.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{self, symmetric_eigen, Mat3, Vec3};
use crate::types::{CameraModel, LabeledPointCloud, MarkerObservation};

/// Half-line `origin + λ·direction` with unit direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    origin: Vec3,
    direction: Vec3,
}

impl Ray {
    /// Normalizes `direction`; fails for zero or non-finite input.
    pub fn new(origin: Vec3, direction: Vec3) -> Result<Self> {
        if !origin.is_finite() {
            return Err(Error::Invariant("ray origin must be finite".into()));
        }
        let direction = direction
            .normalized()
            .ok_or_else(|| Error::Invariant("ray direction must be nonzero and finite".into()))?;
        Ok(Self { origin, direction })
    }

    pub fn origin(&self) -> Vec3 {
        self.origin
    }

    pub fn direction(&self) -> Vec3 {
        self.direction
    }

    pub fn at(&self, lambda: f64) -> Vec3 {
        self.origin + self.direction * lambda
    }

    /// Squared orthogonal distance from `x` to the line.
    pub fn distance_squared(&self, x: Vec3) -> f64 {
        let d = self.origin - x;
        (d - self.direction * d.dot(self.direction)).norm_squared()
    }
}

/// Back-projects pixel `c` of image `image_id` into a world-space ray.
pub fn pixel_to_ray(camera: &CameraModel, image_id: u32, c: [f64; 2]) -> Result<Ray> {
    let pose = camera.pose(image_id)?;
    if !c[0].is_finite() || !c[1].is_finite() {
        return Err(Error::Invariant("pixel coordinates must be finite".into()));
    }
    let local = camera
        .intrinsics
        .unproject(c)
        .normalized()
        .expect("homogeneous pixel has unit z");
    Ray::new(pose.origin, pose.rotation * local)
}

/// Least-squares intersection point of a ray bundle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayIntersection {
    pub point: Vec3,
    /// RMS orthogonal distance from `point` to the rays.
    pub residual: f64,
}

/// Ratio of smallest to largest eigenvalue below which the bundle is singular.
pub const SINGULAR_TOLERANCE: f64 = 1e-10;

/// Closed-form minimizer of the summed squared point-to-line distances,
/// from the normal equations `Σ(I − uuᵀ)·x = Σ(I − uuᵀ)·t`.
pub fn intersect_rays_least_squares(rays: &[Ray]) -> Result<RayIntersection> {
    if rays.len() < 2 {
        return Err(Error::Degenerate(alloc::format!(
            "ray intersection needs at least 2 rays, got {}",
            rays.len()
        )));
    }
    let mut a = Mat3::ZERO;
    let mut b = Vec3::ZERO;
    for r in rays {
        let proj = Mat3::IDENTITY - r.direction.outer(r.direction);
        a += proj;
        b += proj * r.origin;
    }
    let (vals, vecs) = symmetric_eigen(&a);
    if !(vals[0] > SINGULAR_TOLERANCE * vals[2]) {
        return Err(Error::Degenerate(
            "ray bundle is (nearly) parallel; intersection is not unique".into(),
        ));
    }
    // x = V·Λ⁻¹·Vᵀ·b
    let coeffs = vecs.transpose() * b;
    let point = vecs * Vec3::new(coeffs[0] / vals[0], coeffs[1] / vals[1], coeffs[2] / vals[2]);
    let residual = math::sqrt(
        rays.iter().map(|r| r.distance_squared(point)).sum::<f64>() / rays.len() as f64,
    );
    Ok(RayIntersection { point, residual })
}

/// Recovered marker geometry and the resulting scale factor.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleEstimate {
    /// Meters per scene unit.
    pub scale: f64,
    /// Triangulated marker corners in scene units, in detection order.
    pub corners: [Vec3; 4],
    /// Mean distance between neighboring corners, scene units.
    pub mean_side: f64,
    /// RMS ray distance per corner, scene units.
    pub corner_residuals: [f64; 4],
}

/// Triangulates the four marker corners and returns `d_aruco / mean side`.
pub fn estimate_scale(
    observations: &[MarkerObservation],
    camera: &CameraModel,
    d_aruco: f64,
) -> Result<ScaleEstimate> {
    if !(d_aruco > 0.0) || !d_aruco.is_finite() {
        return Err(Error::param("d_aruco", "marker side length must be positive"));
    }
    if observations.len() < 2 {
        return Err(Error::InsufficientObservations {
            got: observations.len(),
        });
    }
    let mut corners = [Vec3::ZERO; 4];
    let mut corner_residuals = [0.0; 4];
    for k in 0..4 {
        let bundle = observations
            .iter()
            .map(|obs| pixel_to_ray(camera, obs.image_id, obs.corners()[k]))
            .collect::<Result<Vec<_>>>()?;
        let hit = intersect_rays_least_squares(&bundle).map_err(|e| match e {
            Error::Degenerate(msg) => Error::Degenerate(alloc::format!("corner {}: {msg}", k + 1)),
            other => other,
        })?;
        corners[k] = hit.point;
        corner_residuals[k] = hit.residual;
    }
    let mean_side = (0..4)
        .map(|k| corners[k].distance(corners[(k + 1) % 4]))
        .sum::<f64>()
        / 4.0;
    if !(mean_side > 0.0) {
        return Err(Error::Degenerate("triangulated marker has zero size".into()));
    }
    Ok(ScaleEstimate {
        scale: d_aruco / mean_side,
        corners,
        mean_side,
        corner_residuals,
    })
}

/// Multiplies every point and camera origin by `s`; rotations are untouched.
pub fn apply_scale(
    cloud: &LabeledPointCloud,
    camera: Option<&CameraModel>,
    s: f64,
) -> Result<(LabeledPointCloud, Option<CameraModel>)> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::param("scale", "must be positive"));
    }
    let positions = cloud.positions().iter().map(|&p| p * s).collect();
    Ok((cloud.with_positions(positions)?, camera.map(|c| c.scaled(s))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{CameraPose, Intrinsics};

    fn single_camera(k: Intrinsics, rotation: Mat3, origin: Vec3) -> CameraModel {
        CameraModel::new(k, [CameraPose::new(1, "a", rotation, origin).unwrap()])
    }

    #[test]
    fn principal_ray() {
        let cam = single_camera(Intrinsics::new(1.0, 1.0, 0.0, 0.0).unwrap(), Mat3::IDENTITY, Vec3::ZERO);
        let r = pixel_to_ray(&cam, 1, [0.0, 0.0]).unwrap();
        assert_eq!(r.origin(), Vec3::ZERO);
        assert_eq!(r.direction(), Vec3::Z);
        assert_eq!(pixel_to_ray(&cam, 2, [0.0, 0.0]), Err(Error::UnknownImage(2)));
    }

    #[test]
    fn principal_point_maps_to_optical_axis() {
        let rot = Mat3::rotation(Vec3::new(1.0, 2.0, 0.5).normalized().unwrap(), 0.7);
        let k = Intrinsics::new(512.0, 640.0, 311.0, 207.5).unwrap();
        let cam = single_camera(k, rot, Vec3::new(3.0, -1.0, 2.0));
        let r = pixel_to_ray(&cam, 1, [311.0, 207.5]).unwrap();
        assert!((r.direction() - rot * Vec3::Z).norm() < 1e-15);
    }

    #[test]
    fn off_axis_pixel_uses_inverse_intrinsics() {
        let k = Intrinsics::new(800.0, 800.0, 400.0, 400.0).unwrap();
        let cam = single_camera(k, Mat3::IDENTITY, Vec3::ZERO);
        let r = pixel_to_ray(&cam, 1, [800.0, 400.0]).unwrap();
        // explicit K⁻¹ = [[1/800, 0, -0.5], [0, 1/800, -0.5], [0, 0, 1]]
        let kinv = Mat3::from_rows([1.0 / 800.0, 0.0, -0.5], [0.0, 1.0 / 800.0, -0.5], [0.0, 0.0, 1.0]);
        let want = (kinv * Vec3::new(800.0, 400.0, 1.0)).normalized().unwrap();
        assert!((r.direction() - want).norm() < 1e-15);
        assert!((r.direction() - Vec3::new(0.5, 0.0, 1.0).normalized().unwrap()).norm() < 1e-15);
    }

    #[test]
    fn two_crossing_rays() {
        let s = core::f64::consts::FRAC_1_SQRT_2;
        let rays = [
            Ray::new(Vec3::ZERO, Vec3::new(s, s, 0.0)).unwrap(),
            Ray::new(Vec3::new(2.0, 0.0, 0.0), Vec3::new(-s, s, 0.0)).unwrap(),
        ];
        let hit = intersect_rays_least_squares(&rays).unwrap();
        assert!((hit.point - Vec3::new(1.0, 1.0, 0.0)).norm() < 1e-12);
        assert!(hit.residual < 1e-12);
    }

    #[test]
    fn parallel_rays_are_degenerate() {
        let rays = [
            Ray::new(Vec3::ZERO, Vec3::X).unwrap(),
            Ray::new(Vec3::new(0.0, 2.0, 0.0), Vec3::X).unwrap(),
        ];
        assert!(matches!(intersect_rays_least_squares(&rays), Err(Error::Degenerate(_))));
        assert!(matches!(intersect_rays_least_squares(&rays[..1]), Err(Error::Degenerate(_))));
    }

    #[test]
    fn single_observation_is_rejected() {
        let cam = single_camera(Intrinsics::new(1.0, 1.0, 0.0, 0.0).unwrap(), Mat3::IDENTITY, Vec3::ZERO);
        let obs = MarkerObservation::new(1, [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
        let err = estimate_scale(&[obs], &cam, 0.1).unwrap_err();
        assert_eq!(err, Error::InsufficientObservations { got: 1 });
        assert!(alloc::format!("{err}").contains("N_J >= 2"));
    }

    #[test]
    fn apply_scale_multiplies_positions() {
        let cloud = LabeledPointCloud::from_positions(alloc::vec![Vec3::new(1.0, 1.0, 1.0)]).unwrap();
        let (same, _) = apply_scale(&cloud, None, 1.0).unwrap();
        assert_eq!(same, cloud);
        let (twice, _) = apply_scale(&cloud, None, 2.0).unwrap();
        assert_eq!(twice.positions()[0], Vec3::new(2.0, 2.0, 2.0));
        assert!(apply_scale(&cloud, None, 0.0).is_err());
        assert!(apply_scale(&cloud, None, -1.0).is_err());
    }
}
