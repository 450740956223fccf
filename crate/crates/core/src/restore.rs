//! Cloud restoration: ground alignment, region-of-interest cropping and
//! denoising (statistical outliers and sky-colored silhouettes).

use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::math::{self, centroid_covariance, rotation_between, symmetric_eigen, Mat3, Vec3};
use crate::spatial::KdTree;
use crate::types::{CameraModel, LabeledPointCloud, Rgb};

/// Plane `n·p + d = 0` with unit normal and the indices of its inliers.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundPlane {
    pub normal: Vec3,
    pub offset: f64,
    pub inliers: Vec<usize>,
}

impl GroundPlane {
    pub fn signed_distance(&self, p: Vec3) -> f64 {
        self.normal.dot(p) + self.offset
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RestoreParams {
    /// Inlier distance for plane fitting. `None` uses 1% of the bounding-box diagonal.
    pub ransac_threshold: Option<f64>,
    pub ransac_iterations: usize,
    pub sor_k: usize,
    pub sor_std_ratio: f64,
    pub dbscan_eps: f64,
    pub dbscan_min_pts: usize,
    pub sky_color_tolerance: f64,
    pub seed: u64,
}

impl Default for RestoreParams {
    fn default() -> Self {
        Self {
            ransac_threshold: None,
            ransac_iterations: 1000,
            sor_k: 20,
            sor_std_ratio: 2.0,
            dbscan_eps: 0.03,
            dbscan_min_pts: 10,
            sky_color_tolerance: 0.08,
            seed: 0,
        }
    }
}

impl RestoreParams {
    pub fn validate(&self) -> Result<()> {
        if let Some(t) = self.ransac_threshold {
            if !(t > 0.0) {
                return Err(Error::param("ransac_threshold", "must be positive"));
            }
        }
        if self.ransac_iterations == 0 {
            return Err(Error::param("ransac_iterations", "must be at least 1"));
        }
        if self.sor_k == 0 {
            return Err(Error::param("sor_k", "must be at least 1"));
        }
        if self.dbscan_min_pts == 0 {
            return Err(Error::param("dbscan_min_pts", "must be at least 1"));
        }
        if !(self.sor_std_ratio > 0.0) {
            return Err(Error::param("sor_std_ratio", "must be positive"));
        }
        if !(self.dbscan_eps > 0.0) {
            return Err(Error::param("dbscan_eps", "must be positive"));
        }
        if !(self.sky_color_tolerance >= 0.0) {
            return Err(Error::param("sky_color_tolerance", "must be non-negative"));
        }
        Ok(())
    }
}

/// RANSAC plane fit with a least-squares refit on the winning inlier set.
///
/// The returned normal points toward the side holding the majority of the
/// cloud.
pub fn fit_ground_plane(cloud: &LabeledPointCloud, params: &RestoreParams) -> Result<GroundPlane> {
    params.validate()?;
    let pts = cloud.positions();
    if pts.len() < 3 {
        return Err(Error::TooFewPoints {
            what: "plane fit",
            needed: 3,
            got: pts.len(),
        });
    }
    let threshold = match params.ransac_threshold {
        Some(t) => t,
        None => {
            let (lo, hi) = cloud.bounds().expect("nonempty");
            let diag = (hi - lo).norm();
            if diag == 0.0 {
                return Err(Error::Degenerate("all points coincide".into()));
            }
            0.01 * diag
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let n = pts.len();
    let mut best: Option<(usize, Vec3, f64)> = None;
    for _ in 0..params.ransac_iterations {
        let i = rng.random_range(0..n);
        let mut j = rng.random_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let mut k = rng.random_range(0..n - 2);
        for taken in [i.min(j), i.max(j)] {
            if k >= taken {
                k += 1;
            }
        }
        let (a, b, c) = (pts[i], pts[j], pts[k]);
        let ab = b - a;
        let ac = c - a;
        let cross = ab.cross(ac);
        let area = cross.norm();
        if !(area > 1e-10 * ab.norm() * ac.norm()) {
            continue;
        }
        let normal = cross / area;
        let offset = -normal.dot(a);
        let count = pts
            .iter()
            .filter(|&&p| math::abs(normal.dot(p) + offset) <= threshold)
            .count();
        if best.map_or(true, |(c, _, _)| count > c) {
            best = Some((count, normal, offset));
        }
    }
    let (_, normal, offset) =
        best.ok_or_else(|| Error::Degenerate("every plane hypothesis was collinear".into()))?;

    let initial: Vec<usize> = (0..n)
        .filter(|&i| math::abs(normal.dot(pts[i]) + offset) <= threshold)
        .collect();
    let (mut normal, mut offset) = refit_plane(pts, &initial).unwrap_or((normal, offset));

    let above = pts.iter().filter(|&&p| normal.dot(p) + offset > 0.0).count();
    let below = pts.iter().filter(|&&p| normal.dot(p) + offset < 0.0).count();
    if below > above {
        normal = -normal;
        offset = -offset;
    }
    let inliers = (0..n)
        .filter(|&i| math::abs(normal.dot(pts[i]) + offset) <= threshold)
        .collect();
    Ok(GroundPlane {
        normal,
        offset,
        inliers,
    })
}

/// Total-least-squares plane through the given points.
pub fn refit_plane(pts: &[Vec3], idx: &[usize]) -> Option<(Vec3, f64)> {
    if idx.len() < 3 {
        return None;
    }
    let (mean, cov) = centroid_covariance(idx.iter().map(|&i| pts[i]))?;
    let (_, vecs) = symmetric_eigen(&cov);
    let normal = vecs.col(0).normalized()?;
    Some((normal, -normal.dot(mean)))
}

/// Rigid transform `p ↦ rotation·p + translation`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    pub rotation: Mat3,
    pub translation: Vec3,
}

impl RigidTransform {
    pub fn apply(&self, p: Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }
}

/// Result of [`align_to_ground`].
#[derive(Debug, Clone)]
pub struct Alignment {
    pub cloud: LabeledPointCloud,
    pub cameras: Option<CameraModel>,
    pub transform: RigidTransform,
    /// Whether the half-turn about x was needed to put the mass above ground.
    pub flipped: bool,
}

/// Rotates the plane normal onto +z, moves the plane to `z = 0`, and turns the
/// scene upside down (about x) if its center of mass ends up below ground.
pub fn align_to_ground(
    cloud: &LabeledPointCloud,
    cameras: Option<&CameraModel>,
    plane: &GroundPlane,
) -> Result<Alignment> {
    if !(math::abs(plane.normal.norm() - 1.0) <= 1e-9) || !plane.offset.is_finite() {
        return Err(Error::Invariant("plane normal must be a unit vector".into()));
    }
    let normal = plane.normal;
    let rotation = rotation_between(normal, Vec3::Z);
    let mut transform = RigidTransform {
        rotation,
        translation: Vec3::new(0.0, 0.0, plane.offset),
    };
    let mut positions: Vec<Vec3> = cloud.positions().iter().map(|&p| transform.apply(p)).collect();

    let mass_z = if positions.is_empty() {
        0.0
    } else {
        positions.iter().map(|p| p.z()).sum::<f64>() / positions.len() as f64
    };
    let flipped = mass_z < 0.0;
    if flipped {
        let half_turn = Mat3::diag(1.0, -1.0, -1.0);
        transform = RigidTransform {
            rotation: half_turn * transform.rotation,
            translation: half_turn * transform.translation,
        };
        for p in positions.iter_mut() {
            *p = half_turn * *p;
        }
    }
    Ok(Alignment {
        cloud: cloud.with_positions(positions)?,
        cameras: cameras.map(|c| c.transformed(&transform.rotation, transform.translation)),
        transform,
        flipped,
    })
}

/// Keeps the points whose `(x, y)` lies in the closed bounding box of the
/// camera origins.
pub fn crop_roi(cloud: &LabeledPointCloud, cameras: &CameraModel) -> Result<LabeledPointCloud> {
    let origins = cameras.origins();
    let (lo, hi) = crate::types::bounds(&origins).ok_or(Error::Empty("camera set"))?;
    let keep: Vec<bool> = cloud
        .positions()
        .iter()
        .map(|p| p.x() >= lo.x() && p.x() <= hi.x() && p.y() >= lo.y() && p.y() <= hi.y())
        .collect();
    Ok(cloud.filter_mask(&keep))
}

/// Mean distance from every point to its `k` nearest neighbors (self excluded).
pub fn mean_neighbor_distances(points: &[Vec3], k: usize) -> Vec<f64> {
    let tree = KdTree::new(points);
    points
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let hits = tree.nearest(p, k + 1);
            let dists = hits
                .iter()
                .filter(|h| h.index != i)
                .take(k)
                .map(|h| math::sqrt(h.dist2));
            dists.sum::<f64>() / k as f64
        })
        .collect()
}

/// Drops points whose mean `k`-neighbor distance exceeds `μ + ratio·σ`.
pub fn statistical_outlier_removal(
    cloud: &LabeledPointCloud,
    k: usize,
    std_ratio: f64,
) -> Result<LabeledPointCloud> {
    if k == 0 {
        return Err(Error::param("sor_k", "must be at least 1"));
    }
    if !(std_ratio > 0.0) {
        return Err(Error::param("sor_std_ratio", "must be positive"));
    }
    if cloud.len() <= k {
        return Err(Error::TooFewPoints {
            what: "statistical outlier removal",
            needed: k + 1,
            got: cloud.len(),
        });
    }
    let means = mean_neighbor_distances(cloud.positions(), k);
    let n = means.len() as f64;
    let mu = means.iter().sum::<f64>() / n;
    let var = means.iter().map(|m| (m - mu) * (m - mu)).sum::<f64>() / (n - 1.0).max(1.0);
    let limit = mu + std_ratio * math::sqrt(var);
    let keep: Vec<bool> = means.iter().map(|&m| m <= limit).collect();
    Ok(cloud.filter_mask(&keep))
}

/// DBSCAN cluster assignment; `None` marks noise.
pub fn dbscan(points: &[Vec3], eps: f64, min_pts: usize) -> Vec<Option<usize>> {
    let tree = KdTree::new(points);
    let mut assignment: Vec<Option<usize>> = alloc::vec![None; points.len()];
    let mut visited = alloc::vec![false; points.len()];
    let mut next_cluster = 0;
    for start in 0..points.len() {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        let seeds = tree.within_radius(points[start], eps);
        if seeds.len() < min_pts {
            continue;
        }
        let cluster = next_cluster;
        next_cluster += 1;
        assignment[start] = Some(cluster);
        let mut queue: Vec<usize> = seeds.iter().map(|n| n.index).collect();
        let mut head = 0;
        while head < queue.len() {
            let q = queue[head];
            head += 1;
            if assignment[q].is_none() {
                assignment[q] = Some(cluster);
            }
            if visited[q] {
                continue;
            }
            visited[q] = true;
            let nbrs = tree.within_radius(points[q], eps);
            if nbrs.len() >= min_pts {
                queue.extend(nbrs.iter().map(|n| n.index));
            }
        }
    }
    assignment
}

/// Output of [`remove_sky_silhouette`].
#[derive(Debug, Clone)]
pub struct SkyRemoval {
    pub cloud: LabeledPointCloud,
    /// Dominant sky colors (one per DBSCAN cluster).
    pub centroids: Vec<Rgb>,
    pub removed: usize,
}

/// Clusters jittered sky color samples and drops cloud points colored like
/// any cluster centroid.
pub fn remove_sky_silhouette(
    cloud: &LabeledPointCloud,
    sky_samples: &[Rgb],
    params: &RestoreParams,
) -> Result<SkyRemoval> {
    params.validate()?;
    if sky_samples.is_empty() {
        return Err(Error::Empty("sky color samples"));
    }
    if let Some(i) = sky_samples
        .iter()
        .position(|c| c.iter().any(|v| !(0.0..=1.0).contains(v)))
    {
        return Err(Error::Invariant(format!("sky sample {i} lies outside [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let jitter = Normal::new(0.0, 1.0 / 256.0).expect("valid sigma");
    let colors: Vec<Vec3> = sky_samples
        .iter()
        .map(|c| {
            Vec3::new(
                c[0] + jitter.sample(&mut rng),
                c[1] + jitter.sample(&mut rng),
                c[2] + jitter.sample(&mut rng),
            )
        })
        .collect();
    let assignment = dbscan(&colors, params.dbscan_eps, params.dbscan_min_pts);
    let clusters = assignment.iter().flatten().map(|&c| c + 1).max().unwrap_or(0);
    let mut sums = alloc::vec![(Vec3::ZERO, 0usize); clusters];
    for (c, a) in colors.iter().zip(&assignment) {
        if let Some(id) = *a {
            sums[id].0 += *c;
            sums[id].1 += 1;
        }
    }
    let centroids: Vec<Vec3> = sums.iter().map(|(s, n)| *s / *n as f64).collect();
    let tol2 = params.sky_color_tolerance * params.sky_color_tolerance;
    let keep: Vec<bool> = cloud
        .colors()
        .iter()
        .map(|&c| {
            let c = Vec3(c);
            !centroids.iter().any(|&m| c.distance_squared(m) <= tol2)
        })
        .collect();
    let removed = keep.iter().filter(|k| !**k).count();
    Ok(SkyRemoval {
        cloud: cloud.filter_mask(&keep),
        centroids: centroids.into_iter().map(|c| c.0).collect(),
        removed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{CameraPose, Intrinsics, SemanticLabel};

    fn grid(n: usize) -> Vec<Vec3> {
        let mut pts = Vec::new();
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    pts.push(Vec3::new(x as f64, y as f64, z as f64));
                }
            }
        }
        pts
    }

    fn cameras_at(xy: &[(f64, f64)]) -> CameraModel {
        let k = Intrinsics::new(1.0, 1.0, 0.0, 0.0).unwrap();
        CameraModel::new(
            k,
            xy.iter().enumerate().map(|(i, &(x, y))| {
                CameraPose::new(i as u32, "", Mat3::IDENTITY, Vec3::new(x, y, 1.0)).unwrap()
            }),
        )
    }

    #[test]
    fn noiseless_plane_is_recovered() {
        let pts: Vec<Vec3> = (0..100)
            .map(|i| Vec3::new((i % 10) as f64 * 0.1, (i / 10) as f64 * 0.1, 2.0))
            .collect();
        let cloud = LabeledPointCloud::from_positions(pts).unwrap();
        let plane = fit_ground_plane(&cloud, &RestoreParams::default()).unwrap();
        assert_eq!(plane.inliers.len(), 100);
        assert!((plane.normal.z().abs() - 1.0).abs() < 1e-12);
        assert!((plane.offset + 2.0 * plane.normal.z()).abs() < 1e-12);
    }

    #[test]
    fn collinear_points_are_degenerate() {
        let cloud = LabeledPointCloud::from_positions(alloc::vec![
            Vec3::ZERO,
            Vec3::new(1.0, 1.0, 1.0),
            Vec3::new(2.0, 2.0, 2.0)
        ])
        .unwrap();
        let err = fit_ground_plane(&cloud, &RestoreParams::default()).unwrap_err();
        assert!(matches!(err, Error::Degenerate(_)));
        let two = LabeledPointCloud::from_positions(alloc::vec![Vec3::ZERO, Vec3::X]).unwrap();
        assert!(matches!(
            fit_ground_plane(&two, &RestoreParams::default()),
            Err(Error::TooFewPoints { .. })
        ));
    }

    #[test]
    fn identity_alignment_for_canonical_plane() {
        let cloud = LabeledPointCloud::from_positions(alloc::vec![
            Vec3::new(0.0, 0.0, 1.0),
            Vec3::new(1.0, 2.0, 3.0)
        ])
        .unwrap();
        let plane = GroundPlane {
            normal: Vec3::Z,
            offset: 0.0,
            inliers: Vec::new(),
        };
        let out = align_to_ground(&cloud, None, &plane).unwrap();
        assert!(!out.flipped);
        assert_eq!(out.cloud.positions(), cloud.positions());
    }

    #[test]
    fn sideways_plane_rotates_up() {
        // plane x = 0, mass at x = +1: an analytic 90° turn about y takes x to z
        let pts = alloc::vec![
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(1.0, 1.0, 0.5),
            Vec3::new(1.0, -1.0, -0.5),
            Vec3::new(0.0, 0.3, 0.2),
        ];
        let cloud = LabeledPointCloud::from_positions(pts.clone()).unwrap();
        let plane = GroundPlane {
            normal: Vec3::X,
            offset: 0.0,
            inliers: Vec::new(),
        };
        let out = align_to_ground(&cloud, None, &plane).unwrap();
        let c = out.cloud.centroid().unwrap();
        assert!((c.z() - 0.75).abs() < 1e-12);
        assert!(out.cloud.positions()[3].z().abs() < 1e-12);
        assert!((out.transform.rotation * Vec3::X - Vec3::Z).norm() < 1e-12);
    }

    #[test]
    fn mass_below_ground_flips() {
        let cloud = LabeledPointCloud::from_positions(alloc::vec![
            Vec3::new(0.0, 0.0, -1.0),
            Vec3::new(1.0, 0.0, -3.0)
        ])
        .unwrap();
        let plane = GroundPlane {
            normal: Vec3::Z,
            offset: 0.0,
            inliers: Vec::new(),
        };
        let out = align_to_ground(&cloud, None, &plane).unwrap();
        assert!(out.flipped);
        assert!(out.cloud.centroid().unwrap().z() > 0.0);
    }

    #[test]
    fn crop_keeps_closed_box() {
        let cams = cameras_at(&[(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)]);
        let cloud = LabeledPointCloud::from_positions(alloc::vec![
            Vec3::new(0.0, 0.0, 5.0),
            Vec3::new(3.0, 0.0, 0.0),
            Vec3::new(1.0, -1.0, 7.0)
        ])
        .unwrap();
        let out = crop_roi(&cloud, &cams).unwrap();
        assert_eq!(out.positions(), &[Vec3::new(0.0, 0.0, 5.0), Vec3::new(1.0, -1.0, 7.0)]);
        assert_eq!(crop_roi(&out, &cams).unwrap(), out);

        let far = LabeledPointCloud::from_positions(alloc::vec![Vec3::new(9.0, 9.0, 0.0)]).unwrap();
        assert!(crop_roi(&far, &cams).unwrap().is_empty());
        let none = CameraModel::new(Intrinsics::new(1.0, 1.0, 0.0, 0.0).unwrap(), []);
        assert!(crop_roi(&cloud, &none).is_err());
    }

    /// Brute-force mean k-NN distances, independent of the kd-tree.
    fn brute_means(pts: &[Vec3], k: usize) -> Vec<f64> {
        pts.iter()
            .enumerate()
            .map(|(i, p)| {
                let mut d: Vec<f64> = pts
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, q)| p.distance(*q))
                    .collect();
                d.sort_by(f64::total_cmp);
                d[..k].iter().sum::<f64>() / k as f64
            })
            .collect()
    }

    #[test]
    fn sor_removes_only_far_point() {
        let mut pts = grid(10);
        pts.push(Vec3::new(50.0, 50.0, 50.0));
        let fast = mean_neighbor_distances(&pts, 8);
        let slow = brute_means(&pts, 8);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).abs() < 1e-12);
        }
        let cloud = LabeledPointCloud::from_positions(pts).unwrap();
        let out = statistical_outlier_removal(&cloud, 8, 2.0).unwrap();
        assert_eq!(out.len(), 1000);
        assert!(out.positions().iter().all(|p| p.x() < 10.0));
    }

    #[test]
    fn sor_on_plain_grid_matches_brute_force() {
        // Corner points sit above μ + 3σ on a bounded grid for every k; only
        // they go.
        let pts = grid(10);
        let means = brute_means(&pts, 8);
        let mu = means.iter().sum::<f64>() / 1000.0;
        let sd = (means.iter().map(|m| (m - mu) * (m - mu)).sum::<f64>() / 999.0).sqrt();
        let expected: Vec<Vec3> = pts
            .iter()
            .zip(&means)
            .filter(|(_, &m)| m <= mu + 3.0 * sd)
            .map(|(p, _)| *p)
            .collect();
        let cloud = LabeledPointCloud::from_positions(pts).unwrap();
        let out = statistical_outlier_removal(&cloud, 8, 3.0).unwrap();
        assert_eq!(out.positions(), expected.as_slice());
        assert_eq!(out.len(), 992);
        let is_corner = |p: &Vec3| p.0.iter().all(|&c| c == 0.0 || c == 9.0);
        assert!(out.positions().iter().all(|p| !is_corner(p)));
    }

    #[test]
    fn sor_requires_more_points_than_k() {
        let cloud = LabeledPointCloud::from_positions(grid(2)).unwrap();
        assert!(statistical_outlier_removal(&cloud, 8, 2.0).is_err());
    }

    #[test]
    fn sky_colored_points_removed() {
        let sky = [0.5, 0.7, 1.0];
        let brown = [0.4, 0.25, 0.1];
        let samples = alloc::vec![sky; 40];
        let n = 20;
        let colors: Vec<Rgb> = (0..n).map(|i| if i < 10 { sky } else { brown }).collect();
        let cloud = LabeledPointCloud::new(
            (0..n).map(|i| Vec3::new(i as f64, 0.0, 0.0)).collect(),
            colors,
            alloc::vec![SemanticLabel::Branch; n],
        )
        .unwrap();
        let params = RestoreParams {
            sky_color_tolerance: 0.1,
            ..Default::default()
        };
        let out = remove_sky_silhouette(&cloud, &samples, &params).unwrap();
        assert_eq!(out.centroids.len(), 1);
        // mean-of-jittered-samples oracle
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let jitter = Normal::new(0.0, 1.0 / 256.0).unwrap();
        let mut mean = [0.0; 3];
        for _ in 0..40 {
            for m in mean.iter_mut().zip(sky) {
                *m.0 += (m.1 + jitter.sample(&mut rng)) / 40.0;
            }
        }
        for (a, b) in out.centroids[0].iter().zip(mean) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(out.cloud.len(), 10);
        assert!(out.cloud.colors().iter().all(|c| *c == brown));
        assert_eq!(out.cloud.positions()[0].x(), 10.0);
    }

    #[test]
    fn sparse_sky_samples_do_nothing() {
        let samples = alloc::vec![[0.1, 0.2, 0.9], [0.9, 0.9, 0.9], [0.5, 0.6, 0.95]];
        let cloud = LabeledPointCloud::new(
            alloc::vec![Vec3::ZERO],
            alloc::vec![[0.1, 0.2, 0.9]],
            alloc::vec![SemanticLabel::Branch],
        )
        .unwrap();
        let out = remove_sky_silhouette(&cloud, &samples, &RestoreParams::default()).unwrap();
        assert!(out.centroids.is_empty());
        assert_eq!(out.cloud, cloud);
        assert!(remove_sky_silhouette(&cloud, &[], &RestoreParams::default()).is_err());
    }

    #[test]
    fn zero_tolerance_keeps_non_matching_colors() {
        let samples = alloc::vec![[0.5, 0.7, 1.0]; 30];
        let cloud = LabeledPointCloud::new(
            alloc::vec![Vec3::ZERO; 3],
            alloc::vec![[0.5, 0.7, 1.0]; 3],
            alloc::vec![SemanticLabel::Branch; 3],
        )
        .unwrap();
        let params = RestoreParams {
            sky_color_tolerance: 0.0,
            ..Default::default()
        };
        let out = remove_sky_silhouette(&cloud, &samples, &params).unwrap();
        assert_eq!(out.cloud.len(), 3);
    }

    #[test]
    fn dbscan_separates_blobs() {
        let mut pts = Vec::new();
        for i in 0..10 {
            pts.push(Vec3::new(i as f64 * 0.01, 0.0, 0.0));
            pts.push(Vec3::new(1.0 + i as f64 * 0.01, 0.0, 0.0));
        }
        pts.push(Vec3::new(5.0, 5.0, 5.0));
        let a = dbscan(&pts, 0.05, 3);
        assert_eq!(a[20], None);
        assert_ne!(a[0], a[1]);
        assert!((0..10).all(|i| a[2 * i] == a[0] && a[2 * i + 1] == a[1]));
    }
}
