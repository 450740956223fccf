//! Domain types shared by every stage of the pipeline.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{Mat3, Vec3};

/// Per-point semantic class. Byte codes are part of the PLY contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum SemanticLabel {
    Ground,
    Trunk,
    Branch,
    Sign,
    Marker,
    Calibration,
    Roof,
    #[default]
    Unlabeled,
}

impl SemanticLabel {
    pub const ALL: [SemanticLabel; 8] = [
        SemanticLabel::Ground,
        SemanticLabel::Trunk,
        SemanticLabel::Branch,
        SemanticLabel::Sign,
        SemanticLabel::Marker,
        SemanticLabel::Calibration,
        SemanticLabel::Roof,
        SemanticLabel::Unlabeled,
    ];

    pub const fn code(self) -> u8 {
        match self {
            SemanticLabel::Ground => 0,
            SemanticLabel::Trunk => 1,
            SemanticLabel::Branch => 2,
            SemanticLabel::Sign => 3,
            SemanticLabel::Marker => 4,
            SemanticLabel::Calibration => 5,
            SemanticLabel::Roof => 6,
            SemanticLabel::Unlabeled => 255,
        }
    }

    /// Unknown codes map to `Unlabeled`.
    pub const fn from_code(code: u8) -> Self {
        match code {
            0 => SemanticLabel::Ground,
            1 => SemanticLabel::Trunk,
            2 => SemanticLabel::Branch,
            3 => SemanticLabel::Sign,
            4 => SemanticLabel::Marker,
            5 => SemanticLabel::Calibration,
            6 => SemanticLabel::Roof,
            _ => SemanticLabel::Unlabeled,
        }
    }

    pub const fn name(self) -> &'static str {
        match self {
            SemanticLabel::Ground => "ground",
            SemanticLabel::Trunk => "trunk",
            SemanticLabel::Branch => "branch",
            SemanticLabel::Sign => "sign",
            SemanticLabel::Marker => "marker",
            SemanticLabel::Calibration => "calibration",
            SemanticLabel::Roof => "roof",
            SemanticLabel::Unlabeled => "unlabeled",
        }
    }
}

/// RGB color with components in `[0, 1]`.
pub type Rgb = [f64; 3];

/// A point cloud with per-point color and semantic label.
///
/// Positions, colors and labels always have the same length, coordinates are
/// finite and colors lie in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LabeledPointCloud {
    positions: Vec<Vec3>,
    colors: Vec<Rgb>,
    labels: Vec<SemanticLabel>,
}

impl LabeledPointCloud {
    pub fn new(positions: Vec<Vec3>, colors: Vec<Rgb>, labels: Vec<SemanticLabel>) -> Result<Self> {
        if positions.len() != colors.len() || positions.len() != labels.len() {
            return Err(Error::Invariant(format!(
                "cloud arrays differ in length: {} positions, {} colors, {} labels",
                positions.len(),
                colors.len(),
                labels.len()
            )));
        }
        if let Some(i) = positions.iter().position(|p| !p.is_finite()) {
            return Err(Error::Invariant(format!("point {i} has a non-finite coordinate")));
        }
        if let Some(i) = colors
            .iter()
            .position(|c| c.iter().any(|v| !(0.0..=1.0).contains(v)))
        {
            return Err(Error::Invariant(format!("point {i} has a color outside [0, 1]")));
        }
        Ok(Self {
            positions,
            colors,
            labels,
        })
    }

    /// Black, unlabeled points.
    pub fn from_positions(positions: Vec<Vec3>) -> Result<Self> {
        let n = positions.len();
        Self::new(positions, alloc::vec![[0.0; 3]; n], alloc::vec![SemanticLabel::Unlabeled; n])
    }

    /// Black points with the given labels.
    pub fn from_labeled(positions: Vec<Vec3>, labels: Vec<SemanticLabel>) -> Result<Self> {
        let n = positions.len();
        Self::new(positions, alloc::vec![[0.0; 3]; n], labels)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    pub fn colors(&self) -> &[Rgb] {
        &self.colors
    }

    pub fn labels(&self) -> &[SemanticLabel] {
        &self.labels
    }

    pub fn into_parts(self) -> (Vec<Vec3>, Vec<Rgb>, Vec<SemanticLabel>) {
        (self.positions, self.colors, self.labels)
    }

    /// Same colors and labels, new positions.
    pub fn with_positions(&self, positions: Vec<Vec3>) -> Result<Self> {
        Self::new(positions, self.colors.clone(), self.labels.clone())
    }

    pub fn with_labels(&self, labels: Vec<SemanticLabel>) -> Result<Self> {
        Self::new(self.positions.clone(), self.colors.clone(), labels)
    }

    /// Sub-cloud of the given indices, in that order.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            positions: indices.iter().map(|&i| self.positions[i]).collect(),
            colors: indices.iter().map(|&i| self.colors[i]).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    /// Sub-cloud of the points for which `keep` is true.
    pub fn filter_mask(&self, keep: &[bool]) -> Self {
        let idx: Vec<usize> = keep
            .iter()
            .enumerate()
            .filter_map(|(i, &k)| k.then_some(i))
            .collect();
        self.select(&idx)
    }

    pub fn centroid(&self) -> Option<Vec3> {
        if self.is_empty() {
            return None;
        }
        let sum = self.positions.iter().fold(Vec3::ZERO, |a, &p| a + p);
        Some(sum / self.len() as f64)
    }

    /// Axis-aligned bounds `(min, max)`.
    pub fn bounds(&self) -> Option<(Vec3, Vec3)> {
        bounds(&self.positions)
    }

    pub fn count_label(&self, label: SemanticLabel) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }
}

pub fn bounds(points: &[Vec3]) -> Option<(Vec3, Vec3)> {
    let first = *points.first()?;
    Some(
        points
            .iter()
            .fold((first, first), |(lo, hi), &p| (lo.min(p), hi.max(p))),
    )
}

/// Pinhole intrinsics with zero skew, in pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Intrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

impl Intrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64) -> Result<Self> {
        if !(fx > 0.0 && fy > 0.0) || !fx.is_finite() || !fy.is_finite() {
            return Err(Error::param("focal length", "fx and fy must be positive"));
        }
        if !cx.is_finite() || !cy.is_finite() {
            return Err(Error::param("principal point", "must be finite"));
        }
        Ok(Self { fx, fy, cx, cy })
    }

    pub fn matrix(&self) -> Mat3 {
        Mat3::from_rows([self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0])
    }

    /// `K⁻¹ · (u, v, 1)ᵀ`, written out for the zero-skew case.
    pub fn unproject(&self, pixel: [f64; 2]) -> Vec3 {
        Vec3::new((pixel[0] - self.cx) / self.fx, (pixel[1] - self.cy) / self.fy, 1.0)
    }

    /// Pixel of a point given in camera coordinates.
    pub fn project(&self, p: Vec3) -> [f64; 2] {
        [self.fx * p.x() / p.z() + self.cx, self.fy * p.y() / p.z() + self.cy]
    }
}

/// Camera-to-world pose of one image.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraPose {
    pub image_id: u32,
    pub name: String,
    /// Rotates camera-frame directions into the world frame.
    pub rotation: Mat3,
    /// Camera center in world coordinates.
    pub origin: Vec3,
}

impl CameraPose {
    pub fn new(image_id: u32, name: impl Into<String>, rotation: Mat3, origin: Vec3) -> Result<Self> {
        if rotation.orthogonality_error() > 1e-9 || (rotation.determinant() - 1.0).abs() > 1e-9 {
            return Err(Error::Invariant(format!(
                "image {image_id}: rotation is not a proper orthonormal matrix"
            )));
        }
        if !origin.is_finite() {
            return Err(Error::Invariant(format!("image {image_id}: non-finite camera origin")));
        }
        Ok(Self {
            image_id,
            name: name.into(),
            rotation,
            origin,
        })
    }

    /// World point expressed in this camera's frame.
    pub fn world_to_camera(&self, p: Vec3) -> Vec3 {
        self.rotation.transpose() * (p - self.origin)
    }
}

/// Shared intrinsics plus one pose per registered image.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraModel {
    pub intrinsics: Intrinsics,
    poses: BTreeMap<u32, CameraPose>,
}

impl CameraModel {
    pub fn new(intrinsics: Intrinsics, poses: impl IntoIterator<Item = CameraPose>) -> Self {
        Self {
            intrinsics,
            poses: poses.into_iter().map(|p| (p.image_id, p)).collect(),
        }
    }

    pub fn pose(&self, image_id: u32) -> Result<&CameraPose> {
        self.poses.get(&image_id).ok_or(Error::UnknownImage(image_id))
    }

    /// Poses ordered by image id.
    pub fn poses(&self) -> impl ExactSizeIterator<Item = &CameraPose> {
        self.poses.values()
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    pub fn origins(&self) -> Vec<Vec3> {
        self.poses.values().map(|p| p.origin).collect()
    }

    /// Applies `p ↦ rotation·p + translation` to every camera.
    pub fn transformed(&self, rotation: &Mat3, translation: Vec3) -> Self {
        let poses = self.poses.values().map(|p| CameraPose {
            image_id: p.image_id,
            name: p.name.clone(),
            rotation: *rotation * p.rotation,
            origin: *rotation * p.origin + translation,
        });
        Self::new(self.intrinsics, poses)
    }

    /// Multiplies every camera origin by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        let poses = self.poses.values().map(|p| CameraPose {
            origin: p.origin * s,
            ..p.clone()
        });
        Self::new(self.intrinsics, poses)
    }
}

/// The four detected corners of one square fiducial in one image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkerObservation {
    pub image_id: u32,
    corners: [[f64; 2]; 4],
}

impl MarkerObservation {
    pub fn new(image_id: u32, corners: [[f64; 2]; 4]) -> Result<Self> {
        if corners.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Invariant(format!("image {image_id}: non-finite marker corner")));
        }
        for i in 0..4 {
            for j in i + 1..4 {
                if corners[i] == corners[j] {
                    return Err(Error::Invariant(format!(
                        "image {image_id}: marker corners {} and {} coincide",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        let area2: f64 = (0..4)
            .map(|i| {
                let a = corners[i];
                let b = corners[(i + 1) % 4];
                a[0] * b[1] - b[0] * a[1]
            })
            .sum();
        if area2.abs() <= 0.0 {
            return Err(Error::Invariant(format!("image {image_id}: marker quad has zero area")));
        }
        Ok(Self { image_id, corners })
    }

    pub fn corners(&self) -> &[[f64; 2]; 4] {
        &self.corners
    }
}

/// Undirected graph of 3D nodes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SkeletonGraph {
    pub nodes: Vec<Vec3>,
    pub edges: Vec<(usize, usize)>,
}

impl SkeletonGraph {
    pub fn new(nodes: Vec<Vec3>, edges: Vec<(usize, usize)>) -> Result<Self> {
        for &(a, b) in &edges {
            if a >= nodes.len() || b >= nodes.len() {
                return Err(Error::Invariant(format!(
                    "edge ({a}, {b}) references a node outside 0..{}",
                    nodes.len()
                )));
            }
            if a == b {
                return Err(Error::Invariant(format!("self-loop at node {a}")));
            }
        }
        Ok(Self { nodes, edges })
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = alloc::vec![0usize; self.nodes.len()];
        for &(a, b) in &self.edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        deg
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = alloc::vec![Vec::new(); self.nodes.len()];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    pub fn total_length(&self) -> f64 {
        self.edges
            .iter()
            .map(|&(a, b)| self.nodes[a].distance(self.nodes[b]))
            .sum()
    }

    /// Connected and acyclic.
    pub fn is_tree(&self) -> bool {
        if self.nodes.is_empty() {
            return self.edges.is_empty();
        }
        if self.edges.len() + 1 != self.nodes.len() {
            return false;
        }
        let adj = self.adjacency();
        let mut seen = alloc::vec![false; self.nodes.len()];
        let mut stack = alloc::vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == self.nodes.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_codes_roundtrip_and_unknown_is_unlabeled() {
        for l in SemanticLabel::ALL {
            assert_eq!(SemanticLabel::from_code(l.code()), l);
        }
        assert_eq!(SemanticLabel::from_code(7), SemanticLabel::Unlabeled);
        assert_eq!(SemanticLabel::from_code(200), SemanticLabel::Unlabeled);
    }

    #[test]
    fn cloud_rejects_mismatched_lengths_and_bad_values() {
        let p = alloc::vec![Vec3::ZERO; 2];
        assert!(LabeledPointCloud::new(p.clone(), alloc::vec![[0.0; 3]; 1], alloc::vec![SemanticLabel::Trunk; 2]).is_err());
        assert!(LabeledPointCloud::new(p.clone(), alloc::vec![[0.0, 1.5, 0.0]; 2], alloc::vec![SemanticLabel::Trunk; 2]).is_err());
        assert!(LabeledPointCloud::from_positions(alloc::vec![Vec3::new(f64::NAN, 0.0, 0.0)]).is_err());
        assert!(LabeledPointCloud::from_positions(p).is_ok());
    }

    #[test]
    fn degenerate_marker_rejected() {
        assert!(MarkerObservation::new(1, [[1.0, 1.0]; 4]).is_err());
        assert!(MarkerObservation::new(1, [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [3.0, 0.0]]).is_err());
        assert!(MarkerObservation::new(1, [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).is_ok());
    }

    #[test]
    fn pose_requires_rotation() {
        assert!(CameraPose::new(0, "a", Mat3::diag(1.0, 1.0, -1.0), Vec3::ZERO).is_err());
        assert!(CameraPose::new(0, "a", Mat3::IDENTITY, Vec3::ZERO).is_ok());
    }

    #[test]
    fn intrinsics_unproject_matches_inverse() {
        let k = Intrinsics::new(800.0, 810.0, 400.0, 300.0).unwrap();
        let inv = k.matrix().inverse().unwrap();
        let px = [123.0, 456.0];
        let a = k.unproject(px);
        let b = inv * Vec3::new(px[0], px[1], 1.0);
        assert!((a - b).norm() < 1e-15);
    }
}
