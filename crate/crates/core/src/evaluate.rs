//! Synthetic trees with exact ground-truth skeletons, the corruption and
//! downsampling steps of the evaluation protocol, and Chamfer scoring of
//! plain against semantic contraction.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::contraction::{contract_lbc, contract_slbc, ContractionParams};
use crate::error::{Error, Result};
use crate::math::{self, Vec3};
use crate::restore::mean_neighbor_distances;
use crate::spatial::KdTree;
use crate::types::{LabeledPointCloud, Rgb, SemanticLabel, SkeletonGraph};

const TRUNK_COLOR: Rgb = [0.42, 0.30, 0.20];
const BRANCH_COLOR: Rgb = [0.55, 0.42, 0.30];

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticTreeParams {
    pub trunk_height: f64,
    /// Radius at the base of the trunk.
    pub trunk_radius: f64,
    /// Top radius over base radius of every limb.
    pub taper: f64,
    pub trunk_segments: usize,
    pub branch_segments: usize,
    /// Standard deviation (radians) of the per-segment direction jitter.
    pub bend: f64,
    pub levels: usize,
    pub branches_per_level: usize,
    /// Child length over parent length.
    pub length_decay: f64,
    /// Child base radius over the parent radius at the attachment point.
    pub radius_decay: f64,
    /// Surface samples per square meter.
    pub point_density: f64,
    pub seed: u64,
}

impl Default for SyntheticTreeParams {
    fn default() -> Self {
        Self {
            trunk_height: 2.5,
            trunk_radius: 0.1,
            taper: 0.6,
            trunk_segments: 8,
            branch_segments: 4,
            bend: 0.04,
            levels: 1,
            branches_per_level: 6,
            length_decay: 0.4,
            radius_decay: 0.3,
            point_density: 100_000.0,
            seed: 0,
        }
    }
}

impl SyntheticTreeParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("trunk_height", self.trunk_height),
            ("trunk_radius", self.trunk_radius),
            ("point_density", self.point_density),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::param(name, "must be positive and finite"));
            }
        }
        let unit = [
            ("taper", self.taper),
            ("length_decay", self.length_decay),
            ("radius_decay", self.radius_decay),
        ];
        for (name, v) in unit {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::param(name, "must lie in (0, 1)"));
            }
        }
        if !(self.bend >= 0.0) || !self.bend.is_finite() {
            return Err(Error::param("bend", "must be finite and non-negative"));
        }
        if self.trunk_segments == 0 || self.branch_segments == 0 {
            return Err(Error::param("segments", "must be at least 1"));
        }
        Ok(())
    }
}

/// Medial polylines of a synthetic tree.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthSkeleton {
    polylines: Vec<Vec<Vec3>>,
}

impl GroundTruthSkeleton {
    pub fn new(polylines: Vec<Vec<Vec3>>) -> Result<Self> {
        if polylines.is_empty() {
            return Err(Error::Empty("ground-truth skeleton"));
        }
        for (i, line) in polylines.iter().enumerate() {
            if line.len() < 2 {
                return Err(Error::Invariant(alloc::format!("polyline {i} has fewer than two points")));
            }
            if line.windows(2).any(|w| !(w[0].distance(w[1]) > 0.0)) {
                return Err(Error::Invariant(alloc::format!("polyline {i} has a zero-length segment")));
            }
        }
        Ok(Self { polylines })
    }

    pub fn polylines(&self) -> &[Vec<Vec3>] {
        &self.polylines
    }

    pub fn total_length(&self) -> f64 {
        self.polylines
            .iter()
            .flat_map(|l| l.windows(2))
            .map(|w| w[0].distance(w[1]))
            .sum()
    }

    /// Points along every polyline, at most `spacing` apart, vertices included.
    pub fn densify(&self, spacing: f64) -> Result<Vec<Vec3>> {
        if !(spacing > 0.0) {
            return Err(Error::param("spacing", "must be positive"));
        }
        let mut out = Vec::new();
        for line in &self.polylines {
            out.push(line[0]);
            for w in line.windows(2) {
                let steps = math::ceil(w[0].distance(w[1]) / spacing).max(1.0) as usize;
                for s in 1..=steps {
                    out.push(w[0] + (w[1] - w[0]) * (s as f64 / steps as f64));
                }
            }
        }
        Ok(out)
    }

    /// Polylines as a line-set graph (one connected piece per polyline).
    pub fn to_graph(&self) -> SkeletonGraph {
        let mut nodes = Vec::new();
        let mut edges = Vec::new();
        for line in &self.polylines {
            let base = nodes.len();
            nodes.extend_from_slice(line);
            edges.extend((1..line.len()).map(|k| (base + k - 1, base + k)));
        }
        SkeletonGraph { nodes, edges }
    }

    /// Smallest distance from `p` to any polyline segment.
    pub fn distance(&self, p: Vec3) -> f64 {
        self.polylines
            .iter()
            .flat_map(|l| l.windows(2))
            .map(|w| segment_distance(p, w[0], w[1]))
            .fold(f64::INFINITY, f64::min)
    }
}

fn segment_distance(p: Vec3, a: Vec3, b: Vec3) -> f64 {
    let ab = b - a;
    let t = ((p - a).dot(ab) / ab.dot(ab)).clamp(0.0, 1.0);
    p.distance(a + ab * t)
}

struct Limb {
    axis: Vec<Vec3>,
    radii: Vec<f64>,
    parent: Option<usize>,
    label: SemanticLabel,
}

impl Limb {
    fn length(&self) -> f64 {
        self.axis.windows(2).map(|w| w[0].distance(w[1])).sum()
    }

    /// Axis point, direction and radius at arc-length fraction `t`.
    fn at(&self, t: f64) -> (Vec3, Vec3, f64) {
        let target = t * self.length();
        let mut walked = 0.0;
        for (k, w) in self.axis.windows(2).enumerate() {
            let len = w[0].distance(w[1]);
            if walked + len >= target || k + 2 == self.axis.len() {
                let u = ((target - walked) / len).clamp(0.0, 1.0);
                return (w[0] + (w[1] - w[0]) * u, (w[1] - w[0]) / len, self.radii[k]);
            }
            walked += len;
        }
        unreachable!("a limb has at least one segment")
    }

    fn contains(&self, p: Vec3) -> bool {
        self.axis
            .windows(2)
            .zip(&self.radii)
            .any(|(w, &r)| segment_distance(p, w[0], w[1]) < r)
    }
}

fn jitter_direction(dir: Vec3, sigma: f64, rng: &mut ChaCha8Rng) -> Vec3 {
    if sigma == 0.0 {
        return dir;
    }
    let n = Normal::new(0.0, sigma).expect("finite sigma");
    let d = dir + Vec3::new(n.sample(rng), n.sample(rng), n.sample(rng));
    d.normalized().unwrap_or(dir)
}

fn grow_limb(
    start: Vec3,
    dir: Vec3,
    length: f64,
    radius: f64,
    segments: usize,
    p: &SyntheticTreeParams,
    upward: f64,
    rng: &mut ChaCha8Rng,
) -> (Vec<Vec3>, Vec<f64>) {
    let mut axis = alloc::vec![start];
    let mut radii = Vec::with_capacity(segments);
    let step = length / segments as f64;
    let mut d = dir;
    for k in 0..segments {
        let dk = (jitter_direction(d, p.bend, rng) + Vec3::Z * upward).normalized().unwrap_or(d);
        let last = *axis.last().expect("nonempty");
        axis.push(last + dk * step);
        radii.push(radius * (1.0 - (1.0 - p.taper) * k as f64 / segments as f64));
        d = dk;
    }
    (axis, radii)
}

/// Builds a recursive cylinder-segment tree and samples its surface.
/// Trunk points are labeled trunk, everything else branch.
pub fn generate_synthetic_tree(params: &SyntheticTreeParams) -> Result<(LabeledPointCloud, GroundTruthSkeleton)> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let (axis, radii) = grow_limb(
        Vec3::ZERO,
        Vec3::Z,
        params.trunk_height,
        params.trunk_radius,
        params.trunk_segments,
        params,
        0.0,
        &mut rng,
    );
    let mut limbs = alloc::vec![Limb {
        axis,
        radii,
        parent: None,
        label: SemanticLabel::Trunk,
    }];

    let mut level_start = 0;
    for _ in 0..params.levels {
        let level_end = limbs.len();
        for parent in level_start..level_end {
            let n = params.branches_per_level;
            let phase: f64 = rng.random_range(0.0..core::f64::consts::TAU);
            for b in 0..n {
                let t = 0.25 + 0.65 * (b as f64 + rng.random_range(0.0..1.0)) / n as f64;
                let (origin, pdir, pr) = limbs[parent].at(t);
                let azimuth = phase + b as f64 * 2.399_963 + rng.random_range(-0.3..0.3);
                let pitch = rng.random_range(0.9..1.25);
                let e1 = pdir.any_orthogonal();
                let e2 = pdir.cross(e1);
                let side = e1 * math::cos(azimuth) + e2 * math::sin(azimuth);
                let dir = (pdir * math::cos(pitch) + side * math::sin(pitch))
                    .normalized()
                    .expect("unit combination");
                let length = params.length_decay * limbs[parent].length() * (1.25 - 0.5 * t);
                let (axis, radii) = grow_limb(
                    origin,
                    dir,
                    length,
                    params.radius_decay * pr,
                    params.branch_segments,
                    params,
                    0.1,
                    &mut rng,
                );
                limbs.push(Limb {
                    axis,
                    radii,
                    parent: Some(parent),
                    label: SemanticLabel::Branch,
                });
            }
        }
        level_start = level_end;
    }

    let mut positions = Vec::new();
    let mut labels = Vec::new();
    let mut colors = Vec::new();
    for limb in &limbs {
        for (w, &r) in limb.axis.windows(2).zip(&limb.radii) {
            let (a, b) = (w[0], w[1]);
            let len = a.distance(b);
            let dir = (b - a) / len;
            let e1 = dir.any_orthogonal();
            let e2 = dir.cross(e1);
            let count = math::round(core::f64::consts::TAU * r * len * params.point_density) as usize;
            for _ in 0..count {
                let u: f64 = rng.random_range(0.0..1.0);
                let theta: f64 = rng.random_range(0.0..core::f64::consts::TAU);
                let p = a + (b - a) * u + (e1 * math::cos(theta) + e2 * math::sin(theta)) * r;
                // drop samples buried inside the parent limb
                if limb.parent.is_some_and(|q| limbs[q].contains(p)) {
                    continue;
                }
                positions.push(p);
                labels.push(limb.label);
                colors.push(if limb.label == SemanticLabel::Trunk { TRUNK_COLOR } else { BRANCH_COLOR });
            }
        }
    }
    if positions.is_empty() {
        return Err(Error::Empty("synthetic tree surface (density too low)"));
    }
    let cloud = LabeledPointCloud::new(positions, colors, labels)?;
    let skeleton = GroundTruthSkeleton::new(limbs.into_iter().map(|l| l.axis).collect())?;
    Ok((cloud, skeleton))
}

/// Mean nearest-neighbor distance.
pub fn mean_point_spacing(points: &[Vec3]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::TooFewPoints {
            what: "point spacing",
            needed: 2,
            got: points.len(),
        });
    }
    let d = mean_neighbor_distances(points, 1);
    Ok(d.iter().sum::<f64>() / d.len() as f64)
}

/// Adds zero-mean Gaussian noise with standard deviation `factor·σ_d` to
/// every coordinate, `σ_d` being the mean nearest-neighbor distance.
pub fn add_noise(cloud: &LabeledPointCloud, factor: f64, seed: u64) -> Result<LabeledPointCloud> {
    if !(factor >= 0.0) || !factor.is_finite() {
        return Err(Error::param("noise_factor", "must be finite and non-negative"));
    }
    let sigma = factor * mean_point_spacing(cloud.positions())?;
    if sigma == 0.0 {
        return Ok(cloud.clone());
    }
    let normal = Normal::new(0.0, sigma).map_err(|_| Error::param("noise_factor", "invalid deviation"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let positions = cloud
        .positions()
        .iter()
        .map(|&p| p + Vec3::new(normal.sample(&mut rng), normal.sample(&mut rng), normal.sample(&mut rng)))
        .collect();
    cloud.with_positions(positions)
}

#[derive(Debug, Clone)]
pub struct Holes {
    pub cloud: LabeledPointCloud,
    /// Indices into the input of the surviving points, ascending.
    pub kept: Vec<usize>,
    pub centers: Vec<Vec3>,
}

/// Picks `count` distinct random trunk points and removes every point, of
/// any label, within `radius` of one of them.
pub fn punch_holes(cloud: &LabeledPointCloud, count: usize, radius: f64, seed: u64) -> Result<Holes> {
    if !(radius >= 0.0) || !radius.is_finite() {
        return Err(Error::param("hole_radius", "must be finite and non-negative"));
    }
    let mut trunk: Vec<usize> = (0..cloud.len())
        .filter(|&i| cloud.labels()[i] == SemanticLabel::Trunk)
        .collect();
    if trunk.is_empty() {
        return Err(Error::Empty("trunk points for hole centers"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = count.min(trunk.len());
    for i in 0..count {
        let j = rng.random_range(i..trunk.len());
        trunk.swap(i, j);
    }
    let centers: Vec<Vec3> = trunk[..count].iter().map(|&i| cloud.positions()[i]).collect();
    let tree = KdTree::new(cloud.positions());
    let mut keep = alloc::vec![true; cloud.len()];
    for &c in &centers {
        for hit in tree.within_radius(c, radius) {
            keep[hit.index] = false;
        }
    }
    let kept = (0..cloud.len()).filter(|&i| keep[i]).collect();
    Ok(Holes {
        cloud: cloud.filter_mask(&keep),
        kept,
        centers,
    })
}

/// One point per occupied voxel: centroid position, mean color, majority
/// label with ties going to the lowest label code. Output is ordered by voxel.
pub fn voxel_downsample(cloud: &LabeledPointCloud, voxel_size: f64) -> Result<LabeledPointCloud> {
    if !(voxel_size > 0.0) || !voxel_size.is_finite() {
        return Err(Error::param("voxel_size", "must be positive and finite"));
    }
    struct Acc {
        sum: Vec3,
        color: [f64; 3],
        votes: BTreeMap<u8, usize>,
        n: usize,
    }
    let mut voxels: BTreeMap<[i64; 3], Acc> = BTreeMap::new();
    for ((p, c), l) in cloud.positions().iter().zip(cloud.colors()).zip(cloud.labels()) {
        let key = [0, 1, 2].map(|a| math::floor(p[a] / voxel_size) as i64);
        let acc = voxels.entry(key).or_insert_with(|| Acc {
            sum: Vec3::ZERO,
            color: [0.0; 3],
            votes: BTreeMap::new(),
            n: 0,
        });
        acc.sum = acc.sum + *p;
        for k in 0..3 {
            acc.color[k] += c[k];
        }
        *acc.votes.entry(l.code()).or_default() += 1;
        acc.n += 1;
    }
    let mut positions = Vec::with_capacity(voxels.len());
    let mut colors = Vec::with_capacity(voxels.len());
    let mut labels = Vec::with_capacity(voxels.len());
    for acc in voxels.values() {
        let n = acc.n as f64;
        positions.push(acc.sum / n);
        colors.push(acc.color.map(|c| (c / n).clamp(0.0, 1.0)));
        // BTreeMap iterates codes ascending, so the first maximum wins ties
        let mut best = (0u8, 0usize);
        for (&code, &votes) in &acc.votes {
            if votes > best.1 {
                best = (code, votes);
            }
        }
        labels.push(SemanticLabel::from_code(best.0));
    }
    LabeledPointCloud::new(positions, colors, labels)
}

/// Symmetric Chamfer distance: mean squared nearest-neighbor distance from
/// `x` to `y` plus the same from `y` to `x`.
pub fn chamfer_distance(x: &[Vec3], y: &[Vec3]) -> Result<f64> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::Empty("Chamfer point set"));
    }
    Ok(one_sided(x, y) + one_sided(y, x))
}

fn one_sided(from: &[Vec3], to: &[Vec3]) -> f64 {
    let tree = KdTree::new(to);
    from.iter().map(|&p| tree.nearest(p, 1)[0].dist2).sum::<f64>() / from.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algorithm {
    Lbc,
    Slbc,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Lbc => "LBC",
            Algorithm::Slbc => "S-LBC",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Corruption {
    Noise,
    NoiseAndOcclusion,
}

impl Corruption {
    pub fn name(self) -> &'static str {
        match self {
            Corruption::Noise => "noise",
            Corruption::NoiseAndOcclusion => "noise+occlusion",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetParams {
    pub trees: usize,
    pub tree: SyntheticTreeParams,
    /// Noise deviation in units of the mean point spacing.
    pub noise_factor: f64,
    pub holes: usize,
    pub hole_radius: f64,
    pub voxel_size: f64,
    /// Sampling step of the ground-truth polylines.
    pub ground_truth_spacing: f64,
    pub seed: u64,
}

impl Default for DatasetParams {
    fn default() -> Self {
        Self {
            trees: 5,
            tree: SyntheticTreeParams::default(),
            noise_factor: 3.0,
            holes: 4,
            hole_radius: 0.08,
            voxel_size: 0.015,
            ground_truth_spacing: 0.01,
            seed: 0,
        }
    }
}

impl DatasetParams {
    pub fn validate(&self) -> Result<()> {
        if self.trees == 0 {
            return Err(Error::param("trees", "must be at least 1"));
        }
        self.tree.validate()?;
        if !(self.noise_factor >= 0.0) || !self.noise_factor.is_finite() {
            return Err(Error::param("noise_factor", "must be finite and non-negative"));
        }
        if !(self.hole_radius >= 0.0) || !self.hole_radius.is_finite() {
            return Err(Error::param("hole_radius", "must be finite and non-negative"));
        }
        if !(self.voxel_size > 0.0) {
            return Err(Error::param("voxel_size", "must be positive"));
        }
        if !(self.ground_truth_spacing > 0.0) {
            return Err(Error::param("ground_truth_spacing", "must be positive"));
        }
        Ok(())
    }

    /// Seed of an independent random stream for tree `tree`.
    pub fn stream_seed(&self, tree: usize, stream: u64) -> u64 {
        splitmix64(splitmix64(self.seed ^ (tree as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)) ^ stream)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Score {
    pub tree: usize,
    pub algorithm: Algorithm,
    pub corruption: Corruption,
    pub chamfer: f64,
    pub points: usize,
    pub iterations: usize,
}

/// Inputs of one evaluated tree, kept for inspection.
#[derive(Debug, Clone)]
pub struct TreeCase {
    pub tree: usize,
    pub skeleton: GroundTruthSkeleton,
    pub noisy: LabeledPointCloud,
    pub occluded: LabeledPointCloud,
}

/// Generates, corrupts and downsamples tree `tree` of the dataset.
pub fn prepare_tree(dataset: &DatasetParams, tree: usize) -> Result<TreeCase> {
    dataset.validate()?;
    let params = SyntheticTreeParams {
        seed: dataset.stream_seed(tree, 0),
        ..dataset.tree.clone()
    };
    let (cloud, skeleton) = generate_synthetic_tree(&params)?;
    let noisy = add_noise(&cloud, dataset.noise_factor, dataset.stream_seed(tree, 1))?;
    let holes = punch_holes(&noisy, dataset.holes, dataset.hole_radius, dataset.stream_seed(tree, 2))?;
    Ok(TreeCase {
        tree,
        skeleton,
        noisy: voxel_downsample(&noisy, dataset.voxel_size)?,
        occluded: voxel_downsample(&holes.cloud, dataset.voxel_size)?,
    })
}

/// Scores both algorithms on both corruptions of one tree.
pub fn evaluate_tree(dataset: &DatasetParams, contraction: &ContractionParams, tree: usize) -> Result<Vec<Score>> {
    contraction.validate()?;
    evaluate_case(dataset, contraction, &prepare_tree(dataset, tree)?)
}

/// Scores both algorithms on an already prepared tree.
pub fn evaluate_case(dataset: &DatasetParams, contraction: &ContractionParams, case: &TreeCase) -> Result<Vec<Score>> {
    contraction.validate()?;
    let tree = case.tree;
    let truth = case.skeleton.densify(dataset.ground_truth_spacing)?;
    let mut scores = Vec::with_capacity(4);
    for (corruption, cloud) in [
        (Corruption::Noise, &case.noisy),
        (Corruption::NoiseAndOcclusion, &case.occluded),
    ] {
        for algorithm in [Algorithm::Lbc, Algorithm::Slbc] {
            let result = match algorithm {
                Algorithm::Lbc => contract_lbc(cloud, contraction)?,
                Algorithm::Slbc => contract_slbc(cloud, contraction)?,
            };
            scores.push(Score {
                tree,
                algorithm,
                corruption,
                chamfer: chamfer_distance(result.cloud.positions(), &truth)?,
                points: cloud.len(),
                iterations: result.iterations.len(),
            });
        }
    }
    Ok(scores)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub scores: Vec<Score>,
}

impl ComparisonReport {
    /// Orders scores by tree, corruption and algorithm.
    pub fn new(mut scores: Vec<Score>) -> Self {
        scores.sort_by_key(|s| (s.tree, s.corruption, s.algorithm));
        Self { scores }
    }

    pub fn mean(&self, algorithm: Algorithm, corruption: Corruption) -> Option<f64> {
        let v: Vec<f64> = self
            .scores
            .iter()
            .filter(|s| s.algorithm == algorithm && s.corruption == corruption)
            .map(|s| s.chamfer)
            .collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }

    /// Tab-separated rows: tree, algorithm, corruption, points, iterations, chamfer.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("tree\talgorithm\tcorruption\tpoints\titerations\tchamfer\n");
        for s in &self.scores {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{:.9e}",
                s.tree,
                s.algorithm.name(),
                s.corruption.name(),
                s.points,
                s.iterations,
                s.chamfer
            );
        }
        out
    }

    /// Four-row table of mean Chamfer distances.
    pub fn summary_table(&self) -> String {
        let mut out = String::from("Skeleton algorithm               Chamfer (m^2)\n");
        for corruption in [Corruption::Noise, Corruption::NoiseAndOcclusion] {
            for algorithm in [Algorithm::Lbc, Algorithm::Slbc] {
                let label = alloc::format!("{} with {}", algorithm.name(), corruption.name());
                match self.mean(algorithm, corruption) {
                    Some(m) => {
                        let _ = writeln!(out, "{label:<32} {m:.6e}");
                    }
                    None => {
                        let _ = writeln!(out, "{label:<32} -");
                    }
                }
            }
        }
        out
    }
}

/// Runs every tree of the dataset in order.
pub fn run_comparison(dataset: &DatasetParams, contraction: &ContractionParams) -> Result<ComparisonReport> {
    let mut scores = Vec::new();
    for tree in 0..dataset.trees {
        scores.extend(evaluate_tree(dataset, contraction, tree)?);
    }
    Ok(ComparisonReport::new(scores))
}
