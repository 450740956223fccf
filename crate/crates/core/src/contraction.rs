//! Laplacian-based contraction of a point cloud toward its curve skeleton,
//! with optional per-class (semantic) weighting of the contraction rows.
//!
//! Every iteration solves, per coordinate, the stacked least-squares system
//!
//! ```text
//! [ S ∘ (W_L·L) ]        [    0    ]
//! [     W_H     ] · C' = [ W_H · C ]
//! ```
//!
//! through its normal equations `(AᵀA)·C' = W_H²·C`, then raises the
//! contraction weight, raises the attraction weight of points whose one-ring
//! shrank, and re-evaluates the cotangent weights at the new positions. The
//! one-ring connectivity is fixed from the input cloud.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::hull::VolumeMeasure;
use crate::laplacian::{
    build_cotangent_laplacian, build_neighborhoods, build_semantic_weights, NeighborhoodGraph,
    SemanticWeights, SparseLaplacian,
};
use crate::math::{self, Vec3};
use crate::sparse::{nested_dissection, CholeskyFactor, CholeskySymbolic};
use crate::types::{LabeledPointCloud, SemanticLabel};

#[derive(Debug, Clone, PartialEq)]
pub struct ContractionParams {
    /// Initial contraction weight `w_L⁰`. `None` derives it from the cloud as
    /// `1 / (10·√(mean one-ring area))`.
    pub initial_contraction: Option<f64>,
    /// Initial attraction weight `w_H⁰`.
    pub initial_attraction: f64,
    /// Factor applied to the contraction weight after every iteration.
    pub contraction_amplification: f64,
    pub max_contraction: f64,
    pub max_attraction: f64,
    pub max_iterations: usize,
    /// Stop once current/initial volume drops below this.
    pub termination_ratio: f64,
    /// Neighbors per one-ring.
    pub neighbors: usize,
    /// Row weight for pure-trunk points in the semantic variant.
    pub trunk_weight: f64,
    /// Stop, keeping the previous iterate, once the total one-ring area grows.
    pub stop_on_area_rebound: bool,
}

impl Default for ContractionParams {
    fn default() -> Self {
        Self {
            initial_contraction: None,
            initial_attraction: 1.0,
            contraction_amplification: 3.0,
            max_contraction: 2048.0,
            max_attraction: 1024.0,
            max_iterations: 20,
            termination_ratio: 0.01,
            neighbors: 16,
            trunk_weight: 10.0,
            stop_on_area_rebound: true,
        }
    }
}

impl ContractionParams {
    pub fn validate(&self) -> Result<()> {
        if let Some(w) = self.initial_contraction {
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::param("initial_contraction", "must be finite and non-negative"));
            }
        }
        if !(self.initial_attraction > 0.0) {
            return Err(Error::param("initial_attraction", "must be positive"));
        }
        if !(self.contraction_amplification > 1.0) {
            return Err(Error::param("contraction_amplification", "must exceed 1"));
        }
        if !(self.max_contraction > 0.0) {
            return Err(Error::param("max_contraction", "must be positive"));
        }
        if !(self.max_attraction >= self.initial_attraction) {
            return Err(Error::param("max_attraction", "must be at least the initial attraction"));
        }
        if self.max_iterations == 0 {
            return Err(Error::param("max_iterations", "must be at least 1"));
        }
        if !(self.termination_ratio > 0.0 && self.termination_ratio < 1.0) {
            return Err(Error::param("termination_ratio", "must lie in (0, 1)"));
        }
        if self.neighbors < 3 {
            return Err(Error::param("neighbors", "must be at least 3"));
        }
        if !(self.trunk_weight > 0.0) || !self.trunk_weight.is_finite() {
            return Err(Error::param("trunk_weight", "must be positive"));
        }
        Ok(())
    }
}

/// Diagnostics of one contraction iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub contraction_weight: f64,
    pub mean_attraction_weight: f64,
    /// Current/initial volume after this iteration's solve.
    pub volume_ratio: f64,
    /// Total one-ring area over its initial value.
    pub area_ratio: f64,
    /// Relative residual of the normal equations, worst coordinate.
    pub residual: f64,
}

/// Why a contraction run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    VolumeRatio,
    /// The last iteration grew the one-ring area and was discarded.
    AreaRebound,
    MaxIterations,
}

impl StopReason {
    pub fn name(self) -> &'static str {
        match self {
            StopReason::VolumeRatio => "volume-ratio",
            StopReason::AreaRebound => "area-rebound",
            StopReason::MaxIterations => "max-iterations",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ContractionResult {
    pub cloud: LabeledPointCloud,
    /// One record per solve, including a discarded final one.
    pub iterations: Vec<IterationRecord>,
    pub stop: StopReason,
    /// Points without any incident triangle (zero Laplacian rows).
    pub isolated: Vec<usize>,
    pub volume_measure: VolumeMeasure,
    /// Rows that carried the trunk weight (semantic variant only).
    pub trunk_rows: usize,
}

/// Plain Laplacian-based contraction.
pub fn contract_lbc(cloud: &LabeledPointCloud, params: &ContractionParams) -> Result<ContractionResult> {
    params.validate()?;
    let nbhd = build_neighborhoods_checked(cloud, params)?;
    contract(cloud, &nbhd, params, false)
}

/// Contraction with pure-trunk rows amplified by `params.trunk_weight`.
pub fn contract_slbc(cloud: &LabeledPointCloud, params: &ContractionParams) -> Result<ContractionResult> {
    params.validate()?;
    let nbhd = build_neighborhoods_checked(cloud, params)?;
    contract(cloud, &nbhd, params, true)
}

fn build_neighborhoods_checked(cloud: &LabeledPointCloud, params: &ContractionParams) -> Result<NeighborhoodGraph> {
    if cloud.len() < 4 {
        return Err(Error::TooFewPoints {
            what: "contraction",
            needed: 4,
            got: cloud.len(),
        });
    }
    build_neighborhoods(cloud.positions(), params.neighbors)
}

/// Runs the contraction on precomputed one-rings.
pub fn contract(
    cloud: &LabeledPointCloud,
    nbhd: &NeighborhoodGraph,
    params: &ContractionParams,
    semantic: bool,
) -> Result<ContractionResult> {
    contract_observed(cloud, nbhd, params, semantic, &mut |_, _| {})
}

/// [`contract`] with a callback receiving each iteration's record and positions.
pub fn contract_observed(
    cloud: &LabeledPointCloud,
    nbhd: &NeighborhoodGraph,
    params: &ContractionParams,
    semantic: bool,
    observer: &mut dyn FnMut(&IterationRecord, &[Vec3]),
) -> Result<ContractionResult> {
    params.validate()?;
    let n = cloud.len();
    let mut points: Vec<Vec3> = cloud.positions().to_vec();
    let mut lap = build_cotangent_laplacian(&points, nbhd)?;
    let initial_area = lap.one_ring_area.clone();
    let initial_total_area: f64 = initial_area.iter().sum();

    let mut w_l = match params.initial_contraction {
        Some(w) => w,
        None => {
            let (sum, count) = initial_area
                .iter()
                .filter(|&&a| a > 0.0)
                .fold((0.0, 0usize), |(s, c), &a| (s + a, c + 1));
            if count == 0 {
                return Err(Error::Degenerate("no point has a nonempty one-ring".into()));
            }
            1.0 / (10.0 * math::sqrt(sum / count as f64))
        }
    };
    let mut w_h = alloc::vec![params.initial_attraction; n];

    // the pattern is fixed by the one-rings, so S is fixed for the whole run
    let semantic_weights: Option<SemanticWeights> = if semantic {
        Some(build_semantic_weights(cloud.labels(), &lap.matrix, params.trunk_weight)?)
    } else {
        None
    };
    let trunk_rows = semantic_weights
        .as_ref()
        .map_or(0, |s| s.trunk_rows.iter().filter(|&&t| t).count());

    let measure = VolumeMeasure::choose(&points);
    let initial_volume = measure.measure(&points);

    let mut symbolic: Option<CholeskySymbolic> = None;
    let mut records = Vec::new();
    let mut stop = StopReason::MaxIterations;
    let mut last_area_ratio = 1.0;
    for iteration in 1..=params.max_iterations {
        debug_check_laplacian(&lap);
        let top = lap.matrix.scale_rows(&alloc::vec![w_l; n]);
        let top = match &semantic_weights {
            Some(s) => top.hadamard(&s.matrix).expect("semantic weights share the Laplacian pattern"),
            None => top,
        };
        let w_h2: Vec<f64> = w_h.iter().map(|w| w * w).collect();
        let normal = top.gram_plus_diagonal(&w_h2);
        let sym = symbolic.get_or_insert_with(|| {
            let perm = nested_dissection(&normal, &points);
            CholeskySymbolic::analyze(&normal, perm)
        });
        let factor = CholeskyFactor::factor(sym, &normal).map_err(|e| Error::Solver {
            iteration,
            reason: format!("non-positive pivot {:e} at point {}", e.pivot, e.row),
        })?;

        let mut next = alloc::vec![Vec3::ZERO; n];
        let mut residual: f64 = 0.0;
        for axis in 0..3 {
            let rhs: Vec<f64> = (0..n).map(|i| w_h2[i] * points[i][axis]).collect();
            let mut x = rhs.clone();
            factor.solve_in_place(&mut x);
            let ax = normal.mul_vec(&x);
            let num = ax.iter().zip(&rhs).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
            let den = rhs.iter().map(|b| b * b).sum::<f64>();
            let rel = if den > 0.0 { math::sqrt(num / den) } else { math::sqrt(num) };
            residual = residual.max(rel);
            for (p, v) in next.iter_mut().zip(&x) {
                p[axis] = *v;
            }
        }
        if let Some(i) = next.iter().position(|p| !p.is_finite()) {
            return Err(Error::Solver {
                iteration,
                reason: format!("non-finite solution at point {i}"),
            });
        }
        let next_lap = build_cotangent_laplacian(&next, nbhd)?;

        let volume_ratio = if initial_volume > 0.0 {
            measure.measure(&next) / initial_volume
        } else {
            1.0
        };
        let record = IterationRecord {
            iteration,
            contraction_weight: w_l,
            mean_attraction_weight: w_h.iter().sum::<f64>() / n as f64,
            volume_ratio,
            area_ratio: next_lap.one_ring_area.iter().sum::<f64>() / initial_total_area,
            residual,
        };
        observer(&record, &next);
        let rebound = params.stop_on_area_rebound && record.area_ratio > last_area_ratio;
        last_area_ratio = record.area_ratio;
        records.push(record);
        if rebound {
            stop = StopReason::AreaRebound;
            break;
        }
        points = next;
        lap = next_lap;
        if volume_ratio < params.termination_ratio {
            stop = StopReason::VolumeRatio;
            break;
        }
        if iteration == params.max_iterations {
            break;
        }

        w_l = (params.contraction_amplification * w_l).min(params.max_contraction);
        for i in 0..n {
            let (a0, a) = (initial_area[i], lap.one_ring_area[i]);
            w_h[i] = if a0 <= 0.0 {
                params.initial_attraction
            } else if a <= 0.0 {
                params.max_attraction
            } else {
                (params.initial_attraction * math::sqrt(a0 / a)).min(params.max_attraction)
            };
        }
    }

    Ok(ContractionResult {
        cloud: cloud.with_positions(points)?,
        iterations: records,
        stop,
        isolated: lap.isolated.clone(),
        volume_measure: measure,
        trunk_rows,
    })
}

fn debug_check_laplacian(lap: &SparseLaplacian) {
    if cfg!(debug_assertions) {
        let asym = lap.matrix.asymmetry();
        debug_assert!(asym.is_some_and(|a| a <= 1e-8), "Laplacian lost symmetry: {asym:?}");
        debug_assert!(
            lap.matrix.row_sums().iter().all(|s| math::abs(*s) < 1e-8),
            "Laplacian row sums drifted from zero"
        );
    }
}

/// Whether the cloud carries any trunk or branch label.
pub fn has_semantic_labels(cloud: &LabeledPointCloud) -> bool {
    cloud
        .labels()
        .iter()
        .any(|&l| l == SemanticLabel::Trunk || l == SemanticLabel::Branch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn patch(n: usize, seed: u64) -> LabeledPointCloud {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = (0..n)
            .map(|_| {
                let x: f64 = rng.random();
                let y: f64 = rng.random();
                Vec3::new(x, y, 0.1 * math::sin(3.0 * x) * math::cos(2.0 * y))
            })
            .collect();
        LabeledPointCloud::from_positions(pts).unwrap()
    }

    #[test]
    fn zero_contraction_weight_is_identity() {
        let cloud = patch(200, 1);
        let params = ContractionParams {
            initial_contraction: Some(0.0),
            max_iterations: 1,
            neighbors: 8,
            ..Default::default()
        };
        let out = contract_lbc(&cloud, &params).unwrap();
        assert_eq!(out.cloud, cloud);
        assert_eq!(out.iterations.len(), 1);
    }

    #[test]
    fn unit_trunk_weight_matches_plain() {
        let cloud = patch(300, 2);
        let labels = (0..300)
            .map(|i| if i % 3 == 0 { SemanticLabel::Branch } else { SemanticLabel::Trunk })
            .collect();
        let cloud = cloud.with_labels(labels).unwrap();
        let params = ContractionParams {
            trunk_weight: 1.0,
            max_iterations: 4,
            neighbors: 10,
            ..Default::default()
        };
        let a = contract_lbc(&cloud, &params).unwrap();
        let b = contract_slbc(&cloud, &params).unwrap();
        assert_eq!(a.cloud, b.cloud);
    }

    #[test]
    fn params_are_validated() {
        let bad = [
            ContractionParams { contraction_amplification: 1.0, ..Default::default() },
            ContractionParams { termination_ratio: 1.0, ..Default::default() },
            ContractionParams { max_iterations: 0, ..Default::default() },
            ContractionParams { trunk_weight: 0.0, ..Default::default() },
            ContractionParams { initial_contraction: Some(-1.0), ..Default::default() },
        ];
        for p in bad {
            assert!(p.validate().is_err(), "{p:?}");
        }
        let tiny = LabeledPointCloud::from_positions(alloc::vec![Vec3::ZERO; 3]).unwrap();
        assert!(contract_lbc(&tiny, &ContractionParams::default()).is_err());
    }
}
