//! Cotangent Laplacian on an unstructured point cloud.
//!
//! Each point gets a local one-ring: its `k` nearest neighbors are projected
//! onto their PCA tangent plane, triangulated (2D Delaunay), and the triangles
//! incident to the point form its fan. Cotangent weights from the fans are
//! averaged across the two endpoints of every edge so the operator is
//! symmetric.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{self, centroid_covariance, symmetric_eigen, Vec3};
use crate::sparse::CsrMatrix;
use crate::spatial::KdTree;
use crate::types::SemanticLabel;

/// `cot(1°)`: cotangent weights are clamped to `±COT_LIMIT`.
pub const COT_LIMIT: f64 = 57.289_961_630_759_42;

/// Per-point one-rings.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodGraph {
    /// Symmetrized adjacency, sorted, no self-loops.
    pub neighbors: Vec<Vec<usize>>,
    /// Fan triangles `[i, a, b]` of each point `i`.
    pub fans: Vec<Vec<[usize; 3]>>,
    /// Points that belong to no fan triangle at all.
    pub isolated: Vec<bool>,
}

impl NeighborhoodGraph {
    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    pub fn isolated_indices(&self) -> Vec<usize> {
        self.isolated
            .iter()
            .enumerate()
            .filter_map(|(i, &f)| f.then_some(i))
            .collect()
    }
}

/// Builds k-NN tangent-plane Delaunay one-rings for every point.
pub fn build_neighborhoods(points: &[Vec3], k: usize) -> Result<NeighborhoodGraph> {
    if k < 3 {
        return Err(Error::param("neighbors", "k must be at least 3"));
    }
    if points.len() <= k {
        return Err(Error::TooFewPoints {
            what: "neighborhood construction",
            needed: k + 1,
            got: points.len(),
        });
    }
    let tree = KdTree::new(points);
    let n = points.len();
    let mut adjacency: Vec<Vec<usize>> = alloc::vec![Vec::new(); n];
    let mut fans: Vec<Vec<[usize; 3]>> = alloc::vec![Vec::new(); n];

    for i in 0..n {
        let center = points[i];
        let knn: Vec<usize> = tree
            .nearest(center, k + 1)
            .into_iter()
            .filter(|h| h.index != i)
            .take(k)
            .map(|h| h.index)
            .collect();
        let (_, cov) = centroid_covariance(core::iter::once(center).chain(knn.iter().map(|&j| points[j])))
            .expect("nonempty");
        let (vals, vecs) = symmetric_eigen(&cov);
        let total = vals[0].max(0.0) + vals[1].max(0.0) + vals[2].max(0.0);
        if !(total > 0.0) {
            return Err(Error::Degenerate(format!(
                "point {i}: all {k} neighbors coincide with it"
            )));
        }
        let (u, v) = (vecs.col(2), vecs.col(1));
        if vals[1] <= 1e-10 * vals[2] {
            // collinear neighborhood: chain to the nearest point on each side
            let mut before: Option<(f64, usize)> = None;
            let mut after: Option<(f64, usize)> = None;
            for &j in &knn {
                let t = u.dot(points[j] - center);
                if t < 0.0 && before.map_or(true, |(b, _)| -t < b) {
                    before = Some((-t, j));
                } else if t > 0.0 && after.map_or(true, |(a, _)| t < a) {
                    after = Some((t, j));
                }
            }
            for (_, j) in before.into_iter().chain(after) {
                adjacency[i].push(j);
            }
            continue;
        }
        let mut local: Vec<[f64; 2]> = alloc::vec![[0.0, 0.0]];
        let mut ids: Vec<usize> = alloc::vec![i];
        let scale = math::sqrt(vals[2]);
        for &j in &knn {
            let d = points[j] - center;
            let q = [u.dot(d), v.dot(d)];
            let dup = local
                .iter()
                .any(|p| math::abs(p[0] - q[0]) + math::abs(p[1] - q[1]) <= 1e-12 * scale);
            if !dup {
                local.push(q);
                ids.push(j);
            }
        }
        for tri in delaunay_fan(&local) {
            let (a, b) = (ids[tri[0]], ids[tri[1]]);
            fans[i].push([i, a, b]);
            adjacency[i].push(a);
            adjacency[i].push(b);
        }
    }

    // symmetrize by union
    let mut neighbors: Vec<Vec<usize>> = alloc::vec![Vec::new(); n];
    for i in 0..n {
        for &j in &adjacency[i] {
            neighbors[i].push(j);
            neighbors[j].push(i);
        }
    }
    for row in neighbors.iter_mut() {
        row.sort_unstable();
        row.dedup();
    }
    let mut in_triangle = alloc::vec![false; n];
    for fan in &fans {
        for t in fan {
            for &v in t {
                in_triangle[v] = true;
            }
        }
    }
    Ok(NeighborhoodGraph {
        neighbors,
        fans,
        isolated: in_triangle.iter().map(|t| !t).collect(),
    })
}

/// Delaunay triangles incident to vertex 0 of a small planar point set,
/// returned as pairs of the other two vertex indices.
pub fn delaunay_fan(points: &[[f64; 2]]) -> Vec<[usize; 2]> {
    let tris = delaunay_2d(points);
    let mut fan: Vec<[usize; 2]> = tris
        .into_iter()
        .filter_map(|t| {
            let pos = t.iter().position(|&v| v == 0)?;
            Some([t[(pos + 1) % 3], t[(pos + 2) % 3]])
        })
        .collect();
    fan.sort_unstable();
    fan
}

/// Bowyer–Watson triangulation; triangles are counter-clockwise.
pub fn delaunay_2d(points: &[[f64; 2]]) -> Vec<[usize; 3]> {
    let n = points.len();
    if n < 3 {
        return Vec::new();
    }
    let (mut lo, mut hi) = (points[0], points[0]);
    for p in points {
        lo = [lo[0].min(p[0]), lo[1].min(p[1])];
        hi = [hi[0].max(p[0]), hi[1].max(p[1])];
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-300);
    let mid = [(lo[0] + hi[0]) * 0.5, (lo[1] + hi[1]) * 0.5];
    let big = 1e4 * span;
    let mut verts: Vec<[f64; 2]> = points.to_vec();
    verts.push([mid[0] - 2.0 * big, mid[1] - big]);
    verts.push([mid[0] + 2.0 * big, mid[1] - big]);
    verts.push([mid[0], mid[1] + 2.0 * big]);
    let mut tris: Vec<[usize; 3]> = alloc::vec![[n, n + 1, n + 2]];

    for p in 0..n {
        let pt = verts[p];
        let mut bad = Vec::new();
        let mut good = Vec::with_capacity(tris.len());
        for t in tris.drain(..) {
            if in_circumcircle(&verts, t, pt) {
                bad.push(t);
            } else {
                good.push(t);
            }
        }
        tris = good;
        let mut boundary: Vec<(usize, usize)> = Vec::new();
        for t in &bad {
            for e in 0..3 {
                let (a, b) = (t[e], t[(e + 1) % 3]);
                let shared = bad.iter().any(|o| {
                    o != t && (0..3).any(|f| o[f] == b && o[(f + 1) % 3] == a)
                });
                if !shared {
                    boundary.push((a, b));
                }
            }
        }
        for (a, b) in boundary {
            if orient(verts[a], verts[b], pt) > 0.0 {
                tris.push([a, b, p]);
            }
        }
    }
    tris.retain(|t| t.iter().all(|&v| v < n));
    tris
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn in_circumcircle(v: &[[f64; 2]], t: [usize; 3], p: [f64; 2]) -> bool {
    let (a, b, c) = (v[t[0]], v[t[1]], v[t[2]]);
    let (adx, ady) = (a[0] - p[0], a[1] - p[1]);
    let (bdx, bdy) = (b[0] - p[0], b[1] - p[1]);
    let (cdx, cdy) = (c[0] - p[0], c[1] - p[1]);
    let det = (adx * adx + ady * ady) * (bdx * cdy - cdx * bdy)
        - (bdx * bdx + bdy * bdy) * (adx * cdy - cdx * ady)
        + (cdx * cdx + cdy * cdy) * (adx * bdy - bdx * ady);
    det > 0.0
}

/// Cotangent of the angle at `apex` in triangle `(apex, p, q)`, clamped to
/// `±cot(1°)`.
pub fn clamped_cot(apex: Vec3, p: Vec3, q: Vec3) -> f64 {
    let a = p - apex;
    let b = q - apex;
    let dot = a.dot(b);
    let cross = a.cross(b).norm();
    if cross <= 0.0 || !cross.is_finite() {
        return if dot >= 0.0 { COT_LIMIT } else { -COT_LIMIT };
    }
    (dot / cross).clamp(-COT_LIMIT, COT_LIMIT)
}

/// Symmetric cotangent Laplacian plus per-point one-ring areas.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseLaplacian {
    /// Off-diagonal `max(0, ½(cot α + cot β))`, diagonal `−Σ` of its row.
    pub matrix: CsrMatrix,
    /// Total area of each point's fan triangles.
    pub one_ring_area: Vec<f64>,
    /// Points with no incident triangle; their rows are zero.
    pub isolated: Vec<usize>,
}

/// Evaluates cotangent weights of the fixed one-rings at `points`.
///
/// Edge weights are floored at zero. Once points move, the fixed fan
/// triangles turn obtuse or flip, and negative weights let the contraction
/// push points outward instead of toward the skeleton.
pub fn build_cotangent_laplacian(points: &[Vec3], nbhd: &NeighborhoodGraph) -> Result<SparseLaplacian> {
    let n = points.len();
    if nbhd.len() != n {
        return Err(Error::Invariant(format!(
            "neighborhood graph has {} points, cloud has {n}",
            nbhd.len()
        )));
    }
    let mut row_ptr = alloc::vec![0usize; n + 1];
    for i in 0..n {
        row_ptr[i + 1] = row_ptr[i] + nbhd.neighbors[i].len() + 1;
    }
    let mut cols = Vec::with_capacity(row_ptr[n]);
    for i in 0..n {
        let row = &nbhd.neighbors[i];
        let split = row.partition_point(|&j| j < i);
        cols.extend_from_slice(&row[..split]);
        cols.push(i);
        cols.extend_from_slice(&row[split..]);
    }
    let slot = |i: usize, j: usize| -> usize {
        let range = row_ptr[i]..row_ptr[i + 1];
        range.start + cols[range].binary_search(&j).expect("edge is in the adjacency")
    };

    // directed half-weights from each point's own fan
    let mut directed = alloc::vec![0.0; cols.len()];
    let mut area = alloc::vec![0.0; n];
    for (i, fan) in nbhd.fans.iter().enumerate() {
        for &[c, a, b] in fan {
            debug_assert_eq!(c, i);
            let (pc, pa, pb) = (points[c], points[a], points[b]);
            area[i] += 0.5 * (pa - pc).cross(pb - pc).norm();
            directed[slot(i, a)] += 0.5 * clamped_cot(pb, pc, pa);
            directed[slot(i, b)] += 0.5 * clamped_cot(pa, pc, pb);
        }
    }
    let mut values = alloc::vec![0.0; cols.len()];
    for i in 0..n {
        let mut sum = 0.0;
        for s in row_ptr[i]..row_ptr[i + 1] {
            let j = cols[s];
            if j == i {
                continue;
            }
            let w = (0.5 * (directed[s] + directed[slot(j, i)])).max(0.0);
            values[s] = w;
            sum += w;
        }
        values[slot(i, i)] = -sum;
    }
    let mut trip = Vec::with_capacity(cols.len());
    for i in 0..n {
        for s in row_ptr[i]..row_ptr[i + 1] {
            trip.push((i, cols[s], values[s]));
        }
    }
    Ok(SparseLaplacian {
        matrix: CsrMatrix::from_triplets(n, n, trip),
        one_ring_area: area,
        isolated: nbhd.isolated_indices(),
    })
}

/// Per-entry class weights aligned with the Laplacian's pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct SemanticWeights {
    pub matrix: CsrMatrix,
    /// Rows carrying the trunk weight.
    pub trunk_rows: Vec<bool>,
    pub trunk_weight: f64,
}

/// Trunk rows with no branch neighbor get `trunk_weight`; every other row
/// (branch, mixed trunk/branch boundary, any other class) gets 1.
pub fn build_semantic_weights(
    labels: &[SemanticLabel],
    laplacian: &CsrMatrix,
    trunk_weight: f64,
) -> Result<SemanticWeights> {
    if labels.len() != laplacian.n_rows() {
        return Err(Error::Invariant(format!(
            "{} labels for a {}-row Laplacian",
            labels.len(),
            laplacian.n_rows()
        )));
    }
    let trunk_rows: Vec<bool> = (0..labels.len())
        .map(|i| {
            labels[i] == SemanticLabel::Trunk
                && laplacian
                    .row(i)
                    .all(|(j, _)| labels[j] != SemanticLabel::Branch)
        })
        .collect();
    let mut matrix = laplacian.clone();
    let row_ptr = laplacian.row_ptr().to_vec();
    let values = matrix.values_mut();
    for i in 0..labels.len() {
        let w = if trunk_rows[i] { trunk_weight } else { 1.0 };
        for v in &mut values[row_ptr[i]..row_ptr[i + 1]] {
            *v = w;
        }
    }
    Ok(SemanticWeights {
        matrix,
        trunk_rows,
        trunk_weight,
    })
}
