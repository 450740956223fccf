//! Convex hull volume (quickhull) with an axis-aligned-box fallback.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::math::{self, Vec3};
use crate::types::bounds;

#[derive(Debug, Clone)]
struct Face {
    v: [usize; 3],
    normal: Vec3,
    offset: f64,
    outside: Vec<usize>,
    alive: bool,
}

impl Face {
    fn distance(&self, p: Vec3) -> f64 {
        self.normal.dot(p) - self.offset
    }
}

/// Volume of the convex hull, or `None` when the points are (nearly) flat
/// or the hull construction hits a numerically inconsistent state.
pub fn convex_hull_volume(points: &[Vec3]) -> Option<f64> {
    if points.len() < 4 {
        return None;
    }
    let (lo, hi) = bounds(points)?;
    let diag = (hi - lo).norm();
    if !(diag > 0.0) {
        return None;
    }
    let eps = 1e-10 * diag;

    // initial tetrahedron from extreme points
    let mut extremes = [0usize; 6];
    for (i, p) in points.iter().enumerate() {
        for axis in 0..3 {
            if p[axis] < points[extremes[2 * axis]][axis] {
                extremes[2 * axis] = i;
            }
            if p[axis] > points[extremes[2 * axis + 1]][axis] {
                extremes[2 * axis + 1] = i;
            }
        }
    }
    let mut best = (0usize, 0usize, -1.0);
    for a in 0..6 {
        for b in a + 1..6 {
            let d = points[extremes[a]].distance_squared(points[extremes[b]]);
            if d > best.2 {
                best = (extremes[a], extremes[b], d);
            }
        }
    }
    let (i0, i1) = (best.0, best.1);
    let axis = (points[i1] - points[i0]).normalized()?;
    let i2 = farthest(points, |p| {
        let d = p - points[i0];
        (d - axis * d.dot(axis)).norm()
    })?;
    let base_n = (points[i1] - points[i0]).cross(points[i2] - points[i0]).normalized()?;
    if (points[i2] - points[i0]).cross(axis).norm() <= eps {
        return None;
    }
    let i3 = farthest(points, |p| math::abs(base_n.dot(p - points[i0])))?;
    if math::abs(base_n.dot(points[i3] - points[i0])) <= eps {
        return None;
    }
    let interior = (points[i0] + points[i1] + points[i2] + points[i3]) / 4.0;

    let mut faces: Vec<Face> = Vec::new();
    let mut edges: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for tri in [[i0, i1, i2], [i0, i1, i3], [i0, i2, i3], [i1, i2, i3]] {
        add_face(points, &mut faces, &mut edges, tri, interior)?;
    }
    let simplex = [i0, i1, i2, i3];
    for (i, &p) in points.iter().enumerate() {
        if simplex.contains(&i) {
            continue;
        }
        if let Some(f) = faces.iter().position(|f| f.distance(p) > eps) {
            faces[f].outside.push(i);
        }
    }

    let mut guard = 0usize;
    let mut cursor = 0usize;
    loop {
        guard += 1;
        if guard > 4 * points.len() + 16 {
            return None;
        }
        while cursor < faces.len() && (!faces[cursor].alive || faces[cursor].outside.is_empty()) {
            cursor += 1;
        }
        if cursor == faces.len() {
            // a dead-then-revived face never happens; scan once more from the start
            match faces.iter().position(|f| f.alive && !f.outside.is_empty()) {
                Some(f) => cursor = f,
                None => break,
            }
        }
        let fid = cursor;
        let apex = *faces[fid]
            .outside
            .iter()
            .max_by(|&&a, &&b| {
                faces[fid]
                    .distance(points[a])
                    .total_cmp(&faces[fid].distance(points[b]))
                    .then(b.cmp(&a))
            })
            .expect("nonempty");
        let p = points[apex];

        // visible region by flood fill across shared edges
        let mut visible = alloc::vec![fid];
        let mut is_visible = BTreeMap::new();
        is_visible.insert(fid, true);
        let mut head = 0;
        while head < visible.len() {
            let f = visible[head];
            head += 1;
            let v = faces[f].v;
            for e in 0..3 {
                let twin = *edges.get(&(v[(e + 1) % 3], v[e]))?;
                if is_visible.contains_key(&twin) {
                    continue;
                }
                let vis = faces[twin].distance(p) > eps;
                is_visible.insert(twin, vis);
                if vis {
                    visible.push(twin);
                }
            }
        }
        let mut horizon = Vec::new();
        let mut orphans = Vec::new();
        for &f in &visible {
            let v = faces[f].v;
            for e in 0..3 {
                let (a, b) = (v[e], v[(e + 1) % 3]);
                let twin = *edges.get(&(b, a))?;
                if !is_visible.get(&twin).copied().unwrap_or(false) {
                    horizon.push((a, b));
                }
            }
        }
        for &f in &visible {
            let v = faces[f].v;
            for e in 0..3 {
                edges.remove(&(v[e], v[(e + 1) % 3]));
            }
            faces[f].alive = false;
            orphans.append(&mut faces[f].outside);
        }
        let first_new = faces.len();
        for (a, b) in horizon {
            let face_normal = (points[b] - points[a]).cross(p - points[a]).normalized()?;
            let offset = face_normal.dot(points[a]);
            if edges.contains_key(&(a, b)) || edges.contains_key(&(b, apex)) || edges.contains_key(&(apex, a)) {
                return None;
            }
            let id = faces.len();
            edges.insert((a, b), id);
            edges.insert((b, apex), id);
            edges.insert((apex, a), id);
            faces.push(Face {
                v: [a, b, apex],
                normal: face_normal,
                offset,
                outside: Vec::new(),
                alive: true,
            });
        }
        for q in orphans {
            if q == apex {
                continue;
            }
            if let Some(f) = (first_new..faces.len()).find(|&f| faces[f].distance(points[q]) > eps) {
                faces[f].outside.push(q);
            }
        }
        cursor = cursor.min(first_new);
    }

    let volume = faces
        .iter()
        .filter(|f| f.alive)
        .map(|f| {
            let [a, b, c] = f.v;
            (points[a] - interior)
                .dot((points[b] - interior).cross(points[c] - interior))
                / 6.0
        })
        .sum::<f64>();
    (volume > 0.0 && volume.is_finite()).then_some(volume)
}

fn farthest(points: &[Vec3], dist: impl Fn(Vec3) -> f64) -> Option<usize> {
    points
        .iter()
        .enumerate()
        .map(|(i, &p)| (i, dist(p)))
        .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
        .map(|(i, _)| i)
}

fn add_face(
    points: &[Vec3],
    faces: &mut Vec<Face>,
    edges: &mut BTreeMap<(usize, usize), usize>,
    mut tri: [usize; 3],
    interior: Vec3,
) -> Option<()> {
    let mut normal = (points[tri[1]] - points[tri[0]])
        .cross(points[tri[2]] - points[tri[0]])
        .normalized()?;
    if normal.dot(interior - points[tri[0]]) > 0.0 {
        tri.swap(1, 2);
        normal = -normal;
    }
    let id = faces.len();
    for e in 0..3 {
        edges.insert((tri[e], tri[(e + 1) % 3]), id);
    }
    faces.push(Face {
        v: tri,
        normal,
        offset: normal.dot(points[tri[0]]),
        outside: Vec::new(),
        alive: true,
    });
    Some(())
}

/// Product of the axis-aligned extents.
pub fn box_volume(points: &[Vec3]) -> f64 {
    match bounds(points) {
        Some((lo, hi)) => {
            let e = hi - lo;
            e.x() * e.y() * e.z()
        }
        None => 0.0,
    }
}

/// Which volume measure a contraction run compares against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VolumeMeasure {
    ConvexHull,
    BoundingBox,
}

impl VolumeMeasure {
    /// Convex hull when the reference cloud has one, otherwise the box.
    pub fn choose(reference: &[Vec3]) -> Self {
        if convex_hull_volume(reference).is_some() {
            VolumeMeasure::ConvexHull
        } else {
            VolumeMeasure::BoundingBox
        }
    }

    pub fn measure(self, points: &[Vec3]) -> f64 {
        match self {
            VolumeMeasure::ConvexHull => convex_hull_volume(points).unwrap_or_else(|| box_volume(points)),
            VolumeMeasure::BoundingBox => box_volume(points),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cube_volume() {
        let mut pts = Vec::new();
        for x in 0..5 {
            for y in 0..5 {
                for z in 0..5 {
                    pts.push(Vec3::new(x as f64 * 0.5, y as f64 * 0.5, z as f64 * 0.5));
                }
            }
        }
        let v = convex_hull_volume(&pts).unwrap();
        assert!((v - 8.0).abs() < 1e-9, "{v}");
    }

    #[test]
    fn sphere_volume_approaches_analytic() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let pts: Vec<Vec3> = (0..4000)
            .map(|_| loop {
                let p = Vec3::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                );
                let n = p.norm();
                if n > 0.1 && n <= 1.0 {
                    break p / n;
                }
            })
            .collect();
        let v = convex_hull_volume(&pts).unwrap();
        let exact = 4.0 / 3.0 * core::f64::consts::PI;
        assert!(v < exact && v > 0.97 * exact, "{v}");
    }

    #[test]
    fn interior_points_do_not_change_volume() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut pts = alloc::vec![
            Vec3::ZERO,
            Vec3::X,
            Vec3::Y,
            Vec3::Z,
        ];
        for _ in 0..200 {
            let a: f64 = rng.random_range(0.0..0.3);
            let b: f64 = rng.random_range(0.0..0.3);
            let c: f64 = rng.random_range(0.0..0.3);
            pts.push(Vec3::new(a, b, c));
        }
        let v = convex_hull_volume(&pts).unwrap();
        assert!((v - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn flat_input_has_no_hull() {
        let pts: Vec<Vec3> = (0..20).map(|i| Vec3::new(i as f64, (i * i) as f64, 0.0)).collect();
        assert_eq!(convex_hull_volume(&pts), None);
        assert_eq!(VolumeMeasure::choose(&pts), VolumeMeasure::BoundingBox);
        assert_eq!(box_volume(&pts), 0.0);
    }
}
