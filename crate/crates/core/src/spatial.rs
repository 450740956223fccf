//! A static 3D kd-tree for k-nearest-neighbor and radius queries.
//!
//! Results are deterministic: ties in distance are broken by point index.

use alloc::vec::Vec;

use crate::math::Vec3;

const LEAF_SIZE: usize = 8;

#[derive(Debug, Clone)]
enum Node {
    Leaf { start: usize, end: usize },
    Split { axis: usize, value: f64, left: usize, right: usize },
}

/// Kd-tree over a borrowed point slice.
#[derive(Debug, Clone)]
pub struct KdTree<'a> {
    points: &'a [Vec3],
    order: Vec<usize>,
    nodes: Vec<Node>,
}

/// One query hit: squared distance and point index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub dist2: f64,
    pub index: usize,
}

impl Neighbor {
    #[inline]
    fn key_lt(&self, other: &Neighbor) -> bool {
        self.dist2 < other.dist2 || (self.dist2 == other.dist2 && self.index < other.index)
    }
}

impl<'a> KdTree<'a> {
    pub fn new(points: &'a [Vec3]) -> Self {
        let mut tree = Self {
            points,
            order: (0..points.len()).collect(),
            nodes: Vec::new(),
        };
        if !points.is_empty() {
            tree.build(0, points.len());
        }
        tree
    }

    pub fn points(&self) -> &'a [Vec3] {
        self.points
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let slice = &self.order[start..end];
        let (mut lo, mut hi) = (self.points[slice[0]], self.points[slice[0]]);
        for &i in slice {
            lo = lo.min(self.points[i]);
            hi = hi.max(self.points[i]);
        }
        let ext = hi - lo;
        let axis = if ext[0] >= ext[1] && ext[0] >= ext[2] {
            0
        } else if ext[1] >= ext[2] {
            1
        } else {
            2
        };
        let mid = (end - start) / 2;
        let pts = self.points;
        self.order[start..end].select_nth_unstable_by(mid, |&a, &b| {
            pts[a][axis].total_cmp(&pts[b][axis]).then(a.cmp(&b))
        });
        let value = pts[self.order[start + mid]][axis];
        self.nodes.push(Node::Leaf { start: 0, end: 0 });
        let left = self.build(start, start + mid);
        let right = self.build(start + mid, end);
        self.nodes[id] = Node::Split {
            axis,
            value,
            left,
            right,
        };
        id
    }

    /// The `k` nearest points to `query`, nearest first.
    pub fn nearest(&self, query: Vec3, k: usize) -> Vec<Neighbor> {
        let mut best: Vec<Neighbor> = Vec::with_capacity(k + 1);
        if k == 0 || self.nodes.is_empty() {
            return best;
        }
        self.nearest_rec(0, query, k, &mut best);
        best
    }

    fn nearest_rec(&self, node: usize, q: Vec3, k: usize, best: &mut Vec<Neighbor>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    let cand = Neighbor {
                        dist2: q.distance_squared(self.points[i]),
                        index: i,
                    };
                    if best.len() == k && !cand.key_lt(&best[k - 1]) {
                        continue;
                    }
                    let pos = best.partition_point(|b| b.key_lt(&cand));
                    best.insert(pos, cand);
                    if best.len() > k {
                        best.pop();
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let d = q[axis] - value;
                let (near, far) = if d < 0.0 { (left, right) } else { (right, left) };
                self.nearest_rec(near, q, k, best);
                if best.len() < k || d * d <= best[k - 1].dist2 {
                    self.nearest_rec(far, q, k, best);
                }
            }
        }
    }

    /// All points within `radius` of `query` (inclusive), sorted by distance.
    pub fn within_radius(&self, query: Vec3, radius: f64) -> Vec<Neighbor> {
        let mut out = Vec::new();
        if !self.nodes.is_empty() && radius >= 0.0 {
            self.radius_rec(0, query, radius * radius, &mut out);
        }
        out.sort_by(|a, b| a.dist2.total_cmp(&b.dist2).then(a.index.cmp(&b.index)));
        out
    }

    fn radius_rec(&self, node: usize, q: Vec3, r2: f64, out: &mut Vec<Neighbor>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    let d2 = q.distance_squared(self.points[i]);
                    if d2 <= r2 {
                        out.push(Neighbor { dist2: d2, index: i });
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let d = q[axis] - value;
                if d <= 0.0 || d * d <= r2 {
                    self.radius_rec(left, q, r2, out);
                }
                if d >= 0.0 || d * d <= r2 {
                    self.radius_rec(right, q, r2, out);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_points(n: usize, seed: u64) -> Vec<Vec3> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| Vec3::new(rng.random(), rng.random(), rng.random()))
            .collect()
    }

    #[test]
    fn knn_matches_brute_force() {
        let pts = random_points(500, 1);
        let tree = KdTree::new(&pts);
        for q in random_points(50, 2) {
            let got: Vec<usize> = tree.nearest(q, 7).iter().map(|n| n.index).collect();
            let mut all: Vec<(f64, usize)> =
                pts.iter().enumerate().map(|(i, p)| (p.distance_squared(q), i)).collect();
            all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let want: Vec<usize> = all[..7].iter().map(|x| x.1).collect();
            assert_eq!(got, want);
        }
    }

    #[test]
    fn radius_matches_brute_force() {
        let pts = random_points(400, 3);
        let tree = KdTree::new(&pts);
        for q in random_points(20, 4) {
            let got: Vec<usize> = tree.within_radius(q, 0.2).iter().map(|n| n.index).collect();
            let mut want: Vec<(f64, usize)> = pts
                .iter()
                .enumerate()
                .map(|(i, p)| (p.distance_squared(q), i))
                .filter(|x| x.0 <= 0.04)
                .collect();
            want.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            assert_eq!(got, want.iter().map(|x| x.1).collect::<Vec<_>>());
        }
    }

    #[test]
    fn duplicates_and_small_inputs() {
        let pts = alloc::vec![Vec3::ZERO; 20];
        let tree = KdTree::new(&pts);
        let n = tree.nearest(Vec3::ZERO, 3);
        assert_eq!(n.iter().map(|x| x.index).collect::<Vec<_>>(), [0, 1, 2]);
        assert!(KdTree::new(&[]).nearest(Vec3::ZERO, 3).is_empty());
        assert_eq!(tree.nearest(Vec3::ZERO, 50).len(), 20);
    }
}
