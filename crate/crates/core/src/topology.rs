//! Skeleton points to topology graph: farthest-point sampling, a Euclidean
//! minimum spanning tree, and removal of degree-2 nodes.

use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::math::Vec3;
use crate::types::SkeletonGraph;

/// How farthest-point sampling picks its first point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StartRule {
    /// The point farthest from the centroid.
    #[default]
    FarthestFromCentroid,
    Index(usize),
}

/// Default sample count for a cloud of `n` points: `max(100, n / 50)`,
/// never more than `n`.
pub fn default_sample_count(n: usize) -> usize {
    (n / 50).max(100).min(n)
}

/// Greedy farthest-point sampling. Returns indices in selection order; ties
/// go to the lower index.
pub fn farthest_point_sampling(points: &[Vec3], n: usize, start: StartRule) -> Result<Vec<usize>> {
    if n == 0 || n > points.len() {
        return Err(Error::param(
            "samples",
            alloc::format!("must lie in 1..={}, got {n}", points.len()),
        ));
    }
    let first = match start {
        StartRule::Index(i) if i < points.len() => i,
        StartRule::Index(i) => return Err(Error::param("start", alloc::format!("index {i} out of range"))),
        StartRule::FarthestFromCentroid => {
            let c = points.iter().fold(Vec3::ZERO, |a, &p| a + p) / points.len() as f64;
            argmax(points.iter().map(|p| p.distance_squared(c)))
        }
    };
    let mut selected = Vec::with_capacity(n);
    selected.push(first);
    let mut min_d2: Vec<f64> = points.iter().map(|p| p.distance_squared(points[first])).collect();
    while selected.len() < n {
        let next = argmax(min_d2.iter().copied());
        selected.push(next);
        let q = points[next];
        for (d, p) in min_d2.iter_mut().zip(points) {
            *d = d.min(p.distance_squared(q));
        }
    }
    Ok(selected)
}

fn argmax(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0usize, f64::NEG_INFINITY);
    for (i, v) in values.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

fn edge_key(d2: f64, a: usize, b: usize) -> (f64, usize, usize) {
    (d2, a.min(b), a.max(b))
}

fn key_cmp(x: &(f64, usize, usize), y: &(f64, usize, usize)) -> Ordering {
    x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2))
}

/// Minimum spanning tree of the complete Euclidean graph (Prim, O(V²)).
/// Equal-length edges are ordered by their sorted index pair, which makes the
/// tree unique. Edges are returned as sorted pairs in ascending order.
pub fn minimum_spanning_tree(points: &[Vec3]) -> SkeletonGraph {
    let n = points.len();
    let mut in_tree = alloc::vec![false; n];
    let mut best: Vec<Option<(f64, usize, usize)>> = alloc::vec![None; n];
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    if n > 0 {
        in_tree[0] = true;
        for v in 1..n {
            best[v] = Some(edge_key(points[0].distance_squared(points[v]), 0, v));
        }
    }
    for _ in 1..n {
        let mut pick: Option<usize> = None;
        for v in 0..n {
            if in_tree[v] {
                continue;
            }
            let better = match (pick, &best[v]) {
                (None, _) => true,
                (Some(p), Some(k)) => key_cmp(k, best[p].as_ref().expect("candidate")) == Ordering::Less,
                (Some(_), None) => false,
            };
            if better {
                pick = Some(v);
            }
        }
        let v = pick.expect("graph is complete");
        let (_, a, b) = best[v].expect("complete graph reaches every vertex");
        edges.push((a, b));
        in_tree[v] = true;
        for w in 0..n {
            if in_tree[w] {
                continue;
            }
            let cand = edge_key(points[v].distance_squared(points[w]), v, w);
            if best[w].as_ref().is_none_or(|cur| key_cmp(&cand, cur) == Ordering::Less) {
                best[w] = Some(cand);
            }
        }
    }
    edges.sort_unstable();
    SkeletonGraph {
        nodes: points.to_vec(),
        edges,
    }
}

/// Replaces every chain of degree-2 nodes by a single edge between its end
/// nodes. Kept nodes retain their positions and relative order.
pub fn simplify_graph(graph: &SkeletonGraph) -> Result<SkeletonGraph> {
    if !graph.is_tree() {
        return Err(Error::NotATree(alloc::format!(
            "{} nodes and {} edges do not form a tree",
            graph.nodes.len(),
            graph.edges.len()
        )));
    }
    let adj = graph.adjacency();
    let keep: Vec<bool> = adj.iter().map(|a| a.len() != 2).collect();
    let mut new_index = alloc::vec![usize::MAX; graph.nodes.len()];
    let mut nodes = Vec::new();
    for (i, &k) in keep.iter().enumerate() {
        if k {
            new_index[i] = nodes.len();
            nodes.push(graph.nodes[i]);
        }
    }
    let mut edges = Vec::new();
    for u in 0..graph.nodes.len() {
        if !keep[u] {
            continue;
        }
        for &first in &adj[u] {
            let (mut prev, mut cur) = (u, first);
            while !keep[cur] {
                let next = if adj[cur][0] == prev { adj[cur][1] } else { adj[cur][0] };
                prev = cur;
                cur = next;
            }
            // a tree has one chain per kept pair; record it from the lower end
            if u < cur {
                edges.push((new_index[u], new_index[cur]));
            }
        }
    }
    edges.sort_unstable();
    Ok(SkeletonGraph { nodes, edges })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_points(n: usize, seed: u64) -> Vec<Vec3> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| Vec3::new(rng.random(), rng.random(), rng.random()))
            .collect()
    }

    #[test]
    fn fps_full_and_diameter() {
        let pts = random_points(30, 1);
        let mut all = farthest_point_sampling(&pts, 30, StartRule::default()).unwrap();
        all.sort_unstable();
        assert_eq!(all, (0..30).collect::<Vec<_>>());

        let seg: Vec<Vec3> = [0.3, 0.0, 0.5, 1.0, 0.7].iter().map(|&x| Vec3::new(x, 0.0, 0.0)).collect();
        let mut two = farthest_point_sampling(&seg, 2, StartRule::default()).unwrap();
        two.sort_unstable();
        assert_eq!(two, alloc::vec![1, 3]);

        assert!(farthest_point_sampling(&pts, 0, StartRule::default()).is_err());
        assert!(farthest_point_sampling(&pts, 31, StartRule::default()).is_err());
    }

    fn min_pairwise(pts: &[Vec3], idx: &[usize]) -> f64 {
        let mut m = f64::INFINITY;
        for (a, &i) in idx.iter().enumerate() {
            for &j in &idx[a + 1..] {
                m = m.min(pts[i].distance(pts[j]));
            }
        }
        m
    }

    #[test]
    fn fps_spreads_better_than_random_subsets() {
        let pts = random_points(200, 2);
        let fps = farthest_point_sampling(&pts, 10, StartRule::default()).unwrap();
        let spread = min_pairwise(&pts, &fps);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut idx: Vec<usize> = (0..200).collect();
        for _ in 0..1000 {
            idx.shuffle(&mut rng);
            assert!(spread >= min_pairwise(&pts, &idx[..10]));
        }
    }

    #[test]
    fn mst_collinear_and_square() {
        let line: Vec<Vec3> = [2.0, 0.0, 4.0, 1.0, 3.0].iter().map(|&x| Vec3::new(x, 0.0, 0.0)).collect();
        let g = minimum_spanning_tree(&line);
        assert_eq!(g.edges, alloc::vec![(0, 3), (0, 4), (1, 3), (2, 4)]);

        let sq = alloc::vec![Vec3::ZERO, Vec3::X, Vec3::new(1.0, 1.0, 0.0), Vec3::Y];
        let g = minimum_spanning_tree(&sq);
        assert_eq!(g.edges.len(), 3);
        assert!((g.total_length() - 3.0).abs() < 1e-12);
        // ties resolved by index pair: (0,1), (0,3), (1,2)
        assert_eq!(g.edges, alloc::vec![(0, 1), (0, 3), (1, 2)]);

        assert!(minimum_spanning_tree(&[]).edges.is_empty());
        assert!(minimum_spanning_tree(&[Vec3::ZERO]).edges.is_empty());
    }

    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }

    fn kruskal(points: &[Vec3], order: impl FnOnce(&mut Vec<(f64, usize, usize)>)) -> Vec<(usize, usize)> {
        let n = points.len();
        let mut all = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                all.push((points[a].distance(points[b]), a, b));
            }
        }
        order(&mut all);
        let mut parent: Vec<usize> = (0..n).collect();
        let mut out = Vec::new();
        for (_, a, b) in all {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra] = rb;
                out.push((a, b));
            }
        }
        out.sort_unstable();
        out
    }

    #[test]
    fn mst_matches_kruskal_oracle() {
        for seed in 0..20 {
            let pts = random_points(12, seed);
            let expected = kruskal(&pts, |v| v.sort_by(|x, y| x.0.total_cmp(&y.0)));
            assert_eq!(minimum_spanning_tree(&pts).edges, expected, "seed {seed}");
        }
    }

    #[test]
    fn mst_is_no_longer_than_random_kruskal() {
        let pts = random_points(15, 7);
        let w = minimum_spanning_tree(&pts).total_length();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let edges = kruskal(&pts, |v| v.shuffle(&mut rng));
            let g = SkeletonGraph::new(pts.clone(), edges).unwrap();
            assert!(g.is_tree());
            assert!(w <= g.total_length() + 1e-12);
        }
    }

    fn path(n: usize) -> SkeletonGraph {
        let nodes = (0..n).map(|i| Vec3::new(i as f64, 0.0, 0.0)).collect();
        SkeletonGraph::new(nodes, (1..n).map(|i| (i - 1, i)).collect()).unwrap()
    }

    #[test]
    fn simplify_path_and_y() {
        let g = simplify_graph(&path(5)).unwrap();
        assert_eq!(g.nodes, alloc::vec![Vec3::ZERO, Vec3::new(4.0, 0.0, 0.0)]);
        assert_eq!(g.edges, alloc::vec![(0, 1)]);

        // junction 0, arms 1-2-3, 4-5-6, 7-8-9
        let nodes = (0..10).map(|i| Vec3::new(i as f64, 0.0, 0.0)).collect();
        let edges = alloc::vec![(0, 1), (1, 2), (2, 3), (0, 4), (4, 5), (5, 6), (0, 7), (7, 8), (8, 9)];
        let y = simplify_graph(&SkeletonGraph::new(nodes, edges).unwrap()).unwrap();
        assert_eq!(y.nodes.len(), 4);
        assert_eq!(y.degrees(), alloc::vec![3, 1, 1, 1]);
        assert!(y.is_tree());
    }

    #[test]
    fn simplify_rejects_cycles_and_keeps_trivial_graphs() {
        let tri = SkeletonGraph::new(alloc::vec![Vec3::ZERO, Vec3::X, Vec3::Y], alloc::vec![(0, 1), (1, 2), (2, 0)]).unwrap();
        assert!(matches!(simplify_graph(&tri), Err(Error::NotATree(_))));
        let single = SkeletonGraph::new(alloc::vec![Vec3::ZERO], Vec::new()).unwrap();
        assert_eq!(simplify_graph(&single).unwrap(), single);
        assert_eq!(simplify_graph(&path(2)).unwrap(), path(2));
        let empty = SkeletonGraph::new(Vec::new(), Vec::new()).unwrap();
        assert_eq!(simplify_graph(&empty).unwrap(), empty);
    }

    /// Contracts one degree-2 node at a time until none remain.
    fn contract_oracle(graph: &SkeletonGraph) -> (Vec<Vec3>, Vec<(Vec3, Vec3)>) {
        let mut alive = alloc::vec![true; graph.nodes.len()];
        let mut edges = graph.edges.clone();
        loop {
            let deg = |v: usize, e: &[(usize, usize)]| e.iter().filter(|&&(a, b)| a == v || b == v).count();
            let Some(v) = (0..alive.len()).find(|&v| alive[v] && deg(v, &edges) == 2) else {
                break;
            };
            let ends: Vec<usize> = edges
                .iter()
                .filter(|&&(a, b)| a == v || b == v)
                .map(|&(a, b)| if a == v { b } else { a })
                .collect();
            edges.retain(|&(a, b)| a != v && b != v);
            edges.push((ends[0], ends[1]));
            alive[v] = false;
        }
        let nodes = (0..alive.len()).filter(|&v| alive[v]).map(|v| graph.nodes[v]).collect();
        let mut pos_edges: Vec<(Vec3, Vec3)> = edges
            .iter()
            .map(|&(a, b)| {
                let (p, q) = (graph.nodes[a], graph.nodes[b]);
                if p.0 <= q.0 { (p, q) } else { (q, p) }
            })
            .collect();
        pos_edges.sort_by(|x, y| x.0 .0.partial_cmp(&y.0 .0).unwrap().then(x.1 .0.partial_cmp(&y.1 .0).unwrap()));
        (nodes, pos_edges)
    }

    #[test]
    fn simplify_matches_repeated_scan_oracle() {
        for seed in 0..25 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.random_range(2..40);
            let nodes: Vec<Vec3> = (0..n).map(|i| Vec3::new(i as f64, rng.random(), 0.0)).collect();
            let edges = (1..n).map(|i| (rng.random_range(0..i), i)).collect();
            let tree = SkeletonGraph::new(nodes, edges).unwrap();
            let got = simplify_graph(&tree).unwrap();
            assert!(got.is_tree());
            assert!(got.nodes.len() < 3 || got.degrees().iter().all(|&d| d != 2));
            let (nodes, edges) = contract_oracle(&tree);
            assert_eq!(got.nodes, nodes, "seed {seed}");
            let (_, got_edges) = contract_oracle(&got);
            assert_eq!(got_edges, edges, "seed {seed}");
            assert_eq!(simplify_graph(&got).unwrap(), got);
        }
    }
}
