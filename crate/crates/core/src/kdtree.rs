//! Exact k-nearest-neighbour search and range counting under the max-norm.
//!
//! Ties in distance are ordered by point index, so tree and brute-force
//! searches return identical neighbour lists.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const LEAF_SIZE: usize = 12;

/// Chebyshev (max-norm) distance.
#[inline]
pub fn max_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).abs()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub distance: f64,
}

impl Neighbor {
    fn key(&self) -> (f64, usize) {
        (self.distance, self.index)
    }
}

impl Eq for Neighbor {}

impl Ord for Neighbor {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key()
            .partial_cmp(&other.key())
            .expect("distances are never NaN")
    }
}

impl PartialOrd for Neighbor {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Row-major point set of fixed dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Points {
    dim: usize,
    data: Vec<f64>,
}

impl Points {
    pub fn new(dim: usize, data: Vec<f64>) -> Self {
        assert!(dim > 0, "dimension must be positive");
        assert_eq!(data.len() % dim, 0, "data length is not a multiple of dim");
        Points { dim, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let dim = rows.first().map_or(1, Vec::len);
        let data = rows
            .iter()
            .flat_map(|r| {
                assert_eq!(r.len(), dim, "ragged rows");
                r.iter().copied()
            })
            .collect();
        Points::new(dim, data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }
}

#[derive(Debug, Clone)]
struct Node {
    /// Range into `KdTree::order`.
    start: usize,
    end: usize,
    lo: Vec<f64>,
    hi: Vec<f64>,
    children: Option<(usize, usize)>,
}

/// Static kd-tree over a [`Points`] set.
#[derive(Debug, Clone)]
pub struct KdTree {
    points: Points,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl KdTree {
    pub fn build(points: Points) -> Self {
        let n = points.len();
        let mut tree = KdTree {
            points,
            order: (0..n).collect(),
            nodes: Vec::new(),
        };
        if n > 0 {
            tree.build_node(0, n);
        }
        tree
    }

    pub fn points(&self) -> &Points {
        &self.points
    }

    fn build_node(&mut self, start: usize, end: usize) -> usize {
        let dim = self.points.dim();
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for &i in &self.order[start..end] {
            for (d, &x) in self.points.row(i).iter().enumerate() {
                lo[d] = lo[d].min(x);
                hi[d] = hi[d].max(x);
            }
        }
        let id = self.nodes.len();
        self.nodes.push(Node {
            start,
            end,
            lo: lo.clone(),
            hi: hi.clone(),
            children: None,
        });
        if end - start <= LEAF_SIZE {
            return id;
        }
        let split_dim = (0..dim)
            .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])))
            .unwrap_or(0);
        if hi[split_dim] - lo[split_dim] == 0.0 {
            // All points coincide.
            return id;
        }
        let mid = start + (end - start) / 2;
        let points = &self.points;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            points.row(a)[split_dim].total_cmp(&points.row(b)[split_dim])
        });
        let left = self.build_node(start, mid);
        let right = self.build_node(mid, end);
        self.nodes[id].children = Some((left, right));
        id
    }

    fn box_min_distance(node: &Node, q: &[f64]) -> f64 {
        let mut d = 0.0_f64;
        for ((&x, &lo), &hi) in q.iter().zip(&node.lo).zip(&node.hi) {
            let gap = if x < lo {
                lo - x
            } else if x > hi {
                x - hi
            } else {
                0.0
            };
            d = d.max(gap);
        }
        d
    }

    fn box_max_distance(node: &Node, q: &[f64]) -> f64 {
        let mut d = 0.0_f64;
        for ((&x, &lo), &hi) in q.iter().zip(&node.lo).zip(&node.hi) {
            d = d.max((x - lo).abs().max((hi - x).abs()));
        }
        d
    }

    /// The `k` nearest points to `query`, ordered by `(distance, index)`.
    /// Point `exclude`, if given, is skipped.
    pub fn knn(&self, query: &[f64], k: usize, exclude: Option<usize>) -> Vec<Neighbor> {
        assert_eq!(query.len(), self.points.dim(), "query dimension mismatch");
        if k == 0 || self.nodes.is_empty() {
            return Vec::new();
        }
        let mut heap: BinaryHeap<Neighbor> = BinaryHeap::with_capacity(k + 1);
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            if heap.len() == k {
                let worst = heap.peek().expect("heap is full").distance;
                // Equal distance may still hold a smaller index.
                if Self::box_min_distance(node, query) > worst {
                    continue;
                }
            }
            match node.children {
                Some((l, r)) => {
                    let dl = Self::box_min_distance(&self.nodes[l], query);
                    let dr = Self::box_min_distance(&self.nodes[r], query);
                    // Visit the closer child first.
                    if dl <= dr {
                        stack.push(r);
                        stack.push(l);
                    } else {
                        stack.push(l);
                        stack.push(r);
                    }
                }
                None => {
                    for &i in &self.order[node.start..node.end] {
                        if Some(i) == exclude {
                            continue;
                        }
                        let cand = Neighbor {
                            index: i,
                            distance: max_norm(self.points.row(i), query),
                        };
                        if heap.len() < k {
                            heap.push(cand);
                        } else if cand < *heap.peek().expect("heap is full") {
                            heap.pop();
                            heap.push(cand);
                        }
                    }
                }
            }
        }
        heap.into_sorted_vec()
    }

    /// Number of points within `radius` of `query` (`<=` when `inclusive`,
    /// `<` otherwise).
    pub fn count_within(&self, query: &[f64], radius: f64, inclusive: bool) -> usize {
        let inside = |d: f64| if inclusive { d <= radius } else { d < radius };
        if self.nodes.is_empty() {
            return 0;
        }
        let mut count = 0;
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            if !inside(Self::box_min_distance(node, query)) {
                continue;
            }
            if inside(Self::box_max_distance(node, query)) {
                count += node.end - node.start;
                continue;
            }
            match node.children {
                Some((l, r)) => {
                    stack.push(l);
                    stack.push(r);
                }
                None => {
                    count += self.order[node.start..node.end]
                        .iter()
                        .filter(|&&i| inside(max_norm(self.points.row(i), query)))
                        .count();
                }
            }
        }
        count
    }
}

/// Exhaustive k-nearest-neighbour search; the reference the tree is
/// tested against.
pub fn brute_knn(points: &Points, query: &[f64], k: usize, exclude: Option<usize>) -> Vec<Neighbor> {
    let mut all: Vec<Neighbor> = (0..points.len())
        .filter(|&i| Some(i) != exclude)
        .map(|i| Neighbor {
            index: i,
            distance: max_norm(points.row(i), query),
        })
        .collect();
    all.sort();
    all.truncate(k);
    all
}

pub fn brute_count_within(points: &Points, query: &[f64], radius: f64, inclusive: bool) -> usize {
    (0..points.len())
        .filter(|&i| {
            let d = max_norm(points.row(i), query);
            if inclusive {
                d <= radius
            } else {
                d < radius
            }
        })
        .count()
}

/// Point sets at or below this size are searched exhaustively.
pub const BRUTE_FORCE_LIMIT: usize = 256;

/// `k` nearest points to `query` under the max-norm. Requires
/// `k < points.len()`.
pub fn knn_search(points: &Points, query: &[f64], k: usize) -> Vec<Neighbor> {
    assert!(k < points.len(), "k = {k} must be below the point count {}", points.len());
    if points.len() <= BRUTE_FORCE_LIMIT {
        brute_knn(points, query, k, None)
    } else {
        KdTree::build(points.clone()).knn(query, k, None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use rand::Rng;

    fn random_points<R: Rng>(n: usize, dim: usize, rng: &mut R, discrete: bool) -> Points {
        let data = (0..n * dim)
            .map(|_| {
                if discrete {
                    rng.random_range(0..4) as f64
                } else {
                    rng.random::<f64>()
                }
            })
            .collect();
        Points::new(dim, data)
    }

    #[test]
    fn collinear_self_query() {
        let pts = Points::from_rows(&[vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]]);
        let nn = knn_search(&pts, &[1.0, 1.0], 1);
        assert_eq!(nn, vec![Neighbor { index: 1, distance: 0.0 }]);
        let tree = KdTree::build(pts);
        assert_eq!(tree.knn(&[1.0, 1.0], 1, None)[0].index, 1);
    }

    #[test]
    fn all_others_when_k_is_n_minus_one() {
        let mut rng = substream(3, 0);
        let pts = random_points(40, 3, &mut rng, false);
        let tree = KdTree::build(pts.clone());
        let q = pts.row(7).to_vec();
        let nn = tree.knn(&q, 39, Some(7));
        let mut idx: Vec<usize> = nn.iter().map(|n| n.index).collect();
        idx.sort();
        let expected: Vec<usize> = (0..40).filter(|&i| i != 7).collect();
        assert_eq!(idx, expected);
    }

    #[test]
    fn tree_matches_brute_force_100_points() {
        let mut rng = substream(4, 0);
        let pts = random_points(100, 2, &mut rng, false);
        let tree = KdTree::build(pts.clone());
        for _ in 0..50 {
            let q: Vec<f64> = (0..2).map(|_| rng.random::<f64>()).collect();
            assert_eq!(tree.knn(&q, 5, None), brute_knn(&pts, &q, 5, None));
        }
    }

    #[test]
    fn tree_matches_brute_force_random_instances() {
        let mut rng = substream(9, 0);
        for inst in 0..200 {
            let n = rng.random_range(10..=256);
            let dim = rng.random_range(1..=6);
            // Every fourth instance sits on a lattice to exercise ties.
            let pts = random_points(n, dim, &mut rng, inst % 4 == 0);
            let tree = KdTree::build(pts.clone());
            for q in 0..5 {
                let k = 1 + (q * 3) % (n - 1);
                let query = pts.row((inst * 7 + q) % n).to_vec();
                assert_eq!(tree.knn(&query, k, Some(q)), brute_knn(&pts, &query, k, Some(q)));
                let radius = tree.knn(&query, k, None).last().unwrap().distance;
                for inclusive in [true, false] {
                    assert_eq!(
                        tree.count_within(&query, radius, inclusive),
                        brute_count_within(&pts, &query, radius, inclusive)
                    );
                }
            }
        }
    }

    #[test]
    fn coincident_points() {
        let pts = Points::new(2, vec![1.0; 2 * 50]);
        let tree = KdTree::build(pts.clone());
        let nn = tree.knn(&[1.0, 1.0], 3, Some(0));
        assert_eq!(nn.iter().map(|n| n.index).collect::<Vec<_>>(), vec![1, 2, 3]);
        assert_eq!(tree.count_within(&[1.0, 1.0], 0.0, true), 50);
        assert_eq!(tree.count_within(&[1.0, 1.0], 0.0, false), 0);
    }
}
