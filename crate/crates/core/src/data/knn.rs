use std::cmp::Ordering;
use std::collections::BinaryHeap;

use ndarray::{Array2, ArrayView1};

use crate::graph::Graph;
use crate::{Error, Result};

/// Candidate neighbor ordered by (squared distance, index) so that equal
/// distances resolve to the lower index.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Candidate {
    dist: f64,
    index: usize,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist
            .total_cmp(&other.dist)
            .then(self.index.cmp(&other.index))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn sq_dist(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

enum Node {
    Leaf(Vec<usize>),
    Split {
        axis: usize,
        value: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

const LEAF_SIZE: usize = 16;

/// Static k-d tree over the rows of a point matrix.
pub struct KdTree<'a> {
    points: &'a Array2<f64>,
    root: Node,
}

impl<'a> KdTree<'a> {
    pub fn new(points: &'a Array2<f64>) -> Self {
        let mut idx: Vec<usize> = (0..points.nrows()).collect();
        let root = Self::build(points, &mut idx, 0);
        KdTree { points, root }
    }

    fn build(points: &Array2<f64>, idx: &mut [usize], depth: usize) -> Node {
        let dim = points.ncols();
        if idx.len() <= LEAF_SIZE || dim == 0 {
            return Node::Leaf(idx.to_vec());
        }
        let axis = depth % dim;
        let mid = idx.len() / 2;
        idx.select_nth_unstable_by(mid, |&a, &b| {
            points[[a, axis]].total_cmp(&points[[b, axis]])
        });
        let value = points[[idx[mid], axis]];
        let (lo, hi) = idx.split_at_mut(mid);
        Node::Split {
            axis,
            value,
            left: Box::new(Self::build(points, lo, depth + 1)),
            right: Box::new(Self::build(points, hi, depth + 1)),
        }
    }

    /// The `k` nearest rows to row `i` (excluding `i`), nearest first.
    pub fn nearest(&self, i: usize, k: usize) -> Vec<usize> {
        let mut heap = BinaryHeap::with_capacity(k + 1);
        self.search(&self.root, i, k, &mut heap);
        let mut out: Vec<Candidate> = heap.into_vec();
        out.sort();
        out.into_iter().map(|c| c.index).collect()
    }

    fn search(&self, node: &Node, i: usize, k: usize, heap: &mut BinaryHeap<Candidate>) {
        match node {
            Node::Leaf(ids) => {
                let q = self.points.row(i);
                for &j in ids {
                    if j == i {
                        continue;
                    }
                    let c = Candidate {
                        dist: sq_dist(q, self.points.row(j)),
                        index: j,
                    };
                    if heap.len() < k {
                        heap.push(c);
                    } else if c < *heap.peek().expect("k >= 1") {
                        heap.pop();
                        heap.push(c);
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = self.points[[i, *axis]] - value;
                let (near, far) = if diff < 0.0 {
                    (left, right)
                } else {
                    (right, left)
                };
                self.search(near, i, k, heap);
                // Equality is not pruned: a tied point with a smaller index may live there.
                if heap.len() < k || diff * diff <= heap.peek().expect("non-empty").dist {
                    self.search(far, i, k, heap);
                }
            }
        }
    }
}

fn check_k(n: usize, k: usize) -> Result<()> {
    if k == 0 || k >= n {
        return Err(Error::param(format!("k-NN needs 1 <= k < n, got k={k}, n={n}")));
    }
    Ok(())
}

/// Union-symmetrized k-nearest-neighbor graph in Euclidean distance.
pub fn knn_graph(points: &Array2<f64>, k: usize) -> Result<Graph> {
    let n = points.nrows();
    check_k(n, k)?;
    let tree = KdTree::new(points);
    let edges = (0..n).flat_map(|i| {
        tree.nearest(i, k)
            .into_iter()
            .map(move |j| (i.min(j), i.max(j)))
    });
    Graph::from_edges(n, edges.collect::<Vec<_>>())
}

/// O(n²) reference: the `k` nearest rows of every row, ties by index.
pub fn brute_force_knn(points: &Array2<f64>, k: usize) -> Result<Vec<Vec<usize>>> {
    let n = points.nrows();
    check_k(n, k)?;
    Ok((0..n)
        .map(|i| {
            let mut all: Vec<Candidate> = (0..n)
                .filter(|&j| j != i)
                .map(|j| Candidate {
                    dist: sq_dist(points.row(i), points.row(j)),
                    index: j,
                })
                .collect();
            all.sort();
            all.into_iter().take(k).map(|c| c.index).collect()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn collinear_k1_union() {
        let p = array![[0.0, 0.0], [1.0, 0.0], [2.5, 0.0]];
        let g = knn_graph(&p, 1).unwrap();
        assert_eq!(g.edges().to_vec(), vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn ties_go_to_lower_index() {
        let p = array![[0.0], [-1.0], [1.0]];
        let tree = KdTree::new(&p);
        assert_eq!(tree.nearest(0, 1), vec![1]);
    }

    #[test]
    fn k_must_be_below_n() {
        let p = array![[0.0], [1.0]];
        assert!(knn_graph(&p, 2).is_err());
        assert!(knn_graph(&p, 0).is_err());
    }
}
