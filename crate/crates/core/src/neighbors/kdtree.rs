use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{canonical_cmp, euclidean, NeighborQueryResult, PointCloud};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const LEAF_SIZE: usize = 16;

#[derive(Debug, Clone)]
struct Node {
    start: usize,
    end: usize,
    // child node ids; `None` for leaves
    children: Option<(usize, usize)>,
}

/// Immutable k-d tree over an owned snapshot of a [`PointCloud`].
///
/// Nodes keep axis-aligned bounding boxes; a subtree is skipped only when
/// its box is strictly farther than the current k-th candidate, so ties are
/// always resolved against every equidistant point.
#[derive(Debug, Clone)]
pub struct NeighborIndex<T> {
    cloud: PointCloud<T>,
    order: Vec<usize>,
    nodes: Vec<Node>,
    // per node: dim lower bounds followed by dim upper bounds
    bounds: Vec<T>,
}

#[derive(Clone, Copy)]
struct Candidate<T> {
    dist: T,
    index: usize,
}

impl<T: Scalar> PartialEq for Candidate<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: Scalar> Eq for Candidate<T> {}

impl<T: Scalar> PartialOrd for Candidate<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Scalar> Ord for Candidate<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        canonical_cmp((self.dist, self.index), (other.dist, other.index))
    }
}

/// Reusable buffers for repeated queries against one index.
pub struct QueryScratch<T> {
    heap: BinaryHeap<Candidate<T>>,
    stack: Vec<usize>,
}

impl<T: Scalar> Default for QueryScratch<T> {
    fn default() -> Self {
        Self {
            heap: BinaryHeap::new(),
            stack: Vec::new(),
        }
    }
}

impl<T: Scalar> NeighborIndex<T> {
    pub fn build(cloud: PointCloud<T>) -> Result<Self> {
        if cloud.is_empty() {
            return Err(Error::EmptyCloud);
        }
        let n = cloud.len();
        let mut index = Self {
            order: (0..n).collect(),
            nodes: Vec::with_capacity(2 * n / LEAF_SIZE + 1),
            bounds: Vec::new(),
            cloud,
        };
        index.build_node(0, n);
        Ok(index)
    }

    pub fn cloud(&self) -> &PointCloud<T> {
        &self.cloud
    }

    pub fn len(&self) -> usize {
        self.cloud.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cloud.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.cloud.dim()
    }

    fn build_node(&mut self, start: usize, end: usize) -> usize {
        let dim = self.cloud.dim();
        let id = self.nodes.len();
        self.nodes.push(Node {
            start,
            end,
            children: None,
        });

        let mut lo = vec![T::infinity(); dim];
        let mut hi = vec![T::neg_infinity(); dim];
        for &i in &self.order[start..end] {
            for (j, &c) in self.cloud.point(i).iter().enumerate() {
                lo[j] = lo[j].min(c);
                hi[j] = hi[j].max(c);
            }
        }
        self.bounds.extend_from_slice(&lo);
        self.bounds.extend_from_slice(&hi);

        if end - start <= LEAF_SIZE {
            return id;
        }
        let axis = (0..dim)
            .max_by(|&a, &b| {
                (hi[a] - lo[a])
                    .partial_cmp(&(hi[b] - lo[b]))
                    .unwrap_or(Ordering::Equal)
                    .then(b.cmp(&a))
            })
            .unwrap_or(0);
        if hi[axis] <= lo[axis] {
            // all points coincide
            return id;
        }

        let mid = start + (end - start) / 2;
        let cloud = &self.cloud;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            cloud.point(a)[axis]
                .partial_cmp(&cloud.point(b)[axis])
                .unwrap_or(Ordering::Equal)
                .then(a.cmp(&b))
        });
        let left = self.build_node(start, mid);
        let right = self.build_node(mid, end);
        self.nodes[id].children = Some((left, right));
        id
    }

    fn box_distance(&self, node: usize, x: &[T]) -> T {
        let dim = self.cloud.dim();
        let base = node * 2 * dim;
        let lo = &self.bounds[base..base + dim];
        let hi = &self.bounds[base + dim..base + 2 * dim];
        let mut acc = T::zero();
        for j in 0..dim {
            let gap = if x[j] < lo[j] {
                lo[j] - x[j]
            } else if x[j] > hi[j] {
                x[j] - hi[j]
            } else {
                T::zero()
            };
            acc = acc + gap * gap;
        }
        acc.sqrt()
    }

    /// The `k` nearest sample points to `x` in canonical order.
    pub fn k_nearest(&self, x: &[T], k: usize) -> Result<NeighborQueryResult<T>> {
        self.k_nearest_with(&mut QueryScratch::default(), x, k)
    }

    /// `R_k(x)`, the distance from `x` to its k-th nearest sample point.
    pub fn kth_radius(&self, x: &[T], k: usize) -> Result<T> {
        Ok(self.k_nearest(x, k)?.radius())
    }

    pub fn k_nearest_with(
        &self,
        scratch: &mut QueryScratch<T>,
        x: &[T],
        k: usize,
    ) -> Result<NeighborQueryResult<T>> {
        self.cloud.check_query(x)?;
        self.cloud.check_k(k)?;

        let heap = &mut scratch.heap;
        let stack = &mut scratch.stack;
        heap.clear();
        stack.clear();
        stack.push(0);

        while let Some(node_id) = stack.pop() {
            if heap.len() == k {
                let worst = heap.peek().map(|c| c.dist).unwrap_or(T::infinity());
                if self.box_distance(node_id, x) > worst {
                    continue;
                }
            }
            let node = &self.nodes[node_id];
            match node.children {
                Some((left, right)) => {
                    let dl = self.box_distance(left, x);
                    let dr = self.box_distance(right, x);
                    // nearer child is popped first
                    if dl <= dr {
                        stack.push(right);
                        stack.push(left);
                    } else {
                        stack.push(left);
                        stack.push(right);
                    }
                }
                None => {
                    for &i in &self.order[node.start..node.end] {
                        let cand = Candidate {
                            dist: euclidean(x, self.cloud.point(i)),
                            index: i,
                        };
                        if heap.len() < k {
                            heap.push(cand);
                        } else if let Some(top) = heap.peek() {
                            if cand < *top {
                                heap.pop();
                                heap.push(cand);
                            }
                        }
                    }
                }
            }
        }

        let mut found: Vec<Candidate<T>> = heap.drain().collect();
        found.sort_unstable();
        Ok(NeighborQueryResult {
            indices: found.iter().map(|c| c.index).collect(),
            distances: found.iter().map(|c| c.dist).collect(),
        })
    }

    /// Answers a batch of queries, each with its own neighbour count.
    /// Errors carry the position of the offending query.
    pub fn batched_variable_k<P: AsRef<[T]>>(
        &self,
        queries: &[(P, usize)],
    ) -> Result<Vec<NeighborQueryResult<T>>> {
        let mut scratch = QueryScratch::default();
        queries
            .iter()
            .enumerate()
            .map(|(position, (x, k))| {
                self.k_nearest_with(&mut scratch, x.as_ref(), *k)
                    .map_err(|e| Error::BatchQuery {
                        position,
                        source: Box::new(e),
                    })
            })
            .collect()
    }
}
