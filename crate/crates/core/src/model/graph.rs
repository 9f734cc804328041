//! Length-weighted shortest paths and hop neighborhoods.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use crate::error::{Error, Result};
use crate::model::Network;

/// Relative tolerance for "equal path length" when accumulating shortest-path
/// ties over f64 pipe lengths.
pub(crate) const PATH_TIE_TOL: f64 = 1e-9;

struct HeapItem {
    dist: f64,
    node: usize,
}

impl PartialEq for HeapItem {
    fn eq(&self, other: &Self) -> bool {
        self.dist == other.dist && self.node == other.node
    }
}
impl Eq for HeapItem {}
impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance, ties by node index for determinism
        other
            .dist
            .partial_cmp(&self.dist)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.node.cmp(&self.node))
    }
}

/// Pipe-length-weighted distances from `source` to every node.
pub fn shortest_path_distances(net: &Network, source: usize) -> Vec<f64> {
    let n = net.node_count();
    let mut dist = vec![f64::INFINITY; n];
    dist[source] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(HeapItem {
        dist: 0.0,
        node: source,
    });
    while let Some(HeapItem { dist: d, node: u }) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, k) in net.neighbors(u) {
            let nd = d + net.pipe(k).length;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(HeapItem { dist: nd, node: v });
            }
        }
    }
    dist
}

pub(crate) fn ties(a: f64, b: f64) -> bool {
    (a - b).abs() <= PATH_TIE_TOL * a.abs().max(b.abs()).max(1.0)
}

/// Minimum-total-pipe-length path from `a` to `b` as a node-index sequence.
///
/// Among equal-length paths the lexicographically smallest node-id sequence
/// is returned, built greedily from the front on the shortest-path DAG.
pub fn shortest_path(net: &Network, a: &str, b: &str) -> Result<Vec<usize>> {
    let start = net.node_index(a)?;
    let goal = net.node_index(b)?;
    if start == goal {
        return Ok(vec![start]);
    }
    let dist_to_goal = shortest_path_distances(net, goal);
    if !dist_to_goal[start].is_finite() {
        return Err(Error::Unreachable {
            a: a.to_string(),
            b: b.to_string(),
        });
    }
    let mut path = vec![start];
    let mut u = start;
    while u != goal {
        // among neighbors on a shortest path, pick the smallest node id
        let mut next: Option<usize> = None;
        for &(v, k) in net.neighbors(u) {
            if ties(net.pipe(k).length + dist_to_goal[v], dist_to_goal[u]) {
                let better = match next {
                    None => true,
                    Some(cur) => net.node(v).id < net.node(cur).id,
                };
                if better {
                    next = Some(v);
                }
            }
        }
        u = next.expect("shortest-path DAG must have a successor");
        path.push(u);
    }
    Ok(path)
}

/// All nodes within `k` edges of `v`, including `v` itself.
pub fn k_hop_neighborhood(net: &Network, v: usize, k: usize) -> HashSet<usize> {
    let mut seen = HashSet::from([v]);
    let mut frontier = vec![v];
    for _ in 0..k {
        let mut next = Vec::new();
        for &u in &frontier {
            for &(w, _) in net.neighbors(u) {
                if seen.insert(w) {
                    next.push(w);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    seen
}
