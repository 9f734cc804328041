//! Incidence matrices.
//!
//! Sign convention, used consistently across the crate: a pipe oriented
//! `source -> sink` puts -1 in the source column and +1 in the sink column of
//! its edge-node row. Under this convention `Lambda * psi <= 0` holds whenever
//! flow follows the assumed orientations (head drops source to sink).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::graph::{shortest_path_distances, ties};
use crate::model::Network;

/// Edge-node incidence from declared pipe orientations: m x n with one -1
/// (declared source) and one +1 (declared sink) per row.
pub fn edge_node_incidence(net: &Network) -> DMatrix<f64> {
    let mut lambda = DMatrix::zeros(net.pipe_count(), net.node_count());
    for (k, pipe) in net.pipes().iter().enumerate() {
        lambda[(k, pipe.source)] = -1.0;
        lambda[(k, pipe.sink)] = 1.0;
    }
    lambda
}

/// Node-node incidence from a head field: `b_ij = +1` where `psi_i >= psi_j`
/// for adjacent nodes, `-1` for the reverse, `0` elsewhere.
///
/// Exact head ties are broken by node index (the lower index is treated as
/// the source) so the matrix stays antisymmetric.
pub fn incidence_from_heads(net: &Network, heads: &DVector<f64>) -> Result<DMatrix<f64>> {
    let n = net.node_count();
    if heads.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: heads.len(),
        });
    }
    let mut b = DMatrix::zeros(n, n);
    for pipe in net.pipes() {
        let (i, j) = (pipe.source, pipe.sink);
        let hi = heads[i];
        let hj = heads[j];
        let sign = if hi > hj {
            1.0
        } else if hi < hj {
            -1.0
        } else if i < j {
            1.0
        } else {
            -1.0
        };
        b[(i, j)] = sign;
        b[(j, i)] = -sign;
    }
    Ok(b)
}

/// Structural approximation of the edge-node incidence matrix.
///
/// Every shortest path from every reservoir to every junction is counted;
/// each pipe is oriented along the direction used by the strictly greater
/// number of those paths, and kept in the reverse of its declared orientation
/// otherwise (including the untouched / tied case).
pub fn approx_incidence_structural(net: &Network) -> Result<DMatrix<f64>> {
    let n = net.node_count();
    let m = net.pipe_count();
    let reservoirs = net.reservoir_indices();
    if reservoirs.is_empty() {
        return Err(Error::NoReservoir);
    }

    // usage[(u, v)] = number of reservoir->junction shortest paths traversing
    // the pipe in direction u -> v
    let mut usage = vec![0u128; n * n];
    for &r in &reservoirs {
        let dist = shortest_path_distances(net, r);
        if dist.iter().any(|d| !d.is_finite()) {
            return Err(Error::DisconnectedGraph);
        }
        // forward path counts from the reservoir
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| dist[a].partial_cmp(&dist[b]).unwrap().then(a.cmp(&b)));
        let mut fwd = vec![0u128; n];
        fwd[r] = 1;
        for &u in &order {
            if u == r {
                continue;
            }
            let mut c: u128 = 0;
            for &(v, k) in net.neighbors(u) {
                if ties(dist[v] + net.pipe(k).length, dist[u]) {
                    c = c.saturating_add(fwd[v]);
                }
            }
            fwd[u] = c;
        }
        // backward counts toward each junction target
        for &target in &net.junction_indices() {
            let mut back = vec![0u128; n];
            back[target] = 1;
            for &u in order.iter().rev() {
                if u == target {
                    continue;
                }
                let mut c: u128 = 0;
                for &(v, k) in net.neighbors(u) {
                    if ties(dist[u] + net.pipe(k).length, dist[v]) {
                        c = c.saturating_add(back[v]);
                    }
                }
                back[u] = c;
            }
            for u in 0..n {
                if fwd[u] == 0 || !dist[u].is_finite() {
                    continue;
                }
                for &(v, k) in net.neighbors(u) {
                    if ties(dist[u] + net.pipe(k).length, dist[v]) && back[v] > 0 {
                        usage[u * n + v] =
                            usage[u * n + v].saturating_add(fwd[u].saturating_mul(back[v]));
                    }
                }
            }
        }
    }

    let mut lambda = DMatrix::zeros(m, n);
    for (k, pipe) in net.pipes().iter().enumerate() {
        let (i, j) = (pipe.source, pipe.sink);
        if usage[i * n + j] > usage[j * n + i] {
            lambda[(k, i)] = -1.0;
            lambda[(k, j)] = 1.0;
        } else {
            lambda[(k, i)] = 1.0;
            lambda[(k, j)] = -1.0;
        }
    }
    Ok(lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Node, PipeSpec};

    fn mk_pipe(id: &str, from: &str, to: &str, len: f64) -> PipeSpec {
        PipeSpec {
            id: id.into(),
            from: from.into(),
            to: to.into(),
            length: len,
            diameter: 0.2,
            roughness: 120.0,
        }
    }

    #[test]
    fn single_pipe_row() {
        let net = Network::new(
            vec![Node::reservoir("a", 50.0), Node::junction("b", 0.0, 0.0)],
            vec![mk_pipe("p", "a", "b", 100.0)],
        )
        .unwrap();
        let lambda = edge_node_incidence(&net);
        assert_eq!(lambda[(0, 0)], -1.0);
        assert_eq!(lambda[(0, 1)], 1.0);
    }

    #[test]
    fn rows_sum_to_zero() {
        let net = crate::fixtures::grid3x3();
        let lambda = edge_node_incidence(&net);
        for k in 0..net.pipe_count() {
            assert_eq!(lambda.row(k).sum(), 0.0);
        }
    }

    #[test]
    fn head_incidence_reads_ordering() {
        let net = Network::new(
            vec![Node::reservoir("a", 50.0), Node::junction("b", 0.0, 0.0)],
            vec![mk_pipe("p", "a", "b", 100.0)],
        )
        .unwrap();
        let b = incidence_from_heads(&net, &DVector::from_vec(vec![50.0, 40.0])).unwrap();
        assert_eq!(b[(0, 1)], 1.0);
        assert_eq!(b[(1, 0)], -1.0);
        // tie: lower index treated as source
        let b = incidence_from_heads(&net, &DVector::from_vec(vec![50.0, 50.0])).unwrap();
        assert_eq!(b[(0, 1)], 1.0);
        assert_eq!(b[(1, 0)], -1.0);
    }

    #[test]
    fn head_incidence_zero_for_non_adjacent() {
        let net = Network::new(
            vec![
                Node::reservoir("a", 50.0),
                Node::junction("b", 0.0, 0.0),
                Node::junction("c", 0.0, 0.0),
            ],
            vec![mk_pipe("p1", "a", "b", 100.0), mk_pipe("p2", "b", "c", 100.0)],
        )
        .unwrap();
        let heads = DVector::from_vec(vec![50.0, 45.0, 40.0]);
        let b = incidence_from_heads(&net, &heads).unwrap();
        assert_eq!(b[(0, 2)], 0.0);
        assert_eq!(b[(2, 0)], 0.0);
    }

    #[test]
    fn structural_chain_directed_away_from_reservoir() {
        let net = Network::new(
            vec![
                Node::reservoir("r", 50.0),
                Node::junction("a", 0.0, 0.0),
                Node::junction("b", 0.0, 0.0),
            ],
            vec![mk_pipe("p1", "r", "a", 100.0), mk_pipe("p2", "a", "b", 100.0)],
        )
        .unwrap();
        let lambda = approx_incidence_structural(&net).unwrap();
        // both pipes oriented away from r: -1 on the upstream endpoint
        assert_eq!(lambda[(0, 0)], -1.0);
        assert_eq!(lambda[(0, 1)], 1.0);
        assert_eq!(lambda[(1, 1)], -1.0);
        assert_eq!(lambda[(1, 2)], 1.0);
    }

    #[test]
    fn structural_diamond_counts_all_shortest_paths() {
        // r-a, r-b, a-c, b-c, unit lengths: both a-c and b-c point toward c
        let net = Network::new(
            vec![
                Node::reservoir("r", 50.0),
                Node::junction("a", 0.0, 0.0),
                Node::junction("b", 0.0, 0.0),
                Node::junction("c", 0.0, 0.0),
            ],
            vec![
                mk_pipe("p1", "r", "a", 1.0),
                mk_pipe("p2", "r", "b", 1.0),
                mk_pipe("p3", "a", "c", 1.0),
                mk_pipe("p4", "b", "c", 1.0),
            ],
        )
        .unwrap();
        let lambda = approx_incidence_structural(&net).unwrap();
        let c = net.node_index("c").unwrap();
        assert_eq!(lambda[(2, c)], 1.0);
        assert_eq!(lambda[(3, c)], 1.0);
    }

    #[test]
    fn structural_untouched_pipe_uses_else_branch() {
        // pipe between two reservoirs is never on a reservoir->junction path:
        // the else branch flips the declared orientation
        let net = Network::new(
            vec![
                Node::reservoir("r1", 50.0),
                Node::reservoir("r2", 50.0),
                Node::junction("a", 0.0, 0.0),
            ],
            vec![
                mk_pipe("p1", "r1", "r2", 100.0),
                mk_pipe("p2", "r1", "a", 100.0),
            ],
        )
        .unwrap();
        let lambda = approx_incidence_structural(&net).unwrap();
        assert_eq!(lambda[(0, 0)], 1.0);
        assert_eq!(lambda[(0, 1)], -1.0);
    }
}
