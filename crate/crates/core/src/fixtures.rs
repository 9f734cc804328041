//! Built-in benchmark networks and the default demand profile.
//!
//! `grid5x5` is the frozen desk-scale benchmark used by the evaluation
//! harness: a 5x5 junction grid fed from one corner reservoir, with six
//! pressure sensors clustered near the inlet (as deployed networks tend to
//! be) and every other junction available as a virtual-sensor site.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::{parse_network_json, Network, Node, PipeSpec};
use crate::sim::DemandPattern;

/// 24-hour diurnal demand multipliers (hour 0 through 23), mean close to 1.
pub const DIURNAL_24: [f64; 24] = [
    0.62, 0.58, 0.55, 0.53, 0.55, 0.62, 0.78, 0.95, 1.12, 1.22, 1.25, 1.28, 1.30, 1.28, 1.22,
    1.18, 1.15, 1.20, 1.32, 1.38, 1.28, 1.05, 0.85, 0.70,
];

pub fn diurnal_pattern() -> DemandPattern {
    DemandPattern::new(DIURNAL_24.to_vec()).expect("static pattern is valid")
}

/// The frozen 5x5 desk benchmark: 25 junctions, 1 reservoir, 41 pipes.
pub fn grid5x5() -> Network {
    parse_network_json(include_str!("../fixtures/grid5x5.json"))
        .expect("embedded grid5x5 fixture is valid")
}

/// Physical pressure sensors of the desk benchmark, clustered on the inlet
/// side of the grid.
pub const GRID5X5_SENSORS: [&str; 6] = ["n00", "n01", "n10", "n11", "n02", "n20"];

/// Training leak sizes of the desk benchmark [m3/s].
pub const GRID5X5_TRAIN_SIZES: [f64; 4] = [0.004, 0.005, 0.006, 0.007];
/// Test leak sizes of the desk benchmark [m3/s].
pub const GRID5X5_TEST_SIZES: [f64; 3] = [0.0045, 0.0055, 0.0065];

/// Small 3x3 grid: 9 junctions, 1 reservoir, 13 pipes (12 grid + 1 feed).
pub fn grid3x3() -> Network {
    let mut nodes = vec![Node::reservoir("r0", 50.0)];
    for i in 0..3 {
        for j in 0..3 {
            nodes.push(Node::junction(
                format!("n{i}{j}"),
                0.5 * (i + j) as f64,
                0.001 + 0.0002 * (i * 3 + j) as f64,
            ));
        }
    }
    let mut pipes = vec![PipeSpec {
        id: "f0".into(),
        from: "r0".into(),
        to: "n00".into(),
        length: 250.0,
        diameter: 0.25,
        roughness: 130.0,
    }];
    let mut k = 0;
    for i in 0..3 {
        for j in 0..3 {
            let mut push = |to: String| {
                pipes.push(PipeSpec {
                    id: format!("p{k:02}"),
                    from: format!("n{i}{j}"),
                    to,
                    length: 180.0 + 15.0 * k as f64,
                    diameter: 0.16 - 0.004 * (k % 5) as f64,
                    roughness: 110.0 + 3.0 * (k % 7) as f64,
                });
                k += 1;
            };
            if j + 1 < 3 {
                push(format!("n{i}{}", j + 1));
            }
            if i + 1 < 3 {
                push(format!("n{}{j}", i + 1));
            }
        }
    }
    Network::new(nodes, pipes).expect("static 3x3 fixture is valid")
}

/// Reservoir - pipe - junction, the smallest useful network.
pub fn two_node(demand: f64) -> Network {
    Network::new(
        vec![Node::reservoir("r", 50.0), Node::junction("a", 0.0, demand)],
        vec![PipeSpec {
            id: "p".into(),
            from: "r".into(),
            to: "a".into(),
            length: 1000.0,
            diameter: 0.3,
            roughness: 130.0,
        }],
    )
    .expect("two-node fixture is valid")
}

/// Synthetic benchmark with the size and degree statistics of a mid-size
/// European distribution network: 268 junctions, 4 reservoirs, 317 pipes.
pub fn modena_scale() -> Network {
    let mut rng = ChaCha8Rng::seed_from_u64(0x4d4f44454e41); // "MODENA"
    let n_j: usize = 268;
    let mut nodes = Vec::with_capacity(272);
    for i in 0..n_j {
        let elevation = rng.gen_range(0.0..10.0);
        let demand = rng.gen_range(0.8e-3..2.2e-3);
        nodes.push(Node::junction(format!("j{i:03}"), elevation, demand));
    }
    for (r, feed) in [(0usize, 0usize), (1, 67), (2, 134), (3, 201)] {
        nodes.push(Node::reservoir(format!("res{r}"), 48.0 + r as f64));
        let _ = feed;
    }

    let mut pipes = Vec::with_capacity(317);
    let mut used = std::collections::HashSet::new();
    let mut add = |pipes: &mut Vec<PipeSpec>,
                   used: &mut std::collections::HashSet<(usize, usize)>,
                   from: String,
                   to: String,
                   a: usize,
                   b: usize,
                   length: f64,
                   diameter: f64,
                   roughness: f64| {
        let key = (a.min(b), a.max(b));
        if !used.insert(key) {
            return false;
        }
        pipes.push(PipeSpec {
            id: format!("p{:03}", pipes.len()),
            from,
            to,
            length,
            diameter,
            roughness,
        });
        true
    };

    // corridor-grown spanning tree over the junctions keeps degrees low
    for i in 1..n_j {
        let lo = i.saturating_sub(10);
        let parent = rng.gen_range(lo..i);
        add(
            &mut pipes,
            &mut used,
            format!("j{parent:03}"),
            format!("j{i:03}"),
            parent,
            i,
            rng.gen_range(100.0..350.0),
            rng.gen_range(0.15..0.30),
            rng.gen_range(100.0..140.0),
        );
    }
    // reservoir feed mains
    for (r, feed) in [(0usize, 0usize), (1, 67), (2, 134), (3, 201)] {
        add(
            &mut pipes,
            &mut used,
            format!("res{r}"),
            format!("j{feed:03}"),
            n_j + r,
            feed,
            rng.gen_range(150.0..300.0),
            0.40,
            130.0,
        );
    }
    // loop closers up to 317 pipes
    while pipes.len() < 317 {
        let a = rng.gen_range(0..n_j);
        let b = (a + rng.gen_range(1..30)) % n_j;
        if a == b {
            continue;
        }
        add(
            &mut pipes,
            &mut used,
            format!("j{a:03}"),
            format!("j{b:03}"),
            a,
            b,
            rng.gen_range(100.0..350.0),
            rng.gen_range(0.15..0.30),
            rng.gen_range(100.0..140.0),
        );
    }

    Network::new(nodes, pipes).expect("synthetic benchmark generator yields a valid network")
}

/// The synthetic large benchmark rendered as an EPANET-dialect INP file.
pub fn modena_scale_inp() -> String {
    let net = modena_scale();
    let mut out = String::from("[TITLE]\nsynthetic 272-node benchmark\n\n[JUNCTIONS]\n");
    for node in net.nodes().iter().filter(|n| n.is_junction()) {
        out.push_str(&format!(
            " {}  {}  {}\n",
            node.id,
            node.elevation,
            node.base_demand() * 1e3
        ));
    }
    out.push_str("\n[RESERVOIRS]\n");
    for node in net.nodes().iter().filter(|n| !n.is_junction()) {
        out.push_str(&format!(" {}  {}\n", node.id, node.fixed_head().unwrap()));
    }
    out.push_str("\n[PIPES]\n");
    for pipe in net.pipes() {
        out.push_str(&format!(
            " {}  {}  {}  {}  {}  {}\n",
            pipe.id,
            net.node(pipe.source).id,
            net.node(pipe.sink).id,
            pipe.length,
            pipe.diameter * 1e3,
            pipe.roughness
        ));
    }
    out.push_str("\n[OPTIONS]\n Units LPS\n Headloss H-W\n\n[END]\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_inp;

    #[test]
    fn grid5x5_shape() {
        let net = grid5x5();
        assert_eq!(net.node_count(), 26);
        assert_eq!(net.pipe_count(), 41);
        assert_eq!(net.reservoir_indices(), vec![0]);
        for id in GRID5X5_SENSORS {
            net.node_index(id).unwrap();
        }
    }

    #[test]
    fn modena_scale_counts_match_benchmark_table() {
        let net = parse_inp(&modena_scale_inp()).unwrap();
        let junctions = net.junction_indices().len();
        let reservoirs = net.reservoir_indices().len();
        assert_eq!(junctions, 268);
        assert_eq!(reservoirs, 4);
        assert_eq!(net.pipe_count(), 317);
        assert_eq!(net.node_count(), 272);
        // edge-node incidence shape check
        let lambda = crate::model::edge_node_incidence(&net);
        assert_eq!(lambda.shape(), (317, 272));
    }

    #[test]
    fn modena_scale_neighborhood_ratios() {
        // mean 1-hop and 2-hop set sizes as a share of all nodes
        let net = modena_scale();
        let n = net.node_count() as f64;
        let mean = |k: usize| {
            (0..net.node_count())
                .map(|v| crate::model::k_hop_neighborhood(&net, v, k).len() as f64)
                .sum::<f64>()
                / n
                / n
                * 100.0
        };
        let one = mean(1);
        let two = mean(2);
        assert!((1.0..1.5).contains(&one), "1-hop share {one}%");
        assert!((2.0..3.2).contains(&two), "2-hop share {two}%");
    }
}
