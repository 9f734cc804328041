//! Leak / leak-free scenario dataset generation.
//!
//! For every (leak node, leak size, time instant) triple one leak scenario
//! and one boundary-matched leak-free scenario are produced: the pair shares
//! the same perturbed network, demand pattern and hour, and differs only in
//! the emitter. Column order is (class, size, time), class-major.

use nalgebra::DMatrix;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::Network;
use crate::sim::uncertainty::{apply_uncertainty, quantize_sensor, UncertaintySpec};
use crate::sim::{calibrate_emitter, steady_state_solve, DemandPattern, EmitterLeak, SolverOptions};

#[derive(Debug, Clone)]
pub struct DatasetConfig {
    /// Leak candidate nodes (classes), by node index; must be junctions.
    pub leak_nodes: Vec<usize>,
    /// Time instants per leak, spread evenly over the demand pattern.
    pub n_t: usize,
    /// Training leak sizes [m3/s].
    pub train_sizes: Vec<f64>,
    /// Test leak sizes [m3/s]; disjoint from the training sizes.
    pub test_sizes: Vec<f64>,
    pub uncertainty_level: f64,
    pub seed: u64,
    /// Physical sensor nodes, in row order of the sensor matrices.
    pub sensors: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ColumnMeta {
    pub class: usize,
    pub leak_node_id: String,
    pub size_index: usize,
    pub leak_size: f64,
    pub time_index: usize,
    pub hour: usize,
    pub is_train: bool,
    pub scenario_seed: u64,
}

/// Scenario matrices plus everything needed to reproduce them.
#[derive(Debug, Clone)]
pub struct Dataset {
    /// Physical sensor node indices, row order of the sensor matrices.
    pub sensors: Vec<usize>,
    /// Quantized sensor heads under leaks: n_sensors x n_samp.
    pub leak_sensor: DMatrix<f64>,
    /// Quantized sensor heads of the boundary-matched leak-free twins.
    pub nominal_sensor: DMatrix<f64>,
    /// Unquantized full-state leak heads: n x n_samp (ground truth).
    pub leak_truth: DMatrix<f64>,
    /// Unquantized full-state leak-free heads: n x n_samp.
    pub nominal_truth: DMatrix<f64>,
    pub columns: Vec<ColumnMeta>,
    pub n_class: usize,
    pub n_t: usize,
    pub n_ls: usize,
    pub uncertainty_level: f64,
    pub seed: u64,
    pub warnings: Vec<String>,
}

impl Dataset {
    pub fn n_samples(&self) -> usize {
        self.columns.len()
    }

    pub fn train_columns(&self) -> Vec<usize> {
        (0..self.columns.len())
            .filter(|&c| self.columns[c].is_train)
            .collect()
    }

    pub fn test_columns(&self) -> Vec<usize> {
        (0..self.columns.len())
            .filter(|&c| !self.columns[c].is_train)
            .collect()
    }

    /// Content hash over matrices and metadata; stable across runs and
    /// thread counts.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        for m in [
            &self.leak_sensor,
            &self.nominal_sensor,
            &self.leak_truth,
            &self.nominal_truth,
        ] {
            hasher.update((m.nrows() as u64).to_le_bytes());
            hasher.update((m.ncols() as u64).to_le_bytes());
            for v in m.iter() {
                hasher.update(v.to_le_bytes());
            }
        }
        hasher.update(serde_json::to_vec(&self.columns).expect("column metadata serializes"));
        hex(&hasher.finalize())
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

struct PairBlock {
    class: usize,
    size_index: usize,
    warnings: Vec<String>,
    /// per time instant: (leak heads, nominal heads)
    states: Vec<(nalgebra::DVector<f64>, nalgebra::DVector<f64>)>,
    meta: Vec<ColumnMeta>,
}

/// Generate the full dataset. Scenario pairs are independent across
/// (class, size); generation parallelizes over pairs and reassembles in
/// deterministic column order, so the result is identical for any worker
/// count.
pub fn generate_dataset(
    net: &Network,
    pattern: &DemandPattern,
    config: &DatasetConfig,
) -> Result<Dataset> {
    let n = net.node_count();
    let n_class = config.leak_nodes.len();
    let n_ls = config.train_sizes.len() + config.test_sizes.len();
    if n_class == 0 || n_ls == 0 || config.n_t == 0 {
        return Err(Error::Config(
            "dataset needs at least one class, size and time instant".into(),
        ));
    }
    for &s in config.train_sizes.iter().chain(&config.test_sizes) {
        if s <= 0.0 {
            return Err(Error::Config("leak sizes must be positive".into()));
        }
    }
    for &tr in &config.train_sizes {
        if config.test_sizes.iter().any(|&te| te == tr) {
            return Err(Error::Config(format!(
                "leak size {tr} appears in both train and test sets"
            )));
        }
    }
    for &v in &config.leak_nodes {
        if !net.node(v).is_junction() {
            return Err(Error::Config(format!(
                "leak candidate {:?} is not a junction",
                net.node(v).id
            )));
        }
    }
    {
        let mut seen = std::collections::HashSet::new();
        for &s in &config.sensors {
            if s >= n || !seen.insert(s) {
                return Err(Error::Config("invalid or duplicate sensor node".into()));
            }
        }
    }

    let sizes: Vec<(f64, bool)> = config
        .train_sizes
        .iter()
        .map(|&s| (s, true))
        .chain(config.test_sizes.iter().map(|&s| (s, false)))
        .collect();
    let opts = SolverOptions::default();

    let pairs: Vec<(usize, usize)> = (0..n_class)
        .flat_map(|c| (0..n_ls).map(move |s| (c, s)))
        .collect();

    let blocks: Result<Vec<PairBlock>> = pairs
        .par_iter()
        .map(|&(class, size_index)| {
            generate_pair(net, pattern, config, class, size_index, sizes[size_index], &opts)
                .map_err(|e| {
                    Error::stage(
                        format!(
                            "class {class} (node {:?}), size {} m3/s",
                            net.node(config.leak_nodes[class]).id,
                            sizes[size_index].0
                        ),
                        e,
                    )
                })
        })
        .collect();
    let blocks = blocks?;

    let n_samp = n_class * n_ls * config.n_t;
    let mut dataset = Dataset {
        sensors: config.sensors.clone(),
        leak_sensor: DMatrix::zeros(config.sensors.len(), n_samp),
        nominal_sensor: DMatrix::zeros(config.sensors.len(), n_samp),
        leak_truth: DMatrix::zeros(n, n_samp),
        nominal_truth: DMatrix::zeros(n, n_samp),
        columns: vec![
            ColumnMeta {
                class: 0,
                leak_node_id: String::new(),
                size_index: 0,
                leak_size: 0.0,
                time_index: 0,
                hour: 0,
                is_train: false,
                scenario_seed: 0,
            };
            n_samp
        ],
        n_class,
        n_t: config.n_t,
        n_ls,
        uncertainty_level: config.uncertainty_level,
        seed: config.seed,
        warnings: Vec::new(),
    };

    for block in blocks {
        dataset.warnings.extend(block.warnings);
        for (t, (leak_heads, nominal_heads)) in block.states.iter().enumerate() {
            let col = (block.class * n_ls + block.size_index) * config.n_t + t;
            for (row, &s) in config.sensors.iter().enumerate() {
                dataset.leak_sensor[(row, col)] = quantize_sensor(leak_heads[s]);
                dataset.nominal_sensor[(row, col)] = quantize_sensor(nominal_heads[s]);
            }
            dataset.leak_truth.set_column(col, leak_heads);
            dataset.nominal_truth.set_column(col, nominal_heads);
            dataset.columns[col] = block.meta[t].clone();
        }
    }
    Ok(dataset)
}

fn generate_pair(
    net: &Network,
    pattern: &DemandPattern,
    config: &DatasetConfig,
    class: usize,
    size_index: usize,
    (size, is_train): (f64, bool),
    opts: &SolverOptions,
) -> Result<PairBlock> {
    let leak_node = config.leak_nodes[class];
    // one uncertainty realization per (class, size) pair, shared with the
    // leak-free twin and across the pair's time instants
    let mut hasher = Sha256::new();
    hasher.update(config.seed.to_le_bytes());
    hasher.update(b"scenario");
    hasher.update((class as u64).to_le_bytes());
    hasher.update((size_index as u64).to_le_bytes());
    let digest = hasher.finalize();
    let scenario_seed = u64::from_le_bytes(digest[..8].try_into().unwrap());

    let spec = UncertaintySpec::new(config.uncertainty_level, scenario_seed);
    let (pnet, ppat) = apply_uncertainty(net, pattern, &spec)?;
    let base = pnet.base_demands();

    let hour0 = ppat.hour_for_instant(0, config.n_t);
    let demands0: Vec<f64> = base.iter().map(|d| d * ppat.multiplier(hour0)).collect();
    let eps = calibrate_emitter(&pnet, &demands0, leak_node, size, opts)?;
    let leak = EmitterLeak {
        node: leak_node,
        coefficient: eps,
    };

    let mut states = Vec::with_capacity(config.n_t);
    let mut meta = Vec::with_capacity(config.n_t);
    let mut warnings = Vec::new();
    for t in 0..config.n_t {
        let hour = ppat.hour_for_instant(t, config.n_t);
        let demands: Vec<f64> = base.iter().map(|d| d * ppat.multiplier(hour)).collect();
        let leak_scen = steady_state_solve(&pnet, &demands, Some(leak), opts)
            .map_err(|e| Error::stage(format!("leak solve, instant {t}"), e))?;
        let nominal_scen = steady_state_solve(&pnet, &demands, None, opts)
            .map_err(|e| Error::stage(format!("nominal solve, instant {t}"), e))?;
        warnings.extend(leak_scen.warnings.iter().cloned());
        states.push((leak_scen.heads, nominal_scen.heads));
        meta.push(ColumnMeta {
            class,
            leak_node_id: net.node(leak_node).id.clone(),
            size_index,
            leak_size: size,
            time_index: t,
            hour,
            is_train,
            scenario_seed,
        });
    }
    Ok(PairBlock {
        class,
        size_index,
        warnings,
        states,
        meta,
    })
}
