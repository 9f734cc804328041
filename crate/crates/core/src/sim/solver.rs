//! Damped-Newton steady-state solver for Hazen-Williams networks with
//! pressure-driven leak emitters.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{Network, HW_EXPONENT};

/// Hazen-Williams pipe flow from node i toward node j:
/// `f = sigma^0.54 * sign(psi_i - psi_j) * |psi_i - psi_j|^0.54`.
pub fn hw_flow(sigma: f64, psi_i: f64, psi_j: f64) -> f64 {
    let dh = psi_i - psi_j;
    sigma.powf(HW_EXPONENT) * dh.signum() * dh.abs().powf(HW_EXPONENT)
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Maximum junction mass-balance residual [m3/s].
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Head-difference floor for Jacobian entries [m], shared with the
    /// analytical weight generation.
    pub eps_delta: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tolerance: 1e-8,
            max_iterations: 200,
            eps_delta: 1e-6,
        }
    }
}

/// Leak emitter resolved to a coefficient: flow = coefficient * sqrt(pressure).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmitterLeak {
    pub node: usize,
    pub coefficient: f64,
}

/// A converged steady state.
#[derive(Debug, Clone)]
pub struct HydraulicScenario {
    /// Hydraulic head per node [m]; reservoir entries equal their fixed head.
    pub heads: DVector<f64>,
    /// Flow per pipe in declared source->sink orientation [m3/s].
    pub flows: DVector<f64>,
    /// Pressure head per node [m]: head minus elevation.
    pub pressures: DVector<f64>,
    /// Demands used for this solve [m3/s per node].
    pub demands: DVector<f64>,
    pub leak: Option<EmitterLeak>,
    /// Realized leak outflow [m3/s].
    pub leak_flow: f64,
    pub iterations: usize,
    pub warnings: Vec<String>,
}

impl HydraulicScenario {
    /// Total inflow from reservoirs [m3/s].
    pub fn reservoir_inflow(&self, net: &Network) -> f64 {
        let mut total = 0.0;
        for (k, pipe) in net.pipes().iter().enumerate() {
            let src_res = !net.node(pipe.source).is_junction();
            let snk_res = !net.node(pipe.sink).is_junction();
            if src_res && !snk_res {
                total += self.flows[k];
            } else if snk_res && !src_res {
                total -= self.flows[k];
            }
        }
        total
    }

    /// Worst junction mass-balance residual [m3/s].
    pub fn max_imbalance(&self, net: &Network) -> f64 {
        let sigma = net.conductivities();
        let mut worst: f64 = 0.0;
        for &i in &net.junction_indices() {
            let mut f = self.demands[i];
            if let Some(leak) = self.leak {
                if leak.node == i {
                    f += leak.coefficient * self.pressures[i].max(0.0).sqrt();
                }
            }
            for &(j, k) in net.neighbors(i) {
                f += hw_flow(sigma[k], self.heads[i], self.heads[j]);
            }
            worst = worst.max(f.abs());
        }
        worst
    }
}

struct Assembled<'a> {
    net: &'a Network,
    sigma54: Vec<f64>,
    junctions: Vec<usize>,
    jpos: Vec<usize>,
    demands: &'a [f64],
    leak: Option<EmitterLeak>,
    eps_delta: f64,
}

impl Assembled<'_> {
    fn residual(&self, heads: &DVector<f64>, out: &mut DVector<f64>) {
        for (row, &i) in self.junctions.iter().enumerate() {
            let mut f = self.demands[i];
            if let Some(leak) = self.leak {
                if leak.node == i {
                    let rho = heads[i] - self.net.node(i).elevation;
                    f += leak.coefficient * rho.max(0.0).sqrt();
                }
            }
            for &(j, k) in self.net.neighbors(i) {
                let dh = heads[i] - heads[j];
                f += self.sigma54[k] * dh.signum() * dh.abs().powf(HW_EXPONENT);
            }
            out[row] = f;
        }
    }

    fn jacobian(&self, heads: &DVector<f64>, floor: f64, out: &mut DMatrix<f64>) {
        out.fill(0.0);
        for (row, &i) in self.junctions.iter().enumerate() {
            if let Some(leak) = self.leak {
                if leak.node == i {
                    let rho = (heads[i] - self.net.node(i).elevation).max(self.eps_delta);
                    out[(row, row)] += 0.5 * leak.coefficient / rho.sqrt();
                }
            }
            for &(j, k) in self.net.neighbors(i) {
                let dh = (heads[i] - heads[j]).abs().max(floor);
                let g = HW_EXPONENT * self.sigma54[k] * dh.powf(HW_EXPONENT - 1.0);
                out[(row, row)] += g;
                if self.net.node(j).is_junction() {
                    out[(row, self.jpos[j])] -= g;
                }
            }
        }
    }
}

/// Solve junction heads so that every junction balances inflow, demand and
/// leak outflow, with reservoir heads held fixed.
///
/// Damped Newton with an L2 merit line search. The Jacobian head-difference
/// floor starts at `eps_delta` and drops to 1e-12 after 60 iterations: near
/// a solution whose pipe head differences sit below `eps_delta` the fixed
/// floor underestimates the local slope by an unbounded factor and the
/// damped iteration degenerates to a crawl, so late iterations use the slope
/// at the current iterate instead.
pub fn steady_state_solve(
    net: &Network,
    demands: &[f64],
    leak: Option<EmitterLeak>,
    opts: &SolverOptions,
) -> Result<HydraulicScenario> {
    let n = net.node_count();
    if demands.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: demands.len(),
        });
    }
    if let Some(l) = leak {
        if !net.node(l.node).is_junction() {
            return Err(Error::Config(format!(
                "leak node {:?} is not a junction",
                net.node(l.node).id
            )));
        }
    }
    let junctions = net.junction_indices();
    let mut jpos = vec![usize::MAX; n];
    for (row, &i) in junctions.iter().enumerate() {
        jpos[i] = row;
    }
    let sigma54: Vec<f64> = net
        .conductivities()
        .iter()
        .map(|s| s.powf(HW_EXPONENT))
        .collect();

    let max_res_head = net
        .reservoir_indices()
        .iter()
        .map(|&r| net.node(r).fixed_head().unwrap())
        .fold(f64::NEG_INFINITY, f64::max);

    let mut heads = DVector::zeros(n);
    for i in 0..n {
        heads[i] = match net.node(i).fixed_head() {
            Some(h) => h,
            None => max_res_head - 1.0,
        };
    }

    let asm = Assembled {
        net,
        sigma54,
        junctions: junctions.clone(),
        jpos,
        demands,
        leak,
        eps_delta: opts.eps_delta,
    };

    let nj = junctions.len();
    let mut residual = DVector::zeros(nj);
    let mut trial_res = DVector::zeros(nj);
    let mut jac = DMatrix::zeros(nj, nj);
    let mut iterations = 0;

    for iter in 0..opts.max_iterations {
        iterations = iter;
        asm.residual(&heads, &mut residual);
        if residual.amax() < opts.tolerance {
            return Ok(finish(net, heads, demands, leak, iter, opts));
        }
        let floor = if iter < 60 { opts.eps_delta } else { 1e-12 };
        asm.jacobian(&heads, floor, &mut jac);
        let step = match jac.clone().cholesky() {
            Some(ch) => ch.solve(&residual),
            None => jac
                .clone()
                .lu()
                .solve(&residual)
                .ok_or_else(|| Error::NoConvergence {
                    iterations: iter,
                    residual: residual.amax(),
                })?,
        };
        // backtracking on the L2 merit; take the smallest step if none improves
        let merit0 = residual.norm();
        let mut t = 1.0;
        for _ in 0..40 {
            let mut trial = heads.clone();
            for (row, &i) in junctions.iter().enumerate() {
                trial[i] -= t * step[row];
            }
            asm.residual(&trial, &mut trial_res);
            if trial_res.norm() <= merit0 * (1.0 - 1e-4 * t) {
                break;
            }
            t *= 0.5;
        }
        for (row, &i) in junctions.iter().enumerate() {
            heads[i] -= t * step[row];
        }
    }

    asm.residual(&heads, &mut residual);
    if residual.amax() < opts.tolerance {
        return Ok(finish(net, heads, demands, leak, iterations, opts));
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iterations,
        residual: residual.amax(),
    })
}

fn finish(
    net: &Network,
    heads: DVector<f64>,
    demands: &[f64],
    leak: Option<EmitterLeak>,
    iterations: usize,
    _opts: &SolverOptions,
) -> HydraulicScenario {
    let sigma = net.conductivities();
    let flows = DVector::from_fn(net.pipe_count(), |k, _| {
        let p = net.pipe(k);
        hw_flow(sigma[k], heads[p.source], heads[p.sink])
    });
    let pressures = DVector::from_fn(net.node_count(), |i, _| heads[i] - net.node(i).elevation);
    let mut warnings = Vec::new();
    let mut leak_flow = 0.0;
    if let Some(l) = leak {
        let rho = pressures[l.node];
        if rho < 0.0 {
            warnings.push(format!(
                "negative pressure {rho:.3} m at emitter node {:?}: leak flow treated as 0",
                net.node(l.node).id
            ));
        } else {
            leak_flow = l.coefficient * rho.sqrt();
        }
    }
    HydraulicScenario {
        heads,
        flows,
        pressures,
        demands: DVector::from_column_slice(demands),
        leak,
        leak_flow,
        iterations,
        warnings,
    }
}

/// Find the emitter coefficient whose re-simulated leak flow matches
/// `target_flow` to 1e-6 m3/s, by bracket growth plus bisection.
pub fn calibrate_emitter(
    net: &Network,
    demands: &[f64],
    node: usize,
    target_flow: f64,
    opts: &SolverOptions,
) -> Result<f64> {
    const FLOW_TOL: f64 = 1e-6;
    if target_flow < 0.0 {
        return Err(Error::TargetInfeasible {
            target: target_flow,
            reason: "negative target flow".into(),
        });
    }
    if target_flow == 0.0 {
        return Ok(0.0);
    }
    let realized = |eps: f64| -> Result<f64> {
        let scen = steady_state_solve(net, demands, Some(EmitterLeak { node, coefficient: eps }), opts)?;
        Ok(scen.leak_flow)
    };

    let mut hi = 1e-4;
    let mut f_hi = realized(hi)?;
    while f_hi < target_flow {
        if f_hi <= 0.0 || hi > 1e3 {
            return Err(Error::TargetInfeasible {
                target: target_flow,
                reason: format!("pressure collapses before target is reached (flow {f_hi:.3e} at coefficient {hi:.3e})"),
            });
        }
        hi *= 2.0;
        f_hi = realized(hi)?;
    }
    let mut lo = 0.0;
    let mut mid = hi;
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        let f_mid = realized(mid)?;
        if (f_mid - target_flow).abs() <= FLOW_TOL {
            return Ok(mid);
        }
        if f_mid < target_flow {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < f64::EPSILON * hi.max(1.0) {
            break;
        }
    }
    let f_mid = realized(mid)?;
    if (f_mid - target_flow).abs() <= FLOW_TOL {
        Ok(mid)
    } else {
        Err(Error::NoConvergence {
            iterations: 200,
            residual: (f_mid - target_flow).abs(),
        })
    }
}
