//! Steady-state hydraulic simulation and scenario dataset generation.

mod dataset;
mod solver;
mod uncertainty;

pub use dataset::{generate_dataset, ColumnMeta, Dataset, DatasetConfig};
pub use solver::{
    calibrate_emitter, hw_flow, steady_state_solve, EmitterLeak, HydraulicScenario, SolverOptions,
};
pub use uncertainty::{apply_uncertainty, derive_rng, quantize_sensor, UncertaintySpec};

use crate::error::{Error, Result};

/// Hourly demand multipliers applied to every junction's base demand.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandPattern {
    multipliers: Vec<f64>,
}

impl DemandPattern {
    pub fn new(multipliers: Vec<f64>) -> Result<Self> {
        if multipliers.is_empty() {
            return Err(Error::Config("demand pattern is empty".into()));
        }
        if multipliers.iter().any(|&m| !(m > 0.0) || !m.is_finite()) {
            return Err(Error::Config(
                "demand pattern multipliers must be positive".into(),
            ));
        }
        Ok(DemandPattern { multipliers })
    }

    pub fn constant() -> Self {
        DemandPattern {
            multipliers: vec![1.0],
        }
    }

    pub fn len(&self) -> usize {
        self.multipliers.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn multipliers(&self) -> &[f64] {
        &self.multipliers
    }

    pub fn multiplier(&self, hour: usize) -> f64 {
        self.multipliers[hour % self.multipliers.len()]
    }

    /// The hour sampled for time instant `t` out of `n_t`: instants are
    /// spread evenly over the profile rather than packed at its start.
    pub fn hour_for_instant(&self, t: usize, n_t: usize) -> usize {
        (t * self.multipliers.len() / n_t.max(1)) % self.multipliers.len()
    }
}

/// One leak to simulate: either an emitter coefficient (m3/s per sqrt(m)) or
/// a target flow (m3/s) to be matched by emitter calibration.
#[derive(Debug, Clone, PartialEq)]
pub enum LeakSpec {
    Emitter { node: usize, coefficient: f64 },
    TargetFlow { node: usize, flow: f64 },
}

impl LeakSpec {
    pub fn node(&self) -> usize {
        match *self {
            LeakSpec::Emitter { node, .. } | LeakSpec::TargetFlow { node, .. } => node,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pattern_rejects_nonpositive() {
        assert!(DemandPattern::new(vec![1.0, 0.0]).is_err());
        assert!(DemandPattern::new(vec![]).is_err());
    }

    #[test]
    fn hour_striding_spreads_instants() {
        let p = crate::fixtures::diurnal_pattern();
        let hours: Vec<usize> = (0..4).map(|t| p.hour_for_instant(t, 4)).collect();
        assert_eq!(hours, vec![0, 6, 12, 18]);
        let hours: Vec<usize> = (0..24).map(|t| p.hour_for_instant(t, 24)).collect();
        assert_eq!(hours, (0..24).collect::<Vec<_>>());
    }
}
