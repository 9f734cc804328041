//! Deterministic parameter perturbation and sensor quantization.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::model::{Network, PipeSpec};
use crate::sim::DemandPattern;

/// Uniform relative perturbation applied to selected physical quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncertaintySpec {
    /// Relative magnitude, e.g. 0.01 for +/-1%.
    pub level: f64,
    pub seed: u64,
    pub perturb_diameter: bool,
    pub perturb_roughness: bool,
    pub perturb_demand: bool,
}

impl UncertaintySpec {
    pub fn new(level: f64, seed: u64) -> Self {
        UncertaintySpec {
            level,
            seed,
            perturb_diameter: true,
            perturb_roughness: true,
            perturb_demand: true,
        }
    }
}

/// One RNG per (seed, domain, indices) triple, stable across platforms and
/// callers: the draw for a quantity never depends on evaluation order.
pub fn derive_rng(seed: u64, domain: &str, indices: &[u64]) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(domain.as_bytes());
    for &i in indices {
        hasher.update(i.to_le_bytes());
    }
    let digest = hasher.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(key)
}

fn draw(spec: &UncertaintySpec, domain: &str, index: u64) -> f64 {
    if spec.level == 0.0 {
        return 1.0;
    }
    let mut rng = derive_rng(spec.seed, domain, &[index]);
    1.0 + rng.gen_range(-spec.level..=spec.level)
}

/// Return a perturbed copy of the network and demand pattern; the originals
/// are untouched. Each targeted quantity x becomes `x * (1 + u)` with
/// `u ~ Uniform(-level, +level)` drawn from its own seeded generator.
pub fn apply_uncertainty(
    net: &Network,
    pattern: &DemandPattern,
    spec: &UncertaintySpec,
) -> Result<(Network, DemandPattern)> {
    let nodes = net.nodes().to_vec();
    let pipes = net
        .pipes()
        .iter()
        .enumerate()
        .map(|(k, p)| PipeSpec {
            id: p.id.clone(),
            from: net.node(p.source).id.clone(),
            to: net.node(p.sink).id.clone(),
            length: p.length,
            diameter: if spec.perturb_diameter {
                p.diameter * draw(spec, "diameter", k as u64)
            } else {
                p.diameter
            },
            roughness: if spec.perturb_roughness {
                p.roughness * draw(spec, "roughness", k as u64)
            } else {
                p.roughness
            },
        })
        .collect();
    let multipliers = pattern
        .multipliers()
        .iter()
        .enumerate()
        .map(|(h, &m)| {
            if spec.perturb_demand {
                m * draw(spec, "demand", h as u64)
            } else {
                m
            }
        })
        .collect();
    Ok((Network::new(nodes, pipes)?, DemandPattern::new(multipliers)?))
}

/// Round a head reading to the nearest centimeter, half away from zero.
pub fn quantize_sensor(head: f64) -> f64 {
    (head * 100.0).round() / 100.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn zero_level_is_identity() {
        let net = fixtures::grid3x3();
        let pat = fixtures::diurnal_pattern();
        let (net2, pat2) = apply_uncertainty(&net, &pat, &UncertaintySpec::new(0.0, 7)).unwrap();
        assert_eq!(net.pipes(), net2.pipes());
        assert_eq!(pat, pat2);
    }

    #[test]
    fn same_seed_same_perturbation() {
        let net = fixtures::grid3x3();
        let pat = fixtures::diurnal_pattern();
        let spec = UncertaintySpec::new(0.01, 42);
        let (a, pa) = apply_uncertainty(&net, &pat, &spec).unwrap();
        let (b, pb) = apply_uncertainty(&net, &pat, &spec).unwrap();
        assert_eq!(a.pipes(), b.pipes());
        assert_eq!(pa, pb);
        let (c, _) = apply_uncertainty(&net, &pat, &UncertaintySpec::new(0.01, 43)).unwrap();
        assert_ne!(a.pipes(), c.pipes());
    }

    #[test]
    fn perturbation_respects_bound() {
        let net = fixtures::grid3x3();
        let pat = fixtures::diurnal_pattern();
        let (net2, pat2) = apply_uncertainty(&net, &pat, &UncertaintySpec::new(0.01, 5)).unwrap();
        for (p, q) in net.pipes().iter().zip(net2.pipes()) {
            assert!((q.diameter / p.diameter - 1.0).abs() <= 0.01 + 1e-12);
            assert!((q.roughness / p.roughness - 1.0).abs() <= 0.01 + 1e-12);
            assert_eq!(p.length, q.length);
        }
        for (m, w) in pat.multipliers().iter().zip(pat2.multipliers()) {
            assert!((w / m - 1.0).abs() <= 0.01 + 1e-12);
        }
    }

    #[test]
    fn quantize_examples() {
        assert_eq!(quantize_sensor(49.996), 50.00);
        assert_eq!(quantize_sensor(49.994), 49.99);
        assert_eq!(quantize_sensor(12.34), 12.34);
        assert_eq!(quantize_sensor(-49.996), -50.00);
    }

    proptest::proptest! {
        #[test]
        fn quantize_is_idempotent_and_close(x in -1000.0f64..1000.0) {
            let q = quantize_sensor(x);
            proptest::prop_assert!((q - x).abs() <= 0.005 + 1e-9);
            proptest::prop_assert_eq!(quantize_sensor(q), q);
        }
    }
}
