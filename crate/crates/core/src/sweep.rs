//! Capacity bound of neighbouring lattice maps as a function of the coupling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::Objective;
use crate::significance::SurrogateConfig;
use crate::simulate::{generate_lattice_maps, quantize_extrema, Boundary, LatticeConfig, MapKind};
use crate::structure::classify::{measure_relation_with, ClassifierConfig, RelationEstimate};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSweepConfig {
    pub epsilons: Vec<f64>,
    pub n_maps: usize,
    pub boundary: Boundary,
    pub n_samples: usize,
    pub transient: usize,
    pub seed: u64,
    /// The forward relation is `source_map → source_map + 1`.
    pub source_map: usize,
    pub ell: usize,
    pub m_len: usize,
    pub tau_min: usize,
    pub tau_max: usize,
    pub objective: Objective,
    pub surrogate: SurrogateConfig,
}

impl Default for EpsilonSweepConfig {
    fn default() -> Self {
        Self {
            epsilons: epsilon_grid(0.0, 1.0, 0.02).expect("valid grid"),
            n_maps: 10,
            boundary: Boundary::Periodic,
            n_samples: 100_000,
            transient: 10_000,
            seed: 1,
            source_map: 0,
            ell: 1,
            m_len: 1,
            tau_min: 1,
            tau_max: 20,
            objective: Objective::CapacityBound,
            surrogate: SurrogateConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub forward: RelationEstimate,
    pub reverse: RelationEstimate,
}

/// `start, start + step, …` up to `stop` inclusive, each value rounded to
/// twelve decimals so that repeated addition does not drift.
pub fn epsilon_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !start.is_finite() || !stop.is_finite() || stop < start {
        return Err(Error::Config(format!("invalid grid {start}..={stop} step {step}")));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n)
        .map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

/// Measure both directions between neighbouring maps at every coupling.
/// Rows come back in the order of `cfg.epsilons`.
pub fn run_sweep(cfg: &EpsilonSweepConfig) -> Result<Vec<SweepRow>> {
    if cfg.source_map + 1 >= cfg.n_maps {
        return Err(Error::Config(format!(
            "source map {} has no successor in a lattice of {}",
            cfg.source_map, cfg.n_maps
        )));
    }
    let classifier = ClassifierConfig {
        ell: cfg.ell,
        m_len: cfg.m_len,
        tau_min: cfg.tau_min,
        tau_max: cfg.tau_max,
        objective: cfg.objective,
        surrogate: cfg.surrogate.clone(),
        ..ClassifierConfig::default()
    };
    classifier.validate()?;
    crate::par_map(&cfg.epsilons, |&epsilon| sweep_point(cfg, &classifier, epsilon))
        .into_iter()
        .collect()
}

fn sweep_point(cfg: &EpsilonSweepConfig, classifier: &ClassifierConfig, epsilon: f64) -> Result<SweepRow> {
    let lattice = LatticeConfig {
        n_maps: cfg.n_maps,
        epsilon,
        n_samples: cfg.n_samples,
        transient: cfg.transient,
        seed: cfg.seed,
        map_kind: MapKind::Ulam,
        boundary: cfg.boundary,
    };
    let (a, b) = (cfg.source_map, cfg.source_map + 1);
    let series = generate_lattice_maps(&lattice, &[a, b])?;
    let up = quantize_extrema(&series[0])?;
    let down = quantize_extrema(&series[1])?;
    let (name_a, name_b) = (format!("X{}", a + 1), format!("X{}", b + 1));
    // every ε shares the surrogate seeds; the lattice differs anyway
    let forward = measure_relation_with(&name_a, &name_b, &up, &down, 2, 2, classifier)?;
    let reverse = measure_relation_with(&name_b, &name_a, &down, &up, 2, 2, classifier)?;
    Ok(SweepRow {
        epsilon,
        forward,
        reverse,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_shapes() {
        assert_eq!(epsilon_grid(0.0, 1.0, 0.05).unwrap().len(), 21);
        let g = epsilon_grid(0.0, 1.0, 0.02).unwrap();
        assert_eq!(g.len(), 51);
        assert_eq!(g[9], 0.18);
        assert_eq!(g[50], 1.0);
        assert!(epsilon_grid(0.0, 1.0, 0.0).is_err());
        assert!(epsilon_grid(1.0, 0.0, 0.1).is_err());
    }

    #[test]
    fn small_sweep_runs_in_order() {
        let cfg = EpsilonSweepConfig {
            epsilons: vec![0.5, 0.0],
            n_maps: 3,
            n_samples: 3000,
            transient: 100,
            tau_max: 3,
            surrogate: SurrogateConfig {
                n_surrogates: 19,
                alpha: 0.05,
                ..SurrogateConfig::default()
            },
            ..EpsilonSweepConfig::default()
        };
        let rows = run_sweep(&cfg).unwrap();
        assert_eq!(rows.iter().map(|r| r.epsilon).collect::<Vec<_>>(), vec![0.5, 0.0]);
        assert_eq!(rows[0].forward.source, "X1");
        assert_eq!(rows[0].reverse.source, "X2");
    }
}
