//! Browser bindings for the demo page in `www/`.
//!
//! Each export takes plain numbers or text and returns a JSON string. The
//! `*_json` functions hold the logic and run natively as well.

use serde::Serialize;
use tensor_te::capacity::{blahut_arimoto, DEFAULT_MAX_ITER, DEFAULT_TOL};
use tensor_te::estimation::Objective;
use tensor_te::prob::TransitionTensor;
use tensor_te::significance::SurrogateConfig;
use tensor_te::simulate::{generate_triad, Boundary, TriadConfig, TriadStructure};
use tensor_te::structure::{analyze_triad, ClassifierConfig, Series};
use tensor_te::sweep::{epsilon_grid, run_sweep, EpsilonSweepConfig};
use wasm_bindgen::prelude::*;

type Result<T> = std::result::Result<T, String>;

fn json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

/// Rows on lines, entries separated by commas or whitespace.
fn parse_matrix(text: &str) -> Result<Vec<Vec<f64>>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .enumerate()
        .map(|(r, line)| {
            line.split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<f64>().map_err(|_| format!("row {r}: {s:?} is not a number")))
                .collect()
        })
        .collect()
}

pub fn channel_capacity_json(matrix: &str) -> Result<String> {
    let channel = TransitionTensor::channel(parse_matrix(matrix)?).map_err(|e| e.to_string())?;
    let result = blahut_arimoto(&channel, DEFAULT_TOL, DEFAULT_MAX_ITER).map_err(|e| e.to_string())?;
    json(&result)
}

#[derive(Serialize)]
struct SweepPoint {
    epsilon: f64,
    forward_bits: f64,
    forward_p: f64,
    forward_tau: usize,
    reverse_bits: f64,
    reverse_p: f64,
}

pub fn ulam_sweep_json(n_maps: usize, n_samples: usize, step: f64, tau_max: usize, seed: u64) -> Result<String> {
    let cfg = EpsilonSweepConfig {
        epsilons: epsilon_grid(0.0, 1.0, step).map_err(|e| e.to_string())?,
        n_maps,
        boundary: Boundary::Periodic,
        n_samples,
        transient: 1000,
        seed,
        tau_max,
        surrogate: SurrogateConfig {
            n_surrogates: 19,
            alpha: 0.05,
            ..SurrogateConfig::default()
        },
        ..EpsilonSweepConfig::default()
    };
    let rows = run_sweep(&cfg).map_err(|e| e.to_string())?;
    let points: Vec<SweepPoint> = rows
        .iter()
        .map(|r| SweepPoint {
            epsilon: r.epsilon,
            forward_bits: r.forward.capacity_bound_bits,
            forward_p: r.forward.p_value,
            forward_tau: r.forward.tau_star,
            reverse_bits: r.reverse.capacity_bound_bits,
            reverse_p: r.reverse.p_value,
        })
        .collect();
    json(&points)
}

pub fn classify_triad_json(structure: &str, noise: f64, n_samples: usize, seed: u64) -> Result<String> {
    let structure = match structure {
        "chain" => TriadStructure::Chain,
        "fork" => TriadStructure::Fork,
        "v-structure" => TriadStructure::VStructure,
        other => return Err(format!("unknown structure {other:?}")),
    };
    let mut tc = TriadConfig::new(structure).with_seed(seed);
    tc.noise = [noise; 2];
    tc.n_samples = n_samples;
    let triad = generate_triad(&tc).map_err(|e| e.to_string())?;
    let cfg = ClassifierConfig {
        tau_max: 4,
        objective: Objective::CapacityBound,
        surrogate: SurrogateConfig {
            n_surrogates: 99,
            seed,
            ..SurrogateConfig::default()
        },
        ..ClassifierConfig::default()
    };
    let s = |k: usize| Series {
        name: &triad.names[k],
        symbols: &triad.series[k],
    };
    let analysis = analyze_triad([s(0), s(1), s(2)], &cfg).map_err(|e| e.to_string())?;

    #[derive(Serialize)]
    struct Out<'a> {
        truth: &'a tensor_te::simulate::GroundTruth,
        analysis: &'a tensor_te::structure::TriadAnalysis,
    }
    json(&Out {
        truth: &triad.truth,
        analysis: &analysis,
    })
}

/// Capacity of a channel matrix typed into the page.
#[wasm_bindgen]
pub fn channel_capacity(matrix: &str) -> std::result::Result<String, JsError> {
    channel_capacity_json(matrix).map_err(|e| JsError::new(&e))
}

/// Forward and reverse capacity bound of a periodic Ulam lattice over a
/// coupling grid on `[0, 1]`.
#[wasm_bindgen]
pub fn ulam_sweep(n_maps: usize, n_samples: usize, step: f64, tau_max: usize, seed: u64) -> std::result::Result<String, JsError> {
    ulam_sweep_json(n_maps, n_samples, step, tau_max, seed).map_err(|e| JsError::new(&e))
}

/// Simulate a binary triad and classify it blind.
#[wasm_bindgen]
pub fn classify_simulated_triad(structure: &str, noise: f64, n_samples: usize, seed: u64) -> std::result::Result<String, JsError> {
    classify_triad_json(structure, noise, n_samples, seed).map_err(|e| JsError::new(&e))
}
