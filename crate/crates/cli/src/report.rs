//! The JSON document written by `tensor-te analyze`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use tensor_te::estimation::Objective;
use tensor_te::significance::SurrogateMethod;
use tensor_te::structure::{RelationEstimate, TriadVerdict};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub schema_version: u32,
    pub tool_version: String,
    pub config: ReportConfig,
    pub series: Vec<SeriesInfo>,
    pub relations: Vec<RelationReport>,
    /// Present when exactly three series were analyzed.
    pub triad: Option<TriadVerdict>,
    pub warnings: Vec<String>,
}

/// Everything needed to rerun the analysis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportConfig {
    pub input: String,
    pub input_kind: String,
    pub ell: usize,
    pub m_len: usize,
    pub tau_min: usize,
    pub tau_max: usize,
    pub objective: Objective,
    pub n_surrogates: usize,
    pub surrogate_method: SurrogateMethod,
    pub alpha: f64,
    pub seed: u64,
    pub noiseless_tol: f64,
    pub dpi_tol: f64,
    pub delay_slack: i64,
    pub capacity_tol: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesKind {
    Symbols,
    /// Real values quantized by local extrema.
    Quantized,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesInfo {
    pub name: String,
    pub kind: SeriesKind,
    pub cardinality: usize,
    /// Symbols after quantization and alignment.
    pub length: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationReport {
    pub source: String,
    pub destination: String,
    pub tau_star: usize,
    pub te_bits: f64,
    pub capacity_bound_bits: f64,
    pub p_value: f64,
    pub significant: bool,
    pub converged: bool,
    pub null_interval: [f64; 2],
    pub curve: BTreeMap<usize, f64>,
}

impl RelationReport {
    pub fn new(r: &RelationEstimate, alpha: f64) -> Self {
        Self {
            source: r.source.clone(),
            destination: r.destination.clone(),
            tau_star: r.tau_star,
            te_bits: r.te_bits,
            capacity_bound_bits: r.capacity_bound_bits,
            p_value: r.p_value,
            significant: r.is_significant(alpha),
            converged: r.converged,
            null_interval: r.null_interval,
            curve: r.curve.clone(),
        }
    }
}
