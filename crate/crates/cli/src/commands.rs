use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use tensor_te::capacity::{blahut_arimoto, CapacityResult};
use tensor_te::prob::TransitionTensor;
use tensor_te::significance::SurrogateConfig;
use tensor_te::simulate::{generate_lattice, generate_triad, GroundTruth, LatticeConfig, MapKind, TriadConfig};
use tensor_te::sweep::{epsilon_grid, run_sweep, EpsilonSweepConfig};

use crate::error::{CliError, Result};
use crate::io::{csv_writer, float, open_output, write_columns, write_json};
use crate::{CapacityArgs, SimulateArgs, SweepArgs};

/// Sidecar written next to a simulated triad.
#[derive(Serialize)]
struct TruthFile<'a> {
    config: &'a TriadConfig,
    truth: &'a GroundTruth,
}

fn truth_path(output: &Path) -> PathBuf {
    let stem = output.file_stem().map_or_else(|| "triad".into(), |s| s.to_string_lossy().into_owned());
    output.with_file_name(format!("{stem}.truth.json"))
}

pub fn simulate(a: &SimulateArgs) -> Result<()> {
    let Some(structure) = a.triad else {
        let cfg = LatticeConfig {
            n_maps: a.maps,
            epsilon: a.epsilon,
            n_samples: a.n,
            transient: a.transient,
            seed: a.seed,
            map_kind: MapKind::Ulam,
            boundary: a.boundary.into(),
        };
        let series = generate_lattice(&cfg)?;
        let names: Vec<String> = (1..=series.len()).map(|k| format!("X{k}")).collect();
        return write_columns(a.output.as_deref(), &names, &series, |v| float(*v));
    };
    let output = a
        .output
        .as_deref()
        .ok_or_else(|| CliError::Usage("--triad needs --output for the CSV and its truth sidecar".into()))?;
    let mut cfg = TriadConfig::new(structure.into()).with_seed(a.seed);
    cfg.noise = [a.noise; 2];
    cfg.n_samples = a.n;
    if let Some(d) = &a.delays {
        cfg.delays = [d[0], d[1]];
    }
    let triad = generate_triad(&cfg)?;
    write_columns(Some(output), &triad.names, &triad.series, |s| s.to_string())?;
    write_json(
        Some(&truth_path(output)),
        &TruthFile {
            config: &cfg,
            truth: &triad.truth,
        },
    )
}

/// `start:stop:step` or `a,b,c`.
pub fn parse_epsilons(spec: &str) -> Result<Vec<f64>> {
    let bad = || CliError::Usage(format!("bad coupling grid {spec:?}; use start:stop:step or a comma list"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let [start, stop, step] = parts[..] else { return Err(bad()) };
        return Ok(epsilon_grid(num(start)?, num(stop)?, num(step)?)?);
    }
    let values = spec.split(',').map(num).collect::<Result<Vec<_>>>()?;
    if values.is_empty() {
        return Err(bad());
    }
    Ok(values)
}

pub fn sweep(a: &SweepArgs) -> Result<()> {
    let cfg = EpsilonSweepConfig {
        epsilons: parse_epsilons(&a.epsilon)?,
        n_maps: a.maps,
        boundary: a.boundary.into(),
        n_samples: a.n,
        transient: a.transient,
        seed: a.lattice_seed,
        source_map: 0,
        ell: a.embedding.ell,
        m_len: a.embedding.m,
        tau_min: a.embedding.tau_min,
        tau_max: a.embedding.tau_max,
        objective: a.embedding.objective.into(),
        surrogate: SurrogateConfig {
            n_surrogates: a.surrogate.surrogates,
            method: a.surrogate.method.into(),
            seed: a.surrogate.seed,
            alpha: a.surrogate.alpha,
        },
    };
    let rows = run_sweep(&cfg)?;
    let shown = a.output.clone().unwrap_or_else(|| "<stdout>".into());
    let mut w = csv_writer(open_output(a.output.as_deref())?);
    let header = [
        "epsilon",
        "forward_bound_bits",
        "forward_p_value",
        "forward_tau",
        "forward_te_bits",
        "reverse_bound_bits",
        "reverse_p_value",
        "reverse_tau",
        "reverse_te_bits",
    ];
    let werr = |e: csv::Error| CliError::io(&shown, e.into());
    w.write_record(header).map_err(werr)?;
    for r in &rows {
        let (f, b) = (&r.forward, &r.reverse);
        w.write_record([
            float(r.epsilon),
            float(f.capacity_bound_bits),
            float(f.p_value),
            f.tau_star.to_string(),
            float(f.te_bits),
            float(b.capacity_bound_bits),
            float(b.p_value),
            b.tau_star.to_string(),
            float(b.te_bits),
        ])
        .map_err(werr)?;
    }
    w.flush().map_err(|e| CliError::io(&shown, e))?;
    let unconverged: Vec<String> = rows
        .iter()
        .flat_map(|r| [&r.forward, &r.reverse])
        .filter(|r| !r.converged)
        .map(|r| r.name())
        .collect();
    if unconverged.is_empty() {
        Ok(())
    } else {
        Err(CliError::NonConvergence(unconverged.join(", ")))
    }
}

/// Rows of a channel matrix; blank lines and `#` comments are skipped.
pub fn parse_matrix(path: &Path, text: &str) -> Result<Vec<Vec<f64>>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| CliError::Parse {
                path: path.to_path_buf(),
                message: format!("line {}: {e}", k + 1),
            })?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(CliError::Parse {
                    path: path.to_path_buf(),
                    message: format!("line {}: row {} has {} entries, expected {}", k + 1, rows.len(), row.len(), first.len()),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::Parse {
            path: path.to_path_buf(),
            message: "no matrix rows".into(),
        });
    }
    Ok(rows)
}

fn print_capacity(out: &mut dyn Write, r: &CapacityResult) -> std::io::Result<()> {
    writeln!(out, "capacity_bits: {}", float(r.capacity_bits))?;
    let p: Vec<String> = r.optimal_input.probs().iter().map(|&v| float(v)).collect();
    writeln!(out, "optimal_input: {}", p.join(" "))?;
    writeln!(out, "iterations: {}", r.iterations)?;
    writeln!(out, "gap_bound: {}", float(r.gap_bound))?;
    writeln!(out, "converged: {}", r.converged)?;
    out.flush()
}

pub fn capacity(a: &CapacityArgs) -> Result<()> {
    let text = std::fs::read_to_string(&a.input).map_err(|e| CliError::io(&a.input, e))?;
    let rows = parse_matrix(&a.input, &text)?;
    let channel = TransitionTensor::channel(rows)?;
    let result = blahut_arimoto(&channel, a.tol, a.max_iter)?;
    if a.json {
        write_json(None, &result)?;
    } else {
        let mut out = open_output(None)?;
        print_capacity(&mut out, &result).map_err(|e| CliError::io("<stdout>", e))?;
    }
    if result.converged {
        Ok(())
    } else {
        Err(CliError::NonConvergence(format!(
            "gap bound {} after {} iterations",
            result.gap_bound, result.iterations
        )))
    }
}
