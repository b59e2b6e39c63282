use rayon::prelude::*;
use tensor_te::estimation::{infer_cardinality, Symbol};
use tensor_te::simulate::quantize_extrema;
use tensor_te::structure::{classify_triad, measure_relation, ClassifierConfig, Series};
use tensor_te::significance::SurrogateConfig;

use crate::error::{CliError, Result};
use crate::io::{parse_reals, parse_symbols, read_csv, write_json, Table};
use crate::report::{RelationReport, Report, ReportConfig, SeriesInfo, SeriesKind, SCHEMA_VERSION};
use crate::{AnalyzeArgs, InputKind};

fn classifier_config(a: &AnalyzeArgs) -> ClassifierConfig {
    ClassifierConfig {
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
        noiseless_tol: a.noiseless_tol,
        delay_slack: a.delay_slack,
        dpi_tol: a.dpi_tol,
        capacity_tol: a.capacity_tol,
    }
}

fn select(table: Table, wanted: Option<&[String]>) -> Result<Vec<(String, Vec<String>)>> {
    let Some(wanted) = wanted else {
        return Ok(table.names.into_iter().zip(table.columns).collect());
    };
    let mut out = Vec::with_capacity(wanted.len());
    for name in wanted {
        let k = table
            .names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| CliError::Usage(format!("no column named {name:?}")))?;
        if out.iter().any(|(n, _): &(String, _)| n == name) {
            return Err(CliError::Usage(format!("column {name:?} selected twice")));
        }
        out.push((name.clone(), table.columns[k].clone()));
    }
    Ok(out)
}

/// Turn raw columns into aligned symbol series. Quantization drops the first
/// and last sample, so symbol columns are trimmed the same way whenever any
/// column is quantized.
fn symbolize(
    path: &std::path::Path,
    columns: Vec<(String, Vec<String>)>,
    kind: InputKind,
) -> Result<Vec<(String, SeriesKind, Vec<Symbol>)>> {
    let mut parsed = Vec::with_capacity(columns.len());
    for (name, cells) in columns {
        let symbols = match kind {
            InputKind::Real => None,
            InputKind::Auto => parse_symbols(&cells),
            InputKind::Symbols => Some(parse_symbols(&cells).ok_or_else(|| CliError::Parse {
                path: path.to_path_buf(),
                message: format!("column {name} is not all nonnegative integers"),
            })?),
        };
        match symbols {
            Some(s) => parsed.push((name, SeriesKind::Symbols, s)),
            None => {
                let reals = parse_reals(path, &name, &cells)?;
                parsed.push((name, SeriesKind::Quantized, quantize_extrema(&reals)?));
            }
        }
    }
    if parsed.iter().any(|(_, k, _)| *k == SeriesKind::Quantized) {
        for (_, k, s) in &mut parsed {
            if *k == SeriesKind::Symbols {
                let n = s.len();
                *s = if n >= 2 { s[1..n - 1].to_vec() } else { Vec::new() };
            }
        }
    }
    Ok(parsed)
}

pub fn run(a: &AnalyzeArgs) -> Result<()> {
    let cfg = classifier_config(a);
    cfg.validate()?;
    let table = read_csv(&a.input)?;
    let columns = select(table, a.columns.as_deref())?;
    if columns.len() < 2 {
        return Err(CliError::Usage(format!("need at least two columns, got {}", columns.len())));
    }
    let series = symbolize(&a.input, columns, a.input_kind)?;

    let mut warnings = Vec::new();
    let infos: Vec<SeriesInfo> = series
        .iter()
        .map(|(name, kind, s)| {
            let cardinality = infer_cardinality(s);
            if cardinality < 2 {
                warnings.push(format!("series {name} is constant"));
            }
            SeriesInfo {
                name: name.clone(),
                kind: *kind,
                cardinality,
                length: s.len(),
            }
        })
        .collect();

    let pairs: Vec<(usize, usize)> = (0..series.len())
        .flat_map(|a| (0..series.len()).filter(move |&b| b != a).map(move |b| (a, b)))
        .collect();
    let relations = pairs
        .par_iter()
        .map(|&(x, y)| measure_relation(&series[x].0, &series[y].0, &series[x].2, &series[y].2, &cfg))
        .collect::<std::result::Result<Vec<_>, _>>()?;

    let triad = if series.len() == 3 {
        let s = |k: usize| Series {
            name: &series[k].0,
            symbols: &series[k].2,
        };
        Some(classify_triad([s(0), s(1), s(2)], &relations, &cfg)?)
    } else {
        None
    };

    let unconverged: Vec<String> = relations.iter().filter(|r| !r.converged).map(|r| r.name()).collect();
    for name in &unconverged {
        warnings.push(format!("capacity iteration did not converge for {name}"));
    }

    let report = Report {
        schema_version: SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_owned(),
        config: ReportConfig {
            input: a.input.display().to_string(),
            input_kind: format!("{:?}", a.input_kind).to_lowercase(),
            ell: cfg.ell,
            m_len: cfg.m_len,
            tau_min: cfg.tau_min,
            tau_max: cfg.tau_max,
            objective: cfg.objective,
            n_surrogates: cfg.surrogate.n_surrogates,
            surrogate_method: cfg.surrogate.method,
            alpha: cfg.surrogate.alpha,
            seed: cfg.surrogate.seed,
            noiseless_tol: cfg.noiseless_tol,
            dpi_tol: cfg.dpi_tol,
            delay_slack: cfg.delay_slack,
            capacity_tol: cfg.capacity_tol,
        },
        series: infos,
        relations: relations
            .iter()
            .map(|r| RelationReport::new(r, cfg.surrogate.alpha))
            .collect(),
        triad,
        warnings,
    };
    write_json(a.output.as_deref(), &report)?;
    if unconverged.is_empty() {
        Ok(())
    } else {
        Err(CliError::NonConvergence(unconverged.join(", ")))
    }
}
