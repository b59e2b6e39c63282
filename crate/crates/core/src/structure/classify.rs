//! Chain / fork / triangle classification of three series.
//!
//! The classifier works on the six directed relations of a triad:
//!
//! 1. relations with `p <= alpha` form a directed graph;
//! 2. a transitive three-edge graph fixes the roles source `X`, middle `Y`
//!    and sink `Z`, and both `X → Y → Z` and `Y ← X → Z` are candidates;
//! 3. the chain and fork residuals are tested against parametric bootstraps
//!    of their own hypotheses;
//! 4. if both survive, `Ā` is checked for noiselessness, and otherwise the
//!    capacity bounds `γ = C(X → Z)` and `β = C(Y → Z)` are compared;
//! 5. delay additivity decides whether the verdict is confirmed or rests on
//!    the tensor relations alone, which are necessary but not sufficient.
//!
//! Roles are assigned by series name, so permuting the input order permutes
//! nothing in the verdict.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::triad::{TriadDelays, TriadSamples};
use super::{
    chain_residual, delay_additivity_check, dpi_check, fork_residual, noiseless_deviation, DelayOutcome, DpiOutcome,
    Hypothesis,
};
use crate::capacity::{bound_from_counts, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::estimation::{
    check_symbols, count_pair, delay_scan_with, infer_cardinality, te_from_counts, EmbeddingSpec, Objective,
    SubchannelEstimate, Symbol,
};
use crate::prob::Alphabet;
use crate::significance::{
    name_seed, p_value, quantile, residual_null_distribution, scan_null_distribution_with, SurrogateConfig,
};

/// Residuals below this are float noise on an exact zero.
const RESIDUAL_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    pub ell: usize,
    pub m_len: usize,
    pub tau_min: usize,
    pub tau_max: usize,
    /// Statistic maximized over the delay and tested for significance.
    pub objective: Objective,
    pub surrogate: SurrogateConfig,
    /// Allowed deviation of `Ā‡Ā` and `ĀĀ‡` from the identity.
    pub noiseless_tol: f64,
    pub delay_slack: i64,
    /// Bits of slack in the transfer-entropy DPI.
    pub dpi_tol: f64,
    pub capacity_tol: f64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            ell: 1,
            m_len: 1,
            tau_min: 1,
            tau_max: 20,
            objective: Objective::CapacityBound,
            surrogate: SurrogateConfig::default(),
            noiseless_tol: 0.02,
            delay_slack: 0,
            dpi_tol: 0.01,
            capacity_tol: DEFAULT_TOL,
        }
    }
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<()> {
        EmbeddingSpec::new(self.ell, self.m_len, self.tau_min)?;
        if self.tau_min > self.tau_max {
            return Err(Error::Config(format!(
                "delay range {}..={} is empty",
                self.tau_min, self.tau_max
            )));
        }
        if !(self.noiseless_tol >= 0.0 && self.dpi_tol >= 0.0 && self.capacity_tol > 0.0) {
            return Err(Error::Config("tolerances must be nonnegative".into()));
        }
        if self.delay_slack < 0 {
            return Err(Error::Config("delay slack must be nonnegative".into()));
        }
        self.surrogate.validate()
    }

    fn base_spec(&self) -> EmbeddingSpec {
        EmbeddingSpec::new(self.ell, self.m_len, self.tau_min).expect("validated embedding")
    }
}

/// One directed relation measured at its optimal delay.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelationEstimate {
    pub source: String,
    pub destination: String,
    pub tau_star: usize,
    pub te_bits: f64,
    pub capacity_bound_bits: f64,
    pub p_value: f64,
    /// Whether every subchannel capacity at `tau_star` converged.
    pub converged: bool,
    /// Quantiles `alpha/2` and `1 - alpha/2` of the delay-maximized null.
    pub null_interval: [f64; 2],
    /// Objective value per delay.
    pub curve: BTreeMap<usize, f64>,
    #[serde(skip)]
    pub tensors: Option<SubchannelEstimate>,
}

impl RelationEstimate {
    pub fn name(&self) -> String {
        relation_name(&self.source, &self.destination)
    }

    pub fn is_significant(&self, alpha: f64) -> bool {
        self.p_value <= alpha
    }
}

fn relation_name(source: &str, destination: &str) -> String {
    format!("{source}->{destination}")
}

/// Scan `x → y` over the configured delays, test the maximum against the
/// matching surrogate null and estimate the tensors at the best delay.
/// Surrogate seeds depend on the relation's name, not on call order.
pub fn measure_relation(
    source: &str,
    destination: &str,
    x: &[Symbol],
    y: &[Symbol],
    cfg: &ClassifierConfig,
) -> Result<RelationEstimate> {
    let (nx, ny) = (infer_cardinality(x), infer_cardinality(y));
    measure_relation_with(source, destination, x, y, nx, ny, cfg)
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn measure_relation_with(
    source: &str,
    destination: &str,
    x: &[Symbol],
    y: &[Symbol],
    nx: usize,
    ny: usize,
    cfg: &ClassifierConfig,
) -> Result<RelationEstimate> {
    cfg.validate()?;
    check_symbols(x, nx)?;
    check_symbols(y, ny)?;
    let base = cfg.base_spec();
    let taus = cfg.tau_min..=cfg.tau_max;
    let scan = delay_scan_with(x, y, base, taus.clone(), cfg.objective, nx, ny, cfg.capacity_tol)?;
    let observed = scan.curve[&scan.tau_star];
    let surrogate = cfg
        .surrogate
        .with_seed(name_seed(cfg.surrogate.seed, &relation_name(source, destination)));
    let null = scan_null_distribution_with(x, y, base, taus, cfg.objective, &surrogate, nx, ny)?;
    let alpha = cfg.surrogate.alpha;

    let spec = base.with_tau(scan.tau_star);
    let counts = count_pair(x, y, spec, nx, ny)?;
    let tensors = SubchannelEstimate::from_counts(
        &counts,
        Alphabet::indexed(ny).power(spec.ell),
        Alphabet::indexed(nx).power(spec.m_len),
        Alphabet::indexed(ny),
    )?;
    let bound = bound_from_counts(&counts, cfg.capacity_tol, DEFAULT_MAX_ITER);
    Ok(RelationEstimate {
        source: source.to_owned(),
        destination: destination.to_owned(),
        tau_star: scan.tau_star,
        te_bits: te_from_counts(&counts),
        capacity_bound_bits: bound.bound_bits,
        p_value: p_value(observed, &null),
        converged: bound.all_converged,
        null_interval: [quantile(&null, alpha / 2.0), quantile(&null, 1.0 - alpha / 2.0)],
        curve: scan.curve,
        tensors: Some(tensors),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    Chain,
    Fork,
    Triangle,
    Indistinguishable,
    InsufficientEvidence,
}

/// How much of the evidence a verdict rests on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Qualifier {
    /// Tensor relations and delay additivity both hold.
    Confirmed,
    /// The tensor relations hold but delay additivity does not.
    NecessaryOnly,
    /// Only the significance graph was available.
    GraphOnly,
    NotApplicable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriadVerdict {
    pub classification: Classification,
    pub qualifier: Qualifier,
    /// Role (`source`, `middle`, `sink`) to series name. For a fork the
    /// source is the common driver.
    pub ordered_roles: BTreeMap<String, String>,
    pub residuals: BTreeMap<String, f64>,
    pub delay_consistency: bool,
    pub delay_outcome: Option<DelayOutcome>,
    pub dpi: Option<DpiOutcome>,
    pub notes: Vec<String>,
}

impl TriadVerdict {
    fn insufficient(note: impl Into<String>) -> Self {
        Self {
            classification: Classification::InsufficientEvidence,
            qualifier: Qualifier::NotApplicable,
            ordered_roles: BTreeMap::new(),
            residuals: BTreeMap::new(),
            delay_consistency: false,
            delay_outcome: None,
            dpi: None,
            notes: vec![note.into()],
        }
    }
}

fn roles(source: &str, middle: &str, sink: &str) -> BTreeMap<String, String> {
    [("source", source), ("middle", middle), ("sink", sink)]
        .into_iter()
        .map(|(r, n)| (r.to_owned(), n.to_owned()))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Ordering {
    Less,
    Equal,
    Greater,
}

/// Compare two bounds by intervals `value ± null spread`; overlap is `Equal`.
fn compare_bounds(gamma: &RelationEstimate, beta: &RelationEstimate) -> Ordering {
    let interval = |r: &RelationEstimate| {
        let spread = r.null_interval[1] - r.null_interval[0];
        (r.capacity_bound_bits - spread, r.capacity_bound_bits + spread)
    };
    let (g_lo, g_hi) = interval(gamma);
    let (b_lo, b_hi) = interval(beta);
    if g_hi < b_lo {
        Ordering::Less
    } else if b_hi < g_lo {
        Ordering::Greater
    } else {
        Ordering::Equal
    }
}

/// A named symbol series.
#[derive(Clone, Copy, Debug)]
pub struct Series<'a> {
    pub name: &'a str,
    pub symbols: &'a [Symbol],
}

/// Relations and verdict for one triad.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriadAnalysis {
    pub relations: Vec<RelationEstimate>,
    pub verdict: TriadVerdict,
}

/// Measure all six directed relations of `series` and classify the triad.
pub fn analyze_triad(series: [Series<'_>; 3], cfg: &ClassifierConfig) -> Result<TriadAnalysis> {
    cfg.validate()?;
    let names: BTreeSet<&str> = series.iter().map(|s| s.name).collect();
    if names.len() != 3 {
        return Err(Error::Config("triad series need distinct names".into()));
    }
    let pairs: Vec<(usize, usize)> = (0..3)
        .flat_map(|a| (0..3).filter(move |&b| b != a).map(move |b| (a, b)))
        .collect();
    let relations = crate::par_map(&pairs, |&(a, b)| {
        measure_relation(series[a].name, series[b].name, series[a].symbols, series[b].symbols, cfg)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let verdict = classify_triad(series, &relations, cfg)?;
    Ok(TriadAnalysis { relations, verdict })
}

/// Classify a triad from its measured relations.
///
/// Missing relations, colliders, cycles and mutual significance give
/// [`Classification::InsufficientEvidence`] rather than a guess.
pub fn classify_triad(series: [Series<'_>; 3], relations: &[RelationEstimate], cfg: &ClassifierConfig) -> Result<TriadVerdict> {
    cfg.validate()?;
    let alpha = cfg.surrogate.alpha;
    let by_name: BTreeMap<(&str, &str), &RelationEstimate> = relations
        .iter()
        .map(|r| ((r.source.as_str(), r.destination.as_str()), r))
        .collect();
    let names: Vec<&str> = series.iter().map(|s| s.name).collect();
    let mut edges = Vec::new();
    for &a in &names {
        for &b in &names {
            if a == b {
                continue;
            }
            let Some(r) = by_name.get(&(a, b)) else {
                return Ok(TriadVerdict::insufficient(format!("relation {} was not measured", relation_name(a, b))));
            };
            if r.is_significant(alpha) {
                edges.push((a, b));
            }
        }
    }
    edges.sort_unstable();
    if let Some(&(a, b)) = edges.iter().find(|&&(a, b)| edges.contains(&(b, a))) {
        return Ok(TriadVerdict::insufficient(format!(
            "{a} and {b} are significant in both directions"
        )));
    }
    let out_degree = |n: &str| edges.iter().filter(|e| e.0 == n).count();
    let in_degree = |n: &str| edges.iter().filter(|e| e.1 == n).count();

    match edges.len() {
        2 => {
            let (e1, e2) = (edges[0], edges[1]);
            let mut verdict = TriadVerdict::insufficient("");
            verdict.notes.clear();
            verdict.qualifier = Qualifier::GraphOnly;
            if e1.1 == e2.0 || e2.1 == e1.0 {
                let (first, second) = if e1.1 == e2.0 { (e1, e2) } else { (e2, e1) };
                verdict.classification = Classification::Chain;
                verdict.ordered_roles = roles(first.0, first.1, second.1);
                verdict.notes.push("no direct source-to-sink relation; tensor checks not applicable".into());
            } else if e1.0 == e2.0 {
                verdict.classification = Classification::Fork;
                verdict.ordered_roles = roles(e1.0, e1.1, e2.1);
                verdict.notes.push("leaves are unrelated; tensor checks not applicable".into());
            } else {
                verdict.qualifier = Qualifier::NotApplicable;
                verdict
                    .notes
                    .push(format!("collider at {}: bivariate relations cannot resolve it", e1.1));
            }
            Ok(verdict)
        }
        3 => {
            let source = names.iter().copied().find(|n| out_degree(n) == 2);
            let sink = names.iter().copied().find(|n| in_degree(n) == 2);
            match (source, sink) {
                (Some(x), Some(z)) => {
                    let y = names.iter().copied().find(|&n| n != x && n != z).expect("three names");
                    let find = |name: &str| series.iter().find(|s| s.name == name).expect("known name");
                    tensor_verdict([*find(x), *find(y), *find(z)], &by_name, cfg)
                }
                _ => Ok(TriadVerdict::insufficient("significant relations form a cycle")),
            }
        }
        n => Ok(TriadVerdict::insufficient(format!("{n} significant relations"))),
    }
}

/// Residual tests with roles fixed: `[X, Y, Z]` = source, middle, sink.
fn tensor_verdict(
    [x, y, z]: [Series<'_>; 3],
    by_name: &BTreeMap<(&str, &str), &RelationEstimate>,
    cfg: &ClassifierConfig,
) -> Result<TriadVerdict> {
    let rel = |a: &Series<'_>, b: &Series<'_>| by_name[&(a.name, b.name)];
    let (xy, yz, xz) = (rel(&x, &y), rel(&y, &z), rel(&x, &z));
    let mut verdict = TriadVerdict::insufficient("");
    verdict.notes.clear();
    verdict.ordered_roles = roles(x.name, y.name, z.name);

    let dpi = dpi_check(xy.te_bits, yz.te_bits, xz.te_bits, cfg.dpi_tol);
    verdict.dpi = Some(dpi);
    verdict.residuals.insert(
        "dpi_margin".into(),
        xz.te_bits - xy.te_bits.min(yz.te_bits),
    );
    let gamma = xz.capacity_bound_bits;
    let beta = yz.capacity_bound_bits;
    verdict.residuals.insert("gamma".into(), gamma);
    verdict.residuals.insert("beta".into(), beta);

    if xz.tau_star < yz.tau_star {
        verdict.notes.push(format!(
            "{} reaches {} before {} does; the chain reading needs a negative delay",
            x.name, z.name, y.name
        ));
    }
    let cards = [x, y, z].map(|s| infer_cardinality(s.symbols));
    let delays = TriadDelays {
        tau_xz: xz.tau_star,
        tau_yz: yz.tau_star,
    };
    let samples = TriadSamples::collect(x.symbols, y.symbols, z.symbols, cfg.ell, cfg.m_len, delays, cards)?;
    let tensors = samples.tensors()?;
    let snap = |r: f64| if r < RESIDUAL_FLOOR { 0.0 } else { r };
    let residuals = chain_residual(&tensors.a_bar, &tensors.b, &tensors.c)
        .and_then(|c| fork_residual(&tensors.a_bar_dagger, &tensors.c, &tensors.b).map(|f| (c, f)));
    let (chain_obs, fork_obs) = match residuals {
        Ok((c, f)) => (snap(c), snap(f)),
        Err(Error::MissingRow { tuple }) => {
            verdict.notes.push(format!("tensor rows unobserved, e.g. condition {tuple:?}"));
            return Ok(verdict);
        }
        Err(e) => return Err(e),
    };
    verdict.residuals.insert("chain_residual".into(), chain_obs);
    verdict.residuals.insert("fork_residual".into(), fork_obs);
    let noiseless = noiseless_deviation(&tensors.a_bar, &tensors.a_bar_dagger).ok();
    if let Some(d) = noiseless {
        verdict.residuals.insert("noiseless_deviation".into(), d);
    }

    let triad_name = format!("{}|{}|{}", x.name, y.name, z.name);
    let boot_p = |h: Hypothesis, observed: f64| -> Result<f64> {
        let stream = format!("{triad_name}:{h:?}");
        let boot_cfg = cfg.surrogate.with_seed(name_seed(cfg.surrogate.seed, &stream));
        let null: Vec<f64> = residual_null_distribution(&samples, h, &boot_cfg)?
            .into_iter()
            .map(snap)
            .collect();
        Ok(p_value(observed, &null))
    };
    let chain_p = boot_p(Hypothesis::Chain, chain_obs)?;
    let fork_p = boot_p(Hypothesis::Fork, fork_obs)?;
    verdict.residuals.insert("chain_p".into(), chain_p);
    verdict.residuals.insert("fork_p".into(), fork_p);
    let alpha = cfg.surrogate.alpha;
    let (chain_ok, fork_ok) = (chain_p > alpha, fork_p > alpha);

    let tau = |r: &RelationEstimate| r.tau_star as i64;
    let delay = |h: Hypothesis| delay_additivity_check(tau(xy), tau(yz), tau(xz), h, cfg.delay_slack);
    let settle = |v: &mut TriadVerdict, class: Classification, outcome: DelayOutcome| {
        v.classification = class;
        v.delay_outcome = Some(outcome);
        v.delay_consistency = outcome == DelayOutcome::Consistent;
        v.qualifier = if v.delay_consistency {
            Qualifier::Confirmed
        } else {
            v.notes
                .push("tensor relations hold but delays are not additive; necessary conditions only".into());
            Qualifier::NecessaryOnly
        };
    };

    match (chain_ok, fork_ok) {
        (true, true) if noiseless.is_some_and(|d| d <= cfg.noiseless_tol) => {
            let (c, f) = (delay(Hypothesis::Chain), delay(Hypothesis::Fork));
            let outcome = if c == DelayOutcome::Consistent { c } else { f };
            settle(&mut verdict, Classification::Indistinguishable, outcome);
            verdict
                .notes
                .push(format!("{} to {} is noiseless: chain and fork coincide", x.name, y.name));
        }
        (true, true) => match compare_bounds(xz, yz) {
            Ordering::Less => settle(&mut verdict, Classification::Chain, delay(Hypothesis::Chain)),
            Ordering::Greater => settle(&mut verdict, Classification::Fork, delay(Hypothesis::Fork)),
            Ordering::Equal => verdict
                .notes
                .push("both residual tests pass and the capacity bounds are equal".into()),
        },
        (true, false) => {
            settle(&mut verdict, Classification::Chain, delay(Hypothesis::Chain));
            if compare_bounds(xz, yz) == Ordering::Greater {
                verdict.notes.push("capacity ordering favours a fork".into());
            }
        }
        (false, true) => {
            settle(&mut verdict, Classification::Fork, delay(Hypothesis::Fork));
            if compare_bounds(xz, yz) == Ordering::Less {
                verdict.notes.push("capacity ordering favours a chain".into());
            }
        }
        (false, false) => {
            verdict.classification = Classification::Triangle;
            verdict.qualifier = Qualifier::NotApplicable;
            verdict.notes.push(match dpi {
                DpiOutcome::Consistent => "both residual tests reject; the data processing inequality holds".into(),
                DpiOutcome::Violated { margin } => format!(
                    "both residual tests reject; the data processing inequality fails by {margin:.4} bits"
                ),
            });
        }
    }
    Ok(verdict)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn relation(source: &str, destination: &str, p: f64, bound: f64) -> RelationEstimate {
        RelationEstimate {
            source: source.into(),
            destination: destination.into(),
            tau_star: 1,
            te_bits: bound / 2.0,
            capacity_bound_bits: bound,
            p_value: p,
            converged: true,
            null_interval: [0.0, 0.001],
            curve: BTreeMap::new(),
            tensors: None,
        }
    }

    fn all_pairs(sig: &[(&str, &str)]) -> Vec<RelationEstimate> {
        let names = ["a", "b", "c"];
        let mut out = Vec::new();
        for s in names {
            for d in names {
                if s != d {
                    let p = if sig.contains(&(s, d)) { 0.005 } else { 0.5 };
                    out.push(relation(s, d, p, 0.3));
                }
            }
        }
        out
    }

    fn series() -> [Series<'static>; 3] {
        static EMPTY: [usize; 0] = [];
        [
            Series { name: "a", symbols: &EMPTY },
            Series { name: "b", symbols: &EMPTY },
            Series { name: "c", symbols: &EMPTY },
        ]
    }

    fn cfg() -> ClassifierConfig {
        ClassifierConfig {
            surrogate: SurrogateConfig {
                n_surrogates: 99,
                ..SurrogateConfig::default()
            },
            ..ClassifierConfig::default()
        }
    }

    #[test]
    fn missing_relation_is_insufficient() {
        let mut rels = all_pairs(&[("a", "b")]);
        rels.pop();
        let v = classify_triad(series(), &rels, &cfg()).unwrap();
        assert_eq!(v.classification, Classification::InsufficientEvidence);
    }

    #[test]
    fn two_edge_path_is_graph_only_chain() {
        let v = classify_triad(series(), &all_pairs(&[("b", "a"), ("a", "c")]), &cfg()).unwrap();
        assert_eq!(v.classification, Classification::Chain);
        assert_eq!(v.qualifier, Qualifier::GraphOnly);
        assert_eq!(v.ordered_roles["source"], "b");
        assert_eq!(v.ordered_roles["middle"], "a");
        assert_eq!(v.ordered_roles["sink"], "c");
    }

    #[test]
    fn shared_source_is_graph_only_fork() {
        let v = classify_triad(series(), &all_pairs(&[("c", "a"), ("c", "b")]), &cfg()).unwrap();
        assert_eq!(v.classification, Classification::Fork);
        assert_eq!(v.ordered_roles["source"], "c");
    }

    #[test]
    fn collider_cycle_and_mutual_are_insufficient() {
        for sig in [
            vec![("a", "c"), ("b", "c")],
            vec![("a", "b"), ("b", "c"), ("c", "a")],
            vec![("a", "b"), ("b", "a")],
            vec![],
        ] {
            let v = classify_triad(series(), &all_pairs(&sig), &cfg()).unwrap();
            assert_eq!(v.classification, Classification::InsufficientEvidence, "{sig:?}");
        }
    }

    #[test]
    fn bound_comparison_uses_overlap() {
        let g = relation("a", "c", 0.001, 0.20);
        let b = relation("b", "c", 0.001, 0.30);
        assert_eq!(compare_bounds(&g, &b), Ordering::Less);
        assert_eq!(compare_bounds(&b, &g), Ordering::Greater);
        let close = relation("b", "c", 0.001, 0.2005);
        assert_eq!(compare_bounds(&g, &close), Ordering::Equal);
    }

    #[test]
    fn verdict_serializes_kebab_case() {
        let v = TriadVerdict::insufficient("x");
        let s = serde_json::to_string(&v).unwrap();
        assert!(s.contains("\"insufficient-evidence\""), "{s}");
    }
}
