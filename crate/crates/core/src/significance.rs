//! Surrogate null distributions and rank p-values.
//!
//! Pairwise statistics are tested against surrogates in which the source is
//! displaced in time while the destination stays intact, which keeps the
//! source's own temporal structure but breaks its coupling to the
//! destination. Structure residuals are tested against a parametric
//! bootstrap that regenerates data from the hypothesis being tested.
//!
//! Every surrogate draws from its own ChaCha stream derived from the base seed
//! and the surrogate index, so results do not depend on evaluation order.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::ops::RangeInclusive;

use crate::capacity::DEFAULT_TOL;
use crate::error::{Error, Result};
use crate::estimation::{check_symbols, count_pair, evaluate_objective, infer_cardinality, EmbeddingSpec, Objective, Symbol};
use crate::structure::triad::{MultiInputSamples, TriadSample, TriadSamples};
use crate::structure::{chain_residual, fork_residual, Hypothesis};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SurrogateMethod {
    /// Rotate the source by a random offset.
    CircularShift,
    /// Shuffle contiguous source blocks.
    BlockPermutation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurrogateConfig {
    pub n_surrogates: usize,
    pub method: SurrogateMethod,
    pub seed: u64,
    pub alpha: f64,
}

impl Default for SurrogateConfig {
    fn default() -> Self {
        Self {
            n_surrogates: 199,
            method: SurrogateMethod::CircularShift,
            seed: 0,
            alpha: 0.01,
        }
    }
}

impl SurrogateConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_surrogates < 19 {
            return Err(Error::Config(format!(
                "at least 19 surrogates are required, got {}",
                self.n_surrogates
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if 1.0 / (self.n_surrogates as f64 + 1.0) > self.alpha {
            return Err(Error::Config(format!(
                "{} surrogates cannot resolve alpha = {}",
                self.n_surrogates, self.alpha
            )));
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }
}

/// SplitMix64 finalizer over `base` and `stream`.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable 64-bit FNV-1a hash, used to give named relations their own seeds.
pub fn name_seed(base: u64, name: &str) -> u64 {
    let h = name
        .bytes()
        .fold(0xcbf2_9ce4_8422_2325_u64, |h, b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3));
    derive_seed(base, h)
}

pub(crate) fn surrogate_rng(seed: u64, index: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, index as u64))
}

/// One surrogate of `x`, displaced by at least `min_shift` steps.
pub fn surrogate_source(x: &[Symbol], method: SurrogateMethod, min_shift: usize, rng: &mut impl Rng) -> Result<Vec<Symbol>> {
    let n = x.len();
    let min_shift = min_shift.max(1);
    if n <= 2 * min_shift {
        return Err(Error::InsufficientData {
            required: 2 * min_shift + 1,
            actual: n,
        });
    }
    Ok(match method {
        SurrogateMethod::CircularShift => {
            let shift = rng.gen_range(min_shift..=n - min_shift);
            x[shift..].iter().chain(&x[..shift]).copied().collect()
        }
        SurrogateMethod::BlockPermutation => {
            let mut blocks: Vec<&[Symbol]> = x.chunks(min_shift).collect();
            blocks.shuffle(rng);
            blocks.concat()
        }
    })
}

/// Pairwise statistics supported by [`null_distribution`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    TransferEntropy,
    CapacityBound,
}

impl From<Statistic> for Objective {
    fn from(s: Statistic) -> Self {
        match s {
            Statistic::TransferEntropy => Objective::TransferEntropy,
            Statistic::CapacityBound => Objective::CapacityBound,
        }
    }
}

/// Statistic values of `x → y` at a fixed delay over surrogate sources.
pub fn null_distribution(
    x: &[Symbol],
    y: &[Symbol],
    spec: EmbeddingSpec,
    statistic: Statistic,
    cfg: &SurrogateConfig,
) -> Result<Vec<f64>> {
    scan_null_distribution(x, y, spec, spec.tau..=spec.tau, statistic.into(), cfg)
}

/// Null of the delay-maximized statistic: each surrogate is scanned over
/// `taus` like the observed pair and contributes its maximum.
pub fn scan_null_distribution(
    x: &[Symbol],
    y: &[Symbol],
    base: EmbeddingSpec,
    taus: RangeInclusive<usize>,
    objective: Objective,
    cfg: &SurrogateConfig,
) -> Result<Vec<f64>> {
    let (nx, ny) = (infer_cardinality(x), infer_cardinality(y));
    scan_null_distribution_with(x, y, base, taus, objective, cfg, nx, ny)
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn scan_null_distribution_with(
    x: &[Symbol],
    y: &[Symbol],
    base: EmbeddingSpec,
    taus: RangeInclusive<usize>,
    objective: Objective,
    cfg: &SurrogateConfig,
    nx: usize,
    ny: usize,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    if taus.is_empty() {
        return Err(Error::Config("delay range is empty".into()));
    }
    check_symbols(x, nx)?;
    check_symbols(y, ny)?;
    let min_shift = taus.end() + base.m_len;
    let indices: Vec<usize> = (0..cfg.n_surrogates).collect();
    crate::par_map(&indices, |&k| {
        let mut rng = surrogate_rng(cfg.seed, k);
        let xs = surrogate_source(x, cfg.method, min_shift, &mut rng)?;
        let mut best = f64::NEG_INFINITY;
        for tau in taus.clone() {
            match count_pair(&xs, y, base.with_tau(tau), nx, ny) {
                Ok(c) => best = best.max(evaluate_objective(&c, objective, DEFAULT_TOL)),
                Err(Error::InsufficientData { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        if best.is_finite() {
            Ok(best)
        } else {
            Err(Error::InsufficientData {
                required: base.with_tau(*taus.start()).min_length(),
                actual: x.len(),
            })
        }
    })
    .into_iter()
    .collect()
}

/// Rank p-value `(1 + #{null >= observed}) / (1 + n)`.
///
/// # Panics
/// If `null` is empty.
pub fn p_value(observed: f64, null: &[f64]) -> f64 {
    assert!(!null.is_empty(), "p-value needs a nonempty null distribution");
    let exceed = null.iter().filter(|&&v| v >= observed).count();
    (1 + exceed) as f64 / (1 + null.len()) as f64
}

/// Nearest-rank quantile, `q` in `[0, 1]`.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    assert!(!values.is_empty(), "quantile of an empty sample");
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let rank = ((q.clamp(0.0, 1.0) * v.len() as f64).ceil() as usize).clamp(1, v.len());
    v[rank - 1]
}

fn draw(row: &[f64], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (k, &p) in row.iter().enumerate() {
        acc += p;
        if u < acc {
            return k;
        }
    }
    // rounding left u above the final partial sum
    row.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// Regenerate the triad samples under `hypothesis`, keeping the variables
/// the hypothesis conditions on.
///
/// Chain: `(g, h, î)` are kept, `ĵ ~ A_{gî}` and `k ~ B_{hĵ}` are redrawn.
/// Fork: `(g, h, ĵ)` are kept, `î ~ A‡_{gĵ}` and `k ~ C_{hî}` are redrawn.
/// Samples whose redrawn condition has no estimated row are dropped.
fn regenerate(samples: &TriadSamples, hypothesis: Hypothesis, rng: &mut impl Rng) -> Result<TriadSamples> {
    let t = samples.tensors()?;
    let mut out = Vec::with_capacity(samples.samples.len());
    for s in &samples.samples {
        let redrawn = match hypothesis {
            Hypothesis::Chain => {
                let j = draw(t.a.row_at(&[s.g, s.i]).ok_or(Error::MissingRow { tuple: vec![s.g, s.i] })?, rng);
                t.b.row_at(&[s.h, j]).map(|row| TriadSample { j, k: draw(row, rng), ..*s })
            }
            Hypothesis::Fork => {
                let i = draw(
                    t.a_dagger.row_at(&[s.g, s.j]).ok_or(Error::MissingRow { tuple: vec![s.g, s.j] })?,
                    rng,
                );
                t.c.row_at(&[s.h, i]).map(|row| TriadSample { i, k: draw(row, rng), ..*s })
            }
        };
        out.extend(redrawn);
    }
    Ok(samples.with_samples(out))
}

/// Null distribution of the chain or fork residual, by parametric bootstrap
/// from the tensors fitted under that hypothesis. Replicates whose tensors
/// lose support are skipped.
pub fn residual_null_distribution(samples: &TriadSamples, hypothesis: Hypothesis, cfg: &SurrogateConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let indices: Vec<usize> = (0..cfg.n_surrogates).collect();
    let values: Vec<Result<Option<f64>>> = crate::par_map(&indices, |&k| {
        let mut rng = surrogate_rng(cfg.seed, k);
        let boot = regenerate(samples, hypothesis, &mut rng)?;
        let t = boot.tensors()?;
        let r = match hypothesis {
            Hypothesis::Chain => chain_residual(&t.a_bar, &t.b, &t.c),
            Hypothesis::Fork => fork_residual(&t.a_bar_dagger, &t.c, &t.b),
        };
        Ok(r.ok())
    });
    let mut out = Vec::with_capacity(values.len());
    for v in values {
        out.extend(v?);
    }
    if out.is_empty() {
        return Err(Error::InsufficientData {
            required: 1,
            actual: 0,
        });
    }
    Ok(out)
}

/// Null of the joint transfer entropy `{X, Y} → Z`: both sources are shifted
/// by the same offset so their mutual relation is preserved.
pub fn joint_null_distribution(
    x: &[Symbol],
    y: &[Symbol],
    z: &[Symbol],
    ell: usize,
    m_len: usize,
    tau_xz: usize,
    tau_yz: usize,
    cfg: &SurrogateConfig,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    if x.len() != y.len() {
        return Err(Error::Dimension("sources differ in length".into()));
    }
    let n = x.len();
    let min_shift = tau_xz.max(tau_yz) + m_len;
    if n <= 2 * min_shift {
        return Err(Error::InsufficientData {
            required: 2 * min_shift + 1,
            actual: n,
        });
    }
    let cards = [infer_cardinality(x), infer_cardinality(y), infer_cardinality(z)];
    let indices: Vec<usize> = (0..cfg.n_surrogates).collect();
    crate::par_map(&indices, |&k| {
        let mut rng = surrogate_rng(cfg.seed, k);
        let shift = rng.gen_range(min_shift..=n - min_shift);
        let xs: Vec<Symbol> = x[shift..].iter().chain(&x[..shift]).copied().collect();
        let ys: Vec<Symbol> = y[shift..].iter().chain(&y[..shift]).copied().collect();
        let ms = MultiInputSamples::collect(&xs, &ys, z, ell, m_len, tau_xz, tau_yz, cards)?;
        Ok(ms.joint_transfer_entropy())
    })
    .into_iter()
    .collect()
}

/// Convenience: p-value of the delay-maximized statistic of `x → y`.
pub fn scan_p_value(
    observed: f64,
    x: &[Symbol],
    y: &[Symbol],
    base: EmbeddingSpec,
    taus: RangeInclusive<usize>,
    objective: Objective,
    cfg: &SurrogateConfig,
) -> Result<f64> {
    let null = scan_null_distribution(x, y, base, taus, objective, cfg)?;
    Ok(p_value(observed, &null))
}
