//! From aligned symbol series to embedded samples, plug-in count tensors,
//! subchannel transition tensors and transfer entropy.
//!
//! For destination time `t` the embedding emits
//!
//! ```text
//! x⁻ = (x[t-τ], ..., x[t-τ-m_len+1])    source vector, index î
//! y  =  y[t]                             destination symbol, index j
//! y⁻ = (y[t-1], ..., y[t-ℓ])             destination past, index g
//! ```
//!
//! Vectors are encoded most-recent-first with the mixed-radix convention of
//! [`crate::prob`]. Counts are kept in `[g][î][j]` order so that each
//! subchannel `g` is a contiguous block.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use crate::capacity::{self, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::channel::apply_channel;
use crate::error::{Error, Result};
use crate::info::{kl_term, mi_of_matrix};
use crate::prob::{Alphabet, JointPmf, Pmf, TransitionTensor};

pub type Symbol = usize;

/// Destination-past length `ell`, source vector length `m_len`, and
/// interaction delay `tau`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EmbeddingSpec {
    pub ell: usize,
    pub m_len: usize,
    pub tau: usize,
}

impl EmbeddingSpec {
    pub fn new(ell: usize, m_len: usize, tau: usize) -> Result<Self> {
        if ell == 0 {
            return Err(Error::Config("destination past length must be at least 1".into()));
        }
        if m_len == 0 {
            return Err(Error::Config("source vector length must be at least 1".into()));
        }
        Ok(Self { ell, m_len, tau })
    }

    pub fn with_tau(self, tau: usize) -> Self {
        Self { tau, ..self }
    }

    /// Number of leading time steps that cannot be embedded.
    pub fn alignment_loss(&self) -> usize {
        (self.tau + self.m_len - 1).max(self.ell)
    }

    pub fn min_length(&self) -> usize {
        self.alignment_loss() + 1
    }
}

/// Smallest alphabet size that covers every symbol in `series`.
pub fn infer_cardinality(series: &[Symbol]) -> usize {
    series.iter().copied().max().map_or(1, |m| m + 1)
}

pub(crate) fn check_symbols(series: &[Symbol], cardinality: usize) -> Result<()> {
    match series.iter().position(|&s| s >= cardinality) {
        Some(position) => Err(Error::SymbolOutOfRange {
            symbol: series[position],
            position,
            cardinality,
        }),
        None => Ok(()),
    }
}

/// Encode `series[start], series[start-1], ..., series[start-len+1]`.
#[inline]
pub(crate) fn encode_window(series: &[Symbol], start: usize, len: usize, radix: usize) -> usize {
    (0..len).fold(0, |acc, k| acc * radix + series[start - k])
}

/// Plug-in count array over (condition, input, output), `[c][i][o]` layout.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JointCounts {
    n_cond: usize,
    n_in: usize,
    n_out: usize,
    counts: Vec<u64>,
}

impl JointCounts {
    pub fn zeros(n_cond: usize, n_in: usize, n_out: usize) -> Self {
        Self {
            n_cond,
            n_in,
            n_out,
            counts: vec![0; n_cond * n_in * n_out],
        }
    }

    pub fn from_vec(n_cond: usize, n_in: usize, n_out: usize, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != n_cond * n_in * n_out {
            return Err(Error::Dimension(format!(
                "{} counts for shape {n_cond}x{n_in}x{n_out}",
                counts.len()
            )));
        }
        Ok(Self {
            n_cond,
            n_in,
            n_out,
            counts,
        })
    }

    #[inline]
    pub fn add(&mut self, cond: usize, input: usize, output: usize) {
        self.counts[(cond * self.n_in + input) * self.n_out + output] += 1;
    }

    #[inline]
    pub fn get(&self, cond: usize, input: usize, output: usize) -> u64 {
        self.counts[(cond * self.n_in + input) * self.n_out + output]
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.n_cond, self.n_in, self.n_out)
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// The `n_in × n_out` block of one condition.
    pub fn block(&self, cond: usize) -> &[u64] {
        let w = self.n_in * self.n_out;
        &self.counts[cond * w..(cond + 1) * w]
    }
}

/// Count `(g, î, j)` triples without materializing samples.
pub(crate) fn count_pair(x: &[Symbol], y: &[Symbol], spec: EmbeddingSpec, nx: usize, ny: usize) -> Result<JointCounts> {
    if x.len() != y.len() {
        return Err(Error::Dimension(format!(
            "source has {} samples, destination {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < spec.min_length() {
        return Err(Error::InsufficientData {
            required: spec.min_length(),
            actual: x.len(),
        });
    }
    let n_cond = ny.pow(spec.ell as u32);
    let n_in = nx.pow(spec.m_len as u32);
    let mut counts = JointCounts::zeros(n_cond, n_in, ny);
    for t in spec.alignment_loss()..y.len() {
        let g = encode_window(y, t - 1, spec.ell, ny);
        let i = encode_window(x, t - spec.tau, spec.m_len, nx);
        counts.add(g, i, y[t]);
    }
    Ok(counts)
}

/// One embedded time step, as encoded indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddedSample {
    pub x_past: usize,
    pub y_now: usize,
    pub y_past: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddedDataset {
    pub spec: EmbeddingSpec,
    pub source_cardinality: usize,
    pub destination_cardinality: usize,
    pub samples: Vec<EmbeddedSample>,
    pub counts: JointCounts,
}

impl EmbeddedDataset {
    pub fn n_effective(&self) -> usize {
        self.samples.len()
    }

    pub fn past_alphabet(&self) -> Alphabet {
        Alphabet::indexed(self.destination_cardinality).power(self.spec.ell)
    }

    pub fn source_alphabet(&self) -> Alphabet {
        Alphabet::indexed(self.source_cardinality).power(self.spec.m_len)
    }

    pub fn destination_alphabet(&self) -> Alphabet {
        Alphabet::indexed(self.destination_cardinality)
    }

    /// Plug-in joint over the axes `(X⁻, Y, Y⁻)`.
    pub fn joint(&self) -> Result<JointPmf> {
        let (ng, ni, nj) = self.counts.shape();
        let mut reordered = vec![0u64; ng * ni * nj];
        for g in 0..ng {
            for i in 0..ni {
                for j in 0..nj {
                    reordered[(i * nj + j) * ng + g] = self.counts.get(g, i, j);
                }
            }
        }
        JointPmf::from_counts(
            vec![self.source_alphabet(), self.destination_alphabet(), self.past_alphabet()],
            &reordered,
        )
    }
}

/// Embed with alphabets inferred from the data.
pub fn embed(x: &[Symbol], y: &[Symbol], spec: EmbeddingSpec) -> Result<EmbeddedDataset> {
    embed_with(x, y, spec, infer_cardinality(x), infer_cardinality(y))
}

/// Embed against declared alphabet sizes; out-of-range symbols are an error.
pub fn embed_with(x: &[Symbol], y: &[Symbol], spec: EmbeddingSpec, nx: usize, ny: usize) -> Result<EmbeddedDataset> {
    check_symbols(x, nx)?;
    check_symbols(y, ny)?;
    let counts = count_pair(x, y, spec, nx, ny)?;
    let samples = (spec.alignment_loss()..y.len())
        .map(|t| EmbeddedSample {
            x_past: encode_window(x, t - spec.tau, spec.m_len, nx),
            y_now: y[t],
            y_past: encode_window(y, t - 1, spec.ell, ny),
        })
        .collect();
    Ok(EmbeddedDataset {
        spec,
        source_cardinality: nx,
        destination_cardinality: ny,
        samples,
        counts,
    })
}

/// The inverse-multiplexer view of one directed relation: a memoryless
/// subchannel `A^j_{g î}` per destination past `g`, the weights `p(g)` and
/// the per-subchannel input distributions `p^î_g`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubchannelEstimate {
    /// Conditions `[g, î]`, output `j`.
    pub tensor: TransitionTensor,
    pub past_weights: Pmf,
    /// Conditions `[g]`, output `î`.
    pub input_given_past: TransitionTensor,
    /// I(X;Y | g) for every observed `g`.
    pub per_subchannel_mi: BTreeMap<usize, f64>,
    pub n_samples: u64,
}

impl SubchannelEstimate {
    pub fn from_counts(counts: &JointCounts, past: Alphabet, input: Alphabet, output: Alphabet) -> Result<Self> {
        let (ng, ni, nj) = counts.shape();
        if past.len() != ng || input.len() != ni || output.len() != nj {
            return Err(Error::Dimension("alphabets do not match the count array".into()));
        }
        let n = counts.total();
        if n == 0 {
            return Err(Error::InsufficientData { required: 1, actual: 0 });
        }
        let tensor = TransitionTensor::from_counts(vec![past.clone(), input.clone()], output, counts.as_slice())?;
        let mut past_counts = vec![0u64; ng];
        let mut gi = vec![0u64; ng * ni];
        let mut per_subchannel_mi = BTreeMap::new();
        for (g, pc) in past_counts.iter_mut().enumerate() {
            let block = counts.block(g);
            for i in 0..ni {
                gi[g * ni + i] = block[i * nj..(i + 1) * nj].iter().sum();
            }
            *pc = gi[g * ni..(g + 1) * ni].iter().sum();
            if *pc > 0 {
                let as_f: Vec<f64> = block.iter().map(|&c| c as f64).collect();
                per_subchannel_mi.insert(g, mi_of_matrix(&as_f, ni, nj));
            }
        }
        Ok(Self {
            tensor,
            past_weights: Pmf::from_counts(past.clone(), &past_counts)?,
            input_given_past: TransitionTensor::from_counts(vec![past], input, &gi)?,
            per_subchannel_mi,
            n_samples: n,
        })
    }

    /// `p^j_g = Σ_î p^î_g A^j_{gî}`, or `None` for an unobserved `g`.
    pub fn reconstructed_destination(&self, g: usize) -> Result<Option<Pmf>> {
        let Some(p_in) = self.input_given_past.row(g) else {
            return Ok(None);
        };
        let sub = self.tensor.slice_leading(g)?;
        let input = Pmf::new(self.tensor.conditions()[1].clone(), p_in.to_vec())?;
        apply_channel(&input, &sub).map(Some)
    }
}

pub fn estimate_subchannels(data: &EmbeddedDataset) -> Result<SubchannelEstimate> {
    SubchannelEstimate::from_counts(
        &data.counts,
        data.past_alphabet(),
        data.source_alphabet(),
        data.destination_alphabet(),
    )
}

/// `Σ_g p(g) I(X;Y | g)`.
pub fn transfer_entropy(est: &SubchannelEstimate) -> f64 {
    est.per_subchannel_mi
        .iter()
        .map(|(&g, &mi)| est.past_weights.get(g) * mi)
        .sum()
}

/// Transfer entropy by the direct triple sum
/// `Σ p(î, j, g) log2[p(j | î, g) / p(j | g)]` over the same counts.
pub fn transfer_entropy_direct(counts: &JointCounts) -> f64 {
    let (ng, ni, nj) = counts.shape();
    let n = counts.total() as f64;
    if n == 0.0 {
        return 0.0;
    }
    let mut te = 0.0;
    for g in 0..ng {
        let mut gj = vec![0u64; nj];
        for i in 0..ni {
            for (j, c) in gj.iter_mut().enumerate() {
                *c += counts.get(g, i, j);
            }
        }
        let ng_total: u64 = gj.iter().sum();
        if ng_total == 0 {
            continue;
        }
        for i in 0..ni {
            let gi_total: u64 = (0..nj).map(|j| counts.get(g, i, j)).sum();
            for (j, &gjc) in gj.iter().enumerate() {
                let c = counts.get(g, i, j);
                if c == 0 {
                    continue;
                }
                let p_joint = c as f64 / n;
                let p_full = c as f64 / gi_total as f64;
                let p_past = gjc as f64 / ng_total as f64;
                te += p_joint * (p_full / p_past).log2();
            }
        }
    }
    te.max(0.0)
}

/// TE straight from counts via the subchannel sum, without building tensors.
pub(crate) fn te_from_counts(counts: &JointCounts) -> f64 {
    let (ng, ni, nj) = counts.shape();
    let n = counts.total() as f64;
    let mut te = 0.0;
    let mut scratch = vec![0.0; ni * nj];
    for g in 0..ng {
        let block = counts.block(g);
        let mass: u64 = block.iter().sum();
        if mass == 0 {
            continue;
        }
        for (s, &c) in scratch.iter_mut().zip(block) {
            *s = c as f64;
        }
        te += mass as f64 / n * mi_of_matrix(&scratch, ni, nj);
    }
    te
}

/// H(Y | Y⁻) from counts; the ceiling for transfer entropy.
pub fn destination_conditional_entropy(counts: &JointCounts) -> f64 {
    let (ng, ni, nj) = counts.shape();
    let n = counts.total() as f64;
    let mut h = 0.0;
    for g in 0..ng {
        let mut gj = vec![0.0; nj];
        for i in 0..ni {
            for (j, v) in gj.iter_mut().enumerate() {
                *v += counts.get(g, i, j) as f64;
            }
        }
        let mass: f64 = gj.iter().sum();
        for &c in &gj {
            h -= kl_term(c / n, mass / n);
        }
    }
    h.max(0.0)
}

/// Quantity maximized over the interaction delay.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    #[serde(rename = "te")]
    TransferEntropy,
    #[serde(rename = "capacity")]
    CapacityBound,
}

pub(crate) fn evaluate_objective(counts: &JointCounts, objective: Objective, tol: f64) -> f64 {
    match objective {
        Objective::TransferEntropy => te_from_counts(counts),
        Objective::CapacityBound => capacity::bound_from_counts(counts, tol, DEFAULT_MAX_ITER).bound_bits,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DelayScan {
    pub tau_star: usize,
    pub curve: BTreeMap<usize, f64>,
    /// Delays dropped for lack of data.
    pub skipped: Vec<usize>,
}

/// Evaluate `objective` at every delay in `taus` (ℓ and m_len held fixed)
/// and return the maximizing delay, ties going to the smallest.
pub fn delay_scan(
    x: &[Symbol],
    y: &[Symbol],
    base: EmbeddingSpec,
    taus: RangeInclusive<usize>,
    objective: Objective,
) -> Result<DelayScan> {
    let nx = infer_cardinality(x);
    let ny = infer_cardinality(y);
    delay_scan_with(x, y, base, taus, objective, nx, ny, DEFAULT_TOL)
}

#[allow(clippy::too_many_arguments)]
pub fn delay_scan_with(
    x: &[Symbol],
    y: &[Symbol],
    base: EmbeddingSpec,
    taus: RangeInclusive<usize>,
    objective: Objective,
    nx: usize,
    ny: usize,
    tol: f64,
) -> Result<DelayScan> {
    if taus.is_empty() {
        return Err(Error::Config("delay range is empty".into()));
    }
    check_symbols(x, nx)?;
    check_symbols(y, ny)?;
    let delays: Vec<usize> = taus.collect();
    let values = crate::par_map(&delays, |&tau| {
        count_pair(x, y, base.with_tau(tau), nx, ny).map(|c| evaluate_objective(&c, objective, tol))
    });
    let mut curve = BTreeMap::new();
    let mut skipped = Vec::new();
    let mut best: Option<(usize, f64)> = None;
    for (&tau, v) in delays.iter().zip(values) {
        match v {
            Ok(v) => {
                curve.insert(tau, v);
                if best.is_none_or(|(_, b)| v > b) {
                    best = Some((tau, v));
                }
            }
            Err(Error::InsufficientData { .. }) => skipped.push(tau),
            Err(e) => return Err(e),
        }
    }
    let (tau_star, _) = best.ok_or(Error::InsufficientData {
        required: base.with_tau(delays[0]).min_length(),
        actual: x.len(),
    })?;
    Ok(DelayScan {
        tau_star,
        curve,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alternating_series_embedding() {
        let x: Vec<usize> = (0..12).map(|t| t % 2).collect();
        let spec = EmbeddingSpec::new(1, 1, 1).unwrap();
        let d = embed(&x, &x, spec).unwrap();
        assert_eq!(d.n_effective(), 11);
        for (k, s) in d.samples.iter().enumerate() {
            let t = k + 1;
            assert_eq!((s.x_past, s.y_now, s.y_past), (x[t - 1], x[t], x[t - 1]));
        }
    }

    #[test]
    fn zero_delay_aligns_source_with_destination() {
        let x = vec![0, 1, 1, 0, 1];
        let y = vec![1, 0, 0, 1, 1];
        let d = embed(&x, &y, EmbeddingSpec::new(1, 1, 0).unwrap()).unwrap();
        assert_eq!(d.n_effective(), 4);
        for (k, s) in d.samples.iter().enumerate() {
            assert_eq!(s.x_past, x[k + 1]);
            assert_eq!(s.y_now, y[k + 1]);
        }
    }

    #[test]
    fn effective_length_counts_valid_times() {
        // valid t: max(3 + 1 - 1, 2) = 3 ..= 9
        let x = vec![0; 10];
        let d = embed(&x, &x, EmbeddingSpec::new(2, 1, 3).unwrap()).unwrap();
        assert_eq!(d.n_effective(), 7);
        // two-symbol source vector: max(3 + 2 - 1, 2) = 4 ..= 9
        let d = embed(&x, &x, EmbeddingSpec::new(2, 2, 3).unwrap()).unwrap();
        assert_eq!(d.n_effective(), 6);
    }

    #[test]
    fn vectors_are_most_recent_first() {
        let x = vec![0, 0, 1, 0, 0, 0];
        let y = vec![0, 1, 0, 0, 1, 1];
        let d = embed(&x, &y, EmbeddingSpec::new(2, 2, 1).unwrap()).unwrap();
        // first valid t = 2: x⁻ = (x1, x0) = (0, 0), y⁻ = (y1, y0) = (1, 0)
        assert_eq!(d.samples[0], EmbeddedSample { x_past: 0, y_now: 0, y_past: 2 });
        // t = 3: x⁻ = (x2, x1) = (1, 0) -> 2, y⁻ = (y2, y1) = (0, 1) -> 1
        assert_eq!(d.samples[1], EmbeddedSample { x_past: 2, y_now: 0, y_past: 1 });
    }

    #[test]
    fn short_series_reports_minimum() {
        let x = vec![0, 1, 0];
        let err = embed(&x, &x, EmbeddingSpec::new(1, 1, 3).unwrap()).unwrap_err();
        assert_eq!(err, Error::InsufficientData { required: 4, actual: 3 });
    }

    #[test]
    fn declared_alphabet_is_enforced() {
        let x = vec![0, 1, 2];
        let err = embed_with(&x, &x, EmbeddingSpec::new(1, 1, 0).unwrap(), 2, 3).unwrap_err();
        assert!(matches!(err, Error::SymbolOutOfRange { symbol: 2, position: 2, .. }));
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(EmbeddingSpec::new(0, 1, 1).is_err());
        assert!(EmbeddingSpec::new(1, 0, 1).is_err());
    }

    #[test]
    fn constant_destination_ties_to_smallest_delay() {
        let x: Vec<usize> = (0..200).map(|t| (t * 7 + t / 3) % 2).collect();
        let y = vec![0; 200];
        let scan = delay_scan(&x, &y, EmbeddingSpec::new(1, 1, 1).unwrap(), 2..=6, Objective::CapacityBound).unwrap();
        assert_eq!(scan.tau_star, 2);
        assert!(scan.curve.values().all(|&v| v == 0.0));
    }

    #[test]
    fn overlong_delays_are_skipped() {
        let x = vec![0, 1, 1, 0, 1, 0];
        let scan = delay_scan(&x, &x, EmbeddingSpec::new(1, 1, 1).unwrap(), 1..=8, Objective::TransferEntropy).unwrap();
        assert_eq!(scan.skipped, vec![6, 7, 8]);
        assert_eq!(scan.curve.len(), 5);
    }
}
