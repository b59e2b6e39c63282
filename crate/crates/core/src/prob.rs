//! Finite alphabets, probability mass functions and probability transition
//! tensors.
//!
//! A [`TransitionTensor`] is a family of row-stochastic distributions over an
//! output alphabet, one row per tuple of condition symbols. Condition tuples
//! are flattened to a single row index by mixed-radix encoding over the
//! ordered condition alphabets, first axis most significant. The same encoding
//! is used for product alphabets (`Alphabet::power`, `Alphabet::product`), so
//! a tuple `(a, b)` over radices `(ra, rb)` lives at index `a * rb + b`.
//!
//! Rows for condition tuples that were never observed are stored as absent
//! rather than zero-filled.

use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Tolerance for row sums and total mass.
pub const PROB_TOL: f64 = 1e-12;
/// Inputs off by at most this much are renormalized instead of rejected.
pub const RENORM_TOL: f64 = 1e-9;

/// Encode `digits` over `radices` (first digit most significant).
pub fn encode_tuple(radices: &[usize], digits: &[usize]) -> usize {
    debug_assert_eq!(radices.len(), digits.len());
    radices
        .iter()
        .zip(digits)
        .fold(0, |acc, (&r, &d)| {
            debug_assert!(d < r);
            acc * r + d
        })
}

/// Inverse of [`encode_tuple`].
pub fn decode_tuple(radices: &[usize], mut index: usize) -> Vec<usize> {
    let mut digits = vec![0; radices.len()];
    for (slot, &r) in digits.iter_mut().zip(radices).rev() {
        *slot = index % r;
        index /= r;
    }
    digits
}

/// An ordered set of distinct symbol labels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabet {
    labels: Arc<[String]>,
}

impl Alphabet {
    pub fn new(labels: Vec<String>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Validation("alphabet must contain at least one symbol".into()));
        }
        let mut seen = HashSet::with_capacity(labels.len());
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::Validation(format!("duplicate alphabet label {l:?}")));
            }
        }
        Ok(Self { labels: labels.into() })
    }

    /// Alphabet `{"0", "1", ..., "n-1"}`.
    ///
    /// # Panics
    /// If `n == 0`.
    pub fn indexed(n: usize) -> Self {
        assert!(n > 0, "alphabet cardinality must be positive");
        Self {
            labels: (0..n).map(|i| i.to_string()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    /// Always false; alphabets are nonempty by construction.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// The `k`-ary Cartesian power, tuples in lexicographic order.
    pub fn power(&self, k: usize) -> Self {
        Self::product(&vec![self.clone(); k])
    }

    /// Cartesian product of `parts`, tuples in lexicographic order. The empty
    /// product is the one-symbol alphabet `{"()"}`.
    pub fn product(parts: &[Alphabet]) -> Self {
        let radices: Vec<usize> = parts.iter().map(Alphabet::len).collect();
        let total: usize = radices.iter().product();
        let labels = (0..total)
            .map(|idx| {
                let digits = decode_tuple(&radices, idx);
                let inner: Vec<&str> = digits
                    .iter()
                    .zip(parts)
                    .map(|(&d, a)| a.labels[d].as_str())
                    .collect();
                format!("({})", inner.join(","))
            })
            .collect();
        Self { labels }
    }
}

/// Checks a probability vector, renormalizing float drift up to
/// [`RENORM_TOL`].
pub(crate) fn validate_probabilities(probs: &mut [f64]) -> Result<()> {
    for (i, p) in probs.iter_mut().enumerate() {
        if !p.is_finite() {
            return Err(Error::Validation(format!("entry {i} is not finite")));
        }
        if *p < 0.0 {
            if *p < -PROB_TOL {
                return Err(Error::Validation(format!("entry {i} is negative ({p})")));
            }
            *p = 0.0;
        }
        if *p > 1.0 + PROB_TOL {
            return Err(Error::Validation(format!("entry {i} exceeds one ({p})")));
        }
    }
    let total: f64 = probs.iter().sum();
    let drift = (total - 1.0).abs();
    if drift <= PROB_TOL {
        Ok(())
    } else if drift <= RENORM_TOL {
        probs.iter_mut().for_each(|p| *p /= total);
        Ok(())
    } else {
        Err(Error::Validation(format!("entries sum to {total}, not 1")))
    }
}

/// A probability mass function over a finite alphabet.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pmf {
    alphabet: Alphabet,
    probs: Vec<f64>,
}

impl Pmf {
    pub fn new(alphabet: Alphabet, mut probs: Vec<f64>) -> Result<Self> {
        if probs.len() != alphabet.len() {
            return Err(Error::Dimension(format!(
                "{} probabilities for an alphabet of {} symbols",
                probs.len(),
                alphabet.len()
            )));
        }
        validate_probabilities(&mut probs)?;
        Ok(Self { alphabet, probs })
    }

    /// A PMF over the indexed alphabet of matching size.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Validation("empty probability vector".into()));
        }
        Self::new(Alphabet::indexed(probs.len()), probs)
    }

    pub fn uniform(alphabet: Alphabet) -> Self {
        let n = alphabet.len();
        Self {
            alphabet,
            probs: vec![1.0 / n as f64; n],
        }
    }

    /// Plug-in estimate from counts. Fails when all counts are zero.
    pub fn from_counts(alphabet: Alphabet, counts: &[u64]) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::Validation("all counts are zero".into()));
        }
        let probs = counts.iter().map(|&c| c as f64 / total as f64).collect();
        Self::new(alphabet, probs)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.probs[i]
    }
}

/// A joint PMF stored as a dense row-major array, one axis per alphabet.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointPmf {
    alphabets: Vec<Alphabet>,
    probs: Vec<f64>,
}

impl JointPmf {
    pub fn new(alphabets: Vec<Alphabet>, mut probs: Vec<f64>) -> Result<Self> {
        let size: usize = alphabets.iter().map(Alphabet::len).product();
        if alphabets.is_empty() || probs.len() != size {
            return Err(Error::Dimension(format!(
                "{} entries for a joint of shape {:?}",
                probs.len(),
                alphabets.iter().map(Alphabet::len).collect::<Vec<_>>()
            )));
        }
        validate_probabilities(&mut probs)?;
        Ok(Self { alphabets, probs })
    }

    pub fn from_counts(alphabets: Vec<Alphabet>, counts: &[u64]) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::Validation("all counts are zero".into()));
        }
        let probs = counts.iter().map(|&c| c as f64 / total as f64).collect();
        Self::new(alphabets, probs)
    }

    pub fn alphabets(&self) -> &[Alphabet] {
        &self.alphabets
    }

    pub fn shape(&self) -> Vec<usize> {
        self.alphabets.iter().map(Alphabet::len).collect()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn n_axes(&self) -> usize {
        self.alphabets.len()
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        self.probs[encode_tuple(&self.shape(), index)]
    }

    /// Marginal over the axes in `keep`, in the order given.
    pub fn marginal(&self, keep: &[usize]) -> Result<JointPmf> {
        if keep.is_empty() || keep.iter().any(|&a| a >= self.n_axes()) {
            return Err(Error::Dimension(format!(
                "cannot keep axes {keep:?} of a {}-axis joint",
                self.n_axes()
            )));
        }
        let shape = self.shape();
        let out_alphabets: Vec<Alphabet> = keep.iter().map(|&a| self.alphabets[a].clone()).collect();
        let out_shape: Vec<usize> = keep.iter().map(|&a| shape[a]).collect();
        let mut out = vec![0.0; out_shape.iter().product()];
        let mut picked = vec![0; keep.len()];
        for (flat, &p) in self.probs.iter().enumerate() {
            let idx = decode_tuple(&shape, flat);
            for (slot, &a) in picked.iter_mut().zip(keep) {
                *slot = idx[a];
            }
            out[encode_tuple(&out_shape, &picked)] += p;
        }
        JointPmf::new(out_alphabets, out)
    }

    /// Collapse a one-axis joint into a [`Pmf`].
    pub fn to_pmf(&self) -> Result<Pmf> {
        if self.n_axes() != 1 {
            return Err(Error::Dimension(format!(
                "expected one axis, joint has {}",
                self.n_axes()
            )));
        }
        Pmf::new(self.alphabets[0].clone(), self.probs.clone())
    }
}

/// A family of row-stochastic distributions indexed by condition tuples.
///
/// The last condition axis is, by convention, the channel input; any leading
/// axes are conditioning context shared with other tensors (a destination
/// past, say). A tensor with no condition axes holds exactly one row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionTensor {
    conditions: Vec<Alphabet>,
    output: Alphabet,
    data: Vec<f64>,
    support: Vec<bool>,
}

impl TransitionTensor {
    /// Build from explicit rows; `None` marks an unobserved condition tuple.
    pub fn new(conditions: Vec<Alphabet>, output: Alphabet, rows: Vec<Option<Vec<f64>>>) -> Result<Self> {
        let n_rows: usize = conditions.iter().map(Alphabet::len).product();
        if rows.len() != n_rows {
            return Err(Error::Dimension(format!(
                "{} rows for {} condition tuples",
                rows.len(),
                n_rows
            )));
        }
        let n_out = output.len();
        let mut data = vec![0.0; n_rows * n_out];
        let mut support = vec![false; n_rows];
        for (r, row) in rows.into_iter().enumerate() {
            if let Some(mut row) = row {
                if row.len() != n_out {
                    return Err(Error::Dimension(format!(
                        "row {r} has {} entries, output alphabet has {n_out}",
                        row.len()
                    )));
                }
                validate_probabilities(&mut row)
                    .map_err(|e| match e {
                        Error::Validation(m) => Error::Validation(format!("row {r}: {m}")),
                        other => other,
                    })?;
                data[r * n_out..(r + 1) * n_out].copy_from_slice(&row);
                support[r] = true;
            }
        }
        Ok(Self {
            conditions,
            output,
            data,
            support,
        })
    }

    /// A plain channel matrix `A[i][j] = p(j | i)` over indexed alphabets.
    pub fn channel(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_in = rows.len();
        let n_out = rows.first().map_or(0, Vec::len);
        if n_in == 0 || n_out == 0 {
            return Err(Error::Dimension("channel needs at least one row and column".into()));
        }
        Self::new(
            vec![Alphabet::indexed(n_in)],
            Alphabet::indexed(n_out),
            rows.into_iter().map(Some).collect(),
        )
    }

    /// Wrap a PMF as a tensor with no condition axes.
    pub fn from_pmf(pmf: &Pmf) -> Self {
        Self {
            conditions: Vec::new(),
            output: pmf.alphabet().clone(),
            data: pmf.probs().to_vec(),
            support: vec![true],
        }
    }

    /// Plug-in conditional estimate from a count array laid out as
    /// `[condition tuple][output]`. Conditions with zero total are absent.
    pub fn from_counts(conditions: Vec<Alphabet>, output: Alphabet, counts: &[u64]) -> Result<Self> {
        let n_rows: usize = conditions.iter().map(Alphabet::len).product();
        let n_out = output.len();
        if counts.len() != n_rows * n_out {
            return Err(Error::Dimension(format!(
                "{} counts for {n_rows} rows of width {n_out}",
                counts.len()
            )));
        }
        let mut data = vec![0.0; n_rows * n_out];
        let mut support = vec![false; n_rows];
        for r in 0..n_rows {
            let row = &counts[r * n_out..(r + 1) * n_out];
            let total: u64 = row.iter().sum();
            if total > 0 {
                support[r] = true;
                for (d, &c) in data[r * n_out..(r + 1) * n_out].iter_mut().zip(row) {
                    *d = c as f64 / total as f64;
                }
            }
        }
        Ok(Self {
            conditions,
            output,
            data,
            support,
        })
    }

    /// Rows already known to be stochastic (results of contractions).
    pub(crate) fn from_raw(conditions: Vec<Alphabet>, output: Alphabet, data: Vec<f64>, support: Vec<bool>) -> Self {
        debug_assert_eq!(data.len(), support.len() * output.len());
        debug_assert!(data
            .chunks(output.len())
            .zip(&support)
            .all(|(row, &s)| !s || (row.iter().sum::<f64>() - 1.0).abs() < 1e-9));
        Self {
            conditions,
            output,
            data,
            support,
        }
    }

    pub fn conditions(&self) -> &[Alphabet] {
        &self.conditions
    }

    pub fn output(&self) -> &Alphabet {
        &self.output
    }

    pub fn condition_radices(&self) -> Vec<usize> {
        self.conditions.iter().map(Alphabet::len).collect()
    }

    pub fn n_rows(&self) -> usize {
        self.support.len()
    }

    pub fn n_outputs(&self) -> usize {
        self.output.len()
    }

    pub fn support_mask(&self) -> &[bool] {
        &self.support
    }

    pub fn is_supported(&self, row: usize) -> bool {
        self.support[row]
    }

    pub fn row(&self, row: usize) -> Option<&[f64]> {
        if self.support[row] {
            let n = self.output.len();
            Some(&self.data[row * n..(row + 1) * n])
        } else {
            None
        }
    }

    pub fn flat_index(&self, tuple: &[usize]) -> usize {
        encode_tuple(&self.condition_radices(), tuple)
    }

    pub fn condition_tuple(&self, row: usize) -> Vec<usize> {
        decode_tuple(&self.condition_radices(), row)
    }

    pub fn row_at(&self, tuple: &[usize]) -> Option<&[f64]> {
        self.row(self.flat_index(tuple))
    }

    pub fn supported_rows(&self) -> impl Iterator<Item = (usize, &[f64])> {
        let n = self.output.len();
        self.data
            .chunks(n)
            .zip(&self.support)
            .enumerate()
            .filter_map(|(r, (row, &s))| s.then_some((r, row)))
    }

    /// Fix the first condition axis to `value`, returning the tensor over the
    /// remaining axes.
    pub fn slice_leading(&self, value: usize) -> Result<TransitionTensor> {
        let Some(first) = self.conditions.first() else {
            return Err(Error::Dimension("tensor has no condition axes".into()));
        };
        if value >= first.len() {
            return Err(Error::Dimension(format!(
                "leading index {value} out of range {}",
                first.len()
            )));
        }
        let rest = self.conditions[1..].to_vec();
        let block: usize = rest.iter().map(Alphabet::len).product();
        let n = self.output.len();
        Ok(Self {
            conditions: rest,
            output: self.output.clone(),
            data: self.data[value * block * n..(value + 1) * block * n].to_vec(),
            support: self.support[value * block..(value + 1) * block].to_vec(),
        })
    }

    /// The channel as a dense matrix; every row must be present.
    pub fn to_matrix(&self) -> Result<Vec<Vec<f64>>> {
        (0..self.n_rows())
            .map(|r| {
                self.row(r).map(<[f64]>::to_vec).ok_or_else(|| Error::MissingRow {
                    tuple: self.condition_tuple(r),
                })
            })
            .collect()
    }

    /// Largest absolute entrywise difference over rows supported in both.
    pub fn max_abs_diff(&self, other: &TransitionTensor) -> Result<f64> {
        if self.condition_radices() != other.condition_radices() || self.n_outputs() != other.n_outputs() {
            return Err(Error::Dimension("tensor shapes differ".into()));
        }
        let mut worst: f64 = 0.0;
        for (r, row) in self.supported_rows() {
            if let Some(o) = other.row(r) {
                for (a, b) in row.iter().zip(o) {
                    worst = worst.max((a - b).abs());
                }
            }
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixed_radix_round_trip() {
        let radices = [2, 3, 4];
        for idx in 0..24 {
            assert_eq!(encode_tuple(&radices, &decode_tuple(&radices, idx)), idx);
        }
        assert_eq!(encode_tuple(&radices, &[1, 0, 0]), 12);
        assert_eq!(encode_tuple(&radices, &[0, 2, 3]), 11);
    }

    #[test]
    fn power_alphabet_is_lexicographic() {
        let bin = Alphabet::indexed(2);
        let sq = bin.power(2);
        assert_eq!(sq.labels(), ["(0,0)", "(0,1)", "(1,0)", "(1,1)"]);
        assert_eq!(bin.power(0).len(), 1);
    }

    #[test]
    fn alphabet_rejects_duplicates_and_empty() {
        assert!(Alphabet::new(vec![]).is_err());
        assert!(Alphabet::new(vec!["a".into(), "a".into()]).is_err());
        let a = Alphabet::new(vec!["lo".into(), "hi".into()]).unwrap();
        assert_eq!(a.position("hi"), Some(1));
    }

    #[test]
    fn pmf_validation_tiers() {
        assert!(Pmf::from_probs(vec![0.5, 0.5]).is_ok());
        // drift within 1e-9 is renormalized
        let p = Pmf::from_probs(vec![0.5, 0.5 + 5e-10]).unwrap();
        assert!((p.probs().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(Pmf::from_probs(vec![0.5, 0.6]).is_err());
        assert!(Pmf::from_probs(vec![1.5, -0.5]).is_err());
        assert!(Pmf::from_probs(vec![f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn joint_marginals() {
        let j = JointPmf::new(
            vec![Alphabet::indexed(2), Alphabet::indexed(3)],
            vec![0.1, 0.2, 0.1, 0.3, 0.2, 0.1],
        )
        .unwrap();
        let mx = j.marginal(&[0]).unwrap().to_pmf().unwrap();
        assert!((mx.get(0) - 0.4).abs() < 1e-15);
        let swapped = j.marginal(&[1, 0]).unwrap();
        assert_eq!(swapped.shape(), vec![3, 2]);
        assert!((swapped.get(&[2, 1]) - j.get(&[1, 2])).abs() < 1e-15);
    }

    #[test]
    fn tensor_from_counts_marks_absent_rows() {
        let t = TransitionTensor::from_counts(
            vec![Alphabet::indexed(3)],
            Alphabet::indexed(2),
            &[3, 1, 0, 0, 2, 2],
        )
        .unwrap();
        assert_eq!(t.row(0), Some(&[0.75, 0.25][..]));
        assert_eq!(t.row(1), None);
        assert_eq!(t.support_mask(), &[true, false, true]);
        assert!(matches!(t.to_matrix(), Err(Error::MissingRow { tuple }) if tuple == vec![1]));
    }

    #[test]
    fn slice_leading_axis() {
        let t = TransitionTensor::from_counts(
            vec![Alphabet::indexed(2), Alphabet::indexed(2)],
            Alphabet::indexed(2),
            &[1, 0, 0, 1, 1, 1, 0, 0],
        )
        .unwrap();
        let s = t.slice_leading(1).unwrap();
        assert_eq!(s.row(0), Some(&[0.5, 0.5][..]));
        assert_eq!(s.row(1), None);
    }

    #[test]
    fn tensor_rejects_bad_rows() {
        assert!(TransitionTensor::channel(vec![vec![0.5, 0.6], vec![1.0, 0.0]]).is_err());
        assert!(TransitionTensor::channel(vec![vec![0.5, 0.5], vec![1.0]]).is_err());
    }
}
