//! Tensor relations between the bivariate channels of a three-process system.
//!
//! With `A: X → Y`, `B: Y → Z` and `C: X → Z` estimated on a common time
//! alignment (see [`triad`]):
//!
//! - a chain `X → Y → Z` implies `C^k_{hî} = Σ_ĵ Ā^ĵ_{hî} B^k_{hĵ}`;
//! - a fork `Y ← X → Z` implies `B^k_{hĵ} = Σ_î Ā‡^î_{hĵ} C^k_{hî}`;
//!
//! where `Ā^ĵ_{hî} = Σ_g p(g | h, î) A^ĵ_{gî}` folds the destination past `g`
//! of `Y` into the past `h` of `Z`. The two are indistinguishable exactly
//! when `Ā` is noiseless for every `h`.

pub mod classify;
pub mod triad;

use serde::{Deserialize, Serialize};

use crate::channel::compose_chain;
use crate::error::{Error, Result};
use crate::prob::TransitionTensor;

pub use classify::{
    analyze_triad, classify_triad, measure_relation, Classification, ClassifierConfig, Qualifier, RelationEstimate,
    Series, TriadAnalysis, TriadVerdict,
};

/// Which of two triad structures a test assumes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hypothesis {
    Chain,
    Fork,
}

/// `Ā^ĵ_{hî} = Σ_g W^g_{hî} A^ĵ_{gî}`.
///
/// `a` has conditions `[g, î]`; `weights` has conditions `[h, î]` and output
/// alphabet `g`. The result has conditions `[h, î]` and `a`'s output. A row is
/// absent when its weight row is absent or when it needs an absent row of `a`.
pub fn bar_tensor(a: &TransitionTensor, weights: &TransitionTensor) -> Result<TransitionTensor> {
    if a.conditions().len() != 2 || weights.conditions().len() != 2 {
        return Err(Error::Dimension(
            "expected a [g, input] tensor and [h, input] weights".into(),
        ));
    }
    if a.conditions()[1] != weights.conditions()[1] {
        return Err(Error::Dimension("input axes of tensor and weights differ".into()));
    }
    if a.conditions()[0] != *weights.output() {
        return Err(Error::Dimension("weights are not a distribution over the tensor's g axis".into()));
    }
    let nh = weights.conditions()[0].len();
    let ni = a.conditions()[1].len();
    let nj = a.n_outputs();
    let mut data = vec![0.0; nh * ni * nj];
    let mut support = vec![false; nh * ni];
    for h in 0..nh {
        'rows: for i in 0..ni {
            let Some(w) = weights.row(h * ni + i) else { continue };
            let out = &mut data[(h * ni + i) * nj..(h * ni + i + 1) * nj];
            for (g, &wg) in w.iter().enumerate() {
                if wg == 0.0 {
                    continue;
                }
                let Some(row) = a.row(g * ni + i) else {
                    out.iter_mut().for_each(|v| *v = 0.0);
                    continue 'rows;
                };
                for (o, v) in out.iter_mut().zip(row) {
                    *o += wg * v;
                }
            }
            support[h * ni + i] = true;
        }
    }
    Ok(TransitionTensor::from_raw(
        weights.conditions().to_vec(),
        a.output().clone(),
        data,
        support,
    ))
}

/// Sup-norm distance between `target` and the cascade `first ∘ second`, over
/// the rows supported in `target`.
fn cascade_residual(first: &TransitionTensor, second: &TransitionTensor, target: &TransitionTensor) -> Result<f64> {
    let predicted = compose_chain(first, second)?;
    if predicted.condition_radices() != target.condition_radices() || predicted.n_outputs() != target.n_outputs() {
        return Err(Error::Dimension("predicted and measured tensors have different shapes".into()));
    }
    let mut worst: f64 = 0.0;
    for (r, row) in target.supported_rows() {
        let p = predicted.row(r).ok_or_else(|| Error::MissingRow {
            tuple: target.condition_tuple(r),
        })?;
        for (a, b) in row.iter().zip(p) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(worst)
}

/// `max |C^k_{hî} - Σ_ĵ Ā^ĵ_{hî} B^k_{hĵ}|`; zero when `C` is exactly the
/// chain cascade.
pub fn chain_residual(a_bar: &TransitionTensor, b: &TransitionTensor, c: &TransitionTensor) -> Result<f64> {
    cascade_residual(a_bar, b, c)
}

/// `max |B^k_{hĵ} - Σ_î Ā‡^î_{hĵ} C^k_{hî}|`; zero when `B` is exactly the
/// fork cascade.
pub fn fork_residual(a_bar_dagger: &TransitionTensor, c: &TransitionTensor, b: &TransitionTensor) -> Result<f64> {
    cascade_residual(a_bar_dagger, c, b)
}

/// Largest deviation of `Ā‡Ā` and `ĀĀ‡` from the identity, per context.
pub fn noiseless_deviation(a_bar: &TransitionTensor, a_bar_dagger: &TransitionTensor) -> Result<f64> {
    let forward_back = compose_chain(a_bar_dagger, a_bar)?;
    let back_forward = compose_chain(a_bar, a_bar_dagger)?;
    let mut worst: f64 = 0.0;
    let mut any = false;
    for t in [&forward_back, &back_forward] {
        let n_in = t.conditions().last().map_or(1, |a| a.len());
        for (r, row) in t.supported_rows() {
            any = true;
            let diag = r % n_in;
            for (k, v) in row.iter().enumerate() {
                let target = if k == diag { 1.0 } else { 0.0 };
                worst = worst.max((v - target).abs());
            }
        }
    }
    if any {
        Ok(worst)
    } else {
        Err(Error::InsufficientData { required: 1, actual: 0 })
    }
}

/// True iff both double contractions of `Ā` with `Ā‡` are the identity
/// within `tol` on every supported row.
pub fn noiseless_check(a_bar: &TransitionTensor, a_bar_dagger: &TransitionTensor, tol: f64) -> bool {
    noiseless_deviation(a_bar, a_bar_dagger).is_ok_and(|d| d <= tol)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum DpiOutcome {
    Consistent,
    Violated { margin: f64 },
}

/// `te_xz <= min(te_xy, te_yz) + tol`.
pub fn dpi_check(te_xy: f64, te_yz: f64, te_xz: f64, tol: f64) -> DpiOutcome {
    let cap = te_xy.min(te_yz);
    if te_xz <= cap + tol {
        DpiOutcome::Consistent
    } else {
        DpiOutcome::Violated { margin: te_xz - cap }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DelayOutcome {
    Consistent,
    Inconsistent,
    Unphysical,
}

/// Delay bookkeeping for a chain `X → Y → Z` or a fork `Y ← X → Z`.
///
/// Chain delays add: `τ_xz = τ_xy + τ_yz`. Reversal negates a delay, so the
/// fork read as the chain `Y →‡ X → Z` predicts `τ_yz = τ_xz - τ_xy`; a
/// negative prediction means the apparent `Y → Z` relation cannot come from
/// this fork.
pub fn delay_additivity_check(tau_xy: i64, tau_yz: i64, tau_xz: i64, hypothesis: Hypothesis, slack: i64) -> DelayOutcome {
    let (predicted, measured) = match hypothesis {
        Hypothesis::Chain => (tau_xy + tau_yz, tau_xz),
        Hypothesis::Fork => (tau_xz - tau_xy, tau_yz),
    };
    if predicted < 0 {
        DelayOutcome::Unphysical
    } else if (measured - predicted).abs() <= slack {
        DelayOutcome::Consistent
    } else {
        DelayOutcome::Inconsistent
    }
}

/// `D^k_{h î ĵ}`: a destination driven jointly by two sources.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiInputTensor(TransitionTensor);

impl MultiInputTensor {
    /// `tensor` must have conditions `[h, î, ĵ]`.
    pub fn new(tensor: TransitionTensor) -> Result<Self> {
        if tensor.conditions().len() != 3 {
            return Err(Error::Dimension(format!(
                "multi-input tensor needs conditions [h, i, j], got {} axes",
                tensor.conditions().len()
            )));
        }
        Ok(Self(tensor))
    }

    pub fn tensor(&self) -> &TransitionTensor {
        &self.0
    }

    /// `N`, the first input cardinality.
    pub fn n_first(&self) -> usize {
        self.0.conditions()[1].len()
    }

    /// `M`, the second input cardinality.
    pub fn n_second(&self) -> usize {
        self.0.conditions()[2].len()
    }
}

/// The bivariate tensors a v-structure `X → Z ← Y` presents:
/// `C^k_{hî} = Σ_ĵ p(ĵ | h, î) D^k_{hîĵ}` and
/// `B^k_{hĵ} = Σ_î p(î | h, ĵ) D^k_{hîĵ}`.
///
/// `j_given_hi` has conditions `[h, î]` over `ĵ`; `i_given_hj` has conditions
/// `[h, ĵ]` over `î`.
pub fn v_structure_marginals(
    d: &MultiInputTensor,
    j_given_hi: &TransitionTensor,
    i_given_hj: &TransitionTensor,
) -> Result<(TransitionTensor, TransitionTensor)> {
    let dt = d.tensor();
    let [h_ax, i_ax, j_ax] = [&dt.conditions()[0], &dt.conditions()[1], &dt.conditions()[2]];
    if j_given_hi.conditions() != [h_ax.clone(), i_ax.clone()] || j_given_hi.output() != j_ax {
        return Err(Error::Dimension("p(j | h, i) does not match the tensor axes".into()));
    }
    if i_given_hj.conditions() != [h_ax.clone(), j_ax.clone()] || i_given_hj.output() != i_ax {
        return Err(Error::Dimension("p(i | h, j) does not match the tensor axes".into()));
    }
    let (nh, ni, nj, nk) = (h_ax.len(), i_ax.len(), j_ax.len(), dt.n_outputs());

    // marginalize D over one input axis, weighting by the given conditional
    let marginal = |outer: usize, weights: &TransitionTensor, over_j: bool| -> TransitionTensor {
        let n_inner = if over_j { nj } else { ni };
        let mut data = vec![0.0; nh * outer * nk];
        let mut support = vec![false; nh * outer];
        for h in 0..nh {
            'rows: for a in 0..outer {
                let Some(w) = weights.row(h * outer + a) else { continue };
                let out = &mut data[(h * outer + a) * nk..(h * outer + a + 1) * nk];
                for (b, &wb) in w.iter().enumerate().take(n_inner) {
                    if wb == 0.0 {
                        continue;
                    }
                    let (i, j) = if over_j { (a, b) } else { (b, a) };
                    let Some(row) = dt.row((h * ni + i) * nj + j) else {
                        out.iter_mut().for_each(|v| *v = 0.0);
                        continue 'rows;
                    };
                    for (o, v) in out.iter_mut().zip(row) {
                        *o += wb * v;
                    }
                }
                support[h * outer + a] = true;
            }
        }
        let conditions = if over_j {
            vec![h_ax.clone(), i_ax.clone()]
        } else {
            vec![h_ax.clone(), j_ax.clone()]
        };
        TransitionTensor::from_raw(conditions, dt.output().clone(), data, support)
    };
    let c = marginal(ni, j_given_hi, true);
    let b = marginal(nj, i_given_hj, false);
    Ok((c, b))
}

/// Whether bivariate measurements determine a two-input tensor whose inputs
/// take at most `n` and `m` values. Only `n, m ∈ {1, 2}` qualify.
pub fn bivariate_identifiable(n: usize, m: usize) -> bool {
    (1..=2).contains(&n) && (1..=2).contains(&m)
}
