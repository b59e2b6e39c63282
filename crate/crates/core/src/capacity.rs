//! Capacity of discrete memoryless channels by Blahut–Arimoto alternating
//! maximization, and the subchannel-weighted capacity bound on transfer
//! entropy.
//!
//! Each iteration evaluates the information density
//! `D_i = Σ_j W_ij log2(W_ij / q_j)` of every input under the current output
//! distribution `q`. The achieved rate `I(p) = Σ_i p_i D_i` never exceeds the
//! capacity and `max_i D_i` never falls below it, so `max_i D_i - I(p)` is a
//! certified bound on the remaining gap.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::estimation::{estimate_subchannels, embed, EmbeddingSpec, JointCounts, SubchannelEstimate, Symbol};
use crate::prob::{Pmf, TransitionTensor};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityResult {
    pub capacity_bits: f64,
    pub optimal_input: Pmf,
    pub iterations: usize,
    pub converged: bool,
    /// Certified upper bound on `C - capacity_bits`.
    pub gap_bound: f64,
    /// Output symbols no input can reach; dropped before iterating.
    pub dropped_outputs: Vec<usize>,
}

/// Result of the raw iteration on a dense matrix.
#[derive(Clone, Debug)]
pub(crate) struct RawCapacity {
    pub capacity: f64,
    pub input: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub gap: f64,
    pub dropped: Vec<usize>,
}

/// Fill `q` and `d` for input `p` and return the achieved rate.
fn densities(p: &[f64], w: &[Vec<f64>], q: &mut [f64], d: &mut [f64]) -> f64 {
    q.iter_mut().for_each(|v| *v = 0.0);
    for (pi, row) in p.iter().zip(w) {
        for (qj, wij) in q.iter_mut().zip(row) {
            *qj += pi * wij;
        }
    }
    for (di, row) in d.iter_mut().zip(w) {
        *di = row
            .iter()
            .zip(q.iter())
            .filter(|(&wij, _)| wij > 0.0)
            .map(|(&wij, &qj)| wij * (wij / qj).log2())
            .sum();
    }
    p.iter().zip(d.iter()).map(|(pi, di)| pi * di).sum()
}

/// `p_i ∝ p_i 2^{step (D_i - upper)}`; `false` if an input with mass would
/// underflow to zero.
fn multiplicative_step(p: &[f64], d: &[f64], upper: f64, step: f64, out: &mut [f64]) -> bool {
    let mut z = 0.0;
    for ((o, &pi), &di) in out.iter_mut().zip(p).zip(d) {
        *o = pi * (step * (di - upper)).exp2();
        if pi > 0.0 && *o == 0.0 {
            return false;
        }
        z += *o;
    }
    out.iter_mut().for_each(|o| *o /= z);
    true
}

const MAX_STEP: f64 = 1024.0;

/// Blahut–Arimoto on row-stochastic `rows`. `observe` sees the achieved rate
/// after every iteration.
///
/// Alongside the plain update the iteration tries an over-relaxed one,
/// `p_i ∝ p_i 2^{μ D_i}`, and keeps it only when its rate is at least that of
/// the plain update. `μ` doubles on success and resets to 2 on failure, so the
/// rate stays monotone. This matters for nearly useless channels, where the
/// plain update moves very little per iteration.
pub(crate) fn blahut_arimoto_rows(
    rows: &[&[f64]],
    tol: f64,
    max_iter: usize,
    mut observe: impl FnMut(f64),
) -> RawCapacity {
    let n_in = rows.len();
    let n_out_full = rows.first().map_or(0, |r| r.len());
    let dropped: Vec<usize> = (0..n_out_full)
        .filter(|&j| rows.iter().all(|r| r[j] == 0.0))
        .collect();
    let kept: Vec<usize> = (0..n_out_full).filter(|j| !dropped.contains(j)).collect();
    let w: Vec<Vec<f64>> = rows.iter().map(|r| kept.iter().map(|&j| r[j]).collect()).collect();

    let mut p = vec![1.0 / n_in as f64; n_in];
    let mut plain = p.clone();
    let mut relaxed = p.clone();
    let mut q = vec![0.0; kept.len()];
    let mut d = vec![0.0; n_in];
    let (mut q_try, mut d_try) = (q.clone(), d.clone());
    let mut best = (f64::NEG_INFINITY, p.clone(), f64::INFINITY);
    let mut converged = false;
    let mut iterations = 0;
    let mut step = 2.0;
    while iterations < max_iter {
        iterations += 1;
        let rate = densities(&p, &w, &mut q, &mut d);
        let upper = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let gap = (upper - rate).max(0.0);
        observe(rate);
        if rate > best.0 {
            best = (rate, p.clone(), gap);
        }
        if gap <= tol {
            converged = true;
            best = (rate, p.clone(), gap);
            break;
        }
        multiplicative_step(&p, &d, upper, 1.0, &mut plain);
        let accepted = multiplicative_step(&p, &d, upper, step, &mut relaxed)
            && densities(&relaxed, &w, &mut q_try, &mut d_try) >= densities(&plain, &w, &mut q_try, &mut d_try);
        if accepted {
            p.copy_from_slice(&relaxed);
            step = (step * 2.0).min(MAX_STEP);
        } else {
            p.copy_from_slice(&plain);
            step = 2.0;
        }
    }
    let (capacity, input, gap) = best;
    RawCapacity {
        capacity: capacity.max(0.0),
        input,
        iterations,
        converged,
        gap,
        dropped,
    }
}

/// Capacity of a plain channel (one condition axis, every row present).
pub fn blahut_arimoto(channel: &TransitionTensor, tol: f64, max_iter: usize) -> Result<CapacityResult> {
    if channel.conditions().len() != 1 {
        return Err(Error::Dimension(format!(
            "capacity needs a plain channel, got {} condition axes",
            channel.conditions().len()
        )));
    }
    if !(tol > 0.0) || max_iter == 0 {
        return Err(Error::Config("tolerance must be positive and max_iter nonzero".into()));
    }
    let rows: Vec<&[f64]> = (0..channel.n_rows())
        .map(|r| channel.row(r).ok_or(Error::MissingRow { tuple: vec![r] }))
        .collect::<Result<_>>()?;
    let raw = blahut_arimoto_rows(&rows, tol, max_iter, |_| {});
    Ok(CapacityResult {
        capacity_bits: raw.capacity,
        optimal_input: Pmf::new(channel.conditions()[0].clone(), raw.input)?,
        iterations: raw.iterations,
        converged: raw.converged,
        gap_bound: raw.gap,
        dropped_outputs: raw.dropped,
    })
}

/// `Σ_g p(g) C_g` over the observed subchannels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityBound {
    pub bound_bits: f64,
    pub per_subchannel: BTreeMap<usize, CapacityResult>,
    pub all_converged: bool,
}

/// Capacity of subchannel `g`, restricted to the inputs observed under `g`.
fn subchannel_capacity(est: &SubchannelEstimate, g: usize, tol: f64, max_iter: usize) -> Result<CapacityResult> {
    let sub = est.tensor.slice_leading(g)?;
    let observed: Vec<(usize, &[f64])> = sub.supported_rows().collect();
    let rows: Vec<&[f64]> = observed.iter().map(|&(_, r)| r).collect();
    let raw = blahut_arimoto_rows(&rows, tol, max_iter, |_| {});
    let mut input = vec![0.0; sub.n_rows()];
    for (&(i, _), p) in observed.iter().zip(&raw.input) {
        input[i] = *p;
    }
    Ok(CapacityResult {
        capacity_bits: raw.capacity,
        optimal_input: Pmf::new(sub.conditions()[0].clone(), input)?,
        iterations: raw.iterations,
        converged: raw.converged,
        gap_bound: raw.gap,
        dropped_outputs: raw.dropped,
    })
}

/// Upper bound on transfer entropy over source distributions: every
/// subchannel transmits at most its own capacity.
pub fn te_capacity_bound(est: &SubchannelEstimate, tol: f64) -> Result<CapacityBound> {
    te_capacity_bound_with(est, tol, DEFAULT_MAX_ITER)
}

pub fn te_capacity_bound_with(est: &SubchannelEstimate, tol: f64, max_iter: usize) -> Result<CapacityBound> {
    if !(tol > 0.0) || max_iter == 0 {
        return Err(Error::Config("tolerance must be positive and max_iter nonzero".into()));
    }
    let mut bound = 0.0;
    let mut per_subchannel = BTreeMap::new();
    for &g in est.per_subchannel_mi.keys() {
        let res = subchannel_capacity(est, g, tol, max_iter)?;
        bound += est.past_weights.get(g) * res.capacity_bits;
        per_subchannel.insert(g, res);
    }
    Ok(CapacityBound {
        bound_bits: bound,
        all_converged: per_subchannel.values().all(|r| r.converged),
        per_subchannel,
    })
}

/// Same bound straight from counts, for the delay and surrogate loops.
pub(crate) struct FastBound {
    pub bound_bits: f64,
    pub all_converged: bool,
}

pub(crate) fn bound_from_counts(counts: &JointCounts, tol: f64, max_iter: usize) -> FastBound {
    let (ng, ni, nj) = counts.shape();
    let n = counts.total() as f64;
    let mut bound = 0.0;
    let mut all_converged = true;
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(ni);
    for g in 0..ng {
        let block = counts.block(g);
        let mass: u64 = block.iter().sum();
        if mass == 0 {
            continue;
        }
        rows.clear();
        for i in 0..ni {
            let r = &block[i * nj..(i + 1) * nj];
            let tot: u64 = r.iter().sum();
            if tot > 0 {
                rows.push(r.iter().map(|&c| c as f64 / tot as f64).collect());
            }
        }
        let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
        let raw = blahut_arimoto_rows(&refs, tol, max_iter, |_| {});
        all_converged &= raw.converged;
        bound += mass as f64 / n * raw.capacity;
    }
    FastBound {
        bound_bits: bound,
        all_converged,
    }
}

/// Estimate the subchannels of `x → y` and their capacity bound.
pub fn relation_capacity(x: &[Symbol], y: &[Symbol], spec: EmbeddingSpec, tol: f64) -> Result<(f64, SubchannelEstimate)> {
    let est = estimate_subchannels(&embed(x, y, spec)?)?;
    let bound = te_capacity_bound(&est, tol)?;
    Ok((bound.bound_bits, est))
}
