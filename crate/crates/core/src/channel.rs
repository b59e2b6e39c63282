//! Channel algebra on transition tensors: transmission of a PMF, cascading
//! two channels, and the Bayes reversal of a channel given its input.
//!
//! Shared condition axes are contracted by index equality inside the loops;
//! no Kronecker-delta arrays are ever built.

use crate::error::{Error, Result};
use crate::prob::{Alphabet, Pmf, TransitionTensor};

/// Split a tensor's condition axes into (shared context, input).
fn context_and_input(t: &TransitionTensor, what: &str) -> Result<(Vec<Alphabet>, Alphabet)> {
    match t.conditions().split_last() {
        Some((input, context)) => Ok((context.to_vec(), input.clone())),
        None => Err(Error::Dimension(format!("{what} has no input axis"))),
    }
}

/// `p^j = Σ_i p^i A^j_i`.
pub fn apply_channel(input: &Pmf, channel: &TransitionTensor) -> Result<Pmf> {
    if channel.conditions().len() != 1 {
        return Err(Error::Dimension(format!(
            "expected a plain channel with one input axis, got {} condition axes",
            channel.conditions().len()
        )));
    }
    if channel.conditions()[0] != *input.alphabet() {
        return Err(Error::Dimension(format!(
            "input has {} symbols, channel input axis has {}",
            input.len(),
            channel.conditions()[0].len()
        )));
    }
    let mut out = vec![0.0; channel.n_outputs()];
    for (i, &p) in input.probs().iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let row = channel.row(i).ok_or(Error::MissingRow { tuple: vec![i] })?;
        for (o, a) in out.iter_mut().zip(row) {
            *o += p * a;
        }
    }
    Pmf::new(channel.output().clone(), out)
}

/// Cascade `a` then `b`: `C^k_{s i} = Σ_j A^j_{s i} B^k_{s j}`.
///
/// Both tensors carry the same leading context axes `s` (possibly none),
/// which are matched by index equality; `a`'s output alphabet must be `b`'s
/// input axis. A result row is absent when `a`'s row is absent or when it
/// puts mass on a `j` whose row in `b` is absent.
pub fn compose_chain(a: &TransitionTensor, b: &TransitionTensor) -> Result<TransitionTensor> {
    let (ctx_a, in_a) = context_and_input(a, "first tensor")?;
    let (ctx_b, in_b) = context_and_input(b, "second tensor")?;
    if ctx_a != ctx_b {
        return Err(Error::Dimension(format!(
            "context axes differ: {:?} vs {:?}",
            ctx_a.iter().map(Alphabet::len).collect::<Vec<_>>(),
            ctx_b.iter().map(Alphabet::len).collect::<Vec<_>>()
        )));
    }
    if *a.output() != in_b {
        return Err(Error::Dimension(format!(
            "first tensor outputs {} symbols, second expects {}",
            a.n_outputs(),
            in_b.len()
        )));
    }
    let n_ctx: usize = ctx_a.iter().map(Alphabet::len).product();
    let (ni, nj, nk) = (in_a.len(), in_b.len(), b.n_outputs());
    let mut data = vec![0.0; n_ctx * ni * nk];
    let mut support = vec![false; n_ctx * ni];
    for s in 0..n_ctx {
        'rows: for i in 0..ni {
            let Some(row_a) = a.row(s * ni + i) else { continue };
            let out = &mut data[(s * ni + i) * nk..(s * ni + i + 1) * nk];
            for (j, &aj) in row_a.iter().enumerate() {
                if aj == 0.0 {
                    continue;
                }
                let Some(row_b) = b.row(s * nj + j) else {
                    out.iter_mut().for_each(|v| *v = 0.0);
                    continue 'rows;
                };
                for (o, bk) in out.iter_mut().zip(row_b) {
                    *o += aj * bk;
                }
            }
            support[s * ni + i] = true;
        }
    }
    let mut conditions = ctx_a;
    conditions.push(in_a);
    Ok(TransitionTensor::from_raw(conditions, b.output().clone(), data, support))
}

/// The reversed channel `A‡^i_j = p^i A^j_i / p^j` of a plain channel.
pub fn dagger(channel: &TransitionTensor, input: &Pmf) -> Result<TransitionTensor> {
    if channel.conditions().len() != 1 {
        return Err(Error::Dimension(format!(
            "expected a plain channel with one input axis, got {} condition axes",
            channel.conditions().len()
        )));
    }
    dagger_conditional(channel, &TransitionTensor::from_pmf(input))
}

/// Context-wise reversal: `A‡^i_{s j} = p^i_s A^j_{s i} / p^j_s` with
/// `p^j_s = Σ_i p^i_s A^j_{s i}`.
///
/// `input` holds `p^i_s` with condition axes equal to the channel's context
/// axes. Rows with `p^j_s = 0` are absent. An input symbol with positive
/// mass and no channel row is an error.
pub fn dagger_conditional(channel: &TransitionTensor, input: &TransitionTensor) -> Result<TransitionTensor> {
    let (ctx, in_alpha) = context_and_input(channel, "channel")?;
    if input.conditions() != ctx.as_slice() {
        return Err(Error::Dimension(
            "input distribution must be conditioned on exactly the channel's context axes".into(),
        ));
    }
    if *input.output() != in_alpha {
        return Err(Error::Dimension(format!(
            "input distribution has {} symbols, channel input axis has {}",
            input.n_outputs(),
            in_alpha.len()
        )));
    }
    let n_ctx: usize = ctx.iter().map(Alphabet::len).product();
    let (ni, nj) = (in_alpha.len(), channel.n_outputs());
    let mut data = vec![0.0; n_ctx * nj * ni];
    let mut support = vec![false; n_ctx * nj];
    for s in 0..n_ctx {
        let Some(p_in) = input.row(s) else { continue };
        let mut p_out = vec![0.0; nj];
        for (i, &pi) in p_in.iter().enumerate() {
            if pi == 0.0 {
                continue;
            }
            let row = channel.row(s * ni + i).ok_or_else(|| Error::MissingRow {
                tuple: channel.condition_tuple(s * ni + i),
            })?;
            for (o, a) in p_out.iter_mut().zip(row) {
                *o += pi * a;
            }
        }
        for (j, &pj) in p_out.iter().enumerate() {
            if pj <= 0.0 {
                continue;
            }
            let out = &mut data[(s * nj + j) * ni..(s * nj + j + 1) * ni];
            for (i, &pi) in p_in.iter().enumerate() {
                if pi > 0.0 {
                    out[i] = pi * channel.row(s * ni + i).expect("checked above")[j] / pj;
                }
            }
            support[s * nj + j] = true;
        }
    }
    let mut conditions = ctx;
    conditions.push(channel.output().clone());
    Ok(TransitionTensor::from_raw(conditions, in_alpha, data, support))
}
