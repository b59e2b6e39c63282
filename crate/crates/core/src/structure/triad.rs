//! Common time alignment of three series and the tensors estimated on it.
//!
//! For a destination time `t` of `Z`:
//!
//! - `k = z_t` and `h = (z_{t-1}, …, z_{t-ℓ})`;
//! - `ĵ` is the `Y` vector ending at `s = t - τ_yz`, and `g` the `ℓ` values
//!   of `Y` before `s`;
//! - `î` is the `X` vector ending at `t - τ_xz`.
//!
//! The `X → Y` relation is then read at the implied delay `τ_xz - τ_yz`.

use serde::{Deserialize, Serialize};

use super::{bar_tensor, MultiInputTensor};
use crate::error::{Error, Result};
use crate::estimation::{check_symbols, encode_window, te_from_counts, JointCounts, Symbol};
use crate::prob::{Alphabet, TransitionTensor};

/// One aligned time step, as encoded indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriadSample {
    pub g: usize,
    pub h: usize,
    pub i: usize,
    pub j: usize,
    pub k: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriadDelays {
    pub tau_xz: usize,
    pub tau_yz: usize,
}

/// Alphabet sizes of the encoded indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Radices {
    g: usize,
    h: usize,
    i: usize,
    j: usize,
    k: usize,
}

fn first_valid(ell: usize, m_len: usize, delays: TriadDelays) -> usize {
    (delays.tau_yz + ell).max(delays.tau_yz + m_len - 1).max(delays.tau_xz + m_len - 1)
}

fn check_triad(x: &[Symbol], y: &[Symbol], z: &[Symbol], ell: usize, m_len: usize, cards: [usize; 3]) -> Result<()> {
    if x.len() != z.len() || y.len() != z.len() {
        return Err(Error::Dimension(format!(
            "series lengths differ: {}, {}, {}",
            x.len(),
            y.len(),
            z.len()
        )));
    }
    if ell == 0 || m_len == 0 {
        return Err(Error::Config("ell and m_len must be at least 1".into()));
    }
    check_symbols(x, cards[0])?;
    check_symbols(y, cards[1])?;
    check_symbols(z, cards[2])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriadSamples {
    pub ell: usize,
    pub m_len: usize,
    pub delays: TriadDelays,
    /// Alphabet sizes of `X`, `Y`, `Z`.
    pub cardinalities: [usize; 3],
    pub samples: Vec<TriadSample>,
}

/// Every tensor of the chain and fork relations, estimated on one alignment.
#[derive(Clone, Debug, PartialEq)]
pub struct TriadTensors {
    /// `A^ĵ_{gî}`: conditions `[g, î]`.
    pub a: TransitionTensor,
    /// `p^î_g`: conditions `[g]`.
    pub input_given_past: TransitionTensor,
    /// `A‡^î_{gĵ}`: conditions `[g, ĵ]`.
    pub a_dagger: TransitionTensor,
    /// `p^g_{hî}`: conditions `[h, î]`.
    pub weights_hi: TransitionTensor,
    /// `p^g_{hĵ}`: conditions `[h, ĵ]`.
    pub weights_hj: TransitionTensor,
    /// `Ā^ĵ_{hî}`.
    pub a_bar: TransitionTensor,
    /// `Ā‡^î_{hĵ}`.
    pub a_bar_dagger: TransitionTensor,
    /// `B^k_{hĵ}`.
    pub b: TransitionTensor,
    /// `C^k_{hî}`.
    pub c: TransitionTensor,
}

impl TriadSamples {
    /// Align `x`, `y`, `z` with source vectors of `m_len` symbols and pasts of
    /// `ell` symbols. `cards` are the alphabet sizes of the three series.
    pub fn collect(
        x: &[Symbol],
        y: &[Symbol],
        z: &[Symbol],
        ell: usize,
        m_len: usize,
        delays: TriadDelays,
        cards: [usize; 3],
    ) -> Result<Self> {
        check_triad(x, y, z, ell, m_len, cards)?;
        let start = first_valid(ell, m_len, delays);
        if z.len() <= start {
            return Err(Error::InsufficientData {
                required: start + 1,
                actual: z.len(),
            });
        }
        let [nx, ny, nz] = cards;
        let samples = (start..z.len())
            .map(|t| {
                let s = t - delays.tau_yz;
                TriadSample {
                    g: encode_window(y, s - 1, ell, ny),
                    h: encode_window(z, t - 1, ell, nz),
                    i: encode_window(x, t - delays.tau_xz, m_len, nx),
                    j: encode_window(y, s, m_len, ny),
                    k: z[t],
                }
            })
            .collect();
        Ok(Self {
            ell,
            m_len,
            delays,
            cardinalities: cards,
            samples,
        })
    }

    /// Same alignment metadata, different samples.
    pub fn with_samples(&self, samples: Vec<TriadSample>) -> Self {
        Self {
            samples,
            ..self.clone()
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    fn radices(&self) -> Radices {
        let [nx, ny, nz] = self.cardinalities;
        Radices {
            g: ny.pow(self.ell as u32),
            h: nz.pow(self.ell as u32),
            i: nx.pow(self.m_len as u32),
            j: ny.pow(self.m_len as u32),
            k: nz,
        }
    }

    pub fn tensors(&self) -> Result<TriadTensors> {
        if self.samples.is_empty() {
            return Err(Error::InsufficientData { required: 1, actual: 0 });
        }
        let r = self.radices();
        let [nx, ny, nz] = self.cardinalities;
        let g_ax = Alphabet::indexed(ny).power(self.ell);
        let h_ax = Alphabet::indexed(nz).power(self.ell);
        let i_ax = Alphabet::indexed(nx).power(self.m_len);
        let j_ax = Alphabet::indexed(ny).power(self.m_len);
        let k_ax = Alphabet::indexed(nz);

        let mut gij = vec![0u64; r.g * r.i * r.j];
        let mut gji = vec![0u64; r.g * r.j * r.i];
        let mut gi = vec![0u64; r.g * r.i];
        let mut hig = vec![0u64; r.h * r.i * r.g];
        let mut hjg = vec![0u64; r.h * r.j * r.g];
        let mut hjk = vec![0u64; r.h * r.j * r.k];
        let mut hik = vec![0u64; r.h * r.i * r.k];
        for s in &self.samples {
            gij[(s.g * r.i + s.i) * r.j + s.j] += 1;
            gji[(s.g * r.j + s.j) * r.i + s.i] += 1;
            gi[s.g * r.i + s.i] += 1;
            hig[(s.h * r.i + s.i) * r.g + s.g] += 1;
            hjg[(s.h * r.j + s.j) * r.g + s.g] += 1;
            hjk[(s.h * r.j + s.j) * r.k + s.k] += 1;
            hik[(s.h * r.i + s.i) * r.k + s.k] += 1;
        }
        let a = TransitionTensor::from_counts(vec![g_ax.clone(), i_ax.clone()], j_ax.clone(), &gij)?;
        let input_given_past = TransitionTensor::from_counts(vec![g_ax.clone()], i_ax.clone(), &gi)?;
        let a_dagger = TransitionTensor::from_counts(vec![g_ax.clone(), j_ax.clone()], i_ax.clone(), &gji)?;
        let weights_hi = TransitionTensor::from_counts(vec![h_ax.clone(), i_ax.clone()], g_ax.clone(), &hig)?;
        let weights_hj = TransitionTensor::from_counts(vec![h_ax.clone(), j_ax.clone()], g_ax, &hjg)?;
        let b = TransitionTensor::from_counts(vec![h_ax.clone(), j_ax], k_ax.clone(), &hjk)?;
        let c = TransitionTensor::from_counts(vec![h_ax, i_ax], k_ax, &hik)?;
        let a_bar = bar_tensor(&a, &weights_hi)?;
        let a_bar_dagger = bar_tensor(&a_dagger, &weights_hj)?;
        Ok(TriadTensors {
            a,
            input_given_past,
            a_dagger,
            weights_hi,
            weights_hj,
            a_bar,
            a_bar_dagger,
            b,
            c,
        })
    }
}

/// One aligned step of a destination `Z` with two sources: `(h, î, ĵ, k)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiInputSamples {
    pub ell: usize,
    pub m_len: usize,
    pub cardinalities: [usize; 3],
    /// `(h, î, ĵ) → k` counts, with `î` and `ĵ` fused into one input index.
    counts: JointCounts,
}

impl MultiInputSamples {
    /// Align as in [`TriadSamples::collect`]; `ĵ` is taken at `t - τ_yz`.
    #[allow(clippy::too_many_arguments)]
    pub fn collect(
        x: &[Symbol],
        y: &[Symbol],
        z: &[Symbol],
        ell: usize,
        m_len: usize,
        tau_xz: usize,
        tau_yz: usize,
        cards: [usize; 3],
    ) -> Result<Self> {
        check_triad(x, y, z, ell, m_len, cards)?;
        let start = ell.max(tau_xz + m_len - 1).max(tau_yz + m_len - 1);
        if z.len() <= start {
            return Err(Error::InsufficientData {
                required: start + 1,
                actual: z.len(),
            });
        }
        let [nx, ny, nz] = cards;
        let (nh, ni, nj) = (nz.pow(ell as u32), nx.pow(m_len as u32), ny.pow(m_len as u32));
        let mut counts = JointCounts::zeros(nh, ni * nj, nz);
        for t in start..z.len() {
            let h = encode_window(z, t - 1, ell, nz);
            let i = encode_window(x, t - tau_xz, m_len, nx);
            let j = encode_window(y, t - tau_yz, m_len, ny);
            counts.add(h, i * nj + j, z[t]);
        }
        Ok(Self {
            ell,
            m_len,
            cardinalities: cards,
            counts,
        })
    }

    pub fn counts(&self) -> &JointCounts {
        &self.counts
    }

    /// `I(Z; X⁻, Y⁻ | Z⁻)`, the transfer entropy from both sources together.
    pub fn joint_transfer_entropy(&self) -> f64 {
        te_from_counts(&self.counts)
    }

    fn axes(&self) -> [Alphabet; 4] {
        let [nx, ny, nz] = self.cardinalities;
        [
            Alphabet::indexed(nz).power(self.ell),
            Alphabet::indexed(nx).power(self.m_len),
            Alphabet::indexed(ny).power(self.m_len),
            Alphabet::indexed(nz),
        ]
    }

    /// `D^k_{hîĵ}`.
    pub fn tensor(&self) -> Result<MultiInputTensor> {
        let [h, i, j, k] = self.axes();
        MultiInputTensor::new(TransitionTensor::from_counts(vec![h, i, j], k, self.counts.as_slice())?)
    }

    /// `p^ĵ_{hî}` and `p^î_{hĵ}`.
    pub fn input_conditionals(&self) -> Result<(TransitionTensor, TransitionTensor)> {
        let [h_ax, i_ax, j_ax, _] = self.axes();
        let (nh, nij, nk) = self.counts.shape();
        let nj = j_ax.len();
        let ni = nij / nj;
        let mut hij = vec![0u64; nh * ni * nj];
        let mut hji = vec![0u64; nh * nj * ni];
        for h in 0..nh {
            for i in 0..ni {
                for j in 0..nj {
                    let c: u64 = (0..nk).map(|k| self.counts.get(h, i * nj + j, k)).sum();
                    hij[(h * ni + i) * nj + j] = c;
                    hji[(h * nj + j) * ni + i] = c;
                }
            }
        }
        Ok((
            TransitionTensor::from_counts(vec![h_ax.clone(), i_ax.clone()], j_ax.clone(), &hij)?,
            TransitionTensor::from_counts(vec![h_ax, j_ax], i_ax, &hji)?,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alignment_indices() {
        let x: Vec<usize> = vec![0, 1, 1, 0, 1, 0, 0, 1];
        let y: Vec<usize> = vec![1, 0, 1, 1, 0, 0, 1, 0];
        let z: Vec<usize> = vec![0, 0, 1, 0, 1, 1, 0, 1];
        let d = TriadDelays { tau_xz: 2, tau_yz: 1 };
        let ts = TriadSamples::collect(&x, &y, &z, 1, 1, d, [2, 2, 2]).unwrap();
        // first valid t = max(1 + 1, 1 + 0, 2 + 0) = 2
        assert_eq!(ts.len(), 6);
        let s = ts.samples[0];
        assert_eq!(s, TriadSample { g: y[0], h: z[1], i: x[0], j: y[1], k: z[2] });
        let s = ts.samples[5];
        assert_eq!(s, TriadSample { g: y[5], h: z[6], i: x[5], j: y[6], k: z[7] });
    }

    #[test]
    fn tensors_are_consistent() {
        let x: Vec<usize> = (0..400).map(|t| (t * 37 + t / 7) % 2).collect();
        let y: Vec<usize> = (0..400).map(|t| if t == 0 { 0 } else { x[t - 1] ^ usize::from(t % 11 == 0) }).collect();
        let z: Vec<usize> = (0..400).map(|t| if t == 0 { 0 } else { y[t - 1] ^ usize::from(t % 13 == 0) }).collect();
        let ts = TriadSamples::collect(&x, &y, &z, 1, 1, TriadDelays { tau_xz: 2, tau_yz: 1 }, [2, 2, 2]).unwrap();
        let t = ts.tensors().unwrap();
        for tensor in [&t.a, &t.a_dagger, &t.a_bar, &t.a_bar_dagger, &t.b, &t.c] {
            for (_, row) in tensor.supported_rows() {
                assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn short_series_rejected() {
        let s = vec![0usize; 3];
        let err = TriadSamples::collect(&s, &s, &s, 1, 1, TriadDelays { tau_xz: 3, tau_yz: 1 }, [2, 2, 2]);
        assert_eq!(err.unwrap_err(), Error::InsufficientData { required: 4, actual: 3 });
    }

    #[test]
    fn xor_destination_has_full_joint_information() {
        let n = 2000;
        let x: Vec<usize> = (0..n).map(|t| (t * 2654435761usize >> 7) % 2).collect();
        let y: Vec<usize> = (0..n).map(|t| (t * 40503usize >> 5) % 2).collect();
        let z: Vec<usize> = (0..n).map(|t| if t == 0 { 0 } else { x[t - 1] ^ y[t - 1] }).collect();
        let ms = MultiInputSamples::collect(&x, &y, &z, 1, 1, 1, 1, [2, 2, 2]).unwrap();
        assert!(ms.joint_transfer_entropy() > 0.9);
        let d = ms.tensor().unwrap();
        assert_eq!((d.n_first(), d.n_second()), (2, 2));
    }
}
