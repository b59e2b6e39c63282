//! Transfer entropy through probability transition tensors.
//!
//! Source and destination series are aligned by an interaction delay and
//! split into one memoryless subchannel per value of the destination's past.
//! The crate estimates those subchannel tensors from quantized data, computes
//! transfer entropy as their weighted mutual information, bounds it by the
//! weighted subchannel capacities, and uses the tensor algebra to tell
//! chains from forks in three-process systems.
//!
//! Module map:
//!
//! - [`prob`], [`info`], [`channel`]: finite PMFs, transition tensors,
//!   Shannon measures and channel algebra.
//! - [`estimation`]: embedding, plug-in subchannel estimates, transfer entropy,
//!   delay scans.
//! - [`capacity`]: Blahut–Arimoto and the capacity bound on transfer entropy.
//! - [`structure`]: chain/fork/v-structure relations and the triad classifier.
//! - [`significance`]: surrogate null distributions and p-values.
//! - [`simulate`]: coupled Ulam lattices, the extremum quantizer and
//!   ground-truth triads.
//! - [`sweep`]: the coupling-strength sweep over a Ulam lattice.

pub mod capacity;
pub mod channel;
pub mod error;
pub mod estimation;
pub mod info;
pub mod prob;
pub mod significance;
pub mod simulate;
pub mod structure;
pub mod sweep;

pub use error::{Error, Result};

#[cfg(feature = "parallel")]
pub(crate) fn par_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn par_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}
