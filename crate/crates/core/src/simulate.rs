//! Coupled Ulam-map lattices, the extremum quantizer, and ground-truth triads.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::Symbol;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MapKind {
    /// `f(x) = 2 - x²` on `[-2, 2]`.
    Ulam,
}

impl MapKind {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            MapKind::Ulam => 2.0 - x * x,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    /// Map 0 is driven by the last map.
    Periodic,
    /// Map 0 evolves on its own.
    FreeFirstMap,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeConfig {
    pub n_maps: usize,
    pub epsilon: f64,
    pub n_samples: usize,
    pub transient: usize,
    pub seed: u64,
    pub map_kind: MapKind,
    pub boundary: Boundary,
}

impl Default for LatticeConfig {
    fn default() -> Self {
        Self {
            n_maps: 2,
            epsilon: 0.5,
            n_samples: 100_000,
            transient: 10_000,
            seed: 0,
            map_kind: MapKind::Ulam,
            boundary: Boundary::FreeFirstMap,
        }
    }
}

impl LatticeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_maps < 2 {
            return Err(Error::Config(format!("a lattice needs at least 2 maps, got {}", self.n_maps)));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::Config(format!("epsilon must lie in [0, 1], got {}", self.epsilon)));
        }
        if self.n_samples == 0 {
            return Err(Error::Config("n_samples must be positive".into()));
        }
        Ok(())
    }
}

/// Iterate `x^m_{n+1} = f(ε x^{m-1}_n + (1 - ε) x^m_n)` and return one series
/// per map, transient discarded.
pub fn generate_lattice(cfg: &LatticeConfig) -> Result<Vec<Vec<f64>>> {
    let all: Vec<usize> = (0..cfg.n_maps).collect();
    generate_lattice_maps(cfg, &all)
}

/// As [`generate_lattice`], recording only the listed maps.
pub fn generate_lattice_maps(cfg: &LatticeConfig, record: &[usize]) -> Result<Vec<Vec<f64>>> {
    cfg.validate()?;
    if let Some(&m) = record.iter().find(|&&m| m >= cfg.n_maps) {
        return Err(Error::Config(format!("map {m} outside a lattice of {}", cfg.n_maps)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut state: Vec<f64> = (0..cfg.n_maps)
        .map(|_| loop {
            let v: f64 = rng.gen_range(-2.0..2.0);
            // skip the fixed points 1 and -2, and 0 which lands on -2
            if v != 1.0 && v != -2.0 && v != 0.0 {
                break v;
            }
        })
        .collect();
    let mut next = vec![0.0; cfg.n_maps];
    let mut out: Vec<Vec<f64>> = record.iter().map(|_| Vec::with_capacity(cfg.n_samples)).collect();
    let eps = cfg.epsilon;
    let last = cfg.n_maps - 1;
    for step in 0..cfg.transient + cfg.n_samples {
        for m in 0..cfg.n_maps {
            let arg = match (m, cfg.boundary) {
                (0, Boundary::FreeFirstMap) => state[0],
                (0, Boundary::Periodic) => eps * state[last] + (1.0 - eps) * state[0],
                _ => eps * state[m - 1] + (1.0 - eps) * state[m],
            };
            // the convex combination can leave [-2, 2] by one ulp
            next[m] = cfg.map_kind.apply(arg.clamp(-2.0, 2.0));
        }
        std::mem::swap(&mut state, &mut next);
        if step >= cfg.transient {
            for (series, &m) in out.iter_mut().zip(record) {
                series.push(state[m]);
            }
        }
    }
    Ok(out)
}

/// `1` where `x_{n-1} >= x_n < x_{n+1}` or `x_{n-1} < x_n >= x_{n+1}`, else `0`.
///
/// Output index `n` corresponds to input index `n + 1`.
pub fn quantize_extrema(series: &[f64]) -> Result<Vec<Symbol>> {
    if series.len() < 3 {
        return Err(Error::InsufficientData {
            required: 3,
            actual: series.len(),
        });
    }
    Ok(series
        .windows(3)
        .map(|w| {
            let (a, b, c) = (w[0], w[1], w[2]);
            usize::from((a >= b && b < c) || (a < b && b >= c))
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TriadStructure {
    /// `X → Y → Z`.
    Chain,
    /// `Y ← X → Z`.
    Fork,
    /// `X → Z ← Y` with `z = x ⊕ y ⊕ noise`.
    VStructure,
}

/// Binary triad with binary symmetric channels.
///
/// `noise[0]` and `delays[0]` belong to the first edge (`X → Y`, or `X → Z`
/// for the v-structure), `noise[1]` and `delays[1]` to the second
/// (`Y → Z` for the chain, `X → Z` for the fork, `Y → Z` for the
/// v-structure). The v-structure uses only `noise[0]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriadConfig {
    pub structure: TriadStructure,
    pub noise: [f64; 2],
    pub delays: [usize; 2],
    pub n_samples: usize,
    pub seed: u64,
}

impl TriadConfig {
    /// 10% noise, `N = 10⁵`, delays 1 and 1 (chain, v-structure) or 1 and 2
    /// (fork).
    pub fn new(structure: TriadStructure) -> Self {
        let delays = match structure {
            TriadStructure::Fork => [1, 2],
            _ => [1, 1],
        };
        Self {
            structure,
            noise: [0.1, 0.1],
            delays,
            n_samples: 100_000,
            seed: 0,
        }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(p) = self.noise.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::Config(format!("noise level {p} outside [0, 1]")));
        }
        if self.delays.contains(&0) {
            return Err(Error::Config("triad delays must be at least 1".into()));
        }
        let span: usize = self.delays.iter().sum();
        if self.n_samples <= span {
            return Err(Error::InsufficientData {
                required: span + 1,
                actual: self.n_samples,
            });
        }
        Ok(())
    }
}

/// What generated a simulated triad.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub structure: TriadStructure,
    /// Direct causal edges as `(source, destination)`.
    pub edges: Vec<(String, String)>,
    /// Delay of every edge, keyed `source->destination`.
    pub delays: BTreeMap<String, usize>,
    /// Channel matrix of every edge, rows indexed by the source symbol (for
    /// the v-structure, by `2 x + y`).
    pub tensors: BTreeMap<String, Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulatedTriad {
    pub names: [String; 3],
    pub series: [Vec<Symbol>; 3],
    pub truth: GroundTruth,
}

fn bsc(p: f64) -> Vec<Vec<f64>> {
    vec![vec![1.0 - p, p], vec![p, 1.0 - p]]
}

/// Simulate a binary triad with known structure. Sources are iid uniform;
/// the series start after a burn-in long enough that every delayed input
/// exists.
pub fn generate_triad(cfg: &TriadConfig) -> Result<SimulatedTriad> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let burn: usize = cfg.delays.iter().sum();
    let total = cfg.n_samples + burn;
    let [d1, d2] = cfg.delays;
    let [p1, p2] = cfg.noise;
    let mut bits = |n: usize| -> Vec<Symbol> { (0..n).map(|_| usize::from(rng.gen::<bool>())).collect() };
    let x = bits(total);
    let mut flip = |p: f64| usize::from(rng.gen::<f64>() < p);
    let (y, z): (Vec<Symbol>, Vec<Symbol>) = match cfg.structure {
        TriadStructure::Chain => {
            let mut y = vec![0; total];
            let mut z = vec![0; total];
            for t in 0..total {
                y[t] = if t >= d1 { x[t - d1] ^ flip(p1) } else { flip(0.5) };
                z[t] = if t >= d2 { y[t - d2] ^ flip(p2) } else { flip(0.5) };
            }
            (y, z)
        }
        TriadStructure::Fork => {
            let mut y = vec![0; total];
            let mut z = vec![0; total];
            for t in 0..total {
                y[t] = if t >= d1 { x[t - d1] ^ flip(p1) } else { flip(0.5) };
                z[t] = if t >= d2 { x[t - d2] ^ flip(p2) } else { flip(0.5) };
            }
            (y, z)
        }
        TriadStructure::VStructure => {
            let y: Vec<Symbol> = (0..total).map(|_| flip(0.5)).collect();
            let mut z = vec![0; total];
            for t in 0..total {
                z[t] = if t >= d1 && t >= d2 {
                    x[t - d1] ^ y[t - d2] ^ flip(p1)
                } else {
                    flip(0.5)
                };
            }
            (y, z)
        }
    };
    let (edges, tensors): (Vec<(&str, &str)>, Vec<Vec<Vec<f64>>>) = match cfg.structure {
        TriadStructure::Chain => (vec![("X", "Y"), ("Y", "Z")], vec![bsc(p1), bsc(p2)]),
        TriadStructure::Fork => (vec![("X", "Y"), ("X", "Z")], vec![bsc(p1), bsc(p2)]),
        TriadStructure::VStructure => {
            let xor: Vec<Vec<f64>> = (0..4)
                .map(|r| {
                    let out = (r >> 1) ^ (r & 1);
                    let mut row = vec![p1, p1];
                    row[out] = 1.0 - p1;
                    row
                })
                .collect();
            (vec![("X", "Z"), ("Y", "Z")], vec![xor.clone(), xor])
        }
    };
    let key = |(a, b): &(&str, &str)| format!("{a}->{b}");
    let truth = GroundTruth {
        structure: cfg.structure,
        delays: edges.iter().map(key).zip(cfg.delays).collect(),
        tensors: edges.iter().map(key).zip(tensors).collect(),
        edges: edges.iter().map(|&(a, b)| (a.to_owned(), b.to_owned())).collect(),
    };
    Ok(SimulatedTriad {
        names: ["X".into(), "Y".into(), "Z".into()],
        series: [x, y, z].map(|s| s[burn..].to_vec()),
        truth,
    })
}
