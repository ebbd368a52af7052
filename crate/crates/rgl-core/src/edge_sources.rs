//! Seeded edge generators for the three random-graph models, plus the
//! interleaving and coupling helpers that relate them.
//!
//! All randomness comes from ChaCha8, a fixed counter-based generator with
//! 2^64 independent streams. A trial's edge stream uses stream `2 * trial`
//! of the master seed and a strategy's coins use stream `2 * trial + 1`, so
//! every sequence is bit-reproducible across platforms and thread counts.

use std::collections::{HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph_state::VertexId;
use crate::{Error, Result};

/// ChaCha8 generator for the given seed and stream index.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream for a trial's edge source.
pub fn edge_stream_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    rng_for(master_seed, 2 * trial)
}

/// Stream for a trial's strategy coins.
pub fn strategy_rng(strategy_seed: u64, trial: u64) -> ChaCha8Rng {
    rng_for(strategy_seed, 2 * trial + 1)
}

/// Which distribution the stream draws from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EdgeModel {
    /// `rounds` independent uniform pairs of distinct vertices, repetitions
    /// allowed.
    ProductRounds { rounds: u64 },
    /// `m` distinct edges, uniformly, in random order.
    Gnm { m: u64 },
    /// Every pair independently with probability `p`.
    Gnp { p: f64 },
}

/// A seeded, reproducible edge source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamConfig {
    pub n: usize,
    pub seed: u64,
    pub model: EdgeModel,
}

impl StreamConfig {
    pub fn stream(&self) -> Result<EdgeStream> {
        EdgeStream::new(self.n, rng_for(self.seed, 0), self.model)
    }
}

pub struct EdgeStream {
    n: usize,
    rng: ChaCha8Rng,
    inner: Inner,
}

enum Inner {
    Product { remaining: u64 },
    Gnm { edges: std::vec::IntoIter<(u32, u32)> },
    Gnp { cursor: u64, npairs: u64, ln_q: f64 },
}

impl EdgeStream {
    pub fn new(n: usize, mut rng: ChaCha8Rng, model: EdgeModel) -> Result<Self> {
        if n < 2 {
            return Err(Error::Config(format!("edge streams need n >= 2, got {n}")));
        }
        if n > u32::MAX as usize {
            return Err(Error::Config(format!("n = {n} exceeds the u32 vertex range")));
        }
        let npairs = pair_count(n);
        let inner = match model {
            EdgeModel::ProductRounds { rounds } => Inner::Product { remaining: rounds },
            EdgeModel::Gnm { m } => {
                if m > npairs {
                    return Err(Error::Config(format!(
                        "Gnm wants {m} distinct edges but only {npairs} pairs exist"
                    )));
                }
                Inner::Gnm {
                    edges: sample_distinct_pairs(n, m, &mut rng).into_iter(),
                }
            }
            EdgeModel::Gnp { p } => {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::Config(format!("Gnp probability {p} outside [0, 1]")));
                }
                Inner::Gnp {
                    cursor: 0,
                    npairs,
                    ln_q: (1.0 - p).ln(),
                }
            }
        };
        Ok(EdgeStream { n, rng, inner })
    }

    /// Stream for one trial of an experiment; distinct trials use disjoint
    /// ChaCha streams of the same master seed.
    pub fn for_trial(n: usize, master_seed: u64, trial: u64, model: EdgeModel) -> Result<Self> {
        EdgeStream::new(n, edge_stream_rng(master_seed, trial), model)
    }
}

impl Iterator for EdgeStream {
    type Item = (VertexId, VertexId);

    fn next(&mut self) -> Option<(VertexId, VertexId)> {
        match &mut self.inner {
            Inner::Product { remaining } => {
                if *remaining == 0 {
                    return None;
                }
                *remaining -= 1;
                Some(uniform_pair(self.n, &mut self.rng))
            }
            Inner::Gnm { edges } => edges.next().map(|(u, v)| (VertexId(u), VertexId(v))),
            Inner::Gnp { cursor, npairs, ln_q } => {
                if *cursor >= *npairs {
                    return None;
                }
                // geometric skip over pair indices
                let skip = if *ln_q == f64::NEG_INFINITY {
                    0
                } else if *ln_q == 0.0 {
                    return None; // p = 0
                } else {
                    let u: f64 = self.rng.random();
                    ((1.0 - u).ln() / *ln_q).floor() as u64
                };
                let idx = cursor.checked_add(skip)?;
                if idx >= *npairs {
                    *cursor = *npairs;
                    return None;
                }
                *cursor = idx + 1;
                let (u, v) = unrank_pair(idx);
                Some((VertexId(u), VertexId(v)))
            }
        }
    }
}

/// One uniform unordered pair of distinct vertices: draw `u` in `[0, n)`,
/// `v` in `[0, n-1)`, shift `v >= u` up by one. Exactly uniform, no
/// rejection loop.
#[inline]
pub fn uniform_pair<R: Rng>(n: usize, rng: &mut R) -> (VertexId, VertexId) {
    let u = rng.random_range(0..n as u32);
    let mut v = rng.random_range(0..n as u32 - 1);
    if v >= u {
        v += 1;
    }
    (VertexId(u), VertexId(v))
}

#[inline]
pub fn pair_count(n: usize) -> u64 {
    n as u64 * (n as u64 - 1) / 2
}

/// Colex rank of an unordered pair.
#[inline]
pub fn pair_index(u: u32, v: u32) -> u64 {
    let (lo, hi) = if u < v { (u, v) } else { (v, u) };
    hi as u64 * (hi as u64 - 1) / 2 + lo as u64
}

/// Inverse of [`pair_index`].
pub fn unrank_pair(idx: u64) -> (u32, u32) {
    let mut hi = ((1.0 + (1.0 + 8.0 * idx as f64).sqrt()) / 2.0).floor() as u64;
    while hi * (hi - 1) / 2 > idx {
        hi -= 1;
    }
    while (hi + 1) * hi / 2 <= idx {
        hi += 1;
    }
    let lo = idx - hi * (hi - 1) / 2;
    (lo as u32, hi as u32)
}

/// `m` distinct pairs, uniform among all such sets. Dense requests run a
/// sparse Fisher-Yates over pair indices; sparse ones use rejection with a
/// hash set, keeping both memory and time bounded across regimes.
fn sample_distinct_pairs<R: Rng>(n: usize, m: u64, rng: &mut R) -> Vec<(u32, u32)> {
    let npairs = pair_count(n);
    let mut out = Vec::with_capacity(m as usize);
    if 16 * m > npairs {
        let mut swap: HashMap<u64, u64> = HashMap::new();
        for i in 0..m {
            let j = rng.random_range(i..npairs);
            let pick = *swap.get(&j).unwrap_or(&j);
            let displaced = *swap.get(&i).unwrap_or(&i);
            swap.insert(j, displaced);
            out.push(unrank_pair(pick));
        }
    } else {
        let mut seen = HashSet::with_capacity(m as usize);
        while (out.len() as u64) < m {
            let idx = rng.random_range(0..npairs);
            if seen.insert(idx) {
                out.push(unrank_pair(idx));
            }
        }
    }
    out
}

/// Uniformly random subset of `real_m` of the positions `[0, total_m)`,
/// sorted. Marks where the real input edges sit once fictitious edges are
/// interleaved.
pub fn interleave_fictitious(real_m: u64, total_m: u64, seed: u64) -> Result<Vec<u64>> {
    if real_m > total_m {
        return Err(Error::OutOfRange(format!(
            "cannot place {real_m} real edges into {total_m} positions"
        )));
    }
    let mut rng = rng_for(seed, 0);
    let mut swap: HashMap<u64, u64> = HashMap::new();
    let mut picks = Vec::with_capacity(real_m as usize);
    for i in 0..real_m {
        let j = rng.random_range(i..total_m);
        let pick = *swap.get(&j).unwrap_or(&j);
        let displaced = *swap.get(&i).unwrap_or(&i);
        swap.insert(j, displaced);
        picks.push(pick);
    }
    picks.sort_unstable();
    Ok(picks)
}

/// Measured overlap between the product model and distinct-edge models.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CouplingReport {
    pub n: usize,
    pub m: u64,
    pub trials: u64,
    /// Whether `m <= n ln n`, the regime where the distinct-edge coupling
    /// guarantee applies.
    pub regime_ok: bool,
    pub min_fraction_distinct: f64,
    pub mean_fraction_distinct: f64,
}

/// Draws `m` product-model edges per trial and reports the fraction of
/// distinct edges. Outside the `m <= n ln n` regime the measurement still
/// runs; `regime_ok` records the violation.
pub fn coupling_check(n: usize, m: u64, trials: u64, seed: u64) -> Result<CouplingReport> {
    if n < 2 || trials == 0 {
        return Err(Error::Config("coupling check needs n >= 2 and trials >= 1".into()));
    }
    let regime_ok = (m as f64) <= n as f64 * (n as f64).ln();
    let mut min_frac = f64::INFINITY;
    let mut sum_frac = 0.0;
    for trial in 0..trials {
        let stream = EdgeStream::for_trial(n, seed, trial, EdgeModel::ProductRounds { rounds: m })?;
        let mut seen = HashSet::with_capacity(m.min(pair_count(n)) as usize);
        let mut distinct = 0u64;
        for (u, v) in stream {
            if seen.insert(pair_index(u.0, v.0)) {
                distinct += 1;
            }
        }
        let frac = if m == 0 { 1.0 } else { distinct as f64 / m as f64 };
        min_frac = min_frac.min(frac);
        sum_frac += frac;
    }
    Ok(CouplingReport {
        n,
        m,
        trials,
        regime_ok,
        min_fraction_distinct: min_frac,
        mean_fraction_distinct: sum_frac / trials as f64,
    })
}
