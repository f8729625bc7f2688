//! Free association: responses are neighbors of the cue, chosen with
//! probability proportional to `w^gamma_w * f^gamma_f`.

use std::collections::BTreeMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use serde::{Deserialize, Serialize};

use super::response::{FaData, FaRow, ResponseData};
use super::NodeFrequencies;
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::groundtruth::CueSet;
use crate::rng::{derive_seed, rng_from_seed, SimRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "policy", content = "block_size")]
pub enum ReplacementPolicy {
    /// Independent draws.
    #[default]
    WithReplacement,
    /// Responses within a block of this size are distinct, as when one
    /// participant gives several different associations to the same cue.
    WithoutReplacementPerBlock(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FaParams {
    pub gamma_w: f64,
    pub gamma_f: f64,
    pub replacement: ReplacementPolicy,
}

impl Default for FaParams {
    fn default() -> Self {
        Self { gamma_w: 10.0, gamma_f: 1.0, replacement: ReplacementPolicy::WithReplacement }
    }
}

impl FaParams {
    pub fn new(gamma_w: f64, gamma_f: f64) -> Self {
        Self { gamma_w, gamma_f, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma_w >= 0.0 && self.gamma_w.is_finite() && self.gamma_f >= 0.0 && self.gamma_f.is_finite()) {
            return Err(Error::input(format!(
                "FA exponents must be finite and >= 0 (gamma_w = {}, gamma_f = {})",
                self.gamma_w, self.gamma_f
            )));
        }
        if self.replacement == ReplacementPolicy::WithoutReplacementPerBlock(0) {
            return Err(Error::input("block size must be >= 1"));
        }
        Ok(())
    }
}

/// Response distribution of `cue` as `(neighbor, probability)` pairs in
/// neighbor order. Computed in the log domain so large exponents do not
/// underflow.
pub fn fa_distribution(g: &WeightedGraph, freq: &NodeFrequencies, cue: usize, params: &FaParams) -> Result<Vec<(usize, f64)>> {
    params.validate()?;
    g.check_node(cue)?;
    freq.check_graph(g)?;
    let nbrs = g.neighbors(cue);
    if nbrs.is_empty() {
        return Err(Error::input(format!("cue {} has no neighbors, so no response has support", g.label(cue))));
    }
    let logits: Vec<f64> = nbrs
        .iter()
        .map(|&(i, w)| params.gamma_w * w.ln() + params.gamma_f * freq.get(i).ln())
        .collect();
    let top = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let unnorm: Vec<f64> = logits.iter().map(|l| (l - top).exp()).collect();
    let total: f64 = unnorm.iter().sum();
    Ok(nbrs.iter().zip(unnorm).map(|(&(i, _), u)| (i, u / total)).collect())
}

fn draw_responses(dist: &[(usize, f64)], n: usize, policy: ReplacementPolicy, rng: &mut SimRng) -> Vec<usize> {
    let weights: Vec<f64> = dist.iter().map(|&(_, p)| p).collect();
    match policy {
        ReplacementPolicy::WithReplacement => {
            let sampler = WeightedIndex::new(&weights).expect("distribution has positive mass");
            (0..n).map(|_| dist[sampler.sample(rng)].0).collect()
        }
        ReplacementPolicy::WithoutReplacementPerBlock(block) => {
            let mut out = Vec::with_capacity(n);
            let mut pool = weights.clone();
            let mut left_in_block = 0;
            while out.len() < n {
                if left_in_block == 0 || pool.iter().all(|&p| p == 0.0) {
                    pool.copy_from_slice(&weights);
                    left_in_block = block;
                }
                let k = WeightedIndex::new(&pool).expect("pool has positive mass").sample(rng);
                pool[k] = 0.0;
                out.push(dist[k].0);
                left_in_block -= 1;
            }
            out
        }
    }
}

/// Simulates `n_responses` free associations per cue. Cues without
/// neighbors are skipped and listed in the result.
pub fn simulate_fa(
    g: &WeightedGraph,
    freq: &NodeFrequencies,
    cues: &CueSet,
    n_responses: usize,
    params: &FaParams,
    seed: u64,
) -> Result<ResponseData> {
    if n_responses < 1 {
        return Err(Error::input("n_responses must be >= 1"));
    }
    params.validate()?;
    freq.check_graph(g)?;
    let mut rows = Vec::with_capacity(cues.len());
    let mut skipped = Vec::new();
    for (pos, &cue) in cues.cues.iter().enumerate() {
        g.check_node(cue)?;
        if g.degree(cue) == 0 {
            skipped.push(g.label(cue));
            continue;
        }
        let dist = fa_distribution(g, freq, cue, params)?;
        let mut rng = rng_from_seed(derive_seed(seed, &[pos as u64]));
        let mut counts = BTreeMap::new();
        for r in draw_responses(&dist, n_responses, params.replacement, &mut rng) {
            *counts.entry(g.label(r)).or_insert(0u64) += 1;
        }
        rows.push(FaRow { cue: g.label(cue), counts });
    }
    Ok(ResponseData::Fa(FaData { responses_per_cue: n_responses, rows, skipped_cues: skipped }))
}

/// Draws `n` responses for a single cue.
pub(crate) fn sample_cue(dist: &[(usize, f64)], n: usize, policy: ReplacementPolicy, seed: u64) -> Vec<usize> {
    draw_responses(dist, n, policy, &mut rng_from_seed(seed))
}
