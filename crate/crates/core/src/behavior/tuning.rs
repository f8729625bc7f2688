//! Parameter tuning against external norms.
//!
//! FA norms are `cue<TAB>response<TAB>count` lines, RJ norms
//! `word1<TAB>word2<TAB>rating` lines.

use std::collections::{BTreeMap, HashMap};
use std::io::BufRead;

use rand::seq::index::sample;
use serde::Serialize;

use super::fa::{fa_distribution, sample_cue, FaParams, ReplacementPolicy};
use super::rj::{draw_for_weight, RjParams};
use super::NodeFrequencies;
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::rng::{derive_seed, rng_from_seed};
use crate::stats::{average_ranks, median, pearson, spearman};

/// Blocks of three responses simulated per cue for the median-rank summary.
const RANK_BLOCKS: usize = 50;

fn fields<'a>(line: &'a str, n: usize, source: &str, lineno: usize) -> Result<Vec<&'a str>> {
    let parts: Vec<&str> = line.split('\t').collect();
    if parts.len() != n {
        return Err(Error::parse(source, Some(lineno), format!("expected {n} tab-separated fields, found {}", parts.len())));
    }
    Ok(parts)
}

/// Aggregated free association norms: cue → response → count.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FaNorms {
    pub cues: BTreeMap<String, BTreeMap<String, u64>>,
}

impl FaNorms {
    pub fn read<R: BufRead>(input: R, source: &str) -> Result<Self> {
        let mut norms = FaNorms::default();
        for (k, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let f = fields(&line, 3, source, k + 1)?;
            let count: u64 = f[2]
                .trim()
                .parse()
                .map_err(|e| Error::parse(source, Some(k + 1), format!("bad count {:?}: {e}", f[2])))?;
            *norms.cues.entry(f[0].to_string()).or_default().entry(f[1].to_string()).or_insert(0) += count;
        }
        Ok(norms)
    }
}

/// Relatedness norms as `(word1, word2, rating)` triples.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RjNorms {
    pub pairs: Vec<(String, String, f64)>,
}

impl RjNorms {
    pub fn read<R: BufRead>(input: R, source: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (k, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let f = fields(&line, 3, source, k + 1)?;
            let rating: f64 = f[2]
                .trim()
                .parse()
                .map_err(|e| Error::parse(source, Some(k + 1), format!("bad rating {:?}: {e}", f[2])))?;
            pairs.push((f[0].to_string(), f[1].to_string(), rating));
        }
        Ok(Self { pairs })
    }

    /// Node pairs of `g` named by the norms; pairs with unknown or identical
    /// words are dropped.
    pub fn node_pairs(&self, g: &WeightedGraph) -> Vec<(usize, usize)> {
        self.pairs
            .iter()
            .filter_map(|(a, b, _)| Some((g.index_of(a)?, g.index_of(b)?)))
            .filter(|(a, b)| a != b)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FaFit {
    pub gamma_w: f64,
    pub gamma_f: f64,
    pub pearson: Option<f64>,
    pub spearman: Option<f64>,
    /// Median norm rank of simulated first, second and third responses.
    pub median_ranks: [Option<f64>; 3],
    pub n_pairs: usize,
}

struct NormCue {
    cue: usize,
    /// Norm proportion for every norm response that is a graph node.
    shared: Vec<(usize, f64)>,
    /// Rank of each norm response within the cue's norms (1 = most frequent).
    rank: HashMap<usize, f64>,
    n_norm_responses: usize,
}

fn norm_cues(g: &WeightedGraph, norms: &FaNorms) -> Vec<NormCue> {
    let mut out = Vec::new();
    for (cue, responses) in &norms.cues {
        let Some(c) = g.index_of(cue) else { continue };
        if g.degree(c) == 0 {
            continue;
        }
        let total: u64 = responses.values().sum();
        if total == 0 {
            continue;
        }
        let counts: Vec<f64> = responses.values().map(|&n| -(n as f64)).collect();
        let ranks = average_ranks(&counts);
        let mut shared = Vec::new();
        let mut rank = HashMap::new();
        for ((word, &n), r) in responses.iter().zip(ranks) {
            if let Some(i) = g.index_of(word).filter(|&i| i != c) {
                shared.push((i, n as f64 / total as f64));
                rank.insert(i, r);
            }
        }
        if !shared.is_empty() {
            out.push(NormCue { cue: c, shared, rank, n_norm_responses: responses.len() });
        }
    }
    out
}

/// Scores each `(gamma_w, gamma_f)` cell by how well the model's response
/// distributions reproduce the norms.
pub fn tune_fa(
    g: &WeightedGraph,
    freq: &NodeFrequencies,
    norms: &FaNorms,
    grid: &[(f64, f64)],
    seed: u64,
) -> Result<Vec<FaFit>> {
    let cues = norm_cues(g, norms);
    if cues.is_empty() {
        return Err(Error::input("no norm cue-response pair maps onto the graph"));
    }
    grid.iter()
        .map(|&(gamma_w, gamma_f)| {
            let params = FaParams::new(gamma_w, gamma_f);
            let (mut model, mut observed) = (Vec::new(), Vec::new());
            let mut positions: [Vec<f64>; 3] = Default::default();
            for (k, nc) in cues.iter().enumerate() {
                let dist = fa_distribution(g, freq, nc.cue, &params)?;
                let p: HashMap<usize, f64> = dist.iter().copied().collect();
                for &(r, q) in &nc.shared {
                    model.push(p.get(&r).copied().unwrap_or(0.0));
                    observed.push(q);
                }
                let draws = sample_cue(
                    &dist,
                    3 * RANK_BLOCKS,
                    ReplacementPolicy::WithoutReplacementPerBlock(3),
                    derive_seed(seed, &[k as u64]),
                );
                for block in draws.chunks(3) {
                    for (pos, r) in block.iter().enumerate() {
                        let rank = nc.rank.get(r).copied().unwrap_or((nc.n_norm_responses + 1) as f64);
                        positions[pos].push(rank);
                    }
                }
            }
            Ok(FaFit {
                gamma_w,
                gamma_f,
                pearson: pearson(&model, &observed),
                spearman: spearman(&model, &observed),
                median_ranks: [median(&positions[0]), median(&positions[1]), median(&positions[2])],
                n_pairs: model.len(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RjFit {
    pub gamma: f64,
    pub sigma: f64,
    /// Mean Spearman correlation between two simulated raters.
    pub interrater: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RjTuning {
    pub cells: Vec<RjFit>,
    /// Index of the cell closest to the target correlation.
    pub best: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RjTuningOptions {
    /// Edges sampled when no explicit pair list is given.
    pub n_pairs: usize,
    pub reps: usize,
}

impl Default for RjTuningOptions {
    fn default() -> Self {
        Self { n_pairs: 3000, reps: 10 }
    }
}

/// Simulates two independent raters per grid cell and reports their mean
/// Spearman correlation. Pairs default to a seeded sample of edges. Every
/// cell reuses the same random streams, so cells differ only by parameters.
pub fn tune_rj(
    g: &WeightedGraph,
    grid: &[(f64, f64)],
    target_interrater: f64,
    pairs: Option<&[(usize, usize)]>,
    options: RjTuningOptions,
    seed: u64,
) -> Result<RjTuning> {
    let pairs: Vec<(usize, usize)> = match pairs {
        Some(p) => p.to_vec(),
        None => {
            let e = g.edges();
            let mut rng = rng_from_seed(derive_seed(seed, &[0]));
            let mut idx = sample(&mut rng, e.len(), options.n_pairs.min(e.len())).into_vec();
            idx.sort_unstable();
            idx.into_iter().map(|k| (e[k].i, e[k].j)).collect()
        }
    };
    if pairs.len() < 3 {
        return Err(Error::input("inter-rater simulation needs at least 3 pairs"));
    }
    let weights: Vec<f64> = pairs.iter().map(|&(a, b)| g.weight(a, b).unwrap_or(0.0)).collect();
    let mut cells = Vec::with_capacity(grid.len());
    for &(gamma, sigma) in grid {
        let params = RjParams::new(gamma, sigma);
        params.validate()?;
        let mut corrs = Vec::new();
        for rep in 0..options.reps.max(1) {
            let mut rng = rng_from_seed(derive_seed(seed, &[1, rep as u64]));
            let a: Vec<f64> = weights.iter().map(|&w| draw_for_weight(w, &params, &mut rng)).collect();
            let b: Vec<f64> = weights.iter().map(|&w| draw_for_weight(w, &params, &mut rng)).collect();
            if let Some(r) = spearman(&a, &b) {
                corrs.push(r);
            }
        }
        let interrater = (!corrs.is_empty()).then(|| corrs.iter().sum::<f64>() / corrs.len() as f64);
        cells.push(RjFit { gamma, sigma, interrater });
    }
    let best = cells
        .iter()
        .enumerate()
        .filter_map(|(k, c)| c.interrater.map(|r| (k, (r - target_interrater).abs())))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(k, _)| k);
    Ok(RjTuning { cells, best })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_fa_norms_and_sums_duplicates() {
        let n = FaNorms::read("cat\tdog\t3\ncat\tdog\t2\ncat\tmouse\t1\n".as_bytes(), "mem").unwrap();
        assert_eq!(n.cues["cat"]["dog"], 5);
        assert!(FaNorms::read("cat\tdog\n".as_bytes(), "mem").is_err());
    }

    #[test]
    fn reads_rj_norms() {
        let n = RjNorms::read("sun\tmoon\t38\n".as_bytes(), "mem").unwrap();
        assert_eq!(n.pairs, vec![("sun".into(), "moon".into(), 38.0)]);
    }

    #[test]
    fn noiseless_raters_agree() {
        let g = WeightedGraph::from_edges(5, [(0, 1, 0.3), (1, 2, 0.5), (2, 3, 0.7), (3, 4, 0.9)]).unwrap();
        let t = tune_rj(&g, &[(1.0, 0.0), (1.0, 5.0)], 0.68, None, RjTuningOptions::default(), 1).unwrap();
        assert_eq!(t.cells[0].interrater, Some(1.0));
    }
}
