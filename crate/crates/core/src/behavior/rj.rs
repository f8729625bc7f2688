//! Relatedness judgments: a truncated normal around the edge weight mapped
//! onto the rating scale.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::response::{RjData, RjPair, ResponseData};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::groundtruth::CueSet;
use crate::rng::{rng_from_seed, SimRng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RjParams {
    pub gamma: f64,
    pub sigma: f64,
    pub scale_min: f64,
    pub scale_max: f64,
}

impl Default for RjParams {
    fn default() -> Self {
        Self { gamma: 1.0, sigma: 3.85, scale_min: 1.0, scale_max: 20.0 }
    }
}

impl RjParams {
    pub fn new(gamma: f64, sigma: f64) -> Self {
        Self { gamma, sigma, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::input(format!("gamma must be finite and >= 0, got {}", self.gamma)));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::input(format!("sigma must be finite and >= 0, got {}", self.sigma)));
        }
        if !(self.scale_min < self.scale_max && self.scale_min.is_finite() && self.scale_max.is_finite()) {
            return Err(Error::input(format!("scale [{}, {}] is empty", self.scale_min, self.scale_max)));
        }
        Ok(())
    }

    /// Untruncated mean rating for edge weight `w` (0 for absent edges).
    pub fn location(&self, w: f64) -> f64 {
        self.scale_min + (self.scale_max - self.scale_min) * w.powf(self.gamma)
    }

    /// Maps a mean rating back to the unit interval.
    pub fn unscale(&self, rating: f64) -> f64 {
        (rating - self.scale_min) / (self.scale_max - self.scale_min)
    }
}

/// Inverse-CDF draw from the truncated normal at `location`.
fn draw(location: f64, params: &RjParams, rng: &mut SimRng) -> f64 {
    if params.sigma == 0.0 {
        return location.clamp(params.scale_min, params.scale_max);
    }
    let z = Normal::standard();
    let lo = z.cdf((params.scale_min - location) / params.sigma);
    let hi = z.cdf((params.scale_max - location) / params.sigma);
    let u: f64 = rng.random();
    let x = location + params.sigma * z.inverse_cdf(lo + u * (hi - lo));
    x.clamp(params.scale_min, params.scale_max)
}

pub(crate) fn draw_for_weight(w: f64, params: &RjParams, rng: &mut SimRng) -> f64 {
    draw(params.location(w), params, rng)
}

/// One judgment of the pair `(i, j)`.
pub fn rj_value(g: &WeightedGraph, i: usize, j: usize, params: &RjParams, seed: u64) -> Result<f64> {
    params.validate()?;
    g.check_node(i)?;
    g.check_node(j)?;
    if i == j {
        return Err(Error::input(format!("cannot judge node {i} against itself")));
    }
    let w = g.weight(i, j).unwrap_or(0.0);
    Ok(draw_for_weight(w, params, &mut rng_from_seed(seed)))
}

/// Spreads `n_responses_per_cue * |cues|` judgments over all cue pairs in
/// complete passes, each pass visiting the pairs in a fresh random order;
/// the last pass is cut short when the budget runs out.
pub fn simulate_rj(g: &WeightedGraph, cues: &CueSet, n_responses_per_cue: usize, params: &RjParams, seed: u64) -> Result<ResponseData> {
    params.validate()?;
    let n = cues.len();
    if n < 2 {
        return Err(Error::input("relatedness judgments need at least 2 cues"));
    }
    for &c in &cues.cues {
        g.check_node(c)?;
    }
    let budget = n_responses_per_cue * n;
    if budget == 0 {
        return Err(Error::input("judgment budget is 0"));
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let weights: Vec<f64> = pairs.iter().map(|&(a, b)| g.weight(cues.cues[a], cues.cues[b]).unwrap_or(0.0)).collect();
    let mut ratings: Vec<Vec<f64>> = vec![Vec::new(); pairs.len()];
    let mut rng = rng_from_seed(seed);
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    let mut remaining = budget;
    while remaining > 0 {
        order.shuffle(&mut rng);
        let take = remaining.min(pairs.len());
        for &k in &order[..take] {
            ratings[k].push(draw_for_weight(weights[k], params, &mut rng));
        }
        remaining -= take;
    }
    let pairs = pairs
        .iter()
        .zip(ratings)
        .filter(|(_, r)| !r.is_empty())
        .map(|(&(a, b), ratings)| RjPair { a: g.label(cues.cues[a]), b: g.label(cues.cues[b]), ratings })
        .collect();
    Ok(ResponseData::Rj(RjData { scale_min: params.scale_min, scale_max: params.scale_max, pairs }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groundtruth::CueSetType;

    fn clique(n: usize, w: f64) -> WeightedGraph {
        WeightedGraph::from_edges(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j, w)))).unwrap()
    }

    fn cue_set(n: usize) -> CueSet {
        CueSet { kind: CueSetType::Broad, cues: (0..n).collect(), source_graph_id: "t".into() }
    }

    fn multiplicities(d: &ResponseData) -> Vec<usize> {
        match d {
            ResponseData::Rj(d) => d.pairs.iter().map(|p| p.ratings.len()).collect(),
            _ => unreachable!(),
        }
    }

    #[test]
    fn deterministic_anchors() {
        let g = WeightedGraph::from_edges(3, [(0, 1, 1.0)]).unwrap();
        let p = RjParams::new(1.0, 0.0);
        assert_eq!(rj_value(&g, 0, 1, &p, 1).unwrap(), 20.0);
        assert_eq!(rj_value(&g, 0, 2, &p, 1).unwrap(), 1.0);
        assert!(rj_value(&g, 1, 1, &p, 1).is_err());
    }

    #[test]
    fn under_budget_judges_distinct_pairs_once() {
        let d = simulate_rj(&clique(10, 0.5), &cue_set(10), 3, &RjParams::default(), 4).unwrap();
        let m = multiplicities(&d);
        assert_eq!(m.len(), 30);
        assert!(m.iter().all(|&k| k == 1));
    }

    #[test]
    fn over_budget_uses_complete_passes() {
        let d = simulate_rj(&clique(10, 0.5), &cue_set(10), 30, &RjParams::default(), 4).unwrap();
        let m = multiplicities(&d);
        assert_eq!(m.len(), 45);
        assert_eq!(m.iter().filter(|&&k| k == 7).count(), 30);
        assert_eq!(m.iter().filter(|&&k| k == 6).count(), 15);
        assert_eq!(d.total(), 300);
    }

    #[test]
    fn ratings_stay_on_scale() {
        let d = simulate_rj(&clique(6, 0.9), &cue_set(6), 50, &RjParams::new(1.0, 10.0), 2).unwrap();
        let ResponseData::Rj(d) = d else { unreachable!() };
        assert!(d.pairs.iter().flat_map(|p| &p.ratings).all(|&r| (1.0..=20.0).contains(&r)));
    }

    #[test]
    fn zero_budget_rejected() {
        assert!(simulate_rj(&clique(3, 0.5), &cue_set(3), 0, &RjParams::default(), 0).is_err());
    }
}
