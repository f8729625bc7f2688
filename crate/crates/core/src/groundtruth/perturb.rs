//! Triangle-score perturbation of a common network into individual networks.
//!
//! Half of the edges become sources. Sources are drawn from the edges above
//! and below the median triangle score in proportions `p` and `1 - p`. Each
//! source gets a fraction `k ~ U(0, 1)`. A share `1 - r` of the sources lose
//! that fraction of their weight; the remaining share `r` hand it to a
//! non-source edge picked with probability proportional to current weight.
//! Edges that end below the weight floor are removed.

use rand::seq::{index, SliceRandom};
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::rng::{derive_seed, rng_from_seed, SimRng};

/// The 25 `(p, r)` combinations used to generate individual networks.
pub const TABLE_S1: [(f64, f64); 25] = [
    (0.0, 1.0),
    (0.0, 0.875),
    (0.0, 0.75),
    (0.0, 0.625),
    (0.045, 0.5),
    (0.125, 0.875),
    (0.125, 0.75),
    (0.125, 0.625),
    (0.175, 0.5),
    (0.225, 0.375),
    (0.25, 0.8),
    (0.25, 0.7),
    (0.3, 0.55),
    (0.3, 0.45),
    (0.375, 0.3),
    (0.375, 0.7),
    (0.375, 0.625),
    (0.45, 0.45),
    (0.5, 0.325),
    (0.55, 0.2),
    (0.5, 0.625),
    (0.55, 0.5),
    (0.625, 0.325),
    (0.7, 0.15),
    (0.75, 0.0),
];

pub const DEFAULT_WEIGHT_FLOOR: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationParams {
    /// Share of sources drawn from above-median triangle-score edges.
    pub p: f64,
    /// Share of sources whose weight is relocated rather than reduced.
    pub r: f64,
    pub weight_floor: f64,
    pub seed: u64,
}

impl PerturbationParams {
    pub fn new(p: f64, r: f64, seed: u64) -> Self {
        Self { p, r, weight_floor: DEFAULT_WEIGHT_FLOOR, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=0.75).contains(&self.p) {
            return Err(Error::input(format!("p = {} outside [0, 0.75]", self.p)));
        }
        if !(0.0..=1.0).contains(&self.r) {
            return Err(Error::input(format!("r = {} outside [0, 1]", self.r)));
        }
        if !(self.weight_floor > 0.0 && self.weight_floor < 1.0) {
            return Err(Error::input(format!("weight floor {} outside (0, 1)", self.weight_floor)));
        }
        Ok(())
    }
}

/// Per-edge triangle score, aligned with `g.edges()`: the sum over triangles
/// containing the edge of the product of the triangle's three weights.
pub fn triangle_scores(g: &WeightedGraph) -> Vec<f64> {
    g.edges()
        .par_iter()
        .map(|e| {
            let (a, b) = (g.neighbors(e.i), g.neighbors(e.j));
            let (mut x, mut y) = (0, 0);
            let mut acc = 0.0;
            while x < a.len() && y < b.len() {
                match a[x].0.cmp(&b[y].0) {
                    std::cmp::Ordering::Less => x += 1,
                    std::cmp::Ordering::Greater => y += 1,
                    std::cmp::Ordering::Equal => {
                        acc += e.w * a[x].1 * b[y].1;
                        x += 1;
                        y += 1;
                    }
                }
            }
            acc
        })
        .collect()
}

/// Result of one perturbation, with bookkeeping used by tests and reports.
#[derive(Debug, Clone)]
pub struct PerturbationOutcome {
    pub graph: WeightedGraph,
    /// Edge indices (into the input's edge list) chosen as sources.
    pub sources: Vec<usize>,
    /// Total weight after reduction and relocation, before floor removal.
    pub total_before_removal: f64,
    /// Relocations whose target hit the 1.0 cap.
    pub capped_events: usize,
}

pub fn perturb(g: &WeightedGraph, params: &PerturbationParams) -> Result<WeightedGraph> {
    let mut k_rng = rng_from_seed(derive_seed(params.seed, &[1]));
    Ok(perturb_with_fractions(g, params, || k_rng.random::<f64>())?.graph)
}

/// [`perturb`] with the per-source fractions `k` supplied by `draw_k`.
///
/// Exposed so tests can pin `k`; production code goes through [`perturb`].
#[doc(hidden)]
pub fn perturb_with_fractions<F>(g: &WeightedGraph, params: &PerturbationParams, mut draw_k: F) -> Result<PerturbationOutcome>
where
    F: FnMut() -> f64,
{
    params.validate()?;
    let e = g.edge_count();
    if e < 2 {
        return Err(Error::input(format!("perturbation needs at least 2 edges, graph has {e}")));
    }
    let mut rng = rng_from_seed(params.seed);
    let edges = g.edges();
    let scores = triangle_scores(g);

    let mut order: Vec<usize> = (0..e).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(a.cmp(&b)));
    let n_sources = e / 2;
    let (below, above) = order.split_at(n_sources);
    let n_above = ((params.p * n_sources as f64).round() as usize).min(above.len());
    let n_below = n_sources - n_above;

    let mut sources: Vec<usize> = index::sample(&mut rng, above.len(), n_above).into_iter().map(|k| above[k]).collect();
    sources.extend(index::sample(&mut rng, below.len(), n_below).into_iter().map(|k| below[k]));
    sources.shuffle(&mut rng);
    let fractions: Vec<f64> = sources.iter().map(|_| draw_k()).collect();

    let mut weights: Vec<f64> = edges.iter().map(|x| x.w).collect();
    let n_relocate = (params.r * n_sources as f64).round() as usize;
    let (relocating, reducing) = sources.split_at(n_relocate);
    let (k_relocate, k_reduce) = fractions.split_at(n_relocate);

    for (&s, &k) in reducing.iter().zip(k_reduce) {
        weights[s] *= 1.0 - k;
    }

    let mut is_source = vec![false; e];
    for &s in &sources {
        is_source[s] = true;
    }
    let targets: Vec<usize> = (0..e).filter(|&x| !is_source[x]).collect();
    let mut tree = SumTree::new(targets.iter().map(|&t| weights[t]).collect());
    let mut capped_events = 0;
    for (&s, &k) in relocating.iter().zip(k_relocate) {
        let amount = k * weights[s];
        weights[s] -= amount;
        let slot = tree.sample(&mut rng);
        let t = targets[slot];
        let raised = weights[t] + amount;
        if raised > 1.0 {
            capped_events += 1;
        }
        weights[t] = raised.min(1.0);
        tree.set(slot, weights[t]);
    }

    let total_before_removal = weights.iter().sum();
    let kept = edges
        .iter()
        .zip(&weights)
        .filter(|(_, &w)| w >= params.weight_floor)
        .map(|(x, &w)| (x.i, x.j, w));
    Ok(PerturbationOutcome { graph: g.with_edges(kept)?, sources, total_before_removal, capped_events })
}

/// Seed of individual network `(grid_index, replicate)` under `master_seed`.
pub fn individual_seed(master_seed: u64, grid_index: usize, replicate: usize) -> u64 {
    derive_seed(master_seed, &[grid_index as u64, replicate as u64])
}

/// Perturbs `g` once per `(grid cell, replicate)`, grid-major.
pub fn generate_individual_networks(
    g: &WeightedGraph,
    grid: &[(f64, f64)],
    replicates: usize,
    seed: u64,
    weight_floor: f64,
) -> Result<Vec<WeightedGraph>> {
    if grid.is_empty() || replicates == 0 {
        return Err(Error::input("need a non-empty (p, r) grid and at least one replicate"));
    }
    let jobs: Vec<(usize, usize)> = (0..grid.len()).flat_map(|gi| (0..replicates).map(move |rep| (gi, rep))).collect();
    jobs.par_iter()
        .map(|&(gi, rep)| {
            let (p, r) = grid[gi];
            perturb(g, &PerturbationParams { p, r, weight_floor, seed: individual_seed(seed, gi, rep) })
        })
        .collect()
}

/// Binary-indexed prefix sums for weight-proportional sampling with updates.
struct SumTree {
    tree: Vec<f64>,
    values: Vec<f64>,
}

impl SumTree {
    fn new(values: Vec<f64>) -> Self {
        let n = values.len();
        let mut tree = vec![0.0; n + 1];
        for (i, &v) in values.iter().enumerate() {
            let mut k = i + 1;
            while k <= n {
                tree[k] += v;
                k += k & k.wrapping_neg();
            }
        }
        Self { tree, values }
    }

    fn total(&self) -> f64 {
        let mut k = self.values.len();
        let mut s = 0.0;
        while k > 0 {
            s += self.tree[k];
            k -= k & k.wrapping_neg();
        }
        s
    }

    fn set(&mut self, i: usize, value: f64) {
        let delta = value - self.values[i];
        self.values[i] = value;
        let n = self.values.len();
        let mut k = i + 1;
        while k <= n {
            self.tree[k] += delta;
            k += k & k.wrapping_neg();
        }
    }

    /// Index drawn with probability proportional to its value.
    fn sample(&self, rng: &mut SimRng) -> usize {
        let n = self.values.len();
        let mut target = rng.random::<f64>() * self.total();
        let mut pos = 0;
        let mut step = n.next_power_of_two();
        while step > 0 {
            let next = pos + step;
            if next <= n && self.tree[next] <= target {
                target -= self.tree[next];
                pos = next;
            }
            step >>= 1;
        }
        // guard against rounding past the last positive entry
        let mut idx = pos.min(n - 1);
        while self.values[idx] <= 0.0 && idx > 0 {
            idx -= 1;
        }
        idx
    }
}
