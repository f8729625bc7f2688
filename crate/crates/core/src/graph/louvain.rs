//! Louvain community detection and Newman modularity.

use rand::seq::SliceRandom;

use super::WeightedGraph;
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Moves must raise modularity by more than this to count.
const MIN_GAIN: f64 = 1e-12;
const MAX_SWEEPS: usize = 10_000;

/// Which adjacency enters the modularity formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ModularityKind {
    /// `w_ij` with node strengths and total edge weight.
    #[default]
    Weighted,
    /// Binary adjacency with node degrees and edge count.
    Binary,
}

/// A community assignment and its modularity.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    /// Community id per node, numbered by first appearance in node order.
    pub membership: Vec<usize>,
    pub modularity: f64,
}

/// Modularity of `membership` on `g`:
/// `Q = 1/(2m) * sum_ij (A_ij - s_i s_j / 2m) * delta(c_i, c_j)`.
pub fn modularity(g: &WeightedGraph, membership: &[usize], kind: ModularityKind) -> Result<f64> {
    if membership.len() != g.node_count() {
        return Err(Error::input(format!(
            "membership has {} entries for {} nodes",
            membership.len(),
            g.node_count()
        )));
    }
    if g.edge_count() == 0 {
        return Err(Error::input("modularity is undefined for an edgeless graph"));
    }
    let weight = |w: f64| match kind {
        ModularityKind::Weighted => w,
        ModularityKind::Binary => 1.0,
    };
    let n_comm = membership.iter().max().map_or(0, |&c| c + 1);
    let mut internal = vec![0.0; n_comm];
    let mut total = vec![0.0; n_comm];
    let mut two_m = 0.0;
    for e in g.edges() {
        let w = weight(e.w);
        two_m += 2.0 * w;
        total[membership[e.i]] += w;
        total[membership[e.j]] += w;
        if membership[e.i] == membership[e.j] {
            internal[membership[e.i]] += 2.0 * w;
        }
    }
    Ok(internal.iter().zip(&total).map(|(&inside, &tot)| inside / two_m - (tot / two_m).powi(2)).sum())
}

/// Weighted Louvain with the node visit order shuffled by `seed`.
pub fn modularity_louvain(g: &WeightedGraph, seed: u64) -> Result<Partition> {
    modularity_louvain_with(g, seed, ModularityKind::Weighted)
}

pub fn modularity_louvain_with(g: &WeightedGraph, seed: u64, kind: ModularityKind) -> Result<Partition> {
    if g.edge_count() == 0 {
        return Err(Error::input("Louvain needs at least one edge"));
    }
    let mut rng = rng_from_seed(seed);
    let mut level = Level::from_graph(g, kind);
    let mut membership: Vec<usize> = (0..g.node_count()).collect();
    loop {
        let mut order: Vec<usize> = (0..level.n()).collect();
        order.shuffle(&mut rng);
        let (assignment, moved) = level.local_moves(&order);
        if !moved {
            break;
        }
        let (next, renumbered) = level.aggregate(&assignment);
        for c in membership.iter_mut() {
            *c = renumbered[*c];
        }
        level = next;
    }
    let membership = canonical(&membership);
    let q = modularity(g, &membership, kind)?;
    Ok(Partition { membership, modularity: q })
}

fn canonical(membership: &[usize]) -> Vec<usize> {
    let mut map = vec![usize::MAX; membership.iter().max().map_or(0, |&c| c + 1)];
    let mut next = 0;
    membership
        .iter()
        .map(|&c| {
            if map[c] == usize::MAX {
                map[c] = next;
                next += 1;
            }
            map[c]
        })
        .collect()
}

/// One level of the Louvain hierarchy. Edges inside a super-node are
/// dropped from `adj`; they shift every candidate gain equally.
struct Level {
    adj: Vec<Vec<(usize, f64)>>,
    strength: Vec<f64>,
    two_m: f64,
}

impl Level {
    fn from_graph(g: &WeightedGraph, kind: ModularityKind) -> Self {
        let adj: Vec<Vec<(usize, f64)>> = (0..g.node_count())
            .map(|i| {
                g.neighbors(i)
                    .iter()
                    .map(|&(j, w)| (j, if kind == ModularityKind::Binary { 1.0 } else { w }))
                    .collect()
            })
            .collect();
        let strength: Vec<f64> = adj.iter().map(|row| row.iter().map(|&(_, w)| w).sum()).collect();
        let two_m = strength.iter().sum();
        Self { adj, strength, two_m }
    }

    fn n(&self) -> usize {
        self.adj.len()
    }

    /// Greedy single-node moves until no move gains more than `MIN_GAIN`.
    fn local_moves(&self, order: &[usize]) -> (Vec<usize>, bool) {
        let n = self.n();
        let mut comm: Vec<usize> = (0..n).collect();
        let mut tot = self.strength.clone();
        let mut link = vec![0.0; n];
        let mut touched: Vec<usize> = Vec::new();
        let mut any_move = false;
        for _ in 0..MAX_SWEEPS {
            let mut moved = false;
            for &v in order {
                let current = comm[v];
                let s_v = self.strength[v];
                for &(u, w) in &self.adj[v] {
                    let c = comm[u];
                    if link[c] == 0.0 {
                        touched.push(c);
                    }
                    link[c] += w;
                }
                tot[current] -= s_v;
                let gain = |c: usize, link_c: f64| link_c - s_v * tot[c] / self.two_m;
                let mut best = current;
                let mut best_gain = gain(current, link[current]);
                for &c in &touched {
                    let g = gain(c, link[c]);
                    if g > best_gain + MIN_GAIN {
                        best = c;
                        best_gain = g;
                    }
                }
                tot[best] += s_v;
                for &c in &touched {
                    link[c] = 0.0;
                }
                touched.clear();
                if best != current {
                    comm[v] = best;
                    moved = true;
                    any_move = true;
                }
            }
            if !moved {
                break;
            }
        }
        (comm, any_move)
    }

    /// Collapses communities into super-nodes. Returns the new level and the
    /// map from old node id to new super-node id.
    fn aggregate(&self, comm: &[usize]) -> (Level, Vec<usize>) {
        let renumbered = canonical(comm);
        let k = renumbered.iter().max().map_or(0, |&c| c + 1);
        let mut strength = vec![0.0; k];
        let mut rows: Vec<std::collections::BTreeMap<usize, f64>> = vec![Default::default(); k];
        for v in 0..self.n() {
            let cv = renumbered[v];
            strength[cv] += self.strength[v];
            for &(u, w) in &self.adj[v] {
                let cu = renumbered[u];
                if cu != cv {
                    *rows[cv].entry(cu).or_insert(0.0) += w;
                }
            }
        }
        let adj = rows.into_iter().map(|row| row.into_iter().collect()).collect();
        (Level { adj, strength, two_m: self.two_m }, renumbered)
    }
}
