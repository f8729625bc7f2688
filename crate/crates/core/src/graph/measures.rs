use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{modularity_louvain, WeightedGraph};
use crate::error::{Error, Result};

/// Strength of node `i`: the sum of its incident edge weights.
pub fn node_strength(g: &WeightedGraph, i: usize) -> Result<f64> {
    g.check_node(i)?;
    Ok(g.neighbors(i).iter().map(|&(_, w)| w).sum())
}

pub fn node_strengths(g: &WeightedGraph) -> Vec<f64> {
    (0..g.node_count()).map(|i| g.neighbors(i).iter().map(|&(_, w)| w).sum()).collect()
}

pub fn average_strength(g: &WeightedGraph) -> Result<f64> {
    if g.node_count() == 0 {
        return Err(Error::input("average strength of a graph without nodes"));
    }
    Ok(node_strengths(g).iter().sum::<f64>() / g.node_count() as f64)
}

/// Average shortest path length together with the share of ordered node
/// pairs that are connected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aspl {
    /// Mean distance over reachable ordered pairs; `None` if no pair is reachable.
    pub value: Option<f64>,
    pub reachable_pair_fraction: f64,
}

#[derive(Copy, Clone, PartialEq)]
struct Dist(f64);

impl Eq for Dist {}

impl PartialOrd for Dist {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dist {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Dijkstra from `source` with edge length `1 - w`; returns (sum, count) over
/// reachable targets other than the source.
fn distance_sum_from(g: &WeightedGraph, source: usize) -> (f64, usize) {
    let n = g.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Reverse((Dist(0.0), source)));
    let mut sum = 0.0;
    let mut count = 0;
    while let Some(Reverse((Dist(d), v))) = heap.pop() {
        if done[v] {
            continue;
        }
        done[v] = true;
        if v != source {
            sum += d;
            count += 1;
        }
        for &(u, w) in g.neighbors(v) {
            let nd = d + (1.0 - w);
            if nd < dist[u] {
                dist[u] = nd;
                heap.push(Reverse((Dist(nd), u)));
            }
        }
    }
    (sum, count)
}

/// Average shortest path length with per-edge distance `1 - w`.
///
/// Unreachable pairs are left out of the mean and show up as a
/// `reachable_pair_fraction` below one.
pub fn aspl(g: &WeightedGraph) -> Result<Aspl> {
    let n = g.node_count();
    if n < 2 {
        return Err(Error::input("ASPL needs at least two nodes"));
    }
    let per_source: Vec<(f64, usize)> = (0..n).into_par_iter().map(|s| distance_sum_from(g, s)).collect();
    let (sum, count) = per_source.iter().fold((0.0, 0usize), |(s, c), &(ps, pc)| (s + ps, c + pc));
    let pairs = n * (n - 1);
    Ok(Aspl {
        value: (count > 0).then(|| sum / count as f64),
        reachable_pair_fraction: count as f64 / pairs as f64,
    })
}

/// Mean weighted local clustering coefficient (Barrat form).
///
/// Nodes with fewer than two neighbors contribute zero.
pub fn average_cc(g: &WeightedGraph) -> f64 {
    let n = g.node_count();
    if n == 0 {
        return 0.0;
    }
    // weight from the current node i to each of its neighbors, 0 otherwise
    let mut to_i = vec![0.0f64; n];
    let mut total = 0.0;
    for i in 0..n {
        let nbrs = g.neighbors(i);
        let k = nbrs.len();
        if k < 2 {
            continue;
        }
        for &(j, w) in nbrs {
            to_i[j] = w;
        }
        let strength: f64 = nbrs.iter().map(|&(_, w)| w).sum();
        let mut acc = 0.0;
        for &(j, w_ij) in nbrs {
            for &(h, _) in g.neighbors(j) {
                let w_ih = to_i[h];
                if h != i && w_ih > 0.0 {
                    acc += 0.5 * (w_ij + w_ih);
                }
            }
        }
        for &(j, _) in nbrs {
            to_i[j] = 0.0;
        }
        total += acc / (strength * (k - 1) as f64);
    }
    total / n as f64
}

/// Subgraph keeping the `ceil(E/2)` strongest edges on the same node set.
///
/// Ties at the cutoff go to the lexicographically smaller `(i, j)`.
pub fn top_half_subgraph(g: &WeightedGraph) -> Result<WeightedGraph> {
    let e = g.edge_count();
    if e == 0 {
        return Err(Error::input("cannot take the strongest half of an edgeless graph"));
    }
    let mut order: Vec<usize> = (0..e).collect();
    let edges = g.edges();
    // edges are already in (i, j) order, so a stable sort on weight is enough
    order.sort_by(|&a, &b| edges[b].w.total_cmp(&edges[a].w));
    let keep = e.div_ceil(2);
    g.with_edges(order[..keep].iter().map(|&k| (edges[k].i, edges[k].j, edges[k].w)))
}

/// All six measures for one network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureRecord {
    pub average_strength: f64,
    pub aspl: Option<f64>,
    pub reachable_pair_fraction: f64,
    /// Mean clustering coefficient on the strongest half of the edges.
    pub average_cc: f64,
    pub modularity: Option<f64>,
    pub node_strengths: Vec<f64>,
    pub edge_weights: Vec<(usize, usize, f64)>,
}

/// Computes every measure. Clustering uses the strongest half of the edges;
/// all other measures use the full network.
pub fn measure_all(g: &WeightedGraph, seed: u64) -> Result<MeasureRecord> {
    let average_strength = average_strength(g)?;
    let (aspl_value, reachable) = if g.node_count() >= 2 {
        let a = aspl(g)?;
        (a.value, a.reachable_pair_fraction)
    } else {
        (None, 0.0)
    };
    let (average_cc, modularity) = if g.edge_count() > 0 {
        let top = top_half_subgraph(g)?;
        (average_cc(&top), Some(modularity_louvain(g, seed)?.modularity))
    } else {
        (0.0, None)
    };
    Ok(MeasureRecord {
        average_strength,
        aspl: aspl_value,
        reachable_pair_fraction: reachable,
        average_cc,
        modularity,
        node_strengths: node_strengths(g),
        edge_weights: g.edges().iter().map(|e| (e.i, e.j, e.w)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> WeightedGraph {
        WeightedGraph::from_edges(3, [(0, 1, 0.8), (1, 2, 0.6)]).unwrap()
    }

    fn clique(n: usize, w: f64) -> WeightedGraph {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                edges.push((i, j, w));
            }
        }
        WeightedGraph::from_edges(n, edges).unwrap()
    }

    #[test]
    fn strength_examples() {
        let star = WeightedGraph::from_edges(4, [(0, 1, 0.5), (0, 2, 0.5), (0, 3, 0.5)]).unwrap();
        assert_eq!(node_strength(&star, 0).unwrap(), 1.5);
        let isolated = WeightedGraph::from_edges(3, [(0, 1, 0.5)]).unwrap();
        assert_eq!(node_strength(&isolated, 2).unwrap(), 0.0);
        let tri = WeightedGraph::from_edges(3, [(0, 1, 0.2), (1, 2, 0.6), (0, 2, 0.4)]).unwrap();
        assert!((node_strength(&tri, 0).unwrap() - 0.6).abs() < 1e-12);
        assert!(node_strength(&tri, 3).is_err());
    }

    #[test]
    fn average_strength_examples() {
        assert_eq!(average_strength(&clique(3, 1.0)).unwrap(), 2.0);
        assert_eq!(average_strength(&WeightedGraph::empty(4)).unwrap(), 0.0);
        assert!((average_strength(&path3()).unwrap() - 2.8 / 3.0).abs() < 1e-12);
        assert!(average_strength(&WeightedGraph::empty(0)).is_err());
    }

    #[test]
    fn aspl_examples() {
        let a = aspl(&clique(3, 1.0)).unwrap();
        assert_eq!(a.value, Some(0.0));
        assert_eq!(a.reachable_pair_fraction, 1.0);

        let a = aspl(&path3()).unwrap();
        assert!((a.value.unwrap() - 0.4).abs() < 1e-12);

        let dyads = WeightedGraph::from_edges(4, [(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        let a = aspl(&dyads).unwrap();
        assert_eq!(a.value, Some(0.0));
        assert!((a.reachable_pair_fraction - 4.0 / 12.0).abs() < 1e-15);

        assert!(aspl(&WeightedGraph::empty(1)).is_err());
        assert_eq!(aspl(&WeightedGraph::empty(3)).unwrap().value, None);
    }

    #[test]
    fn clustering_examples() {
        assert!((average_cc(&clique(3, 1.0)) - 1.0).abs() < 1e-12);
        assert!((average_cc(&clique(6, 0.3)) - 1.0).abs() < 1e-12);
        let star = WeightedGraph::from_edges(4, [(0, 1, 0.5), (0, 2, 0.5), (0, 3, 0.5)]).unwrap();
        assert_eq!(average_cc(&star), 0.0);
    }

    #[test]
    fn clustering_with_pendant_edge() {
        // triangle 0-1-2 plus pendant 2-3, all weights 0.5.
        // node 0, 1: k=2, s=1, ordered pairs (1,2),(2,1) each 0.5 -> 1/(1*1)=1
        // node 2: k=3, s=1.5, ordered pairs (0,1),(1,0) each 0.5 -> 1/(1.5*2)=1/3
        // node 3: k=1 -> 0
        let g = WeightedGraph::from_edges(4, [(0, 1, 0.5), (1, 2, 0.5), (0, 2, 0.5), (2, 3, 0.5)]).unwrap();
        let expected = (1.0 + 1.0 + 1.0 / 3.0 + 0.0) / 4.0;
        assert!((average_cc(&g) - expected).abs() < 1e-12);
    }

    #[test]
    fn top_half_examples() {
        let g = WeightedGraph::from_edges(5, [(0, 1, 0.9), (1, 2, 0.8), (2, 3, 0.3), (3, 4, 0.2)]).unwrap();
        let top = top_half_subgraph(&g).unwrap();
        let w: Vec<f64> = top.edges().iter().map(|e| e.w).collect();
        assert_eq!(w, vec![0.9, 0.8]);
        assert_eq!(top.node_count(), 5);

        let g = WeightedGraph::from_edges(4, [(2, 3, 0.5), (0, 1, 0.1), (1, 2, 0.5)]).unwrap();
        let top = top_half_subgraph(&g).unwrap();
        let kept: Vec<(usize, usize)> = top.edges().iter().map(|e| (e.i, e.j)).collect();
        assert_eq!(kept, vec![(1, 2), (2, 3)]);

        let g = clique(4, 0.5);
        let top = top_half_subgraph(&g).unwrap();
        let kept: Vec<(usize, usize)> = top.edges().iter().map(|e| (e.i, e.j)).collect();
        assert_eq!(kept, vec![(0, 1), (0, 2), (0, 3)]);

        assert!(top_half_subgraph(&WeightedGraph::empty(3)).is_err());
    }

    #[test]
    fn measure_all_handles_edgeless_graphs() {
        let m = measure_all(&WeightedGraph::empty(3), 1).unwrap();
        assert_eq!(m.average_strength, 0.0);
        assert_eq!(m.aspl, None);
        assert_eq!(m.reachable_pair_fraction, 0.0);
        assert_eq!(m.average_cc, 0.0);
        assert_eq!(m.modularity, None);
    }
}
