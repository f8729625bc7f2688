//! Weighted undirected graphs and the structural measures computed on them.
//!
//! [`WeightedGraph`] is the single representation used for common ground
//! truth, individualized networks, cue-set subgraphs and inferred networks.
//! It is immutable once built; perturbation produces a fresh graph.

mod io;
mod louvain;
mod measures;

use std::collections::HashMap;

use crate::error::{Error, Result};

pub use io::{format_weight, read_edge_list, write_edge_list, EdgeListFile};
pub use louvain::{modularity, modularity_louvain, modularity_louvain_with, ModularityKind, Partition};
pub use measures::{
    aspl, average_cc, average_strength, measure_all, node_strength, node_strengths, top_half_subgraph, Aspl,
    MeasureRecord,
};

/// One undirected edge, stored with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub w: f64,
}

/// Undirected graph with weights in `(0, 1]` and no self-loops.
///
/// Node indices are `0..node_count()`. Adjacency lists are sorted by
/// neighbor index and the edge list is sorted lexicographically by `(i, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    adj: Vec<Vec<(usize, f64)>>,
    edges: Vec<Edge>,
    labels: Option<Vec<String>>,
    label_index: HashMap<String, usize>,
}

impl WeightedGraph {
    /// Graph with `n` nodes and no edges.
    pub fn empty(n: usize) -> Self {
        Self { adj: vec![Vec::new(); n], edges: Vec::new(), labels: None, label_index: HashMap::new() }
    }

    /// Builds a graph from `(i, j, w)` triples.
    ///
    /// Each unordered pair may appear once. Weights must lie in `(0, 1]`.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut list: Vec<Edge> = Vec::new();
        for (a, b, w) in edges {
            if a >= n || b >= n {
                return Err(Error::input(format!("edge ({a}, {b}) references a node outside 0..{n}")));
            }
            if a == b {
                return Err(Error::input(format!("self-loop on node {a}")));
            }
            if !(w > 0.0 && w <= 1.0) {
                return Err(Error::input(format!("edge ({a}, {b}) has weight {w} outside (0, 1]")));
            }
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            list.push(Edge { i, j, w });
        }
        list.sort_by_key(|x| (x.i, x.j));
        if let Some(dup) = list.windows(2).find(|p| p[0].i == p[1].i && p[0].j == p[1].j) {
            return Err(Error::input(format!("duplicate edge ({}, {})", dup[0].i, dup[0].j)));
        }
        let mut adj = vec![Vec::new(); n];
        for e in &list {
            adj[e.i].push((e.j, e.w));
            adj[e.j].push((e.i, e.w));
        }
        for row in &mut adj {
            row.sort_by_key(|&(v, _)| v);
        }
        Ok(Self { adj, edges: list, labels: None, label_index: HashMap::new() })
    }

    /// Attaches one unique word label per node.
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.node_count() {
            return Err(Error::input(format!(
                "{} labels supplied for {} nodes",
                labels.len(),
                self.node_count()
            )));
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (i, label) in labels.iter().enumerate() {
            if index.insert(label.clone(), i).is_some() {
                return Err(Error::input(format!("duplicate node label {label:?}")));
            }
        }
        self.labels = Some(labels);
        self.label_index = index;
        Ok(self)
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Neighbors of `i` with edge weights, sorted by neighbor index.
    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adj[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    /// Weight of edge `(i, j)`, or `None` when absent.
    pub fn weight(&self, i: usize, j: usize) -> Option<f64> {
        let row = self.adj.get(i)?;
        row.binary_search_by_key(&j, |&(v, _)| v).ok().map(|k| row[k].1)
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.w).sum()
    }

    pub fn has_labels(&self) -> bool {
        self.labels.is_some()
    }

    /// Word label of node `i`; unlabeled graphs use the decimal index.
    pub fn label(&self, i: usize) -> String {
        match &self.labels {
            Some(labels) => labels[i].clone(),
            None => i.to_string(),
        }
    }

    pub fn labels(&self) -> Vec<String> {
        (0..self.node_count()).map(|i| self.label(i)).collect()
    }

    /// Node index for a word label. Unlabeled graphs accept decimal indices.
    pub fn index_of(&self, label: &str) -> Option<usize> {
        if self.labels.is_some() {
            self.label_index.get(label).copied()
        } else {
            label.parse::<usize>().ok().filter(|&i| i < self.node_count())
        }
    }

    pub(crate) fn check_node(&self, i: usize) -> Result<()> {
        if i < self.node_count() {
            Ok(())
        } else {
            Err(Error::input(format!("unknown node {i} (graph has {} nodes)", self.node_count())))
        }
    }

    /// Induced subgraph on `nodes`, renumbered in the order given.
    ///
    /// The result carries the original labels (or original indices for an
    /// unlabeled input) so nodes can be traced back.
    pub fn subgraph(&self, nodes: &[usize]) -> Result<WeightedGraph> {
        let mut position = HashMap::with_capacity(nodes.len());
        for (k, &v) in nodes.iter().enumerate() {
            self.check_node(v)?;
            if position.insert(v, k).is_some() {
                return Err(Error::input(format!("node {v} listed twice in subgraph selection")));
            }
        }
        let mut edges = Vec::new();
        for (k, &v) in nodes.iter().enumerate() {
            for &(u, w) in &self.adj[v] {
                if let Some(&ku) = position.get(&u) {
                    if k < ku {
                        edges.push((k, ku, w));
                    }
                }
            }
        }
        let labels = nodes.iter().map(|&v| self.label(v)).collect();
        WeightedGraph::from_edges(nodes.len(), edges)?.with_labels(labels)
    }

    /// Same graph with the edge set replaced. Labels are kept.
    pub(crate) fn with_edges<I>(&self, edges: I) -> Result<WeightedGraph>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let g = WeightedGraph::from_edges(self.node_count(), edges)?;
        match &self.labels {
            Some(labels) => g.with_labels(labels.clone()),
            None => Ok(g),
        }
    }
}
