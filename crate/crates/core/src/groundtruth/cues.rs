//! Cue set generation.
//!
//! * narrow: grow a single neighborhood greedily by mean weight to the set.
//! * broad: random walk over unused neighbors, backtracking at dead ends.
//! * mixed: `floor(sqrt(N))` broad seeds, each grown as a narrow group.

use std::fmt;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::rng::{derive_seed, rng_from_seed, SimRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CueSetType {
    Narrow,
    Broad,
    Mixed,
}

impl CueSetType {
    pub const ALL: [CueSetType; 3] = [CueSetType::Narrow, CueSetType::Broad, CueSetType::Mixed];

    pub fn as_str(&self) -> &'static str {
        match self {
            CueSetType::Narrow => "narrow",
            CueSetType::Broad => "broad",
            CueSetType::Mixed => "mixed",
        }
    }
}

impl fmt::Display for CueSetType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CueSetType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "narrow" => Ok(CueSetType::Narrow),
            "broad" => Ok(CueSetType::Broad),
            "mixed" => Ok(CueSetType::Mixed),
            other => Err(Error::input(format!("unknown cue set type {other:?} (narrow, broad, mixed)"))),
        }
    }
}

/// An ordered, duplicate-free list of cue nodes drawn from one graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CueSet {
    pub kind: CueSetType,
    pub cues: Vec<usize>,
    pub source_graph_id: String,
}

impl CueSet {
    pub fn len(&self) -> usize {
        self.cues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cues.is_empty()
    }

    pub fn labels(&self, g: &WeightedGraph) -> Vec<String> {
        self.cues.iter().map(|&c| g.label(c)).collect()
    }

    /// JSON array of cue labels.
    pub fn to_json(&self, g: &WeightedGraph) -> String {
        serde_json::to_string(&self.labels(g)).expect("labels serialize")
    }

    pub fn from_labels(kind: CueSetType, labels: &[String], g: &WeightedGraph, source_graph_id: &str) -> Result<Self> {
        let mut cues = Vec::with_capacity(labels.len());
        let mut seen = vec![false; g.node_count()];
        for label in labels {
            let i = g.index_of(label).ok_or_else(|| Error::input(format!("cue {label:?} is not a node of the graph")))?;
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::input(format!("cue {label:?} listed twice")));
            }
            cues.push(i);
        }
        Ok(Self { kind, cues, source_graph_id: source_graph_id.to_string() })
    }

    pub fn from_json(kind: CueSetType, json: &str, g: &WeightedGraph, source_graph_id: &str) -> Result<Self> {
        let labels: Vec<String> = serde_json::from_str(json)?;
        Self::from_labels(kind, &labels, g, source_graph_id)
    }
}

pub fn generate_cues(g: &WeightedGraph, kind: CueSetType, size: usize, seed: u64) -> Result<CueSet> {
    match kind {
        CueSetType::Narrow => narrow_cues(g, size, seed),
        CueSetType::Broad => broad_cues(g, size, seed),
        CueSetType::Mixed => mixed_cues(g, size, seed),
    }
}

fn exhausted(kind: CueSetType, achieved: usize, size: usize) -> Error {
    Error::input(format!("{kind} cue growth exhausted its frontier after {achieved} of {size} cues"))
}

fn random_start(g: &WeightedGraph, size: usize, rng: &mut SimRng) -> Result<usize> {
    if size == 0 {
        return Err(Error::input("cue set size must be positive"));
    }
    if size > g.node_count() {
        return Err(Error::input(format!("cue set size {size} exceeds node count {}", g.node_count())));
    }
    let candidates: Vec<usize> = (0..g.node_count()).filter(|&i| g.degree(i) > 0).collect();
    candidates.choose(rng).copied().ok_or_else(|| Error::input("graph has no edges to grow cue sets from"))
}

/// A neighborhood grown by adding the candidate with the highest mean edge
/// weight to the group's members (absent edges count as zero).
struct NarrowGroup {
    score: Vec<f64>,
}

impl NarrowGroup {
    fn new(g: &WeightedGraph, start: usize) -> Self {
        let mut group = Self { score: vec![0.0; g.node_count()] };
        group.absorb(g, start);
        group
    }

    fn absorb(&mut self, g: &WeightedGraph, v: usize) {
        for &(u, w) in g.neighbors(v) {
            self.score[u] += w;
        }
    }

    /// Best unused neighbor of the group; ties go to the smallest index.
    /// Group size is shared by every candidate, so the raw sum ranks the same
    /// as the mean.
    fn best(&self, used: &[bool]) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (v, &s) in self.score.iter().enumerate() {
            if s > 0.0 && !used[v] && best.is_none_or(|b| s > self.score[b]) {
                best = Some(v);
            }
        }
        best
    }
}

pub fn narrow_cues(g: &WeightedGraph, size: usize, seed: u64) -> Result<CueSet> {
    let mut rng = rng_from_seed(seed);
    let start = random_start(g, size, &mut rng)?;
    let mut used = vec![false; g.node_count()];
    used[start] = true;
    let mut cues = vec![start];
    let mut group = NarrowGroup::new(g, start);
    while cues.len() < size {
        let v = group.best(&used).ok_or_else(|| exhausted(CueSetType::Narrow, cues.len(), size))?;
        used[v] = true;
        cues.push(v);
        group.absorb(g, v);
    }
    Ok(CueSet { kind: CueSetType::Narrow, cues, source_graph_id: String::new() })
}

fn broad_walk(g: &WeightedGraph, size: usize, rng: &mut SimRng) -> Result<Vec<usize>> {
    let start = random_start(g, size, rng)?;
    let mut used = vec![false; g.node_count()];
    used[start] = true;
    let mut cues = vec![start];
    while cues.len() < size {
        // most recent cue with unused neighbors
        let next = cues.iter().rev().find_map(|&v| {
            let open: Vec<usize> = g.neighbors(v).iter().map(|&(u, _)| u).filter(|&u| !used[u]).collect();
            (!open.is_empty()).then_some(open)
        });
        let open = next.ok_or_else(|| exhausted(CueSetType::Broad, cues.len(), size))?;
        let v = *open.choose(rng).unwrap();
        used[v] = true;
        cues.push(v);
    }
    Ok(cues)
}

pub fn broad_cues(g: &WeightedGraph, size: usize, seed: u64) -> Result<CueSet> {
    let mut rng = rng_from_seed(seed);
    let cues = broad_walk(g, size, &mut rng)?;
    Ok(CueSet { kind: CueSetType::Broad, cues, source_graph_id: String::new() })
}

pub fn mixed_cues(g: &WeightedGraph, size: usize, seed: u64) -> Result<CueSet> {
    let n_broad = (size as f64).sqrt().floor() as usize;
    let mut rng = rng_from_seed(derive_seed(seed, &[0]));
    let seeds = broad_walk(g, n_broad.max(1), &mut rng)?;
    let mut used = vec![false; g.node_count()];
    for &s in &seeds {
        used[s] = true;
    }
    let mut groups: Vec<NarrowGroup> = seeds.iter().map(|&s| NarrowGroup::new(g, s)).collect();
    let mut cues = seeds;
    while cues.len() < size {
        let mut progressed = false;
        for group in groups.iter_mut() {
            if cues.len() == size {
                break;
            }
            if let Some(v) = group.best(&used) {
                used[v] = true;
                cues.push(v);
                group.absorb(g, v);
                progressed = true;
            }
        }
        if !progressed {
            return Err(exhausted(CueSetType::Mixed, cues.len(), size));
        }
    }
    Ok(CueSet { kind: CueSetType::Mixed, cues, source_graph_id: String::new() })
}
