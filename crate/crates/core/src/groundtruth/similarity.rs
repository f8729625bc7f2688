use rayon::prelude::*;

use super::EmbeddingTable;
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

/// Similarity network over `vocab`: an edge wherever the cosine between two
/// embedding vectors exceeds `weight_floor`, weighted by that cosine.
pub fn build_similarity_network(emb: &EmbeddingTable, vocab: &[String], weight_floor: f64) -> Result<WeightedGraph> {
    if !(0.0..1.0).contains(&weight_floor) {
        return Err(Error::input(format!("weight floor {weight_floor} outside [0, 1)")));
    }
    let table = emb.restrict(vocab)?;
    let n = table.len();
    let unit: Vec<Vec<f64>> = vocab
        .iter()
        .map(|w| {
            let v = table.get(w).unwrap();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter().map(|x| x / norm).collect()
        })
        .collect();
    let rows: Vec<Vec<(usize, usize, f64)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut row = Vec::new();
            for j in i + 1..n {
                let dot: f64 = unit[i].iter().zip(&unit[j]).map(|(a, b)| a * b).sum();
                if dot > weight_floor {
                    row.push((i, j, dot.min(1.0)));
                }
            }
            row
        })
        .collect();
    WeightedGraph::from_edges(n, rows.into_iter().flatten())?.with_labels(vocab.to_vec())
}
