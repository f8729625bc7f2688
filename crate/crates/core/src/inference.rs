//! Networks inferred from simulated behavior.
//!
//! Free association: PPMI-transform the cue × response count matrix and
//! connect cues by the cosine similarity of their PPMI rows. Relatedness
//! judgments: average each pair's ratings and rescale to `[0, 1]`.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use crate::behavior::{FaData, RjData};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

/// Sparse cue × response count matrix. Columns are the union of observed
/// responses in first-seen order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CueResponseMatrix {
    pub cues: Vec<String>,
    pub responses: Vec<String>,
    /// Per cue, `(column, count)` with positive counts sorted by column.
    pub rows: Vec<Vec<(usize, u64)>>,
}

impl CueResponseMatrix {
    /// Builds a matrix whose rows follow `cues`. Cues reported as skipped get
    /// an empty row; cues the data never mentions are an error.
    pub fn from_fa(data: &FaData, cues: &[String]) -> Result<Self> {
        let by_cue: HashMap<&str, &BTreeMap<String, u64>> =
            data.rows.iter().map(|r| (r.cue.as_str(), &r.counts)).collect();
        let mut missing = Vec::new();
        let mut columns: HashMap<String, usize> = HashMap::new();
        let mut responses = Vec::new();
        let mut rows = Vec::with_capacity(cues.len());
        for cue in cues {
            let mut row = Vec::new();
            match by_cue.get(cue.as_str()) {
                Some(counts) => {
                    for (resp, &n) in counts.iter().filter(|(_, &n)| n > 0) {
                        let col = *columns.entry(resp.clone()).or_insert_with(|| {
                            responses.push(resp.clone());
                            responses.len() - 1
                        });
                        row.push((col, n));
                    }
                }
                None if data.skipped_cues.contains(cue) => {}
                None => missing.push(cue.as_str()),
            }
            row.sort_unstable();
            rows.push(row);
        }
        if !missing.is_empty() {
            return Err(Error::input(format!("cues absent from response data: {}", missing.join(", "))));
        }
        Ok(Self { cues: cues.to_vec(), responses, rows })
    }

    /// Dense constructor, mainly for tests and small tools.
    pub fn from_dense(cues: Vec<String>, responses: Vec<String>, counts: &[Vec<u64>]) -> Result<Self> {
        if counts.len() != cues.len() || counts.iter().any(|r| r.len() != responses.len()) {
            return Err(Error::input("count matrix shape does not match its labels"));
        }
        let rows = counts
            .iter()
            .map(|r| r.iter().enumerate().filter(|(_, &n)| n > 0).map(|(c, &n)| (c, n)).collect())
            .collect();
        Ok(Self { cues, responses, rows })
    }

    pub fn total(&self) -> u64 {
        self.rows.iter().flatten().map(|&(_, n)| n).sum()
    }
}

/// Sparse PPMI rows: `max(0, ln(p(c,r) / (p(c) p(r))))`, zeros dropped.
pub fn ppmi(m: &CueResponseMatrix) -> Result<Vec<Vec<(usize, f64)>>> {
    let total = m.total();
    if total == 0 {
        return Err(Error::input("count matrix is empty"));
    }
    let total = total as f64;
    let mut col_sum = vec![0u64; m.responses.len()];
    for &(c, n) in m.rows.iter().flatten() {
        col_sum[c] += n;
    }
    Ok(m.rows
        .iter()
        .map(|row| {
            let row_sum: u64 = row.iter().map(|&(_, n)| n).sum();
            row.iter()
                .filter_map(|&(c, n)| {
                    // p(c,r) / (p(c) p(r)) = n * total / (row * col)
                    let v = ((n as f64 * total) / (row_sum as f64 * col_sum[c] as f64)).ln();
                    (v > 0.0).then_some((c, v))
                })
                .collect()
        })
        .collect())
}

fn sparse_dot(a: &[(usize, f64)], b: &[(usize, f64)]) -> f64 {
    let (mut x, mut y, mut dot) = (0, 0, 0.0);
    while x < a.len() && y < b.len() {
        match a[x].0.cmp(&b[y].0) {
            std::cmp::Ordering::Less => x += 1,
            std::cmp::Ordering::Greater => y += 1,
            std::cmp::Ordering::Equal => {
                dot += a[x].1 * b[y].1;
                x += 1;
                y += 1;
            }
        }
    }
    dot
}

/// Cue network from free association data, labelled by cue.
pub fn infer_fa_network(data: &FaData, cues: &[String]) -> Result<WeightedGraph> {
    let m = CueResponseMatrix::from_fa(data, cues)?;
    let rows = if m.total() == 0 { vec![Vec::new(); cues.len()] } else { ppmi(&m)? };
    let norms: Vec<f64> = rows.iter().map(|r| r.iter().map(|(_, v)| v * v).sum::<f64>().sqrt()).collect();
    let n = cues.len();
    let edges: Vec<Vec<(usize, usize, f64)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            if norms[i] == 0.0 {
                return Vec::new();
            }
            (i + 1..n)
                .filter(|&j| norms[j] > 0.0)
                .filter_map(|j| {
                    let w = sparse_dot(&rows[i], &rows[j]) / (norms[i] * norms[j]);
                    (w > 0.0).then(|| (i, j, w.min(1.0)))
                })
                .collect()
        })
        .collect();
    WeightedGraph::from_edges(n, edges.into_iter().flatten())?.with_labels(cues.to_vec())
}

/// Cue network from relatedness judgments: mean rating of each judged pair
/// mapped linearly from the rating scale onto `[0, 1]`.
pub fn infer_rj_network(data: &RjData, cues: &[String]) -> Result<WeightedGraph> {
    if data.pairs.is_empty() {
        return Err(Error::input("no judged pairs"));
    }
    let index: HashMap<&str, usize> = cues.iter().enumerate().map(|(k, c)| (c.as_str(), k)).collect();
    let span = data.scale_max - data.scale_min;
    let mut edges: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for p in &data.pairs {
        let lookup = |w: &str| index.get(w).copied().ok_or_else(|| Error::input(format!("judged word {w:?} is not a cue")));
        let (a, b) = (lookup(&p.a)?, lookup(&p.b)?);
        if a == b || p.ratings.is_empty() {
            return Err(Error::input(format!("malformed judgment record for {:?}-{:?}", p.a, p.b)));
        }
        let mean = p.ratings.iter().sum::<f64>() / p.ratings.len() as f64;
        let w = ((mean - data.scale_min) / span).clamp(0.0, 1.0);
        if edges.insert((a.min(b), a.max(b)), w).is_some() {
            return Err(Error::input(format!("pair {:?}-{:?} listed twice", p.a, p.b)));
        }
    }
    let edges = edges.into_iter().filter(|&(_, w)| w > 0.0).map(|((a, b), w)| (a, b, w));
    WeightedGraph::from_edges(cues.len(), edges)?.with_labels(cues.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behavior::{FaRow, RjPair};

    fn labels(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    fn dense(counts: &[Vec<u64>]) -> CueResponseMatrix {
        let cues = (0..counts.len()).map(|k| format!("c{k}")).collect();
        let responses = (0..counts[0].len()).map(|k| format!("r{k}")).collect();
        CueResponseMatrix::from_dense(cues, responses, counts).unwrap()
    }

    #[test]
    fn ppmi_single_cell_is_zero() {
        assert_eq!(ppmi(&dense(&[vec![7]])).unwrap(), vec![Vec::<(usize, f64)>::new()]);
    }

    #[test]
    fn ppmi_two_by_two() {
        let p = ppmi(&dense(&[vec![2, 0], vec![1, 1]])).unwrap();
        assert_eq!(p[0].len(), 1);
        assert!((p[0][0].1 - (4.0f64 / 3.0).ln()).abs() < 1e-12);
        // (c2, r2): ln(0.25 / (0.5 * 0.25)) = ln 2; (c2, r1) is negative.
        assert_eq!(p[1].len(), 1);
        assert!((p[1][0].1 - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn ppmi_uniform_is_zero() {
        assert!(ppmi(&dense(&[vec![3, 3], vec![3, 3]])).unwrap().iter().all(Vec::is_empty));
    }

    fn fa(rows: &[(&str, &[(&str, u64)])]) -> FaData {
        FaData {
            responses_per_cue: 0,
            rows: rows
                .iter()
                .map(|(c, rs)| FaRow { cue: c.to_string(), counts: rs.iter().map(|(r, n)| (r.to_string(), *n)).collect() })
                .collect(),
            skipped_cues: vec![],
        }
    }

    #[test]
    fn identical_and_disjoint_cues() {
        let d = fa(&[
            ("a", &[("x", 2), ("y", 1)]),
            ("b", &[("x", 2), ("y", 1)]),
            ("c", &[("z", 3)]),
        ]);
        let g = infer_fa_network(&d, &labels(&["a", "b", "c"])).unwrap();
        assert!((g.weight(0, 1).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(g.weight(0, 2), None);
        assert_eq!(g.label(2), "c");
    }

    #[test]
    fn missing_cue_is_an_error() {
        let d = fa(&[("a", &[("x", 1)])]);
        assert!(infer_fa_network(&d, &labels(&["a", "b"])).is_err());
    }

    #[test]
    fn rj_anchor_and_midpoint() {
        let d = RjData {
            scale_min: 1.0,
            scale_max: 20.0,
            pairs: vec![
                RjPair { a: "a".into(), b: "b".into(), ratings: vec![20.0] },
                RjPair { a: "c".into(), b: "a".into(), ratings: vec![1.0, 20.0] },
                RjPair { a: "b".into(), b: "c".into(), ratings: vec![1.0] },
            ],
        };
        let g = infer_rj_network(&d, &labels(&["a", "b", "c"])).unwrap();
        assert_eq!(g.weight(0, 1), Some(1.0));
        assert_eq!(g.weight(0, 2), Some(0.5));
        assert_eq!(g.weight(1, 2), None);
    }
}
