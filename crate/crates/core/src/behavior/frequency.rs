use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

/// Word → relative frequency. Every frequency is strictly positive.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FrequencyTable {
    freq: HashMap<String, f64>,
}

impl FrequencyTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, word: impl Into<String>, frequency: f64) -> Result<()> {
        let word = word.into();
        if !(frequency > 0.0 && frequency.is_finite()) {
            return Err(Error::input(format!("frequency of {word:?} must be positive, got {frequency}")));
        }
        self.freq.insert(word, frequency);
        Ok(())
    }

    pub fn get(&self, word: &str) -> Option<f64> {
        self.freq.get(word).copied()
    }

    pub fn len(&self) -> usize {
        self.freq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freq.is_empty()
    }

    /// Multiplies every frequency by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let mut out = FrequencyTable::new();
        for (w, &f) in &self.freq {
            out.insert(w.clone(), f * factor)?;
        }
        Ok(out)
    }

    /// Frequencies aligned with the graph's nodes. Fails if any node label
    /// has no entry.
    pub fn for_graph(&self, g: &WeightedGraph) -> Result<Vec<f64>> {
        let mut missing = Vec::new();
        let values: Vec<f64> = (0..g.node_count())
            .map(|i| {
                let label = g.label(i);
                self.get(&label).unwrap_or_else(|| {
                    missing.push(label);
                    0.0
                })
            })
            .collect();
        if !missing.is_empty() {
            let shown: Vec<&str> = missing.iter().take(20).map(String::as_str).collect();
            return Err(Error::input(format!(
                "{} graph words have no frequency: {}{}",
                missing.len(),
                shown.join(", "),
                if missing.len() > shown.len() { ", ..." } else { "" }
            )));
        }
        Ok(values)
    }

    /// Reads `word<TAB>frequency` lines.
    pub fn read<R: BufRead>(input: R, source: &str) -> Result<Self> {
        let mut table = FrequencyTable::new();
        for (idx, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |m: String| Error::parse(source, Some(idx + 1), m);
            let (word, value) = line.split_once('\t').ok_or_else(|| err("expected word<TAB>frequency".into()))?;
            let value: f64 = value.trim().parse().map_err(|e| err(format!("bad frequency: {e}")))?;
            table.insert(word, value).map_err(|e| err(e.to_string()))?;
        }
        Ok(table)
    }

    /// Writes `word<TAB>frequency` lines sorted by word.
    pub fn write<W: Write>(&self, out: &mut W) -> Result<()> {
        let mut entries: Vec<(&String, &f64)> = self.freq.iter().collect();
        entries.sort_by(|a, b| a.0.cmp(b.0));
        for (w, f) in entries {
            writeln!(out, "{w}\t{f}")?;
        }
        Ok(())
    }
}

/// Frequencies aligned with a graph's node indices.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeFrequencies(Vec<f64>);

impl NodeFrequencies {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(k) = values.iter().position(|f| !(*f > 0.0 && f.is_finite())) {
            return Err(Error::input(format!("frequency of node {k} must be positive, got {}", values[k])));
        }
        Ok(Self(values))
    }

    pub fn for_graph(table: &FrequencyTable, g: &WeightedGraph) -> Result<Self> {
        Self::new(table.for_graph(g)?)
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub(crate) fn check_graph(&self, g: &WeightedGraph) -> Result<()> {
        if self.0.len() != g.node_count() {
            return Err(Error::input(format!(
                "frequency vector has {} entries but the graph has {} nodes",
                self.0.len(),
                g.node_count()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_words_fail_loudly() {
        let g = WeightedGraph::empty(2).with_labels(vec!["a".into(), "b".into()]).unwrap();
        let mut t = FrequencyTable::new();
        t.insert("a", 0.1).unwrap();
        let err = t.for_graph(&g).unwrap_err().to_string();
        assert!(err.contains('b'));
        t.insert("b", 0.2).unwrap();
        assert_eq!(t.for_graph(&g).unwrap(), vec![0.1, 0.2]);
    }

    #[test]
    fn rejects_nonpositive_frequency() {
        assert!(FrequencyTable::read("a\t0\n".as_bytes(), "f").is_err());
        assert!(FrequencyTable::read("a 0.1\n".as_bytes(), "f").is_err());
        let t = FrequencyTable::read("a\t0.5\nb\t1e-6\n".as_bytes(), "f").unwrap();
        assert_eq!(t.get("b"), Some(1e-6));
    }
}
