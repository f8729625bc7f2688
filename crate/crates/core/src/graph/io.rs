//! Edge-list text format.
//!
//! ```text
//! #nodes 3
//! #meta design<TAB>FA-narrow-10-3
//! #label 0<TAB>cat
//! 0<TAB>1<TAB>0.707106781
//! ```
//!
//! `#nodes` comes first. `#meta` lines carry provenance key/value pairs and
//! `#label` lines name nodes (all or none). Weights are written with nine
//! significant digits.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use super::WeightedGraph;
use crate::error::{Error, Result};

/// A graph plus the provenance metadata stored alongside it.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeListFile {
    pub graph: WeightedGraph,
    pub meta: BTreeMap<String, String>,
}

/// Formats `w` in positional notation with nine significant digits.
pub fn format_weight(w: f64) -> String {
    if w == 0.0 {
        return "0.00000000".to_string();
    }
    let sci = format!("{:.8e}", w);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => ("-", rest),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let point = exp + 1;
    let body = if point <= 0 {
        format!("0.{}{}", "0".repeat((-point) as usize), digits)
    } else if point as usize >= digits.len() {
        format!("{}{}", digits, "0".repeat(point as usize - digits.len()))
    } else {
        let (int, frac) = digits.split_at(point as usize);
        format!("{int}.{frac}")
    };
    format!("{sign}{body}")
}

pub fn write_edge_list<W: Write>(
    out: &mut W,
    graph: &WeightedGraph,
    meta: &BTreeMap<String, String>,
) -> Result<()> {
    writeln!(out, "#nodes {}", graph.node_count())?;
    for (key, value) in meta {
        writeln!(out, "#meta {key}\t{value}")?;
    }
    if graph.has_labels() {
        for i in 0..graph.node_count() {
            writeln!(out, "#label {i}\t{}", graph.label(i))?;
        }
    }
    for e in graph.edges() {
        writeln!(out, "{}\t{}\t{}", e.i, e.j, format_weight(e.w))?;
    }
    Ok(())
}

/// Reads the edge-list format. `source` names the input in error messages.
pub fn read_edge_list<R: BufRead>(input: R, source: &str) -> Result<EdgeListFile> {
    let mut nodes: Option<usize> = None;
    let mut meta = BTreeMap::new();
    let mut labels: BTreeMap<usize, String> = BTreeMap::new();
    let mut edges = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = Some(idx + 1);
        let err = |msg: String| Error::parse(source, lineno, msg);
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("#nodes") {
            let n = rest.trim().parse::<usize>().map_err(|e| err(format!("bad node count: {e}")))?;
            nodes = Some(n);
        } else if let Some(rest) = line.strip_prefix("#meta ") {
            let (k, v) = rest.split_once('\t').ok_or_else(|| err("meta line needs key<TAB>value".into()))?;
            meta.insert(k.to_string(), v.to_string());
        } else if let Some(rest) = line.strip_prefix("#label ") {
            let (i, word) = rest.split_once('\t').ok_or_else(|| err("label line needs index<TAB>word".into()))?;
            let i = i.trim().parse::<usize>().map_err(|e| err(format!("bad label index: {e}")))?;
            labels.insert(i, word.to_string());
        } else if line.starts_with('#') {
            continue;
        } else {
            if nodes.is_none() {
                return Err(err("edge line before #nodes header".into()));
            }
            let mut fields = line.split('\t');
            let mut next = |name: &str| fields.next().ok_or_else(|| err(format!("missing {name} column")));
            let i = next("i")?.trim().parse::<usize>().map_err(|e| err(format!("bad node index: {e}")))?;
            let j = next("j")?.trim().parse::<usize>().map_err(|e| err(format!("bad node index: {e}")))?;
            let w = next("w")?.trim().parse::<f64>().map_err(|e| err(format!("bad weight: {e}")))?;
            edges.push((i, j, w));
        }
    }
    let n = nodes.ok_or_else(|| Error::parse(source, None, "missing #nodes header"))?;
    let graph = WeightedGraph::from_edges(n, edges).map_err(|e| Error::parse(source, None, e.to_string()))?;
    let graph = if labels.is_empty() {
        graph
    } else {
        if labels.len() != n || labels.keys().copied().ne(0..n) {
            return Err(Error::parse(source, None, format!("expected labels for all {n} nodes")));
        }
        graph.with_labels(labels.into_values().collect()).map_err(|e| Error::parse(source, None, e.to_string()))?
    };
    Ok(EdgeListFile { graph, meta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn formats_nine_significant_digits() {
        assert_eq!(format_weight(0.5), "0.500000000");
        assert_eq!(format_weight(1.0), "1.00000000");
        assert_eq!(format_weight(std::f64::consts::FRAC_1_SQRT_2), "0.707106781");
        assert_eq!(format_weight(0.000123456789123), "0.000123456789");
        assert_eq!(format_weight(12.5), "12.5000000");
        assert_eq!(format_weight(1234567890.0), "1234567890");
    }

    #[test]
    fn round_trips_labels_and_meta() {
        let g = WeightedGraph::from_edges(3, [(0, 1, 0.25), (1, 2, 0.75)])
            .unwrap()
            .with_labels(vec!["cat".into(), "dog".into(), "bone".into()])
            .unwrap();
        let mut meta = BTreeMap::new();
        meta.insert("participant".to_string(), "4".to_string());
        let mut buf = Vec::new();
        write_edge_list(&mut buf, &g, &meta).unwrap();
        let back = read_edge_list(buf.as_slice(), "mem").unwrap();
        assert_eq!(back.graph, g);
        assert_eq!(back.meta, meta);
    }

    #[test]
    fn reports_line_of_bad_edge() {
        let text = "#nodes 2\n0\t1\tabc\n";
        match read_edge_list(text.as_bytes(), "g.tsv") {
            Err(Error::Parse { location, .. }) => assert_eq!(location.line, Some(2)),
            other => panic!("unexpected {other:?}"),
        }
    }

    proptest! {
        #[test]
        fn nine_digit_weights_round_trip_bit_exactly(mantissa in 1u64..=999_999_999, shift in 0u32..4) {
            let text = format!("{}e-{}", mantissa, 9 + shift);
            let w: f64 = text.parse().unwrap();
            prop_assume!(w > 0.0 && w <= 1.0);
            let g = WeightedGraph::from_edges(2, [(0, 1, w)]).unwrap();
            let mut buf = Vec::new();
            write_edge_list(&mut buf, &g, &BTreeMap::new()).unwrap();
            let back = read_edge_list(buf.as_slice(), "mem").unwrap();
            prop_assert_eq!(back.graph.edges()[0].w.to_bits(), w.to_bits());
        }
    }
}
