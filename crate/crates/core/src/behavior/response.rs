use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Response counts for one cue, keyed by response label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaRow {
    pub cue: String,
    pub counts: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaData {
    pub responses_per_cue: usize,
    /// One row per answered cue, in cue-set order.
    pub rows: Vec<FaRow>,
    /// Cues without any neighbor in the generating graph.
    pub skipped_cues: Vec<String>,
}

/// All judgments collected for one unordered cue pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RjPair {
    pub a: String,
    pub b: String,
    pub ratings: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RjData {
    pub scale_min: f64,
    pub scale_max: f64,
    /// Judged pairs ordered by the cue-set positions of `a` then `b`.
    pub pairs: Vec<RjPair>,
}

/// Simulated behavior of one participant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "paradigm")]
pub enum ResponseData {
    #[serde(rename = "FA")]
    Fa(FaData),
    #[serde(rename = "RJ")]
    Rj(RjData),
}

impl ResponseData {
    pub fn paradigm(&self) -> &'static str {
        match self {
            ResponseData::Fa(_) => "FA",
            ResponseData::Rj(_) => "RJ",
        }
    }

    /// Number of individual responses or judgments.
    pub fn total(&self) -> usize {
        match self {
            ResponseData::Fa(d) => d.rows.iter().flat_map(|r| r.counts.values()).sum::<u64>() as usize,
            ResponseData::Rj(d) => d.pairs.iter().map(|p| p.ratings.len()).sum(),
        }
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }

    pub fn read_json<R: Read>(input: R) -> Result<Self> {
        Ok(serde_json::from_reader(input)?)
    }
}
