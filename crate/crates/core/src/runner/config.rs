//! Experiment configuration.
//!
//! TOML, every table optional. Unknown keys are rejected.
//!
//! ```toml
//! master_seed = 1
//! threads = 0                 # 0 = one worker per core
//! crossing = "partitioned"    # or "crossed"
//!
//! [design]
//! preset = "desk"             # "desk" or "paper"; explicit keys override it
//! response_types = ["FA", "RJ"]
//! cue_set_types = ["narrow", "broad", "mixed"]
//! cue_set_sizes = [10, 50]
//! n_responses = [3, 30]
//! n_cue_replicates = 5
//! participants = 25
//!
//! [fa]
//! gamma_w = 10.0
//! gamma_f = 1.0
//! replacement = { policy = "without_replacement_per_block", block_size = 3 }
//!
//! [rj]
//! gamma = 1.0
//! sigma = 3.85
//!
//! [truth]
//! weight_floor = 0.2
//! # embeddings = "vectors.txt"  (with vocabulary and frequencies; paths are
//! # relative to the config file). Without embeddings a synthetic lexicon is used.
//! [truth.synthetic]
//! n_words = 500
//! [truth.perturbation]
//! rows = [0, 6, 12, 18, 24]   # rows of the (p, r) table; omit for all 25
//! replicates = 4
//!
//! [evaluation]
//! bias_threshold = 0.3
//! resolution_threshold = 0.5
//!
//! [output]
//! save_networks = false
//! ```
//!
//! Grid expansion is factorial with `response_types` outermost, then
//! `cue_set_types`, `cue_set_sizes` and `n_responses`, each in listed order.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::behavior::{FaParams, RjParams};
use crate::error::{Error, Result};
use crate::groundtruth::{CueSetType, SyntheticSpec, DEFAULT_WEIGHT_FLOOR, TABLE_S1};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ResponseType {
    #[serde(rename = "FA", alias = "fa")]
    Fa,
    #[serde(rename = "RJ", alias = "rj")]
    Rj,
}

impl ResponseType {
    pub fn as_str(&self) -> &'static str {
        match self {
            ResponseType::Fa => "FA",
            ResponseType::Rj => "RJ",
        }
    }
}

impl fmt::Display for ResponseType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ResponseType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "FA" | "fa" => Ok(ResponseType::Fa),
            "RJ" | "rj" => Ok(ResponseType::Rj),
            other => Err(Error::input(format!("unknown response type {other:?} (FA, RJ)"))),
        }
    }
}

/// How participants meet cue-set replicates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Crossing {
    /// Participant `k` sees replicate `k mod n_cue_replicates` only.
    #[default]
    Partitioned,
    /// Every participant sees every replicate.
    Crossed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Desk,
    Paper,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignFactors {
    pub response_types: Vec<ResponseType>,
    pub cue_set_types: Vec<CueSetType>,
    pub cue_set_sizes: Vec<usize>,
    pub n_responses: Vec<usize>,
    pub n_cue_replicates: usize,
    pub participants: usize,
}

impl DesignFactors {
    pub fn preset(p: Preset) -> Self {
        match p {
            Preset::Desk => Self {
                response_types: vec![ResponseType::Fa, ResponseType::Rj],
                cue_set_types: CueSetType::ALL.to_vec(),
                cue_set_sizes: vec![10, 50],
                n_responses: vec![3, 30],
                n_cue_replicates: 5,
                participants: 25,
            },
            Preset::Paper => Self {
                response_types: vec![ResponseType::Fa, ResponseType::Rj],
                cue_set_types: CueSetType::ALL.to_vec(),
                cue_set_sizes: vec![10, 100, 1000],
                n_responses: vec![3, 30, 300],
                n_cue_replicates: 10,
                participants: 250,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingFormat {
    #[default]
    Text,
    Binary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PerturbationConfig {
    /// Rows of the (p, r) table to use; `None` means all of them.
    pub rows: Option<Vec<usize>>,
    pub replicates: usize,
}

impl Default for PerturbationConfig {
    fn default() -> Self {
        Self { rows: None, replicates: 10 }
    }
}

impl PerturbationConfig {
    pub fn grid(&self) -> Result<Vec<(f64, f64)>> {
        match &self.rows {
            None => Ok(TABLE_S1.to_vec()),
            Some(rows) => rows
                .iter()
                .map(|&k| {
                    TABLE_S1
                        .get(k)
                        .copied()
                        .ok_or_else(|| Error::input(format!("perturbation row {k} out of range 0..{}", TABLE_S1.len())))
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TruthConfig {
    pub weight_floor: f64,
    pub embeddings: Option<PathBuf>,
    pub embeddings_format: EmbeddingFormat,
    pub vocabulary: Option<PathBuf>,
    pub frequencies: Option<PathBuf>,
    pub synthetic: SyntheticSpec,
    pub perturbation: PerturbationConfig,
}

impl Default for TruthConfig {
    fn default() -> Self {
        Self {
            weight_floor: DEFAULT_WEIGHT_FLOOR,
            embeddings: None,
            embeddings_format: EmbeddingFormat::Text,
            vocabulary: None,
            frequencies: None,
            synthetic: SyntheticSpec::default(),
            perturbation: PerturbationConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Thresholds {
    pub bias_threshold: f64,
    pub resolution_threshold: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { bias_threshold: 0.3, resolution_threshold: 0.5 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Also write every inferred network as an edge list.
    pub save_networks: bool,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDesign {
    preset: Option<Preset>,
    response_types: Option<Vec<ResponseType>>,
    cue_set_types: Option<Vec<CueSetType>>,
    cue_set_sizes: Option<Vec<usize>>,
    n_responses: Option<Vec<usize>>,
    n_cue_replicates: Option<usize>,
    participants: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    master_seed: Option<u64>,
    threads: Option<usize>,
    crossing: Option<Crossing>,
    #[serde(default)]
    design: RawDesign,
    #[serde(default)]
    fa: FaParams,
    #[serde(default)]
    rj: RjParams,
    #[serde(default)]
    truth: TruthConfig,
    #[serde(default)]
    evaluation: Thresholds,
    #[serde(default)]
    output: OutputConfig,
}

pub const DEFAULT_MASTER_SEED: u64 = 20_240_601;

/// A fully resolved experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub master_seed: u64,
    /// Worker threads; 0 uses every core. Never affects results.
    #[serde(skip)]
    pub threads: usize,
    pub crossing: Crossing,
    pub design: DesignFactors,
    pub fa: FaParams,
    pub rj: RjParams,
    pub truth: TruthConfig,
    pub evaluation: Thresholds,
    #[serde(skip)]
    pub output: OutputConfig,
}

impl ExperimentConfig {
    pub fn preset(p: Preset) -> Self {
        let mut truth = TruthConfig::default();
        if p == Preset::Desk {
            truth.perturbation = PerturbationConfig { rows: Some(vec![0, 6, 12, 18, 24]), replicates: 4 };
        }
        Self {
            master_seed: DEFAULT_MASTER_SEED,
            threads: 0,
            crossing: Crossing::Partitioned,
            design: DesignFactors::preset(p),
            fa: FaParams::default(),
            rj: RjParams::default(),
            truth,
            evaluation: Thresholds::default(),
            output: OutputConfig::default(),
        }
    }

    /// Parses TOML text. Relative paths resolve against `base_dir`.
    pub fn from_toml(text: &str, source: &str, base_dir: &Path) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| text[..s.start].matches('\n').count() + 1);
            Error::parse(source, line, e.message().to_string())
        })?;
        let preset = raw.design.preset.unwrap_or(Preset::Desk);
        let base = DesignFactors::preset(preset);
        let d = raw.design;
        let design = DesignFactors {
            response_types: d.response_types.unwrap_or(base.response_types),
            cue_set_types: d.cue_set_types.unwrap_or(base.cue_set_types),
            cue_set_sizes: d.cue_set_sizes.unwrap_or(base.cue_set_sizes),
            n_responses: d.n_responses.unwrap_or(base.n_responses),
            n_cue_replicates: d.n_cue_replicates.unwrap_or(base.n_cue_replicates),
            participants: d.participants.unwrap_or(base.participants),
        };
        let mut truth = raw.truth;
        for p in [&mut truth.embeddings, &mut truth.vocabulary, &mut truth.frequencies].into_iter().flatten() {
            if p.is_relative() {
                *p = base_dir.join(&*p);
            }
        }
        let cfg = Self {
            master_seed: raw.master_seed.unwrap_or(DEFAULT_MASTER_SEED),
            threads: raw.threads.unwrap_or(0),
            crossing: raw.crossing.unwrap_or_default(),
            design,
            fa: raw.fa,
            rj: raw.rj,
            truth,
            evaluation: raw.evaluation,
            output: raw.output,
        };
        cfg.validate().map_err(|e| Error::parse(source, None, e.to_string()))?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, &path.display().to_string(), base)
    }

    pub fn validate(&self) -> Result<()> {
        let d = &self.design;
        let empty = [
            ("response_types", d.response_types.is_empty()),
            ("cue_set_types", d.cue_set_types.is_empty()),
            ("cue_set_sizes", d.cue_set_sizes.is_empty()),
            ("n_responses", d.n_responses.is_empty()),
        ];
        if let Some((name, _)) = empty.iter().find(|(_, e)| *e) {
            return Err(Error::input(format!("design.{name} must list at least one level")));
        }
        if d.cue_set_sizes.iter().chain(&d.n_responses).any(|&x| x == 0) {
            return Err(Error::input("cue set sizes and response counts must be positive"));
        }
        if d.cue_set_sizes.contains(&1) && d.response_types.contains(&ResponseType::Rj) {
            return Err(Error::input("relatedness designs need cue sets of at least 2 words"));
        }
        if d.n_cue_replicates == 0 || d.participants == 0 {
            return Err(Error::input("n_cue_replicates and participants must be positive"));
        }
        if self.truth.perturbation.replicates == 0 {
            return Err(Error::input("truth.perturbation.replicates must be positive"));
        }
        if !(self.truth.weight_floor > 0.0 && self.truth.weight_floor < 1.0) {
            return Err(Error::input("truth.weight_floor must lie in (0, 1)"));
        }
        self.truth.perturbation.grid()?;
        self.fa.validate()?;
        self.rj.validate()?;
        Ok(())
    }

    /// Stable digest of everything that affects results.
    pub fn hash(&self) -> String {
        hex_digest(&serde_json::to_vec(self).expect("config serializes"))
    }

    /// Design cells in grid order.
    pub fn expand_grid(&self) -> Vec<DesignConfig> {
        let d = &self.design;
        let mut out = Vec::new();
        for &response_type in &d.response_types {
            for &cue_set_type in &d.cue_set_types {
                for &cue_set_size in &d.cue_set_sizes {
                    for &n_responses in &d.n_responses {
                        out.push(DesignConfig {
                            response_type,
                            cue_set_type,
                            cue_set_size,
                            n_responses,
                            fa: (response_type == ResponseType::Fa).then_some(self.fa),
                            rj: (response_type == ResponseType::Rj).then_some(self.rj),
                            n_cue_replicates: d.n_cue_replicates,
                            participants: d.participants,
                            crossing: self.crossing,
                            master_seed: self.master_seed,
                        });
                    }
                }
            }
        }
        out
    }
}

pub(crate) fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// One cell of the factorial design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignConfig {
    pub response_type: ResponseType,
    pub cue_set_type: CueSetType,
    pub cue_set_size: usize,
    pub n_responses: usize,
    pub fa: Option<FaParams>,
    pub rj: Option<RjParams>,
    pub n_cue_replicates: usize,
    pub participants: usize,
    pub crossing: Crossing,
    pub master_seed: u64,
}

impl DesignConfig {
    pub fn id(&self) -> String {
        format!("{}-{}-{}-{}", self.response_type, self.cue_set_type, self.cue_set_size, self.n_responses)
    }

    pub fn hash(&self) -> String {
        hex_digest(&serde_json::to_vec(self).expect("design serializes"))
    }

    /// First 8 bytes of the hash, used as a seed path component.
    pub fn hash_u64(&self) -> u64 {
        u64::from_str_radix(&self.hash()[..16], 16).expect("hex digest")
    }

    /// `(participant, cue replicate)` pairs in execution order.
    pub fn tasks(&self) -> Vec<(usize, usize)> {
        match self.crossing {
            Crossing::Partitioned => (0..self.participants).map(|p| (p, p % self.n_cue_replicates)).collect(),
            Crossing::Crossed => (0..self.participants)
                .flat_map(|p| (0..self.n_cue_replicates).map(move |r| (p, r)))
                .collect(),
        }
    }
}
