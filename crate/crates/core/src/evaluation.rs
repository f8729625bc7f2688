//! Recovery scores: bias, resolution, and the power of studies that rely on
//! an imperfect measure.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::graph::MeasureRecord;
use crate::rng::{derive_seed, rng_from_seed};
use crate::stats::spearman;

/// Smallest inferred/true ratio entering the geometric mean.
pub const RATIO_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bias {
    pub value: f64,
    /// Pairs whose ratio was raised to [`RATIO_FLOOR`].
    pub floored: usize,
}

/// Geometric mean of `inferred / truth` minus one, evaluated as
/// `exp(mean(ln ratio)) - 1`.
pub fn bias(inferred: &[f64], truth: &[f64]) -> Result<Bias> {
    if inferred.len() != truth.len() {
        return Err(Error::input(format!("length mismatch: {} inferred vs {} true values", inferred.len(), truth.len())));
    }
    if inferred.is_empty() {
        return Err(Error::input("bias needs at least one pair"));
    }
    if let Some(t) = truth.iter().find(|&&t| !(t > 0.0 && t.is_finite())) {
        return Err(Error::input(format!("true value {t} is not positive")));
    }
    if let Some(x) = inferred.iter().find(|&&x| !(x >= 0.0 && x.is_finite())) {
        return Err(Error::input(format!("inferred value {x} is negative or not finite")));
    }
    let mut floored = 0;
    let log_sum: f64 = inferred
        .iter()
        .zip(truth)
        .map(|(x, t)| {
            let ratio = x / t;
            if ratio < RATIO_FLOOR {
                floored += 1;
                RATIO_FLOOR.ln()
            } else {
                ratio.ln()
            }
        })
        .sum();
    Ok(Bias { value: (log_sum / inferred.len() as f64).exp_m1(), floored })
}

/// Spearman correlation with average ranks. `Ok(None)` when either list has
/// no variance.
pub fn resolution(inferred: &[f64], truth: &[f64]) -> Result<Option<f64>> {
    if inferred.len() != truth.len() {
        return Err(Error::input(format!("length mismatch: {} inferred vs {} true values", inferred.len(), truth.len())));
    }
    if inferred.len() < 3 {
        return Err(Error::input("resolution needs at least 3 pairs"));
    }
    Ok(spearman(inferred, truth))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    EdgeWeight,
    NodeStrength,
    AverageStrength,
    Aspl,
    AverageCc,
    Modularity,
}

impl Measure {
    pub const ALL: [Measure; 6] = [
        Measure::EdgeWeight,
        Measure::NodeStrength,
        Measure::AverageStrength,
        Measure::Aspl,
        Measure::AverageCc,
        Measure::Modularity,
    ];
    pub const BETWEEN: [Measure; 4] = [Measure::AverageStrength, Measure::Aspl, Measure::AverageCc, Measure::Modularity];

    pub fn as_str(&self) -> &'static str {
        match self {
            Measure::EdgeWeight => "edge_weight",
            Measure::NodeStrength => "node_strength",
            Measure::AverageStrength => "average_strength",
            Measure::Aspl => "aspl",
            Measure::AverageCc => "average_cc",
            Measure::Modularity => "modularity",
        }
    }

    /// Compared within networks (node by node or edge by edge).
    pub fn is_within(&self) -> bool {
        matches!(self, Measure::EdgeWeight | Measure::NodeStrength)
    }

    pub fn scalar(&self, m: &MeasureRecord) -> Option<f64> {
        match self {
            Measure::AverageStrength => Some(m.average_strength),
            Measure::Aspl => m.aspl,
            Measure::AverageCc => Some(m.average_cc),
            Measure::Modularity => m.modularity,
            Measure::EdgeWeight | Measure::NodeStrength => None,
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Measure::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::input(format!("unknown measure {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    /// Against the truth network restricted to the cue set.
    Local,
    /// Against the full truth network.
    Global,
}

impl Level {
    pub fn as_str(&self) -> &'static str {
        match self {
            Level::Local => "local",
            Level::Global => "global",
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "local" => Ok(Level::Local),
            "global" => Ok(Level::Global),
            other => Err(Error::input(format!("unknown level {other:?}"))),
        }
    }
}

/// Measures of one participant: the inferred network, the truth network
/// restricted to the same cues (same node order), and the full truth network.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticipantMeasures {
    pub inferred: MeasureRecord,
    pub truth_local: MeasureRecord,
    pub truth_global: MeasureRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationResult {
    pub design_id: String,
    pub measure: Measure,
    pub level: Level,
    pub bias: Option<f64>,
    pub resolution: Option<f64>,
    pub n_points: usize,
    pub flags: Vec<String>,
}

/// Edge weights of both networks over every node pair, absent edges
/// counting as 0.
fn aligned_edge_weights(inferred: &MeasureRecord, truth: &MeasureRecord) -> (Vec<f64>, Vec<f64>) {
    let n = truth.node_strengths.len();
    let slot = |i: usize, j: usize| i * n - i * (i + 1) / 2 + (j - i - 1);
    let mut x = vec![0.0; n * n.saturating_sub(1) / 2];
    let mut y = x.clone();
    for &(i, j, w) in &inferred.edge_weights {
        x[slot(i, j)] = w;
    }
    for &(i, j, w) in &truth.edge_weights {
        y[slot(i, j)] = w;
    }
    (x, y)
}

fn within(design_id: &str, measure: Measure, participants: &[ParticipantMeasures]) -> Result<EvaluationResult> {
    let mut values = Vec::new();
    let mut flags = Vec::new();
    let mut undefined = 0;
    let mut too_small = 0;
    for (k, p) in participants.iter().enumerate() {
        if p.inferred.node_strengths.len() != p.truth_local.node_strengths.len() {
            return Err(Error::input(format!(
                "participant {k}: inferred network has {} nodes, truth subgraph {}",
                p.inferred.node_strengths.len(),
                p.truth_local.node_strengths.len()
            )));
        }
        let (x, y) = match measure {
            Measure::NodeStrength => (p.inferred.node_strengths.clone(), p.truth_local.node_strengths.clone()),
            _ => aligned_edge_weights(&p.inferred, &p.truth_local),
        };
        if x.len() < 3 {
            too_small += 1;
            continue;
        }
        match resolution(&x, &y)? {
            Some(r) => values.push(r),
            None => undefined += 1,
        }
    }
    if undefined > 0 {
        flags.push(format!("zero_variance={undefined}"));
    }
    if too_small > 0 {
        flags.push(format!("too_few_points={too_small}"));
    }
    let resolution = (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64);
    Ok(EvaluationResult {
        design_id: design_id.to_string(),
        measure,
        level: Level::Local,
        bias: None,
        resolution,
        n_points: values.len(),
        flags,
    })
}

fn between(design_id: &str, measure: Measure, level: Level, participants: &[ParticipantMeasures]) -> Result<EvaluationResult> {
    let mut flags = Vec::new();
    let (mut x, mut y) = (Vec::new(), Vec::new());
    let (mut missing, mut nonpositive) = (0, 0);
    for p in participants {
        let truth = match level {
            Level::Local => &p.truth_local,
            Level::Global => &p.truth_global,
        };
        match (measure.scalar(&p.inferred), measure.scalar(truth)) {
            (Some(a), Some(t)) if t > 0.0 => {
                x.push(a.max(0.0));
                y.push(t);
            }
            (Some(_), Some(_)) => nonpositive += 1,
            _ => missing += 1,
        }
    }
    if missing > 0 {
        flags.push(format!("missing={missing}"));
    }
    if nonpositive > 0 {
        flags.push(format!("nonpositive_truth={nonpositive}"));
    }
    let bias = if x.is_empty() {
        None
    } else {
        let b = bias(&x, &y)?;
        if b.floored > 0 {
            flags.push(format!("ratio_floored={}", b.floored));
        }
        Some(b.value)
    };
    let resolution = if x.len() >= 3 {
        let r = resolution(&x, &y)?;
        if r.is_none() {
            flags.push("zero_variance".to_string());
        }
        r
    } else {
        flags.push("too_few_points".to_string());
        None
    };
    Ok(EvaluationResult { design_id: design_id.to_string(), measure, level, bias, resolution, n_points: x.len(), flags })
}

/// Scores one design cell. Local level: the four between-network measures
/// (bias and resolution) plus edge weights and node strengths (resolution
/// only, computed per participant and averaged). Global level: the four
/// between-network measures against the full truth networks.
pub fn evaluate_design(design_id: &str, participants: &[ParticipantMeasures], level: Level) -> Result<Vec<EvaluationResult>> {
    let mut out = Vec::new();
    if level == Level::Local {
        for m in [Measure::EdgeWeight, Measure::NodeStrength] {
            out.push(within(design_id, m, participants)?);
        }
    }
    for m in Measure::BETWEEN {
        out.push(between(design_id, m, level, participants)?);
    }
    Ok(out)
}

/// Column order of the evaluation CSV.
pub const EVALUATION_COLUMNS: [&str; 7] = ["design_id", "measure", "level", "bias", "resolution", "n_points", "flags"];

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    design_id: String,
    measure: String,
    level: String,
    bias: Option<f64>,
    resolution: Option<f64>,
    n_points: usize,
    flags: String,
}

pub fn write_evaluation_csv<W: Write>(out: W, results: &[EvaluationResult]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(EVALUATION_COLUMNS).map_err(csv_error)?;
    for r in results {
        w.serialize(CsvRow {
            design_id: r.design_id.clone(),
            measure: r.measure.to_string(),
            level: r.level.to_string(),
            bias: r.bias,
            resolution: r.resolution,
            n_points: r.n_points,
            flags: r.flags.join(";"),
        })
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_evaluation_csv<R: Read>(input: R, source: &str) -> Result<Vec<EvaluationResult>> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let headers = rd.headers().map_err(|e| Error::parse(source, Some(1), e.to_string()))?.clone();
    if headers.iter().ne(EVALUATION_COLUMNS) {
        return Err(Error::parse(source, Some(1), format!("expected columns {}", EVALUATION_COLUMNS.join(","))));
    }
    let mut out = Vec::new();
    for (k, row) in rd.deserialize::<CsvRow>().enumerate() {
        let line = Some(k + 2);
        let row = row.map_err(|e| Error::parse(source, line, e.to_string()))?;
        out.push(EvaluationResult {
            measure: row.measure.parse().map_err(|e: Error| Error::parse(source, line, e.to_string()))?,
            level: row.level.parse().map_err(|e: Error| Error::parse(source, line, e.to_string()))?,
            design_id: row.design_id,
            bias: row.bias,
            resolution: row.resolution,
            n_points: row.n_points,
            flags: row.flags.split(';').filter(|s| !s.is_empty()).map(str::to_string).collect(),
        });
    }
    Ok(out)
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::input(format!("csv: {other:?}")),
    }
}

const POWER_CHUNK: usize = 1000;

/// Monte Carlo power of a one-sided pooled two-sample t-test when the
/// observed score is `r * true + sqrt(1 - r^2) * noise` and true scores of
/// the second group are shifted by `d` standard deviations.
pub fn power_simulation(d: f64, resolution_r: f64, n_per_group: usize, alpha: f64, reps: usize, seed: u64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::input(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if !(0.0..=1.0).contains(&resolution_r) {
        return Err(Error::input(format!("resolution must lie in [0, 1], got {resolution_r}")));
    }
    if n_per_group < 2 || reps == 0 || !d.is_finite() {
        return Err(Error::input("need n_per_group >= 2, reps >= 1 and finite d"));
    }
    let df = (2 * n_per_group - 2) as f64;
    let critical = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::input(e.to_string()))?.inverse_cdf(1.0 - alpha);
    let noise_sd = (1.0 - resolution_r * resolution_r).sqrt();
    let n = n_per_group as f64;
    let chunks = reps.div_ceil(POWER_CHUNK);
    let hits: usize = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = rng_from_seed(derive_seed(seed, &[c as u64]));
            let count = POWER_CHUNK.min(reps - c * POWER_CHUNK);
            let mut hits = 0;
            for _ in 0..count {
                let mut group = |shift: f64| {
                    let (mut s, mut ss) = (0.0, 0.0);
                    for _ in 0..n_per_group {
                        let t: f64 = StandardNormal.sample(&mut rng);
                        let e: f64 = StandardNormal.sample(&mut rng);
                        let x = resolution_r * (t + shift) + noise_sd * e;
                        s += x;
                        ss += x * x;
                    }
                    let mean = s / n;
                    (mean, (ss - n * mean * mean) / (n - 1.0))
                };
                let (m0, v0) = group(0.0);
                let (m1, v1) = group(d);
                let pooled = ((v0 + v1) / 2.0 * (2.0 / n)).sqrt();
                if (m1 - m0) / pooled > critical {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    Ok(hits as f64 / reps as f64)
}
