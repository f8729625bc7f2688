use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{DesignConfig, EmbeddingFormat, ExperimentConfig, ResponseType};
use crate::behavior::{simulate_fa, simulate_rj, FrequencyTable, NodeFrequencies, ResponseData};
use crate::error::{Error, Result};
use crate::evaluation::{evaluate_design, write_evaluation_csv, EvaluationResult, Level, ParticipantMeasures};
use crate::graph::{measure_all, write_edge_list, MeasureRecord, WeightedGraph};
use crate::groundtruth::{
    build_similarity_network, generate_cues, generate_individual_networks, read_vocabulary, synthetic_lexicon,
    CueSet, CueSetType, EmbeddingTable,
};
use crate::inference::{infer_fa_network, infer_rj_network};
use crate::rng::derive_seed;

// Top-level seed streams under the master seed.
const STREAM_PERTURB: u64 = 1;
const STREAM_CUES: u64 = 2;
const STREAM_TASK: u64 = 3;
const STREAM_TRUTH: u64 = 4;

/// Common ground truth, its individualized copies and word frequencies.
pub struct Truth {
    pub base: WeightedGraph,
    pub frequencies: FrequencyTable,
    pub individuals: Vec<WeightedGraph>,
    /// `(p, r, replicate)` that produced each individual network.
    pub individual_params: Vec<(f64, f64, usize)>,
}

/// Builds the common network (from embeddings or the synthetic lexicon) and
/// perturbs it into individual networks.
pub fn prepare_truth(cfg: &ExperimentConfig) -> Result<Truth> {
    let t = &cfg.truth;
    let (emb, freq) = match &t.embeddings {
        Some(path) => {
            let source = path.display().to_string();
            let reader = BufReader::new(File::open(path)?);
            let emb = match t.embeddings_format {
                EmbeddingFormat::Text => EmbeddingTable::read_text(reader, &source)?,
                EmbeddingFormat::Binary => EmbeddingTable::read_binary(reader, &source)?,
            };
            let fpath = t.frequencies.as_ref().ok_or_else(|| Error::input("truth.embeddings requires truth.frequencies"))?;
            let freq = FrequencyTable::read(BufReader::new(File::open(fpath)?), &fpath.display().to_string())?;
            (emb, freq)
        }
        None => synthetic_lexicon(&t.synthetic)?,
    };
    let vocab = match &t.vocabulary {
        Some(path) => read_vocabulary(BufReader::new(File::open(path)?))?,
        None => emb.words().to_vec(),
    };
    let base = build_similarity_network(&emb, &vocab, t.weight_floor)?;
    NodeFrequencies::for_graph(&freq, &base)?;
    let grid = t.perturbation.grid()?;
    let reps = t.perturbation.replicates;
    let individuals =
        generate_individual_networks(&base, &grid, reps, derive_seed(cfg.master_seed, &[STREAM_PERTURB]), t.weight_floor)?;
    let individual_params = grid.iter().flat_map(|&(p, r)| (0..reps).map(move |k| (p, r, k))).collect();
    Ok(Truth { base, frequencies: freq, individuals, individual_params })
}

/// Seed of the cue set for `(type, size, replicate)`; shared by every design
/// cell with the same cue factors.
pub fn cue_seed(master_seed: u64, kind: CueSetType, size: usize, replicate: usize) -> u64 {
    let k = CueSetType::ALL.iter().position(|&c| c == kind).unwrap() as u64;
    derive_seed(master_seed, &[STREAM_CUES, k, size as u64, replicate as u64])
}

pub fn task_seed(master_seed: u64, design: &DesignConfig, replicate: usize, participant: usize) -> u64 {
    derive_seed(master_seed, &[STREAM_TASK, design.hash_u64(), replicate as u64, participant as u64])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskRecord {
    pub participant: usize,
    pub replicate: usize,
    pub network: usize,
    pub seed: u64,
    pub outcome: TaskOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskOutcome {
    Ok { inferred: MeasureRecord, truth_local: MeasureRecord, n_edges: usize },
    Failed { error: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CellFile {
    design_hash: String,
    tasks: Vec<TaskRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestTask {
    pub participant: usize,
    pub replicate: usize,
    pub network: usize,
    pub seed: u64,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestDesign {
    pub id: String,
    pub hash: String,
    pub resumed: bool,
    pub tasks: Vec<ManifestTask>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub master_seed: u64,
    pub n_networks: usize,
    pub designs: Vec<ManifestDesign>,
    pub artifacts: Vec<PathBuf>,
    pub n_tasks: usize,
    pub n_failed: usize,
    pub started_unix: u64,
    pub elapsed_seconds: f64,
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut w, self)?;
        writeln!(w)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Reuse finished design cells found in the output directory.
    pub resume: bool,
}

struct Shared<'a> {
    cfg: &'a ExperimentConfig,
    truth: &'a Truth,
    truth_global: Vec<MeasureRecord>,
    freqs: Vec<NodeFrequencies>,
}

fn run_task(s: &Shared, design: &DesignConfig, participant: usize, replicate: usize, cues: &CueSet) -> Result<(TaskOutcome, Option<WeightedGraph>)> {
    let network = participant % s.truth.individuals.len();
    let g = &s.truth.individuals[network];
    let seed = task_seed(s.cfg.master_seed, design, replicate, participant);
    let labels = cues.labels(&s.truth.base);
    let local_cues = CueSet::from_labels(cues.kind, &labels, g, &network.to_string())?;
    let data = match design.response_type {
        ResponseType::Fa => simulate_fa(
            g,
            &s.freqs[network],
            &local_cues,
            design.n_responses,
            design.fa.as_ref().expect("FA design carries FA params"),
            derive_seed(seed, &[0]),
        )?,
        ResponseType::Rj => simulate_rj(
            g,
            &local_cues,
            design.n_responses,
            design.rj.as_ref().expect("RJ design carries RJ params"),
            derive_seed(seed, &[0]),
        )?,
    };
    let inferred = match &data {
        ResponseData::Fa(d) => infer_fa_network(d, &labels)?,
        ResponseData::Rj(d) => infer_rj_network(d, &labels)?,
    };
    let truth_sub = g.subgraph(&local_cues.cues)?;
    let outcome = TaskOutcome::Ok {
        inferred: measure_all(&inferred, derive_seed(seed, &[1]))?,
        truth_local: measure_all(&truth_sub, derive_seed(seed, &[2]))?,
        n_edges: inferred.edge_count(),
    };
    Ok((outcome, s.cfg.output.save_networks.then_some(inferred)))
}

fn run_cell(s: &Shared, design: &DesignConfig, out_dir: &Path) -> Result<Vec<TaskRecord>> {
    let mut cue_sets = Vec::with_capacity(design.n_cue_replicates);
    for rep in 0..design.n_cue_replicates {
        let seed = cue_seed(s.cfg.master_seed, design.cue_set_type, design.cue_set_size, rep);
        cue_sets.push(generate_cues(&s.truth.base, design.cue_set_type, design.cue_set_size, seed));
    }
    let tasks = design.tasks();
    let results: Vec<(TaskRecord, Option<WeightedGraph>)> = tasks
        .par_iter()
        .map(|&(participant, replicate)| {
            let network = participant % s.truth.individuals.len();
            let seed = task_seed(s.cfg.master_seed, design, replicate, participant);
            let attempt = match &cue_sets[replicate] {
                Ok(cues) => run_task(s, design, participant, replicate, cues),
                Err(e) => Err(Error::input(format!("cue set replicate {replicate}: {e}"))),
            };
            let (outcome, graph) = match attempt {
                Ok((o, g)) => (o, g),
                Err(e) => (TaskOutcome::Failed { error: e.to_string() }, None),
            };
            (TaskRecord { participant, replicate, network, seed, outcome }, graph)
        })
        .collect();
    if s.cfg.output.save_networks {
        let dir = out_dir.join("networks").join(design.id());
        fs::create_dir_all(&dir)?;
        for (rec, graph) in &results {
            if let Some(g) = graph {
                let path = dir.join(format!("p{:04}-r{:02}.tsv", rec.participant, rec.replicate));
                let meta = [
                    ("design".to_string(), design.id()),
                    ("participant".to_string(), rec.participant.to_string()),
                    ("replicate".to_string(), rec.replicate.to_string()),
                    ("seed".to_string(), rec.seed.to_string()),
                ]
                .into_iter()
                .collect();
                let mut w = BufWriter::new(File::create(path)?);
                write_edge_list(&mut w, g, &meta)?;
                w.flush()?;
            }
        }
    }
    Ok(results.into_iter().map(|(r, _)| r).collect())
}

fn load_cell(path: &Path, hash: &str) -> Option<Vec<TaskRecord>> {
    let file = File::open(path).ok()?;
    let cell: CellFile = serde_json::from_reader(BufReader::new(file)).ok()?;
    (cell.design_hash == hash).then_some(cell.tasks)
}

fn store_cell(path: &Path, cell: &CellFile) -> Result<()> {
    let tmp = path.with_extension("json.tmp");
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        serde_json::to_writer(&mut w, cell)?;
        w.flush()?;
    }
    fs::rename(tmp, path)?;
    Ok(())
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub const MEASURE_COLUMNS: &str = "design_id,participant,replicate,network,seed,n_nodes,n_edges,average_strength,aspl,reachable_pair_fraction,average_cc,modularity,truth_average_strength,truth_aspl,truth_average_cc,truth_modularity";

fn write_measures(path: &Path, cells: &[(DesignConfig, Vec<TaskRecord>)]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{MEASURE_COLUMNS}")?;
    for (design, tasks) in cells {
        for t in tasks {
            if let TaskOutcome::Ok { inferred: m, truth_local: tl, n_edges } = &t.outcome {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                    design.id(),
                    t.participant,
                    t.replicate,
                    t.network,
                    t.seed,
                    m.node_strengths.len(),
                    n_edges,
                    m.average_strength,
                    opt(m.aspl),
                    m.reachable_pair_fraction,
                    m.average_cc,
                    opt(m.modularity),
                    tl.average_strength,
                    opt(tl.aspl),
                    tl.average_cc,
                    opt(tl.modularity),
                )?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn write_networks_csv(path: &Path, truth: &Truth, measures: &[MeasureRecord]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "network,p,r,replicate,n_edges,average_strength,aspl,average_cc,modularity")?;
    for (k, ((g, &(p, r, rep)), m)) in truth.individuals.iter().zip(&truth.individual_params).zip(measures).enumerate() {
        writeln!(
            w,
            "{k},{p},{r},{rep},{},{},{},{},{}",
            g.edge_count(),
            m.average_strength,
            opt(m.aspl),
            m.average_cc,
            opt(m.modularity)
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Evaluates one cell's finished tasks at both levels.
pub fn evaluate_cell(design: &DesignConfig, tasks: &[TaskRecord], truth_global: &[MeasureRecord]) -> Result<Vec<EvaluationResult>> {
    let participants: Vec<ParticipantMeasures> = tasks
        .iter()
        .filter_map(|t| match &t.outcome {
            TaskOutcome::Ok { inferred, truth_local, .. } => Some(ParticipantMeasures {
                inferred: inferred.clone(),
                truth_local: truth_local.clone(),
                truth_global: truth_global[t.network].clone(),
            }),
            TaskOutcome::Failed { .. } => None,
        })
        .collect();
    let mut out = evaluate_design(&design.id(), &participants, Level::Local)?;
    out.extend(evaluate_design(&design.id(), &participants, Level::Global)?);
    Ok(out)
}

/// Runs every design cell and writes `measures.csv`, `evaluation.csv`,
/// `networks.csv` and `manifest.json` into `out_dir`. Finished cells are
/// kept under `cells/` so an interrupted run can resume.
pub fn run(cfg: &ExperimentConfig, truth: &Truth, out_dir: &Path, options: RunOptions) -> Result<RunManifest> {
    let started = Instant::now();
    let started_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    if truth.individuals.is_empty() {
        return Err(Error::input("no individual networks"));
    }
    fs::create_dir_all(out_dir.join("cells"))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::input(format!("thread pool: {e}")))?;
    pool.install(|| {
        let freqs = truth
            .individuals
            .iter()
            .map(|g| NodeFrequencies::for_graph(&truth.frequencies, g))
            .collect::<Result<Vec<_>>>()?;
        let truth_global = truth
            .individuals
            .par_iter()
            .enumerate()
            .map(|(k, g)| measure_all(g, derive_seed(cfg.master_seed, &[STREAM_TRUTH, k as u64])))
            .collect::<Result<Vec<_>>>()?;
        let shared = Shared { cfg, truth, truth_global, freqs };

        let mut cells = Vec::new();
        let mut designs = Vec::new();
        for design in cfg.expand_grid() {
            let hash = design.hash();
            let path = out_dir.join("cells").join(format!("{}.json", design.id()));
            let cached = if options.resume { load_cell(&path, &hash) } else { None };
            let resumed = cached.is_some();
            let tasks = match cached {
                Some(t) => t,
                None => {
                    let t = run_cell(&shared, &design, out_dir)?;
                    store_cell(&path, &CellFile { design_hash: hash.clone(), tasks: t.clone() })?;
                    t
                }
            };
            designs.push(ManifestDesign {
                id: design.id(),
                hash,
                resumed,
                tasks: tasks
                    .iter()
                    .map(|t| ManifestTask {
                        participant: t.participant,
                        replicate: t.replicate,
                        network: t.network,
                        seed: t.seed,
                        status: if matches!(t.outcome, TaskOutcome::Ok { .. }) { "ok" } else { "failed" }.to_string(),
                        error: match &t.outcome {
                            TaskOutcome::Failed { error } => Some(error.clone()),
                            TaskOutcome::Ok { .. } => None,
                        },
                    })
                    .collect(),
            });
            cells.push((design, tasks));
        }

        let mut evaluation = Vec::new();
        for (design, tasks) in &cells {
            evaluation.extend(evaluate_cell(design, tasks, &shared.truth_global)?);
        }
        let measures_path = out_dir.join("measures.csv");
        let evaluation_path = out_dir.join("evaluation.csv");
        let networks_path = out_dir.join("networks.csv");
        write_measures(&measures_path, &cells)?;
        write_evaluation_csv(BufWriter::new(File::create(&evaluation_path)?), &evaluation)?;
        write_networks_csv(&networks_path, truth, &shared.truth_global)?;

        let n_tasks = designs.iter().map(|d| d.tasks.len()).sum();
        let n_failed = designs.iter().flat_map(|d| &d.tasks).filter(|t| t.status != "ok").count();
        let manifest = RunManifest {
            config_hash: cfg.hash(),
            master_seed: cfg.master_seed,
            n_networks: truth.individuals.len(),
            designs,
            artifacts: vec![measures_path, evaluation_path, networks_path, out_dir.join("cells")],
            n_tasks,
            n_failed,
            started_unix,
            elapsed_seconds: started.elapsed().as_secs_f64(),
        };
        manifest.write(&out_dir.join("manifest.json"))?;
        Ok(manifest)
    })
}
