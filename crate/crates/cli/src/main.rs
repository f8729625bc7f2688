use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use semnet_core::behavior::{
    simulate_fa, simulate_rj, tune_fa, tune_rj, FaNorms, FaParams, FrequencyTable, NodeFrequencies, ReplacementPolicy,
    ResponseData, RjNorms, RjParams, RjTuningOptions,
};
use semnet_core::evaluation::{
    evaluate_design, power_simulation, read_evaluation_csv, write_evaluation_csv, Level, ParticipantMeasures,
};
use semnet_core::graph::{measure_all, read_edge_list, write_edge_list, EdgeListFile};
use semnet_core::groundtruth::{
    build_similarity_network, generate_cues, generate_individual_networks, individual_seed, perturb, read_vocabulary,
    synthetic_lexicon, CueSet, CueSetType, EmbeddingTable, PerturbationParams, SyntheticSpec, DEFAULT_WEIGHT_FLOOR,
    TABLE_S1,
};
use semnet_core::inference::{infer_fa_network, infer_rj_network};
use semnet_core::runner::{self, classify, heatmap_svg, write_report_csv, ExperimentConfig, Preset, RunOptions, Thresholds};
use semnet_core::WeightedGraph;

#[derive(Parser)]
#[command(name = "semnet", version, about = "Semantic network recovery simulation")]
struct Cli {
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the common ground-truth network.
    GenTruth(GenTruthArgs),
    /// Individualize a network by triangle-score perturbation.
    Perturb(PerturbArgs),
    /// Draw a cue set.
    Cues(CuesArgs),
    /// Simulate free associations or relatedness judgments.
    Simulate(SimulateArgs),
    /// Infer a cue network from simulated responses.
    Infer(InferArgs),
    /// Compute the network measures.
    Measure(MeasureArgs),
    /// Score inferred networks against their ground truth.
    Evaluate(EvaluateArgs),
    /// Run a full experiment grid.
    Run(RunArgs),
    /// Classify evaluation results and draw a heatmap.
    Report(ReportArgs),
    /// Fit the free association exponents to norms.
    TuneFa(TuneFaArgs),
    /// Fit judgment noise to a target inter-rater correlation.
    TuneRj(TuneRjArgs),
    /// Power of a two-group study given a measure's resolution.
    Power(PowerArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Binary,
}

#[derive(Clone, Copy, ValueEnum)]
enum Paradigm {
    Fa,
    Rj,
}

#[derive(Args)]
struct GenTruthArgs {
    /// Embedding table; a synthetic lexicon is generated when omitted.
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// One word per line; defaults to every embedded word.
    #[arg(long)]
    vocabulary: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_WEIGHT_FLOOR)]
    floor: f64,
    /// Synthetic lexicon size.
    #[arg(long, default_value_t = 500)]
    n_words: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Where to write the synthetic frequency table.
    #[arg(long)]
    frequencies_out: Option<PathBuf>,
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args)]
struct PerturbArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, required_unless_present = "table")]
    p: Option<f64>,
    #[arg(long, required_unless_present = "table")]
    r: Option<f64>,
    /// Generate the whole (p, r) table instead of a single network.
    #[arg(long, conflicts_with_all = ["p", "r"])]
    table: bool,
    #[arg(long, default_value_t = 1)]
    replicates: usize,
    #[arg(long, default_value_t = DEFAULT_WEIGHT_FLOOR)]
    floor: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file, or directory with --table.
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args)]
struct CuesArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long = "type")]
    kind: String,
    #[arg(long)]
    size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    graph: PathBuf,
    /// JSON array of cue labels.
    #[arg(long)]
    cues: PathBuf,
    #[arg(long, value_enum)]
    paradigm: Paradigm,
    /// Responses per cue.
    #[arg(long)]
    responses: usize,
    /// Word frequency table (free association only).
    #[arg(long)]
    frequencies: Option<PathBuf>,
    #[arg(long, default_value_t = 10.0)]
    gamma_w: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma_f: f64,
    /// Distinct responses within blocks of this size.
    #[arg(long)]
    block_size: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, default_value_t = 3.85)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InferArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    cues: PathBuf,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MeasureArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Tab-separated lines `inferred<TAB>truth_subgraph<TAB>truth_full`,
    /// one per participant, naming edge-list files.
    #[arg(long)]
    pairs: PathBuf,
    #[arg(long, default_value = "design")]
    design_id: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    preset: Option<PresetArg>,
    /// Overrides the configured master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Reuse finished design cells in the output directory.
    #[arg(long)]
    resume: bool,
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    Desk,
    Paper,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    evaluation: PathBuf,
    #[arg(long, default_value_t = 0.3)]
    bias_threshold: f64,
    #[arg(long, default_value_t = 0.5)]
    resolution_threshold: f64,
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args)]
struct TuneFaArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    frequencies: PathBuf,
    /// `cue<TAB>response<TAB>count` lines.
    #[arg(long)]
    norms: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "1,2,5,10,15,20")]
    gamma_w: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0,0.5,1,1.5,2")]
    gamma_f: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct TuneRjArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    gamma: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,3,3.5,3.85,4,4.5,5,6,8")]
    sigma: Vec<f64>,
    #[arg(long, default_value_t = 0.68)]
    target: f64,
    /// Judge the pairs listed in these norms instead of sampled edges.
    #[arg(long)]
    norms: Option<PathBuf>,
    #[arg(long, default_value_t = 3000)]
    n_pairs: usize,
    #[arg(long, default_value_t = 10)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct PowerArgs {
    #[arg(long)]
    d: f64,
    #[arg(long)]
    r: f64,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 100_000)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).with_context(|| format!("cannot open {}", path.display()))?))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path).with_context(|| format!("cannot create {}", path.display()))?))
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn load_graph(path: &Path) -> Result<EdgeListFile> {
    Ok(read_edge_list(open(path)?, &path.display().to_string())?)
}

fn save_graph(path: &Path, g: &WeightedGraph, meta: &[(&str, String)]) -> Result<()> {
    let meta = meta.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
    let mut w = create(path)?;
    write_edge_list(&mut w, g, &meta)?;
    w.flush()?;
    Ok(())
}

fn load_cue_labels(path: &Path) -> Result<Vec<String>> {
    serde_json::from_reader(open(path)?).with_context(|| format!("{} is not a JSON array of labels", path.display()))
}

fn gen_truth(a: GenTruthArgs) -> Result<()> {
    let (emb, freq) = match &a.embeddings {
        Some(path) => {
            let source = path.display().to_string();
            let emb = match a.format {
                Format::Text => EmbeddingTable::read_text(open(path)?, &source)?,
                Format::Binary => EmbeddingTable::read_binary(open(path)?, &source)?,
            };
            (emb, None)
        }
        None => {
            let mut spec = SyntheticSpec { n_words: a.n_words, ..Default::default() };
            if let Some(seed) = a.seed {
                spec.seed = seed;
            }
            let (emb, freq) = synthetic_lexicon(&spec)?;
            (emb, Some(freq))
        }
    };
    let vocab = match &a.vocabulary {
        Some(p) => read_vocabulary(open(p)?)?,
        None => emb.words().to_vec(),
    };
    let g = build_similarity_network(&emb, &vocab, a.floor)?;
    save_graph(&a.out, &g, &[("weight_floor", a.floor.to_string())])?;
    if let (Some(path), Some(freq)) = (&a.frequencies_out, &freq) {
        let mut w = create(path)?;
        freq.write(&mut w)?;
        w.flush()?;
    }
    eprintln!("{} nodes, {} edges", g.node_count(), g.edge_count());
    Ok(())
}

fn perturb_cmd(a: PerturbArgs) -> Result<()> {
    let base = load_graph(&a.graph)?.graph;
    if a.table {
        let nets = generate_individual_networks(&base, &TABLE_S1, a.replicates, a.seed, a.floor)?;
        fs::create_dir_all(&a.out)?;
        for (k, g) in nets.iter().enumerate() {
            let (row, rep) = (k / a.replicates, k % a.replicates);
            let (p, r) = TABLE_S1[row];
            let meta = [
                ("p", p.to_string()),
                ("r", r.to_string()),
                ("replicate", rep.to_string()),
                ("seed", individual_seed(a.seed, row, rep).to_string()),
            ];
            save_graph(&a.out.join(format!("net-{row:02}-{rep:02}.tsv")), g, &meta)?;
        }
        eprintln!("wrote {} networks", nets.len());
    } else {
        let (p, r) = (a.p.expect("clap requires p"), a.r.expect("clap requires r"));
        let params = PerturbationParams { p, r, weight_floor: a.floor, seed: a.seed };
        let g = perturb(&base, &params)?;
        save_graph(&a.out, &g, &[("p", p.to_string()), ("r", r.to_string()), ("seed", a.seed.to_string())])?;
    }
    Ok(())
}

fn cues_cmd(a: CuesArgs) -> Result<()> {
    let g = load_graph(&a.graph)?.graph;
    let kind: CueSetType = a.kind.parse()?;
    let cues = generate_cues(&g, kind, a.size, a.seed)?;
    let mut w = output(a.out.as_deref())?;
    writeln!(w, "{}", cues.to_json(&g))?;
    Ok(())
}

fn simulate_cmd(a: SimulateArgs) -> Result<()> {
    let g = load_graph(&a.graph)?.graph;
    let labels = load_cue_labels(&a.cues)?;
    let cues = CueSet::from_labels(CueSetType::Broad, &labels, &g, &a.graph.display().to_string())?;
    let data = match a.paradigm {
        Paradigm::Fa => {
            let path = a.frequencies.as_ref().context("--frequencies is required for free association")?;
            let table = FrequencyTable::read(open(path)?, &path.display().to_string())?;
            let freq = NodeFrequencies::for_graph(&table, &g)?;
            let params = FaParams {
                gamma_w: a.gamma_w,
                gamma_f: a.gamma_f,
                replacement: match a.block_size {
                    Some(b) => ReplacementPolicy::WithoutReplacementPerBlock(b),
                    None => ReplacementPolicy::WithReplacement,
                },
            };
            let data = simulate_fa(&g, &freq, &cues, a.responses, &params, a.seed)?;
            if let ResponseData::Fa(d) = &data {
                if !d.skipped_cues.is_empty() {
                    eprintln!("skipped isolated cues: {}", d.skipped_cues.join(", "));
                }
            }
            data
        }
        Paradigm::Rj => simulate_rj(&g, &cues, a.responses, &RjParams::new(a.gamma, a.sigma), a.seed)?,
    };
    let mut w = output(a.out.as_deref())?;
    data.write_json(&mut w)?;
    writeln!(w)?;
    Ok(())
}

fn infer_cmd(a: InferArgs) -> Result<()> {
    let data = ResponseData::read_json(open(&a.data)?)?;
    let labels = load_cue_labels(&a.cues)?;
    let g = match &data {
        ResponseData::Fa(d) => infer_fa_network(d, &labels)?,
        ResponseData::Rj(d) => infer_rj_network(d, &labels)?,
    };
    let meta = [("paradigm", data.paradigm().to_string()), ("source", a.data.display().to_string())];
    match &a.out {
        Some(p) => save_graph(p, &g, &meta)?,
        None => {
            let meta = meta.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
            write_edge_list(&mut io::stdout().lock(), &g, &meta)?;
        }
    }
    Ok(())
}

fn measure_cmd(a: MeasureArgs) -> Result<()> {
    let g = load_graph(&a.graph)?.graph;
    let m = measure_all(&g, a.seed)?;
    let mut w = output(a.out.as_deref())?;
    serde_json::to_writer_pretty(&mut w, &m)?;
    writeln!(w)?;
    Ok(())
}

fn evaluate_cmd(a: EvaluateArgs) -> Result<()> {
    let text = fs::read_to_string(&a.pairs).with_context(|| format!("cannot read {}", a.pairs.display()))?;
    let mut participants = Vec::new();
    for (k, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let paths: Vec<&str> = line.split('\t').collect();
        if paths.len() != 3 {
            bail!("{}:{}: expected 3 tab-separated paths", a.pairs.display(), k + 1);
        }
        let base = a.pairs.parent().unwrap_or(Path::new("."));
        let m = |p: &str, s: u64| -> Result<_> { Ok(measure_all(&load_graph(&base.join(p))?.graph, s)?) };
        participants.push(ParticipantMeasures {
            inferred: m(paths[0], a.seed)?,
            truth_local: m(paths[1], a.seed)?,
            truth_global: m(paths[2], a.seed)?,
        });
    }
    let mut results = evaluate_design(&a.design_id, &participants, Level::Local)?;
    results.extend(evaluate_design(&a.design_id, &participants, Level::Global)?);
    write_evaluation_csv(output(a.out.as_deref())?, &results)?;
    Ok(())
}

/// Returns whether every task succeeded.
fn run_cmd(a: RunArgs, threads: usize) -> Result<bool> {
    let mut cfg = match (&a.config, a.preset) {
        (Some(path), _) => ExperimentConfig::from_file(path)?,
        (None, Some(PresetArg::Paper)) => ExperimentConfig::preset(Preset::Paper),
        (None, _) => ExperimentConfig::preset(Preset::Desk),
    };
    if let Some(seed) = a.seed {
        cfg.master_seed = seed;
    }
    if threads > 0 {
        cfg.threads = threads;
    }
    let truth = runner::prepare_truth(&cfg)?;
    eprintln!(
        "{} designs, {} individual networks, base {} nodes / {} edges",
        cfg.expand_grid().len(),
        truth.individuals.len(),
        truth.base.node_count(),
        truth.base.edge_count()
    );
    let manifest = runner::run(&cfg, &truth, &a.out, RunOptions { resume: a.resume })?;
    eprintln!(
        "{} tasks, {} failed, {:.1} s; results in {}",
        manifest.n_tasks,
        manifest.n_failed,
        manifest.elapsed_seconds,
        a.out.display()
    );
    Ok(manifest.n_failed == 0)
}

fn report_cmd(a: ReportArgs) -> Result<()> {
    let results = read_evaluation_csv(open(&a.evaluation)?, &a.evaluation.display().to_string())?;
    let t = Thresholds { bias_threshold: a.bias_threshold, resolution_threshold: a.resolution_threshold };
    let rows = classify(&results, &t);
    fs::create_dir_all(&a.out)?;
    let mut w = create(&a.out.join("classification.csv"))?;
    write_report_csv(&mut w, &rows)?;
    w.flush()?;
    fs::write(a.out.join("heatmap.svg"), heatmap_svg(&rows))?;
    Ok(())
}

fn tune_fa_cmd(a: TuneFaArgs) -> Result<()> {
    let g = load_graph(&a.graph)?.graph;
    let table = FrequencyTable::read(open(&a.frequencies)?, &a.frequencies.display().to_string())?;
    let freq = NodeFrequencies::for_graph(&table, &g)?;
    let norms = FaNorms::read(open(&a.norms)?, &a.norms.display().to_string())?;
    let grid: Vec<(f64, f64)> = a.gamma_w.iter().flat_map(|&w| a.gamma_f.iter().map(move |&f| (w, f))).collect();
    let fits = tune_fa(&g, &freq, &norms, &grid, a.seed)?;
    let num = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    let mut out = io::stdout().lock();
    writeln!(out, "gamma_w,gamma_f,pearson,spearman,median_rank_1,median_rank_2,median_rank_3,n_pairs")?;
    for f in &fits {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            f.gamma_w,
            f.gamma_f,
            num(f.pearson),
            num(f.spearman),
            num(f.median_ranks[0]),
            num(f.median_ranks[1]),
            num(f.median_ranks[2]),
            f.n_pairs
        )?;
    }
    Ok(())
}

fn tune_rj_cmd(a: TuneRjArgs) -> Result<()> {
    let g = load_graph(&a.graph)?.graph;
    let pairs = match &a.norms {
        Some(p) => Some(RjNorms::read(open(p)?, &p.display().to_string())?.node_pairs(&g)),
        None => None,
    };
    let grid: Vec<(f64, f64)> = a.gamma.iter().flat_map(|&g| a.sigma.iter().map(move |&s| (g, s))).collect();
    let options = RjTuningOptions { n_pairs: a.n_pairs, reps: a.reps };
    let t = tune_rj(&g, &grid, a.target, pairs.as_deref(), options, a.seed)?;
    let mut out = io::stdout().lock();
    writeln!(out, "gamma,sigma,interrater,best")?;
    for (k, c) in t.cells.iter().enumerate() {
        let r = c.interrater.map(|v| v.to_string()).unwrap_or_default();
        writeln!(out, "{},{},{},{}", c.gamma, c.sigma, r, t.best == Some(k))?;
    }
    Ok(())
}

fn power_cmd(a: PowerArgs) -> Result<()> {
    let p = power_simulation(a.d, a.r, a.n, a.alpha, a.reps, a.seed)?;
    println!("{p}");
    Ok(())
}

fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::GenTruth(a) => gen_truth(a)?,
        Command::Perturb(a) => perturb_cmd(a)?,
        Command::Cues(a) => cues_cmd(a)?,
        Command::Simulate(a) => simulate_cmd(a)?,
        Command::Infer(a) => infer_cmd(a)?,
        Command::Measure(a) => measure_cmd(a)?,
        Command::Evaluate(a) => evaluate_cmd(a)?,
        Command::Run(a) => return run_cmd(a, cli.threads),
        Command::Report(a) => report_cmd(a)?,
        Command::TuneFa(a) => tune_fa_cmd(a)?,
        Command::TuneRj(a) => tune_rj_cmd(a)?,
        Command::Power(a) => power_cmd(a)?,
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        // Only fails if a global pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global();
    }
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
