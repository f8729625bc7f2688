use std::fs;
use std::path::Path;

use semnet_core::evaluation::read_evaluation_csv;
use semnet_core::runner::{classify, prepare_truth, run, ExperimentConfig, RunOptions};

const SMALL: &str = r#"
master_seed = 7

[design]
response_types = ["FA", "RJ"]
cue_set_types = ["broad"]
cue_set_sizes = [8]
n_responses = [3]
n_cue_replicates = 1
participants = 4

[truth.synthetic]
n_words = 60

[truth.perturbation]
rows = [0, 24]
replicates = 2
"#;

fn config(threads: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::from_toml(SMALL, "small.toml", Path::new(".")).unwrap();
    cfg.threads = threads;
    cfg
}

fn outputs(dir: &Path) -> Vec<String> {
    ["measures.csv", "evaluation.csv", "networks.csv"].iter().map(|f| fs::read_to_string(dir.join(f)).unwrap()).collect()
}

#[test]
fn one_cell_two_participants_gives_two_measure_rows() {
    let toml = SMALL.replace("response_types = [\"FA\", \"RJ\"]", "response_types = [\"RJ\"]").replace("participants = 4", "participants = 2");
    let cfg = ExperimentConfig::from_toml(&toml, "one.toml", Path::new(".")).unwrap();
    let truth = prepare_truth(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let manifest = run(&cfg, &truth, dir.path(), RunOptions::default()).unwrap();
    assert_eq!(manifest.n_tasks, 2);
    assert_eq!(manifest.n_failed, 0);
    let measures = fs::read_to_string(dir.path().join("measures.csv")).unwrap();
    assert_eq!(measures.lines().count(), 3);
    let eval = read_evaluation_csv(fs::File::open(dir.path().join("evaluation.csv")).unwrap(), "evaluation.csv").unwrap();
    assert_eq!(eval.len(), 10);
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg1 = config(1);
    run(&cfg1, &prepare_truth(&cfg1).unwrap(), a.path(), RunOptions::default()).unwrap();
    let cfg3 = config(3);
    run(&cfg3, &prepare_truth(&cfg3).unwrap(), b.path(), RunOptions::default()).unwrap();
    assert_eq!(outputs(a.path()), outputs(b.path()));
}

#[test]
fn resume_reuses_cells_and_reproduces_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(2);
    let truth = prepare_truth(&cfg).unwrap();
    let first = run(&cfg, &truth, dir.path(), RunOptions::default()).unwrap();
    let before = outputs(dir.path());
    assert!(first.designs.iter().all(|d| !d.resumed));
    let second = run(&cfg, &truth, dir.path(), RunOptions { resume: true }).unwrap();
    assert!(second.designs.iter().all(|d| d.resumed));
    assert_eq!(before, outputs(dir.path()));
}

#[test]
fn report_classifies_every_evaluation_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(1);
    run(&cfg, &prepare_truth(&cfg).unwrap(), dir.path(), RunOptions::default()).unwrap();
    let eval = read_evaluation_csv(fs::File::open(dir.path().join("evaluation.csv")).unwrap(), "evaluation.csv").unwrap();
    let rows = classify(&eval, &cfg.evaluation);
    assert_eq!(rows.len(), eval.len());
    for (row, res) in rows.iter().zip(&eval) {
        assert_eq!(row.bias_class.is_some(), !res.measure.is_within());
    }
}

#[test]
fn unknown_keys_are_rejected_with_a_line_number() {
    let err = ExperimentConfig::from_toml("[design]\nbogus = 1\n", "bad.toml", Path::new(".")).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("bad.toml") && msg.contains('2'), "{msg}");
}
