//! End-to-end pipeline runs through the library command functions.

use std::fs;

use tempfile::tempdir;

use ccir::benchgen::PlantedSpec;
use ccir::pipeline::{cmd_build, cmd_gen, cmd_report, cmd_simulate, RunConfig};

fn config_in(dir: &std::path::Path) -> RunConfig {
    RunConfig {
        documents: dir.join("documents.tsv"),
        edges: dir.join("edges.tsv"),
        cases: dir.join("cases.txt"),
        tree: dir.join("tree.tsv"),
        report_csv: dir.join("outcomes.csv"),
        report_json: dir.join("summary.json"),
        ..RunConfig::default()
    }
}

#[test]
fn generated_corpus_flows_through_build_simulate_report() {
    let dir = tempdir().unwrap();
    let mut config = config_in(dir.path());
    config.base_resolution = 0.02;
    config.factor = 4.0;
    config.max_depth = 2;
    config.seed = 42;
    let spec = PlantedSpec { seed: 42, ..PlantedSpec::default() };
    cmd_gen(&config, &spec, 0.0).unwrap();

    // 240 documents, one case per deepest block.
    let docs = fs::read_to_string(&config.documents).unwrap();
    assert_eq!(docs.lines().count(), 240);
    let cases = fs::read_to_string(&config.cases).unwrap();
    assert_eq!(cases.lines().filter(|l| l.starts_with("case ")).count(), 12);

    let report = cmd_build(&config).unwrap();
    assert_eq!(report.level_counts[0], 1);
    assert!(report.level_counts.len() <= 3);

    let summary = cmd_simulate(&config).unwrap();
    assert_eq!(summary.skipped, 0);
    assert_eq!(summary.filtered_out, 0);
    // 12 cases x the default 11-value grid.
    let csv = fs::read_to_string(&config.report_csv).unwrap();
    assert_eq!(csv.lines().count() - 1, 12 * 11);
    assert_eq!(summary.betas.len(), 11);

    let table = cmd_report(&config).unwrap();
    assert!(table.lines().count() >= 12);
    assert!(table.starts_with("beta"));
}

#[test]
fn max_depth_one_gives_root_plus_one_level() {
    let dir = tempdir().unwrap();
    let mut config = config_in(dir.path());
    config.max_depth = 1;
    config.base_resolution = 0.02;
    config.seed = 7;
    let spec = PlantedSpec { seed: 7, ..PlantedSpec::default() };
    cmd_gen(&config, &spec, 0.0).unwrap();
    let report = cmd_build(&config).unwrap();
    assert_eq!(report.level_counts.len(), 2, "expected exactly root + one level");
    assert_eq!(report.level_counts[0], 1);
    assert!(report.level_counts[1] <= 10);
}

#[test]
fn window_skips_and_filter_excludes_cases() {
    let dir = tempdir().unwrap();
    let mut config = config_in(dir.path());
    config.max_depth = 1;
    config.betas = vec![1.0];
    config.task_year = Some(2006);
    config.span = 3; // window 2003-2005

    // Hand-written corpus: three documents inside the window, one outside.
    fs::write(&config.documents, "a\t2003\nb\t2004\nc\t2005\nd\t2010\n").unwrap();
    fs::write(&config.edges, "a\tb\nb\tc\nc\td\n").unwrap();
    // Case small-relevant: survives the window but fails the >= 10 rule.
    // Case out-of-window: relevant document d is filtered away.
    fs::write(
        &config.cases,
        "case small 2006 3\nrelevant: a b\nbaseline: a b c\n\
         case outside 2006 1\nrelevant: d\nbaseline: d\n",
    )
    .unwrap();

    cmd_build(&config).unwrap();
    let summary = cmd_simulate(&config).unwrap();
    assert_eq!(summary.filtered_out, 1);
    assert_eq!(summary.skipped, 1);
    assert!(summary.betas.is_empty());
    // Header-only CSV.
    let csv = fs::read_to_string(&config.report_csv).unwrap();
    assert_eq!(csv.lines().count(), 1);
    assert_eq!(cmd_report(&config).unwrap(), "no outcomes\n");
}

#[test]
fn relevant_only_expansion_restricts_the_tree() {
    let dir = tempdir().unwrap();
    let mut config = config_in(dir.path());
    config.base_resolution = 0.02;
    config.factor = 4.0;
    config.max_depth = 2;
    config.seed = 3;
    config.expand = ccir::pipeline::ExpandMode::RelevantOnly;
    let spec = PlantedSpec { seed: 3, ..PlantedSpec::default() };
    cmd_gen(&config, &spec, 0.0).unwrap();

    // Keep only the first case: expansion should follow its relevant docs.
    let all = fs::read_to_string(&config.cases).unwrap();
    let one_case: String = all.lines().take(3).map(|l| format!("{l}\n")).collect();
    fs::write(&config.cases, one_case).unwrap();

    let restricted = cmd_build(&config).unwrap();
    let mut full_config = config.clone();
    full_config.expand = ccir::pipeline::ExpandMode::All;
    full_config.tree = dir.path().join("tree_full.tsv");
    let full = cmd_build(&full_config).unwrap();
    let restricted_nodes: usize = restricted.level_counts.iter().sum();
    let full_nodes: usize = full.level_counts.iter().sum();
    assert!(
        restricted_nodes < full_nodes,
        "relevant-only tree ({restricted_nodes} nodes) should be smaller than expand-all ({full_nodes})"
    );
    // The simulation still works against the restricted tree.
    let summary = cmd_simulate(&config).unwrap();
    assert_eq!(summary.filtered_out + summary.skipped, 0);
}
