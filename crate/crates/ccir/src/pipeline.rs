//! Batch pipeline: generate, build the tree, simulate selection, report.
//!
//! These functions implement the commands exposed by the `ccir` binary.
//! Configuration comes from one TOML file plus programmatic overrides; all
//! randomness flows from the single `seed` via per-task derivation, so
//! reruns with the same config produce byte-identical outputs.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::benchgen::{generate, synth_case, PlantedSpec};
use crate::corpus::{load_corpus, year_window, CitationGraph};
use crate::error::{Error, Result};
use crate::evaluation::{aggregate, case_filter, outcome_row, read_csv, render_report, write_csv, OutcomeRow, Summary};
use crate::hierarchy::{build_tree, ClusterTree, ExpandPolicy, ResolutionSchedule};
use crate::leiden::ClusteringConfig;
use crate::seed::derive_seed;
use crate::selection::{read_cases, resolve_case, run_grid, write_cases, BetaGrid};

/// Which nodes the tree builder expands, as configured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ExpandMode {
    #[default]
    All,
    RelevantOnly,
}

impl std::str::FromStr for ExpandMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "all" => Ok(ExpandMode::All),
            "relevant-only" => Ok(ExpandMode::RelevantOnly),
            other => Err(format!("expected `all` or `relevant-only`, got {other:?}")),
        }
    }
}

/// One run's configuration: file locations, schedule, grid, and execution
/// knobs. Loaded from TOML; command-line flags override single fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub documents: PathBuf,
    pub edges: PathBuf,
    pub cases: PathBuf,
    pub tree: PathBuf,
    pub report_csv: PathBuf,
    pub report_json: PathBuf,
    pub base_resolution: f64,
    pub factor: f64,
    pub max_depth: usize,
    pub max_children: usize,
    pub betas: Vec<f64>,
    pub expand: ExpandMode,
    pub seed: u64,
    /// Independent optimizer starts per clustering call (best one wins).
    pub restarts: usize,
    /// Worker threads for tree building and simulation; 0 uses the rayon
    /// default.
    pub jobs: usize,
    /// When set, the corpus is restricted to the publication-year window
    /// ending the year before `task_year`.
    pub task_year: Option<i32>,
    /// Width of the year window in calendar years.
    pub span: i32,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            documents: "documents.tsv".into(),
            edges: "edges.tsv".into(),
            cases: "cases.txt".into(),
            tree: "tree.tsv".into(),
            report_csv: "outcomes.csv".into(),
            report_json: "summary.json".into(),
            base_resolution: 2e-5,
            factor: 3.0,
            max_depth: 13,
            max_children: 10,
            betas: BetaGrid::default().values().to_vec(),
            expand: ExpandMode::All,
            seed: 0,
            restarts: 1,
            jobs: 0,
            task_year: None,
            span: 11,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str, label: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::invalid("config", format!("{label}: {e}")))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::from_toml(&text, &path.display().to_string())
    }

    pub fn schedule(&self) -> Result<ResolutionSchedule> {
        ResolutionSchedule::new(self.base_resolution, self.factor, self.max_depth)
    }

    pub fn beta_grid(&self) -> Result<BetaGrid> {
        BetaGrid::new(self.betas.clone())
    }

    fn clustering(&self) -> ClusteringConfig {
        let mut config = ClusteringConfig::new(0.0, self.seed);
        config.restarts = self.restarts.max(1);
        config
    }
}

fn require_inputs(paths: &[&Path]) -> Result<()> {
    for path in paths {
        if !path.exists() {
            return Err(Error::MissingInput(path.to_path_buf()));
        }
    }
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    let file = fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    Ok(BufWriter::new(file))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))
}

fn with_pool<T: Send>(jobs: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    if jobs == 0 {
        f()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::invalid("jobs", e.to_string()))?;
        pool.install(f)
    }
}

/// Loads the corpus and applies the configured year window, if any.
fn load_windowed(config: &RunConfig) -> Result<CitationGraph> {
    require_inputs(&[&config.documents, &config.edges])?;
    let graph = load_corpus(&config.documents, &config.edges)?;
    match config.task_year {
        Some(task_year) => {
            let (min_year, max_year) = year_window(task_year, config.span)?;
            let filtered = graph.filter_by_year(min_year, max_year)?;
            log::info!(
                "year window {min_year}-{max_year}: {} of {} documents kept",
                filtered.doc_count(),
                graph.doc_count()
            );
            Ok(filtered)
        }
        None => Ok(graph),
    }
}

/// Generates a planted corpus plus one synthetic case per deepest-level
/// block, writing the documents, edges, and cases files.
pub fn cmd_gen(config: &RunConfig, spec: &PlantedSpec, noise_frac: f64) -> Result<()> {
    spec.validate()?;
    let (graph, labels) = generate(spec)?;
    let deepest = labels.len() - 1;
    let block_count = labels[deepest].iter().max().map_or(0, |m| m + 1);
    let mut cases = Vec::with_capacity(block_count);
    for block in 0..block_count {
        let seed = derive_seed(spec.seed, &format!("case:{deepest}:{block}"));
        cases.push(synth_case(&graph, &labels, deepest, block, noise_frac, seed)?);
    }
    let io_err = |path: &Path, e: std::io::Error| Error::io(path.display().to_string(), e);
    graph
        .write_documents(create(&config.documents)?)
        .map_err(|e| io_err(&config.documents, e))?;
    graph
        .write_edges(create(&config.edges)?)
        .map_err(|e| io_err(&config.edges, e))?;
    write_cases(&cases, create(&config.cases)?).map_err(|e| io_err(&config.cases, e))?;
    log::info!(
        "generated {} ({} cases) into {}, {}, {}",
        graph,
        cases.len(),
        config.documents.display(),
        config.edges.display(),
        config.cases.display()
    );
    Ok(())
}

/// Per-level node counts of a built tree, for logs and tests.
#[derive(Debug, Clone, PartialEq)]
pub struct BuildReport {
    pub level_counts: Vec<usize>,
    pub doc_count: usize,
}

/// Builds the cluster tree and writes the tree file.
pub fn cmd_build(config: &RunConfig) -> Result<BuildReport> {
    let graph = load_windowed(config)?;
    let schedule = config.schedule()?;
    let policy = match config.expand {
        ExpandMode::All => ExpandPolicy::All,
        ExpandMode::RelevantOnly => {
            require_inputs(&[&config.cases])?;
            let cases = read_cases(&read(&config.cases)?, &config.cases.display().to_string())?;
            let mut watch = Vec::new();
            for case in &cases {
                match resolve_case(case, &graph) {
                    Ok(resolved) => watch.extend(resolved.relevant),
                    Err(e) => log::warn!("case left out of the expansion set: {e}"),
                }
            }
            ExpandPolicy::containing(watch)
        }
    };
    let clustering = config.clustering();
    let tree = with_pool(config.jobs, || {
        build_tree(&graph, &schedule, config.max_children, &policy, &clustering)
    })?;
    tree.write(&graph, create(&config.tree)?)
        .map_err(|e| Error::io(config.tree.display().to_string(), e))?;
    let level_counts = tree.level_counts();
    for (level, count) in level_counts.iter().enumerate() {
        if level == 0 {
            log::info!("level 0: 1 root node, {} documents", graph.doc_count());
        } else {
            log::info!(
                "level {level}: {count} nodes (resolution {})",
                schedule.resolution_at(level)?
            );
        }
    }
    Ok(BuildReport { level_counts, doc_count: graph.doc_count() })
}

/// Runs the beta grid for every case against the stored tree, writes the
/// outcome CSV and the JSON summary, and returns the summary.
pub fn cmd_simulate(config: &RunConfig) -> Result<Summary> {
    let graph = load_windowed(config)?;
    require_inputs(&[&config.tree, &config.cases])?;
    let tree = ClusterTree::read(&graph, &read(&config.tree)?, &config.tree.display().to_string())?;
    let cases = read_cases(&read(&config.cases)?, &config.cases.display().to_string())?;
    let grid = config.beta_grid()?;

    let mut skipped = 0usize;
    let mut filtered_out = 0usize;
    let mut eligible = Vec::new();
    for case in &cases {
        match resolve_case(case, &graph) {
            Ok(resolved) => {
                if case_filter(&resolved, resolved.baseline.len()) {
                    eligible.push(resolved);
                } else {
                    filtered_out += 1;
                    log::info!("case {:?} excluded by the inclusion filter", case.case_id);
                }
            }
            Err(e) => {
                skipped += 1;
                log::warn!("case skipped: {e}");
            }
        }
    }

    let rows: Vec<OutcomeRow> = with_pool(config.jobs, || {
        let per_case: Vec<Result<Vec<OutcomeRow>>> = eligible
            .par_iter()
            .map(|case| {
                let outcomes = run_grid(&tree, case, &grid)?;
                outcomes
                    .iter()
                    .map(|o| outcome_row(o, case, &tree.node(&o.node_id)?.doc_ids))
                    .collect()
            })
            .collect();
        let mut rows = Vec::new();
        for case_rows in per_case {
            rows.extend(case_rows?);
        }
        Ok(rows)
    })?;

    write_csv(&rows, create(&config.report_csv)?)?;
    let betas = if rows.is_empty() { Vec::new() } else { aggregate(&rows)? };
    let summary = Summary { filtered_out, skipped, betas };
    let json = serde_json::to_string_pretty(&summary)
        .map_err(|e| Error::invalid("summary", e.to_string()))?;
    let mut w = create(&config.report_json)?;
    writeln!(w, "{json}").map_err(|e| Error::io(config.report_json.display().to_string(), e))?;
    log::info!(
        "simulated {} cases x {} betas ({} filtered out, {} skipped)",
        eligible.len(),
        grid.values().len(),
        filtered_out,
        skipped
    );
    Ok(summary)
}

/// Renders the human-readable aggregate table from the outcome CSV.
pub fn cmd_report(config: &RunConfig) -> Result<String> {
    require_inputs(&[&config.report_csv])?;
    let rows = read_csv(&read(&config.report_csv)?, &config.report_csv.display().to_string())?;
    if rows.is_empty() {
        return Ok("no outcomes\n".to_string());
    }
    Ok(render_report(&aggregate(&rows)?))
}
