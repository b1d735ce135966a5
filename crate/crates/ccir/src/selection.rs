//! Simulated cluster selection: greedy F-beta descent through the tree.
//!
//! The simulator is clairvoyant: it scores clusters against the known
//! relevant set, starting at the root and descending into the best child
//! while that child scores strictly higher than the current node. Lower
//! beta favors precision, higher beta favors recall.

use std::collections::HashSet;
use std::io::Write;

use crate::corpus::CitationGraph;
use crate::error::{Error, Result};
use crate::hierarchy::{ClusterNode, ClusterTree};
use crate::setops::{intersection_count, is_subset};

/// One retrieval task: the ground-truth relevant ids, the baseline set
/// retrieved by the task's own query, the task year, and the retrieval
/// count its authors reported.
#[derive(Debug, Clone, PartialEq)]
pub struct RelevanceCase {
    pub case_id: String,
    pub relevant: Vec<String>,
    pub baseline_retrieved: Vec<String>,
    pub task_year: i32,
    pub self_reported_count: u64,
}

impl RelevanceCase {
    /// Checks the load invariants: relevant non-empty and a subset of the
    /// baseline set.
    pub fn validate(&self) -> Result<()> {
        if self.relevant.is_empty() {
            return Err(Error::invalid(
                "relevance case",
                format!("case {:?} has an empty relevant set", self.case_id),
            ));
        }
        let baseline: HashSet<&str> = self.baseline_retrieved.iter().map(String::as_str).collect();
        let outside = self
            .relevant
            .iter()
            .filter(|id| !baseline.contains(id.as_str()))
            .count();
        if outside > 0 {
            return Err(Error::RelevantNotSubset {
                case_id: self.case_id.clone(),
                outside,
            });
        }
        Ok(())
    }
}

/// A [`RelevanceCase`] resolved against a graph: ids interned to document
/// indexes, baseline intersected with the graph's documents. Every relevant
/// document must be present in the graph.
#[derive(Debug, Clone)]
pub struct ResolvedCase {
    pub case_id: String,
    /// Sorted document indexes of the relevant set.
    pub relevant: Vec<u32>,
    /// Sorted document indexes of the baseline set, graph-restricted.
    pub baseline: Vec<u32>,
    pub task_year: i32,
    pub self_reported_count: u64,
    /// Baseline ids that were outside the graph and dropped.
    pub baseline_dropped: usize,
}

/// Resolves a case against `graph`. Fails when any relevant document is
/// missing from the graph (a task the corpus window cannot serve).
pub fn resolve_case(case: &RelevanceCase, graph: &CitationGraph) -> Result<ResolvedCase> {
    case.validate()?;
    let mut relevant = Vec::with_capacity(case.relevant.len());
    let mut missing = Vec::new();
    for id in &case.relevant {
        match graph.index_of(id) {
            Some(idx) => relevant.push(idx),
            None => missing.push(id.clone()),
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingRelevant {
            case_id: case.case_id.clone(),
            missing,
        });
    }
    relevant.sort_unstable();
    relevant.dedup();
    let mut baseline: Vec<u32> = case
        .baseline_retrieved
        .iter()
        .filter_map(|id| graph.index_of(id))
        .collect();
    let baseline_dropped = case.baseline_retrieved.len() - baseline.len();
    baseline.sort_unstable();
    baseline.dedup();
    Ok(ResolvedCase {
        case_id: case.case_id.clone(),
        relevant,
        baseline,
        task_year: case.task_year,
        self_reported_count: case.self_reported_count,
        baseline_dropped,
    })
}

/// The beta values a simulation sweeps over; strictly increasing, all
/// positive.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaGrid {
    values: Vec<f64>,
}

impl Default for BetaGrid {
    fn default() -> Self {
        BetaGrid {
            values: vec![0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0],
        }
    }
}

impl BetaGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("beta grid", "must not be empty"));
        }
        for pair in values.windows(2) {
            if pair[0] >= pair[1] {
                return Err(Error::invalid("beta grid", "values must be strictly increasing"));
            }
        }
        if values.iter().any(|&b| b <= 0.0 || !b.is_finite()) {
            return Err(Error::invalid("beta grid", "values must be positive and finite"));
        }
        Ok(BetaGrid { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// The selected node and its retrieval metrics for one `(case, beta)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionOutcome {
    pub case_id: String,
    pub beta: f64,
    pub node_id: String,
    pub level: usize,
    pub retrieved_count: usize,
    pub relevant_retrieved_count: usize,
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
}

/// Weighted harmonic mean of precision and recall:
/// `(1 + beta^2) * P * R / (beta^2 * P + R)`, defined as 0 when `P = R = 0`.
pub fn f_beta(precision: f64, recall: f64, beta: f64) -> Result<f64> {
    if beta <= 0.0 || !beta.is_finite() {
        return Err(Error::invalid("beta", format!("{beta} must be positive and finite")));
    }
    debug_assert!((0.0..=1.0).contains(&precision) && (0.0..=1.0).contains(&recall));
    if precision == 0.0 && recall == 0.0 {
        return Ok(0.0);
    }
    let b2 = beta * beta;
    Ok((1.0 + b2) * precision * recall / (b2 * precision + recall))
}

/// Precision and recall of retrieving exactly this node's documents.
pub fn cluster_prf(node: &ClusterNode, case: &ResolvedCase) -> (f64, f64) {
    let tp = intersection_count(&node.doc_ids, &case.relevant);
    let precision = tp as f64 / node.doc_ids.len() as f64;
    let recall = tp as f64 / case.relevant.len() as f64;
    (precision, recall)
}

fn score(node: &ClusterNode, case: &ResolvedCase, beta: f64) -> Result<f64> {
    let (p, r) = cluster_prf(node, case);
    f_beta(p, r, beta)
}

/// Greedy descent from the root: move to the best-scoring child while it
/// strictly beats the current node, then return the current node. Ties
/// between children go to the smallest canonical id.
pub fn greedy_select(tree: &ClusterTree, case: &ResolvedCase, beta: f64) -> Result<SelectionOutcome> {
    let root = tree.root();
    if !is_subset(&case.relevant, &root.doc_ids) {
        let absent = case.relevant.len() - intersection_count(&case.relevant, &root.doc_ids);
        return Err(Error::invalid(
            "selection",
            format!(
                "case {:?}: {absent} relevant documents are absent from the tree root",
                case.case_id
            ),
        ));
    }
    let mut node = root;
    let mut node_score = score(node, case, beta)?;
    loop {
        let mut best: Option<(&ClusterNode, f64)> = None;
        for child in &node.children {
            let s = score(child, case, beta)?;
            if best.is_none_or(|(_, bs)| s > bs) {
                best = Some((child, s));
            }
        }
        match best {
            Some((child, s)) if s > node_score => {
                node = child;
                node_score = s;
            }
            _ => break,
        }
    }
    let (precision, recall) = cluster_prf(node, case);
    Ok(SelectionOutcome {
        case_id: case.case_id.clone(),
        beta,
        node_id: node.id.clone(),
        level: node.level,
        retrieved_count: node.doc_ids.len(),
        relevant_retrieved_count: intersection_count(&node.doc_ids, &case.relevant),
        precision,
        recall,
        f_score: node_score,
    })
}

/// Runs [`greedy_select`] once per grid value, preserving grid order.
pub fn run_grid(tree: &ClusterTree, case: &ResolvedCase, grid: &BetaGrid) -> Result<Vec<SelectionOutcome>> {
    grid.values()
        .iter()
        .map(|&beta| greedy_select(tree, case, beta))
        .collect()
}

// ---------------------------------------------------------------------------
// Relevance-case file format.

/// Parses the relevance-case format: per case, a `case <id> <task_year>
/// <self_reported_count>` line followed by `relevant: <ids>` and
/// `baseline: <ids>` lines.
pub fn read_cases(text: &str, label: &str) -> Result<Vec<RelevanceCase>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let mut cases = Vec::new();
    while let Some((lineno, header)) = lines.next() {
        let malformed = |line: usize, reason: String| Error::MalformedRecord {
            path: label.to_string(),
            line,
            reason,
        };
        let fields: Vec<&str> = header.split(' ').filter(|t| !t.is_empty()).collect();
        if fields.len() != 4 || fields[0] != "case" {
            return Err(malformed(
                lineno,
                format!("expected `case <id> <task_year> <self_reported_count>`, got {header:?}"),
            ));
        }
        let case_id = fields[1].to_string();
        let task_year: i32 = fields[2]
            .parse()
            .map_err(|_| malformed(lineno, format!("task year is not an integer: {:?}", fields[2])))?;
        let self_reported_count: u64 = fields[3]
            .parse()
            .map_err(|_| malformed(lineno, format!("count is not an integer: {:?}", fields[3])))?;
        let mut section = |name: &str| -> Result<Vec<String>> {
            let (lineno, line) = lines
                .next()
                .ok_or_else(|| malformed(0, format!("case {case_id:?}: missing `{name}:` line")))?;
            let rest = line
                .strip_prefix(name)
                .and_then(|r| r.strip_prefix(':'))
                .ok_or_else(|| malformed(lineno, format!("expected `{name}: <ids>`, got {line:?}")))?;
            Ok(rest.split(' ').filter(|t| !t.is_empty()).map(str::to_string).collect())
        };
        let relevant = section("relevant")?;
        let baseline_retrieved = section("baseline")?;
        let case = RelevanceCase {
            case_id,
            relevant,
            baseline_retrieved,
            task_year,
            self_reported_count,
        };
        case.validate()?;
        cases.push(case);
    }
    Ok(cases)
}

/// Writes cases in the format read by [`read_cases`].
pub fn write_cases<W: Write>(cases: &[RelevanceCase], mut w: W) -> std::io::Result<()> {
    for case in cases {
        writeln!(
            w,
            "case {} {} {}",
            case.case_id, case.task_year, case.self_reported_count
        )?;
        writeln!(w, "relevant: {}", case.relevant.join(" "))?;
        writeln!(w, "baseline: {}", case.baseline_retrieved.join(" "))?;
    }
    Ok(())
}
