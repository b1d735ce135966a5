//! Retrieval metrics, case filtering, per-beta aggregation, and reports.
//!
//! All ratios are emitted at full precision; rounding to two decimals
//! happens only in the human-readable report. The baseline set is treated
//! as ground truth, so baseline recall is exactly 1 for every valid case.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::selection::{f_beta, ResolvedCase, SelectionOutcome};
use crate::setops::intersection_count;

/// Set-overlap ratios between a retrieved cluster set `C` and the baseline
/// set `B`: `|C ∩ B| / |C|`, `|C ∩ B| / |B|`, and `|C| / |B|`.
pub fn compare_sets(ccir_set: &[u32], baseline_set: &[u32]) -> Result<(f64, f64, f64)> {
    if baseline_set.is_empty() {
        return Err(Error::EmptySet("baseline"));
    }
    if ccir_set.is_empty() {
        return Err(Error::EmptySet("retrieved"));
    }
    let both = intersection_count(ccir_set, baseline_set) as f64;
    Ok((
        both / ccir_set.len() as f64,
        both / baseline_set.len() as f64,
        ccir_set.len() as f64 / baseline_set.len() as f64,
    ))
}

/// Cluster-selection F-score minus baseline F-score at the same beta.
pub fn f_score_difference(ccir_f: f64, baseline_f: f64) -> f64 {
    ccir_f - baseline_f
}

/// Baseline precision, recall, and F-score. Recall is 1 by the subset
/// invariant, so precision is `|relevant| / |baseline|`.
pub fn baseline_prf(case: &ResolvedCase, beta: f64) -> Result<(f64, f64, f64)> {
    let precision = case.relevant.len() as f64 / case.baseline.len() as f64;
    let f = f_beta(precision, 1.0, beta)?;
    Ok((precision, 1.0, f))
}

/// Case-inclusion filter: at least 10 relevant documents, and the
/// self-reported retrieval count within a factor of 10 of our baseline
/// size.
pub fn case_filter(case: &ResolvedCase, our_baseline_size: usize) -> bool {
    debug_assert!(our_baseline_size >= 1);
    if case.relevant.len() < 10 {
        return false;
    }
    let ratio = case.self_reported_count as f64 / our_baseline_size as f64;
    (0.1..=10.0).contains(&ratio)
}

/// One report row: selection outcome plus baseline and comparison metrics.
/// Field order matches the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRow {
    pub case_id: String,
    pub beta: f64,
    pub node_id: String,
    pub level: usize,
    pub retrieved: usize,
    pub relevant_retrieved: usize,
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
    pub baseline_precision: f64,
    pub baseline_f: f64,
    pub f_diff: f64,
    pub inter_ccir: f64,
    pub inter_baseline: f64,
    pub size_ratio: f64,
}

/// Combines a selection outcome with the comparison metrics against the
/// case's baseline set. `ccir_set` is the selected node's document set.
pub fn outcome_row(
    outcome: &SelectionOutcome,
    case: &ResolvedCase,
    ccir_set: &[u32],
) -> Result<OutcomeRow> {
    let (inter_ccir, inter_baseline, size_ratio) = compare_sets(ccir_set, &case.baseline)?;
    let (baseline_precision, _, baseline_f) = baseline_prf(case, outcome.beta)?;
    Ok(OutcomeRow {
        case_id: outcome.case_id.clone(),
        beta: outcome.beta,
        node_id: outcome.node_id.clone(),
        level: outcome.level,
        retrieved: outcome.retrieved_count,
        relevant_retrieved: outcome.relevant_retrieved_count,
        precision: outcome.precision,
        recall: outcome.recall,
        f_score: outcome.f_score,
        baseline_precision,
        baseline_f,
        f_diff: f_score_difference(outcome.f_score, baseline_f),
        inter_ccir,
        inter_baseline,
        size_ratio,
    })
}

/// Five-number summary of one metric across cases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricStats {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

/// Aggregate statistics for one beta group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaSummary {
    pub beta: f64,
    pub cases: usize,
    pub precision: MetricStats,
    pub recall: MetricStats,
    pub f_score: MetricStats,
    pub baseline_precision: MetricStats,
    pub baseline_f: MetricStats,
    pub f_diff: MetricStats,
    pub inter_ccir: MetricStats,
    pub inter_baseline: MetricStats,
    pub size_ratio: MetricStats,
    pub retrieved: MetricStats,
    pub level: MetricStats,
}

/// Simulation-wide summary written as the JSON report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    /// Cases excluded by [`case_filter`].
    pub filtered_out: usize,
    /// Cases skipped because relevant documents were outside the corpus.
    pub skipped: usize,
    pub betas: Vec<BetaSummary>,
}

fn median_of(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Quartiles via Tukey's hinges: for odd counts the median belongs to both
/// halves, so `{0.2, 0.4, 0.6}` yields `q1 = 0.3`, `q3 = 0.5`.
fn stats(values: impl Iterator<Item = f64>) -> MetricStats {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(|a, b| a.partial_cmp(b).expect("metric values must not be NaN"));
    let n = v.len();
    assert!(n > 0, "stats over an empty group");
    let median = median_of(&v);
    let (lower, upper) = if n % 2 == 1 {
        (&v[..=n / 2], &v[n / 2..])
    } else {
        (&v[..n / 2], &v[n / 2..])
    };
    MetricStats {
        min: v[0],
        q1: median_of(lower),
        median,
        q3: median_of(upper),
        max: v[n - 1],
    }
}

/// Groups rows by beta (ascending) and computes the five-number summary of
/// every metric within each group. Permutation-invariant in row order.
pub fn aggregate(rows: &[OutcomeRow]) -> Result<Vec<BetaSummary>> {
    if rows.is_empty() {
        return Err(Error::invalid("aggregate", "no outcome rows"));
    }
    let mut betas: Vec<f64> = rows.iter().map(|r| r.beta).collect();
    betas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    betas.dedup();
    let mut out = Vec::with_capacity(betas.len());
    for beta in betas {
        let group: Vec<&OutcomeRow> = rows.iter().filter(|r| r.beta == beta).collect();
        out.push(BetaSummary {
            beta,
            cases: group.len(),
            precision: stats(group.iter().map(|r| r.precision)),
            recall: stats(group.iter().map(|r| r.recall)),
            f_score: stats(group.iter().map(|r| r.f_score)),
            baseline_precision: stats(group.iter().map(|r| r.baseline_precision)),
            baseline_f: stats(group.iter().map(|r| r.baseline_f)),
            f_diff: stats(group.iter().map(|r| r.f_diff)),
            inter_ccir: stats(group.iter().map(|r| r.inter_ccir)),
            inter_baseline: stats(group.iter().map(|r| r.inter_baseline)),
            size_ratio: stats(group.iter().map(|r| r.size_ratio)),
            retrieved: stats(group.iter().map(|r| r.retrieved as f64)),
            level: stats(group.iter().map(|r| r.level as f64)),
        });
    }
    Ok(out)
}

pub const CSV_COLUMNS: [&str; 15] = [
    "case_id",
    "beta",
    "node_id",
    "level",
    "retrieved",
    "relevant_retrieved",
    "precision",
    "recall",
    "f_score",
    "baseline_precision",
    "baseline_f",
    "f_diff",
    "inter_ccir",
    "inter_baseline",
    "size_ratio",
];

/// Writes the outcome CSV with the fixed column order.
pub fn write_csv<W: Write>(rows: &[OutcomeRow], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let fail = |e: csv::Error| Error::io("report csv", std::io::Error::other(e));
    wtr.write_record(CSV_COLUMNS).map_err(fail)?;
    for r in rows {
        wtr.write_record([
            r.case_id.clone(),
            r.beta.to_string(),
            r.node_id.clone(),
            r.level.to_string(),
            r.retrieved.to_string(),
            r.relevant_retrieved.to_string(),
            r.precision.to_string(),
            r.recall.to_string(),
            r.f_score.to_string(),
            r.baseline_precision.to_string(),
            r.baseline_f.to_string(),
            r.f_diff.to_string(),
            r.inter_ccir.to_string(),
            r.inter_baseline.to_string(),
            r.size_ratio.to_string(),
        ])
        .map_err(fail)?;
    }
    wtr.flush().map_err(|e| Error::io("report csv", e))?;
    Ok(())
}

/// Reads an outcome CSV produced by [`write_csv`].
pub fn read_csv(text: &str, label: &str) -> Result<Vec<OutcomeRow>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let fail = |reason: String, line: usize| Error::MalformedRecord {
        path: label.to_string(),
        line,
        reason,
    };
    let headers = rdr
        .headers()
        .map_err(|e| fail(e.to_string(), 1))?
        .clone();
    if headers.iter().ne(CSV_COLUMNS) {
        return Err(fail(format!("unexpected columns {headers:?}"), 1));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| fail(e.to_string(), i + 2))?;
        let get = |j: usize| rec.get(j).unwrap_or("");
        let num = |j: usize| -> Result<f64> {
            get(j)
                .parse()
                .map_err(|_| fail(format!("bad number {:?} in column {}", get(j), CSV_COLUMNS[j]), i + 2))
        };
        let int = |j: usize| -> Result<usize> {
            get(j)
                .parse()
                .map_err(|_| fail(format!("bad integer {:?} in column {}", get(j), CSV_COLUMNS[j]), i + 2))
        };
        rows.push(OutcomeRow {
            case_id: get(0).to_string(),
            beta: num(1)?,
            node_id: get(2).to_string(),
            level: int(3)?,
            retrieved: int(4)?,
            relevant_retrieved: int(5)?,
            precision: num(6)?,
            recall: num(7)?,
            f_score: num(8)?,
            baseline_precision: num(9)?,
            baseline_f: num(10)?,
            f_diff: num(11)?,
            inter_ccir: num(12)?,
            inter_baseline: num(13)?,
            size_ratio: num(14)?,
        });
    }
    Ok(rows)
}

/// Renders the human-readable aggregate table, rounding to two decimals.
pub fn render_report(summaries: &[BetaSummary]) -> String {
    let mut out = String::new();
    out.push_str(
        "beta      cases  precision  recall  f_score  f_diff  inter_ccir  inter_baseline  size_ratio  level\n",
    );
    for s in summaries {
        out.push_str(&format!(
            "{:<9} {:<6} {:<10.2} {:<7.2} {:<8.2} {:<7.2} {:<11.2} {:<15.2} {:<11.2} {:<5.1}\n",
            s.beta,
            s.cases,
            s.precision.median,
            s.recall.median,
            s.f_score.median,
            s.f_diff.median,
            s.inter_ccir.median,
            s.inter_baseline.median,
            s.size_ratio.median,
            s.level.median,
        ));
    }
    out
}
