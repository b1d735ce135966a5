//! Synthetic corpora with planted hierarchical cluster structure.
//!
//! A nested block model: documents are arranged into blocks-within-blocks
//! and each unordered pair receives an edge independently, with a
//! probability determined by the deepest block level the pair shares.
//! Ground-truth labels per level make end-to-end recovery testable at desk
//! scale.

use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{CitationGraph, Document};
use crate::error::{Error, Result};
use crate::seed::derive_seed;
use crate::selection::RelevanceCase;

/// Shape of the planted hierarchy.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedSpec {
    /// Block counts per level, coarsest first; `[4, 3]` means 4 super-blocks
    /// of 3 sub-blocks each.
    pub blocks_per_level: Vec<usize>,
    pub docs_per_leaf: usize,
    /// Edge probabilities, innermost first: same leaf block, then each
    /// coarser shared level, then no shared block. Strictly decreasing.
    pub edge_probs: Vec<f64>,
    /// Publication years drawn uniformly from this inclusive range.
    pub year_range: (i32, i32),
    pub seed: u64,
}

impl Default for PlantedSpec {
    fn default() -> Self {
        PlantedSpec {
            blocks_per_level: vec![4, 3],
            docs_per_leaf: 20,
            edge_probs: vec![0.3, 0.05, 0.005],
            year_range: (2000, 2010),
            seed: 0,
        }
    }
}

impl PlantedSpec {
    pub fn validate(&self) -> Result<()> {
        if self.blocks_per_level.is_empty() || self.blocks_per_level.contains(&0) {
            return Err(Error::invalid("planted spec", "blocks_per_level must be non-empty and positive"));
        }
        if self.docs_per_leaf == 0 {
            return Err(Error::invalid("planted spec", "docs_per_leaf must be positive"));
        }
        if self.edge_probs.len() != self.blocks_per_level.len() + 1 {
            return Err(Error::invalid(
                "planted spec",
                format!(
                    "need {} edge probabilities (levels + 1), got {}",
                    self.blocks_per_level.len() + 1,
                    self.edge_probs.len()
                ),
            ));
        }
        for p in &self.edge_probs {
            if !(0.0..=1.0).contains(p) {
                return Err(Error::invalid("planted spec", format!("probability {p} outside [0, 1]")));
            }
        }
        for pair in self.edge_probs.windows(2) {
            if pair[0] <= pair[1] {
                return Err(Error::invalid("planted spec", "edge probabilities must strictly decrease outward"));
            }
        }
        if self.year_range.0 > self.year_range.1 {
            return Err(Error::invalid("planted spec", "year range is reversed"));
        }
        Ok(())
    }

    pub fn doc_count(&self) -> usize {
        self.blocks_per_level.iter().product::<usize>() * self.docs_per_leaf
    }
}

/// Ground-truth block labels, one vector per level (coarsest first); entry
/// `labels[level][doc]` is the composite block index of `doc` at that
/// level. Labels at each level refine the previous one.
pub type PlantedLabels = Vec<Vec<usize>>;

/// Generates the corpus and its planted labels. Deterministic per seed.
pub fn generate(spec: &PlantedSpec) -> Result<(CitationGraph, PlantedLabels)> {
    spec.validate()?;
    let levels = spec.blocks_per_level.len();
    let n = spec.doc_count();
    let width = (n.max(2) - 1).to_string().len();

    // Composite label at level l = leaf_index / (blocks below level l).
    let mut below = vec![1usize; levels];
    for l in (0..levels - 1).rev() {
        below[l] = below[l + 1] * spec.blocks_per_level[l + 1];
    }
    let mut labels: PlantedLabels = vec![vec![0; n]; levels];
    for doc in 0..n {
        let leaf = doc / spec.docs_per_leaf;
        for (l, level_labels) in labels.iter_mut().enumerate() {
            level_labels[doc] = leaf / below[l];
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, "benchgen"));
    let (y_min, y_max) = spec.year_range;
    let documents: Vec<Document> = (0..n)
        .map(|i| Document {
            id: format!("d{i:0width$}"),
            year: rng.gen_range(y_min..=y_max),
        })
        .collect();

    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            // Deepest shared level, finest first; tier k uses edge_probs[k].
            let tier = (0..levels)
                .rev()
                .position(|l| labels[l][i] == labels[l][j])
                .unwrap_or(levels);
            if rng.gen_bool(spec.edge_probs[tier]) {
                edges.push((documents[i].id.clone(), documents[j].id.clone()));
            }
        }
    }
    let graph = CitationGraph::from_parts(documents, edges)?;
    Ok((graph, labels))
}

/// Builds a synthetic retrieval case around one planted block.
///
/// The relevant set is the block's documents with `floor(noise_frac * n)`
/// of them swapped for uniformly chosen outside documents. The baseline set
/// is the relevant set plus a seeded random superset (ten times the
/// relevant size where the corpus allows), so the subset invariant holds by
/// construction. The task year is one past the corpus year range, so no
/// window filtering removes case documents.
pub fn synth_case(
    graph: &CitationGraph,
    labels: &PlantedLabels,
    target_level: usize,
    target_block: usize,
    noise_frac: f64,
    seed: u64,
) -> Result<RelevanceCase> {
    if !(0.0..1.0).contains(&noise_frac) {
        return Err(Error::invalid("noise fraction", format!("{noise_frac} outside [0, 1)")));
    }
    let level = labels
        .get(target_level)
        .ok_or_else(|| Error::invalid("target block", format!("level {target_level} does not exist")))?;
    let block: Vec<u32> = level
        .iter()
        .enumerate()
        .filter(|&(_, &b)| b == target_block)
        .map(|(d, _)| d as u32)
        .collect();
    if block.is_empty() {
        return Err(Error::invalid(
            "target block",
            format!("block {target_block} does not exist at level {target_level}"),
        ));
    }
    let n = graph.doc_count();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "synth-case"));

    let swaps = (noise_frac * block.len() as f64).floor() as usize;
    let mut relevant = block.clone();
    if swaps > 0 {
        let outside: Vec<u32> = (0..n as u32).filter(|d| !block.contains(d)).collect();
        let drop_at = sample(&mut rng, block.len(), swaps).into_vec();
        let add_at = sample(&mut rng, outside.len(), swaps).into_vec();
        let mut dropped: Vec<usize> = drop_at;
        dropped.sort_unstable_by(|a, b| b.cmp(a));
        for idx in dropped {
            relevant.remove(idx);
        }
        relevant.extend(add_at.into_iter().map(|i| outside[i]));
        relevant.sort_unstable();
    }

    let target_size = (relevant.len() * 10).min(n);
    let extra_needed = target_size - relevant.len();
    let candidates: Vec<u32> = (0..n as u32).filter(|d| relevant.binary_search(d).is_err()).collect();
    let mut baseline = relevant.clone();
    for i in sample(&mut rng, candidates.len(), extra_needed) {
        baseline.push(candidates[i]);
    }
    baseline.sort_unstable();

    let task_year = (0..n as u32).map(|d| graph.year(d)).max().unwrap_or(0) + 1;
    let ids = |v: &[u32]| v.iter().map(|&d| graph.doc_id(d).to_string()).collect::<Vec<_>>();
    let case = RelevanceCase {
        case_id: format!("case-{target_level}-{target_block}"),
        relevant: ids(&relevant),
        baseline_retrieved: ids(&baseline),
        task_year,
        self_reported_count: baseline.len() as u64,
    };
    case.validate()?;
    Ok(case)
}
