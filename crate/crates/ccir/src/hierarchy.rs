//! Top-down cluster tree construction with a per-level resolution schedule.
//!
//! The root (level 0) holds every document of the graph. Each expanded node
//! is clustered at the next level's resolution, capped to at most
//! `max_children` clusters, and the resulting clusters become its children.
//! Documents dropped by the cap remain in all ancestor document sets but
//! have no node below the exclusion point. Sibling subtrees are built in
//! parallel; per-node seeds are derived from the top-level seed and the
//! node's path id, so the tree is reproducible regardless of scheduling.

use std::io::Write;

use rayon::prelude::*;

use crate::corpus::CitationGraph;
use crate::error::{Error, Result};
use crate::leiden::{cap_children, cluster, ClusteringConfig};
use crate::seed::derive_seed;

/// Geometric resolution schedule: level `l` (1-based) uses
/// `base * factor^(l-1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolutionSchedule {
    pub base: f64,
    pub factor: f64,
    pub max_depth: usize,
}

impl Default for ResolutionSchedule {
    fn default() -> Self {
        ResolutionSchedule { base: 2e-5, factor: 3.0, max_depth: 13 }
    }
}

impl ResolutionSchedule {
    pub fn new(base: f64, factor: f64, max_depth: usize) -> Result<Self> {
        let s = ResolutionSchedule { base, factor, max_depth };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.base > 0.0 && self.base.is_finite()) {
            return Err(Error::invalid("schedule", format!("base {} must be positive", self.base)));
        }
        if !(self.factor > 1.0 && self.factor.is_finite()) {
            return Err(Error::invalid("schedule", format!("factor {} must be > 1", self.factor)));
        }
        if self.max_depth < 1 {
            return Err(Error::invalid("schedule", "max_depth must be >= 1"));
        }
        Ok(())
    }

    /// Resolution used to split level `level - 1` nodes into level `level`
    /// children. `level` ranges over `1..=max_depth`.
    pub fn resolution_at(&self, level: usize) -> Result<f64> {
        if level < 1 || level > self.max_depth {
            return Err(Error::invalid(
                "schedule level",
                format!("{level} out of range 1..={}", self.max_depth),
            ));
        }
        Ok(self.base * self.factor.powi(level as i32 - 1))
    }
}

/// Which nodes the builder expands.
#[derive(Debug, Clone)]
pub enum ExpandPolicy {
    /// Expand every node (the corpus-agnostic default).
    All,
    /// Expand nothing; the tree is just the root.
    Never,
    /// Expand only nodes containing at least one of the given documents
    /// (the relevant-only policy used when simulating retrieval tasks).
    Containing(Vec<u32>),
}

impl ExpandPolicy {
    /// Relevant-only policy over the union of the given document indexes.
    pub fn containing(docs: impl IntoIterator<Item = u32>) -> Self {
        let mut v: Vec<u32> = docs.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        ExpandPolicy::Containing(v)
    }

    fn should_expand(&self, doc_ids: &[u32]) -> bool {
        match self {
            ExpandPolicy::All => true,
            ExpandPolicy::Never => false,
            ExpandPolicy::Containing(watch) => {
                // Both sides sorted: two-pointer intersection test.
                let (mut i, mut j) = (0, 0);
                while i < doc_ids.len() && j < watch.len() {
                    match doc_ids[i].cmp(&watch[j]) {
                        std::cmp::Ordering::Less => i += 1,
                        std::cmp::Ordering::Greater => j += 1,
                        std::cmp::Ordering::Equal => return true,
                    }
                }
                false
            }
        }
    }
}

/// One node of the cluster tree. `id` is the path id: the root is `"0"`,
/// its k-th canonical child is `"0.k"` (1-based), and so on.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterNode {
    pub id: String,
    pub level: usize,
    /// Documents of this node, sorted ascending by graph index.
    pub doc_ids: Vec<u32>,
    /// Document sets dropped by the child cap at this node, in drop order.
    pub excluded: Vec<Vec<u32>>,
    pub expanded: bool,
    pub children: Vec<ClusterNode>,
}

impl ClusterNode {
    fn leaf(id: String, level: usize, doc_ids: Vec<u32>) -> Self {
        ClusterNode { id, level, doc_ids, excluded: Vec::new(), expanded: false, children: Vec::new() }
    }

    /// Documents excluded at this node, as one sorted union.
    pub fn excluded_union(&self) -> Vec<u32> {
        let mut all: Vec<u32> = self.excluded.iter().flatten().copied().collect();
        all.sort_unstable();
        all
    }
}

/// Rooted hierarchy of cluster nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterTree {
    root: ClusterNode,
}

impl ClusterTree {
    /// Wraps an externally assembled node hierarchy. The caller is
    /// responsible for consistent path ids and levels.
    pub fn from_root(root: ClusterNode) -> ClusterTree {
        ClusterTree { root }
    }

    pub fn root(&self) -> &ClusterNode {
        &self.root
    }

    /// Looks a node up by its path id.
    pub fn node(&self, node_id: &str) -> Result<&ClusterNode> {
        let mut parts = node_id.split('.');
        if parts.next() != Some("0") {
            return Err(Error::UnknownNode(node_id.to_string()));
        }
        let mut node = &self.root;
        for part in parts {
            let k: usize = part
                .parse()
                .map_err(|_| Error::UnknownNode(node_id.to_string()))?;
            node = node
                .children
                .get(k.wrapping_sub(1))
                .ok_or_else(|| Error::UnknownNode(node_id.to_string()))?;
        }
        Ok(node)
    }

    /// Children of a node, in canonical cluster order.
    pub fn children(&self, node_id: &str) -> Result<&[ClusterNode]> {
        Ok(&self.node(node_id)?.children)
    }

    /// Depth-first preorder traversal.
    pub fn iter(&self) -> TreeIter<'_> {
        TreeIter { stack: vec![&self.root] }
    }

    pub fn node_count(&self) -> usize {
        self.iter().count()
    }

    /// Number of nodes per level, indexed by level.
    pub fn level_counts(&self) -> Vec<usize> {
        let mut counts = Vec::new();
        for node in self.iter() {
            if counts.len() <= node.level {
                counts.resize(node.level + 1, 0);
            }
            counts[node.level] += 1;
        }
        counts
    }

    /// Writes the tree file format: one node per line in depth-first order,
    /// `<path-id><TAB><level><TAB><doc ids><TAB><excluded ids or '-'>`.
    /// Excluded sets are stored as one sorted union.
    pub fn write<W: Write>(&self, graph: &CitationGraph, mut w: W) -> std::io::Result<()> {
        for node in self.iter() {
            let docs: Vec<&str> = node.doc_ids.iter().map(|&d| graph.doc_id(d)).collect();
            let excluded = node.excluded_union();
            let excl: String = if excluded.is_empty() {
                "-".to_string()
            } else {
                excluded
                    .iter()
                    .map(|&d| graph.doc_id(d))
                    .collect::<Vec<_>>()
                    .join(" ")
            };
            writeln!(w, "{}\t{}\t{}\t{}", node.id, node.level, docs.join(" "), excl)?;
        }
        Ok(())
    }

    /// Reads the tree file format back against the same graph. Excluded
    /// groupings are not stored in the file, so each non-empty excluded
    /// field loads as a single set.
    pub fn read(graph: &CitationGraph, text: &str, label: &str) -> Result<ClusterTree> {
        // Child path ids must match sibling order: the k-th child attached
        // to a parent carries the path `<parent>.k`.
        fn attach(parent: &mut ClusterNode, child: ClusterNode, label: &str) -> Result<()> {
            let expected = format!("{}.{}", parent.id, parent.children.len() + 1);
            if child.id != expected {
                return Err(Error::MalformedRecord {
                    path: label.to_string(),
                    line: 0,
                    reason: format!("node {:?} out of order; expected path {expected:?}", child.id),
                });
            }
            parent.expanded = true;
            parent.children.push(child);
            Ok(())
        }

        let mut stack: Vec<ClusterNode> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 4 {
                return Err(Error::MalformedRecord {
                    path: label.to_string(),
                    line: lineno + 1,
                    reason: format!("expected 4 tab-separated fields, got {}", fields.len()),
                });
            }
            let id = fields[0].to_string();
            let level: usize = fields[1].parse().map_err(|_| Error::MalformedRecord {
                path: label.to_string(),
                line: lineno + 1,
                reason: format!("level is not an integer: {:?}", fields[1]),
            })?;
            let depth = id.split('.').count() - 1;
            if level != depth {
                return Err(Error::MalformedRecord {
                    path: label.to_string(),
                    line: lineno + 1,
                    reason: format!("level {level} does not match path depth {depth} of {id:?}"),
                });
            }
            let mut doc_ids = resolve_ids(graph, fields[2])?;
            doc_ids.sort_unstable();
            let excluded = if fields[3] == "-" {
                Vec::new()
            } else {
                let mut set = resolve_ids(graph, fields[3])?;
                set.sort_unstable();
                vec![set]
            };
            let node = ClusterNode {
                id,
                level,
                doc_ids,
                excluded,
                expanded: false,
                children: Vec::new(),
            };
            // Attach completed subtrees: pop deeper-or-equal nodes first.
            while let Some(top) = stack.last() {
                if top.level >= node.level {
                    let done = stack.pop().unwrap();
                    match stack.last_mut() {
                        Some(parent) => attach(parent, done, label)?,
                        None => {
                            return Err(Error::MalformedRecord {
                                path: label.to_string(),
                                line: lineno + 1,
                                reason: format!("node {:?} has no parent on the stack", node.id),
                            });
                        }
                    }
                } else {
                    break;
                }
            }
            stack.push(node);
        }
        while stack.len() > 1 {
            let done = stack.pop().unwrap();
            let parent = stack.last_mut().unwrap();
            attach(parent, done, label)?;
        }
        let root = stack.pop().ok_or_else(|| Error::MalformedRecord {
            path: label.to_string(),
            line: 0,
            reason: "empty tree file".to_string(),
        })?;
        Ok(ClusterTree { root })
    }
}

fn resolve_ids(graph: &CitationGraph, field: &str) -> Result<Vec<u32>> {
    field
        .split(' ')
        .filter(|t| !t.is_empty())
        .map(|t| graph.index_of(t).ok_or_else(|| Error::UnknownDocument(t.to_string())))
        .collect()
}

pub struct TreeIter<'a> {
    stack: Vec<&'a ClusterNode>,
}

impl<'a> Iterator for TreeIter<'a> {
    type Item = &'a ClusterNode;

    fn next(&mut self) -> Option<&'a ClusterNode> {
        let node = self.stack.pop()?;
        // Push children reversed so they pop in canonical order.
        for child in node.children.iter().rev() {
            self.stack.push(child);
        }
        Some(node)
    }
}

/// Builds the cluster tree for `graph`.
///
/// A node is expanded when the policy accepts it, its level is below
/// `schedule.max_depth`, and it holds at least two documents. The
/// config's resolution field is ignored; each level uses
/// `schedule.resolution_at(level)`.
pub fn build_tree(
    graph: &CitationGraph,
    schedule: &ResolutionSchedule,
    max_children: usize,
    policy: &ExpandPolicy,
    config: &ClusteringConfig,
) -> Result<ClusterTree> {
    schedule.validate()?;
    if graph.is_empty() {
        return Err(Error::invalid("graph", "cannot build a tree over an empty graph"));
    }
    if max_children < 1 {
        return Err(Error::invalid("max_children", "must be >= 1"));
    }
    let root = expand_node(
        graph,
        schedule,
        max_children,
        policy,
        config,
        "0".to_string(),
        0,
        graph.all_docs(),
    )?;
    Ok(ClusterTree { root })
}

#[allow(clippy::too_many_arguments)]
fn expand_node(
    graph: &CitationGraph,
    schedule: &ResolutionSchedule,
    max_children: usize,
    policy: &ExpandPolicy,
    config: &ClusteringConfig,
    id: String,
    level: usize,
    doc_ids: Vec<u32>,
) -> Result<ClusterNode> {
    if level >= schedule.max_depth || doc_ids.len() < 2 || !policy.should_expand(&doc_ids) {
        return Ok(ClusterNode::leaf(id, level, doc_ids));
    }
    let resolution = schedule.resolution_at(level + 1)?;
    let node_config = ClusteringConfig {
        resolution,
        seed: derive_seed(config.seed, &format!("node:{id}")),
        ..config.clone()
    };
    let clustered = cluster(graph, &doc_ids, &node_config)?;
    let capped = cap_children(graph, &clustered.partition, max_children, &node_config)?;
    let children: Vec<ClusterNode> = capped
        .partition
        .clusters()
        .par_iter()
        .enumerate()
        .map(|(i, members)| {
            expand_node(
                graph,
                schedule,
                max_children,
                policy,
                config,
                format!("{id}.{}", i + 1),
                level + 1,
                members.clone(),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ClusterNode {
        id,
        level,
        doc_ids,
        excluded: capped.excluded,
        expanded: true,
        children,
    })
}
