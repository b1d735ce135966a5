//! The resolution-parameterized partition quality function and merge math.
//!
//! Quality of a partition is the sum over ordered co-clustered pairs
//! `(i, j)`, `i != j`, of `a_ij - r`, where `a_ij` is 1 iff the two
//! documents are linked and `r` is the resolution. Self-pairs are excluded:
//! they would add the partition-independent constant `-r * n`, so the argmax
//! over partitions is unchanged either way. Internally the sum is evaluated
//! per cluster as `2 * internal_edges(c) - r * size(c) * (size(c) - 1)`,
//! keeping edge counts as exact integers until the final multiplication.

use std::collections::HashMap;

use crate::corpus::CitationGraph;
use crate::error::{Error, Result};

/// A disjoint clustering of a document subset, tagged with the resolution
/// it was produced under. Cluster ids are contiguous `0..k` and no cluster
/// is empty.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    clusters: Vec<Vec<u32>>,
    cluster_of: HashMap<u32, usize>,
    resolution: f64,
}

impl Partition {
    /// Builds a partition from `(document, cluster id)` assignments.
    /// Cluster ids must form the contiguous range `0..k`.
    pub fn new(assignment: impl IntoIterator<Item = (u32, usize)>, resolution: f64) -> Result<Self> {
        if resolution < 0.0 || !resolution.is_finite() {
            return Err(Error::invalid("resolution", format!("{resolution} is negative or not finite")));
        }
        let mut cluster_of = HashMap::new();
        let mut max_cluster = None;
        for (doc, cluster) in assignment {
            if cluster_of.insert(doc, cluster).is_some() {
                return Err(Error::invalid(
                    "partition",
                    format!("document {doc} assigned more than once"),
                ));
            }
            max_cluster = Some(max_cluster.map_or(cluster, |m: usize| m.max(cluster)));
        }
        let k = max_cluster.map_or(0, |m| m + 1);
        let mut clusters = vec![Vec::new(); k];
        for (&doc, &cluster) in &cluster_of {
            clusters[cluster].push(doc);
        }
        for (id, members) in clusters.iter_mut().enumerate() {
            if members.is_empty() {
                return Err(Error::invalid("partition", format!("cluster {id} is empty")));
            }
            members.sort_unstable();
        }
        Ok(Partition { clusters, cluster_of, resolution })
    }

    /// Singleton partition: every member its own cluster, in member order.
    pub fn singletons(members: &[u32], resolution: f64) -> Result<Self> {
        Partition::new(members.iter().enumerate().map(|(c, &d)| (d, c)), resolution)
    }

    pub fn cluster_count(&self) -> usize {
        self.clusters.len()
    }

    /// Members of cluster `id`, sorted ascending.
    pub fn cluster(&self, id: usize) -> Result<&[u32]> {
        self.clusters
            .get(id)
            .map(Vec::as_slice)
            .ok_or(Error::UnknownCluster(id))
    }

    pub fn clusters(&self) -> &[Vec<u32>] {
        &self.clusters
    }

    pub fn cluster_of(&self, doc: u32) -> Option<usize> {
        self.cluster_of.get(&doc).copied()
    }

    pub fn contains(&self, doc: u32) -> bool {
        self.cluster_of.contains_key(&doc)
    }

    /// All member documents, sorted ascending.
    pub fn members(&self) -> Vec<u32> {
        let mut out: Vec<u32> = self.cluster_of.keys().copied().collect();
        out.sort_unstable();
        out
    }

    pub fn member_count(&self) -> usize {
        self.cluster_of.len()
    }

    /// The resolution this partition was produced under.
    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    /// Renumbers clusters canonically: by descending size, then by ascending
    /// smallest member index. Cluster member lists stay sorted.
    pub fn canonicalize(&mut self) {
        self.clusters
            .sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
        self.cluster_of.clear();
        for (id, members) in self.clusters.iter().enumerate() {
            for &doc in members {
                self.cluster_of.insert(doc, id);
            }
        }
    }

    /// Replaces clusters `keep` and `gone` by their union (labeled `keep`),
    /// then renumbers to close the gap. No canonical reordering is applied.
    pub(crate) fn merge_clusters(&mut self, keep: usize, gone: usize) {
        debug_assert_ne!(keep, gone);
        let moved = std::mem::take(&mut self.clusters[gone]);
        for &doc in &moved {
            self.cluster_of.insert(doc, keep);
        }
        self.clusters[keep].extend(moved);
        self.clusters[keep].sort_unstable();
        self.clusters.remove(gone);
        for (id, members) in self.clusters.iter().enumerate().skip(gone.min(keep)) {
            for &doc in members {
                self.cluster_of.insert(doc, id);
            }
        }
    }

    /// Removes cluster `gone` entirely, returning its members.
    pub(crate) fn remove_cluster(&mut self, gone: usize) -> Vec<u32> {
        let moved = self.clusters.remove(gone);
        for &doc in &moved {
            self.cluster_of.remove(&doc);
        }
        for (id, members) in self.clusters.iter().enumerate().skip(gone) {
            for &doc in members {
                self.cluster_of.insert(doc, id);
            }
        }
        moved
    }

    fn check_against(&self, graph: &CitationGraph) -> Result<()> {
        let n = graph.doc_count() as u32;
        for &doc in self.cluster_of.keys() {
            if doc >= n {
                return Err(Error::DocumentOutOfRange(doc));
            }
        }
        Ok(())
    }
}

fn check_resolution(r: f64) -> Result<()> {
    if r < 0.0 || !r.is_finite() {
        return Err(Error::invalid("resolution", format!("{r} is negative or not finite")));
    }
    Ok(())
}

/// Number of edges internal to `members` (an ascending-sorted slice).
fn internal_edges(graph: &CitationGraph, members: &[u32]) -> u64 {
    let mut count = 0u64;
    for &v in members {
        for &u in graph.neighbors(v) {
            if u > v && members.binary_search(&u).is_ok() {
                count += 1;
            }
        }
    }
    count
}

/// Number of edges between the two disjoint sorted member slices.
fn cross_edges(graph: &CitationGraph, a: &[u32], b: &[u32]) -> u64 {
    // Scan from the smaller side.
    let (scan, probe) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let mut count = 0u64;
    for &v in scan {
        for &u in graph.neighbors(v) {
            if probe.binary_search(&u).is_ok() {
                count += 1;
            }
        }
    }
    count
}

/// Quality of `partition` on `graph` at resolution `r`.
pub fn quality(graph: &CitationGraph, partition: &Partition, r: f64) -> Result<f64> {
    check_resolution(r)?;
    partition.check_against(graph)?;
    let mut total = 0.0;
    for members in partition.clusters() {
        let e = internal_edges(graph, members);
        let n = members.len() as u64;
        total += 2.0 * e as f64 - r * (n * (n - 1)) as f64;
    }
    Ok(total)
}

/// Change in quality from merging clusters `a` and `b`:
/// `2 * (E_ab - r * n_a * n_b)` with `E_ab` the cross-edge count.
pub fn merge_delta(
    graph: &CitationGraph,
    partition: &Partition,
    cluster_a: usize,
    cluster_b: usize,
    r: f64,
) -> Result<f64> {
    check_resolution(r)?;
    partition.check_against(graph)?;
    if cluster_a == cluster_b {
        return Err(Error::invalid("merge", "cannot merge a cluster with itself"));
    }
    let a = partition.cluster(cluster_a)?;
    let b = partition.cluster(cluster_b)?;
    let e = cross_edges(graph, a, b);
    Ok(2.0 * (e as f64 - r * (a.len() as u64 * b.len() as u64) as f64))
}

/// The highest resolution at which merging `a` and `b` does not decrease
/// quality: `E_ab / (n_a * n_b)`. `merge_delta >= 0` iff `r <=` this value.
pub fn merge_threshold(
    graph: &CitationGraph,
    partition: &Partition,
    cluster_a: usize,
    cluster_b: usize,
) -> Result<f64> {
    partition.check_against(graph)?;
    if cluster_a == cluster_b {
        return Err(Error::invalid("merge", "cannot merge a cluster with itself"));
    }
    let a = partition.cluster(cluster_a)?;
    let b = partition.cluster(cluster_b)?;
    let e = cross_edges(graph, a, b);
    Ok(e as f64 / (a.len() as u64 * b.len() as u64) as f64)
}
