//! Clustering of a document set by local maximization of the resolution
//! quality function, plus the cluster-count cap used by the hierarchy
//! builder.
//!
//! The optimizer follows the Leiden scheme: queue-based local moving,
//! refinement inside each community, and aggregation, repeated until each
//! community is a single aggregate node. A final polish pass at document
//! level enforces the two contractual post-conditions: no single document
//! can move to another cluster (or to a new singleton) with a strict
//! quality increase, and every cluster induces a connected subgraph of the
//! member-restricted graph. All randomized choices flow from the config
//! seed, so results are reproducible.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;

use crate::corpus::CitationGraph;
use crate::error::{Error, Result};
use crate::quality::Partition;
use crate::seed::derive_seed;

/// How ties between equal-sized smallest clusters are broken in
/// [`cap_children`]. The default picks the smallest canonical cluster id;
/// `Seeded` draws from the config's generator instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SizeTieBreak {
    #[default]
    CanonicalMin,
    Seeded,
}

/// Parameters for one clustering call.
#[derive(Debug, Clone)]
pub struct ClusteringConfig {
    pub resolution: f64,
    pub seed: u64,
    /// Cap on improvement passes, counted as `max_sweeps * member_count`
    /// node visits per restart.
    pub max_sweeps: usize,
    /// Independent optimizer starts with derived seeds; the best-quality
    /// result wins. More starts make local optima less likely.
    pub restarts: usize,
    pub size_tie_break: SizeTieBreak,
}

impl ClusteringConfig {
    pub fn new(resolution: f64, seed: u64) -> Self {
        ClusteringConfig {
            resolution,
            seed,
            max_sweeps: 100,
            restarts: 1,
            size_tie_break: SizeTieBreak::default(),
        }
    }

    pub fn with_resolution(&self, resolution: f64) -> Self {
        ClusteringConfig { resolution, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.resolution < 0.0 || !self.resolution.is_finite() {
            return Err(Error::invalid(
                "clustering config",
                format!("resolution {} is negative or not finite", self.resolution),
            ));
        }
        if self.max_sweeps < 1 {
            return Err(Error::invalid("clustering config", "max_sweeps must be >= 1"));
        }
        if self.restarts < 1 {
            return Err(Error::invalid("clustering config", "restarts must be >= 1"));
        }
        Ok(())
    }
}

/// A produced partition plus whether the optimizer fully converged before
/// hitting the sweep cap. When `converged` is false, node-level local
/// optimality is not guaranteed.
#[derive(Debug, Clone)]
pub struct ClusterResult {
    pub partition: Partition,
    pub converged: bool,
}

/// One merge executed by [`cap_children`], for bookkeeping and diagnostics.
#[derive(Debug, Clone)]
pub struct CapMerge {
    /// Members of the smallest cluster that was selected for merging.
    pub selected: Vec<u32>,
    /// Members of the cluster it was merged into.
    pub partner: Vec<u32>,
    /// Highest merge resolution found in the scan (the partner's value).
    pub threshold: f64,
    /// Quality change of the merge at the partition's resolution.
    pub delta: f64,
}

/// Result of [`cap_children`].
#[derive(Debug, Clone)]
pub struct CapResult {
    pub partition: Partition,
    /// Document sets of clusters removed because they had no citation links
    /// to the rest of the member set.
    pub excluded: Vec<Vec<u32>>,
    pub merges: Vec<CapMerge>,
}

// ---------------------------------------------------------------------------
// Internal weighted work graph (aggregation levels).

#[derive(Debug, Clone)]
struct WorkGraph {
    /// Document count carried by each node.
    size: Vec<u64>,
    /// Sorted neighbor lists with cross weights; no self entries.
    adj: Vec<Vec<(u32, u64)>>,
}

impl WorkGraph {
    fn len(&self) -> usize {
        self.size.len()
    }

    /// Induced subgraph over `members` (sorted, deduplicated document
    /// indexes); local node `i` is `members[i]`.
    fn induced(graph: &CitationGraph, members: &[u32]) -> WorkGraph {
        let n = members.len();
        let mut adj = Vec::with_capacity(n);
        for &doc in members {
            let mut nbrs = Vec::new();
            for &u in graph.neighbors(doc) {
                if let Ok(local) = members.binary_search(&u) {
                    nbrs.push((local as u32, 1u64));
                }
            }
            adj.push(nbrs);
        }
        WorkGraph { size: vec![1; n], adj }
    }
}

/// Mutable clustering state over one work graph.
struct LevelState {
    part: Vec<usize>,
    csize: Vec<u64>,
    free: Vec<usize>,
}

impl LevelState {
    fn from_assignment(g: &WorkGraph, part: Vec<usize>) -> LevelState {
        let slots = part.iter().copied().max().map_or(0, |m| m + 1);
        let mut csize = vec![0u64; slots];
        for (v, &c) in part.iter().enumerate() {
            csize[c] += g.size[v];
        }
        let free = (0..slots).filter(|&c| csize[c] == 0).collect();
        LevelState { part, csize, free }
    }

    fn nonempty_clusters(&self) -> usize {
        self.csize.iter().filter(|&&s| s > 0).count()
    }

    fn fresh_slot(&mut self) -> usize {
        if let Some(slot) = self.free.pop() {
            slot
        } else {
            self.csize.push(0);
            self.csize.len() - 1
        }
    }
}

/// Queue-based local moving. Returns `(any_move, converged)`; `converged`
/// is false when the visit budget ran out before the queue drained.
fn local_move(
    g: &WorkGraph,
    state: &mut LevelState,
    r: f64,
    rng: &mut ChaCha8Rng,
    budget: &mut usize,
) -> (bool, bool) {
    let n = g.len();
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.shuffle(rng);
    let mut queue: VecDeque<u32> = order.into();
    let mut in_queue = vec![true; n];
    let mut wt: Vec<u64> = vec![0; state.csize.len()];
    let mut touched: Vec<usize> = Vec::new();
    let mut moved_any = false;

    while let Some(v) = queue.pop_front() {
        if *budget == 0 {
            return (moved_any, false);
        }
        *budget -= 1;
        let v = v as usize;
        in_queue[v] = false;
        let cur = state.part[v];
        for &(u, w) in &g.adj[v] {
            let c = state.part[u as usize];
            if wt[c] == 0 {
                touched.push(c);
            }
            wt[c] += w;
        }
        let s_v = g.size[v];
        // Half-gain bookkeeping: dropping the common factor 2 preserves signs
        // and ordering.
        let base = wt[cur] as f64 - r * (s_v * (state.csize[cur] - s_v)) as f64;
        let mut best_gain = 0.0f64;
        let mut best: Option<usize> = None;
        touched.sort_unstable();
        for &c in &touched {
            if c == cur {
                continue;
            }
            let gain = (wt[c] as f64 - r * (s_v * state.csize[c]) as f64) - base;
            if gain > best_gain {
                best_gain = gain;
                best = Some(c);
            }
        }
        // Moving out into a fresh singleton cluster.
        if state.csize[cur] > s_v && -base > best_gain {
            best = Some(usize::MAX);
        }
        for &c in &touched {
            wt[c] = 0;
        }
        touched.clear();

        if let Some(mut target) = best {
            if target == usize::MAX {
                target = state.fresh_slot();
                if wt.len() < state.csize.len() {
                    wt.resize(state.csize.len(), 0);
                }
            }
            state.csize[cur] -= s_v;
            if state.csize[cur] == 0 {
                state.free.push(cur);
            }
            state.csize[target] += s_v;
            state.part[v] = target;
            moved_any = true;
            for &(u, _) in &g.adj[v] {
                let u = u as usize;
                if state.part[u] != target && !in_queue[u] {
                    in_queue[u] = true;
                    queue.push_back(u as u32);
                }
            }
        }
    }
    (moved_any, true)
}

/// Refinement: within each community of `part`, greedily merge singleton
/// nodes into well-connected sub-clusters. Merges follow edges, so every
/// refined cluster induces a connected subgraph of its community.
fn refine(g: &WorkGraph, part: &[usize], r: f64, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = g.len();
    let slots = part.iter().copied().max().map_or(0, |m| m + 1);
    let mut comm_size = vec![0u64; slots];
    for (v, &c) in part.iter().enumerate() {
        comm_size[c] += g.size[v];
    }
    // Weight from each node to the rest of its own community.
    let mut w_own = vec![0u64; n];
    for v in 0..n {
        for &(u, w) in &g.adj[v] {
            if part[u as usize] == part[v] {
                w_own[v] += w;
            }
        }
    }

    let mut refined: Vec<usize> = (0..n).collect();
    let mut r_size = g.size.clone();
    let mut r_count = vec![1usize; n];
    let mut r_win = vec![0u64; n];
    let mut own_sum = w_own.clone();

    let mut order: Vec<u32> = (0..n as u32).collect();
    order.shuffle(rng);
    let mut wt: Vec<u64> = vec![0; n];
    let mut touched: Vec<usize> = Vec::new();

    for &v in &order {
        let v = v as usize;
        if r_count[refined[v]] != 1 {
            continue;
        }
        let c = part[v];
        let s_v = g.size[v];
        // Only well-connected nodes may be moved.
        if (w_own[v] as f64) < r * (s_v * (comm_size[c] - s_v)) as f64 {
            continue;
        }
        for &(u, w) in &g.adj[v] {
            let u = u as usize;
            if part[u] == c {
                let s = refined[u];
                if wt[s] == 0 {
                    touched.push(s);
                }
                wt[s] += w;
            }
        }
        touched.sort_unstable();
        let mut best_gain = 0.0f64;
        let mut best: Option<usize> = None;
        for &s in &touched {
            if s == refined[v] {
                continue;
            }
            // Candidate sub-cluster must itself be well-connected.
            let ext = own_sum[s] - 2 * r_win[s];
            if (ext as f64) < r * (r_size[s] * (comm_size[c] - r_size[s])) as f64 {
                continue;
            }
            let gain = wt[s] as f64 - r * (s_v * r_size[s]) as f64;
            if gain > best_gain {
                best_gain = gain;
                best = Some(s);
            }
        }
        if let Some(s) = best {
            let old = refined[v];
            r_win[s] += wt[s];
            r_size[s] += s_v;
            r_size[old] -= s_v;
            r_count[s] += 1;
            r_count[old] -= 1;
            own_sum[s] += w_own[v];
            own_sum[old] -= w_own[v];
            refined[v] = s;
        }
        for &s in &touched {
            wt[s] = 0;
        }
        touched.clear();
    }
    refined
}

/// Aggregates by refined clusters. Returns the new graph, the map from old
/// node to new node, and the community partition projected onto new nodes.
fn aggregate(g: &WorkGraph, refined: &[usize], part: &[usize]) -> (WorkGraph, Vec<usize>, Vec<usize>) {
    let mut used: Vec<usize> = refined.to_vec();
    used.sort_unstable();
    used.dedup();
    let m = used.len();
    let dense = |id: usize| used.binary_search(&id).unwrap();

    let mut node_map = vec![0usize; g.len()];
    let mut size = vec![0u64; m];
    let mut new_part_raw = vec![usize::MAX; m];
    for v in 0..g.len() {
        let nv = dense(refined[v]);
        node_map[v] = nv;
        size[nv] += g.size[v];
        new_part_raw[nv] = part[v];
    }
    // Renumber projected community ids densely, by first appearance.
    let mut remap: Vec<usize> = Vec::new();
    let mut new_part = vec![0usize; m];
    for (nv, &c) in new_part_raw.iter().enumerate() {
        let id = match remap.iter().position(|&x| x == c) {
            Some(i) => i,
            None => {
                remap.push(c);
                remap.len() - 1
            }
        };
        new_part[nv] = id;
    }

    let mut acc: Vec<std::collections::BTreeMap<u32, u64>> = vec![Default::default(); m];
    for v in 0..g.len() {
        let a = node_map[v];
        for &(u, w) in &g.adj[v] {
            let u = u as usize;
            if v < u {
                let b = node_map[u];
                if a != b {
                    *acc[a].entry(b as u32).or_insert(0) += w;
                    *acc[b].entry(a as u32).or_insert(0) += w;
                }
            }
        }
    }
    let adj = acc
        .into_iter()
        .map(|m| m.into_iter().collect::<Vec<_>>())
        .collect();
    (WorkGraph { size, adj }, node_map, new_part)
}

/// Splits clusters that do not induce a connected subgraph into their
/// connected components. Never decreases quality for `r >= 0`. Returns true
/// if any cluster was split.
fn split_disconnected(g: &WorkGraph, state: &mut LevelState) -> bool {
    let slots = state.csize.len();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); slots];
    for (v, &c) in state.part.iter().enumerate() {
        members[c].push(v);
    }
    let mut seen = vec![false; g.len()];
    let mut split_any = false;
    for (c, cluster_members) in members.iter().enumerate() {
        if cluster_members.len() < 2 {
            continue;
        }
        let mut first = true;
        for &start in cluster_members {
            if seen[start] {
                continue;
            }
            // BFS one component within the cluster.
            let mut component = vec![start];
            seen[start] = true;
            let mut head = 0;
            while head < component.len() {
                let v = component[head];
                head += 1;
                for &(u, _) in &g.adj[v] {
                    let u = u as usize;
                    if state.part[u] == c && !seen[u] {
                        seen[u] = true;
                        component.push(u);
                    }
                }
            }
            if first {
                first = false;
                continue; // first component keeps the cluster id
            }
            split_any = true;
            let slot = state.fresh_slot();
            for &v in &component {
                state.part[v] = slot;
                state.csize[c] -= g.size[v];
                state.csize[slot] += g.size[v];
            }
        }
    }
    split_any
}

// ---------------------------------------------------------------------------
// Public operations.

/// Quality of an assignment over a work graph:
/// per cluster, `2 * W_in - r * (S^2 - sum of node sizes squared)`.
fn assignment_quality(g: &WorkGraph, part: &[usize], r: f64) -> f64 {
    let slots = part.iter().copied().max().map_or(0, |m| m + 1);
    let mut w_in = vec![0u64; slots];
    let mut total = vec![0u64; slots];
    let mut sq = vec![0u64; slots];
    for v in 0..g.len() {
        let c = part[v];
        total[c] += g.size[v];
        sq[c] += g.size[v] * g.size[v];
        for &(u, w) in &g.adj[v] {
            if v < u as usize && part[u as usize] == c {
                w_in[c] += w;
            }
        }
    }
    (0..slots)
        .map(|c| 2.0 * w_in[c] as f64 - r * (total[c] * total[c] - sq[c]) as f64)
        .sum()
}

/// One full pass: multi-level local moving with refinement and
/// aggregation, then a document-level polish that restores node-level
/// local optimality and cluster connectivity. Returns the new assignment
/// and whether the pass converged within the budget.
fn leiden_pass(
    g0: &WorkGraph,
    start: Vec<usize>,
    r: f64,
    rng: &mut ChaCha8Rng,
    budget: &mut usize,
) -> (Vec<usize>, bool) {
    let n = g0.len();
    let mut converged = true;
    let mut node_of_orig: Vec<usize> = (0..n).collect();
    let mut g = g0.clone();
    let mut state = LevelState::from_assignment(&g, start);
    loop {
        let (_, conv) = local_move(&g, &mut state, r, rng, budget);
        if !conv {
            converged = false;
            break;
        }
        if state.nonempty_clusters() == g.len() {
            break; // every community is a single node
        }
        let refined = refine(&g, &state.part, r, rng);
        let mut distinct = refined.clone();
        distinct.sort_unstable();
        distinct.dedup();
        if distinct.len() == g.len() {
            break; // refinement merged nothing; aggregation would be identity
        }
        let (g2, node_map, part2) = aggregate(&g, &refined, &state.part);
        for slot in node_of_orig.iter_mut() {
            *slot = node_map[*slot];
        }
        g = g2;
        state = LevelState::from_assignment(&g, part2);
    }

    // Flatten to document level and polish until locally optimal with
    // connected clusters.
    let flat: Vec<usize> = (0..n).map(|o| state.part[node_of_orig[o]]).collect();
    let mut pstate = LevelState::from_assignment(g0, flat);
    loop {
        let (moved, conv) = local_move(g0, &mut pstate, r, rng, budget);
        if !conv {
            converged = false;
            break;
        }
        let split = split_disconnected(g0, &mut pstate);
        if !moved && !split {
            break;
        }
    }
    (pstate.part, converged)
}

/// Clusters `members` of `graph` at the config's resolution.
///
/// Post-conditions: no single document can move to another cluster or to a
/// new singleton with a strict quality increase; every cluster induces a
/// connected subgraph of the member-restricted graph (isolated documents
/// are singletons); identical inputs produce identical partitions.
pub fn cluster(graph: &CitationGraph, members: &[u32], config: &ClusteringConfig) -> Result<ClusterResult> {
    config.validate()?;
    if members.is_empty() {
        return Err(Error::EmptyMembers);
    }
    let mut members: Vec<u32> = members.to_vec();
    members.sort_unstable();
    members.dedup();
    for &doc in &members {
        if doc as usize >= graph.doc_count() {
            return Err(Error::DocumentOutOfRange(doc));
        }
    }
    let r = config.resolution;
    let n = members.len();
    let g0 = WorkGraph::induced(graph, &members);
    let mut converged = true;

    // Each restart runs full passes until quality stops improving. Passes
    // after the first start from the current partition; refinement then
    // re-splits clusters so that their well-connected parts can regroup at
    // the aggregate level, which single-node moves cannot do. The best
    // restart by quality wins (earliest on ties).
    let mut best: Option<(Vec<usize>, f64)> = None;
    for restart in 0..config.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, &format!("leiden:{restart}")));
        let mut budget = config.max_sweeps.saturating_mul(n.max(1));
        let mut assign: Vec<usize> = (0..n).collect();
        let mut pass_quality = f64::NEG_INFINITY;
        loop {
            let (next, conv) = leiden_pass(&g0, assign.clone(), r, &mut rng, &mut budget);
            if !conv {
                converged = false;
                assign = next;
                pass_quality = assignment_quality(&g0, &assign, r);
                break;
            }
            let q = assignment_quality(&g0, &next, r);
            if q > pass_quality {
                pass_quality = q;
                assign = next;
            } else {
                break;
            }
        }
        if best.as_ref().is_none_or(|(_, bq)| pass_quality > *bq) {
            best = Some((assign, pass_quality));
        }
    }
    let (assign, _) = best.unwrap();
    if !converged {
        log::warn!(
            "clustering hit the sweep cap ({} visits); local optimality is not guaranteed",
            config.max_sweeps.saturating_mul(n.max(1))
        );
    }

    // Dense-renumber by first appearance, map back to document indexes.
    let mut remap: Vec<usize> = Vec::new();
    let mut assignment = Vec::with_capacity(n);
    for v in 0..n {
        let c = assign[v];
        let id = match remap.iter().position(|&x| x == c) {
            Some(i) => i,
            None => {
                remap.push(c);
                remap.len() - 1
            }
        };
        assignment.push((members[v], id));
    }
    let mut partition = Partition::new(assignment, r)?;
    partition.canonicalize();
    Ok(ClusterResult { partition, converged })
}

/// Caps the number of clusters at `max_clusters` by the merge procedure:
/// while over the cap, select the smallest cluster; if it has no citation
/// links to the rest of the member set, remove it (recorded in `excluded`);
/// otherwise merge it with the cluster attaining the highest merge
/// resolution. Ties in size or threshold are broken by canonical cluster id
/// (see [`SizeTieBreak`] for the seeded alternative on sizes).
pub fn cap_children(
    graph: &CitationGraph,
    partition: &Partition,
    max_clusters: usize,
    config: &ClusteringConfig,
) -> Result<CapResult> {
    if max_clusters < 1 {
        return Err(Error::invalid("max_clusters", "must be >= 1"));
    }
    let mut part = partition.clone();
    part.canonicalize();
    let r_current = part.resolution();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, "cap-children"));
    let mut excluded: Vec<Vec<u32>> = Vec::new();
    let mut merges: Vec<CapMerge> = Vec::new();

    while part.cluster_count() > max_clusters {
        let k = part.cluster_count();
        let min_size = part.cluster(k - 1)?.len();
        let first_tied = (0..k)
            .find(|&c| part.cluster(c).unwrap().len() == min_size)
            .unwrap();
        let selected = match config.size_tie_break {
            SizeTieBreak::CanonicalMin => first_tied,
            SizeTieBreak::Seeded => rng.gen_range(first_tied..k),
        };

        // Cross-edge counts from the selected cluster to every other cluster
        // of the member set.
        let sel_members = part.cluster(selected)?.to_vec();
        let mut cross = vec![0u64; k];
        let mut any_external = false;
        for &v in &sel_members {
            for &u in graph.neighbors(v) {
                if let Some(c) = part.cluster_of(u) {
                    if c != selected {
                        cross[c] += 1;
                        any_external = true;
                    }
                }
            }
        }

        if !any_external {
            excluded.push(part.remove_cluster(selected));
            continue;
        }

        let n_sel = sel_members.len() as u64;
        let mut best: Option<(usize, f64)> = None;
        for (c, &cross_edges) in cross.iter().enumerate() {
            if c == selected {
                continue;
            }
            let n_c = part.cluster(c)?.len() as u64;
            let threshold = cross_edges as f64 / (n_sel * n_c) as f64;
            if best.is_none_or(|(_, t)| threshold > t) {
                best = Some((c, threshold));
            }
        }
        let (partner, threshold) = best.unwrap();
        if threshold >= r_current && r_current > 0.0 {
            log::warn!(
                "merge threshold {threshold} is not below the partition resolution {r_current}"
            );
        }
        let delta = 2.0
            * (cross[partner] as f64
                - r_current * (n_sel * part.cluster(partner)?.len() as u64) as f64);
        merges.push(CapMerge {
            selected: sel_members,
            partner: part.cluster(partner)?.to_vec(),
            threshold,
            delta,
        });
        let (keep, gone) = (partner.min(selected), partner.max(selected));
        part.merge_clusters(keep, gone);
        part.canonicalize();
    }
    part.canonicalize();
    Ok(CapResult { partition: part, excluded, merges })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Document;
    use crate::quality::{merge_delta, quality};

    fn graph_with(n: u32, edges: &[(u32, u32)]) -> CitationGraph {
        let docs = (0..n).map(|i| Document { id: format!("d{i}"), year: 2000 });
        let edges = edges
            .iter()
            .map(|&(a, b)| (format!("d{a}"), format!("d{b}")));
        CitationGraph::from_parts(docs, edges).unwrap()
    }

    fn cluster_sets(p: &Partition) -> Vec<Vec<u32>> {
        p.clusters().to_vec()
    }

    /// Every document, against every other cluster and a fresh singleton:
    /// no move may strictly increase quality.
    fn assert_locally_optimal(g: &CitationGraph, p: &Partition, r: f64) {
        for &v in &p.members() {
            let cur = p.cluster_of(v).unwrap();
            let cur_members = p.cluster(cur).unwrap();
            let k_cur = cur_members
                .iter()
                .filter(|&&u| u != v && g.has_edge(v, u))
                .count() as f64;
            let base = k_cur - r * (cur_members.len() as f64 - 1.0);
            for c in 0..p.cluster_count() {
                if c == cur {
                    continue;
                }
                let tgt = p.cluster(c).unwrap();
                let k_tgt = tgt.iter().filter(|&&u| g.has_edge(v, u)).count() as f64;
                let gain = (k_tgt - r * tgt.len() as f64) - base;
                assert!(gain <= 1e-9, "doc {v} improves by moving to cluster {c}: {gain}");
            }
            // New singleton destination.
            assert!(-base <= 1e-9, "doc {v} improves by leaving: {}", -base);
        }
    }

    fn assert_connected_clusters(g: &CitationGraph, p: &Partition) {
        for members in p.clusters() {
            if members.len() < 2 {
                continue;
            }
            let mut seen = vec![members[0]];
            let mut head = 0;
            while head < seen.len() {
                let v = seen[head];
                head += 1;
                for &u in g.neighbors(v) {
                    if members.binary_search(&u).is_ok() && !seen.contains(&u) {
                        seen.push(u);
                    }
                }
            }
            assert_eq!(seen.len(), members.len(), "cluster {members:?} is disconnected");
        }
    }

    #[test]
    fn edgeless_members_stay_singletons() {
        let g = graph_with(5, &[]);
        let cfg = ClusteringConfig::new(0.1, 7);
        let res = cluster(&g, &[0, 1, 2, 3, 4], &cfg).unwrap();
        assert_eq!(res.partition.cluster_count(), 5);
        assert_eq!(quality(&g, &res.partition, 0.1).unwrap(), 0.0);
        assert!(res.converged);
    }

    #[test]
    fn triangle_becomes_one_cluster() {
        let g = graph_with(3, &[(0, 1), (1, 2), (0, 2)]);
        let cfg = ClusteringConfig::new(0.1, 7);
        let res = cluster(&g, &[0, 1, 2], &cfg).unwrap();
        assert_eq!(res.partition.cluster_count(), 1);
    }

    #[test]
    fn bridge_between_triangles_is_cut() {
        let g = graph_with(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)]);
        let cfg = ClusteringConfig::new(0.5, 7);
        let res = cluster(&g, &g.all_docs(), &cfg).unwrap();
        let sets = cluster_sets(&res.partition);
        assert_eq!(sets.len(), 2);
        assert!(sets.contains(&vec![0, 1, 2]) && sets.contains(&vec![3, 4, 5]));
        assert_locally_optimal(&g, &res.partition, 0.5);
        assert_connected_clusters(&g, &res.partition);
    }

    #[test]
    fn clustering_is_deterministic_per_seed() {
        let g = graph_with(
            10,
            &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (6, 7), (8, 9), (2, 3), (5, 6)],
        );
        let cfg = ClusteringConfig::new(0.3, 42);
        let a = cluster(&g, &g.all_docs(), &cfg).unwrap();
        let b = cluster(&g, &g.all_docs(), &cfg).unwrap();
        assert_eq!(cluster_sets(&a.partition), cluster_sets(&b.partition));
    }

    #[test]
    fn empty_member_set_is_an_error() {
        let g = graph_with(2, &[(0, 1)]);
        let cfg = ClusteringConfig::new(0.1, 7);
        assert!(matches!(cluster(&g, &[], &cfg), Err(Error::EmptyMembers)));
    }

    #[test]
    fn cap_within_limit_is_identity() {
        let g = graph_with(4, &[(0, 1), (2, 3)]);
        let p = Partition::new([(0, 0), (1, 0), (2, 1), (3, 1)], 0.2).unwrap();
        let cfg = ClusteringConfig::new(0.2, 7);
        let res = cap_children(&g, &p, 10, &cfg).unwrap();
        assert_eq!(res.partition.cluster_count(), 2);
        assert!(res.excluded.is_empty());
        assert!(res.merges.is_empty());
    }

    #[test]
    fn isolated_smallest_cluster_is_removed() {
        // 11 clusters: one isolated pair (docs 0,1), ten triangles chained
        // to each other so they all have external links.
        let mut edges = vec![(0u32, 1u32)];
        for t in 0..10u32 {
            let b = 2 + t * 3;
            edges.extend([(b, b + 1), (b + 1, b + 2), (b, b + 2)]);
            if t > 0 {
                edges.push((b - 1, b)); // chain to previous triangle
            }
        }
        let g = graph_with(32, &edges);
        let assignment: Vec<(u32, usize)> = (0..32u32)
            .map(|d| (d, if d < 2 { 0 } else { 1 + ((d - 2) / 3) as usize }))
            .collect();
        let p = Partition::new(assignment, 0.2).unwrap();
        let cfg = ClusteringConfig::new(0.2, 7);
        let res = cap_children(&g, &p, 10, &cfg).unwrap();
        assert_eq!(res.partition.cluster_count(), 10);
        assert_eq!(res.excluded, vec![vec![0, 1]]);
        assert!(res.merges.is_empty());
    }

    #[test]
    fn singleton_path_merges_follow_edges() {
        // 12 singleton clusters on a path; two merges must occur and each
        // partner must be a path neighbor (threshold 1 beats 0).
        let edges: Vec<(u32, u32)> = (0..11u32).map(|i| (i, i + 1)).collect();
        let g = graph_with(12, &edges);
        let p = Partition::new((0..12u32).map(|d| (d, d as usize)), 0.9).unwrap();
        let cfg = ClusteringConfig::new(0.9, 7);
        let res = cap_children(&g, &p, 10, &cfg).unwrap();
        assert_eq!(res.partition.cluster_count(), 10);
        assert_eq!(res.merges.len(), 2);
        for m in &res.merges {
            assert_eq!(m.threshold, 1.0);
            assert_eq!(m.selected.len(), 1);
            let v = m.selected[0];
            assert!(
                m.partner.iter().any(|&u| g.has_edge(v, u)),
                "merge partner {:?} is not adjacent to {v}",
                m.partner
            );
        }
        // Bookkeeping identity, with excluded sets retained as clusters.
        let before = quality(&g, &p, 0.9).unwrap();
        let after = quality(&g, &res.partition, 0.9).unwrap();
        let sum: f64 = res.merges.iter().map(|m| m.delta).sum();
        assert!((after - before - sum).abs() < 1e-9);
    }

    #[test]
    fn cap_requires_positive_limit() {
        let g = graph_with(2, &[(0, 1)]);
        let p = Partition::new([(0, 0), (1, 1)], 0.1).unwrap();
        let cfg = ClusteringConfig::new(0.1, 7);
        assert!(cap_children(&g, &p, 0, &cfg).is_err());
    }

    #[test]
    fn merge_deltas_match_quality_module() {
        let g = graph_with(6, &[(0, 1), (1, 2), (3, 4), (1, 3), (2, 5)]);
        let p = Partition::new(
            [(0, 0), (1, 0), (2, 1), (3, 2), (4, 3), (5, 4)],
            0.4,
        )
        .unwrap();
        let cfg = ClusteringConfig::new(0.4, 7);
        let res = cap_children(&g, &p, 2, &cfg).unwrap();
        let before = quality(&g, &p, 0.4).unwrap();
        // Extend the capped partition with excluded sets as standalone
        // clusters so both sides cover the same member set.
        let mut assignment: Vec<(u32, usize)> = Vec::new();
        for (c, members) in res.partition.clusters().iter().enumerate() {
            assignment.extend(members.iter().map(|&d| (d, c)));
        }
        for (offset, set) in res.excluded.iter().enumerate() {
            let c = res.partition.cluster_count() + offset;
            assignment.extend(set.iter().map(|&d| (d, c)));
        }
        let extended = Partition::new(assignment, 0.4).unwrap();
        let after = quality(&g, &extended, 0.4).unwrap();
        let sum: f64 = res.merges.iter().map(|m| m.delta).sum();
        assert!((after - before - sum).abs() < 1e-9, "identity off: {after} - {before} != {sum}");
        // Each recorded delta agrees with the quality module's formula for
        // the clusters it merged.
        let first = &res.merges[0];
        let replay = Partition::new(
            first
                .selected
                .iter()
                .map(|&d| (d, 0usize))
                .chain(first.partner.iter().map(|&d| (d, 1))),
            0.4,
        )
        .unwrap();
        assert!((merge_delta(&g, &replay, 0, 1, 0.4).unwrap() - first.delta).abs() < 1e-12);
    }
}
