//! Shared test oracles, independent of the implementation paths they check.

#![allow(dead_code)]

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ccir::corpus::{CitationGraph, Document};
use ccir::hierarchy::{ClusterNode, ClusterTree};
use ccir::quality::Partition;

/// Brute-force quality: sum over ordered pairs `(i, j)`, `i != j`, of
/// `delta(x_i, x_j) * (a_ij - r)`. Iterates a sorted assignment list so the
/// summation order is deterministic.
pub fn quality_oracle(graph: &CitationGraph, assignment: &[(u32, usize)], r: f64) -> f64 {
    let mut q = 0.0;
    for &(i, ci) in assignment {
        for &(j, cj) in assignment {
            if i != j && ci == cj {
                let a = if graph.has_edge(i, j) { 1.0 } else { 0.0 };
                q += a - r;
            }
        }
    }
    q
}

pub fn partition_to_assignment(p: &Partition) -> Vec<(u32, usize)> {
    let mut out: Vec<(u32, usize)> = p
        .members()
        .iter()
        .map(|&d| (d, p.cluster_of(d).unwrap()))
        .collect();
    out.sort_unstable();
    out
}

/// All set partitions of `0..n` as restricted growth strings.
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut prefix = Vec::with_capacity(n);
    fn rec(prefix: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        let max = prefix.iter().copied().max().map_or(0, |m| m + 1);
        for c in 0..=max {
            prefix.push(c);
            rec(prefix, n, out);
            prefix.pop();
        }
    }
    rec(&mut prefix, n, &mut out);
    out
}

/// Best quality over every partition of `members`, by full enumeration.
pub fn brute_force_best(graph: &CitationGraph, members: &[u32], r: f64) -> f64 {
    let n = members.len();
    let mut best = f64::MIN;
    for rgs in set_partitions(n) {
        let assignment: Vec<(u32, usize)> =
            members.iter().copied().zip(rgs.iter().copied()).collect();
        best = best.max(quality_oracle(graph, &assignment, r));
    }
    best
}

/// Adjusted Rand index between two labelings paired by position.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len();
    let ka = a.iter().max().map_or(0, |m| m + 1);
    let kb = b.iter().max().map_or(0, |m| m + 1);
    let mut table = vec![vec![0u64; kb]; ka];
    for i in 0..n {
        table[a[i]][b[i]] += 1;
    }
    let c2 = |x: u64| (x * x.saturating_sub(1) / 2) as f64;
    let sum_ij: f64 = table.iter().flatten().map(|&x| c2(x)).sum();
    let sum_a: f64 = (0..ka)
        .map(|i| c2(table[i].iter().sum::<u64>()))
        .sum();
    let sum_b: f64 = (0..kb)
        .map(|j| c2((0..ka).map(|i| table[i][j]).sum::<u64>()))
        .sum();
    let expected = sum_a * sum_b / c2(n as u64);
    let max_index = 0.5 * (sum_a + sum_b);
    if (max_index - expected).abs() < 1e-12 {
        return 1.0;
    }
    (sum_ij - expected) / (max_index - expected)
}

/// Erdos-Renyi graph on `n` documents.
pub fn random_graph(n: u32, p: f64, seed: u64) -> CitationGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let docs = (0..n).map(|i| Document { id: format!("d{i}"), year: 2000 });
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p) {
                edges.push((format!("d{i}"), format!("d{j}")));
            }
        }
    }
    CitationGraph::from_parts(docs, edges).unwrap()
}

/// Random valid partition of `members` into at most `k_max` clusters.
pub fn random_partition(members: &[u32], k_max: usize, r: f64, rng: &mut ChaCha8Rng) -> Partition {
    let k = rng.gen_range(1..=k_max.min(members.len()));
    let mut raw: Vec<usize> = members.iter().map(|_| rng.gen_range(0..k)).collect();
    // Dense-renumber so cluster ids are contiguous and none is empty.
    let mut seen: Vec<usize> = Vec::new();
    for label in &mut raw {
        let id = match seen.iter().position(|&s| s == *label) {
            Some(i) => i,
            None => {
                seen.push(*label);
                seen.len() - 1
            }
        };
        *label = id;
    }
    Partition::new(members.iter().copied().zip(raw), r).unwrap()
}

/// Random tree over documents `0..n_docs` with conservation at every
/// expanded node (children plus excluded partition the node's set).
pub fn random_tree(n_docs: u32, seed: u64) -> ClusterTree {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let docs: Vec<u32> = (0..n_docs).collect();
    let root = split_node(&mut rng, "0".to_string(), 0, docs, 4);
    ClusterTree::from_root(root)
}

fn split_node(rng: &mut ChaCha8Rng, id: String, level: usize, docs: Vec<u32>, max_depth: usize) -> ClusterNode {
    let stop = level >= max_depth || docs.len() < 4 || rng.gen_bool(0.2);
    if stop {
        return ClusterNode {
            id,
            level,
            doc_ids: docs,
            excluded: Vec::new(),
            expanded: false,
            children: Vec::new(),
        };
    }
    let mut shuffled = docs.clone();
    shuffled.shuffle(rng);
    // Occasionally hold documents out as an excluded set.
    let hold_out = if rng.gen_bool(0.3) { rng.gen_range(0..=docs.len() / 4) } else { 0 };
    let excluded_docs: Vec<u32> = {
        let mut e: Vec<u32> = shuffled.split_off(shuffled.len() - hold_out);
        e.sort_unstable();
        e
    };
    let k = rng.gen_range(2..=4.min(shuffled.len()));
    let mut parts: Vec<Vec<u32>> = vec![Vec::new(); k];
    for (i, d) in shuffled.into_iter().enumerate() {
        parts[i % k].push(d);
    }
    let children: Vec<ClusterNode> = parts
        .into_iter()
        .filter(|p| !p.is_empty())
        .enumerate()
        .map(|(i, mut part)| {
            part.sort_unstable();
            split_node(rng, format!("{id}.{}", i + 1), level + 1, part, max_depth)
        })
        .collect();
    ClusterNode {
        id,
        level,
        doc_ids: docs,
        excluded: if excluded_docs.is_empty() { Vec::new() } else { vec![excluded_docs] },
        expanded: true,
        children,
    }
}

/// Independently written reference for the greedy descent: recomputes the
/// F-score from scratch at every step with its own set arithmetic.
pub fn reference_select<'a>(root: &'a ClusterNode, relevant: &[u32], beta: f64) -> &'a ClusterNode {
    let rel: HashSet<u32> = relevant.iter().copied().collect();
    fn fscore(node: &ClusterNode, rel: &HashSet<u32>, beta: f64) -> f64 {
        let tp = node.doc_ids.iter().filter(|d| rel.contains(d)).count() as f64;
        if tp == 0.0 {
            return 0.0;
        }
        let p = tp / node.doc_ids.len() as f64;
        let r = tp / rel.len() as f64;
        (1.0 + beta * beta) * p * r / (beta * beta * p + r)
    }
    let mut node = root;
    loop {
        let here = fscore(node, &rel, beta);
        let mut best: Option<(&ClusterNode, f64)> = None;
        for child in &node.children {
            let s = fscore(child, &rel, beta);
            if best.is_none_or(|(_, bs)| s > bs) {
                best = Some((child, s));
            }
        }
        match best {
            Some((child, s)) if s > here => node = child,
            _ => return node,
        }
    }
}

/// Local optimality checker: no document may improve quality by moving to
/// any other cluster or to a fresh singleton.
pub fn assert_locally_optimal(graph: &CitationGraph, p: &Partition, r: f64) {
    for &v in &p.members() {
        let cur = p.cluster_of(v).unwrap();
        let cur_members = p.cluster(cur).unwrap();
        let k_cur = cur_members
            .iter()
            .filter(|&&u| u != v && graph.has_edge(v, u))
            .count() as f64;
        let base = k_cur - r * (cur_members.len() as f64 - 1.0);
        for c in 0..p.cluster_count() {
            if c == cur {
                continue;
            }
            let target = p.cluster(c).unwrap();
            let k_target = target.iter().filter(|&&u| graph.has_edge(v, u)).count() as f64;
            let gain = (k_target - r * target.len() as f64) - base;
            assert!(gain <= 1e-9, "document {v} improves by moving to cluster {c}: {gain}");
        }
        assert!(-base <= 1e-9, "document {v} improves by leaving its cluster: {}", -base);
    }
}
