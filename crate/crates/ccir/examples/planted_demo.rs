//! Minimal end-to-end run on a synthetic corpus: generate, build the
//! tree, select a cluster for one case.

use ccir::benchgen::{generate, synth_case, PlantedSpec};
use ccir::hierarchy::{build_tree, ExpandPolicy, ResolutionSchedule};
use ccir::leiden::ClusteringConfig;
use ccir::selection::{greedy_select, resolve_case};

fn main() -> ccir::Result<()> {
    let spec = PlantedSpec::default();
    let (graph, labels) = generate(&spec)?;
    let schedule = ResolutionSchedule::new(0.02, 4.0, 2)?;
    let config = ClusteringConfig::new(0.0, 7);
    let tree = build_tree(&graph, &schedule, 10, &ExpandPolicy::All, &config)?;
    let case = resolve_case(&synth_case(&graph, &labels, 1, 3, 0.0, 7)?, &graph)?;
    let outcome = greedy_select(&tree, &case, 1.0)?;
    println!("{} at level {}: F1 = {}", outcome.node_id, outcome.level, outcome.f_score);
    Ok(())
}
