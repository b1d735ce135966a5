//! Citation-cluster retrieval toolkit.
//!
//! Builds a tree hierarchy of document clusters from an undirected citation
//! graph by maximizing a resolution-parameterized quality function,
//! simulates a searching user by greedy F-beta descent through the tree,
//! and evaluates the retrieved clusters against relevance judgments and a
//! baseline retrieval set. A planted-hierarchy generator makes the whole
//! pipeline testable on synthetic corpora.
//!
//! Pipeline: [`corpus`] loads and year-windows citation graphs; [`leiden`]
//! clusters document sets and caps child counts; [`hierarchy`] assembles
//! the tree under a geometric resolution schedule; [`selection`] simulates
//! cluster selection per beta; [`evaluation`] computes the metric suite and
//! reports; [`benchgen`] generates synthetic corpora; [`pipeline`] wires
//! the batch commands used by the `ccir` binary.

pub mod benchgen;
pub mod corpus;
pub mod error;
pub mod evaluation;
pub mod hierarchy;
pub mod leiden;
pub mod pipeline;
pub mod quality;
pub mod selection;

mod seed;
mod setops;

pub use error::{Error, Result};
pub use seed::derive_seed;
