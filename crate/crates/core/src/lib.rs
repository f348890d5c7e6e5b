//! Lumpings of finite Markov chains built from clique partitions of
//! characteristic graphs.
//!
//! A lumping `g` maps chain states onto a smaller alphabet. When every
//! preimage `g⁻¹(y)` is a clique of the chain's characteristic graph, the
//! previous state always disambiguates the current one, so the original
//! trajectory can be decoded exactly from its lumped image and its first
//! state. The crate builds such lumpings, bounds the loss of thresholded
//! (lossy) variants, and analyses lumpings of K-symbol blocks.
//!
//! All entropies are in nats.

pub mod bitset;
pub mod blockcode;
pub mod chain;
pub mod cli;
pub mod entropy;
pub mod error;
pub mod graph;
pub mod io;
pub mod jointsource;
pub mod lump;
pub mod partition;

#[cfg(test)]
pub(crate) mod testutil;

pub use bitset::VertexSet;
pub use chain::{AdjacencyMatrix, BlockedChain, StochasticMatrix, TransitionMatrix};
pub use error::{Error, Result};
pub use graph::Graph;
pub use jointsource::JointDistribution;
pub use lump::{LossReport, LumpingFunction};
pub use partition::CliquePartition;

/// Thresholds and resource caps shared by the analyses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Limits {
    /// Probabilities at or below this value are treated as zero.
    pub positivity: f64,
    /// Largest blocked alphabet `N^K` that may be enumerated.
    pub enumeration: usize,
    /// Largest graph that may be materialized as a bit matrix.
    pub graph_vertices: usize,
    /// Largest graph handed to the exact clique-partition solver.
    pub exact_vertices: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            positivity: chain::DEFAULT_POSITIVITY,
            enumeration: 1 << 20,
            graph_vertices: 1 << 13,
            exact_vertices: partition::EXACT_CAP,
        }
    }
}
