//! Diffusion condensation: a cascade of data-driven low-pass diffusion filters
//! that contracts a point cloud toward local barycenters, merging clusters as
//! points collide, and records the full history as a cluster hierarchy.
//!
//! One condensation pass builds a Gaussian affinity over the current point
//! positions, degree-rescales it (anisotropic normalization), row-normalizes
//! the result into a Markov operator, and applies that operator to the
//! positions themselves. Repeating the pass with a slowly growing bandwidth
//! condenses the data; the iteration at which two points fall within the merge
//! threshold defines their cluster-merge time. The resulting trace supports
//! iteration cuts, persistence values, Sankey flow exports, spectral-decay
//! diagnostics, and comparisons against classical clusterers.
//!
//! ```
//! use condensation::datasets::blobs;
//! use condensation::engine::{run, CondensationConfig};
//! use condensation::hierarchy::build_tree;
//!
//! let ds = blobs(90, &[[-7.0, -4.0], [0.0, 0.0], [7.0, -4.0]], &[1.0, 1.5, 0.5], 7).unwrap();
//! let trace = run(&ds.data, &CondensationConfig::default()).unwrap();
//! let tree = build_tree(&trace);
//! let labels_halfway = tree.cut_at(trace.final_iteration() / 2);
//! assert_eq!(labels_halfway.len(), 90);
//! ```

pub mod baselines;
pub mod datasets;
pub mod engine;
mod error;
mod fsum;
pub mod graph;
pub mod hierarchy;
pub mod io;
mod linalg;
pub mod operators;
pub mod spectra;

pub use error::{Error, Result};

pub use engine::{
    CondensationConfig, CondensationTrace, EpsilonSpec, HaltReason, Labels, MergeEvent,
    MergeThresholdMode,
};
pub use operators::{
    AffinityMatrix, DataMatrix, DegreeDiagonal, DiffusionOperator, OperatorKind,
};
