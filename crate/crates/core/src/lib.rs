//! Generalized (multiclass) quasirandom graph toolkit.
//!
//! Samples block-model random graphs from a k-vertex model graph, computes
//! adjacency and normalized modularity spectra, spectral k-variances and
//! multiway discrepancies, homomorphism and codegree statistics, and checks
//! the finite-size versions of the properties that tie them together.

pub mod clustering;
pub mod discrepancy;
pub mod error;
pub mod generator;
pub mod graph;
pub mod model;
pub mod numerics;
pub mod par;
pub mod small_graphs;
pub mod spectra;
pub mod subgraph;
pub mod verify;

pub use error::{Error, Result};
pub use graph::{Partition, VertexSet, WeightedGraph};
pub use model::{ModelGraph, ModelSpectrum};
pub use numerics::{EigenSystem, Matrix, SymMatrix};
pub use subgraph::SimpleGraphPattern;
