//! Semi-metric recommenders built on co-occurrence proximity graphs.
//!
//! The pipeline: a binary user–item [`relation`] yields item–item and
//! user–user [`proximity`] graphs; the [`closure`] module computes their
//! fuzzy transitive closure or, through the [`algebra`] isomorphism, the
//! distance closure; [`semimetric`] finds pairs whose indirect distance beats
//! the direct one and inserts their closure weights; [`recommend`] scores
//! items; [`eval`] measures the rankings; [`experiment`] wires it together.

pub mod algebra;
pub mod closure;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod graph;
pub mod io;
mod par;
pub mod powerlaw;
pub mod proximity;
pub mod recommend;
pub mod relation;
pub mod semimetric;
pub mod warning;

pub use algebra::{AlgebraChoice, DualAlgebra, MaxMin, Metric};
pub use error::{Error, ErrorClass, Result};
pub use graph::{DenseMatrix, DistanceGraph, ProximityGraph};
pub use relation::{BinaryRelation, ExternalId, IdIndex};
pub use warning::Warning;
