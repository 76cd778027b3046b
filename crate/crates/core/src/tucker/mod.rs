//! Tucker-lemma solver for consensus-halving.
//!
//! A vertex `z` of the triangulation is an integer vector in `Z^(n+1)` with
//! `sum |z_i| = g`; it stands for the point `z / g` on the boundary of the
//! cross-polytope. It maps to the partition whose `i`-th piece, from the
//! left, has length `|z_i| * L / g` and sign `sign(z_i)`.
//!
//! Labels are `±(1 + argmax_i |D_i|)` where `D` is the discrepancy vector of
//! that partition, ties going to the lowest agent index. An edge whose labels
//! sum to zero pins down an approximate solution.

mod label;
mod leaf;
mod search;
mod triangulation;

pub use label::{vertex_to_partition, ChLabeller, Labeller, VertexLabel};
pub use leaf::{has_complementary_pair, is_alternating, simplex_sign, LeafGraph, NodeKind};
pub use search::{
    find_complementary_edge, guaranteed_grid, solve, walk, EXHAUSTIVE_LIMIT, SolveOptions, SolveReport, Strategy, TraceStep, WalkOptions, WalkOutcome,
    WalkResult,
};
pub use triangulation::{Simplex, Triangulation, Vertex};

use crate::halving::HalvingError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TuckerError {
    #[error(transparent)]
    Halving(#[from] HalvingError),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error("walk exceeded {0} steps")]
    StepLimit(usize),
    #[error("parameter out of range: {0}")]
    Parameter(String),
    #[error("no complementary edge exists")]
    NoEdge,
}
