//! Exact consensus-halving with piecewise-constant valuations.
//!
//! The crate covers four layers:
//!
//! * [`halving`]: instances, partitions, exact evaluation and a brute-force grid oracle.
//! * [`circuit`]: generalized circuits and their approximate gate semantics.
//! * [`gcircuit`] and [`sat`]: reductions from circuits and from 3-CNF formulas.
//! * [`tucker`]: a path-following solver on a symmetric triangulation of the cross-polytope.

pub mod circuit;
pub mod gcircuit;
pub mod halving;
pub mod rational;
pub mod sat;
pub mod tucker;

pub use halving::{CHInstance, CutPartition, Domain, HalvingError, Sign, StepValuation};
pub use rational::Rational;
