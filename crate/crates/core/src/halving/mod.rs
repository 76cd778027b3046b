//! Consensus-halving instances and exact evaluation.

mod grid;
mod instance;
mod oracle;
mod partition;
mod valuation;

pub use grid::GridEvaluator;
pub use instance::{CHInstance, Domain};
pub use oracle::{oracle_solve, OracleOptions};
pub use partition::{CutPartition, Sign};
pub use valuation::StepValuation;

use crate::rational::Rational;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HalvingError {
    #[error("breakpoints must be strictly increasing")]
    UnsortedBreakpoints,
    #[error("expected {expected} densities for the breakpoint list, got {got}")]
    DensityCount { expected: usize, got: usize },
    #[error("negative density {0}")]
    NegativeDensity(Rational),
    #[error("empty domain [{lo}, {hi}]")]
    EmptyDomain { lo: Rational, hi: Rational },
    #[error("position {value} lies outside the domain [{lo}, {hi}]")]
    OutOfDomain { value: Rational, lo: Rational, hi: Rational },
    #[error("interval endpoints out of order: {lo} > {hi}")]
    ReversedInterval { lo: Rational, hi: Rational },
    #[error("piece lengths must be non-negative and sum to the domain length")]
    BadPieces,
    #[error("agent index {index} out of range for {count} agents")]
    NoSuchAgent { index: usize, count: usize },
    #[error("bound {bound} is below the largest unit-interval value {needed}")]
    BoundTooSmall { bound: Rational, needed: Rational },
    #[error("grid of {0} cells is not usable")]
    BadGrid(u64),
    #[error("exact integer scale for this grid exceeds the supported width")]
    Precision,
}
