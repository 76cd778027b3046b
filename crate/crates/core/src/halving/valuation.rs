use super::HalvingError;
use crate::rational::Rational;
use num_traits::{Signed, Zero};

/// A non-negative step density, zero outside its first and last breakpoint.
///
/// Stored in normal form: no zero-density steps at either end and no two
/// adjacent steps with the same density.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StepValuation {
    breakpoints: Vec<Rational>,
    densities: Vec<Rational>,
}

impl StepValuation {
    pub fn new(breakpoints: Vec<Rational>, densities: Vec<Rational>) -> Result<Self, HalvingError> {
        if breakpoints.is_empty() && densities.is_empty() {
            return Ok(Self::zero());
        }
        if densities.len() + 1 != breakpoints.len() {
            return Err(HalvingError::DensityCount {
                expected: breakpoints.len().saturating_sub(1),
                got: densities.len(),
            });
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(HalvingError::UnsortedBreakpoints);
        }
        if let Some(d) = densities.iter().find(|d| d.is_negative()) {
            return Err(HalvingError::NegativeDensity(d.clone()));
        }
        Ok(Self::normalized(breakpoints, densities))
    }

    pub fn zero() -> Self {
        Self { breakpoints: Vec::new(), densities: Vec::new() }
    }

    /// Sum of constant blocks `(lo, hi, density)`; overlapping blocks add up.
    pub fn from_blocks(blocks: &[(Rational, Rational, Rational)]) -> Result<Self, HalvingError> {
        let mut points: Vec<Rational> = Vec::with_capacity(blocks.len() * 2);
        for (lo, hi, d) in blocks {
            if lo > hi {
                return Err(HalvingError::ReversedInterval { lo: lo.clone(), hi: hi.clone() });
            }
            if d.is_negative() {
                return Err(HalvingError::NegativeDensity(d.clone()));
            }
            points.push(lo.clone());
            points.push(hi.clone());
        }
        points.sort();
        points.dedup();
        if points.len() < 2 {
            return Ok(Self::zero());
        }
        let densities = points
            .windows(2)
            .map(|w| {
                blocks
                    .iter()
                    .filter(|(lo, hi, _)| *lo <= w[0] && w[1] <= *hi)
                    .fold(Rational::zero(), |acc, (_, _, d)| acc + d)
            })
            .collect();
        Ok(Self::normalized(points, densities))
    }

    fn normalized(breakpoints: Vec<Rational>, densities: Vec<Rational>) -> Self {
        let mut bps: Vec<Rational> = Vec::with_capacity(breakpoints.len());
        let mut ds: Vec<Rational> = Vec::with_capacity(densities.len());
        for (j, d) in densities.into_iter().enumerate() {
            if ds.is_empty() {
                if d.is_zero() {
                    continue;
                }
                bps.push(breakpoints[j].clone());
                bps.push(breakpoints[j + 1].clone());
                ds.push(d);
            } else if *ds.last().unwrap() == d {
                *bps.last_mut().unwrap() = breakpoints[j + 1].clone();
            } else {
                bps.push(breakpoints[j + 1].clone());
                ds.push(d);
            }
        }
        while ds.last().is_some_and(|d| d.is_zero()) {
            ds.pop();
            bps.pop();
        }
        if ds.is_empty() {
            bps.clear();
        }
        Self { breakpoints: bps, densities: ds }
    }

    pub fn breakpoints(&self) -> &[Rational] {
        &self.breakpoints
    }

    pub fn densities(&self) -> &[Rational] {
        &self.densities
    }

    pub fn is_zero(&self) -> bool {
        self.densities.is_empty()
    }

    /// Smallest interval outside of which the density vanishes.
    pub fn support_hull(&self) -> Option<(Rational, Rational)> {
        Some((self.breakpoints.first()?.clone(), self.breakpoints.last()?.clone()))
    }

    pub fn total_mass(&self) -> Rational {
        self.densities
            .iter()
            .zip(self.breakpoints.windows(2))
            .fold(Rational::zero(), |acc, (d, w)| acc + d * (&w[1] - &w[0]))
    }

    pub fn max_density(&self) -> Rational {
        self.densities.iter().max().cloned().unwrap_or_else(Rational::zero)
    }

    /// Mass of `(-inf, x]`.
    pub fn cumulative(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for (d, w) in self.densities.iter().zip(self.breakpoints.windows(2)) {
            if *x <= w[0] {
                break;
            }
            if *x >= w[1] {
                acc += d * (&w[1] - &w[0]);
            } else {
                acc += d * (x - &w[0]);
                break;
            }
        }
        acc
    }

    /// Mass of `[lo, hi]` with no domain check; zero when `hi <= lo`.
    pub fn integrate(&self, lo: &Rational, hi: &Rational) -> Rational {
        if hi <= lo {
            return Rational::zero();
        }
        self.cumulative(hi) - self.cumulative(lo)
    }

    /// Density at `x`, taking the step to the right of a breakpoint.
    pub fn density_at(&self, x: &Rational) -> Rational {
        for (d, w) in self.densities.iter().zip(self.breakpoints.windows(2)) {
            if w[0] <= *x && *x < w[1] {
                return d.clone();
            }
        }
        Rational::zero()
    }

    /// The valuation of the pushed-forward measure under `x -> offset + factor * x`,
    /// with all values multiplied by `value_factor`. `factor` must be positive.
    pub fn transformed(&self, offset: &Rational, factor: &Rational, value_factor: &Rational) -> Self {
        assert!(factor.is_positive(), "factor must be positive");
        let breakpoints = self.breakpoints.iter().map(|b| offset + factor * b).collect();
        let densities = self.densities.iter().map(|d| d * value_factor / factor).collect();
        Self::normalized(breakpoints, densities)
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut blocks = Vec::new();
        for v in [self, other] {
            for (d, w) in v.densities.iter().zip(v.breakpoints.windows(2)) {
                blocks.push((w[0].clone(), w[1].clone(), d.clone()));
            }
        }
        Self::from_blocks(&blocks).expect("blocks of valid valuations are valid")
    }
}
