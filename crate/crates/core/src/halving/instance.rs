use super::{CutPartition, HalvingError, Sign, StepValuation};
use crate::rational::Rational;
use num_traits::{Signed, Zero};

/// A closed interval `[lo, hi]` with `lo < hi`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Domain {
    lo: Rational,
    hi: Rational,
}

impl Domain {
    pub fn new(lo: Rational, hi: Rational) -> Result<Self, HalvingError> {
        if lo >= hi {
            return Err(HalvingError::EmptyDomain { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn length(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.lo <= *x && *x <= self.hi
    }

    pub fn check(&self, x: &Rational) -> Result<(), HalvingError> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(HalvingError::OutOfDomain { value: x.clone(), lo: self.lo.clone(), hi: self.hi.clone() })
        }
    }
}

/// Agents on a common domain plus the bound `M` used for mesh selection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CHInstance {
    domain: Domain,
    agents: Vec<StepValuation>,
    bound: Rational,
}

impl CHInstance {
    /// Uses the largest density as `M`; it dominates every unit-interval value.
    pub fn new(domain: Domain, agents: Vec<StepValuation>) -> Result<Self, HalvingError> {
        let bound = agents.iter().map(|a| a.max_density()).max().unwrap_or_else(Rational::zero);
        Self::with_bound(domain, agents, bound)
    }

    pub fn with_bound(domain: Domain, agents: Vec<StepValuation>, bound: Rational) -> Result<Self, HalvingError> {
        for a in &agents {
            if let Some((lo, hi)) = a.support_hull() {
                domain.check(&lo)?;
                domain.check(&hi)?;
            }
        }
        if bound.is_negative() {
            return Err(HalvingError::BoundTooSmall { bound, needed: Rational::zero() });
        }
        Ok(Self { domain, agents, bound })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn agents(&self) -> &[StepValuation] {
        &self.agents
    }

    pub fn num_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn bound(&self) -> &Rational {
        &self.bound
    }

    pub fn max_density(&self) -> Rational {
        self.agents.iter().map(|a| a.max_density()).max().unwrap_or_else(Rational::zero)
    }

    fn agent(&self, index: usize) -> Result<&StepValuation, HalvingError> {
        self.agents.get(index).ok_or(HalvingError::NoSuchAgent { index, count: self.agents.len() })
    }

    /// Largest value any agent assigns to a unit-length subinterval of the domain
    /// (the whole domain when it is shorter than one).
    pub fn max_unit_interval_value(&self) -> Rational {
        let one = Rational::from_integer(1.into());
        let mut best = Rational::zero();
        for a in &self.agents {
            if self.domain.length() <= one {
                best = best.max(a.total_mass());
                continue;
            }
            let last_start = self.domain.hi() - &one;
            let mut starts = vec![self.domain.lo().clone(), last_start.clone()];
            for b in a.breakpoints() {
                starts.push(b.clone());
                starts.push(b - &one);
            }
            for s in starts {
                if s < *self.domain.lo() || s > last_start {
                    continue;
                }
                let v = a.integrate(&s, &(&s + &one));
                if v > best {
                    best = v;
                }
            }
        }
        best
    }

    /// Checks that `M` dominates every unit-interval value.
    pub fn check_bound(&self) -> Result<(), HalvingError> {
        let needed = self.max_unit_interval_value();
        if self.bound < needed {
            Err(HalvingError::BoundTooSmall { bound: self.bound.clone(), needed })
        } else {
            Ok(())
        }
    }

    pub fn eval_interval(&self, agent: usize, lo: &Rational, hi: &Rational) -> Result<Rational, HalvingError> {
        self.domain.check(lo)?;
        self.domain.check(hi)?;
        if lo > hi {
            return Err(HalvingError::ReversedInterval { lo: lo.clone(), hi: hi.clone() });
        }
        Ok(self.agent(agent)?.integrate(lo, hi))
    }

    /// `(value of O+, value of O-)` for each agent.
    pub fn eval_partition(&self, p: &CutPartition) -> Vec<(Rational, Rational)> {
        let pieces = p.pieces(&self.domain);
        self.agents
            .iter()
            .map(|a| {
                let mut plus = Rational::zero();
                let mut minus = Rational::zero();
                for (lo, hi, s) in &pieces {
                    let v = a.integrate(lo, hi);
                    match s {
                        Sign::Plus => plus += v,
                        Sign::Minus => minus += v,
                    }
                }
                (plus, minus)
            })
            .collect()
    }

    /// Signed discrepancies `v(O+) - v(O-)`.
    pub fn discrepancies(&self, p: &CutPartition) -> Vec<Rational> {
        self.eval_partition(p).into_iter().map(|(plus, minus)| plus - minus).collect()
    }

    pub fn max_discrepancy(&self, p: &CutPartition) -> Rational {
        self.discrepancies(p)
            .into_iter()
            .map(|d| d.abs())
            .max()
            .unwrap_or_else(Rational::zero)
    }

    pub fn is_eps_solution(&self, p: &CutPartition, eps: &Rational) -> bool {
        self.max_discrepancy(p) <= *eps
    }
}
