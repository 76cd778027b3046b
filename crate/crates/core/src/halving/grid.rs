use super::{CHInstance, HalvingError};
use crate::rational::{ceil_to_i64, floor_to_i64, lcm_denominators, Rational};
use num_bigint::BigInt;

/// Cumulative valuations at the points `lo + k * L / g`, as exact integers
/// scaled by a common denominator.
#[derive(Debug, Clone)]
pub struct GridEvaluator {
    cells: u64,
    lo: Rational,
    step: Rational,
    scale: BigInt,
    tables: Vec<AgentTable>,
}

#[derive(Debug, Clone)]
struct AgentTable {
    // smallest grid index at or right of each breakpoint
    thresholds: Vec<i64>,
    // F(k) = a + b * k on each step
    coefs: Vec<(i128, i128)>,
    total: i128,
}

const LIMIT: u32 = 100;

fn to_scaled(r: &Rational, scale: &BigInt) -> Result<i128, HalvingError> {
    let v = (r * Rational::from_integer(scale.clone())).to_integer();
    if v.bits() > u64::from(LIMIT) {
        return Err(HalvingError::Precision);
    }
    i128::try_from(v).map_err(|_| HalvingError::Precision)
}

impl GridEvaluator {
    pub fn new(inst: &CHInstance, cells: u64) -> Result<Self, HalvingError> {
        if cells == 0 || cells > (1 << 40) {
            return Err(HalvingError::BadGrid(cells));
        }
        let lo = inst.domain().lo().clone();
        let step = inst.domain().length() / Rational::from_integer(BigInt::from(cells));
        let mut raw: Vec<(Vec<i64>, Vec<(Rational, Rational)>, Rational)> = Vec::new();
        let mut all = Vec::new();
        for a in inst.agents() {
            let bps = a.breakpoints();
            let mut thresholds = Vec::with_capacity(bps.len());
            for b in bps {
                let beta = (b - &lo) / &step;
                thresholds.push(ceil_to_i64(&beta).ok_or(HalvingError::Precision)?);
            }
            let mut coefs = Vec::with_capacity(a.densities().len());
            let mut prefix = Rational::from_integer(0.into());
            for (j, d) in a.densities().iter().enumerate() {
                let intercept = &prefix + d * (&lo - &bps[j]);
                let slope = d * &step;
                all.push(intercept.clone());
                all.push(slope.clone());
                coefs.push((intercept, slope));
                prefix += d * (&bps[j + 1] - &bps[j]);
            }
            all.push(prefix.clone());
            raw.push((thresholds, coefs, prefix));
        }
        let scale = lcm_denominators(all.iter());
        let mut tables = Vec::with_capacity(raw.len());
        for (thresholds, coefs, total) in raw {
            let coefs = coefs
                .iter()
                .map(|(a, b)| Ok((to_scaled(a, &scale)?, to_scaled(b, &scale)?)))
                .collect::<Result<Vec<_>, HalvingError>>()?;
            tables.push(AgentTable { thresholds, coefs, total: to_scaled(&total, &scale)? });
        }
        Ok(Self { cells, lo, step, scale, tables })
    }

    pub fn cells(&self) -> u64 {
        self.cells
    }

    pub fn num_agents(&self) -> usize {
        self.tables.len()
    }

    /// Common denominator: every reported integer is `value * scale`.
    pub fn scale(&self) -> &BigInt {
        &self.scale
    }

    pub fn position(&self, k: i64) -> Rational {
        &self.lo + &self.step * Rational::from_integer(BigInt::from(k))
    }

    pub fn index_ceil(&self, x: &Rational) -> Option<i64> {
        ceil_to_i64(&((x - &self.lo) / &self.step))
    }

    pub fn index_floor(&self, x: &Rational) -> Option<i64> {
        floor_to_i64(&((x - &self.lo) / &self.step))
    }

    /// Scaled mass of `(-inf, lo + k * step]`.
    #[inline]
    pub fn cum(&self, agent: usize, k: i64) -> i128 {
        let t = &self.tables[agent];
        let passed = t.thresholds.partition_point(|&th| th <= k);
        if passed == 0 {
            0
        } else if passed >= t.thresholds.len() {
            t.total
        } else {
            let (a, b) = t.coefs[passed - 1];
            a + b * k as i128
        }
    }

    #[inline]
    pub fn total(&self, agent: usize) -> i128 {
        self.tables[agent].total
    }

    /// `floor(eps * scale)`, so that `|d| <= eps` iff `|d * scale| <= threshold`.
    pub fn threshold(&self, eps: &Rational) -> Result<i128, HalvingError> {
        let v = (eps * Rational::from_integer(self.scale.clone())).floor().to_integer();
        i128::try_from(v).map_err(|_| HalvingError::Precision)
    }

    pub fn to_rational(&self, scaled: i128) -> Rational {
        Rational::new(BigInt::from(scaled), self.scale.clone())
    }
}
