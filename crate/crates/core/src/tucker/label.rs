use super::TuckerError;
use crate::halving::{CHInstance, CutPartition, GridEvaluator, Sign};
use crate::rational::Rational;
use num_bigint::BigInt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VertexLabel {
    /// `±(agent + 1)`.
    Label(i32),
    /// Every discrepancy is exactly zero.
    Solution,
}

/// A labelling of the triangulation vertices with values in `±1..=±n`.
pub trait Labeller: Sync {
    fn agents(&self) -> usize;
    fn label(&self, z: &[i32]) -> VertexLabel;
}

impl<F> Labeller for (usize, F)
where
    F: Fn(&[i32]) -> VertexLabel + Sync,
{
    fn agents(&self) -> usize {
        self.0
    }

    fn label(&self, z: &[i32]) -> VertexLabel {
        (self.1)(z)
    }
}

/// Labels vertices by the largest discrepancy of the associated partition,
/// computed with exact scaled integers.
#[derive(Debug, Clone)]
pub struct ChLabeller {
    ev: GridEvaluator,
    agents: usize,
}

impl ChLabeller {
    pub fn new(inst: &CHInstance, g: i32) -> Result<Self, TuckerError> {
        if g < 1 {
            return Err(TuckerError::Parameter(format!("grid size {g} must be positive")));
        }
        Ok(Self { ev: GridEvaluator::new(inst, g as u64)?, agents: inst.num_agents() })
    }

    pub fn evaluator(&self) -> &GridEvaluator {
        &self.ev
    }

    /// Scaled discrepancies `v(O+) - v(O-)` of the partition of `z`.
    pub fn discrepancies(&self, z: &[i32]) -> Vec<i128> {
        let mut d = vec![0i128; self.agents];
        let mut prev = vec![0i128; self.agents];
        let mut pos: i64 = 0;
        for &zi in z {
            if zi == 0 {
                continue;
            }
            pos += zi.unsigned_abs() as i64;
            for (i, (di, p)) in d.iter_mut().zip(prev.iter_mut()).enumerate() {
                let f = self.ev.cum(i, pos);
                if zi > 0 {
                    *di += f - *p;
                } else {
                    *di -= f - *p;
                }
                *p = f;
            }
        }
        d
    }

    /// Largest scaled `|D_i|`.
    pub fn max_abs(&self, z: &[i32]) -> i128 {
        self.discrepancies(z).into_iter().map(|v| v.abs()).max().unwrap_or(0)
    }

    pub fn max_abs_rational(&self, z: &[i32]) -> Rational {
        Rational::new(BigInt::from(self.max_abs(z)), self.ev.scale().clone())
    }
}

impl Labeller for ChLabeller {
    fn agents(&self) -> usize {
        self.agents
    }

    fn label(&self, z: &[i32]) -> VertexLabel {
        let d = self.discrepancies(z);
        let mut best = 0usize;
        for i in 1..d.len() {
            if d[i].abs() > d[best].abs() {
                best = i;
            }
        }
        match d.get(best) {
            Some(&v) if v > 0 => VertexLabel::Label(best as i32 + 1),
            Some(&v) if v < 0 => VertexLabel::Label(-(best as i32 + 1)),
            _ => VertexLabel::Solution,
        }
    }
}

/// The partition of a vertex: piece `i` has length `|z_i| * L / g` and sign `sign(z_i)`.
pub fn vertex_to_partition(inst: &CHInstance, g: i32, z: &[i32]) -> Result<CutPartition, TuckerError> {
    let unit = inst.domain().length() / Rational::from_integer(BigInt::from(g));
    let pieces: Vec<(Rational, Sign)> = z
        .iter()
        .map(|&v| {
            let len = &unit * Rational::from_integer(BigInt::from(v.unsigned_abs()));
            (len, if v >= 0 { Sign::Plus } else { Sign::Minus })
        })
        .collect();
    Ok(CutPartition::from_pieces(inst.domain(), &pieces)?)
}
