use super::{Domain, HalvingError};
use crate::rational::Rational;
use num_traits::{Signed, Zero};
use std::fmt;
use std::ops::Neg;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Minus,
    Plus,
}

impl Sign {
    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn as_i32(self) -> i32 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

impl Neg for Sign {
    type Output = Sign;
    fn neg(self) -> Sign {
        self.flip()
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// Cut positions plus the sign of the leftmost piece. Signs alternate at each cut.
///
/// Always canonical: cuts are strictly increasing and lie strictly inside the domain.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CutPartition {
    cuts: Vec<Rational>,
    leftmost: Sign,
}

impl CutPartition {
    /// Builds the canonical partition for a multiset of cuts.
    ///
    /// Coincident cuts come in cancelling pairs, and a cut on the left
    /// endpoint only flips the sign of the leftmost piece.
    pub fn new(domain: &Domain, mut cuts: Vec<Rational>, leftmost: Sign) -> Result<Self, HalvingError> {
        for c in &cuts {
            domain.check(c)?;
        }
        cuts.sort();
        let mut merged: Vec<Rational> = Vec::with_capacity(cuts.len());
        let mut i = 0;
        while i < cuts.len() {
            let mut j = i;
            while j < cuts.len() && cuts[j] == cuts[i] {
                j += 1;
            }
            if (j - i) % 2 == 1 {
                merged.push(cuts[i].clone());
            }
            i = j;
        }
        let mut leftmost = leftmost;
        if merged.first().is_some_and(|c| c == domain.lo()) {
            merged.remove(0);
            leftmost = leftmost.flip();
        }
        if merged.last().is_some_and(|c| c == domain.hi()) {
            merged.pop();
        }
        Ok(Self { cuts: merged, leftmost })
    }

    /// The partition with no cuts.
    pub fn whole(leftmost: Sign) -> Self {
        Self { cuts: Vec::new(), leftmost }
    }

    /// Builds a partition from consecutive labelled pieces that tile the domain.
    /// Empty pieces vanish and equal-sign neighbours merge.
    pub fn from_pieces(domain: &Domain, pieces: &[(Rational, Sign)]) -> Result<Self, HalvingError> {
        if pieces.iter().any(|(len, _)| len.is_negative()) {
            return Err(HalvingError::BadPieces);
        }
        let total = pieces.iter().fold(Rational::zero(), |acc, (len, _)| acc + len);
        if total != domain.length() {
            return Err(HalvingError::BadPieces);
        }
        let mut cuts = Vec::new();
        let mut leftmost: Option<Sign> = None;
        let mut current: Option<Sign> = None;
        let mut pos = domain.lo().clone();
        for (len, sign) in pieces {
            if len.is_zero() {
                continue;
            }
            match current {
                None => leftmost = Some(*sign),
                Some(s) if s != *sign => cuts.push(pos.clone()),
                Some(_) => {}
            }
            current = Some(*sign);
            pos += len;
        }
        Ok(Self { cuts, leftmost: leftmost.unwrap_or(Sign::Minus) })
    }

    pub fn cuts(&self) -> &[Rational] {
        &self.cuts
    }

    pub fn num_cuts(&self) -> usize {
        self.cuts.len()
    }

    pub fn leftmost(&self) -> Sign {
        self.leftmost
    }

    pub fn flipped(&self) -> Self {
        Self { cuts: self.cuts.clone(), leftmost: self.leftmost.flip() }
    }

    /// Pieces as `(lo, hi, sign)` in left-to-right order.
    pub fn pieces(&self, domain: &Domain) -> Vec<(Rational, Rational, Sign)> {
        let mut out = Vec::with_capacity(self.cuts.len() + 1);
        let mut lo = domain.lo().clone();
        let mut sign = self.leftmost;
        for c in &self.cuts {
            out.push((lo, c.clone(), sign));
            lo = c.clone();
            sign = sign.flip();
        }
        out.push((lo, domain.hi().clone(), sign));
        out
    }

    /// Sign of the piece containing `x`; a cut point takes the sign on its right.
    pub fn sign_at(&self, x: &Rational) -> Sign {
        let passed = self.cuts.iter().take_while(|c| *c <= x).count();
        if passed % 2 == 0 {
            self.leftmost
        } else {
            self.leftmost.flip()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn unit() -> Domain {
        Domain::new(int(0), int(1)).unwrap()
    }

    #[test]
    fn coincident_pair_cancels() {
        let p = CutPartition::new(&unit(), vec![rat(1, 5), rat(1, 5), rat(7, 10)], Sign::Minus).unwrap();
        assert_eq!(p.cuts(), &[rat(7, 10)]);
        assert_eq!(p.leftmost(), Sign::Minus);
        let q = CutPartition::new(&unit(), vec![rat(1, 2), rat(1, 2)], Sign::Minus).unwrap();
        assert_eq!(q, CutPartition::whole(Sign::Minus));
    }

    #[test]
    fn triple_cut_keeps_one() {
        let p = CutPartition::new(&unit(), vec![rat(1, 2); 3], Sign::Plus).unwrap();
        assert_eq!(p.cuts(), &[rat(1, 2)]);
    }

    #[test]
    fn endpoint_cuts_are_dropped() {
        let p = CutPartition::new(&unit(), vec![int(0), rat(1, 2), int(1)], Sign::Minus).unwrap();
        assert_eq!(p.cuts(), &[rat(1, 2)]);
        assert_eq!(p.leftmost(), Sign::Plus);
    }

    #[test]
    fn rejects_cut_outside_domain() {
        assert!(matches!(
            CutPartition::new(&unit(), vec![rat(3, 2)], Sign::Minus),
            Err(HalvingError::OutOfDomain { .. })
        ));
    }

    #[test]
    fn pieces_merge_equal_signs() {
        let pieces = [(rat(1, 3), Sign::Plus), (rat(1, 3), Sign::Plus), (rat(1, 3), Sign::Minus)];
        let p = CutPartition::from_pieces(&unit(), &pieces).unwrap();
        assert_eq!(p.cuts(), &[rat(2, 3)]);
        assert_eq!(p.leftmost(), Sign::Plus);
        let bad = [(rat(1, 3), Sign::Plus)];
        assert_eq!(CutPartition::from_pieces(&unit(), &bad), Err(HalvingError::BadPieces));
    }

    #[test]
    fn sign_lookup() {
        let p = CutPartition::new(&unit(), vec![rat(1, 4), rat(3, 4)], Sign::Minus).unwrap();
        assert_eq!(p.sign_at(&rat(1, 8)), Sign::Minus);
        assert_eq!(p.sign_at(&rat(1, 4)), Sign::Plus);
        assert_eq!(p.sign_at(&rat(7, 8)), Sign::Minus);
        assert_eq!(p.pieces(&unit()).len(), 3);
    }
}
