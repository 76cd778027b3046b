//! Encoding of a generalized circuit as a consensus-halving instance.
//!
//! Node `i` owns the block `[6i, 6i + 6]` and two agents, `var_i` and
//! `copy_i`. In a solution the block holds exactly two cuts, at `6i + 1 + t⁻`
//! and `6i + 4 + t⁺`; the value of node `i` is `clamp(t⁻)`.
//! Gadgets read an input either on `[6j + 1, 6j + 2]` (through `t⁻`) or on
//! `[6j + 4, 6j + 5]` (through `t⁺`).

use crate::circuit::{CircuitError, GateKind, GenCircuit, Violation};
use crate::halving::{CHInstance, CutPartition, Domain, HalvingError, Sign, StepValuation};
use crate::rational::{clamp_unit, int, min_rat, rat, Rational};
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Halving(#[from] HalvingError),
    #[error("parameter out of range: {0}")]
    Parameter(String),
    #[error("expected one cut in {half} half of block {block}, found {count}")]
    CutCount { block: usize, half: &'static str, count: usize },
    #[error("partition has {got} cuts, at least {needed} are needed to pick a copy")]
    TooFewCuts { needed: usize, got: usize },
    #[error("no copy region holds at most {0} cuts")]
    NoCleanCopy(usize),
    #[error("agent {0} cannot be balanced inside its block")]
    Unbalanceable(usize),
}

/// How block coordinates relate to the instance, plus the encoding tolerances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionMeta {
    /// Nodes per circuit copy.
    pub num_nodes: usize,
    /// Disjoint circuit copies laid side by side.
    pub copies: usize,
    /// Instance position of block coordinate `b` is `offset + coord_scale * b`.
    pub offset: Rational,
    pub coord_scale: Rational,
    /// Every valuation is multiplied by this factor.
    pub value_scale: Rational,
    /// Gadget tolerance of each gate, in gate order of one copy.
    pub gate_eps: Vec<Rational>,
    /// Discrepancy tolerance in block units.
    pub eps_prime: Rational,
}

impl ReductionMeta {
    pub fn total_nodes(&self) -> usize {
        self.num_nodes * self.copies
    }

    pub fn anchor(i: usize) -> Rational {
        int(6 * i as i64)
    }

    pub fn to_instance(&self, block_pos: &Rational) -> Rational {
        &self.offset + &self.coord_scale * block_pos
    }

    pub fn to_block(&self, pos: &Rational) -> Rational {
        (pos - &self.offset) / &self.coord_scale
    }

    /// Tolerance to use on the instance itself.
    pub fn instance_tolerance(&self) -> Rational {
        &self.eps_prime * &self.value_scale
    }

    pub fn var_agent(node: usize) -> usize {
        2 * node
    }

    pub fn copy_agent(node: usize) -> usize {
        2 * node + 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Encoding {
    pub instance: CHInstance,
    pub meta: ReductionMeta,
}

/// Cut offsets read off a partition, one entry per node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    pub x: Vec<Rational>,
    pub t_minus: Vec<Rational>,
    pub t_plus: Vec<Rational>,
}

type Block = (Rational, Rational, Rational);

fn minus_window(node: usize) -> Rational {
    ReductionMeta::anchor(node) + int(1)
}

fn plus_window(node: usize) -> Rational {
    ReductionMeta::anchor(node) + int(4)
}

fn border(node: usize) -> Vec<Block> {
    let d = ReductionMeta::anchor(node);
    vec![(d.clone(), &d + int(1), int(4)), (&d + int(2), &d + int(3), int(4))]
}

fn copy_blocks(node: usize) -> Vec<Block> {
    let d = ReductionMeta::anchor(node);
    vec![
        (&d + int(3), &d + int(4), int(4)),
        (&d + int(5), &d + int(6), int(4)),
        (&d + int(1), &d + int(2), int(1)),
        (&d + int(4), &d + int(5), int(1)),
    ]
}

fn unit_window(lo: Rational) -> Block {
    let hi = &lo + int(1);
    (lo, hi, int(1))
}

/// Blocks the gate adds to the agent of its output node.
fn gadget(kind: GateKind, inputs: &[usize], out: usize, alpha: Option<&Rational>, eps: &Rational) -> Vec<Block> {
    let l = minus_window(out);
    let r = &l + int(1);
    let one = int(1);
    match kind {
        GateKind::Constant => {
            let a = alpha.unwrap();
            vec![(&l + a - rat(1, 2), &l + a + rat(1, 2), one)]
        }
        GateKind::Scale | GateKind::Copy => {
            let a = alpha.cloned().unwrap_or_else(Rational::one);
            let w = min_rat(&(&a + eps), &one);
            vec![unit_window(plus_window(inputs[0])), (l.clone(), &l + w, a.recip())]
        }
        GateKind::Not => {
            let d = (int(2) * eps).recip();
            vec![
                unit_window(minus_window(inputs[0])),
                (l.clone(), &l + eps, d.clone()),
                (&r - eps, r.clone(), d),
            ]
        }
        GateKind::Add => vec![
            unit_window(plus_window(inputs[0])),
            unit_window(plus_window(inputs[1])),
            (l.clone(), &r - eps, one.clone()),
            (&r - eps, r.clone(), eps.recip() + one),
        ],
        GateKind::Sub => vec![
            unit_window(plus_window(inputs[0])),
            unit_window(minus_window(inputs[1])),
            (&l + eps, r.clone(), one.clone()),
            (l.clone(), &l + eps, eps.recip() + one),
        ],
        GateKind::Less => vec![
            unit_window(minus_window(inputs[0])),
            unit_window(plus_window(inputs[1])),
            (l.clone(), &l + eps, eps.recip()),
            (&r - eps, r.clone(), eps.recip()),
        ],
        GateKind::Or | GateKind::And => {
            let (left, right) = if kind == GateKind::Or { (rat(1, 2), rat(3, 2)) } else { (rat(3, 2), rat(1, 2)) };
            vec![
                unit_window(plus_window(inputs[0])),
                unit_window(plus_window(inputs[1])),
                (l.clone(), &l + eps, left / eps),
                (&r - eps, r.clone(), right / eps),
            ]
        }
    }
}

/// Agents for a circuit in block coordinates; agent `2i` is `var_i`, `2i + 1` is `copy_i`.
fn agents_for(c: &GenCircuit, gate_eps: &[Rational]) -> Result<Vec<StepValuation>, ReductionError> {
    let mut var: Vec<Vec<Block>> = (0..c.num_nodes).map(border).collect();
    for (g, eps) in c.gates.iter().zip(gate_eps) {
        var[g.out].extend(gadget(g.kind, &g.inputs, g.out, g.alpha.as_ref(), eps));
    }
    let mut agents = Vec::with_capacity(2 * c.num_nodes);
    for (i, blocks) in var.iter().enumerate() {
        agents.push(StepValuation::from_blocks(blocks)?);
        agents.push(StepValuation::from_blocks(&copy_blocks(i))?);
    }
    Ok(agents)
}

fn check_circuit(c: &GenCircuit) -> Result<(), ReductionError> {
    let bad: Vec<Violation> = c.validate();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(CircuitError::Invalid(bad).into())
    }
}

/// Encodes with one tolerance `eps` for every gadget. Requires
/// `0 < eps <= 1/2` and `0 < eps_prime < min(eps / 11, 1 / 40)`.
pub fn encode(c: &GenCircuit, eps: &Rational, eps_prime: &Rational) -> Result<Encoding, ReductionError> {
    let bound = min_rat(&(eps / int(11)), &rat(1, 40));
    if *eps_prime >= bound {
        return Err(ReductionError::Parameter(format!("eps' = {eps_prime} must be below {bound}")));
    }
    encode_with_tolerances(c, &vec![eps.clone(); c.gates.len()], eps_prime)
}

/// Encodes with a separate gadget tolerance per gate. Only checks
/// `0 < eps_g <= 1/2` and `0 < eps_prime < 1/40`; the decoded bounds of
/// [`gate_bound_violations`] are guaranteed when `eps_prime < eps_g / 11` as well.
pub fn encode_with_tolerances(
    c: &GenCircuit,
    gate_eps: &[Rational],
    eps_prime: &Rational,
) -> Result<Encoding, ReductionError> {
    check_circuit(c)?;
    if c.num_nodes == 0 {
        return Err(ReductionError::Parameter("circuit has no nodes".into()));
    }
    if gate_eps.len() != c.gates.len() {
        return Err(ReductionError::Parameter("one tolerance per gate is required".into()));
    }
    if let Some(e) = gate_eps.iter().find(|e| !e.is_positive() || **e > rat(1, 2)) {
        return Err(ReductionError::Parameter(format!("gadget tolerance {e} must lie in (0, 1/2]")));
    }
    if !eps_prime.is_positive() || *eps_prime >= rat(1, 40) {
        return Err(ReductionError::Parameter(format!("eps' = {eps_prime} must lie in (0, 1/40)")));
    }
    let agents = agents_for(c, gate_eps)?;
    let domain = Domain::new(int(0), int(6 * c.num_nodes as i64))?;
    let instance = CHInstance::new(domain, agents)?;
    let meta = ReductionMeta {
        num_nodes: c.num_nodes,
        copies: 1,
        offset: Rational::zero(),
        coord_scale: Rational::one(),
        value_scale: Rational::one(),
        gate_eps: gate_eps.to_vec(),
        eps_prime: eps_prime.clone(),
    };
    Ok(Encoding { instance, meta })
}

/// Maps the domain onto `[0, 1]` and multiplies values by the node count,
/// so the instance tolerance becomes `N * eps'`.
pub fn rescale(enc: &Encoding) -> Result<Encoding, ReductionError> {
    let nodes = enc.meta.total_nodes() as i64;
    let len = enc.instance.domain().length();
    let factor = len.recip();
    let offset = -(enc.instance.domain().lo() * &factor);
    let value = int(nodes);
    let agents = enc
        .instance
        .agents()
        .iter()
        .map(|a| a.transformed(&offset, &factor, &value))
        .collect();
    let instance = CHInstance::new(Domain::new(int(0), int(1))?, agents)?;
    let meta = ReductionMeta {
        offset: &offset + &factor * &enc.meta.offset,
        coord_scale: &factor * &enc.meta.coord_scale,
        value_scale: &value * &enc.meta.value_scale,
        ..enc.meta.clone()
    };
    Ok(Encoding { instance, meta })
}

/// `k + 1` disjoint copies of the circuit. Any `eps'`-solution with `n + k`
/// cuts leaves some copy with exactly one cut per half-block.
pub fn replicate(c: &GenCircuit, k: usize, eps: &Rational, eps_prime: &Rational) -> Result<Encoding, ReductionError> {
    check_circuit(c)?;
    let n = c.num_nodes;
    let copies = k + 1;
    let mut gates = Vec::with_capacity(c.gates.len() * copies);
    for r in 0..copies {
        for g in &c.gates {
            let mut h = g.clone();
            h.inputs.iter_mut().for_each(|v| *v += r * n);
            h.out += r * n;
            gates.push(h);
        }
    }
    let mut enc = encode(&GenCircuit::new(n * copies, gates), eps, eps_prime)?;
    enc.meta.num_nodes = n;
    enc.meta.copies = copies;
    enc.meta.gate_eps.truncate(c.gates.len());
    Ok(enc)
}

fn block_cuts(meta: &ReductionMeta, p: &CutPartition) -> Vec<Rational> {
    p.cuts().iter().map(|c| meta.to_block(c)).collect()
}

/// Reads node values from a partition with one cut in each half-block.
pub fn decode(meta: &ReductionMeta, p: &CutPartition) -> Result<Decoded, ReductionError> {
    decode_block_cuts(meta.total_nodes(), &block_cuts(meta, p))
}

fn decode_block_cuts(nodes: usize, cuts: &[Rational]) -> Result<Decoded, ReductionError> {
    let mut halves: Vec<Vec<&Rational>> = vec![Vec::new(); 2 * nodes];
    for c in cuts {
        let h = (c / int(3)).floor().to_integer();
        if let Ok(h) = usize::try_from(h) {
            if h < 2 * nodes {
                halves[h].push(c);
            }
        }
    }
    let mut dec = Decoded { x: Vec::with_capacity(nodes), t_minus: Vec::new(), t_plus: Vec::new() };
    for i in 0..nodes {
        for (h, half) in [(2 * i, "left"), (2 * i + 1, "right")] {
            if halves[h].len() != 1 {
                return Err(ReductionError::CutCount { block: i, half, count: halves[h].len() });
            }
        }
        let tm = halves[2 * i][0] - minus_window(i);
        let tp = halves[2 * i + 1][0] - plus_window(i);
        dec.x.push(clamp_unit(&tm));
        dec.t_minus.push(tm);
        dec.t_plus.push(tp);
    }
    Ok(dec)
}

/// Picks the first copy whose region has at most `2N` cuts and decodes it.
pub fn extract_copy(meta: &ReductionMeta, p: &CutPartition) -> Result<(usize, Decoded), ReductionError> {
    let per = 2 * meta.num_nodes;
    let width = int(6 * meta.num_nodes as i64);
    let cuts = block_cuts(meta, p);
    for r in 0..meta.copies {
        let lo = &width * int(r as i64);
        let hi = &lo + &width;
        let local: Vec<Rational> = cuts
            .iter()
            .filter(|c| **c >= lo && (**c < hi || r + 1 == meta.copies))
            .map(|c| c - &lo)
            .collect();
        if local.len() <= per {
            return Ok((r, decode_block_cuts(meta.num_nodes, &local)?));
        }
    }
    Err(ReductionError::NoCleanCopy(per))
}

/// One failed structural property of a decoded solution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StructureViolation {
    CutCount(String),
    WindowRange { node: usize },
    CopyGap { node: usize },
    GateBound { gate: usize, kind: GateKind },
}

/// Decoded-value bounds each gadget guarantees on an `eps'`-solution.
pub fn gate_bound_violations(c: &GenCircuit, meta: &ReductionMeta, d: &Decoded) -> Vec<StructureViolation> {
    let ep = &meta.eps_prime;
    let one = Rational::one();
    let within = |v: &Rational, target: &Rational, tol: Rational| (v - target).abs() <= tol;
    let mut out = Vec::new();
    for (gi, (g, eps)) in c.gates.iter().zip(&meta.gate_eps).enumerate() {
        let x = &d.x;
        let o = &x[g.out];
        let low = || o <= eps;
        let high = || *o >= &one - eps;
        let tp = |k: usize| &d.t_plus[g.inputs[k]];
        let tm = |k: usize| &d.t_minus[g.inputs[k]];
        let ok = match g.kind {
            GateKind::Constant => within(o, g.alpha.as_ref().unwrap(), int(3) * ep),
            GateKind::Scale | GateKind::Copy => {
                let a = g.alpha.clone().unwrap_or_else(Rational::one);
                let w = min_rat(&(&a + eps), &one);
                let target = &a * &x[g.inputs[0]] + (w - &a) / int(2);
                within(o, &target, int(5) * ep)
            }
            GateKind::Add => {
                if tp(0) + tp(1) < &one - eps + int(4) * ep {
                    within(o, &(&x[g.inputs[0]] + &x[g.inputs[1]]), int(11) * ep)
                } else {
                    high()
                }
            }
            GateKind::Sub => {
                if tp(0) - tm(1) > eps - int(4) * ep {
                    within(o, &(&x[g.inputs[0]] - &x[g.inputs[1]]), int(11) * ep)
                } else {
                    low()
                }
            }
            GateKind::Less => {
                let margin = eps - int(4) * ep;
                let diff = tp(1) - tm(0);
                (diff < margin || high()) && (-diff < margin || low())
            }
            GateKind::Or | GateKind::And => {
                let s = tp(0) + tp(1);
                let centre = if g.kind == GateKind::Or { rat(1, 2) } else { rat(3, 2) };
                (s >= &centre - rat(1, 10) || low()) && (s <= &centre + rat(1, 10) || high())
            }
            GateKind::Not => {
                let t = tm(0);
                (*t >= rat(2, 5) || high()) && (*t <= rat(3, 5) || low())
            }
        };
        if !ok {
            out.push(StructureViolation::GateBound { gate: gi, kind: g.kind });
        }
    }
    out
}

/// All structural properties of an `eps'`-solution of the plain encoding.
pub fn structure_violations(c: &GenCircuit, meta: &ReductionMeta, p: &CutPartition) -> Vec<StructureViolation> {
    let d = match decode(meta, p) {
        Ok(d) => d,
        Err(e) => return vec![StructureViolation::CutCount(e.to_string())],
    };
    let ep = &meta.eps_prime;
    let mut out = Vec::new();
    for i in 0..meta.total_nodes() {
        let tm = &d.t_minus[i];
        if *tm < -ep.clone() || *tm > int(1) + ep {
            out.push(StructureViolation::WindowRange { node: i });
        }
        if (tm - &d.t_plus[i]).abs() > ep / int(2) {
            out.push(StructureViolation::CopyGap { node: i });
        }
    }
    out.extend(gate_bound_violations(c, meta, &d));
    out
}

/// An exact solution for an acyclic circuit: free node `v` gets `t = free[v]`
/// and every other cut is placed where its agent balances exactly.
pub fn exact_witness(c: &GenCircuit, enc: &Encoding, free: &[Option<Rational>]) -> Result<CutPartition, ReductionError> {
    let meta = &enc.meta;
    let inst = &enc.instance;
    let nodes = meta.total_nodes();
    if c.num_nodes != nodes {
        return Err(ReductionError::Parameter("circuit does not match the encoding".into()));
    }
    let order = c.topological_order()?;
    let drivers = c.drivers();
    // block-coordinate cuts, initialised to the centre of each window
    let mut cuts: Vec<Rational> = (0..nodes)
        .flat_map(|i| [minus_window(i) + rat(1, 2), plus_window(i) + rat(1, 2)])
        .collect();
    for v in order {
        let d = ReductionMeta::anchor(v);
        if drivers[v].is_none() {
            let t = free.get(v).cloned().flatten().ok_or(CircuitError::MissingInput(v))?;
            if t.is_negative() || t > int(1) {
                return Err(CircuitError::ValueRange(v).into());
            }
            cuts[2 * v] = minus_window(v) + t;
        } else {
            let agent = ReductionMeta::var_agent(v);
            cuts[2 * v] = balance_in(inst, meta, agent, &cuts, 2 * v, &d, &(&d + int(3)))?;
        }
        let agent = ReductionMeta::copy_agent(v);
        cuts[2 * v + 1] = balance_in(inst, meta, agent, &cuts, 2 * v + 1, &(&d + int(3)), &(&d + int(6)))?;
    }
    let positions = cuts.iter().map(|c| meta.to_instance(c)).collect();
    Ok(CutPartition::new(inst.domain(), positions, Sign::Minus)?)
}

/// Position for cut `slot` in `[lo, hi]` (block coordinates) at which `agent`
/// is exactly balanced, all other cuts fixed. Signs alternate from `-`.
fn balance_in(
    inst: &CHInstance,
    meta: &ReductionMeta,
    agent: usize,
    cuts: &[Rational],
    slot: usize,
    lo: &Rational,
    hi: &Rational,
) -> Result<Rational, ReductionError> {
    let v = &inst.agents()[agent];
    let pos: Vec<Rational> = cuts.iter().map(|c| meta.to_instance(c)).collect();
    let (ilo, ihi) = (meta.to_instance(lo), meta.to_instance(hi));
    // piece left of the slot has sign + when slot is odd
    let left_sign = if slot % 2 == 1 { int(1) } else { int(-1) };
    let mut fixed = Rational::zero();
    let mut start = inst.domain().lo().clone();
    let mut sign = int(-1);
    for (j, c) in pos.iter().enumerate() {
        if j != slot {
            fixed += &sign * v.integrate(&start, c);
        } else {
            // the two pieces around the slot, clipped away from [ilo, ihi]
            fixed += &sign * v.integrate(&start, &ilo);
        }
        if j == slot {
            start = ihi.clone();
        } else {
            start = c.clone();
        }
        sign = -sign;
    }
    fixed += &sign * v.integrate(&start, inst.domain().hi());
    // D(p) = fixed + left_sign * (F(p) - F(ilo)) - left_sign * (F(ihi) - F(p)) = 0
    let f_lo = v.cumulative(&ilo);
    let f_hi = v.cumulative(&ihi);
    let target = (&f_lo + &f_hi - &fixed / &left_sign) / int(2);
    let p = inverse_cumulative(v, &target, &ilo, &ihi).ok_or(ReductionError::Unbalanceable(agent))?;
    Ok(meta.to_block(&p))
}

/// Midpoint of `{p in [lo, hi] : F(p) = target}`, if non-empty.
fn inverse_cumulative(v: &StepValuation, target: &Rational, lo: &Rational, hi: &Rational) -> Option<Rational> {
    if *target < v.cumulative(lo) || *target > v.cumulative(hi) {
        return None;
    }
    let mut points = vec![lo.clone()];
    points.extend(v.breakpoints().iter().filter(|b| lo < *b && *b < hi).cloned());
    points.push(hi.clone());
    let mut first: Option<Rational> = None;
    let mut last: Option<Rational> = None;
    for w in points.windows(2) {
        let (fa, fb) = (v.cumulative(&w[0]), v.cumulative(&w[1]));
        if fa <= *target && *target <= fb {
            let (a, b) = if fa == fb {
                (w[0].clone(), w[1].clone())
            } else {
                let p = &w[0] + (target - &fa) * (&w[1] - &w[0]) / (&fb - &fa);
                (p.clone(), p)
            };
            if first.is_none() {
                first = Some(a);
            }
            last = Some(b);
        }
    }
    Some((first? + last?) / int(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;

    fn eps() -> Rational {
        rat(1, 5)
    }

    fn eps_prime() -> Rational {
        rat(1, 110)
    }

    #[test]
    fn block_layout_single_node() {
        let c = GenCircuit::new(1, vec![]);
        let enc = encode(&c, &eps(), &eps_prime()).unwrap();
        assert_eq!(enc.instance.num_agents(), 2);
        assert_eq!(enc.instance.domain().hi(), &int(6));
        let var = &enc.instance.agents()[0];
        assert_eq!(var.total_mass(), int(8));
        let copy = &enc.instance.agents()[1];
        assert_eq!(copy.total_mass(), int(10));
        assert_eq!(enc.instance.bound(), &int(4));
    }

    #[test]
    fn rejects_large_eps_prime_and_bad_circuits() {
        let c = GenCircuit::new(1, vec![]);
        assert!(matches!(encode(&c, &eps(), &rat(1, 50)), Err(ReductionError::Parameter(_))));
        let bad = GenCircuit::new(1, vec![Gate::unary(GateKind::Copy, 0, 0)]);
        assert!(matches!(encode(&bad, &eps(), &eps_prime()), Err(ReductionError::Circuit(_))));
    }

    #[test]
    fn constant_gate_witness_decodes_alpha() {
        let c = GenCircuit::new(1, vec![Gate::constant(rat(3, 10), 0)]);
        let enc = encode(&c, &eps(), &eps_prime()).unwrap();
        let p = exact_witness(&c, &enc, &[None]).unwrap();
        assert_eq!(p.cuts(), &[rat(13, 10), rat(43, 10)]);
        assert!(enc.instance.is_eps_solution(&p, &int(0)));
        let d = decode(&enc.meta, &p).unwrap();
        assert_eq!(d.x, vec![rat(3, 10)]);
        assert!(structure_violations(&c, &enc.meta, &p).is_empty());
    }

    #[test]
    fn gadget_balance_points() {
        let e = eps();
        // (kind, alpha, inputs t, expected t_out)
        let cases: Vec<(GateKind, Option<Rational>, Vec<Rational>, Rational)> = vec![
            (GateKind::Scale, Some(rat(1, 2)), vec![rat(1, 2)], rat(1, 4) + &e / int(2)),
            (GateKind::Copy, None, vec![rat(2, 7)], rat(2, 7)),
            (GateKind::Add, None, vec![rat(1, 5), rat(3, 10)], rat(1, 2)),
            (GateKind::Sub, None, vec![rat(7, 10), rat(1, 5)], rat(1, 2)),
            (GateKind::Not, None, vec![int(1)], int(0)),
            (GateKind::Not, None, vec![int(0)], int(1)),
            (GateKind::Less, None, vec![rat(1, 5), rat(4, 5)], int(1) - &e + &e * rat(3, 5)),
            (GateKind::Less, None, vec![rat(4, 5), rat(1, 5)], &e * rat(2, 5)),
            (GateKind::And, None, vec![int(1), int(1)], int(1)),
            (GateKind::Or, None, vec![int(0), int(0)], int(0)),
        ];
        for (kind, alpha, ins, expected) in cases {
            let n = ins.len() + 1;
            let inputs: Vec<usize> = (0..ins.len()).collect();
            let gate = Gate { kind, inputs, out: ins.len(), alpha };
            let c = GenCircuit::new(n, vec![gate]);
            let enc = encode(&c, &e, &eps_prime()).unwrap();
            let mut free: Vec<Option<Rational>> = ins.iter().cloned().map(Some).collect();
            free.push(None);
            let p = exact_witness(&c, &enc, &free).unwrap();
            assert!(enc.instance.is_eps_solution(&p, &int(0)), "{kind}");
            let d = decode(&enc.meta, &p).unwrap();
            assert_eq!(d.t_minus[ins.len()], expected, "{kind}");
            assert_eq!(d.t_plus[ins.len()], expected, "{kind}");
        }
    }

    #[test]
    fn decode_requires_one_cut_per_half_block() {
        let c = GenCircuit::new(2, vec![]);
        let enc = encode(&c, &eps(), &eps_prime()).unwrap();
        let p = CutPartition::new(enc.instance.domain(), vec![rat(3, 2), rat(9, 2), rat(15, 2)], Sign::Minus).unwrap();
        assert_eq!(
            decode(&enc.meta, &p),
            Err(ReductionError::CutCount { block: 1, half: "right", count: 0 })
        );
    }

    #[test]
    fn rescaled_instance_keeps_solutions() {
        let c = GenCircuit::new(2, vec![Gate::constant(rat(1, 2), 0), Gate::unary(GateKind::Not, 0, 1)]);
        let enc = encode(&c, &eps(), &eps_prime()).unwrap();
        let scaled = rescale(&enc).unwrap();
        assert_eq!(scaled.instance.domain().hi(), &int(1));
        assert_eq!(scaled.meta.value_scale, int(2));
        for (a, b) in enc.instance.agents().iter().zip(scaled.instance.agents()) {
            assert_eq!(a.total_mass() * int(2), b.total_mass());
        }
        let p = exact_witness(&c, &scaled, &[None, None]).unwrap();
        assert!(scaled.instance.is_eps_solution(&p, &int(0)));
        let q = exact_witness(&c, &enc, &[None, None]).unwrap();
        assert_eq!(decode(&scaled.meta, &p).unwrap(), decode(&enc.meta, &q).unwrap());
    }

    #[test]
    fn extractor_skips_crowded_copy() {
        let c = GenCircuit::new(1, vec![Gate::constant(rat(1, 4), 0)]);
        let enc = replicate(&c, 1, &eps(), &eps_prime()).unwrap();
        assert_eq!(enc.instance.num_agents(), 4);
        // copy 0 gets an extra cut, copy 1 is clean
        let cuts = vec![rat(1, 2), rat(5, 4), rat(17, 4), rat(29, 4), rat(41, 4)];
        let p = CutPartition::new(enc.instance.domain(), cuts, Sign::Minus).unwrap();
        let (r, d) = extract_copy(&enc.meta, &p).unwrap();
        assert_eq!(r, 1);
        assert_eq!(d.x, vec![rat(1, 4)]);
    }
}
