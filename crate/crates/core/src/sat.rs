//! NP-hardness construction for `n - 1` cuts: a 3-CNF formula becomes a
//! generalized circuit `Bool -> Phi -> Rebool`, encoded gadget by gadget, plus
//! one agent `u_n` that forces the Rebool output close to 1.
//!
//! The tolerance of the Bool gadgets is `delta = eps / 11`; Phi and Rebool use
//! `4 delta`.

use crate::circuit::{CircuitError, Gate, GateKind, GenCircuit};
use crate::gcircuit::{decode, encode_with_tolerances, exact_witness, Encoding, ReductionError, ReductionMeta};
use crate::halving::{CHInstance, CutPartition, HalvingError, StepValuation};
use crate::rational::{int, rat, Rational};
use num_traits::{One, Signed, Zero};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SatError {
    #[error("formula has no clauses")]
    NoClauses,
    #[error("clause {0} is empty")]
    EmptyClause(usize),
    #[error("clause {clause} has {len} literals, at most 3 are allowed")]
    LongClause { clause: usize, len: usize },
    #[error("literal {literal} in clause {clause} is outside 1..={vars}")]
    BadLiteral { clause: usize, literal: i32, vars: usize },
    #[error("{vars} variables exceed 3 per clause ({clauses} clauses)")]
    TooManyVariables { vars: usize, clauses: usize },
    #[error("assignment has {got} values, formula has {expected} variables")]
    AssignmentLength { expected: usize, got: usize },
    #[error("assignment does not satisfy the formula")]
    Unsatisfied,
    #[error("variable x{var} decodes to {value}, inside the ambiguous band (1/4, 3/4)")]
    DecodeFail { var: usize, value: Rational },
    #[error("parameter out of range: {0}")]
    Parameter(String),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error(transparent)]
    Halving(#[from] HalvingError),
}

impl From<CircuitError> for SatError {
    fn from(e: CircuitError) -> Self {
        SatError::Reduction(e.into())
    }
}

/// A CNF formula over variables `1..=num_vars`; literal `-v` is the negation of `v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfFormula {
    num_vars: usize,
    clauses: Vec<Vec<i32>>,
}

impl CnfFormula {
    pub fn new(num_vars: usize, clauses: Vec<Vec<i32>>) -> Result<Self, SatError> {
        if clauses.is_empty() {
            return Err(SatError::NoClauses);
        }
        for (ci, c) in clauses.iter().enumerate() {
            if c.is_empty() {
                return Err(SatError::EmptyClause(ci));
            }
            if c.len() > 3 {
                return Err(SatError::LongClause { clause: ci, len: c.len() });
            }
            if let Some(&l) = c.iter().find(|l| **l == 0 || l.unsigned_abs() as usize > num_vars) {
                return Err(SatError::BadLiteral { clause: ci, literal: l, vars: num_vars });
            }
        }
        if num_vars == 0 || num_vars > 3 * clauses.len() {
            return Err(SatError::TooManyVariables { vars: num_vars, clauses: clauses.len() });
        }
        Ok(Self { num_vars, clauses })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Vec<i32>] {
        &self.clauses
    }

    pub fn eval(&self, assignment: &[bool]) -> Result<bool, SatError> {
        if assignment.len() != self.num_vars {
            return Err(SatError::AssignmentLength { expected: self.num_vars, got: assignment.len() });
        }
        Ok(self
            .clauses
            .iter()
            .all(|c| c.iter().any(|&l| assignment[l.unsigned_abs() as usize - 1] == (l > 0))))
    }

    /// Every satisfying assignment, in binary counting order (`x1` least significant).
    pub fn satisfying_assignments(&self) -> Vec<Vec<bool>> {
        (0..1u64 << self.num_vars)
            .map(|mask| (0..self.num_vars).map(|i| mask >> i & 1 == 1).collect::<Vec<_>>())
            .filter(|a| self.eval(a).unwrap_or(false))
            .collect()
    }
}

impl fmt::Display for CnfFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let clause = |c: &Vec<i32>| {
            let lits: Vec<String> =
                c.iter().map(|&l| if l > 0 { format!("x{l}") } else { format!("!x{}", -l) }).collect();
            format!("({})", lits.join(" | "))
        };
        let parts: Vec<String> = self.clauses.iter().map(clause).collect();
        write!(f, "{}", parts.join(" & "))
    }
}

/// Emitted node counts per stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeLedger {
    pub inputs: usize,
    pub bool_stage: usize,
    pub phi_stage: usize,
    pub rebool_stage: usize,
}

impl NodeLedger {
    pub fn total(&self) -> usize {
        self.inputs + self.bool_stage + self.phi_stage + self.rebool_stage
    }

    /// Whether the counts respect `4k`, `6m` and `48m`.
    pub fn within_bounds(&self, k: usize, m: usize) -> bool {
        self.bool_stage <= 4 * k && self.phi_stage <= 6 * m && self.rebool_stage <= 48 * m
    }
}

/// A circuit under construction, tagging each gate with its gadget tolerance.
struct Builder {
    nodes: usize,
    gates: Vec<Gate>,
    eps: Vec<Rational>,
}

impl Builder {
    fn node(&mut self) -> usize {
        self.nodes += 1;
        self.nodes - 1
    }

    fn push(&mut self, gate: Gate, eps: &Rational) -> usize {
        let out = gate.out;
        self.gates.push(gate);
        self.eps.push(eps.clone());
        out
    }

    fn constant(&mut self, alpha: Rational, eps: &Rational) -> usize {
        let out = self.node();
        self.push(Gate::constant(alpha, out), eps)
    }

    fn scale(&mut self, alpha: Rational, a: usize, eps: &Rational) -> usize {
        let out = self.node();
        self.push(Gate::scale(alpha, a, out), eps)
    }

    fn unary(&mut self, kind: GateKind, a: usize, eps: &Rational) -> usize {
        let out = self.node();
        self.push(Gate::unary(kind, a, out), eps)
    }

    fn binary(&mut self, kind: GateKind, a: usize, b: usize, eps: &Rational) -> usize {
        let out = self.node();
        self.push(Gate::binary(kind, a, b, out), eps)
    }
}

/// `bool = a + a'` with `a = x - 1/4` and `a' = a`: 4 nodes per variable.
fn bool_stage(b: &mut Builder, inputs: &[usize], eps: &Rational) -> Vec<usize> {
    inputs
        .iter()
        .map(|&x| {
            let q = b.constant(rat(1, 4), eps);
            let a = b.binary(GateKind::Sub, x, q, eps);
            let a2 = b.unary(GateKind::Copy, a, eps);
            b.binary(GateKind::Add, a, a2, eps)
        })
        .collect()
}

/// Shared negations, then `r - 1` ORs per clause of `r` distinct literals, then
/// an AND chain over the distinct clause nodes. Returns the output node.
fn phi_stage(b: &mut Builder, f: &CnfFormula, bools: &[usize], eps: &Rational) -> usize {
    let mut negated: Vec<Option<usize>> = vec![None; bools.len()];
    for c in f.clauses() {
        for &l in c {
            let v = l.unsigned_abs() as usize - 1;
            if l < 0 && negated[v].is_none() {
                negated[v] = Some(b.unary(GateKind::Not, bools[v], eps));
            }
        }
    }
    let mut clause_nodes: Vec<usize> = Vec::new();
    for c in f.clauses() {
        let mut lits: Vec<usize> = Vec::new();
        for &l in c {
            let v = l.unsigned_abs() as usize - 1;
            let node = if l > 0 { bools[v] } else { negated[v].unwrap() };
            if !lits.contains(&node) {
                lits.push(node);
            }
        }
        let mut acc = lits[0];
        for &l in &lits[1..] {
            acc = b.binary(GateKind::Or, acc, l, eps);
        }
        if !clause_nodes.contains(&acc) {
            clause_nodes.push(acc);
        }
    }
    let mut out = clause_nodes[0];
    for &c in &clause_nodes[1..] {
        out = b.binary(GateKind::And, out, c, eps);
    }
    out
}

/// `min(x_out, max(x_1, 1 - x_1), ..., max(x_k, 1 - x_k))` with `min` and
/// `max` computed as `l -+ |x - y| / 2`. For `max(x, 1 - x)` the midpoint
/// `l = 1/2` is a constant node shared by all variables.
fn rebool_stage(b: &mut Builder, inputs: &[usize], x_out: usize, eps: &Rational) -> usize {
    let one = b.constant(Rational::one(), eps);
    let half = b.constant(rat(1, 2), eps);
    let mut maxes = Vec::with_capacity(inputs.len());
    for &x in inputs {
        let y = b.binary(GateKind::Sub, one, x, eps);
        let d = half_gap(b, x, y, eps);
        maxes.push(b.binary(GateKind::Add, half, d, eps));
    }
    let mut acc = x_out;
    for &y in &maxes {
        let d = half_gap(b, acc, y, eps);
        let xh = b.scale(rat(1, 2), acc, eps);
        let yh = b.scale(rat(1, 2), y, eps);
        let l = b.binary(GateKind::Add, xh, yh, eps);
        acc = b.binary(GateKind::Sub, l, d, eps);
    }
    acc
}

/// `(max(x - y, 0) + max(y - x, 0)) / 2`.
fn half_gap(b: &mut Builder, x: usize, y: usize, eps: &Rational) -> usize {
    let a = b.binary(GateKind::Sub, x, y, eps);
    let c = b.binary(GateKind::Sub, y, x, eps);
    let s = b.binary(GateKind::Add, a, c, eps);
    b.scale(rat(1, 2), s, eps)
}

/// The circuit of a formula, its stage node counts, and its interface nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatCircuit {
    pub circuit: GenCircuit,
    pub gate_eps: Vec<Rational>,
    /// Node of `x_i`, one per variable.
    pub inputs: Vec<usize>,
    pub bools: Vec<usize>,
    pub x_out: usize,
    /// Rebool output; always the last node.
    pub out_bool: usize,
    pub ledger: NodeLedger,
}

/// Builds the circuit with Bool tolerance `delta` and `4 delta` elsewhere.
pub fn build_circuit(f: &CnfFormula, delta: &Rational) -> SatCircuit {
    let wide = delta * int(4);
    let mut b = Builder { nodes: 0, gates: Vec::new(), eps: Vec::new() };
    let inputs: Vec<usize> = (0..f.num_vars()).map(|_| b.node()).collect();
    let bools = bool_stage(&mut b, &inputs, delta);
    let after_bool = b.nodes;
    let x_out = phi_stage(&mut b, f, &bools, &wide);
    let after_phi = b.nodes;
    let out_bool = rebool_stage(&mut b, &inputs, x_out, &wide);
    debug_assert_eq!(out_bool + 1, b.nodes);
    let ledger = NodeLedger {
        inputs: inputs.len(),
        bool_stage: after_bool - inputs.len(),
        phi_stage: after_phi - after_bool,
        rebool_stage: b.nodes - after_phi,
    };
    SatCircuit { circuit: GenCircuit::new(b.nodes, b.gates), gate_eps: b.eps, inputs, bools, x_out, out_bool, ledger }
}

/// A formula encoded as a Consensus-Halving instance for `n - 1` cuts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatReduction {
    pub formula: CnfFormula,
    pub sat: SatCircuit,
    /// Encoding of the circuit alone: every agent except `u_n`.
    pub encoding: Encoding,
    /// The full instance: the circuit agents followed by `u_n`.
    pub instance: CHInstance,
    pub delta: Rational,
    /// Read window `[a, b]` of `x_out^bool` in block coordinates.
    pub window: (Rational, Rational),
}

impl SatReduction {
    pub fn meta(&self) -> &ReductionMeta {
        &self.encoding.meta
    }

    pub fn eps_prime(&self) -> &Rational {
        &self.encoding.meta.eps_prime
    }

    /// Index of the extra agent.
    pub fn u_agent(&self) -> usize {
        self.instance.num_agents() - 1
    }

    /// The `n - 1` cuts available to a solution.
    pub fn cut_budget(&self) -> usize {
        self.instance.num_agents() - 1
    }

    /// Lower bound on `x_out^bool` forced by `u_n`: `1 - 18 m eps' - eps'`.
    pub fn output_floor(&self) -> Rational {
        let m = int(self.formula.num_clauses() as i64);
        let ep = self.eps_prime();
        int(1) - int(18) * m * ep - ep
    }
}

/// Encodes `f`. Requires `0 < eps' < min(eps / 11, 1 / (90 m), 1 / 40)` and `eps <= 1/8`
/// so that every gadget tolerance stays at most `1/2`.
pub fn encode_sat(f: &CnfFormula, eps: &Rational, eps_prime: &Rational) -> Result<SatReduction, SatError> {
    let m = f.num_clauses() as i64;
    let delta = eps / int(11);
    if !eps.is_positive() || delta.clone() * int(4) > rat(1, 2) {
        return Err(SatError::Parameter(format!("eps = {eps} must lie in (0, 11/8]")));
    }
    let caps = [delta.clone(), rat(1, 90 * m), rat(1, 40)];
    if !eps_prime.is_positive() || caps.iter().any(|c| eps_prime >= c) {
        return Err(SatError::Parameter(format!(
            "eps' = {eps_prime} must be below min(eps/11, 1/(90m), 1/40) = {}",
            caps.iter().min().unwrap()
        )));
    }
    let sat = build_circuit(f, &delta);
    let encoding = encode_with_tolerances(&sat.circuit, &sat.gate_eps, eps_prime)?;
    let meta = &encoding.meta;
    let a = ReductionMeta::anchor(sat.out_bool) + int(1);
    let b = &a + int(1);
    let shift = int(18) * int(m) * eps_prime;
    let left = (meta.to_instance(&(&b - &shift - int(1))), meta.to_instance(&(&b - &shift)));
    let right = (meta.to_instance(&b), meta.to_instance(&(&b + int(1))));
    let u = StepValuation::from_blocks(&[(left.0, left.1, meta.value_scale.clone()), (right.0, right.1, meta.value_scale.clone())])?;
    let mut agents = encoding.instance.agents().to_vec();
    agents.push(u);
    let instance = CHInstance::new(encoding.instance.domain().clone(), agents)?;
    Ok(SatReduction { formula: f.clone(), sat, encoding, instance, delta, window: (a, b) })
}

/// The partition obtained by fixing the inputs to a satisfying assignment and
/// balancing every circuit agent exactly, gate by gate.
pub fn witness_partition(red: &SatReduction, assignment: &[bool]) -> Result<CutPartition, SatError> {
    if !red.formula.eval(assignment)? {
        return Err(SatError::Unsatisfied);
    }
    let mut free: Vec<Option<Rational>> = vec![None; red.sat.circuit.num_nodes];
    for (&node, &v) in red.sat.inputs.iter().zip(assignment) {
        free[node] = Some(if v { Rational::one() } else { Rational::zero() });
    }
    Ok(exact_witness(&red.sat.circuit, &red.encoding, &free)?)
}

/// Reads the assignment off an `eps'`-solution with `n - 1` cuts.
pub fn decode_assignment(red: &SatReduction, p: &CutPartition) -> Result<Vec<bool>, SatError> {
    let d = decode(red.meta(), p)?;
    let mut out = Vec::with_capacity(red.sat.inputs.len());
    for (i, &node) in red.sat.inputs.iter().enumerate() {
        out.push(round_variable(i + 1, &d.x[node])?);
    }
    if !red.formula.eval(&out)? {
        return Err(SatError::Unsatisfied);
    }
    Ok(out)
}

/// `false` on `[0, 1/4]`, `true` on `[3/4, 1]`.
pub fn round_variable(var: usize, x: &Rational) -> Result<bool, SatError> {
    if *x <= rat(1, 4) {
        Ok(false)
    } else if *x >= rat(3, 4) {
        Ok(true)
    } else {
        Err(SatError::DecodeFail { var, value: x.clone() })
    }
}
