//! Generalized circuits: nodes carry values in `[0, 1]`, gates constrain them
//! up to an additive tolerance.

use crate::rational::{max_rat, min_rat, Rational};
use num_traits::{One, Zero};
use std::collections::VecDeque;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateKind {
    /// `x_out = alpha`
    Constant,
    /// `x_out = alpha * x_in`
    Scale,
    /// `x_out = x_in`
    Copy,
    /// `x_out = min(x_1 + x_2, 1)`
    Add,
    /// `x_out = max(x_1 - x_2, 0)`
    Sub,
    /// `x_out = 1` if `x_1 < x_2`, `0` if `x_1 > x_2` (beyond the tolerance)
    Less,
    Or,
    And,
    Not,
}

impl GateKind {
    pub const ALL: [GateKind; 9] = [
        GateKind::Constant,
        GateKind::Scale,
        GateKind::Copy,
        GateKind::Add,
        GateKind::Sub,
        GateKind::Less,
        GateKind::Or,
        GateKind::And,
        GateKind::Not,
    ];

    pub fn arity(self) -> usize {
        match self {
            GateKind::Constant => 0,
            GateKind::Scale | GateKind::Copy | GateKind::Not => 1,
            _ => 2,
        }
    }

    pub fn has_alpha(self) -> bool {
        matches!(self, GateKind::Constant | GateKind::Scale)
    }

    pub fn is_logic(self) -> bool {
        matches!(self, GateKind::Or | GateKind::And | GateKind::Not)
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Constant => "const",
            GateKind::Scale => "scale",
            GateKind::Copy => "copy",
            GateKind::Add => "add",
            GateKind::Sub => "sub",
            GateKind::Less => "less",
            GateKind::Or => "or",
            GateKind::And => "and",
            GateKind::Not => "not",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        GateKind::ALL.into_iter().find(|k| k.name() == name)
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Gate {
    pub kind: GateKind,
    pub inputs: Vec<usize>,
    pub out: usize,
    pub alpha: Option<Rational>,
}

impl Gate {
    pub fn constant(alpha: Rational, out: usize) -> Self {
        Self { kind: GateKind::Constant, inputs: vec![], out, alpha: Some(alpha) }
    }

    pub fn scale(alpha: Rational, input: usize, out: usize) -> Self {
        Self { kind: GateKind::Scale, inputs: vec![input], out, alpha: Some(alpha) }
    }

    pub fn unary(kind: GateKind, input: usize, out: usize) -> Self {
        Self { kind, inputs: vec![input], out, alpha: None }
    }

    pub fn binary(kind: GateKind, a: usize, b: usize, out: usize) -> Self {
        Self { kind, inputs: vec![a, b], out, alpha: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Violation {
    NodeOutOfRange { gate: usize, node: usize },
    DuplicateOutput { node: usize, gates: (usize, usize) },
    Arity { gate: usize, expected: usize, got: usize },
    MissingAlpha { gate: usize },
    UnexpectedAlpha { gate: usize },
    AlphaRange { gate: usize },
    NonDistinct { gate: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NodeOutOfRange { gate, node } => write!(f, "gate {gate}: node {node} out of range"),
            Violation::DuplicateOutput { node, gates } => {
                write!(f, "duplicate output: node {node} driven by gates {} and {}", gates.0, gates.1)
            }
            Violation::Arity { gate, expected, got } => {
                write!(f, "gate {gate}: expected {expected} inputs, got {got}")
            }
            Violation::MissingAlpha { gate } => write!(f, "gate {gate}: missing alpha"),
            Violation::UnexpectedAlpha { gate } => write!(f, "gate {gate}: alpha not allowed"),
            Violation::AlphaRange { gate } => write!(f, "gate {gate}: alpha out of range"),
            Violation::NonDistinct { gate } => write!(f, "gate {gate}: non-distinct in/out nodes"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CircuitError {
    #[error("circuit is malformed: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("value vector has {got} entries, circuit has {expected} nodes")]
    Dimension { expected: usize, got: usize },
    #[error("value of node {0} lies outside [0, 1]")]
    ValueRange(usize),
    #[error("circuit contains a cycle through node {0}")]
    Cyclic(usize),
    #[error("input node {0} has no value")]
    MissingInput(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GenCircuit {
    pub num_nodes: usize,
    pub gates: Vec<Gate>,
}

impl GenCircuit {
    pub fn new(num_nodes: usize, gates: Vec<Gate>) -> Self {
        Self { num_nodes, gates }
    }

    /// Every structural problem, in gate order. Empty means well-formed.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut driver: Vec<Option<usize>> = vec![None; self.num_nodes];
        for (gi, g) in self.gates.iter().enumerate() {
            if g.inputs.len() != g.kind.arity() {
                out.push(Violation::Arity { gate: gi, expected: g.kind.arity(), got: g.inputs.len() });
            }
            match (&g.alpha, g.kind) {
                (None, GateKind::Constant | GateKind::Scale) => out.push(Violation::MissingAlpha { gate: gi }),
                (Some(_), k) if !k.has_alpha() => out.push(Violation::UnexpectedAlpha { gate: gi }),
                (Some(a), GateKind::Constant) if *a < Rational::zero() || *a > Rational::one() => {
                    out.push(Violation::AlphaRange { gate: gi })
                }
                (Some(a), GateKind::Scale) if *a <= Rational::zero() || *a > Rational::one() => {
                    out.push(Violation::AlphaRange { gate: gi })
                }
                _ => {}
            }
            let mut nodes = g.inputs.clone();
            nodes.push(g.out);
            for &v in &nodes {
                if v >= self.num_nodes {
                    out.push(Violation::NodeOutOfRange { gate: gi, node: v });
                }
            }
            let mut sorted = nodes.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != nodes.len() {
                out.push(Violation::NonDistinct { gate: gi });
            }
            if g.out < self.num_nodes {
                match driver[g.out] {
                    Some(prev) => out.push(Violation::DuplicateOutput { node: g.out, gates: (prev, gi) }),
                    None => driver[g.out] = Some(gi),
                }
            }
        }
        out
    }

    /// Structural problems that make gate semantics undefined. Repeated
    /// nodes within a gate are fine here; only the reduction needs them distinct.
    fn check_well_formed(&self) -> Result<(), CircuitError> {
        let bad: Vec<Violation> = self.validate().into_iter().filter(|v| !matches!(v, Violation::NonDistinct { .. })).collect();
        if bad.is_empty() {
            Ok(())
        } else {
            Err(CircuitError::Invalid(bad))
        }
    }

    /// Gate index driving each node, if any.
    pub fn drivers(&self) -> Vec<Option<usize>> {
        let mut driver = vec![None; self.num_nodes];
        for (gi, g) in self.gates.iter().enumerate() {
            if g.out < self.num_nodes && driver[g.out].is_none() {
                driver[g.out] = Some(gi);
            }
        }
        driver
    }

    /// Nodes that no gate drives.
    pub fn free_nodes(&self) -> Vec<usize> {
        self.drivers()
            .iter()
            .enumerate()
            .filter_map(|(v, d)| d.is_none().then_some(v))
            .collect()
    }

    /// Rewrites every gate so that its nodes are pairwise distinct.
    ///
    /// An offending input `v` is replaced by a fresh copy node fed by a new
    /// `Copy` gate from `v`. Each original node gets at most two copies, shared
    /// between gates, so at most `2N` nodes and gates are added.
    pub fn distinctify(&self) -> GenCircuit {
        let mut num_nodes = self.num_nodes;
        let mut copies: Vec<[Option<usize>; 2]> = vec![[None; 2]; self.num_nodes];
        let mut extra = Vec::new();
        let mut gates = Vec::with_capacity(self.gates.len());
        for g in &self.gates {
            let mut used = vec![g.out];
            let mut inputs = Vec::with_capacity(g.inputs.len());
            for &v in &g.inputs {
                if !used.contains(&v) || v >= self.num_nodes {
                    used.push(v);
                    inputs.push(v);
                    continue;
                }
                let slot = (0..2)
                    .find(|&s| copies[v][s].map_or(true, |c| !used.contains(&c)))
                    .expect("a gate has at most two inputs");
                let c = *copies[v][slot].get_or_insert_with(|| {
                    num_nodes += 1;
                    extra.push(Gate::unary(GateKind::Copy, v, num_nodes - 1));
                    num_nodes - 1
                });
                used.push(c);
                inputs.push(c);
            }
            gates.push(Gate { kind: g.kind, inputs, out: g.out, alpha: g.alpha.clone() });
        }
        gates.extend(extra);
        GenCircuit { num_nodes, gates }
    }

    /// Indices of gates whose constraint fails at tolerance `eps`.
    pub fn check_solution(&self, x: &[Rational], eps: &Rational) -> Result<Vec<usize>, CircuitError> {
        if x.len() != self.num_nodes {
            return Err(CircuitError::Dimension { expected: self.num_nodes, got: x.len() });
        }
        if let Some(v) = x.iter().position(|v| *v < Rational::zero() || *v > Rational::one()) {
            return Err(CircuitError::ValueRange(v));
        }
        self.check_well_formed()?;
        Ok(self
            .gates
            .iter()
            .enumerate()
            .filter(|(_, g)| !gate_holds(g, x, eps))
            .map(|(i, _)| i)
            .collect())
    }

    /// Propagates exact gate values from the free nodes in topological order.
    ///
    /// `inputs[v]` must be set for every free node and is ignored elsewhere.
    /// Comparison ties output `1`; logic gates read values above `1/2` as true.
    pub fn eval_exact(&self, inputs: &[Option<Rational>]) -> Result<Vec<Rational>, CircuitError> {
        self.check_well_formed()?;
        if inputs.len() != self.num_nodes {
            return Err(CircuitError::Dimension { expected: self.num_nodes, got: inputs.len() });
        }
        let order = self.topological_order()?;
        let driver = self.drivers();
        let mut val: Vec<Option<Rational>> = vec![None; self.num_nodes];
        for v in order {
            val[v] = Some(match driver[v] {
                None => inputs[v].clone().ok_or(CircuitError::MissingInput(v))?,
                Some(gi) => {
                    let g = &self.gates[gi];
                    let ins: Vec<Rational> = g.inputs.iter().map(|&u| val[u].clone().unwrap()).collect();
                    exact_gate(g, &ins)
                }
            });
        }
        Ok(val.into_iter().map(Option::unwrap).collect())
    }

    /// Nodes ordered so that every gate's inputs precede its output.
    pub fn topological_order(&self) -> Result<Vec<usize>, CircuitError> {
        let mut indeg = vec![0usize; self.num_nodes];
        let mut succ: Vec<Vec<usize>> = vec![Vec::new(); self.num_nodes];
        for g in &self.gates {
            for &u in &g.inputs {
                succ[u].push(g.out);
                indeg[g.out] += 1;
            }
        }
        let mut queue: VecDeque<usize> = (0..self.num_nodes).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(self.num_nodes);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &w in &succ[v] {
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    queue.push_back(w);
                }
            }
        }
        if order.len() < self.num_nodes {
            let v = (0..self.num_nodes).find(|&v| indeg[v] > 0).unwrap();
            return Err(CircuitError::Cyclic(v));
        }
        Ok(order)
    }
}

fn near(a: &Rational, b: &Rational, eps: &Rational) -> bool {
    let d = a - b;
    -eps.clone() <= d && d <= *eps
}

fn gate_holds(g: &Gate, x: &[Rational], eps: &Rational) -> bool {
    let out = &x[g.out];
    let one = Rational::one();
    let zero = Rational::zero();
    let i = |k: usize| &x[g.inputs[k]];
    match g.kind {
        GateKind::Constant => near(out, g.alpha.as_ref().unwrap(), eps),
        GateKind::Scale => near(out, &(g.alpha.as_ref().unwrap() * i(0)), eps),
        GateKind::Copy => near(out, i(0), eps),
        GateKind::Add => near(out, &min_rat(&(i(0) + i(1)), &one), eps),
        GateKind::Sub => near(out, &max_rat(&(i(0) - i(1)), &zero), eps),
        GateKind::Less => {
            if *i(0) < i(1) - eps {
                near(out, &one, eps)
            } else if *i(0) > i(1) + eps {
                near(out, &zero, eps)
            } else {
                true
            }
        }
        GateKind::Or | GateKind::And => {
            let hi = |v: &Rational| near(v, &one, eps);
            let lo = |v: &Rational| near(v, &zero, eps);
            let (force_one, force_zero) = if g.kind == GateKind::Or {
                (hi(i(0)) || hi(i(1)), lo(i(0)) && lo(i(1)))
            } else {
                (hi(i(0)) && hi(i(1)), lo(i(0)) || lo(i(1)))
            };
            (!force_one || near(out, &one, eps)) && (!force_zero || near(out, &zero, eps))
        }
        GateKind::Not => {
            (!near(i(0), &zero, eps) || near(out, &one, eps)) && (!near(i(0), &one, eps) || near(out, &zero, eps))
        }
    }
}

fn exact_gate(g: &Gate, ins: &[Rational]) -> Rational {
    let one = Rational::one();
    let zero = Rational::zero();
    let half = Rational::new(1.into(), 2.into());
    let truth = |b: bool| if b { one.clone() } else { zero.clone() };
    match g.kind {
        GateKind::Constant => g.alpha.clone().unwrap(),
        GateKind::Scale => g.alpha.as_ref().unwrap() * &ins[0],
        GateKind::Copy => ins[0].clone(),
        GateKind::Add => min_rat(&(&ins[0] + &ins[1]), &one),
        GateKind::Sub => max_rat(&(&ins[0] - &ins[1]), &zero),
        GateKind::Less => truth(ins[0] <= ins[1]),
        GateKind::Or => truth(ins[0] > half || ins[1] > half),
        GateKind::And => truth(ins[0] > half && ins[1] > half),
        GateKind::Not => truth(ins[0] <= half),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    #[test]
    fn add_truncates_at_one() {
        let c = GenCircuit::new(3, vec![Gate::binary(GateKind::Add, 0, 1, 2)]);
        let x = vec![rat(7, 10), rat(6, 10), rat(95, 100)];
        assert_eq!(c.check_solution(&x, &rat(1, 10)).unwrap(), Vec::<usize>::new());
        let y = vec![rat(7, 10), rat(6, 10), rat(85, 100)];
        assert_eq!(c.check_solution(&y, &rat(1, 10)).unwrap(), vec![0]);
    }

    #[test]
    fn less_is_free_inside_band() {
        let c = GenCircuit::new(3, vec![Gate::binary(GateKind::Less, 0, 1, 2)]);
        let eps = rat(1, 10);
        assert!(c.check_solution(&[rat(1, 2), rat(11, 20), rat(1, 2)], &eps).unwrap().is_empty());
        assert_eq!(c.check_solution(&[rat(1, 5), rat(4, 5), int(0)], &eps).unwrap(), vec![0]);
        assert!(c.check_solution(&[rat(4, 5), rat(1, 5), int(0)], &eps).unwrap().is_empty());
    }

    #[test]
    fn logic_gates_follow_thresholds() {
        let eps = rat(1, 10);
        let or = GenCircuit::new(3, vec![Gate::binary(GateKind::Or, 0, 1, 2)]);
        assert!(or.check_solution(&[rat(19, 20), int(0), rat(9, 10)], &eps).unwrap().is_empty());
        assert_eq!(or.check_solution(&[int(0), rat(1, 20), rat(1, 2)], &eps).unwrap(), vec![0]);
        let not = GenCircuit::new(2, vec![Gate::unary(GateKind::Not, 0, 1)]);
        assert!(not.check_solution(&[rat(1, 2), rat(1, 3)], &eps).unwrap().is_empty());
        assert_eq!(not.check_solution(&[int(1), int(1)], &eps).unwrap(), vec![0]);
        let and = GenCircuit::new(3, vec![Gate::binary(GateKind::And, 0, 1, 2)]);
        assert_eq!(and.check_solution(&[int(1), rat(19, 20), rat(1, 2)], &eps).unwrap(), vec![0]);
    }

    #[test]
    fn validate_reports_each_problem() {
        let c = GenCircuit::new(
            3,
            vec![
                Gate::binary(GateKind::Add, 0, 0, 1),
                Gate::constant(rat(1, 2), 1),
                Gate::scale(int(0), 0, 2),
                Gate::unary(GateKind::Not, 0, 5),
            ],
        );
        let v = c.validate();
        assert!(v.contains(&Violation::NonDistinct { gate: 0 }));
        assert!(v.contains(&Violation::DuplicateOutput { node: 1, gates: (0, 1) }));
        assert!(v.contains(&Violation::AlphaRange { gate: 2 }));
        assert!(v.contains(&Violation::NodeOutOfRange { gate: 3, node: 5 }));
        assert!(v.iter().any(|x| x.to_string().contains("duplicate output")));
        assert!(v.iter().any(|x| x.to_string().contains("non-distinct in/out")));
    }

    #[test]
    fn distinctify_self_loops_add_one_node_each() {
        let k = 4;
        let c = GenCircuit::new(k, (0..k).map(|v| Gate::unary(GateKind::Copy, v, v)).collect());
        let d = c.distinctify();
        assert!(d.validate().is_empty());
        assert_eq!(d.num_nodes, 2 * k);
        assert_eq!(d.gates.len(), 2 * k);
    }

    #[test]
    fn distinctify_repeated_input_uses_copy() {
        let c = GenCircuit::new(2, vec![Gate::binary(GateKind::Add, 0, 0, 1)]);
        let d = c.distinctify();
        assert!(d.validate().is_empty());
        assert_eq!(d.num_nodes, 3);
        assert_eq!(d.gates[0], Gate::binary(GateKind::Add, 0, 2, 1));
        assert_eq!(d.gates[1], Gate::unary(GateKind::Copy, 0, 2));
        let e = GenCircuit::new(1, vec![Gate::binary(GateKind::Add, 0, 0, 0)]).distinctify();
        assert!(e.validate().is_empty());
        assert_eq!(e.num_nodes, 3);
    }

    #[test]
    fn exact_evaluation_min_max_example() {
        // min and max of (x, y) by the subtract/average construction
        let (x, y) = (0usize, 1usize);
        let gates = vec![
            Gate::binary(GateKind::Sub, x, y, 2),
            Gate::binary(GateKind::Sub, y, x, 3),
            Gate::binary(GateKind::Add, 2, 3, 4),
            Gate::scale(rat(1, 2), 4, 5),
            Gate::scale(rat(1, 2), x, 6),
            Gate::scale(rat(1, 2), y, 7),
            Gate::binary(GateKind::Add, 6, 7, 8),
            Gate::binary(GateKind::Sub, 8, 5, 9),
            Gate::binary(GateKind::Add, 8, 5, 10),
        ];
        let c = GenCircuit::new(11, gates);
        let mut inputs = vec![None; 11];
        inputs[x] = Some(rat(3, 10));
        inputs[y] = Some(rat(8, 10));
        let v = c.eval_exact(&inputs).unwrap();
        assert_eq!(v[9], rat(3, 10));
        assert_eq!(v[10], rat(8, 10));
        assert!(c.check_solution(&v, &int(0)).unwrap().is_empty());
    }

    #[test]
    fn eval_exact_rejects_cycles_and_missing_inputs() {
        let cyc = GenCircuit::new(2, vec![Gate::unary(GateKind::Not, 0, 1), Gate::unary(GateKind::Not, 1, 0)]);
        assert!(matches!(cyc.eval_exact(&[None, None]), Err(CircuitError::Cyclic(_))));
        let c = GenCircuit::new(2, vec![Gate::unary(GateKind::Not, 0, 1)]);
        assert_eq!(c.eval_exact(&[None, None]), Err(CircuitError::MissingInput(0)));
        assert_eq!(c.eval_exact(&[Some(rat(1, 2)), None]).unwrap()[1], int(1));
    }

    #[test]
    fn less_tie_outputs_one() {
        let c = GenCircuit::new(3, vec![Gate::binary(GateKind::Less, 0, 1, 2)]);
        let v = c.eval_exact(&[Some(rat(1, 3)), Some(rat(1, 3)), None]).unwrap();
        assert_eq!(v[2], int(1));
    }
}
