use super::label::{vertex_to_partition, ChLabeller, Labeller, VertexLabel};
use super::leaf::{LeafGraph, NodeKind};
use super::triangulation::{Simplex, Triangulation, Vertex};
use super::TuckerError;
use crate::halving::{CHInstance, CutPartition};
use crate::rational::{ceil_to_i64, Rational};
use num_bigint::BigInt;
use rayon::prelude::*;
use std::fmt;

/// How a search ended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WalkOutcome {
    /// Adjacent vertices with opposite labels, `z < z'`.
    Edge(Vertex, Vertex),
    /// A vertex whose discrepancies all vanish.
    Solution(Vertex),
    /// A vertex accepted by the caller's stop test.
    Stopped(Vertex),
}

impl WalkOutcome {
    /// The vertices worth reporting, best candidate first.
    pub fn vertices(&self) -> Vec<&Vertex> {
        match self {
            WalkOutcome::Edge(a, b) => vec![a, b],
            WalkOutcome::Solution(z) | WalkOutcome::Stopped(z) => vec![z],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub step: usize,
    pub simplex: Simplex,
    pub labels: Vec<i32>,
    pub carrier: (usize, i32),
    pub kind: NodeKind,
}

impl fmt::Display for TraceStep {
    /// `step <n> kind <k> carrier <d><sign> labels l,... simplex z;z;...` with
    /// vertex coordinates comma separated.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            NodeKind::AgreeableFacet => "facet",
            NodeKind::AlmostAlternating => "almost",
            NodeKind::Alternating => "alternating",
            NodeKind::Terminal => "terminal",
        };
        let join = |v: &[i32]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let labels = join(&self.labels);
        let simplex = self.simplex.iter().map(|z| join(z)).collect::<Vec<_>>().join(";");
        let sign = if self.carrier.1 < 0 { '-' } else { '+' };
        write!(f, "step {} kind {} carrier {}{} labels {} simplex {}", self.step, kind, self.carrier.0, sign, labels, simplex)
    }
}

#[derive(Debug, Clone)]
pub struct WalkOptions {
    pub max_steps: usize,
    pub record_trace: bool,
}

impl Default for WalkOptions {
    fn default() -> Self {
        Self { max_steps: 50_000_000, record_trace: false }
    }
}

#[derive(Debug, Clone)]
pub struct WalkResult {
    pub outcome: WalkOutcome,
    /// Graph edges traversed.
    pub steps: usize,
    pub labelled_vertices: usize,
    pub trace: Vec<TraceStep>,
}

/// Follows the path of the Leaf graph from the pole `g e_0`.
///
/// `stop` is consulted on each vertex the first time it enters the path; a
/// `true` answer ends the walk early.
pub fn walk<L, S>(tri: Triangulation, labeller: &L, opts: &WalkOptions, mut stop: S) -> Result<WalkResult, TuckerError>
where
    L: Labeller + ?Sized,
    S: FnMut(&[i32]) -> bool,
{
    let graph = LeafGraph::new(tri, labeller);
    let pole = tri.pole();
    let mut antipole = pole.clone();
    antipole[0] = -tri.g;
    let mut prev: Option<Simplex> = None;
    let mut cur: Simplex = vec![pole.clone()];
    let mut fresh: Vec<Vertex> = vec![pole];
    let mut trace = Vec::new();
    let mut steps = 0usize;
    loop {
        for z in &fresh {
            if graph.vertex_label(z) == VertexLabel::Solution {
                return Ok(done(WalkOutcome::Solution(z.clone()), steps, &graph, trace));
            }
            if stop(z) {
                return Ok(done(WalkOutcome::Stopped(z.clone()), steps, &graph, trace));
            }
        }
        let (kind, nbrs) = graph.inspect(&cur);
        let kind = kind.ok_or_else(|| TuckerError::Invariant(format!("walk left the graph at {cur:?}")))?;
        if opts.record_trace {
            trace.push(TraceStep {
                step: steps,
                simplex: cur.clone(),
                labels: graph.simplex_labels(&cur),
                carrier: Triangulation::carrier(&cur),
                kind,
            });
        }
        if let Some((a, b)) = graph.complementary_edge(&cur) {
            return Ok(done(WalkOutcome::Edge(a, b), steps, &graph, trace));
        }
        if nbrs.len() > 2 {
            return Err(TuckerError::Invariant(format!("node {cur:?} has degree {}", nbrs.len())));
        }
        let next = nbrs.into_iter().find(|s| Some(s) != prev.as_ref());
        let Some(next) = next else {
            if cur == [antipole.clone()] {
                return Err(TuckerError::Invariant("walk reached the antipodal pole".into()));
            }
            return Err(TuckerError::Invariant(format!("dead end at {cur:?}")));
        };
        steps += 1;
        if steps > opts.max_steps {
            return Err(TuckerError::StepLimit(opts.max_steps));
        }
        fresh = next.iter().filter(|z| !cur.contains(z)).cloned().collect();
        prev = Some(std::mem::replace(&mut cur, next));
    }
}

fn done<L: Labeller + ?Sized>(outcome: WalkOutcome, steps: usize, g: &LeafGraph<'_, L>, trace: Vec<TraceStep>) -> WalkResult {
    WalkResult { outcome, steps, labelled_vertices: g.labelled_vertices(), trace }
}

/// Exhaustive search: the lexicographically first exact-solution vertex if one
/// exists, otherwise the lexicographically first complementary edge.
pub fn find_complementary_edge<L: Labeller + ?Sized>(tri: Triangulation, labeller: &L) -> Result<WalkOutcome, TuckerError> {
    let verts = tri.vertices();
    let labels: Vec<VertexLabel> = verts.par_iter().map(|z| labeller.label(z)).collect();
    if let Some(i) = labels.iter().position(|l| *l == VertexLabel::Solution) {
        return Ok(WalkOutcome::Solution(verts[i].clone()));
    }
    let lab = |z: &Vertex| -> i32 {
        let i = verts.binary_search(z).expect("neighbour is a vertex");
        match labels[i] {
            VertexLabel::Label(l) => l,
            VertexLabel::Solution => 0,
        }
    };
    verts
        .par_iter()
        .enumerate()
        .find_map_first(|(i, z)| {
            let l = match labels[i] {
                VertexLabel::Label(l) => l,
                VertexLabel::Solution => return None,
            };
            tri.neighbours(z).into_iter().find(|w| w > z && lab(w) == -l).map(|w| WalkOutcome::Edge(z.clone(), w))
        })
        .ok_or(TuckerError::NoEdge)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Exhaustive when the triangulation has at most `EXHAUSTIVE_LIMIT` vertices.
    Auto,
    Walk,
    Exhaustive,
}

/// Vertex count up to which `Strategy::Auto` searches exhaustively.
pub const EXHAUSTIVE_LIMIT: u128 = 200_000;

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub strategy: Strategy,
    /// Try coarser grids first, doubling towards the guaranteed one, and stop
    /// as soon as a vertex verifies.
    pub adaptive: bool,
    /// Overrides the guaranteed grid size.
    pub grid: Option<i32>,
    pub walk: WalkOptions,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { strategy: Strategy::Auto, adaptive: true, grid: None, walk: WalkOptions::default() }
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub partition: CutPartition,
    pub max_discrepancy: Rational,
    /// Grid size of the successful attempt.
    pub grid: i32,
    /// Grid size meeting the mesh bound.
    pub guaranteed_grid: i32,
    pub strategy: Strategy,
    pub outcome: WalkOutcome,
    pub vertex: Vertex,
    /// Walk length, when the walk was used.
    pub steps: Option<usize>,
    pub attempts: Vec<i32>,
    pub trace: Vec<TraceStep>,
}

/// Smallest `g` with `n * L * M / g <= eps / 2`, `M` the largest density.
pub fn guaranteed_grid(inst: &CHInstance, eps: &Rational) -> Result<i32, TuckerError> {
    if *eps <= Rational::from_integer(BigInt::from(0)) {
        return Err(TuckerError::Parameter("eps must be positive".into()));
    }
    let n = Rational::from_integer(BigInt::from(inst.num_agents().max(1) as u64));
    let two = Rational::from_integer(BigInt::from(2));
    let g = ceil_to_i64(&(two * n * inst.domain().length() * inst.max_density() / eps))
        .ok_or_else(|| TuckerError::Parameter("grid size overflows".into()))?
        .max(1);
    i32::try_from(g).map_err(|_| TuckerError::Parameter(format!("grid size {g} too large")))
}

/// An `eps`-approximate partition with at most `n` cuts.
pub fn solve(inst: &CHInstance, eps: &Rational, opts: &SolveOptions) -> Result<SolveReport, TuckerError> {
    let n = inst.num_agents();
    let target = match opts.grid {
        Some(g) if g >= 1 => g,
        Some(g) => return Err(TuckerError::Parameter(format!("grid size {g} must be positive"))),
        None => guaranteed_grid(inst, eps)?,
    };
    let guaranteed = guaranteed_grid(inst, eps)?;
    if n == 0 {
        let partition = CutPartition::whole(crate::halving::Sign::Plus);
        return Ok(SolveReport {
            partition,
            max_discrepancy: Rational::from_integer(BigInt::from(0)),
            grid: 1,
            guaranteed_grid: guaranteed,
            strategy: opts.strategy,
            outcome: WalkOutcome::Solution(vec![1]),
            vertex: vec![1],
            steps: None,
            attempts: vec![],
            trace: vec![],
        });
    }
    let mut schedule = vec![target];
    if opts.adaptive {
        let mut g = target;
        while g > 2 {
            g = (g + 1) / 2;
            schedule.push(g);
        }
        schedule.reverse();
    }
    let mut attempts = Vec::new();
    for (i, &g) in schedule.iter().enumerate() {
        let last = i + 1 == schedule.len();
        attempts.push(g);
        let tri = Triangulation::new(n, g);
        let lab = ChLabeller::new(inst, g)?;
        let threshold = lab.evaluator().threshold(eps)?;
        let strategy = match opts.strategy {
            Strategy::Auto if tri.vertex_count() <= EXHAUSTIVE_LIMIT => Strategy::Exhaustive,
            Strategy::Auto => Strategy::Walk,
            s => s,
        };
        let (outcome, steps, trace) = match strategy {
            Strategy::Exhaustive => (find_complementary_edge(tri, &lab)?, None, Vec::new()),
            _ => {
                let r = walk(tri, &lab, &opts.walk, |z| lab.max_abs(z) <= threshold)?;
                (r.outcome, Some(r.steps), r.trace)
            }
        };
        let best = outcome.vertices().into_iter().min_by_key(|z| lab.max_abs(z)).expect("outcome has a vertex").clone();
        let within = lab.max_abs(&best) <= threshold;
        if within || last {
            let partition = vertex_to_partition(inst, g, &best)?;
            let max_discrepancy = inst.max_discrepancy(&partition);
            debug_assert_eq!(max_discrepancy, lab.max_abs_rational(&best));
            if !within && g >= guaranteed {
                return Err(TuckerError::Invariant(format!(
                    "complementary edge at grid {g} misses eps: discrepancy {max_discrepancy}"
                )));
            }
            return Ok(SolveReport {
                partition,
                max_discrepancy,
                grid: g,
                guaranteed_grid: guaranteed,
                strategy,
                outcome,
                vertex: best,
                steps,
                attempts,
                trace,
            });
        }
    }
    unreachable!("schedule is never empty")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::halving::{Domain, StepValuation};
    use crate::rational::{int, rat};
    use num_traits::Signed;
    use std::collections::{BTreeMap, BTreeSet};

    fn hash(z: &[i32], seed: u64) -> u64 {
        let mut h = seed ^ 0x9e37_79b9_7f4a_7c15;
        for &v in z {
            h = (h ^ v as u64).wrapping_mul(0x1000_0000_01b3).rotate_left(17);
        }
        h
    }

    /// A pseudo-random antipodal labelling.
    fn random_labels(n: usize, seed: u64) -> (usize, impl Fn(&[i32]) -> VertexLabel + Sync) {
        (n, move |z: &[i32]| {
            let s = z.iter().find(|&&v| v != 0).map_or(1, |v| v.signum());
            let canon: Vec<i32> = z.iter().map(|v| v * s).collect();
            let l = (hash(&canon, seed) % (2 * n as u64)) as i32;
            let l = if l < n as i32 { l + 1 } else { -(l - n as i32 + 1) };
            VertexLabel::Label(l * s)
        })
    }

    fn check_graph<L: Labeller>(tri: Triangulation, lab: &L) -> (usize, usize) {
        let g = LeafGraph::new(tri, lab);
        let mut adj: BTreeMap<Simplex, Vec<Simplex>> = BTreeMap::new();
        for layer in g.all_simplices() {
            for s in layer {
                if g.node_kind(&s).is_some() {
                    let nb = g.neighbours(&s);
                    assert!(nb.len() <= 2, "{s:?} has degree {}", nb.len());
                    adj.insert(s, nb);
                }
            }
        }
        for (s, nb) in &adj {
            for t in nb {
                assert!(adj.get(t).is_some_and(|b| b.contains(s)), "{s:?} -> {t:?} not symmetric");
            }
        }
        let ones = adj.values().filter(|v| v.len() == 1).count();
        assert_eq!(ones % 2, 0);
        (adj.len(), ones)
    }

    #[test]
    fn graph_degrees_on_random_labellings() {
        for n in 1..=3 {
            for g in 1..=(if n == 3 { 4 } else { 6 }) {
                for seed in 0..6 {
                    let lab = random_labels(n, seed);
                    let tri = Triangulation::new(n, g);
                    let (nodes, _) = check_graph(tri, &lab);
                    let r = walk(tri, &lab, &WalkOptions::default(), |_| false).unwrap();
                    assert!(r.steps <= nodes);
                    let WalkOutcome::Edge(a, b) = r.outcome else { panic!("no edge") };
                    assert!(tri.adjacent(&a, &b));
                    assert_eq!(lab.label(&a), match lab.label(&b) {
                        VertexLabel::Label(l) => VertexLabel::Label(-l),
                        s => s,
                    });
                }
            }
        }
    }

    fn uniform(n: usize) -> CHInstance {
        let d = Domain::new(int(0), int(1)).unwrap();
        let a = StepValuation::new(vec![int(0), int(1)], vec![int(1)]).unwrap();
        CHInstance::new(d, vec![a; n]).unwrap()
    }

    #[test]
    fn uniform_agent_exhaustive_g4() {
        let inst = uniform(1);
        let tri = Triangulation::new(1, 4);
        let lab = ChLabeller::new(&inst, 4).unwrap();
        let out = find_complementary_edge(tri, &lab).unwrap();
        let z = out.vertices()[0].clone();
        let p = vertex_to_partition(&inst, 4, &z).unwrap();
        assert!(p.cuts().iter().all(|c| (c - rat(1, 2)).abs() <= rat(1, 4)));
    }

    #[test]
    fn synthetic_hemisphere_labelling_gives_equator_edge() {
        let tri = Triangulation::new(1, 6);
        let lab = (1usize, |z: &[i32]| {
            let up = z[1] > 0 || (z[1] == 0 && z[0] > 0);
            VertexLabel::Label(if up { 1 } else { -1 })
        });
        let WalkOutcome::Edge(a, b) = find_complementary_edge(tri, &lab).unwrap() else { panic!() };
        assert!(a[1] == 0 || b[1] == 0);
        let r = walk(tri, &lab, &WalkOptions::default(), |_| false).unwrap();
        let WalkOutcome::Edge(a, b) = r.outcome else { panic!() };
        assert!(a[1] == 0 || b[1] == 0);
    }

    #[test]
    fn walk_and_exhaustive_both_verify_two_agents() {
        let inst = uniform(2);
        let tri = Triangulation::new(2, 8);
        let lab = ChLabeller::new(&inst, 8).unwrap();
        let label = |z: &[i32]| match lab.label(z) {
            VertexLabel::Label(l) => l,
            VertexLabel::Solution => 0,
        };
        for out in [find_complementary_edge(tri, &lab).unwrap(), walk(tri, &lab, &WalkOptions::default(), |_| false).unwrap().outcome] {
            match out {
                WalkOutcome::Edge(a, b) => assert_eq!(label(&a), -label(&b)),
                WalkOutcome::Solution(z) => assert_eq!(lab.max_abs(&z), 0),
                WalkOutcome::Stopped(_) => unreachable!(),
            }
        }
    }

    #[test]
    fn exhaustive_walk_endpoint_is_an_edge_of_the_full_set() {
        let tri = Triangulation::new(1, 4);
        let lab = random_labels(1, 3);
        let mut edges = BTreeSet::new();
        for z in tri.vertices() {
            for w in tri.neighbours(&z) {
                if w > z && lab.label(&z) != lab.label(&w) {
                    edges.insert((z.clone(), w));
                }
            }
        }
        let WalkOutcome::Edge(a, b) = walk(tri, &lab, &WalkOptions::default(), |_| false).unwrap().outcome else { panic!() };
        assert!(edges.contains(&(a.clone().min(b.clone()), a.max(b))));
    }

    #[test]
    fn solve_uniform_one_agent() {
        let inst = uniform(1);
        let eps = rat(1, 10);
        assert_eq!(guaranteed_grid(&inst, &eps).unwrap(), 20);
        for strategy in [Strategy::Exhaustive, Strategy::Walk] {
            let opts = SolveOptions { strategy, adaptive: false, ..Default::default() };
            let r = solve(&inst, &eps, &opts).unwrap();
            assert!(r.max_discrepancy <= eps);
            assert!(r.partition.cuts().iter().all(|c| *c >= rat(45, 100) && *c <= rat(55, 100)));
        }
    }

    #[test]
    fn solve_disjoint_blocks() {
        let d = Domain::new(int(0), int(2)).unwrap();
        let a = StepValuation::new(vec![int(0), int(1)], vec![int(1)]).unwrap();
        let b = StepValuation::new(vec![int(1), int(2)], vec![int(1)]).unwrap();
        let inst = CHInstance::new(d, vec![a, b]).unwrap();
        let eps = rat(1, 10);
        let r = solve(&inst, &eps, &SolveOptions::default()).unwrap();
        assert!(r.max_discrepancy <= eps);
        assert_eq!(r.partition.num_cuts(), 2);
    }

    #[test]
    fn trace_lines_are_parseable() {
        let inst = uniform(2);
        let lab = ChLabeller::new(&inst, 5).unwrap();
        let opts = WalkOptions { record_trace: true, ..Default::default() };
        let r = walk(Triangulation::new(2, 5), &lab, &opts, |_| false).unwrap();
        assert_eq!(r.trace.len(), r.steps + 1);
        assert!(r.trace[0].to_string().starts_with("step 0 kind alternating carrier 0+"));
    }
}
