#![allow(dead_code)]

use conhalving::circuit::{Gate, GateKind, GenCircuit};
use conhalving::halving::{CHInstance, Domain, StepValuation};
use conhalving::rational::{int, rat, Rational};
use conhalving::sat::CnfFormula;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ALPHAS: [(i64, i64); 6] = [(1, 4), (1, 3), (1, 2), (2, 3), (3, 4), (1, 1)];

fn alpha(rng: &mut ChaCha8Rng) -> Rational {
    let (p, q) = ALPHAS[rng.gen_range(0..ALPHAS.len())];
    rat(p, q)
}

/// A random circuit on `nodes` nodes whose first gate has kind `first`. Every
/// node is driven by at most one gate and no gate reads its own output.
pub fn random_circuit(seed: u64, nodes: usize, first: GateKind) -> GenCircuit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut outs: Vec<usize> = (0..nodes).collect();
    outs.shuffle(&mut rng);
    let driven = rng.gen_range(1..=nodes);
    let mut gates = Vec::new();
    for (j, &out) in outs.iter().take(driven).enumerate() {
        let kind = if j == 0 { first } else { GateKind::ALL[rng.gen_range(0..GateKind::ALL.len())] };
        let others: Vec<usize> = (0..nodes).filter(|&v| v != out).collect();
        let kind = if others.len() < kind.arity() { GateKind::Constant } else { kind };
        debug_assert!(others.len() >= kind.arity());
        let mut pick = || others[rng.gen_range(0..others.len())];
        let gate = match kind.arity() {
            0 => Gate::constant(alpha(&mut rng), out),
            1 if kind == GateKind::Scale => {
                let a = pick();
                Gate::scale(alpha(&mut rng), a, out)
            }
            1 => Gate::unary(kind, pick(), out),
            _ => {
                let a = pick();
                let b = loop {
                    let b = pick();
                    if b != a {
                        break b;
                    }
                };
                Gate::binary(kind, a, b, out)
            }
        };
        gates.push(gate);
    }
    GenCircuit::new(nodes, gates)
}

/// `n` agents on `[0, 1]`, each with up to four pieces on a `1/12` grid and
/// integer densities in `0..=2`. Every agent has positive mass.
pub fn random_instance(seed: u64, n: usize) -> CHInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let domain = Domain::new(int(0), int(1)).unwrap();
    let agents = (0..n)
        .map(|_| loop {
            let pieces = rng.gen_range(1..=4);
            let mut bps: Vec<i64> = (1..12).collect::<Vec<_>>().choose_multiple(&mut rng, pieces - 1).copied().collect();
            bps.push(0);
            bps.push(12);
            bps.sort();
            let dens: Vec<Rational> = (0..pieces).map(|_| int(rng.gen_range(0..=2))).collect();
            if dens.iter().all(|d| d.is_zero()) {
                continue;
            }
            break StepValuation::new(bps.iter().map(|&b| rat(b, 12)).collect(), dens).unwrap();
        })
        .collect();
    CHInstance::new(domain, agents).unwrap()
}

/// A random formula with `k` variables and `m` clauses of 1 to 3 literals.
pub fn random_formula(rng: &mut ChaCha8Rng, k: usize, m: usize) -> CnfFormula {
    let clauses = (0..m)
        .map(|_| {
            let len = rng.gen_range(1..=3);
            (0..len)
                .map(|_| {
                    let v = rng.gen_range(1..=k as i32);
                    if rng.gen_bool(0.5) {
                        v
                    } else {
                        -v
                    }
                })
                .collect()
        })
        .collect();
    CnfFormula::new(k, clauses).unwrap()
}
