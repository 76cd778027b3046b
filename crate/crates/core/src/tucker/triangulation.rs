use std::collections::BTreeSet;

pub type Vertex = Vec<i32>;

/// Vertices sorted lexicographically.
pub type Simplex = Vec<Vertex>;

/// Centrally symmetric triangulation of the boundary of the `(n+1)`-dimensional
/// cross-polytope with grid size `g`.
///
/// Each closed orthant facet is triangulated through the prefix-sum map
/// `c_k = |z_0| + ... + |z_(k-1)|` (`k = 1..n`), which sends it onto the order
/// simplex `0 <= c_1 <= ... <= c_n <= g`, subdivided by the Kuhn triangulation.
/// Simplices are vertex sets in a common closed orthant whose images form a
/// chain with 0/1 steps. The hemispheres `H_d^± = {z_d ≷ 0, z_(d+1..) = 0}`
/// are subcomplexes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Triangulation {
    pub n: usize,
    pub g: i32,
}

impl Triangulation {
    pub fn new(n: usize, g: i32) -> Self {
        assert!(g >= 1, "grid size must be positive");
        Self { n, g }
    }

    pub fn is_vertex(&self, z: &[i32]) -> bool {
        z.len() == self.n + 1 && z.iter().map(|v| v.unsigned_abs() as i64).sum::<i64>() == self.g as i64
    }

    /// The vertex `g * e_0`, the positive pole of `H_0`.
    pub fn pole(&self) -> Vertex {
        let mut z = vec![0; self.n + 1];
        z[0] = self.g;
        z
    }

    /// Prefix sums of `|z|` over the first `dim` coordinates.
    pub fn chain_coords(z: &[i32], dim: usize) -> Vec<i32> {
        let mut c = Vec::with_capacity(dim);
        let mut acc = 0;
        for v in z.iter().take(dim) {
            acc += v.abs();
            c.push(acc);
        }
        c
    }

    fn from_chain(&self, c: &[i32], signs: &[i32]) -> Option<Vertex> {
        let dim = c.len();
        let mut z = vec![0; self.n + 1];
        let mut prev = 0;
        for k in 0..=dim {
            let next = if k < dim { c[k] } else { self.g };
            let a = next - prev;
            if a < 0 {
                return None;
            }
            z[k] = signs[k] * a;
            prev = next;
        }
        Some(z)
    }

    /// Closed-orthant sign vector shared by all vertices, if one exists;
    /// coordinates zero on every vertex get `0`.
    fn common_signs(vertices: &[Vertex]) -> Option<Vec<i32>> {
        let len = vertices.first()?.len();
        let mut s = vec![0; len];
        for z in vertices {
            for (i, &v) in z.iter().enumerate() {
                let sv = v.signum();
                if sv != 0 {
                    if s[i] != 0 && s[i] != sv {
                        return None;
                    }
                    s[i] = sv;
                }
            }
        }
        Some(s)
    }

    /// Whether the vertex set spans a simplex of the triangulation.
    pub fn is_simplex(&self, vertices: &[Vertex]) -> bool {
        if vertices.is_empty() || !vertices.iter().all(|z| self.is_vertex(z)) {
            return false;
        }
        if Self::common_signs(vertices).is_none() {
            return false;
        }
        let mut chain: Vec<Vec<i32>> = vertices.iter().map(|z| Self::chain_coords(z, self.n)).collect();
        chain.sort_by_key(|c| c.iter().map(|&v| v as i64).sum::<i64>());
        chain.dedup();
        if chain.len() != vertices.len() {
            return false;
        }
        let first = &chain[0];
        let last = &chain[chain.len() - 1];
        if first.iter().zip(last).any(|(a, b)| b - a > 1 || b < a) {
            return false;
        }
        chain.windows(2).all(|w| w[0].iter().zip(&w[1]).all(|(a, b)| a <= b))
    }

    pub fn adjacent(&self, a: &[i32], b: &[i32]) -> bool {
        a != b && self.is_simplex(&[a.to_vec(), b.to_vec()])
    }

    /// Highest coordinate used by the simplex, with its sign: the hemisphere
    /// `H_d^±` whose interior meets the simplex.
    pub fn carrier(simplex: &[Vertex]) -> (usize, i32) {
        let mut best = (0, 1);
        for z in simplex {
            if let Some(d) = z.iter().rposition(|&v| v != 0) {
                if d >= best.0 {
                    best = (d, z[d].signum());
                }
            }
        }
        best
    }

    /// The `d`-simplices of `H_d^sign` having the `(d-1)`-simplex `sigma` as a facet.
    pub fn cofaces(&self, sigma: &[Vertex], d: usize, sign: i32) -> Vec<Simplex> {
        if sigma.len() != d || d == 0 || d > self.n {
            return Vec::new();
        }
        if sigma.iter().any(|z| z[d + 1..].iter().any(|&v| v != 0)) {
            return Vec::new();
        }
        let Some(mut signs) = Self::common_signs(sigma) else { return Vec::new() };
        if signs[d] != 0 && signs[d] != sign {
            return Vec::new();
        }
        signs[d] = sign;
        let free: Vec<usize> = (0..d).filter(|&i| signs[i] == 0).collect();
        let mut chain: Vec<Vec<i32>> = sigma.iter().map(|z| Self::chain_coords(z, d)).collect();
        chain.sort_by_key(|c| c.iter().map(|&v| v as i64).sum::<i64>());
        let mut found: BTreeSet<Simplex> = BTreeSet::new();
        for w in kuhn_completions(&chain, d) {
            if w.first().is_some_and(|&v| v < 0) || w.last().is_some_and(|&v| v > self.g) {
                continue;
            }
            if w.windows(2).any(|p| p[0] > p[1]) {
                continue;
            }
            for mask in 0..(1u32 << free.len()) {
                let mut s = signs.clone();
                for (b, &i) in free.iter().enumerate() {
                    s[i] = if mask >> b & 1 == 1 { -1 } else { 1 };
                }
                let Some(z) = self.from_chain(&w, &s) else { continue };
                // a sign chosen for a coordinate the new vertex leaves at zero is irrelevant
                let mut kappa: Simplex = sigma.to_vec();
                if kappa.contains(&z) {
                    continue;
                }
                kappa.push(z);
                kappa.sort();
                found.insert(kappa);
            }
        }
        found.into_iter().collect()
    }

    /// All vertices sharing a simplex with `z`.
    pub fn neighbours(&self, z: &[i32]) -> Vec<Vertex> {
        let n = self.n;
        let base = Self::chain_coords(z, n);
        let mut signs: Vec<i32> = z.iter().map(|v| v.signum()).collect();
        let zeros: Vec<usize> = (0..=n).filter(|&i| signs[i] == 0).collect();
        let mut out: BTreeSet<Vertex> = BTreeSet::new();
        for mask in 0..(1u64 << zeros.len()) {
            for (b, &i) in zeros.iter().enumerate() {
                signs[i] = if mask >> b & 1 == 1 { -1 } else { 1 };
            }
            for subset in 1..(1u64 << n) {
                for dir in [1, -1] {
                    let c: Vec<i32> = (0..n).map(|k| base[k] + dir * (subset >> k & 1) as i32).collect();
                    if c.first().is_some_and(|&v| v < 0) || c.last().is_some_and(|&v| v > self.g) {
                        continue;
                    }
                    if c.windows(2).any(|p| p[0] > p[1]) {
                        continue;
                    }
                    if let Some(w) = self.from_chain(&c, &signs) {
                        out.insert(w);
                    }
                }
            }
        }
        out.into_iter().collect()
    }

    /// Every vertex, in lexicographic order. Intended for small `n` and `g`.
    pub fn vertices(&self) -> Vec<Vertex> {
        let mut out = Vec::new();
        let mut z = vec![0; self.n + 1];
        self.fill(0, self.g, &mut z, &mut out);
        out.sort();
        out
    }

    fn fill(&self, i: usize, left: i32, z: &mut Vertex, out: &mut Vec<Vertex>) {
        if i == self.n {
            for s in if left == 0 { vec![0] } else { vec![-left, left] } {
                z[i] = s;
                out.push(z.clone());
            }
            return;
        }
        for a in 0..=left {
            for s in if a == 0 { vec![0] } else { vec![-a, a] } {
                z[i] = s;
                self.fill(i + 1, left - a, z, out);
            }
        }
    }

    /// Number of vertices, `sum_k 2^k C(n+1, k) C(g-1, k-1)`, saturating at `u128::MAX`.
    pub fn vertex_count(&self) -> u128 {
        let binom = |a: u128, b: u128| -> Option<u128> {
            if b > a {
                return Some(0);
            }
            let mut r: u128 = 1;
            for i in 0..b {
                r = r.checked_mul(a - i)? / (i + 1);
            }
            Some(r)
        };
        let m = self.n as u128 + 1;
        let g = self.g as u128;
        (1..=m.min(g))
            .try_fold(0u128, |acc, k| {
                let t = 1u128.checked_shl(k as u32)?.checked_mul(binom(m, k)?)?.checked_mul(binom(g - 1, k - 1)?)?;
                acc.checked_add(t)
            })
            .unwrap_or(u128::MAX)
    }

    /// Largest measure of `O+ Δ O+'` over adjacent vertices, for domain length `len`:
    /// every one of the `n` cuts moves by at most `len / g`.
    pub fn mesh(&self, len: f64) -> f64 {
        self.n as f64 * len / self.g as f64
    }
}

/// The at most two points completing a `(d-1)`-chain to a Kuhn `d`-simplex.
fn kuhn_completions(chain: &[Vec<i32>], d: usize) -> Vec<Vec<i32>> {
    let mut steps: Vec<Vec<usize>> = Vec::new();
    for w in chain.windows(2) {
        let mut s = Vec::new();
        for k in 0..d {
            match w[1][k] - w[0][k] {
                0 => {}
                1 => s.push(k),
                _ => return Vec::new(),
            }
        }
        if s.is_empty() {
            return Vec::new();
        }
        steps.push(s);
    }
    let used: usize = steps.iter().map(|s| s.len()).sum();
    let mut covered = vec![false; d];
    for s in &steps {
        for &k in s {
            if covered[k] {
                return Vec::new();
            }
            covered[k] = true;
        }
    }
    if used + 1 == d && steps.iter().all(|s| s.len() == 1) {
        let r = covered.iter().position(|c| !c).unwrap();
        let mut below = chain[0].clone();
        below[r] -= 1;
        let mut above = chain[chain.len() - 1].clone();
        above[r] += 1;
        vec![below, above]
    } else if used == d && steps.iter().filter(|s| s.len() == 2).count() == 1 && steps.iter().all(|s| s.len() <= 2) {
        let j = steps.iter().position(|s| s.len() == 2).unwrap();
        let (p, q) = (steps[j][0], steps[j][1]);
        let mut a = chain[j].clone();
        a[p] += 1;
        let mut b = chain[j].clone();
        b[q] += 1;
        vec![a, b]
    } else {
        Vec::new()
    }
}
