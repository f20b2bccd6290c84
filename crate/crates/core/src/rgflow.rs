//! One-loop homotopy RG flow `W(P, I) mod ħ²` on a finite-dimensional
//! toy field space, computed exactly as a sum over connected graphs of
//! genus at most one.
//!
//! Graphs are stable graphs in the usual sense: a vertex carries a genus
//! `g_v ∈ {0, 1}` (the `ħ`-order of the interaction component placed there)
//! and genus-zero vertices are at least trivalent. The total genus is the
//! first Betti number plus `Σ g_v`. External legs are unlabelled, so a
//! single trivalent vertex with three legs has `|Aut| = 3!`.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::poly::{integer, Poly, Rational};

/// Largest field-space dimension handled exactly.
pub const MAX_DIM: usize = 6;

/// Largest vertex count of [`enumerate_graphs`].
pub const MAX_GRAPH_VERTICES: usize = 5;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToyFieldSpace {
    dim: usize,
    /// Degree mod 2 of each coordinate.
    parity: Vec<u8>,
}

impl ToyFieldSpace {
    /// `N` even coordinates.
    pub fn new(dim: usize) -> Result<Self> {
        ToyFieldSpace::with_parity(vec![0; dim])
    }

    pub fn with_parity(parity: Vec<u8>) -> Result<Self> {
        let dim = parity.len();
        if dim == 0 || dim > MAX_DIM {
            return Err(invalid(format!("field space dimension must lie in 1..={MAX_DIM}, got {dim}")));
        }
        if parity.iter().any(|&p| p > 1) {
            return Err(invalid("parities are 0 or 1"));
        }
        if parity.contains(&1) {
            return Err(Error::Unsupported("odd coordinates".into()));
        }
        Ok(ToyFieldSpace { dim, parity })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn parity(&self) -> &[u8] {
        &self.parity
    }
}

/// Symmetric `N × N` matrix of exact rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Propagator {
    entries: Vec<Vec<Rational>>,
}

impl Propagator {
    pub fn new(entries: Vec<Vec<Rational>>) -> Result<Self> {
        let n = entries.len();
        if n == 0 || entries.iter().any(|row| row.len() != n) {
            return Err(invalid("propagator must be a nonempty square matrix"));
        }
        for a in 0..n {
            for b in 0..a {
                if entries[a][b] != entries[b][a] {
                    return Err(invalid(format!("propagator is not symmetric at ({a}, {b})")));
                }
            }
        }
        Ok(Propagator { entries })
    }

    pub fn zero(n: usize) -> Self {
        Propagator {
            entries: vec![vec![Rational::zero(); n]; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entry(&self, a: usize, b: usize) -> &Rational {
        &self.entries[a][b]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().flatten().all(Zero::is_zero)
    }

    pub fn add(&self, other: &Propagator) -> Result<Propagator> {
        if self.dim() != other.dim() {
            return Err(invalid("propagators act on different spaces"));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(r, s)| r.iter().zip(s).map(|(a, b)| a + b).collect())
            .collect();
        Ok(Propagator { entries })
    }
}

/// Degree bound meaning "exact at every degree".
pub const ALL_DEGREES: u32 = u32::MAX;

/// `I = I₀ + ħ I₁` with `I_g` a polynomial in `x_1, …, x_N` (variable `a`
/// is `x_{a+1}`). `known[g]` is the degree through which `I_g` is exact;
/// coefficients above it are unknown, not zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormalSeries {
    dim: usize,
    parts: [Poly; 2],
    known: [u32; 2],
}

impl FormalSeries {
    /// A polynomial functional exact through degree `d_max`. Terms above
    /// `d_max` are rejected rather than dropped.
    pub fn new(space: &ToyFieldSpace, h0: Poly, h1: Poly, d_max: u32) -> Result<Self> {
        for part in [&h0, &h1] {
            if let Some(deg) = part.degree() {
                if deg > d_max {
                    return Err(Error::TruncationOverflow {
                        requested: deg as usize,
                        available: d_max as usize,
                    });
                }
            }
            if part.terms().any(|(m, _)| m.factors().iter().any(|&(v, _)| v as usize >= space.dim())) {
                return Err(invalid(format!("polynomial uses variables outside x_1..x_{}", space.dim())));
            }
        }
        Ok(FormalSeries {
            dim: space.dim(),
            parts: [h0, h1],
            known: [d_max, d_max],
        })
    }

    /// As [`FormalSeries::new`], and additionally requires `I₀` to be at
    /// least cubic.
    pub fn interaction(space: &ToyFieldSpace, h0: Poly, h1: Poly, d_max: u32) -> Result<Self> {
        let series = FormalSeries::new(space, h0, h1, d_max)?;
        if !series.is_at_least_cubic() {
            return Err(invalid("the ħ⁰ part of an interaction must be at least cubic"));
        }
        Ok(series)
    }

    pub fn zero(dim: usize, known: [u32; 2]) -> Self {
        FormalSeries {
            dim,
            parts: [Poly::zero(), Poly::zero()],
            known,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `I_g` through its known degree.
    pub fn part(&self, order: usize) -> &Poly {
        &self.parts[order]
    }

    pub fn known_degree(&self, order: usize) -> u32 {
        self.known[order]
    }

    /// Homogeneous component of `I_g` of the given degree.
    pub fn component(&self, order: usize, degree: u32) -> Result<Poly> {
        if degree > self.known[order] {
            return Err(Error::TruncationOverflow {
                requested: degree as usize,
                available: self.known[order] as usize,
            });
        }
        Ok(self.parts[order].homogeneous_part(degree))
    }

    pub fn is_at_least_cubic(&self) -> bool {
        self.parts[0].terms().all(|(m, _)| m.degree() >= 3)
    }

    /// Equality of all coefficients known on both sides.
    pub fn agrees_with(&self, other: &FormalSeries) -> bool {
        self.dim == other.dim
            && (0..2).all(|g| {
                let cap = self.known[g].min(other.known[g]);
                self.parts[g].truncate(cap) == other.parts[g].truncate(cap)
            })
    }

    fn add_assign(&mut self, order: usize, p: &Poly) {
        self.parts[order] += p;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GraphVertex {
    pub genus: u32,
    pub valence: usize,
    pub legs: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    pub vertices: Vec<GraphVertex>,
    /// Internal edges `(u, v)` with `u ≤ v`; `u = v` is a self-loop.
    pub edges: Vec<(usize, usize)>,
    /// `|Aut(Γ)|` with unlabelled external legs.
    pub automorphisms: u64,
}

impl Graph {
    /// First Betti number `E − V + 1`.
    pub fn loops(&self) -> u32 {
        (self.edges.len() + 1 - self.vertices.len()) as u32
    }

    /// Loops plus vertex genera: the power of `ħ` the graph carries.
    pub fn genus(&self) -> u32 {
        self.loops() + self.vertices.iter().map(|v| v.genus).sum::<u32>()
    }

    pub fn external_legs(&self) -> usize {
        self.vertices.iter().map(|v| v.legs).sum()
    }
}

/// Connected multigraph without decorations: symmetric adjacency counts,
/// self-loops on the diagonal.
struct Skeleton {
    adj: Vec<Vec<u32>>,
    automorphisms: Vec<Vec<usize>>,
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..n).collect();
    fn heap(k: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(a.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, a, out);
            if k % 2 == 0 {
                a.swap(i, k - 1);
            } else {
                a.swap(0, k - 1);
            }
        }
    }
    heap(n, &mut current, &mut out);
    out
}

fn permuted_code(adj: &[Vec<u32>], p: &[usize]) -> Vec<u32> {
    let n = adj.len();
    let mut code = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            code.push(adj[p[i]][p[j]]);
        }
    }
    code
}

/// Labelled trees on `n ≥ 2` vertices from Prüfer sequences.
fn labelled_trees(n: usize) -> Vec<Vec<Vec<u32>>> {
    let mut out = Vec::new();
    let len = n - 2;
    let total = n.pow(len as u32);
    for code in 0..total {
        let mut seq = Vec::with_capacity(len);
        let mut c = code;
        for _ in 0..len {
            seq.push(c % n);
            c /= n;
        }
        let mut degree = vec![1usize; n];
        for &s in &seq {
            degree[s] += 1;
        }
        let mut adj = vec![vec![0u32; n]; n];
        for &s in &seq {
            let leaf = (0..n).find(|&v| degree[v] == 1).expect("a leaf exists");
            adj[leaf][s] += 1;
            adj[s][leaf] += 1;
            degree[leaf] -= 1;
            degree[s] -= 1;
        }
        let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
        adj[rest[0]][rest[1]] += 1;
        adj[rest[1]][rest[0]] += 1;
        out.push(adj);
    }
    out
}

/// Isomorphism classes of connected multigraphs with `n` vertices and
/// first Betti number `loops ∈ {0, 1}`.
fn skeletons(n: usize, loops: u32) -> Vec<Skeleton> {
    let trees = if n == 1 { vec![vec![vec![0u32]]] } else { labelled_trees(n) };
    let mut candidates = Vec::new();
    for tree in trees {
        if loops == 0 {
            candidates.push(tree);
        } else {
            for i in 0..n {
                for j in i..n {
                    let mut adj = tree.clone();
                    adj[i][j] += 1;
                    if i != j {
                        adj[j][i] += 1;
                    }
                    candidates.push(adj);
                }
            }
        }
    }
    let perms = permutations(n);
    let mut seen: BTreeMap<Vec<u32>, Vec<Vec<u32>>> = BTreeMap::new();
    for adj in candidates {
        let canonical = perms.iter().map(|p| permuted_code(&adj, p)).min().expect("n ≥ 1");
        seen.entry(canonical).or_insert(adj);
    }
    seen.into_values()
        .map(|adj| {
            let own = permuted_code(&adj, &perms[0]);
            let automorphisms = perms
                .iter()
                .filter(|p| permuted_code(&adj, p) == own)
                .cloned()
                .collect();
            Skeleton { adj, automorphisms }
        })
        .collect()
}

fn factorial(n: u64) -> u64 {
    (1..=n).product()
}

fn decorations(
    skeleton: &Skeleton,
    genus_labels: &[u32],
    max_external: usize,
    out: &mut Vec<Graph>,
) {
    let n = skeleton.adj.len();
    let degree: Vec<usize> = (0..n)
        .map(|v| (0..n).map(|u| skeleton.adj[v][u] as usize * if u == v { 2 } else { 1 }).sum())
        .collect();
    let mut legs = vec![0usize; n];
    fn recurse(
        v: usize,
        budget: usize,
        legs: &mut Vec<usize>,
        degree: &[usize],
        genus_labels: &[u32],
        skeleton: &Skeleton,
        out: &mut Vec<Graph>,
    ) {
        let n = legs.len();
        if v == n {
            let deco: Vec<(u32, usize)> = (0..n).map(|u| (genus_labels[u], legs[u])).collect();
            let mut stabiliser = 0u64;
            for sigma in &skeleton.automorphisms {
                let image: Vec<(u32, usize)> = sigma.iter().map(|&s| deco[s]).collect();
                if image < deco {
                    return;
                }
                if image == deco {
                    stabiliser += 1;
                }
            }
            let mut automorphisms = stabiliser;
            let mut edges = Vec::new();
            for a in 0..n {
                let loops = skeleton.adj[a][a] as u64;
                automorphisms *= (1u64 << loops) * factorial(loops) * factorial(legs[a] as u64);
                for _ in 0..loops {
                    edges.push((a, a));
                }
                for b in a + 1..n {
                    let m = skeleton.adj[a][b] as u64;
                    automorphisms *= factorial(m);
                    for _ in 0..m {
                        edges.push((a, b));
                    }
                }
            }
            out.push(Graph {
                vertices: (0..n)
                    .map(|u| GraphVertex {
                        genus: genus_labels[u],
                        valence: degree[u] + legs[u],
                        legs: legs[u],
                    })
                    .collect(),
                edges,
                automorphisms,
            });
            return;
        }
        let min = if genus_labels[v] == 0 { 3usize.saturating_sub(degree[v]) } else { 0 };
        for l in min..=budget {
            legs[v] = l;
            recurse(v + 1, budget - l, legs, degree, genus_labels, skeleton, out);
        }
        legs[v] = 0;
    }
    recurse(0, max_external, &mut legs, &degree, genus_labels, skeleton, out);
}

/// All connected stable graphs with at most `max_vertices` vertices, at
/// most `max_external` legs and genus at most `genus_cap`, one per
/// isomorphism class, with exact automorphism counts.
pub fn enumerate_graphs(max_vertices: usize, max_external: usize, genus_cap: u32) -> Result<Vec<Graph>> {
    if max_vertices > MAX_GRAPH_VERTICES {
        return Err(Error::Infeasible {
            what: "graph enumeration",
            reason: format!("{max_vertices} vertices exceeds {MAX_GRAPH_VERTICES}"),
        });
    }
    if genus_cap > 1 {
        return Err(invalid("only genus 0 and 1 are supported"));
    }
    let mut out = Vec::new();
    for n in 1..=max_vertices {
        for loops in 0..=genus_cap {
            for skeleton in skeletons(n, loops) {
                decorations(&skeleton, &vec![0; n], max_external, &mut out);
                if loops == 0 && genus_cap == 1 {
                    // one genus-one vertex; orbit duplicates are rejected by the
                    // minimality check in `decorations`
                    for v in 0..n {
                        let mut labels = vec![0; n];
                        labels[v] = 1;
                        decorations(&skeleton, &labels, max_external, &mut out);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// `ħ^{g(Γ)} / |Aut Γ| · w_Γ(P, I)`: the vertex tensors of `I` contracted
/// along the edges with `P`, external legs filled with `x`.
pub fn graph_weight(g: &Graph, p: &Propagator, i: &FormalSeries) -> Result<FormalSeries> {
    let n = i.dim();
    if p.dim() != n {
        return Err(invalid(format!("propagator is {0}×{0} but the field space has dimension {n}", p.dim())));
    }
    let order = g.genus() as usize;
    if order > 1 {
        return Err(invalid("graph genus exceeds one"));
    }
    let vertex_count = g.vertices.len();
    let mut components = Vec::with_capacity(vertex_count);
    for v in &g.vertices {
        components.push(i.component(v.genus as usize, v.valence as u32).map_err(|e| match e {
            Error::TruncationOverflow { available, .. } => Error::InvalidArgument(format!(
                "vertex of valence {} at ħ^{} but the interaction is known only through degree {available}",
                v.valence, v.genus
            )),
            other => other,
        })?);
    }
    let mut out = FormalSeries::zero(n, [ALL_DEGREES; 2]);
    if components.iter().any(Poly::is_zero) {
        return Ok(out);
    }

    let x = |a: usize| a as u32;
    let y = |v: usize, a: usize| (n + v * n + a) as u32;
    let mut incident = vec![0usize; vertex_count];
    for &(a, b) in &g.edges {
        incident[a] += 1;
        incident[b] += 1;
    }
    let mut added = vec![false; vertex_count];
    let mut applied = vec![false; g.edges.len()];
    let mut done = vec![0usize; vertex_count];
    let mut q = Poly::one();

    // breadth-first order keeps few vertex copies alive at once
    let mut order_list = vec![0usize];
    let mut visited = vec![false; vertex_count];
    visited[0] = true;
    let mut head = 0;
    while head < order_list.len() {
        let v = order_list[head];
        head += 1;
        for &(a, b) in &g.edges {
            for (s, t) in [(a, b), (b, a)] {
                if s == v && !visited[t] {
                    visited[t] = true;
                    order_list.push(t);
                }
            }
        }
    }

    for &v in &order_list {
        q = &q * &components[v].map_vars(|a| y(v, a as usize));
        added[v] = true;
        for (e, &(a, b)) in g.edges.iter().enumerate() {
            if applied[e] || !added[a] || !added[b] {
                continue;
            }
            let mut next = Poly::zero();
            for s in 0..n {
                for t in 0..n {
                    let c = p.entry(s, t);
                    if c.is_zero() {
                        continue;
                    }
                    next += &q.derivative(y(a, s)).derivative(y(b, t)).scale(c);
                }
            }
            q = next;
            applied[e] = true;
            done[a] += 1;
            done[b] += 1;
            if q.is_zero() {
                return Ok(out);
            }
        }
        for u in 0..vertex_count {
            if added[u] && done[u] == incident[u] {
                q = q.map_vars(|w| {
                    if w as usize >= n + u * n && (w as usize) < n + (u + 1) * n {
                        x(w as usize - n - u * n)
                    } else {
                        w
                    }
                });
                done[u] = usize::MAX;
            }
        }
    }

    let legs_factor: Rational = g
        .vertices
        .iter()
        .map(|v| integer(factorial(v.legs as u64) as i64))
        .fold(Rational::one(), |acc, f| acc * f);
    let scale = legs_factor / integer(g.automorphisms as i64);
    out.add_assign(order, &q.scale(&scale));
    Ok(out)
}

/// `W(P, I) mod ħ²`. The ħ⁰ part is exact through the degree to which
/// `I₀` is known; the ħ¹ part through that degree minus two, or the known
/// degree of `I₁` if smaller, since a loop can absorb two legs of a vertex.
pub fn rg_flow(p: &Propagator, i: &FormalSeries) -> Result<FormalSeries> {
    if !i.is_at_least_cubic() {
        return Err(invalid("the ħ⁰ part of the interaction must be at least cubic"));
    }
    if p.dim() != i.dim() {
        return Err(invalid("propagator and interaction live on different spaces"));
    }
    let k0 = i.known_degree(0);
    let k1 = i.known_degree(1).min(k0.saturating_sub(2));
    if k0 == ALL_DEGREES {
        return Err(invalid("the flow needs a finite degree cap on the interaction"));
    }
    // trees of trivalent vertices carry V + 2 legs, one-loop graphs at least V − 1
    let needed = (k0.saturating_sub(2) as usize).max(k1 as usize + 1).max(1);
    if needed > MAX_GRAPH_VERTICES {
        return Err(Error::Infeasible {
            what: "RG flow",
            reason: format!("degree caps ({k0}, {k1}) need graphs with {needed} vertices"),
        });
    }
    let known = [k0, k1];
    let graphs: Vec<Graph> = enumerate_graphs(needed, k0.max(k1) as usize, 1)?
        .into_iter()
        .filter(|g| g.external_legs() as u32 <= known[g.genus() as usize])
        .collect();
    let pieces: Vec<FormalSeries> = graphs
        .par_iter()
        .map(|g| graph_weight(g, p, i))
        .collect::<Result<_>>()?;
    let mut out = FormalSeries::zero(i.dim(), known);
    for piece in &pieces {
        for g in 0..2 {
            out.add_assign(g, piece.part(g));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn find<'a>(graphs: &'a [Graph], vertices: &[(u32, usize, usize)], edges: usize) -> Vec<&'a Graph> {
        graphs
            .iter()
            .filter(|g| {
                let mut vs: Vec<_> = g.vertices.iter().map(|v| (v.genus, v.valence, v.legs)).collect();
                vs.sort();
                let mut want = vertices.to_vec();
                want.sort();
                vs == want && g.edges.len() == edges
            })
            .collect()
    }

    #[test]
    fn small_automorphism_groups() {
        let graphs = enumerate_graphs(2, 3, 1).unwrap();
        let star = find(&graphs, &[(0, 3, 3)], 0);
        assert_eq!(star.len(), 1);
        assert_eq!(star[0].automorphisms, 6);
        let tadpole = find(&graphs, &[(0, 3, 1)], 1);
        assert_eq!(tadpole.len(), 1);
        assert_eq!(tadpole[0].automorphisms, 2);
        let wheel = find(&graphs, &[(0, 3, 1), (0, 3, 1)], 2);
        assert_eq!(wheel.len(), 1);
        assert_eq!(wheel[0].automorphisms, 4);
    }

    #[test]
    fn labelled_tree_counts() {
        for n in 2..=5 {
            assert_eq!(labelled_trees(n).len(), n.pow(n as u32 - 2));
        }
    }

    #[test]
    fn odd_coordinates_unsupported() {
        assert!(matches!(ToyFieldSpace::with_parity(vec![0, 1]), Err(Error::Unsupported(_))));
    }

    #[test]
    fn overflow_is_reported() {
        let space = ToyFieldSpace::new(1).unwrap();
        let x4 = &(&Poly::var(0) * &Poly::var(0)) * &(&Poly::var(0) * &Poly::var(0));
        let err = FormalSeries::new(&space, x4, Poly::zero(), 3).unwrap_err();
        assert!(matches!(err, Error::TruncationOverflow { requested: 4, available: 3 }));
    }
}
