mod common;

use std::collections::BTreeMap;

use holoflow::poly::{integer, rational, Monomial, Poly, Rational};
use holoflow::rgflow::{enumerate_graphs, graph_weight, rg_flow, FormalSeries, Graph, Propagator, ToyFieldSpace};
use num_traits::Zero;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn x_pow(m: u32) -> Poly {
    Poly::term(Monomial::from_exponents([(0, m)]), integer(1))
}

fn one_variable(coefs: &[Rational]) -> Poly {
    let mut p = Poly::zero();
    for (m, c) in coefs.iter().enumerate() {
        p += &x_pow(m as u32).scale(c);
    }
    p
}

fn small_rational(rng: &mut ChaCha8Rng) -> Rational {
    rational(rng.random_range(-5..=5), rng.random_range(1..=4))
}

fn random_homogeneous(rng: &mut ChaCha8Rng, n: usize, degree: u32) -> Poly {
    let mut p = Poly::zero();
    fn monomials(n: usize, degree: u32, start: usize, acc: &mut Vec<(u32, u32)>, out: &mut Vec<Monomial>) {
        if degree == 0 {
            out.push(Monomial::from_exponents(acc.clone()));
            return;
        }
        for v in start..n {
            acc.push((v as u32, 1));
            monomials(n, degree - 1, v, acc, out);
            acc.pop();
        }
    }
    let mut all = Vec::new();
    monomials(n, degree, 0, &mut Vec::new(), &mut all);
    for m in all {
        p.add_term(m, small_rational(rng));
    }
    p
}

fn random_propagator(rng: &mut ChaCha8Rng, n: usize) -> Propagator {
    let mut entries = vec![vec![Rational::zero(); n]; n];
    for a in 0..n {
        for b in a..n {
            let v = small_rational(rng);
            entries[a][b] = v.clone();
            entries[b][a] = v;
        }
    }
    Propagator::new(entries).unwrap()
}

fn coefficients(p: &Poly) -> BTreeMap<u32, Rational> {
    p.terms().map(|(m, c)| (m.degree(), c.clone())).collect()
}

#[test]
fn graph_sum_matches_formal_series_in_one_variable() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let space = ToyFieldSpace::new(1).unwrap();
    for _ in 0..5 {
        let p = small_rational(&mut rng);
        let mut i0 = vec![Rational::zero(); 7];
        for c in i0.iter_mut().take(5).skip(3) {
            *c = small_rational(&mut rng);
        }
        let i1: Vec<Rational> = (0..3).map(|_| small_rational(&mut rng)).collect();
        let series = FormalSeries::interaction(&space, one_variable(&i0), one_variable(&i1), 6).unwrap();
        let flowed = rg_flow(&Propagator::new(vec![vec![p.clone()]]).unwrap(), &series).unwrap();
        let (h0, h1) = common::formal_flow_one_variable(&p, &i0, &i1, 6);
        let cap0 = flowed.known_degree(0);
        let cap1 = flowed.known_degree(1);
        assert_eq!((cap0, cap1), (6, 4));
        let want0: BTreeMap<u32, Rational> = h0.into_iter().filter(|(d, _)| *d <= cap0).collect();
        let want1: BTreeMap<u32, Rational> = h1.into_iter().filter(|(d, _)| *d <= cap1).collect();
        assert_eq!(coefficients(flowed.part(0)), want0);
        assert_eq!(coefficients(flowed.part(1)), want1);
    }
}

#[test]
fn two_vertex_wheel_weight() {
    // I = x³/3!: two vertices joined twice leave p²x²/4 at order ħ
    let space = ToyFieldSpace::new(1).unwrap();
    let i = FormalSeries::interaction(&space, x_pow(3).scale(&rational(1, 6)), Poly::zero(), 3).unwrap();
    let p = rational(3, 2);
    let graphs = enumerate_graphs(2, 2, 1).unwrap();
    let wheel = graphs
        .iter()
        .find(|g| g.vertices.len() == 2 && g.edges == vec![(0, 1), (0, 1)])
        .unwrap();
    assert_eq!(wheel.automorphisms, 4);
    let w = graph_weight(wheel, &Propagator::new(vec![vec![p.clone()]]).unwrap(), &i).unwrap();
    assert!(w.part(0).is_zero());
    assert_eq!(*w.part(1), x_pow(2).scale(&(&p * &p / integer(4))));
}

#[test]
fn edgeless_graph_returns_the_interaction() {
    let space = ToyFieldSpace::new(2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let quartic = random_homogeneous(&mut rng, 2, 4);
    let i = FormalSeries::interaction(&space, quartic.clone(), Poly::zero(), 4).unwrap();
    let g = enumerate_graphs(1, 4, 0)
        .unwrap()
        .into_iter()
        .find(|g| g.edges.is_empty() && g.vertices[0].legs == 4)
        .unwrap();
    let w = graph_weight(&g, &random_propagator(&mut rng, 2), &i).unwrap();
    assert_eq!(*w.part(0), quartic);
}

#[test]
fn zero_propagator_is_the_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in 1..=3 {
        let space = ToyFieldSpace::new(n).unwrap();
        let h0 = &random_homogeneous(&mut rng, n, 3) + &random_homogeneous(&mut rng, n, 4);
        let h1 = random_homogeneous(&mut rng, n, 1);
        let i = FormalSeries::interaction(&space, h0.clone(), h1.clone(), 6).unwrap();
        let out = rg_flow(&Propagator::zero(n), &i).unwrap();
        assert_eq!(*out.part(0), h0);
        assert_eq!(*out.part(1), h1);
        for g in enumerate_graphs(3, 4, 1).unwrap().iter().filter(|g| !g.edges.is_empty()) {
            let w = graph_weight(g, &Propagator::zero(n), &i).unwrap();
            assert!(w.part(0).is_zero() && w.part(1).is_zero());
        }
    }
}

#[test]
fn tree_level_is_the_genus_zero_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let n = 2;
    let space = ToyFieldSpace::new(n).unwrap();
    let h0 = &random_homogeneous(&mut rng, n, 3) + &random_homogeneous(&mut rng, n, 4);
    let i = FormalSeries::interaction(&space, h0, random_homogeneous(&mut rng, n, 2), 6).unwrap();
    let p = random_propagator(&mut rng, n);
    let out = rg_flow(&p, &i).unwrap();
    let mut trees = Poly::zero();
    for g in enumerate_graphs(4, 6, 0).unwrap() {
        trees += graph_weight(&g, &p, &i).unwrap().part(0);
    }
    assert_eq!(*out.part(0), trees);
}

#[test]
fn semigroup_law() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for trial in 0..20 {
        let n = 1 + trial % 3;
        let space = ToyFieldSpace::new(n).unwrap();
        let h0 = &random_homogeneous(&mut rng, n, 3) + &random_homogeneous(&mut rng, n, 4);
        let h1 = &random_homogeneous(&mut rng, n, 1) + &random_homogeneous(&mut rng, n, 2);
        let i = FormalSeries::interaction(&space, h0, h1, 6).unwrap();
        let p1 = random_propagator(&mut rng, n);
        let p2 = random_propagator(&mut rng, n);
        let lhs = rg_flow(&p2, &rg_flow(&p1, &i).unwrap()).unwrap();
        let rhs = rg_flow(&p1.add(&p2).unwrap(), &i).unwrap();
        assert!(lhs.agrees_with(&rhs), "trial {trial}");
    }
}

/// Canonical key of a labelled graph given by adjacency counts and
/// per-vertex `(genus, legs)`, by brute force over vertex orderings.
fn brute_key(deco: &[(u32, usize)], adj: &[Vec<u32>]) -> Vec<u64> {
    let n = deco.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best: Option<Vec<u64>> = None;
    loop {
        let mut key = Vec::new();
        for &v in &perm {
            key.push(deco[v].0 as u64);
            key.push(deco[v].1 as u64);
        }
        for i in 0..n {
            for j in i..n {
                key.push(adj[perm[i]][perm[j]] as u64);
            }
        }
        if best.as_ref().is_none_or(|b| key < *b) {
            best = Some(key);
        }
        // next permutation in lexicographic order
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| perm[i] < perm[i + 1]) else {
            break;
        };
        let j = (i + 1..n).rev().find(|&j| perm[j] > perm[i]).unwrap();
        perm.swap(i, j);
        perm[i + 1..].reverse();
    }
    best.unwrap()
}

fn graph_brute_key(g: &Graph) -> Vec<u64> {
    let n = g.vertices.len();
    let mut adj = vec![vec![0u32; n]; n];
    for &(a, b) in &g.edges {
        adj[a][b] += 1;
        if a != b {
            adj[b][a] += 1;
        }
    }
    let deco: Vec<(u32, usize)> = g.vertices.iter().map(|v| (v.genus, v.legs)).collect();
    brute_key(&deco, &adj)
}

fn connected(adj: &[Vec<u32>]) -> bool {
    let n = adj.len();
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for u in 0..n {
            if adj[v][u] > 0 && !seen[u] {
                seen[u] = true;
                stack.push(u);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Tallies every partial pairing of the labelled half-edges of the given
/// vertices by the isomorphism class of the graph it produces.
fn pairing_census(types: &[(u32, usize)]) -> BTreeMap<Vec<u64>, u64> {
    let owner: Vec<usize> = types.iter().enumerate().flat_map(|(v, &(_, m))| std::iter::repeat_n(v, m)).collect();
    let h = owner.len();
    let mut census = BTreeMap::new();
    fn recurse(
        next: usize,
        used: &mut Vec<bool>,
        pairs: &mut Vec<(usize, usize)>,
        owner: &[usize],
        types: &[(u32, usize)],
        census: &mut BTreeMap<Vec<u64>, u64>,
    ) {
        let h = owner.len();
        let Some(i) = (next..h).find(|&i| !used[i]) else {
            let n = types.len();
            let mut adj = vec![vec![0u32; n]; n];
            let mut legs: Vec<usize> = types.iter().map(|t| t.1).collect();
            for &(a, b) in pairs.iter() {
                let (u, v) = (owner[a], owner[b]);
                adj[u][v] += 1;
                if u != v {
                    adj[v][u] += 1;
                }
                legs[u] -= 1;
                legs[v] -= 1;
            }
            if connected(&adj) {
                let deco: Vec<(u32, usize)> = (0..n).map(|v| (types[v].0, legs[v])).collect();
                *census.entry(brute_key(&deco, &adj)).or_insert(0) += 1;
            }
            return;
        };
        used[i] = true;
        // half-edge i stays an external leg
        recurse(i + 1, used, pairs, owner, types, census);
        for j in i + 1..h {
            if !used[j] {
                used[j] = true;
                pairs.push((i, j));
                recurse(i + 1, used, pairs, owner, types, census);
                pairs.pop();
                used[j] = false;
            }
        }
        used[i] = false;
    }
    recurse(0, &mut vec![false; h], &mut Vec::new(), &owner, types, &mut census);
    census
}

#[test]
fn symmetry_factors_match_pairing_counts() {
    let graphs = enumerate_graphs(4, 4, 1).unwrap();
    let mut by_types: BTreeMap<Vec<(u32, usize)>, Vec<&Graph>> = BTreeMap::new();
    for g in &graphs {
        let mut types: Vec<(u32, usize)> = g.vertices.iter().map(|v| (v.genus, v.valence)).collect();
        types.sort();
        by_types.entry(types).or_default().push(g);
    }
    let mut audited = 0;
    for (types, members) in by_types {
        let census = pairing_census(&types);
        // Π m_v! for the vertex tensors and Π k! for identical vertices
        let mut denominator: u64 = types.iter().map(|t| (1..=t.1 as u64).product::<u64>()).product();
        let mut counts: BTreeMap<(u32, usize), u64> = BTreeMap::new();
        for t in &types {
            *counts.entry(*t).or_insert(0) += 1;
        }
        denominator *= counts.values().map(|&k| (1..=k).product::<u64>()).product::<u64>();
        for g in members {
            let count = census.get(&graph_brute_key(g)).copied().unwrap_or(0);
            assert_eq!(
                Rational::new(count.into(), denominator.into()),
                Rational::new(1.into(), g.automorphisms.into()),
                "{g:?}"
            );
            audited += 1;
        }
    }
    assert_eq!(audited, graphs.len());
}

#[test]
fn enumeration_is_duplicate_free() {
    let graphs = enumerate_graphs(4, 4, 1).unwrap();
    let mut keys: Vec<Vec<u64>> = graphs.iter().map(graph_brute_key).collect();
    let total = keys.len();
    keys.sort();
    keys.dedup();
    assert_eq!(keys.len(), total);
}
