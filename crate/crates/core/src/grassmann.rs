//! Exact exterior algebra over anti-holomorphic one-forms.
//!
//! A [`Universe`] holds `blocks` copies of `C^d`; its odd generators are the
//! one-forms `dū_i^α` (block `α`, coordinate `i`), and the commuting symbols
//! `ū_i^α` share the same index so that coefficients are [`Poly`]s over those
//! indices. Generators are ordered lexicographically on `(α, i)` and every
//! stored term is in that canonical order.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Neg, Sub};

use crate::poly::{integer, Monomial, Poly, Rational};

/// Upper bound on the generator count; terms are keyed by `u64` bitsets.
pub const MAX_GENERATORS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Universe {
    d: usize,
    blocks: usize,
}

impl Universe {
    pub fn new(d: usize, blocks: usize) -> Self {
        assert!(d >= 1, "dimension must be positive");
        assert!(
            d * blocks <= MAX_GENERATORS,
            "{} generators exceed the supported {MAX_GENERATORS}",
            d * blocks
        );
        Universe { d, blocks }
    }

    /// The universe of the difference coordinates of a `k`-vertex wheel.
    pub fn wheel_differences(d: usize, k: usize) -> Self {
        assert!(k >= 2, "a wheel needs at least two vertices");
        Universe::new(d, k - 1)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn generator_count(&self) -> usize {
        self.d * self.blocks
    }

    pub fn full_mask(&self) -> u64 {
        let n = self.generator_count();
        if n == 64 {
            u64::MAX
        } else {
            (1u64 << n) - 1
        }
    }

    pub fn index(&self, g: GeneratorIndex) -> u32 {
        assert!(
            (1..=self.blocks).contains(&g.alpha) && (1..=self.d).contains(&g.i),
            "generator {g:?} outside universe {self:?}"
        );
        ((g.alpha - 1) * self.d + (g.i - 1)) as u32
    }

    pub fn generator_at(&self, index: u32) -> GeneratorIndex {
        let index = index as usize;
        GeneratorIndex {
            alpha: index / self.d + 1,
            i: index % self.d + 1,
        }
    }
}

/// The generator `dū_i^α`, both indices 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GeneratorIndex {
    pub alpha: usize,
    pub i: usize,
}

impl GeneratorIndex {
    pub fn new(alpha: usize, i: usize) -> Self {
        GeneratorIndex { alpha, i }
    }
}

/// Sign of moving the generators of `b` past those of `a` into canonical
/// order, assuming `a & b == 0`.
fn wedge_sign(a: u64, b: u64) -> i64 {
    let mut swaps = 0u32;
    let mut rest = b;
    while rest != 0 {
        let y = rest.trailing_zeros();
        rest &= rest - 1;
        let above = if y >= 63 { 0 } else { a & !((1u64 << (y + 1)) - 1) };
        swaps += above.count_ones();
    }
    if swaps % 2 == 0 {
        1
    } else {
        -1
    }
}

/// A finite sum of canonical monomials `coefficient · dū_{g1} ∧ … ∧ dū_{gr}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrassmannElement {
    universe: Universe,
    terms: BTreeMap<u64, Poly>,
}

impl GrassmannElement {
    pub fn zero(universe: Universe) -> Self {
        GrassmannElement {
            universe,
            terms: BTreeMap::new(),
        }
    }

    pub fn scalar(universe: Universe, coefficient: Poly) -> Self {
        let mut out = GrassmannElement::zero(universe);
        out.add_term(0, coefficient);
        out
    }

    pub fn one(universe: Universe) -> Self {
        GrassmannElement::scalar(universe, Poly::one())
    }

    pub fn generator(universe: Universe, g: GeneratorIndex) -> Self {
        let mut out = GrassmannElement::zero(universe);
        out.add_term(1u64 << universe.index(g), Poly::one());
        out
    }

    /// The commuting symbol `ū_i^α` as a polynomial.
    pub fn symbol(universe: Universe, g: GeneratorIndex) -> Poly {
        Poly::var(universe.index(g))
    }

    /// Builds an element from generator lists in arbitrary order; each list
    /// is sorted into canonical order with its permutation sign.
    pub fn from_products(
        universe: Universe,
        products: impl IntoIterator<Item = (Vec<GeneratorIndex>, Poly)>,
    ) -> Self {
        let mut out = GrassmannElement::zero(universe);
        for (gens, coefficient) in products {
            let mut term = GrassmannElement::scalar(universe, coefficient);
            for g in gens {
                term = term.wedge(&GrassmannElement::generator(universe, g));
            }
            out = &out + &term;
        }
        out
    }

    pub fn universe(&self) -> Universe {
        self.universe
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (u64, &Poly)> {
        self.terms.iter().map(|(&m, p)| (m, p))
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// The form degrees present.
    pub fn degrees(&self) -> BTreeSet<usize> {
        self.terms.keys().map(|m| m.count_ones() as usize).collect()
    }

    pub fn coefficient(&self, mask: u64) -> Poly {
        self.terms.get(&mask).cloned().unwrap_or_default()
    }

    /// Coefficient of the ordered volume form of the whole universe.
    pub fn top_coefficient(&self) -> Poly {
        self.coefficient(self.universe.full_mask())
    }

    fn add_term(&mut self, mask: u64, coefficient: Poly) {
        if coefficient.is_zero() {
            return;
        }
        let merged = match self.terms.remove(&mask) {
            Some(existing) => &existing + &coefficient,
            None => coefficient,
        };
        if !merged.is_zero() {
            self.terms.insert(mask, merged);
        }
    }

    fn check_universe(&self, other: &GrassmannElement) {
        assert_eq!(
            self.universe, other.universe,
            "Grassmann elements from different universes"
        );
    }

    pub fn scale(&self, factor: &Poly) -> GrassmannElement {
        let mut out = GrassmannElement::zero(self.universe);
        for (&m, c) in &self.terms {
            out.add_term(m, c * factor);
        }
        out
    }

    pub fn scale_rational(&self, factor: &Rational) -> GrassmannElement {
        self.scale(&Poly::constant(factor.clone()))
    }

    /// Graded-commutative product.
    pub fn wedge(&self, other: &GrassmannElement) -> GrassmannElement {
        self.check_universe(other);
        let mut acc: BTreeMap<u64, Poly> = BTreeMap::new();
        for (&ma, ca) in &self.terms {
            for (&mb, cb) in &other.terms {
                if ma & mb != 0 {
                    continue;
                }
                let mut c = ca * cb;
                if wedge_sign(ma, mb) < 0 {
                    c = -&c;
                }
                let slot = acc.entry(ma | mb).or_default();
                *slot += &c;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        GrassmannElement {
            universe: self.universe,
            terms: acc,
        }
    }

    /// Left interior derivative `∂/∂(dū_g)`: removes `g` with the sign of
    /// moving it to the front.
    pub fn contract_generator(&self, g: GeneratorIndex) -> GrassmannElement {
        let bit = self.universe.index(g);
        let mut out = GrassmannElement::zero(self.universe);
        for (&m, c) in &self.terms {
            if m & (1u64 << bit) == 0 {
                continue;
            }
            let before = (m & ((1u64 << bit) - 1)).count_ones();
            let c = if before % 2 == 0 { c.clone() } else { -c };
            out.add_term(m & !(1u64 << bit), c);
        }
        out
    }

    /// Contraction with the vector field `Σ_g field_g ∂/∂(dū_g)`.
    pub fn contract_field(&self, field: &[(GeneratorIndex, Poly)]) -> GrassmannElement {
        let mut out = GrassmannElement::zero(self.universe);
        for (g, coefficient) in field {
            out = &out + &self.contract_generator(*g).scale(coefficient);
        }
        out
    }

    /// Contraction with the anti-holomorphic Euler field of block `alpha`,
    /// `η^α = Σ_i ū_i^α ∂/∂(dū_i^α)`.
    pub fn contract_eta(&self, alpha: usize) -> GrassmannElement {
        assert!(
            (1..=self.universe.blocks).contains(&alpha),
            "block {alpha} outside universe {:?}",
            self.universe
        );
        let field: Vec<_> = (1..=self.universe.d)
            .map(|i| {
                let g = GeneratorIndex::new(alpha, i);
                (g, GrassmannElement::symbol(self.universe, g))
            })
            .collect();
        self.contract_field(&field)
    }

    /// Re-expresses the element in a universe with more blocks, keeping
    /// generator indices.
    pub fn embed(&self, target: Universe) -> GrassmannElement {
        assert_eq!(target.d, self.universe.d, "embedding changes the dimension");
        assert!(target.blocks >= self.universe.blocks, "embedding drops blocks");
        GrassmannElement {
            universe: target,
            terms: self.terms.clone(),
        }
    }
}

impl Add for &GrassmannElement {
    type Output = GrassmannElement;
    fn add(self, rhs: &GrassmannElement) -> GrassmannElement {
        self.check_universe(rhs);
        let mut out = self.clone();
        for (&m, c) in &rhs.terms {
            out.add_term(m, c.clone());
        }
        out
    }
}

impl Sub for &GrassmannElement {
    type Output = GrassmannElement;
    fn sub(self, rhs: &GrassmannElement) -> GrassmannElement {
        self + &(-rhs)
    }
}

impl Neg for &GrassmannElement {
    type Output = GrassmannElement;
    fn neg(self) -> GrassmannElement {
        GrassmannElement {
            universe: self.universe,
            terms: self.terms.iter().map(|(&m, c)| (m, -c)).collect(),
        }
    }
}

impl fmt::Display for GrassmannElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (&m, c)) in self.terms.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            write!(f, "[{c}]")?;
            for bit in 0..self.universe.generator_count() as u32 {
                if m & (1u64 << bit) != 0 {
                    let g = self.universe.generator_at(bit);
                    write!(f, " d{}_{}", g.alpha, g.i)?;
                }
            }
        }
        Ok(())
    }
}

/// An integer combination `x = Σ_β c_β u^β` of the block coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockCombination(pub Vec<(usize, i64)>);

impl BlockCombination {
    /// `u^from − u^to`.
    pub fn difference(from: usize, to: usize) -> Self {
        BlockCombination(vec![(from, 1), (to, -1)])
    }

    /// `x̄_i` as a polynomial.
    pub fn conj_coordinate(&self, universe: Universe, i: usize) -> Poly {
        let mut out = Poly::zero();
        for &(block, c) in &self.0 {
            out += &GrassmannElement::symbol(universe, GeneratorIndex::new(block, i))
                .scale(&integer(c));
        }
        out
    }

    /// The one-form `dx̄_i`.
    pub fn one_form(&self, universe: Universe, i: usize) -> GrassmannElement {
        let mut out = GrassmannElement::zero(universe);
        for &(block, c) in &self.0 {
            out = &out
                + &GrassmannElement::generator(universe, GeneratorIndex::new(block, i))
                    .scale_rational(&integer(c));
        }
        out
    }

    /// `dx̄_1 ∧ … ∧ dx̄_d`, the form part of a heat kernel edge.
    pub fn volume_form(&self, universe: Universe) -> GrassmannElement {
        (1..=universe.d()).fold(GrassmannElement::one(universe), |acc, i| {
            acc.wedge(&self.one_form(universe, i))
        })
    }

    /// `Σ_j (−1)^{j−1} x̄_j Π_{i≠j} dx̄_i`, the form part of a propagator edge.
    pub fn propagator_form(&self, universe: Universe) -> GrassmannElement {
        let mut out = GrassmannElement::zero(universe);
        for j in 1..=universe.d() {
            let mut term = GrassmannElement::scalar(universe, self.conj_coordinate(universe, j));
            for i in (1..=universe.d()).filter(|&i| i != j) {
                term = term.wedge(&self.one_form(universe, i));
            }
            if j % 2 == 0 {
                term = -&term;
            }
            out = &out + &term;
        }
        out
    }
}

/// `Π_i (Σ_α dw̄_i^α)`: the volume form of the closing-edge difference `Σ_α w^α`.
fn closing_volume(universe: Universe) -> GrassmannElement {
    let all = BlockCombination((1..=universe.blocks()).map(|b| (b, 1)).collect());
    all.volume_form(universe)
}

/// `Π_α η^α(Π_i dw̄_i^α)` over the open edges of the wheel.
fn open_edges_product(universe: Universe) -> GrassmannElement {
    (1..=universe.blocks()).fold(GrassmannElement::one(universe), |acc, alpha| {
        let block = BlockCombination(vec![(alpha, 1)]).volume_form(universe);
        acc.wedge(&block.contract_eta(alpha))
    })
}

/// Form factor of the `k` propagators around a wheel, written in the
/// difference coordinates `w^α = z^{α+1} − z^α`:
/// `(Σ_α η^α Π_i Σ_α dw̄_i^α) ∧ Π_α η^α Π_i dw̄_i^α`.
pub fn propagator_form_factor(d: usize, k: usize) -> GrassmannElement {
    let universe = Universe::wheel_differences(d, k);
    let mut closing = GrassmannElement::zero(universe);
    let volume = closing_volume(universe);
    for alpha in 1..=universe.blocks() {
        closing = &closing + &volume.contract_eta(alpha);
    }
    closing.wedge(&open_edges_product(universe))
}

/// Form factor with the heat kernel on the closing edge, which carries no
/// contraction: `Π_i (Σ_α dw̄_i^α) ∧ Π_α η^α Π_i dw̄_i^α`.
pub fn anomaly_form_factor(d: usize, k: usize) -> GrassmannElement {
    let universe = Universe::wheel_differences(d, k);
    closing_volume(universe).wedge(&open_edges_product(universe))
}

/// Degree of [`propagator_form_factor`] whenever it is nonzero.
pub fn propagator_form_degree(d: usize, k: usize) -> usize {
    (d - 1) * k
}

/// Degree of [`anomaly_form_factor`] whenever it is nonzero.
pub fn anomaly_form_degree(d: usize, k: usize) -> usize {
    d + (k - 1) * (d - 1)
}

pub fn is_zero(x: &GrassmannElement) -> bool {
    x.is_zero()
}

/// Monomial helper for tests and callers building coefficients by hand.
pub fn symbol_monomial(universe: Universe, gens: &[GeneratorIndex]) -> Monomial {
    Monomial::from_exponents(gens.iter().map(|&g| (universe.index(g), 1)))
}
