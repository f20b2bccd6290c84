//! Exact form-algebra part of a wheel integrand.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::WheelData;
use crate::error::{Error, Result};
use crate::grassmann::{BlockCombination, GeneratorIndex, GrassmannElement, Universe};
use crate::poly::{ComplexPoly, Poly};
use crate::testfn::TestFunction;

/// Variable of `z_c` in a numerator, `c = α·d + i` 0-based.
pub fn hol_var(c: usize) -> u32 {
    3 * c as u32
}

/// Variable of `z̄_c`.
pub fn antihol_var(c: usize) -> u32 {
    3 * c as u32 + 1
}

/// Variable of `x̄_{e,i}` where `x_e = z^e − z^{e+1}` (0-based edge and coordinate).
pub fn edge_var(d: usize, edge: usize, i: usize) -> u32 {
    3 * (edge * d + i) as u32 + 2
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    /// Regulated propagator `∫_ε^L dt (∂̄* ⊗ 1) K_t`.
    Propagator,
    /// Heat kernel `K_ε` with no `∂̄*`.
    Heat,
}

/// Scalar integrand of a wheel after the exterior algebra is expanded.
///
/// With the vertex inputs fixed to constant anti-holomorphic forms, the
/// integrand is `numerator(z, z̄, x̄) · Π_e s_e(t_e) e^{−|x_e|²/4t_e}` times
/// the Gaussian of the test function, where `s_e(t) = (4πt)^{−d}(4t)^{−1−|n_e|}`
/// on propagator edges and `(4πt)^{−d}(4t)^{−|n_e|}` on heat edges.
#[derive(Clone, Debug)]
pub struct WheelIntegrand {
    pub d: usize,
    pub k: usize,
    pub kinds: Vec<EdgeKind>,
    /// `|n_e|` per edge.
    pub orders: Vec<u32>,
    /// Coordinates (1-based) of the constant form placed at each vertex.
    pub input_form: Vec<Vec<usize>>,
    /// Top coefficient of the edge forms wedged with the input form, times
    /// `Π_e Π_i (−x̄_{e,i})^{n_{e,i}}`; a polynomial in the `x̄` variables.
    pub form_polynomial: Poly,
    /// `form_polynomial` times the polynomial factor of the test function.
    pub numerator: ComplexPoly,
    /// True when the test function carries no polynomial factor.
    pub pure_gaussian: bool,
}

/// `x̄_{e,i}` as a polynomial in the independent edge variables: around the
/// cycle `x_{k−1} = −(x_0 + ⋯ + x_{k−2})`, so the last edge is eliminated and
/// identities that hold only on the constraint surface become exact.
fn edge_symbol(d: usize, k: usize, edge: usize, i: usize) -> Poly {
    if edge + 1 < k {
        Poly::var(edge_var(d, edge, i))
    } else {
        -&(0..k - 1).fold(Poly::zero(), |acc, e| &acc + &Poly::var(edge_var(d, e, i)))
    }
}

fn edge_propagator_form(universe: Universe, x: &BlockCombination, edge: usize) -> GrassmannElement {
    let d = universe.d();
    let k = universe.blocks();
    let mut out = GrassmannElement::zero(universe);
    for j in 1..=d {
        let mut term = GrassmannElement::scalar(universe, edge_symbol(d, k, edge, j - 1));
        for i in (1..=d).filter(|&i| i != j) {
            term = term.wedge(&x.one_form(universe, i));
        }
        if j % 2 == 0 {
            term = -&term;
        }
        out = &out + &term;
    }
    out
}

impl WheelIntegrand {
    /// Expands the integrand. `heat_edge` (0-based) carries `K_ε` instead of
    /// a propagator. Returns `None` when the form factor vanishes identically.
    ///
    /// Among the constant input forms of the right degree, the first one in
    /// lexicographic order of the per-vertex coordinate sets is used, with
    /// vertices listed starting after the heat edge so that the choice is
    /// covariant under relabelling.
    pub fn build(wd: &WheelData, heat_edge: Option<usize>, phi: &TestFunction) -> Result<Option<Self>> {
        let (d, k) = (wd.d(), wd.k());
        if let Some(h) = heat_edge {
            if h >= k {
                return Err(Error::InvalidArgument(format!("heat edge {h} outside 0..{k}")));
            }
        }
        if d * k > crate::grassmann::MAX_GENERATORS {
            return Err(Error::Infeasible {
                what: "form expansion",
                reason: format!("{} generators", d * k),
            });
        }
        let universe = Universe::new(d, k);
        let mut kinds = Vec::with_capacity(k);
        let mut product = GrassmannElement::one(universe);
        for e in 0..k {
            let x = BlockCombination::difference(e + 1, (e + 1) % k + 1);
            let kind = if heat_edge == Some(e) { EdgeKind::Heat } else { EdgeKind::Propagator };
            let form = match kind {
                EdgeKind::Heat => x.volume_form(universe),
                EdgeKind::Propagator => edge_propagator_form(universe, &x, e),
            };
            product = product.wedge(&form);
            kinds.push(kind);
            if product.is_zero() {
                return Ok(None);
            }
        }

        let full = universe.full_mask();
        let start = heat_edge.map(|h| (h + 1) % k).unwrap_or(0);
        let block_mask = (1u64 << d) - 1;
        let key = |input: u64| -> Vec<u64> {
            (0..k)
                .map(|j| (input >> (((start + j) % k) * d)) & block_mask)
                .collect()
        };
        let Some(input) = product.terms().map(|(mask, _)| full ^ mask).min_by_key(|&m| key(m)) else {
            return Ok(None);
        };
        let input_gens: Vec<GeneratorIndex> = (0..d * k)
            .filter(|b| input & (1u64 << b) != 0)
            .map(|b| universe.generator_at(b as u32))
            .collect();
        let input_form_element = input_gens.iter().fold(GrassmannElement::one(universe), |acc, &g| {
            acc.wedge(&GrassmannElement::generator(universe, g))
        });
        let top = product.wedge(&input_form_element).top_coefficient();
        if top.is_zero() {
            return Ok(None);
        }

        let mut orders = vec![0u32; k];
        let mut derivative = Poly::one();
        for (e, order) in orders.iter_mut().enumerate() {
            for i in 0..d {
                let n = wd.order(i + 1, e + 1);
                *order += n;
                let factor = -&edge_symbol(d, k, e, i);
                for _ in 0..n {
                    derivative = &derivative * &factor;
                }
            }
        }
        let form_polynomial = &top * &derivative;

        let phi_poly = phi.complex_polynomial().substitute(|v| {
            let c = (v / 2) as usize;
            ComplexPoly::var(if v % 2 == 0 { hol_var(c) } else { antihol_var(c) })
        });
        let numerator = ComplexPoly::from_exact(&form_polynomial).mul(&phi_poly);

        let mut input_form = vec![Vec::new(); k];
        for g in input_gens {
            input_form[g.alpha - 1].push(g.i);
        }
        Ok(Some(WheelIntegrand {
            d,
            k,
            kinds,
            orders,
            input_form,
            form_polynomial,
            numerator,
            pure_gaussian: phi.is_pure_gaussian(),
        }))
    }

    /// `ln s_e(t)` for edge `e`.
    pub fn edge_log_scale(&self, e: usize, t: f64) -> f64 {
        let d = self.d as f64;
        let extra = match self.kinds[e] {
            EdgeKind::Propagator => 1.0,
            EdgeKind::Heat => 0.0,
        };
        -d * (4.0 * std::f64::consts::PI * t).ln() - (extra + f64::from(self.orders[e])) * (4.0 * t).ln()
    }

    /// Edges integrated over `t ∈ [ε, L]`.
    pub fn propagator_edges(&self) -> Vec<usize> {
        (0..self.k).filter(|&e| self.kinds[e] == EdgeKind::Propagator).collect()
    }

    /// Evaluates the numerator at a point, flattened as `c = α·d + i`.
    pub fn numerator_at(&self, z: &[Complex64]) -> Complex64 {
        let (d, k) = (self.d, self.k);
        self.numerator.eval(|v| {
            let c = (v / 3) as usize;
            match v % 3 {
                0 => z[c],
                1 => z[c].conj(),
                _ => {
                    let (e, i) = (c / d, c % d);
                    (z[e * d + i] - z[((e + 1) % k) * d + i]).conj()
                }
            }
        })
    }
}
