//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use holoflow::poly::{integer, Rational};
use num_traits::{One, Zero};

/// Laurent series in `ħ`, power series in a vertex-counting parameter `λ`,
/// polynomial in one variable `x`; keyed by `(λ power, ħ power, x power)`.
#[derive(Clone, Debug, Default)]
struct Series(BTreeMap<(u32, i32, u32), Rational>);

impl Series {
    fn one() -> Self {
        let mut s = Series::default();
        s.0.insert((0, 0, 0), Rational::one());
        s
    }

    fn add_term(&mut self, key: (u32, i32, u32), c: Rational) {
        if c.is_zero() {
            return;
        }
        let slot = self.0.entry(key).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.0.remove(&key);
        }
    }

    fn add(&self, other: &Series, factor: &Rational) -> Series {
        let mut out = self.clone();
        for (&k, c) in &other.0 {
            out.add_term(k, c * factor);
        }
        out
    }

    fn mul(&self, other: &Series, max_lambda: u32) -> Series {
        let mut out = Series::default();
        for (&(l1, h1, x1), c1) in &self.0 {
            for (&(l2, h2, x2), c2) in &other.0 {
                if l1 + l2 <= max_lambda {
                    out.add_term((l1 + l2, h1 + h2, x1 + x2), c1 * c2);
                }
            }
        }
        out
    }
}

/// Coefficients by degree of the `ħ⁰` and `ħ¹` parts of
/// `ħ log(exp(ħ ∂_P) exp(I/ħ))` for one even variable, where
/// `∂_P = (p/2) d²/dx²` and `I = Σ_m (i0[m] + ħ i1[m]) x^m`. Graphs with
/// more than `max_vertices` vertices are dropped.
pub fn formal_flow_one_variable(
    p: &Rational,
    i0: &[Rational],
    i1: &[Rational],
    max_vertices: u32,
) -> (BTreeMap<u32, Rational>, BTreeMap<u32, Rational>) {
    let mut a = Series::default();
    for (m, c) in i0.iter().enumerate() {
        a.add_term((1, -1, m as u32), c.clone());
    }
    for (m, c) in i1.iter().enumerate() {
        a.add_term((1, 0, m as u32), c.clone());
    }

    let mut exp_a = Series::one();
    let mut power = Series::one();
    let mut factorial = Rational::one();
    for j in 1..=max_vertices {
        power = power.mul(&a, max_vertices);
        factorial *= integer(j as i64);
        exp_a = exp_a.add(&power, &(Rational::one() / &factorial));
    }

    let half_p = p / integer(2);
    let mut f = Series::default();
    for (&(l, h, x), c) in &exp_a.0 {
        let mut coef = c.clone();
        let mut r = 0u32;
        loop {
            f.add_term((l, h + r as i32, x - 2 * r), coef.clone());
            if x < 2 * r + 2 {
                break;
            }
            let falling = integer(((x - 2 * r) * (x - 2 * r - 1)) as i64);
            r += 1;
            coef = coef * falling * &half_p / integer(r as i64);
        }
    }

    let mut g = f.clone();
    g.add_term((0, 0, 0), -Rational::one());
    let mut log = Series::default();
    let mut power = Series::one();
    for j in 1..=max_vertices {
        power = power.mul(&g, max_vertices);
        let sign = if j % 2 == 1 { integer(1) } else { integer(-1) };
        log = log.add(&power, &(sign / integer(j as i64)));
    }

    let mut h0 = BTreeMap::new();
    let mut h1 = BTreeMap::new();
    for (&(_, h, x), c) in &log.0 {
        let target = match h + 1 {
            0 => &mut h0,
            1 => &mut h1,
            k if k < 0 => panic!("negative power of ħ survived the logarithm"),
            _ => continue,
        };
        let slot: &mut Rational = target.entry(x).or_insert_with(Rational::zero);
        *slot += c;
    }
    h0.retain(|_, c: &mut Rational| !c.is_zero());
    h1.retain(|_, c: &mut Rational| !c.is_zero());
    (h0, h1)
}
