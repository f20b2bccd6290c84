//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! Variables are plain `u32` indices; what an index means is up to the
//! caller (anti-holomorphic coordinates in [`crate::grassmann`], per-vertex
//! field copies in [`crate::rgflow`]).

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

pub fn rational(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn integer(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

pub fn to_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// A monomial as a sorted list of `(variable, exponent)` pairs with
/// positive exponents.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(Vec<(u32, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: u32) -> Self {
        Monomial(vec![(v, 1)])
    }

    pub fn from_exponents(pairs: impl IntoIterator<Item = (u32, u32)>) -> Self {
        let mut acc: BTreeMap<u32, u32> = BTreeMap::new();
        for (v, e) in pairs {
            if e > 0 {
                *acc.entry(v).or_insert(0) += e;
            }
        }
        Monomial(acc.into_iter().collect())
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn exponent(&self, v: u32) -> u32 {
        self.0
            .binary_search_by_key(&v, |&(var, _)| var)
            .map(|pos| self.0[pos].1)
            .unwrap_or(0)
    }

    pub fn factors(&self) -> &[(u32, u32)] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut a, mut b) = (self.0.iter().peekable(), other.0.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some(&&(va, ea)), Some(&&(vb, eb))) => {
                    if va == vb {
                        out.push((va, ea + eb));
                        a.next();
                        b.next();
                    } else if va < vb {
                        out.push((va, ea));
                        a.next();
                    } else {
                        out.push((vb, eb));
                        b.next();
                    }
                }
                (Some(&&p), None) => {
                    out.push(p);
                    a.next();
                }
                (None, Some(&&p)) => {
                    out.push(p);
                    b.next();
                }
                (None, None) => break,
            }
        }
        Monomial(out)
    }

    /// Lowers the exponent of `v` by one, returning the old exponent.
    pub fn divide_var(&self, v: u32) -> Option<(u32, Monomial)> {
        let pos = self.0.binary_search_by_key(&v, |&(var, _)| var).ok()?;
        let mut out = self.0.clone();
        let e = out[pos].1;
        if e == 1 {
            out.remove(pos);
        } else {
            out[pos].1 -= 1;
        }
        Some((e, Monomial(out)))
    }

    /// Degree counted only over the variables accepted by `filter`.
    pub fn degree_in(&self, filter: impl Fn(u32) -> bool) -> u32 {
        self.0.iter().filter(|&&(v, _)| filter(v)).map(|&(_, e)| e).sum()
    }
}

/// Polynomial with exact rational coefficients. Zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Poly {
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Poly::term(Monomial::one(), c)
    }

    pub fn var(v: u32) -> Self {
        Poly::term(Monomial::var(v), Rational::one())
    }

    pub fn term(m: Monomial, c: Rational) -> Self {
        let mut p = Poly::zero();
        p.add_term(m, c);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    /// Largest total degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(slot) => {
                slot.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut slot) => {
                *slot.get_mut() += c;
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn derivative(&self, v: u32) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            if let Some((e, rest)) = m.divide_var(v) {
                out.add_term(rest, c * integer(e as i64));
            }
        }
        out
    }

    /// Renames variables; monomials that collide are merged.
    pub fn map_vars(&self, f: impl Fn(u32) -> u32) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let renamed = Monomial::from_exponents(m.factors().iter().map(|&(v, e)| (f(v), e)));
            out.add_term(renamed, c.clone());
        }
        out
    }

    pub fn homogeneous_part(&self, degree: u32) -> Poly {
        self.filter_terms(|m| m.degree() == degree)
    }

    pub fn truncate(&self, max_degree: u32) -> Poly {
        self.filter_terms(|m| m.degree() <= max_degree)
    }

    pub fn filter_terms(&self, keep: impl Fn(&Monomial) -> bool) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| keep(m))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Degrees of the nonzero homogeneous components.
    pub fn degrees(&self) -> Vec<u32> {
        let mut out: Vec<u32> = self.terms.keys().map(Monomial::degree).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn eval_complex(&self, value: impl Fn(u32) -> Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, c) in &self.terms {
            let mut t = Complex64::new(to_f64(c), 0.0);
            for &(v, e) in m.factors() {
                t *= value(v).powu(e);
            }
            acc += t;
        }
        acc
    }

    pub fn max_abs_coefficient(&self) -> Rational {
        self.terms
            .values()
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(Rational::zero)
    }
}

impl Add<&Poly> for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl AddAssign<&Poly> for Poly {
    fn add_assign(&mut self, rhs: &Poly) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl Sub<&Poly> for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }
}

impl Mul<&Poly> for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (m, c)) in self.terms.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})")?;
            for &(v, e) in m.factors() {
                if e == 1 {
                    write!(f, "*x{v}")?;
                } else {
                    write!(f, "*x{v}^{e}")?;
                }
            }
        }
        Ok(())
    }
}

/// Polynomial with floating-point complex coefficients, used once exact
/// data has been combined with numerical centers and widths.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ComplexPoly {
    terms: BTreeMap<Monomial, Complex64>,
}

impl ComplexPoly {
    pub fn zero() -> Self {
        ComplexPoly::default()
    }

    pub fn constant(c: Complex64) -> Self {
        let mut p = ComplexPoly::zero();
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn var(v: u32) -> Self {
        let mut p = ComplexPoly::zero();
        p.add_term(Monomial::var(v), Complex64::new(1.0, 0.0));
        p
    }

    pub fn from_exact(p: &Poly) -> Self {
        let mut out = ComplexPoly::zero();
        for (m, c) in p.terms() {
            out.add_term(m.clone(), Complex64::new(to_f64(c), 0.0));
        }
        out
    }

    pub fn add_term(&mut self, m: Monomial, c: Complex64) {
        if c == Complex64::new(0.0, 0.0) {
            return;
        }
        let slot = self.terms.entry(m).or_insert(Complex64::new(0.0, 0.0));
        *slot += c;
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Complex64)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.values().all(|c| *c == Complex64::new(0.0, 0.0))
    }

    pub fn scale(&self, c: Complex64) -> ComplexPoly {
        ComplexPoly {
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn add(&self, other: &ComplexPoly) -> ComplexPoly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), *c);
        }
        out
    }

    pub fn mul(&self, other: &ComplexPoly) -> ComplexPoly {
        let mut out = ComplexPoly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    /// Substitutes each variable by a polynomial.
    pub fn substitute(&self, image: impl Fn(u32) -> ComplexPoly) -> ComplexPoly {
        let mut out = ComplexPoly::zero();
        for (m, c) in &self.terms {
            let mut t = ComplexPoly::constant(*c);
            for &(v, e) in m.factors() {
                let base = image(v);
                for _ in 0..e {
                    t = t.mul(&base);
                }
            }
            out = out.add(&t);
        }
        out
    }

    pub fn eval(&self, value: impl Fn(u32) -> Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, c) in &self.terms {
            let mut t = *c;
            for &(v, e) in m.factors() {
                t *= value(v).powu(e);
            }
            acc += t;
        }
        acc
    }
}
