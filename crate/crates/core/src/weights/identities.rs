//! Identities behind the convergence proof: the Gaussian determinant, the
//! integration-by-parts operators and the AM-GM bound on the `t`-integral.

use nalgebra::{Cholesky, DMatrix};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::WheelData;
use crate::error::{Error, Result};
use crate::kernels::RegulatorWindow;
use crate::poly::{integer, Monomial, Poly, Rational};
use crate::quadrature::{adaptive_cubature, CubatureOptions};

fn check_times(t: &[f64], min_len: usize) -> Result<()> {
    if t.len() < min_len {
        return Err(Error::InvalidArgument(format!("need at least {min_len} Schwinger parameters")));
    }
    if t.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidArgument("Schwinger parameters must be positive and finite".into()));
    }
    Ok(())
}

/// The `(k−1) × (k−1)` matrix with diagonal `1/t_α + 1/t_k` and constant
/// off-diagonal `1/t_k`: the quadratic form of the wheel Gaussian in the
/// coordinates `w^α = z^α − z^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianMatrix {
    t: Vec<f64>,
}

impl GaussianMatrix {
    pub fn new(t: Vec<f64>) -> Result<Self> {
        check_times(&t, 2)?;
        Ok(GaussianMatrix { t })
    }

    pub fn t(&self) -> &[f64] {
        &self.t
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let k = self.t.len();
        let closing = 1.0 / self.t[k - 1];
        DMatrix::from_fn(k - 1, k - 1, |a, b| {
            if a == b {
                1.0 / self.t[a] + closing
            } else {
                closing
            }
        })
    }

    pub fn det(&self) -> f64 {
        let chol = Cholesky::new(self.matrix()).expect("matrix is positive definite for positive t");
        chol.l().diagonal().iter().map(|v| v * v).product()
    }
}

/// `(1/det M, t_1⋯t_k/(t_1+⋯+t_k))`.
pub fn gaussian_det_identity(t: &[f64]) -> Result<(f64, f64)> {
    let m = GaussianMatrix::new(t.to_vec())?;
    let rhs = t.iter().product::<f64>() / t.iter().sum::<f64>();
    Ok((1.0 / m.det(), rhs))
}

/// Wirtinger variables of the IBP check: `w_c ↦ 2c`, `w̄_c ↦ 2c + 1`.
fn wv(c: usize) -> u32 {
    2 * c as u32
}

fn wbv(c: usize) -> u32 {
    2 * c as u32 + 1
}

/// `E(w, t) = exp(−Σ_{α<k} |w^α|²/4t_α − |Σ_α w^α|²/4t_k)` is represented by
/// its exponent.
fn exponent(d: usize, t: &[Rational]) -> Poly {
    let k = t.len();
    let four = integer(4);
    let mut psi = Poly::zero();
    for a in 0..k - 1 {
        let coef = -(integer(1) / (&four * &t[a]));
        for i in 0..d {
            let c = a * d + i;
            psi += &(&Poly::var(wv(c)) * &Poly::var(wbv(c))).scale(&coef);
        }
    }
    let coef = -(integer(1) / (&four * &t[k - 1]));
    for i in 0..d {
        let s = (0..k - 1).fold(Poly::zero(), |acc, a| &acc + &Poly::var(wv(a * d + i)));
        let sb = (0..k - 1).fold(Poly::zero(), |acc, a| &acc + &Poly::var(wbv(a * d + i)));
        psi += &(&s * &sb).scale(&coef);
    }
    psi
}

/// `∇_i^α = ∂/∂w_i^α − Σ_β (t_β/T) ∂/∂w_i^β` with `T = t_1 + ⋯ + t_k`,
/// applied to `p · E`; returns the new polynomial prefactor.
fn nabla(p: &Poly, psi: &Poly, d: usize, t: &[Rational], alpha: usize, i: usize) -> Poly {
    let k = t.len();
    let total: Rational = t.iter().fold(Rational::zero(), |acc, v| acc + v);
    let apply = |f: &Poly| {
        let mut out = f.derivative(wv((alpha - 1) * d + i - 1));
        for b in 0..k - 1 {
            out = &out - &f.derivative(wv(b * d + i - 1)).scale(&(&t[b] / &total));
        }
        out
    };
    &apply(p) + &(p * &apply(psi))
}

/// `D_{α,i} E / E` claimed in closed form:
/// `(−1)^{1+|n^α|} w̄_i^α (w̄^α)^{n^α} / (4t_α)^{1+|n^α|}`.
fn claimed(wd: &WheelData, t: &[Rational], alpha: usize, i: usize) -> Poly {
    let d = wd.d();
    let column: u32 = wd.column_degree(alpha);
    let mut exps = vec![(wbv((alpha - 1) * d + i - 1), 1)];
    for j in 1..=d {
        exps.push((wbv((alpha - 1) * d + j - 1), wd.order(j, alpha)));
    }
    let four_t = &integer(4) * &t[alpha - 1];
    let mut coef = Rational::one();
    for _ in 0..=column {
        coef = &coef / &four_t;
    }
    if column % 2 == 0 {
        coef = -coef;
    }
    Poly::term(Monomial::from_exponents(exps), coef)
}

fn exact_times(t: &[f64]) -> Vec<Rational> {
    t.iter()
        .map(|&v| BigRational::from_float(v).expect("finite parameter"))
        .collect()
}

fn eval_at(p: &Poly, w: &[Complex64]) -> Complex64 {
    p.eval_complex(|v| {
        let c = (v / 2) as usize;
        if v % 2 == 0 { w[c] } else { w[c].conj() }
    })
}

/// The closed-form factor `D_{α,i}E / E` at `w`, for `1 ≤ α ≤ k−1`.
pub fn ibp_monomial_factor(wd: &WheelData, t: &[f64], alpha: usize, i: usize, w: &[Complex64]) -> Result<Complex64> {
    check_times(t, 2)?;
    Ok(eval_at(&claimed(wd, &exact_times(t), alpha, i), w))
}

/// Applies `D_{α,i} = ∇_i^α Π_j (∇_j^α)^{n_j^α}` to `E(w, t)` by exact
/// symbolic differentiation and returns the largest relative residual
/// against the closed-form monomial multiple of `E` over all `α < k`, `i`.
///
/// `w` holds `w^α_i` at index `(α−1)·d + (i−1)`.
pub fn ibp_identity_check(wd: &WheelData, t: &[f64], w: &[Complex64]) -> Result<f64> {
    let (d, k) = (wd.d(), wd.k());
    check_times(t, 2)?;
    if t.len() != k {
        return Err(Error::InvalidArgument(format!("need {k} Schwinger parameters, got {}", t.len())));
    }
    if w.len() != d * (k - 1) {
        return Err(Error::InvalidArgument(format!("need {} coordinates, got {}", d * (k - 1), w.len())));
    }
    let scale = w.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if !scale.is_finite() || w.iter().any(|c| c.norm() < 1e-6 * scale) || scale == 0.0 {
        return Err(Error::InvalidArgument(
            "sample point has (nearly) vanishing components; relative residual is ill-defined".into(),
        ));
    }
    let t_exact = exact_times(t);
    let psi = exponent(d, &t_exact);
    let mut worst: f64 = 0.0;
    for alpha in 1..k {
        let mut base = Poly::one();
        for j in 1..=d {
            for _ in 0..wd.order(j, alpha) {
                base = nabla(&base, &psi, d, &t_exact, alpha, j);
            }
        }
        for i in 1..=d {
            let applied = nabla(&base, &psi, d, &t_exact, alpha, i);
            let claim = claimed(wd, &t_exact, alpha, i);
            let residual = eval_at(&(&applied - &claim), w).norm() / eval_at(&claim, w).norm();
            worst = worst.max(residual);
        }
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub integral: f64,
    pub error: f64,
    pub bound: f64,
    pub holds: bool,
}

/// `((L^p − ε^p)/p)^k` with `p = 1 − d/k`: the product of one-dimensional
/// integrals `∫_ε^L t^{−d/k} dt` that dominates `∫ dt/(Σt)^d` by AM-GM.
pub fn t_integral_bound(d: usize, k: usize, win: &RegulatorWindow) -> Result<f64> {
    if k <= d {
        return Err(Error::InvalidArgument(format!("the bound needs k > d, got d={d}, k={k}")));
    }
    let p = 1.0 - d as f64 / k as f64;
    Ok(((win.big_l.powf(p) - win.eps.powf(p)) / p).powi(k as i32))
}

/// Integrates `∫_{[ε,L]^k} dt/(t_1+⋯+t_k)^d` and compares with
/// [`t_integral_bound`].
pub fn t_integral_bound_check(d: usize, k: usize, win: &RegulatorWindow, rel_tol: f64) -> Result<BoundCheck> {
    let bound = t_integral_bound(d, k, win)?;
    let f = |s: &[f64]| {
        let t: Vec<f64> = s.iter().map(|v| v.exp()).collect();
        let jac: f64 = t.iter().product();
        Complex64::new(jac / t.iter().sum::<f64>().powi(d as i32), 0.0)
    };
    let opts = CubatureOptions {
        rel_tol,
        ..CubatureOptions::default()
    };
    let est = adaptive_cubature(f, &vec![win.eps.ln(); k], &vec![win.big_l.ln(); k], &opts)?;
    Ok(BoundCheck {
        integral: est.value.re,
        error: est.error,
        bound,
        holds: est.value.re + est.error <= bound,
    })
}
