//! Heat kernel, regulated propagator and Bochner–Martinelli kernel on `C^d`.
//!
//! The heat kernel is normalized as `(4πt)^{−d} e^{−|z−w|²/4t}` so that it
//! integrates to one. The propagator coefficients use the Bochner–Martinelli
//! normalization `(2πi)^{−d}` so that they tend to `ω_BM` as `ε → 0`,
//! `L → ∞`; [`schwinger_propagator_coefficient`] gives the same summand in
//! the heat-kernel normalization used by the wheel weights. The two differ by
//! the constant factor `(2i)^d / 4`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;
use crate::special::{factorial_gamma, gamma_window};
use crate::testfn::TestFunction;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub coords: Vec<Complex64>,
}

impl Point {
    pub fn new(coords: Vec<Complex64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidArgument("point needs at least one coordinate".into()));
        }
        if coords.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidArgument("point coordinates must be finite".into()));
        }
        Ok(Point { coords })
    }

    pub fn origin(d: usize) -> Self {
        Point {
            coords: vec![Complex64::new(0.0, 0.0); d],
        }
    }

    pub fn d(&self) -> usize {
        self.coords.len()
    }

    pub fn dist2(&self, other: &Point) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum()
    }
}

/// Length-squared cutoffs `0 < ε < L < ∞`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegulatorWindow {
    pub eps: f64,
    #[serde(rename = "L")]
    pub big_l: f64,
}

impl RegulatorWindow {
    pub fn new(eps: f64, big_l: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < big_l && big_l.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "regulator window needs 0 < eps < L < inf, got eps={eps}, L={big_l}"
            )));
        }
        Ok(RegulatorWindow { eps, big_l })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormIndex {
    Scalar,
    /// The summand omitting `dz̄_j`, 1-based.
    Omitted(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelValue {
    pub coefficient: Complex64,
    pub form_index: FormIndex,
}

fn same_dimension(z: &Point, w: &Point) -> Result<()> {
    if z.d() != w.d() {
        return Err(Error::InvalidArgument(format!(
            "points live in different dimensions ({} and {})",
            z.d(),
            w.d()
        )));
    }
    Ok(())
}

fn check_summand(j: usize, d: usize) -> Result<()> {
    if j == 0 || j > d {
        return Err(Error::InvalidArgument(format!("summand index {j} outside 1..={d}")));
    }
    Ok(())
}

fn alternating(j: usize) -> f64 {
    if j % 2 == 1 { 1.0 } else { -1.0 }
}

/// `(2πi)^{−d}`.
fn bm_constant(d: usize) -> Complex64 {
    Complex64::new(0.0, 2.0 * PI).powi(-(d as i32))
}

/// `(4πt)^{−d} exp(−|z−w|²/4t)`.
pub fn heat_kernel_scalar(t: f64, z: &Point, w: &Point) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("heat kernel time must be positive, got {t}")));
    }
    same_dimension(z, w)?;
    let d = z.d() as i32;
    Ok((4.0 * PI * t).powi(-d) * (-z.dist2(w) / (4.0 * t)).exp())
}

/// The `j`-th summand of the regulated propagator,
/// `(−1)^{j−1} (z̄_j − w̄_j) (2πi)^{−d} |z−w|^{−2d} γ(d; |z−w|²/4L, |z−w|²/4ε)`.
pub fn propagator_coefficient(win: &RegulatorWindow, j: usize, z: &Point, w: &Point) -> Result<KernelValue> {
    same_dimension(z, w)?;
    let d = z.d();
    check_summand(j, d)?;
    let r2 = z.dist2(w);
    if r2 == 0.0 {
        return Err(Error::Diagonal);
    }
    let gamma = gamma_window(d as u32, r2 / (4.0 * win.big_l), r2 / (4.0 * win.eps));
    let xbar = (z.coords[j - 1] - w.coords[j - 1]).conj();
    Ok(KernelValue {
        coefficient: xbar * bm_constant(d) * (alternating(j) * gamma / r2.powi(d as i32)),
        form_index: FormIndex::Omitted(j),
    })
}

/// The same summand as `∫_ε^L dt (4πt)^{−d} (x̄_j/4t) e^{−|x|²/4t}` with the
/// alternating sign, i.e. in the heat-kernel normalization.
pub fn schwinger_propagator_coefficient(
    win: &RegulatorWindow,
    j: usize,
    z: &Point,
    w: &Point,
) -> Result<KernelValue> {
    let bm = propagator_coefficient(win, j, z, w)?;
    let d = z.d() as i32;
    Ok(KernelValue {
        coefficient: bm.coefficient * Complex64::new(0.0, 2.0).powi(d) / 4.0,
        form_index: bm.form_index,
    })
}

/// `(d−1)!/(2πi)^d · (−1)^{j−1}(z̄_j − w̄_j) |z−w|^{−2d}`.
pub fn bochner_martinelli(j: usize, z: &Point, w: &Point) -> Result<KernelValue> {
    same_dimension(z, w)?;
    let d = z.d();
    check_summand(j, d)?;
    let r2 = z.dist2(w);
    if r2 == 0.0 {
        return Err(Error::Diagonal);
    }
    let xbar = (z.coords[j - 1] - w.coords[j - 1]).conj();
    Ok(KernelValue {
        coefficient: xbar
            * bm_constant(d)
            * (alternating(j) * factorial_gamma(d as u32) / r2.powi(d as i32)),
        form_index: FormIndex::Omitted(j),
    })
}

/// Node counts for [`greens_equation_check`]. The radial range
/// `[0, max|c| + radius_widths·σ]` is cut into panels of one width, each
/// carrying `radial` Gauss–Legendre nodes; angles use `angular` equispaced
/// nodes (and `radial` Gauss–Legendre nodes for the `d = 2` polar angle).
/// Node counts are doubled until two passes agree within `tolerance`.
#[derive(Clone, Debug)]
pub struct GreensQuadrature {
    pub radial: usize,
    pub angular: usize,
    pub radius_widths: f64,
    pub tolerance: f64,
    pub max_doublings: usize,
}

impl Default for GreensQuadrature {
    fn default() -> Self {
        GreensQuadrature {
            radial: 8,
            angular: 16,
            radius_widths: 9.0,
            tolerance: 1e-10,
            max_doublings: 5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreensReport {
    /// `∫ ω_BM(z, 0) ∧ ∂̄φ ∧ d^d z`.
    pub value: Complex64,
    pub error: f64,
    pub phi_at_origin: f64,
    /// The pairing equals `sign · φ(0)`; with the orientation `dz̄ ∧ dz = 2i dx ∧ dy`
    /// and the wedge order above this is `−1` for `d = 1, 2`.
    pub sign: f64,
    pub evaluations: usize,
}

/// Pairs `ω_BM(·, 0)` with `∂̄φ` numerically. Up to orientation this is
/// `(d−1)!/π^d ∫ |z|^{−2d} Σ_j z̄_j ∂φ/∂z̄_j d^{2d}z`, which the
/// Cauchy–Pompeiu formula evaluates to `−φ(0)`.
pub fn greens_equation_check(phi: &TestFunction, quad: &GreensQuadrature) -> Result<GreensReport> {
    if phi.k() != 1 {
        return Err(Error::InvalidArgument("Green's check takes a test function on a single C^d".into()));
    }
    let d = phi.d();
    if d > 2 {
        return Err(Error::Unsupported(format!("Green's check is implemented for d = 1, 2, not {d}")));
    }
    let reach = phi.centers()[0].iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
        + quad.radius_widths * phi.sigma();
    let panels = (reach / phi.sigma()).ceil().max(1.0) as usize;

    let mut radial = quad.radial.max(2);
    let mut angular = quad.angular.max(2);
    let mut previous: Option<Complex64> = None;
    let mut evaluations = 0;
    for _ in 0..=quad.max_doublings {
        let (value, evals) = match d {
            1 => greens_d1(phi, reach, panels, radial, angular),
            _ => greens_d2(phi, reach, panels, radial, angular),
        };
        evaluations += evals;
        if let Some(prev) = previous {
            let error = (value - prev).norm();
            if error <= quad.tolerance * value.norm().max(1.0) {
                let origin = vec![Complex64::new(0.0, 0.0); d];
                return Ok(GreensReport {
                    value,
                    error,
                    phi_at_origin: phi.eval(&origin),
                    sign: -1.0,
                    evaluations,
                });
            }
            if radial * angular > 1 << 14 {
                return Err(Error::NonConvergence {
                    estimate: value.re,
                    error,
                    evaluations,
                });
            }
        }
        previous = Some(value);
        radial *= 2;
        angular *= 2;
    }
    let value = previous.unwrap_or_default();
    Err(Error::NonConvergence {
        estimate: value.re,
        error: f64::NAN,
        evaluations,
    })
}

fn composite_nodes(reach: f64, panels: usize, per_panel: usize) -> Vec<(f64, f64)> {
    let rule = gauss_legendre(per_panel);
    let h = reach / panels as f64;
    let mut out = Vec::with_capacity(panels * per_panel);
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * h;
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            out.push((mid + 0.5 * h * x, 0.5 * h * w));
        }
    }
    out
}

fn greens_d1(phi: &TestFunction, reach: f64, panels: usize, radial: usize, angular: usize) -> (Complex64, usize) {
    // (1/π) ∫ ∂φ/∂z̄ · z̄/|z|² r dr dθ, and z̄ r/|z|² = e^{−iθ}
    let mut acc = Complex64::new(0.0, 0.0);
    let dtheta = 2.0 * PI / angular as f64;
    let nodes = composite_nodes(reach, panels, radial);
    for &(r, wr) in &nodes {
        for m in 0..angular {
            let theta = m as f64 * dtheta;
            let phase = Complex64::from_polar(1.0, theta);
            acc += phi.dbar(&[phase * r], 0) * phase.conj() * (wr * dtheta);
        }
    }
    (acc / PI, nodes.len() * angular)
}

fn greens_d2(phi: &TestFunction, reach: f64, panels: usize, radial: usize, angular: usize) -> (Complex64, usize) {
    // z1 = r cosψ e^{iθ1}, z2 = r sinψ e^{iθ2}, d^4z = r³ cosψ sinψ dr dψ dθ1 dθ2
    let dtheta = 2.0 * PI / angular as f64;
    let nodes = composite_nodes(reach, panels, radial);
    let psi_rule = gauss_legendre(radial.max(4));
    let mut acc = Complex64::new(0.0, 0.0);
    let mut evals = 0;
    for &(r, wr) in &nodes {
        for (x, wx) in psi_rule.nodes.iter().zip(&psi_rule.weights) {
            let psi = PI / 4.0 * (1.0 + x);
            let wpsi = PI / 4.0 * wx;
            let (s, c) = psi.sin_cos();
            for m1 in 0..angular {
                let e1 = Complex64::from_polar(1.0, m1 as f64 * dtheta);
                for m2 in 0..angular {
                    let e2 = Complex64::from_polar(1.0, m2 as f64 * dtheta);
                    let z = [e1 * (r * c), e2 * (r * s)];
                    // |z|^{−4} z̄_j r³ = conj(z_j / r)
                    let integrand = phi.dbar(&z, 0) * (e1.conj() * c) + phi.dbar(&z, 1) * (e2.conj() * s);
                    acc += integrand * (c * s * wr * wpsi * dtheta * dtheta);
                    evals += 1;
                }
            }
        }
    }
    (acc / (PI * PI), evals)
}
