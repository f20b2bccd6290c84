//! Analytic wheel weights `W^{k,(n)}_{ε<L}(Φ)`.
//!
//! A wheel has vertices `z^1, …, z^k ∈ C^d` and edges `z^α → z^{α+1}`
//! (indices mod `k`), each carrying the regulated propagator in the
//! heat-kernel normalization, with `(∂/∂z^α)^{n^α}` applied on the edge
//! leaving vertex `α`. The exterior algebra of the edge forms is expanded
//! exactly; the scalar that multiplies the top form is then integrated
//! against the test function. Two evaluation schemes are available:
//!
//! * [`Scheme::Gaussian`]: the `z`-integral is done exactly (a complex
//!   Gaussian against a polynomial) and the Schwinger parameters are
//!   integrated by adaptive cubature in `log t`.
//! * [`Scheme::Direct`]: the `t`-integrals are done in closed form per edge
//!   and the `z`-integral by Gauss–Hermite or randomized quasi-Monte Carlo.

mod direct;
mod gaussian;
mod identities;
pub(crate) mod integrand;
pub(crate) mod sweep;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grassmann;
use crate::kernels::RegulatorWindow;
use crate::testfn::TestFunction;

pub use gaussian::GaussianSystem;
pub use identities::{
    gaussian_det_identity, ibp_identity_check, ibp_monomial_factor, t_integral_bound, t_integral_bound_check,
    BoundCheck, GaussianMatrix,
};
pub use integrand::{EdgeKind, WheelIntegrand};
pub use sweep::{epsilon_sweep, geometric_grid, ConvergenceReport, SweepOptions, SweepStatus};

/// Vertex count `k` and the `d × k` matrix of holomorphic derivative orders.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WheelData {
    k: usize,
    /// `n[i][α]`, 0-based.
    n: Vec<Vec<u32>>,
}

impl WheelData {
    /// `n` is given row by row: `d` rows of `k` entries.
    pub fn new(n: Vec<Vec<u32>>) -> Result<Self> {
        let d = n.len();
        if d == 0 {
            return Err(Error::InvalidArgument("derivative matrix needs at least one row".into()));
        }
        let k = n[0].len();
        if k < 2 {
            return Err(Error::InvalidArgument(format!("a wheel needs k >= 2 vertices, got {k}")));
        }
        if n.iter().any(|row| row.len() != k) {
            return Err(Error::InvalidArgument("derivative matrix rows differ in length".into()));
        }
        Ok(WheelData { k, n })
    }

    /// No derivatives.
    pub fn plain(d: usize, k: usize) -> Result<Self> {
        WheelData::new(vec![vec![0; k]; d])
    }

    pub fn d(&self) -> usize {
        self.n.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `n_i^α` with 1-based `i` and `α`.
    pub fn order(&self, i: usize, alpha: usize) -> u32 {
        self.n[i - 1][alpha - 1]
    }

    pub fn matrix(&self) -> &[Vec<u32>] {
        &self.n
    }

    /// `|n^α| = Σ_i n_i^α`.
    pub fn column_degree(&self, alpha: usize) -> u32 {
        self.n.iter().map(|row| row[alpha - 1]).sum()
    }

    /// Relabels vertices `α → α + shift`.
    pub fn rotated(&self, shift: usize) -> WheelData {
        let k = self.k;
        let n = self
            .n
            .iter()
            .map(|row| (0..k).map(|a| row[(a + k - shift % k) % k]).collect())
            .collect();
        WheelData { k, n }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Direct,
    Gaussian,
}

#[derive(Clone, Debug)]
pub struct WeightOptions {
    /// Relative tolerance of the `t` cubature.
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_evaluations: usize,
    /// Gauss–Hermite nodes per real axis for the direct scheme; 0 picks a
    /// default from the dimension.
    pub hermite_nodes: usize,
    pub qmc_points: usize,
    pub qmc_replicas: usize,
    pub seed: u64,
}

impl Default for WeightOptions {
    fn default() -> Self {
        WeightOptions {
            rel_tol: 1e-7,
            abs_tol: 0.0,
            max_evaluations: 50_000_000,
            hermite_nodes: 0,
            qmc_points: 1 << 14,
            qmc_replicas: 16,
            seed: 0x5eed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightEstimate {
    pub value: Complex64,
    pub error: f64,
    pub evaluations: usize,
    /// Set when the integrand vanishes identically and nothing was integrated.
    pub exact_zero: bool,
    pub scheme: Scheme,
}

impl WeightEstimate {
    pub(crate) fn zero(scheme: Scheme) -> Self {
        WeightEstimate {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
            evaluations: 0,
            exact_zero: true,
            scheme,
        }
    }
}

pub(crate) fn check_inputs(wd: &WheelData, phi: &TestFunction) -> Result<()> {
    if phi.d() != wd.d() || phi.k() != wd.k() {
        return Err(Error::InvalidArgument(format!(
            "test function lives on (C^{})^{} but the wheel needs (C^{})^{}",
            phi.d(),
            phi.k(),
            wd.d(),
            wd.k()
        )));
    }
    Ok(())
}

pub(crate) fn check_feasible(wd: &WheelData, scheme: Scheme) -> Result<()> {
    match scheme {
        Scheme::Direct if wd.d() * wd.k() > 8 => Err(Error::Infeasible {
            what: "direct quadrature",
            reason: format!("d·k = {} exceeds 8", wd.d() * wd.k()),
        }),
        Scheme::Gaussian if wd.k() > 6 => Err(Error::Infeasible {
            what: "Gaussian-reduced evaluation",
            reason: format!("k = {} exceeds 6", wd.k()),
        }),
        _ => Ok(()),
    }
}

/// `W^{k,(n)}_{ε<L}(Φ)` with an error estimate. For `k ≤ d` the weight is
/// exactly zero by the vanishing of the wheel form factor and no integral is
/// evaluated.
pub fn wheel_weight(
    wd: &WheelData,
    phi: &TestFunction,
    win: &RegulatorWindow,
    scheme: Scheme,
    opts: &WeightOptions,
) -> Result<WeightEstimate> {
    check_inputs(wd, phi)?;
    if wd.k() <= wd.d() && grassmann::is_zero(&grassmann::propagator_form_factor(wd.d(), wd.k())) {
        return Ok(WeightEstimate::zero(scheme));
    }
    check_feasible(wd, scheme)?;
    let Some(integrand) = WheelIntegrand::build(wd, None, phi)? else {
        return Ok(WeightEstimate::zero(scheme));
    };
    evaluate(&integrand, phi, win, scheme, opts)
}

pub(crate) fn evaluate(
    integrand: &WheelIntegrand,
    phi: &TestFunction,
    win: &RegulatorWindow,
    scheme: Scheme,
    opts: &WeightOptions,
) -> Result<WeightEstimate> {
    match scheme {
        Scheme::Gaussian => gaussian::integrate(integrand, phi, win, opts),
        Scheme::Direct => direct::integrate(integrand, phi, win, opts),
    }
}
