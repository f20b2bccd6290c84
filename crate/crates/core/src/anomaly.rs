//! Wheels with the heat kernel `K_ε` on one distinguished edge.
//!
//! These are the weights `W̃^{k,(n)}_{ε<L}(Φ)` whose iterated limit
//! `lim_{L→0} lim_{ε→0}` produces the one-loop anomaly. Only wheels with
//! `k = d + 1` vertices survive that limit.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grassmann;
use crate::kernels::RegulatorWindow;
use crate::testfn::TestFunction;
use crate::weights::sweep::{assemble, validate_grid};
use crate::weights::{
    check_feasible, check_inputs, evaluate, ConvergenceReport, Scheme, SweepOptions, SweepStatus, WeightEstimate,
    WheelData, WheelIntegrand,
};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnomalyWheelData {
    pub wd: WheelData,
    /// 0-based edge `e`, joining `z^{e+1}` to `z^{e+2}` (mod `k`), that carries `K_ε`.
    pub distinguished_edge: usize,
}

impl AnomalyWheelData {
    pub fn new(wd: WheelData, distinguished_edge: usize) -> Result<Self> {
        if distinguished_edge >= wd.k() {
            return Err(invalid(format!(
                "distinguished edge {distinguished_edge} is not one of the {} wheel edges",
                wd.k()
            )));
        }
        Ok(AnomalyWheelData { wd, distinguished_edge })
    }

    /// Heat kernel on the closing edge `z^k → z^1`.
    pub fn closing(wd: WheelData) -> Self {
        let e = wd.k() - 1;
        AnomalyWheelData { wd, distinguished_edge: e }
    }

    /// Relabels vertices `α → α + shift`, moving the distinguished edge along.
    pub fn rotated(&self, shift: usize) -> Self {
        let k = self.wd.k();
        AnomalyWheelData {
            wd: self.wd.rotated(shift),
            distinguished_edge: (self.distinguished_edge + shift) % k,
        }
    }
}

/// `W̃^{k,(n)}_{ε<L}(Φ)` by Gaussian reduction: the heat edge is fixed at
/// `t = ε` and the remaining `k − 1` Schwinger parameters are integrated.
/// For `k ≤ d` the form factor vanishes and the result is an exact zero.
pub fn anomaly_weight(
    awd: &AnomalyWheelData,
    phi: &TestFunction,
    win: &RegulatorWindow,
    opts: &crate::weights::WeightOptions,
) -> Result<WeightEstimate> {
    let wd = &awd.wd;
    check_inputs(wd, phi)?;
    if wd.k() <= wd.d() && grassmann::is_zero(&grassmann::anomaly_form_factor(wd.d(), wd.k())) {
        return Ok(WeightEstimate::zero(Scheme::Gaussian));
    }
    check_feasible(wd, Scheme::Gaussian)?;
    let Some(integrand) = WheelIntegrand::build(wd, Some(awd.distinguished_edge), phi)? else {
        return Ok(WeightEstimate::zero(Scheme::Gaussian));
    };
    evaluate(&integrand, phi, win, Scheme::Gaussian, opts)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitVerdict {
    /// The iterated limit is below the tolerance relative to the largest `L`.
    Zero,
    /// The outer values settle on a value bounded away from zero.
    Nonzero,
    /// Neither criterion was met on the given grids.
    Undetermined,
}

#[derive(Clone, Debug)]
pub struct AnomalyScanOptions {
    pub sweep: SweepOptions,
    /// Relative threshold of the zero verdict, against the value at the largest `L`.
    pub zero_tolerance: f64,
    /// Relative size of the last outer Cauchy difference for a nonzero verdict.
    pub stability_tolerance: f64,
}

impl Default for AnomalyScanOptions {
    fn default() -> Self {
        AnomalyScanOptions {
            sweep: SweepOptions::default(),
            zero_tolerance: 1e-4,
            stability_tolerance: 1e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnomalyScanReport {
    #[serde(rename = "L_grid")]
    pub l_grid: Vec<f64>,
    /// Inner `ε → 0` sweeps, one per `L`; their grids are `ratio · L`.
    pub inner: Vec<ConvergenceReport>,
    /// `lim_{ε→0}` estimate at each `L` (the last inner value).
    pub limits: Vec<Complex64>,
    /// Last inner Cauchy difference plus the quadrature error bar.
    pub limit_errors: Vec<f64>,
    /// `|limit(L_min)| / |limit(L_max)|`.
    pub relative_final: f64,
    /// Last outer Cauchy difference relative to the final limit.
    pub relative_outer_delta: f64,
    pub verdict: LimitVerdict,
    /// Worst inner status; `converged` when every inner sweep converged.
    pub inner_status: SweepStatus,
    pub note: String,
}

impl AnomalyScanReport {
    pub fn final_limit(&self) -> Complex64 {
        self.limits.last().copied().unwrap_or_default()
    }
}

fn inner_sweep(
    awd: &AnomalyWheelData,
    phi: &TestFunction,
    big_l: f64,
    ratios: &[f64],
    opts: &SweepOptions,
) -> Result<ConvergenceReport> {
    let grid: Vec<f64> = ratios.iter().map(|r| r * big_l).collect();
    let (d, k) = (awd.wd.d(), awd.wd.k());
    let estimates: Vec<WeightEstimate> = grid
        .par_iter()
        .map(|&eps| anomaly_weight(awd, phi, &RegulatorWindow::new(eps, big_l)?, &opts.weight))
        .collect::<Result<_>>()?;
    Ok(assemble(big_l, grid, &estimates, 1.0 - d as f64 / (k - 1) as f64, opts))
}

/// Iterated limit `lim_{L→0} lim_{ε→0} W̃`. For every `L` in the decreasing
/// `l_grid` an inner sweep runs over `ε = r · L` for `r` in `eps_ratios`
/// (decreasing, inside `(0, 1)`); the last inner value is the `ε → 0`
/// estimate. The verdict compares the outer sequence with its value at the
/// largest `L`.
pub fn anomaly_limit_scan(
    awd: &AnomalyWheelData,
    phi: &TestFunction,
    eps_ratios: &[f64],
    l_grid: &[f64],
    opts: &AnomalyScanOptions,
) -> Result<AnomalyScanReport> {
    let (d, k) = (awd.wd.d(), awd.wd.k());
    if k < d + 1 {
        return Err(invalid(format!("the limit scan needs k >= d + 1, got d={d}, k={k}")));
    }
    validate_grid(eps_ratios, 1.0)?;
    if l_grid.is_empty() || l_grid.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
        return Err(invalid("L grid must be nonempty and positive"));
    }
    if l_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(invalid("L grid must be strictly decreasing"));
    }

    let inner: Vec<ConvergenceReport> = l_grid
        .iter()
        .map(|&l| inner_sweep(awd, phi, l, eps_ratios, &opts.sweep))
        .collect::<Result<_>>()?;
    let limits: Vec<Complex64> = inner.iter().map(ConvergenceReport::last_value).collect();
    let limit_errors: Vec<f64> = inner
        .iter()
        .map(|r| r.cauchy_deltas.last().copied().unwrap_or(0.0) + r.error_bars.last().copied().unwrap_or(0.0))
        .collect();

    let reference = limits[0].norm();
    let last = limits[limits.len() - 1].norm();
    let relative_final = if reference > 0.0 { last / reference } else { 0.0 };
    let relative_outer_delta = match limits.len() {
        0 | 1 => f64::INFINITY,
        n if last > 0.0 => (limits[n - 1] - limits[n - 2]).norm() / last,
        _ => f64::INFINITY,
    };
    let inner_status = if inner.iter().all(ConvergenceReport::converged) {
        SweepStatus::Converged
    } else if inner.iter().any(|r| r.status == SweepStatus::Inconclusive) {
        SweepStatus::Inconclusive
    } else {
        SweepStatus::NotConverged
    };

    let (verdict, note) = if reference == 0.0 {
        (LimitVerdict::Zero, "the weight vanishes identically".to_string())
    } else if relative_final < opts.zero_tolerance {
        (LimitVerdict::Zero, String::new())
    } else if relative_outer_delta <= opts.stability_tolerance && relative_final > opts.zero_tolerance {
        (LimitVerdict::Nonzero, String::new())
    } else {
        (
            LimitVerdict::Undetermined,
            "outer sequence neither small nor stable; extend the L grid".to_string(),
        )
    };
    Ok(AnomalyScanReport {
        l_grid: l_grid.to_vec(),
        inner,
        limits,
        limit_errors,
        relative_final,
        relative_outer_delta,
        verdict,
        inner_status,
        note,
    })
}

/// `Π_α ∫_ε^L t^{−d/(k−1)} dt` over the `k − 1` propagator edges, the
/// envelope controlling `W̃` up to a constant depending on `Φ`.
pub fn anomaly_envelope(d: usize, k: usize, win: &RegulatorWindow) -> Result<f64> {
    if k < 2 {
        return Err(invalid("a wheel needs at least two vertices"));
    }
    let p = 1.0 - d as f64 / (k - 1) as f64;
    let one = if p.abs() < 1e-12 {
        (win.big_l / win.eps).ln()
    } else {
        (win.big_l.powf(p) - win.eps.powf(p)) / p
    };
    Ok(one.powi(k as i32 - 1))
}
