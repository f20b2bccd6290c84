//! ε → 0 sweeps of wheel weights.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{wheel_weight, Scheme, WeightEstimate, WeightOptions, WheelData};
use crate::error::{Error, Result};
use crate::kernels::RegulatorWindow;
use crate::testfn::TestFunction;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepStatus {
    Converged,
    NotConverged,
    /// Successive differences grew by more than the error bars allow.
    Inconclusive,
    /// `k ≤ d`: the weight is exactly zero and nothing was swept.
    SkippedExactZero,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    #[serde(rename = "L")]
    pub big_l: f64,
    pub eps_grid: Vec<f64>,
    pub values: Vec<Complex64>,
    pub error_bars: Vec<f64>,
    /// `|W(ε_m) − W(ε_{m−1})|`, one fewer than the grid.
    pub cauchy_deltas: Vec<f64>,
    /// Least-squares slope of `log δ_m` against `log ε_m`.
    pub fitted_rate: Option<f64>,
    /// Exponent `1 − d/k` of the a-priori envelope.
    pub envelope_rate: f64,
    pub status: SweepStatus,
    pub note: String,
}

impl ConvergenceReport {
    pub fn converged(&self) -> bool {
        matches!(self.status, SweepStatus::Converged | SweepStatus::SkippedExactZero)
    }

    pub fn last_value(&self) -> Complex64 {
        self.values.last().copied().unwrap_or_default()
    }
}

#[derive(Clone, Debug)]
pub struct SweepOptions {
    pub weight: WeightOptions,
    /// Relative size of the final Cauchy difference required for convergence.
    pub tolerance: f64,
    /// Number of trailing differences that must decrease.
    pub monotone_tail: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            weight: WeightOptions::default(),
            tolerance: 1e-4,
            monotone_tail: 3,
        }
    }
}

/// `ε_m = ε_0 · 2^{−m}` for `m = 0..count`.
pub fn geometric_grid(eps0: f64, count: usize) -> Vec<f64> {
    (0..count).map(|m| eps0 * 0.5f64.powi(m as i32)).collect()
}

pub(crate) fn validate_grid(grid: &[f64], upper: f64) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::InvalidArgument("a sweep needs at least two grid points".into()));
    }
    if grid.iter().any(|&e| !(e > 0.0 && e < upper)) {
        return Err(Error::InvalidArgument(format!("grid points must lie in (0, {upper})")));
    }
    if grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("grid must be strictly decreasing".into()));
    }
    Ok(())
}

/// Builds the report from values along a decreasing grid.
pub(crate) fn assemble(
    big_l: f64,
    grid: Vec<f64>,
    estimates: &[WeightEstimate],
    envelope_rate: f64,
    opts: &SweepOptions,
) -> ConvergenceReport {
    let values: Vec<Complex64> = estimates.iter().map(|e| e.value).collect();
    let error_bars: Vec<f64> = estimates.iter().map(|e| e.error).collect();
    let deltas: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).norm()).collect();

    let points: Vec<(f64, f64)> = deltas
        .iter()
        .enumerate()
        .filter(|(_, &dv)| dv > 0.0)
        .map(|(m, &dv)| (grid[m + 1].ln(), dv.ln()))
        .collect();
    let fitted_rate = (points.len() >= 2).then(|| {
        let n = points.len() as f64;
        let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
        let my = points.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    });

    let tail = opts.monotone_tail.max(1);
    let last_value = values.last().map(|v| v.norm()).unwrap_or(0.0);
    let monotone_tail =
        deltas.len() >= tail && deltas[deltas.len() - tail..].windows(2).all(|w| w[1] < w[0]);
    let small = deltas.last().is_some_and(|&dv| dv <= opts.tolerance * last_value);
    let erratic = deltas.windows(2).enumerate().any(|(m, w)| {
        let slack = error_bars[m] + error_bars[m + 1] + error_bars[m + 2];
        w[1] > w[0] + slack
    });
    let (status, note) = if monotone_tail && small {
        (SweepStatus::Converged, String::new())
    } else if erratic {
        (
            SweepStatus::Inconclusive,
            "Cauchy differences increase beyond the error bars".to_string(),
        )
    } else {
        (
            SweepStatus::NotConverged,
            "final Cauchy difference above tolerance; extend the grid".to_string(),
        )
    };
    ConvergenceReport {
        big_l,
        eps_grid: grid,
        values,
        error_bars,
        cauchy_deltas: deltas,
        fitted_rate,
        envelope_rate,
        status,
        note,
    }
}

/// Evaluates the wheel weight along a decreasing `ε` grid at fixed `L`.
pub fn epsilon_sweep(
    wd: &WheelData,
    phi: &TestFunction,
    big_l: f64,
    eps_grid: &[f64],
    opts: &SweepOptions,
) -> Result<ConvergenceReport> {
    validate_grid(eps_grid, big_l)?;
    let (d, k) = (wd.d(), wd.k());
    let envelope_rate = 1.0 - d as f64 / k as f64;
    if k <= d {
        let zeros = vec![WeightEstimate::zero(Scheme::Gaussian); eps_grid.len()];
        let win = RegulatorWindow::new(eps_grid[0], big_l)?;
        let probe = wheel_weight(wd, phi, &win, Scheme::Gaussian, &opts.weight)?;
        if !probe.exact_zero {
            return Err(Error::InvalidArgument("expected an exactly vanishing wheel".into()));
        }
        let mut report = assemble(big_l, eps_grid.to_vec(), &zeros, envelope_rate, opts);
        report.status = SweepStatus::SkippedExactZero;
        report.fitted_rate = None;
        report.note = format!("k = {k} <= d = {d}: the weight vanishes identically");
        return Ok(report);
    }
    let estimates: Vec<WeightEstimate> = eps_grid
        .par_iter()
        .map(|&eps| {
            let win = RegulatorWindow::new(eps, big_l)?;
            wheel_weight(wd, phi, &win, Scheme::Gaussian, &opts.weight)
        })
        .collect::<Result<_>>()?;
    Ok(assemble(big_l, eps_grid.to_vec(), &estimates, envelope_rate, opts))
}
