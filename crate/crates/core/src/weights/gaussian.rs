//! Gaussian-reduced evaluation: exact `z`-integration, cubature over `log t`.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use super::integrand::WheelIntegrand;
use super::{Scheme, WeightEstimate, WeightOptions};
use crate::error::Result;
use crate::kernels::RegulatorWindow;
use crate::poly::Monomial;
use crate::quadrature::{adaptive_cubature, CubatureOptions};
use crate::testfn::TestFunction;

/// The matrix `Q = Σ_e g_e (e_a − e_b)(e_a − e_b)ᵀ + λ I` of a wheel with
/// conductances `g_e = 1/4t_e`, factored so that the determinant, the
/// solution and all pairwise differences of solution entries are computed
/// without cancellation.
///
/// `Q` is a diagonally dominant M-matrix. Elimination is carried out on
/// the off-diagonal magnitudes and the row excesses `Σ_b Q_ab`, which stay
/// positive and are only ever added; the differences `m_a − m_b` are
/// back-substituted directly instead of being formed from `m`.
#[derive(Clone, Debug)]
pub struct GaussianSystem {
    k: usize,
    rows: Vec<Vec<f64>>,
    pivots: Vec<f64>,
    excess: Vec<f64>,
}

/// Solution `m` of `Q m = b` with `diff[a][b] = m_a − m_b`.
#[derive(Clone, Debug)]
pub struct Solution {
    pub values: Vec<Complex64>,
    pub diff: Vec<Vec<Complex64>>,
}

impl GaussianSystem {
    /// `edges` lists `(a, b, g)` with `a ≠ b`; parallel edges add up.
    pub fn new(k: usize, edges: &[(usize, usize, f64)], lambda: f64) -> Self {
        assert!(lambda > 0.0, "grounding must be positive");
        let mut w = vec![vec![0.0; k]; k];
        for &(a, b, g) in edges {
            assert!(a != b && g >= 0.0, "bad edge ({a}, {b}, {g})");
            w[a][b] += g;
            w[b][a] += g;
        }
        let mut s = vec![lambda; k];
        let mut pivots = vec![0.0; k];
        let mut excess = vec![0.0; k];
        let mut rows = vec![Vec::new(); k];
        for p in 0..k {
            let q = s[p] + w[p][p + 1..].iter().sum::<f64>();
            pivots[p] = q;
            excess[p] = s[p];
            for i in p + 1..k {
                let wip = w[i][p];
                if wip == 0.0 {
                    continue;
                }
                for j in p + 1..k {
                    if j != i {
                        w[i][j] += wip * w[p][j] / q;
                    }
                }
                s[i] += wip * s[p] / q;
            }
            rows[p] = w[p].clone();
        }
        GaussianSystem {
            k,
            rows,
            pivots,
            excess,
        }
    }

    pub fn log_det(&self) -> f64 {
        self.pivots.iter().map(|q| q.ln()).sum()
    }

    pub fn solve(&self, rhs: &[Complex64]) -> Solution {
        let k = self.k;
        let mut b = rhs.to_vec();
        for p in 0..k {
            for i in p + 1..k {
                let wip = self.rows[p][i];
                if wip != 0.0 {
                    let add = b[p] * (wip / self.pivots[p]);
                    b[i] += add;
                }
            }
        }
        let zero = Complex64::new(0.0, 0.0);
        let mut m = vec![zero; k];
        let mut diff = vec![vec![zero; k]; k];
        m[k - 1] = b[k - 1] / self.pivots[k - 1];
        for p in (0..k - 1).rev() {
            let q = self.pivots[p];
            let row = &self.rows[p];
            let mut acc = b[p];
            for l in p + 1..k {
                acc += m[l] * row[l];
            }
            m[p] = acc / q;
            for j in p + 1..k {
                let mut acc = b[p] - m[j] * self.excess[p];
                for l in p + 1..k {
                    if l != j {
                        acc += diff[l][j] * row[l];
                    }
                }
                diff[p][j] = acc / q;
                diff[j][p] = -diff[p][j];
            }
        }
        Solution { values: m, diff }
    }
}

/// Moments of the complex Gaussian `e^{−Σ_i (z_i − m_i)† Q (z_i − m_i)}`
/// seen through the numerator variables.
struct Moments<'a> {
    d: usize,
    k: usize,
    means: &'a [Solution],
    columns: &'a [Solution],
}

impl Moments<'_> {
    fn mean(&self, v: u32) -> Complex64 {
        let c = (v / 3) as usize;
        let (a, i) = (c / self.d, c % self.d);
        match v % 3 {
            0 => self.means[i].values[a],
            1 => self.means[i].values[a].conj(),
            _ => self.means[i].diff[a][(a + 1) % self.k].conj(),
        }
    }

    /// `E[(z_a − m_a) conj(w − E w)]` for holomorphic `z_a` and an
    /// anti-holomorphic numerator variable `w`.
    fn covariance(&self, hol: u32, anti: u32) -> f64 {
        let c = (hol / 3) as usize;
        let c2 = (anti / 3) as usize;
        let (a, i) = (c / self.d, c % self.d);
        let (b, i2) = (c2 / self.d, c2 % self.d);
        if i != i2 {
            return 0.0;
        }
        match anti % 3 {
            1 => self.columns[a].values[b].re,
            _ => self.columns[a].diff[b][(b + 1) % self.k].re,
        }
    }

    /// Stein's identity `E[z_a f] = m_a E[f] + Σ_w Cov(z_a, w) E[∂f/∂w]`.
    fn expectation(&self, mono: &Monomial, memo: &mut HashMap<Monomial, Complex64>) -> Complex64 {
        if let Some(v) = memo.get(mono) {
            return *v;
        }
        let hol = mono.factors().iter().map(|&(v, _)| v).find(|v| v % 3 == 0);
        let value = match hol {
            None => mono
                .factors()
                .iter()
                .fold(Complex64::new(1.0, 0.0), |acc, &(v, e)| acc * self.mean(v).powu(e)),
            Some(za) => {
                let (_, rest) = mono.divide_var(za).expect("variable present");
                let mut acc = self.mean(za) * self.expectation(&rest, memo);
                for &(w, e) in rest.factors() {
                    if w % 3 == 0 {
                        continue;
                    }
                    let cov = self.covariance(za, w);
                    if cov != 0.0 {
                        let (_, lowered) = rest.divide_var(w).expect("variable present");
                        acc += self.expectation(&lowered, memo) * (cov * f64::from(e));
                    }
                }
                acc
            }
        };
        memo.insert(mono.clone(), value);
        value
    }
}

/// Integrand after the exact `z`-integration, at edge parameters `t`.
pub(crate) fn reduced_integrand(w: &WheelIntegrand, phi: &TestFunction, t: &[f64]) -> Complex64 {
    let (d, k) = (w.d, w.k);
    let lambda = 1.0 / (2.0 * phi.sigma() * phi.sigma());
    let edges: Vec<(usize, usize, f64)> = (0..k).map(|e| (e, (e + 1) % k, 0.25 / t[e])).collect();
    let system = GaussianSystem::new(k, &edges, lambda);

    let mut log = (0..k).map(|e| w.edge_log_scale(e, t[e])).sum::<f64>()
        + d as f64 * (k as f64 * PI.ln() - system.log_det());
    let mut means = Vec::with_capacity(d);
    for i in 0..d {
        let rhs: Vec<Complex64> = (0..k).map(|a| phi.center(a * d + i) * lambda).collect();
        let sol = system.solve(&rhs);
        let quad: f64 = rhs
            .iter()
            .zip(&sol.values)
            .map(|(b, m)| (b.conj() * m).re)
            .sum::<f64>()
            - rhs.iter().map(|b| b.norm_sqr()).sum::<f64>() / lambda;
        log += quad;
        means.push(sol);
    }

    let expectation = if w.pure_gaussian {
        w.numerator.eval(|v| {
            let c = (v / 3) as usize;
            let (e, i) = (c / d, c % d);
            means[i].diff[e][(e + 1) % k].conj()
        })
    } else {
        let columns: Vec<Solution> = (0..k)
            .map(|a| {
                let mut unit = vec![Complex64::new(0.0, 0.0); k];
                unit[a] = Complex64::new(1.0, 0.0);
                system.solve(&unit)
            })
            .collect();
        let moments = Moments {
            d,
            k,
            means: &means,
            columns: &columns,
        };
        let mut memo = HashMap::new();
        w.numerator
            .terms()
            .map(|(m, c)| c * moments.expectation(m, &mut memo))
            .sum()
    };
    expectation * log.exp()
}

pub(crate) fn integrate(
    w: &WheelIntegrand,
    phi: &TestFunction,
    win: &RegulatorWindow,
    opts: &WeightOptions,
) -> Result<WeightEstimate> {
    let active = w.propagator_edges();
    let f = |s: &[f64]| {
        let mut t = vec![win.eps; w.k];
        for (j, &e) in active.iter().enumerate() {
            t[e] = s[j].exp();
        }
        let jacobian: f64 = s.iter().sum::<f64>().exp();
        reduced_integrand(w, phi, &t) * jacobian
    };
    let lo = vec![win.eps.ln(); active.len()];
    let hi = vec![win.big_l.ln(); active.len()];
    let copts = CubatureOptions {
        rel_tol: opts.rel_tol,
        abs_tol: opts.abs_tol,
        max_evaluations: opts.max_evaluations,
        initial_splits: 2,
    };
    let est = adaptive_cubature(f, &lo, &hi, &copts)?;
    Ok(WeightEstimate {
        value: est.value,
        error: est.error,
        evaluations: est.evaluations,
        exact_zero: false,
        scheme: Scheme::Gaussian,
    })
}
