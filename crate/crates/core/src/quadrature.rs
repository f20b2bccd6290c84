//! Quadrature rules and drivers: Gauss–Legendre / Gauss–Hermite tensor rules,
//! deterministic adaptive cubature on boxes and randomized Halton sampling.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use gauss_quad::{GaussHermite, GaussLegendre};
use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Nodes and weights of a one-dimensional rule.
#[derive(Clone, Debug)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

type Cache = Mutex<HashMap<usize, Arc<Rule>>>;

fn cached(cache: &'static OnceLock<Cache>, n: usize, build: impl FnOnce() -> Rule) -> Arc<Rule> {
    let map = cache.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = map.lock().expect("rule cache poisoned");
    map.entry(n).or_insert_with(|| Arc::new(build())).clone()
}

/// Gauss–Legendre rule on `[−1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> Arc<Rule> {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    assert!(n >= 2, "Gauss–Legendre needs at least two nodes");
    cached(&CACHE, n, || {
        let rule = GaussLegendre::new(n.try_into().expect("n >= 2"));
        let mut pairs: Vec<(f64, f64)> = rule.iter().map(|(x, w)| (*x, *w)).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Rule {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1).collect(),
        }
    })
}

/// Gauss–Hermite rule for the weight `e^{−x²}`, nodes ascending.
pub fn gauss_hermite(n: usize) -> Arc<Rule> {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    assert!(n >= 2, "Gauss–Hermite needs at least two nodes");
    cached(&CACHE, n, || {
        let rule = GaussHermite::new(n.try_into().expect("n >= 2"));
        let mut pairs: Vec<(f64, f64)> = rule.iter().map(|(x, w)| (*x, *w)).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Rule {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1).collect(),
        }
    })
}

/// Integral estimate with an error bar.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: Complex64,
    pub error: f64,
    pub evaluations: usize,
}

/// Settings for [`adaptive_cubature`].
#[derive(Clone, Debug)]
pub struct CubatureOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_evaluations: usize,
    /// Equal subdivisions per axis before adaptivity starts.
    pub initial_splits: usize,
}

impl Default for CubatureOptions {
    fn default() -> Self {
        CubatureOptions {
            rel_tol: 1e-8,
            abs_tol: 0.0,
            max_evaluations: 20_000_000,
            initial_splits: 2,
        }
    }
}

const BATCH: usize = 16;
const HIGH: usize = 7;
const LOW: usize = 5;

struct Region {
    lo: Vec<f64>,
    hi: Vec<f64>,
    value: Complex64,
    error: f64,
    split_axis: usize,
    id: u64,
}

impl PartialEq for Region {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Region {}

impl PartialOrd for Region {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Region {
    // max-heap on error; older regions first on ties
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.id.cmp(&self.id))
    }
}

/// Evaluates the degree-13 tensor rule on a box together with the degree-9
/// rule for the error, and picks the axis along which the integrand is least
/// resolved from the Legendre tail of its one-dimensional marginals.
fn evaluate_region<F>(f: &F, lo: &[f64], hi: &[f64]) -> (Complex64, f64, usize, usize)
where
    F: Fn(&[f64]) -> Complex64,
{
    let dim = lo.len();
    let high = gauss_legendre(HIGH);
    let low = gauss_legendre(LOW);
    let half: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (b - a)).collect();
    let mid: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (b + a)).collect();
    let jac: f64 = half.iter().product();

    let mut point = vec![0.0; dim];
    let mut idx = vec![0usize; dim];
    let mut marginals = vec![[Complex64::new(0.0, 0.0); HIGH]; dim];
    let mut q_high = Complex64::new(0.0, 0.0);
    let total_high = HIGH.pow(dim as u32);
    for flat in 0..total_high {
        let mut rem = flat;
        let mut w = 1.0;
        for a in 0..dim {
            idx[a] = rem % HIGH;
            rem /= HIGH;
            point[a] = mid[a] + half[a] * high.nodes[idx[a]];
            w *= high.weights[idx[a]];
        }
        let v = f(&point);
        q_high += v * w;
        for a in 0..dim {
            marginals[a][idx[a]] += v * (w / high.weights[idx[a]]);
        }
    }

    let mut q_low = Complex64::new(0.0, 0.0);
    let total_low = LOW.pow(dim as u32);
    for flat in 0..total_low {
        let mut rem = flat;
        let mut w = 1.0;
        for a in 0..dim {
            let j = rem % LOW;
            rem /= LOW;
            point[a] = mid[a] + half[a] * low.nodes[j];
            w *= low.weights[j];
        }
        q_low += f(&point) * w;
    }

    let mut axis = 0;
    let mut worst = -1.0;
    for (a, marginal) in marginals.iter().enumerate() {
        let tail = legendre_tail(marginal, &high);
        if tail > worst {
            worst = tail;
            axis = a;
        }
    }
    let value = q_high * jac;
    let error = ((q_high - q_low) * jac).norm();
    (value, error, axis, total_high + total_low)
}

/// `|c_{n−2}| + |c_{n−1}|` of the discrete Legendre expansion on the rule's nodes.
fn legendre_tail(values: &[Complex64], rule: &Rule) -> f64 {
    let n = rule.len();
    let mut tail = 0.0;
    for l in [n - 2, n - 1] {
        let mut c = Complex64::new(0.0, 0.0);
        for m in 0..n {
            c += values[m] * (rule.weights[m] * legendre_p(l, rule.nodes[m]));
        }
        tail += c.norm() * (2 * l + 1) as f64 / 2.0;
    }
    tail
}

fn legendre_p(l: usize, x: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, x);
    if l == 0 {
        return p0;
    }
    for n in 1..l {
        let p2 = ((2 * n + 1) as f64 * x * p1 - n as f64 * p0) / (n + 1) as f64;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Globally adaptive cubature of a complex integrand over the box `[lo, hi]`.
///
/// Regions are refined in fixed-size batches whose members are evaluated in
/// parallel and merged in a fixed order, so the result does not depend on
/// the number of worker threads.
pub fn adaptive_cubature<F>(f: F, lo: &[f64], hi: &[f64], opts: &CubatureOptions) -> Result<Estimate>
where
    F: Fn(&[f64]) -> Complex64 + Sync,
{
    let dim = lo.len();
    if dim == 0 || dim != hi.len() {
        return Err(Error::InvalidArgument("cubature box must have matching nonzero dimension".into()));
    }
    if lo.iter().zip(hi).any(|(a, b)| !(a < b) || !a.is_finite() || !b.is_finite()) {
        return Err(Error::InvalidArgument("cubature box must satisfy lo < hi with finite ends".into()));
    }

    let splits = opts.initial_splits.max(1);
    let mut boxes = Vec::new();
    for flat in 0..splits.pow(dim as u32) {
        let mut rem = flat;
        let mut blo = vec![0.0; dim];
        let mut bhi = vec![0.0; dim];
        for a in 0..dim {
            let j = rem % splits;
            rem /= splits;
            let step = (hi[a] - lo[a]) / splits as f64;
            blo[a] = lo[a] + step * j as f64;
            bhi[a] = if j + 1 == splits { hi[a] } else { lo[a] + step * (j + 1) as f64 };
        }
        boxes.push((blo, bhi));
    }

    let mut next_id = 0u64;
    let mut heap = BinaryHeap::new();
    let mut total = Complex64::new(0.0, 0.0);
    let mut total_err = 0.0;
    let mut evaluations = 0;

    let mut absorb = |batch: Vec<(Vec<f64>, Vec<f64>)>,
                      heap: &mut BinaryHeap<Region>,
                      total: &mut Complex64,
                      total_err: &mut f64,
                      evaluations: &mut usize| {
        let results: Vec<_> = batch
            .par_iter()
            .map(|(blo, bhi)| evaluate_region(&f, blo, bhi))
            .collect();
        for ((blo, bhi), (value, error, axis, evals)) in batch.into_iter().zip(results) {
            *total += value;
            *total_err += error;
            *evaluations += evals;
            heap.push(Region {
                lo: blo,
                hi: bhi,
                value,
                error,
                split_axis: axis,
                id: next_id,
            });
            next_id += 1;
        }
    };

    absorb(boxes, &mut heap, &mut total, &mut total_err, &mut evaluations);

    loop {
        let target = opts.abs_tol.max(opts.rel_tol * total.norm());
        if total_err <= target {
            break;
        }
        if evaluations >= opts.max_evaluations {
            return Err(Error::NonConvergence {
                estimate: total.re,
                error: total_err,
                evaluations,
            });
        }
        let mut children = Vec::with_capacity(2 * BATCH);
        for _ in 0..BATCH {
            let Some(region) = heap.pop() else { break };
            if region.error <= 0.0 && !children.is_empty() {
                heap.push(region);
                break;
            }
            total -= region.value;
            total_err -= region.error;
            let a = region.split_axis;
            let cut = 0.5 * (region.lo[a] + region.hi[a]);
            let mut left_hi = region.hi.clone();
            left_hi[a] = cut;
            let mut right_lo = region.lo.clone();
            right_lo[a] = cut;
            children.push((region.lo.clone(), left_hi));
            children.push((right_lo, region.hi));
        }
        absorb(children, &mut heap, &mut total, &mut total_err, &mut evaluations);
        // re-sum to keep rounding from the running updates out of the answer
        if heap.len() % 1024 < 2 * BATCH {
            let mut regions: Vec<&Region> = heap.iter().collect();
            regions.sort_by_key(|r| r.id);
            total = regions.iter().map(|r| r.value).sum();
            total_err = regions.iter().map(|r| r.error).sum();
        }
    }

    let mut regions: Vec<&Region> = heap.iter().collect();
    regions.sort_by_key(|r| r.id);
    let value = regions.iter().map(|r| r.value).sum();
    let error = regions.iter().map(|r| r.error).sum();
    Ok(Estimate {
        value,
        error,
        evaluations,
    })
}

/// Tensor Gauss–Hermite sum `Σ w f(x)` for `∫ e^{−|x|²} f(x) dx` over `R^dim`,
/// evaluated in parallel over the first axis.
pub fn gauss_hermite_tensor<F>(f: &F, dim: usize, n: usize) -> Complex64
where
    F: Fn(&[f64]) -> Complex64 + Sync,
{
    let rule = gauss_hermite(n);
    let inner = n.pow(dim as u32 - 1);
    let partial: Vec<Complex64> = (0..n)
        .into_par_iter()
        .map(|first| {
            let mut point = vec![0.0; dim];
            let mut acc = Complex64::new(0.0, 0.0);
            point[0] = rule.nodes[first];
            for flat in 0..inner {
                let mut rem = flat;
                let mut w = rule.weights[first];
                for a in 1..dim {
                    let j = rem % n;
                    rem /= n;
                    point[a] = rule.nodes[j];
                    w *= rule.weights[j];
                }
                acc += f(&point) * w;
            }
            acc
        })
        .collect();
    partial.into_iter().sum()
}

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Radical inverse of `index` in base `base`.
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut scale = inv;
    let mut out = 0.0;
    while index > 0 {
        out += (index % base) as f64 * scale;
        index /= base;
        scale *= inv;
    }
    out
}

/// Mean of `f` over standard normal points in `R^dim` by randomized Halton
/// sampling: `replicas` independent Cranley–Patterson shifts drawn from
/// `seed`, with the spread between replicas as a standard error.
pub fn gaussian_qmc<F>(f: &F, dim: usize, points: usize, replicas: usize, seed: u64) -> Result<Estimate>
where
    F: Fn(&[f64]) -> Complex64 + Sync,
{
    if dim > PRIMES.len() {
        return Err(Error::Infeasible {
            what: "quasi-Monte Carlo",
            reason: format!("dimension {dim} exceeds {}", PRIMES.len()),
        });
    }
    if replicas < 2 || points == 0 {
        return Err(Error::InvalidArgument("need at least two replicas and one point".into()));
    }
    let normal = Normal::standard();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shifts: Vec<Vec<f64>> = (0..replicas)
        .map(|_| (0..dim).map(|_| rng.random::<f64>()).collect())
        .collect();
    let means: Vec<Complex64> = shifts
        .par_iter()
        .map(|shift| {
            let mut point = vec![0.0; dim];
            let mut acc = Complex64::new(0.0, 0.0);
            for m in 1..=points as u64 {
                for a in 0..dim {
                    let u = (radical_inverse(m, PRIMES[a]) + shift[a]).fract();
                    let u = u.clamp(1e-300, 1.0 - 1e-16);
                    point[a] = normal.inverse_cdf(u);
                }
                acc += f(&point);
            }
            acc / points as f64
        })
        .collect();
    let r = replicas as f64;
    let mean: Complex64 = means.iter().sum::<Complex64>() / r;
    let var = means.iter().map(|m| (m - mean).norm_sqr()).sum::<f64>() / (r - 1.0);
    Ok(Estimate {
        value: mean,
        error: (var / r).sqrt(),
        evaluations: points * replicas,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn legendre_integrates_polynomials() {
        let rule = gauss_legendre(7);
        let s: f64 = rule.nodes.iter().zip(&rule.weights).map(|(x, w)| w * x.powi(12)).sum();
        assert_relative_eq!(s, 2.0 / 13.0, max_relative = 1e-13);
    }

    #[test]
    fn hermite_moments() {
        let rule = gauss_hermite(10);
        let s: f64 = rule.nodes.iter().zip(&rule.weights).map(|(x, w)| w * x * x).sum();
        assert_relative_eq!(s, std::f64::consts::PI.sqrt() / 2.0, max_relative = 1e-13);
    }

    #[test]
    fn cubature_of_peaked_function() {
        // ∫_[0,1]^2 1/(x+y+0.01) dx dy
        let f = |x: &[f64]| Complex64::new(1.0 / (x[0] + x[1] + 0.01), 0.0);
        let est = adaptive_cubature(f, &[0.0, 0.0], &[1.0, 1.0], &CubatureOptions::default()).unwrap();
        let h = |a: f64| a * a.ln() - a;
        let exact = h(2.01) - 2.0 * h(1.01) + h(0.01);
        assert_relative_eq!(est.value.re, exact, max_relative = 1e-8);
        assert!(est.error < 1e-7 * exact);
    }

    #[test]
    fn cubature_is_reproducible() {
        let f = |x: &[f64]| Complex64::new((-(x[0] * x[1] * 30.0)).exp(), x[2].sin());
        let opts = CubatureOptions::default();
        let a = adaptive_cubature(f, &[0.0; 3], &[1.0; 3], &opts).unwrap();
        let b = adaptive_cubature(f, &[0.0; 3], &[1.0; 3], &opts).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn qmc_gaussian_mean() {
        let f = |x: &[f64]| Complex64::new(x[0] * x[0] + x[1] * x[1] * x[2] * x[2], 0.0);
        let est = gaussian_qmc(&f, 3, 4096, 8, 7).unwrap();
        assert!((est.value.re - 2.0).abs() < 5.0 * est.error + 1e-3);
    }

    #[test]
    fn non_convergence_is_reported() {
        let f = |x: &[f64]| Complex64::new(1.0 / x[0].abs().sqrt().max(1e-300), 0.0);
        let opts = CubatureOptions {
            rel_tol: 1e-15,
            max_evaluations: 2000,
            ..CubatureOptions::default()
        };
        assert!(matches!(
            adaptive_cubature(f, &[-1.0], &[1.0], &opts),
            Err(Error::NonConvergence { .. })
        ));
    }
}
