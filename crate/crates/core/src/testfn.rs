//! Gaussian-times-polynomial test functions on `(C^d)^k`.
//!
//! `Φ(z) = p(Re z, Im z) · Π_α exp(−|z^α − c_α|² / 2σ²)`. Coordinates are
//! flattened as `c = α·d + i` (0-based). In `p` the real part of coordinate
//! `c` is variable `2c` and the imaginary part is `2c + 1`; in the complex
//! form returned by [`TestFunction::complex_polynomial`] variable `2c` is
//! `z_c` and `2c + 1` is `z̄_c`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly::{ComplexPoly, Poly, to_f64};

pub fn re_var(coordinate: usize) -> u32 {
    2 * coordinate as u32
}

pub fn im_var(coordinate: usize) -> u32 {
    2 * coordinate as u32 + 1
}

pub fn z_var(coordinate: usize) -> u32 {
    2 * coordinate as u32
}

pub fn zbar_var(coordinate: usize) -> u32 {
    2 * coordinate as u32 + 1
}

/// A polynomial in the real coordinates prepared for fast evaluation.
#[derive(Clone, Debug)]
struct Compiled {
    terms: Vec<(f64, Vec<(usize, u32)>)>,
}

impl Compiled {
    fn new(p: &Poly) -> Self {
        Compiled {
            terms: p
                .terms()
                .map(|(m, c)| (to_f64(c), m.factors().iter().map(|&(v, e)| (v as usize, e)).collect()))
                .collect(),
        }
    }

    fn eval(&self, reals: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, factors)| factors.iter().fold(*c, |acc, &(v, e)| acc * reals[v].powi(e as i32)))
            .sum()
    }
}

#[derive(Clone, Debug)]
pub struct TestFunction {
    d: usize,
    centers: Vec<Vec<Complex64>>,
    sigma: f64,
    poly: Poly,
    compiled: Compiled,
    /// `∂p/∂x_c` and `∂p/∂y_c` for every coordinate.
    gradient: Vec<(Compiled, Compiled)>,
}

impl TestFunction {
    pub fn new(centers: Vec<Vec<Complex64>>, sigma: f64, poly: Poly) -> Result<Self> {
        let k = centers.len();
        if k == 0 {
            return Err(Error::InvalidArgument("test function needs at least one center".into()));
        }
        let d = centers[0].len();
        if d == 0 || centers.iter().any(|c| c.len() != d) {
            return Err(Error::InvalidArgument("all centers must lie in the same C^d, d >= 1".into()));
        }
        if centers.iter().flatten().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidArgument("centers must be finite".into()));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!("width must be positive, got {sigma}")));
        }
        let n_real = 2 * d * k;
        if let Some(bad) = poly
            .terms()
            .flat_map(|(m, _)| m.factors().iter().map(|&(v, _)| v))
            .find(|&v| v as usize >= n_real)
        {
            return Err(Error::InvalidArgument(format!(
                "polynomial variable {bad} out of range for {n_real} real coordinates"
            )));
        }
        let gradient = (0..d * k)
            .map(|c| {
                (
                    Compiled::new(&poly.derivative(re_var(c))),
                    Compiled::new(&poly.derivative(im_var(c))),
                )
            })
            .collect();
        Ok(TestFunction {
            d,
            compiled: Compiled::new(&poly),
            centers,
            sigma,
            poly,
            gradient,
        })
    }

    /// Pure Gaussian with the given centers.
    pub fn gaussian(centers: Vec<Vec<Complex64>>, sigma: f64) -> Result<Self> {
        TestFunction::new(centers, sigma, Poly::one())
    }

    /// Deterministic off-origin centers. Centers at the origin make many
    /// weights vanish by rotation symmetry, so the default avoids them.
    pub fn generic(d: usize, k: usize, sigma: f64) -> Result<Self> {
        let centers = (0..k)
            .map(|a| {
                (0..d)
                    .map(|i| {
                        let (a, i) = (a as f64 + 1.0, i as f64 + 1.0);
                        Complex64::new(
                            0.6 * (1.3 * a + 0.7 * i).cos(),
                            0.5 * (0.9 * a - 1.9 * i + 0.4).sin(),
                        )
                    })
                    .collect()
            })
            .collect();
        TestFunction::gaussian(centers, sigma)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn k(&self) -> usize {
        self.centers.len()
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn centers(&self) -> &[Vec<Complex64>] {
        &self.centers
    }

    pub fn center(&self, coordinate: usize) -> Complex64 {
        self.centers[coordinate / self.d][coordinate % self.d]
    }

    pub fn polynomial(&self) -> &Poly {
        &self.poly
    }

    pub fn is_pure_gaussian(&self) -> bool {
        self.poly == Poly::one()
    }

    fn reals(z: &[Complex64]) -> Vec<f64> {
        z.iter().flat_map(|c| [c.re, c.im]).collect()
    }

    fn gaussian_factor(&self, z: &[Complex64]) -> f64 {
        let s: f64 = z
            .iter()
            .enumerate()
            .map(|(c, zc)| (zc - self.center(c)).norm_sqr())
            .sum();
        (-s / (2.0 * self.sigma * self.sigma)).exp()
    }

    /// `Φ(z)` at a flattened point of `(C^d)^k`.
    pub fn eval(&self, z: &[Complex64]) -> f64 {
        assert_eq!(z.len(), self.d * self.k(), "point has wrong dimension");
        self.compiled.eval(&Self::reals(z)) * self.gaussian_factor(z)
    }

    /// `∂Φ/∂z̄_c` at a flattened point.
    pub fn dbar(&self, z: &[Complex64], coordinate: usize) -> Complex64 {
        let reals = Self::reals(z);
        let (gx, gy) = &self.gradient[coordinate];
        let dpoly = Complex64::new(gx.eval(&reals), gy.eval(&reals)) * 0.5;
        let shift = (z[coordinate] - self.center(coordinate)) / (2.0 * self.sigma * self.sigma);
        (dpoly - shift * self.compiled.eval(&reals)) * self.gaussian_factor(z)
    }

    /// The polynomial factor in `z`, `z̄` variables.
    pub fn complex_polynomial(&self) -> ComplexPoly {
        let half = Complex64::new(0.5, 0.0);
        let minus_half_i = Complex64::new(0.0, -0.5);
        ComplexPoly::from_exact(&self.poly).substitute(|v| {
            let c = (v / 2) as usize;
            let z = ComplexPoly::var(z_var(c));
            let zb = ComplexPoly::var(zbar_var(c));
            if v % 2 == 0 {
                z.add(&zb).scale(half)
            } else {
                z.add(&zb.scale(Complex64::new(-1.0, 0.0))).scale(minus_half_i)
            }
        })
    }

    /// Crude upper estimate of `sup |Φ|`: `Σ |coefficient| · R^degree` with
    /// `R` the largest center modulus plus six widths, which bounds the
    /// polynomial wherever the Gaussian is not negligible.
    pub fn sup_estimate(&self) -> f64 {
        let radius = self
            .centers
            .iter()
            .flatten()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
            + 6.0 * self.sigma;
        self.poly
            .terms()
            .map(|(m, c)| to_f64(c).abs() * radius.powi(m.degree() as i32))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::integer;
    use approx::assert_relative_eq;

    #[test]
    fn complex_polynomial_agrees_with_real_form() {
        // p = x0² y1 − 3 y0 on C^1 × C^1
        let p = &(&(&Poly::var(0) * &Poly::var(0)) * &Poly::var(3)) - &Poly::var(1).scale(&integer(3));
        let phi = TestFunction::new(
            vec![vec![Complex64::new(0.1, 0.2)], vec![Complex64::new(-0.3, 0.0)]],
            0.8,
            p,
        )
        .unwrap();
        let z = [Complex64::new(0.4, -1.1), Complex64::new(0.7, 0.25)];
        let cp = phi.complex_polynomial();
        let via_z = cp.eval(|v| if v % 2 == 0 { z[(v / 2) as usize] } else { z[(v / 2) as usize].conj() });
        let direct = 0.4f64.powi(2) * 0.25 - 3.0 * -1.1;
        assert_relative_eq!(via_z.re, direct, max_relative = 1e-14);
        assert!(via_z.im.abs() < 1e-14);
    }

    #[test]
    fn dbar_matches_finite_differences() {
        let p = &Poly::var(0) * &Poly::var(1);
        let phi = TestFunction::new(vec![vec![Complex64::new(0.3, -0.2)]], 0.7, p).unwrap();
        let z = Complex64::new(0.5, 0.4);
        let h = 1e-5;
        let f = |w: Complex64| phi.eval(&[w]);
        let dx = (f(z + h) - f(z - h)) / (2.0 * h);
        let dy = (f(z + Complex64::new(0.0, h)) - f(z - Complex64::new(0.0, h))) / (2.0 * h);
        let expected = Complex64::new(dx, dy) * 0.5;
        let got = phi.dbar(&[z], 0);
        assert!((got - expected).norm() < 1e-8);
    }

    #[test]
    fn rejects_out_of_range_variables() {
        let err = TestFunction::new(vec![vec![Complex64::new(0.0, 0.0)]], 1.0, Poly::var(2));
        assert!(err.is_err());
    }
}
