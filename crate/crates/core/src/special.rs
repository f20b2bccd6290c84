//! Incomplete gamma functions of positive integer order.
//!
//! For integer `p` the upper function has the finite form
//! `Γ(p, x) = (p−1)! e^{−x} Σ_{m<p} x^m/m!`; near zero the lower function is
//! taken from its power series instead to avoid cancellation.

/// `(p−1)!` as a float.
pub fn factorial_gamma(p: u32) -> f64 {
    (1..p).map(f64::from).product()
}

/// `Γ(p, x) = ∫_x^∞ u^{p−1} e^{−u} du`.
pub fn upper_gamma(p: u32, x: f64) -> f64 {
    assert!(p >= 1, "order must be positive");
    let mut term = 1.0;
    let mut sum = 1.0;
    for m in 1..p {
        term *= x / f64::from(m);
        sum += term;
    }
    factorial_gamma(p) * (-x).exp() * sum
}

/// `γ(p, x) / x^p`, finite at `x = 0` where it equals `1/p`.
pub fn scaled_lower_gamma(p: u32, x: f64) -> f64 {
    assert!(p >= 1, "order must be positive");
    assert!(x >= 0.0, "argument must be nonnegative");
    let pf = f64::from(p);
    if x < pf + 1.0 {
        // e^{−x} Σ_j x^j / (p (p+1) … (p+j))
        let mut term = 1.0 / pf;
        let mut sum = term;
        let mut j = 1.0;
        while term > sum * 1e-17 {
            term *= x / (pf + j);
            sum += term;
            j += 1.0;
        }
        (-x).exp() * sum
    } else {
        (factorial_gamma(p) - upper_gamma(p, x)) / x.powi(p as i32)
    }
}

/// `γ(p, x) = ∫_0^x u^{p−1} e^{−u} du`.
pub fn lower_gamma(p: u32, x: f64) -> f64 {
    let pf = f64::from(p);
    if x < pf + 1.0 {
        x.powi(p as i32) * scaled_lower_gamma(p, x)
    } else {
        factorial_gamma(p) - upper_gamma(p, x)
    }
}

/// Regularized lower incomplete gamma `P(p, x) = γ(p, x)/Γ(p)`.
pub fn regularized_lower(p: u32, x: f64) -> f64 {
    lower_gamma(p, x) / factorial_gamma(p)
}

/// `γ(p; a, b) = ∫_a^b u^{p−1} e^{−u} du` for `0 ≤ a ≤ b`.
pub fn gamma_window(p: u32, a: f64, b: f64) -> f64 {
    assert!(0.0 <= a && a <= b, "window [{a}, {b}] is not ordered");
    let pf = f64::from(p);
    if a >= pf + 1.0 {
        upper_gamma(p, a) - upper_gamma(p, b)
    } else {
        lower_gamma(p, b) - lower_gamma(p, a)
    }
}

/// `∫_ε^L t^{−(p+1)} e^{−r²/4t} dt`, the Schwinger-parameter integral of a
/// propagator edge carrying `p − d` holomorphic derivatives. Equal to
/// `(4/r²)^p γ(p; r²/4L, r²/4ε)` and finite at `r = 0`.
pub fn schwinger_integral(p: u32, eps: f64, big_l: f64, r2: f64) -> f64 {
    assert!(0.0 < eps && eps <= big_l, "window must satisfy 0 < eps <= L");
    let pf = f64::from(p);
    let a = r2 / (4.0 * big_l);
    let b = r2 / (4.0 * eps);
    if b < pf + 1.0 {
        eps.powi(-(p as i32)) * scaled_lower_gamma(p, b)
            - big_l.powi(-(p as i32)) * scaled_lower_gamma(p, a)
    } else {
        (4.0 / r2).powi(p as i32) * gamma_window(p, a, b)
    }
}
