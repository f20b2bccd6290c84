//! Value parsers for command-line arguments.

use holoflow::poly::{rational, Monomial, Poly, Rational};
use num_complex::Complex64;

fn split_list(s: &str) -> impl Iterator<Item = &str> {
    s.split(',').map(str::trim).filter(|p| !p.is_empty())
}

pub fn float_list(s: &str) -> Result<Vec<f64>, String> {
    let values: Vec<f64> = split_list(s)
        .map(|p| p.parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    if values.is_empty() {
        return Err("expected a comma-separated list of numbers".into());
    }
    Ok(values)
}

/// Rows separated by `;`, entries by `,`.
pub fn u32_matrix(s: &str) -> Result<Vec<Vec<u32>>, String> {
    let rows: Vec<Vec<u32>> = s
        .split(';')
        .map(|row| {
            split_list(row)
                .map(|p| p.parse::<u32>().map_err(|e| format!("{p:?}: {e}")))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;
    if rows.iter().any(Vec::is_empty) {
        return Err("empty row in matrix".into());
    }
    Ok(rows)
}

/// `a`, `a/b` with integer `a`, `b`, or a terminating decimal.
pub fn rational_value(s: &str) -> Result<Rational, String> {
    let s = s.trim();
    let bad = || format!("{s:?} is not a rational number");
    if let Some((n, d)) = s.split_once('/') {
        let n: i64 = n.trim().parse().map_err(|_| bad())?;
        let d: i64 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(format!("{s:?} has a zero denominator"));
        }
        return Ok(rational(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) || frac.len() > 15 {
            return Err(bad());
        }
        let negative = whole.starts_with('-');
        let whole: i64 = match whole.trim_start_matches(['-', '+']) {
            "" => 0,
            w => w.parse().map_err(|_| bad())?,
        };
        let scale = 10i64.pow(frac.len() as u32);
        let magnitude = whole
            .checked_mul(scale)
            .and_then(|w| w.checked_add(frac.parse::<i64>().ok()?))
            .ok_or_else(bad)?;
        return Ok(rational(if negative { -magnitude } else { magnitude }, scale));
    }
    Ok(rational(s.parse().map_err(|_| bad())?, 1))
}

pub fn rational_matrix(s: &str) -> Result<Vec<Vec<Rational>>, String> {
    s.split(';')
        .map(|row| {
            let row: Vec<Rational> = split_list(row).map(rational_value).collect::<Result<_, _>>()?;
            if row.is_empty() {
                return Err("empty row in matrix".to_string());
            }
            Ok(row)
        })
        .collect()
}

/// `1`, `-2.5`, `3i`, `-i`, `1+2i`, `0.5-1e-3i`.
pub fn complex_value(s: &str) -> Result<Complex64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("{s:?} is not a complex number");
    let Some(body) = t.strip_suffix('i') else {
        return t.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    };
    // split at the last sign that is not part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&j| matches!(bytes[j], b'+' | b'-') && !matches!(bytes[j - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(j) => (&body[..j], &body[j..]),
        None => ("", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        v => v.parse::<f64>().map_err(|_| bad())?,
    };
    let re = if re.is_empty() { 0.0 } else { re.parse::<f64>().map_err(|_| bad())? };
    Ok(Complex64::new(re, im))
}

pub fn complex_list(s: &str) -> Result<Vec<Complex64>, String> {
    let values: Vec<Complex64> = split_list(s).map(complex_value).collect::<Result<_, _>>()?;
    if values.is_empty() {
        return Err("expected a comma-separated list of complex numbers".into());
    }
    Ok(values)
}

/// Sum of terms `c*x1^2*x3`, variables `x1..xN`. A coefficient is a rational
/// and may be omitted.
pub fn polynomial(s: &str) -> Result<Poly, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let mut poly = Poly::zero();
    if t.is_empty() || t == "0" {
        return Ok(poly);
    }
    let mut terms = Vec::new();
    let mut start = 0;
    for (j, c) in t.char_indices() {
        if j > start && (c == '+' || c == '-') {
            terms.push(&t[start..j]);
            start = j;
        }
    }
    terms.push(&t[start..]);
    for term in terms {
        let (negative, body) = match term.as_bytes().first() {
            Some(b'-') => (true, &term[1..]),
            Some(b'+') => (false, &term[1..]),
            _ => (false, term),
        };
        if body.is_empty() {
            return Err(format!("empty term in {s:?}"));
        }
        let mut coefficient = rational(1, 1);
        let mut exponents = Vec::new();
        for factor in body.split('*') {
            if let Some(var) = factor.strip_prefix('x') {
                let (index, power) = match var.split_once('^') {
                    Some((i, p)) => (i, p.parse::<u32>().map_err(|_| format!("bad exponent in {factor:?}"))?),
                    None => (var, 1),
                };
                let index: u32 = index.parse().map_err(|_| format!("bad variable {factor:?}"))?;
                if index == 0 {
                    return Err("variables are numbered from x1".into());
                }
                exponents.push((index - 1, power));
            } else {
                coefficient = coefficient * rational_value(factor)?;
            }
        }
        if negative {
            coefficient = -coefficient;
        }
        poly.add_term(Monomial::from_exponents(exponents), coefficient);
    }
    Ok(poly)
}

/// Inverse of [`polynomial`], with `x1..xN` variable names.
pub fn format_polynomial(p: &Poly) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut terms: Vec<_> = p.terms().collect();
    terms.sort_by_key(|(m, _)| m.degree());
    let mut out = String::new();
    for (m, c) in terms {
        let text = c.to_string();
        let (negative, magnitude) = match text.strip_prefix('-') {
            Some(rest) => (true, rest.to_string()),
            None => (false, text),
        };
        if out.is_empty() {
            if negative {
                out.push('-');
            }
        } else {
            out.push_str(if negative { " - " } else { " + " });
        }
        let mut factors: Vec<String> = Vec::new();
        if magnitude != "1" || m.is_one() {
            factors.push(magnitude);
        }
        for &(v, e) in m.factors() {
            factors.push(if e == 1 { format!("x{}", v + 1) } else { format!("x{}^{e}", v + 1) });
        }
        out.push_str(&factors.join("*"));
    }
    out
}
