use serde::Serialize;

use crate::error::{Error, Result};

/// A root located by bracketed bisection with a final Newton polish.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RootResult {
    pub value: f64,
    /// `g(value)` for the defining equation written as `g = 0`.
    pub residual: f64,
    pub iterations: usize,
    pub bracket: (f64, f64),
    /// The equation degenerated to its boundary case (zero right-hand side).
    pub boundary: bool,
}

const MAX_BISECTIONS: usize = 2000;

/// Solves `g(x) = 0` for `g` changing sign on `[lo, hi]`.
///
/// Bisects until the bracket is `1e-15` wide relative to its midpoint (or
/// no representable midpoint remains), then tries one Newton step with
/// `dg`, keeping it only if it stays inside the bracket and lowers `|g|`.
pub fn bisect_newton<G, D>(g: G, dg: D, lo: f64, hi: f64) -> Result<RootResult>
where
    G: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let bracket = (lo, hi);
    let (mut a, mut b) = (lo, hi);
    let ga = g(a);
    let gb = g(b);
    if ga == 0.0 {
        return Ok(RootResult { value: a, residual: 0.0, iterations: 0, bracket, boundary: false });
    }
    if gb == 0.0 {
        return Ok(RootResult { value: b, residual: 0.0, iterations: 0, bracket, boundary: false });
    }
    if ga.is_nan() || gb.is_nan() || ga.signum() == gb.signum() {
        return Err(Error::domain(format!(
            "no sign change on [{lo:e}, {hi:e}]: g(lo)={ga:e}, g(hi)={gb:e}"
        )));
    }
    let increasing = ga < 0.0;
    let mut iterations = 0;
    while iterations < MAX_BISECTIONS {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b || (b - a) <= 1e-15 * mid.abs() {
            break;
        }
        iterations += 1;
        let gm = g(mid);
        if gm == 0.0 {
            a = mid;
            b = mid;
            break;
        }
        if (gm < 0.0) == increasing {
            a = mid;
        } else {
            b = mid;
        }
    }
    let mut x = 0.5 * (a + b);
    let mut gx = g(x);
    let slope = dg(x);
    if slope.is_finite() && slope != 0.0 {
        let xn = x - gx / slope;
        if xn > lo && xn < hi {
            let gn = g(xn);
            if gn.abs() < gx.abs() {
                x = xn;
                gx = gn;
            }
        }
    }
    Ok(RootResult { value: x, residual: gx, iterations, bracket, boundary: false })
}

/// Bisection without a derivative, for composite equations.
pub fn bisect<G: Fn(f64) -> f64>(g: G, lo: f64, hi: f64) -> Result<RootResult> {
    bisect_newton(g, |_| f64::NAN, lo, hi)
}
