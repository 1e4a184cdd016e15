//! Bracketed root finding for monotone scalar functions.

use crate::error::{Error, Result};

const MAX_BISECTIONS: usize = 200;
const MAX_NEWTON: usize = 4;

/// Finds the root of `f` on `[lo, hi]` given a sign change, bisecting to
/// machine resolution and then polishing with Newton steps that stay inside
/// the final bracket and strictly reduce `|f|`.
///
/// `df` is the derivative of `f`; it is evaluated only during the polish.
pub fn bisect_newton<F, D>(what: &'static str, f: F, df: D, lo: f64, hi: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let (fa, fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.is_nan() || fb.is_nan() || fa.signum() == fb.signum() {
        return Err(Error::NoBracket {
            what,
            lo,
            hi,
            f_lo: fa,
            f_hi: fb,
        });
    }
    let a_negative = fa < 0.0;

    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == a_negative {
            a = mid;
        } else {
            b = mid;
        }
    }

    let mut x = 0.5 * (a + b);
    let mut fx = f(x);
    for _ in 0..MAX_NEWTON {
        let slope = df(x);
        if !(slope.is_finite() && slope != 0.0) {
            break;
        }
        let next = x - fx / slope;
        if !(next >= lo && next <= hi) {
            break;
        }
        let f_next = f(next);
        if f_next.abs() < fx.abs() {
            x = next;
            fx = f_next;
        } else {
            break;
        }
    }
    Ok(x)
}

/// Plain bisection on a sign change until the bracket is below `rel_tol`
/// relative width.
pub fn bisect<F>(what: &'static str, f: F, lo: f64, hi: f64, rel_tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let (fa, fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.is_nan() || fb.is_nan() || fa.signum() == fb.signum() {
        return Err(Error::NoBracket {
            what,
            lo,
            hi,
            f_lo: fa,
            f_hi: fb,
        });
    }
    let a_negative = fa < 0.0;
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (a + b);
        if (b - a) <= rel_tol * mid.abs() || mid <= a || mid >= b {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == a_negative {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}
