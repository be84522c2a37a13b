//! Bracketed scalar root finding.

use crate::error::{Error, Result};

/// Root of a continuous monotone function on [lo, hi].
///
/// Secant steps accelerated by a guaranteed bisection fallback: the bracket
/// always shrinks, and iteration stops once its width is below `tol`.
pub fn find_root_monotone<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    if !(lo < hi) || !tol.is_finite() || tol <= 0.0 {
        return Err(Error::Config(format!(
            "invalid bracket or tolerance (lo = {lo}, hi = {hi}, tol = {tol})"
        )));
    }
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa * fb > 0.0 {
        return Err(Error::Bracket { lo, hi });
    }
    for _ in 0..200 {
        if b - a <= tol {
            break;
        }
        // guaranteed halving
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fa * fm < 0.0 {
            b = m;
            fb = fm;
        } else {
            a = m;
            fa = fm;
        }
        if b - a <= tol {
            break;
        }
        // secant acceleration inside the updated bracket
        let denom = fb - fa;
        if denom != 0.0 {
            let s = b - fb * (b - a) / denom;
            if s > a + 0.1 * tol && s < b - 0.1 * tol {
                let fs = f(s);
                if fs == 0.0 {
                    return Ok(s);
                }
                if fa * fs < 0.0 {
                    b = s;
                    fb = fs;
                } else {
                    a = s;
                    fa = fs;
                }
            }
        }
    }
    Ok(0.5 * (a + b))
}
