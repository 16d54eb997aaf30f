//! Bracketed scalar root finding.

use crate::error::{Error, Result};

const MAX_ITER: usize = 400;

/// Bisection on `[lo, hi]`; `f(lo)` and `f(hi)` must differ in sign.
///
/// Stops when the bracket is narrower than `xtol` (absolute plus relative
/// to the midpoint) or `f` hits zero exactly.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, xtol: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if !(flo.is_finite() && fhi.is_finite()) || flo.signum() == fhi.signum() {
        return Err(Error::RootBracket(format!(
            "no sign change on [{lo}, {hi}]: f = ({flo:e}, {fhi:e})"
        )));
    }
    for _ in 0..MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= xtol * (1.0 + mid.abs()) || mid == lo || mid == hi {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Walk outward from `start` by `step, 2·step, 4·step, ...` in the direction
/// of `step` until `f` takes the sign opposite to `reference`. Returns the
/// last two probe points.
pub fn scan_for_sign_change<F: Fn(f64) -> f64>(
    f: F,
    start: f64,
    step: f64,
    reference: f64,
    max_doublings: usize,
) -> Option<(f64, f64)> {
    let mut prev = start;
    let mut h = step;
    for _ in 0..max_doublings {
        let x = start + h;
        let fx = f(x);
        if !fx.is_finite() {
            return None;
        }
        if fx != 0.0 && fx.signum() != reference.signum() {
            return Some((prev, x));
        }
        if fx == 0.0 {
            return Some((x, x));
        }
        prev = x;
        h *= 2.0;
    }
    None
}
