//! Scan-then-bisect search for the first sign change of a function.

use crate::error::Result;

/// Smallest `x` in `[lo, hi]` where `f(x) >= 0`, given `f(lo) < 0`.
///
/// The interval is scanned forward in steps of `step`; the first bracketing
/// pair is then bisected until its width is at most `tol`. Returns `None`
/// when no scan point reaches zero. A crossing narrower than `step` can be
/// missed.
pub fn first_crossing<F>(mut f: F, lo: f64, hi: f64, step: f64, tol: f64) -> Result<Option<f64>>
where
    F: FnMut(f64) -> Result<f64>,
{
    debug_assert!(lo < hi && step > 0.0 && tol > 0.0);
    if f(lo)? >= 0.0 {
        return Ok(Some(lo));
    }
    let n = ((hi - lo) / step).ceil() as usize;
    let mut left = lo;
    for i in 1..=n {
        let right = (lo + i as f64 * step).min(hi);
        if f(right)? >= 0.0 {
            return bisect(&mut f, left, right, tol).map(Some);
        }
        left = right;
    }
    Ok(None)
}

fn bisect<F>(f: &mut F, mut below: f64, mut above: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    while above - below > tol {
        let mid = 0.5 * (below + above);
        if f(mid)? >= 0.0 {
            above = mid;
        } else {
            below = mid;
        }
    }
    Ok(0.5 * (below + above))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_smallest_root() {
        // Roots at 1, 2 and 3; the function is >= 0 on [1, 2] and [3, inf).
        let f = |x: f64| Ok((x - 1.0) * (x - 2.0) * (x - 3.0));
        let r = first_crossing(f, 0.0, 10.0, 0.05, 1e-9).unwrap().unwrap();
        assert!((r - 1.0).abs() < 1e-8, "{r}");
    }

    #[test]
    fn no_crossing_is_none() {
        let r = first_crossing(|x| Ok(-1.0 - x * x), 0.0, 5.0, 0.1, 1e-6).unwrap();
        assert!(r.is_none());
    }

    #[test]
    fn starting_above_returns_lo() {
        assert_eq!(first_crossing(|_| Ok(1.0), 2.0, 5.0, 0.1, 1e-6).unwrap(), Some(2.0));
    }

    #[test]
    fn errors_propagate() {
        let r = first_crossing(
            |x| if x > 1.0 { Err(crate::Error::Domain("boom".into())) } else { Ok(-1.0) },
            0.0,
            5.0,
            0.5,
            1e-6,
        );
        assert!(r.is_err());
    }
}
