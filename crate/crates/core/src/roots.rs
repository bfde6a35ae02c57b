//! Bracketed scalar root finding shared by the norm, covering and series code.

/// Root of a nondecreasing `f` on `[lo, hi]` with `f(lo) <= 0 < f(hi)`, by
/// Illinois false position with a bisection guard. The bracket invariant is
/// kept throughout, so for an `f` that is flat at zero the iteration
/// converges to the right end of the zero set. Returns the final bracket.
pub(crate) fn bracket_root(
    mut f: impl FnMut(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    mut flo: f64,
    mut fhi: f64,
    xtol_rel: f64,
    max_iter: usize,
) -> (f64, f64) {
    debug_assert!(flo <= 0.0 && fhi > 0.0);
    let mut side = 0i32;
    for it in 0..max_iter {
        if hi - lo <= xtol_rel * hi.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        let mut x = if it % 4 == 3 || !(fhi - flo).is_finite() || fhi - flo <= 0.0 {
            0.5 * (lo + hi)
        } else {
            hi - fhi * (hi - lo) / (fhi - flo)
        };
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        let fx = f(x);
        if fx <= 0.0 {
            lo = x;
            flo = fx;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        } else {
            hi = x;
            fhi = fx;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        }
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_cube_root() {
        let (lo, hi) = bracket_root(|x| x * x * x - 2.0, 0.0, 2.0, -2.0, 6.0, 1e-15, 200);
        assert!((lo - 2f64.cbrt()).abs() < 1e-14 && (hi - 2f64.cbrt()).abs() < 1e-14);
    }

    #[test]
    fn flat_zero_set_goes_right() {
        let f = |x: f64| if x < 1.0 { -1.0 } else if x <= 2.0 { 0.0 } else { x - 2.0 };
        let (lo, hi) = bracket_root(f, 0.0, 4.0, -1.0, 2.0, 1e-13, 500);
        assert!((lo - 2.0).abs() < 1e-10 && hi >= 2.0);
    }
}
