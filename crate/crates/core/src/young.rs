//! The Young-function pair `A(t) = e^t - 1 - t`, `B(s) = (1+s) ln(1+s) - s`.
//!
//! `A` and `B` are Legendre transforms of each other. Everything downstream
//! (the Orlicz norm, its dual witness, the Luxemburg check) only touches the
//! pair through the [`YoungPair`] trait, so alternative pairs can be swapped
//! in for testing.

use crate::error::{ensure_finite, Error, Result};

/// A convex pair of Young functions on `[0, inf)` that are Legendre duals.
pub trait YoungPair: Sync {
    /// `A(t)` for `t >= 0`.
    fn a(&self, t: f64) -> f64;
    /// `B(s)` for `s >= 0`.
    fn b(&self, s: f64) -> f64;
    /// Right derivative `B'(s)`.
    fn b_prime(&self, s: f64) -> f64;
    /// The unique `t >= 0` with `A(t) = y`.
    fn inv_a(&self, y: f64) -> f64;
    /// The unique `s >= 0` with `B(s) = y`.
    fn inv_b(&self, y: f64) -> f64;

    /// `A(B'(s))`, the budget used by the dual witness `f = B'(k|g|)`.
    fn a_of_b_prime(&self, s: f64) -> f64 {
        self.a(self.b_prime(s))
    }

    /// Derivative of `s -> A(B'(s))`.
    fn a_of_b_prime_slope(&self, s: f64) -> f64;
}

/// Below this argument the kernels switch to their Taylor series.
const SERIES_SWITCH: f64 = 0.5;

/// `e^t - 1 - t` and `(1+s) ln(1+s) - s`, the pair the toolkit ships with.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExpLog;

/// Sum of `t^k / k!` for `k >= 2`, valid for `0 <= t < SERIES_SWITCH`.
fn a_series(t: f64) -> f64 {
    let mut term = t * t / 2.0;
    let mut sum = term;
    let mut k = 2.0;
    while term > sum * 1e-18 {
        k += 1.0;
        term *= t / k;
        sum += term;
    }
    sum
}

/// `sum_{k>=2} (-1)^k s^k / (k(k-1))`, valid for `0 <= s < SERIES_SWITCH`.
fn b_series(s: f64) -> f64 {
    let mut pow = s * s;
    let mut sum = pow / 2.0;
    let mut k = 2.0_f64;
    loop {
        k += 1.0;
        pow *= -s;
        let term = pow / (k * (k - 1.0));
        sum += term;
        if term.abs() <= sum.abs() * 1e-18 {
            break;
        }
    }
    sum
}

impl ExpLog {
    pub fn eval_a(t: f64) -> f64 {
        let t = t.abs();
        if t < SERIES_SWITCH {
            a_series(t)
        } else {
            t.exp_m1() - t
        }
    }

    pub fn eval_b(s: f64) -> f64 {
        let s = s.abs();
        if s < SERIES_SWITCH {
            b_series(s)
        } else {
            (1.0 + s) * s.ln_1p() - s
        }
    }

    pub fn eval_b_prime(s: f64) -> f64 {
        s.abs().ln_1p()
    }

    /// Safeguarded Newton for `A(t) = y` on the bracket
    /// `[0, max(1, ln(1+y) + 1)]`.
    pub fn inverse_a(y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        if y == f64::INFINITY {
            return f64::INFINITY;
        }
        let mut lo = 0.0_f64;
        let mut hi = 1.0_f64.max(y.ln_1p() + 1.0);
        // sqrt(2y) for small y, ln(1+y) + ... for large y
        let mut t = if y < 1.0 {
            (2.0 * y).sqrt()
        } else {
            (y.ln_1p() + (1.0 + y.ln_1p()).ln()).min(hi)
        };
        for _ in 0..200 {
            let f = Self::eval_a(t) - y;
            if f == 0.0 {
                return t;
            }
            if f > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let slope = t.exp_m1();
            let mut next = t - f / slope;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = 0.5 * (lo + hi);
            }
            if (next - t).abs() <= 1e-16 * t.max(f64::MIN_POSITIVE) || hi - lo <= 1e-16 * hi {
                return next;
            }
            t = next;
        }
        t
    }

    /// Safeguarded Newton for `B(s) = y`.
    pub fn inverse_b(y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        if y == f64::INFINITY {
            return f64::INFINITY;
        }
        let mut lo = 0.0_f64;
        let mut hi = 1.0_f64;
        while Self::eval_b(hi) < y {
            lo = hi;
            hi *= 2.0;
        }
        let mut s = if y < 0.1 {
            (2.0 * y).sqrt().clamp(lo, hi)
        } else {
            0.5 * (lo + hi)
        };
        for _ in 0..200 {
            let f = Self::eval_b(s) - y;
            if f == 0.0 {
                return s;
            }
            if f > 0.0 {
                hi = s;
            } else {
                lo = s;
            }
            let mut next = s - f / s.ln_1p();
            if !(next > lo && next < hi) || !next.is_finite() {
                next = 0.5 * (lo + hi);
            }
            if (next - s).abs() <= 1e-16 * s.max(f64::MIN_POSITIVE) || hi - lo <= 1e-16 * hi {
                return next;
            }
            s = next;
        }
        s
    }
}

impl YoungPair for ExpLog {
    fn a(&self, t: f64) -> f64 {
        Self::eval_a(t)
    }
    fn b(&self, s: f64) -> f64 {
        Self::eval_b(s)
    }
    fn b_prime(&self, s: f64) -> f64 {
        Self::eval_b_prime(s)
    }
    fn inv_a(&self, y: f64) -> f64 {
        Self::inverse_a(y)
    }
    fn inv_b(&self, y: f64) -> f64 {
        Self::inverse_b(y)
    }
    fn a_of_b_prime(&self, s: f64) -> f64 {
        let s = s.abs();
        if s < SERIES_SWITCH {
            // s - ln(1+s) = sum_{k>=2} (-1)^k s^k / k
            let mut pow = s * s;
            let mut sum = pow / 2.0;
            let mut k = 2.0_f64;
            loop {
                k += 1.0;
                pow *= -s;
                let term = pow / k;
                sum += term;
                if term.abs() <= sum * 1e-18 {
                    break;
                }
            }
            sum
        } else {
            s - s.ln_1p()
        }
    }
    fn a_of_b_prime_slope(&self, s: f64) -> f64 {
        let s = s.abs();
        s / (1.0 + s)
    }
}

fn check_arg(x: f64, name: &str) -> Result<f64> {
    ensure_finite(x, name)?;
    if x < 0.0 {
        return Err(Error::InvalidArgument(format!("{name} must be >= 0, got {x}")));
    }
    Ok(x)
}

/// `A(t) = e^t - 1 - t`.
pub fn eval_a(t: f64) -> Result<f64> {
    Ok(ExpLog::eval_a(check_arg(t, "t")?))
}

/// `B(s) = (1+s) ln(1+s) - s`.
pub fn eval_b(s: f64) -> Result<f64> {
    Ok(ExpLog::eval_b(check_arg(s, "s")?))
}

/// `B'(s) = ln(1+s)`.
pub fn eval_b_prime(s: f64) -> Result<f64> {
    Ok(ExpLog::eval_b_prime(check_arg(s, "s")?))
}

/// `A^{-1}(y)`; `|A(t) - y| <= 1e-12 max(1, y)`.
pub fn inv_a(y: f64) -> Result<f64> {
    Ok(ExpLog::inverse_a(check_arg(y, "y")?))
}

/// `B^{-1}(y)`.
pub fn inv_b(y: f64) -> Result<f64> {
    Ok(ExpLog::inverse_b(check_arg(y, "y")?))
}

/// `s B'(s) - A(B'(s)) - B(s)`, which vanishes identically for a Legendre pair.
pub fn legendre_residual(s: f64) -> f64 {
    let bp = ExpLog::eval_b_prime(s);
    s * bp - ExpLog::eval_a(bp) - ExpLog::eval_b(s)
}
