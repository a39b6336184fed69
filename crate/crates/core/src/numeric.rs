//! Floating-point helpers for assembling exact-rational series.
//!
//! Series coefficients are exact rationals; the polynomial in `x` is evaluated
//! in double-double arithmetic built from error-free transformations so that
//! the heavy cancellation of alternating `t`-series does not leak into the
//! reported CDF values.

use std::ops::{Add, AddAssign, Mul};

use num::{BigRational, Signed, ToPrimitive, Zero};

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DoubleDouble {
    pub const ZERO: DoubleDouble = DoubleDouble { hi: 0.0, lo: 0.0 };

    pub fn from_f64(x: f64) -> Self {
        DoubleDouble { hi: x, lo: 0.0 }
    }

    /// Nearest double-double to an exact rational.
    pub fn from_rational(r: &BigRational) -> Self {
        let hi = rational_to_f64(r);
        if !hi.is_finite() || hi == 0.0 {
            return DoubleDouble { hi, lo: 0.0 };
        }
        let rest = r - rational_from_f64(hi);
        DoubleDouble {
            hi,
            lo: rational_to_f64(&rest),
        }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            DoubleDouble {
                hi: -self.hi,
                lo: -self.lo,
            }
        } else {
            self
        }
    }
}

impl Add for DoubleDouble {
    type Output = DoubleDouble;

    fn add(self, rhs: DoubleDouble) -> DoubleDouble {
        let (s, e) = two_sum(self.hi, rhs.hi);
        let (t, f) = two_sum(self.lo, rhs.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        DoubleDouble { hi, lo }
    }
}

impl AddAssign for DoubleDouble {
    fn add_assign(&mut self, rhs: DoubleDouble) {
        *self = *self + rhs;
    }
}

impl Mul for DoubleDouble {
    type Output = DoubleDouble;

    fn mul(self, rhs: DoubleDouble) -> DoubleDouble {
        let (p, e) = two_prod(self.hi, rhs.hi);
        let e = e + (self.hi * rhs.lo + self.lo * rhs.hi);
        let (hi, lo) = quick_two_sum(p, e);
        DoubleDouble { hi, lo }
    }
}

/// Horner evaluation of `Σ coeffs[i] x^i` in double-double arithmetic.
pub fn horner_dd(coeffs: &[DoubleDouble], x: f64) -> DoubleDouble {
    let xd = DoubleDouble::from_f64(x);
    coeffs
        .iter()
        .rev()
        .fold(DoubleDouble::ZERO, |acc, &c| acc * xd + c)
}

/// Neumaier's compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Exact rational value of a finite double.
pub fn rational_from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float")
}

/// Conversion that stays finite-aware for very large or tiny ratios.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    if let Some(v) = r.to_f64() {
        if v.is_finite() && v != 0.0 {
            return v;
        }
    }
    // Fall back to a log-scale evaluation when the direct conversion
    // overflows or underflows in an intermediate step.
    let sign = if r.is_negative() { -1.0 } else { 1.0 };
    let num_bits = r.numer().bits() as i64;
    let den_bits = r.denom().bits() as i64;
    let shift_n = (num_bits - 60).max(0);
    let shift_d = (den_bits - 60).max(0);
    let n = (r.numer().abs() >> shift_n as usize).to_f64().unwrap_or(f64::NAN);
    let d = (r.denom() >> shift_d as usize).to_f64().unwrap_or(f64::NAN);
    sign * (n / d) * 2f64.powi((shift_n - shift_d) as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::BigInt;

    #[test]
    fn dd_captures_rounding_residual() {
        let third = BigRational::new(BigInt::from(1), BigInt::from(3));
        let dd = DoubleDouble::from_rational(&third);
        let three = DoubleDouble::from_f64(3.0);
        let one = dd * three;
        assert!((one.hi - 1.0).abs() < 1e-16);
        assert!((one.hi - 1.0 + one.lo).abs() < 1e-30);
    }

    #[test]
    fn horner_cancellation() {
        // (x - 1)^8 expanded, evaluated near 1: plain f64 Horner loses every digit.
        let binom = [1.0, -8.0, 28.0, -56.0, 70.0, -56.0, 28.0, -8.0, 1.0];
        let coeffs: Vec<_> = binom.iter().rev().map(|&c| DoubleDouble::from_f64(c)).collect();
        let x = 1.0 + 1.0 / 64.0;
        let got = horner_dd(&coeffs, x).to_f64();
        let want = (1.0f64 / 64.0).powi(8);
        assert!(((got - want) / want).abs() < 1e-6, "{got} vs {want}");
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::new();
        s.add(1.0);
        for _ in 0..1000 {
            s.add(1e-17);
        }
        s.add(-1.0);
        assert!((s.value() - 1e-14).abs() < 1e-20);
    }

    #[test]
    fn huge_rational_converts() {
        let big = BigRational::new(BigInt::from(10).pow(400), BigInt::from(10).pow(399) * 4);
        assert!((rational_to_f64(&big) - 2.5).abs() < 1e-15);
    }
}
