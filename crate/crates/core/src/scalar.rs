//! Scalar abstraction shared by every numeric routine in the crate.
//!
//! All measure-theoretic computations here are finite linear algebra over a
//! field equipped with a conjugation, so the whole library is generic over a
//! [`Scalar`]. Three implementations are provided:
//!
//! * `f64` — the default working mode,
//! * [`num::complex::Complex64`] — complex-valued observables over real weights,
//! * [`num::BigRational`] — exact arithmetic for spaces with rational data;
//!   used by ground-truth oracles and by the CLI's `--exact` mode.
//!
//! Floating-point sums run through a Neumaier-compensated [`Accumulator`], so
//! window averages with many terms stay well below the 1e-12 tolerances used
//! throughout; the rational accumulator is a plain exact sum.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num::complex::Complex64;
use num::{BigRational, FromPrimitive, Signed, ToPrimitive, Zero};

/// Streaming sum with a deterministic result for a fixed insertion order.
pub trait Accumulator<S>: Default {
    fn add(&mut self, value: S);
    fn finish(self) -> S;
}

/// Field with conjugation, as used by the measure/averaging machinery.
///
/// `abs_sq` and `to_f64` deliberately land in `f64` regardless of the scalar:
/// they feed norm computations, tolerance checks and report formatting, none
/// of which need to stay inside the field.
pub trait Scalar:
    Clone
    + PartialEq
    + Debug
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Whether arithmetic in this scalar is exact (no rounding).
    const EXACT: bool;

    type Acc: Accumulator<Self>;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_int(v: i64) -> Self;
    /// The field element `num / den`. Panics if `den == 0`.
    fn from_ratio(num: i64, den: i64) -> Self;
    /// Exact embedding of a finite float where the field allows it.
    fn from_f64(v: f64) -> Self;
    fn conj(&self) -> Self;
    fn is_zero(&self) -> bool;
    /// `|x|^2` as a float, for norms and tolerances.
    fn abs_sq(&self) -> f64;
    /// Real part as a float, for reporting and comparisons.
    fn to_f64(&self) -> f64;
    /// `Some(x)` when the value is a strictly positive real number.
    fn as_positive_real(&self) -> Option<f64>;
    /// True when the value is real and `>= 0`.
    fn is_nonneg_real(&self) -> bool;
    /// Round-trippable text form (used verbatim in reports).
    fn repr(&self) -> String;
}

/// Neumaier variant of Kahan summation: compensates both when the running
/// sum dominates the addend and vice versa.
#[derive(Default)]
pub struct NeumaierAcc {
    sum: f64,
    comp: f64,
}

impl Accumulator<f64> for NeumaierAcc {
    fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.comp += (self.sum - t) + value;
        } else {
            self.comp += (value - t) + self.sum;
        }
        self.sum = t;
    }

    fn finish(self) -> f64 {
        self.sum + self.comp
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    type Acc = NeumaierAcc;

    fn zero() -> Self {
        0.0
    }

    fn one() -> Self {
        1.0
    }

    fn from_int(v: i64) -> Self {
        v as f64
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        num as f64 / den as f64
    }

    fn from_f64(v: f64) -> Self {
        v
    }

    fn conj(&self) -> Self {
        *self
    }

    fn is_zero(&self) -> bool {
        *self == 0.0
    }

    fn abs_sq(&self) -> f64 {
        self * self
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn as_positive_real(&self) -> Option<f64> {
        (*self > 0.0 && self.is_finite()).then_some(*self)
    }

    fn is_nonneg_real(&self) -> bool {
        *self >= 0.0
    }

    fn repr(&self) -> String {
        // `{:?}` prints the shortest decimal that round-trips.
        format!("{self:?}")
    }
}

#[derive(Default)]
pub struct ComplexAcc {
    re: NeumaierAcc,
    im: NeumaierAcc,
}

impl Accumulator<Complex64> for ComplexAcc {
    fn add(&mut self, value: Complex64) {
        self.re.add(value.re);
        self.im.add(value.im);
    }

    fn finish(self) -> Complex64 {
        Complex64::new(self.re.finish(), self.im.finish())
    }
}

impl Scalar for Complex64 {
    const EXACT: bool = false;

    type Acc = ComplexAcc;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }

    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }

    fn from_int(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Complex64::new(num as f64 / den as f64, 0.0)
    }

    fn from_f64(v: f64) -> Self {
        Complex64::new(v, 0.0)
    }

    fn conj(&self) -> Self {
        Complex64::conj(self)
    }

    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }

    fn abs_sq(&self) -> f64 {
        self.norm_sqr()
    }

    fn to_f64(&self) -> f64 {
        self.re
    }

    fn as_positive_real(&self) -> Option<f64> {
        (self.im == 0.0 && self.re > 0.0 && self.re.is_finite()).then_some(self.re)
    }

    fn is_nonneg_real(&self) -> bool {
        self.im == 0.0 && self.re >= 0.0
    }

    fn repr(&self) -> String {
        format!("{:?}{:+?}i", self.re, self.im)
    }
}

/// Plain exact sum; order is irrelevant for rationals.
#[derive(Default)]
pub struct ExactAcc {
    sum: BigRational,
}

impl Accumulator<BigRational> for ExactAcc {
    fn add(&mut self, value: BigRational) {
        self.sum += value;
    }

    fn finish(self) -> BigRational {
        self.sum
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    type Acc = ExactAcc;

    fn zero() -> Self {
        Zero::zero()
    }

    fn one() -> Self {
        num::One::one()
    }

    fn from_int(v: i64) -> Self {
        BigRational::from_i64(v).expect("i64 embeds in BigRational")
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Self::from_int(num) / Self::from_int(den)
    }

    fn from_f64(v: f64) -> Self {
        BigRational::from_float(v).expect("finite float embeds in BigRational")
    }

    fn conj(&self) -> Self {
        self.clone()
    }

    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }

    fn abs_sq(&self) -> f64 {
        let v = ToPrimitive::to_f64(self).unwrap_or(f64::NAN);
        v * v
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn as_positive_real(&self) -> Option<f64> {
        self.is_positive().then(|| Scalar::to_f64(self))
    }

    fn is_nonneg_real(&self) -> bool {
        !self.is_negative()
    }

    fn repr(&self) -> String {
        format!("{self}")
    }
}

/// Sums an iterator through the scalar's accumulator.
pub fn acc_sum<S: Scalar>(values: impl IntoIterator<Item = S>) -> S {
    let mut acc = S::Acc::default();
    for v in values {
        acc.add(v);
    }
    acc.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_handles_cancellation() {
        let mut acc = NeumaierAcc::default();
        acc.add(1.0);
        for _ in 0..10 {
            acc.add(1e-16);
        }
        acc.add(-1.0);
        let got = acc.finish();
        assert!((got - 1e-15).abs() < 1e-30, "got {got}");
    }

    #[test]
    fn rational_mode_is_exact() {
        let third = BigRational::from_ratio(1, 3);
        let sum = acc_sum(vec![third.clone(), third.clone(), third]);
        assert_eq!(sum, BigRational::one());
        assert_eq!(sum.repr(), "1");
        assert_eq!(BigRational::from_ratio(3, 6).repr(), "1/2");
    }

    #[test]
    fn positivity_probes() {
        assert_eq!(2.5f64.as_positive_real(), Some(2.5));
        assert_eq!((-1.0f64).as_positive_real(), None);
        assert_eq!(Complex64::new(1.0, 0.5).as_positive_real(), None);
        assert!(Complex64::new(3.0, 0.0).is_nonneg_real());
        assert!(BigRational::from_ratio(-1, 2).as_positive_real().is_none());
    }

    #[test]
    fn float_repr_round_trips() {
        let v = 0.1f64 + 0.2f64;
        assert_eq!(v.repr().parse::<f64>().unwrap(), v);
    }
}
