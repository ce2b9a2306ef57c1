//! Scalar abstraction and log-space numerics.
//!
//! Everything in this crate is generic over [`Real`], which is blanket
//! implemented for `f32` and `f64`. Natural log is the only internal unit;
//! decibels exist at the reporting layer (see [`crate::DecibelValue`]).

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar used throughout the crate.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal. Lossy for `f32`, exact for `f64`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("count representable")
    }

    /// Tolerance used when validating that probabilities sum to one.
    ///
    /// `1e-12` where the type can resolve it, otherwise a few ulps per term.
    fn normalization_tolerance(terms: usize) -> Self {
        let eps_based = Self::epsilon() * Self::from_count(8 * terms.max(1) as u64);
        eps_based.max(Self::lit(1e-12))
    }
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + ToPrimitive
        + Debug
        + Display
        + Default
        + Send
        + Sync
        + 'static
{
}

// Lanczos approximation, g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0`.
///
/// Returns NaN for `x <= 0` or NaN input and `+inf` for `x = +inf`.
pub fn ln_gamma<T: Real>(x: T) -> T {
    if x.is_nan() || x <= T::zero() {
        return T::nan();
    }
    if x.is_infinite() {
        return x;
    }
    if x < T::lit(0.5) {
        // Γ(x) = Γ(x + 1) / x keeps the series in its accurate range.
        return ln_gamma_lanczos(x + T::one()) - x.ln();
    }
    ln_gamma_lanczos(x)
}

fn ln_gamma_lanczos<T: Real>(x: T) -> T {
    let z = x - T::one();
    let mut series = T::lit(LANCZOS_COEFFS[0]);
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        series = series + T::lit(c) / (z + T::from_count(i as u64));
    }
    let t = z + T::lit(LANCZOS_G + 0.5);
    let half_ln_two_pi = T::lit(0.918_938_533_204_672_8);
    half_ln_two_pi + (z + T::lit(0.5)) * t.ln() - t + series.ln()
}

/// `ln B(a, b) = ln Γ(a) + ln Γ(b) − ln Γ(a + b)`.
pub fn ln_beta<T: Real>(a: T, b: T) -> T {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Binomial coefficient `C(n, k)`; zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        // Exact at every step: acc * (n - i) is divisible by (i + 1).
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}

/// Compensated (Kahan) accumulator.
///
/// Non-finite inputs bypass compensation and are summed plainly, so an
/// accumulation containing `-inf` yields `-inf` rather than NaN.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum<T> {
    sum: T,
    compensation: T,
    non_finite: Option<T>,
    count: u64,
}

impl<T: Real> KahanSum<T> {
    pub fn new() -> Self {
        Self {
            sum: T::zero(),
            compensation: T::zero(),
            non_finite: None,
            count: 0,
        }
    }

    #[inline]
    pub fn add(&mut self, value: T) {
        self.count += 1;
        if !value.is_finite() {
            self.non_finite = Some(match self.non_finite {
                Some(acc) => acc + value,
                None => value,
            });
            return;
        }
        let y = value - self.compensation;
        let t = self.sum + y;
        self.compensation = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub fn sum(&self) -> T {
        match self.non_finite {
            Some(special) => special,
            None => self.sum,
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Sum divided by the number of accumulated terms. NaN when empty.
    pub fn mean(&self) -> T {
        if self.count == 0 {
            return T::nan();
        }
        self.sum() / T::from_count(self.count)
    }
}

impl<T: Real> Extend<T> for KahanSum<T> {
    fn extend<I: IntoIterator<Item = T>>(&mut self, iter: I) {
        for v in iter {
            self.add(v);
        }
    }
}

impl<T: Real> FromIterator<T> for KahanSum<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut acc = Self::new();
        acc.extend(iter);
        acc
    }
}

/// `ln Σ exp(t_i)` with max-shift, accumulated in slice order.
///
/// Returns `-inf` iff every term is `-inf` (including the empty slice).
pub fn stable_log_sum<T: Real>(terms: &[T]) -> T {
    let max = terms
        .iter()
        .copied()
        .fold(T::neg_infinity(), |acc, x| if x > acc { x } else { acc });
    if max == T::neg_infinity() {
        return max;
    }
    if max.is_infinite() || max.is_nan() {
        return max;
    }
    let shifted: KahanSum<T> = terms.iter().map(|&t| (t - max).exp()).collect();
    max + shifted.sum().ln()
}

/// Arithmetic mean with compensated summation in slice order.
///
/// The caller is responsible for passing terms in canonical order; NaN for
/// an empty slice.
pub fn stable_mean<T: Real>(terms: &[T]) -> T {
    terms.iter().copied().collect::<KahanSum<T>>().mean()
}

/// Serde helpers that write non-finite scalars as `null`.
pub(crate) mod serde_real {
    use serde::Serializer;

    use super::Real;

    pub fn serialize<T: Real, S: Serializer>(value: &T, s: S) -> Result<S::Ok, S::Error> {
        match value.to_f64() {
            Some(v) if v.is_finite() => s.serialize_f64(v),
            _ => s.serialize_none(),
        }
    }

    pub mod option {
        use serde::Serializer;

        use crate::num::Real;

        pub fn serialize<T: Real, S: Serializer>(
            value: &Option<T>,
            s: S,
        ) -> Result<S::Ok, S::Error> {
            match value {
                Some(v) => super::serialize(v, s),
                None => s.serialize_none(),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ln_factorial(n: u64) -> f64 {
        (2..=n).map(|k| (k as f64).ln()).sum()
    }

    #[test]
    fn ln_gamma_integers() {
        for n in 1..60u64 {
            let got = ln_gamma(n as f64);
            let want = ln_factorial(n - 1);
            assert!(
                (got - want).abs() <= 1e-13 * want.abs().max(1.0),
                "n={n} got={got} want={want}"
            );
        }
    }

    #[test]
    fn ln_gamma_half_integers() {
        // Γ(n + 1/2) = (2n)! √π / (4^n n!)
        for n in 0..40u64 {
            let want = ln_factorial(2 * n) + 0.5 * std::f64::consts::PI.ln()
                - (n as f64) * 4f64.ln()
                - ln_factorial(n);
            let got = ln_gamma(n as f64 + 0.5);
            assert!((got - want).abs() <= 1e-13 * want.abs().max(1.0), "n={n}");
        }
    }

    #[test]
    fn ln_gamma_matches_statrs_on_a_grid() {
        let mut x = 1e-3;
        while x < 1e4 {
            let got = ln_gamma(x);
            let want = statrs::function::gamma::ln_gamma(x);
            assert!(
                (got - want).abs() <= 1e-12 * want.abs().max(1.0),
                "x={x} got={got} want={want}"
            );
            x *= 1.37;
        }
    }

    #[test]
    fn ln_gamma_domain() {
        assert!(ln_gamma(0.0f64).is_nan());
        assert!(ln_gamma(-1.5f64).is_nan());
        assert!(ln_gamma(f64::NAN).is_nan());
        assert_eq!(ln_gamma(f64::INFINITY), f64::INFINITY);
    }

    #[test]
    fn ln_gamma_f32() {
        let got = ln_gamma(5.0f32);
        assert!((got - 24f32.ln()).abs() < 1e-5);
    }

    #[test]
    fn ln_beta_uniform_prior() {
        assert!(ln_beta(1.0f64, 1.0).abs() < 1e-15);
        // B(3, 1) = 1/3
        assert!((ln_beta(3.0f64, 1.0) - (1.0f64 / 3.0).ln()).abs() < 1e-14);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(3, 0), 1);
        assert_eq!(binomial(3, 2), 3);
        assert_eq!(binomial(20, 10), 184_756);
        assert_eq!(binomial(26, 13), 10_400_600);
        assert_eq!(binomial(2, 3), 0);
    }

    #[test]
    fn log_sum_halves() {
        let h = 0.5f64.ln();
        assert!(stable_log_sum(&[h, h]).abs() < 1e-15);
    }

    #[test]
    fn log_sum_singleton() {
        assert_eq!(stable_log_sum(&[-3.25f64]), -3.25);
        assert_eq!(stable_log_sum(&[f64::NEG_INFINITY]), f64::NEG_INFINITY);
    }

    #[test]
    fn log_sum_tenths() {
        // direct linear-space sum at this scale: ten times 0.1
        let direct: f64 = (0..10).map(|_| 0.1f64).sum::<f64>().ln();
        let got = stable_log_sum(&[0.1f64.ln(); 10]);
        assert!((got - direct).abs() < 1e-15);
        assert!(got.abs() < 1e-15);
    }

    #[test]
    fn log_sum_all_neg_inf() {
        let n = f64::NEG_INFINITY;
        assert_eq!(stable_log_sum(&[n, n, n]), n);
        assert_eq!(stable_log_sum::<f64>(&[]), n);
        assert!((stable_log_sum(&[n, 0.0]) - 0.0).abs() < 1e-15);
    }

    #[test]
    fn log_sum_extreme_scale() {
        let got = stable_log_sum(&[-1000.0f64, -1000.0]);
        assert!((got - (-1000.0 + 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn means() {
        assert_eq!(stable_mean(&[0.3f64, 0.3, 0.3]), 0.3);
        assert_eq!(stable_mean(&[1.0f64, 2.0, 3.0]), 2.0);
        assert!(stable_mean::<f64>(&[]).is_nan());
    }

    #[test]
    fn mean_of_a_million_tenths() {
        // Exact rational: (10^6 * fl(0.1)) / 10^6 == fl(0.1), so the oracle is 0.1 itself.
        let terms = vec![0.1f64; 1_000_000];
        assert!((stable_mean(&terms) - 0.1).abs() < 1e-12);
        let naive = terms.iter().sum::<f64>() / 1e6;
        assert!((stable_mean(&terms) - 0.1).abs() <= (naive - 0.1).abs());
    }

    #[test]
    fn kahan_non_finite() {
        let mut acc = KahanSum::new();
        acc.add(-1.0f64);
        acc.add(f64::NEG_INFINITY);
        acc.add(2.0);
        assert_eq!(acc.sum(), f64::NEG_INFINITY);
        acc.add(f64::INFINITY);
        assert!(acc.sum().is_nan());
    }
}
