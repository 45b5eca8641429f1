//! Scalar abstraction shared by every computation in the crate.
//!
//! The calculus only needs an ordered field plus a ceiling and a bounded
//! exponential, so the same code runs on exact rationals (the default used by
//! the CLI and the verification harness) and on `f64`/`f32` for quick
//! what-if work where ties do not matter.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Ordered field element usable as a capacity, factor, or rate.
pub trait Scalar: num_traits::Num + Clone + PartialOrd + Debug + Display + Send + Sync + 'static {
    /// True when `==` and `<` on this type are exact (no rounding).
    const EXACT: bool;

    fn from_int(value: i64) -> Self;

    fn from_ratio(numer: i64, denom: i64) -> Self {
        Self::from_int(numer) / Self::from_int(denom)
    }

    /// Smallest integer not below `self`.
    fn ceil(&self) -> Self;

    /// Rejects NaN and infinities; always true for exact types.
    fn is_finite(&self) -> bool;

    /// Lower and upper bounds on `exp(-self)` for `self >= 0`.
    ///
    /// Exact types return rational bounds at least 128 bits tight relative
    /// to the value; float types return the neighbouring representable
    /// values around the libm result.
    fn exp_neg_enclosure(&self) -> (Self, Self);

    fn is_positive(&self) -> bool {
        *self > Self::zero()
    }
}

/// Minimum of a nonempty family, `None` if the family is empty.
pub fn min_of<S: Scalar, I: IntoIterator<Item = S>>(values: I) -> Option<S> {
    values
        .into_iter()
        .fold(None, |acc: Option<S>, v| match acc {
            Some(m) if m <= v => Some(m),
            _ => Some(v),
        })
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_int(value: i64) -> Self {
        BigRational::from_integer(BigInt::from(value))
    }

    fn from_ratio(numer: i64, denom: i64) -> Self {
        BigRational::new(BigInt::from(numer), BigInt::from(denom))
    }

    fn ceil(&self) -> Self {
        num_rational::Ratio::ceil(self)
    }

    fn is_finite(&self) -> bool {
        true
    }

    fn exp_neg_enclosure(&self) -> (Self, Self) {
        exp_neg_rational(self)
    }
}

macro_rules! float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            const EXACT: bool = false;

            fn from_int(value: i64) -> Self {
                value as $t
            }

            fn ceil(&self) -> Self {
                <$t>::ceil(*self)
            }

            fn is_finite(&self) -> bool {
                <$t>::is_finite(*self)
            }

            fn exp_neg_enclosure(&self) -> (Self, Self) {
                let e = (-*self).exp();
                (e.next_down().max(0.0), e.next_up())
            }
        }
    };
}

float_scalar!(f64);
float_scalar!(f32);

/// Guard bits carried on top of the 128-bit target precision.
const EXP_GUARD_BITS: u64 = 32;

fn exp_neg_rational(x: &BigRational) -> (BigRational, BigRational) {
    assert!(!x.is_negative(), "exp_neg_enclosure needs a nonnegative argument");
    if x.is_zero() {
        return (BigRational::one(), BigRational::one());
    }

    // exp(x) = exp(x / 2^halvings)^(2^halvings) with the reduced argument
    // <= 2^-8, which keeps the series short.
    let halvings = x.ceil().to_integer().bits() + 8;
    let prec = 128 + EXP_GUARD_BITS + halvings;

    // Taylor series in fixed point with `prec` fractional bits, rounding the
    // lower sum down and the upper sum up. Stop once the upper term is one
    // unit; because the reduced argument is far below 1/2 the remaining
    // tail is bounded by that term.
    let unit = BigInt::one() << prec;
    let mask = &unit - BigInt::one();
    let shifted = x.numer() << (prec - halvings);
    let r_lo = shifted.div_floor(x.denom());
    let r_hi = shifted.div_ceil(x.denom());
    let (mut t_lo, mut t_hi) = (unit.clone(), unit.clone());
    let (mut sum_lo, mut sum_hi) = (unit.clone(), unit.clone());
    let mut k = 1u64;
    loop {
        let k_big = BigInt::from(k);
        t_lo = ((t_lo * &r_lo) >> prec).div_floor(&k_big);
        t_hi = ((t_hi * &r_hi + &mask) >> prec).div_ceil(&k_big);
        sum_lo += &t_lo;
        sum_hi += &t_hi;
        if t_hi <= BigInt::one() {
            break;
        }
        k += 1;
    }
    let mut lo = sum_lo;
    let mut hi = sum_hi + t_hi;

    for _ in 0..halvings {
        lo = (&lo * &lo) >> prec;
        hi = (&hi * &hi + &mask) >> prec;
    }

    // exp(-x) lies in [unit/hi, unit/lo]; the result is about 2^-magnitude
    // in size, so `out_prec` fractional bits keep 128 significant ones.
    let magnitude = (&hi >> prec).bits();
    let out_prec = 128 + EXP_GUARD_BITS + magnitude;
    let numer = BigInt::one() << (prec + out_prec);
    let denom = BigInt::one() << out_prec;
    let lower = BigRational::new(numer.div_floor(&hi), denom.clone());
    let upper = BigRational::new(numer.div_ceil(&lo), denom);
    (lower, upper)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::from_ratio(n, d)
    }

    #[test]
    fn rational_ceil_matches_integer_ceiling() {
        assert_eq!(Scalar::ceil(&q(3, 1)), q(3, 1));
        assert_eq!(Scalar::ceil(&q(7, 2)), q(4, 1));
        assert_eq!(Scalar::ceil(&q(-7, 2)), q(-3, 1));
        assert_eq!(Scalar::ceil(&q(1, 1000)), q(1, 1));
    }

    #[test]
    fn min_of_scans_whole_family() {
        assert_eq!(min_of(vec![q(3, 1), q(1, 1), q(4, 1)]), Some(q(1, 1)));
        assert_eq!(min_of(Vec::<BigRational>::new()), None);
        assert_eq!(min_of(vec![2.5f64, -1.0, 0.0]), Some(-1.0));
    }

    #[test]
    fn exp_enclosure_brackets_libm_value() {
        for (n, d) in [(1, 10), (1, 1), (2, 1), (7, 3), (50, 1), (1000, 7)] {
            let x = q(n, d);
            let (lo, hi) = x.exp_neg_enclosure();
            assert!(lo <= hi);
            let reference = (-(n as f64) / d as f64).exp();
            let lo_f = lo.to_f64().unwrap();
            let hi_f = hi.to_f64().unwrap();
            let tol = reference * 1e-14;
            assert!(lo_f <= reference + tol && reference - tol <= hi_f, "x={n}/{d}");
        }
    }

    #[test]
    fn exp_enclosure_is_128_bits_tight() {
        for x in [q(1, 3), q(5, 1), q(123, 4)] {
            let (lo, hi) = x.exp_neg_enclosure();
            let width = &hi - &lo;
            let bound = &lo / BigRational::from_integer(BigInt::one() << 128u32);
            assert!(width <= bound, "enclosure too wide at {x}");
        }
    }

    #[test]
    fn exp_enclosure_at_zero_is_exact() {
        assert_eq!(q(0, 1).exp_neg_enclosure(), (q(1, 1), q(1, 1)));
    }

    #[test]
    fn float_enclosure_contains_value() {
        let (lo, hi) = 2.0f64.exp_neg_enclosure();
        let e = (-2.0f64).exp();
        assert!(lo < e && e < hi);
    }
}
