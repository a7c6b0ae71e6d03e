//! Scalar abstraction shared by the jet arithmetic and the invariant pipeline.
//!
//! Floating-point types evaluate every elementary function; the exact
//! rational type only answers when the result is itself rational (for
//! instance `exp(0)`, or `sqrt(9/4)`), and returns `None` otherwise.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

pub trait Scalar: Clone + Debug + PartialOrd + Num + Signed + Send + Sync + 'static {
    /// True when arithmetic is exact (no rounding).
    const EXACT: bool;

    fn from_f64(v: f64) -> Option<Self>;
    fn to_f64(&self) -> f64;
    fn from_ratio(num: i64, den: i64) -> Self;

    fn from_usize(v: usize) -> Self {
        Self::from_ratio(v as i64, 1)
    }

    fn exp(&self) -> Option<Self>;
    fn ln(&self) -> Option<Self>;
    fn sin(&self) -> Option<Self>;
    fn cos(&self) -> Option<Self>;
    fn sinh(&self) -> Option<Self>;
    fn cosh(&self) -> Option<Self>;

    /// `self^(num/den)` for a strictly positive base (any base when `den == 1`).
    fn pow_ratio(&self, num: i64, den: u32) -> Option<Self>;

    fn sqrt(&self) -> Option<Self> {
        self.pow_ratio(1, 2)
    }

    fn powi(&self, exp: i64) -> Option<Self> {
        let mut base = if exp < 0 {
            if self.is_zero() {
                return None;
            }
            Self::one() / self.clone()
        } else {
            self.clone()
        };
        let mut e = exp.unsigned_abs();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            base = base.clone() * base;
            e >>= 1;
        }
        Some(acc)
    }
}

macro_rules! float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            const EXACT: bool = false;

            fn from_f64(v: f64) -> Option<Self> {
                Some(v as $t)
            }
            fn to_f64(&self) -> f64 {
                *self as f64
            }
            fn from_ratio(num: i64, den: i64) -> Self {
                (num as f64 / den as f64) as $t
            }
            fn exp(&self) -> Option<Self> {
                Some(Float::exp(*self))
            }
            fn ln(&self) -> Option<Self> {
                (*self > 0.0).then(|| Float::ln(*self))
            }
            fn sin(&self) -> Option<Self> {
                Some(Float::sin(*self))
            }
            fn cos(&self) -> Option<Self> {
                Some(Float::cos(*self))
            }
            fn sinh(&self) -> Option<Self> {
                Some(Float::sinh(*self))
            }
            fn cosh(&self) -> Option<Self> {
                Some(Float::cosh(*self))
            }
            fn pow_ratio(&self, num: i64, den: u32) -> Option<Self> {
                if den == 1 {
                    return Scalar::powi(self, num);
                }
                if *self <= 0.0 {
                    return None;
                }
                if den == 2 && num == 1 {
                    return Some(Float::sqrt(*self));
                }
                Some(Float::powf(*self, (num as f64 / den as f64) as $t))
            }
        }
    };
}

float_scalar!(f32);
float_scalar!(f64);

fn exact_root(v: &BigInt, n: u32) -> Option<BigInt> {
    let r = v.nth_root(n);
    (num_traits::Pow::pow(&r, n) == *v).then_some(r)
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_f64(v: f64) -> Option<Self> {
        <BigRational as FromPrimitive>::from_f64(v)
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn exp(&self) -> Option<Self> {
        self.is_zero().then(Self::one)
    }
    fn ln(&self) -> Option<Self> {
        self.is_one().then(Self::zero)
    }
    fn sin(&self) -> Option<Self> {
        self.is_zero().then(Self::zero)
    }
    fn cos(&self) -> Option<Self> {
        self.is_zero().then(Self::one)
    }
    fn sinh(&self) -> Option<Self> {
        self.is_zero().then(Self::zero)
    }
    fn cosh(&self) -> Option<Self> {
        self.is_zero().then(Self::one)
    }
    fn pow_ratio(&self, num: i64, den: u32) -> Option<Self> {
        if den == 1 {
            return Scalar::powi(self, num);
        }
        if !self.is_positive() {
            return None;
        }
        let root = BigRational::new(exact_root(self.numer(), den)?, exact_root(self.denom(), den)?);
        Scalar::powi(&root, num)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::from_ratio(n, d)
    }

    #[test]
    fn rational_roots_are_exact_or_absent() {
        assert_eq!(q(9, 4).sqrt(), Some(q(3, 2)));
        assert_eq!(q(2, 1).sqrt(), None);
        assert_eq!(q(8, 27).pow_ratio(-2, 3), Some(q(9, 4)));
        assert_eq!(q(-1, 1).sqrt(), None);
        assert_eq!(q(1, 1).pow_ratio(-1, 5), Some(q(1, 1)));
    }

    #[test]
    fn rational_transcendentals_only_at_trivial_points() {
        assert_eq!(q(0, 1).exp(), Some(q(1, 1)));
        assert_eq!(q(1, 2).exp(), None);
        assert_eq!(q(1, 1).ln(), Some(q(0, 1)));
        assert_eq!(q(0, 1).cosh(), Some(q(1, 1)));
    }

    #[test]
    fn float_pow_ratio() {
        let v = Scalar::pow_ratio(&8.0f64, -1, 3).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
        assert!(Scalar::pow_ratio(&-8.0f64, 1, 3).is_none());
        assert_eq!(Scalar::pow_ratio(&-2.0f64, 3, 1), Some(-8.0));
    }
}
