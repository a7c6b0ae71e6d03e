//! Univariate analytic functions lifted to jets.
//!
//! For `a = a₀ + N` with `N` nilpotent (`N^{d+1} = 0`),
//! `f(a) = Σ_{k≤d} f^{(k)}(a₀)/k! · N^k`, evaluated by Horner's scheme.

use super::MultiJet;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JetFn {
    Exp,
    Log,
    Sqrt,
    /// `a^(num/den)`.
    Pow { num: i64, den: u32 },
    Sinh,
    Cosh,
    Sin,
    Cos,
}

fn need<T>(v: Option<T>, what: &'static str) -> Result<T> {
    v.ok_or(Error::NotRepresentable(what))
}

/// `f^{(k)}(a₀)/k!` for `k = 0..=order`.
fn taylor_coefficients<T: Scalar>(f: JetFn, a0: &T, order: usize) -> Result<Vec<T>> {
    let fact = |k: usize| T::from_usize((1..=k).product::<usize>().max(1));
    let mut out = Vec::with_capacity(order + 1);
    match f {
        JetFn::Exp => {
            let e = need(a0.exp(), "exp")?;
            for k in 0..=order {
                out.push(e.clone() / fact(k));
            }
        }
        JetFn::Log => {
            if !a0.is_positive() {
                return Err(Error::Domain("log of non-positive value".into()));
            }
            out.push(need(a0.ln(), "log")?);
            let mut p = T::one();
            for k in 1..=order {
                p = p * a0.clone();
                let sign = if k % 2 == 1 { T::one() } else { -T::one() };
                out.push(sign / (T::from_usize(k) * p.clone()));
            }
        }
        JetFn::Sqrt => return taylor_coefficients(JetFn::Pow { num: 1, den: 2 }, a0, order),
        JetFn::Pow { num, den } => {
            if den == 0 {
                return Err(Error::Domain("pow with zero denominator".into()));
            }
            if den != 1 && !a0.is_positive() {
                return Err(Error::Domain("fractional power of non-positive value".into()));
            }
            let r = T::from_ratio(num, den as i64);
            // a₀^{r-k} = a₀^r / a₀^k, but integer powers of zero need care
            if a0.is_zero() {
                // only non-negative integer exponents reach here
                if num < 0 {
                    return Err(Error::Domain("negative power of zero".into()));
                }
                let mut binom = T::one();
                for k in 0..=order {
                    if k > 0 {
                        binom = binom * (r.clone() - T::from_usize(k - 1)) / T::from_usize(k);
                    }
                    out.push(if k as i64 == num { binom.clone() } else { T::zero() });
                }
                return Ok(out);
            }
            let base = need(a0.pow_ratio(num, den), "pow")?;
            let mut binom = T::one();
            let mut p = T::one();
            for k in 0..=order {
                if k > 0 {
                    binom = binom * (r.clone() - T::from_usize(k - 1)) / T::from_usize(k);
                    p = p * a0.clone();
                }
                out.push(binom.clone() * base.clone() / p.clone());
            }
        }
        JetFn::Sinh | JetFn::Cosh => {
            let s = need(a0.sinh(), "sinh")?;
            let c = need(a0.cosh(), "cosh")?;
            let start = usize::from(f == JetFn::Cosh);
            for k in 0..=order {
                let d = if (k + start) % 2 == 0 { s.clone() } else { c.clone() };
                out.push(d / fact(k));
            }
        }
        JetFn::Sin | JetFn::Cos => {
            let s = need(a0.sin(), "sin")?;
            let c = need(a0.cos(), "cos")?;
            let cycle = [s.clone(), c.clone(), -s, -c];
            let start = if f == JetFn::Cos { 1 } else { 0 };
            for k in 0..=order {
                out.push(cycle[(k + start) % 4].clone() / fact(k));
            }
        }
    }
    Ok(out)
}

impl<T: Scalar> MultiJet<T> {
    pub fn compose(&self, f: JetFn) -> Result<Self> {
        let a0 = self.value().clone();
        let coeffs = taylor_coefficients(f, &a0, self.order())?;
        let nil = self.add_scalar(&-a0);
        let (n, d) = (self.num_vars(), self.order());
        let mut acc = MultiJet::constant(coeffs[d].clone(), n, d);
        for c in coeffs[..d].iter().rev() {
            acc = (&acc * &nil).add_scalar(c);
        }
        Ok(acc)
    }

    pub fn exp(&self) -> Result<Self> {
        self.compose(JetFn::Exp)
    }
    pub fn ln(&self) -> Result<Self> {
        self.compose(JetFn::Log)
    }
    pub fn sqrt(&self) -> Result<Self> {
        self.compose(JetFn::Sqrt)
    }
    pub fn pow_ratio(&self, num: i64, den: u32) -> Result<Self> {
        self.compose(JetFn::Pow { num, den })
    }
    pub fn sinh(&self) -> Result<Self> {
        self.compose(JetFn::Sinh)
    }
    pub fn cosh(&self) -> Result<Self> {
        self.compose(JetFn::Cosh)
    }
    pub fn sin(&self) -> Result<Self> {
        self.compose(JetFn::Sin)
    }
    pub fn cos(&self) -> Result<Self> {
        self.compose(JetFn::Cos)
    }
}
