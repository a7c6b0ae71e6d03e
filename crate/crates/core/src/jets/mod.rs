//! Truncated multivariate Taylor arithmetic.
//!
//! A [`MultiJet`] stores the Taylor coefficients `c_α` (`|α| ≤ d`) of a
//! scalar function of `n_v` variables around a fixed point. All arithmetic
//! is truncated at order `d`; differentiation lowers the order by one.

mod func;
mod layout;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

pub use func::JetFn;
pub use layout::Layout;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone)]
pub struct MultiJet<T> {
    layout: Arc<Layout>,
    coeffs: Vec<T>,
}

/// Binary jet operation selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JetOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl<T: Scalar> MultiJet<T> {
    pub fn constant(value: T, num_vars: usize, order: usize) -> Self {
        let layout = Layout::get(num_vars, order);
        let mut coeffs = vec![T::zero(); layout.len()];
        coeffs[0] = value;
        MultiJet { layout, coeffs }
    }

    pub fn zero(num_vars: usize, order: usize) -> Self {
        Self::constant(T::zero(), num_vars, order)
    }

    /// Jet of the coordinate function `u_index` at a point where it equals `value`.
    pub fn seed_variable(index: usize, value: T, num_vars: usize, order: usize) -> Result<Self> {
        if index >= num_vars {
            return Err(Error::IndexOutOfRange { index, num_vars });
        }
        let mut jet = Self::constant(value, num_vars, order);
        if order > 0 {
            // degree-1 block is e_0, e_1, ... in graded-lex order
            jet.coeffs[1 + index] = T::one();
        }
        Ok(jet)
    }

    /// Jets of all coordinate functions at `point`.
    pub fn seed_point(point: &[T], order: usize) -> Vec<Self> {
        let n = point.len();
        point
            .iter()
            .enumerate()
            .map(|(i, v)| Self::seed_variable(i, v.clone(), n, order).expect("index in range"))
            .collect()
    }

    /// Builds a jet from coefficients listed in graded-lexicographic order.
    pub fn from_coeffs(num_vars: usize, order: usize, coeffs: Vec<T>) -> Result<Self> {
        let layout = Layout::get(num_vars, order);
        if coeffs.len() != layout.len() {
            return Err(Error::Domain(format!(
                "expected {} coefficients, got {}",
                layout.len(),
                coeffs.len()
            )));
        }
        Ok(MultiJet { layout, coeffs })
    }

    pub fn num_vars(&self) -> usize {
        self.layout.num_vars()
    }

    pub fn order(&self) -> usize {
        self.layout.order()
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn value(&self) -> &T {
        &self.coeffs[0]
    }

    /// Taylor coefficient `c_α`; `|α| > d` is an error.
    pub fn coeff(&self, alpha: &[u8]) -> Result<&T> {
        self.check_alpha(alpha)?;
        Ok(&self.coeffs[self.layout.position(alpha).expect("checked")])
    }

    /// The partial derivative `∂^α` at the expansion point, i.e. `α! · c_α`.
    pub fn extract_partial(&self, alpha: &[u8]) -> Result<T> {
        self.check_alpha(alpha)?;
        let k = self.layout.position(alpha).expect("checked");
        Ok(self.coeffs[k].clone() * T::from_ratio(self.layout.factorial(k) as i64, 1))
    }

    fn check_alpha(&self, alpha: &[u8]) -> Result<()> {
        if alpha.len() != self.num_vars() {
            return Err(Error::Domain(format!(
                "multi-index has {} entries, jet has {} variables",
                alpha.len(),
                self.num_vars()
            )));
        }
        let deg: usize = alpha.iter().map(|&a| a as usize).sum();
        if deg > self.order() {
            return Err(Error::OrderExceeded { requested: deg, available: self.order() });
        }
        Ok(())
    }

    /// Truncation to a lower order.
    pub fn lower(&self, order: usize) -> Result<Self> {
        if order > self.order() {
            return Err(Error::OrderExceeded { requested: order, available: self.order() });
        }
        if order == self.order() {
            return Ok(self.clone());
        }
        let layout = Layout::get(self.num_vars(), order);
        let coeffs = self.coeffs[..layout.len()].to_vec();
        Ok(MultiJet { layout, coeffs })
    }

    /// `∂/∂u_var` as a jet of order `d - 1`.
    pub fn partial(&self, var: usize) -> Result<Self> {
        if var >= self.num_vars() {
            return Err(Error::IndexOutOfRange { index: var, num_vars: self.num_vars() });
        }
        if self.order() == 0 {
            return Err(Error::OrderExceeded { requested: 1, available: 0 });
        }
        let target = Layout::get(self.num_vars(), self.order() - 1);
        let raised = self.layout.raised(var);
        let coeffs = (0..target.len())
            .map(|k| {
                let factor = target.multi_index(k)[var] as i64 + 1;
                self.coeffs[raised[k] as usize].clone() * T::from_ratio(factor, 1)
            })
            .collect();
        Ok(MultiJet { layout: target, coeffs })
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.layout, &other.layout) {
            Ok(())
        } else {
            Err(Error::ShapeMismatch(
                self.num_vars(),
                self.order(),
                other.num_vars(),
                other.order(),
            ))
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&T, &T) -> T) -> Self {
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| f(a, b)).collect();
        MultiJet { layout: self.layout.clone(), coeffs }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(self.zip_with(other, |a, b| a.clone() + b.clone()))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(self.zip_with(other, |a, b| a.clone() - b.clone()))
    }

    /// Truncated Cauchy product.
    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let layout = &self.layout;
        let coeffs = (0..layout.len())
            .map(|k| {
                let mut acc = T::zero();
                for &(i, j) in layout.convolution(k) {
                    let (a, b) = (&self.coeffs[i as usize], &other.coeffs[j as usize]);
                    if T::EXACT && (a.is_zero() || b.is_zero()) {
                        continue;
                    }
                    acc = acc + a.clone() * b.clone();
                }
                acc
            })
            .collect();
        Ok(MultiJet { layout: self.layout.clone(), coeffs })
    }

    /// Quotient via forward substitution in graded order.
    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let b0 = other.coeffs[0].clone();
        if b0.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let layout = &self.layout;
        let mut out: Vec<T> = Vec::with_capacity(layout.len());
        for k in 0..layout.len() {
            let mut acc = self.coeffs[k].clone();
            for &(i, j) in layout.convolution(k) {
                // i indexes the divisor; j < k whenever i != 0
                if i == 0 {
                    continue;
                }
                let b = &other.coeffs[i as usize];
                if T::EXACT && b.is_zero() {
                    continue;
                }
                acc = acc - b.clone() * out[j as usize].clone();
            }
            out.push(acc / b0.clone());
        }
        Ok(MultiJet { layout: self.layout.clone(), coeffs: out })
    }

    pub fn recip(&self) -> Result<Self> {
        Self::constant(T::one(), self.num_vars(), self.order()).checked_div(self)
    }

    pub fn scale(&self, factor: &T) -> Self {
        let coeffs = self.coeffs.iter().map(|c| c.clone() * factor.clone()).collect();
        MultiJet { layout: self.layout.clone(), coeffs }
    }

    pub fn add_scalar(&self, v: &T) -> Self {
        let mut out = self.clone();
        out.coeffs[0] = out.coeffs[0].clone() + v.clone();
        out
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Largest coefficient magnitude, as `f64`.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.to_f64().abs()).fold(0.0, f64::max)
    }

    pub fn apply(&self, other: &Self, op: JetOp) -> Result<Self> {
        match op {
            JetOp::Add => self.checked_add(other),
            JetOp::Sub => self.checked_sub(other),
            JetOp::Mul => self.checked_mul(other),
            JetOp::Div => self.checked_div(other),
        }
    }

    /// Elementwise conversion between scalar types (e.g. exact → float).
    pub fn map_scalar<U: Scalar>(&self, f: impl Fn(&T) -> U) -> MultiJet<U> {
        MultiJet { layout: self.layout.clone(), coeffs: self.coeffs.iter().map(f).collect() }
    }

    /// Evaluates the truncated Taylor polynomial at displacement `du`.
    pub fn eval_offset(&self, du: &[T]) -> T {
        let mut acc = T::zero();
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mut term = c.clone();
            for (v, &p) in self.layout.multi_index(k).iter().enumerate() {
                for _ in 0..p {
                    term = term * du[v].clone();
                }
            }
            acc = acc + term;
        }
        acc
    }
}

impl<T: Scalar> fmt::Debug for MultiJet<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for (k, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                m.entry(&self.layout.multi_index(k), c);
            }
        }
        m.finish()
    }
}

impl<T: Scalar> PartialEq for MultiJet<T> {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.layout, &other.layout) && self.coeffs == other.coeffs
    }
}

// Operator forms panic on shape mismatch, like slice indexing; use the
// `checked_*` methods where mismatches are a data condition.
impl<T: Scalar> Add for &MultiJet<T> {
    type Output = MultiJet<T>;
    fn add(self, rhs: Self) -> MultiJet<T> {
        self.checked_add(rhs).expect("jet add")
    }
}

impl<T: Scalar> Sub for &MultiJet<T> {
    type Output = MultiJet<T>;
    fn sub(self, rhs: Self) -> MultiJet<T> {
        self.checked_sub(rhs).expect("jet sub")
    }
}

impl<T: Scalar> Mul for &MultiJet<T> {
    type Output = MultiJet<T>;
    fn mul(self, rhs: Self) -> MultiJet<T> {
        self.checked_mul(rhs).expect("jet mul")
    }
}

impl<T: Scalar> Neg for &MultiJet<T> {
    type Output = MultiJet<T>;
    fn neg(self) -> MultiJet<T> {
        let coeffs = self.coeffs.iter().map(|c| -c.clone()).collect();
        MultiJet { layout: self.layout.clone(), coeffs }
    }
}
