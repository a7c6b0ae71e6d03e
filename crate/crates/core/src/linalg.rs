//! Gaussian elimination over scalars and over jets.
//!
//! Pivots are chosen by the magnitude of the constant term, so the same code
//! inverts a matrix of jets (a matrix-valued function near a point) whenever
//! the matrix of values is invertible.

use crate::error::{Error, Result};
use crate::jets::MultiJet;
use crate::scalar::Scalar;

pub trait Elem: Clone {
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Result<Self>;
    fn neg(&self) -> Self;
    /// Magnitude of the value used for pivoting.
    fn pivot_size(&self) -> f64;
    fn is_exact_zero(&self) -> bool;
    /// For jets: every coefficient vanishes, not just the value.
    fn is_identically_zero(&self) -> bool {
        self.is_exact_zero()
    }
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
}

impl<T: Scalar> Elem for T {
    fn add(&self, o: &Self) -> Self {
        self.clone() + o.clone()
    }
    fn sub(&self, o: &Self) -> Self {
        self.clone() - o.clone()
    }
    fn mul(&self, o: &Self) -> Self {
        self.clone() * o.clone()
    }
    fn div(&self, o: &Self) -> Result<Self> {
        if o.is_zero() {
            return Err(Error::Singular);
        }
        Ok(self.clone() / o.clone())
    }
    fn neg(&self) -> Self {
        -self.clone()
    }
    fn pivot_size(&self) -> f64 {
        self.to_f64().abs()
    }
    fn is_exact_zero(&self) -> bool {
        self.is_zero()
    }
    fn zero_like(&self) -> Self {
        T::zero()
    }
    fn one_like(&self) -> Self {
        T::one()
    }
}

impl<T: Scalar> Elem for MultiJet<T> {
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Result<Self> {
        self.checked_div(o).map_err(|_| Error::Singular)
    }
    fn neg(&self) -> Self {
        -self
    }
    fn pivot_size(&self) -> f64 {
        self.value().to_f64().abs()
    }
    fn is_exact_zero(&self) -> bool {
        self.value().is_zero()
    }
    fn is_identically_zero(&self) -> bool {
        self.is_zero()
    }
    fn zero_like(&self) -> Self {
        MultiJet::zero(self.num_vars(), self.order())
    }
    fn one_like(&self) -> Self {
        MultiJet::constant(T::one(), self.num_vars(), self.order())
    }
}

fn pivot_row<E: Elem>(m: &[Vec<E>], col: usize) -> Result<usize> {
    let (row, size) = (col..m.len())
        .map(|r| (r, m[r][col].pivot_size()))
        .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
    if size == 0.0 || m[row][col].is_exact_zero() {
        return Err(Error::Singular);
    }
    Ok(row)
}

/// Determinant of a square matrix.
///
/// For jets the matrix of values must be invertible unless a whole column is
/// identically zero; otherwise elimination cannot proceed and `Singular` is
/// returned.
pub fn det<E: Elem>(m: &[Vec<E>]) -> Result<E> {
    let n = m.len();
    assert!(n > 0 && m.iter().all(|r| r.len() == n), "square matrix expected");
    let mut a = m.to_vec();
    let mut acc = a[0][0].one_like();
    let mut negate = false;
    for col in 0..n {
        let p = match pivot_row(&a, col) {
            Ok(p) => p,
            Err(e) => {
                return if (col..n).all(|r| a[r][col].is_identically_zero()) {
                    Ok(a[0][0].zero_like())
                } else {
                    Err(e)
                };
            }
        };
        if p != col {
            a.swap(p, col);
            negate = !negate;
        }
        let piv = a[col][col].clone();
        acc = acc.mul(&piv);
        for r in col + 1..n {
            let f = a[r][col].div(&piv)?;
            for c in col + 1..n {
                let t = f.mul(&a[col][c]);
                a[r][c] = a[r][c].sub(&t);
            }
        }
    }
    Ok(if negate { acc.neg() } else { acc })
}

/// Solves `m · X = rhs` for several right-hand sides (columns of `rhs`).
pub fn solve<E: Elem>(m: &[Vec<E>], rhs: &[Vec<E>]) -> Result<Vec<Vec<E>>> {
    let n = m.len();
    assert!(m.iter().all(|r| r.len() == n) && rhs.len() == n, "shape mismatch");
    let mut a = m.to_vec();
    let mut b = rhs.to_vec();
    for col in 0..n {
        let p = pivot_row(&a, col)?;
        a.swap(p, col);
        b.swap(p, col);
        let piv = a[col][col].clone();
        for r in col + 1..n {
            let f = a[r][col].div(&piv)?;
            for c in col + 1..n {
                let t = f.mul(&a[col][c]);
                a[r][c] = a[r][c].sub(&t);
            }
            for c in 0..b[r].len() {
                let t = f.mul(&b[col][c]);
                b[r][c] = b[r][c].sub(&t);
            }
        }
    }
    for col in (0..n).rev() {
        for c in 0..b[col].len() {
            let mut acc = b[col][c].clone();
            for k in col + 1..n {
                acc = acc.sub(&a[col][k].mul(&b[k][c]));
            }
            b[col][c] = acc.div(&a[col][col])?;
        }
    }
    Ok(b)
}

pub fn inverse<E: Elem>(m: &[Vec<E>]) -> Result<Vec<Vec<E>>> {
    let n = m.len();
    let id: Vec<Vec<E>> = (0..n)
        .map(|r| {
            (0..n).map(|c| if r == c { m[0][0].one_like() } else { m[0][0].zero_like() }).collect()
        })
        .collect();
    solve(m, &id)
}
