//! Pointwise residuals of the structure equations.
//!
//! Each function returns the largest absolute component of a tensor that
//! vanishes identically on a Blaschke hypersurface.

use super::{max_abs, BlaschkeData};
use crate::error::Result;
use crate::scalar::Scalar;

fn idx4(n: usize) -> impl Iterator<Item = (usize, usize, usize, usize)> {
    (0..n).flat_map(move |a| {
        (0..n).flat_map(move |b| (0..n).flat_map(move |c| (0..n).map(move |d| (a, b, c, d))))
    })
}

fn sum<T: Scalar>(n: usize, f: impl Fn(usize) -> T) -> T {
    (0..n).fold(T::zero(), |a, p| a + f(p))
}

/// `R̂(X,Y)Z − H[h(Y,Z)X − h(X,Z)Y] + [K_X, K_Y]Z`.
pub fn check_gauss<T: Scalar>(b: &BlaschkeData<T>) -> T {
    let n = b.dim;
    let (r, k, h) = (&b.r_hat, &b.k, &b.metric.h);
    let delta = |a: usize, c: usize| if a == c { T::one() } else { T::zero() };
    max_abs(idx4(n).map(|(i, j, kk, l)| {
        let curv = b.h_mean.clone()
            * (h[[j, kk]].clone() * delta(i, l) - h[[i, kk]].clone() * delta(j, l));
        let comm = sum(n, |p| {
            k[[j, kk, p]].clone() * k[[i, p, l]].clone() - k[[i, kk, p]].clone() * k[[j, p, l]].clone()
        });
        r[[i, j, kk, l]].clone() - curv + comm
    }))
}

/// `(∇̂_X K)(Y,Z) − (∇̂_Y K)(X,Z)`.
pub fn check_codazzi<T: Scalar>(b: &BlaschkeData<T>) -> T {
    let dk = &b.nabla_k;
    max_abs(idx4(b.dim).map(|(m, i, j, l)| dk[[m, i, j, l]].clone() - dk[[i, m, j, l]].clone()))
}

/// `tr K_X` for each coordinate direction.
pub fn check_apolarity<T: Scalar>(b: &BlaschkeData<T>) -> T {
    let n = b.dim;
    max_abs((0..n).map(|i| sum(n, |j| b.k[[i, j, j]].clone())))
}

/// Cyclic sum over `(W,X,Y)` of `R̂(W,X)K(Y,Z) − K(R̂(W,X)Z, Y)`.
pub fn check_tsinghua<T: Scalar>(b: &BlaschkeData<T>) -> T {
    let n = b.dim;
    let (r, k) = (&b.r_hat, &b.k);
    let term = |w: usize, x: usize, y: usize, z: usize, l: usize| -> T {
        sum(n, |p| {
            k[[y, z, p]].clone() * r[[w, x, p, l]].clone()
                - r[[w, x, z, p]].clone() * k[[p, y, l]].clone()
        })
    };
    max_abs(idx4(n).flat_map(|(w, x, y, z)| {
        (0..n).map(move |l| term(w, x, y, z, l) + term(x, y, w, z, l) + term(y, w, x, z, l))
    }))
}

/// Ricci identity for `K`:
/// `(∇̂²K)(W,X;·) − (∇̂²K)(X,W;·) = (R̂(W,X)·K)`.
pub fn check_ricci_identity<T: Scalar>(b: &BlaschkeData<T>) -> Result<T> {
    let n = b.dim;
    let d2k = b.nabla2_k()?;
    let (r, k) = (&b.r_hat, &b.k);
    Ok(max_abs(idx4(n).flat_map(|(w, x, y, z)| {
        (0..n).map(move |l| {
            let lhs = d2k[[w, x, y, z, l]].clone() - d2k[[x, w, y, z, l]].clone();
            let rhs = sum(n, |p| {
                k[[y, z, p]].clone() * r[[w, x, p, l]].clone()
                    - r[[w, x, y, p]].clone() * k[[p, z, l]].clone()
                    - r[[w, x, z, p]].clone() * k[[y, p, l]].clone()
            });
            lhs - rhs
        })
    })))
}

/// `∇̂h`, which vanishes for the Levi-Civita connection.
pub fn check_metricity<T: Scalar>(b: &BlaschkeData<T>) -> T {
    let n = b.dim;
    let h = &b.metric.h;
    let dh = b.metric.dh.as_ref().expect("populated at order >= 3");
    let g = b.christoffel_hat();
    max_abs((0..n).flat_map(|kk| (0..n).flat_map(move |i| (0..n).map(move |j| (kk, i, j)))).map(
        |(kk, i, j)| {
            dh[[kk, i, j]].clone()
                - sum(n, |p| g[[kk, i, p]].clone() * h[[p, j]].clone() + g[[kk, j, p]].clone() * h[[i, p]].clone())
        },
    ))
}

/// Largest deviation of `C_ijk` from total symmetry.
pub fn check_cubic_symmetry<T: Scalar>(b: &BlaschkeData<T>) -> T {
    let n = b.dim;
    let c = &b.cubic;
    max_abs(idx4(n).filter(|t| t.3 == 0).flat_map(|(i, j, kk, _)| {
        [
            c[[i, j, kk]].clone() - c[[j, i, kk]].clone(),
            c[[i, j, kk]].clone() - c[[i, kk, j]].clone(),
        ]
    }))
}
