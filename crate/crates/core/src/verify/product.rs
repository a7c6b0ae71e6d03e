//! Curvature of a two-block product metric.
//!
//! On a product of space forms the curvature reads
//! `R̂(X,Y)Z = c₁[h(Y₁,Z₁)X₁ − h(X₁,Z₁)Y₁] + c₂[h(Y₂,Z₂)X₂ − h(X₂,Z₂)Y₂]`,
//! with `X_a` the `h`-orthogonal projection of `X` onto block `a`.

use nalgebra::{Matrix2, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::blaschke::BlaschkeData;
use crate::error::{Error, Result};
use crate::frames::{h_dot, h_orthonormalize};
use crate::tensor::Tensor;

/// Random planes sampled per block.
pub const PLANES_PER_BLOCK: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct ProductStructure {
    /// Fitted constants; `None` for one-dimensional blocks.
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    /// Sectional curvatures of random planes inside each block.
    pub plane_c1: Vec<f64>,
    pub plane_c2: Vec<f64>,
    /// Largest deviation of `R̂` from the product form with the fitted constants.
    pub form_residual: f64,
    /// Largest gap between plane curvatures and the fitted constants.
    pub agreement: f64,
    /// Largest `|h(X₁, X₂)|` over coordinate vectors of different blocks.
    pub block_diagonality: f64,
    /// Largest `|∂_k h_ij|` with `i, j` in one block and `k` in the other.
    pub cross_derivatives: f64,
}

struct Block {
    /// `h`-orthonormal basis.
    basis: Vec<Vec<f64>>,
    /// `[i, l]`: `∂_l` component of the projection of `∂_i`.
    proj: Tensor<f64>,
    /// `[i, j] = h(P∂_i, P∂_j)`.
    metric: Tensor<f64>,
}

fn block(h: &Tensor<f64>, basis: Vec<Vec<f64>>) -> Block {
    let n = h.dim();
    let hb: Vec<Vec<f64>> =
        basis.iter().map(|e| (0..n).map(|i| (0..n).map(|j| h[[i, j]] * e[j]).sum()).collect()).collect();
    let proj = Tensor::from_fn(n, 2, |ix| basis.iter().zip(&hb).map(|(e, he)| he[ix[0]] * e[ix[1]]).sum());
    let metric = Tensor::from_fn(n, 2, |ix| hb.iter().map(|he| he[ix[0]] * he[ix[1]]).sum());
    Block { basis, proj, metric }
}

/// `[i,j,k,l]` component of `h(Y_a,Z_a)X_a − h(X_a,Z_a)Y_a`.
fn model(b: &Block, ix: [usize; 4]) -> f64 {
    let [i, j, k, l] = ix;
    b.metric[[j, k]] * b.proj[[i, l]] - b.metric[[i, k]] * b.proj[[j, l]]
}

fn sectional(b: &BlaschkeData<f64>, x: &[f64], y: &[f64]) -> f64 {
    let n = b.dim;
    let r = &b.r_hat;
    let mut ryy = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let w = x[i] * y[j] * y[k];
                if w != 0.0 {
                    for (l, out) in ryy.iter_mut().enumerate() {
                        *out += w * r[[i, j, k, l]];
                    }
                }
            }
        }
    }
    let h = &b.metric.h;
    let area = h_dot(h, x, x) * h_dot(h, y, y) - h_dot(h, x, y).powi(2);
    h_dot(h, &ryy, x) / area
}

fn random_planes(b: &BlaschkeData<f64>, blk: &Block, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let k = blk.basis.len();
    if k < 2 {
        return Vec::new();
    }
    let n = b.dim;
    let mut draw = || -> Vec<f64> {
        let coef: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
        (0..n).map(|i| blk.basis.iter().zip(&coef).map(|(e, c)| e[i] * c).sum()).collect()
    };
    (0..PLANES_PER_BLOCK)
        .map(|_| {
            let x = draw();
            let y = draw();
            sectional(b, &x, &y)
        })
        .collect()
}

/// Fits the two curvature constants and measures how well `R̂` matches.
pub fn product_structure(b: &BlaschkeData<f64>, blocks: &[Vec<usize>], seed: u64) -> Result<ProductStructure> {
    if blocks.len() != 2 {
        return Err(Error::NoBlocks);
    }
    let n = b.dim;
    let h = &b.metric.h;
    let coord = |i: usize| {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        e
    };
    let first = h_orthonormalize(h, &blocks[0].iter().map(|&i| coord(i)).collect::<Vec<_>>(), &[]);
    let second = h_orthonormalize(h, &blocks[1].iter().map(|&i| coord(i)).collect::<Vec<_>>(), &first);
    let block_diagonality = blocks[0]
        .iter()
        .flat_map(|&i| blocks[1].iter().map(move |&j| (i, j)))
        .fold(0.0f64, |m, (i, j)| m.max(h[[i, j]].abs()));
    let cross_derivatives = match &b.metric.dh {
        Some(dh) => {
            let mut m = 0.0f64;
            for (own, other) in [(&blocks[0], &blocks[1]), (&blocks[1], &blocks[0])] {
                for &i in own {
                    for &j in own {
                        for &k in other {
                            m = m.max(dh[[k, i, j]].abs());
                        }
                    }
                }
            }
            m
        }
        None => f64::NAN,
    };
    let b1 = block(h, first);
    let b2 = block(h, second);
    let active = [b1.basis.len() >= 2, b2.basis.len() >= 2];

    // least squares over all components, restricted to blocks with curvature
    let idx = (0..n.pow(4)).map(|f| [f / (n * n * n), f / (n * n) % n, f / n % n, f % n]);
    let mut ata = Matrix2::zeros();
    let mut atb = Vector2::zeros();
    for ix in idx.clone() {
        let a = Vector2::new(
            if active[0] { model(&b1, ix) } else { 0.0 },
            if active[1] { model(&b2, ix) } else { 0.0 },
        );
        ata += a * a.transpose();
        atb += a * b.r_hat[ix];
    }
    for (k, on) in active.iter().enumerate() {
        if !on {
            ata[(k, k)] = 1.0;
        }
    }
    let c = ata.lu().solve(&atb).ok_or(Error::Singular)?;
    let c1 = active[0].then_some(c[0]);
    let c2 = active[1].then_some(c[1]);
    let form_residual = idx.fold(0.0f64, |m, ix| {
        let fit = c1.unwrap_or(0.0) * model(&b1, ix) + c2.unwrap_or(0.0) * model(&b2, ix);
        m.max((b.r_hat[ix] - fit).abs())
    });

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let plane_c1 = random_planes(b, &b1, &mut rng);
    let plane_c2 = random_planes(b, &b2, &mut rng);
    let gap = |planes: &[f64], c: Option<f64>| {
        c.map_or(0.0, |c| planes.iter().fold(0.0f64, |m, v| m.max((v - c).abs())))
    };
    let agreement = gap(&plane_c1, c1).max(gap(&plane_c2, c2));
    Ok(ProductStructure { c1, c2, plane_c1, plane_c2, form_residual, agreement, block_diagonality, cross_derivatives })
}
