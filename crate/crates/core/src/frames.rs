//! Canonical frames for product-type affine spheres.
//!
//! At each level the function `f(u) = C(u,u,u)` is maximized on the
//! `h`-unit sphere of what remains of the first block; the maximizer becomes
//! the next frame vector `X_i`, `λ_ii = f(X_i)`, and `μ_i` is the eigenvalue
//! of `K_{X_i}` on the second block. The procedure then recurses on the
//! orthogonal complement of `X_i` inside the first block.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::blaschke::BlaschkeData;
use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Below this size the cubic form on a subspace counts as zero.
pub const VANISHING_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy)]
pub struct MaximizeOptions {
    pub starts: usize,
    pub max_iter: usize,
    /// Step-length tolerance of the power iteration.
    pub tol: f64,
    pub seed: u64,
}

impl Default for MaximizeOptions {
    fn default() -> Self {
        MaximizeOptions { starts: 8, max_iter: 5000, tol: 1e-13, seed: 42 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Maximum {
    /// Maximizer in chart coordinates, `h`-unit.
    pub vector: Vec<f64>,
    pub value: f64,
    /// The cubic form vanishes on the subspace.
    pub vanishing: bool,
    /// Number of starts whose iteration met the step tolerance.
    pub converged_starts: usize,
    /// Iterations used by the winning start.
    pub iterations: usize,
    /// `|C(e,e,·) − f(e) e|` restricted to the subspace.
    pub stationarity: f64,
}

pub fn h_dot(h: &Tensor<f64>, a: &[f64], b: &[f64]) -> f64 {
    let n = h.dim();
    (0..n).map(|i| (0..n).map(|j| a[i] * h[[i, j]] * b[j]).sum::<f64>()).sum()
}

fn cubic_eval(c: &Tensor<f64>, a: &[f64], b: &[f64], d: &[f64]) -> f64 {
    let n = c.dim();
    let mut s = 0.0;
    for i in 0..n {
        if a[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            if b[j] == 0.0 {
                continue;
            }
            for k in 0..n {
                s += c[[i, j, k]] * a[i] * b[j] * d[k];
            }
        }
    }
    s
}

/// `h`-orthonormal basis of the span of `vectors`, after removing the
/// components along the (already orthonormal) `against`.
pub fn h_orthonormalize(h: &Tensor<f64>, vectors: &[Vec<f64>], against: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        // two passes keep the basis orthonormal to rounding
        for _ in 0..2 {
            for e in against.iter().chain(out.iter()) {
                let p = h_dot(h, &w, e);
                w.iter_mut().zip(e).for_each(|(a, b)| *a -= p * b);
            }
        }
        let norm = h_dot(h, &w, &w).max(0.0).sqrt();
        let scale = h_dot(h, v, v).max(0.0).sqrt();
        if norm > 1e-10 * scale.max(1.0) {
            w.iter_mut().for_each(|a| *a /= norm);
            out.push(w);
        }
    }
    out
}

fn normalize(v: &mut [f64]) -> bool {
    let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if n > 0.0 && n.is_finite() {
        v.iter_mut().for_each(|a| *a /= n);
        true
    } else {
        false
    }
}

/// Reduced cubic `T_abc = C(e_a, e_b, e_c)` on an orthonormal basis.
struct Reduced {
    k: usize,
    t: Vec<f64>,
}

impl Reduced {
    fn new(c: &Tensor<f64>, basis: &[Vec<f64>]) -> Self {
        let k = basis.len();
        let mut t = vec![0.0; k * k * k];
        for a in 0..k {
            for b in a..k {
                for d in b..k {
                    let v = cubic_eval(c, &basis[a], &basis[b], &basis[d]);
                    for (x, y, z) in [(a, b, d), (a, d, b), (b, a, d), (b, d, a), (d, a, b), (d, b, a)] {
                        t[(x * k + y) * k + z] = v;
                    }
                }
            }
        }
        Reduced { k, t }
    }

    fn value(&self, v: &[f64]) -> f64 {
        self.grad(v).iter().zip(v).map(|(g, x)| g * x).sum()
    }

    /// `T(v, v, ·)`.
    fn grad(&self, v: &[f64]) -> Vec<f64> {
        let k = self.k;
        (0..k)
            .map(|c| {
                let mut s = 0.0;
                for a in 0..k {
                    for b in 0..k {
                        s += self.t[(a * k + b) * k + c] * v[a] * v[b];
                    }
                }
                s
            })
            .collect()
    }

    /// `T(v, ·, ·)`.
    fn level_matrix(&self, v: &[f64]) -> DMatrix<f64> {
        let k = self.k;
        DMatrix::from_fn(k, k, |b, c| (0..k).map(|a| self.t[(a * k + b) * k + c] * v[a]).sum())
    }

    fn max_abs(&self) -> f64 {
        self.t.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

struct Run {
    v: Vec<f64>,
    value: f64,
    iterations: usize,
    converged: bool,
}

fn ss_hopm(r: &Reduced, mut v: Vec<f64>, opts: &MaximizeOptions) -> Run {
    let mut f = r.value(&v);
    for it in 1..=opts.max_iter {
        let g = r.grad(&v);
        let lmin = SymmetricEigen::new(r.level_matrix(&v)).eigenvalues.min();
        let mut alpha = (-1.5 * lmin).max(0.0);
        let (w, fw) = loop {
            let mut w: Vec<f64> = g.iter().zip(&v).map(|(a, b)| a + alpha * b).collect();
            if !normalize(&mut w) {
                w = v.clone();
            }
            let fw = r.value(&w);
            if fw >= f - 1e-15 * f.abs().max(1.0) || alpha > 1e8 {
                break (w, fw);
            }
            alpha = (2.0 * alpha).max(1e-3);
        };
        let step = w.iter().zip(&v).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        v = w;
        f = fw;
        if step < opts.tol {
            return Run { v, value: f, iterations: it, converged: true };
        }
    }
    Run { v, value: f, iterations: opts.max_iter, converged: false }
}

/// Maximizes `C(u,u,u)` over `h`-unit vectors `u` in the span of `subspace`.
pub fn maximize_cubic(
    c: &Tensor<f64>,
    h: &Tensor<f64>,
    subspace: &[Vec<f64>],
    opts: &MaximizeOptions,
) -> Result<Maximum> {
    let basis = h_orthonormalize(h, subspace, &[]);
    if basis.is_empty() {
        return Err(Error::Domain("empty subspace".into()));
    }
    let n = h.dim();
    let r = Reduced::new(c, &basis);
    let k = r.k;
    let lift = |v: &[f64]| -> Vec<f64> {
        (0..n).map(|i| basis.iter().zip(v).map(|(e, a)| e[i] * a).sum()).collect()
    };
    if r.max_abs() < VANISHING_TOL {
        return Ok(Maximum {
            vector: basis[0].clone(),
            value: 0.0,
            vanishing: true,
            converged_starts: opts.starts,
            iterations: 0,
            stationarity: 0.0,
        });
    }
    let stationarity = |v: &[f64]| {
        let g = r.grad(v);
        let f: f64 = g.iter().zip(v).map(|(a, b)| a * b).sum();
        g.iter().zip(v).map(|(a, b)| (a - f * b).powi(2)).sum::<f64>().sqrt()
    };
    if k == 1 {
        let v = if r.t[0] >= 0.0 { vec![1.0] } else { vec![-1.0] };
        return Ok(Maximum {
            vector: lift(&v),
            value: r.t[0].abs(),
            vanishing: false,
            converged_starts: opts.starts,
            iterations: 0,
            stationarity: 0.0,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best: Option<Run> = None;
    let mut converged = 0;
    for _ in 0..opts.starts.max(1) {
        let mut v: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if !normalize(&mut v) {
            v = vec![0.0; k];
            v[0] = 1.0;
        }
        let mut run = ss_hopm(&r, v, opts);
        if run.value < 0.0 {
            run.v.iter_mut().for_each(|a| *a = -*a);
            run.value = -run.value;
        }
        converged += usize::from(run.converged);
        if best.as_ref().is_none_or(|b| run.value > b.value) {
            best = Some(run);
        }
    }
    let best = best.expect("at least one start");
    Ok(Maximum {
        vector: lift(&best.v),
        value: best.value,
        vanishing: false,
        converged_starts: converged,
        iterations: best.iterations,
        stationarity: stationarity(&best.v),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FrameLevel {
    /// `h`-orthonormal basis of the subspace searched at this level.
    pub subspace: Vec<Vec<f64>>,
    pub maximum: Maximum,
}

#[derive(Debug, Clone, Serialize)]
pub struct FrameResult {
    /// `X_1, …, X_{n1}, Y_1, …, Y_{n2}` in chart coordinates.
    pub basis: Vec<Vec<f64>>,
    pub n1: usize,
    pub lambdas: Vec<f64>,
    pub mus: Vec<f64>,
    pub maximizer_values: Vec<f64>,
    pub levels: Vec<FrameLevel>,
    /// The cubic form vanished on the first block.
    pub vanishing: bool,
    pub gram_residual: f64,
    /// Largest `|h(K_e e, u)|` over `u ⊥ e` in each level's subspace.
    pub stationarity: f64,
    /// Largest `|λ_ii + (n − i) μ_i|`.
    pub ladder_residual: f64,
    /// Largest deviation of `K_{X_i}` on the second block from `μ_i · id`.
    pub isotropy_residual: f64,
    /// Largest deviation of `K_{Y_α} Y_β` from `δ_αβ Σ μ_i X_i`.
    pub second_block_residual: f64,
    /// Largest deviation of the frame components of `K` from the ladder form.
    pub form_residual: f64,
}

impl FrameResult {
    pub fn sum_mu_sq(&self) -> f64 {
        self.mus.iter().map(|m| m * m).sum()
    }
}

/// Frame components `C(e_a, e_b, e_c)` expected from the ladder form.
fn ladder_component(n1: usize, lambdas: &[f64], mus: &[f64], idx: [usize; 3]) -> f64 {
    let mut s = idx;
    s.sort_unstable();
    let [a, b, c] = s;
    let x = |i: usize| i < n1;
    match (x(a), x(b), x(c)) {
        (true, true, true) => {
            if a == b && b == c {
                lambdas[a]
            } else if b == c {
                mus[a]
            } else {
                0.0
            }
        }
        (true, false, false) if b == c => mus[a],
        _ => 0.0,
    }
}

/// Builds the canonical frame at one point.
pub fn split_frame(
    b: &BlaschkeData<f64>,
    blocks: &[Vec<usize>],
    opts: &MaximizeOptions,
) -> Result<FrameResult> {
    if blocks.len() != 2 {
        return Err(Error::NoBlocks);
    }
    let n = b.dim;
    let h = &b.metric.h;
    let c = &b.cubic;
    let coord = |i: usize| {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        e
    };
    let first = h_orthonormalize(h, &blocks[0].iter().map(|&i| coord(i)).collect::<Vec<_>>(), &[]);
    let second = h_orthonormalize(h, &blocks[1].iter().map(|&i| coord(i)).collect::<Vec<_>>(), &first);
    let n1 = first.len();
    if n1 == 0 || n1 + second.len() != n {
        return Err(Error::NoBlocks);
    }

    let mut xs: Vec<Vec<f64>> = Vec::new();
    let mut levels = Vec::new();
    let mut stationarity = 0.0f64;
    let mut vanishing = false;
    for i in 0..n1 {
        let sub = h_orthonormalize(h, &first, &xs);
        let level_opts = MaximizeOptions { seed: opts.seed.wrapping_add(i as u64), ..*opts };
        let m = maximize_cubic(c, h, &sub, &level_opts)?;
        vanishing |= m.vanishing;
        // first-order condition h(K_e e, u) = 0 for u ⊥ e in the subspace
        let e = &m.vector;
        for u in h_orthonormalize(h, &sub, std::slice::from_ref(e)) {
            stationarity = stationarity.max(cubic_eval(c, e, e, &u).abs());
        }
        xs.push(m.vector.clone());
        levels.push(FrameLevel { subspace: sub, maximum: m });
    }

    let lambdas: Vec<f64> = xs.iter().map(|x| cubic_eval(c, x, x, x)).collect();
    let n2 = second.len();
    let mut mus = Vec::with_capacity(n1);
    let mut isotropy = 0.0f64;
    for x in &xs {
        let a: Vec<Vec<f64>> =
            second.iter().map(|y| second.iter().map(|z| cubic_eval(c, x, y, z)).collect()).collect();
        let mu = (0..n2).map(|k| a[k][k]).sum::<f64>() / n2 as f64;
        for (r, row) in a.iter().enumerate() {
            for (s, v) in row.iter().enumerate() {
                let want = if r == s { mu } else { 0.0 };
                isotropy = isotropy.max((v - want).abs());
            }
        }
        mus.push(mu);
    }
    let ladder = (0..n1).fold(0.0f64, |m, i| m.max((lambdas[i] + (n - i - 1) as f64 * mus[i]).abs()));

    let mut basis = xs;
    basis.extend(second);
    let mut gram = 0.0f64;
    let mut form = 0.0f64;
    let mut second_block = 0.0f64;
    for p in 0..n {
        for q in 0..n {
            let want = if p == q { 1.0 } else { 0.0 };
            gram = gram.max((h_dot(h, &basis[p], &basis[q]) - want).abs());
            for r in 0..n {
                let v = cubic_eval(c, &basis[p], &basis[q], &basis[r]);
                let dev = (v - ladder_component(n1, &lambdas, &mus, [p, q, r])).abs();
                form = form.max(dev);
                if p >= n1 && q >= n1 {
                    second_block = second_block.max(dev);
                }
            }
        }
    }

    Ok(FrameResult {
        basis,
        n1,
        maximizer_values: levels.iter().map(|l| l.maximum.value).collect(),
        lambdas,
        mus,
        levels,
        vanishing,
        gram_residual: gram,
        stationarity,
        ladder_residual: ladder,
        isotropy_residual: isotropy,
        second_block_residual: second_block,
        form_residual: form,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ParallelismResidual {
    pub max_nabla_k: f64,
    /// Spread of each `λ_ii` across points, maximized over `i`.
    pub lambda_spread: f64,
    pub mu_spread: f64,
}

fn spread(values: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
    if lo.is_finite() {
        hi - lo
    } else {
        0.0
    }
}

/// `∇̂K = 0` at every point and constancy of the ladder across points.
pub fn verify_parallelism(data: &[BlaschkeData<f64>], frames: &[FrameResult]) -> ParallelismResidual {
    let max_nabla_k = data.iter().fold(0.0f64, |m, b| m.max(b.nabla_k.max_abs()));
    let levels = frames.iter().map(|f| f.lambdas.len()).min().unwrap_or(0);
    let lambda_spread =
        (0..levels).fold(0.0f64, |m, i| m.max(spread(frames.iter().map(|f| f.lambdas[i]))));
    let mu_spread = (0..levels).fold(0.0f64, |m, i| m.max(spread(frames.iter().map(|f| f.mus[i]))));
    ParallelismResidual { max_nabla_k, lambda_spread, mu_spread }
}
