//! Independent oracles shared by the integration tests. Nothing here calls the
//! differentiation or invariant code under test.
#![allow(dead_code)]

use equiaffine::charts::{Chart, ChartSpec};

pub const CATALOG: [&str; 10] = [
    "paraboloid(3)",
    "ellipsoid(3)",
    "hyperboloid(3)",
    "q1n(3)",
    "q1n(4)",
    "calabi(2,2)",
    "calabi(2,3)",
    "calabi(1,2)",
    "thm12(3)",
    "thm12(4)",
];

/// Mixed partial of `f` by nested fourth-order central stencils.
pub fn fd_partial(f: &dyn Fn(&[f64]) -> f64, u: &[f64], alpha: &[u8], step: f64) -> f64 {
    fn rec(f: &dyn Fn(&[f64]) -> f64, u: &mut Vec<f64>, alpha: &[u8], var: usize, step: f64) -> f64 {
        if var == alpha.len() {
            return f(u);
        }
        let stencil: &[(i32, f64)] = match alpha[var] {
            0 => &[(0, 1.0)],
            1 => &[(-2, 1.0 / 12.0), (-1, -8.0 / 12.0), (1, 8.0 / 12.0), (2, -1.0 / 12.0)],
            2 => &[
                (-2, -1.0 / 12.0),
                (-1, 16.0 / 12.0),
                (0, -30.0 / 12.0),
                (1, 16.0 / 12.0),
                (2, -1.0 / 12.0),
            ],
            3 => &[
                (-3, 1.0 / 8.0),
                (-2, -1.0),
                (-1, 13.0 / 8.0),
                (1, -13.0 / 8.0),
                (2, 1.0),
                (3, -1.0 / 8.0),
            ],
            k => panic!("no stencil for order {k}"),
        };
        let base = u[var];
        let mut acc = 0.0;
        for &(off, w) in stencil {
            u[var] = base + off as f64 * step;
            acc += w * rec(f, u, alpha, var + 1, step);
        }
        u[var] = base;
        acc / step.powi(alpha[var] as i32)
    }
    rec(f, &mut u.to_vec(), alpha, 0, step)
}

/// Closed-form parametrization of a catalog chart, without orientation flip.
pub fn closed_form(spec: ChartSpec, u: &[f64]) -> Vec<f64> {
    let r2: f64 = u.iter().map(|v| v * v).sum();
    match spec {
        ChartSpec::Paraboloid { .. } => [u, &[0.5 * r2]].concat(),
        ChartSpec::Ellipsoid { .. } => [u, &[(1.0 - r2).sqrt()]].concat(),
        ChartSpec::Hyperboloid { .. } => [u, &[(1.0 + r2).sqrt()]].concat(),
        ChartSpec::Q1n { .. } => {
            let mut x: Vec<f64> = u.iter().map(|s| s.exp()).collect();
            x.push((-u.iter().sum::<f64>()).exp());
            x
        }
        ChartSpec::Calabi { .. } | ChartSpec::Thm12 { .. } => {
            let (n1, n2) = spec.product_dims().unwrap();
            let s = &u[..n1];
            let chi = u[n1];
            let phi = &u[n1 + 1..];
            let rho = (-s.iter().sum::<f64>() / (n2 as f64 + 1.0)).exp();
            let mut x: Vec<f64> = s.iter().map(|v| v.exp()).collect();
            let mut sines = 1.0;
            for a in phi {
                x.push(rho * chi.sinh() * sines * a.cos());
                sines *= a.sin();
            }
            x.push(rho * chi.sinh() * sines);
            x.push(rho * chi.cosh());
            x
        }
    }
}

/// Closed form with the chart's orientation applied.
pub fn oriented(chart: &Chart, u: &[f64]) -> Vec<f64> {
    let mut x = closed_form(chart.spec(), u);
    if chart.is_flipped() {
        let last = x.len() - 1;
        x[last] = -x[last];
    }
    x
}

pub fn multi_indices(n: usize, max_order: usize) -> Vec<Vec<u8>> {
    let mut out = vec![vec![0u8; n]];
    let mut frontier = out.clone();
    for _ in 0..max_order {
        let mut next = Vec::new();
        for a in &frontier {
            let start = a.iter().rposition(|&v| v > 0).unwrap_or(0);
            for i in start..n {
                let mut b = a.clone();
                b[i] += 1;
                next.push(b);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

pub fn det(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    nalgebra::DMatrix::from_fn(n, n, |r, c| m[r][c]).determinant()
}

/// Blaschke metric and position from finite differences of the closed form.
pub struct FdMetric {
    pub h: Vec<Vec<f64>>,
    pub dx: Vec<Vec<f64>>,
    pub x: Vec<f64>,
}

pub fn fd_metric(chart: &Chart, u: &[f64], step: f64) -> FdMetric {
    let n = u.len();
    let m = n + 1;
    let coord = |k: usize| move |v: &[f64]| oriented(chart, v)[k];
    let mut alpha = vec![0u8; n];
    let mut dx = vec![vec![0.0; m]; n];
    for (i, row) in dx.iter_mut().enumerate() {
        alpha[i] = 1;
        for (k, out) in row.iter_mut().enumerate() {
            *out = fd_partial(&coord(k), u, &alpha, step);
        }
        alpha[i] = 0;
    }
    let mut big = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            alpha[i] += 1;
            alpha[j] += 1;
            let ddx: Vec<f64> = (0..m).map(|k| fd_partial(&coord(k), u, &alpha, step)).collect();
            alpha[i] -= 1;
            alpha[j] -= 1;
            let cols: Vec<Vec<f64>> = (0..m)
                .map(|r| dx.iter().map(|d| d[r]).chain(std::iter::once(ddx[r])).collect())
                .collect();
            big[i][j] = det(&cols);
        }
    }
    let sign = if big[0][0] < 0.0 { -1.0 } else { 1.0 };
    let scale = det(&big).abs().powf(-1.0 / (n as f64 + 2.0));
    let h = big.iter().map(|r| r.iter().map(|v| sign * v * scale).collect()).collect();
    FdMetric { h, dx, x: oriented(chart, u) }
}

/// `|H|` of a proper affine sphere centred at the origin: with `ξ = −H x`,
/// volume compatibility gives `|H| · |det(∂x, x)| = √det h`.
pub fn centro_affine_h(fd: &FdMetric) -> f64 {
    let m = fd.x.len();
    let cols: Vec<Vec<f64>> =
        (0..m).map(|r| fd.dx.iter().map(|d| d[r]).chain(std::iter::once(fd.x[r])).collect()).collect();
    det(&fd.h).sqrt() / det(&cols).abs()
}

/// Gram-Schmidt in the inner product `g`.
pub fn orthonormalize(g: &[Vec<f64>], vectors: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let dot = |a: &[f64], b: &[f64]| -> f64 {
        (0..a.len()).map(|i| (0..b.len()).map(|j| a[i] * g[i][j] * b[j]).sum::<f64>()).sum()
    };
    let mut out: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for e in &out {
            let c = dot(&w, e);
            for (wi, ei) in w.iter_mut().zip(e) {
                *wi -= c * ei;
            }
        }
        let norm = dot(&w, &w).sqrt();
        out.push(w.iter().map(|x| x / norm).collect());
    }
    out
}

/// Largest value of `C(u,u,u)` over a grid on the unit sphere of the span
/// of an orthonormal `basis` (dimension 1 to 3): 10⁴ points on the circle,
/// a Fibonacci lattice of 10⁶ points on the 2-sphere.
pub fn grid_maximum(cubic: &dyn Fn(&[f64]) -> f64, basis: &[Vec<f64>]) -> f64 {
    let n = basis[0].len();
    let lift = |c: &[f64]| -> Vec<f64> {
        (0..n).map(|i| basis.iter().zip(c).map(|(e, a)| e[i] * a).sum()).collect()
    };
    match basis.len() {
        1 => cubic(&lift(&[1.0])).max(cubic(&lift(&[-1.0]))),
        2 => (0..10_000)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / 10_000.0;
                cubic(&lift(&[t.cos(), t.sin()]))
            })
            .fold(f64::NEG_INFINITY, f64::max),
        3 => {
            let count = 1_000_000;
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
                    let r = (1.0 - z * z).sqrt();
                    let t = golden * k as f64;
                    cubic(&lift(&[r * t.cos(), r * t.sin(), z]))
                })
                .fold(f64::NEG_INFINITY, f64::max)
        }
        k => panic!("grid search needs dimension 1..=3, got {k}"),
    }
}
