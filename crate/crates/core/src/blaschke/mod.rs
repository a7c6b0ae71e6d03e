//! Blaschke structure of a chart at a point.
//!
//! Everything is computed on jets: the chart map is expanded to order `d`,
//! and each derivative taken along the way lowers the working order by one.
//! The affine metric lives at order `d − 2`, the Levi-Civita connection and
//! the affine normal at `d − 3`, curvature, the shape operator and `∇̂K` at
//! `d − 4`, and `∇̂²K`, `∇̂Ric` at `d − 5`. Pointwise values are read off at
//! the end.
//!
//! Index conventions (all coordinate frames):
//! * `gamma[i,j,k]`, `christoffel_hat[i,j,k]`, `k[i,j,k]` store `Γ^k_{ij}` etc.
//! * `r_hat[i,j,k,l]` is the `∂_l` component of `R̂(∂_i, ∂_j) ∂_k`.
//! * `shape[i,j]` is `S^j_i`, i.e. `S ∂_i = S^j_i ∂_j`.
//! * `nabla_k[m,i,j,l]` is the `∂_l` component of `(∇̂_{∂_m} K)(∂_i, ∂_j)`.
//! * `nabla2_k[w,m,i,j,l]` is `(∇̂²K)(∂_w, ∂_m, ∂_i, ∂_j)`, `∂_l` component.

mod checks;

pub use checks::{
    check_apolarity, check_codazzi, check_cubic_symmetry, check_gauss, check_metricity,
    check_ricci_identity, check_tsinghua,
};

use nalgebra::DMatrix;

use crate::charts::Chart;
use crate::error::{Error, Result};
use crate::jets::MultiJet;
use crate::linalg;
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Smallest admissible singular value of the chart Jacobian.
pub const IMMERSION_TOL: f64 = 1e-10;

pub const DEFAULT_ORDER: usize = 5;
pub const MIN_ORDER: usize = 2;
pub const MAX_ORDER: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Definiteness {
    Positive,
    Negative,
    Indefinite,
}

#[derive(Debug, Clone)]
pub struct SecondForm<T> {
    /// `det(∂₁x, …, ∂ₙx, ∂_i∂_j x)`.
    pub matrix: Vec<Vec<T>>,
    pub definiteness: Definiteness,
}

#[derive(Debug, Clone)]
pub struct MetricData<T> {
    pub h: Tensor<T>,
    pub h_inv: Tensor<T>,
    pub det_h: T,
    /// `[k,i,j] = ∂_k h_ij`; needs order 3.
    pub dh: Option<Tensor<T>>,
    /// `[l,k,i,j] = ∂_l ∂_k h_ij`; needs order 4.
    pub d2h: Option<Tensor<T>>,
    /// Levi-Civita connection of `h`; needs order 3.
    pub christoffel_hat: Option<Tensor<T>>,
}

/// Diagnostics produced while solving the structure equations.
#[derive(Debug, Clone)]
pub struct SolveResiduals<T> {
    /// `max |g_ij − h_ij|`, where `g` is the transversal part of `∂_i∂_j x`.
    pub gauss_metric: T,
    /// `max |ξ-component of ∂_i ξ|`.
    pub weingarten: T,
    /// `|det(∂x, ξ)² / det h − 1|`.
    pub volume: T,
}

#[derive(Debug, Clone)]
pub struct BlaschkeData<T> {
    pub dim: usize,
    pub order: usize,
    pub metric: MetricData<T>,
    pub xi: Vec<T>,
    /// `d_xi[i][a] = ∂_i ξ_a`.
    pub d_xi: Vec<Vec<T>>,
    pub shape: Tensor<T>,
    pub h_mean: T,
    pub gamma: Tensor<T>,
    pub k: Tensor<T>,
    pub cubic: Tensor<T>,
    pub r_hat: Tensor<T>,
    pub ric: Tensor<T>,
    pub nabla_k: Tensor<T>,
    pub nabla2_k: Option<Tensor<T>>,
    pub nabla_ric: Option<Tensor<T>>,
    pub residuals: SolveResiduals<T>,
}

impl<T: Scalar> BlaschkeData<T> {
    pub fn christoffel_hat(&self) -> &Tensor<T> {
        self.metric.christoffel_hat.as_ref().expect("populated at order >= 4")
    }

    pub fn nabla2_k(&self) -> Result<&Tensor<T>> {
        self.nabla2_k.as_ref().ok_or(Error::InsufficientOrder {
            what: "second covariant derivative of K",
            need: 5,
            have: self.order,
        })
    }

    pub fn nabla_ric(&self) -> Result<&Tensor<T>> {
        self.nabla_ric.as_ref().ok_or(Error::InsufficientOrder {
            what: "covariant derivative of Ricci",
            need: 5,
            have: self.order,
        })
    }

    pub fn to_f64(&self) -> BlaschkeData<f64> {
        let t = |x: &Tensor<T>| x.map_ref(Scalar::to_f64);
        let ot = |x: &Option<Tensor<T>>| x.as_ref().map(t);
        BlaschkeData {
            dim: self.dim,
            order: self.order,
            metric: MetricData {
                h: t(&self.metric.h),
                h_inv: t(&self.metric.h_inv),
                det_h: self.metric.det_h.to_f64(),
                dh: ot(&self.metric.dh),
                d2h: ot(&self.metric.d2h),
                christoffel_hat: ot(&self.metric.christoffel_hat),
            },
            xi: self.xi.iter().map(Scalar::to_f64).collect(),
            d_xi: self.d_xi.iter().map(|r| r.iter().map(Scalar::to_f64).collect()).collect(),
            shape: t(&self.shape),
            h_mean: self.h_mean.to_f64(),
            gamma: t(&self.gamma),
            k: t(&self.k),
            cubic: t(&self.cubic),
            r_hat: t(&self.r_hat),
            ric: t(&self.ric),
            nabla_k: t(&self.nabla_k),
            nabla2_k: ot(&self.nabla2_k),
            nabla_ric: ot(&self.nabla_ric),
            residuals: SolveResiduals {
                gauss_metric: self.residuals.gauss_metric.to_f64(),
                weingarten: self.residuals.weingarten.to_f64(),
                volume: self.residuals.volume.to_f64(),
            },
        }
    }
}

fn definiteness(m: &[Vec<f64>]) -> Definiteness {
    let n = m.len();
    let eig = DMatrix::from_fn(n, n, |r, c| 0.5 * (m[r][c] + m[c][r])).symmetric_eigenvalues();
    let scale = eig.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let floor = IMMERSION_TOL * scale.max(1.0);
    if eig.iter().all(|&v| v > floor) {
        Definiteness::Positive
    } else if eig.iter().all(|&v| v < -floor) {
        Definiteness::Negative
    } else {
        Definiteness::Indefinite
    }
}

fn to_f64_matrix<T: Scalar>(m: &[Vec<T>]) -> Vec<Vec<f64>> {
    m.iter().map(|r| r.iter().map(Scalar::to_f64).collect()).collect()
}

/// `h = |det H|^{−1/(n+2)} H` for a definite second-form matrix `H`.
pub fn normalize_metric<T: Scalar>(hmat: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
    let n = hmat.len();
    let det = linalg::det(hmat)?;
    if det.is_zero() {
        return Err(Error::Singular);
    }
    let f = det.abs().pow_ratio(-1, n as u32 + 2).ok_or(Error::NotRepresentable("pow"))?;
    Ok(hmat.iter().map(|r| r.iter().map(|v| v.clone() * f.clone()).collect()).collect())
}

type Jet<T> = MultiJet<T>;

fn lower<T: Scalar>(j: &Jet<T>, order: usize) -> Jet<T> {
    j.lower(order).expect("lowering to an available order")
}

fn lower_t<T: Scalar>(t: &Tensor<Jet<T>>, order: usize) -> Tensor<Jet<T>> {
    t.map_ref(|j| lower(j, order))
}

fn values<T: Scalar>(t: &Tensor<Jet<T>>) -> Tensor<T> {
    t.map_ref(|j| j.value().clone())
}

fn sum_jets<T: Scalar>(nv: usize, order: usize, it: impl Iterator<Item = Jet<T>>) -> Jet<T> {
    it.fold(Jet::zero(nv, order), |a, b| &a + &b)
}

/// First stage: chart jets, conormal, second-form matrix as jets of order `d − 2`.
struct Geometry<T> {
    n: usize,
    d: usize,
    /// `dx[i][a] = ∂_i x_a`, order `d − 1`.
    dx: Vec<Vec<Jet<T>>>,
    /// `ddx[i][j][a]`, order `d − 2`.
    ddx: Vec<Vec<Vec<Jet<T>>>>,
    /// Second-form matrix, order `d − 2`.
    hmat: Vec<Vec<Jet<T>>>,
}

fn geometry<T: Scalar>(chart: &Chart, u: &[T], d: usize) -> Result<Geometry<T>> {
    if d < MIN_ORDER {
        return Err(Error::InsufficientOrder { what: "second fundamental form", need: 2, have: d });
    }
    let uf: Vec<f64> = u.iter().map(Scalar::to_f64).collect();
    let margin = chart.immersion_margin(&uf)?;
    if !(margin > IMMERSION_TOL) {
        return Err(Error::RankDeficient(margin));
    }
    let n = chart.dim();
    let m = n + 1;
    let x = chart.eval(u, d)?;
    let dx: Vec<Vec<Jet<T>>> =
        (0..n).map(|i| x.iter().map(|xa| xa.partial(i)).collect::<Result<_>>()).collect::<Result<_>>()?;
    let mut ddx = vec![vec![Vec::new(); n]; n];
    for i in 0..n {
        for j in i..n {
            let col: Vec<Jet<T>> = dx[i].iter().map(|v| v.partial(j)).collect::<Result<_>>()?;
            ddx[j][i] = col.clone();
            ddx[i][j] = col;
        }
    }

    // conormal ν with ν·v = det(∂₁x, …, ∂ₙx, v), via Cramer on [∂x | e_b]
    let o2 = d - 2;
    let dx2: Vec<Vec<Jet<T>>> = dx.iter().map(|r| r.iter().map(|j| lower(j, o2)).collect()).collect();
    let jac: Vec<Vec<f64>> =
        (0..m).map(|a| (0..n).map(|c| dx[c][a].value().to_f64()).collect()).collect();
    let pick = (0..m)
        .map(|b| {
            let minor: Vec<Vec<f64>> =
                (0..m).filter(|&a| a != b).map(|a| jac[a].clone()).collect();
            (b, linalg::det(&minor).map(f64::abs).unwrap_or(0.0))
        })
        .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best })
        .0;
    let frame: Vec<Vec<Jet<T>>> = (0..m)
        .map(|a| {
            let mut row: Vec<Jet<T>> = (0..n).map(|c| dx2[c][a].clone()).collect();
            let e = if a == pick { T::one() } else { T::zero() };
            row.push(Jet::constant(e, n, o2));
            row
        })
        .collect();
    let det = linalg::det(&frame)?;
    let inv = linalg::inverse(&frame)?;
    let conormal: Vec<Jet<T>> = inv[n].iter().map(|v| &det * v).collect();

    let hmat: Vec<Vec<Jet<T>>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| sum_jets(n, o2, (0..m).map(|a| &conormal[a] * &ddx[i][j][a])))
                .collect()
        })
        .collect();
    Ok(Geometry { n, d, dx, ddx, hmat })
}

/// `H_ij = det(∂₁x, …, ∂ₙx, ∂_i∂_j x)` at `u`, with its definiteness.
pub fn second_form<T: Scalar>(chart: &Chart, u: &[T]) -> Result<SecondForm<T>> {
    let g = geometry(chart, u, MIN_ORDER)?;
    let matrix: Vec<Vec<T>> =
        g.hmat.iter().map(|r| r.iter().map(|j| j.value().clone()).collect()).collect();
    let definiteness = definiteness(&to_f64_matrix(&matrix));
    Ok(SecondForm { matrix, definiteness })
}

/// Jet-level intermediate results, kept at their natural orders.
struct Stages<T> {
    geo: Geometry<T>,
    /// order d − 2
    h: Tensor<Jet<T>>,
    h_inv: Tensor<Jet<T>>,
    det_h: T,
    /// order d − 3 (present when d ≥ 3)
    dh: Option<Tensor<Jet<T>>>,
    gamma_hat: Option<Tensor<Jet<T>>>,
    xi: Option<Vec<Jet<T>>>,
    frame_inv: Option<Vec<Vec<Jet<T>>>>,
}

fn stages<T: Scalar>(chart: &Chart, u: &[T], d: usize) -> Result<Stages<T>> {
    let geo = geometry(chart, u, d)?;
    let n = geo.n;
    let o2 = d - 2;
    let hmat_vals: Vec<Vec<T>> =
        geo.hmat.iter().map(|r| r.iter().map(|j| j.value().clone()).collect()).collect();
    if definiteness(&to_f64_matrix(&hmat_vals)) != Definiteness::Positive {
        return Err(Error::Indefinite);
    }
    let det_hmat = linalg::det(&geo.hmat)?;
    let scale = det_hmat.pow_ratio(-1, n as u32 + 2)?;
    let h = Tensor::from_fn(n, 2, |ix| &geo.hmat[ix[0]][ix[1]] * &scale);
    let h_rows: Vec<Vec<Jet<T>>> =
        (0..n).map(|i| (0..n).map(|j| h[[i, j]].clone()).collect()).collect();
    let h_inv_rows = linalg::inverse(&h_rows)?;
    let h_inv = Tensor::from_fn(n, 2, |ix| h_inv_rows[ix[0]][ix[1]].clone());
    let det_h = linalg::det(&h_rows)?.value().clone();

    let mut st =
        Stages { geo, h, h_inv, det_h, dh: None, gamma_hat: None, xi: None, frame_inv: None };
    if o2 == 0 {
        return Ok(st);
    }
    let o3 = o2 - 1;
    let dh = Tensor::try_from_fn(n, 3, |ix| st.h[[ix[1], ix[2]]].partial(ix[0]))?;
    let h_inv3 = lower_t(&st.h_inv, o3);
    let half = T::from_ratio(1, 2);
    let gamma_hat = Tensor::from_fn(n, 3, |ix| {
        let (i, j, k) = (ix[0], ix[1], ix[2]);
        sum_jets(
            n,
            o3,
            (0..n).map(|l| {
                let bracket = &(&dh[[i, j, l]] + &dh[[j, i, l]]) - &dh[[l, i, j]];
                &h_inv3[[k, l]] * &bracket
            }),
        )
        .scale(&half)
    });

    let m = n + 1;
    let inv_n = T::one() / T::from_usize(n);
    let dx3: Vec<Vec<Jet<T>>> =
        st.geo.dx.iter().map(|r| r.iter().map(|j| lower(j, o3)).collect()).collect();
    let xi: Vec<Jet<T>> = (0..m)
        .map(|a| {
            let lap = sum_jets(
                n,
                o3,
                (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| {
                    let tangential =
                        sum_jets(n, o3, (0..n).map(|k| &gamma_hat[[i, j, k]] * &dx3[k][a]));
                    let hess = &lower(&st.geo.ddx[i][j][a], o3) - &tangential;
                    &h_inv3[[i, j]] * &hess
                }),
            );
            lap.scale(&inv_n)
        })
        .collect();
    let frame: Vec<Vec<Jet<T>>> = (0..m)
        .map(|a| {
            let mut row: Vec<Jet<T>> = (0..n).map(|c| dx3[c][a].clone()).collect();
            row.push(xi[a].clone());
            row
        })
        .collect();
    st.frame_inv = Some(linalg::inverse(&frame)?);
    st.dh = Some(dh);
    st.gamma_hat = Some(gamma_hat);
    st.xi = Some(xi);
    Ok(st)
}

fn metric_data<T: Scalar>(st: &Stages<T>, d2h: Option<Tensor<T>>) -> MetricData<T> {
    MetricData {
        h: values(&st.h),
        h_inv: values(&st.h_inv),
        det_h: st.det_h.clone(),
        dh: st.dh.as_ref().map(values),
        d2h,
        christoffel_hat: st.gamma_hat.as_ref().map(values),
    }
}

/// Blaschke metric and (order permitting) its first two derivatives and
/// Levi-Civita connection.
pub fn blaschke_metric<T: Scalar>(chart: &Chart, u: &[T], order: usize) -> Result<MetricData<T>> {
    let st = stages(chart, u, order)?;
    let d2h = match &st.dh {
        Some(dh) if order >= 4 => {
            let n = chart.dim();
            Some(values(&Tensor::try_from_fn(n, 4, |ix| dh[[ix[1], ix[2], ix[3]]].partial(ix[0]))?))
        }
        _ => None,
    };
    Ok(metric_data(&st, d2h))
}

/// Affine normal `ξ = (1/n) Δ_h x`.
pub fn affine_normal<T: Scalar>(chart: &Chart, u: &[T]) -> Result<Vec<T>> {
    let st = stages(chart, u, 3)?;
    Ok(st.xi.expect("order 3").iter().map(|j| j.value().clone()).collect())
}

#[derive(Debug, Clone)]
pub struct ShapeData<T> {
    pub shape: Tensor<T>,
    pub h_mean: T,
    /// Largest ξ-component of `∂_i ξ`; zero for a consistent Blaschke normal.
    pub residual: T,
}

/// Default tolerance on the Weingarten residual in float mode.
pub const WEINGARTEN_TOL: f64 = 1e-9;

/// Shape operator from `∂_i ξ = −S^j_i ∂_j x`.
pub fn shape_operator<T: Scalar>(chart: &Chart, u: &[T]) -> Result<ShapeData<T>> {
    let st = stages(chart, u, 4)?;
    let (shape, residual) = weingarten(&st)?;
    let n = chart.dim();
    let h_mean = (0..n).fold(T::zero(), |a, i| a + shape[[i, i]].clone()) / T::from_usize(n);
    let sd = ShapeData { shape, h_mean, residual };
    let r = sd.residual.to_f64().abs();
    if !(r <= WEINGARTEN_TOL) {
        return Err(Error::WeingartenResidual { residual: r, tol: WEINGARTEN_TOL });
    }
    Ok(sd)
}

/// Returns `(S, max |ξ-coefficient|, ∂ξ values)`.
fn weingarten<T: Scalar>(st: &Stages<T>) -> Result<(Tensor<T>, T)> {
    let (s, r, _) = weingarten_full(st)?;
    Ok((s, r))
}

fn weingarten_full<T: Scalar>(st: &Stages<T>) -> Result<(Tensor<T>, T, Vec<Vec<T>>)> {
    let n = st.geo.n;
    let d = st.geo.d;
    if d < 4 {
        return Err(Error::InsufficientOrder { what: "shape operator", need: 4, have: d });
    }
    let xi = st.xi.as_ref().expect("order >= 3");
    let finv = st.frame_inv.as_ref().expect("order >= 3");
    let d_xi: Vec<Vec<T>> = (0..n)
        .map(|i| xi.iter().map(|a| a.partial(i).map(|j| j.value().clone())).collect())
        .collect::<Result<_>>()?;
    let finv_v: Vec<Vec<T>> =
        finv.iter().map(|r| r.iter().map(|j| j.value().clone()).collect()).collect();
    let coef: Vec<Vec<T>> = (0..n)
        .map(|i| {
            (0..=n)
                .map(|r| {
                    finv_v[r].iter().zip(&d_xi[i]).fold(T::zero(), |a, (f, v)| a + f.clone() * v.clone())
                })
                .collect()
        })
        .collect();
    let shape = Tensor::from_fn(n, 2, |ix| -coef[ix[0]][ix[1]].clone());
    let residual = coef.iter().fold(T::zero(), |a, c| {
        let v = c[n].abs();
        if v > a {
            v
        } else {
            a
        }
    });
    Ok((shape, residual, d_xi))
}

fn max_abs<T: Scalar>(it: impl Iterator<Item = T>) -> T {
    it.fold(T::zero(), |a, v| {
        let v = v.abs();
        if v > a {
            v
        } else {
            a
        }
    })
}

/// All Blaschke invariants at `u`, computed from jets of order `order`
/// (at least 4; `∇̂²K` and `∇̂Ric` need 5).
pub fn full_invariants<T: Scalar>(chart: &Chart, u: &[T], order: usize) -> Result<BlaschkeData<T>> {
    if order < 4 {
        return Err(Error::InsufficientOrder { what: "Blaschke invariants", need: 4, have: order });
    }
    if order > MAX_ORDER {
        return Err(Error::Config(format!("jet order {order} above supported maximum {MAX_ORDER}")));
    }
    let st = stages(chart, u, order)?;
    let n = chart.dim();
    let o3 = order - 3;
    let o4 = order - 4;
    let gh3 = st.gamma_hat.as_ref().expect("order >= 3");
    let dh = st.dh.as_ref().expect("order >= 3");
    let finv = st.frame_inv.as_ref().expect("order >= 3");
    let xi = st.xi.as_ref().expect("order >= 3");

    // Gauss formula: ∂_i∂_j x = Γ^k_ij ∂_k x + g_ij ξ
    let mut gamma = Tensor::from_fn(n, 3, |_| Jet::zero(n, o3));
    let mut g_res = T::zero();
    let h3 = lower_t(&st.h, o3);
    for i in 0..n {
        for j in 0..n {
            let rhs: Vec<Jet<T>> = st.geo.ddx[i][j].iter().map(|v| lower(v, o3)).collect();
            let coef: Vec<Jet<T>> = finv
                .iter()
                .map(|row| sum_jets(n, o3, row.iter().zip(&rhs).map(|(f, v)| f * v)))
                .collect();
            for k in 0..n {
                gamma[[i, j, k]] = coef[k].clone();
            }
            let diff = (coef[n].value().clone() - h3[[i, j]].value().clone()).abs();
            if diff > g_res {
                g_res = diff;
            }
        }
    }
    let k3 = Tensor::from_fn(n, 3, |ix| &gamma[[ix[0], ix[1], ix[2]]] - &gh3[[ix[0], ix[1], ix[2]]]);
    let cubic = Tensor::from_fn(n, 3, |ix| {
        let (i, j, k) = (ix[0], ix[1], ix[2]);
        (0..n).fold(T::zero(), |a, l| {
            a + h3[[k, l]].value().clone() * k3[[i, j, l]].value().clone()
        })
    });

    let (shape, weingarten_res, d_xi) = weingarten_full(&st)?;
    let h_mean = (0..n).fold(T::zero(), |a, i| a + shape[[i, i]].clone()) / T::from_usize(n);

    // volume compatibility det(∂x, ξ)² = det h
    let m = n + 1;
    let frame_vals: Vec<Vec<T>> = (0..m)
        .map(|a| {
            let mut row: Vec<T> = (0..n).map(|c| st.geo.dx[c][a].value().clone()).collect();
            row.push(xi[a].value().clone());
            row
        })
        .collect();
    let vol = linalg::det(&frame_vals)?;
    let volume = (vol.clone() * vol / st.det_h.clone() - T::one()).abs();

    // curvature, order d − 4
    let gh4 = lower_t(gh3, o4);
    let dgh = Tensor::try_from_fn(n, 4, |ix| gh3[[ix[1], ix[2], ix[3]]].partial(ix[0]))?;
    let r_hat = Tensor::from_fn(n, 4, |ix| {
        let (i, j, k, l) = (ix[0], ix[1], ix[2], ix[3]);
        let lin = &dgh[[i, j, k, l]] - &dgh[[j, i, k, l]];
        let quad = sum_jets(
            n,
            o4,
            (0..n).map(|p| {
                &(&gh4[[i, p, l]] * &gh4[[j, k, p]]) - &(&gh4[[j, p, l]] * &gh4[[i, k, p]])
            }),
        );
        &lin + &quad
    });
    let ric = Tensor::from_fn(n, 2, |ix| sum_jets(n, o4, (0..n).map(|i| r_hat[[i, ix[0], ix[1], i]].clone())));
    let d2h = Tensor::try_from_fn(n, 4, |ix| dh[[ix[1], ix[2], ix[3]]].partial(ix[0]))?;

    // ∇̂K, order d − 4
    let k4 = lower_t(&k3, o4);
    let nabla_k = Tensor::try_from_fn(n, 4, |ix| -> Result<Jet<T>> {
        let (mm, i, j, l) = (ix[0], ix[1], ix[2], ix[3]);
        let mut acc = k3[[i, j, l]].partial(mm)?;
        for p in 0..n {
            acc = &acc + &(&gh4[[mm, p, l]] * &k4[[i, j, p]]);
            acc = &acc - &(&gh4[[mm, i, p]] * &k4[[p, j, l]]);
            acc = &acc - &(&gh4[[mm, j, p]] * &k4[[i, p, l]]);
        }
        Ok(acc)
    })?;

    let (nabla2_k, nabla_ric) = if order >= 5 {
        let o5 = order - 5;
        let gh5 = lower_t(gh3, o5);
        let dk5 = lower_t(&nabla_k, o5);
        let ric5 = lower_t(&ric, o5);
        let n2k = Tensor::try_from_fn(n, 5, |ix| -> Result<T> {
            let (w, mm, i, j, l) = (ix[0], ix[1], ix[2], ix[3], ix[4]);
            let mut acc = nabla_k[[mm, i, j, l]].partial(w)?.value().clone();
            for p in 0..n {
                let g = |a: usize, b: usize, c: usize| gh5[[a, b, c]].value().clone();
                let dk = |a: usize, b: usize, c: usize, e: usize| dk5[[a, b, c, e]].value().clone();
                acc = acc + g(w, p, l) * dk(mm, i, j, p)
                    - g(w, mm, p) * dk(p, i, j, l)
                    - g(w, i, p) * dk(mm, p, j, l)
                    - g(w, j, p) * dk(mm, i, p, l);
            }
            Ok(acc)
        })?;
        let nric = Tensor::try_from_fn(n, 3, |ix| -> Result<T> {
            let (mm, j, k) = (ix[0], ix[1], ix[2]);
            let mut acc = ric[[j, k]].partial(mm)?.value().clone();
            for p in 0..n {
                let g = |a: usize, b: usize, c: usize| gh5[[a, b, c]].value().clone();
                acc = acc
                    - g(mm, j, p) * ric5[[p, k]].value().clone()
                    - g(mm, k, p) * ric5[[j, p]].value().clone();
            }
            Ok(acc)
        })?;
        (Some(n2k), Some(nric))
    } else {
        (None, None)
    };

    Ok(BlaschkeData {
        dim: n,
        order,
        metric: metric_data(&st, Some(values(&d2h))),
        xi: xi.iter().map(|j| j.value().clone()).collect(),
        d_xi,
        shape,
        h_mean,
        gamma: values(&gamma),
        k: values(&k3),
        cubic,
        r_hat: values(&r_hat),
        ric: values(&ric),
        nabla_k: values(&nabla_k),
        nabla2_k,
        nabla_ric,
        residuals: SolveResiduals { gauss_metric: g_res, weingarten: weingarten_res, volume },
    })
}

/// Largest absolute entry.
pub fn tensor_max_abs<T: Scalar>(t: &Tensor<T>) -> T {
    max_abs(t.iter().cloned())
}
