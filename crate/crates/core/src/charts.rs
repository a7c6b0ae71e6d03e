//! Catalog of parametrized hypersurface patches.
//!
//! Every chart maps `u ∈ ℝⁿ` to `x(u) ∈ ℝⁿ⁺¹` and can be evaluated as a
//! vector of jets at any order. Product-type charts carry the partition of
//! their coordinates into factor blocks; charts of algebraic hypersurfaces
//! carry the defining equation `P(x) = const`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::MultiJet;
use crate::scalar::Scalar;

pub const MIN_DIM: usize = 2;
pub const MAX_DIM: usize = 6;

/// Margin kept from the poles of the angular sphere chart.
const POLE_MARGIN: f64 = 0.1;
const ELLIPSOID_RADIUS: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChartSpec {
    /// `x_{n+1} = ½ Σ x_i²`.
    Paraboloid { n: usize },
    /// `Σ x_i² = 1`, lower cap as a graph.
    Ellipsoid { n: usize },
    /// `x_{n+1}² − Σ x_i² = 1`, upper sheet as a graph.
    Hyperboloid { n: usize },
    /// `x_1 ⋯ x_{n+1} = 1`.
    Q1n { n: usize },
    /// `(x_1⋯x_{n1})² (x_{n+1}² − x_{n1+1}² − ⋯ − x_n²)^{n2+1} = 1`.
    Calabi { n1: usize, n2: usize },
    /// `x_1² (x_{n+1}² − x_2² − ⋯ − x_n²)^n = 1`; the `n1 = 1` Calabi composition.
    Thm12 { n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalarMode {
    Rational,
    Float,
}

impl ChartSpec {
    pub fn dim(&self) -> usize {
        match *self {
            ChartSpec::Paraboloid { n }
            | ChartSpec::Ellipsoid { n }
            | ChartSpec::Hyperboloid { n }
            | ChartSpec::Q1n { n }
            | ChartSpec::Thm12 { n } => n,
            ChartSpec::Calabi { n1, n2 } => n1 + n2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ChartSpec::Paraboloid { .. } => "paraboloid",
            ChartSpec::Ellipsoid { .. } => "ellipsoid",
            ChartSpec::Hyperboloid { .. } => "hyperboloid",
            ChartSpec::Q1n { .. } => "q1n",
            ChartSpec::Calabi { .. } => "calabi",
            ChartSpec::Thm12 { .. } => "thm12",
        }
    }

    /// `(n1, n2)` of the product split for Calabi-type charts.
    pub fn product_dims(&self) -> Option<(usize, usize)> {
        match *self {
            ChartSpec::Calabi { n1, n2 } => Some((n1, n2)),
            ChartSpec::Thm12 { n } => Some((1, n - 1)),
            _ => None,
        }
    }

    /// Builds a spec from a family name and integer parameters.
    pub fn from_parts(
        kind: &str,
        n: Option<usize>,
        n1: Option<usize>,
        n2: Option<usize>,
    ) -> Result<Self> {
        let need = |v: Option<usize>, name: &str| {
            v.ok_or_else(|| Error::InvalidChart(format!("{kind} requires parameter {name}")))
        };
        let spec = match kind {
            "paraboloid" => ChartSpec::Paraboloid { n: need(n, "n")? },
            "ellipsoid" => ChartSpec::Ellipsoid { n: need(n, "n")? },
            "hyperboloid" => ChartSpec::Hyperboloid { n: need(n, "n")? },
            "q1n" => ChartSpec::Q1n { n: need(n, "n")? },
            "calabi" => ChartSpec::Calabi { n1: need(n1, "n1")?, n2: need(n2, "n2")? },
            "thm12" => ChartSpec::Thm12 { n: need(n, "n")? },
            other => return Err(Error::InvalidChart(format!("unknown chart kind {other:?}"))),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidChart(msg));
        match *self {
            ChartSpec::Paraboloid { n }
            | ChartSpec::Ellipsoid { n }
            | ChartSpec::Hyperboloid { n }
            | ChartSpec::Q1n { n }
                if !(MIN_DIM..=MAX_DIM).contains(&n) =>
            {
                bad(format!("{self}: n must lie in {MIN_DIM}..={MAX_DIM}"))
            }
            ChartSpec::Calabi { n1, n2 } if n1 < 1 || n2 < 2 || n1 + n2 > MAX_DIM => {
                bad(format!("{self}: need n1 >= 1, n2 >= 2, n1 + n2 <= {MAX_DIM}"))
            }
            ChartSpec::Thm12 { n } if !(3..=MAX_DIM).contains(&n) => {
                bad(format!("{self}: n must lie in 3..={MAX_DIM}"))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for ChartSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ChartSpec::Calabi { n1, n2 } => write!(f, "calabi({n1},{n2})"),
            other => write!(f, "{}({})", other.kind(), other.dim()),
        }
    }
}

impl FromStr for ChartSpec {
    type Err = Error;

    /// Parses `kind(n)` or `calabi(n1,n2)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, rest) = s
            .split_once('(')
            .ok_or_else(|| Error::InvalidChart(format!("expected kind(params), got {s:?}")))?;
        let args = rest
            .strip_suffix(')')
            .ok_or_else(|| Error::InvalidChart(format!("unterminated parameter list in {s:?}")))?;
        let nums = args
            .split(',')
            .map(|a| a.trim().parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::InvalidChart(format!("{s:?}: {e}")))?;
        match (kind.trim(), nums.as_slice()) {
            ("calabi", [n1, n2]) => ChartSpec::from_parts("calabi", None, Some(*n1), Some(*n2)),
            (k, [n]) => ChartSpec::from_parts(k, Some(*n), None, None),
            _ => Err(Error::InvalidChart(format!("wrong parameter count in {s:?}"))),
        }
    }
}

/// Defining equation `P(x) = constant` of an algebraic chart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum Implicit {
    /// `x_{n+1} − ½ Σ_{i≤n} x_i² = 0`
    Paraboloid,
    /// `Σ x_i² = 1`
    Sphere,
    /// `x_{n+1}² − Σ_{i≤n} x_i² = 1`
    Hyperboloid,
    /// `x_1 ⋯ x_{n+1} = 1`
    CoordinateProduct,
    /// `(x_1⋯x_{n1})² (x_{n+1}² − Σ_{n1<j≤n} x_j²)^{n2+1} = 1`
    Calabi { n1: usize, n2: usize },
}

impl Implicit {
    pub fn constant<T: Scalar>(&self) -> T {
        match self {
            Implicit::Paraboloid => T::zero(),
            _ => T::one(),
        }
    }

    pub fn evaluate<T: Scalar>(&self, x: &[T]) -> T {
        let sq = |v: &T| v.clone() * v.clone();
        let (head, last) = x.split_at(x.len() - 1);
        let last = &last[0];
        match *self {
            Implicit::Paraboloid => {
                let s = head.iter().fold(T::zero(), |a, v| a + sq(v));
                last.clone() - s / T::from_usize(2)
            }
            Implicit::Sphere => x.iter().fold(T::zero(), |a, v| a + sq(v)),
            Implicit::Hyperboloid => head.iter().fold(sq(last), |a, v| a - sq(v)),
            Implicit::CoordinateProduct => x.iter().fold(T::one(), |a, v| a * v.clone()),
            Implicit::Calabi { n1, n2 } => {
                let prod = head[..n1].iter().fold(T::one(), |a, v| a * v.clone());
                let lorentz = head[n1..].iter().fold(sq(last), |a, v| a - sq(v));
                sq(&prod) * lorentz.powi(n2 as i64 + 1).expect("non-negative exponent")
            }
        }
    }

    pub fn describe(&self, n: usize) -> String {
        match *self {
            Implicit::Paraboloid => {
                format!("x{} = (x1^2 + ... + x{n}^2)/2", n + 1)
            }
            Implicit::Sphere => format!("x1^2 + ... + x{}^2 = 1", n + 1),
            Implicit::Hyperboloid => format!("x{}^2 - x1^2 - ... - x{n}^2 = 1", n + 1),
            Implicit::CoordinateProduct => format!("x1 x2 ... x{} = 1", n + 1),
            Implicit::Calabi { n1, n2 } => {
                let head = if n1 == 1 { "x1^2".to_string() } else { format!("(x1...x{n1})^2") };
                format!("{head} (x{}^2 - x{}^2 - ... - x{n}^2)^{} = 1", n + 1, n1 + 1, n2 + 1)
            }
        }
    }
}

/// One family of the chart catalog.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CatalogEntry {
    pub family: &'static str,
    pub parameters: &'static str,
    pub equation: &'static str,
    pub dimensions: &'static str,
    pub scalar_mode: ScalarMode,
    pub example: ChartSpec,
}

pub fn catalog() -> Vec<CatalogEntry> {
    let e = |family, parameters, equation, dimensions, scalar_mode, example| CatalogEntry {
        family,
        parameters,
        equation,
        dimensions,
        scalar_mode,
        example,
    };
    vec![
        e(
            "paraboloid",
            "n",
            "x(n+1) = (x1^2 + ... + xn^2)/2",
            "2 <= n <= 6",
            ScalarMode::Rational,
            ChartSpec::Paraboloid { n: 3 },
        ),
        e(
            "ellipsoid",
            "n",
            "x1^2 + ... + x(n+1)^2 = 1",
            "2 <= n <= 6",
            ScalarMode::Float,
            ChartSpec::Ellipsoid { n: 3 },
        ),
        e(
            "hyperboloid",
            "n",
            "x(n+1)^2 - x1^2 - ... - xn^2 = 1",
            "2 <= n <= 6",
            ScalarMode::Float,
            ChartSpec::Hyperboloid { n: 3 },
        ),
        e("q1n", "n", "x1 x2 ... x(n+1) = 1", "2 <= n <= 6", ScalarMode::Float, ChartSpec::Q1n { n: 3 }),
        e(
            "calabi",
            "n1,n2",
            "(x1 ... x(n1))^2 (x(n+1)^2 - x(n1+1)^2 - ... - xn^2)^(n2+1) = 1, n = n1 + n2",
            "n1 >= 1, n2 >= 2, n1 + n2 <= 6",
            ScalarMode::Float,
            ChartSpec::Calabi { n1: 2, n2: 2 },
        ),
        e(
            "thm12",
            "n",
            "x1^2 (x(n+1)^2 - x2^2 - ... - xn^2)^n = 1",
            "3 <= n <= 6",
            ScalarMode::Float,
            ChartSpec::Thm12 { n: 3 },
        ),
    ]
}

/// Axis-aligned sampling box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Domain {
    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    pub fn contains(&self, u: &[f64]) -> bool {
        u.len() == self.lo.len()
            && u.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| a <= v && v <= b)
    }
}

/// `x ↦ A x + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    pub matrix: Vec<Vec<f64>>,
    pub offset: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Chart {
    spec: ChartSpec,
    dim: usize,
    blocks: Option<Vec<Vec<usize>>>,
    implicit: Option<Implicit>,
    domain: Domain,
    mode: ScalarMode,
    flip_last: bool,
    affine: Option<AffineMap>,
}

/// Constructs the catalog chart for `spec`, oriented so that its second
/// fundamental form is positive definite.
pub fn make_chart(spec: ChartSpec) -> Result<Chart> {
    spec.validate()?;
    let n = spec.dim();
    let product_domain = |n1: usize, n2: usize| {
        let mut lo = vec![-1.0; n1];
        let mut hi = vec![1.0; n1];
        lo.push(0.1);
        hi.push(1.5);
        for k in 0..n2 - 1 {
            if k + 1 < n2 - 1 {
                lo.push(POLE_MARGIN);
                hi.push(std::f64::consts::PI - POLE_MARGIN);
            } else {
                lo.push(-std::f64::consts::PI);
                hi.push(std::f64::consts::PI);
            }
        }
        Domain { lo, hi }
    };
    let (blocks, implicit, domain, mode) = match spec {
        ChartSpec::Paraboloid { .. } => {
            let split = n.div_ceil(2);
            (
                Some(vec![(0..split).collect(), (split..n).collect()]),
                Implicit::Paraboloid,
                Domain { lo: vec![-2.0; n], hi: vec![2.0; n] },
                ScalarMode::Rational,
            )
        }
        ChartSpec::Ellipsoid { .. } => (
            None,
            Implicit::Sphere,
            Domain { lo: vec![-0.5; n], hi: vec![0.5; n] },
            ScalarMode::Float,
        ),
        ChartSpec::Hyperboloid { .. } => (
            None,
            Implicit::Hyperboloid,
            Domain { lo: vec![-1.0; n], hi: vec![1.0; n] },
            ScalarMode::Float,
        ),
        ChartSpec::Q1n { .. } => (
            None,
            Implicit::CoordinateProduct,
            Domain { lo: vec![-1.0; n], hi: vec![1.0; n] },
            ScalarMode::Float,
        ),
        ChartSpec::Calabi { .. } | ChartSpec::Thm12 { .. } => {
            let (n1, n2) = spec.product_dims().expect("product chart");
            (
                Some(vec![(0..n1).collect(), (n1..n).collect()]),
                Implicit::Calabi { n1, n2 },
                product_domain(n1, n2),
                ScalarMode::Float,
            )
        }
    };
    let mut chart = Chart {
        spec,
        dim: n,
        blocks,
        implicit: Some(implicit),
        domain,
        mode,
        flip_last: false,
        affine: None,
    };
    let center = chart.domain.center();
    let form = crate::blaschke::second_form(&chart, &center)?;
    match form.definiteness {
        crate::blaschke::Definiteness::Positive => {}
        crate::blaschke::Definiteness::Negative => chart.flip_last = true,
        crate::blaschke::Definiteness::Indefinite => return Err(Error::Indefinite),
    }
    Ok(chart)
}

impl Chart {
    pub fn spec(&self) -> ChartSpec {
        self.spec
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim + 1
    }

    pub fn blocks(&self) -> Option<&[Vec<usize>]> {
        self.blocks.as_deref()
    }

    pub fn implicit(&self) -> Option<Implicit> {
        self.implicit
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn scalar_mode(&self) -> ScalarMode {
        self.mode
    }

    pub fn is_flipped(&self) -> bool {
        self.flip_last
    }

    /// Composes the chart with a unimodular affine map `x ↦ A x + b`.
    pub fn with_affine(mut self, map: AffineMap) -> Result<Self> {
        let m = self.ambient_dim();
        if map.matrix.len() != m || map.matrix.iter().any(|r| r.len() != m) || map.offset.len() != m
        {
            return Err(Error::InvalidChart("affine map has wrong shape".into()));
        }
        let det = crate::linalg::det(&map.matrix)?;
        if (det - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidChart(format!("affine map has determinant {det}, need 1")));
        }
        self.affine = Some(map);
        Ok(self)
    }

    fn check_point(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.dim {
            return Err(Error::OutsideDomain {
                point: u.to_vec(),
                reason: format!("expected {} coordinates, got {}", self.dim, u.len()),
            });
        }
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::OutsideDomain { point: u.to_vec(), reason: "non-finite".into() });
        }
        if let ChartSpec::Ellipsoid { .. } = self.spec {
            let r2: f64 = u.iter().map(|v| v * v).sum();
            if r2 >= ELLIPSOID_RADIUS * ELLIPSOID_RADIUS {
                return Err(Error::OutsideDomain {
                    point: u.to_vec(),
                    reason: format!("|u| must be below {ELLIPSOID_RADIUS}"),
                });
            }
        }
        Ok(())
    }

    /// Jets of the `n + 1` ambient coordinates at `u`.
    pub fn eval<T: Scalar>(&self, u: &[T], order: usize) -> Result<Vec<MultiJet<T>>> {
        let x = self.eval_unmapped(u, order)?;
        let Some(map) = &self.affine else {
            return Ok(x);
        };
        let conv = |v: f64| T::from_f64(v).ok_or(Error::NotRepresentable("affine entry"));
        let m = self.ambient_dim();
        (0..m)
            .map(|r| {
                let mut acc = MultiJet::constant(conv(map.offset[r])?, self.dim, order);
                for (c, xc) in x.iter().enumerate() {
                    acc = &acc + &xc.scale(&conv(map.matrix[r][c])?);
                }
                Ok(acc)
            })
            .collect()
    }

    /// Ambient point `x(u)`.
    pub fn point<T: Scalar>(&self, u: &[T]) -> Result<Vec<T>> {
        Ok(self.eval(u, 0)?.into_iter().map(|j| j.value().clone()).collect())
    }

    fn eval_unmapped<T: Scalar>(&self, u: &[T], order: usize) -> Result<Vec<MultiJet<T>>> {
        let uf: Vec<f64> = u.iter().map(Scalar::to_f64).collect();
        self.check_point(&uf)?;
        let n = self.dim;
        let vars = MultiJet::seed_point(u, order);
        let sum_sq = || vars.iter().fold(MultiJet::zero(n, order), |a, v| &a + &(v * v));
        let mut x: Vec<MultiJet<T>> = match self.spec {
            ChartSpec::Paraboloid { .. } => {
                let mut x = vars.clone();
                x.push(sum_sq().scale(&T::from_ratio(1, 2)));
                x
            }
            ChartSpec::Ellipsoid { .. } => {
                let mut x = vars.clone();
                x.push((-&sum_sq()).add_scalar(&T::one()).sqrt()?);
                x
            }
            ChartSpec::Hyperboloid { .. } => {
                let mut x = vars.clone();
                x.push(sum_sq().add_scalar(&T::one()).sqrt()?);
                x
            }
            ChartSpec::Q1n { .. } => {
                let mut x = vars.iter().map(|v| v.exp()).collect::<Result<Vec<_>>>()?;
                let total = vars.iter().fold(MultiJet::zero(n, order), |a, v| &a + v);
                x.push((-&total).exp()?);
                x
            }
            ChartSpec::Calabi { .. } | ChartSpec::Thm12 { .. } => {
                let (n1, n2) = self.spec.product_dims().expect("product chart");
                calabi_map(&vars, n1, n2)?
            }
        };
        if self.flip_last {
            let last = x.pop().expect("non-empty");
            x.push(-&last);
        }
        Ok(x)
    }

    /// `P(x(u)) − const` for the attached defining equation.
    pub fn implicit_residual<T: Scalar>(&self, u: &[T]) -> Result<T> {
        let imp = self.implicit.ok_or(Error::NoImplicit)?;
        let x: Vec<T> =
            self.eval_unmapped(u, 0)?.into_iter().map(|j| j.value().clone()).collect();
        Ok(imp.evaluate(&x) - imp.constant::<T>())
    }

    /// Smallest singular value of the `(n+1) × n` Jacobian at `u`.
    pub fn immersion_margin(&self, u: &[f64]) -> Result<f64> {
        let x = self.eval(u, 1)?;
        let jac = DMatrix::from_fn(self.ambient_dim(), self.dim, |r, c| {
            x[r].coeffs()[1 + c]
        });
        Ok(jac.singular_values().min())
    }

    /// Deterministic sample of `count` points from the sampling box.
    pub fn sample_points(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let mut u: Vec<f64> =
                self.domain.lo.iter().zip(&self.domain.hi).map(|(a, b)| rng.gen_range(*a..*b)).collect();
            if self.mode == ScalarMode::Rational {
                // short dyadic denominators keep exact arithmetic cheap
                u.iter_mut().for_each(|v| *v = (*v * 1024.0).round() / 1024.0);
            }
            if self.check_point(&u).is_ok() {
                out.push(u);
            }
        }
        out
    }
}

/// Unit-sphere chart `ω(φ)` of `S^{m−1}` in hyperspherical angles.
fn sphere_chart<T: Scalar>(angles: &[MultiJet<T>], nv: usize, order: usize) -> Result<Vec<MultiJet<T>>> {
    let mut out = Vec::with_capacity(angles.len() + 1);
    let mut sin_prod = MultiJet::constant(T::one(), nv, order);
    for a in angles {
        out.push(&sin_prod * &a.cos()?);
        sin_prod = &sin_prod * &a.sin()?;
    }
    out.push(sin_prod);
    Ok(out)
}

/// `x_i = e^{s_i}` (`i ≤ n1`), tail `= ρ (sinh χ ω(φ), cosh χ)`,
/// `ρ = exp(−Σ s / (n2 + 1))`.
fn calabi_map<T: Scalar>(vars: &[MultiJet<T>], n1: usize, n2: usize) -> Result<Vec<MultiJet<T>>> {
    let nv = vars.len();
    let order = vars[0].order();
    let s = &vars[..n1];
    let chi = &vars[n1];
    let phi = &vars[n1 + 1..];
    let total = s.iter().fold(MultiJet::zero(nv, order), |a, v| &a + v);
    let rho = total.scale(&T::from_ratio(-1, n2 as i64 + 1)).exp()?;
    let (sh, ch) = (chi.sinh()?, chi.cosh()?);
    let radial = &rho * &sh;
    let mut x = s.iter().map(|v| v.exp()).collect::<Result<Vec<_>>>()?;
    for w in sphere_chart(phi, nv, order)? {
        x.push(&radial * &w);
    }
    x.push(&rho * &ch);
    Ok(x)
}
