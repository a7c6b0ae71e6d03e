//! Check suites over sampled chart points.

pub mod product;
pub mod report;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use product::{product_structure, ProductStructure};
pub use report::{CheckEntry, CheckReport, Constants, PointEntry, Stat, SCHEMA_VERSION};

use crate::blaschke::{self, BlaschkeData};
use crate::charts::{make_chart, Chart, ChartSpec, ScalarMode};
use crate::error::{Error, Result};
use crate::frames::{self, FrameResult, MaximizeOptions};
use crate::scalar::Scalar;
use crate::Rational;

/// Tolerance for implicit-equation membership.
pub const IMPLICIT_TOL: f64 = 1e-12;

/// Tolerance on derivatives of one block's metric in the other block's coordinates.
pub const CROSS_DERIVATIVE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(Error::Config(format!("unknown format {other:?}"))),
        }
    }
}

/// Test hook: perturbs computed tensors before the checks see them, to make
/// sure the suite can fail.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Corruption {
    #[default]
    None,
    /// Adds the amount to `K^0_{00}`.
    CubicComponent(f64),
    /// Adds the amount to `(∇̂_{∂_0} K)(∂_1, ∂_0)`, `∂_0` component.
    NablaK(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub chart: ChartSpec,
    pub points: usize,
    pub seed: u64,
    pub jet_order: usize,
    pub tol_identity: f64,
    pub tol_solve: f64,
    pub tol_ladder: f64,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
    pub corruption: Corruption,
}

impl SuiteConfig {
    pub fn new(chart: ChartSpec) -> Self {
        SuiteConfig {
            chart,
            points: 10,
            seed: 42,
            jet_order: blaschke::DEFAULT_ORDER,
            tol_identity: 1e-7,
            tol_solve: 1e-9,
            tol_ladder: 1e-6,
            output: None,
            format: OutputFormat::Json,
            corruption: Corruption::None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.chart.validate()?;
        if !(blaschke::MIN_ORDER..=blaschke::MAX_ORDER).contains(&self.jet_order) {
            return Err(Error::Config(format!(
                "jet order must lie in {}..={}, got {}",
                blaschke::MIN_ORDER,
                blaschke::MAX_ORDER,
                self.jet_order
            )));
        }
        if self.jet_order < 5 {
            return Err(Error::InsufficientOrder {
                what: "covariant derivative of Ricci",
                need: 5,
                have: self.jet_order,
            });
        }
        for (name, v) in
            [("tol_identity", self.tol_identity), ("tol_solve", self.tol_solve), ("tol_ladder", self.tol_ladder)]
        {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.points == 0 {
            return Err(Error::Config("points must be at least 1".into()));
        }
        Ok(())
    }
}

/// Partially specified configuration, as read from a file or from flags.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigOverrides {
    pub chart: Option<String>,
    pub n: Option<usize>,
    pub n1: Option<usize>,
    pub n2: Option<usize>,
    pub points: Option<usize>,
    pub seed: Option<u64>,
    pub jet_order: Option<usize>,
    pub tol_identity: Option<f64>,
    pub tol_solve: Option<f64>,
    pub tol_ladder: Option<f64>,
    pub output: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

fn parse_value<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Config(format!("bad value for {key}: {v:?}")))
}

impl ConfigOverrides {
    /// Flat `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut o = ConfigOverrides::default();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value", no + 1)))?;
            let key = k.trim().replace('-', "_");
            let v = v.trim();
            match key.as_str() {
                "chart" => o.chart = Some(v.to_string()),
                "n" => o.n = Some(parse_value(&key, v)?),
                "n1" => o.n1 = Some(parse_value(&key, v)?),
                "n2" => o.n2 = Some(parse_value(&key, v)?),
                "points" => o.points = Some(parse_value(&key, v)?),
                "seed" => o.seed = Some(parse_value(&key, v)?),
                "jet_order" => o.jet_order = Some(parse_value(&key, v)?),
                "tol_identity" => o.tol_identity = Some(parse_value(&key, v)?),
                "tol_solve" => o.tol_solve = Some(parse_value(&key, v)?),
                "tol_ladder" => o.tol_ladder = Some(parse_value(&key, v)?),
                "output" | "out" => o.output = Some(PathBuf::from(v)),
                "format" => o.format = Some(v.parse()?),
                other => return Err(Error::Config(format!("line {}: unknown key {other:?}", no + 1))),
            }
        }
        Ok(o)
    }

    /// Fields set in `over` win.
    pub fn merge(self, over: ConfigOverrides) -> ConfigOverrides {
        ConfigOverrides {
            chart: over.chart.or(self.chart),
            n: over.n.or(self.n),
            n1: over.n1.or(self.n1),
            n2: over.n2.or(self.n2),
            points: over.points.or(self.points),
            seed: over.seed.or(self.seed),
            jet_order: over.jet_order.or(self.jet_order),
            tol_identity: over.tol_identity.or(self.tol_identity),
            tol_solve: over.tol_solve.or(self.tol_solve),
            tol_ladder: over.tol_ladder.or(self.tol_ladder),
            output: over.output.or(self.output),
            format: over.format.or(self.format),
        }
    }

    pub fn chart_spec(&self) -> Result<ChartSpec> {
        let kind = self.chart.as_deref().ok_or_else(|| Error::Config("no chart given".into()))?;
        ChartSpec::from_parts(kind, self.n, self.n1, self.n2)
    }

    pub fn into_config(self) -> Result<SuiteConfig> {
        let mut cfg = SuiteConfig::new(self.chart_spec()?);
        if let Some(v) = self.points {
            cfg.points = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.jet_order {
            cfg.jet_order = v;
        }
        if let Some(v) = self.tol_identity {
            cfg.tol_identity = v;
        }
        if let Some(v) = self.tol_solve {
            cfg.tol_solve = v;
        }
        if let Some(v) = self.tol_ladder {
            cfg.tol_ladder = v;
        }
        cfg.output = self.output;
        if let Some(v) = self.format {
            cfg.format = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Everything computed at one sample point.
#[derive(Debug, Clone)]
pub struct PointEval {
    pub data: BlaschkeData<f64>,
    /// Named per-point residuals; computed in the chart's scalar mode.
    pub residuals: BTreeMap<String, f64>,
    pub product: Option<ProductStructure>,
    pub frame: Option<FrameResult>,
}

fn corrupt<T: Scalar>(b: &mut BlaschkeData<T>, c: Corruption) {
    let bump = |v: &mut T, by: f64| *v = v.clone() + T::from_f64(by).expect("finite corruption");
    match c {
        Corruption::None => {}
        Corruption::CubicComponent(by) => bump(&mut b.k[[0, 0, 0]], by),
        Corruption::NablaK(by) => {
            if b.dim > 1 {
                bump(&mut b.nabla_k[[0, 1, 0, 0]], by)
            }
        }
    }
}

fn pointwise<T: Scalar>(
    chart: &Chart,
    u: &[f64],
    cfg: &SuiteConfig,
) -> Result<(BlaschkeData<f64>, BTreeMap<String, f64>)> {
    let ut: Vec<T> = u
        .iter()
        .map(|v| T::from_f64(*v).ok_or_else(|| Error::Domain("non-finite coordinate".into())))
        .collect::<Result<_>>()?;
    let mut b = blaschke::full_invariants(chart, &ut, cfg.jet_order)?;
    corrupt(&mut b, cfg.corruption);
    let n = b.dim;
    let umbilic = blaschke::tensor_max_abs(&crate::tensor::Tensor::from_fn(n, 2, |ix| {
        let id = if ix[0] == ix[1] { b.h_mean.clone() } else { T::zero() };
        b.shape[[ix[0], ix[1]]].clone() - id
    }));
    let entries: Vec<(&str, T)> = vec![
        ("gauss", blaschke::check_gauss(&b)),
        ("codazzi", blaschke::check_codazzi(&b)),
        ("ricci_identity", blaschke::check_ricci_identity(&b)?),
        ("apolarity", blaschke::check_apolarity(&b)),
        ("tsinghua", blaschke::check_tsinghua(&b)),
        ("metricity", blaschke::check_metricity(&b)),
        ("cubic_symmetry", blaschke::check_cubic_symmetry(&b)),
        ("gauss_metric", b.residuals.gauss_metric.clone()),
        ("weingarten", b.residuals.weingarten.clone()),
        ("volume", b.residuals.volume.clone()),
        ("umbilicity", umbilic),
        ("nabla_k", blaschke::tensor_max_abs(&b.nabla_k)),
        ("nabla_ric", blaschke::tensor_max_abs(b.nabla_ric()?)),
        ("cubic_norm", blaschke::tensor_max_abs(&b.k)),
        ("curvature_norm", blaschke::tensor_max_abs(&b.r_hat)),
        ("implicit", chart.implicit_residual(&ut)?.abs()),
    ];
    let residuals = entries.into_iter().map(|(k, v)| (k.to_string(), v.to_f64())).collect();
    Ok((b.to_f64(), residuals))
}

fn point_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(index as u64)
}

/// Runs the pipeline and all pointwise checks at `u`.
pub fn evaluate_point(chart: &Chart, u: &[f64], index: usize, cfg: &SuiteConfig) -> Result<PointEval> {
    let (data, residuals) = match chart.scalar_mode() {
        ScalarMode::Rational => pointwise::<Rational>(chart, u, cfg)?,
        ScalarMode::Float => pointwise::<f64>(chart, u, cfg)?,
    };
    let seed = point_seed(cfg.seed, index);
    let product = match chart.blocks() {
        Some(blocks) => Some(product_structure(&data, blocks, seed)?),
        None => None,
    };
    let frame = match (chart.spec(), chart.blocks()) {
        (ChartSpec::Calabi { .. } | ChartSpec::Thm12 { .. }, Some(blocks)) => {
            let opts = MaximizeOptions { seed, ..MaximizeOptions::default() };
            Some(frames::split_frame(&data, blocks, &opts)?)
        }
        _ => None,
    };
    Ok(PointEval { data, residuals, product, frame })
}

struct Collector<'a> {
    ok: Vec<&'a PointEval>,
    checks: Vec<CheckEntry>,
}

impl<'a> Collector<'a> {
    fn max_of(&self, f: impl Fn(&PointEval) -> Option<f64>) -> f64 {
        if self.ok.is_empty() {
            return f64::NAN;
        }
        self.ok.iter().filter_map(|p| f(p)).fold(f64::NEG_INFINITY, |m, v| if v.is_nan() || m.is_nan() { f64::NAN } else { m.max(v) })
    }

    fn push(&mut self, name: &str, residual: f64, tol: f64) {
        self.checks.push(CheckEntry::new(name, residual, tol));
    }

    fn pointwise(&mut self, name: &str, tol: f64) {
        let r = self.max_of(|p| p.residuals.get(name).copied());
        self.push(name, r, tol);
    }

    fn values(&self, f: impl Fn(&PointEval) -> Option<f64>) -> Vec<f64> {
        self.ok.iter().filter_map(|p| f(p)).collect()
    }
}

/// Samples points, runs every applicable check and aggregates the report.
pub fn run_suite(cfg: &SuiteConfig) -> Result<CheckReport> {
    cfg.validate()?;
    let chart = make_chart(cfg.chart)?;
    let samples = chart.sample_points(cfg.points, cfg.seed);
    let evals: Vec<Result<PointEval>> =
        samples.par_iter().enumerate().map(|(i, u)| evaluate_point(&chart, u, i, cfg)).collect();

    let mut errors = Vec::new();
    let mut points = Vec::with_capacity(samples.len());
    for (i, (u, r)) in samples.iter().zip(&evals).enumerate() {
        let (residuals, error) = match r {
            Ok(p) => (p.residuals.clone(), None),
            Err(e) => {
                errors.push(format!("point {i}: {e}"));
                (BTreeMap::new(), Some(e.to_string()))
            }
        };
        points.push(PointEntry { index: i, u: u.clone(), residuals, error });
    }

    let mut col = Collector { ok: evals.iter().filter_map(|r| r.as_ref().ok()).collect(), checks: Vec::new() };
    let spec = cfg.chart;
    let n = spec.dim();
    let (ti, ts, tl) = (cfg.tol_identity, cfg.tol_solve, cfg.tol_ladder);

    for name in [
        "gauss",
        "codazzi",
        "ricci_identity",
        "apolarity",
        "tsinghua",
        "metricity",
        "cubic_symmetry",
        "umbilicity",
        "nabla_k",
        "nabla_ric",
    ] {
        col.pointwise(name, ti);
    }
    for name in ["gauss_metric", "weingarten", "volume"] {
        col.pointwise(name, ts);
    }
    col.pointwise("implicit", IMPLICIT_TOL);
    if matches!(spec, ChartSpec::Paraboloid { .. } | ChartSpec::Ellipsoid { .. } | ChartSpec::Hyperboloid { .. }) {
        col.pointwise("cubic_norm", ts);
    }
    if matches!(spec, ChartSpec::Paraboloid { .. } | ChartSpec::Q1n { .. }) {
        col.pointwise("curvature_norm", ti);
    }

    let h_stat = Stat::from_values(&col.values(|p| Some(p.data.h_mean)));
    col.push("h_spread", h_stat.map_or(f64::NAN, |s| s.relative_spread()), ti);
    let h_sign = match spec {
        ChartSpec::Paraboloid { .. } => col.max_of(|p| Some(p.data.h_mean.abs())),
        ChartSpec::Ellipsoid { .. } => col.max_of(|p| Some(-p.data.h_mean)),
        _ => col.max_of(|p| Some(p.data.h_mean)),
    };
    col.push("h_sign", h_sign, if matches!(spec, ChartSpec::Paraboloid { .. }) { ti } else { 0.0 });

    let mut constants = Constants { h_mean: h_stat, ..Constants::default() };
    if chart.blocks().is_some() {
        let ps = |p: &PointEval| p.product.clone().expect("product charts");
        col.push("block_diagonality", col.max_of(|p| Some(ps(p).block_diagonality)), ts);
        col.push("block_cross_derivatives", col.max_of(|p| Some(ps(p).cross_derivatives)), CROSS_DERIVATIVE_TOL);
        col.push("product_form", col.max_of(|p| Some(ps(p).form_residual)), ti);
        col.push("plane_agreement", col.max_of(|p| Some(ps(p).agreement)), ti);
        constants.c1 = Stat::from_values(&col.values(|p| ps(p).c1));
        constants.c2 = Stat::from_values(&col.values(|p| ps(p).c2));
        let c1_applicable = col.ok.first().is_some_and(|p| ps(p).c1.is_some());
        let c2_applicable = col.ok.first().is_some_and(|p| ps(p).c2.is_some());
        let is_paraboloid = matches!(spec, ChartSpec::Paraboloid { .. });
        if c1_applicable && (is_paraboloid || matches!(spec, ChartSpec::Calabi { .. })) {
            col.push("c1_zero", col.max_of(|p| ps(p).c1.map(f64::abs)), ti);
        }
        if c2_applicable && is_paraboloid {
            col.push("c2_zero", col.max_of(|p| ps(p).c2.map(f64::abs)), ti);
        }
    }

    if let (Some((n1, n2)), false) = (spec.product_dims(), matches!(spec, ChartSpec::Paraboloid { .. })) {
        let c2 = |p: &PointEval| p.product.as_ref().and_then(|s| s.c2);
        let fr = |p: &PointEval| p.frame.clone().expect("frames on product charts");
        let rel = |a: f64, h: f64| (a / h.abs()).abs();
        let nf = n as f64;
        let (n1f, n2f) = (n1 as f64, n2 as f64);
        col.push("c2_negative", col.max_of(c2), 0.0);
        col.push(
            "c2_relation",
            col.max_of(|p| c2(p).map(|c| rel(c - (nf + 1.0) * p.data.h_mean / (n2f + 1.0), p.data.h_mean))),
            tl,
        );
        if matches!(spec, ChartSpec::Thm12 { .. }) {
            col.push(
                "c2_relation_thm12",
                col.max_of(|p| c2(p).map(|c| rel(c - (nf + 1.0) * p.data.h_mean / nf, p.data.h_mean))),
                tl,
            );
        }
        col.push(
            "sum_mu_sq_relation",
            col.max_of(|p| Some(rel(fr(p).sum_mu_sq() + n1f * p.data.h_mean / (n2f + 1.0), p.data.h_mean))),
            tl,
        );
        let starts = MaximizeOptions::default().starts as f64;
        col.push(
            "frame_convergence",
            col.max_of(|p| {
                let f = fr(p);
                Some(f.levels.iter().map(|l| 1.0 - l.maximum.converged_starts as f64 / starts).fold(0.0, f64::max))
            }),
            1.0,
        );
        col.push("frame_gram", col.max_of(|p| Some(fr(p).gram_residual)), ts);
        col.push("frame_stationarity", col.max_of(|p| Some(fr(p).stationarity)), ti);
        col.push("frame_ladder", col.max_of(|p| Some(fr(p).ladder_residual)), tl);
        col.push(
            "lambda_max_relation",
            col.max_of(|p| {
                let want = (nf - 1.0) * (-p.data.h_mean / nf).sqrt();
                Some(((fr(p).lambdas[0] - want) / want).abs())
            }),
            tl,
        );
        col.push(
            "ladder_signs",
            col.max_of(|p| {
                let l = fr(p).lambdas;
                let last = l.len() - 1;
                Some(l.iter().enumerate().map(|(i, v)| if i < last { -v } else { -v - tl }).fold(f64::MIN, f64::max))
            }),
            0.0,
        );
        col.push("frame_isotropy", col.max_of(|p| Some(fr(p).isotropy_residual)), ti);
        col.push("frame_second_block", col.max_of(|p| Some(fr(p).second_block_residual)), ti);
        col.push("frame_form", col.max_of(|p| Some(fr(p).form_residual)), ti);
        let frames_list: Vec<FrameResult> = col.ok.iter().map(|p| fr(p)).collect();
        let data_list: Vec<BlaschkeData<f64>> = col.ok.iter().map(|p| p.data.clone()).collect();
        let par = frames::verify_parallelism(&data_list, &frames_list);
        col.push("lambda_spread", par.lambda_spread, tl);
        col.push("mu_spread", par.mu_spread, tl);
        constants.lambda_ladder =
            (0..n1).filter_map(|i| Stat::from_values(&col.values(|p| Some(fr(p).lambdas[i])))).collect();
        constants.mu_ladder = (0..n1).filter_map(|i| Stat::from_values(&col.values(|p| Some(fr(p).mus[i])))).collect();
        constants.sum_mu_sq = Stat::from_values(&col.values(|p| Some(fr(p).sum_mu_sq())));
    }

    let verdict = errors.is_empty() && col.checks.iter().all(|c| c.pass);
    Ok(CheckReport {
        schema_version: SCHEMA_VERSION,
        chart_spec: spec,
        chart: spec.to_string(),
        scalar_mode: chart.scalar_mode(),
        seed: cfg.seed,
        jet_order: cfg.jet_order,
        points,
        checks: col.checks,
        constants,
        errors,
        verdict,
    })
}

/// Pointwise invariants as printed by the command line.
///
/// Norms are the largest absolute coordinate component.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantSummary {
    pub chart: String,
    pub point: Vec<f64>,
    pub x: Vec<f64>,
    pub jet_order: usize,
    pub h: Vec<Vec<f64>>,
    pub det_h: f64,
    #[serde(rename = "H")]
    pub h_mean: f64,
    pub shape_eigenvalues: Vec<f64>,
    pub umbilicity: f64,
    pub cubic_norm: f64,
    pub nabla_k_norm: f64,
    pub curvature_norm: f64,
    pub nabla_ric_norm: Option<f64>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
}

fn summary_in<T: Scalar>(chart: &Chart, u: &[f64], order: usize) -> Result<(BlaschkeData<f64>, Vec<f64>)> {
    let ut: Vec<T> = u
        .iter()
        .map(|v| T::from_f64(*v).ok_or_else(|| Error::Domain("non-finite coordinate".into())))
        .collect::<Result<_>>()?;
    let b = blaschke::full_invariants(chart, &ut, order)?;
    let x = chart.point(&ut)?.iter().map(Scalar::to_f64).collect();
    Ok((b.to_f64(), x))
}

/// Eigenvalues of the `h`-self-adjoint shape operator, ascending.
pub fn shape_eigenvalues(b: &BlaschkeData<f64>) -> Result<Vec<f64>> {
    let n = b.dim;
    let h = nalgebra::DMatrix::from_fn(n, n, |i, j| b.metric.h[[i, j]]);
    // B_ik = S^j_i h_jk is symmetric; solve B v = λ h v through h = L Lᵀ
    let bm = nalgebra::DMatrix::from_fn(n, n, |i, k| (0..n).map(|j| b.shape[[i, j]] * b.metric.h[[j, k]]).sum());
    let l = nalgebra::Cholesky::new(h).ok_or(Error::Indefinite)?.l();
    let li = l.try_inverse().ok_or(Error::Singular)?;
    let m = &li * bm * li.transpose();
    let sym = (&m + m.transpose()) * 0.5;
    let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

pub fn invariants_summary(spec: ChartSpec, u: &[f64], order: usize) -> Result<InvariantSummary> {
    let chart = make_chart(spec)?;
    let (b, x) = match chart.scalar_mode() {
        ScalarMode::Rational => summary_in::<Rational>(&chart, u, order)?,
        ScalarMode::Float => summary_in::<f64>(&chart, u, order)?,
    };
    let n = b.dim;
    let umbilicity = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (b.shape[[i, j]] - if i == j { b.h_mean } else { 0.0 }).abs())
        .fold(0.0, f64::max);
    let product = match chart.blocks() {
        Some(blocks) => Some(product_structure(&b, blocks, 0)?),
        None => None,
    };
    Ok(InvariantSummary {
        chart: spec.to_string(),
        point: u.to_vec(),
        x,
        jet_order: order,
        h: (0..n).map(|i| (0..n).map(|j| b.metric.h[[i, j]]).collect()).collect(),
        det_h: b.metric.det_h,
        h_mean: b.h_mean,
        shape_eigenvalues: shape_eigenvalues(&b)?,
        umbilicity,
        cubic_norm: b.k.max_abs(),
        nabla_k_norm: b.nabla_k.max_abs(),
        curvature_norm: b.r_hat.max_abs(),
        nabla_ric_norm: b.nabla_ric.as_ref().map(|t| t.max_abs()),
        c1: product.as_ref().and_then(|p| p.c1),
        c2: product.as_ref().and_then(|p| p.c2),
    })
}
