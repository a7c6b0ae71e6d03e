//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::process::ExitCode;

use equiaffine::blaschke::BlaschkeData;
use equiaffine::charts::{make_chart, ChartSpec};
use equiaffine::verify::{evaluate_point, run_suite, Corruption, SuiteConfig};
use equiaffine::verify::report::CheckReport;

mod common;
use common::{grid_maximum, orthonormalize, CATALOG};

const POINTS: usize = 10;
const SEED: u64 = 42;
const IDENTITY_TOL: f64 = 1e-7;
const H_SPREAD_TOL: f64 = 1e-7;
const QUADRIC_K_TOL: f64 = 1e-9;
const FLAT_R_TOL: f64 = 1e-8;
const NABLA_K_TOL: f64 = 1e-7;
const C1_TOL: f64 = 1e-7;
const RELATION_TOL: f64 = 1e-6;
const BLOCK_TOL: f64 = 1e-7;
const LADDER_TOL: f64 = 1e-6;
const GRID_TOL: f64 = 1e-4;
const STARTS: usize = 8;
const EIGEN_TOL: f64 = 1e-6;
const NABLA_RIC_TOL: f64 = 1e-7;
const IMPLICIT_POINTS: usize = 100;
const IMPLICIT_TOL: f64 = 1e-12;
const CORRUPTION: f64 = 0.1;
const CORRUPTION_FLOOR: f64 = 1e-3;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn suite(spec: &str) -> CheckReport {
    let mut cfg = SuiteConfig::new(spec.parse().unwrap());
    cfg.points = POINTS;
    cfg.seed = SEED;
    run_suite(&cfg).unwrap()
}

fn residual(r: &CheckReport, name: &str) -> f64 {
    r.check(name).map_or(f64::NAN, |c| c.residual)
}

fn point_max(r: &CheckReport, name: &str) -> f64 {
    r.points.iter().map(|p| p.residuals.get(name).copied().unwrap_or(f64::NAN)).fold(0.0, |m, v| {
        if v.is_nan() || m.is_nan() {
            f64::NAN
        } else {
            m.max(v)
        }
    })
}

/// Every value below its bound; NaN fails.
fn below(v: f64, bound: f64) -> bool {
    v < bound
}

struct Reports(Vec<(&'static str, CheckReport)>);

impl Reports {
    fn get(&self, spec: &str) -> &CheckReport {
        &self.0.iter().find(|(s, _)| *s == spec).expect("catalog report").1
    }
}

fn identities(reports: &Reports) -> Outcome {
    let names = ["gauss", "codazzi", "ricci_identity", "apolarity", "tsinghua"];
    let mut worst = 0.0f64;
    let mut pass = true;
    for (spec, r) in &reports.0 {
        if !r.errors.is_empty() {
            return outcome(false, format!("{spec}: {}", r.errors[0]));
        }
        for name in names {
            let v = point_max(r, name);
            pass &= below(v, IDENTITY_TOL);
            worst = worst.max(v);
        }
    }
    let para = reports.get("paraboloid(3)");
    let exact = names.iter().all(|n| point_max(para, n) == 0.0);
    outcome(pass && exact, format!("worst residual {worst:.2e} over 10 charts, paraboloid exact zero: {exact}"))
}

fn affine_spheres(reports: &Reports) -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for (spec, r) in &reports.0 {
        let umb = point_max(r, "umbilicity");
        let h = r.constants.h_mean.expect("H statistics");
        let spread = h.relative_spread();
        let sign_ok = match *spec {
            "paraboloid(3)" => h.min == 0.0 && h.max == 0.0,
            "ellipsoid(3)" => h.max > 0.0 && h.min > 0.0,
            "hyperboloid(3)" => true,
            _ => h.max < 0.0,
        };
        pass &= below(umb, IDENTITY_TOL) && below(spread, H_SPREAD_TOL) && sign_ok;
        notes.push(format!("{spec} H={:.6} spread {spread:.1e}", h.mean));
    }
    outcome(pass, notes.join("; "))
}

fn quadrics(reports: &Reports) -> Outcome {
    let e = point_max(reports.get("ellipsoid(3)"), "cubic_norm");
    let h = point_max(reports.get("hyperboloid(3)"), "cubic_norm");
    outcome(below(e, QUADRIC_K_TOL) && below(h, QUADRIC_K_TOL), format!("|K| ellipsoid {e:.2e}, hyperboloid {h:.2e}"))
}

fn flat_case(reports: &Reports) -> Outcome {
    let r = reports.get("q1n(3)");
    let curv = point_max(r, "curvature_norm");
    let nk = point_max(r, "nabla_k");
    outcome(below(curv, FLAT_R_TOL) && below(nk, NABLA_K_TOL), format!("q1n(3) |R| {curv:.2e}, |nabla K| {nk:.2e}"))
}

fn calabi_relations(reports: &Reports) -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for spec in ["calabi(2,2)", "calabi(2,3)"] {
        let r = reports.get(spec);
        let c1 = residual(r, "c1_zero");
        let c2 = residual(r, "c2_relation");
        let mu = residual(r, "sum_mu_sq_relation");
        let block = residual(r, "block_diagonality").max(residual(r, "product_form"));
        pass &= below(c1, C1_TOL) && below(c2, RELATION_TOL) && below(mu, RELATION_TOL) && below(block, BLOCK_TOL);
        let ratio = r.constants.c2.unwrap().mean / r.constants.h_mean.unwrap().mean;
        notes.push(format!("{spec} |c1| {c1:.1e}, c2/H {ratio:.9}, mu rel {mu:.1e}, form {block:.1e}"));
    }
    outcome(pass, notes.join("; "))
}

fn cubic_value(b: &BlaschkeData<f64>, u: &[f64]) -> f64 {
    let n = u.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                s += b.cubic[[i, j, k]] * u[i] * u[j] * u[k];
            }
        }
    }
    s
}

fn ladder() -> Outcome {
    let spec = ChartSpec::Calabi { n1: 2, n2: 2 };
    let chart = make_chart(spec).unwrap();
    let mut cfg = SuiteConfig::new(spec);
    cfg.seed = SEED;
    let n = spec.dim() as f64;
    let (mut starts_ok, mut lambda_rel, mut ladder_res, mut grid_gap) = (true, 0.0f64, 0.0f64, 0.0f64);
    for (i, u) in chart.sample_points(POINTS, SEED).iter().enumerate() {
        let p = match evaluate_point(&chart, u, i, &cfg) {
            Ok(p) => p,
            Err(e) => return outcome(false, format!("point {i}: {e}")),
        };
        let f = p.frame.expect("frame on calabi");
        let b = &p.data;
        let g: Vec<Vec<f64>> = (0..b.dim).map(|r| (0..b.dim).map(|c| b.metric.h[[r, c]]).collect()).collect();
        for level in &f.levels {
            starts_ok &= level.maximum.converged_starts == STARTS;
            let basis = orthonormalize(&g, &level.subspace);
            let grid = grid_maximum(&|v| cubic_value(b, v), &basis);
            grid_gap = grid_gap.max((grid - level.maximum.value).abs());
        }
        let want = (n - 1.0) * (-b.h_mean / n).sqrt();
        lambda_rel = lambda_rel.max(((f.lambdas[0] - want) / want).abs());
        for (k, (l, m)) in f.lambdas.iter().zip(&f.mus).enumerate() {
            ladder_res = ladder_res.max((l + (n - 1.0 - k as f64) * m).abs());
        }
    }
    outcome(
        starts_ok && below(lambda_rel, LADDER_TOL) && below(ladder_res, LADDER_TOL) && below(grid_gap, GRID_TOL),
        format!(
            "all {STARTS} starts converged: {starts_ok}, lambda11 rel {lambda_rel:.1e}, ladder {ladder_res:.1e}, grid gap {grid_gap:.1e}"
        ),
    )
}

fn thm12(reports: &Reports) -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for (name, spec) in [("thm12(3)", ChartSpec::Thm12 { n: 3 }), ("thm12(4)", ChartSpec::Thm12 { n: 4 })] {
        let chart = make_chart(spec).unwrap();
        let mut cfg = SuiteConfig::new(spec);
        cfg.seed = SEED;
        let nf = spec.dim() as f64;
        let mut eig = 0.0f64;
        for (i, u) in chart.sample_points(POINTS, SEED).iter().enumerate() {
            let p = match evaluate_point(&chart, u, i, &cfg) {
                Ok(p) => p,
                Err(e) => return outcome(false, format!("{name} point {i}: {e}")),
            };
            let b = &p.data;
            let f = p.frame.expect("frame on thm12");
            let s = (-b.h_mean / nf).sqrt();
            let n = b.dim;
            let apply = |x: &[f64], y: &[f64]| -> Vec<f64> {
                (0..n)
                    .map(|l| {
                        let mut acc = 0.0;
                        for i in 0..n {
                            for j in 0..n {
                                acc += x[i] * y[j] * b.k[[i, j, l]];
                            }
                        }
                        acc
                    })
                    .collect()
            };
            let x1 = &f.basis[0];
            for (a, e) in apply(x1, x1).iter().zip(x1) {
                eig = eig.max((a - (nf - 1.0) * s * e).abs());
            }
            for y in &f.basis[1..] {
                for (a, e) in apply(x1, y).iter().zip(y) {
                    eig = eig.max((a + s * e).abs());
                }
            }
        }
        let r = reports.get(name);
        let c2 = residual(r, "c2_relation_thm12");
        let nk = point_max(r, "nabla_k");
        pass &= below(eig, EIGEN_TOL) && below(c2, RELATION_TOL) && below(nk, NABLA_K_TOL);
        notes.push(format!("{name} eigen {eig:.1e}, c2 rel {c2:.1e}, |nabla K| {nk:.1e}"));
    }
    outcome(pass, notes.join("; "))
}

fn parallel_ricci(reports: &Reports) -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for spec in ["q1n(3)", "q1n(4)", "thm12(3)", "calabi(2,2)", "thm12(4)"] {
        let v = point_max(reports.get(spec), "nabla_ric");
        pass &= below(v, NABLA_RIC_TOL);
        notes.push(format!("{spec} {v:.1e}"));
    }
    outcome(pass, notes.join(", "))
}

fn implicit_membership() -> Outcome {
    let mut worst = 0.0f64;
    for spec in CATALOG {
        let chart = make_chart(spec.parse().unwrap()).unwrap();
        for u in chart.sample_points(IMPLICIT_POINTS, SEED) {
            match chart.implicit_residual::<f64>(&u) {
                Ok(r) => worst = worst.max(r.abs()),
                Err(e) => return outcome(false, format!("{spec}: {e}")),
            }
        }
    }
    outcome(below(worst, IMPLICIT_TOL), format!("worst |P(x) - c| {worst:.1e} over {IMPLICIT_POINTS} points per chart"))
}

fn negative_controls() -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for spec in ["q1n(3)", "calabi(2,2)"] {
        let mut cfg = SuiteConfig::new(spec.parse().unwrap());
        cfg.points = POINTS;
        cfg.corruption = Corruption::CubicComponent(CORRUPTION);
        let r = run_suite(&cfg).unwrap();
        let gauss = point_max(&r, "gauss");
        cfg.corruption = Corruption::NablaK(CORRUPTION);
        let r2 = run_suite(&cfg).unwrap();
        let codazzi = point_max(&r2, "codazzi");
        pass &= gauss > CORRUPTION_FLOOR && codazzi > CORRUPTION_FLOOR && !r.verdict && !r2.verdict;
        notes.push(format!("{spec} gauss {gauss:.2e}, codazzi {codazzi:.2e}"));
    }
    outcome(pass, notes.join("; "))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for k in 0..2 {
        let mut cfg = SuiteConfig::new(ChartSpec::Calabi { n1: 2, n2: 2 });
        cfg.points = POINTS;
        let path = dir.path().join(format!("run{k}.json"));
        run_suite(&cfg).unwrap().write_json(&path).unwrap();
        files.push(std::fs::read(&path).unwrap());
    }
    let same = files[0] == files[1];
    outcome(same, format!("{} bytes, identical: {same}", files[0].len()))
}

fn cross_chart() -> Outcome {
    let mut pass = true;
    let mut worst = 0.0f64;
    for (a, b) in [("calabi(1,2)", "thm12(3)"), ("calabi(1,3)", "thm12(4)")] {
        let (ra, rb) = (suite(a), suite(b));
        let (ca, cb) = (&ra.constants, &rb.constants);
        let mut pairs = vec![
            (ca.h_mean.unwrap().mean, cb.h_mean.unwrap().mean),
            (ca.c2.unwrap().mean, cb.c2.unwrap().mean),
        ];
        pairs.extend(ca.lambda_ladder.iter().zip(&cb.lambda_ladder).map(|(x, y)| (x.mean, y.mean)));
        pairs.extend(ca.mu_ladder.iter().zip(&cb.mu_ladder).map(|(x, y)| (x.mean, y.mean)));
        for (x, y) in pairs {
            worst = worst.max((x - y).abs());
        }
        pass &= ra.verdict && rb.verdict;
    }
    outcome(pass && below(worst, RELATION_TOL), format!("largest constant gap {worst:.1e}"))
}

fn main() -> ExitCode {
    let reports = Reports(CATALOG.iter().map(|s| (*s, suite(s))).collect());
    let criteria: Vec<(&str, Outcome)> = vec![
        ("structural identities on the catalog", identities(&reports)),
        ("affine sphere certification", affine_spheres(&reports)),
        ("quadrics have vanishing cubic form", quadrics(&reports)),
        ("flat Q(1,n) case", flat_case(&reports)),
        ("Calabi product relations", calabi_relations(&reports)),
        ("canonical frame ladder on calabi(2,2)", ladder()),
        ("thm12 eigenstructure and c2", thm12(&reports)),
        ("parallel Ricci tensor", parallel_ricci(&reports)),
        ("implicit equation membership", implicit_membership()),
        ("negative controls", negative_controls()),
        ("deterministic reports", determinism()),
    ];
    let mut all = true;
    for (i, (name, o)) in criteria.iter().enumerate() {
        all &= o.pass;
        println!("criterion {:>2} {}: {name}: {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    let extra = cross_chart();
    all &= extra.pass;
    println!("property     {}: calabi(1,n-1) matches thm12(n): {}", if extra.pass { "PASS" } else { "FAIL" }, extra.detail);
    let verdicts: Vec<String> =
        reports.0.iter().filter(|(_, r)| !r.verdict).map(|(s, r)| format!("{s} ({} failed)", r.failed().count())).collect();
    let suites_ok = verdicts.is_empty();
    all &= suites_ok;
    println!(
        "property     {}: full suites pass on the catalog{}",
        if suites_ok { "PASS" } else { "FAIL" },
        if suites_ok { String::new() } else { format!(": {}", verdicts.join(", ")) }
    );
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
