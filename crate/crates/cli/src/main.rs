use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use equiaffine::charts::{catalog, ChartSpec};
use equiaffine::verify::{invariants_summary, run_suite, ConfigOverrides, OutputFormat};

#[derive(Parser)]
#[command(name = "equiaffine", version, about = "Blaschke invariants and structure checks for affine hypersurfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the chart families.
    List {
        #[arg(long)]
        json: bool,
    },
    /// Print invariants at one point.
    Invariants {
        #[command(flatten)]
        chart: ChartArgs,
        /// Comma-separated chart coordinates.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        point: Vec<f64>,
        #[arg(long, default_value_t = 5)]
        jet_order: usize,
        #[arg(long)]
        json: bool,
    },
    /// Run the check suite on sampled points.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct ChartArgs {
    /// paraboloid, ellipsoid, hyperboloid, q1n, calabi or thm12.
    #[arg(long)]
    chart: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    n1: Option<usize>,
    #[arg(long)]
    n2: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    chart: ChartArgs,
    /// key=value file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    jet_order: Option<usize>,
    #[arg(long)]
    tol_identity: Option<f64>,
    #[arg(long)]
    tol_solve: Option<f64>,
    #[arg(long)]
    tol_ladder: Option<f64>,
    /// Report destination.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    format: Option<OutputFormat>,
}

/// Bad input: usage, domain or order errors. Exit code 2.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage<E: Into<anyhow::Error>>(e: E) -> anyhow::Error {
    anyhow::Error::new(UsageError(format!("{:#}", e.into())))
}

fn chart_spec(a: &ChartArgs) -> Result<ChartSpec> {
    let kind = a.chart.as_deref().context("--chart is required").map_err(usage)?;
    ChartSpec::from_parts(kind, a.n, a.n1, a.n2).map_err(usage)
}

fn cmd_list(json: bool) -> Result<bool> {
    let entries = catalog();
    if json {
        println!("{}", serde_json::to_string_pretty(&entries)?);
    } else {
        for e in &entries {
            let params = format!("{}({})", e.family, e.parameters);
            println!("{params:<16} {}   [{}]", e.equation, e.dimensions);
        }
    }
    Ok(true)
}

/// Shortest round-trip digits; exponent form away from unit scale.
fn fmt_f(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && !(1e-4..1e6).contains(&a) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| fmt_f(*x)).collect();
    format!("[{}]", parts.join(", "))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), fmt_f)
}

fn cmd_invariants(chart: &ChartArgs, point: &[f64], jet_order: usize, json: bool) -> Result<bool> {
    let spec = chart_spec(chart)?;
    let s = invariants_summary(spec, point, jet_order).map_err(usage)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&s)?);
        return Ok(true);
    }
    println!("chart             {}", s.chart);
    println!("point             {}", fmt_vec(&s.point));
    println!("x                 {}", fmt_vec(&s.x));
    println!("jet_order         {}", s.jet_order);
    for (i, row) in s.h.iter().enumerate() {
        let label = if i == 0 { "h" } else { "" };
        println!("{label:<17} {}", fmt_vec(row));
    }
    println!("det_h             {}", fmt_f(s.det_h));
    println!("H                 {}", fmt_f(s.h_mean));
    println!("S eigenvalues     {}", fmt_vec(&s.shape_eigenvalues));
    println!("|S - H id|        {}", fmt_f(s.umbilicity));
    println!("|K|               {}", fmt_f(s.cubic_norm));
    println!("|nabla K|         {}", fmt_f(s.nabla_k_norm));
    println!("|R|               {}", fmt_f(s.curvature_norm));
    println!("|nabla Ric|       {}", fmt_opt(s.nabla_ric_norm));
    println!("c1                {}", fmt_opt(s.c1));
    println!("c2                {}", fmt_opt(s.c2));
    Ok(true)
}

fn cmd_verify(args: &VerifyArgs) -> Result<bool> {
    let file = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))
                .map_err(usage)?;
            ConfigOverrides::parse(&text).map_err(usage)?
        }
        None => ConfigOverrides::default(),
    };
    let flags = ConfigOverrides {
        chart: args.chart.chart.clone(),
        n: args.chart.n,
        n1: args.chart.n1,
        n2: args.chart.n2,
        points: args.points,
        seed: args.seed,
        jet_order: args.jet_order,
        tol_identity: args.tol_identity,
        tol_solve: args.tol_solve,
        tol_ladder: args.tol_ladder,
        output: args.out.clone(),
        format: args.format,
    };
    let cfg = file.merge(flags).into_config().map_err(usage)?;
    let report = run_suite(&cfg).map_err(usage)?;

    if let Some(path) = &cfg.output {
        match cfg.format {
            OutputFormat::Json => report.write_json(path)?,
            OutputFormat::Csv => {
                let f = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
                report.write_csv(f)?;
            }
        }
    }
    let failed: Vec<_> = report.failed().collect();
    println!(
        "{}: {} points, {} checks, {} failed, {} point errors",
        report.chart,
        report.points.len(),
        report.checks.len(),
        failed.len(),
        report.errors.len()
    );
    for c in &failed {
        println!("  FAIL {:<22} residual {} tolerance {}", c.name, fmt_f(c.residual), fmt_f(c.tolerance));
    }
    for e in &report.errors {
        println!("  ERROR {e}");
    }
    if let Some(h) = report.constants.h_mean {
        println!("  H = {} (spread {})", fmt_f(h.mean), fmt_f(h.spread));
    }
    if let Some(c) = report.constants.c2 {
        println!("  c2 = {}", fmt_f(c.mean));
    }
    println!("verdict: {}", if report.verdict { "pass" } else { "fail" });
    Ok(report.verdict)
}

fn run(cli: Cli) -> Result<bool> {
    match &cli.command {
        Command::List { json } => cmd_list(*json),
        Command::Invariants { chart, point, jet_order, json } => cmd_invariants(chart, point, *jet_order, *json),
        Command::Verify(args) => cmd_verify(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<UsageError>() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
