//! Report types and their JSON / CSV encodings.

use std::collections::BTreeMap;
use std::io;
use std::path::Path;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::charts::{ChartSpec, ScalarMode};
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckEntry {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckEntry {
    pub fn new(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        // NaN never passes
        let pass = residual < tolerance;
        CheckEntry { name: name.into(), residual, tolerance, pass }
    }
}

/// Summary of one constant across sample points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stat {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub spread: f64,
}

impl Stat {
    pub fn from_values(values: &[f64]) -> Option<Stat> {
        if values.is_empty() {
            return None;
        }
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        Some(Stat { mean, min, max, spread: max - min })
    }

    /// Spread relative to `|mean|`, or absolute when the mean is zero.
    pub fn relative_spread(&self) -> f64 {
        if self.mean.abs() > 1e-12 {
            self.spread / self.mean.abs()
        } else {
            self.spread
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Constants {
    #[serde(rename = "H")]
    pub h_mean: Option<Stat>,
    pub c1: Option<Stat>,
    pub c2: Option<Stat>,
    pub lambda_ladder: Vec<Stat>,
    pub mu_ladder: Vec<Stat>,
    pub sum_mu_sq: Option<Stat>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointEntry {
    pub index: usize,
    pub u: Vec<f64>,
    pub residuals: BTreeMap<String, f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub schema_version: u32,
    pub chart_spec: ChartSpec,
    pub chart: String,
    pub scalar_mode: ScalarMode,
    pub seed: u64,
    pub jet_order: usize,
    pub points: Vec<PointEntry>,
    pub checks: Vec<CheckEntry>,
    pub constants: Constants,
    pub errors: Vec<String>,
    pub verdict: bool,
}

impl CheckReport {
    pub fn check(&self, name: &str) -> Option<&CheckEntry> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failed(&self) -> impl Iterator<Item = &CheckEntry> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> String {
        let mut buf = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut buf, Fixed17::default());
        self.serialize(&mut ser).expect("report serializes");
        buf.push(b'\n');
        String::from_utf8(buf).expect("utf-8 json")
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    /// One row per point with its residuals; failed points leave them empty.
    pub fn write_csv<W: io::Write>(&self, out: W) -> Result<()> {
        let names: Vec<&String> = self
            .points
            .iter()
            .find(|p| p.error.is_none())
            .map(|p| p.residuals.keys().collect())
            .unwrap_or_default();
        let dim = self.chart_spec.dim();
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = vec!["index".into()];
        header.extend((0..dim).map(|i| format!("u{i}")));
        header.extend(names.iter().map(|s| s.to_string()));
        header.push("error".into());
        w.write_record(&header).map_err(csv_err)?;
        for p in &self.points {
            let mut row = vec![p.index.to_string()];
            row.extend(p.u.iter().map(|v| format!("{v:.16e}")));
            row.extend(names.iter().map(|k| {
                p.residuals.get(*k).map(|v| format!("{v:.16e}")).unwrap_or_default()
            }));
            row.push(p.error.clone().unwrap_or_default());
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Pretty JSON with floats at 17 significant digits.
pub struct Fixed17 {
    pretty: PrettyFormatter<'static>,
}

impl Default for Fixed17 {
    fn default() -> Self {
        Fixed17 { pretty: PrettyFormatter::with_indent(b"  ") }
    }
}

impl Formatter for Fixed17 {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.pretty.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.pretty.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_object_value(w)
    }
}
