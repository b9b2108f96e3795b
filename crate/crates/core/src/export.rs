//! File outputs: ASCII PLY polylines, curve JSON, run reports and a CSV echo
//! of the ingested table. Formats are documented under `docs/`.
//!
//! All JSON floats are written with 17 significant digits, which is enough
//! to recover every `f64` bit for bit.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::andrews::{PhasePolicy, PlaneCurveSamples};
use crate::bishop::Filament;
use crate::error::{Error, Result};
use crate::ingest::{Dataset, StandardizePolicy, StdConvention};
use crate::spectral::TieBlock;

pub const CURVES_SCHEMA_VERSION: u32 = 1;
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Categorical colors, indexed by label order of first appearance and
/// cycling after ten labels.
pub const PALETTE: [[u8; 3]; 10] = [
    [31, 119, 180],
    [255, 127, 14],
    [44, 160, 44],
    [214, 39, 40],
    [148, 103, 189],
    [140, 86, 75],
    [227, 119, 194],
    [127, 127, 127],
    [188, 189, 34],
    [23, 190, 207],
];

fn write_f64_17<W: ?Sized + Write>(writer: &mut W, value: f64) -> io::Result<()> {
    write!(writer, "{value:.16e}")
}

/// Compact JSON with 17-significant-digit floats.
#[derive(Debug, Default, Clone, Copy)]
pub struct ExactFloatFormatter;

impl Formatter for ExactFloatFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write_f64_17(writer, value)
    }
}

/// Indented JSON with 17-significant-digit floats.
pub struct PrettyExactFormatter<'a>(PrettyFormatter<'a>);

impl Default for PrettyExactFormatter<'_> {
    fn default() -> Self {
        Self(PrettyFormatter::new())
    }
}

impl Formatter for PrettyExactFormatter<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write_f64_17(writer, value)
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn end_object_key<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_key(w)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_exact_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, ExactFloatFormatter);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

pub fn to_exact_json_pretty<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, PrettyExactFormatter::default());
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn write_string(path: &Path, contents: &str) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(contents.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

/// Palette index of each curve: labels numbered by first appearance,
/// everything on entry 0 when unlabeled.
pub fn label_indices(labels: Option<&[String]>, count: usize) -> Vec<usize> {
    match labels {
        None => vec![0; count],
        Some(labels) => {
            let mut seen: Vec<&str> = Vec::new();
            labels
                .iter()
                .map(|l| match seen.iter().position(|s| *s == l) {
                    Some(i) => i,
                    None => {
                        seen.push(l);
                        seen.len() - 1
                    }
                })
                .collect()
        }
    }
}

pub fn palette_color(index: usize) -> [u8; 3] {
    PALETTE[index % PALETTE.len()]
}

fn check_labels(labels: Option<&[String]>, count: usize) -> Result<()> {
    match labels {
        Some(l) if l.len() != count => Err(Error::DimensionMismatch {
            expected: count,
            found: l.len(),
        }),
        _ => Ok(()),
    }
}

/// ASCII PLY: one vertex per filament point (position and label color) and
/// one edge per consecutive pair of points within a filament.
pub fn write_ply_to<W: Write>(
    out: &mut W,
    filaments: &[Filament],
    labels: Option<&[String]>,
) -> Result<()> {
    let Some(first) = filaments.first() else {
        return Err(Error::InvalidArgument("no filaments to write".into()));
    };
    let steps = first.steps();
    if filaments.iter().any(|f| f.steps() != steps) {
        return Err(Error::InvalidArgument(
            "all filaments must share one step count".into(),
        ));
    }
    check_labels(labels, filaments.len())?;
    let colors = label_indices(labels, filaments.len());
    let per = steps + 1;
    let vertices = filaments.len() * per;
    let edges = filaments.len() * steps;

    let io = |e| Error::io("<ply>", e);
    write!(
        out,
        "ply\nformat ascii 1.0\nelement vertex {vertices}\n\
         property float x\nproperty float y\nproperty float z\n\
         property uchar red\nproperty uchar green\nproperty uchar blue\n\
         element edge {edges}\nproperty int vertex1\nproperty int vertex2\nend_header\n"
    )
    .map_err(io)?;
    for (f, &c) in filaments.iter().zip(&colors) {
        let [r, g, b] = palette_color(c);
        for p in &f.points {
            writeln!(out, "{} {} {} {r} {g} {b}", p.x as f32, p.y as f32, p.z as f32).map_err(io)?;
        }
    }
    for i in 0..filaments.len() {
        let base = i * per;
        for j in 0..steps {
            writeln!(out, "{} {}", base + j, base + j + 1).map_err(io)?;
        }
    }
    Ok(())
}

pub fn write_ply(path: impl AsRef<Path>, filaments: &[Filament], labels: Option<&[String]>) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    write_ply_to(&mut buf, filaments, labels)?;
    let mut w = create(path)?;
    w.write_all(&buf).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveKind {
    Andrews,
    Filament,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub label: Option<String>,
    pub points: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvesDocument {
    pub schema_version: u32,
    pub kind: CurveKind,
    pub d: usize,
    pub n: usize,
    /// Points per curve.
    pub samples: usize,
    pub curves: Vec<CurveRecord>,
}

/// Either family of curves the pipeline produces.
#[derive(Debug, Clone, Copy)]
pub enum CurveSet<'a> {
    Andrews(&'a [PlaneCurveSamples]),
    Filaments(&'a [Filament]),
}

impl CurvesDocument {
    pub fn new(set: CurveSet<'_>, d: usize, labels: Option<&[String]>) -> Result<Self> {
        let (kind, points): (CurveKind, Vec<Vec<Vec<f64>>>) = match set {
            CurveSet::Andrews(curves) => (
                CurveKind::Andrews,
                curves
                    .iter()
                    .map(|c| c.points.iter().map(|p| p.to_vec()).collect())
                    .collect(),
            ),
            CurveSet::Filaments(fils) => (
                CurveKind::Filament,
                fils.iter()
                    .map(|f| f.points.iter().map(|p| vec![p.x, p.y, p.z]).collect())
                    .collect(),
            ),
        };
        if points.is_empty() {
            return Err(Error::InvalidArgument("no curves to write".into()));
        }
        check_labels(labels, points.len())?;
        let samples = points[0].len();
        let curves = points
            .into_iter()
            .enumerate()
            .map(|(i, points)| CurveRecord {
                label: labels.map(|l| l[i].clone()),
                points,
            })
            .collect::<Vec<_>>();
        Ok(Self {
            schema_version: CURVES_SCHEMA_VERSION,
            kind,
            d,
            n: curves.len(),
            samples,
            curves,
        })
    }
}

pub fn write_curves_json(
    path: impl AsRef<Path>,
    set: CurveSet<'_>,
    d: usize,
    labels: Option<&[String]>,
) -> Result<()> {
    let doc = CurvesDocument::new(set, d, labels)?;
    write_string(path.as_ref(), &(to_exact_json(&doc)? + "\n"))
}

pub fn read_curves_json(path: impl AsRef<Path>) -> Result<CurvesDocument> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Writes the dataset back out with one point per row, so that loading the
/// file reproduces the values exactly.
pub fn write_csv(path: impl AsRef<Path>, ds: &Dataset) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_writer(create(path)?);
    let mut header: Vec<String> = match &ds.feature_names {
        Some(names) => names.clone(),
        None => (0..ds.d()).map(|j| format!("x{}", j + 1)).collect(),
    };
    if ds.labels.is_some() {
        header.push("label".into());
    }
    w.write_record(&header)?;
    for n in 0..ds.n() {
        let mut row: Vec<String> = ds.values.column(n).iter().map(|v| format!("{v:.16e}")).collect();
        if let Some(labels) = &ds.labels {
            row.push(labels[n].clone());
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

impl Default for ToolInfo {
    fn default() -> Self {
        Self {
            name: "filament".into(),
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

/// The parsed command-line configuration, echoed into every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub input: String,
    pub outputs: BTreeMap<String, String>,
    pub label_column: Option<String>,
    pub delimiter: String,
    pub has_header: bool,
    pub samples: usize,
    pub steps: Option<usize>,
    pub standardize: StandardizePolicy,
    pub std_convention: StdConvention,
    pub phases: PhasePolicy,
    pub threads: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub d: usize,
    pub n: usize,
    pub standardization: StandardizePolicy,
    pub std_convention: StdConvention,
    pub constant_rows: Vec<usize>,
    pub labels: Vec<String>,
}

impl DatasetSummary {
    pub fn of(ds: &Dataset) -> Self {
        Self {
            d: ds.d(),
            n: ds.n(),
            standardization: ds.standardization.policy,
            std_convention: ds.standardization.convention,
            constant_rows: ds.standardization.constant_rows.clone(),
            labels: ds.distinct_labels().into_iter().map(str::to_string).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapSummary {
    pub phase_policy: PhasePolicy,
    pub epsilon: f64,
    /// Whether `ε(d) < 1`, i.e. the singular value interval is informative.
    pub epsilon_informative: bool,
    pub singular_values: Vec<f64>,
    pub tie_partition: Vec<TieBlock>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussSummary {
    pub d: usize,
    pub theta_samples: usize,
    pub max_magnitude: f64,
    pub bound: f64,
    pub max_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub mqv: f64,
    pub mqv_closed_form: f64,
    pub mqv_relative_error: f64,
    pub gram_samples: usize,
    pub gram_deviation: f64,
    pub slice_samples: usize,
    pub slice_singular_min: f64,
    pub slice_singular_max: f64,
    pub gauss: GaussSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilamentDiagnostics {
    pub index: usize,
    pub label: Option<String>,
    pub length: f64,
    pub total_square_curvature: f64,
    /// `2‖x‖²`, the value the total square curvature must match.
    pub expected_square_curvature: f64,
    pub identity_residual: f64,
    pub max_orthogonality_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilamentSummary {
    pub count: usize,
    pub steps: usize,
    pub max_length_error: f64,
    pub max_curvature_relative_error: f64,
    pub max_identity_residual: f64,
    pub per_filament: Vec<FilamentDiagnostics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    /// Passes when `value <= tolerance`.
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            passed: value <= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub tool: ToolInfo,
    pub generated_at: String,
    pub config: RunConfig,
    pub dataset: DatasetSummary,
    pub map: MapSummary,
    pub metrics: Metrics,
    pub filaments: Option<FilamentSummary>,
    pub checks: Vec<Check>,
}

impl RunReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub fn write_report(path: impl AsRef<Path>, report: &RunReport) -> Result<()> {
    write_string(path.as_ref(), &(to_exact_json_pretty(report)? + "\n"))
}

pub fn read_report(path: impl AsRef<Path>) -> Result<RunReport> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}
