//! File formats: stored piecewise solutions (JSON), trajectories (CSV) and
//! run reports (JSON plus a CSV summary).
//!
//! Doubles are written in their shortest round-trip form, so every stored
//! number reads back bitwise identical.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::basis::{BasisForm, RbfSegmentBasis};
use crate::bench::RunReport;
use crate::error::{Error, Result};
use crate::solver::{PiecewiseSolution, SolveStats, TrainedSegment};
use crate::trial::SegmentSolution;

pub const SOLUTION_SCHEMA_VERSION: u32 = 1;
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Shortest text that parses back to exactly `v`.
pub fn format_f64(v: f64) -> String {
    format!("{v:?}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SegmentRecord {
    x_start: f64,
    x_stop: f64,
    width: f64,
    basis_form: BasisForm,
    alpha: Vec<f64>,
    centers: Vec<f64>,
    /// Indexed `[i][j]`: component, then hidden node.
    biases: Vec<Vec<f64>>,
    inv_sq_widths: Vec<Vec<f64>>,
    weights: Vec<Vec<f64>>,
    iterations: usize,
    residual_norm: f64,
    collocation_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct StatsRecord {
    attempts: usize,
    rejected: usize,
    gauss_newton_iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SolutionFile {
    schema_version: u32,
    problem: String,
    params: BTreeMap<String, f64>,
    x0: f64,
    x_end: f64,
    dim: usize,
    stats: StatsRecord,
    segments: Vec<SegmentRecord>,
}

/// A piecewise solution together with the problem it solves.
#[derive(Debug, Clone, PartialEq)]
pub struct StoredSolution {
    pub problem: String,
    pub params: BTreeMap<String, f64>,
    pub solution: PiecewiseSolution,
}

fn columns(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.column_iter().map(|c| c.iter().copied().collect()).collect()
}

fn from_columns(cols: &[Vec<f64>], h: usize, what: &str) -> Result<DMatrix<f64>> {
    if cols.is_empty() || cols.iter().any(|c| c.len() != h) {
        return Err(Error::Format(format!("{what} must have {h} entries per component")));
    }
    let flat: Vec<f64> = cols.iter().flatten().copied().collect();
    Ok(DMatrix::from_vec(h, cols.len(), flat))
}

fn segment_record(s: &TrainedSegment) -> SegmentRecord {
    let b = s.solution.basis();
    SegmentRecord {
        x_start: b.x_start(),
        x_stop: s.solution.x_stop(),
        width: b.width(),
        basis_form: b.form(),
        alpha: s.solution.alpha().to_vec(),
        centers: b.centers().to_vec(),
        biases: columns(b.biases()),
        inv_sq_widths: columns(b.inv_sq_widths()),
        weights: columns(s.solution.weights()),
        iterations: s.iterations,
        residual_norm: s.residual_norm,
        collocation_points: s.collocation_points,
    }
}

fn segment_from_record(r: SegmentRecord) -> Result<TrainedSegment> {
    let h = r.centers.len();
    let bad = |e: Error| Error::Format(format!("segment starting at {}: {e}", r.x_start));
    let basis = RbfSegmentBasis::from_parts(
        r.x_start,
        r.width,
        r.centers.clone(),
        from_columns(&r.biases, h, "biases")?,
        from_columns(&r.inv_sq_widths, h, "inv_sq_widths")?,
    )
    .map_err(bad)?
    .with_form(r.basis_form);
    let weights = from_columns(&r.weights, h, "weights")?;
    let solution = SegmentSolution::new(basis, r.x_stop, r.alpha.clone(), weights).map_err(bad)?;
    Ok(TrainedSegment {
        solution,
        iterations: r.iterations,
        residual_norm: r.residual_norm,
        collocation_points: r.collocation_points,
    })
}

pub fn solution_to_json(problem: &str, params: &BTreeMap<String, f64>, sol: &PiecewiseSolution) -> Result<String> {
    let stats = sol.stats();
    let file = SolutionFile {
        schema_version: SOLUTION_SCHEMA_VERSION,
        problem: problem.to_string(),
        params: params.clone(),
        x0: sol.x0(),
        x_end: sol.x_end(),
        dim: sol.dim(),
        stats: StatsRecord {
            attempts: stats.attempts,
            rejected: stats.rejected,
            gauss_newton_iterations: stats.gauss_newton_iterations,
        },
        segments: sol.segments().iter().map(segment_record).collect(),
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

pub fn solution_from_json(text: &str) -> Result<StoredSolution> {
    let file: SolutionFile = serde_json::from_str(text)?;
    if file.schema_version != SOLUTION_SCHEMA_VERSION {
        return Err(Error::Format(format!(
            "unsupported solution schema version {} (expected {SOLUTION_SCHEMA_VERSION})",
            file.schema_version
        )));
    }
    let segments = file
        .segments
        .into_iter()
        .map(segment_from_record)
        .collect::<Result<Vec<_>>>()?;
    let stats = SolveStats {
        attempts: file.stats.attempts,
        rejected: file.stats.rejected,
        gauss_newton_iterations: file.stats.gauss_newton_iterations,
    };
    let solution = PiecewiseSolution::new(segments, stats).map_err(|e| Error::Format(e.to_string()))?;
    if solution.dim() != file.dim || solution.x0() != file.x0 || solution.x_end() != file.x_end {
        return Err(Error::Format("header does not match the stored segments".into()));
    }
    Ok(StoredSolution {
        problem: file.problem,
        params: file.params,
        solution,
    })
}

pub fn save_solution(path: &Path, problem: &str, params: &BTreeMap<String, f64>, sol: &PiecewiseSolution) -> Result<()> {
    let text = solution_to_json(problem, params, sol)?;
    std::fs::write(path, text)?;
    Ok(())
}

pub fn load_solution(path: &Path) -> Result<StoredSolution> {
    let mut text = String::new();
    BufReader::new(File::open(path)?).read_to_string(&mut text)?;
    solution_from_json(&text)
}

/// Writes `t,y1,...,ym` with a header row. `rows[k]` holds the state at
/// `xs[k]`.
pub fn write_trajectory_csv<W: Write>(out: W, xs: &[f64], rows: &[Vec<f64>]) -> Result<()> {
    if xs.len() != rows.len() {
        return Err(Error::Argument(format!("{} abscissae but {} rows", xs.len(), rows.len())));
    }
    let m = rows.first().map_or(0, Vec::len);
    let mut w = csv::Writer::from_writer(out);
    let header: Vec<String> = std::iter::once("t".to_string())
        .chain((1..=m).map(|i| format!("y{i}")))
        .collect();
    w.write_record(&header)?;
    for (x, row) in xs.iter().zip(rows) {
        if row.len() != m {
            return Err(Error::Argument("rows have different lengths".into()));
        }
        w.write_record(std::iter::once(format_f64(*x)).chain(row.iter().map(|v| format_f64(*v))))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads back a trajectory CSV: abscissae and rows.
pub fn read_trajectory_csv<R: Read>(input: R) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.get(0) != Some("t") {
        return Err(Error::Format("trajectory csv must start with a `t` column".into()));
    }
    let parse = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::Format(format!("not a number: `{s}`")))
    };
    let (mut xs, mut rows) = (Vec::new(), Vec::new());
    for rec in r.records() {
        let rec = rec?;
        xs.push(parse(&rec[0])?);
        rows.push(rec.iter().skip(1).map(parse).collect::<Result<Vec<_>>>()?);
    }
    Ok((xs, rows))
}

/// Trajectory as JSON: `{"t": [...], "y": [[...], ...]}`.
pub fn write_trajectory_json<W: Write>(out: W, xs: &[f64], rows: &[Vec<f64>]) -> Result<()> {
    #[derive(Serialize)]
    struct Traj<'a> {
        t: &'a [f64],
        y: &'a [Vec<f64>],
    }
    serde_json::to_writer(out, &Traj { t: xs, y: rows })?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct ReportFile {
    schema_version: u32,
    #[serde(flatten)]
    report: RunReport,
}

pub fn report_to_json(report: &RunReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(&ReportFile {
        schema_version: REPORT_SCHEMA_VERSION,
        report: report.clone(),
    })?)
}

pub fn report_from_json(text: &str) -> Result<RunReport> {
    let file: ReportFile = serde_json::from_str(text)?;
    if file.schema_version != REPORT_SCHEMA_VERSION {
        return Err(Error::Format(format!("unsupported report schema version {}", file.schema_version)));
    }
    Ok(file.report)
}

pub fn write_report(path: &Path, report: &RunReport) -> Result<()> {
    std::fs::write(path, report_to_json(report)?)?;
    Ok(())
}

pub const SUMMARY_HEADER: [&str; 16] = [
    "problem",
    "params",
    "method",
    "tol",
    "seed",
    "status",
    "component",
    "l2",
    "linf",
    "mae",
    "n_points",
    "n_segments",
    "time_median",
    "time_min",
    "time_max",
    "error",
];

fn params_text(params: &BTreeMap<String, f64>) -> String {
    params
        .iter()
        .map(|(k, v)| format!("{k}={}", format_f64(*v)))
        .collect::<Vec<_>>()
        .join(";")
}

/// One row per (report, component); a failed report gets a single row with
/// empty metric columns.
pub fn write_summary_csv<W: Write>(out: W, reports: &[RunReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(out));
    w.write_record(SUMMARY_HEADER)?;
    for r in reports {
        let status = if r.is_ok() { "ok" } else { "failed" };
        let (med, min, max) = r
            .times
            .map(|t| (format_f64(t.median), format_f64(t.min), format_f64(t.max)))
            .unwrap_or_default();
        let common = |component: String, l2: String, linf: String, mae: String| {
            vec![
                r.problem.clone(),
                params_text(&r.params),
                r.method.to_string(),
                format_f64(r.tol),
                r.seed.to_string(),
                status.to_string(),
                component,
                l2,
                linf,
                mae,
                r.n_points.to_string(),
                r.n_segments.to_string(),
                med.clone(),
                min.clone(),
                max.clone(),
                r.error.clone().unwrap_or_default(),
            ]
        };
        match &r.metrics {
            Some(m) => {
                for (i, c) in m.per_component.iter().enumerate() {
                    w.write_record(common(
                        format!("y{}", i + 1),
                        format_f64(c.l2),
                        format_f64(c.linf),
                        format_f64(c.mae),
                    ))?;
                }
            }
            None => w.write_record(common(String::new(), String::new(), String::new(), String::new()))?,
        }
    }
    w.flush()?;
    Ok(())
}
