//! On-disk formats.
//!
//! Series files are plain text:
//!
//! ```text
//! matseg,matrix,1          matseg,tensor,1
//! n,p,q                    n,r,p1,...,pr
//! <n lines of p*q floats>  <n lines of p1*...*pr floats>
//! ```
//!
//! Matrix observations are written row-major; tensor observations with
//! index 1 varying fastest. Floats use the shortest decimal form that
//! reads back to the same value, so every file round-trips exactly.
//!
//! Truth sidecars and result documents are JSON. Column indices and
//! groups in JSON are 1-based.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use matseg_core::segmentation::{PairScore, Statistic, Thresholds};
use matseg_core::tensor::SequentialResult;
use matseg_core::{Matrix, MatrixSeries, SegmentationConfig, SegmentationResult, TensorSeries, ThresholdMode};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulation::GroundTruth;

const MAGIC: &str = "matseg";
const VERSION: &str = "1";

/// Contents of a series file.
#[derive(Debug, Clone, PartialEq)]
pub enum SeriesInput {
    Matrix(MatrixSeries),
    Tensor(TensorSeries),
}

fn push_row(out: &mut String, values: &[f64]) {
    for (k, x) in values.iter().enumerate() {
        if k > 0 {
            out.push(',');
        }
        // both forms are shortest round-trip; exponents keep extremes short
        let a = x.abs();
        if a != 0.0 && !(1e-5..1e16).contains(&a) { write!(out, "{x:e}") } else { write!(out, "{x}") }
            .expect("writing to a String");
    }
    out.push('\n');
}

pub fn write_matrix_series(series: &MatrixSeries) -> String {
    let mut out = format!("{MAGIC},matrix,{VERSION}\n{},{},{}\n", series.n(), series.p(), series.q());
    for t in 0..series.n() {
        push_row(&mut out, series.observation(t));
    }
    out
}

pub fn write_tensor_series(series: &TensorSeries) -> String {
    let dims: Vec<String> = series.dims().iter().map(ToString::to_string).collect();
    let mut out = format!("{MAGIC},tensor,{VERSION}\n{},{},{}\n", series.n(), series.order(), dims.join(","));
    for t in 0..series.n() {
        push_row(&mut out, series.observation(t));
    }
    out
}

pub fn write_series(input: &SeriesInput) -> String {
    match input {
        SeriesInput::Matrix(s) => write_matrix_series(s),
        SeriesInput::Tensor(s) => write_tensor_series(s),
    }
}

fn parse_usize(field: &str, line: usize, what: &str) -> Result<usize> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::parse(line, format!("{what} must be a non-negative integer, got {field:?}")))
}

fn parse_floats(text: &str, line: usize, expected: usize, out: &mut Vec<f64>) -> Result<()> {
    let mut count = 0;
    for field in text.split(',') {
        let x: f64 = field.trim().parse().map_err(|_| Error::parse(line, format!("not a number: {field:?}")))?;
        if !x.is_finite() {
            return Err(Error::parse(line, format!("non-finite value {field:?}")));
        }
        out.push(x);
        count += 1;
    }
    if count != expected {
        return Err(Error::parse(line, format!("expected {expected} values, found {count}")));
    }
    Ok(())
}

/// Parses a series file. Line numbers in errors are 1-based.
pub fn parse_series(text: &str) -> Result<SeriesInput> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
    let (_, magic) = lines.next().ok_or_else(|| Error::parse(1, "empty file"))?;
    let head: Vec<&str> = magic.split(',').collect();
    let kind = match head.as_slice() {
        [MAGIC, kind @ ("matrix" | "tensor"), VERSION] => *kind,
        [MAGIC, _, VERSION] => return Err(Error::parse(1, "kind must be `matrix` or `tensor`")),
        [MAGIC, _, v] => return Err(Error::parse(1, format!("unsupported version {v}"))),
        _ => {
            return Err(Error::parse(
                1,
                format!("expected header `{MAGIC},matrix,{VERSION}` or `{MAGIC},tensor,{VERSION}`"),
            ))
        }
    };
    let (_, shape) = lines.next().ok_or_else(|| Error::parse(2, "missing shape line"))?;
    let fields: Vec<&str> = shape.split(',').collect();
    let n = parse_usize(fields[0], 2, "n")?;
    let dims: Vec<usize> = if kind == "matrix" {
        if fields.len() != 3 {
            return Err(Error::parse(2, "matrix shape line must be `n,p,q`"));
        }
        vec![parse_usize(fields[1], 2, "p")?, parse_usize(fields[2], 2, "q")?]
    } else {
        if fields.len() < 2 {
            return Err(Error::parse(2, "tensor shape line must be `n,r,p1,...,pr`"));
        }
        let r = parse_usize(fields[1], 2, "r")?;
        if fields.len() != r + 2 {
            return Err(Error::parse(2, format!("declared order {r} but {} dimensions given", fields.len() - 2)));
        }
        fields[2..].iter().map(|f| parse_usize(f, 2, "dimension")).collect::<Result<_>>()?
    };
    let width: usize = dims.iter().product();
    let mut data = Vec::with_capacity(n * width);
    let mut rows = 0;
    for (line, text) in lines {
        if text.trim().is_empty() {
            continue;
        }
        if rows == n {
            return Err(Error::parse(line, format!("more than the declared {n} observations")));
        }
        parse_floats(text, line, width, &mut data)?;
        rows += 1;
    }
    if rows != n {
        return Err(Error::parse(rows + 3, format!("declared {n} observations, found {rows}")));
    }
    Ok(if kind == "matrix" {
        SeriesInput::Matrix(MatrixSeries::new(n, dims[0], dims[1], data)?)
    } else {
        SeriesInput::Tensor(TensorSeries::new(n, dims, data)?)
    })
}

pub fn read_series(path: &Path) -> Result<SeriesInput> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_series(&text)
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// A dense matrix in JSON: shape plus row-major entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixDoc {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl From<&Matrix> for MatrixDoc {
    fn from(m: &Matrix) -> Self {
        MatrixDoc { rows: m.rows(), cols: m.cols(), data: m.as_slice().to_vec() }
    }
}

impl MatrixDoc {
    pub fn to_matrix(&self) -> Result<Matrix> {
        Ok(Matrix::from_vec(self.rows, self.cols, self.data.clone())?)
    }
}

fn one_based(groups: &[Vec<usize>]) -> Vec<Vec<usize>> {
    groups.iter().map(|g| g.iter().map(|c| c + 1).collect()).collect()
}

fn zero_based(groups: &[Vec<usize>], q: usize) -> Result<Vec<Vec<usize>>> {
    groups
        .iter()
        .map(|g| {
            g.iter()
                .map(|&c| {
                    if c == 0 || c > q {
                        Err(Error::parse(0, format!("group member {c} outside 1..={q}")))
                    } else {
                        Ok(c - 1)
                    }
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthDoc {
    pub example: u32,
    pub n: usize,
    pub seed: u64,
    pub a_true: MatrixDoc,
    pub partition: Vec<Vec<usize>>,
}

impl TruthDoc {
    pub fn new(example: u32, n: usize, seed: u64, truth: &GroundTruth) -> Self {
        TruthDoc { example, n, seed, a_true: (&truth.a_true).into(), partition: one_based(&truth.partition) }
    }

    pub fn to_truth(&self) -> Result<GroundTruth> {
        let a_true = self.a_true.to_matrix()?;
        let partition = zero_based(&self.partition, a_true.cols())?;
        Ok(GroundTruth { a_true, partition })
    }
}

/// Echo of the configuration a result was computed with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigDoc {
    pub k0: usize,
    pub m: usize,
    pub c0: f64,
    pub ratio_shift: Option<f64>,
    /// `none`, `fixed:u,v` or `cv:N`.
    pub threshold: String,
    pub eps: f64,
    /// `lagged` or `row-pair`.
    pub statistic: String,
    pub seed: u64,
    /// Whether rows rather than columns were segmented.
    pub rows: bool,
}

pub fn threshold_spec(mode: &ThresholdMode) -> String {
    match mode {
        ThresholdMode::None => "none".into(),
        ThresholdMode::Fixed { u, v } => format!("fixed:{u},{v}"),
        ThresholdMode::CrossValidated { splits } => format!("cv:{splits}"),
    }
}

/// Parses `none`, `fixed:u,v` or `cv:N`.
pub fn parse_threshold(spec: &str) -> std::result::Result<ThresholdMode, String> {
    let bad = || format!("threshold must be `none`, `fixed:u,v` or `cv:N`, got {spec:?}");
    if spec == "none" {
        return Ok(ThresholdMode::None);
    }
    if let Some(rest) = spec.strip_prefix("fixed:") {
        let (u, v) = rest.split_once(',').ok_or_else(bad)?;
        let u: f64 = u.trim().parse().map_err(|_| bad())?;
        let v: f64 = v.trim().parse().map_err(|_| bad())?;
        return Ok(ThresholdMode::Fixed { u, v });
    }
    if let Some(rest) = spec.strip_prefix("cv:") {
        let splits = rest.trim().parse().map_err(|_| bad())?;
        return Ok(ThresholdMode::CrossValidated { splits });
    }
    Err(bad())
}

pub fn statistic_name(s: Statistic) -> &'static str {
    match s {
        Statistic::Lagged => "lagged",
        Statistic::RowPair => "row-pair",
    }
}

impl ConfigDoc {
    pub fn new(cfg: &SegmentationConfig, rows: bool) -> Self {
        ConfigDoc {
            k0: cfg.k0,
            m: cfg.m,
            c0: cfg.c0,
            ratio_shift: cfg.ratio_shift,
            threshold: threshold_spec(&cfg.threshold),
            eps: cfg.eps,
            statistic: statistic_name(cfg.statistic).into(),
            seed: cfg.seed,
            rows,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreDoc {
    pub i: usize,
    pub j: usize,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdsDoc {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

/// One segmentation outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentDoc {
    pub gamma: MatrixDoc,
    pub standardizer: MatrixDoc,
    pub groups: Vec<Vec<usize>>,
    pub scores: Vec<ScoreDoc>,
    pub selected_edges: usize,
    pub thresholds: Option<ThresholdsDoc>,
}

impl From<&SegmentationResult> for SegmentDoc {
    fn from(r: &SegmentationResult) -> Self {
        SegmentDoc {
            gamma: (&r.gamma).into(),
            standardizer: (&r.standardizer).into(),
            groups: one_based(&r.groups),
            scores: r.scores.iter().map(|s| ScoreDoc { i: s.i + 1, j: s.j + 1, score: s.score }).collect(),
            selected_edges: r.selected_edges,
            thresholds: r.thresholds.as_ref().map(|t| ThresholdsDoc { u: t.u.clone(), v: t.v.clone() }),
        }
    }
}

impl SegmentDoc {
    pub fn gamma(&self) -> Result<Matrix> {
        self.gamma.to_matrix()
    }

    pub fn standardizer(&self) -> Result<Matrix> {
        self.standardizer.to_matrix()
    }

    pub fn groups(&self) -> Result<Vec<Vec<usize>>> {
        zero_based(&self.groups, self.gamma.cols)
    }

    pub fn scores(&self) -> Vec<PairScore> {
        self.scores.iter().map(|s| PairScore { i: s.i - 1, j: s.j - 1, score: s.score }).collect()
    }

    pub fn thresholds(&self) -> Option<Thresholds> {
        self.thresholds.as_ref().map(|t| Thresholds { u: t.u.clone(), v: t.v.clone() })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeDoc {
    pub mode: usize,
    /// Absent when the mode has dimension 1 and was skipped.
    pub result: Option<SegmentDoc>,
}

/// What `segment` writes: a single result for matrix input, one entry
/// per mode for tensor input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub config: ConfigDoc,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub result: Option<SegmentDoc>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub modes: Option<Vec<ModeDoc>>,
}

impl ResultDocument {
    pub fn matrix(cfg: &SegmentationConfig, rows: bool, r: &SegmentationResult) -> Self {
        ResultDocument { config: ConfigDoc::new(cfg, rows), result: Some(r.into()), modes: None }
    }

    pub fn tensor(cfg: &SegmentationConfig, r: &SequentialResult) -> Self {
        let modes =
            r.modes.iter().map(|m| ModeDoc { mode: m.mode, result: m.outcome.as_ref().ok().map(Into::into) }).collect();
        ResultDocument { config: ConfigDoc::new(cfg, false), result: None, modes: Some(modes) }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("result documents serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::parse(e.line(), e.to_string()))
    }
}
