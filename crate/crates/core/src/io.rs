//! File formats: distribution specs, survey CSVs, lattice exports and JSON
//! outputs.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distributions::{
    kde_from_survey, Bandwidth, Distribution, DistributionError, Family, GridDensity, OrdinalScale, SurveyRecord,
};
use crate::equilibrium::EquilibriumSolution;
use crate::game::{Quadrant, Role, StrategyProfile, TradeType, UtilityPair};
use crate::welfare::WelfareBoundarySet;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IoError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}: {message}")]
    Json { path: String, message: String },
    #[error("{path}: {} malformed row(s): {}", rows.len(), format_rows(rows))]
    BadRows { path: String, rows: Vec<RowError> },
    #[error("{path}: no data rows")]
    Empty { path: String },
    #[error("invalid distribution spec: {0}")]
    Distribution(#[from] DistributionError),
    #[error("invalid distribution spec: {0}")]
    Spec(String),
}

/// A rejected CSV row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowError {
    pub line: u64,
    pub message: String,
}

fn format_rows(rows: &[RowError]) -> String {
    rows.iter()
        .map(|r| format!("line {}: {}", r.line, r.message))
        .collect::<Vec<_>>()
        .join("; ")
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> IoError {
    IoError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

/// `{"family": ..., "params": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionSpec {
    pub family: Family,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub params: serde_json::Value,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct QuadrantParams {
    weights: [f64; 4],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PowerParams {
    alpha: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BandwidthParam {
    Fixed(f64),
    Named(String),
}

/// Parameters of the `kde` family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KdeParams {
    /// Survey CSV, relative to the spec file.
    pub csv: PathBuf,
    #[serde(default = "default_scale")]
    pub scale: [i64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bandwidth: Option<BandwidthParam>,
}

fn default_scale() -> [i64; 2] {
    [1, 7]
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GridParams {
    nx: usize,
    ny: usize,
    values: Vec<f64>,
}

fn params<T: DeserializeOwned>(spec: &DistributionSpec) -> Result<T, IoError> {
    let value = if spec.params.is_null() {
        serde_json::Value::Object(Default::default())
    } else {
        spec.params.clone()
    };
    serde_json::from_value(value).map_err(|e| IoError::Spec(format!("params: {e}")))
}

impl BandwidthParam {
    pub fn resolve(&self) -> Result<Bandwidth, IoError> {
        match self {
            BandwidthParam::Fixed(h) => Ok(Bandwidth::Fixed(*h)),
            BandwidthParam::Named(s) if s == "auto" => Ok(Bandwidth::Auto),
            BandwidthParam::Named(s) => Err(IoError::Spec(format!(
                "params.bandwidth: expected a positive number or \"auto\", got \"{s}\""
            ))),
        }
    }
}

/// Builds a distribution; relative CSV paths resolve against `base_dir`.
/// Grid values are normalized to unit mass.
pub fn build_distribution(spec: &DistributionSpec, base_dir: &Path) -> Result<Distribution, IoError> {
    Ok(match spec.family {
        Family::Uniform => Distribution::uniform(),
        Family::QuadrantConstant => Distribution::quadrant_constant(params::<QuadrantParams>(spec)?.weights)?,
        Family::ProductPower => Distribution::product_power(params::<PowerParams>(spec)?.alpha)?,
        Family::ProductTent => Distribution::product_tent(),
        Family::ProductVee => Distribution::product_vee(),
        Family::Kde => {
            let p: KdeParams = params(spec)?;
            let scale = OrdinalScale::new(p.scale[0], p.scale[1])?;
            let bandwidth = p.bandwidth.as_ref().map(BandwidthParam::resolve).transpose()?.unwrap_or(Bandwidth::Auto);
            let records = read_survey_csv(&base_dir.join(&p.csv), scale)?;
            kde_from_survey(&records, bandwidth, scale)?
        }
        Family::Grid => {
            let p: GridParams = params(spec)?;
            Distribution::Grid(GridDensity::new(p.nx, p.ny, p.values)?.normalized()?)
        }
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, IoError> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    serde_json::from_str(&text).map_err(|e| IoError::Json {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| io_error(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| io_error(path, e))
}

pub fn load_distribution(path: &Path) -> Result<Distribution, IoError> {
    let spec: DistributionSpec = read_json(path)?;
    build_distribution(&spec, path.parent().unwrap_or(Path::new(".")))
}

/// Reads a two-column integer survey CSV with a header row. Every row that
/// fails to parse or lies outside `scale` is reported with its line number.
pub fn read_survey_csv(path: &Path, scale: OrdinalScale) -> Result<Vec<SurveyRecord>, IoError> {
    let file = fs::File::open(path).map_err(|e| io_error(path, e))?;
    parse_survey(file, scale).map_err(|e| match e {
        ParseFailure::Rows(rows) => IoError::BadRows {
            path: path.display().to_string(),
            rows,
        },
        ParseFailure::Empty => IoError::Empty {
            path: path.display().to_string(),
        },
        ParseFailure::Io(m) => IoError::Io {
            path: path.display().to_string(),
            message: m,
        },
    })
}

enum ParseFailure {
    Rows(Vec<RowError>),
    Empty,
    Io(String),
}

fn parse_survey(reader: impl std::io::Read, scale: OrdinalScale) -> Result<Vec<SurveyRecord>, ParseFailure> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = Vec::new();
    let mut bad = Vec::new();
    for row in csv.records() {
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                if line == 0 {
                    return Err(ParseFailure::Io(e.to_string()));
                }
                bad.push(RowError {
                    line,
                    message: e.to_string(),
                });
                continue;
            }
        };
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        if row.len() != 2 {
            bad.push(RowError {
                line,
                message: format!("expected 2 columns, found {}", row.len()),
            });
            continue;
        }
        let mut values = [0i64; 2];
        let mut ok = true;
        for (slot, field) in values.iter_mut().zip(row.iter()) {
            match field.parse::<i64>() {
                Ok(v) if scale.contains(v) => *slot = v,
                Ok(v) => {
                    bad.push(RowError {
                        line,
                        message: format!("response {v} outside the scale [{}, {}]", scale.lo, scale.hi),
                    });
                    ok = false;
                    break;
                }
                Err(_) => {
                    bad.push(RowError {
                        line,
                        message: format!("`{field}` is not an integer"),
                    });
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            records.push(SurveyRecord {
                response_1: values[0],
                response_2: values[1],
            });
        }
    }
    if !bad.is_empty() {
        return Err(ParseFailure::Rows(bad));
    }
    if records.is_empty() {
        return Err(ParseFailure::Empty);
    }
    Ok(records)
}

/// Writes a two-column survey CSV.
pub fn write_survey_csv(path: &Path, records: &[SurveyRecord]) -> Result<(), IoError> {
    let mut out = String::from("response_1,response_2\n");
    for r in records {
        out.push_str(&format!("{},{}\n", r.response_1, r.response_2));
    }
    fs::write(path, out).map_err(|e| io_error(path, e))
}

/// Cell-centre coordinate `k` of a lattice with `resolution` cells per axis.
pub fn cell_center(k: usize, resolution: usize) -> f64 {
    -1.0 + (2 * k + 1) as f64 / resolution as f64
}

/// Writes `value(x, y)` at the cell centres of a `resolution`² lattice over
/// [-1,1]², preceded by `#` metadata lines and the header `x,y,value`. Rows
/// run over y, x varying fastest.
pub fn write_grid<W: Write>(
    out: &mut W,
    resolution: usize,
    kind: &str,
    value: impl Fn(f64, f64) -> f64,
) -> std::io::Result<()> {
    writeln!(out, "# kind: {kind}")?;
    writeln!(out, "# resolution: {resolution}x{resolution}")?;
    writeln!(out, "# bounds: x in [-1, 1], y in [-1, 1]; values at cell centres")?;
    writeln!(out, "x,y,value")?;
    for j in 0..resolution {
        let y = cell_center(j, resolution);
        for i in 0..resolution {
            let x = cell_center(i, resolution);
            writeln!(out, "{x},{y},{}", value(x, y))?;
        }
    }
    Ok(())
}

pub fn write_grid_file(
    path: &Path,
    resolution: usize,
    kind: &str,
    value: impl Fn(f64, f64) -> f64,
) -> Result<(), IoError> {
    let file = fs::File::create(path).map_err(|e| io_error(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    write_grid(&mut out, resolution, kind, value)
        .and_then(|_| out.flush())
        .map_err(|e| io_error(path, e))
}

/// Bit `k - 1` set when `(x, y)` lies in R_k.
pub fn region_mask(theta: &StrategyProfile, x: f64, y: f64) -> u8 {
    TradeType::ALL
        .iter()
        .filter(|t| theta.offers(**t, x, y))
        .fold(0, |m, t| m | 1 << t.slot())
}

/// Welfare mask bits: 1 offers away t2, 2 offers away t1, 4 the t2 offer
/// raises group welfare, 8 the t1 offer does. 3 marks both-direction pairs
/// and 0 pairs that offer nothing.
pub const MASK_GIVES_T2: u8 = 1;
pub const MASK_GIVES_T1: u8 = 2;
pub const MASK_BENEFICIAL_T2: u8 = 4;
pub const MASK_BENEFICIAL_T1: u8 = 8;

pub fn welfare_mask(set: &WelfareBoundarySet, x: f64, y: f64) -> u8 {
    let q = Quadrant::of(x, y);
    let offers = set.profile.offered_roles(x, y);
    let u = UtilityPair { x, y };
    let mut m = 0;
    if offers.gives_t2 {
        m |= MASK_GIVES_T2;
        if set.is_beneficial(TradeType::for_role(Role::GivesT2, q), u) {
            m |= MASK_BENEFICIAL_T2;
        }
    }
    if offers.gives_t1 {
        m |= MASK_GIVES_T1;
        if set.is_beneficial(TradeType::for_role(Role::GivesT1, q), u) {
            m |= MASK_BENEFICIAL_T1;
        }
    }
    m
}

/// Solution file contents: the solution plus the boundary slopes tan θ
/// (`null` for a full quadrant). Further equilibria from a multi-start run
/// are listed after it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    #[serde(flatten)]
    pub solution: EquilibriumSolution,
    pub slopes: [Option<f64>; 8],
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub other_equilibria: Vec<StrategyProfile>,
}

impl SolutionFile {
    pub fn new(solution: EquilibriumSolution) -> SolutionFile {
        let slopes = solution.theta_star.slopes().map(|s| s.is_finite().then_some(s));
        SolutionFile {
            solution,
            slopes,
            other_equilibria: Vec::new(),
        }
    }
}
