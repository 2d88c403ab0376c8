//! The `holomux` command-line front end.
//!
//! Every command renders a single document (CSV or JSON) that depends only
//! on its arguments: parallel work is collected in input order, so the
//! output is byte-identical for any `--threads` value. SNR values are given
//! in dB on the command line and converted to linear once, here.

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{Map, Number, Value};

use crate::error::{Error, Result};
use crate::finite_channel::PolarizationConfig;
use crate::geometry::{psi_closed, psi_quadrature_set, Moment, ScenarioGeometry};
use crate::holographic::{delta, eigen_limit};
use crate::multiplexing::{
    snr_rx_from_reference, spectral_efficiency, threshold_reference_pair, thresholds_from_eigs, waterfill,
    LogBase, ThresholdIndex,
};
use crate::regions::{
    boundary_curve, region_map, validation_error, BoundarySearch, CurveMethod, CurvePoint, MapGrid,
};

/// Version of the JSON document layout.
pub const SCHEMA_VERSION: u32 = 1;

/// First line of every CSV document.
pub fn csv_banner() -> String {
    format!("# holomux v{}", env!("CARGO_PKG_VERSION"))
}

/// Evenly spaced values `start:stop:count` (both ends included), or a
/// single number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        match self.count {
            0 => Vec::new(),
            1 => vec![self.start],
            n => (0..n)
                .map(|k| match k {
                    0 => self.start,
                    k if k == n - 1 => self.stop,
                    k => self.start + (self.stop - self.start) * k as f64 / (n - 1) as f64,
                })
                .collect(),
        }
    }
}

fn parse_f64(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("not a number: {s:?}"))?;
    if !v.is_finite() {
        return Err(format!("not a finite number: {s:?}"));
    }
    Ok(v)
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [v] => {
                let v = parse_f64(v)?;
                Ok(GridSpec {
                    start: v,
                    stop: v,
                    count: 1,
                })
            }
            [a, b, n] => {
                let count = n
                    .trim()
                    .parse()
                    .map_err(|_| format!("grid count must be a non-negative integer, got {n:?}"))?;
                Ok(GridSpec {
                    start: parse_f64(a)?,
                    stop: parse_f64(b)?,
                    count,
                })
            }
            _ => Err(format!("expected <value> or <start:stop:count>, got {s:?}")),
        }
    }
}

/// `lo:hi` search range in `D/L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XRange {
    pub lo: f64,
    pub hi: f64,
}

impl FromStr for XRange {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (a, b) = s.split_once(':').ok_or_else(|| format!("expected <lo:hi>, got {s:?}"))?;
        let (lo, hi) = (parse_f64(a)?, parse_f64(b)?);
        if !(lo > 0.0 && lo < hi) {
            return Err(format!("range must satisfy 0 < lo < hi, got {s:?}"));
        }
        Ok(XRange { lo, hi })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LogBaseArg {
    #[value(name = "2")]
    Two,
    #[value(name = "e")]
    E,
}

impl From<LogBaseArg> for LogBase {
    fn from(v: LogBaseArg) -> Self {
        match v {
            LogBaseArg::Two => LogBase::Bits,
            LogBaseArg::E => LogBase::Nats,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "holomux", version, about = "Multiplexing regions of a tri-polarized near-field linear array")]
pub struct Cli {
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: Option<u16>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Everything about one receiver position, as a key/value document.
    Point(PointArgs),
    /// Reference-SNR thresholds over elevations and distances.
    Curves(CurvesArgs),
    /// Exact and approximate boundary distances over elevations.
    Boundary(BoundaryArgs),
    /// Stream-count labels over a (y, z) grid.
    Map(MapArgs),
    /// Finite-array boundaries against the holographic ones.
    Validate(ValidateArgs),
    /// Raw moments, closed form and quadrature.
    Psis(PsisArgs),
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output format [default: json for `point`, csv otherwise].
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PolArgs {
    /// Transmit polarizations.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u8).range(2..=3))]
    pub tpol: u8,
}

#[derive(Debug, Args)]
pub struct PointArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta_deg: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub d_over_l: f64,
    #[arg(long, default_value_t = 20.0, allow_negative_numbers = true)]
    pub snr0_db: f64,
    #[arg(long, value_enum, default_value = "2")]
    pub log_base: LogBaseArg,
    #[command(flatten)]
    pub pol: PolArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CurvesArgs {
    /// Elevations in degrees.
    #[arg(long, default_value = "0:60:4", allow_hyphen_values = true)]
    pub theta_deg: GridSpec,
    #[arg(long, default_value = "0.1:100:1000", allow_hyphen_values = true)]
    pub d_over_l: GridSpec,
    #[command(flatten)]
    pub pol: PolArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct BoundaryArgs {
    #[arg(long, default_value = "-80:80:161", allow_hyphen_values = true)]
    pub theta_deg: GridSpec,
    #[arg(long, default_value_t = 20.0, allow_negative_numbers = true)]
    pub snr0_db: f64,
    /// Root-search range in D/L.
    #[arg(long, default_value = "0.01:10000")]
    pub x_range: XRange,
    #[command(flatten)]
    pub pol: PolArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct MapArgs {
    /// Horizontal axis, units of L.
    #[arg(long, default_value = "-4:4:81", allow_hyphen_values = true)]
    pub y_grid: GridSpec,
    /// Broadside axis, units of L.
    #[arg(long, default_value = "0:4:41", allow_hyphen_values = true)]
    pub z_grid: GridSpec,
    #[arg(long, default_value_t = 20.0, allow_negative_numbers = true)]
    pub snr0_db: f64,
    #[command(flatten)]
    pub pol: PolArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta_deg: f64,
    #[arg(long, default_value_t = 20.0, allow_negative_numbers = true)]
    pub snr0_db: f64,
    /// Restrict to one threshold; both when omitted.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub which: Option<u8>,
    #[arg(long, value_delimiter = ',', default_value = "2,4,8,16,32,64")]
    pub m_list: Vec<usize>,
    #[arg(long, default_value = "0.01:10000")]
    pub x_range: XRange,
    #[command(flatten)]
    pub pol: PolArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct PsisArgs {
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub theta_deg: GridSpec,
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    pub d_over_l: GridSpec,
    /// Draw this many random geometries instead of the grid
    /// (|theta| <= 85 deg, D/L log-uniform on [0.05, 100]).
    #[arg(long)]
    pub samples: Option<usize>,
    /// Seed for `--samples`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Relative tolerance of the quadrature.
    #[arg(long, default_value_t = 1e-11)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// One table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

/// Fixed-width scientific notation with 17 significant digits.
pub fn format_number(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v == f64::INFINITY {
        "inf".to_string()
    } else if v == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{v:.16e}")
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Num(v) if v.is_nan() => Ok(()),
            Cell::Num(v) => f.write_str(&format_number(*v)),
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Text(s) => f.write_str(s),
            Cell::Empty => Ok(()),
        }
    }
}

fn json_number(v: f64) -> Value {
    if v.is_nan() {
        Value::Null
    } else if v.is_infinite() {
        Value::String(format_number(v))
    } else {
        Value::Number(Number::from_str(&format_number(v)).expect("formatted float is valid JSON"))
    }
}

impl Cell {
    fn to_json(&self) -> Value {
        match self {
            Cell::Num(v) => json_number(*v),
            Cell::Int(v) => Value::from(*v),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Empty => Value::Null,
        }
    }
}

/// A rendered command result.
#[derive(Debug, Clone, PartialEq)]
pub enum Document {
    Table {
        command: &'static str,
        columns: Vec<&'static str>,
        rows: Vec<Vec<Cell>>,
    },
    Record {
        command: &'static str,
        fields: Vec<(&'static str, Cell)>,
    },
}

fn render_csv(columns: &[&str], rows: &[Vec<Cell>]) -> Result<String> {
    let mut buf = format!("{}\n", csv_banner()).into_bytes();
    {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(&mut buf);
        let io = |e: csv::Error| Error::numeric(format!("CSV encoding failed: {e}"), None);
        w.write_record(columns).map_err(io)?;
        for row in rows {
            w.write_record(row.iter().map(|c| c.to_string())).map_err(io)?;
        }
        w.flush().map_err(|e| Error::numeric(format!("CSV encoding failed: {e}"), None))?;
    }
    Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
}

fn json_header(command: &str) -> Map<String, Value> {
    let mut doc = Map::new();
    doc.insert("schema_version".into(), Value::from(SCHEMA_VERSION));
    doc.insert("generator".into(), Value::from(format!("holomux v{}", env!("CARGO_PKG_VERSION"))));
    doc.insert("command".into(), Value::from(command));
    doc
}

fn render_json(doc: Map<String, Value>) -> String {
    let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("JSON values serialize");
    s.push('\n');
    s
}

impl Document {
    pub fn render(&self, format: Format) -> Result<String> {
        match (self, format) {
            (Document::Table { columns, rows, .. }, Format::Csv) => render_csv(columns, rows),
            (Document::Record { fields, .. }, Format::Csv) => {
                let rows: Vec<Vec<Cell>> = fields
                    .iter()
                    .map(|(k, v)| vec![Cell::Text(k.to_string()), v.clone()])
                    .collect();
                render_csv(&["key", "value"], &rows)
            }
            (Document::Table { command, columns, rows }, Format::Json) => {
                let mut doc = json_header(command);
                doc.insert("columns".into(), Value::from(columns.clone()));
                let rows: Vec<Value> = rows
                    .iter()
                    .map(|r| Value::Array(r.iter().map(Cell::to_json).collect()))
                    .collect();
                doc.insert("rows".into(), Value::Array(rows));
                Ok(render_json(doc))
            }
            (Document::Record { command, fields }, Format::Json) => {
                let mut doc = json_header(command);
                for (k, v) in fields {
                    doc.insert(k.to_string(), v.to_json());
                }
                Ok(render_json(doc))
            }
        }
    }
}

/// Linear value of a dB quantity.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(v: f64) -> f64 {
    10.0 * v.log10()
}

fn snr0_from_db(db: f64) -> Result<f64> {
    let v = db_to_linear(db);
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::domain(format!("snr0 of {db} dB is out of range")));
    }
    Ok(v)
}

fn join_diagnostics(parts: impl IntoIterator<Item = (&'static str, Option<String>)>) -> Cell {
    let joined: Vec<String> = parts
        .into_iter()
        .filter_map(|(tag, d)| d.map(|d| format!("{tag}: {d}")))
        .collect();
    if joined.is_empty() {
        Cell::Empty
    } else {
        Cell::Text(joined.join("; "))
    }
}

fn cmd_point(a: &PointArgs) -> Result<Document> {
    let pol = PolarizationConfig::from_tpol(a.pol.tpol)?;
    let theta = a.theta_deg.to_radians();
    let snr0 = snr0_from_db(a.snr0_db)?;
    let geom = ScenarioGeometry::normalized(theta, a.d_over_l)?;
    let psi = psi_closed(&geom);
    let eigs = eigen_limit(&geom, pol);
    let thr = thresholds_from_eigs(&eigs, psi.psi2)?;
    let reference = threshold_reference_pair(theta, a.d_over_l, pol)?;
    let snr_rx = snr_rx_from_reference(snr0, &geom)?;
    let alloc = waterfill(&eigs, psi.psi2, snr_rx)?;
    let base = LogBase::from(a.log_base);
    let rate = spectral_efficiency(&eigs, psi.psi2, &alloc, base);
    let n = Cell::Num;
    let fields = vec![
        ("theta_deg", n(a.theta_deg)),
        ("d_over_l", n(a.d_over_l)),
        ("tpol", Cell::Int(pol.t_pol() as i64)),
        ("snr0_db", n(a.snr0_db)),
        ("snr0", n(snr0)),
        ("psi2", n(psi.psi2)),
        ("psi3bar", n(psi.psi3bar)),
        ("psi4", n(psi.psi4)),
        ("psi5bar", n(psi.psi5bar)),
        ("psi6", n(psi.psi6)),
        ("view_angle", n(geom.view_angle())),
        ("delta", n(delta(&geom))),
        ("gamma1", n(eigs.gamma1)),
        ("gamma2", n(eigs.gamma2)),
        ("gamma3", n(eigs.gamma3)),
        ("snr_th1", n(thr.snr1)),
        ("snr_th2", n(thr.snr2)),
        ("snr_th1_db", n(linear_to_db(thr.snr1))),
        ("snr_th2_db", n(linear_to_db(thr.snr2))),
        ("snr0_th1", n(reference.snr1)),
        ("snr0_th2", n(reference.snr2)),
        ("snr0_th1_db", n(linear_to_db(reference.snr1))),
        ("snr0_th2_db", n(linear_to_db(reference.snr2))),
        ("snr_rx", n(snr_rx)),
        ("snr_rx_db", n(linear_to_db(snr_rx))),
        ("n_plus", Cell::Int(alloc.n_plus as i64)),
        ("s1", n(alloc.powers[0])),
        ("s2", n(alloc.powers[1])),
        ("s3", n(alloc.powers[2])),
        ("waterlevel_inv", n(alloc.waterlevel_inv)),
        ("spectral_efficiency", n(rate)),
        (
            "log_base",
            Cell::Text(match base {
                LogBase::Bits => "2".into(),
                LogBase::Nats => "e".into(),
            }),
        ),
    ];
    Ok(Document::Record { command: "point", fields })
}

fn cmd_curves(a: &CurvesArgs) -> Result<Document> {
    let pol = PolarizationConfig::from_tpol(a.pol.tpol)?;
    let thetas = a.theta_deg.values();
    let xs = a.d_over_l.values();
    let pairs: Vec<(f64, f64)> = thetas.iter().flat_map(|&t| xs.iter().map(move |&x| (t, x))).collect();
    let rows = pairs
        .par_iter()
        .map(|&(t, x)| {
            let (th1, th2, diag) = match threshold_reference_pair(t.to_radians(), x, pol) {
                Ok(p) => (linear_to_db(p.snr1), linear_to_db(p.snr2), Cell::Empty),
                Err(e) => (f64::NAN, f64::NAN, Cell::Text(e.to_string())),
            };
            vec![
                Cell::Num(t),
                Cell::Num(x),
                Cell::Num(th1),
                Cell::Num(th2),
                Cell::Int(pol.t_pol() as i64),
                diag,
            ]
        })
        .collect();
    Ok(Document::Table {
        command: "curves",
        columns: vec!["theta_deg", "d_over_l", "snr0_th1_db", "snr0_th2_db", "tpol", "diagnostics"],
        rows,
    })
}

/// `D/L * (sin, cos)`, keeping an unbounded distance on its ray.
fn cartesian(x: f64, theta: f64) -> (f64, f64) {
    let (s, c) = theta.sin_cos();
    let scale = |u: f64| if x.is_infinite() && u == 0.0 { 0.0 } else { x * u };
    (scale(s), scale(c))
}

fn search_from(r: &XRange) -> BoundarySearch {
    BoundarySearch::with_range(r.lo, r.hi)
}

fn cmd_boundary(a: &BoundaryArgs) -> Result<Document> {
    let pol = PolarizationConfig::from_tpol(a.pol.tpol)?;
    let snr0 = snr0_from_db(a.snr0_db)?;
    let degrees = a.theta_deg.values();
    let thetas: Vec<f64> = degrees.iter().map(|d| d.to_radians()).collect();
    let search = search_from(&a.x_range);
    let exact = boundary_curve(&thetas, snr0, pol, CurveMethod::Exact, &search)?;
    let approx = boundary_curve(&thetas, snr0, pol, CurveMethod::Approx, &search)?;
    let value = |p: &CurvePoint| Cell::Num(p.d_over_l);
    let rows = (0..thetas.len())
        .map(|k| {
            let (y1, z1) = cartesian(exact.th1[k].d_over_l, thetas[k]);
            let (y2, z2) = cartesian(exact.th2[k].d_over_l, thetas[k]);
            vec![
                Cell::Num(degrees[k]),
                value(&exact.th1[k]),
                value(&exact.th2[k]),
                value(&approx.th1[k]),
                value(&approx.th2[k]),
                Cell::Num(y1),
                Cell::Num(z1),
                Cell::Num(y2),
                Cell::Num(z2),
                join_diagnostics([
                    ("th1_exact", exact.th1[k].diagnostic.clone()),
                    ("th2_exact", exact.th2[k].diagnostic.clone()),
                    ("th1_approx", approx.th1[k].diagnostic.clone()),
                    ("th2_approx", approx.th2[k].diagnostic.clone()),
                ]),
            ]
        })
        .collect();
    Ok(Document::Table {
        command: "boundary",
        columns: vec![
            "theta_deg",
            "dl_th1_exact",
            "dl_th2_exact",
            "dl_th1_approx",
            "dl_th2_approx",
            "y_th1_exact",
            "z_th1_exact",
            "y_th2_exact",
            "z_th2_exact",
            "diagnostics",
        ],
        rows,
    })
}

fn cmd_map(a: &MapArgs) -> Result<Document> {
    let pol = PolarizationConfig::from_tpol(a.pol.tpol)?;
    let snr0 = snr0_from_db(a.snr0_db)?;
    let grid = MapGrid {
        y_min: a.y_grid.start,
        y_max: a.y_grid.stop,
        ny: a.y_grid.count,
        z_min: a.z_grid.start,
        z_max: a.z_grid.stop,
        nz: a.z_grid.count,
    };
    let map = region_map(&grid, snr0, pol)?;
    let ys = grid.y_axis();
    let zs = grid.z_axis();
    let mut rows = Vec::with_capacity(map.labels.len());
    for (iz, &z) in zs.iter().enumerate() {
        for (iy, &y) in ys.iter().enumerate() {
            rows.push(vec![Cell::Num(y), Cell::Num(z), Cell::Int(map.label(iy, iz) as i64)]);
        }
    }
    Ok(Document::Table {
        command: "map",
        columns: vec!["y_over_l", "z_over_l", "n_plus"],
        rows,
    })
}

fn cmd_validate(a: &ValidateArgs) -> Result<Document> {
    let pol = PolarizationConfig::from_tpol(a.pol.tpol)?;
    let snr0 = snr0_from_db(a.snr0_db)?;
    let theta = a.theta_deg.to_radians();
    ScenarioGeometry::normalized(theta, 1.0)?;
    if a.m_list.is_empty() || a.m_list[0] == 0 || a.m_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("--m-list must be positive and strictly increasing"));
    }
    let search = search_from(&a.x_range);
    let wanted = |w: ThresholdIndex| a.which.map_or(true, |k| k == w.index());
    let column = |w: ThresholdIndex| -> Vec<(Cell, Option<String>)> {
        if !wanted(w) {
            return vec![(Cell::Empty, None); a.m_list.len()];
        }
        match validation_error(&a.m_list, theta, snr0, pol, w, &search) {
            Ok(points) => points
                .into_iter()
                .map(|p| (p.rel_error.map_or(Cell::Empty, Cell::Num), p.diagnostic))
                .collect(),
            Err(e) => vec![(Cell::Empty, Some(e.to_string())); a.m_list.len()],
        }
    };
    let th1 = column(ThresholdIndex::First);
    let th2 = column(ThresholdIndex::Second);
    let rows = a
        .m_list
        .iter()
        .zip(th1.into_iter().zip(th2))
        .map(|(&m, ((e1, d1), (e2, d2)))| {
            vec![
                Cell::Int(m as i64),
                Cell::Num(1.0 / m as f64),
                e1,
                e2,
                join_diagnostics([("th1", d1), ("th2", d2)]),
            ]
        })
        .collect();
    Ok(Document::Table {
        command: "validate",
        columns: vec!["M", "delta_t_over_l", "rel_error_th1", "rel_error_th2", "diagnostics"],
        rows,
    })
}

/// Random geometries for the moment checks: `|theta| <= 85 deg`,
/// `D/L` log-uniform on `[0.05, 100]`. Returns `(theta_deg, d_over_l)`.
pub fn sample_geometries(count: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (0.05f64.ln(), 100f64.ln());
    (0..count)
        .map(|_| {
            let theta = rng.gen_range(-85.0..=85.0);
            let x = rng.gen_range(lo..=hi).exp();
            (theta, x)
        })
        .collect()
}

fn cmd_psis(a: &PsisArgs) -> Result<Document> {
    let points: Vec<(f64, f64)> = match a.samples {
        Some(n) => sample_geometries(n, a.seed),
        None => {
            let xs = a.d_over_l.values();
            a.theta_deg
                .values()
                .iter()
                .flat_map(|&t| xs.iter().map(move |&x| (t, x)))
                .collect()
        }
    };
    let rows = points
        .par_iter()
        .map(|&(t, x)| {
            let mut row = vec![Cell::Num(t), Cell::Num(x)];
            let geom = match ScenarioGeometry::normalized(t.to_radians(), x) {
                Ok(g) => g,
                Err(e) => {
                    row.extend(std::iter::repeat(Cell::Empty).take(11));
                    row.push(Cell::Text(e.to_string()));
                    return row;
                }
            };
            let closed = psi_closed(&geom);
            row.extend(Moment::ALL.iter().map(|&m| Cell::Num(closed.get(m))));
            match psi_quadrature_set(&geom, a.tol) {
                Ok(q) => {
                    row.extend(Moment::ALL.iter().map(|&m| Cell::Num(q.get(m))));
                    let worst = Moment::ALL
                        .iter()
                        .map(|&m| ((closed.get(m) - q.get(m)) / q.get(m)).abs())
                        .fold(0.0, f64::max);
                    row.push(Cell::Num(worst));
                    row.push(Cell::Empty);
                }
                Err(e) => {
                    row.extend(std::iter::repeat(Cell::Empty).take(6));
                    row.push(Cell::Text(e.to_string()));
                }
            }
            row
        })
        .collect();
    Ok(Document::Table {
        command: "psis",
        columns: vec![
            "theta_deg",
            "d_over_l",
            "psi2",
            "psi3bar",
            "psi4",
            "psi5bar",
            "psi6",
            "quad_psi2",
            "quad_psi3bar",
            "quad_psi4",
            "quad_psi5bar",
            "quad_psi6",
            "max_rel_diff",
            "diagnostics",
        ],
        rows,
    })
}

impl Command {
    fn output(&self) -> &OutputArgs {
        match self {
            Command::Point(a) => &a.output,
            Command::Curves(a) => &a.output,
            Command::Boundary(a) => &a.output,
            Command::Map(a) => &a.output,
            Command::Validate(a) => &a.output,
            Command::Psis(a) => &a.output,
        }
    }

    fn default_format(&self) -> Format {
        match self {
            Command::Point(_) => Format::Json,
            _ => Format::Csv,
        }
    }

    /// Runs the command on the current thread pool.
    pub fn evaluate(&self) -> Result<Document> {
        match self {
            Command::Point(a) => cmd_point(a),
            Command::Curves(a) => cmd_curves(a),
            Command::Boundary(a) => cmd_boundary(a),
            Command::Map(a) => cmd_map(a),
            Command::Validate(a) => cmd_validate(a),
            Command::Psis(a) => cmd_psis(a),
        }
    }
}

impl Cli {
    /// Evaluates the command with the requested number of workers and
    /// renders it in the requested format.
    pub fn render(&self) -> Result<String> {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = self.threads {
            builder = builder.num_threads(n as usize);
        }
        let pool = builder
            .build()
            .map_err(|e| Error::numeric(format!("cannot start worker pool: {e}"), None))?;
        let doc = pool.install(|| self.command.evaluate())?;
        doc.render(self.command.output().format.unwrap_or(self.command.default_format()))
    }
}

/// Exit status for a library error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Domain(_) => 2,
        Error::Numeric { .. } => 3,
    }
}

fn error_json(kind: &str, message: &str, best_estimate: Option<f64>) -> String {
    let mut doc = Map::new();
    doc.insert("schema_version".into(), Value::from(SCHEMA_VERSION));
    doc.insert("error".into(), Value::from(kind));
    doc.insert("message".into(), Value::from(message));
    if let Some(v) = best_estimate {
        doc.insert("best_estimate".into(), json_number(v));
    }
    serde_json::to_string(&Value::Object(doc)).expect("JSON values serialize")
}

/// Parses `args`, runs the command and writes the result. Returns the
/// process exit code; failures are reported on `stderr` as one JSON line.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            let _ = writeln!(stderr, "{}", error_json("invalid-arguments", e.to_string().trim(), None));
            return 2;
        }
    };
    let text = match cli.render() {
        Ok(t) => t,
        Err(err) => {
            let (kind, best) = match &err {
                Error::Domain(_) => ("domain", None),
                Error::Numeric { best_estimate, .. } => ("numeric", *best_estimate),
            };
            let _ = writeln!(stderr, "{}", error_json(kind, &err.to_string(), best));
            return exit_code(&err);
        }
    };
    let written = match &cli.command.output().out {
        Some(path) => std::fs::write(path, text.as_bytes()),
        None => stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "{}", error_json("io", &e.to_string(), None));
        return 2;
    }
    0
}
