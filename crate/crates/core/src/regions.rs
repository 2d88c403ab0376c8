//! Multiplexing-region boundaries, threshold curves, region maps and the
//! finite-array validation study.
//!
//! A boundary is a distance `x = D/L` where the reference-SNR threshold
//! `SNR0^(i)(theta, x)` equals the given `snr0`. Crossings are located by a
//! sign scan over a logarithmic grid followed by bisection, so threshold
//! functions with several crossings are reported in full.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::asymptotics::{boundary_approx, ApproxBoundary, BROADSIDE_BRANCH};
use crate::error::{Error, Result};
use crate::finite_channel::{scaled_gram, PolarizationConfig};
use crate::geometry::{harmonic_square_mean, FiniteArray, ScenarioGeometry};
use crate::multiplexing::{classify, threshold_reference, thresholds_from_eigs, ThresholdIndex};

/// Search range and resolution for [`boundary_solve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundarySearch {
    pub x_min: f64,
    pub x_max: f64,
    pub scan_points: usize,
    pub rel_tol: f64,
}

impl Default for BoundarySearch {
    fn default() -> Self {
        BoundarySearch {
            x_min: 1e-2,
            x_max: 1e4,
            scan_points: 512,
            rel_tol: 1e-10,
        }
    }
}

impl BoundarySearch {
    pub fn with_range(x_min: f64, x_max: f64) -> Self {
        BoundarySearch {
            x_min,
            x_max,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.x_min > 0.0 && self.x_min < self.x_max && self.x_max.is_finite()) {
            return Err(Error::domain(format!(
                "search range must satisfy 0 < x_min < x_max, got [{}, {}]",
                self.x_min, self.x_max
            )));
        }
        if self.scan_points < 2 {
            return Err(Error::domain("scan needs at least two points"));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::domain(format!("bisection tolerance must lie in (0, 1), got {}", self.rel_tol)));
        }
        Ok(())
    }

    fn grid(&self) -> Vec<f64> {
        let (lo, hi) = (self.x_min.ln(), self.x_max.ln());
        let last = (self.scan_points - 1) as f64;
        (0..self.scan_points)
            .map(|k| match k {
                0 => self.x_min,
                k if k == self.scan_points - 1 => self.x_max,
                k => (lo + (hi - lo) * k as f64 / last).exp(),
            })
            .collect()
    }
}

/// Solution of a boundary search.
#[derive(Debug, Clone, PartialEq)]
pub struct Boundary {
    /// Ascending distances where the threshold crosses `snr0`.
    pub crossings: Vec<f64>,
    /// The stream count stays achievable beyond the search range.
    pub unbounded: bool,
}

impl Boundary {
    /// Outer edge of the region: `+inf` when unbounded, the last crossing
    /// otherwise, `None` when the region is empty within the search range.
    pub fn outermost(&self) -> Option<f64> {
        if self.unbounded {
            Some(f64::INFINITY)
        } else {
            self.crossings.last().copied()
        }
    }

    pub fn is_empty_region(&self) -> bool {
        !self.unbounded && self.crossings.is_empty()
    }
}

/// `lim_{D/L -> inf} SNR0^(i)(theta, D/L)`; `+inf` when the threshold grows
/// without bound.
pub fn threshold_limit(theta: f64, pol: PolarizationConfig, which: ThresholdIndex) -> f64 {
    match (pol, which) {
        (PolarizationConfig::ThreeByThree, ThresholdIndex::First) => PI / 12.0 * theta.cos().powi(2),
        (PolarizationConfig::TwoByThree, ThresholdIndex::First) if theta.abs() < BROADSIDE_BRANCH => PI / 6.0,
        _ => f64::INFINITY,
    }
}

fn check_snr0(snr0: f64) -> Result<()> {
    if !(snr0.is_finite() && snr0 > 0.0) {
        return Err(Error::domain(format!("reference SNR must be positive, got {snr0}")));
    }
    Ok(())
}

/// Locates every crossing of `threshold(x) = snr0` on the search range.
/// `limit` decides what happens past `x_max` when the threshold is still
/// below `snr0` there.
pub fn solve_crossings<F>(threshold: F, snr0: f64, limit: f64, search: &BoundarySearch) -> Result<Boundary>
where
    F: Fn(f64) -> Result<f64>,
{
    search.validate()?;
    check_snr0(snr0)?;
    let gap = |x: f64| -> Result<f64> {
        let g = threshold(x)? - snr0;
        if g.is_nan() {
            return Err(Error::numeric(format!("threshold is NaN at D/L = {x}"), None));
        }
        Ok(g)
    };
    let grid = search.grid();
    let values = grid.iter().map(|&x| gap(x)).collect::<Result<Vec<_>>>()?;
    if values.iter().all(|&g| g == 0.0) {
        return Err(Error::numeric(
            format!("threshold equals snr0 = {snr0} over the whole search range"),
            None,
        ));
    }
    // A point where the threshold equals snr0 belongs to the active side.
    let achievable = |g: f64| g <= 0.0;

    let mut crossings = Vec::new();
    for k in 0..grid.len() - 1 {
        if achievable(values[k]) == achievable(values[k + 1]) {
            continue;
        }
        let (mut lo, mut hi) = (grid[k], grid[k + 1]);
        let lo_side = achievable(values[k]);
        while hi - lo > search.rel_tol * lo {
            let mid = (lo * hi).sqrt();
            let mid = if mid > lo && mid < hi { mid } else { 0.5 * (lo + hi) };
            if mid <= lo || mid >= hi {
                break;
            }
            if achievable(gap(mid)?) == lo_side {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        crossings.push(0.5 * (lo + hi));
    }

    let tail_achievable = achievable(*values.last().expect("grid is non-empty"));
    let unbounded = if tail_achievable {
        if limit <= snr0 {
            true
        } else {
            return Err(Error::numeric(
                format!(
                    "threshold is still below snr0 = {snr0} at D/L = {}; crossing lies beyond the search range",
                    search.x_max
                ),
                Some(search.x_max),
            ));
        }
    } else {
        false
    };
    Ok(Boundary { crossings, unbounded })
}

/// Boundary distances of the holographic region for stream `which + 1`.
pub fn boundary_solve(
    theta: f64,
    snr0: f64,
    pol: PolarizationConfig,
    which: ThresholdIndex,
    search: &BoundarySearch,
) -> Result<Boundary> {
    ScenarioGeometry::normalized(theta, 1.0)?;
    solve_crossings(
        |x| threshold_reference(theta, x, pol, which),
        snr0,
        threshold_limit(theta, pol, which),
        search,
    )
}

/// Reference-SNR threshold of a `2M+1` element array spanning `[-L, L]`,
/// normalized by the finite-array received SNR at the reference point.
/// A mode whose eigenvalue is not positive is treated as unreachable.
pub fn finite_m_threshold_reference(
    theta: f64,
    d_over_l: f64,
    pol: PolarizationConfig,
    which: ThresholdIndex,
    half_count: usize,
) -> Result<f64> {
    let arr = FiniteArray::spanning(half_count, 1.0)?;
    let geom = ScenarioGeometry::normalized(theta, d_over_l)?;
    let eigs = scaled_gram(&arr, &geom, pol)?.eigenvalues()?;
    let needed = match which {
        ThresholdIndex::First => eigs.gamma2,
        ThresholdIndex::Second => eigs.gamma3,
    };
    if !(needed > 0.0) {
        return Ok(f64::INFINITY);
    }
    let s = harmonic_square_mean(&arr, &geom)?;
    let reference = harmonic_square_mean(&arr, &ScenarioGeometry::normalized(0.0, 1.0)?)?;
    let thr = thresholds_from_eigs(&eigs, s)?;
    Ok(thr.get(which) * reference / s)
}

/// Boundary distances for a finite array of `2M+1` elements with spacing
/// `L/M`. Past the search range the holographic limit decides finiteness.
pub fn finite_m_boundary(
    theta: f64,
    snr0: f64,
    pol: PolarizationConfig,
    which: ThresholdIndex,
    half_count: usize,
    search: &BoundarySearch,
) -> Result<Boundary> {
    if half_count == 0 {
        return Err(Error::domain("finite array needs M >= 1"));
    }
    ScenarioGeometry::normalized(theta, 1.0)?;
    solve_crossings(
        |x| finite_m_threshold_reference(theta, x, pol, which, half_count),
        snr0,
        threshold_limit(theta, pol, which),
        search,
    )
}

/// How a [`BoundaryCurve`] was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveMethod {
    Exact,
    Approx,
    FiniteM(usize),
}

impl CurveMethod {
    pub fn tag(&self) -> String {
        match self {
            CurveMethod::Exact => "exact-holographic".to_string(),
            CurveMethod::Approx => "approx".to_string(),
            CurveMethod::FiniteM(m) => format!("finite-M={m}"),
        }
    }
}

/// One boundary distance, `NaN` with a diagnostic when unavailable.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub d_over_l: f64,
    pub diagnostic: Option<String>,
}

impl CurvePoint {
    fn failed(message: impl Into<String>) -> Self {
        CurvePoint {
            d_over_l: f64::NAN,
            diagnostic: Some(message.into()),
        }
    }

    fn from_boundary(b: Result<Boundary>) -> Self {
        match b {
            Err(e) => CurvePoint::failed(e.to_string()),
            Ok(b) => match b.outermost() {
                None => CurvePoint::failed("no region within the search range"),
                Some(x) => CurvePoint {
                    d_over_l: x,
                    diagnostic: (b.crossings.len() > 1)
                        .then(|| format!("{} crossings; outermost reported", b.crossings.len())),
                },
            },
        }
    }

    fn from_approx(b: Result<ApproxBoundary>) -> Self {
        match b {
            Err(e) => CurvePoint::failed(e.to_string()),
            Ok(ApproxBoundary::BeyondApproximation) => CurvePoint::failed("beyond approximation"),
            Ok(b) => CurvePoint {
                d_over_l: b.as_f64(),
                diagnostic: None,
            },
        }
    }
}

/// Both boundaries over a grid of elevations.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCurve {
    pub theta_grid: Vec<f64>,
    pub th1: Vec<CurvePoint>,
    pub th2: Vec<CurvePoint>,
    pub method: CurveMethod,
}

fn check_theta_grid(theta_grid: &[f64]) -> Result<()> {
    if theta_grid.is_empty() {
        return Err(Error::domain("elevation grid is empty"));
    }
    if theta_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::domain("elevation grid must be strictly increasing"));
    }
    for &t in theta_grid {
        if !(t.abs() < std::f64::consts::FRAC_PI_2) {
            return Err(Error::domain(format!("elevation {t} outside (-pi/2, pi/2)")));
        }
    }
    Ok(())
}

/// Boundary point for one elevation and one threshold.
pub fn boundary_point(
    theta: f64,
    snr0: f64,
    pol: PolarizationConfig,
    which: ThresholdIndex,
    method: CurveMethod,
    search: &BoundarySearch,
) -> CurvePoint {
    match method {
        CurveMethod::Exact => CurvePoint::from_boundary(boundary_solve(theta, snr0, pol, which, search)),
        CurveMethod::Approx => CurvePoint::from_approx(boundary_approx(theta, snr0, pol, which)),
        CurveMethod::FiniteM(m) => {
            CurvePoint::from_boundary(finite_m_boundary(theta, snr0, pol, which, m, search))
        }
    }
}

/// Boundaries over `theta_grid`, evaluated in parallel and assembled in
/// grid order.
pub fn boundary_curve(
    theta_grid: &[f64],
    snr0: f64,
    pol: PolarizationConfig,
    method: CurveMethod,
    search: &BoundarySearch,
) -> Result<BoundaryCurve> {
    check_theta_grid(theta_grid)?;
    check_snr0(snr0)?;
    search.validate()?;
    let points: Vec<(CurvePoint, CurvePoint)> = theta_grid
        .par_iter()
        .map(|&theta| {
            (
                boundary_point(theta, snr0, pol, ThresholdIndex::First, method, search),
                boundary_point(theta, snr0, pol, ThresholdIndex::Second, method, search),
            )
        })
        .collect();
    let (th1, th2) = points.into_iter().unzip();
    Ok(BoundaryCurve {
        theta_grid: theta_grid.to_vec(),
        th1,
        th2,
        method,
    })
}

/// Rectangular grid in the receiver plane, in units of `L`. The array lies
/// on the `y` axis between `-1` and `1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapGrid {
    pub y_min: f64,
    pub y_max: f64,
    pub ny: usize,
    pub z_min: f64,
    pub z_max: f64,
    pub nz: usize,
}

fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    }
}

impl MapGrid {
    pub fn y_axis(&self) -> Vec<f64> {
        axis(self.y_min, self.y_max, self.ny)
    }

    pub fn z_axis(&self) -> Vec<f64> {
        axis(self.z_min, self.z_max, self.nz)
    }

    fn validate(&self) -> Result<()> {
        let ok = [self.y_min, self.y_max, self.z_min, self.z_max].iter().all(|v| v.is_finite())
            && self.y_min <= self.y_max
            && self.z_min <= self.z_max;
        if !ok {
            return Err(Error::domain("map extents must be finite with min <= max"));
        }
        Ok(())
    }
}

/// Stream-count labels over a [`MapGrid`]; `0` marks cells where no valid
/// geometry exists (on or too close to the array axis).
#[derive(Debug, Clone, PartialEq)]
pub struct RegionMap {
    pub grid: MapGrid,
    /// `z`-major: `labels[iz * ny + iy]`.
    pub labels: Vec<u8>,
    pub pol: PolarizationConfig,
    pub snr0: f64,
}

impl RegionMap {
    pub fn label(&self, iy: usize, iz: usize) -> u8 {
        self.labels[iz * self.grid.ny + iy]
    }
}

/// Geometry of the receiver at `(y, z)` (units of `L`, `L = 1`). The map
/// is mirrored across the array axis, so `z < 0` uses `|z|`.
pub fn cell_geometry(y: f64, z: f64) -> Result<ScenarioGeometry> {
    let z = z.abs();
    ScenarioGeometry::new(1.0, y.hypot(z), y.atan2(z))
}

/// Stream count at one receiver position; `0` for invalid cells.
pub fn cell_label(y: f64, z: f64, snr0: f64, pol: PolarizationConfig) -> u8 {
    cell_geometry(y, z)
        .and_then(|g| classify(&g, snr0, pol))
        .unwrap_or(0)
}

/// Labels every cell of `grid`, in parallel over rows.
pub fn region_map(grid: &MapGrid, snr0: f64, pol: PolarizationConfig) -> Result<RegionMap> {
    grid.validate()?;
    check_snr0(snr0)?;
    let ys = grid.y_axis();
    let zs = grid.z_axis();
    let labels: Vec<u8> = zs
        .par_iter()
        .flat_map_iter(|&z| ys.iter().map(move |&y| cell_label(y, z, snr0, pol)))
        .collect();
    Ok(RegionMap {
        grid: *grid,
        labels,
        pol,
        snr0,
    })
}

/// Stream counts along a ray of fixed elevation.
#[derive(Debug, Clone, PartialEq)]
pub struct RayProfile {
    pub d_over_l: Vec<f64>,
    pub labels: Vec<u8>,
    /// Indices `k` where `labels[k] > labels[k - 1]` although distance grew.
    pub violations: Vec<usize>,
}

pub fn ray_profile(theta: f64, d_over_l: &[f64], snr0: f64, pol: PolarizationConfig) -> Result<RayProfile> {
    check_snr0(snr0)?;
    if d_over_l.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::domain("ray distances must be strictly increasing"));
    }
    let labels = d_over_l
        .iter()
        .map(|&x| classify(&ScenarioGeometry::normalized(theta, x)?, snr0, pol))
        .collect::<Result<Vec<u8>>>()?;
    let violations = (1..labels.len()).filter(|&k| labels[k] > labels[k - 1]).collect();
    Ok(RayProfile {
        d_over_l: d_over_l.to_vec(),
        labels,
        violations,
    })
}

/// Relative gap between the finite-array and holographic boundaries for one
/// `M`. `None` when either side is unbounded or missing.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationPoint {
    pub half_count: usize,
    pub rel_error: Option<f64>,
    pub diagnostic: Option<String>,
}

/// `|finite_m_boundary - boundary_solve| / boundary_solve` for each `M`,
/// comparing outermost crossings.
pub fn validation_error(
    m_list: &[usize],
    theta: f64,
    snr0: f64,
    pol: PolarizationConfig,
    which: ThresholdIndex,
    search: &BoundarySearch,
) -> Result<Vec<ValidationPoint>> {
    if m_list.is_empty() {
        return Err(Error::domain("M list is empty"));
    }
    if m_list[0] == 0 || m_list.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::domain("M list must be positive and strictly increasing"));
    }
    let exact = boundary_solve(theta, snr0, pol, which, search)?.outermost();
    let rows = m_list
        .par_iter()
        .map(|&m| {
            let finite = finite_m_boundary(theta, snr0, pol, which, m, search)?.outermost();
            let (rel_error, diagnostic) = match (exact, finite) {
                (Some(h), Some(f)) if h.is_finite() && f.is_finite() => (Some((f - h).abs() / h), None),
                (Some(h), _) if h.is_infinite() => (None, Some("incomparable: holographic boundary unbounded".to_string())),
                (_, Some(f)) if f.is_infinite() => (None, Some("incomparable: finite-M boundary unbounded".to_string())),
                _ => (None, Some("incomparable: no region within the search range".to_string())),
            };
            Ok(ValidationPoint {
                half_count: m,
                rel_error,
                diagnostic,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(rows)
}
