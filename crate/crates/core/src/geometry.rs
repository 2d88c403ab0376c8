//! Scenario geometry, element positions and the holographic moments.
//!
//! The array lies on the y-axis, centred at the origin, spanning `[-L, L]`.
//! The receiver sits in the yz-plane at distance `D` from the centre and
//! elevation `theta` from broadside, i.e. at `(0, D sin(theta), D cos(theta))`.
//!
//! The moments are continuous averages over the aperture,
//!
//! ```text
//! psi_i    = 1/(2L) * integral_{-L}^{L} |r(x)|^-i dx                 i = 2, 4, 6
//! psibar_i = 1/(2L) * integral_{-L}^{L} (x - D sin) |r(x)|^-(i+1) dx  i = 3, 5
//! ```
//!
//! with `|r(x)|^2 = (x - D sin)^2 + (D cos)^2`. [`psi_closed`] evaluates them
//! from their antiderivatives, [`psi_quadrature`] by adaptive quadrature.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::quadrature::AdaptiveQuadrature;
use crate::summation::pairwise_sum;

/// Elevations with `|theta| >= pi/2 - ELEVATION_GUARD` are rejected.
pub const ELEVATION_GUARD: f64 = 1e-6;

/// Receiver placement relative to a linear aperture of half-length `L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioGeometry {
    half_aperture: f64,
    distance: f64,
    elevation: f64,
}

impl ScenarioGeometry {
    /// `half_aperture` = L (m), `distance` = D (m), `elevation` = theta (rad).
    pub fn new(half_aperture: f64, distance: f64, elevation: f64) -> Result<Self> {
        if !(half_aperture.is_finite() && half_aperture > 0.0) {
            return Err(Error::domain(format!("half aperture must be positive, got {half_aperture}")));
        }
        if !(distance.is_finite() && distance > 0.0) {
            return Err(Error::domain(format!("distance must be positive, got {distance}")));
        }
        if !(elevation.is_finite() && elevation.abs() < FRAC_PI_2 - ELEVATION_GUARD) {
            return Err(Error::domain(format!(
                "elevation must satisfy |theta| < pi/2 - {ELEVATION_GUARD:e}, got {elevation}"
            )));
        }
        Ok(ScenarioGeometry {
            half_aperture,
            distance,
            elevation,
        })
    }

    /// Geometry in units of the half aperture (`L = 1`, `D = d_over_l`).
    pub fn normalized(elevation: f64, d_over_l: f64) -> Result<Self> {
        Self::new(1.0, d_over_l, elevation)
    }

    pub fn half_aperture(&self) -> f64 {
        self.half_aperture
    }

    pub fn distance(&self) -> f64 {
        self.distance
    }

    pub fn elevation(&self) -> f64 {
        self.elevation
    }

    pub fn d_over_l(&self) -> f64 {
        self.distance / self.half_aperture
    }

    /// `D sin(theta)`, the receiver's coordinate along the array axis.
    pub fn d_sin(&self) -> f64 {
        self.distance * self.elevation.sin()
    }

    /// `D cos(theta)`, the receiver's distance from the array axis.
    pub fn d_cos(&self) -> f64 {
        self.distance * self.elevation.cos()
    }

    /// `(D^2 + L^2)^2 - (2 L D sin)^2`, evaluated in its factored form
    /// `((L + Ds)^2 + Dc^2) ((L - Ds)^2 + Dc^2)`. Always positive.
    pub fn edge_product(&self) -> f64 {
        let (l, ds, dc) = (self.half_aperture, self.d_sin(), self.d_cos());
        ((l + ds).powi(2) + dc * dc) * ((l - ds).powi(2) + dc * dc)
    }

    /// Angle subtended by the aperture as seen from the receiver, in `(0, pi)`.
    pub fn view_angle(&self) -> f64 {
        let l = self.half_aperture;
        let d = self.distance;
        // Sum of the two edge arctangents, folded into one atan2 so it stays
        // accurate when the two terms nearly cancel.
        (2.0 * l * self.d_cos()).atan2((d - l) * (d + l))
    }
}

/// Free-function form of [`ScenarioGeometry::view_angle`].
pub fn view_angle(geom: &ScenarioGeometry) -> f64 {
    geom.view_angle()
}

/// Which holographic moment to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Moment {
    Psi2,
    Psi3Bar,
    Psi4,
    Psi5Bar,
    Psi6,
}

impl Moment {
    pub const ALL: [Moment; 5] = [Moment::Psi2, Moment::Psi3Bar, Moment::Psi4, Moment::Psi5Bar, Moment::Psi6];

    /// The index `i`; the moment carries units of m^-i.
    pub fn order(self) -> i32 {
        match self {
            Moment::Psi2 => 2,
            Moment::Psi3Bar => 3,
            Moment::Psi4 => 4,
            Moment::Psi5Bar => 5,
            Moment::Psi6 => 6,
        }
    }

    pub fn is_odd(self) -> bool {
        matches!(self, Moment::Psi3Bar | Moment::Psi5Bar)
    }

    pub fn name(self) -> &'static str {
        match self {
            Moment::Psi2 => "psi2",
            Moment::Psi3Bar => "psi3bar",
            Moment::Psi4 => "psi4",
            Moment::Psi5Bar => "psi5bar",
            Moment::Psi6 => "psi6",
        }
    }
}

/// The five holographic moments of one geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiSet {
    pub psi2: f64,
    pub psi3bar: f64,
    pub psi4: f64,
    pub psi5bar: f64,
    pub psi6: f64,
}

impl PsiSet {
    pub fn get(&self, moment: Moment) -> f64 {
        match moment {
            Moment::Psi2 => self.psi2,
            Moment::Psi3Bar => self.psi3bar,
            Moment::Psi4 => self.psi4,
            Moment::Psi5Bar => self.psi5bar,
            Moment::Psi6 => self.psi6,
        }
    }
}

/// Closed-form moments.
pub fn psi_closed(geom: &ScenarioGeometry) -> PsiSet {
    let l = geom.half_aperture;
    let d = geom.distance;
    let ds = geom.d_sin();
    let dc = geom.d_cos();
    let dc2 = dc * dc;
    let sum_sq = d * d + l * l;
    let edge = geom.edge_product();

    let psi2 = geom.view_angle() / (2.0 * l * dc);
    let psi3bar = -ds / edge;
    let psi5bar = -sum_sq * ds / (edge * edge);
    let (psi4, psi6) = if ds * ds > dc2 {
        // The rational and arctangent parts cancel off broadside.
        let angular = AngularMoments::new(geom);
        (angular.diagonal_3x3().0 / dc2, angular.diagonal_2x3().0 / (dc2 * dc2))
    } else {
        let psi4 = ((sum_sq - 2.0 * ds * ds) / edge + psi2) / (2.0 * dc2);
        let psi6 = ((sum_sq * sum_sq - 4.0 * d * d * ds * ds) / (edge * edge) + 3.0 * psi4) / (4.0 * dc2);
        (psi4, psi6)
    };

    PsiSet {
        psi2,
        psi3bar,
        psi4,
        psi5bar,
        psi6,
    }
}

/// Diagonal Gram-limit entries written as integrals over the angle `beta`
/// between the array axis and the line to the receiver, expanded about the
/// mid angle. Every term is non-negative, so the entries keep full relative
/// accuracy where `psi4 Dc^2` and `psi6 Dc^4` would be formed by cancellation.
pub(crate) struct AngularMoments {
    /// `1 / (2 L Dc)`.
    scale: f64,
    sin2: f64,
    cos2: f64,
    view: f64,
}

impl AngularMoments {
    pub(crate) fn new(geom: &ScenarioGeometry) -> Self {
        let l = geom.half_aperture();
        let dc = geom.d_cos();
        // The diagonal is even in Ds.
        let ds = geom.d_sin().abs();
        let mid = 0.5 * (dc.atan2(l + ds) + dc.atan2(ds - l));
        let (sin, cos) = mid.sin_cos();
        AngularMoments {
            scale: 1.0 / (2.0 * l * dc),
            sin2: sin * sin,
            cos2: cos * cos,
            view: geom.view_angle(),
        }
    }

    /// `(psi4 Dc^2, psi2 - psi4 Dc^2)`.
    pub(crate) fn diagonal_3x3(&self) -> (f64, f64) {
        let g = self.view;
        let cos_sq = 0.5 * (g + g.sin());
        let sin_sq = 0.5 * angle_minus_sine(g);
        (
            self.scale * (self.sin2 * cos_sq + self.cos2 * sin_sq),
            self.scale * (self.cos2 * cos_sq + self.sin2 * sin_sq),
        )
    }

    /// `(psi6 Dc^4, psi4 Dc^2 - psi6 Dc^4)`.
    pub(crate) fn diagonal_2x3(&self) -> (f64, f64) {
        let g = self.view;
        let cos4 = 0.375 * g + 0.5 * g.sin() + (2.0 * g).sin() / 16.0;
        let cos2_sin2 = angle_minus_sine(2.0 * g) / 16.0;
        let sin4 = sine_fourth_integral(g);
        let (s2, c2) = (self.sin2, self.cos2);
        let cos_2t_sq = 0.5 * g + 0.25 * (2.0 * g).sin();
        (
            self.scale * (s2 * s2 * cos4 + 6.0 * s2 * c2 * cos2_sin2 + c2 * c2 * sin4),
            self.scale * (s2 * c2 * cos_2t_sq + (c2 - s2).powi(2) * cos2_sin2),
        )
    }
}

/// Integral of `sin^4 t` over `[-x/2, x/2]`.
pub(crate) fn sine_fourth_integral(x: f64) -> f64 {
    if x > 1.5 {
        return 0.375 * x - 0.5 * x.sin() + (2.0 * x).sin() / 16.0;
    }
    let x2 = x * x;
    let mut power = x2 * x2 * x;
    let mut factorial = 120.0;
    let mut sign = 1.0;
    let mut sum = 0.0;
    for k in 2..40 {
        let term = sign * power / factorial * (2f64.powi(2 * k - 3) - 0.5);
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
        power *= x2;
        factorial *= f64::from((2 * k + 2) * (2 * k + 3));
        sign = -sign;
    }
    sum
}

/// `x - sin(x)` without cancellation for small `x`.
pub(crate) fn angle_minus_sine(x: f64) -> f64 {
    if x.abs() > 1.0 {
        return x - x.sin();
    }
    let x2 = x * x;
    let mut term = x * x2 / 6.0;
    let mut sum = term;
    let mut k = 2.0;
    while term.abs() > 1e-18 * sum.abs() {
        term *= -x2 / ((2.0 * k) * (2.0 * k + 1.0));
        sum += term;
        k += 1.0;
    }
    sum
}

/// One moment by adaptive quadrature of its defining integral.
///
/// `tol` is the relative tolerance on the achieved error estimate and must lie
/// in `(1e-14, 1e-3)`. For the barred (odd) moments the antisymmetric part of
/// the integration range, which integrates to zero, is dropped before
/// integrating, so the remaining integrand has one sign.
pub fn psi_quadrature(geom: &ScenarioGeometry, moment: Moment, tol: f64) -> Result<f64> {
    if !(tol > 1e-14 && tol < 1e-3) {
        return Err(Error::domain(format!("quadrature tolerance must lie in (1e-14, 1e-3), got {tol:e}")));
    }
    let l = geom.half_aperture;
    let ds = geom.d_sin();
    let dc2 = geom.d_cos().powi(2);
    // Shifted variable u = x - D sin; the range is [lo, hi].
    let lo = -l - ds;
    let hi = l - ds;
    let order = moment.order();
    let quad = AdaptiveQuadrature::with_rel_tol(tol);

    let integral = if moment.is_odd() {
        let power = -f64::from(order + 1) / 2.0;
        let f = move |u: f64| u * (u * u + dc2).powf(power);
        let (a, b) = if lo < 0.0 && hi > 0.0 {
            if -lo > hi {
                (lo, -hi)
            } else if hi > -lo {
                (-lo, hi)
            } else {
                (0.0, 0.0)
            }
        } else {
            (lo, hi)
        };
        quad.integrate(f, a, b)?.value
    } else {
        let half = order / 2;
        let f = move |u: f64| (u * u + dc2).powi(-half);
        if lo < 0.0 && hi > 0.0 {
            quad.integrate_with_breaks(f, &[lo, 0.0, hi])?.value
        } else {
            quad.integrate(f, lo, hi)?.value
        }
    };
    Ok(integral / (2.0 * l))
}

/// All five moments by quadrature.
pub fn psi_quadrature_set(geom: &ScenarioGeometry, tol: f64) -> Result<PsiSet> {
    Ok(PsiSet {
        psi2: psi_quadrature(geom, Moment::Psi2, tol)?,
        psi3bar: psi_quadrature(geom, Moment::Psi3Bar, tol)?,
        psi4: psi_quadrature(geom, Moment::Psi4, tol)?,
        psi5bar: psi_quadrature(geom, Moment::Psi5Bar, tol)?,
        psi6: psi_quadrature(geom, Moment::Psi6, tol)?,
    })
}

/// A uniform linear array of `2M+1` elements at positions `m * spacing`,
/// `m = -M..=M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteArray {
    half_count: usize,
    spacing: f64,
}

impl FiniteArray {
    pub fn new(half_count: usize, spacing: f64) -> Result<Self> {
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::domain(format!("element spacing must be positive, got {spacing}")));
        }
        if half_count > (i64::MAX / 4) as usize {
            return Err(Error::domain("element count too large"));
        }
        Ok(FiniteArray { half_count, spacing })
    }

    /// `2M+1` elements with spacing `L/M`, so the outermost elements sit
    /// exactly at `+-L`.
    pub fn spanning(half_count: usize, half_aperture: f64) -> Result<Self> {
        if half_count == 0 {
            return Err(Error::domain("an aperture-spanning array needs M >= 1"));
        }
        Self::new(half_count, half_aperture / half_count as f64)
    }

    /// `M`.
    pub fn half_count(&self) -> usize {
        self.half_count
    }

    pub fn element_count(&self) -> usize {
        2 * self.half_count + 1
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// One-sided aperture `M * spacing`.
    pub fn aperture(&self) -> f64 {
        self.half_count as f64 * self.spacing
    }

    /// Element index of the `k`-th element, `k = 0..2M+1`.
    pub(crate) fn index(&self, k: usize) -> i64 {
        k as i64 - self.half_count as i64
    }
}

/// Vector from element `m` to the receiver: `[0, D sin - m spacing, D cos]`.
pub fn element_vector(m: i64, arr: &FiniteArray, geom: &ScenarioGeometry) -> Result<[f64; 3]> {
    if m.unsigned_abs() > arr.half_count as u64 {
        return Err(Error::domain(format!(
            "element index {m} outside [-{0}, {0}]",
            arr.half_count
        )));
    }
    let r = [0.0, geom.d_sin() - m as f64 * arr.spacing, geom.d_cos()];
    if r[1] == 0.0 && r[2] == 0.0 {
        return Err(Error::domain(format!("receiver coincides with element {m}")));
    }
    Ok(r)
}

/// `1/(2M+1) * sum_m |r_m|^-2`, the inverse harmonic mean of the squared
/// element distances.
pub fn harmonic_square_mean(arr: &FiniteArray, geom: &ScenarioGeometry) -> Result<f64> {
    let ds = geom.d_sin();
    let dc2 = geom.d_cos().powi(2);
    if dc2 == 0.0 {
        return Err(Error::domain("receiver lies on the array axis"));
    }
    let n = arr.element_count();
    let sum = pairwise_sum(
        n,
        &|k| {
            let y = ds - arr.index(k) as f64 * arr.spacing;
            1.0 / (y * y + dc2)
        },
        &|a, b| a + b,
        0.0,
    );
    Ok(sum / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn geom(l: f64, d: f64, theta: f64) -> ScenarioGeometry {
        ScenarioGeometry::new(l, d, theta).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn series_helpers_join_their_closed_forms() {
        for x in [1.0_f64 - 1e-12, 1.0 + 1e-12] {
            assert!(rel(angle_minus_sine(x), x - x.sin()) < 1e-13);
        }
        let x = 1.5_f64;
        let closed = 0.375 * x - 0.5 * x.sin() + (2.0 * x).sin() / 16.0;
        assert!(rel(sine_fourth_integral(x), closed) < 1e-13);
        // sin^4 t ~ t^4 near zero.
        assert!(rel(sine_fourth_integral(1e-3), 1e-15 / 80.0) < 1e-6);
    }

    #[test]
    fn off_broadside_moments_match_quadrature() {
        for &(d, th) in &[(90.0, 1.45), (40.0, -1.3), (0.3, 1.2), (2.0, 0.8)] {
            let g = geom(1.0, d, th);
            let p = psi_closed(&g);
            assert!(rel(p.psi4, psi_quadrature(&g, Moment::Psi4, 1e-12).unwrap()) < 1e-11);
            assert!(rel(p.psi6, psi_quadrature(&g, Moment::Psi6, 1e-12).unwrap()) < 1e-11);
        }
    }

    #[test]
    fn rejects_invalid_geometry() {
        assert!(ScenarioGeometry::new(0.0, 1.0, 0.0).is_err());
        assert!(ScenarioGeometry::new(1.0, -1.0, 0.0).is_err());
        assert!(ScenarioGeometry::new(1.0, 1.0, FRAC_PI_2).is_err());
        assert!(ScenarioGeometry::new(1.0, 1.0, -FRAC_PI_2 + 1e-7).is_err());
        assert!(ScenarioGeometry::new(1.0, 1.0, f64::NAN).is_err());
        assert!(ScenarioGeometry::new(1.0, 1.0, FRAC_PI_2 - 1e-5).is_ok());
    }

    #[test]
    fn view_angle_examples() {
        assert!((view_angle(&geom(1.0, 1.0, 0.0)) - FRAC_PI_2).abs() < 1e-15);
        let g = geom(2.0, 1.0, 0.3);
        assert!(g.view_angle() > FRAC_PI_2);
        let mut last = PI;
        for d in [1.0, 2.0, 10.0, 100.0, 1e4] {
            let v = geom(1.0, d, 0.0).view_angle();
            assert!(v > 0.0 && v < last);
            last = v;
        }
        assert!(last < 2.1e-4);
    }

    #[test]
    fn view_angle_matches_arctan_sum() {
        for &(l, d, th) in &[(1.0, 1.0, 0.2), (1.0, 3.0, -0.7), (2.0, 0.5, 1.2), (1.0, 0.2, 0.0)] {
            let g = geom(l, d, th);
            let (s, c) = (th.sin(), th.cos());
            let direct = ((l / d - s) / c).atan() + ((l / d + s) / c).atan();
            assert!((g.view_angle() - direct).abs() < 1e-14, "{l} {d} {th}");
        }
    }

    #[test]
    fn edge_product_matches_expanded_form() {
        let g = geom(1.3, 0.7, 0.4);
        let expanded = (0.7f64.powi(2) + 1.3f64.powi(2)).powi(2) - (2.0 * 1.3 * g.d_sin()).powi(2);
        assert!(rel(g.edge_product(), expanded) < 1e-14);
    }

    #[test]
    fn closed_form_reference_values() {
        let p = psi_closed(&geom(1.0, 1.0, 0.0));
        assert!((p.psi2 - FRAC_PI_4).abs() < 1e-15);
        assert_eq!(p.psi3bar, 0.0);
        assert_eq!(p.psi5bar, 0.0);
        assert!((p.psi4 - (0.25 + PI / 8.0)).abs() < 1e-15);
        for d in [0.1, 1.0, 7.0] {
            let p = psi_closed(&geom(2.0, d, 0.0));
            assert_eq!(p.psi3bar, 0.0);
            assert_eq!(p.psi5bar, 0.0);
        }
    }

    #[test]
    fn psi2_times_aperture_is_view_angle() {
        for &(l, d, th) in &[(1.0, 1.0, 0.2), (3.0, 0.4, -1.0), (0.5, 9.0, 0.6)] {
            let g = geom(l, d, th);
            let p = psi_closed(&g);
            assert!(rel(p.psi2 * 2.0 * l * g.d_cos(), g.view_angle()) < 1e-15);
        }
    }

    // Values from 60-digit quadrature of the defining integrals (mpmath) at
    // L = 1.3, D = 0.7, theta = 0.4.
    #[test]
    fn closed_form_matches_high_precision_reference() {
        let p = psi_closed(&geom(1.3, 0.7, 0.4));
        let expected = [
            1.307_665_510_608_735_059_3,
            -0.064_138_199_070_516_715_823,
            2.147_773_121_616_903_243_9,
            -0.032_898_460_271_558_535_814,
            4.028_424_958_326_935_747_2,
        ];
        for (m, e) in Moment::ALL.iter().zip(expected) {
            assert!(rel(p.get(*m), e) < 1e-13, "{}: {} vs {}", m.name(), p.get(*m), e);
        }
    }

    #[test]
    fn quadrature_examples() {
        let g = geom(1.0, 1.0, 0.0);
        let v = psi_quadrature(&g, Moment::Psi2, 1e-12).unwrap();
        assert!((v - FRAC_PI_4).abs() < 1e-12);
        assert_eq!(psi_quadrature(&g, Moment::Psi3Bar, 1e-12).unwrap(), 0.0);
        assert!(psi_quadrature(&g, Moment::Psi2, 1e-3).is_err());
        assert!(psi_quadrature(&g, Moment::Psi2, 1e-15).is_err());
    }

    #[test]
    fn quadrature_agrees_with_closed_form_in_the_deep_near_field() {
        let g = geom(1.0, 0.05, 1.4);
        let closed = psi_closed(&g);
        let quad = psi_quadrature_set(&g, 1e-11).unwrap();
        for m in Moment::ALL {
            assert!(rel(quad.get(m), closed.get(m)) < 1e-9, "{}", m.name());
        }
    }

    #[test]
    fn odd_moments_have_opposite_sign_to_elevation() {
        for th in [-1.2, -0.3, 0.3, 1.2] {
            let p = psi_closed(&geom(1.0, 0.8, th));
            assert_eq!(p.psi3bar.signum(), -th.signum());
            assert_eq!(p.psi5bar.signum(), -th.signum());
        }
    }

    #[test]
    fn element_vector_examples() {
        let g = geom(1.0, 2.0, 0.0);
        let arr = FiniteArray::new(3, 0.5).unwrap();
        assert_eq!(element_vector(0, &arr, &g).unwrap(), [0.0, 0.0, 2.0]);

        let g = geom(1.0, 1.0, 0.0);
        let arr = FiniteArray::new(1, 1.0).unwrap();
        let r = element_vector(1, &arr, &g).unwrap();
        assert_eq!(r, [0.0, -1.0, 1.0]);
        assert!((r.iter().map(|v| v * v).sum::<f64>().sqrt() - 2f64.sqrt()).abs() < 1e-15);

        let g = geom(1.0, 2f64.sqrt(), FRAC_PI_4);
        let arr = FiniteArray::new(5, 0.37).unwrap();
        let r = element_vector(-5, &arr, &g).unwrap();
        assert!((r[1] - (1.0 + 5.0 * 0.37)).abs() < 1e-14);

        assert!(element_vector(6, &arr, &g).is_err());
    }

    #[test]
    fn harmonic_square_mean_examples() {
        let g = geom(1.0, 1.0, 0.0);
        let arr = FiniteArray::new(1, 1.0).unwrap();
        assert!((harmonic_square_mean(&arr, &g).unwrap() - 2.0 / 3.0).abs() < 1e-15);

        let g = geom(1.0, 3.0, 0.2);
        let single = FiniteArray::new(0, 1.0).unwrap();
        assert!((harmonic_square_mean(&single, &g).unwrap() - 1.0 / 9.0).abs() < 1e-16);

        let g = geom(1.0, 2.0, 0.5);
        let arr = FiniteArray::spanning(4096, 1.0).unwrap();
        let s = harmonic_square_mean(&arr, &g).unwrap();
        assert!(rel(s, psi_closed(&g).psi2) < 1e-5);
    }

    #[test]
    fn harmonic_square_mean_converges_first_order() {
        // Uniform 1/(2M+1) weights over the closed grid give an O(1/M)
        // endpoint error, so doubling M halves the error.
        let g = geom(1.0, 0.8, 0.3);
        let psi2 = psi_closed(&g).psi2;
        let errs: Vec<f64> = [64, 128, 256, 512]
            .iter()
            .map(|&m| (harmonic_square_mean(&FiniteArray::spanning(m, 1.0).unwrap(), &g).unwrap() - psi2).abs())
            .collect();
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!(ratio > 1.8 && ratio < 2.2, "ratio {ratio}");
        }
    }

    #[test]
    fn spanning_array_reaches_the_aperture_edge() {
        let arr = FiniteArray::spanning(7, 2.5).unwrap();
        assert_eq!(arr.element_count(), 15);
        assert!((arr.aperture() - 2.5).abs() < 1e-15);
        assert!(FiniteArray::spanning(0, 1.0).is_err());
        assert!(FiniteArray::new(3, 0.0).is_err());
    }
}
