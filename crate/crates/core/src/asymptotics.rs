//! Large-distance behaviour of the activation thresholds.
//!
//! All quantities here are expansions around `L/D = 0` and are only offered
//! for `D/L > 1`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::finite_channel::PolarizationConfig;
use crate::multiplexing::ThresholdIndex;

/// Below this elevation the two-polarization first threshold is taken from
/// its broadside limit `pi/6`.
pub const BROADSIDE_BRANCH: f64 = 1e-9;

fn check_theta(theta: f64) -> Result<()> {
    if !(theta.is_finite() && theta.abs() < std::f64::consts::FRAC_PI_2) {
        return Err(Error::domain(format!("elevation must lie in (-pi/2, pi/2), got {theta}")));
    }
    Ok(())
}

/// Coefficients of the quartic expansions of the second threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionCoefficients {
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
}

impl ExpansionCoefficients {
    pub fn at(theta: f64) -> Self {
        let c2 = theta.cos().powi(2);
        ExpansionCoefficients {
            a1: (3.0 - 58.0 / 15.0 * c2) / 2.0,
            a2: 2.0 * (1.0 - 4.0 / 3.0 * c2),
            b1: ((5.0 * c2 - 177.0) * c2 + 128.0) / 60.0,
            b2: (((-350.0 * c2 + 10242.0) * c2 - 19311.0) * c2 + 10122.0) / 1575.0,
        }
    }
}

// 4 cos^4 - 16 cos^2 + 10
fn strip_constant(c2: f64) -> f64 {
    (4.0 * c2 - 16.0) * c2 + 10.0
}

/// Far-field expansion of the reference-SNR threshold.
pub fn snr0_expansion(theta: f64, d_over_l: f64, pol: PolarizationConfig, which: ThresholdIndex) -> Result<f64> {
    check_theta(theta)?;
    if !(d_over_l.is_finite() && d_over_l > 1.0) {
        return Err(Error::domain(format!(
            "far-field expansion needs D/L > 1, got {d_over_l}"
        )));
    }
    let c2 = theta.cos().powi(2);
    let x2 = d_over_l * d_over_l;
    let k = ExpansionCoefficients::at(theta);
    Ok(match (pol, which) {
        (PolarizationConfig::ThreeByThree, ThresholdIndex::First) => PI / 12.0 * c2,
        (PolarizationConfig::ThreeByThree, ThresholdIndex::Second) => {
            3.0 * PI / (2.0 * c2) * (x2 * x2 - 2.0 * k.a1 * x2 + k.a2)
        }
        (PolarizationConfig::TwoByThree, ThresholdIndex::First) => {
            if theta.abs() < BROADSIDE_BRANCH {
                PI / 6.0
            } else {
                PI / 4.0 * (x2 * theta.tan().powi(2) - strip_constant(c2) / (3.0 * c2))
            }
        }
        (PolarizationConfig::TwoByThree, ThresholdIndex::Second) => {
            3.0 * PI / (2.0 * c2 * c2) * (x2 * x2 - 2.0 * k.b1 * x2 + k.b2)
        }
    })
}

/// Boundary distance predicted by the far-field expansions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ApproxBoundary {
    /// `D/L` of the boundary.
    Finite(f64),
    /// The stream count is reached at every distance.
    Unbounded,
    /// The expansion has no root in `D/L > 1`; use the exact solver.
    BeyondApproximation,
}

impl ApproxBoundary {
    /// `+inf` for unbounded, `NaN` when beyond the approximation.
    pub fn as_f64(self) -> f64 {
        match self {
            ApproxBoundary::Finite(x) => x,
            ApproxBoundary::Unbounded => f64::INFINITY,
            ApproxBoundary::BeyondApproximation => f64::NAN,
        }
    }
}

fn from_square(x2: f64) -> ApproxBoundary {
    if x2.is_finite() && x2 > 1.0 {
        ApproxBoundary::Finite(x2.sqrt())
    } else {
        ApproxBoundary::BeyondApproximation
    }
}

// Larger root in x^2 of x^4 - 2 c1 x^2 + c2 = rhs.
fn quartic_root(c1: f64, c2: f64, rhs: f64) -> ApproxBoundary {
    let disc = c1 * c1 - c2 + rhs;
    if disc < 0.0 {
        return ApproxBoundary::BeyondApproximation;
    }
    from_square(c1 + disc.sqrt())
}

/// Inverts the far-field expansion for the boundary distance at which the
/// reference SNR `snr0` just activates stream `which + 1`.
pub fn boundary_approx(theta: f64, snr0: f64, pol: PolarizationConfig, which: ThresholdIndex) -> Result<ApproxBoundary> {
    check_theta(theta)?;
    if !(snr0.is_finite() && snr0 > 0.0) {
        return Err(Error::domain(format!("reference SNR must be positive, got {snr0}")));
    }
    let c2 = theta.cos().powi(2);
    let k = ExpansionCoefficients::at(theta);
    Ok(match (pol, which) {
        (PolarizationConfig::ThreeByThree, ThresholdIndex::First) => {
            if snr0 >= PI / 12.0 * c2 {
                ApproxBoundary::Unbounded
            } else {
                ApproxBoundary::BeyondApproximation
            }
        }
        (PolarizationConfig::ThreeByThree, ThresholdIndex::Second) => {
            quartic_root(k.a1, k.a2, 2.0 * c2 * snr0 / (3.0 * PI))
        }
        (PolarizationConfig::TwoByThree, ThresholdIndex::First) => {
            if theta.abs() < BROADSIDE_BRANCH {
                if snr0 >= PI / 6.0 {
                    ApproxBoundary::Unbounded
                } else {
                    ApproxBoundary::BeyondApproximation
                }
            } else {
                let s2 = theta.sin().powi(2);
                let t2 = theta.tan().powi(2);
                from_square(strip_constant(c2) / (3.0 * s2) + 4.0 * snr0 / (PI * t2))
            }
        }
        (PolarizationConfig::TwoByThree, ThresholdIndex::Second) => {
            quartic_root(k.b1, k.b2, 2.0 * c2 * c2 * snr0 / (3.0 * PI))
        }
    })
}

/// Far-field condition for two streams with two transmit polarizations:
/// `|y0|^2 < 4 snr0 / pi - 2/3`, with `y0` in units of `L`.
pub fn in_two_stream_strip(y0_over_l: f64, snr0: f64) -> bool {
    y0_over_l * y0_over_l < 4.0 * snr0 / PI - 2.0 / 3.0
}

/// Second-order series of the normalized moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaylorMoments {
    /// `D^2 psi2`
    pub psi2: f64,
    /// `D^4 psi4`
    pub psi4: f64,
    /// `D^5 psibar5`
    pub psi5bar: f64,
    /// `D^6 psi6`
    pub psi6: f64,
    /// `psi2 Delta`
    pub psi2_delta: f64,
}

pub fn psi_taylor(theta: f64, l_over_d: f64) -> Result<TaylorMoments> {
    check_theta(theta)?;
    if !(l_over_d > 0.0 && l_over_d < 1.0) {
        return Err(Error::domain(format!("series needs L/D in (0, 1), got {l_over_d}")));
    }
    let (s, c) = theta.sin_cos();
    let c2 = c * c;
    let t2 = l_over_d * l_over_d;
    Ok(TaylorMoments {
        psi2: 1.0 + (1.0 - 4.0 / 3.0 * c2) * t2,
        psi4: 1.0 + 2.0 * (5.0 / 3.0 - 2.0 * c2) * t2,
        psi5bar: -s - (5.0 - 8.0 * c2) * s * t2,
        psi6: 1.0 + (7.0 - 8.0 * c2) * t2,
        psi2_delta: 1.0 + 2.0 / 3.0 * c2 * t2 + 2.0 / 3.0 * c2 * (2.0 - 11.0 / 5.0 * c2) * t2 * t2,
    })
}
