//! Waterfilling over the limit eigenmodes, stream activation thresholds and
//! the reference-SNR normalization.
//!
//! With eigenvalues `gamma_i` and `psi2` the modal noise-to-gain ratios are
//! `psi2 / gamma_i`. The scaled powers are `s_i = [1/theta - psi2/gamma_i]^+`
//! with the waterlevel fixed by `sum_i s_i = SNR_RX`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::finite_channel::PolarizationConfig;
use crate::geometry::{psi_closed, ScenarioGeometry};
use crate::holographic::{eigen_limit_from, EigenTriple};

/// Logarithm used for spectral efficiency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LogBase {
    /// bits/s/Hz
    #[default]
    Bits,
    /// nats/s/Hz
    Nats,
}

/// Which activation threshold: the first (two streams) or the second
/// (three streams).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ThresholdIndex {
    First,
    Second,
}

impl ThresholdIndex {
    pub fn from_index(which: u8) -> Result<Self> {
        match which {
            1 => Ok(ThresholdIndex::First),
            2 => Ok(ThresholdIndex::Second),
            other => Err(Error::domain(format!("threshold index must be 1 or 2, got {other}"))),
        }
    }

    pub fn index(self) -> u8 {
        match self {
            ThresholdIndex::First => 1,
            ThresholdIndex::Second => 2,
        }
    }
}

/// Received SNRs at which the second and third streams switch on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdPair {
    pub snr1: f64,
    pub snr2: f64,
}

impl ThresholdPair {
    pub fn get(&self, which: ThresholdIndex) -> f64 {
        match which {
            ThresholdIndex::First => self.snr1,
            ThresholdIndex::Second => self.snr2,
        }
    }
}

/// Result of [`waterfill`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerAllocation {
    /// Scaled powers `s_1 >= s_2 >= s_3 >= 0`.
    pub powers: [f64; 3],
    /// `1/theta`.
    pub waterlevel_inv: f64,
    /// Size of the active set. A mode sitting exactly on its activation
    /// threshold counts as active with zero power.
    pub n_plus: u8,
}

fn check_eigs(eigs: &EigenTriple, psi2: f64) -> Result<()> {
    if !(psi2.is_finite() && psi2 > 0.0) {
        return Err(Error::domain(format!("psi2 must be positive, got {psi2}")));
    }
    let g = eigs.as_array();
    if !(g.iter().all(|v| v.is_finite()) && g[0] >= g[1] && g[1] >= g[2] && g[2] > 0.0) {
        return Err(Error::domain(format!(
            "eigenvalues must be positive and descending, got {g:?}"
        )));
    }
    Ok(())
}

fn noise_to_gain(eigs: &EigenTriple, psi2: f64) -> [f64; 3] {
    [psi2 / eigs.gamma1, psi2 / eigs.gamma2, psi2 / eigs.gamma3]
}

/// Total SNR at which mode `k` (1-based, 2 or 3) enters the active set:
/// `sum_{i<k} (psi2/gamma_k - psi2/gamma_i)`.
fn activation_threshold(ratio: &[f64; 3], k: usize) -> f64 {
    match k {
        2 => ratio[1] - ratio[0],
        3 => 2.0 * ratio[2] - ratio[0] - ratio[1],
        _ => 0.0,
    }
}

/// Waterfilling over three modes by the exact active-set method.
///
/// A total SNR of zero yields zero power with `n_plus = 1`.
pub fn waterfill(eigs: &EigenTriple, psi2: f64, total_snr: f64) -> Result<PowerAllocation> {
    check_eigs(eigs, psi2)?;
    if !(total_snr.is_finite() && total_snr >= 0.0) {
        return Err(Error::domain(format!("total SNR must be non-negative, got {total_snr}")));
    }
    let ratio = noise_to_gain(eigs, psi2);
    if total_snr == 0.0 {
        return Ok(PowerAllocation {
            powers: [0.0; 3],
            waterlevel_inv: ratio[0],
            n_plus: 1,
        });
    }
    // Largest k whose waterlevel (total + sum_{i<=k} ratio_i)/k clears
    // ratio_k; equivalently total >= activation_threshold(k).
    let k = (1..=3)
        .rev()
        .find(|&k| k == 1 || total_snr >= activation_threshold(&ratio, k))
        .expect("k = 1 always qualifies");
    let level = (total_snr + ratio[..k].iter().sum::<f64>()) / k as f64;
    // s_i = level - ratio_i, written over ratio differences so each power
    // carries an error relative to total_snr rather than to the ratios.
    let mut powers = [0.0; 3];
    for i in 0..k {
        let spread: f64 = ratio[..k].iter().map(|r| r - ratio[i]).sum();
        powers[i] = ((total_snr + spread) / k as f64).max(0.0);
    }
    Ok(PowerAllocation {
        powers,
        waterlevel_inv: level,
        n_plus: k as u8,
    })
}

/// Activation thresholds of the second and third stream:
/// `snr1 = psi2/gamma2 - psi2/gamma1`,
/// `snr2 = 2 psi2/gamma3 - psi2/gamma1 - psi2/gamma2`.
pub fn thresholds_from_eigs(eigs: &EigenTriple, psi2: f64) -> Result<ThresholdPair> {
    check_eigs(eigs, psi2)?;
    let ratio = noise_to_gain(eigs, psi2);
    Ok(ThresholdPair {
        snr1: activation_threshold(&ratio, 2),
        snr2: activation_threshold(&ratio, 3),
    })
}

/// Optimal number of streams at received SNR `snr_rx`. A value equal to a
/// threshold activates the higher count.
pub fn n_active(snr_rx: f64, thr: &ThresholdPair) -> u8 {
    if snr_rx < thr.snr1 {
        1
    } else if snr_rx < thr.snr2 {
        2
    } else {
        3
    }
}

/// `sum_i log(1 + gamma_i/psi2 * s_i)`.
pub fn spectral_efficiency(eigs: &EigenTriple, psi2: f64, alloc: &PowerAllocation, base: LogBase) -> f64 {
    let nats: f64 = eigs
        .as_array()
        .iter()
        .zip(alloc.powers)
        .map(|(g, s)| (g / psi2 * s).ln_1p())
        .sum();
    match base {
        LogBase::Nats => nats,
        LogBase::Bits => nats / std::f64::consts::LN_2,
    }
}

/// Received SNR at `geom` when the reference point `(0, 0, L)` sees `snr0`:
/// `snr0 * 4 L^2 psi2 / pi`.
pub fn snr_rx_from_reference(snr0: f64, geom: &ScenarioGeometry) -> Result<f64> {
    if !(snr0.is_finite() && snr0 > 0.0) {
        return Err(Error::domain(format!("reference SNR must be positive, got {snr0}")));
    }
    let l = geom.half_aperture();
    Ok(snr0 * 4.0 * l * l * psi_closed(geom).psi2 / PI)
}

/// Both activation thresholds expressed as reference SNRs,
/// `pi / (4 L^2 psi2) * SNR^(i)`, at elevation `theta` and distance `d_over_l`.
pub fn threshold_reference_pair(theta: f64, d_over_l: f64, pol: PolarizationConfig) -> Result<ThresholdPair> {
    let geom = ScenarioGeometry::normalized(theta, d_over_l)?;
    let psi = psi_closed(&geom);
    let eigs = eigen_limit_from(&geom, &psi, pol);
    let thr = thresholds_from_eigs(&eigs, psi.psi2)?;
    let scale = PI / (4.0 * psi.psi2);
    Ok(ThresholdPair {
        snr1: scale * thr.snr1,
        snr2: scale * thr.snr2,
    })
}

/// One activation threshold as a reference SNR; a function of
/// `(theta, D/L)` only.
pub fn threshold_reference(
    theta: f64,
    d_over_l: f64,
    pol: PolarizationConfig,
    which: ThresholdIndex,
) -> Result<f64> {
    Ok(threshold_reference_pair(theta, d_over_l, pol)?.get(which))
}

/// Optimal stream count at `geom` for reference SNR `snr0`.
pub fn classify(geom: &ScenarioGeometry, snr0: f64, pol: PolarizationConfig) -> Result<u8> {
    let psi = psi_closed(geom);
    let eigs = eigen_limit_from(geom, &psi, pol);
    let thr = thresholds_from_eigs(&eigs, psi.psi2)?;
    Ok(n_active(snr_rx_from_reference(snr0, geom)?, &thr))
}
