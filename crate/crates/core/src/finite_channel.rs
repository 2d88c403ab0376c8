//! Discrete-dipole channel blocks, the scaled Gram matrix of the stacked
//! channel, and a symmetric 3x3 eigenvalue solver.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{element_vector, FiniteArray, ScenarioGeometry};
use crate::holographic::EigenTriple;
use crate::summation::pairwise_sum;

/// Row-major real 3x3 matrix.
pub type Mat3 = [[f64; 3]; 3];

/// Row-major complex 3x3 matrix.
pub type CMat3 = [[Complex64; 3]; 3];

/// Physical constants of the link. Only [`channel_block`] uses them; every
/// threshold and region computation is independent of their values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioConstants {
    wavelength: f64,
    xi: Complex64,
    noise_power: f64,
    total_power_bar: f64,
}

impl RadioConstants {
    pub fn new(wavelength: f64, xi: Complex64, noise_power: f64, total_power_bar: f64) -> Result<Self> {
        if !(wavelength.is_finite() && wavelength > 0.0) {
            return Err(Error::domain("wavelength must be positive"));
        }
        if !(xi.norm() > 0.0 && xi.norm().is_finite()) {
            return Err(Error::domain("coupling constant must be non-zero"));
        }
        if !(noise_power.is_finite() && noise_power > 0.0) {
            return Err(Error::domain("noise power must be positive"));
        }
        if !(total_power_bar.is_finite() && total_power_bar > 0.0) {
            return Err(Error::domain("total power must be positive"));
        }
        Ok(RadioConstants {
            wavelength,
            xi,
            noise_power,
            total_power_bar,
        })
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn xi(&self) -> Complex64 {
        self.xi
    }

    pub fn noise_power(&self) -> f64 {
        self.noise_power
    }

    pub fn total_power_bar(&self) -> f64 {
        self.total_power_bar
    }
}

/// Number of transmit polarizations; the receiver always uses three.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolarizationConfig {
    /// x and y dipoles at the transmitter.
    TwoByThree,
    /// x, y and z dipoles at the transmitter.
    ThreeByThree,
}

impl PolarizationConfig {
    pub fn from_tpol(t_pol: u8) -> Result<Self> {
        match t_pol {
            2 => Ok(PolarizationConfig::TwoByThree),
            3 => Ok(PolarizationConfig::ThreeByThree),
            other => Err(Error::domain(format!("t_pol must be 2 or 3, got {other}"))),
        }
    }

    pub fn t_pol(self) -> u8 {
        match self {
            PolarizationConfig::TwoByThree => 2,
            PolarizationConfig::ThreeByThree => 3,
        }
    }

    pub fn r_pol(self) -> u8 {
        3
    }
}

/// `1/(2M+1) * H H^H / |xi/lambda|^2`, in m^-2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledGram(pub Mat3);

impl ScaledGram {
    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn eigenvalues(&self) -> Result<EigenTriple> {
        sym3_eigenvalues(&self.0)
    }
}

/// Channel between element `m` and the receiver, reactive terms dropped and
/// the receiver rotation fixed to the identity:
///
/// `H_m = xi / (lambda |r|) * exp(-j 2 pi |r| / lambda) * (I - r r^T / |r|^2)`.
pub fn channel_block(
    m: i64,
    arr: &FiniteArray,
    geom: &ScenarioGeometry,
    consts: &RadioConstants,
) -> Result<CMat3> {
    let r = element_vector(m, arr, geom)?;
    let norm2 = r.iter().map(|v| v * v).sum::<f64>();
    let norm = norm2.sqrt();
    let lambda = consts.wavelength;
    let scale = consts.xi / (lambda * norm) * Complex64::from_polar(1.0, -2.0 * PI * norm / lambda);
    let mut h = [[Complex64::new(0.0, 0.0); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let delta = if i == j { 1.0 } else { 0.0 };
            h[i][j] = scale * (delta - r[i] * r[j] / norm2);
        }
    }
    Ok(h)
}

/// Scaled Gram matrix of the stacked channel with the first `t_pol` columns
/// of every block, accumulated in the `xi/lambda`-free form
/// `1/(2M+1) * sum_m |r_m|^-2 P_m S S^T P_m^T` (phases cancel exactly).
pub fn scaled_gram(arr: &FiniteArray, geom: &ScenarioGeometry, pol: PolarizationConfig) -> Result<ScaledGram> {
    let ds = geom.d_sin();
    let c = geom.d_cos();
    if c == 0.0 {
        return Err(Error::domain("receiver lies on the array axis"));
    }
    let c2 = c * c;
    let n = arr.element_count();

    // Only the (0,0), (1,1), (1,2) and (2,2) entries are non-zero.
    let term = |k: usize| -> [f64; 4] {
        let a = ds - arr.index(k) as f64 * arr.spacing();
        let a2 = a * a;
        let n2 = a2 + c2;
        let inv = 1.0 / n2;
        match pol {
            PolarizationConfig::ThreeByThree => {
                let inv2 = inv * inv;
                [inv, c2 * inv2, -a * c * inv2, a2 * inv2]
            }
            PolarizationConfig::TwoByThree => {
                let inv3 = inv * inv * inv;
                [inv, c2 * c2 * inv3, -a * c * c2 * inv3, a2 * c2 * inv3]
            }
        }
    };
    let add = |x: [f64; 4], y: [f64; 4]| [x[0] + y[0], x[1] + y[1], x[2] + y[2], x[3] + y[3]];
    let s = pairwise_sum(n, &term, &add, [0.0; 4]);
    let w = 1.0 / n as f64;
    Ok(ScaledGram([
        [s[0] * w, 0.0, 0.0],
        [0.0, s[1] * w, s[2] * w],
        [0.0, s[2] * w, s[3] * w],
    ]))
}

/// Relative asymmetry accepted by [`sym3_eigenvalues`].
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Eigenvalues of a real symmetric 3x3 matrix in descending order.
///
/// When the first row and column decouple, the remaining 2x2 block is solved
/// as a quadratic; otherwise the trigonometric solution of the characteristic
/// cubic is used.
pub fn sym3_eigenvalues(mat: &Mat3) -> Result<EigenTriple> {
    if !mat.iter().flatten().all(|v| v.is_finite()) {
        return Err(Error::domain("matrix has non-finite entries"));
    }
    let scale = mat.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        if (mat[i][j] - mat[j][i]).abs() > SYMMETRY_TOL * scale {
            return Err(Error::domain(format!(
                "matrix is not symmetric: a[{i}][{j}] = {}, a[{j}][{i}] = {}",
                mat[i][j], mat[j][i]
            )));
        }
    }
    if scale == 0.0 {
        return Ok(EigenTriple::from_unsorted([0.0; 3]));
    }
    let a01 = 0.5 * (mat[0][1] + mat[1][0]);
    let a02 = 0.5 * (mat[0][2] + mat[2][0]);
    let a12 = 0.5 * (mat[1][2] + mat[2][1]);
    let (a00, a11, a22) = (mat[0][0], mat[1][1], mat[2][2]);

    if a01 == 0.0 && a02 == 0.0 {
        let (hi, lo) = sym2_eigenvalues(a11, a12, a22);
        return Ok(EigenTriple::from_unsorted([a00, hi, lo]));
    }

    let q = (a00 + a11 + a22) / 3.0;
    let off = a01 * a01 + a02 * a02 + a12 * a12;
    let p2 = (a00 - q).powi(2) + (a11 - q).powi(2) + (a22 - q).powi(2) + 2.0 * off;
    let p = (p2 / 6.0).sqrt();
    if p == 0.0 {
        return Ok(EigenTriple::from_unsorted([q; 3]));
    }
    let (b00, b11, b22) = ((a00 - q) / p, (a11 - q) / p, (a22 - q) / p);
    let (b01, b02, b12) = (a01 / p, a02 / p, a12 / p);
    let det = b00 * (b11 * b22 - b12 * b12) - b01 * (b01 * b22 - b12 * b02) + b02 * (b01 * b12 - b11 * b02);
    let r = (0.5 * det).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let e1 = q + 2.0 * p * phi.cos();
    let e3 = q + 2.0 * p * (phi + 2.0 * PI / 3.0).cos();
    let e2 = 3.0 * q - e1 - e3;
    Ok(EigenTriple::from_unsorted([e1, e2, e3]))
}

/// Eigenvalues `(larger, smaller)` of `[[a, b], [b, d]]`.
///
/// The root of smaller magnitude is taken from the determinant so that a
/// nearly singular block keeps its relative accuracy.
fn sym2_eigenvalues(a: f64, b: f64, d: f64) -> (f64, f64) {
    let mean = 0.5 * (a + d);
    let radius = (0.5 * (a - d)).hypot(b);
    if mean >= 0.0 {
        let hi = mean + radius;
        let lo = if hi == 0.0 { 0.0 } else { product_difference(a, d, b, b) / hi };
        (hi, lo)
    } else {
        let lo = mean - radius;
        (product_difference(a, d, b, b) / lo, lo)
    }
}

/// `a*b - c*d` with the rounding error of `c*d` compensated.
pub(crate) fn product_difference(a: f64, b: f64, c: f64, d: f64) -> f64 {
    let cd = c * d;
    let err = (-c).mul_add(d, cd);
    a.mul_add(b, -cd) + err
}
