//! Continuous-aperture limits of the scaled Gram matrix and their
//! closed-form eigenvalues.

use crate::error::{Error, Result};
use crate::finite_channel::{product_difference, Mat3, PolarizationConfig};
use crate::geometry::{angle_minus_sine, psi_closed, AngularMoments, PsiSet, ScenarioGeometry};

/// Eigenvalues of a scaled Gram matrix, `gamma1 >= gamma2 >= gamma3` (m^-2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenTriple {
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
}

impl EigenTriple {
    /// Builds a triple that is already in descending order.
    pub fn new(gamma1: f64, gamma2: f64, gamma3: f64) -> Result<Self> {
        if !(gamma1.is_finite() && gamma2.is_finite() && gamma3.is_finite()) {
            return Err(Error::domain("eigenvalues must be finite"));
        }
        if !(gamma1 >= gamma2 && gamma2 >= gamma3) {
            return Err(Error::domain(format!(
                "eigenvalues must be in descending order, got ({gamma1}, {gamma2}, {gamma3})"
            )));
        }
        Ok(EigenTriple { gamma1, gamma2, gamma3 })
    }

    /// Sorts three values into descending order.
    pub fn from_unsorted(mut values: [f64; 3]) -> Self {
        values.sort_by(|a, b| b.total_cmp(a));
        EigenTriple {
            gamma1: values[0],
            gamma2: values[1],
            gamma3: values[2],
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.gamma1, self.gamma2, self.gamma3]
    }

    /// `gamma1 > gamma2 > gamma3 > 0`.
    pub fn is_strictly_ordered_positive(&self) -> bool {
        self.gamma1 > self.gamma2 && self.gamma2 > self.gamma3 && self.gamma3 > 0.0
    }
}

/// `Delta = sqrt((D^2 - L^2)^2 + (2 L D cos)^2)`, in m^2.
pub fn delta(geom: &ScenarioGeometry) -> f64 {
    let l = geom.half_aperture();
    let d = geom.distance();
    ((d - l) * (d + l)).hypot(2.0 * l * geom.d_cos())
}

/// Limit Gram matrix with three transmit polarizations.
pub fn gram_limit_3x3(geom: &ScenarioGeometry) -> Mat3 {
    gram_limit_3x3_from(geom, &psi_closed(geom))
}

fn gram_limit_3x3_from(geom: &ScenarioGeometry, psi: &PsiSet) -> Mat3 {
    let d23 = psi.psi3bar * geom.d_cos();
    let (d22, d33) = AngularMoments::new(geom).diagonal_3x3();
    [
        [psi.psi2, 0.0, 0.0],
        [0.0, d22, d23],
        [0.0, d23, d33],
    ]
}

/// Limit Gram matrix with the x and y transmit polarizations only.
pub fn gram_limit_2x3(geom: &ScenarioGeometry) -> Mat3 {
    gram_limit_2x3_from(geom, &psi_closed(geom))
}

fn gram_limit_2x3_from(geom: &ScenarioGeometry, psi: &PsiSet) -> Mat3 {
    let dc = geom.d_cos();
    let d23 = psi.psi5bar * dc * dc * dc;
    let (d22, d33) = AngularMoments::new(geom).diagonal_2x3();
    [
        [psi.psi2, 0.0, 0.0],
        [0.0, d22, d23],
        [0.0, d23, d33],
    ]
}

pub fn gram_limit(geom: &ScenarioGeometry, pol: PolarizationConfig) -> Mat3 {
    match pol {
        PolarizationConfig::ThreeByThree => gram_limit_3x3(geom),
        PolarizationConfig::TwoByThree => gram_limit_2x3(geom),
    }
}

/// Closed-form eigenvalues with three transmit polarizations:
/// `psi2`, `(psi2 + 1/Delta)/2`, `(psi2 - 1/Delta)/2`.
pub fn eigen_3x3(geom: &ScenarioGeometry) -> EigenTriple {
    eigen_3x3_from(geom, &psi_closed(geom))
}

pub(crate) fn eigen_3x3_from(geom: &ScenarioGeometry, psi: &PsiSet) -> EigenTriple {
    let inv_delta = 1.0 / delta(geom);
    let psi2 = psi.psi2;
    let gamma2 = 0.5 * (psi2 + inv_delta);
    // psi2 * Delta = Gamma / sin(Gamma), so (psi2 - 1/Delta)/2 = psi2 (Gamma - sin Gamma) / (2 Gamma).
    let view = geom.view_angle();
    let gamma3 = 0.5 * psi2 * angle_minus_sine(view) / view;
    EigenTriple {
        gamma1: psi2,
        gamma2,
        gamma3,
    }
}

/// Closed-form eigenvalues with the x and y transmit polarizations:
/// `psi2` and `Dc^2/2 * (psi4 +- sqrt((psi4 - 2 Dc^2 psi6)^2 + 4 Dc^2 psibar5^2))`.
pub fn eigen_2x3(geom: &ScenarioGeometry) -> EigenTriple {
    eigen_2x3_from(geom, &psi_closed(geom))
}

pub(crate) fn eigen_2x3_from(geom: &ScenarioGeometry, psi: &PsiSet) -> EigenTriple {
    let dc2 = geom.d_cos().powi(2);
    let root = (psi.psi4 - 2.0 * dc2 * psi.psi6).hypot(2.0 * geom.d_cos() * psi.psi5bar);
    let gamma2 = 0.5 * dc2 * (psi.psi4 + root);
    // Smaller root from the product of the two.
    let (_, lower) = AngularMoments::new(geom).diagonal_2x3();
    let det = product_difference(psi.psi6, lower / dc2, psi.psi5bar, psi.psi5bar);
    EigenTriple {
        gamma1: psi.psi2,
        gamma2,
        gamma3: dc2 * dc2 * dc2 * det / gamma2,
    }
}


pub fn eigen_limit(geom: &ScenarioGeometry, pol: PolarizationConfig) -> EigenTriple {
    eigen_limit_from(geom, &psi_closed(geom), pol)
}

pub(crate) fn eigen_limit_from(geom: &ScenarioGeometry, psi: &PsiSet, pol: PolarizationConfig) -> EigenTriple {
    match pol {
        PolarizationConfig::ThreeByThree => eigen_3x3_from(geom, psi),
        PolarizationConfig::TwoByThree => eigen_2x3_from(geom, psi),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_channel::sym3_eigenvalues;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn geom(l: f64, d: f64, theta: f64) -> ScenarioGeometry {
        ScenarioGeometry::new(l, d, theta).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn broadside_limits_are_diagonal() {
        let g = geom(1.0, 1.0, 0.0);
        let w = gram_limit_3x3(&g);
        let expected = [FRAC_PI_4, 0.25 + PI / 8.0, PI / 8.0 - 0.25];
        for i in 0..3 {
            assert!((w[i][i] - expected[i]).abs() < 1e-15);
        }
        assert_eq!(w[1][2], 0.0);
        let w2 = gram_limit_2x3(&geom(1.0, 2.0, 0.0));
        assert_eq!(w2[1][2], 0.0);
        assert_eq!(w2[2][1], 0.0);
    }

    #[test]
    fn traces() {
        for &(d, th) in &[(0.3, 0.2), (1.0, -1.1), (40.0, 0.7)] {
            let g = geom(1.0, d, th);
            let p = psi_closed(&g);
            let w = gram_limit_3x3(&g);
            assert!(rel(w[0][0] + w[1][1] + w[2][2], 2.0 * p.psi2) < 1e-15);
            let w2 = gram_limit_2x3(&g);
            let t = p.psi2 + p.psi4 * g.d_cos().powi(2);
            assert!(rel(w2[0][0] + w2[1][1] + w2[2][2], t) < 1e-14);
        }
    }

    #[test]
    fn three_pol_at_unit_distance() {
        let g = geom(1.0, 1.0, 0.0);
        assert!((delta(&g) - 2.0).abs() < 1e-15);
        let e = eigen_3x3(&g);
        assert!((e.gamma1 - FRAC_PI_4).abs() < 1e-15);
        assert!((e.gamma2 - (FRAC_PI_4 + 0.5) / 2.0).abs() < 1e-15);
        assert!((e.gamma3 - (FRAC_PI_4 - 0.5) / 2.0).abs() < 1e-15);
        let oracle = sym3_eigenvalues(&gram_limit_3x3(&g)).unwrap();
        for (a, b) in e.as_array().iter().zip(oracle.as_array()) {
            assert!(rel(*a, b) < 1e-14);
        }
    }

    #[test]
    fn three_pol_modes_sum_to_psi2() {
        for &(d, th) in &[(0.1, 0.0), (2.0, 0.5), (300.0, -1.3)] {
            let e = eigen_3x3(&geom(1.0, d, th));
            assert!(rel(e.gamma2 + e.gamma3, e.gamma1) < 1e-14);
        }
    }

    #[test]
    fn three_pol_far_field_split() {
        // Delta -> D^2 so gamma2,3 -> psi2/2 +- 1/(2 D^2).
        let d = 1e3;
        let g = geom(1.0, d, 0.3);
        let e = eigen_3x3(&g);
        let half = e.gamma1 / 2.0;
        assert!(rel(e.gamma2 - half, 0.5 / (d * d)) < 1e-5);
        assert!(rel(half - e.gamma3, 0.5 / (d * d)) < 1e-5);
    }

    #[test]
    fn two_pol_broadside() {
        let g = geom(1.0, 1.5, 0.0);
        let p = psi_closed(&g);
        let d2 = 1.5 * 1.5;
        let e = eigen_2x3(&g);
        let spread = (p.psi4 - 2.0 * d2 * p.psi6).abs();
        assert!(rel(e.gamma2, d2 / 2.0 * (p.psi4 + spread)) < 1e-14);
        assert!(rel(e.gamma3, d2 / 2.0 * (p.psi4 - spread)) < 1e-14);
    }

    #[test]
    fn two_pol_product_is_block_determinant() {
        let g = geom(1.0, 0.9, 0.8);
        let w = gram_limit_2x3(&g);
        let e = eigen_2x3(&g);
        let det = w[1][1] * w[2][2] - w[1][2] * w[2][1];
        assert!(rel(e.gamma2 * e.gamma3, det) < 1e-12);
    }

    #[test]
    fn closed_forms_match_the_eigensolver() {
        for &(d, th) in &[(0.05, 1.2), (0.4, -0.3), (1.0, 0.9), (3.0, 0.1), (60.0, -1.4)] {
            let g = geom(1.0, d, th);
            for pol in [PolarizationConfig::TwoByThree, PolarizationConfig::ThreeByThree] {
                let closed = eigen_limit(&g, pol);
                let oracle = sym3_eigenvalues(&gram_limit(&g, pol)).unwrap();
                assert!(closed.is_strictly_ordered_positive());
                let m = gram_limit(&g, pol);
                // Rounding the block entries perturbs the small eigenvalue by
                // about eps * (|a d| + b^2) / gamma2 in absolute terms.
                let spread = (m[1][1] * m[2][2]).abs() + m[1][2] * m[1][2];
                let tol3 = 1e-12_f64.max(8.0 * f64::EPSILON * spread / (closed.gamma2 * closed.gamma3));
                for ((a, b), tol) in closed.as_array().iter().zip(oracle.as_array()).zip([1e-12, 1e-12, tol3]) {
                    assert!(rel(*a, b) < tol, "{pol:?} d={d} th={th}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn triple_constructor_checks_order() {
        assert!(EigenTriple::new(3.0, 2.0, 1.0).is_ok());
        assert!(EigenTriple::new(1.0, 2.0, 3.0).is_err());
        assert!(EigenTriple::new(f64::NAN, 2.0, 1.0).is_err());
        assert_eq!(EigenTriple::from_unsorted([1.0, 3.0, 2.0]).as_array(), [3.0, 2.0, 1.0]);
    }
}
