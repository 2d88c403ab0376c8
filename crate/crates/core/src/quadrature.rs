//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Panels are kept in a max-heap keyed by their error estimate; the worst
//! panel is bisected until the summed error estimate meets the requested
//! tolerance or the panel budget is exhausted. Error estimates follow the
//! QUADPACK `qk15` heuristics, including the round-off floor.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Hard cap on the number of panels.
pub const MAX_PANELS: usize = 1 << 18;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for XGK[1], XGK[3], XGK[5] and the centre node.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub panels: usize,
    pub evaluations: usize,
}

/// Tolerances and budget for [`AdaptiveQuadrature::integrate`].
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveQuadrature {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
}

impl AdaptiveQuadrature {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        AdaptiveQuadrature {
            rel_tol,
            abs_tol: 0.0,
            max_panels: MAX_PANELS,
        }
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<QuadratureResult> {
        self.integrate_with_breaks(f, &[a, b])
    }

    /// Integrates `f` over `[points[0], points[last]]`, seeding the panel
    /// set with the given sorted break points. Useful when the location of
    /// a peak is known in advance.
    pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
        &self,
        f: F,
        points: &[f64],
    ) -> Result<QuadratureResult> {
        if points.len() < 2 {
            return Err(Error::domain("quadrature needs at least two end points"));
        }
        if !(self.rel_tol >= 0.0 && self.abs_tol >= 0.0) || (self.rel_tol == 0.0 && self.abs_tol == 0.0) {
            return Err(Error::domain("quadrature tolerance must be positive"));
        }
        if points.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(Error::domain("quadrature break points must be sorted"));
        }

        let mut heap = BinaryHeap::new();
        let mut evaluations = 0;
        let mut value = 0.0;
        let mut error = 0.0;
        for w in points.windows(2) {
            if w[0] == w[1] {
                continue;
            }
            let panel = Panel::new(&f, w[0], w[1]);
            evaluations += 15;
            value += panel.value;
            error += panel.error;
            heap.push(panel);
        }
        if heap.is_empty() {
            return Ok(QuadratureResult {
                value: 0.0,
                error_estimate: 0.0,
                panels: 0,
                evaluations: 0,
            });
        }

        loop {
            let target = self.abs_tol.max(self.rel_tol * value.abs());
            if error <= target {
                break;
            }
            if heap.len() >= self.max_panels {
                return Err(Error::numeric(
                    format!(
                        "quadrature did not converge within {} panels (error estimate {:e})",
                        self.max_panels, error
                    ),
                    Some(value),
                ));
            }
            let worst = heap.pop().expect("heap is non-empty");
            let mid = 0.5 * (worst.a + worst.b);
            if !(worst.a < mid && mid < worst.b) {
                // Panel cannot be split further in floating point.
                return Err(Error::numeric(
                    "quadrature panel width reached machine resolution",
                    Some(value),
                ));
            }
            let left = Panel::new(&f, worst.a, mid);
            let right = Panel::new(&f, mid, worst.b);
            evaluations += 30;
            value += left.value + right.value - worst.value;
            error += left.error + right.error - worst.error;
            heap.push(left);
            heap.push(right);
        }

        // Re-sum to shed the drift of the running totals.
        let (value, error) = heap
            .iter()
            .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
        Ok(QuadratureResult {
            value,
            error_estimate: error,
            panels: heap.len(),
            evaluations,
        })
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl Panel {
    fn new<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
        let centre = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let fc = f(centre);
        let mut res_k = fc * WGK[7];
        let mut res_g = fc * WG[3];
        let mut res_abs = res_k.abs();
        let mut fv1 = [0.0; 7];
        let mut fv2 = [0.0; 7];
        for j in 0..7 {
            let dx = half * XGK[j];
            let f1 = f(centre - dx);
            let f2 = f(centre + dx);
            fv1[j] = f1;
            fv2[j] = f2;
            res_k += WGK[j] * (f1 + f2);
            res_abs += WGK[j] * (f1.abs() + f2.abs());
            if j % 2 == 1 {
                res_g += WG[j / 2] * (f1 + f2);
            }
        }
        let mean = 0.5 * res_k;
        let mut res_asc = WGK[7] * (fc - mean).abs();
        for j in 0..7 {
            res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
        }
        let value = res_k * half;
        res_abs *= half.abs();
        res_asc *= half.abs();
        let mut error = ((res_k - res_g) * half).abs();
        if res_asc != 0.0 && error != 0.0 {
            error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
        }
        if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
            error = error.max(50.0 * f64::EPSILON * res_abs);
        }
        Panel { a, b, value, error }
    }
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn integrates_polynomials_exactly() {
        let q = AdaptiveQuadrature::with_rel_tol(1e-13);
        let r = q.integrate(|x| x.powi(5) - 2.0 * x * x + 1.0, -1.0, 2.0).unwrap();
        let exact = (64.0 - 1.0) / 6.0 - 2.0 * (8.0 + 1.0) / 3.0 + 3.0;
        assert!((r.value - exact).abs() < 1e-13);
        assert_eq!(r.panels, 1);
    }

    #[test]
    fn resolves_a_sharp_peak() {
        // Lorentzian of width 1e-3 centred away from any break point.
        let w = 1e-3;
        let q = AdaptiveQuadrature::with_rel_tol(1e-12);
        let r = q.integrate(|x| w / ((x - 0.3).powi(2) + w * w), -1.0, 1.0).unwrap();
        let exact = (0.7 / w).atan() + (1.3 / w).atan();
        assert!((r.value - exact).abs() / exact < 1e-12, "{} vs {}", r.value, exact);
        assert!(r.error_estimate <= 1e-12 * r.value.abs());
    }

    #[test]
    fn break_points_are_honoured() {
        let q = AdaptiveQuadrature::with_rel_tol(1e-12);
        let r = q.integrate_with_breaks(|x| 1.0 / (1.0 + x * x), &[-1.0, 0.0, 0.0, 1.0]).unwrap();
        assert!((r.value - PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn empty_interval_is_zero() {
        let q = AdaptiveQuadrature::with_rel_tol(1e-10);
        assert_eq!(q.integrate(|x| x, 1.0, 1.0).unwrap().value, 0.0);
    }

    #[test]
    fn reports_best_estimate_when_budget_is_exhausted() {
        let q = AdaptiveQuadrature {
            rel_tol: 1e-14,
            abs_tol: 0.0,
            max_panels: 4,
        };
        let err = q.integrate(|x| 1.0 / x.sqrt(), 0.0, 1.0).unwrap_err();
        match err {
            Error::Numeric { best_estimate, .. } => {
                let est = best_estimate.unwrap();
                assert!(est > 1.0 && est < 2.0);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn rejects_unsorted_breaks() {
        let q = AdaptiveQuadrature::with_rel_tol(1e-10);
        assert!(matches!(
            q.integrate_with_breaks(|x| x, &[1.0, 0.0]),
            Err(Error::Domain(_))
        ));
    }
}
