use holomux::geometry::psi_closed;
use holomux::holographic::{delta, eigen_2x3, eigen_3x3};
use holomux::multiplexing::{classify, n_active, threshold_reference, thresholds_from_eigs, waterfill};
use holomux::regions::{boundary_solve, cell_geometry, cell_label, BoundarySearch};
use holomux::{EigenTriple, PolarizationConfig, ScenarioGeometry, ThresholdIndex};
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn pol_strategy() -> impl Strategy<Value = PolarizationConfig> {
    prop_oneof![Just(PolarizationConfig::ThreeByThree), Just(PolarizationConfig::TwoByThree)]
}

fn which_strategy() -> impl Strategy<Value = ThresholdIndex> {
    prop_oneof![Just(ThresholdIndex::First), Just(ThresholdIndex::Second)]
}

/// Elevation in radians within +-85 degrees and log-uniform `D/L` in [0.05, 100].
fn geometry_strategy() -> impl Strategy<Value = (f64, f64)> {
    (-85.0f64..85.0, (0.05f64).ln()..(100.0f64).ln()).prop_map(|(t, lx)| (t.to_radians(), lx.exp()))
}

fn eigen_strategy() -> impl Strategy<Value = (EigenTriple, f64)> {
    (0.1f64..10.0, 1e-3f64..1.0, 1e-3f64..1.0).prop_map(|(g1, f2, f3)| {
        let g2 = g1 * f2;
        let g3 = g2 * f3;
        (EigenTriple::new(g1, g2, g3).unwrap(), g1)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn waterfill_spends_the_budget_on_a_common_level((eigs, psi2) in eigen_strategy(), total in 0.0f64..1e4) {
        let alloc = waterfill(&eigs, psi2, total).unwrap();
        let s = alloc.powers;
        let sum: f64 = s.iter().sum();
        prop_assert!((sum - total).abs() <= 1e-12 * total.max(1.0));
        prop_assert!(s[0] >= s[1] && s[1] >= s[2] && s[2] >= 0.0);
        let g = eigs.as_array();
        let k = usize::from(alloc.n_plus);
        for i in 0..k {
            let level = psi2 / g[i] + s[i];
            prop_assert!(rel(level, alloc.waterlevel_inv) < 1e-10);
        }
        for i in k..3 {
            prop_assert_eq!(s[i], 0.0);
            prop_assert!(alloc.waterlevel_inv <= psi2 / g[i] * (1.0 + 1e-12));
        }
    }

    #[test]
    fn stream_count_from_thresholds_matches_waterfilling((eigs, psi2) in eigen_strategy(), total in 0.0f64..1e4) {
        let thr = thresholds_from_eigs(&eigs, psi2).unwrap();
        let alloc = waterfill(&eigs, psi2, total).unwrap();
        prop_assert_eq!(n_active(total, &thr), alloc.n_plus);
    }

    #[test]
    fn moments_satisfy_their_sign_and_definiteness_constraints((theta, x) in geometry_strategy()) {
        let g = ScenarioGeometry::normalized(theta, x).unwrap();
        let p = psi_closed(&g);
        let dc2 = g.d_cos().powi(2);
        prop_assert!(p.psi2 > 0.0 && p.psi4 > 0.0 && p.psi6 > 0.0);
        prop_assert!(dc2 * p.psi4 < p.psi2);
        prop_assert!(p.psi3bar * theta.sin() <= 0.0 && p.psi5bar * theta.sin() <= 0.0);
        prop_assert!(dc2 * p.psi6 * (p.psi4 - dc2 * p.psi6) > dc2 * p.psi5bar * p.psi5bar);
    }

    #[test]
    fn limit_eigenvalues_are_ordered_and_dominated((theta, x) in geometry_strategy()) {
        let g = ScenarioGeometry::normalized(theta, x).unwrap();
        let full = eigen_3x3(&g);
        let dual = eigen_2x3(&g);
        prop_assert!(full.is_strictly_ordered_positive());
        prop_assert!(dual.is_strictly_ordered_positive());
        prop_assert!(psi_closed(&g).psi2 * delta(&g) > 1.0);
        prop_assert!(full.gamma2 >= dual.gamma2 && full.gamma3 >= dual.gamma3);
    }

    #[test]
    fn eigenvalues_scale_as_inverse_square_length((theta, x) in geometry_strategy(), scale in 0.01f64..100.0, pol in pol_strategy()) {
        let unit = ScenarioGeometry::normalized(theta, x).unwrap();
        let scaled = ScenarioGeometry::new(scale, scale * x, theta).unwrap();
        let (a, b) = match pol {
            PolarizationConfig::ThreeByThree => (eigen_3x3(&unit), eigen_3x3(&scaled)),
            PolarizationConfig::TwoByThree => (eigen_2x3(&unit), eigen_2x3(&scaled)),
        };
        for (u, s) in a.as_array().iter().zip(b.as_array()) {
            prop_assert!(rel(s * scale * scale, *u) < 1e-9);
        }
        let ta = thresholds_from_eigs(&a, psi_closed(&unit).psi2).unwrap();
        let tb = thresholds_from_eigs(&b, psi_closed(&scaled).psi2).unwrap();
        prop_assert!(rel(tb.snr1, ta.snr1) < 1e-9 && rel(tb.snr2, ta.snr2) < 1e-9);
    }

    #[test]
    fn thresholds_are_mirror_symmetric((theta, x) in geometry_strategy(), pol in pol_strategy(), which in which_strategy()) {
        let up = threshold_reference(theta, x, pol, which).unwrap();
        let down = threshold_reference(-theta, x, pol, which).unwrap();
        prop_assert!(rel(down, up) < 1e-12);
    }

    #[test]
    fn boundary_crossings_reproduce_the_reference_snr(
        theta_deg in -60.0f64..60.0,
        snr0 in 10.0f64..1e4,
        pol in pol_strategy(),
        which in which_strategy(),
    ) {
        let theta = theta_deg.to_radians();
        let boundary = boundary_solve(theta, snr0, pol, which, &BoundarySearch::default());
        if let Ok(boundary) = boundary {
            for x in boundary.crossings {
                let thr = threshold_reference(theta, x, pol, which).unwrap();
                prop_assert!(rel(thr, snr0) < 1e-8, "x={} thr={} snr0={}", x, thr, snr0);
            }
        }
    }

    #[test]
    fn map_labels_follow_the_ray_classification(y in -3.0f64..3.0, z in 0.01f64..3.0, snr0 in 1.0f64..1e4, pol in pol_strategy()) {
        let label = cell_label(y, z, snr0, pol);
        prop_assert_eq!(label, cell_label(y, -z, snr0, pol));
        let geom = cell_geometry(y, z).unwrap();
        prop_assert_eq!(label, classify(&geom, snr0, pol).unwrap());
    }
}
