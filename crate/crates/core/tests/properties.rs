//! Property-based invariants for the pure-math modules.

use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::TAU;

use teichlab::disk::{
    apply_moebius, liouville_box, liouville_integral, CircleMap, GeodesicBox, MoebiusMap,
};
use teichlab::lamination::lamination_mass;
use teichlab::modulus::{quad_modulus, Quadrilateral};
use teichlab::quad_diff::QuadraticDifferential;
use teichlab::teich::{dilatation, DeformationParameter};

/// Four angles in counterclockwise order with all gaps at least `min_gap`.
fn arb_box(min_gap: f64) -> impl Strategy<Value = GeodesicBox> {
    (
        0.0..TAU,
        min_gap..(TAU / 3.0),
        min_gap..(TAU / 3.0),
        min_gap..(TAU / 3.0),
    )
        .prop_filter_map("gaps must leave room for the fourth", move |(a, g1, g2, g3)| {
            let leftover = TAU - g1 - g2 - g3;
            if leftover <= min_gap {
                return None;
            }
            Some(GeodesicBox::new(a, a + g1, a + g1 + g2, a + g1 + g2 + g3).unwrap())
        })
}

fn arb_moebius() -> impl Strategy<Value = MoebiusMap> {
    (0.0..0.8f64, 0.0..TAU, 0.0..TAU).prop_map(|(r, phase, rot)| {
        MoebiusMap::blaschke(Complex64::from_polar(r, phase))
            .unwrap()
            .compose(&MoebiusMap::rotation(rot))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn liouville_moebius_invariance(b in arb_box(0.15), m in arb_moebius()) {
        let diff = (liouville_box(&apply_moebius(&m, &b)) - liouville_box(&b)).abs();
        prop_assert!(diff <= 1e-10, "diff {diff}");
    }

    #[test]
    fn liouville_positive_and_swap_symmetric(b in arb_box(0.1)) {
        let v = liouville_box(&b);
        prop_assert!(v.is_finite() && v > 0.0);
        prop_assert!((v - liouville_box(&b.swapped())).abs() < 1e-12);
    }

    #[test]
    fn liouville_monotone_in_first_arc(b in arb_box(0.2)) {
        let wider = GeodesicBox::new(
            b.a.angle() - 0.05,
            b.b.angle() + 0.05,
            b.c.angle(),
            b.d.angle(),
        ).unwrap();
        prop_assert!(liouville_box(&wider) > liouville_box(&b));
    }

    #[test]
    fn circle_map_degree_one(m in arb_moebius(), alpha in 0.0..TAU) {
        let h = CircleMap::from_moebius(&m, 512).unwrap();
        let d = h.eval(alpha + TAU) - h.eval(alpha) - TAU;
        prop_assert!(d.abs() < 1e-12, "degree defect {d}");
        // monotone between arbitrary nearby angles
        prop_assert!(h.eval(alpha + 1e-3) >= h.eval(alpha));
    }

    #[test]
    fn deformation_charts_roundtrip(re in -0.9f64..0.9, im in -0.9f64..0.9) {
        prop_assume!((re * re + im * im) < 0.9 * 0.9);
        let lambda = Complex64::new(re, im);
        let p = DeformationParameter::from_disk(lambda).unwrap();
        prop_assert!(p.s() > 0.0);
        prop_assert!((p.lambda() - lambda).norm() <= 1e-12);
        // s |1 + lambda|^2 = 1 - |lambda|^2
        let lhs = p.s() * (Complex64::new(1.0, 0.0) + lambda).norm_sqr();
        prop_assert!((lhs - (1.0 - lambda.norm_sqr())).abs() <= 1e-12);
    }

    #[test]
    fn dilatation_matches_radical(s in 0.2f64..8.0, t in -8.0f64..8.0) {
        let k = dilatation(Complex64::new(s, t)).unwrap();
        let plus = ((1.0 + s).powi(2) + t * t).sqrt();
        let minus = ((1.0 - s).powi(2) + t * t).sqrt();
        let radical = (plus + minus) / (plus - minus);
        prop_assert!(k >= 1.0);
        prop_assert!((k - radical).abs() <= 1e-10 * radical, "{k} vs {radical}");
    }

    #[test]
    fn natural_parameter_derivative_is_sqrt_phi(
        c0re in 1.5f64..3.0, c0im in -0.5f64..0.5,
        c1re in -0.5f64..0.5, c1im in -0.5f64..0.5,
        zre in -0.6f64..0.6, zim in -0.6f64..0.6,
    ) {
        // |c0| > |c1| keeps psi zero-free on the closed disk
        let phi = QuadraticDifferential::psi_squared(vec![
            Complex64::new(c0re, c0im),
            Complex64::new(c1re, c1im),
        ]).unwrap();
        let z = Complex64::new(zre, zim);
        let h = 1e-6;
        let fd = (phi.natural_parameter(z + Complex64::new(h, 0.0))
            - phi.natural_parameter(z - Complex64::new(h, 0.0))) / (2.0 * h);
        prop_assert!((fd - phi.sqrt_phi(z)).norm() < 1e-7);
    }
}

proptest! {
    // the quadrature and solver cases are costlier; keep the case count low
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn liouville_integral_matches_cross_ratio(b in arb_box(0.25)) {
        let v = liouville_integral(&b, 1e-5).unwrap();
        prop_assert!((v - liouville_box(&b)).abs() <= 1e-5);
    }

    #[test]
    fn rectangle_modulus_and_duality(a in 0.6f64..2.0, bl in 0.6f64..2.0) {
        let q = Quadrilateral::rectangle(a, bl, 48).unwrap();
        let m = quad_modulus(&q, 65).unwrap();
        prop_assert!((m.value - bl / a).abs() < 5e-3 * (bl / a).max(1.0));
        let s = quad_modulus(&q.swapped(), 65).unwrap();
        prop_assert!((m.value * s.value - 1.0).abs() < 1e-2);
    }

    #[test]
    fn lamination_mass_additive_in_first_arc(split in 0.2f64..0.8) {
        let phi = QuadraticDifferential::constant(1.0).unwrap();
        // chords x in [0, 1/2]; split the right arc at an interior angle
        let (lo, hi) = (0.5f64.acos(), 0.0f64.acos());
        let cut = lo + split * (hi - lo);
        let whole = GeodesicBox::new(lo, hi, TAU - hi, TAU - lo).unwrap();
        let first = GeodesicBox::new(lo, cut, TAU - hi, TAU - lo).unwrap();
        let second = GeodesicBox::new(cut, hi, TAU - hi, TAU - lo).unwrap();
        let mw = lamination_mass(&phi, 0.0, &whole, 512).unwrap();
        let m1 = lamination_mass(&phi, 0.0, &first, 512).unwrap();
        let m2 = lamination_mass(&phi, 0.0, &second, 512).unwrap();
        let tol = mw.error_estimate + m1.error_estimate + m2.error_estimate + 5e-3;
        prop_assert!(
            (m1.value + m2.value - mw.value).abs() <= tol,
            "{} + {} vs {}", m1.value, m2.value, mw.value
        );
    }
}
