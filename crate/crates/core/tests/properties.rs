use bgsemi::asymptotics::{self, AsymptoticModel};
use bgsemi::bgamma::{self, BernsteinGammaEvaluator};
use bgsemi::density::{self, DensityOptions};
use bgsemi::determinacy::{self, Verdict};
use bgsemi::BernsteinFunction;
use num_complex::Complex64;
use proptest::prelude::*;

fn families() -> impl Strategy<Value = BernsteinFunction> {
    prop_oneof![
        Just(BernsteinFunction::identity()),
        (0.1f64..1.0, 0.0f64..3.0).prop_map(|(a, m)| BernsteinFunction::power_shifted(a, m).unwrap()),
        (0.1f64..1.0, 0.05f64..0.95, 0.0f64..2.0)
            .prop_map(|(a, gap, b)| BernsteinFunction::gamma_ratio(a, b + gap, b).unwrap()),
        (0.2f64..3.0).prop_map(|l| BernsteinFunction::log(l).unwrap()),
        Just(BernsteinFunction::bounded_ratio()),
    ]
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn functional_equation_at_random_points(phi in families(), a in 0.1f64..4.0, b in -30.0f64..30.0) {
        let ev = BernsteinGammaEvaluator::with_default_tol(phi).unwrap();
        let z = Complex64::new(a, b);
        let lhs = ev.eval_w(z + 1.0).unwrap();
        let rhs = ev.phi().eval_complex(z).unwrap() * ev.eval_w(z).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-9 * lhs.norm());
    }

    #[test]
    fn modulus_dominated_by_real_part(phi in families(), a in 0.1f64..4.0, b in -30.0f64..30.0) {
        let ev = BernsteinGammaEvaluator::with_default_tol(phi).unwrap();
        let w = ev.eval_w(Complex64::new(a, b)).unwrap().norm();
        let w_real = ev.eval_w(Complex64::new(a, 0.0)).unwrap().re;
        prop_assert!(w <= w_real * (1.0 + 1e-10));
    }

    #[test]
    fn inverse_round_trip(phi in families(), u in 0.01f64..50.0) {
        let y = phi.eval(u).unwrap();
        let back = phi.inverse(y).unwrap();
        prop_assert!((back - u).abs() <= 1e-7 * u.max(1.0), "u={u} back={back}");
    }

    #[test]
    fn phi_is_increasing_and_concave(phi in families(), u in 0.01f64..20.0, h in 0.01f64..5.0) {
        let (a, b, c) = (phi.eval(u).unwrap(), phi.eval(u + h).unwrap(), phi.eval(u + 2.0 * h).unwrap());
        prop_assert!(b >= a);
        prop_assert!(b - a >= c - b - 1e-12 * c.abs().max(1.0));
    }

    #[test]
    fn moments_are_log_convex(phi in families(), t in 0.2f64..3.0) {
        let m = bgamma::moments(&phi, t, 6).unwrap();
        let l = &m.log_values;
        prop_assert!(l[0].abs() < 1e-12);
        for n in 1..l.len() - 1 {
            prop_assert!(l[n - 1] + l[n + 1] >= 2.0 * l[n] - 1e-9);
        }
    }

    #[test]
    fn power_bounds_follow_index(alpha in 0.05f64..1.0, m in 0.0f64..3.0) {
        let phi = BernsteinFunction::power_shifted(alpha, m).unwrap();
        let b = determinacy::threshold_bounds(&phi).unwrap();
        prop_assert!(2.0 <= b.lower.0);
        prop_assert!(b.lower.0 <= b.upper.0);
        prop_assert!((b.lower.0 - 2.0 / alpha).abs() <= 1e-9 * b.lower.0);
    }

    #[test]
    fn gamma_ratio_bounds_ordered(alpha in 0.05f64..1.0, gap in 0.05f64..0.95, b in 0.0f64..2.0) {
        let phi = BernsteinFunction::gamma_ratio(alpha, b + gap, b).unwrap();
        let b = determinacy::threshold_bounds(&phi).unwrap();
        prop_assert!(2.0 <= b.lower.0 && b.lower.0 <= b.upper.0);
    }

    #[test]
    fn subunit_powers_are_self_neglecting(p in 0.1f64..0.9) {
        let us = [1e2, 1e3, 1e4, 1e5, 1e6];
        let r = asymptotics::self_neglecting_check(|u| Ok(u.powf(p)), &us, &[1.0, -1.0, 3.0]).unwrap();
        prop_assert!(r.pass, "p={p} dev={}", r.max_deviation);
    }

    #[test]
    fn gaussian_convolution_is_symmetric(v1 in 0.2f64..5.0, v2 in 0.2f64..5.0, y in 1.0f64..40.0) {
        let (a, b) = (AsymptoticModel::gaussian(v1), AsymptoticModel::gaussian(v2));
        let (p12, e12) = asymptotics::gaussian_tail_convolve(&a, &b, y).unwrap();
        let (p21, e21) = asymptotics::gaussian_tail_convolve(&b, &a, y).unwrap();
        prop_assert!((p12 - p21).abs() <= 1e-9 * p12.abs().max(1.0));
        prop_assert!((e12 - e21).abs() <= 1e-9 * e12.abs().max(1.0));
    }
}

proptest! {
    #![proptest_config(config(8))]

    #[test]
    fn verdict_is_monotone_in_t(alpha in 0.3f64..1.0, m in 0.0f64..2.0, t1 in 0.5f64..8.0, dt in 0.1f64..4.0) {
        let phi = BernsteinFunction::power_shifted(alpha, m).unwrap();
        let v1 = determinacy::verdict(&phi, t1).unwrap().verdict;
        let v2 = determinacy::verdict(&phi, t1 + dt).unwrap().verdict;
        if v2 == Verdict::Determinate {
            prop_assert_eq!(v1, Verdict::Determinate);
        }
        if v1 == Verdict::Indeterminate {
            prop_assert_eq!(v2, Verdict::Indeterminate);
        }
    }

    #[test]
    fn grid_evaluation_is_deterministic(t in 0.5f64..2.0) {
        let ev = BernsteinGammaEvaluator::with_default_tol(BernsteinFunction::identity()).unwrap();
        let xs: Vec<f64> = (1..=6).map(|i| 0.5 * i as f64).collect();
        let opts = DensityOptions::fixed(1e-8);
        let a = density::density_grid_seq(&ev, t, 0, &xs, &opts).unwrap();
        let b = density::density_grid(&ev, t, 0, &xs, &opts).unwrap();
        prop_assert_eq!(a.points, b.points);
    }
}

#[test]
fn derivative_matches_finite_difference() {
    for phi in bgsemi::bernstein::catalog_samples() {
        for u in [0.3, 1.0, 4.0, 20.0] {
            let h = 1e-5 * u;
            let fd = (phi.eval(u + h).unwrap() - phi.eval(u - h).unwrap()) / (2.0 * h);
            let d = phi.derivative(u).unwrap();
            assert!((fd - d).abs() <= 1e-6 * d.abs().max(1e-3), "{} u={u}: {fd} vs {d}", phi.label());
        }
    }
}
