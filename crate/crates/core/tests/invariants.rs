//! Properties that tie several modules together.

use fgig::convolution::subordination_at;
use fgig::levy::{fsd_discriminant, fsd_report, fsd_threshold};
use fgig::measures::{
    build_fgig, build_free_poisson, kolmogorov_distance, moment, pushforward_reciprocal, FreePoissonParams,
};
use fgig::params::{
    invert_params, quartic_expanded, solve_support, spectral_roots, NaturalParams, SpreadForm,
};
use fgig::transforms::{cauchy, cauchy_from_r, fgig_cauchy, r_fgig, r_free_poisson};
use num_complex::Complex64;
use proptest::prelude::*;

fn triple() -> impl Strategy<Value = NaturalParams> {
    (-1.0f64..1.0, -1.0f64..1.0, -4.0f64..4.0)
        .prop_map(|(la, lb, l)| NaturalParams::new(10f64.powf(la), 10f64.powf(lb), l).unwrap())
}

fn lower_point() -> impl Strategy<Value = Complex64> {
    (-2.0f64..1.0, 0.01f64..3.1).prop_map(|(lr, th)| Complex64::from_polar(10f64.powf(lr), -th))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn mass_and_mean_match_first_cumulant(p in triple()) {
        let m = build_fgig(&p, 256).unwrap();
        prop_assert!((m.mass() - 1.0).abs() <= 1e-10);
        let mean = moment(&m, 1).unwrap();
        let k1 = r_fgig(&p, Complex64::new(0.0, 0.0)).unwrap().re;
        prop_assert!((mean - k1).abs() <= 1e-9 * k1.abs(), "{mean} vs {k1}");
    }

    #[test]
    fn reciprocal_law_is_inverted_family(p in triple()) {
        let m = build_fgig(&p, 256).unwrap();
        let inv = pushforward_reciprocal(&m).unwrap();
        let q = invert_params(&p);
        let target = build_fgig(&q, 256).unwrap();
        prop_assert!(kolmogorov_distance(&inv, &target) <= 1e-8);
        let (s, t) = (solve_support(&p).unwrap(), solve_support(&q).unwrap());
        prop_assert!((t.a - 1.0 / s.b).abs() <= 1e-10 * t.a);
        prop_assert!((t.b - 1.0 / s.a).abs() <= 1e-10 * t.b);
    }

    #[test]
    fn r_additivity_with_free_poisson(p in triple(), z in lower_point()) {
        prop_assume!(p.lambda > 0.05);
        let start = NaturalParams::new(p.alpha, p.beta, -p.lambda).unwrap();
        let fp = FreePoissonParams::new(1.0 / p.alpha, p.lambda).unwrap();
        let lhs = r_fgig(&p, z).unwrap();
        let rhs = r_fgig(&start, z).unwrap() + r_free_poisson(&fp, z).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-10 * lhs.norm().max(1.0));
    }

    #[test]
    fn cauchy_from_r_matches_closed_form(p in triple(), z in lower_point()) {
        let z = z.conj();
        let s = solve_support(&p).unwrap();
        let r = |w: Complex64| r_fgig(&p, w);
        let g = cauchy_from_r(&r, z, None).unwrap();
        let direct = fgig_cauchy(&p, &s, z);
        prop_assert!((g - direct).norm() <= 1e-8 * direct.norm().max(1.0), "{g} vs {direct}");
    }

    #[test]
    fn quartic_is_even_in_lambda(p in triple(), z in -3.0f64..3.0) {
        let q = NaturalParams::new(p.alpha, p.beta, -p.lambda).unwrap();
        let f = quartic_expanded(&p, &solve_support(&p).unwrap(), z);
        let g = quartic_expanded(&q, &solve_support(&q).unwrap(), z);
        prop_assert!((f - g).abs() <= 1e-10 * f.abs().max(g.abs()).max(p.alpha * p.alpha));
    }

    #[test]
    fn fsd_coefficient_positive_and_threshold_is_root(p in triple()) {
        let rep = fsd_report(&p).unwrap();
        prop_assert!(rep.quadratic_coefficient > 0.0);
        prop_assert!(rep.agrees);
        let s = rep.spread;
        let l = fsd_threshold(s.diff_sq, s.sum_sq);
        let d = fsd_discriminant(&SpreadForm { lambda: l, ..s });
        // D is a ratio; compare with its size one unit of λ away
        let scale = fsd_discriminant(&SpreadForm { lambda: 0.0, ..s }).abs();
        prop_assert!(d.abs() <= 1e-9 * scale.max(1.0), "D(λ*) = {d}");
    }
}

#[test]
fn subordination_identity_and_herglotz() {
    let p = NaturalParams::new(2.0, 8.0, -1.0).unwrap();
    let mu = build_fgig(&p, 256).unwrap();
    let nu = build_free_poisson(&FreePoissonParams::new(0.5, 1.0).unwrap(), 256).unwrap();
    for (x, y) in [(0.5, 1.0), (2.0, 0.1), (3.5, 0.01), (6.0, 0.3), (-1.0, 2.0)] {
        let z = Complex64::new(x, y);
        let s = subordination_at(&mu, &nu, z).unwrap();
        let g = cauchy(&mu, s.omega1).unwrap();
        assert!((s.omega1 + s.omega2 - 1.0 / g - z).norm() <= 1e-10, "{z}: {s:?}");
        assert!(s.omega1.im >= y && s.omega2.im >= y);
        assert!(s.identity_residual(&nu, z) <= 1e-10);
    }
}

#[test]
fn eta_equals_alpha_only_at_zero_lambda() {
    for l in [-2.0, -1e-3, 0.0, 1e-3, 2.0] {
        let r = spectral_roots(&NaturalParams::new(1.3, 0.7, l).unwrap()).unwrap();
        if l == 0.0 {
            assert!((r.eta - 1.3).abs() <= 1e-12 * 1.3);
        } else {
            assert!(r.eta > 1.3);
        }
    }
}
