use super::*;
use crate::group::GroupModel;
use proptest::prelude::*;

/// Independent profile `G(s)` by plain Gauss-Legendre in every variable.
fn oracle_profile(spec: &OscillatorySpec, s: f64) -> Complex64 {
    let space = &spec.space;
    let amp = &spec.amplitude;
    let c = amp.xi_decay;
    let th = gauss_legendre(64, 0.0, 2.0 * PI);
    let v = th.integrate_complex(|t1| {
        (amp.group)(&GroupElement::torus(&[t1]), &GroupElement::torus(&[s - t1]))
    }) / (4.0 * PI * PI);
    let (lo, hi) = ((-PI).max(-PI - s), PI.min(PI - s));
    if hi <= lo {
        return Complex64::new(0.0, 0.0);
    }
    let xr = gauss_legendre(300, lo, hi);
    let inner = |other: Option<f64>| {
        xr.integrate(|a| {
            let mut x = vec![a];
            let mut y = vec![a + s];
            if let Some(o) = other {
                x.insert(0, o);
                y.insert(0, o);
            }
            (amp.base)(&x) * chart_cutoff(space, &y)
        })
    };
    let total = match space.kind {
        SpaceKind::Torus1 => inner(None),
        SpaceKind::Sphere2 => {
            gauss_legendre(80, 0.0, PI).integrate(|o| inner(Some(o))) * (PI / c).sqrt()
        }
        _ => unreachable!(),
    };
    v * total
}

/// `√(π/c) ∫ G(s) e^{-s²/(4cμ²)} ds` after the substitution `s = 2√c μ u`.
fn oracle_integral(spec: &OscillatorySpec, mu: f64) -> Complex64 {
    let c = spec.amplitude.xi_decay;
    let scale = 2.0 * c.sqrt() * mu;
    if scale < 0.2 {
        let gh = gauss_hermite_scaled(60, std::f64::consts::FRAC_1_SQRT_2);
        gh.integrate_complex(|u| oracle_profile(spec, scale * u) * (-u * u).exp())
            * ((PI / c).sqrt() * scale)
    } else {
        let r = gauss_legendre(600, -2.0 * PI, 2.0 * PI);
        r.integrate_complex(|s| oracle_profile(spec, s) * (-s * s / (scale * scale)).exp())
            * (PI / c).sqrt()
    }
}

fn t1_random(seed: u64) -> OscillatorySpec {
    let s = SpaceModel::t1();
    OscillatorySpec::new(s.clone(), ProductAmplitude::random(&s, seed))
}

#[test]
fn direct_matches_closed_form_xi_integral() {
    let spec = t1_random(7);
    let di = DirectIntegrator::new(&spec).unwrap();
    for mu in [0.3, 0.05, 1e-3] {
        let d = di.eval(mu).unwrap();
        let o = oracle_integral(&spec, mu);
        let rel = (d.value() - o).norm() / o.norm();
        assert!(rel < 1e-9, "μ={mu}: {d:?} vs {o}");
        assert!(d.error < 1e-8 * o.norm(), "μ={mu}: {d:?}");
    }
}

#[test]
fn leading_coefficient_is_profile_at_zero() {
    for spec in [
        t1_random(3),
        OscillatorySpec::new(
            SpaceModel::s2(),
            ProductAmplitude::random(&SpaceModel::s2(), 5),
        ),
    ] {
        let l0 = leading_l0(&spec).unwrap();
        let g0 = oracle_profile(&spec, 0.0);
        assert!(
            (l0 - g0).norm() < 1e-9 * g0.norm(),
            "{:?}: {l0} vs {g0}",
            spec.space.kind
        );
    }
}

#[test]
fn stationary_phase_on_circle() {
    for spec in [
        OscillatorySpec::new(
            SpaceModel::t1(),
            ProductAmplitude::standard(&SpaceModel::t1()),
        ),
        t1_random(11),
    ] {
        let r = asymptotic_compare(&spec).unwrap();
        assert_eq!(r.kappa, 1);
        for row in r.rows.iter().filter(|row| row.mu <= 1e-3) {
            assert!((row.ratio - 1.0).abs() < 1e-5, "{row:?}");
        }
        assert!((r.slope - 1.0).abs() < 0.01, "slope {}", r.slope);
        assert_eq!(r.remainder.log_power, 0);
    }
}

#[test]
fn stationary_phase_on_sphere_band() {
    let s = SpaceModel::s2();
    let mut spec = OscillatorySpec::new(s.clone(), ProductAmplitude::random(&s, 2));
    spec.mu_grid = vec![1e-1, 1e-2, 1e-3];
    let r = asymptotic_compare(&spec).unwrap();
    assert!((r.rows[2].ratio - 1.0).abs() < 1e-5, "{:?}", r.rows);
}

#[test]
fn regularization_is_invisible() {
    let spec = t1_random(4);
    let di = DirectIntegrator::new(&spec).unwrap();
    for mu in [0.5, 0.1, 0.01] {
        let a = di.eval(mu).unwrap().value();
        let b = di.eval_regularized(mu, 1e-3).unwrap().value();
        assert!((a - b).norm() < 1e-9);
    }
}

#[test]
fn localization_error_is_superpolynomial() {
    let spec = t1_random(9);
    let r = localization_probe(&spec, 0.5, &[0.3, 0.25, 0.2, 0.15, 0.12, 0.1]).unwrap();
    assert!(r.order >= 3.0, "{r:?}");
}

#[test]
fn transverse_hessian_matches_jacobian() {
    assert!((transverse_hessian_det(&SpaceModel::t1(), &[0.4]).unwrap() - 1.0).abs() < 1e-8);
    let su2 = SpaceModel::su2();
    let x = [0.7, -1.1, 0.5];
    let d = transverse_hessian_det(&su2, &x).unwrap();
    let j = su2.k_group.canonical_jacobian(&x);
    assert!((d * j - 1.0).abs() < 1e-7, "{d} {j}");
}

#[test]
fn su2_leading_coefficient() {
    let s = SpaceModel::su2();
    let spec = OscillatorySpec::new(s.clone(), ProductAmplitude::standard(&s));
    let l0 = leading_l0(&spec).unwrap();
    // ∫_G ρ² dg by a radial rule.
    let g = GroupModel::su2();
    let r = gauss_legendre(200, 0.0, 2.0 * PI);
    let want = r.integrate(|t| {
        let rho = chart_cutoff(&s, &[t, 0.0, 0.0]);
        4.0 * PI * t * t * rho * rho * g.canonical_jacobian(&[t, 0.0, 0.0])
    }) / g.volume;
    assert!(
        (l0.re - want).abs() < 1e-8 && l0.im.abs() < 1e-10,
        "{l0} vs {want}"
    );
}

#[test]
fn disintegration_on_circle_by_quadrature() {
    let spec = t1_random(21);
    let c = disintegration_check(&spec, VolumeMethod::Quadrature, 4096).unwrap();
    let l0 = Complex64::new(c.l0_re, c.l0_im).norm();
    assert!(c.difference < 1e-8 * l0, "{c:?}");
}

#[test]
fn disintegration_on_sphere_by_monte_carlo() {
    let s = SpaceModel::s2();
    let spec = OscillatorySpec::new(s.clone(), ProductAmplitude::random(&s, 13));
    let c = disintegration_check(&spec, VolumeMethod::MonteCarlo { seed: 1 }, 40_000).unwrap();
    let h = Complex64::new(c.h_integral_re, c.h_integral_im).norm();
    assert!(
        c.difference < 5.0 * h * c.zero_level.error_bar + 1e-12,
        "{c:?}"
    );
    let l0 = Complex64::new(c.l0_re, c.l0_im).norm();
    assert!(c.difference < 0.01 * l0, "{c:?}");
}

#[test]
fn disintegration_on_su2() {
    let s = SpaceModel::su2();
    let spec = OscillatorySpec::new(s.clone(), ProductAmplitude::random(&s, 17));
    let c = disintegration_check(&spec, VolumeMethod::Quadrature, 20_000).unwrap();
    let l0 = Complex64::new(c.l0_re, c.l0_im).norm();
    assert!(c.difference < 1e-6 * l0, "{c:?}");
}

#[test]
fn rejects_bad_input() {
    let s = SpaceModel::su2();
    let spec = OscillatorySpec::new(s.clone(), ProductAmplitude::standard(&s));
    assert!(matches!(
        integral_direct(&spec, 0.1),
        Err(EquiheatError::Domain(_))
    ));
    let spec = t1_random(1);
    assert!(matches!(
        integral_direct(&spec, -1.0),
        Err(EquiheatError::Domain(_))
    ));
    assert!(ProductAmplitude::new(
        spec.amplitude.base.clone(),
        0.0,
        spec.amplitude.group.clone(),
        0.0
    )
    .is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn small_mu_ratio_is_one(seed in 0u64..10_000) {
        let spec = t1_random(seed);
        let l0 = leading_l0(&spec).unwrap();
        let d = integral_direct(&spec, 1e-3).unwrap();
        let lead = l0 * (2.0 * PI * 1e-3);
        prop_assert!((d.value() - lead).norm() < 1e-4 * lead.norm());
    }
}
