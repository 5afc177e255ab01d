use critlab::hopf::{
    characteristic_roots, critical_residual, find_catastrophe, hopf_evaluate, hopf_profile, local_exponent,
    locate_breaking, max_gradient, CatastrophePoint, HopfError,
};
use critlab::initial_data::InitialDatum;
use proptest::prelude::*;

fn sech2() -> InitialDatum {
    InitialDatum::sech2(1.0).unwrap()
}

/// `-sech^2` shifted right by `shift`, with exact derivatives.
fn shifted_sech2(shift: f64) -> InitialDatum {
    let base = sech2();
    InitialDatum::from_fn_with_derivatives("shifted", move |x, j| base.derivative(x - shift, j), 4.0).unwrap()
}

/// `-exp(-q(x+1))` with `q(y) = -y + y^2/2 - y^3/3 + y^4/4 + y^6/6`: the
/// steepest point has a flat (quartic) maximum of `-u0'` and `f_L'''(u_c) = 0`.
fn quartic_degenerate() -> InitialDatum {
    InitialDatum::from_fn(
        "quartic",
        |x: f64| {
            let y = x + 1.0;
            let q = -y + y * y / 2.0 - y.powi(3) / 3.0 + y.powi(4) / 4.0 + y.powi(6) / 6.0;
            -(-q).exp()
        },
        3.0,
    )
    .unwrap()
}

#[test]
fn sech2_catastrophe_oracle() {
    let cp = find_catastrophe(&sech2()).unwrap();
    let s3 = 3f64.sqrt();
    assert!((cp.t_c - s3 / 8.0).abs() < 1e-12);
    assert!((cp.t_c - 0.216506).abs() < 1e-5);
    assert!((cp.u_c + 2.0 / 3.0).abs() < 1e-12);
    assert!((cp.xi_c - (-1.0 / s3).atanh()).abs() < 1e-10);
    let x_c = 6.0 * (s3 / 8.0) * (-2.0 / 3.0) + (-1.0 / s3).atanh();
    assert!((cp.x_c - x_c).abs() < 1e-10);
    assert!((cp.x_c + 1.524_504_3).abs() < 1e-7);
    assert!((cp.k - 81.0 * s3 / 16.0).abs() < 1e-9);
}

#[test]
fn catastrophe_scales_with_amplitude() {
    for &a in &[0.5, 2.0, 3.7] {
        let cp = find_catastrophe(&InitialDatum::sech2(a).unwrap()).unwrap();
        assert!((cp.t_c - 3f64.sqrt() / (8.0 * a)).abs() < 1e-11);
        assert!((cp.u_c + 2.0 * a / 3.0).abs() < 1e-11 * a);
    }
}

#[test]
fn catastrophe_invariants() {
    let d = sech2();
    let cp = find_catastrophe(&d).unwrap();
    assert!((cp.t_c - 1.0 / (-6.0 * d.derivative(cp.xi_c, 1))).abs() < 1e-14);
    assert!((cp.x_c - (6.0 * cp.t_c * d.value(cp.xi_c) + cp.xi_c)).abs() < 1e-14);
    assert!(cp.k > 0.0);
    // k agrees with the inverse-branch derivative
    assert!((cp.k + d.fl_derivative(cp.u_c, 3).unwrap()).abs() < 1e-8);
}

#[test]
fn translation_invariance() {
    let base = find_catastrophe(&sech2()).unwrap();
    for &shift in &[-3.0, 0.75, 5.0] {
        let cp = find_catastrophe(&shifted_sech2(shift)).unwrap();
        assert!((cp.x_c - base.x_c - shift).abs() < 1e-9);
        assert!((cp.t_c - base.t_c).abs() < 1e-12);
        assert!((cp.u_c - base.u_c).abs() < 1e-12, "{} {}", cp.u_c, base.u_c);
        assert!((cp.k - base.k).abs() < 1e-8);
    }
}

#[test]
fn hopf_evaluate_oracles() {
    let d = sech2();
    assert_eq!(hopf_evaluate(&d, 0.0, 0.0).unwrap(), -1.0);
    let far = 10.0 * d.decay_scale();
    assert!(hopf_evaluate(&d, far, 0.1).unwrap().abs() < 1e-10);
    assert!(hopf_evaluate(&d, -far, 0.2).unwrap().abs() < 1e-10);
    let cp = find_catastrophe(&d).unwrap();
    let u = hopf_evaluate(&d, cp.x_c, cp.t_c - 1e-6).unwrap();
    assert!((u - cp.u_c).abs() < 1e-1);
}

#[test]
fn hopf_residual_is_tiny() {
    let d = sech2();
    for &(x, t) in &[(-1.0, 0.1), (-1.5, 0.2), (0.3, 0.05), (-2.5, 0.21)] {
        let roots = characteristic_roots(&d, x, t).unwrap();
        assert_eq!(roots.len(), 1);
        let xi = roots[0];
        assert!((xi + 6.0 * t * d.value(xi) - x).abs() < 1e-12);
    }
}

#[test]
fn multivalued_after_breaking() {
    let d = sech2();
    let cp = find_catastrophe(&d).unwrap();
    let t = cp.t_c + 0.1;
    let x = cp.x_c + 6.0 * 0.1 * cp.u_c;
    match hopf_evaluate(&d, x, t) {
        Err(HopfError::Multivalued { roots, .. }) => {
            assert_eq!(roots.len(), 3);
            for xi in roots {
                assert!((xi + 6.0 * t * d.value(xi) - x).abs() < 1e-11);
            }
        }
        other => panic!("expected multivalued, got {other:?}"),
    }
    assert!(matches!(hopf_evaluate(&d, 0.0, -1.0), Err(HopfError::NegativeTime(_))));
}

#[test]
fn single_valued_before_breaking_on_fine_grid() {
    let d = sech2();
    let cp = find_catastrophe(&d).unwrap();
    let t = 0.999 * cp.t_c;
    let xs: Vec<f64> = (0..2001).map(|i| -6.0 + 10.0 * i as f64 / 2000.0).collect();
    let u = hopf_profile(&d, &xs, t).unwrap();
    assert_eq!(u.len(), xs.len());
    assert!(u.iter().all(|v| *v < 0.0 && *v >= -1.0));
}

#[test]
fn gradient_grows_without_bound() {
    let d = sech2();
    let cp = find_catastrophe(&d).unwrap();
    let mut prev = max_gradient(&d, 0.0);
    for m in 1..=6 {
        let g = max_gradient(&d, cp.t_c * (1.0 - 10f64.powi(-m)));
        assert!(g > 5.0 * prev, "m={m}: {g} vs {prev}");
        prev = g;
    }
    assert!(prev > 1e5);
}

#[test]
fn cube_root_law_at_catastrophe() {
    let d = sech2();
    let cp = find_catastrophe(&d).unwrap();
    let mut offsets = Vec::new();
    for j in 0..=12 {
        let m = 1e-6 * 10f64.powf(3.0 * j as f64 / 12.0);
        offsets.push(m);
        offsets.push(-m);
    }
    let fit = local_exponent(&d, &cp, &offsets).unwrap();
    assert!((fit.slope - 1.0 / 3.0).abs() < 0.02, "slope {}", fit.slope);
    // translation leaves the exponent unchanged
    let shifted = shifted_sech2(2.0);
    let cp2 = find_catastrophe(&shifted).unwrap();
    let fit2 = local_exponent(&shifted, &cp2, &offsets).unwrap();
    assert!((fit2.slope - fit.slope).abs() < 1e-4);
}

#[test]
fn local_exponent_rejects_bad_offsets() {
    let d = sech2();
    let cp = find_catastrophe(&d).unwrap();
    assert_eq!(local_exponent(&d, &cp, &[1e-4, 1e-3]), Err(HopfError::BadOffsets));
    assert_eq!(local_exponent(&d, &cp, &[-1e-9, 1e-3]), Err(HopfError::BadOffsets));
}

#[test]
fn quartic_degenerate_datum() {
    let d = quartic_degenerate();
    let (xi, slope) = d.steepest_descent();
    assert!((xi + 1.0).abs() < 1e-2);
    assert!((slope - 1.0).abs() < 1e-9);
    let located = locate_breaking(&d).unwrap();
    assert!(located.k.abs() < 1e-6, "k = {}", located.k);
    assert!(matches!(find_catastrophe(&d), Err(HopfError::Genericity { .. })));
    // exact breaking data for this profile
    let cp = CatastrophePoint {
        x_c: -2.0,
        t_c: 1.0 / 6.0,
        u_c: -1.0,
        xi_c: -1.0,
        k: 0.0,
    };
    let mut offsets = Vec::new();
    for j in 0..=9 {
        let m = 1e-8 * 10f64.powf(3.0 * j as f64 / 9.0) * 1.01;
        offsets.push(m);
        offsets.push(-m);
    }
    let fit = local_exponent(&d, &cp, &offsets).unwrap();
    assert!((fit.slope - 0.2).abs() < 0.03, "slope {}", fit.slope);
    assert!((fit.slope - 1.0 / 3.0).abs() > 0.1);
}

#[test]
fn critical_residual_vanishes_at_catastrophe() {
    let d = sech2();
    let cp = find_catastrophe(&d).unwrap();
    let r = critical_residual(&d, cp.x_c, cp.t_c, cp.u_c).unwrap();
    for v in r {
        assert!(v.abs() < 1e-8, "{r:?}");
    }
    let later = critical_residual(&d, cp.x_c, cp.t_c + 1.0, cp.u_c).unwrap();
    assert_eq!(later[2], r[2]);
}

#[test]
fn critical_residual_recovers_datum_at_time_zero() {
    let d = sech2();
    for &xh in &[-3.0, -1.2, -0.4] {
        let r = critical_residual(&d, xh, 0.0, d.value(xh)).unwrap();
        assert!(r[0].abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn unique_root_before_breaking(x in -8.0f64..6.0, frac in 0.0f64..0.995) {
        let d = sech2();
        let t = frac * 3f64.sqrt() / 8.0;
        let roots = characteristic_roots(&d, x, t).unwrap();
        prop_assert_eq!(roots.len(), 1);
        let xi = roots[0];
        prop_assert!((xi + 6.0 * t * d.value(xi) - x).abs() < 1e-12);
    }
}
