use critlab::painleve::*;
use num_complex::Complex64;
use std::f64::consts::PI;

fn opts(x_max: f64, n: usize) -> P12Options {
    P12Options {
        x_max,
        n,
        ..Default::default()
    }
}

#[test]
fn p12_residuals_for_unit_times() {
    let sols = solve_p12_family(&[-1.0, 0.0, 1.0], &P12Options::default()).unwrap();
    for s in &sols {
        assert!(s.residual_norm < 1e-8, "T = {}: {}", s.t, s.residual_norm);
        assert!(s.u.iter().all(|v| v.is_finite()));
    }
    assert_eq!(sols[0].t, -1.0);
    assert_eq!(sols[2].t, 1.0);
    // direct solves agree with continuation
    for s in &sols {
        let d = solve_p12(s.t, &P12Options::default()).unwrap();
        let diff = d.u.iter().zip(&s.u).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(diff < 1e-9, "T = {}: {diff}", s.t);
    }
}

#[test]
fn p12_domain_doubling_oracle() {
    let a = solve_p12(0.0, &opts(200.0, 8000)).unwrap();
    let b = solve_p12(0.0, &opts(400.0, 16000)).unwrap();
    let (ua, ub) = (a.evaluate_u(0.0).unwrap(), b.evaluate_u(0.0).unwrap());
    assert!((ua - ub).abs() < 1e-6 * ub.abs(), "{ua} vs {ub}");
}

#[test]
fn p12_far_field_probe() {
    let s = solve_p12(0.0, &opts(1200.0, 24000)).unwrap();
    let u = s.evaluate_u(-1000.0).unwrap();
    assert!((u - 6000f64.cbrt()).abs() < 0.05, "{u}");
    assert!((6000f64.cbrt() - 18.1712).abs() < 1e-4);
}

#[test]
fn p12_boundary_and_nodes() {
    let s = solve_p12(0.0, &opts(60.0, 2400)).unwrap();
    let last = s.nodes() - 1;
    assert_eq!(s.x(0), -60.0);
    assert_eq!(s.x(last), 60.0);
    assert!((s.u[last] + 360f64.cbrt()).abs() < 0.1 * 360f64.cbrt());
    assert!((s.u[0] - 360f64.cbrt()).abs() < 0.1 * 360f64.cbrt());
    assert!(s.boundary_error < 0.1 * 360f64.cbrt());
    for j in [0, 17, 1200, last] {
        assert_eq!(s.evaluate_u(s.x(j)).unwrap(), s.u[j]);
    }
    assert!(matches!(s.evaluate_u(60.5), Err(PainleveError::OutOfDomain { .. })));
}

#[test]
fn p12_mid_node_interpolation_matches_refined_grid() {
    let coarse = solve_p12(0.5, &opts(100.0, 8000)).unwrap();
    let fine = solve_p12(0.5, &opts(100.0, 16000)).unwrap();
    for j in [2000, 3999, 4000, 5000, 6100] {
        let x = coarse.x(j) + coarse.h / 2.0;
        // the mid-node of the coarse grid is a node of the fine grid
        let k = 2 * j + 1;
        assert!((fine.x(k) - x).abs() < 1e-12);
        let err = (coarse.evaluate_u(x).unwrap() - fine.u[k]).abs();
        assert!(err < 1e-6, "x = {x}: {err}");
    }
}

#[test]
fn p12_kdv_consistency() {
    let o = opts(100.0, 8000);
    let s = solve_p12(0.0, &o).unwrap();
    let err = kdv_consistency(&s, 2e-3, 50.0, &o).unwrap();
    assert!(err < 1e-4, "{err}");
}

#[test]
fn p12_refinement_order() {
    // error in U(0) against a fine reference on a fixed domain
    let reference = solve_p12(0.0, &opts(50.0, 8000)).unwrap().evaluate_u(0.0).unwrap();
    let e = |n| (solve_p12(0.0, &opts(50.0, n)).unwrap().evaluate_u(0.0).unwrap() - reference).abs();
    let (e1, e2) = (e(500), e(1000));
    let order = (e1 / e2).log2();
    assert!(order >= 3.5, "order {order} ({e1:e}, {e2:e})");
}

#[test]
fn p12_asymptote_approach_is_inverse_square() {
    // the first correction to the cubic branch at T = 0 is X^{-2}/36
    let s = solve_p12(0.0, &opts(200.0, 8000)).unwrap();
    let fit = asymptote_fit(&s, 25.0, 100.0).unwrap();
    assert!((fit.slope + 2.0).abs() < 0.05, "{}", fit.slope);
    let x: f64 = 80.0;
    let dev = s.evaluate_u(x).unwrap() - asymptote(x);
    assert!((dev * x * x * 36.0 - 1.0).abs() < 0.05, "{dev}");
}

#[test]
fn p12_real_and_convergent_on_t_range() {
    let ts: Vec<f64> = (-4..=4).map(|k| k as f64 * 0.5).collect();
    let sols = solve_p12_family(&ts, &opts(100.0, 4000)).unwrap();
    for s in sols {
        assert!(s.residual_norm < 1e-8 && s.u.iter().all(|v| v.is_finite()), "T = {}", s.t);
    }
}

#[test]
fn p12_rejects_bad_input() {
    assert!(matches!(solve_p12(f64::NAN, &P12Options::default()), Err(PainleveError::Domain(_))));
    assert!(matches!(solve_p12(0.0, &opts(-1.0, 100)), Err(PainleveError::Domain(_))));
    assert!(matches!(solve_p12(0.0, &opts(10.0, 4)), Err(PainleveError::Domain(_))));
    assert!(solve_p12_seeded(0.0, &opts(10.0, 100), &[0.0; 3]).is_err());
}

fn real_ray(r_far: f64) -> P1Trajectory {
    let seg = RaySegment {
        angle: 0.0,
        r_near: 0.0,
        r_far,
    };
    solve_tritronquee(&seg, &P1Options::default()).unwrap()
}

fn at(traj: &P1Trajectory, r: f64) -> Complex64 {
    let k = traj.path.iter().position(|z| (z.re - r).abs() < 1e-12).unwrap();
    traj.q[k]
}

#[test]
fn tritronquee_matches_published_origin_values() {
    let (q0, dq0) = anchor(&P1Options::default()).unwrap();
    assert!((q0.re + 0.1875543083404949).abs() < 1e-9 && q0.im.abs() < 1e-10, "{q0}");
    assert!((dq0.re + 0.3049055602612289).abs() < 1e-9 && dq0.im.abs() < 1e-10, "{dq0}");
}

#[test]
fn tritronquee_real_axis_asymptote_and_monotone_approach() {
    let t = real_ray(100.0);
    let q100 = at(&t, 100.0);
    assert!((q100.re + (100.0f64 / 6.0).sqrt()).abs() < 1e-2);
    assert!(t.q.iter().all(|q| q.im == 0.0));
    let devs: Vec<f64> = t
        .path
        .iter()
        .zip(&t.q)
        .filter(|(z, _)| z.re >= 20.0)
        .map(|(z, q)| (q.re + (z.re / 6.0).sqrt()).abs())
        .collect();
    assert!(devs.windows(2).all(|w| w[1] < w[0]));
    // the correction term is -Z^{-2}/48
    let z: f64 = 50.0;
    let dev = at(&t, z).re + (z / 6.0).sqrt();
    assert!((dev * z * z * 48.0 + 1.0).abs() < 1e-2, "{dev}");
}

#[test]
fn tritronquee_no_poles_on_positive_axis() {
    let t = real_ray(1.0);
    let k = t.path.len() - 1;
    let cont = continue_and_detect_poles(&t, k, Complex64::new(1.0, 0.0), 99.0, 1e-12).unwrap();
    assert!(cont.poles.is_empty());
    assert!((cont.path.last().unwrap().re - 100.0).abs() < 1e-9);
    let q = cont.q.last().unwrap();
    assert!((q.re + (100.0f64 / 6.0).sqrt()).abs() < 1e-2 && q.im.abs() < 1e-8);
}

#[test]
fn tritronquee_interior_endpoint_insensitive() {
    let vals: Vec<Complex64> = [50.0, 100.0, 200.0].iter().map(|&r| at(&real_ray(r), 10.0)).collect();
    for v in &vals {
        assert!((v - vals[0]).norm() < 1e-6);
    }
    let wide = P1Options {
        anchor_radius: 45.0,
        ..Default::default()
    };
    let (q_wide, _) = anchor(&wide).unwrap();
    let (q, _) = anchor(&P1Options::default()).unwrap();
    assert!((q - q_wide).norm() < 1e-10);
}

#[test]
fn tritronquee_complex_ray_follows_series() {
    let seg = RaySegment {
        angle: 0.4 * PI,
        r_near: 0.0,
        r_far: 60.0,
    };
    let o = P1Options::default();
    let t = solve_tritronquee(&seg, &o).unwrap();
    assert!(t.poles.is_empty());
    for (z, q) in t.path.iter().zip(&t.q).filter(|(z, _)| z.norm() >= 20.0) {
        let (s, _) = tritronquee_asymptotic(*z);
        assert!((q - s).norm() < 1e-10 * s.norm(), "Z = {z}");
    }
    assert!((t.q[0] - anchor(&o).unwrap().0).norm() < 1e-8);
    let dev = t.step_doubling_deviation(&seg, &o).unwrap();
    assert!(dev < 1e-6, "{dev}");
}

#[test]
fn tritronquee_series_satisfies_equation() {
    for &(r, theta) in &[(10.0, 0.0), (15.0, 0.4 * PI), (20.0, -0.6 * PI), (30.0, 0.75 * PI)] {
        let z = Complex64::from_polar(r, theta);
        let h = 1e-3;
        let (q, dq) = tritronquee_asymptotic(z);
        let (qp, dqp) = tritronquee_asymptotic(z + h);
        let (qm, dqm) = tritronquee_asymptotic(z - h);
        let qzz = (qp - 2.0 * q + qm) / (h * h);
        assert!((qzz - (6.0 * q * q - z)).norm() < 1e-6, "Z = {z}");
        assert!(((qp - qm) / (2.0 * h) - dq).norm() < 1e-8);
        assert!(((dqp - dqm) / (2.0 * h) - qzz).norm() < 1e-6);
    }
}

#[test]
fn tritronquee_real_ray_step_doubling() {
    let seg = RaySegment {
        angle: 0.0,
        r_near: 0.0,
        r_far: 50.0,
    };
    let o = P1Options::default();
    let dev = solve_tritronquee(&seg, &o).unwrap().step_doubling_deviation(&seg, &o).unwrap();
    assert!(dev < 1e-6, "{dev}");
}

#[test]
fn tritronquee_grid_refinement_order() {
    let seg = RaySegment {
        angle: 0.4 * PI,
        r_near: 0.0,
        r_far: 50.0,
    };
    let q1 = |density| {
        let o = P1Options {
            density,
            anchor_radius: 20.0,
            ..Default::default()
        };
        at_index(&solve_tritronquee(&seg, &o).unwrap(), 4)
    };
    let reference = q1(64);
    let (e1, e2) = ((q1(4) - reference).norm(), (q1(8) - reference).norm());
    let order = (e1 / e2).log2();
    assert!(order >= 3.5, "order {order} ({e1:e}, {e2:e})");
}

fn at_index(t: &P1Trajectory, k: usize) -> Complex64 {
    t.q[k]
}

#[test]
fn tritronquee_poles_on_negative_axis() {
    let t = real_ray(1.0);
    let cont = continue_and_detect_poles(&t, 0, Complex64::new(-1.0, 0.0), 7.0, 1e-12).unwrap();
    assert!(cont.poles.len() >= 2);
    let p = &cont.poles[0];
    assert!((p.z.re + 2.384168769569).abs() < 1e-6 && p.z.im.abs() < 1e-6, "{}", p.z);
    assert!(cont.poles.iter().all(|p| p.fit_error < 0.05));
    assert!(cont.poles.iter().all(|p| p.z.arg().abs() >= 0.8 * PI));
}

#[test]
fn tritronquee_rejects_outside_sector() {
    let seg = RaySegment {
        angle: 0.85 * PI,
        r_near: 0.0,
        r_far: 60.0,
    };
    assert!(matches!(solve_tritronquee(&seg, &P1Options::default()), Err(PainleveError::Domain(_))));
    let bad = RaySegment {
        angle: 0.0,
        r_near: 5.0,
        r_far: 1.0,
    };
    assert!(solve_tritronquee(&bad, &P1Options::default()).is_err());
}
