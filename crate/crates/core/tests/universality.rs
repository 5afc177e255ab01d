use critlab::hopf::{find_catastrophe, hopf_profile, CatastrophePoint};
use critlab::initial_data::InitialDatum;
use critlab::numerics::fit::fit_power_law;
use critlab::painleve::P12Options;
use critlab::spectral::{evolve, Equation, EvolutionSpec, EvolveOptions, FieldState, PeriodicGrid};
use critlab::universality::*;
use proptest::prelude::*;
use std::sync::OnceLock;

fn sech2() -> InitialDatum {
    InitialDatum::sech2(1.0).unwrap()
}

fn critical() -> CatastrophePoint {
    find_catastrophe(&sech2()).unwrap()
}

fn table() -> &'static PainleveTable {
    static TABLE: OnceLock<PainleveTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        PainleveTable::solve(
            1.0,
            21,
            &P12Options {
                x_max: 100.0,
                n: 4000,
                tol: 1e-10,
            },
        )
        .unwrap()
    })
}

fn fake_point(k: f64) -> CatastrophePoint {
    CatastrophePoint {
        x_c: 0.0,
        t_c: 1.0,
        u_c: -0.5,
        xi_c: 0.0,
        k,
    }
}

#[test]
fn constants_for_sech2() {
    let sc = compute_constants(&critical()).unwrap();
    assert!((8.0 * sc.k - 70.1481).abs() < 1e-3);
    assert!((sc.c1 - 0.5937).abs() < 1e-4);
    assert!((sc.c2 - 0.5449).abs() < 1e-4);
    assert_eq!(sc.c3, -4.0);
    assert!((sc.c4 - 1.9410).abs() < 1e-4, "{}", sc.c4);
    let q = 8.0 * sc.k;
    assert!((sc.c1 * q.powf(2.0 / 7.0) - 2.0).abs() < 1e-12);
    assert!((sc.c2 * q.powf(1.0 / 7.0) - 1.0).abs() < 1e-12);
    assert!((sc.c4 * q.powf(3.0 / 7.0) - 12.0).abs() < 1e-12);
}

#[test]
fn constants_trivial_cases_and_scaling() {
    let sc = compute_constants(&fake_point(0.125)).unwrap();
    assert!((sc.c1 - 2.0).abs() < 1e-15 && (sc.c2 - 1.0).abs() < 1e-15 && (sc.c4 - 12.0).abs() < 1e-14);
    assert_eq!(sc.c3, -3.0);
    let a = compute_constants(&fake_point(3.0)).unwrap();
    let b = compute_constants(&fake_point(3.0 * 128.0)).unwrap();
    assert!((a.c2 / b.c2 - 2.0).abs() < 1e-13);
    assert!((a.c1 / b.c1 - 4.0).abs() < 1e-13);
    assert!((a.c4 / b.c4 - 8.0).abs() < 1e-13);
    for k in [0.0, -1.0, f64::NAN] {
        assert!(matches!(compute_constants(&fake_point(k)), Err(UniversalityError::Genericity(_))));
    }
}

#[test]
fn coordinate_examples() {
    let sc = compute_constants(&critical()).unwrap();
    let cp = sc.cp;
    let eps = 0.07;
    assert_eq!(double_scaling_coords(cp.x_c, cp.t_c, eps, &sc), (0.0, 0.0));
    let (x, t) = double_scaling_coords(cp.x_c + eps.powf(6.0 / 7.0) / sc.c2, cp.t_c, eps, &sc);
    assert!((x - 1.0).abs() < 1e-14 && t == 0.0);
    let dt = 0.01;
    let (x, t) = double_scaling_coords(cp.x_c + sc.c3 * dt, cp.t_c + dt, eps, &sc);
    assert!(x.abs() < 1e-14 && t > 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn coordinates_invert_and_are_affine(
        x in -5.0f64..5.0, t in 0.0f64..0.5, eps in 0.01f64..0.5,
        dx in -1.0f64..1.0, dt in -0.1f64..0.1,
    ) {
        let sc = compute_constants(&critical()).unwrap();
        let (bx, bt) = double_scaling_coords(x, t, eps, &sc);
        let (x2, t2) = physical_coords(bx, bt, eps, &sc);
        prop_assert!((x2 - x).abs() < 1e-12 * (1.0 + x.abs()));
        prop_assert!((t2 - t).abs() < 1e-12);
        // affine: the image of a midpoint is the midpoint of the images
        let a = double_scaling_coords(x + dx, t + dt, eps, &sc);
        let b = double_scaling_coords(x - dx, t - dt, eps, &sc);
        prop_assert!(((a.0 + b.0) / 2.0 - bx).abs() < 1e-9 * (1.0 + bx.abs()));
        prop_assert!(((a.1 + b.1) / 2.0 - bt).abs() < 1e-9 * (1.0 + bt.abs()));
    }
}

#[test]
fn prediction_at_the_critical_point() {
    let sc = compute_constants(&critical()).unwrap();
    let cp = sc.cp;
    let u00 = table().evaluate(0.0, 0.0).unwrap();
    assert!((u00 + 0.41517).abs() < 1e-4, "{u00}");
    for eps in [0.1, 0.01] {
        let p = predict(cp.x_c, cp.t_c, eps, &sc, table()).unwrap();
        assert!((p - (cp.u_c + sc.c1 * eps.powf(2.0 / 7.0) * u00)).abs() < 1e-15);
    }
    assert!(predict(cp.x_c, cp.t_c, 0.0, &sc, table()).is_err());
    // outside the tabulated T range
    assert!(predict(cp.x_c, cp.t_c + 1.0, 0.1, &sc, table()).is_err());
}

#[test]
fn table_interpolates_between_solved_times() {
    let t = table();
    let sols = t.solutions();
    assert_eq!(sols.len(), 21);
    for (j, s) in sols.iter().enumerate() {
        assert!((s.t - (-1.0 + 0.1 * j as f64)).abs() < 1e-12);
        assert_eq!(t.evaluate(0.5, s.t).unwrap(), s.evaluate_u(0.5).unwrap());
    }
    // mid-interval values against a direct solve; quintic in T with
    // ΔT = 0.1 is far below the model error of the expansion
    let direct = critlab::painleve::solve_p12(
        0.35,
        &P12Options {
            x_max: 100.0,
            n: 4000,
            tol: 1e-10,
        },
    )
    .unwrap();
    for x in [-1.0, 0.0, 0.7] {
        let d = (t.evaluate(x, 0.35).unwrap() - direct.evaluate_u(x).unwrap()).abs();
        assert!(d < 1e-4, "{x}: {d}");
    }
}

#[test]
fn prediction_is_monotone_in_u() {
    let sc = compute_constants(&critical()).unwrap();
    let eps = 0.05;
    // U(0, T) is ordered in T; so is the prediction at the matching points
    let ts = [-0.8, -0.2, 0.4, 0.9];
    let mut pairs: Vec<(f64, f64)> = ts
        .iter()
        .map(|&bt| {
            let (x, t) = physical_coords(0.0, bt, eps, &sc);
            (table().evaluate(0.0, bt).unwrap(), predict(x, t, eps, &sc, table()).unwrap())
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    assert!(pairs.windows(2).all(|w| w[0].1 < w[1].1), "{pairs:?}");
}

#[test]
fn prediction_recovers_the_local_hopf_law() {
    let sc = compute_constants(&critical()).unwrap();
    let cp = sc.cp;
    let dx = 1e-3;
    let hopf_local = cp.u_c - (6.0 * dx / cp.k).cbrt();
    let mut errs = Vec::new();
    for eps in [1e-4, 1e-5, 1e-6] {
        let p = predict(cp.x_c + dx, cp.t_c, eps, &sc, table()).unwrap();
        errs.push(((p - hopf_local) / (hopf_local - cp.u_c)).abs());
    }
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
    assert!(errs[2] < 1e-3, "{errs:?}");
}

#[test]
fn fit_rates_on_synthetic_data() {
    let samples: Vec<RateSample> = [0.1, 0.07, 0.05]
        .iter()
        .map(|&e: &f64| RateSample {
            eps: e,
            amplitude: e.powf(2.0 / 7.0),
            correction: 3.0 * e.powf(4.0 / 7.0),
        })
        .collect();
    let f = fit_rates(&samples).unwrap();
    assert!((f.amplitude_exponent.unwrap() - AMPLITUDE_TARGET).abs() < 1e-12);
    assert!((f.correction_exponent.unwrap() - CORRECTION_TARGET).abs() < 1e-12);
    assert!(f.diagnostics.is_empty());

    assert!(fit_rates(&samples[..2]).is_err());
    let narrow: Vec<RateSample> = samples.iter().map(|s| RateSample { eps: s.eps / 10.0 + 0.04, ..*s }).collect();
    assert!(fit_rates(&narrow).is_err());

    let mut bumpy = samples.clone();
    bumpy[1].correction = 10.0;
    let f = fit_rates(&bumpy).unwrap();
    assert_eq!(f.diagnostics.len(), 1, "{:?}", f.diagnostics);
    assert!(f.correction_exponent.is_some());
    bumpy[2].amplitude = 0.0;
    let f = fit_rates(&bumpy).unwrap();
    assert!(f.amplitude_exponent.is_none());
}

#[test]
fn spectral_value_interpolates_trigonometric_data() {
    let g = PeriodicGrid::new(3.0, 64).unwrap();
    let w = std::f64::consts::PI / 3.0;
    let f = |x: f64| 0.3 + (2.0 * w * x).sin() - 0.5 * (5.0 * w * x + 1.0).cos();
    let s = FieldState::from_fn(g, 0.1, f).unwrap();
    for x in [-2.97, -0.123, 0.5, 2.2] {
        assert!((spectral_value(&s, x).unwrap() - f(x)).abs() < 1e-13);
    }
}

#[test]
fn compare_run_is_zero_on_the_prediction_and_rejects_gaps() {
    let sc = compute_constants(&critical()).unwrap();
    let cp = sc.cp;
    let eps = 0.1;
    let g = PeriodicGrid::new(10.0, 1024).unwrap();
    let exact = |t: f64| {
        let samples = g
            .nodes()
            .iter()
            .map(|&x| predict(x, t, eps, &sc, table()).unwrap_or(cp.u_c))
            .collect();
        FieldState::real(g, samples, eps, t).unwrap()
    };
    let (_, t_half) = physical_coords(0.0, 0.5, eps, &sc);
    let states = vec![exact(cp.t_c), exact(t_half)];
    let r = compare_run(&states, &sc, table(), Window::default(), eps).unwrap();
    assert!(r.sup < 1e-14 && r.points > 50, "{r:?}");
    assert_eq!(r.per_time.len(), 2);

    let early = vec![exact(cp.t_c - 0.2)];
    assert!(matches!(
        compare_run(&early, &sc, table(), Window::default(), eps),
        Err(UniversalityError::Coverage(_))
    ));
    let wide = Window { x_half: 1.0, t_half: 2.0 };
    assert!(compare_run(&states, &sc, table(), wide, eps).is_err());
}

fn kdv_run(eps: f64, snapshots: Vec<f64>) -> Vec<FieldState> {
    let d = sech2();
    let g = PeriodicGrid::new(20.0, 4096).unwrap();
    let s = FieldState::from_fn(g, eps, |x| d.value(x)).unwrap();
    let t_end = snapshots.iter().copied().fold(0.0, f64::max);
    let opts = EvolveOptions {
        dt: 1e-5,
        snapshot_times: snapshots,
        diagnostics_every: 1000,
    };
    evolve(&s, &EvolutionSpec::builtin(Equation::Kdv), t_end, &opts, &mut [])
        .unwrap()
        .snapshots
}

#[test]
fn run_near_breaking_has_the_predicted_sign_structure() {
    let sc = compute_constants(&critical()).unwrap();
    let cp = sc.cp;
    let eps = 0.1;
    let (_, t_early) = physical_coords(0.0, -1.0, eps, &sc);
    let states = kdv_run(eps, vec![t_early, cp.t_c]);
    let at_tc = &states[1];
    let u = at_tc.real_samples().unwrap();
    let mut checked = 0;
    for (j, &v) in u.iter().enumerate() {
        let (bx, _) = double_scaling_coords(at_tc.grid.node(j), cp.t_c, eps, &sc);
        if bx > 0.05 && bx <= 1.0 {
            assert!(v < cp.u_c, "X = {bx}: {v}");
            checked += 1;
        }
    }
    assert!(checked > 10);
    // for T <= 0 the prediction dominates the error
    let r = compare_run(&states, &sc, table(), Window::default(), eps).unwrap();
    assert!(r.sup < sc.c1 * eps.powf(2.0 / 7.0), "{r:?}");
    let value = spectral_value(at_tc, cp.x_c).unwrap();
    let p = predict(cp.x_c, cp.t_c, eps, &sc, table()).unwrap();
    assert!((value - p).abs() < 0.05, "{value} {p}");
}

#[test]
fn hopf_control_is_second_order_before_breaking() {
    let d = sech2();
    let t = 0.1;
    let eps = [0.1, 0.07, 0.05];
    let dev: Vec<f64> = eps
        .iter()
        .map(|&e| {
            let s = &kdv_run(e, vec![t])[0];
            let h = hopf_profile(&d, &s.grid.nodes(), t).unwrap();
            s.real_samples()
                .unwrap()
                .iter()
                .zip(&h)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    let fit = fit_power_law(&eps, &dev).unwrap();
    assert!((fit.slope - 2.0).abs() < 0.3, "{}", fit.slope);
}

#[test]
fn sweep_rejects_bad_options() {
    let d = sech2();
    let cp = critical();
    let mut o = SweepOptions::default();
    o.eps = vec![];
    assert!(eps_sweep(&d, &cp, &o).is_err());
    o.eps = vec![0.1, -0.1];
    assert!(eps_sweep(&d, &cp, &o).is_err());
    o.eps = vec![0.1];
    o.control_offset = 1.0;
    assert!(eps_sweep(&d, &cp, &o).is_err());
}
