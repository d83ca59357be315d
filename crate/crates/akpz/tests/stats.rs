//! Monte Carlo estimators against kernel and closed-form values.

use akpz::stats::*;
use akpz_core::geometry::{angles, MacroPoint};
use akpz_core::kernel::{corr_det, KernelOptions};
use akpz_core::{LozengeType, SpaceTimePoint};

fn pt(x: i64, n: usize, t: f64) -> SpaceTimePoint {
    SpaceTimePoint { x, n, t }
}

fn spec(n: usize, t: f64, q: (i64, usize), replicas: usize, seed: u64) -> EnsembleSpec {
    EnsembleSpec {
        n,
        times: vec![t],
        query_points: vec![q],
        replicas,
        seed,
        max_seconds: None,
    }
}

#[test]
fn one_level_mean_height() {
    let r = run_ensemble(&spec(1, 1.0, (-1, 1), 20_000, 5)).unwrap();
    let q = &r.queries[0];
    let want = 1.0 - (-1.0f64).exp();
    assert!((q.mean - want).abs() < 4.0 * q.stderr, "{} +- {} vs {want}", q.mean, q.stderr);
    assert!((q.stderr - (q.variance / 20_000.0).sqrt()).abs() < 1e-15);
    assert!(!r.partial);
}

#[test]
fn reports_are_reproducible() {
    let a = run_ensemble(&spec(3, 2.0, (0, 2), 2, 42)).unwrap();
    let b = run_ensemble(&spec(3, 2.0, (0, 2), 2, 42)).unwrap();
    assert_eq!(a.queries, b.queries);
    assert_eq!(a.covariance, b.covariance);
    let c = run_ensemble(&spec(3, 2.0, (0, 2), 50, 43)).unwrap();
    let d = run_ensemble(&spec(3, 2.0, (0, 2), 50, 44)).unwrap();
    assert_ne!(c.queries, d.queries);
}

#[test]
fn mean_height_is_the_density_sum() {
    let o = KernelOptions::default();
    let want: f64 = (0..40).map(|x| corr_det(&[pt(x, 2, 1.0)], None, &o).unwrap()).sum();
    let r = run_ensemble(&spec(2, 1.0, (-1, 2), 20_000, 6)).unwrap();
    let q = &r.queries[0];
    assert!((q.mean - want).abs() < 4.0 * q.stderr, "{} +- {} vs {want}", q.mean, q.stderr);
}

#[test]
fn single_and_pair_events() {
    let ev = vec![
        Event::occupied(vec![pt(-1, 2, 1.0)]),
        Event::occupied(vec![pt(-1, 3, 2.0), pt(1, 3, 2.0)]),
        Event::occupied(vec![pt(-5, 2, 1.0)]),
    ];
    let f = frequency_vs_determinant(&ev, 100_000, 7).unwrap();
    assert!(f.max_abs_z < 4.0, "{:?}", f.rows);
    let imp = &f.rows[2];
    assert_eq!(imp.frequency, 0.0);
    assert!(imp.determinant.abs() < 1e-10);
}

#[test]
fn lozenge_orientation_matches_the_kernel() {
    use LozengeType::*;
    let mut ev = Vec::new();
    for &(x, n, t) in &[(0i64, 3usize, 2.0), (-1, 3, 2.0), (1, 4, 3.0), (-2, 4, 3.0)] {
        for ty in [I, II, III] {
            ev.push(Event::lozenges(vec![pt(x, n, t)], vec![ty]));
        }
    }
    let f = frequency_vs_determinant(&ev, 40_000, 8).unwrap();
    assert!(f.max_abs_z < 4.0, "{:?}", f.rows);
    // II and III must differ somewhere, or the test could not tell them apart
    let gap = f
        .rows
        .chunks(3)
        .map(|c| (c[1].determinant - c[2].determinant).abs())
        .fold(0.0, f64::max);
    assert!(gap > 0.1, "{gap}");
}

#[test]
fn lozenge_proportions_follow_the_angles() {
    // asymmetric bulk point, all three angles distinct
    let p = MacroPoint::new(1.5, 0.8, 1.0).unwrap();
    let a = angles(&p).unwrap();
    let l = 30.0;
    let (x, n, t) = (((p.nu - p.eta) * l).floor() as i64, (p.eta * l).floor() as usize, p.tau * l);
    let o = KernelOptions::default();
    let d = |ty| corr_det(&[pt(x, n, t)], Some(&[ty]), &o).unwrap();
    let (d1, d2, d3) = (d(LozengeType::I), d(LozengeType::II), d(LozengeType::III));
    let pi = std::f64::consts::PI;
    let (w1, w2, w3) = (a.pi_eta / pi, a.pi_tau / pi, a.pi_nu / pi);
    assert!((d1 + d2 + d3 - 1.0).abs() < 1e-8);
    for (got, want) in [(d1, w1), (d2, w2), (d3, w3)] {
        assert!((got - want).abs() < 0.05, "{d1} {d2} {d3} vs {w1} {w2} {w3}");
    }
    let ev: Vec<Event> = [LozengeType::II, LozengeType::III]
        .into_iter()
        .map(|ty| Event::lozenges(vec![pt(x, n, t)], vec![ty]))
        .collect();
    let f = frequency_vs_determinant(&ev, 3000, 9).unwrap();
    assert!(f.max_abs_z < 4.0, "{:?}", f.rows);
}

#[test]
fn variance_at_fifty_matches_the_double_sum() {
    let (x, n) = ray_point(1.0, 1.0, 50.0);
    assert_eq!((x, n), (0, 50));
    let exact = exact_height_variance(x, n, 50.0).unwrap();
    let e = variance_slope(1.0, 1.0, &[50.0, 60.0, 70.0], 1500, 10).unwrap();
    let v = &e.points[0];
    assert!((v.variance - exact).abs() < 4.0 * v.stderr, "{} +- {} vs {exact}", v.variance, v.stderr);
}

#[test]
fn slope_needs_replicas_and_a_valid_ray() {
    assert!(variance_slope(1.0, 1.0, &[10.0, 20.0, 40.0], 5, 1).is_err());
    assert!(variance_slope(5.0, 1.0, &[10.0, 20.0, 40.0], 50, 1).is_err());
    assert!(variance_slope(1.0, 1.0, &[10.0, 20.0], 50, 1).is_err());
    assert!(variance_slope(1.0, 1.0, &[20.0, 10.0, 40.0], 50, 1).is_err());
}

#[test]
fn slope_error_shrinks_like_root_replicas() {
    let times = [10.0, 20.0, 40.0];
    let a = variance_slope(1.0, 1.0, &times, 100, 3).unwrap();
    let b = variance_slope(1.0, 1.0, &times, 400, 3).unwrap();
    let ratio = a.slope_stderr / b.slope_stderr;
    assert!(ratio > 1.4 && ratio < 2.9, "{ratio}");
    assert!(b.ci[0] < b.slope && b.slope < b.ci[1]);
    assert_eq!(b.bootstrap, BOOTSTRAP_RESAMPLES);
}

#[test]
fn exact_slope_is_close_to_the_coefficient() {
    let (s, vars) = exact_variance_slope(1.0, 1.0, &[50.0, 100.0, 200.0, 400.0]).unwrap();
    assert!(vars.windows(2).all(|w| w[0] < w[1]));
    assert!((s - LOG_VARIANCE_COEFF).abs() < 0.05 * LOG_VARIANCE_COEFF, "{s}");
}

#[test]
fn facet_heights_vanish() {
    // nu > (sqrt(eta) + sqrt(tau))^2: nothing has reached this far right
    let p = MacroPoint::new(5.0, 1.0, 1.0).unwrap();
    let h = mean_height_scaled(&p, 40.0, 100, 11).unwrap();
    assert!(h.mean < 0.01, "{}", h.mean);
}

#[test]
fn shape_error_trend() {
    let p = MacroPoint::new(1.0, 1.0, 1.0).unwrap();
    let e: Vec<ShapeError> = [25.0, 50.0, 100.0]
        .iter()
        .map(|&l| shape_error(&p, l, 100, 12).unwrap())
        .collect();
    for w in e.windows(2) {
        assert!(w[1].rel_error <= w[0].rel_error + 3.0 * w[0].rel_stderr, "{e:?}");
    }
}

#[test]
fn covariance_is_symmetric_and_ordered() {
    let p1 = MacroPoint::new(1.0, 1.0, 1.0).unwrap();
    let p2 = MacroPoint::new(1.5, 0.8, 1.0).unwrap();
    let a = covariance_pair(&p1, &p2, 20.0, 200, 13).unwrap();
    let b = covariance_pair(&p2, &p1, 20.0, 200, 13).unwrap();
    assert_eq!(a.value, b.value);
    assert_eq!(a.stderr, b.stderr);
    assert!(a.target.unwrap() > 0.0);
    // time-like pair: later time at a higher level
    let p3 = MacroPoint::new(1.0, 1.2, 1.5).unwrap();
    assert!(covariance_pair(&p1, &p3, 20.0, 50, 13).is_err());
}

#[test]
fn report_schema() {
    let p = MacroPoint::new(1.0, 1.0, 1.0).unwrap();
    let e = shape_error(&p, 20.0, 20, 1).unwrap();
    let r = e.report(serde_json::json!({"mode": "shape"}), 0.5);
    let v = serde_json::to_value(&r).unwrap();
    assert!(v["pass"].is_boolean());
    assert_eq!(v["spec"]["mode"], "shape");
    for e in v["estimates"].as_array().unwrap() {
        assert!(e["name"].is_string() && e["value"].is_number() && e["stderr"].is_number());
    }
}
