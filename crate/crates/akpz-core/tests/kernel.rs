//! Kernel representations and identities.

use akpz_core::interlacing::{LozengeType, SpaceTimePoint};
use akpz_core::kernel::charlier::{kernel_fixed_matrix, tail_cutoff};
use akpz_core::kernel::*;
use akpz_core::quad::Adaptive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pt(x: i64, n: usize, t: f64) -> SpaceTimePoint {
    SpaceTimePoint::new(x, n, t).unwrap()
}

fn lgamma(x: f64) -> f64 {
    libm::lgamma(x)
}

#[test]
fn charlier_examples() {
    assert_eq!(charlier(0, 7, 2.5).unwrap(), 1.0);
    assert!((charlier(1, 3, 2.0).unwrap() + 0.5).abs() < 1e-15);
    assert!((charlier(2, 3, 2.0).unwrap() + 0.5).abs() < 1e-15);
    assert!(charlier(2, 3, 0.0).is_err());
    assert!(charlier(2, 3, -1.0).is_err());
}

#[test]
fn recurrence_matches_contour_definition() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    let rule = Adaptive::default();
    for _ in 0..100 {
        let k = rng.random_range(0..25usize);
        let x = rng.random_range(0..40i64);
        let t = rng.random_range(0.5..20.0);
        let a = charlier(k, x, t).unwrap();
        let b = charlier_contour(k, x, t, &rule).unwrap();
        let scale = a.abs().max(1.0);
        assert!((a - b.value).abs() < 1e-9 * scale, "C_{k}({x},{t}): {a} vs {}", b.value);
    }
}

#[test]
fn charlier_orthogonality_at_t10() {
    let t = 10.0;
    let xmax = 200;
    for n in 0..=20usize {
        for m in 0..=n {
            let mut s = 0.0;
            for x in 0..=xmax {
                let w = log_weight(x, t).exp();
                s += charlier(n, x, t).unwrap() * charlier(m, x, t).unwrap() * w;
            }
            let hn = (lgamma(n as f64 + 1.0) - n as f64 * t.ln()).exp();
            let hm = (lgamma(m as f64 + 1.0) - m as f64 * t.ln()).exp();
            let want = if n == m { hn } else { 0.0 };
            assert!((s - want).abs() < 1e-8 * (hn * hm).sqrt(), "({n},{m}): {s} vs {want}");
        }
    }
}

#[test]
fn completeness_and_weight() {
    let t = 10.0;
    for k in 0..=20 {
        let s: f64 = (0..=tail_cutoff(k + 1, t)).map(|x| q_fn(k, x, t).unwrap().powi(2)).sum();
        assert!((s - 1.0).abs() < 1e-10, "k={k}: {s}");
    }
    for x in 0..30 {
        let q0 = q_fn(0, x, 3.0).unwrap();
        assert!((q0 * q0 - log_weight(x, 3.0).exp()).abs() < 1e-15);
    }
    // no overflow at large arguments
    for &(k, x, t) in &[(10_000usize, 10_000i64, 10_000.0), (5000, 9000, 10_000.0), (10_000, 0, 1.0)] {
        assert!(q_fn(k, x, t).unwrap().is_finite());
    }
}

#[test]
fn trace_and_projection() {
    for &(n, t) in &[(1usize, 2.0), (5, 5.0), (12, 10.0)] {
        let xmax = tail_cutoff(n, t);
        let k = kernel_fixed_matrix(n, t, xmax).unwrap();
        let trace: f64 = (0..=xmax as usize).map(|x| k[x][x]).sum();
        assert!((trace - n as f64).abs() < 1e-8, "n={n} t={t}: {trace}");
        for x in (0..=xmax as usize).step_by(3) {
            let s: f64 = (0..=xmax as usize).map(|y| k[x][y] * k[y][x]).sum();
            assert!((s - k[x][x]).abs() < 1e-8);
        }
    }
}

#[test]
fn one_particle_and_fixed_kernel() {
    for x in 0..10 {
        let v = kernel_fixed(1, 2.0, x, x).unwrap().value;
        assert!((v - log_weight(x, 2.0).exp()).abs() < 1e-14);
    }
    for n in [1usize, 4, 9] {
        for &t in &[1.0, 5.0, 10.0] {
            for x in [-(n as i64), 0, 3, 10] {
                let a = kernel_spacetime(&pt(x, n, t), &pt(x, n, t)).unwrap().value;
                let b = kernel_fixed(n, t, x + n as i64, x + n as i64).unwrap().value;
                assert!((a - b).abs() < 1e-8, "{n} {t} {x}: {a} {b}");
            }
        }
    }
}

#[test]
fn quadrature_settles() {
    let o = KernelOptions {
        repr: Repr::Contour,
        ..KernelOptions::default()
    };
    for &(x1, n1, t1, x2, n2, t2) in &[(3i64, 4usize, 5.0, 7i64, 4usize, 5.0), (2, 3, 2.0, 0, 5, 1.0), (10, 2, 8.0, 4, 2, 9.0)] {
        let v = kernel_shifted(x1, n1, t1, x2, n2, t2, &o).unwrap();
        assert!(v.est_error < 1e-12 * v.value.abs().max(1.0), "{v:?}");
    }
}

fn loz3(x: i64, n: usize, t: f64, w: &Triangle) -> f64 {
    let o = KernelOptions::default();
    let b = [
        Triangle { x, n, t },
        Triangle { x, n: n - 1, t },
        Triangle { x: x + 1, n: n - 1, t },
    ];
    b.iter().map(|b| triangle_kernel(b, w, &o).unwrap().value).sum()
}

fn loz4(b: &Triangle, x: i64, n: usize, t: f64) -> f64 {
    let o = KernelOptions::default();
    let w = [
        Triangle { x, n, t },
        Triangle { x, n: n + 1, t },
        Triangle { x: x - 1, n: n + 1, t },
    ];
    w.iter().map(|w| triangle_kernel(b, w, &o).unwrap().value).sum()
}

#[test]
fn residue_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for _ in 0..20 {
        let n = rng.random_range(2..7usize);
        let t = rng.random_range(0.5..6.0);
        let x = rng.random_range(-(n as i64)..4);
        // the fixed white triangle: sometimes the lozenge's own
        let w = if rng.random_bool(0.3) {
            Triangle { x, n, t }
        } else {
            Triangle {
                x: x + rng.random_range(-3..=3),
                n: (n as i64 + rng.random_range(-1..=2)).max(1) as usize,
                t,
            }
        };
        let want = if w.x == x && w.n == n { 1.0 } else { 0.0 };
        let got = loz3(x, n, t, &w);
        assert!((got - want).abs() < 1e-8, "eqLoz3 {x} {n} {t} {w:?}: {got}");

        let b = if rng.random_bool(0.3) {
            Triangle { x, n, t }
        } else {
            Triangle {
                x: x + rng.random_range(-3..=3),
                n: (n as i64 + rng.random_range(-2..=1)).max(0) as usize,
                t,
            }
        };
        let want = if b.x == x && b.n == n { 1.0 } else { 0.0 };
        let got = loz4(&b, x, n, t);
        assert!((got - want).abs() < 1e-8, "eqLoz4 {b:?} {x} {n} {t}: {got}");
    }
}

#[test]
fn flux_identity_both_branches() {
    let e = flux_derivative_check(&pt(0, 2, 3.0), &pt(0, 2, 3.0), 1e-4, Branch::Auto).unwrap();
    assert!(e < 1e-6, "{e}");
    let e = flux_derivative_check(&pt(0, 2, 3.0), &pt(0, 2, 3.0), 1e-4, Branch::Precedes).unwrap();
    assert!(e < 1e-6, "{e}");
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    for _ in 0..20 {
        let p1 = pt(rng.random_range(-2..4), rng.random_range(1..5), rng.random_range(0.5..5.0));
        let p2 = pt(rng.random_range(-2..4), rng.random_range(1..5), rng.random_range(0.5..5.0));
        for br in [Branch::Precedes, Branch::NotPrecedes] {
            let e = flux_derivative_check(&p1, &p2, 1e-4, br).unwrap();
            assert!(e < 1e-6, "{p1:?} {p2:?} {br:?}: {e}");
        }
    }
}

#[test]
fn flux_error_is_second_order() {
    let p = pt(1, 3, 2.0);
    let q = pt(0, 3, 2.5);
    let e1 = flux_derivative_check(&p, &q, 2e-2, Branch::Auto).unwrap();
    let e2 = flux_derivative_check(&p, &q, 1e-2, Branch::Auto).unwrap();
    let ratio = e1 / e2;
    assert!((ratio - 4.0).abs() < 0.2, "{e1} {e2} {ratio}");
}

#[test]
fn determinant_probabilities() {
    let o = KernelOptions::default();
    assert_eq!(corr_det(&[], None, &o).unwrap(), 1.0);
    // impossible event: below the leftmost admissible position
    let v = corr_det(&[pt(-5, 3, 2.0)], None, &o).unwrap();
    assert!(v.abs() < 1e-10);
    for x in -3..4 {
        for y in -3..4 {
            if x == y {
                continue;
            }
            let r2 = corr_det(&[pt(x, 3, 2.0), pt(y, 3, 2.0)], None, &o).unwrap();
            assert!(r2 >= -1e-10 && r2 <= 1.0 + 1e-8, "{x} {y}: {r2}");
        }
    }
    // space-like pairs
    for x in -3..3 {
        for y in -3..3 {
            let r2 = corr_det(&[pt(x, 3, 1.0), pt(y, 2, 2.0)], None, &o).unwrap();
            assert!(r2 >= -1e-8 && r2 <= 1.0 + 1e-8, "{x} {y}: {r2}");
        }
    }
}

#[test]
fn lozenge_types_partition_unity() {
    let o = KernelOptions::default();
    let (n, t) = (3usize, 2.0);
    for x in -5..5 {
        let p = pt(x, n, t);
        let s: f64 = [LozengeType::I, LozengeType::II, LozengeType::III]
            .iter()
            .map(|&ty| corr_det(&[p], Some(&[ty]), &o).unwrap())
            .sum();
        assert!((s - 1.0).abs() < 1e-10, "x={x}: {s}");
        // type I is occupation
        let i = corr_det(&[p], Some(&[LozengeType::I]), &o).unwrap();
        let r = corr_det(&[p], None, &o).unwrap();
        assert!((i - r).abs() < 1e-12);
    }
}

#[test]
fn bulk_density_approaches_one_third() {
    let mut gaps = Vec::new();
    for l in [50usize, 100, 200] {
        let p = pt(0, l, l as f64);
        let v = kernel_spacetime(&p, &p).unwrap().value;
        gaps.push((v - 1.0 / 3.0).abs());
    }
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
    for (g, l) in gaps.iter().zip([50.0f64, 100.0, 200.0]) {
        assert!(*g < 1.0 / l.sqrt(), "{gaps:?}");
    }
}

#[test]
fn literal_and_transformed_forms() {
    let lit = KernelOptions {
        repr: Repr::Literal,
        ..KernelOptions::default()
    };
    let con = KernelOptions::default();
    for &(x1, n1, t1, x2, n2, t2) in &[(0i64, 2usize, 1.0, 1i64, 2usize, 1.0), (1, 1, 2.0, 0, 3, 1.0), (2, 3, 0.5, 2, 2, 1.5)] {
        let a = kernel_shifted(x1, n1, t1, x2, n2, t2, &lit).unwrap().value;
        let b = kernel_shifted(x1, n1, t1, x2, n2, t2, &con).unwrap().value;
        assert!((a - b).abs() < 1e-9, "{a} {b}");
    }
}

#[test]
fn contour_never_returns_noise() {
    let o = KernelOptions {
        repr: Repr::Contour,
        ..KernelOptions::default()
    };
    for l in [50usize, 100, 200] {
        let (x, n, t) = (l as i64, l, l as f64);
        let want = kernel_shifted(x, n, t, x, n, t, &KernelOptions {
            repr: Repr::Charlier,
            ..KernelOptions::default()
        })
        .unwrap()
        .value;
        match kernel_shifted(x, n, t, x, n, t, &o) {
            Ok(v) => assert!((v.value - want).abs() < 1e-6, "L={l}: {} vs {want}", v.value),
            Err(akpz_core::Error::Quadrature { .. }) => {}
            Err(e) => panic!("{e}"),
        }
    }
}
