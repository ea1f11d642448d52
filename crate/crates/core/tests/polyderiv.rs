mod common;

use common::{dd_char_poly, dd_roots, CDD};
use derivzeros::ensembles::{self, EigenphaseConfig, Ensemble, Sampler};
use derivzeros::experiments;
use derivzeros::polyderiv::{self, PairConfig, RootSolver};
use derivzeros::{poly, rng, Error, C64};
use rand::Rng;
use std::f64::consts::{PI, TAU};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[test]
fn roots_of_unity_give_z_n_minus_one() {
    for n in [3, 8, 40] {
        let phases: Vec<f64> = (0..n).map(|k| ensembles::wrap_phase(TAU * k as f64 / n as f64)).collect();
        let cfg = EigenphaseConfig::explicit(phases).unwrap();
        let p = polyderiv::char_poly_from_phases(&cfg).unwrap();
        assert_eq!(p.len(), n + 1);
        assert_eq!(p[n], c(1.0, 0.0));
        assert!((p[0] + 1.0).norm() < 1e-12);
        for k in 1..n {
            assert!(p[k].norm() < 1e-12, "coefficient {k}: {}", p[k]);
        }
    }
}

#[test]
fn single_phase_zero() {
    let cfg = EigenphaseConfig::explicit(vec![0.0]).unwrap();
    assert_eq!(polyderiv::char_poly_from_phases(&cfg).unwrap(), vec![c(-1.0, 0.0), c(1.0, 0.0)]);
}

// e₁, e₂, e₃ of w_k = e^{it_k} written out term by term in double-double.
#[test]
fn cubic_matches_elementary_symmetric_functions() {
    let mut r = rng::from_seed(12);
    for _ in 0..20 {
        let t: Vec<f64> = (0..3).map(|_| PI - TAU * r.random::<f64>()).collect();
        let cfg = EigenphaseConfig::explicit(t.clone()).unwrap();
        let p = polyderiv::char_poly_from_phases(&cfg).unwrap();
        let w: Vec<CDD> = cfg.raw_phases.iter().map(|&x| CDD::unit(x)).collect();
        let e1 = w[0] + w[1] + w[2];
        let e2 = w[0] * w[1] + w[0] * w[2] + w[1] * w[2];
        let e3 = w[0] * w[1] * w[2];
        let want = [CDD::ZERO - e3, e2, CDD::ZERO - e1, CDD::ONE];
        for (got, w) in p.iter().zip(want) {
            assert!((got - w.to_c64()).norm() < 1e-14);
        }
    }
}

#[test]
fn degree_guard() {
    let cfg = EigenphaseConfig::explicit((0..513).map(|k| -3.0 + k as f64 * 0.01).collect()).unwrap();
    assert!(matches!(polyderiv::char_poly_from_phases(&cfg), Err(Error::DegreeTooLarge(513))));
}

#[test]
fn derivative_of_z_n_minus_one() {
    for n in [4usize, 10, 40] {
        let mut p = vec![c(0.0, 0.0); n + 1];
        p[0] = c(-1.0, 0.0);
        p[n] = c(1.0, 0.0);
        for solver in [RootSolver::Companion, RootSolver::Aberth] {
            let set = polyderiv::deriv_roots_from_poly(&p, n, solver).unwrap();
            assert_eq!(set.roots.len(), n - 1);
            assert!(set.roots.iter().all(|z| z.norm() == 0.0));
            assert!(set.s_values.iter().all(|&s| s == n as f64));
            assert_eq!(set.flagged_count, 0);
        }
    }
}

#[test]
fn two_point_closed_form() {
    for big_theta in [0.01, 0.3, 1.0, 2.5] {
        let cfg = EigenphaseConfig::explicit(vec![-big_theta / 2.0, big_theta / 2.0]).unwrap();
        let want = (big_theta / 2.0).cos();
        for set in [polyderiv::deriv_roots_all(&cfg).unwrap(), polyderiv::deriv_roots_with(&cfg, RootSolver::Aberth).unwrap()] {
            assert_eq!(set.roots.len(), 1);
            assert!((set.roots[0] - want).norm() < 1e-14);
            assert!((set.s_values[0] - 2.0 * (1.0 - want)).abs() < 1e-13);
        }
    }
}

#[test]
fn six_points_match_extended_precision_roots() {
    let mut r = rng::from_seed(6);
    for _ in 0..10 {
        let t: Vec<f64> = (0..6).map(|_| PI - TAU * r.random::<f64>()).collect();
        let cfg = EigenphaseConfig::explicit(t).unwrap();
        let dd = dd_char_poly(&cfg.raw_phases);
        let deriv: Vec<CDD> = dd.iter().enumerate().skip(1).map(|(k, &a)| a.scale(k as f64)).collect();
        let oracle: Vec<C64> = dd_roots(&deriv).into_iter().map(|z| z.to_c64()).collect();
        for solver in [RootSolver::Companion, RootSolver::Aberth] {
            let set = polyderiv::deriv_roots_with(&cfg, solver).unwrap();
            assert_eq!(set.roots.len(), 5);
            for z in &set.roots {
                let d = oracle.iter().map(|w| (z - w).norm()).fold(f64::INFINITY, f64::min);
                assert!(d < 1e-9, "{solver:?}: root {z} off by {d}");
            }
        }
    }
}

#[test]
fn gauss_lucas_and_residuals() {
    let mut r = rng::from_seed(8);
    for e in [Ensemble::Cue, Ensemble::Coe, Ensemble::Poisson] {
        for n in [2, 5, 40, 150] {
            for _ in 0..5 {
                let cfg = ensembles::sample_with(e, n, Sampler::Verblunsky, &mut r, 8).unwrap();
                for solver in [RootSolver::Companion, RootSolver::Aberth] {
                    let set = polyderiv::deriv_roots_with(&cfg, solver).unwrap();
                    assert_eq!(set.roots.len(), n - 1);
                    // clustered Poisson points at large n defeat the coefficient
                    // route; there flagging is the expected outcome
                    if !(e == Ensemble::Poisson && n > 40 && solver == RootSolver::Companion) {
                        assert_eq!(set.flagged_count, 0, "{e:?} n={n} {solver:?}");
                    }
                    assert!(set.roots.iter().zip(&set.flagged).all(|(z, &f)| f || z.norm() <= 1.0 + 1e-9));
                    for (z, s) in set.roots.iter().zip(&set.s_values) {
                        assert_eq!(*s, n as f64 * (1.0 - z.norm()));
                    }
                }
            }
        }
    }
    // bulk path from Verblunsky coefficients
    for n in [40, 300, 512] {
        let p = ensembles::sample_char_poly(Ensemble::Cue, n, &mut r).unwrap();
        let set = polyderiv::deriv_roots_from_poly(&p, n, RootSolver::Aberth).unwrap();
        assert_eq!(set.flagged_count, 0, "n={n}");
        assert!(set.roots.iter().all(|z| z.norm() <= 1.0 + 1e-9));
    }
}

#[test]
fn residual_check_flags_bad_roots() {
    // clustered phases make the coefficient route lose accuracy; the result
    // is either accurate or flagged, never silently wrong
    let t: Vec<f64> = (0..30).map(|k| 1e-3 * k as f64).chain((0..10).map(|k| 2.0 + 0.3 * k as f64)).collect();
    let cfg = EigenphaseConfig::explicit(t).unwrap();
    let good = polyderiv::deriv_roots_with(&cfg, RootSolver::Aberth).unwrap();
    assert_eq!(good.flagged_count, 0);
    let coeff = polyderiv::deriv_roots_all(&cfg).unwrap();
    for (z, f) in coeff.roots.iter().zip(&coeff.flagged) {
        let d = good.roots.iter().map(|w| (z - w).norm()).fold(f64::INFINITY, f64::min);
        assert!(*f || d < 1e-6 || z.norm() <= 1.0 + 1e-9);
    }
}

#[test]
fn solvers_agree_on_cue() {
    for seed in 0..50 {
        let cfg = ensembles::sample_cue(40, seed).unwrap();
        let a = polyderiv::deriv_roots_with(&cfg, RootSolver::Aberth).unwrap();
        let b = polyderiv::deriv_roots_all(&cfg).unwrap();
        for z in &a.roots {
            let d = b.roots.iter().map(|w| (z - w).norm()).fold(f64::INFINITY, f64::min);
            assert!(d < 1e-6);
        }
    }
}

#[test]
fn rotation_equivariance() {
    let cfg = ensembles::sample_cue(30, 4).unwrap();
    let alpha = 0.7;
    let rot = EigenphaseConfig::explicit(cfg.raw_phases.iter().map(|t| t + alpha).collect()).unwrap();
    let a = polyderiv::deriv_roots_with(&cfg, RootSolver::Aberth).unwrap();
    let b = polyderiv::deriv_roots_with(&rot, RootSolver::Aberth).unwrap();
    let turn = C64::from_polar(1.0, alpha);
    for z in &a.roots {
        let d = b.roots.iter().map(|w| (z * turn - w).norm()).fold(f64::INFINITY, f64::min);
        assert!(d < 1e-10);
    }
    let mut sa = a.s_values.clone();
    let mut sb = b.s_values.clone();
    sa.sort_by(|x, y| x.partial_cmp(y).unwrap());
    sb.sort_by(|x, y| x.partial_cmp(y).unwrap());
    for (x, y) in sa.iter().zip(&sb) {
        assert!((x - y).abs() < 1e-10);
    }
}

#[test]
fn root_set_serialization() {
    let cfg = ensembles::sample_cue(6, 1).unwrap();
    let set = polyderiv::deriv_roots_all(&cfg).unwrap();
    let v: serde_json::Value = serde_json::from_str(&set.to_json().unwrap()).unwrap();
    assert_eq!(v["n"], 6);
    assert_eq!(v["roots"].as_array().unwrap().len(), 5);
    assert_eq!(v["s_values"].as_array().unwrap().len(), 5);
    assert_eq!(v["flagged_count"], 0);
    let csv = set.s_values_csv();
    assert_eq!(csv.lines().count(), 5);
    let back: Vec<f64> = csv.lines().map(|l| l.parse().unwrap()).collect();
    assert_eq!(back, set.s_values);
}

#[test]
fn pair_at_zero_gap_is_a_double_root() {
    let bg = vec![-3.0, -1.0, 2.0, 3.5];
    let s = polyderiv::root_in_disk(0.0, bg, 6).unwrap();
    assert_eq!(s.z_prime, c(1.0, 0.0));
    assert_eq!(s.delta, c(0.0, 0.0));
    assert_eq!(s.delta_star, 0.0);
}

#[test]
fn pair_with_empty_background() {
    let theta = 0.2;
    let s = polyderiv::root_in_disk(theta, vec![], 2).unwrap();
    let want = (PI * theta / 2.0).cos();
    assert!((s.z_prime - want).norm() < 1e-14);
    assert_eq!(s.z_prime.im, 0.0);
}

#[test]
fn pair_root_matches_full_root_set() {
    let mut r = rng::from_seed(81);
    for n in [8usize, 16, 40] {
        for _ in 0..20 {
            let theta = 0.1;
            let bg = experiments::random_background(n, theta / 2.0, &mut r).unwrap();
            let s = polyderiv::root_in_disk(theta, bg.clone(), n).unwrap();
            let pair = PairConfig::new(theta, bg, n).unwrap();
            let phases: Vec<f64> = pair.points().iter().map(|z| z.arg()).collect();
            let all = polyderiv::deriv_roots_with(&EigenphaseConfig::explicit(phases).unwrap(), RootSolver::Aberth).unwrap();
            let nearest = all.roots.iter().min_by(|a, b| (*a - 1.0).norm().partial_cmp(&(*b - 1.0).norm()).unwrap()).unwrap();
            assert!((s.z_prime - nearest).norm() < 1e-10, "n={n}: {} vs {}", s.z_prime, nearest);
            assert!((s.delta - (1.0 - s.z_prime) * n as f64).norm() < 1e-12);
        }
    }
}

#[test]
fn pair_config_validation() {
    assert!(PairConfig::new(0.1, vec![0.01], 3).is_err());
    assert!(PairConfig::new(0.4, vec![1.0], 3).is_err());
    assert!(PairConfig::new(-0.1, vec![1.0], 3).is_err());
    assert!(PairConfig::new(0.1, vec![1.0], 8).is_err());
    // phases wrap into [−N/2, N/2)
    let p = PairConfig::new(0.1, vec![4.0], 3).unwrap();
    assert!((p.background[0] - 1.0).abs() < 1e-15);
}

#[test]
fn contour_count_is_one_for_close_pairs() {
    let mut r = rng::from_seed(16);
    for _ in 0..50 {
        let bg = experiments::random_background(16, 0.05, &mut r).unwrap();
        let p = PairConfig::new(0.1, bg, 16).unwrap();
        assert_eq!(polyderiv::count_roots_in_contour(&p, None).unwrap(), 1);
    }
}

#[test]
fn empty_and_full_contours() {
    let cfg = ensembles::sample_cue(12, 3).unwrap();
    let set = polyderiv::deriv_roots_all(&cfg).unwrap();
    // a tiny disk away from every root
    let mut center = c(0.0, 0.0);
    for k in 0..100 {
        let z = C64::from_polar(0.5, k as f64);
        if set.roots.iter().all(|w| (z - w).norm() > 0.05) {
            center = z;
            break;
        }
    }
    assert_eq!(polyderiv::count_deriv_roots_in_circle(&cfg, center, 0.01).unwrap(), 0);
    assert_eq!(polyderiv::count_deriv_roots_in_circle(&cfg, c(0.0, 0.0), 1.0 + 1e-3).unwrap(), 11);
    let inner = set.roots.iter().filter(|z| z.norm() < 0.9).count() as i64;
    assert_eq!(polyderiv::count_deriv_roots_in_circle(&cfg, c(0.0, 0.0), 0.9).unwrap(), inner);
}

#[test]
fn delta_star_examples() {
    assert_eq!(polyderiv::delta_star_of(c(0.0, 0.0), 40), 0.0);
    for d in [0.01, 0.3, 2.0, 39.0] {
        assert!((polyderiv::delta_star_of(c(d, 0.0), 40) - d).abs() < 1e-13);
    }
    let got = polyderiv::delta_star_of(c(0.0, 1.0), 40);
    assert!((got - (-0.0125)).abs() < 1.0 / 1600.0);
    // direct definition
    let d = c(0.3, -0.7);
    let want = 17.0 * (1.0 - (1.0 - d / 17.0).norm());
    assert!((polyderiv::delta_star_of(d, 17) - want).abs() < 1e-14);
}

#[test]
fn delta_star_consistency_on_pairs() {
    let mut r = rng::from_seed(5);
    for _ in 0..50 {
        let n = 24;
        let theta = 0.25 * r.random::<f64>();
        let bg = experiments::random_background(n, theta / 2.0, &mut r).unwrap();
        let s = polyderiv::root_in_disk(theta, bg, n).unwrap();
        let approx = s.delta.re - s.delta.im * s.delta.im / (2.0 * n as f64);
        let d3 = s.delta.norm().powi(3) / (n * n) as f64;
        assert!((s.delta_star - approx).abs() <= d3 + 1e-15);
    }
}

#[test]
fn reciprocal_bound_examples() {
    assert_eq!(polyderiv::max_re_reciprocal_bound(c(0.0, 0.0)).unwrap(), 1.0);
    for r in [0.1, 0.5, 0.9] {
        assert!((polyderiv::max_re_reciprocal_bound(c(r, 0.0)).unwrap() - 1.0 / (1.0 + r)).abs() < 1e-15);
    }
    assert!(polyderiv::max_re_reciprocal_bound(c(1.0, 0.0)).is_err());
    assert!(polyderiv::max_re_reciprocal_bound(c(0.8, 0.8)).is_err());
}

#[test]
fn reciprocal_bound_against_grid() {
    let mut r = rng::from_seed(17);
    for _ in 0..20 {
        let rad = 0.95 * r.random::<f64>().sqrt();
        let z = C64::from_polar(rad, TAU * r.random::<f64>());
        let m = 100_000;
        let grid = (0..m)
            .map(|k| (z - C64::from_polar(1.0, TAU * k as f64 / m as f64)).inv().re)
            .fold(f64::NEG_INFINITY, f64::max);
        let f = polyderiv::max_re_reciprocal_bound(z).unwrap();
        assert!((grid - f).abs() < 1e-6 * f.max(1.0), "{z}: {grid} vs {f}");
        assert!(grid <= f + 1e-12);
    }
}

#[test]
fn eta_bound_holds_for_n_at_least_six() {
    let mut r = rng::from_seed(18);
    for _ in 0..100_000 {
        let n = r.random_range(6..=128usize);
        let t0 = r.random::<f64>();
        let phi = PI * (1.0 - r.random::<f64>());
        let psi = (r.random::<f64>() - 0.5) * n as f64;
        assert!(polyderiv::eta_quantity(t0, phi, psi, n) <= polyderiv::eta_bound(t0, n));
    }
}

// The bound's proof controls tan″ on an interval that contains tan's pole;
// for N ∈ {3, 4} the disk can reach the unit circle and the bound fails.
#[test]
fn eta_bound_counterexample_at_n_three() {
    let h = polyderiv::eta_quantity(0.74, PI / 2.0, -1.5, 3);
    let b = polyderiv::eta_bound(0.74, 3);
    assert!((h - 47.2447375855569).abs() < 1e-9);
    assert!((b - 17.502993452613236).abs() < 1e-12);
    assert!(h > b);
}

#[test]
fn eta_quantity_matches_disk_geometry() {
    // boundary point formula: 1 − |z|² = sin(2a) sin φ and Re z = cos a − sin a sin φ
    let (t0, n, phi) = (0.3, 10, 1.1);
    let a = TAU * t0 / n as f64;
    let z = c(a.cos(), 0.0) + C64::i() * C64::from_polar(a.sin(), phi);
    assert!((1.0 - z.norm_sqr() - (2.0 * a).sin() * phi.sin()).abs() < 1e-15);
    assert!((z.re - (a.cos() - a.sin() * phi.sin())).abs() < 1e-15);
    let psi = 0.37;
    let w = C64::from_polar(1.0, TAU * psi / n as f64);
    let want = a.sin() * phi.sin() * (z - w).inv().re;
    assert!((polyderiv::eta_quantity(t0, phi, psi, n) - want).abs() < 1e-15);
}

#[test]
fn expansion_has_sixth_order_remainder() {
    let mut r = rng::from_seed(24);
    for _ in 0..10 {
        let bg = experiments::random_background(24, 0.5, &mut r).unwrap();
        let f = experiments::fit_expansion(&bg, 24, &[0.01, 0.02, 0.04]).unwrap();
        assert!((f.fitted_b1 - f.predicted_b1).norm() <= 1e-6);
        assert!((f.fitted_b2 - f.predicted_b2).norm() <= 1e-3 * f.predicted_b2.norm());
        assert!(f.remainder_orders.iter().all(|&o| o >= 5.5), "{:?}", f.remainder_orders);
    }
}

#[test]
fn predicted_delta_residual_is_sixth_order() {
    let mut r = rng::from_seed(33);
    let n = 20;
    let bg = experiments::random_background(n, 0.5, &mut r).unwrap();
    let co = derivzeros::expansions::coefficients_ab(&bg, n, 1).unwrap();
    let rem = |t: f64| {
        let d = polyderiv::locate_delta(&PairConfig::new(t, bg.clone(), n).unwrap()).unwrap();
        (d - derivzeros::expansions::predict_delta(co.b1, co.b2, t)).norm()
    };
    let cst = rem(0.04) / 0.04f64.powi(6);
    assert!(rem(0.02) <= 2.0 * cst * 0.02f64.powi(6));
}

#[test]
fn close_pair_consistency_for_larger_n() {
    let mut r = rng::from_seed(64);
    for n in [16usize, 32, 64] {
        for _ in 0..20 {
            let theta = 0.25 * (1.0 - r.random::<f64>());
            let bg = experiments::random_background(n, theta / 2.0, &mut r).unwrap();
            let p = PairConfig::new(theta, bg.clone(), n).unwrap();
            assert_eq!(polyderiv::count_roots_in_contour(&p, None).unwrap(), 1);
            let s = polyderiv::pair_sample(&p).unwrap();
            let phases: Vec<f64> = p.points().iter().map(|z| z.arg()).collect();
            let all = polyderiv::deriv_roots_with(&EigenphaseConfig::explicit(phases).unwrap(), RootSolver::Aberth).unwrap();
            let d = all.roots.iter().map(|w| (w - s.z_prime).norm()).fold(f64::INFINITY, f64::min);
            assert!(d < 1e-10);
        }
    }
}

#[test]
fn poly_helpers() {
    let roots = vec![c(0.5, 0.1), c(-0.3, 0.0), c(0.0, 0.9)];
    let p = poly::from_roots(&roots);
    for z in &roots {
        assert!(poly::horner(&p, *z).norm() < 1e-15);
    }
    let (v, dv) = poly::horner_d(&p, c(0.2, 0.2));
    let h = 1e-6;
    let fd = (poly::horner(&p, c(0.2 + h, 0.2)) - poly::horner(&p, c(0.2 - h, 0.2))) / (2.0 * h);
    assert!((v - poly::horner(&p, c(0.2, 0.2))).norm() < 1e-15);
    assert!((dv - fd).norm() < 1e-8);
    let d = poly::derivative(&p);
    assert_eq!(d.len(), 3);
    assert_eq!(d[2], p[3] * 3.0);
    let found = poly::aberth_roots(&p, None).unwrap();
    for z in &roots {
        assert!(found.iter().any(|w| (w - z).norm() < 1e-12));
    }
    assert!(poly::aberth_roots(&[c(0.0, 0.0)], None).is_err());
}
