//! Acceptance run: one PASS/FAIL line per criterion, plus INFO lines.
//! Exits 0 unless ACCEPTANCE_STRICT is set and a criterion fails.

use derivzeros::conditioned;
use derivzeros::ensembles::{Ensemble, Sampler};
use derivzeros::experiments::{self, DerivDist, DerivDistOptions};
use derivzeros::expansions;
use derivzeros::polyderiv::{self, RootSolver};
use derivzeros::stats::{self, Bandwidth, EmpiricalDistribution, ModeReport};
use derivzeros::zeta_scan::{self, ScanOptions, ZetaPrimeZero};
use derivzeros::{rng, C64};
use rand::Rng;
use std::f64::consts::{LN_2, PI, TAU};
use std::time::Instant;

struct Outcome {
    pass: bool,
    detail: String,
    info: Vec<String>,
}

fn deriv_hist(e: Ensemble, n: usize, samples: usize, seed: u64) -> DerivDist {
    let o = DerivDistOptions { ensemble: e, n, samples, seed, sampler: Sampler::Verblunsky, solver: RootSolver::Aberth };
    experiments::deriv_dist(&o, &stats::default_s_edges()).unwrap()
}

fn modes(d: &EmpiricalDistribution) -> ModeReport {
    stats::detect_modes(d, Bandwidth::Silverman).unwrap()
}

fn describe(m: &ModeReport) -> String {
    let c: Vec<String> = m.candidates.iter().map(|(x, p)| format!("{x:.3}@{:.2}%", 100.0 * p)).collect();
    format!("modes={} bw={:.4} peaks(location@prominence)=[{}]", m.count, m.bandwidth, c.join(", "))
}

fn c1(cue40: &DerivDist) -> Outcome {
    let rows = experiments::cdf_tail(cue40, &[0.05, 0.10, 0.15]);
    let pass = rows.iter().all(|r| r.relative_error.abs() <= 0.10);
    let parts: Vec<String> =
        rows.iter().map(|r| format!("s={:.2} F={:.6} law={:.6} rel={:+.4}", r.s, r.empirical, r.law, r.relative_error)).collect();
    let info = rows
        .iter()
        .map(|r| format!("s={:.2} quartic-consistent law {:.6} rel={:+.4}", r.s, r.consistent, (r.empirical - r.consistent) / r.consistent))
        .chain([format!("roots={} flagged={}", cue40.roots, cue40.flagged)])
        .collect();
    Outcome { pass, detail: parts.join("; "), info }
}

fn c2(cue100: &DerivDist) -> Outcome {
    let h = &cue100.hist;
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for a in 3..10 {
        let (lo, hi) = (a as f64, a as f64 + 1.0);
        let mass: f64 = h.centers().iter().zip(&h.counts).filter(|(c, _)| **c > lo && **c < hi).map(|(_, m)| m).sum();
        let emp = mass / h.total_mass;
        let want = 1.0 / lo - 1.0 / hi;
        let rel = (emp - want) / want;
        worst = worst.max(rel.abs());
        parts.push(format!("[{a},{}] {:+.3}", a + 1, rel));
    }
    Outcome {
        pass: worst <= 0.20,
        detail: format!("worst rel {worst:.3}; {}", parts.join(" ")),
        info: vec![format!("roots={} flagged={}", cue100.roots, cue100.flagged)],
    }
}

fn zeta_hist(zeros: &[ZetaPrimeZero]) -> EmpiricalDistribution {
    zeta_scan::normalized_distribution(zeros, &stats::uniform_edges(0.0, 5.0, 100)).unwrap()
}

// Gaussian smoothing with the Silverman rule, without the sample-size guard.
fn unguarded_modes(d: &EmpiricalDistribution) -> String {
    let c = d.centers();
    let m: f64 = d.counts.iter().sum();
    let mean = c.iter().zip(&d.counts).map(|(x, w)| x * w).sum::<f64>() / m;
    let var = c.iter().zip(&d.counts).map(|(x, w)| w * (x - mean).powi(2)).sum::<f64>() / m;
    let h = 1.06 * var.sqrt() * (d.total_samples as f64 * m / d.total_mass).powf(-0.2);
    let f: Vec<f64> = c.iter().map(|&x| c.iter().zip(&d.counts).map(|(&y, &w)| w * (-0.5 * ((x - y) / h).powi(2)).exp()).sum()).collect();
    let gmax = f.iter().cloned().fold(0.0, f64::max);
    let peaks: Vec<String> = stats::peak_prominences(&f).into_iter().map(|(i, p)| format!("{:.3}@{:.2}%", c[i], 100.0 * p / gmax)).collect();
    format!("bw={h:.4} peaks(location@prominence)=[{}]", peaks.join(", "))
}

fn c3(cue40: &DerivDist, cue100: &DerivDist, zeros: &[ZetaPrimeZero]) -> Outcome {
    let coe40 = deriv_hist(Ensemble::Coe, 40, 200_000, 303);
    let zh = zeta_hist(zeros);
    let gated = [
        ("CUE N=40", stats::detect_modes(&cue40.hist, Bandwidth::Silverman)),
        ("CUE N=100", stats::detect_modes(&cue100.hist, Bandwidth::Silverman)),
        ("COE N=40", stats::detect_modes(&coe40.hist, Bandwidth::Silverman)),
        ("zeta' [1e3,1e4]", stats::detect_modes(&zh, Bandwidth::Silverman)),
    ];
    let pass = gated.iter().all(|(_, m)| matches!(m, Ok(m) if m.count == 2));
    let detail = gated
        .iter()
        .map(|(k, m)| match m {
            Ok(m) => format!("{k}: {}", m.count),
            Err(e) => format!("{k}: error ({e})"),
        })
        .collect::<Vec<_>>()
        .join("; ");
    let mut info: Vec<String> = gated.iter().filter_map(|(k, m)| m.as_ref().ok().map(|m| format!("{k}: {}", describe(m)))).collect();
    info.push(format!("zeta' [1e3,1e4] ({} zeros) smoothed without the sample-size guard: {}", zh.total_samples, unguarded_modes(&zh)));
    let poisson = deriv_hist(Ensemble::Poisson, 40, 100_000, 304);
    info.push(format!("Poisson N=40 (ungated): {} flagged={}", describe(&modes(&poisson.hist)), poisson.flagged));
    Outcome { pass, detail, info }
}

fn c4() -> Outcome {
    let mut r = rng::from_seed(404);
    let (mut da, mut db) = (0.0f64, 0.0f64);
    for n in [8, 40, 100] {
        let nf = n as f64;
        for _ in 0..10_000 {
            let bg = experiments::random_background(n, 0.0, &mut r).unwrap();
            let c = expansions::coefficients_ab(&bg, n, 1).unwrap();
            da = da.max((c.a[0].re - (nf - 2.0) / (2.0 * nf)).abs());
            db = db.max((c.big_b1 - 0.25).abs());
        }
    }
    Outcome { pass: da <= 1e-12 && db <= 1e-12, detail: format!("max |Re A0 - (N-2)/2N| = {da:.2e}, max |Re b1 - 1/4| = {db:.2e}"), info: vec![] }
}

fn c5() -> Outcome {
    let fits = experiments::verify_expansion(24, &[0.01, 0.02, 0.04], 100, 505, 0.5).unwrap();
    let db1 = fits.iter().map(|f| (f.fitted_b1 - f.predicted_b1).norm()).fold(0.0, f64::max);
    let db2 = fits.iter().map(|f| (f.fitted_b2 - f.predicted_b2).norm() / f.predicted_b2.norm()).fold(0.0, f64::max);
    let ord = fits.iter().flat_map(|f| f.remainder_orders.iter().cloned()).fold(f64::INFINITY, f64::min);
    Outcome {
        pass: db1 <= 1e-6 && db2 <= 1e-3 && ord >= 5.5,
        detail: format!("max |db1| = {db1:.2e}, max |db2|/|b2| = {db2:.2e}, min remainder order = {ord:.3}"),
        info: vec!["backgrounds keep every phase at least 0.5 (rescaled) from the pair".into()],
    }
}

fn c6() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    let mut info = Vec::new();
    for (i, n) in [10usize, 12, 16, 20].into_iter().enumerate() {
        let r = conditioned::estimate_moments(n, 1_000_000, 606, 50, 1000 * i as u64).unwrap();
        for name in ["A0^3", "A1", "A0A1"] {
            let e = r.entry(name).unwrap();
            let z = e.z_score.unwrap();
            pass &= z.abs() <= 3.0;
            parts.push(format!("N={n} {name} {:.4}±{:.4} vs {:.4} z={z:+.2}", e.mean, e.stderr, e.predicted.unwrap()));
        }
        info.push(format!("N={n} ESS={:.0} mean weight {:.1}±{:.1} vs C_N^-1 {:.1}", r.effective_sample_size, r.mean_weight, r.mean_weight_stderr, expansions::moment_polynomials(n).unwrap().c_n_inv));
        if n == 20 {
            let e = r.entry("B2").unwrap();
            let z = e.z_score.unwrap();
            pass &= z.abs() <= 3.0;
            parts.push(format!("N=20 B2 {:.5}±{:.5} vs {:.5} z={z:+.2}", e.mean, e.stderr, e.predicted.unwrap()));
            let direct = r.b2_direct_substitution;
            info.push(format!("N=20 B2 against direct substitution of the closed-form moments {direct:.5}: z={:+.1}", (e.mean - direct) / e.stderr));
            let target = 1.0 / 48.0 - 7.0 / (48.0 * 20.0);
            info.push(format!("N=20 B2 against 1/48 - 7/(48N) = {target:.6}: rel {:+.3} (10% check {})", (e.mean - target) / target, if ((e.mean - target) / target).abs() <= 0.1 { "met" } else { "not met" }));
        }
    }
    Outcome { pass, detail: parts.join("; "), info }
}

fn c7() -> Outcome {
    let a1 = expansions::alpha1_mean(1000.0);
    let ok_a = (a1 - 1.0 / 15.0).abs() <= 1e-5;
    let edges = stats::uniform_edges(0.0, 5.0, 20);
    let o = conditioned::empirical_one_level(22, 1_000_000, 707, &edges, 50).unwrap();
    let mut worst: f64 = 0.0;
    let mut zs = Vec::new();
    for k in 0..20 {
        let z = (o.dist.counts[k] - o.w1_integral[k]) / o.stderr[k];
        worst = worst.max(z.abs());
        zs.push(format!("{z:+.1}"));
    }
    Outcome {
        pass: ok_a && worst <= 4.0,
        detail: format!("alpha1 = {a1:.8} (1/15 = {:.8}); 1-level max |z| = {worst:.2}", 1.0 / 15.0),
        info: vec![format!("per-bin z on (0,5] width 0.25: [{}]; ESS={:.0}", zs.join(" "), o.effective_sample_size)],
    }
}

fn c8() -> Outcome {
    let rows = experiments::spacing_law(40, 100_000, 808, &[0.1, 0.2, 0.3], Sampler::Verblunsky).unwrap();
    let pass = rows.iter().all(|r| (r.empirical - r.predicted).abs() <= 3.0 * r.stderr + 0.01 * r.predicted);
    let detail = rows.iter().map(|r| format!("s={} {:.6}±{:.6} vs {:.6}", r.s, r.empirical, r.stderr, r.predicted)).collect::<Vec<_>>().join("; ");
    Outcome { pass, detail, info: vec![] }
}

fn c9() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    let mut info = Vec::new();
    for n in [8, 16, 32, 64] {
        let r = experiments::uniqueness_check(n, 0.25, 10_000, 900 + n as u64).unwrap();
        if n >= 16 {
            pass &= r.violations.is_empty();
        }
        parts.push(format!("N={n}: {} violations", r.violations.len()));
        for v in r.violations.iter().take(20) {
            info.push(format!("N={n} violation theta={} count={:?} error={:?} background={:?}", v.theta, v.count, v.error, v.background));
        }
    }
    Outcome { pass, detail: parts.join("; "), info }
}

fn c10() -> Outcome {
    let mut r = rng::from_seed(1010);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let z = C64::from_polar(0.95 * r.random::<f64>().sqrt(), TAU * r.random::<f64>());
        let m = 100_000;
        let grid = (0..m).map(|k| (z - C64::from_polar(1.0, TAU * k as f64 / m as f64)).inv().re).fold(f64::NEG_INFINITY, f64::max);
        let f = polyderiv::max_re_reciprocal_bound(z).unwrap();
        worst = worst.max((grid - f).abs() / f.max(1.0));
    }
    let mut violations = 0;
    let mut info = Vec::new();
    for _ in 0..100_000 {
        let n = r.random_range(3..=64usize);
        let t0 = r.random::<f64>();
        let phi = PI * (1.0 - r.random::<f64>());
        let psi = (r.random::<f64>() - 0.5) * n as f64;
        let (h, b) = (polyderiv::eta_quantity(t0, phi, psi, n), polyderiv::eta_bound(t0, n));
        if h > b {
            violations += 1;
            if info.len() < 10 {
                info.push(format!("eta bound exceeded at N={n}, theta0={t0:.6}, phi={phi:.6}, psi={psi:.6}: h={h:.6} > bound {b:.6}"));
            }
        }
    }
    let h = polyderiv::eta_quantity(0.74, PI / 2.0, -1.5, 3);
    let b = polyderiv::eta_bound(0.74, 3);
    info.push(format!("fixed example N=3, theta0=0.74, phi=pi/2, psi=-1.5: h={h:.6}, bound {b:.6}"));
    Outcome {
        pass: worst <= 1e-6 && violations == 0,
        detail: format!("reciprocal bound vs grid max rel dev {worst:.2e} over 1000 z (|z| < 0.95); eta bound violations {violations}/100000"),
        info,
    }
}

fn c11(scan: &[ZetaPrimeZero], failures: &[String]) -> Outcome {
    let lo: Vec<&ZetaPrimeZero> = scan.iter().filter(|z| z.gamma >= 1000.0 && z.gamma < 2000.0).collect();
    let want = zeta_scan::integrated_density(1000.0, 2000.0);
    let count_rel = (lo.len() as f64 - want) / want;
    let on_line = zeta_scan::zeta_zeros_on_line(1000.0, 2000.0).unwrap();
    let missing = on_line.zeros.len() as i64 - lo.len() as i64;
    let per = 1000.0 / missing as f64;
    let per_want = TAU / LN_2;
    let per_rel = (per - per_want) / per_want;
    let beta_ok = scan.iter().all(|z| z.beta > 0.5);
    let pass = count_rel.abs() <= 0.02 && per_rel.abs() <= 0.10 && beta_ok && failures.is_empty();
    // cumulative count against the integrated density over the full scan
    let mut sorted: Vec<f64> = scan.iter().map(|z| z.gamma).collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let drift = sorted.iter().enumerate().map(|(k, &g)| ((k + 1) as f64 - zeta_scan::integrated_density(1000.0, g)).abs()).fold(0.0, f64::max);
    let xs: Vec<f64> = scan.iter().map(|z| z.normalized_x).collect();
    let mut xs_sorted = xs.clone();
    xs_sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Outcome {
        pass,
        detail: format!(
            "count [1e3,2e3) {} vs {want:.1} (rel {count_rel:+.4}); zeta zeros {} (N(T) {}), missing {missing}, one per {per:.3} vs {per_want:.3} (rel {per_rel:+.3}); all beta > 1/2: {beta_ok}; scan failures {}",
            lo.len(),
            on_line.zeros.len(),
            on_line.exact_count,
            failures.len()
        ),
        info: vec![
            format!("full scan [1e3,1e4]: {} zeros; max |N1(t) - integrated density| = {drift:.2}", scan.len()),
            format!("median normalized x = {:.4}", xs_sorted[xs_sorted.len() / 2]),
        ],
    }
}

fn main() {
    // libtest flags such as --nocapture are accepted and ignored
    let strict = std::env::var_os("ACCEPTANCE_STRICT").is_some();
    let mut results: Vec<(usize, Outcome, f64)> = Vec::new();
    let t = Instant::now();
    let cue40 = deriv_hist(Ensemble::Cue, 40, 200_000, 101);
    let t_cue40 = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let cue100 = deriv_hist(Ensemble::Cue, 100, 50_000, 202);
    let t_cue100 = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let scan = zeta_scan::find_zeta_prime_zeros(1000.0, 10_000.0, ScanOptions::default()).unwrap();
    let t_scan = t.elapsed().as_secs_f64();

    let t = Instant::now();
    results.push((1, c1(&cue40), t.elapsed().as_secs_f64() + t_cue40));
    let t = Instant::now();
    results.push((2, c2(&cue100), t.elapsed().as_secs_f64() + t_cue100));
    let t = Instant::now();
    results.push((3, c3(&cue40, &cue100, &scan.zeros), t.elapsed().as_secs_f64()));
    let steps: [(usize, fn() -> Outcome); 7] = [(4, c4), (5, c5), (6, c6), (7, c7), (8, c8), (9, c9), (10, c10)];
    for (k, f) in steps {
        let t = Instant::now();
        let o = f();
        results.push((k, o, t.elapsed().as_secs_f64()));
    }
    let t = Instant::now();
    results.push((11, c11(&scan.zeros, &scan.failures), t.elapsed().as_secs_f64() + t_scan));

    let mut passed = 0;
    for (k, o, secs) in &results {
        println!("{} C{k}: {} ({secs:.1}s)", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        for i in &o.info {
            println!("  INFO C{k}: {i}");
        }
        passed += usize::from(o.pass);
    }
    println!("acceptance: {passed}/{} criteria pass", results.len());
    if strict && passed < results.len() {
        std::process::exit(1);
    }
}
