//! Experiment drivers. Work is cut into fixed blocks, each with its own
//! seed stream, so results do not depend on the number of worker threads.

use crate::ensembles::{self, EigenphaseConfig, Ensemble, Sampler};
use crate::expansions::{self, spacing_cdf_p2};
use crate::polyderiv::{self, PairConfig, RootSolver};
use crate::stats::{self, EmpiricalDistribution};
use crate::{rng, Error, Result, C64};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const BLOCK: usize = 256;

#[derive(Clone, Copy, Debug)]
pub struct DerivDistOptions {
    pub ensemble: Ensemble,
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub sampler: Sampler,
    pub solver: RootSolver,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivDist {
    pub hist: EmpiricalDistribution,
    pub roots: u64,
    pub flagged: u64,
}

/// Roots of Λ′ for one draw. Bulk CUE/COE runs work from Verblunsky
/// coefficients; phase-based draws go through the partial-fraction solver.
fn one_draw<R: Rng + ?Sized>(o: &DerivDistOptions, r: &mut R) -> Result<polyderiv::DerivRootSet> {
    match (o.ensemble, o.sampler) {
        (Ensemble::Cue | Ensemble::Coe, Sampler::Verblunsky) => {
            let c = ensembles::sample_char_poly(o.ensemble, o.n, r)?;
            polyderiv::deriv_roots_from_poly(&c, o.n, o.solver)
        }
        _ => {
            let c = ensembles::sample_with(o.ensemble, o.n, o.sampler, r, o.seed)?;
            polyderiv::deriv_roots_with(&c, o.solver)
        }
    }
}

/// Histogram of S = N(1 − |z′|) over all roots of Λ′.
pub fn deriv_dist(o: &DerivDistOptions, edges: &[f64]) -> Result<DerivDist> {
    let template = EmpiricalDistribution::new(edges.to_vec())?;
    let blocks = rng::blocks(o.samples, BLOCK);
    let parts: Result<Vec<(EmpiricalDistribution, u64, u64)>> = blocks
        .par_iter()
        .enumerate()
        .map(|(b, &(_, len))| {
            let mut r = rng::stream(o.seed, b as u64);
            let mut h = template.clone();
            let (mut roots, mut flagged) = (0u64, 0u64);
            for _ in 0..len {
                let set = one_draw(o, &mut r)?;
                roots += set.roots.len() as u64;
                flagged += set.flagged_count as u64;
                for s in set.accepted() {
                    h.add(s);
                }
            }
            Ok((h, roots, flagged))
        })
        .collect();
    let mut hist = template;
    let (mut roots, mut flagged) = (0, 0);
    for (h, r, f) in parts? {
        hist = hist.merge(&h)?;
        roots += r;
        flagged += f;
    }
    hist.metadata.ensemble = o.ensemble.name().into();
    hist.metadata.n = o.n;
    hist.metadata.seed_lo = o.seed;
    hist.metadata.seed_hi = o.seed;
    Ok(DerivDist { hist, roots, flagged })
}

/// Edges for tail CDF work: width 0.01 on [0, 0.5], then 0.05 to 10.
pub fn cdf_edges() -> Vec<f64> {
    let mut e: Vec<f64> = (0..50).map(|k| k as f64 / 100.0).collect();
    e.extend((10..=200).map(|k| k as f64 / 20.0));
    e
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CdfRow {
    pub s: f64,
    pub empirical: f64,
    pub law: f64,
    pub relative_error: f64,
    /// ∫ of the two-term law with the sign-consistent quartic coefficient.
    pub consistent: f64,
}

/// Empirical CDF of S against the integrated small-s law.
pub fn cdf_tail(dist: &DerivDist, points: &[f64]) -> Vec<CdfRow> {
    points
        .iter()
        .map(|&s| {
            let emp = stats::cdf_at(&dist.hist, s).unwrap_or(f64::NAN);
            let th = expansions::q_small_cdf(s);
            let (c1, c3) = expansions::pair_gap_limit_coefficients(1.0 / 240.0);
            let cons = c1 * s.powf(1.5) / 1.5 + c3 * s.powf(2.5) / 2.5;
            CdfRow { s, empirical: emp, law: th, relative_error: (emp - th) / th, consistent: cons }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpacingRow {
    pub s: f64,
    pub empirical: f64,
    pub stderr: f64,
    pub predicted: f64,
}

/// CUE eigenphases for bulk runs.
pub fn cue_config<R: Rng + ?Sized>(n: usize, sampler: Sampler, r: &mut R, seed: u64) -> Result<EigenphaseConfig> {
    ensembles::sample_with(Ensemble::Cue, n, sampler, r, seed)
}

/// Fraction of nearest-neighbour gaps ≤ s, with batch-means errors over blocks.
pub fn spacing_law(n: usize, samples: usize, seed: u64, s_list: &[f64], sampler: Sampler) -> Result<Vec<SpacingRow>> {
    let blocks = rng::blocks(samples, BLOCK.max(samples.div_ceil(100)));
    let per: Result<Vec<Vec<f64>>> = blocks
        .par_iter()
        .enumerate()
        .map(|(b, &(_, len))| {
            let mut r = rng::stream(seed, b as u64);
            let mut hits = vec![0u64; s_list.len()];
            let mut total = 0u64;
            for _ in 0..len {
                let c = cue_config(n, sampler, &mut r, seed)?;
                for g in ensembles::nearest_spacings(&c) {
                    total += 1;
                    for (k, &s) in s_list.iter().enumerate() {
                        if g <= s {
                            hits[k] += 1;
                        }
                    }
                }
            }
            Ok(hits.iter().map(|&h| h as f64 / total as f64).collect())
        })
        .collect();
    let per = per?;
    s_list
        .iter()
        .enumerate()
        .map(|(k, &s)| {
            let v: Vec<f64> = per.iter().map(|p| p[k]).collect();
            let (m, se) = stats::batch_mean_se(&v);
            Ok(SpacingRow { s, empirical: m, stderr: se, predicted: spacing_cdf_p2(s, n)? })
        })
        .collect()
}

/// A background of n−2 CUE phases rescaled by n, with every phase at
/// least `margin` (rescaled units) away from the pair point.
pub fn random_background<R: Rng + ?Sized>(n: usize, margin: f64, r: &mut R) -> Result<Vec<f64>> {
    for _ in 0..10_000 {
        let cfg = cue_config(n - 2, Sampler::Verblunsky, r, 0)?;
        let x: Vec<f64> = cfg.raw_phases.iter().map(|&t| ensembles::rescale(t, n)).collect();
        if x.iter().all(|v| v.abs() >= margin) {
            return Ok(x);
        }
    }
    Err(Error::Domain("could not draw an admissible background".into()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub background: Vec<f64>,
    pub thetas: Vec<f64>,
    pub deltas: Vec<C64>,
    pub fitted_b1: C64,
    pub fitted_b2: C64,
    pub predicted_b1: C64,
    pub predicted_b2: C64,
    /// log₂ of successive remainder ratios |δ − b₁π²θ² − b₂π⁴θ⁴| across the
    /// θ ladder (θ doubling each step).
    pub remainder_orders: Vec<f64>,
}

/// Fit δ(θ) = b₁u + b₂u² + b₃u³ (u = π²θ²) through three θ values.
pub fn fit_expansion(background: &[f64], n: usize, thetas: &[f64; 3]) -> Result<FitResult> {
    let mut deltas = Vec::new();
    for &t in thetas {
        let p = PairConfig::new(t, background.to_vec(), n)?;
        deltas.push(polyderiv::locate_delta(&p)?);
    }
    let u: Vec<f64> = thetas.iter().map(|t| std::f64::consts::PI.powi(2) * t * t).collect();
    // solve the 3×3 Vandermonde-like system for y_i = δ_i/u_i = b₁ + b₂u + b₃u²
    let y: Vec<C64> = deltas.iter().zip(&u).map(|(d, ui)| d / ui).collect();
    let d01 = (y[1] - y[0]) / (u[1] - u[0]);
    let d12 = (y[2] - y[1]) / (u[2] - u[1]);
    let b3 = (d12 - d01) / (u[2] - u[0]);
    let b2 = d01 - b3 * (u[0] + u[1]);
    let b1 = y[0] - b2 * u[0] - b3 * u[0] * u[0];
    let c = expansions::coefficients_ab(background, n, 1)?;
    let rem: Vec<f64> = thetas
        .iter()
        .zip(&deltas)
        .map(|(&t, d)| (d - expansions::predict_delta(c.b1, c.b2, t)).norm())
        .collect();
    let orders = rem.windows(2).zip(thetas.windows(2)).map(|(r, t)| (r[1] / r[0]).ln() / (t[1] / t[0]).ln()).collect();
    Ok(FitResult {
        background: background.to_vec(),
        thetas: thetas.to_vec(),
        deltas,
        fitted_b1: b1,
        fitted_b2: b2,
        predicted_b1: c.b1,
        predicted_b2: c.b2,
        remainder_orders: orders,
    })
}

pub fn verify_expansion(n: usize, thetas: &[f64; 3], trials: usize, seed: u64, margin: f64) -> Result<Vec<FitResult>> {
    let mut r = rng::from_seed(seed);
    (0..trials)
        .map(|_| {
            let bg = random_background(n, margin, &mut r)?;
            fit_expansion(&bg, n, thetas)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub theta: f64,
    pub background: Vec<f64>,
    pub count: Option<i64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub n: usize,
    pub trials: usize,
    pub theta_max: f64,
    pub violations: Vec<Violation>,
}

/// Argument-principle count on the twice-bitten disk for random pairs.
pub fn uniqueness_check(n: usize, theta_max: f64, trials: usize, seed: u64) -> Result<UniquenessReport> {
    if n < 3 {
        return Err(Error::InvalidArgument("n must be at least 3".into()));
    }
    let blocks = rng::blocks(trials, BLOCK);
    let parts: Result<Vec<Vec<Violation>>> = blocks
        .par_iter()
        .enumerate()
        .map(|(b, &(_, len))| {
            let mut r = rng::stream(seed, b as u64);
            let mut v = Vec::new();
            for _ in 0..len {
                let theta = theta_max * (1.0 - r.random::<f64>());
                let bg = random_background(n, theta / 2.0, &mut r)?;
                let p = PairConfig::new(theta, bg.clone(), n)?;
                match polyderiv::count_roots_in_contour(&p, None) {
                    Ok(1) => {}
                    Ok(c) => v.push(Violation { theta, background: bg, count: Some(c), error: None }),
                    Err(e) => v.push(Violation { theta, background: bg, count: None, error: Some(e.to_string()) }),
                }
            }
            Ok(v)
        })
        .collect();
    Ok(UniquenessReport { n, trials, theta_max, violations: parts?.into_iter().flatten().collect() })
}
