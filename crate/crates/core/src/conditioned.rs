//! Averages under μ₂: Haar measure on U(N−2) reweighted by |Λ(1)|⁴.
//!
//! Self-normalized importance sampling with batch-means standard errors.

use crate::ensembles::{self, EigenphaseConfig, Ensemble};
use crate::expansions::{self, moment_polynomials};
use crate::stats::EmpiricalDistribution;
use crate::{poly, rng, Error, Result, C64};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Observable names in accumulation order. `A0` is the normalized
/// Re A₀; `A0^3`, `A1`, `A0A1` follow the normalization of the closed-form
/// moment polynomials, i.e. they are (Λ′/Λ)(1)³, (Λ′/Λ)′(1) and their
/// product; `B2` is Re b₂ with A_j as defined per configuration.
pub const OBSERVABLES: [&str; 8] = ["ONE", "A0", "A0^3", "A1", "A0A1", "B1", "B2", "RE_TR"];

pub const DEFAULT_BATCHES: usize = 50;

#[derive(Clone, Debug, PartialEq)]
pub struct WeightedSample {
    /// Only kept when phases were requested.
    pub config: Option<EigenphaseConfig>,
    pub weight: f64,
    /// (Λ′/Λ)(1) over the N−2 sampled phases
    pub l0: C64,
    /// (Λ′/Λ)′(1)
    pub l1: C64,
    pub trace: C64,
}

impl WeightedSample {
    pub fn observables(&self, n: usize) -> [f64; 8] {
        let nf = n as f64;
        let a0 = self.l0 / nf;
        let a1 = -self.l1 / (nf * nf);
        let (b1, b2) = expansions::coeff_b(a0, a1, n);
        [
            1.0,
            a0.re,
            (self.l0 * self.l0 * self.l0).re,
            self.l1.re,
            (self.l0 * self.l1).re,
            b1.re,
            b2.re,
            self.trace.re,
        ]
    }
}

/// Jet (value, first, second derivative) of Φ at z = 1.
type Jet = [C64; 3];

fn z_times(j: &Jet) -> Jet {
    [j[0], j[0] + j[1], j[1] * 2.0 + j[2]]
}

/// Λ(1), Λ′(1), Λ″(1) and Tr U from Verblunsky coefficients, in O(M).
pub fn jets_at_one(alpha: &[C64]) -> (Jet, C64) {
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let mut phi: Jet = [one, zero, zero];
    let mut star: Jet = [one, zero, zero];
    let mut sub = zero;
    for (k, &a) in alpha.iter().enumerate() {
        let zp = z_times(&phi);
        let ac = a.conj();
        let nphi = [zp[0] - ac * star[0], zp[1] - ac * star[1], zp[2] - ac * star[2]];
        let nstar = [star[0] - a * zp[0], star[1] - a * zp[1], star[2] - a * zp[2]];
        phi = nphi;
        star = nstar;
        sub = if k == 0 { -ac } else { sub + ac * alpha[k - 1] };
    }
    (phi, -sub)
}

fn sample_one<R: Rng + ?Sized>(n: usize, rng: &mut R, keep_phases: bool, seed: u64) -> Result<WeightedSample> {
    let m = n - 2;
    let alpha = ensembles::verblunsky(m, 2.0, rng);
    let (j, trace) = jets_at_one(&alpha);
    let l0 = j[1] / j[0];
    let l1 = j[2] / j[0] - l0 * l0;
    let weight = j[0].norm_sqr().powi(2);
    let config = if keep_phases {
        let c = ensembles::szego_poly(&alpha);
        let roots = poly::aberth_roots(&c, Some(poly::circle_start(m, 1.0)))?;
        let phases = roots.into_iter().map(|z| poly::polish(&c, z).arg()).collect();
        Some(EigenphaseConfig::from_phases(phases, Ensemble::Cue, seed)?)
    } else {
        None
    };
    Ok(WeightedSample { config, weight, l0, l1, trace })
}

/// Recompute weight and log-derivatives directly from the phases.
pub fn recompute_from_phases(c: &EigenphaseConfig) -> (f64, C64, C64) {
    let mut l0 = C64::new(0.0, 0.0);
    let mut l1 = C64::new(0.0, 0.0);
    let mut logw = 0.0;
    for &t in &c.raw_phases {
        let d = crate::polyderiv::one_minus_unit(t);
        let inv = d.inv();
        l0 += inv;
        l1 -= inv * inv;
        logw += 4.0 * d.norm().ln();
    }
    (logw.exp(), l0, l1)
}

/// `count` weighted samples for conditioning dimension n (matrices of size
/// n−2), all drawn from one stream.
pub fn sample_weighted(n: usize, count: usize, seed: u64, stream: u64, keep_phases: bool) -> Result<Vec<WeightedSample>> {
    if n < 6 {
        return Err(Error::InvalidArgument("n must be at least 6".into()));
    }
    let mut r = rng::stream(seed, stream);
    (0..count).map(|_| sample_one(n, &mut r, keep_phases, seed)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchSums {
    pub count: u64,
    pub sum_w: f64,
    pub sum_w2: f64,
    /// Σ w·g for each observable
    pub sum_wg: Vec<f64>,
    pub spot_checks: u64,
    pub spot_failures: u64,
}

impl BatchSums {
    fn new(k: usize) -> Self {
        BatchSums { count: 0, sum_w: 0.0, sum_w2: 0.0, sum_wg: vec![0.0; k], spot_checks: 0, spot_failures: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentEntry {
    pub name: String,
    pub mean: f64,
    pub stderr: f64,
    pub predicted: Option<f64>,
    pub z_score: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub n: usize,
    pub seed: u64,
    pub sample_count: u64,
    pub batches: Vec<BatchSums>,
    pub entries: Vec<MomentEntry>,
    /// Mean unnormalized weight and its standard error (estimates C_N⁻¹).
    pub mean_weight: f64,
    pub mean_weight_stderr: f64,
    pub effective_sample_size: f64,
    /// Re b₂ mean from substituting the closed-form moments directly.
    pub b2_direct_substitution: f64,
    pub warnings: Vec<String>,
}

fn predictions(n: usize) -> Vec<Option<f64>> {
    let m = moment_polynomials(n).expect("n ≥ 6");
    vec![
        Some(1.0),
        Some(m.a0_mean),
        Some(m.a0_cubed),
        Some(m.a1_mean),
        Some(m.a0a1_mean),
        Some(0.25),
        Some(m.b2_mean_consistent),
        None,
    ]
}

fn ratio_stats(num: &[f64], den: &[f64]) -> (f64, f64) {
    let b = num.len() as f64;
    let tn: f64 = num.iter().sum();
    let td: f64 = den.iter().sum();
    let est = tn / td;
    if num.len() < 2 {
        return (est, f64::NAN);
    }
    let dbar = td / b;
    let ss: f64 = num.iter().zip(den).map(|(&x, &w)| ((x - est * w) / dbar).powi(2)).sum();
    (est, (ss / (b * (b - 1.0))).sqrt())
}

impl MomentReport {
    pub fn from_batches(n: usize, seed: u64, batches: Vec<BatchSums>) -> Self {
        let preds = predictions(n);
        let den: Vec<f64> = batches.iter().map(|b| b.sum_w).collect();
        let mut entries = Vec::new();
        for (k, name) in OBSERVABLES.iter().enumerate() {
            let num: Vec<f64> = batches.iter().map(|b| b.sum_wg[k]).collect();
            let (mean, se) = ratio_stats(&num, &den);
            let (mean, se) = if k == 0 { (1.0, 0.0) } else { (mean, se) };
            let predicted = preds[k];
            let z_score = predicted.and_then(|p| if se > 1e-12 * p.abs().max(1.0) { Some((mean - p) / se) } else { None });
            entries.push(MomentEntry { name: name.to_string(), mean, stderr: se, predicted, z_score });
        }
        let sample_count: u64 = batches.iter().map(|b| b.count).sum();
        let sw: f64 = den.iter().sum();
        let sw2: f64 = batches.iter().map(|b| b.sum_w2).sum();
        let per: Vec<f64> = batches.iter().map(|b| b.sum_w / b.count.max(1) as f64).collect();
        let mean_weight = sw / sample_count.max(1) as f64;
        let nb = per.len() as f64;
        let mw_se = if per.len() > 1 {
            let pm = per.iter().sum::<f64>() / nb;
            (per.iter().map(|x| (x - pm).powi(2)).sum::<f64>() / (nb * (nb - 1.0))).sqrt()
        } else {
            f64::NAN
        };
        let ess = sw * sw / sw2;
        let mut warnings = Vec::new();
        if ess < 100.0 {
            warnings.push(format!("effective sample size {ess:.1} < 100: estimates unreliable"));
        }
        let failures: u64 = batches.iter().map(|b| b.spot_failures).sum();
        if failures > 0 {
            warnings.push(format!("{failures} spot checks disagreed with recomputation from phases"));
        }
        let b2_direct_substitution = moment_polynomials(n).map(|m| m.b2_mean).unwrap_or(f64::NAN);
        MomentReport {
            n,
            seed,
            sample_count,
            batches,
            entries,
            mean_weight,
            mean_weight_stderr: mw_se,
            effective_sample_size: ess,
            b2_direct_substitution,
            warnings,
        }
    }

    pub fn entry(&self, name: &str) -> Option<&MomentEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    /// Union of two reports over disjoint seed ranges: batches concatenate.
    pub fn merge(&self, other: &MomentReport) -> Result<MomentReport> {
        if self.n != other.n {
            return Err(Error::InvalidArgument("cannot merge reports for different n".into()));
        }
        let mut b = self.batches.clone();
        b.extend(other.batches.iter().cloned());
        Ok(MomentReport::from_batches(self.n, self.seed, b))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= 1e-6 * scale.max(1e-300)
}

fn run_batch(n: usize, count: usize, seed: u64, stream: u64, spot_every: usize) -> Result<BatchSums> {
    let mut r = rng::stream(seed, stream);
    let mut acc = BatchSums::new(OBSERVABLES.len());
    for i in 0..count {
        let spot = spot_every > 0 && i % spot_every == 0;
        let s = sample_one(n, &mut r, spot, seed)?;
        if let Some(c) = &s.config {
            acc.spot_checks += 1;
            let (w, l0, l1) = recompute_from_phases(c);
            let ok = close(w, s.weight, s.weight)
                && close(s.weight * l0.norm(), s.weight * s.l0.norm(), s.weight * (1.0 + l0.norm()))
                && close(s.weight * l1.re, s.weight * s.l1.re, s.weight * (1.0 + l1.norm()));
            if !ok {
                acc.spot_failures += 1;
            }
        }
        let g = s.observables(n);
        acc.count += 1;
        acc.sum_w += s.weight;
        acc.sum_w2 += s.weight * s.weight;
        for (k, v) in g.iter().enumerate() {
            acc.sum_wg[k] += s.weight * v;
        }
    }
    Ok(acc)
}

fn batch_sizes(count: usize, batches: usize) -> Vec<usize> {
    let base = count / batches;
    let extra = count % batches;
    (0..batches).map(|b| base + usize::from(b < extra)).collect()
}

/// Importance-sampled μ₂ moments with `batches` independent seed streams
/// starting at stream index `first_stream`.
pub fn estimate_moments(n: usize, count: usize, seed: u64, batches: usize, first_stream: u64) -> Result<MomentReport> {
    if count < 10_000 {
        return Err(Error::TooFewSamples { need: 10_000, got: count });
    }
    if n < 6 {
        return Err(Error::InvalidArgument("n must be at least 6".into()));
    }
    let sizes = batch_sizes(count, batches.max(2));
    let out: Result<Vec<BatchSums>> = sizes
        .par_iter()
        .enumerate()
        .map(|(b, &c)| run_batch(n, c, seed, first_stream + b as u64, 100))
        .collect();
    Ok(MomentReport::from_batches(n, seed, out?))
}

/// Same as `estimate_moments` but from already drawn samples, one batch per chunk.
pub fn report_from_samples(n: usize, seed: u64, samples: &[WeightedSample], batches: usize) -> Result<MomentReport> {
    if samples.len() < batches.max(2) {
        return Err(Error::TooFewSamples { need: batches.max(2), got: samples.len() });
    }
    let sizes = batch_sizes(samples.len(), batches.max(2));
    let mut out = Vec::new();
    let mut i = 0;
    for c in sizes {
        let mut acc = BatchSums::new(OBSERVABLES.len());
        for s in &samples[i..i + c] {
            acc.count += 1;
            acc.sum_w += s.weight;
            acc.sum_w2 += s.weight * s.weight;
            for (k, v) in s.observables(n).iter().enumerate() {
                acc.sum_wg[k] += s.weight * v;
            }
        }
        i += c;
        out.push(acc);
    }
    Ok(MomentReport::from_batches(n, seed, out))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OneLevel {
    pub n: usize,
    /// Weighted masses per bin: expected number of rescaled phases ξ in the
    /// bin under μ₂ (both signs of ξ folded onto |ξ| and halved).
    pub dist: EmpiricalDistribution,
    pub stderr: Vec<f64>,
    pub w1_integral: Vec<f64>,
    pub effective_sample_size: f64,
    /// Total mass over all ξ per configuration (= N−2 up to rounding).
    pub mass_per_config: f64,
}

struct OneLevelBatch {
    sum_w: f64,
    sum_w2: f64,
    sum_w_total: f64,
    bins: Vec<f64>,
    under: f64,
    over: f64,
    count: u64,
}

/// Weighted 1-level histogram of ξ = tM/(2π), M = N−2.
pub fn empirical_one_level(n: usize, count: usize, seed: u64, edges: &[f64], batches: usize) -> Result<OneLevel> {
    if count < 100_000 {
        return Err(Error::TooFewSamples { need: 100_000, got: count });
    }
    if n < 6 {
        return Err(Error::InvalidArgument("n must be at least 6".into()));
    }
    let template = EmpiricalDistribution::new(edges.to_vec())?;
    let m = n - 2;
    let sizes = batch_sizes(count, batches.max(2));
    let res: Result<Vec<OneLevelBatch>> = sizes
        .par_iter()
        .enumerate()
        .map(|(b, &c)| {
            let mut r = rng::stream(seed, b as u64);
            let mut acc = OneLevelBatch {
                sum_w: 0.0,
                sum_w2: 0.0,
                sum_w_total: 0.0,
                bins: vec![0.0; edges.len() - 1],
                under: 0.0,
                over: 0.0,
                count: 0,
            };
            for _ in 0..c {
                let s = sample_one(n, &mut r, true, seed)?;
                let cfg = s.config.as_ref().expect("phases requested");
                acc.count += 1;
                acc.sum_w += s.weight;
                acc.sum_w2 += s.weight * s.weight;
                for &t in &cfg.raw_phases {
                    let xi = (t * m as f64 / TAU).abs();
                    let w = 0.5 * s.weight;
                    acc.sum_w_total += 2.0 * w;
                    match template.bin_index(xi) {
                        Some(k) => acc.bins[k] += w,
                        None if xi < edges[0] => acc.under += w,
                        None => acc.over += w,
                    }
                }
            }
            Ok(acc)
        })
        .collect();
    let res = res?;
    let den: Vec<f64> = res.iter().map(|b| b.sum_w).collect();
    let sw: f64 = den.iter().sum();
    let sw2: f64 = res.iter().map(|b| b.sum_w2).sum();
    let nb = edges.len() - 1;
    let mut masses = vec![0.0; nb];
    let mut stderr = vec![0.0; nb];
    for k in 0..nb {
        let num: Vec<f64> = res.iter().map(|b| b.bins[k]).collect();
        let (est, se) = ratio_stats(&num, &den);
        masses[k] = est;
        stderr[k] = se;
    }
    let under = res.iter().map(|b| b.under).sum::<f64>() / sw;
    let over = res.iter().map(|b| b.over).sum::<f64>() / sw;
    let total = res.iter().map(|b| b.sum_w_total).sum::<f64>() / sw;
    let mut dist = template;
    dist.counts = masses;
    dist.underflow = under;
    dist.overflow = over;
    dist.total_mass = dist.counts.iter().sum::<f64>() + under + over;
    dist.total_samples = res.iter().map(|b| b.count).sum();
    dist.metadata.ensemble = "CUE-conditioned".into();
    dist.metadata.n = n;
    dist.metadata.seed_lo = seed;
    dist.metadata.seed_hi = seed;
    let w1_integral = w1_bin_integrals(edges);
    Ok(OneLevel {
        n,
        dist,
        stderr,
        w1_integral,
        effective_sample_size: sw * sw / sw2,
        mass_per_config: total,
    })
}

/// ∫ W₁^{(2,0)} over each bin.
pub fn w1_bin_integrals(edges: &[f64]) -> Vec<f64> {
    edges
        .windows(2)
        .map(|e| crate::quad::integrate(|t| expansions::one_level_density_w1(2, t).unwrap(), e[0], e[1], 1e-12))
        .collect()
}

/// Unweighted (Haar) mean of an observable, for contrast with μ₂.
pub fn haar_mean(n: usize, count: usize, seed: u64, which: usize) -> Result<(f64, f64)> {
    let s = sample_weighted(n, count, seed, 0, false)?;
    let v: Vec<f64> = s.iter().map(|x| x.observables(n)[which]).collect();
    let m = v.iter().sum::<f64>() / v.len() as f64;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() as f64 - 1.0);
    Ok((m, (var / v.len() as f64).sqrt()))
}
