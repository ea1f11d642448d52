//! Eigenphase configurations from CUE, COE and Poisson point processes.

use crate::{poly, rng, Error, Result, C64};
use nalgebra::{DMatrix, Schur};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Ensemble {
    Cue,
    Coe,
    Poisson,
    Explicit,
}

impl Ensemble {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cue" => Ok(Ensemble::Cue),
            "coe" => Ok(Ensemble::Coe),
            "poisson" => Ok(Ensemble::Poisson),
            "explicit" => Ok(Ensemble::Explicit),
            _ => Err(Error::InvalidArgument(format!("unknown ensemble '{s}'"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Ensemble::Cue => "CUE",
            Ensemble::Coe => "COE",
            Ensemble::Poisson => "POISSON",
            Ensemble::Explicit => "EXPLICIT",
        }
    }
}

/// How CUE/COE matrices are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sampler {
    /// Gaussian matrix, QR with diagonal phase fix, dense eigensolver.
    Dense,
    /// Random Verblunsky coefficients and the Szegő recursion; eigenphases
    /// are then the roots of the resulting polynomial.
    Verblunsky,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenphaseConfig {
    pub n: usize,
    /// Sorted phases in (−π, π].
    pub raw_phases: Vec<f64>,
    /// x_j = n t_j / 2π, same order as `raw_phases`.
    pub rescaled: Vec<f64>,
    pub ensemble: Ensemble,
    pub seed: u64,
}

/// Wrap an angle into (−π, π].
pub fn wrap_phase(t: f64) -> f64 {
    let mut u = t.rem_euclid(TAU);
    if u > PI {
        u -= TAU;
    }
    if u <= -PI {
        u += TAU;
    }
    u
}

impl EigenphaseConfig {
    pub fn from_phases(phases: Vec<f64>, ensemble: Ensemble, seed: u64) -> Result<Self> {
        if phases.is_empty() {
            return Err(Error::InvalidArgument("empty phase list".into()));
        }
        if phases.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidArgument("non-finite phase".into()));
        }
        let mut raw: Vec<f64> = phases.into_iter().map(wrap_phase).collect();
        // stable: ties keep generator order
        raw.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = raw.len();
        let rescaled = raw.iter().map(|&t| rescale(t, n)).collect();
        Ok(EigenphaseConfig {
            n,
            raw_phases: raw,
            rescaled,
            ensemble,
            seed,
        })
    }

    pub fn explicit(phases: Vec<f64>) -> Result<Self> {
        Self::from_phases(phases, Ensemble::Explicit, 0)
    }

    pub fn unit_points(&self) -> Vec<C64> {
        self.raw_phases.iter().map(|&t| C64::from_polar(1.0, t)).collect()
    }

    /// Periodically extended rescaled phase x_{j} for any integer j (0-based).
    pub fn extended(&self, j: i64) -> f64 {
        let n = self.n as i64;
        let k = j.rem_euclid(n);
        let wraps = (j - k) / n;
        self.rescaled[k as usize] + (wraps * n) as f64
    }

    pub fn to_json(&self) -> String {
        let phases: Vec<String> = self.raw_phases.iter().map(|t| format!("{t:.16e}")).collect();
        format!(
            "{{\"n\":{},\"ensemble\":\"{}\",\"seed\":{},\"raw_phases\":[{}]}}",
            self.n,
            self.ensemble.name(),
            self.seed,
            phases.join(",")
        )
    }

    pub fn from_json(s: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            n: usize,
            ensemble: Ensemble,
            seed: u64,
            raw_phases: Vec<f64>,
        }
        let r: Raw = serde_json::from_str(s)?;
        if r.raw_phases.len() != r.n {
            return Err(Error::InvalidArgument("n does not match phase count".into()));
        }
        Self::from_phases(r.raw_phases, r.ensemble, r.seed)
    }
}

pub fn rescale(t: f64, n: usize) -> f64 {
    n as f64 * t / TAU
}

/// Wraparound gaps θ_j = x_{j+1} − x_j in index order; they sum to N.
pub fn nearest_spacings(c: &EigenphaseConfig) -> Vec<f64> {
    let n = c.n;
    let x = &c.rescaled;
    let mut g: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    g.push(n as f64 - (x[n - 1] - x[0]));
    g
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let a: f64 = rng.sample(StandardNormal);
    let b: f64 = rng.sample(StandardNormal);
    C64::new(a, b) * std::f64::consts::FRAC_1_SQRT_2
}

/// Haar unitary: QR of a complex Gaussian matrix, columns rescaled by the
/// phases of diag(R).
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<C64> {
    let z = DMatrix::from_fn(n, n, |_, _| complex_gaussian(rng));
    let qr = z.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= ph;
        }
    }
    q
}

const UNIT_TOL: f64 = 1e-10;
const MAX_REDRAWS: usize = 8;

fn unitary_eigenphases(m: DMatrix<C64>, seed: u64) -> Result<Option<Vec<f64>>> {
    let schur = Schur::try_new(m, f64::EPSILON, 10_000).ok_or(Error::EigenNonConvergence { seed })?;
    let ev = schur.eigenvalues().ok_or(Error::EigenNonConvergence { seed })?;
    if ev.iter().any(|z| (z.norm() - 1.0).abs() > UNIT_TOL) {
        return Ok(None);
    }
    Ok(Some(ev.iter().map(|z| z.arg()).collect()))
}

fn dense_draw<R: Rng + ?Sized>(n: usize, rng: &mut R, seed: u64, coe: bool) -> Result<Vec<f64>> {
    for attempt in 0..MAX_REDRAWS {
        let u = haar_unitary(n, rng);
        let m = if coe {
            let v = &u * u.transpose();
            let asym = (&v - v.transpose()).iter().fold(0.0f64, |a, z| a.max(z.norm()));
            if asym > 1e-10 {
                return Err(Error::Domain(format!("U U^T not symmetric ({asym:e})")));
            }
            v
        } else {
            u
        };
        if let Some(p) = unitary_eigenphases(m, seed)? {
            return Ok(p);
        }
        log::warn!("seed {seed}: eigenvalue off the unit circle, redraw {}", attempt + 1);
    }
    Err(Error::EigenNonConvergence { seed })
}

/// Verblunsky coefficients of a CUE (β=2) or COE (β=1) matrix of size n.
pub fn verblunsky<R: Rng + ?Sized>(n: usize, beta: f64, rng: &mut R) -> Vec<C64> {
    let mut a = Vec::with_capacity(n);
    for k in 0..n - 1 {
        let m = beta * (n - k - 1) as f64 / 2.0;
        let u: f64 = rng.random::<f64>();
        // |α|² ~ Beta(1, m)
        let r2 = -((1.0 - u).ln() / m).exp_m1();
        let phi = TAU * rng.random::<f64>();
        a.push(C64::from_polar(r2.sqrt(), phi));
    }
    a.push(C64::from_polar(1.0, TAU * rng.random::<f64>()));
    a
}

/// Monic characteristic polynomial from Verblunsky coefficients (Szegő recursion).
pub fn szego_poly(alpha: &[C64]) -> Vec<C64> {
    let n = alpha.len();
    let mut phi = vec![C64::new(1.0, 0.0)];
    let mut star = vec![C64::new(1.0, 0.0)];
    for &a in alpha.iter().take(n) {
        let k = phi.len();
        let mut nphi = vec![C64::new(0.0, 0.0); k + 1];
        let mut nstar = vec![C64::new(0.0, 0.0); k + 1];
        for i in 0..k {
            nphi[i + 1] += phi[i];
            nphi[i] -= a.conj() * star[i];
            nstar[i] += star[i];
            nstar[i + 1] -= a * phi[i];
        }
        phi = nphi;
        star = nstar;
    }
    phi
}

/// Characteristic polynomial of a CUE/COE draw via Verblunsky coefficients.
pub fn sample_char_poly<R: Rng + ?Sized>(ensemble: Ensemble, n: usize, rng: &mut R) -> Result<Vec<C64>> {
    match ensemble {
        Ensemble::Cue => Ok(szego_poly(&verblunsky(n, 2.0, rng))),
        Ensemble::Coe => Ok(szego_poly(&verblunsky(n, 1.0, rng))),
        Ensemble::Poisson => {
            let p = poisson_phases(n, rng);
            Ok(poly::from_roots(&p.iter().map(|&t| C64::from_polar(1.0, t)).collect::<Vec<_>>()))
        }
        Ensemble::Explicit => Err(Error::InvalidArgument("explicit ensemble cannot be sampled".into())),
    }
}

fn verblunsky_phases<R: Rng + ?Sized>(n: usize, beta: f64, rng: &mut R, seed: u64) -> Result<Vec<f64>> {
    for _ in 0..MAX_REDRAWS {
        let c = szego_poly(&verblunsky(n, beta, rng));
        let roots = poly::aberth_roots(&c, Some(poly::circle_start(n, 1.0)))?;
        let roots: Vec<C64> = roots.into_iter().map(|z| poly::polish(&c, z)).collect();
        if roots.iter().all(|z| (z.norm() - 1.0).abs() <= UNIT_TOL) {
            return Ok(roots.iter().map(|z| z.arg()).collect());
        }
        log::warn!("seed {seed}: Verblunsky root off the unit circle, redraw");
    }
    Err(Error::EigenNonConvergence { seed })
}

fn poisson_phases<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| PI - TAU * rng.random::<f64>()).collect()
}

fn check_n(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::InvalidArgument(format!("n must be at least {min}")));
    }
    if n > poly::MAX_DEGREE {
        return Err(Error::DegreeTooLarge(n));
    }
    Ok(())
}

pub fn sample_with<R: Rng + ?Sized>(
    ensemble: Ensemble,
    n: usize,
    sampler: Sampler,
    rng: &mut R,
    seed: u64,
) -> Result<EigenphaseConfig> {
    let phases = match (ensemble, sampler) {
        (Ensemble::Cue, Sampler::Dense) => {
            check_n(n, 2)?;
            dense_draw(n, rng, seed, false)?
        }
        (Ensemble::Coe, Sampler::Dense) => {
            check_n(n, 2)?;
            dense_draw(n, rng, seed, true)?
        }
        (Ensemble::Cue, Sampler::Verblunsky) => {
            check_n(n, 2)?;
            verblunsky_phases(n, 2.0, rng, seed)?
        }
        (Ensemble::Coe, Sampler::Verblunsky) => {
            check_n(n, 2)?;
            verblunsky_phases(n, 1.0, rng, seed)?
        }
        (Ensemble::Poisson, _) => {
            check_n(n, 1)?;
            poisson_phases(n, rng)
        }
        (Ensemble::Explicit, _) => {
            return Err(Error::InvalidArgument("explicit ensemble cannot be sampled".into()))
        }
    };
    EigenphaseConfig::from_phases(phases, ensemble, seed)
}

pub fn sample_cue(n: usize, seed: u64) -> Result<EigenphaseConfig> {
    sample_with(Ensemble::Cue, n, Sampler::Dense, &mut rng::from_seed(seed), seed)
}

pub fn sample_coe(n: usize, seed: u64) -> Result<EigenphaseConfig> {
    sample_with(Ensemble::Coe, n, Sampler::Dense, &mut rng::from_seed(seed), seed)
}

pub fn sample_poisson(n: usize, seed: u64) -> Result<EigenphaseConfig> {
    sample_with(Ensemble::Poisson, n, Sampler::Dense, &mut rng::from_seed(seed), seed)
}
