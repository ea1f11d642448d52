//! Zeros of Λ′, the close-pair root z′ and its certification by the
//! argument principle.

use crate::contour::{self, Piece, Tracking};
use crate::ensembles::EigenphaseConfig;
use crate::expansions;
use crate::{poly, Error, Result, C64};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

pub const RESIDUAL_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RootSolver {
    Companion,
    Aberth,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivRootSet {
    pub n: usize,
    pub roots: Vec<C64>,
    pub s_values: Vec<f64>,
    /// Roots whose residual stayed above tolerance after polishing.
    pub flagged: Vec<bool>,
    pub flagged_count: usize,
}

impl DerivRootSet {
    /// S values of unflagged roots.
    pub fn accepted(&self) -> impl Iterator<Item = f64> + '_ {
        self.s_values
            .iter()
            .zip(&self.flagged)
            .filter(|(_, &f)| !f)
            .map(|(&s, _)| s)
    }

    pub fn to_json(&self) -> Result<String> {
        let roots: Vec<[f64; 2]> = self.roots.iter().map(|z| [z.re, z.im]).collect();
        Ok(serde_json::to_string(&serde_json::json!({
            "n": self.n,
            "roots": roots,
            "s_values": self.s_values,
            "flagged_count": self.flagged_count,
        }))?)
    }

    pub fn s_values_csv(&self) -> String {
        let mut s = String::new();
        for v in &self.s_values {
            s.push_str(&format!("{v}\n"));
        }
        s
    }
}

pub fn char_poly_from_phases(c: &EigenphaseConfig) -> Result<Vec<C64>> {
    if c.n > poly::MAX_DEGREE {
        return Err(Error::DegreeTooLarge(c.n));
    }
    Ok(poly::from_roots(&c.unit_points()))
}

/// Roots of the derivative of a degree-n polynomial given by coefficients.
pub fn deriv_roots_from_poly(coeffs: &[C64], n: usize, solver: RootSolver) -> Result<DerivRootSet> {
    if coeffs.len() != n + 1 || n < 2 {
        return Err(Error::InvalidArgument("need degree n ≥ 2 coefficients".into()));
    }
    if n > poly::MAX_DEGREE {
        return Err(Error::DegreeTooLarge(n));
    }
    let d = poly::derivative(coeffs);
    let raw = match solver {
        RootSolver::Companion => poly::companion_roots(&d)?,
        RootSolver::Aberth => poly::aberth_roots(&d, None)?,
    };
    let scale = poly::max_coeff(&d);
    let mut roots = Vec::with_capacity(raw.len());
    let mut flagged = Vec::with_capacity(raw.len());
    for z in raw {
        let z = if z == C64::new(0.0, 0.0) { z } else { poly::polish(&d, z) };
        let ok = poly::horner(&d, z).norm() <= RESIDUAL_TOL * scale && z.norm() <= 1.0 + 1e-9;
        roots.push(z);
        flagged.push(!ok);
    }
    let nf = n as f64;
    let s_values = roots.iter().map(|z| nf * (1.0 - z.norm())).collect();
    let flagged_count = flagged.iter().filter(|&&f| f).count();
    Ok(DerivRootSet { n, roots, s_values, flagged, flagged_count })
}

/// All N−1 roots of Λ′ through the companion matrix of Λ′.
pub fn deriv_roots_all(c: &EigenphaseConfig) -> Result<DerivRootSet> {
    deriv_roots_from_poly(&char_poly_from_phases(c)?, c.n, RootSolver::Companion)
}

pub fn deriv_roots_with(c: &EigenphaseConfig, solver: RootSolver) -> Result<DerivRootSet> {
    match solver {
        RootSolver::Companion => deriv_roots_all(c),
        RootSolver::Aberth => deriv_roots_from_phases(&c.raw_phases),
    }
}

/// (L, L′) for L = Λ′/Λ = Σ 1/(z − w_k), plus Σ 1/|z − w_k| as a scale.
fn log_deriv_jet(points: &[C64], z: C64) -> (C64, C64, f64) {
    let mut l = C64::new(0.0, 0.0);
    let mut l1 = C64::new(0.0, 0.0);
    let mut scale = 0.0;
    for &w in points {
        let v = (z - w).inv();
        l += v;
        l1 -= v * v;
        scale += v.norm();
    }
    (l, l1, scale)
}

/// Λ′/Λ″ = L/(L′ + L²)
fn newton_ratio(l: C64, l1: C64) -> C64 {
    l / (l1 + l * l)
}

/// Zeros of Λ′ found from the eigenphases directly. Working with
/// Σ 1/(z − w_k) instead of monomial coefficients keeps clustered phases
/// well conditioned. Falls back to the companion matrix if Aberth stalls.
pub fn deriv_roots_from_phases(phases: &[f64]) -> Result<DerivRootSet> {
    let n = phases.len();
    if n < 2 {
        return Err(Error::InvalidArgument("need at least two phases".into()));
    }
    if n > poly::MAX_DEGREE {
        return Err(Error::DegreeTooLarge(n));
    }
    let mut t: Vec<f64> = phases.to_vec();
    t.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let gaps: Vec<f64> = (0..n).map(|k| if k + 1 < n { t[k + 1] - t[k] } else { t[0] + TAU - t[k] }).collect();
    let points: Vec<C64> = t.iter().map(|&x| C64::from_polar(1.0, x)).collect();
    if gaps.iter().any(|&g| g < 1e-12) {
        return deriv_roots_from_poly(&poly::from_roots(&points), n, RootSolver::Companion);
    }
    // one start in every gap but the widest, slightly inside the circle
    let widest = (0..n).max_by(|&a, &b| gaps[a].partial_cmp(&gaps[b]).unwrap()).unwrap();
    let r = 1.0 - 1.0 / n as f64;
    let mut z: Vec<C64> = (0..n).filter(|&k| k != widest).map(|k| C64::from_polar(r, t[k] + 0.5 * gaps[k])).collect();
    let d = n - 1;
    let mut done = vec![false; d];
    let mut remaining = d;
    let mut it = 0;
    while remaining > 0 && it < 200 {
        it += 1;
        for i in 0..d {
            if done[i] {
                continue;
            }
            let zi = z[i];
            let (l, l1, scale) = log_deriv_jet(&points, zi);
            if l.norm() <= 4.0 * n as f64 * f64::EPSILON * scale {
                done[i] = true;
                remaining -= 1;
                continue;
            }
            let ratio = newton_ratio(l, l1);
            let mut s = C64::new(0.0, 0.0);
            for (j, &zj) in z.iter().enumerate() {
                if j != i {
                    s += (zi - zj).inv();
                }
            }
            let w = ratio / (C64::new(1.0, 0.0) - ratio * s);
            z[i] = zi - w;
            if w.norm() <= 4.0 * f64::EPSILON * zi.norm().max(1e-3) {
                done[i] = true;
                remaining -= 1;
            }
        }
    }
    if remaining > 0 || z.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        log::debug!("partial-fraction Aberth stalled; using companion");
        return deriv_roots_from_poly(&poly::from_roots(&points), n, RootSolver::Companion);
    }
    let mut roots = Vec::with_capacity(d);
    let mut flagged = Vec::with_capacity(d);
    for zi in z {
        let (l, l1, scale) = log_deriv_jet(&points, zi);
        let z1 = zi - newton_ratio(l, l1);
        let (l_new, _, scale_new) = log_deriv_jet(&points, z1);
        let (zb, res) = if z1.re.is_finite() && z1.im.is_finite() && l_new.norm() / scale_new <= l.norm() / scale {
            (z1, l_new.norm() / scale_new)
        } else {
            (zi, l.norm() / scale)
        };
        roots.push(zb);
        flagged.push(!(res <= RESIDUAL_TOL && zb.norm() <= 1.0 + 1e-9));
    }
    let nf = n as f64;
    let s_values = roots.iter().map(|z| nf * (1.0 - z.norm())).collect();
    let flagged_count = flagged.iter().filter(|&&f| f).count();
    Ok(DerivRootSet { n, roots, s_values, flagged, flagged_count })
}

/// e_N(x) = e^{2πix/N}
pub fn e_n(x: f64, n: usize) -> C64 {
    C64::from_polar(1.0, TAU * x / n as f64)
}

/// 1 − e^{iφ} without cancellation.
pub fn one_minus_unit(phi: f64) -> C64 {
    let s = (0.5 * phi).sin();
    C64::new(2.0 * s * s, -phi.sin())
}

/// A close pair at ±θ/2 plus N−2 background phases (rescaled units).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairConfig {
    pub n: usize,
    pub theta: f64,
    pub background: Vec<f64>,
}

impl PairConfig {
    pub fn new(theta: f64, background: Vec<f64>, n: usize) -> Result<Self> {
        if n < 2 || background.len() + 2 != n {
            return Err(Error::InvalidArgument(format!(
                "background must hold n−2 = {} phases, got {}",
                n.saturating_sub(2),
                background.len()
            )));
        }
        if !(0.0..1.0 / PI).contains(&theta) {
            return Err(Error::OutOfRange(format!("theta = {theta}")));
        }
        let nf = n as f64;
        let mut bg = Vec::with_capacity(background.len());
        for x in background {
            // wrap into [−N/2, N/2)
            let y = (x + nf / 2.0).rem_euclid(nf) - nf / 2.0;
            if y.abs() < theta / 2.0 {
                return Err(Error::InvalidArgument(format!("background phase {x} inside the pair window")));
            }
            bg.push(y);
        }
        Ok(PairConfig { n, theta, background: bg })
    }

    fn angles(&self) -> Vec<f64> {
        let nf = self.n as f64;
        let mut a: Vec<f64> = self.background.iter().map(|&x| TAU * x / nf).collect();
        a.push(PI * self.theta / nf);
        a.push(-PI * self.theta / nf);
        a
    }

    /// Centre and radius of the disk whose diameter joins e_N(±θ/2).
    pub fn disk(&self) -> (f64, f64) {
        let a = PI * self.theta / self.n as f64;
        (a.cos(), a.sin())
    }

    /// All N points on the unit circle.
    pub fn points(&self) -> Vec<C64> {
        self.angles().into_iter().map(|a| C64::from_polar(1.0, a)).collect()
    }

    /// ε₀: chord distance from e_N(θ/2) to the nearest other root.
    pub fn eps0(&self) -> f64 {
        let top = e_n(self.theta / 2.0, self.n);
        let pts = self.points();
        pts.iter()
            .map(|&w| (w - top).norm())
            .filter(|&d| d > 0.0)
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairSample {
    pub theta: f64,
    pub n: usize,
    pub background: Vec<f64>,
    pub z_prime: C64,
    pub delta: C64,
    pub delta_star: f64,
    pub a0: C64,
    pub a1: C64,
}

/// f′/f at z = 1 − δ/N expressed through the offsets d_k = 1 − w_k.
struct LogDeriv {
    d: Vec<C64>,
    n: f64,
}

impl LogDeriv {
    fn new(p: &PairConfig) -> Self {
        LogDeriv { d: p.angles().into_iter().map(one_minus_unit).collect(), n: p.n as f64 }
    }

    /// (g, dg/dδ) with g = Σ 1/(z − w_k).
    fn eval(&self, delta: C64) -> (C64, C64) {
        let shift = delta / self.n;
        let mut g = C64::new(0.0, 0.0);
        let mut g2 = C64::new(0.0, 0.0);
        for &dk in &self.d {
            let inv = (dk - shift).inv();
            g += inv;
            g2 += inv * inv;
        }
        (g, g2 / self.n)
    }
}

/// Newton on f′/f in δ = N(1 − z) starting at the chord midpoint.
fn newton_in_disk(p: &PairConfig) -> Option<C64> {
    let nf = p.n as f64;
    let h = 0.5 * PI * p.theta / nf;
    let d0 = 2.0 * nf * h.sin() * h.sin();
    let rad = nf * (2.0 * h).sin();
    let inside = |d: C64| (d - d0).norm() < rad * (1.0 - 1e-12);
    let ld = LogDeriv::new(p);
    let mut delta = C64::new(d0, 0.0);
    let mut last = f64::INFINITY;
    for _ in 0..200 {
        let (g, dg) = ld.eval(delta);
        if dg == C64::new(0.0, 0.0) {
            return None;
        }
        let mut step = g / dg;
        let mut next = delta - step;
        let mut halvings = 0;
        while !inside(next) {
            halvings += 1;
            if halvings > 60 {
                return None;
            }
            step *= 0.5;
            next = delta - step;
        }
        delta = next;
        let s = step.norm();
        if s <= 1e-15 * delta.norm() || (s <= 1e-13 * delta.norm() && s >= last) {
            return Some(delta);
        }
        last = s;
    }
    if last <= 1e-11 * delta.norm() {
        Some(delta)
    } else {
        None
    }
}

/// Fallback: the root of Λ′ inside the disk from the full root set.
fn root_from_full_set(p: &PairConfig) -> Result<C64> {
    let c = poly::from_roots(&p.points());
    let set = deriv_roots_from_poly(&c, p.n, RootSolver::Companion)?;
    let (cx, r) = p.disk();
    set.roots
        .iter()
        .copied()
        .filter(|z| (z - cx).norm() < r)
        .min_by(|a, b| (a - cx).norm().partial_cmp(&(b - cx).norm()).unwrap())
        .ok_or(Error::UniquenessViolation { count: 0, n: p.n, theta: p.theta, background: p.background.clone() })
}

/// Locate δ for the pair without certifying uniqueness.
pub fn locate_delta(p: &PairConfig) -> Result<C64> {
    if p.theta == 0.0 {
        return Ok(C64::new(0.0, 0.0));
    }
    if let Some(d) = newton_in_disk(p) {
        return Ok(d);
    }
    log::debug!("Newton failed for theta={}, falling back to full root set", p.theta);
    let z = root_from_full_set(p)?;
    Ok((C64::new(1.0, 0.0) - z) * p.n as f64)
}

fn make_sample(p: &PairConfig, delta: C64) -> Result<PairSample> {
    let nf = p.n as f64;
    let a = expansions::compute_aj(&p.background, p.n, 1)?;
    Ok(PairSample {
        theta: p.theta,
        n: p.n,
        background: p.background.clone(),
        z_prime: C64::new(1.0, 0.0) - delta / nf,
        delta,
        delta_star: delta_star_of(delta, p.n),
        a0: a[0],
        a1: a[1],
    })
}

/// The unique zero of f′ in the open disk with diameter e_N(−θ/2), e_N(θ/2),
/// certified by an argument-principle count.
pub fn root_in_disk(theta: f64, background: Vec<f64>, n: usize) -> Result<PairSample> {
    let p = PairConfig::new(theta, background, n)?;
    if theta == 0.0 {
        return make_sample(&p, C64::new(0.0, 0.0));
    }
    let delta = locate_delta(&p)?;
    let count = count_roots_in_contour(&p, None)?;
    if count != 1 {
        return Err(Error::UniquenessViolation { count, n, theta, background: p.background });
    }
    make_sample(&p, delta)
}

/// Uncertified variant used in fits and bulk sweeps.
pub fn pair_sample(p: &PairConfig) -> Result<PairSample> {
    let delta = locate_delta(p)?;
    make_sample(p, delta)
}

/// Winding of f′/f along the twice-bitten disk boundary; `eps` defaults to ε₀/N.
pub fn count_roots_in_contour(p: &PairConfig, eps: Option<f64>) -> Result<i64> {
    if p.theta == 0.0 {
        return Err(Error::InvalidArgument("theta = 0 has no disk".into()));
    }
    let (c, r) = p.disk();
    // ε₀/N, kept clear of the disk centre for N ≤ 3
    let eps = eps.unwrap_or_else(|| (p.eps0() / p.n as f64).min(0.5 * r));
    let pieces = contour::twice_bitten(c, r, eps)?;
    let pts = p.points();
    for &w in &pts {
        let top = C64::new(c, r);
        let bottom = C64::new(c, -r);
        if (w - top).norm() > 1e-15 && (w - bottom).norm() > 1e-15 && (w - top).norm() < eps {
            return Err(Error::InvalidArgument("a background root lies within a bite".into()));
        }
    }
    contour::winding(|z| Ok(log_derivative(&pts, z)), &pieces, Tracking::default())
}

/// Σ 1/(z − w_k)
pub fn log_derivative(points: &[C64], z: C64) -> C64 {
    points.iter().map(|&w| (z - w).inv()).sum()
}

/// Number of zeros of Λ′ inside an arbitrary contour (winding of Λ′/Λ plus
/// the zeros of Λ enclosed).
pub fn count_deriv_roots(points: &[C64], pieces: &[Piece], inside: impl Fn(C64) -> bool) -> Result<i64> {
    let w = contour::winding(|z| Ok(log_derivative(points, z)), pieces, Tracking::default())?;
    let enclosed = points.iter().filter(|&&p| inside(p)).count() as i64;
    Ok(w + enclosed)
}

pub fn count_deriv_roots_in_circle(c: &EigenphaseConfig, center: C64, radius: f64) -> Result<i64> {
    let pts = c.unit_points();
    count_deriv_roots(&pts, &contour::circle(center, radius), |z| (z - center).norm() < radius)
}

/// N(1 − |1 − δ/N|), evaluated without cancellation.
pub fn delta_star_of(delta: C64, n: usize) -> f64 {
    let nf = n as f64;
    let w = C64::new(1.0, 0.0) - delta / nf;
    (2.0 * delta.re - delta.norm_sqr() / nf) / (1.0 + w.norm())
}

/// max over |ζ| = 1 of Re 1/(z − ζ).
pub fn max_re_reciprocal_bound(z: C64) -> Result<f64> {
    let r2 = z.norm_sqr();
    if r2 >= 1.0 {
        return Err(Error::Domain(format!("|z| = {} ≥ 1", r2.sqrt())));
    }
    Ok((1.0 - z.re) / (1.0 - r2))
}

/// h(θ₀; φ, ψ) = s_N(θ₀) sin φ Re 1/(z(φ) − e_N(ψ)) with the boundary point
/// z(φ) = c_N(θ₀) + i e^{iφ} s_N(θ₀) of the disk with diameter e_N(±θ₀).
pub fn eta_quantity(theta0: f64, phi: f64, psi: f64, n: usize) -> f64 {
    let a = TAU * theta0 / n as f64;
    let z = C64::new(a.cos(), 0.0) + C64::i() * C64::from_polar(a.sin(), phi);
    a.sin() * phi.sin() * (z - e_n(psi, n)).inv().re
}

pub fn eta_bound(theta0: f64, n: usize) -> f64 {
    let nf = n as f64;
    PI * theta0 / nf + 2.0 * PI * PI * (7.0 + 4.0 * 3f64.sqrt()) * theta0 * theta0 / (nf * nf)
}
