//! Zeros of ζ′ to the right of the critical line by argument-principle box
//! counts, and zeros of ζ on the line by sign changes of Hardy's Z.

use crate::contour::{phase_change, Piece, Tracking};
use crate::stats::{build_histogram, EmpiricalDistribution};
use crate::zeta::{hardy_z, theta, zeta_jet, Jet};
use crate::{Error, Result, C64};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

pub const SIGMA_LEFT: f64 = 0.5 + 1e-6;
pub const SIGMA_RIGHT: f64 = 3.0;
const EVAL_TOL: f64 = 1e-11;
const RESIDUAL_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZetaPrimeZero {
    pub beta: f64,
    pub gamma: f64,
    /// (β − 1/2)·log(γ/2π)
    pub normalized_x: f64,
    pub residual: f64,
}

impl ZetaPrimeZero {
    fn new(s: C64, residual: f64) -> Self {
        ZetaPrimeZero { beta: s.re, gamma: s.im, normalized_x: (s.re - 0.5) * (s.im / TAU).ln(), residual }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxRecord {
    pub t_lo: f64,
    pub t_hi: f64,
    pub count: i64,
    pub found: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub t_lo: f64,
    pub t_hi: f64,
    pub zeros: Vec<ZetaPrimeZero>,
    pub boxes: Vec<BoxRecord>,
    /// Zeros of ζ′ counted in 0.05 ≤ σ < 1/2 (Speiser strip); nonzero means
    /// a violation.
    pub left_strip_count: Option<i64>,
    pub failures: Vec<String>,
}

#[derive(Clone, Copy, Debug)]
pub struct ScanOptions {
    pub sigma_right: f64,
    pub check_left_strip: bool,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { sigma_right: SIGMA_RIGHT, check_left_strip: false }
    }
}

fn dzeta(s: C64) -> Result<C64> {
    Ok(zeta_jet(s, EVAL_TOL)?.1)
}

fn tracking() -> Tracking {
    Tracking { initial: 4, max_depth: 30, max_step: std::f64::consts::FRAC_PI_4 }
}

fn seg_phase(a: C64, b: C64) -> Result<f64> {
    phase_change(&mut dzeta, Piece::Segment { from: a, to: b }, tracking())
}

/// Number of zeros of ζ′ in the open rectangle.
pub fn count_in_rect(s0: f64, s1: f64, t0: f64, t1: f64) -> Result<i64> {
    let a = C64::new(s0, t0);
    let b = C64::new(s1, t0);
    let c = C64::new(s1, t1);
    let d = C64::new(s0, t1);
    let total = seg_phase(a, b)? + seg_phase(b, c)? + seg_phase(c, d)? + seg_phase(d, a)?;
    winding_of(total)
}

fn winding_of(total: f64) -> Result<i64> {
    let w = total / TAU;
    if (w - w.round()).abs() > 0.05 {
        return Err(Error::Domain(format!("non-integral winding {w}")));
    }
    Ok(w.round() as i64)
}

fn newton(mut s: C64, rect: (f64, f64, f64, f64)) -> Option<(C64, f64)> {
    let (s0, s1, t0, t1) = rect;
    let w = (s1 - s0).max(t1 - t0);
    for _ in 0..60 {
        let j: Jet = zeta_jet(s, EVAL_TOL).ok()?;
        if j.2.norm() == 0.0 {
            return None;
        }
        let step = j.1 / j.2;
        s -= step;
        if !(s.re.is_finite() && s.im.is_finite()) || (s - C64::new(0.5 * (s0 + s1), 0.5 * (t0 + t1))).norm() > 3.0 * w {
            return None;
        }
        if step.norm() < 1e-13 * s.norm() {
            let r = zeta_jet(s, EVAL_TOL).ok()?.1.norm();
            let inside = s.re >= s0 && s.re <= s1 && s.im >= t0 && s.im <= t1;
            return (inside && r < RESIDUAL_TOL).then_some((s, r));
        }
    }
    None
}

fn isolate(rect: (f64, f64, f64, f64), count: i64, depth: u32, out: &mut Vec<ZetaPrimeZero>) -> Result<()> {
    if count == 0 {
        return Ok(());
    }
    let (s0, s1, t0, t1) = rect;
    if count == 1 {
        for (fx, fy) in [(0.5, 0.5), (0.25, 0.5), (0.75, 0.5), (0.5, 0.25), (0.5, 0.75)] {
            let start = C64::new(s0 + fx * (s1 - s0), t0 + fy * (t1 - t0));
            if let Some((z, r)) = newton(start, rect) {
                out.push(ZetaPrimeZero::new(z, r));
                return Ok(());
            }
        }
    }
    if depth >= 14 {
        return Err(Error::IncompleteScan { t_lo: t0, t_hi: t1, expected: count, found: 0 });
    }
    let split_sigma = (s1 - s0) > (t1 - t0);
    for attempt in 0..6 {
        let f = 0.5 + 0.037 * attempt as f64;
        let (ra, rb) = if split_sigma {
            let m = s0 + f * (s1 - s0);
            ((s0, m, t0, t1), (m, s1, t0, t1))
        } else {
            let m = t0 + f * (t1 - t0);
            ((s0, s1, t0, m), (s0, s1, m, t1))
        };
        let (ca, cb) = match (count_in_rect(ra.0, ra.1, ra.2, ra.3), count_in_rect(rb.0, rb.1, rb.2, rb.3)) {
            (Ok(a), Ok(b)) => (a, b),
            _ => continue,
        };
        if ca + cb != count || ca < 0 || cb < 0 {
            continue;
        }
        isolate(ra, ca, depth + 1, out)?;
        isolate(rb, cb, depth + 1, out)?;
        return Ok(());
    }
    Err(Error::IncompleteScan { t_lo: t0, t_hi: t1, expected: count, found: 0 })
}

/// Horizontal line heights: unit spacing, nudged off any line where the
/// phase tracking fails.
fn edge_phases(sl: f64, sr: f64, t: f64) -> Result<(f64, f64)> {
    for k in 0..8 {
        let tt = t + 0.0137 * k as f64;
        if let Ok(p) = seg_phase(C64::new(sl, tt), C64::new(sr, tt)) {
            return Ok((tt, p));
        }
    }
    Err(Error::Domain(format!("cannot track phase on horizontal line t = {t}")))
}

/// All zeros of ζ′ with 1/2 < σ ≤ σ_R and t_lo ≤ t < t_hi.
pub fn find_zeta_prime_zeros(t_lo: f64, t_hi: f64, opts: ScanOptions) -> Result<ScanResult> {
    if !(100.0..=1e4).contains(&t_lo) || !(t_hi > t_lo && t_hi <= 1e4) {
        return Err(Error::OutOfRange(format!("scan range [{t_lo}, {t_hi}] (need 100 ≤ t_lo < t_hi ≤ 1e4)")));
    }
    let (sl, sr) = (SIGMA_LEFT, opts.sigma_right);
    let m = (t_hi - t_lo).ceil() as usize;
    let mut lines = Vec::with_capacity(m + 1);
    for k in 0..=m {
        let t = (t_lo + k as f64).min(t_hi);
        lines.push(if k == 0 || k == m { (t, seg_phase(C64::new(sl, t), C64::new(sr, t))?) } else { edge_phases(sl, sr, t)? });
    }
    let mut zeros = Vec::new();
    let mut boxes = Vec::new();
    let mut failures = Vec::new();
    for k in 0..m {
        let (ta, ha) = lines[k];
        let (tb, hb) = lines[k + 1];
        let right = seg_phase(C64::new(sr, ta), C64::new(sr, tb))?;
        let left = seg_phase(C64::new(sl, tb), C64::new(sl, ta))?;
        let count = winding_of(ha + right - hb + left)?;
        let mut found = Vec::new();
        match isolate((sl, sr, ta, tb), count, 0, &mut found) {
            Ok(()) if found.len() as i64 == count => {}
            Ok(()) => failures.push(format!("box [{ta}, {tb}]: count {count}, isolated {}", found.len())),
            Err(e) => failures.push(format!("box [{ta}, {tb}]: {e}")),
        }
        found.sort_by(|a, b| a.gamma.partial_cmp(&b.gamma).unwrap());
        boxes.push(BoxRecord { t_lo: ta, t_hi: tb, count, found: found.len() });
        zeros.extend(found);
    }
    let left_strip_count = if opts.check_left_strip { Some(left_strip(t_lo, t_hi)?) } else { None };
    Ok(ScanResult { t_lo, t_hi, zeros, boxes, left_strip_count, failures })
}

/// Zeros of ζ′ in 0.05 ≤ σ ≤ 1/2 − 1e−6 over [t_lo, t_hi].
pub fn left_strip(t_lo: f64, t_hi: f64) -> Result<i64> {
    let (a, b) = (0.05, 0.5 - 1e-6);
    let m = (t_hi - t_lo).ceil() as usize;
    let mut total = seg_phase(C64::new(a, t_lo), C64::new(b, t_lo))? - seg_phase(C64::new(a, t_hi), C64::new(b, t_hi))?;
    for k in 0..m {
        let ta = t_lo + k as f64;
        let tb = (ta + 1.0).min(t_hi);
        total += seg_phase(C64::new(b, ta), C64::new(b, tb))?;
        total += seg_phase(C64::new(a, tb), C64::new(a, ta))?;
    }
    winding_of(total)
}

/// Histogram of normalized_x.
pub fn normalized_distribution(zeros: &[ZetaPrimeZero], edges: &[f64]) -> Result<EmpiricalDistribution> {
    if zeros.len() < 500 {
        return Err(Error::TooFewSamples { need: 500, got: zeros.len() });
    }
    let v: Vec<f64> = zeros.iter().map(|z| z.normalized_x).collect();
    let mut d = build_histogram(&v, edges)?;
    d.metadata.ensemble = "zeta-prime".into();
    Ok(d)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZetaZeros {
    pub t_lo: f64,
    pub t_hi: f64,
    /// Ordinates of zeros found by sign changes of Z(t).
    pub zeros: Vec<f64>,
    /// N(t_hi) − N(t_lo) from ϑ and the continuous argument of ζ.
    pub exact_count: i64,
}

/// N(T) = ϑ(T)/π + 1 + S(T), S(T) = arg ζ(1/2+iT)/π with the argument
/// continued from σ = 3.
pub fn riemann_von_mangoldt(t: f64) -> Result<f64> {
    let f = |s: C64| -> Result<C64> { Ok(zeta_jet(s, EVAL_TOL)?.0) };
    let mut g = f;
    let start = g(C64::new(3.0, t))?.arg();
    let d = phase_change(&mut g, Piece::Segment { from: C64::new(3.0, t), to: C64::new(0.5, t) }, tracking())?;
    Ok(theta(t) / PI + 1.0 + (start + d) / PI)
}

/// Zeros of ζ on the critical line in [t_lo, t_hi] by sign changes of Z,
/// refined by bisection; the grid is refined until the count matches N(T).
pub fn zeta_zeros_on_line(t_lo: f64, t_hi: f64) -> Result<ZetaZeros> {
    let exact = (riemann_von_mangoldt(t_hi)? - riemann_von_mangoldt(t_lo)?).round() as i64;
    let mut step = 0.05;
    let mut zeros = Vec::new();
    for _ in 0..4 {
        zeros.clear();
        let m = ((t_hi - t_lo) / step).ceil() as usize;
        let h = (t_hi - t_lo) / m as f64;
        let mut prev = hardy_z(t_lo, 1e-10)?;
        for i in 1..=m {
            let t = t_lo + i as f64 * h;
            let cur = hardy_z(t, 1e-10)?;
            if prev * cur < 0.0 {
                let (mut a, mut b, mut fa) = (t - h, t, prev);
                for _ in 0..45 {
                    let c = 0.5 * (a + b);
                    let fc = hardy_z(c, 1e-10)?;
                    if fa * fc <= 0.0 {
                        b = c;
                    } else {
                        a = c;
                        fa = fc;
                    }
                }
                zeros.push(0.5 * (a + b));
            }
            prev = cur;
        }
        if zeros.len() as i64 == exact {
            break;
        }
        step /= 4.0;
    }
    Ok(ZetaZeros { t_lo, t_hi, zeros, exact_count: exact })
}

/// ∫_a^b (1/2π) log(t/4π) dt
pub fn integrated_density(a: f64, b: f64) -> f64 {
    let f = |t: f64| t * (t / (4.0 * PI)).ln() - t;
    (f(b) - f(a)) / TAU
}
