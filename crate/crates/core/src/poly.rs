//! Dense complex polynomials in ascending coefficient order and two root
//! solvers: companion-matrix eigenvalues (reference) and Aberth–Ehrlich
//! (bulk runs).

use crate::{Error, Result, C64};
use nalgebra::{DMatrix, Schur};

pub const MAX_DEGREE: usize = 512;

pub fn horner(c: &[C64], z: C64) -> C64 {
    c.iter().rev().fold(C64::new(0.0, 0.0), |acc, &a| acc * z + a)
}

/// p(z) and p'(z) in one pass.
pub fn horner_d(c: &[C64], z: C64) -> (C64, C64) {
    let zero = C64::new(0.0, 0.0);
    let mut p = zero;
    let mut dp = zero;
    for &a in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

/// Σ|c_k||z|^k, the scale against which a residual is judged.
pub fn abs_scale(c: &[C64], z: C64) -> f64 {
    let r = z.norm();
    c.iter().rev().fold(0.0, |acc, a| acc * r + a.norm())
}

pub fn derivative(c: &[C64]) -> Vec<C64> {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(k, &a)| a * k as f64)
        .collect()
}

/// Leja order: each root maximizes the product of distances to those
/// already taken. Multiplying in this order keeps partial products small.
pub fn leja_order(roots: &[C64]) -> Vec<C64> {
    let n = roots.len();
    if n == 0 {
        return Vec::new();
    }
    let first = (0..n).max_by(|&a, &b| roots[a].norm().partial_cmp(&roots[b].norm()).unwrap()).unwrap();
    let mut out = vec![roots[first]];
    let mut used = vec![false; n];
    used[first] = true;
    let mut score = vec![0.0f64; n];
    for _ in 1..n {
        let last = *out.last().unwrap();
        let mut best = None;
        for k in 0..n {
            if used[k] {
                continue;
            }
            score[k] += (roots[k] - last).norm().ln();
            if best.is_none_or(|b: usize| score[k] > score[b]) {
                best = Some(k);
            }
        }
        let b = best.unwrap();
        used[b] = true;
        out.push(roots[b]);
    }
    out
}

/// Monic ∏(z − r_k) by incremental convolution in Leja order.
pub fn from_roots(roots: &[C64]) -> Vec<C64> {
    let mut c = Vec::with_capacity(roots.len() + 1);
    c.push(C64::new(1.0, 0.0));
    for r in leja_order(roots) {
        c.push(C64::new(0.0, 0.0));
        for k in (1..c.len()).rev() {
            c[k] = c[k - 1] - r * c[k];
        }
        c[0] = -r * c[0];
    }
    c
}

/// Strip exact zero coefficients: trailing ones lower the degree, leading
/// ones are exact roots at the origin. Returns (reduced, zero_roots).
fn deflate(c: &[C64]) -> (Vec<C64>, usize) {
    let mut hi = c.len();
    while hi > 0 && c[hi - 1] == C64::new(0.0, 0.0) {
        hi -= 1;
    }
    let mut lo = 0;
    while lo < hi && c[lo] == C64::new(0.0, 0.0) {
        lo += 1;
    }
    (c[lo..hi].to_vec(), lo)
}

/// Roots from the eigenvalues of the companion matrix.
pub fn companion_roots(c: &[C64]) -> Result<Vec<C64>> {
    let (p, zeros) = deflate(c);
    if p.is_empty() {
        return Err(Error::InvalidArgument("zero polynomial".into()));
    }
    let d = p.len() - 1;
    if d > MAX_DEGREE {
        return Err(Error::DegreeTooLarge(d));
    }
    let mut roots = vec![C64::new(0.0, 0.0); zeros];
    if d == 0 {
        return Ok(roots);
    }
    let lead = p[d];
    let mut m = DMatrix::<C64>::zeros(d, d);
    for i in 1..d {
        m[(i, i - 1)] = C64::new(1.0, 0.0);
    }
    for i in 0..d {
        m[(i, d - 1)] = -p[i] / lead;
    }
    let schur = Schur::try_new(m, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Domain("companion Schur iteration did not converge".into()))?;
    let ev = schur
        .eigenvalues()
        .ok_or_else(|| Error::Domain("companion eigenvalues unavailable".into()))?;
    roots.extend(ev.iter().copied());
    Ok(roots)
}

#[derive(Clone, Debug)]
pub struct AberthOutcome {
    pub roots: Vec<C64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Aberth–Ehrlich iteration with Gauss–Seidel updates. `init` must hold
/// `degree` distinct starting points.
pub fn aberth(c: &[C64], init: Vec<C64>, max_iter: usize) -> AberthOutcome {
    let d = c.len() - 1;
    let mut z = init;
    debug_assert_eq!(z.len(), d);
    let mut done = vec![false; d];
    let mut remaining = d;
    let mut it = 0;
    while remaining > 0 && it < max_iter {
        it += 1;
        for i in 0..d {
            if done[i] {
                continue;
            }
            let zi = z[i];
            let (p, dp) = horner_d(c, zi);
            // stop once the residual is at rounding level
            if p.norm() <= 4.0 * d as f64 * f64::EPSILON * abs_scale(c, zi) {
                done[i] = true;
                remaining -= 1;
                continue;
            }
            let ratio = p / dp;
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
    AberthOutcome {
        roots: z,
        iterations: it,
        converged: remaining == 0,
    }
}

/// Evenly spread starting points on a circle, rotated off the real axis.
pub fn circle_start(d: usize, radius: f64) -> Vec<C64> {
    (0..d)
        .map(|k| C64::from_polar(radius, std::f64::consts::TAU * (k as f64 + 0.3) / d as f64 + 0.4))
        .collect()
}

pub fn newton_step(c: &[C64], z: C64) -> C64 {
    let (p, dp) = horner_d(c, z);
    if dp == C64::new(0.0, 0.0) {
        z
    } else {
        z - p / dp
    }
}

/// One Newton step, kept only if it does not increase the residual.
pub fn polish(c: &[C64], z: C64) -> C64 {
    let z1 = newton_step(c, z);
    if !z1.re.is_finite() || !z1.im.is_finite() {
        return z;
    }
    if horner(c, z1).norm() <= horner(c, z).norm() {
        z1
    } else {
        z
    }
}

pub fn max_coeff(c: &[C64]) -> f64 {
    c.iter().fold(0.0, |m, a| m.max(a.norm()))
}

/// Roots by Aberth, falling back to the companion matrix when Aberth fails.
pub fn aberth_roots(c: &[C64], init: Option<Vec<C64>>) -> Result<Vec<C64>> {
    let (p, zeros) = deflate(c);
    if p.is_empty() {
        return Err(Error::InvalidArgument("zero polynomial".into()));
    }
    let d = p.len() - 1;
    if d > MAX_DEGREE {
        return Err(Error::DegreeTooLarge(d));
    }
    let mut roots = vec![C64::new(0.0, 0.0); zeros];
    if d == 0 {
        return Ok(roots);
    }
    let start = match init {
        Some(v) if v.len() == d => v,
        _ => circle_start(d, 1.0 - 0.5 / d as f64),
    };
    let out = aberth(&p, start, 200);
    if out.converged && out.roots.iter().all(|r| r.re.is_finite() && r.im.is_finite()) {
        roots.extend(out.roots);
        Ok(roots)
    } else {
        log::debug!("aberth did not converge after {} sweeps; using companion", out.iterations);
        let mut r = companion_roots(&p)?;
        roots.append(&mut r);
        Ok(roots)
    }
}
