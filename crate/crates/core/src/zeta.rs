//! ζ(s), ζ′(s), ζ″(s) by Euler–Maclaurin summation.
//!
//! ζ(s) = Σ_{n<N} n^{−s} + N^{1−s}/(s−1) + N^{−s}/2 + Σ_{k=1}^{K} T_k + R_K,
//! T_k = B_{2k}/(2k)! · s(s+1)…(s+2k−2) · N^{−s−2k+1}.
//! All three derivatives are carried together as jets.

use crate::{Error, Result, C64};
use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul, Sub};
use std::sync::OnceLock;

pub const MAX_BERNOULLI: usize = 40;

/// (f, f′, f″) at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet(pub C64, pub C64, pub C64);

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet(self.0 + o.0, self.1 + o.1, self.2 + o.2)
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet(self.0 - o.0, self.1 - o.1, self.2 - o.2)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet(self.0 * o.0, self.0 * o.1 + self.1 * o.0, self.0 * o.2 + self.1 * o.1 * 2.0 + self.2 * o.0)
    }
}

impl Jet {
    fn scale(self, c: f64) -> Jet {
        Jet(self.0 * c, self.1 * c, self.2 * c)
    }

    fn inv(self) -> Jet {
        let v = self.0.inv();
        Jet(v, -self.1 * v * v, (self.1 * self.1 * 2.0 * v - self.2) * v * v)
    }
}

/// ζ(2k) for k = 1..=MAX_BERNOULLI+1.
fn zeta_even() -> &'static [f64] {
    static T: OnceLock<Vec<f64>> = OnceLock::new();
    T.get_or_init(|| {
        let mut v = vec![0.0];
        for k in 1..=MAX_BERNOULLI + 1 {
            let p = 2 * k as i32;
            let z = match k {
                1 => PI * PI / 6.0,
                2 => PI.powi(4) / 90.0,
                _ => {
                    let mut s = 0.0;
                    for n in (1..=200).rev() {
                        s += (n as f64).powi(-p);
                    }
                    s
                }
            };
            v.push(z);
        }
        v
    })
}

/// B_{2k}/(2k)! = (−1)^{k+1} 2ζ(2k)/(2π)^{2k}
pub fn bernoulli_over_factorial(k: usize) -> f64 {
    let z = zeta_even()[k];
    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
    sign * 2.0 * z / TAU.powi(2 * k as i32)
}

fn ln_table(n: usize) -> &'static [f64] {
    static T: OnceLock<Vec<f64>> = OnceLock::new();
    let t = T.get_or_init(|| (0..=40_000usize).map(|k| if k == 0 { 0.0 } else { (k as f64).ln() }).collect());
    assert!(n < t.len(), "Euler–Maclaurin cutoff beyond table");
    t
}

/// Remainder bound for cutoff `n` and `k` Bernoulli terms (magnitude of
/// the first omitted term times |s+2k+1|/(σ+2k+1)), in units of N^{−σ}.
fn bound_after(s: C64, n: f64, k_max: usize) -> (usize, f64) {
    let sigma = s.re;
    // |T_1| N^σ, floored so the derivative's remainder is covered near s = 0
    let mut m = s.norm().max(1.0) / (12.0 * n);
    let mut best = (0usize, f64::INFINITY);
    for k in 1..=k_max {
        // m is |T_k| N^σ; bound with K = k−1 terms uses T_k
        let kk = k - 1;
        if sigma + 2.0 * kk as f64 + 1.0 > 0.0 {
            let b = m * (s + 2.0 * kk as f64 + 1.0).norm() / (sigma + 2.0 * kk as f64 + 1.0);
            if b < best.1 {
                best = (kk, b);
            }
        }
        let r = (bernoulli_over_factorial(k + 1) / bernoulli_over_factorial(k)).abs();
        m *= r * (s + (2 * k - 1) as f64).norm() * (s + (2 * k) as f64).norm() / (n * n);
    }
    best
}

/// Smallest cutoff N (and Bernoulli count K) meeting the target.
pub fn choose_parameters(s: C64, target: f64) -> (usize, usize) {
    let ok = |n: usize| -> Option<usize> {
        let nf = n as f64;
        let (k, b) = bound_after(s, nf, MAX_BERNOULLI);
        let ln = nf.ln();
        let err = b * nf.powf(-s.re) * (1.0 + ln) * (1.0 + ln);
        (err <= target).then_some(k)
    };
    let mut hi = 16usize;
    while ok(hi).is_none() {
        hi *= 2;
        if hi > 40_000 {
            return (40_000, MAX_BERNOULLI);
        }
    }
    let mut lo = 1usize;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if ok(mid).is_some() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (hi, ok(hi).unwrap())
}

/// Euler–Maclaurin jet with explicit cutoff and Bernoulli count.
pub fn zeta_jet_with(s: C64, n: usize, k: usize) -> Jet {
    let ln = ln_table(n);
    let one = C64::new(1.0, 0.0);
    let mut acc = [C64::new(0.0, 0.0); 3];
    for (m, &l) in ln.iter().enumerate().take(n).skip(1) {
        let _ = m;
        let p = (-s * l).exp();
        let pl = p * l;
        acc[0] += p;
        acc[1] -= pl;
        acc[2] += pl * l;
    }
    let lnn = ln[n];
    let q = (-s * lnn).exp();
    let pw = Jet(q, -q * lnn, q * lnn * lnn); // N^{−s}
    let head = Jet(acc[0], acc[1], acc[2]);
    let sm1 = Jet(s - one, one, C64::new(0.0, 0.0));
    let nf = n as f64;
    let tail = pw.scale(nf) * sm1.inv() + pw.scale(0.5);
    let sj = Jet(s, one, C64::new(0.0, 0.0));
    // Q_k = T_k / N^{−s}
    let mut qk = sj.scale(bernoulli_over_factorial(1) / nf);
    let mut corr = Jet(C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0));
    for j in 1..=k {
        corr = corr + qk;
        let a = (2 * j - 1) as f64;
        let b = (2 * j) as f64;
        let quad = Jet(s * s + s * (a + b) + a * b, s * 2.0 + (a + b), C64::new(2.0, 0.0));
        let r = bernoulli_over_factorial(j + 1) / bernoulli_over_factorial(j);
        qk = (qk * quad).scale(r / (nf * nf));
    }
    head + tail + pw * corr
}

/// ζ jet with adaptive parameters, no range guard.
pub fn zeta_jet(s: C64, target: f64) -> Result<Jet> {
    if (s - 1.0).norm() < 1e-12 {
        return Err(Error::Domain("pole at s = 1".into()));
    }
    if s.im.abs() > 2e4 {
        return Err(Error::OutOfRange(format!("height {}", s.im)));
    }
    let (n, k) = choose_parameters(s, target);
    Ok(zeta_jet_with(s, n, k))
}

/// ζ(s) and ζ′(s) for 0 < σ < 2, 10 ≤ |t| ≤ 10⁴.
pub fn zeta_and_derivative(s: C64, target_abs_err: f64) -> Result<(C64, C64)> {
    if !(s.re > 0.0 && s.re < 2.0) || !(10.0..=1e4).contains(&s.im.abs()) {
        return Err(Error::OutOfRange(format!("s = {s} (need 0 < σ < 2, 10 ≤ |t| ≤ 1e4)")));
    }
    let j = zeta_jet(s, target_abs_err)?;
    Ok((j.0, j.1))
}

/// Riemann–Siegel theta function ϑ(t) (asymptotic series, t ≥ 10).
pub fn theta(t: f64) -> f64 {
    let t2 = t * t;
    0.5 * t * (t / TAU).ln() - 0.5 * t - PI / 8.0 + 1.0 / (48.0 * t) + 7.0 / (5760.0 * t * t2)
        + 31.0 / (80640.0 * t2 * t2 * t)
}

/// Hardy's Z(t) = e^{iϑ(t)} ζ(1/2 + it), real for real t.
pub fn hardy_z(t: f64, target: f64) -> Result<f64> {
    let j = zeta_jet(C64::new(0.5, t), target)?;
    Ok((C64::from_polar(1.0, theta(t)) * j.0).re)
}
