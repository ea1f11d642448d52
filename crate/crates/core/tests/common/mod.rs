#![allow(dead_code)]
//! Test-only helpers: double-double arithmetic for extended-precision
//! oracles.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DD {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DD {
    pub const ZERO: DD = DD { hi: 0.0, lo: 0.0 };
    pub const ONE: DD = DD { hi: 1.0, lo: 0.0 };

    pub fn from(x: f64) -> DD {
        DD { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    fn norm(hi: f64, lo: f64) -> DD {
        let (s, e) = two_sum(hi, lo);
        DD { hi: s, lo: e }
    }

    pub fn abs(self) -> DD {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn sqrt(self) -> DD {
        if self.hi <= 0.0 {
            return DD::ZERO;
        }
        let x = self.hi.sqrt();
        let (p, e) = two_prod(x, x);
        let r = ((self.hi - p) - e + self.lo) / (2.0 * x);
        DD::norm(x, r)
    }

    /// cos and sin by Taylor series (|t| ≤ 4).
    pub fn cos_sin(t: f64) -> (DD, DD) {
        let x = DD::from(t);
        let x2 = x * x;
        let mut term = DD::ONE;
        let mut c = DD::ONE;
        let mut k = 0.0;
        for _ in 0..30 {
            k += 2.0;
            term = -(term * x2) / DD::from(k * (k - 1.0));
            c = c + term;
        }
        let mut term = x;
        let mut s = x;
        let mut k = 1.0;
        for _ in 0..30 {
            k += 2.0;
            term = -(term * x2) / DD::from(k * (k - 1.0));
            s = s + term;
        }
        (c, s)
    }
}

impl Add for DD {
    type Output = DD;
    fn add(self, o: DD) -> DD {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = two_sum(s, e + t);
        DD::norm(s, e + f)
    }
}

impl Neg for DD {
    type Output = DD;
    fn neg(self) -> DD {
        DD { hi: -self.hi, lo: -self.lo }
    }
}

impl Sub for DD {
    type Output = DD;
    fn sub(self, o: DD) -> DD {
        self + (-o)
    }
}

impl Mul for DD {
    type Output = DD;
    fn mul(self, o: DD) -> DD {
        let (p, e) = two_prod(self.hi, o.hi);
        DD::norm(p, e + (self.hi * o.lo + self.lo * o.hi))
    }
}

impl Div for DD {
    type Output = DD;
    fn div(self, o: DD) -> DD {
        let q1 = self.hi / o.hi;
        let r = self - o * DD::from(q1);
        let q2 = r.hi / o.hi;
        let r = r - o * DD::from(q2);
        let q3 = r.hi / o.hi;
        DD::norm(q1, q2) + DD::from(q3)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CDD {
    pub re: DD,
    pub im: DD,
}

impl CDD {
    pub const ZERO: CDD = CDD { re: DD::ZERO, im: DD::ZERO };
    pub const ONE: CDD = CDD { re: DD::ONE, im: DD::ZERO };

    pub fn new(re: f64, im: f64) -> CDD {
        CDD { re: DD::from(re), im: DD::from(im) }
    }

    pub fn unit(t: f64) -> CDD {
        let (c, s) = DD::cos_sin(t);
        CDD { re: c, im: s }
    }

    pub fn norm_sqr(self) -> DD {
        self.re * self.re + self.im * self.im
    }

    pub fn abs(self) -> DD {
        self.norm_sqr().sqrt()
    }

    pub fn conj(self) -> CDD {
        CDD { re: self.re, im: -self.im }
    }

    pub fn inv(self) -> CDD {
        let d = self.norm_sqr();
        CDD { re: self.re / d, im: -self.im / d }
    }

    pub fn to_c64(self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    pub fn scale(self, x: f64) -> CDD {
        CDD { re: self.re * DD::from(x), im: self.im * DD::from(x) }
    }
}

impl Add for CDD {
    type Output = CDD;
    fn add(self, o: CDD) -> CDD {
        CDD { re: self.re + o.re, im: self.im + o.im }
    }
}

impl Sub for CDD {
    type Output = CDD;
    fn sub(self, o: CDD) -> CDD {
        CDD { re: self.re - o.re, im: self.im - o.im }
    }
}

impl Mul for CDD {
    type Output = CDD;
    fn mul(self, o: CDD) -> CDD {
        CDD { re: self.re * o.re - self.im * o.im, im: self.re * o.im + self.im * o.re }
    }
}

impl Div for CDD {
    type Output = CDD;
    fn div(self, o: CDD) -> CDD {
        self * o.inv()
    }
}

/// Monic ∏(z − e^{it}) in double-double, ascending coefficients.
pub fn dd_char_poly(phases: &[f64]) -> Vec<CDD> {
    let mut c = vec![CDD::ONE];
    for &t in phases {
        let w = CDD::unit(t);
        c.push(CDD::ZERO);
        for k in (1..c.len()).rev() {
            c[k] = c[k - 1] - w * c[k];
        }
        c[0] = CDD::ZERO - w * c[0];
    }
    c
}

pub fn dd_horner(c: &[CDD], z: CDD) -> CDD {
    c.iter().rev().fold(CDD::ZERO, |acc, &a| acc * z + a)
}

/// Durand–Kerner in double-double.
pub fn dd_roots(c: &[CDD]) -> Vec<CDD> {
    let d = c.len() - 1;
    let lead = c[d];
    let monic: Vec<CDD> = c.iter().map(|&a| a / lead).collect();
    let seed = CDD::new(0.4, 0.9);
    let mut z: Vec<CDD> = Vec::with_capacity(d);
    let mut p = CDD::ONE;
    for _ in 0..d {
        z.push(p);
        p = p * seed;
    }
    for _ in 0..500 {
        for i in 0..d {
            let mut den = CDD::ONE;
            for j in 0..d {
                if i != j {
                    den = den * (z[i] - z[j]);
                }
            }
            z[i] = z[i] - dd_horner(&monic, z[i]) / den;
        }
    }
    z
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1e-300)
}
