//! Closed-form expansions: A_j sums, δ(θ) coefficients, the spacing density,
//! Q(s) asymptotics, the δ* density, conditioned moments, β coefficients and
//! the Bessel 1-level density and kernel.

use crate::bessel::riccati_k;
use crate::polyderiv::one_minus_unit;
use crate::{Error, Result, C64};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// A_j = N^{−j−1} Σ_k (1 − e_N(x_k))^{−(j+1)}, j = 0..=j_max.
pub fn compute_aj(background: &[f64], n: usize, j_max: usize) -> Result<Vec<C64>> {
    if j_max > 4 {
        return Err(Error::InvalidArgument("j_max is limited to 4".into()));
    }
    let nf = n as f64;
    let mut a = vec![C64::new(0.0, 0.0); j_max + 1];
    for &x in background {
        let y = (x + nf / 2.0).rem_euclid(nf) - nf / 2.0;
        if y.abs() < 1e-12 {
            return Err(Error::Singular { phase: x });
        }
        let inv = one_minus_unit(TAU * y / nf).inv();
        let mut p = inv;
        for aj in a.iter_mut() {
            *aj += p;
            p *= inv;
        }
    }
    let mut scale = 1.0 / nf;
    for aj in a.iter_mut() {
        *aj *= scale;
        scale /= nf;
    }
    Ok(a)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientsAB {
    pub n: usize,
    pub a: Vec<C64>,
    pub b1: C64,
    pub b2: C64,
    pub big_b1: f64,
    pub big_b2: f64,
}

pub fn coefficients_ab(background: &[f64], n: usize, j_max: usize) -> Result<CoefficientsAB> {
    let a = compute_aj(background, n, j_max.max(1))?;
    let (b1, b2) = coeff_b(a[0], a[1], n);
    Ok(CoefficientsAB { n, a, b1, b2, big_b1: b1.re, big_b2: b2.re })
}

/// b₁ = A₀/2 + 1/(2N); b₂ = (A₀³ + 2A₀A₁)/8 + A₁/(4N) − A₀/(6N²) − 1/(24N³).
pub fn coeff_b(a0: C64, a1: C64, n: usize) -> (C64, C64) {
    let nf = n as f64;
    let b1 = a0 / 2.0 + 1.0 / (2.0 * nf);
    let b2 = (a0 * a0 * a0 + a0 * a1 * 2.0) / 8.0 + a1 / (4.0 * nf) - a0 / (6.0 * nf * nf)
        - 1.0 / (24.0 * nf * nf * nf);
    (b1, b2)
}

/// b₁π²θ² + b₂π⁴θ⁴
pub fn predict_delta(b1: C64, b2: C64, theta: f64) -> C64 {
    let u = PI * PI * theta * theta;
    b1 * u + b2 * u * u
}

fn sp_coeffs(n: usize) -> [f64; 3] {
    let n2 = 1.0 / (n as f64 * n as f64);
    let p2 = PI * PI;
    [
        (1.0 / 3.0 - n2 / 3.0) * p2,
        -(2.0 / 45.0 - n2 / 9.0 + n2 * n2 / 15.0) * p2 * p2,
        (1.0 / 315.0 - 2.0 * n2 / 135.0 + n2 * n2 / 45.0 - 2.0 * n2 * n2 * n2 / 189.0) * p2 * p2 * p2,
    ]
}

fn check_spacing_range(s: f64) -> Result<()> {
    if !(0.0..=0.5).contains(&s) {
        return Err(Error::OutOfRange(format!("spacing s = {s} (valid 0 ≤ s ≤ 0.5)")));
    }
    Ok(())
}

/// Three-term small-s expansion of the nearest-neighbour spacing density.
pub fn spacing_density_p2(s: f64, n: usize) -> Result<f64> {
    check_spacing_range(s)?;
    let c = sp_coeffs(n);
    let s2 = s * s;
    Ok(s2 * (c[0] + s2 * (c[1] + s2 * c[2])))
}

/// ∫₀^s of the three-term expansion.
pub fn spacing_cdf_p2(s: f64, n: usize) -> Result<f64> {
    check_spacing_range(s)?;
    let c = sp_coeffs(n);
    let s2 = s * s;
    Ok(s * s2 * (c[0] / 3.0 + s2 * (c[1] / 5.0 + s2 * c[2] / 7.0)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Small,
    Large,
}

/// SMALL: (4/(3π))√s − (82/(45π))s^{3/2}; LARGE: 1/s².
pub fn q_asymptotics(s: f64, regime: Regime) -> f64 {
    match regime {
        Regime::Small => (4.0 / (3.0 * PI)) * s.sqrt() - (82.0 / (45.0 * PI)) * s * s.sqrt(),
        Regime::Large => 1.0 / (s * s),
    }
}

/// ∫₀^s of the two-term small-s law: (8/(9π))s^{3/2} − (164/(225π))s^{5/2}.
pub fn q_small_cdf(s: f64) -> f64 {
    let r = s * s.sqrt();
    (8.0 / (9.0 * PI)) * r - (164.0 / (225.0 * PI)) * r * s
}

/// Two-term density of δ* for general B₁, B₂ with its finite-N corrections.
pub fn pair_gap_density_general(s: f64, n: usize, big_b1: f64, big_b2: f64) -> f64 {
    let n2 = 1.0 / (n as f64 * n as f64);
    let lead = big_b1.powf(-1.5) / (6.0 * PI) * (1.0 - n2) * s.sqrt();
    let c3 = (big_b1.powf(-2.5) / 45.0 * (1.0 - 2.5 * n2 + 1.5 * n2 * n2)
        + 5.0 * big_b1.powf(-3.5) * big_b2 / 12.0 * (1.0 - n2))
        / PI;
    lead - c3 * s * s.sqrt()
}

/// δ* density with B₁ = 1/4 and B₂ replaced by its mean.
pub fn pair_gap_density(s: f64, n: usize, b2_mean: f64) -> f64 {
    pair_gap_density_general(s, n, 0.25, b2_mean)
}

/// Leading and s^{3/2} coefficients of the δ* density in the N → ∞ limit.
pub fn pair_gap_limit_coefficients(b2_mean: f64) -> (f64, f64) {
    let b1: f64 = 0.25;
    (b1.powf(-1.5) / (6.0 * PI), -(b1.powf(-2.5) / 45.0 + 5.0 * b1.powf(-3.5) * b2_mean / 12.0) / PI)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentPolynomials {
    pub n: usize,
    /// ⟨|Λ(1)|⁴⟩ over U(N−2)
    pub c_n_inv: f64,
    pub a0_mean: f64,
    /// μ₂-moments of the log-derivative sums in closed form: ⟨(Λ′/Λ)(1)³⟩,
    /// ⟨(Λ′/Λ)′(1)⟩ and ⟨(Λ′/Λ)(1)·(Λ′/Λ)′(1)⟩.
    pub a0_cubed: f64,
    pub a1_mean: f64,
    pub a0a1_mean: f64,
    /// Real part of the δ expansion's quartic coefficient with the closed-form
    /// moments substituted as the normalized A₀³, A₁, A₀A₁ (→ 1/48).
    pub b2_mean: f64,
    /// Same assembly with A₁ = −N⁻²(Λ′/Λ)′(1), the sign that matches the
    /// per-configuration expansion (→ 1/240).
    pub b2_mean_consistent: f64,
}

pub fn moment_polynomials(n: usize) -> Result<MomentPolynomials> {
    if n < 4 {
        return Err(Error::InvalidArgument("n must be at least 4".into()));
    }
    let nf = n as f64;
    let n2 = nf * nf;
    let n3 = n2 * nf;
    let c_n_inv = n2 * n2 / 12.0 - n2 / 12.0;
    let a0_mean = 0.5 - 1.0 / nf;
    let p3 = n3 / 10.0 - 7.0 * n2 / 10.0 + 8.0 * nf / 5.0 - 6.0 / 5.0;
    let p1 = n2 / 15.0 - nf / 2.0 + 11.0 / 15.0;
    let p01 = n3 / 30.0 - 3.0 * n2 / 10.0 + 13.0 * nf / 15.0 - 4.0 / 5.0;
    let tail = -a0_mean / (6.0 * n2) - 1.0 / (24.0 * n3);
    let b2_mean = (p3 + 2.0 * p01) / (8.0 * n3) + p1 / (4.0 * n3) + tail;
    let b2_mean_consistent = (p3 - 2.0 * p01) / (8.0 * n3) - p1 / (4.0 * n3) + tail;
    Ok(MomentPolynomials {
        n,
        c_n_inv,
        a0_mean,
        a0_cubed: p3,
        a1_mean: p1,
        a0a1_mean: p01,
        b2_mean,
        b2_mean_consistent,
    })
}

fn check_a(a: u32) -> Result<()> {
    if a > 2 {
        return Err(Error::InvalidArgument(format!("a = {a} unsupported (a ≤ 2)")));
    }
    Ok(())
}

/// W₁^{(a,b)}(t) = t(π²/2)(J_{a−1/2}(πt)² + J_{a+1/2}(πt)²) − aπJ_{a−1/2}(πt)J_{a+1/2}(πt),
/// extended evenly to t < 0.
pub fn one_level_density_w1(a: u32, t: f64) -> Result<f64> {
    check_a(a)?;
    Ok(w1(a, t))
}

fn w1(a: u32, t: f64) -> f64 {
    let x = PI * t.abs();
    if x == 0.0 {
        return if a == 0 { 1.0 } else { 0.0 };
    }
    let lo = riccati_k(2 * a as i32 - 1, x);
    let hi = riccati_k(2 * a as i32 + 1, x);
    lo * lo + hi * hi - 2.0 * a as f64 / x * lo * hi
}

pub const KERNEL_DIAGONAL_SWITCH: f64 = 1e-8;

/// Limiting kernel K∞(ξ, η), including the phase factor e^{iπ(η−ξ)}.
pub fn kernel_k_infty(a: u32, xi: f64, eta: f64) -> Result<C64> {
    check_a(a)?;
    if (xi - eta).abs() < KERNEL_DIAGONAL_SWITCH {
        return Ok(C64::new(w1(a, 0.5 * (xi + eta)), 0.0));
    }
    let (x, y) = (PI * xi, PI * eta);
    let (m, p) = (2 * a as i32 - 1, 2 * a as i32 + 1);
    let num = riccati_k(p, x) * riccati_k(m, y) - riccati_k(m, x) * riccati_k(p, y);
    Ok(C64::from_polar(1.0, PI * (eta - xi)) * (num / (PI * (xi - eta))))
}

/// β₁ = 1/4, β₂ = 1/64 − α₁/8.
pub fn beta_coefficients(alpha1: f64) -> (f64, f64) {
    (0.25, 1.0 / 64.0 - alpha1 / 8.0)
}

/// β₁π²θ² + β₂π⁴θ⁴
pub fn predicted_x_from_gap(theta: f64, alpha1: f64) -> Result<f64> {
    if !(0.0..1.0 / PI).contains(&theta) {
        return Err(Error::OutOfRange(format!("theta = {theta}")));
    }
    let (b1, b2) = beta_coefficients(alpha1);
    let u = PI * PI * theta * theta;
    Ok(b1 * u + b2 * u * u)
}

/// (1/4π²)∫_{|t|≤T} W₁^{(2,0)}(t)/t² dt plus the tail 1/(2π²T).
pub fn alpha1_mean(t_max: f64) -> f64 {
    let f = |t: f64| w1(2, t) / (t * t);
    let core = crate::quad::integrate_panels(f, 0.0, t_max, 1.0, 1e-12);
    2.0 * core / (4.0 * PI * PI) + 1.0 / (2.0 * PI * PI * t_max)
}
