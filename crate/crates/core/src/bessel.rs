//! Bessel functions of orders −1/2, 1/2, 3/2, 5/2.
//!
//! Internally everything goes through u_ν(x) = √(πx/2)·J_ν(x), which is a
//! trigonometric polynomial in x and 1/x for half-integer ν.

use crate::{Error, Result};
use std::f64::consts::PI;

fn order_index(nu: f64) -> Result<i32> {
    let k = (2.0 * nu).round();
    if (2.0 * nu - k).abs() > 1e-12 || ![-1.0, 1.0, 3.0, 5.0].contains(&k) {
        return Err(Error::InvalidArgument(format!("unsupported Bessel order {nu}")));
    }
    Ok(k as i32)
}

/// Ascending series of u_ν for small x > 0.
fn u_series(two_nu: i32, x: f64) -> f64 {
    let nu = two_nu as f64 / 2.0;
    // Γ(ν+1) for half-integer ν
    let mut gamma = PI.sqrt(); // Γ(1/2)
    let mut g_arg = 0.5;
    while g_arg < nu + 1.0 - 1e-9 {
        gamma *= g_arg;
        g_arg += 1.0;
    }
    let h = 0.5 * x;
    let h2 = h * h;
    let mut term = 1.0 / gamma;
    let mut sum = term;
    for k in 1..40 {
        let kf = k as f64;
        term *= -h2 / (kf * (kf + nu));
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    // √(πx/2) (x/2)^ν Σ
    (PI * x / 2.0).sqrt() * h.powf(nu) * sum
}

/// u_ν(x) = √(πx/2) J_ν(x) for ν ∈ {−1/2, 1/2, 3/2, 5/2}; defined for all real x
/// by its closed form (odd/even in x according to ν).
pub fn riccati(nu: f64, x: f64) -> Result<f64> {
    let k = order_index(nu)?;
    Ok(riccati_k(k, x))
}

pub(crate) fn riccati_k(two_nu: i32, x: f64) -> f64 {
    let (s, c) = x.sin_cos();
    match two_nu {
        -1 => c,
        1 => s,
        3 if x.abs() >= 1.0 => s / x - c,
        5 if x.abs() >= 1.0 => (3.0 / (x * x) - 1.0) * s - 3.0 * c / x,
        _ => {
            if x == 0.0 {
                return 0.0;
            }
            let v = u_series(two_nu, x.abs());
            // u_{3/2} is even, u_{5/2} odd
            if two_nu == 5 { v * x.signum() } else { v }
        }
    }
}

/// J_ν(x) for x ≥ 0, ν ∈ {−1/2, 1/2, 3/2, 5/2}.
pub fn bessel_half_integer(nu: f64, x: f64) -> Result<f64> {
    let k = order_index(nu)?;
    if x < 0.0 {
        return Err(Error::Domain("x must be nonnegative".into()));
    }
    if x == 0.0 {
        return Ok(if k == -1 { f64::INFINITY } else { 0.0 });
    }
    Ok(riccati_k(k, x) / (PI * x / 2.0).sqrt())
}
