//! Winding numbers by adaptive phase tracking along piecewise contours.

use crate::{Error, Result, C64};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, TAU};

#[derive(Clone, Copy, Debug)]
pub enum Piece {
    /// center + radius·e^{iφ}, φ running from `from` to `to` (either direction).
    Arc { center: C64, radius: f64, from: f64, to: f64 },
    Segment { from: C64, to: C64 },
}

impl Piece {
    pub fn point(&self, u: f64) -> C64 {
        match *self {
            Piece::Arc { center, radius, from, to } => center + C64::from_polar(radius, from + u * (to - from)),
            Piece::Segment { from, to } => from + (to - from) * u,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Tracking {
    pub initial: usize,
    pub max_depth: u32,
    pub max_step: f64,
}

impl Default for Tracking {
    fn default() -> Self {
        Tracking { initial: 16, max_depth: 40, max_step: FRAC_PI_4 }
    }
}

fn arg_ratio(a: C64, b: C64) -> f64 {
    (b * a.conj()).arg()
}

fn check(v: C64) -> Result<C64> {
    if v.norm() == 0.0 || !v.re.is_finite() || !v.im.is_finite() {
        return Err(Error::Domain("function vanishes or is singular on the contour".into()));
    }
    Ok(v)
}

struct Tracker<'a, F> {
    f: &'a mut F,
    piece: Piece,
    opts: Tracking,
}

impl<F: FnMut(C64) -> Result<C64>> Tracker<'_, F> {
    fn eval(&mut self, u: f64) -> Result<C64> {
        let z = self.piece.point(u);
        check((self.f)(z)?)
    }

    fn span(&mut self, u0: f64, u1: f64, f0: C64, f1: C64, depth: u32) -> Result<f64> {
        let d = arg_ratio(f0, f1);
        let um = 0.5 * (u0 + u1);
        if depth >= self.opts.max_depth {
            if d.abs() > FRAC_PI_2 {
                return Err(Error::ContourResolution { step: d.abs() });
            }
            return Ok(d);
        }
        let fm = self.eval(um)?;
        let d1 = arg_ratio(f0, fm);
        let d2 = arg_ratio(fm, f1);
        let consistent = (d1 + d2 - d).abs() < 1e-9;
        if consistent && d.abs() <= self.opts.max_step && d1.abs() <= self.opts.max_step && d2.abs() <= self.opts.max_step {
            return Ok(d1 + d2);
        }
        Ok(self.span(u0, um, f0, fm, depth + 1)? + self.span(um, u1, fm, f1, depth + 1)?)
    }
}

/// Total change of arg f along one piece.
pub fn phase_change<F: FnMut(C64) -> Result<C64>>(f: &mut F, piece: Piece, opts: Tracking) -> Result<f64> {
    let mut t = Tracker { f, piece, opts };
    let m = opts.initial.max(1);
    let mut prev = t.eval(0.0)?;
    let mut total = 0.0;
    for k in 1..=m {
        let u1 = k as f64 / m as f64;
        let cur = t.eval(u1)?;
        total += t.span((k - 1) as f64 / m as f64, u1, prev, cur, 0)?;
        prev = cur;
    }
    Ok(total)
}

/// Winding number of f around 0 along a closed chain of pieces.
pub fn winding<F: FnMut(C64) -> Result<C64>>(mut f: F, pieces: &[Piece], opts: Tracking) -> Result<i64> {
    let mut total = 0.0;
    for &p in pieces {
        total += phase_change(&mut f, p, opts)?;
    }
    let w = total / TAU;
    let k = w.round();
    if (w - k).abs() > 0.05 {
        return Err(Error::Domain(format!("winding {w:.4} is not close to an integer (open contour?)")));
    }
    Ok(k as i64)
}

pub fn circle(center: C64, radius: f64) -> Vec<Piece> {
    vec![Piece::Arc { center, radius, from: 0.0, to: TAU }]
}

/// Counterclockwise rectangle [x0,x1]×[y0,y1].
pub fn rectangle(x0: f64, x1: f64, y0: f64, y1: f64) -> Vec<Piece> {
    let a = C64::new(x0, y0);
    let b = C64::new(x1, y0);
    let c = C64::new(x1, y1);
    let d = C64::new(x0, y1);
    vec![
        Piece::Segment { from: a, to: b },
        Piece::Segment { from: b, to: c },
        Piece::Segment { from: c, to: d },
        Piece::Segment { from: d, to: a },
    ]
}

/// Boundary of the disk |z − c| < r (c real) with ε-bites removed around
/// its top and bottom points c ± ir, traversed counterclockwise. The bites
/// run clockwise through the interior of the disk.
pub fn twice_bitten(c: f64, r: f64, eps: f64) -> Result<Vec<Piece>> {
    if !(eps > 0.0 && eps < 2.0 * r) {
        return Err(Error::InvalidArgument(format!("bite radius {eps} must lie in (0, 2r)")));
    }
    let da = 2.0 * (eps / (2.0 * r)).asin();
    let center = C64::new(c, 0.0);
    let top = C64::new(c, r);
    let bottom = C64::new(c, -r);
    let h = FRAC_PI_2;
    Ok(vec![
        Piece::Arc { center, radius: r, from: -h + da, to: h - da },
        Piece::Arc { center: top, radius: eps, from: -da / 2.0, to: -std::f64::consts::PI + da / 2.0 },
        Piece::Arc { center, radius: r, from: h + da, to: 3.0 * h - da },
        Piece::Arc { center: bottom, radius: eps, from: std::f64::consts::PI - da / 2.0, to: da / 2.0 },
    ])
}
