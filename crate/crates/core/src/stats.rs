//! Mergeable histograms, empirical CDFs, mode detection and small
//! statistical helpers.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub ensemble: String,
    pub n: usize,
    pub seed_lo: u64,
    pub seed_hi: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDistribution {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<f64>,
    pub total_samples: u64,
    pub total_mass: f64,
    pub underflow: f64,
    pub overflow: f64,
    pub rejected_nan: u64,
    pub metadata: Metadata,
}

/// `bins` equal bins on [lo, hi].
pub fn uniform_edges(lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    let h = (hi - lo) / bins as f64;
    let mut e: Vec<f64> = (0..bins).map(|k| lo + k as f64 * h).collect();
    e.push(hi);
    e
}

/// Default S-histogram edges: 200 bins on [0, 10].
pub fn default_s_edges() -> Vec<f64> {
    uniform_edges(0.0, 10.0, 200)
}

impl EmpiricalDistribution {
    pub fn new(edges: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 || edges.windows(2).any(|w| !(w[1] > w[0])) || edges.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidArgument("bin edges must be finite and strictly increasing".into()));
        }
        let k = edges.len() - 1;
        Ok(EmpiricalDistribution {
            bin_edges: edges,
            counts: vec![0.0; k],
            total_samples: 0,
            total_mass: 0.0,
            underflow: 0.0,
            overflow: 0.0,
            rejected_nan: 0,
            metadata: Metadata::default(),
        })
    }

    /// Bin of x: left-closed, right-open, last bin closed.
    pub fn bin_index(&self, x: f64) -> Option<usize> {
        let e = &self.bin_edges;
        let last = e.len() - 1;
        if !(x >= e[0] && x <= e[last]) {
            return None;
        }
        if x == e[last] {
            return Some(last - 1);
        }
        Some(e.partition_point(|&b| b <= x) - 1)
    }

    pub fn add(&mut self, x: f64) {
        self.add_weighted(x, 1.0);
    }

    pub fn add_weighted(&mut self, x: f64, w: f64) {
        if x.is_nan() || w.is_nan() {
            self.rejected_nan += 1;
            return;
        }
        self.total_samples += 1;
        self.total_mass += w;
        match self.bin_index(x) {
            Some(k) => self.counts[k] += w,
            None if x < self.bin_edges[0] => self.underflow += w,
            None => self.overflow += w,
        }
    }

    pub fn merge(&self, other: &EmpiricalDistribution) -> Result<EmpiricalDistribution> {
        if self.bin_edges != other.bin_edges {
            return Err(Error::EdgeMismatch);
        }
        let mut m = self.clone();
        for (a, b) in m.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        m.total_samples += other.total_samples;
        m.total_mass += other.total_mass;
        m.underflow += other.underflow;
        m.overflow += other.overflow;
        m.rejected_nan += other.rejected_nan;
        m.metadata.seed_lo = self.metadata.seed_lo.min(other.metadata.seed_lo);
        m.metadata.seed_hi = self.metadata.seed_hi.max(other.metadata.seed_hi);
        Ok(m)
    }

    pub fn in_range_mass(&self) -> f64 {
        self.counts.iter().sum()
    }

    pub fn centers(&self) -> Vec<f64> {
        self.bin_edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// count / (width · total mass)
    pub fn density(&self) -> Vec<f64> {
        self.bin_edges
            .windows(2)
            .zip(&self.counts)
            .map(|(w, c)| c / ((w[1] - w[0]) * self.total_mass))
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

pub fn build_histogram(values: &[f64], edges: &[f64]) -> Result<EmpiricalDistribution> {
    let mut d = EmpiricalDistribution::new(edges.to_vec())?;
    for &v in values {
        d.add(v);
    }
    Ok(d)
}

pub fn build_weighted(pairs: &[(f64, f64)], edges: &[f64]) -> Result<EmpiricalDistribution> {
    let mut d = EmpiricalDistribution::new(edges.to_vec())?;
    for &(v, w) in pairs {
        if w < 0.0 {
            return Err(Error::InvalidArgument("negative weight".into()));
        }
        d.add_weighted(v, w);
    }
    Ok(d)
}

/// (edge, F(edge)) where F counts all mass below the edge, underflow included.
pub fn empirical_cdf(d: &EmpiricalDistribution) -> Result<Vec<(f64, f64)>> {
    if d.total_mass <= 0.0 {
        return Err(Error::InvalidArgument("empty distribution".into()));
    }
    let mut out = Vec::with_capacity(d.bin_edges.len());
    let mut acc = d.underflow;
    out.push((d.bin_edges[0], acc / d.total_mass));
    for (k, c) in d.counts.iter().enumerate() {
        acc += c;
        out.push((d.bin_edges[k + 1], acc / d.total_mass));
    }
    Ok(out)
}

/// CDF value at an edge (exact edge match required).
pub fn cdf_at(d: &EmpiricalDistribution, x: f64) -> Option<f64> {
    let k = d.bin_edges.iter().position(|&e| (e - x).abs() <= 1e-12 * x.abs().max(1.0))?;
    let below: f64 = d.underflow + d.counts[..k].iter().sum::<f64>();
    Some(below / d.total_mass)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Bandwidth {
    /// 1.06·σ̂·m^{−1/5}
    Silverman,
    Fixed(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeReport {
    pub count: usize,
    pub locations: Vec<f64>,
    pub bandwidth: f64,
    pub smoothed: Vec<f64>,
    /// (location, prominence / global max) for every local maximum.
    pub candidates: Vec<(f64, f64)>,
}

pub const MIN_MODE_SAMPLES: u64 = 10_000;

/// Local maxima of the Gaussian-kernel-smoothed histogram with topographic
/// prominence at least 5% of the global maximum.
pub fn detect_modes(d: &EmpiricalDistribution, rule: Bandwidth) -> Result<ModeReport> {
    if d.total_samples < MIN_MODE_SAMPLES {
        return Err(Error::TooFewSamples { need: MIN_MODE_SAMPLES as usize, got: d.total_samples as usize });
    }
    let c = d.centers();
    let m = d.in_range_mass();
    if m <= 0.0 {
        return Err(Error::InvalidArgument("no mass in range".into()));
    }
    let h = match rule {
        Bandwidth::Fixed(h) => h,
        Bandwidth::Silverman => {
            let mean = c.iter().zip(&d.counts).map(|(x, w)| x * w).sum::<f64>() / m;
            let var = c.iter().zip(&d.counts).map(|(x, w)| w * (x - mean).powi(2)).sum::<f64>() / m;
            let in_range = d.total_samples as f64 * m / d.total_mass;
            1.06 * var.sqrt() * in_range.powf(-0.2)
        }
    };
    if !(h > 0.0) {
        return Err(Error::InvalidArgument("bandwidth must be positive".into()));
    }
    let f: Vec<f64> = c
        .iter()
        .map(|&x| {
            c.iter()
                .zip(&d.counts)
                .map(|(&y, &w)| {
                    let u = (x - y) / h;
                    w * (-0.5 * u * u).exp()
                })
                .sum::<f64>()
        })
        .collect();
    let gmax = f.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let candidates: Vec<(f64, f64)> = peak_prominences(&f).into_iter().map(|(i, p)| (c[i], p / gmax)).collect();
    let locations: Vec<f64> = candidates.iter().filter(|&&(_, p)| p >= 0.05).map(|&(x, _)| x).collect();
    Ok(ModeReport { count: locations.len(), locations, bandwidth: h, smoothed: f, candidates })
}

/// Indices of local maxima whose prominence is at least `frac` of max(f).
pub fn prominent_maxima(f: &[f64], frac: f64) -> Vec<usize> {
    let gmax = f.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    peak_prominences(f).into_iter().filter(|&(_, p)| p >= frac * gmax).map(|(i, _)| i).collect()
}

/// Every local maximum (plateaus reported at their middle) with its
/// topographic prominence. Array ends count as maxima.
pub fn peak_prominences(f: &[f64]) -> Vec<(usize, f64)> {
    let n = f.len();
    let mut peaks = Vec::new();
    let mut i = 0;
    while i < n {
        // plateau [i, j]
        let mut j = i;
        while j + 1 < n && f[j + 1] == f[i] {
            j += 1;
        }
        let left_ok = i == 0 || f[i - 1] < f[i];
        let right_ok = j == n - 1 || f[j + 1] < f[j];
        if left_ok && right_ok {
            let p = f[i];
            // descend to the lowest point before a higher value on each side
            let mut lmin = p;
            let mut k = i;
            let mut lbound = true;
            while k > 0 {
                k -= 1;
                if f[k] > p {
                    lbound = false;
                    break;
                }
                lmin = lmin.min(f[k]);
            }
            let mut rmin = p;
            let mut rbound = true;
            for &v in &f[j + 1..] {
                if v > p {
                    rbound = false;
                    break;
                }
                rmin = rmin.min(v);
            }
            let prominence = match (lbound, rbound) {
                (true, true) => p,
                (true, false) => p - rmin,
                (false, true) => p - lmin,
                (false, false) => p - lmin.max(rmin),
            };
            peaks.push(((i + j) / 2, prominence));
        }
        i = j + 1;
    }
    peaks
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(|p, q| p.partial_cmp(q).unwrap());
    y.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// KS critical value at level α for sample sizes n, m.
pub fn ks_critical(alpha: f64, n: usize, m: usize) -> f64 {
    let c = (-0.5 * (alpha / 2.0).ln()).sqrt();
    c * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

/// Mean and standard error of a proportion estimated over `batches` groups.
pub fn batch_mean_se(values: &[f64]) -> (f64, f64) {
    let b = values.len() as f64;
    let m = values.iter().sum::<f64>() / b;
    let v = values.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (b - 1.0);
    (m, (v / b).sqrt())
}
