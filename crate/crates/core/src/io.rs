//! CSV and JSON emission. Numbers use Rust's shortest round-trip format so
//! identical inputs give identical bytes.

use crate::conditioned::OneLevel;
use crate::stats::EmpiricalDistribution;
use crate::zeta_scan::ZetaPrimeZero;
use crate::Result;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

pub fn histogram_csv(d: &EmpiricalDistribution) -> String {
    let mut s = String::from("bin_left,bin_right,count,density\n");
    for ((w, c), dens) in d.bin_edges.windows(2).zip(&d.counts).zip(d.density()) {
        let _ = writeln!(s, "{},{},{},{}", w[0], w[1], c, dens);
    }
    s
}

pub fn cdf_csv(points: &[(f64, f64)]) -> String {
    let mut s = String::from("x,F\n");
    for (x, f) in points {
        let _ = writeln!(s, "{x},{f}");
    }
    s
}

pub fn one_level_csv(o: &OneLevel) -> String {
    let mut s = String::from("bin_left,bin_right,mass,stderr,w1_integral\n");
    for (k, w) in o.dist.bin_edges.windows(2).enumerate() {
        let _ = writeln!(s, "{},{},{},{},{}", w[0], w[1], o.dist.counts[k], o.stderr[k], o.w1_integral[k]);
    }
    s
}

pub fn zeros_csv(z: &[ZetaPrimeZero]) -> String {
    let mut s = String::from("beta,gamma,normalized_x,residual\n");
    for r in z {
        let _ = writeln!(s, "{},{},{},{}", r.beta, r.gamma, r.normalized_x, r.residual);
    }
    s
}

/// Generic table: header plus rows of numbers.
pub fn table_csv(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        let cells: Vec<String> = r.iter().map(|v| v.to_string()).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub seed: Option<u64>,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    pub samples: Option<usize>,
    pub wall_time: f64,
    pub version: String,
    pub flags: serde_json::Value,
    #[serde(default)]
    pub outputs: Vec<String>,
    #[serde(default)]
    pub failures: Vec<String>,
    #[serde(default)]
    pub extra: serde_json::Value,
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        Manifest {
            command: command.into(),
            seed: None,
            n: None,
            samples: None,
            wall_time: 0.0,
            version: env!("CARGO_PKG_VERSION").into(),
            flags: serde_json::Value::Null,
            outputs: Vec::new(),
            failures: Vec::new(),
            extra: serde_json::Value::Null,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<String> {
    std::fs::create_dir_all(dir)?;
    let p = dir.join(name);
    std::fs::write(&p, text)?;
    Ok(p.display().to_string())
}
