//! Python bindings for derivzeros.

use derivzeros_core as dz;
use dz::ensembles::{Ensemble, Sampler};
use dz::experiments::{self, DerivDistOptions};
use dz::polyderiv::RootSolver;
use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: dz::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Eigenphases in (-pi, pi] of one matrix from "cue", "coe" or "poisson".
#[pyfunction]
#[pyo3(signature = (ensemble, n, seed=0))]
fn sample_phases(ensemble: &str, n: usize, seed: u64) -> PyResult<Vec<f64>> {
    let c = match Ensemble::parse(ensemble).map_err(err)? {
        Ensemble::Cue => dz::ensembles::sample_cue(n, seed),
        Ensemble::Coe => dz::ensembles::sample_coe(n, seed),
        Ensemble::Poisson => dz::ensembles::sample_poisson(n, seed),
        Ensemble::Explicit => return Err(PyValueError::new_err("explicit phases are passed directly")),
    };
    Ok(c.map_err(err)?.raw_phases)
}

/// Roots of the derivative of prod(z - e^{i t}) and their S = N(1 - |z|).
#[pyfunction]
fn deriv_roots(phases: Vec<f64>) -> PyResult<(Vec<Complex64>, Vec<f64>)> {
    let r = dz::polyderiv::deriv_roots_from_phases(&phases).map_err(err)?;
    Ok((r.roots, r.s_values))
}

/// Histogram of S over `samples` matrices: (bin edges, counts, total mass).
#[pyfunction]
#[pyo3(signature = (ensemble, n, samples, seed=0))]
fn deriv_dist(ensemble: &str, n: usize, samples: usize, seed: u64) -> PyResult<(Vec<f64>, Vec<f64>, f64)> {
    let o = DerivDistOptions {
        ensemble: Ensemble::parse(ensemble).map_err(err)?,
        n,
        samples,
        seed,
        sampler: Sampler::Verblunsky,
        solver: RootSolver::Aberth,
    };
    let d = experiments::deriv_dist(&o, &dz::stats::default_s_edges()).map_err(err)?;
    Ok((d.hist.bin_edges, d.hist.counts, d.hist.total_mass))
}

/// Close-pair coefficients for a rescaled background: A_0..A_{j_max}, b1, b2.
#[pyfunction]
#[pyo3(signature = (background, n, j_max=1))]
fn coefficients<'py>(py: Python<'py>, background: Vec<f64>, n: usize, j_max: usize) -> PyResult<Bound<'py, PyDict>> {
    let c = dz::expansions::coefficients_ab(&background, n, j_max).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("a", c.a)?;
    d.set_item("b1", c.b1)?;
    d.set_item("b2", c.b2)?;
    Ok(d)
}

/// Closed-form conditioned moments at size n.
#[pyfunction]
fn moment_polynomials<'py>(py: Python<'py>, n: usize) -> PyResult<Bound<'py, PyDict>> {
    let p = dz::expansions::moment_polynomials(n).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("mean_weight", p.c_n_inv)?;
    d.set_item("a0", p.a0_mean)?;
    d.set_item("a0_cubed", p.a0_cubed)?;
    d.set_item("a1", p.a1_mean)?;
    d.set_item("a0a1", p.a0a1_mean)?;
    d.set_item("b2_direct", p.b2_mean)?;
    d.set_item("b2_consistent", p.b2_mean_consistent)?;
    Ok(d)
}

/// Integrated two-term small-s law for the distribution of S.
#[pyfunction]
fn small_s_cdf(s: f64) -> f64 {
    dz::expansions::q_small_cdf(s)
}

/// One-level density W1 of the conditioned ensemble, a in {0, 1, 2}.
#[pyfunction]
fn one_level_density(a: u32, t: f64) -> PyResult<f64> {
    dz::expansions::one_level_density_w1(a, t).map_err(err)
}

/// (zeta(s), zeta'(s)) for 0 < Re s < 2, 10 <= |Im s| <= 1e4.
#[pyfunction]
#[pyo3(signature = (s, tol=1e-12))]
fn zeta(s: Complex64, tol: f64) -> PyResult<(Complex64, Complex64)> {
    dz::zeta::zeta_and_derivative(s, tol).map_err(err)
}

/// Zeros of zeta' with t_lo <= Im s < t_hi as (beta, gamma) pairs.
#[pyfunction]
fn zeta_prime_zeros(t_lo: f64, t_hi: f64) -> PyResult<Vec<(f64, f64)>> {
    let r = dz::zeta_scan::find_zeta_prime_zeros(t_lo, t_hi, Default::default()).map_err(err)?;
    if !r.failures.is_empty() {
        return Err(PyValueError::new_err(r.failures.join("; ")));
    }
    Ok(r.zeros.iter().map(|z| (z.beta, z.gamma)).collect())
}

#[pymodule]
fn derivzeros(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(sample_phases, m)?)?;
    m.add_function(wrap_pyfunction!(deriv_roots, m)?)?;
    m.add_function(wrap_pyfunction!(deriv_dist, m)?)?;
    m.add_function(wrap_pyfunction!(coefficients, m)?)?;
    m.add_function(wrap_pyfunction!(moment_polynomials, m)?)?;
    m.add_function(wrap_pyfunction!(small_s_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(one_level_density, m)?)?;
    m.add_function(wrap_pyfunction!(zeta, m)?)?;
    m.add_function(wrap_pyfunction!(zeta_prime_zeros, m)?)?;
    Ok(())
}
