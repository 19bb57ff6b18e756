//! Python bindings: the walker state, stepping, observables and the
//! analysis routines of `nlqw`.

use num_complex::Complex64 as C64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use nlqw::analysis::{self, DetrapParams};
use nlqw::evolution::{self, StepParams};
use nlqw::{observables, Coin, CoinBasis, CoinVector, TimeSeries, WalkerState};

fn to_py<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn basis(name: &str) -> PyResult<CoinBasis> {
    name.parse().map_err(to_py)
}

fn coin(name: &str) -> PyResult<Coin> {
    match name {
        "L" => Ok(Coin::L),
        "S" => Ok(Coin::S),
        "R" => Ok(Coin::R),
        other => Err(PyValueError::new_err(format!(
            "unknown coin state {other:?}; use L, S or R"
        ))),
    }
}

/// Coin vector `(aL, aS, aR)` of a named input state
/// (`L`, `S`, `R`, `sigma_plus`, `sigma_minus_1`, `sigma_minus_2`).
#[pyfunction]
fn coin_basis(name: &str) -> PyResult<(C64, C64, C64)> {
    let v = basis(name)?.vector();
    Ok((v.0[0], v.0[1], v.0[2]))
}

/// A walker on the integer line with a three-state coin.
#[pyclass(name = "Walker", skip_from_py_object)]
#[derive(Clone)]
struct PyWalker {
    state: WalkerState,
    params: StepParams,
}

#[pymethods]
impl PyWalker {
    /// `coin` is either a basis name or a 3-sequence of complex amplitudes.
    #[new]
    #[pyo3(signature = (coin = None, chi = 0.0, position = 0, amplitudes = None))]
    fn new(
        coin: Option<&str>,
        chi: f64,
        position: i64,
        amplitudes: Option<(C64, C64, C64)>,
    ) -> PyResult<Self> {
        let vector = match (coin, amplitudes) {
            (Some(_), Some(_)) => {
                return Err(PyValueError::new_err(
                    "pass either coin or amplitudes, not both",
                ))
            }
            (_, Some((l, s, r))) => CoinVector::new(l, s, r),
            (name, None) => basis(name.unwrap_or("sigma_plus"))?.vector(),
        };
        Ok(Self {
            state: WalkerState::new_localized(position, vector).map_err(to_py)?,
            params: StepParams::new(chi).map_err(to_py)?,
        })
    }

    #[getter]
    fn chi(&self) -> f64 {
        self.params.chi
    }

    #[getter]
    fn time(&self) -> u64 {
        self.state.time()
    }

    /// Inclusive `(lo, hi)` range of stored sites.
    #[getter]
    fn site_range(&self) -> (i64, i64) {
        self.state.site_range()
    }

    /// Advances the walk by `n` steps.
    #[pyo3(signature = (n = 1))]
    fn step(&mut self, n: usize) {
        for _ in 0..n {
            evolution::step(&mut self.state, self.params);
        }
    }

    fn amplitude(&self, n: i64, c: &str) -> PyResult<C64> {
        Ok(self.state.amplitude(n, coin(c)?))
    }

    fn norm(&self) -> f64 {
        self.state.norm()
    }

    fn survival_probability(&self) -> f64 {
        observables::survival_probability(&self.state)
    }

    fn participation_ratio(&self) -> f64 {
        observables::participation_ratio(&self.state)
    }

    /// `(sites, pL, pS, pR, p_total)` as parallel lists.
    #[allow(clippy::type_complexity)]
    fn density(&self) -> (Vec<i64>, Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
        let d = observables::probability_density(&self.state);
        let mut out = (vec![], vec![], vec![], vec![], vec![]);
        for (n, p) in d.iter() {
            out.0.push(n);
            out.1.push(p[0]);
            out.2.push(p[1]);
            out.3.push(p[2]);
            out.4.push(p[3]);
        }
        out
    }

    fn __repr__(&self) -> String {
        format!(
            "Walker(chi={}, t={}, sites={:?})",
            self.params.chi,
            self.state.time(),
            self.state.site_range()
        )
    }
}

/// Runs a walk and returns `{"t", "sp", "pr", "norm"}` lists, one entry per
/// step including `t = 0`.
#[pyfunction]
#[pyo3(signature = (chi, steps, coin = "sigma_plus", position = 0))]
fn evolve<'py>(
    py: Python<'py>,
    chi: f64,
    steps: usize,
    coin: &str,
    position: i64,
) -> PyResult<Bound<'py, PyDict>> {
    let initial = WalkerState::new_localized(position, basis(coin)?.vector()).map_err(to_py)?;
    let params = StepParams::new(chi).map_err(to_py)?;
    let rec = py
        .detach(|| evolution::evolve(&initial, params, steps, steps))
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("t", rec.sp.iter().map(|(t, _)| t).collect::<Vec<_>>())?;
    d.set_item("sp", rec.sp.values())?;
    d.set_item("pr", rec.pr.values())?;
    d.set_item("norm", rec.norm.values())?;
    Ok(d)
}

/// `(t, SP, dSP/dt)` triples from an SP series sampled at `start, start+1, …`.
#[pyfunction]
#[pyo3(signature = (sp, start = 0))]
fn phase_portrait(sp: Vec<f64>, start: u64) -> PyResult<Vec<(u64, f64, f64)>> {
    let points = observables::phase_portrait(&TimeSeries::new("SP", start, sp)).map_err(to_py)?;
    Ok(points
        .into_iter()
        .map(|p| (p.t, p.sp, p.velocity))
        .collect())
}

/// Log-binned power-law fit over `[t_min, t_max]`; returns a dict with
/// `exponent`, `amplitude`, `stderr`, `r_squared`, `bins`.
#[pyfunction]
#[pyo3(signature = (values, t_min, t_max, start = 0, bin_ratio = analysis::DEFAULT_BIN_RATIO))]
fn fit_power_law<'py>(
    py: Python<'py>,
    values: Vec<f64>,
    t_min: u64,
    t_max: u64,
    start: u64,
    bin_ratio: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let fit = analysis::fit_power_law(
        &TimeSeries::new("v", start, values),
        t_min,
        t_max,
        bin_ratio,
    )
    .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("exponent", fit.exponent)?;
    d.set_item("amplitude", fit.amplitude)?;
    d.set_item("stderr", fit.stderr)?;
    d.set_item("r_squared", fit.r_squared)?;
    d.set_item("bins", fit.bins)?;
    Ok(d)
}

/// `(saturated, level, reference)` comparing the means of two windows.
#[pyfunction]
#[pyo3(signature = (values, w1, w2, rel_tol = 0.1, start = 0))]
fn detect_saturation(
    values: Vec<f64>,
    w1: (u64, u64),
    w2: (u64, u64),
    rel_tol: f64,
    start: u64,
) -> PyResult<(bool, f64, f64)> {
    let s = analysis::detect_saturation(&TimeSeries::new("v", start, values), w1, w2, rel_tol)
        .map_err(to_py)?;
    Ok((s.saturated, s.level, s.reference))
}

/// Detrapping time of a PR series; returns `None` if no sustained rise.
#[pyfunction]
#[pyo3(signature = (pr, window = 100, slope_threshold = 0.05, sustain = 50, baseline_multiplier = 5.0, start = 0))]
fn detect_detrapping_time(
    pr: Vec<f64>,
    window: usize,
    slope_threshold: f64,
    sustain: usize,
    baseline_multiplier: f64,
    start: u64,
) -> PyResult<Option<u64>> {
    let params = DetrapParams {
        window,
        slope_threshold,
        sustain,
        baseline_multiplier,
    };
    let r = analysis::detect_detrapping_time(&TimeSeries::new("PR", start, pr), &params)
        .map_err(to_py)?;
    Ok(r.tau_c)
}

#[pymodule]
fn pynlqw(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyWalker>()?;
    m.add_function(wrap_pyfunction!(coin_basis, m)?)?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(phase_portrait, m)?)?;
    m.add_function(wrap_pyfunction!(fit_power_law, m)?)?;
    m.add_function(wrap_pyfunction!(detect_saturation, m)?)?;
    m.add_function(wrap_pyfunction!(detect_detrapping_time, m)?)?;
    Ok(())
}
