//! Python bindings for `qgraph`.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use qgraph::analysis::{self, BranchTrace, CountingReport};
use qgraph::finder::{self, FinderConfig, SearchRegion};
use qgraph::graph::Count;
use qgraph::{poly, Error, MetricGraph, SecularFunction};

fn err(e: Error) -> PyErr {
    if e.is_numeric() {
        PyRuntimeError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn count_obj(py: Python<'_>, c: Count) -> PyResult<Py<PyAny>> {
    Ok(match c {
        Count::Finite(n) => n.into_pyobject(py)?.into_any().unbind(),
        Count::Infinite => f64::INFINITY.into_pyobject(py)?.into_any().unbind(),
    })
}

/// A metric graph with leads.
#[pyclass(name = "Graph", module = "qgraph_py", frozen)]
pub struct PyGraph {
    inner: MetricGraph,
}

#[pymethods]
impl PyGraph {
    /// Parse a JSON graph document.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyGraph { inner: qgraph::load_graph(text).map_err(err)? })
    }

    /// A named graph, e.g. `Graph.catalog("Y", [1.0, 2.0])`.
    #[staticmethod]
    #[pyo3(signature = (name, params = Vec::new(), lengths = None))]
    fn catalog(name: &str, params: Vec<f64>, lengths: Option<Vec<f64>>) -> PyResult<Self> {
        let g = qgraph::catalog(name, &params, lengths.as_deref()).map_err(err)?;
        Ok(PyGraph { inner: g })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner.to_document()).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn with_lengths(&self, lengths: Vec<f64>) -> PyResult<Self> {
        Ok(PyGraph { inner: self.inner.with_lengths(&lengths).map_err(err)? })
    }

    #[getter]
    fn vertices(&self) -> Vec<String> {
        self.inner.vertices().to_vec()
    }

    #[getter]
    fn lengths(&self) -> Vec<f64> {
        self.inner.lengths()
    }

    #[getter]
    fn num_edges(&self) -> usize {
        self.inner.num_edges()
    }

    #[getter]
    fn num_leads(&self) -> usize {
        self.inner.num_leads()
    }

    #[getter]
    fn total_length(&self) -> f64 {
        self.inner.total_length()
    }

    /// Type, g, L and the bounds on d as a dict.
    fn invariants<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let inv = qgraph::compute_invariants(&self.inner);
        let d = PyDict::new(py);
        d.set_item("type", if inv.graph_type == qgraph::graph::GraphType::TypeI { "I" } else { "II" })?;
        d.set_item("g", count_obj(py, inv.g)?)?;
        d.set_item("total_length", inv.total_length)?;
        d.set_item("v0_size", inv.v0_size)?;
        d.set_item("d_lower", inv.d_lower)?;
        d.set_item("d_upper", count_obj(py, inv.d_upper)?)?;
        d.set_item("d_conjecture", count_obj(py, inv.d_conjecture)?)?;
        Ok(d)
    }

    /// Exact secular polynomial in the edge variables, one term per line.
    fn secular_polynomial(&self) -> PyResult<String> {
        Ok(poly::symbolic_secular(&self.inner).map_err(err)?.to_term_list())
    }

    #[pyo3(signature = (include_leads = true))]
    fn secular_function(&self, include_leads: bool) -> PySecular {
        PySecular { inner: SecularFunction::from_graph(&self.inner, include_leads), lengths: self.inner.lengths() }
    }

    fn __repr__(&self) -> String {
        format!("Graph(vertices={}, edges={}, leads={})", self.inner.vertices().len(), self.inner.num_edges(), self.inner.num_leads())
    }
}

/// Secular function det(I - U D(k)).
#[pyclass(name = "SecularFunction", module = "qgraph_py", frozen)]
pub struct PySecular {
    inner: SecularFunction,
    lengths: Vec<f64>,
}

#[pymethods]
impl PySecular {
    fn __call__(&self, k: Complex64) -> Complex64 {
        self.inner.value(k).to_complex()
    }

    /// `(f(k), f'(k))`.
    fn evaluate(&self, k: Complex64) -> (Complex64, Complex64) {
        let ev = self.inner.evaluate(k);
        (ev.f(), ev.f_prime())
    }

    /// log2 |f(k)|, finite where `f(k)` itself under- or overflows.
    fn log2_abs(&self, k: Complex64) -> f64 {
        self.inner.value(k).log2_abs()
    }

    /// Depth below which no resonances lie for this graph's lengths.
    fn band_depth(&self) -> PyResult<f64> {
        finder::band_depth(&self.inner, &FinderConfig::default()).map_err(err)
    }

    /// Zeros in the box, counted with multiplicity.
    #[pyo3(signature = (sigma_min, sigma_max, tau_min, tau_max = 0.0))]
    fn count_zeros(&self, sigma_min: f64, sigma_max: f64, tau_min: f64, tau_max: f64) -> PyResult<i64> {
        let region = SearchRegion::new(sigma_min, sigma_max, tau_min, tau_max).map_err(err)?;
        finder::count_zeros(&self.inner, &region, &FinderConfig::default()).map_err(err)
    }

    /// All resonances with σ in the window and τ in `[tau_min, -tau_cap)`.
    /// `tau_min` defaults to minus the band depth.
    #[pyo3(signature = (sigma_min, sigma_max, tau_min = None, tau_cap = 1e-6))]
    fn resonances(&self, sigma_min: f64, sigma_max: f64, tau_min: Option<f64>, tau_cap: f64) -> PyResult<Vec<PyResonance>> {
        let cfg = FinderConfig { tau_cap, ..FinderConfig::default() };
        let tau_min = match tau_min {
            Some(t) => t,
            None => -finder::band_depth(&self.inner, &cfg).map_err(err)?,
        };
        let region = SearchRegion::new(sigma_min, sigma_max, tau_min, -tau_cap).map_err(err)?;
        let report = finder::find_resonances(&self.inner, &region, &cfg).map_err(err)?;
        Ok(report.resonances.into_iter().map(|inner| PyResonance { inner, lengths: self.lengths.clone() }).collect())
    }

    /// Relative violation of the energy identity at a resonance.
    fn energy_residual(&self, r: &PyResonance) -> PyResult<f64> {
        analysis::energy_residual(&self.inner, &r.inner).map_err(err)
    }
}

/// A resonance `k` with its resonant state.
#[pyclass(name = "Resonance", module = "qgraph_py", frozen)]
pub struct PyResonance {
    inner: finder::Resonance,
    lengths: Vec<f64>,
}

#[pymethods]
impl PyResonance {
    #[getter]
    fn k(&self) -> Complex64 {
        self.inner.k
    }

    #[getter]
    fn residual(&self) -> f64 {
        self.inner.residual
    }

    #[getter]
    fn multiplicity(&self) -> u32 {
        self.inner.multiplicity
    }

    #[getter]
    fn degraded(&self) -> bool {
        self.inner.degraded
    }

    /// Edge amplitudes `a_e`, or `None` when no state was extracted.
    #[getter]
    fn a(&self) -> Option<Vec<Complex64>> {
        self.inner.state.as_ref().map(|s| s.a.clone())
    }

    /// Edge amplitudes `b_e` referenced at the tail vertex.
    #[getter]
    fn b(&self) -> Option<Vec<Complex64>> {
        self.inner.state.as_ref().map(|s| s.b_at_origin(self.inner.k, &self.lengths))
    }

    #[getter]
    fn t_out(&self) -> Option<Vec<Complex64>> {
        self.inner.state.as_ref().map(|s| s.t_out.clone())
    }

    fn __repr__(&self) -> String {
        format!("Resonance(k={}{:+}j, multiplicity={})", self.inner.k.re, self.inner.k.im, self.inner.multiplicity)
    }
}

fn counting_dict<'py>(py: Python<'py>, rep: &CountingReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("k_max", rep.k_max)?;
    d.set_item("eps", rep.eps_grid.iter().map(|p| p.eps).collect::<Vec<_>>())?;
    d.set_item("count", rep.eps_grid.iter().map(|p| p.count).collect::<Vec<_>>())?;
    d.set_item("density", rep.eps_grid.iter().map(|p| p.density).collect::<Vec<_>>())?;
    d.set_item("loglog_slope", rep.loglog_slope)?;
    d.set_item("exponent", rep.exponent)?;
    d.set_item("stable", rep.stable)?;
    d.set_item("h_hat", rep.h_hat)?;
    Ok(d)
}

/// Normalized strip counts N(ε)/K for each ε.
#[pyfunction]
fn n_eps<'py>(py: Python<'py>, graph: &PyGraph, k_max: f64, eps: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
    let sf = SecularFunction::from_graph(&graph.inner, true);
    let (rep, _) = analysis::n_eps_curve(&sf, k_max, &eps, &FinderConfig::default()).map_err(err)?;
    counting_dict(py, &rep)
}

/// Least-squares Weyl slope of the resonance count up to `k_max`.
#[pyfunction]
fn weyl<'py>(py: Python<'py>, graph: &PyGraph, k_max: f64) -> PyResult<Bound<'py, PyDict>> {
    let cfg = FinderConfig::default();
    let sf = SecularFunction::from_graph(&graph.inner, true);
    let depth = finder::band_depth(&sf, &cfg).map_err(err)?;
    let region = SearchRegion::new(0.0, k_max, -depth, -cfg.tau_cap).map_err(err)?;
    let report = finder::find_resonances(&sf, &region, &cfg).map_err(err)?;
    let fit = analysis::weyl_fit(&report.resonances, k_max, graph.inner.total_length()).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("count", fit.count)?;
    d.set_item("slope", fit.slope)?;
    d.set_item("intercept", fit.intercept)?;
    d.set_item("reference_one_sided", fit.reference_one_sided)?;
    d.set_item("reference_two_sided", fit.reference_two_sided)?;
    Ok(d)
}

/// Monte Carlo estimate of the gap constant over random lengths.
#[pyfunction]
#[pyo3(signature = (graph, samples = 8, k_max = 200.0, seed = 0))]
fn estimate_h<'py>(py: Python<'py>, graph: &PyGraph, samples: usize, k_max: f64, seed: u64) -> PyResult<Bound<'py, PyDict>> {
    let est = analysis::estimate_h(&graph.inner, samples, k_max, seed, &FinderConfig::default()).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("h", est.h)?;
    d.set_item("spread", est.spread)?;
    d.set_item("per_sample", est.per_sample)?;
    Ok(d)
}

/// Trace the resonance branch through a real zero of the two-edge torus polynomial.
#[pyfunction]
#[pyo3(signature = (graph, base, u_max = 0.05, u_step = 0.005))]
fn branch_trace<'py>(py: Python<'py>, graph: &PyGraph, base: [f64; 2], u_max: f64, u_step: f64) -> PyResult<Bound<'py, PyDict>> {
    let grid = analysis::default_u_grid(u_max, u_step);
    let t: BranchTrace = analysis::branch_trace(&graph.inner, base, &grid).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("u", t.samples.iter().map(|s| s.u).collect::<Vec<_>>())?;
    d.set_item("b", t.samples.iter().map(|s| s.b).collect::<Vec<_>>())?;
    d.set_item("tau", t.samples.iter().map(|s| s.tau).collect::<Vec<_>>())?;
    d.set_item("c", t.c)?;
    d.set_item("fitted_slope", t.fitted_slope)?;
    d.set_item("tangent_slope", t.tangent_slope)?;
    d.set_item("weights", t.weights)?;
    Ok(d)
}

/// Real compact eigenvalues up to `k_max` with multiplicities.
#[pyfunction]
fn compact_eigenvalues(graph: &PyGraph, k_max: f64) -> PyResult<Vec<(f64, u32)>> {
    analysis::compact_eigenvalues(&graph.inner, k_max, &FinderConfig::default()).map_err(err)
}

/// Run the built-in checks; an empty list runs all of them.
#[pyfunction]
#[pyo3(signature = (ids = Vec::new()))]
fn verify(py: Python<'_>, ids: Vec<u32>) -> Vec<(u32, String, bool, String)> {
    let results = py.detach(|| qgraph::verify::run(&ids, &FinderConfig::default()));
    results.into_iter().map(|r| (r.id, r.name.to_string(), r.passed, r.detail)).collect()
}

#[pymodule]
fn qgraph_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_class::<PySecular>()?;
    m.add_class::<PyResonance>()?;
    m.add_function(wrap_pyfunction!(n_eps, m)?)?;
    m.add_function(wrap_pyfunction!(weyl, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_h, m)?)?;
    m.add_function(wrap_pyfunction!(branch_trace, m)?)?;
    m.add_function(wrap_pyfunction!(compact_eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
