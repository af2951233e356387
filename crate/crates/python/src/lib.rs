//! Python bindings: kernels, combinatorics, simulation and the limit-theory
//! experiments. Long computations release the interpreter lock.

use pyo3::exceptions::{PyMemoryError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;
use volterra_core::combinatorics::{appell_family, bell_number, enumerate_partitions, enumerate_terms, MomentVector};
use volterra_core::kernel::{self, Kernel};
use volterra_core::limit::{self, MemorySpec};
use volterra_core::mc::NoiseLaw;
use volterra_core::quad::QuadratureConfig;
use volterra_core::sim::{self, map_paths, Process, SeparableProcess, TruncatedKernel};
use volterra_core::verify::{self, Manifest};

fn err(e: volterra_core::Error) -> PyErr {
    use volterra_core::Error as E;
    match e {
        E::Resource(m) => PyMemoryError::new_err(m),
        e @ (E::Numeric { .. } | E::Io(_)) => PyRuntimeError::new_err(e.to_string()),
        e => PyValueError::new_err(e.to_string()),
    }
}

fn to_py<'py, T: Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn law(name: &str) -> PyResult<NoiseLaw> {
    NoiseLaw::parse(name).ok_or_else(|| PyValueError::new_err(format!("unknown noise law '{name}'")))
}

fn process(g: &Kernel, m: Option<usize>) -> PyResult<Box<dyn Process>> {
    Ok(match m {
        Some(m) => Box::new(TruncatedKernel::from_kernel(g, m).map_err(err)?),
        None => Box::new(SeparableProcess::new(g, None).map_err(err)?),
    })
}

/// A kernel g: (0, ∞)^k → R.
#[pyclass(name = "Kernel", frozen, module = "volterra")]
struct PyKernel {
    inner: Kernel,
}

#[pymethods]
impl PyKernel {
    /// (x₁+…+x_k)^alpha
    #[staticmethod]
    fn power_sum(k: usize, alpha: f64) -> Self {
        Self { inner: Kernel::power_sum(k, alpha) }
    }

    /// ∏ x_j^{γ_j}
    #[staticmethod]
    fn product_power(gammas: Vec<f64>) -> Self {
        Self { inner: Kernel::product_power(gammas) }
    }

    /// ∏ x_j^{a_j} / Σ x_j^b
    #[staticmethod]
    fn ratio_form(a: Vec<f64>, b: f64) -> PyResult<Self> {
        Ok(Self { inner: Kernel::ratio_form(a, b).map_err(err)? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: kernel::from_json(text).map_err(err)? })
    }

    fn to_json(&self) -> String {
        kernel::to_json(&self.inner)
    }

    fn symmetrized(&self) -> PyResult<Self> {
        Ok(Self { inner: self.inner.symmetrized().map_err(err)? })
    }

    #[getter]
    fn arity(&self) -> usize {
        self.inner.arity()
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha()
    }

    #[getter]
    fn hurst(&self) -> f64 {
        self.inner.hurst()
    }

    fn __call__(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.eval(&x).map_err(err)
    }

    /// Class conditions as a dict; `valid` is False rather than an error.
    fn validate<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let rep = py.detach(|| kernel::validate_ghkb(&self.inner));
        to_py(py, &rep)
    }

    /// The r-fold diagonal trace at x, with an error estimate.
    fn trace(&self, r: usize, x: Vec<f64>) -> PyResult<(f64, f64)> {
        let q = QuadratureConfig::default();
        let t = kernel::trace_kernel(&self.inner, r, &q).map_err(err)?;
        let e = t.eval_with_error(&x).map_err(err)?;
        Ok((e.value, e.error))
    }

    /// ‖h_t‖² of the r-fold trace.
    #[pyo3(signature = (t = 1.0, r = 0))]
    fn htnorm(&self, py: Python<'_>, t: f64, r: usize) -> PyResult<f64> {
        py.detach(|| {
            let q = QuadratureConfig::default();
            let tr = kernel::trace_kernel(&self.inner, r, &q)?;
            Ok(kernel::l2_norm_h_t(&tr, t, &q)?.value)
        })
        .map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Kernel({})", kernel::to_json(&self.inner))
    }
}

/// Set partitions of {1..k} in canonical brace notation.
#[pyfunction]
fn partitions(k: usize) -> PyResult<Vec<String>> {
    Ok(enumerate_partitions(k).map_err(err)?.iter().map(|p| p.to_string()).collect())
}

#[pyfunction(name = "bell_number")]
fn bell(k: usize) -> u64 {
    bell_number(k)
}

/// Appell polynomials A_0..A_K as dicts {p, coefficients, polynomial};
/// coefficients are exact rationals printed as strings, lowest power first.
#[pyfunction]
fn appell<'py>(py: Python<'py>, moments: &Bound<'py, PyAny>, order: usize) -> PyResult<Bound<'py, PyAny>> {
    let mv = if let Ok(name) = moments.extract::<String>() {
        law(&name)?.moments(order)
    } else {
        MomentVector::from_f64(&moments.extract::<Vec<f64>>()?).map_err(err)?
    };
    let fam = appell_family(&mv, order).map_err(err)?;
    let rows: Vec<serde_json::Value> = (0..=order)
        .map(|p| {
            serde_json::json!({
                "p": p,
                "coefficients": fam.coeffs(p).iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                "polynomial": fam.format(p),
            })
        })
        .collect();
    to_py(py, &rows)
}

/// Terms of the chaos decomposition as dicts {partition, j, r, m, regime, c_coeff}.
#[pyfunction]
#[pyo3(signature = (k, noise = "gaussian"))]
fn terms<'py>(py: Python<'py>, k: usize, noise: &str) -> PyResult<Bound<'py, PyAny>> {
    let list = enumerate_terms(k, &law(noise)?.moments(k)).map_err(err)?;
    let rows: Vec<_> = list.iter().map(|t| t.row()).collect();
    to_py(py, &rows)
}

/// Path `index` of the run rooted at `seed`: X(1..n). Without `m` the
/// untruncated process is sampled.
#[pyfunction]
#[pyo3(signature = (kernel, n, m = None, seed = 1, index = 0, noise = "gaussian"))]
fn simulate(
    py: Python<'_>,
    kernel: &PyKernel,
    n: usize,
    m: Option<usize>,
    seed: u64,
    index: u64,
    noise: &str,
) -> PyResult<Vec<f64>> {
    let law = law(noise)?;
    match m {
        Some(m) => {
            let a = TruncatedKernel::from_kernel(&kernel.inner, m).map_err(err)?;
            Ok(py.detach(|| sim::simulate_path(&a, law, n, seed, index)).map_err(err)?.x)
        }
        None => {
            let p = SeparableProcess::new(&kernel.inner, None).map_err(err)?;
            let mut s = volterra_core::mc::derive_stream(seed, &[index]);
            Ok(py.detach(|| p.sample(law, n, &mut s)))
        }
    }
}

/// (X, eps) for a truncated kernel; eps covers ε_{1−M}..ε_N.
#[pyfunction]
#[pyo3(signature = (kernel, n, m, seed = 1, index = 0, noise = "gaussian"))]
fn simulate_with_eps(
    kernel: &PyKernel,
    n: usize,
    m: usize,
    seed: u64,
    index: u64,
    noise: &str,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let a = TruncatedKernel::from_kernel(&kernel.inner, m).map_err(err)?;
    let p = sim::simulate_path(&a, law(noise)?, n, seed, index).map_err(err)?;
    Ok((p.x, p.eps))
}

/// E X(n), exact.
#[pyfunction]
#[pyo3(signature = (kernel, m = None, noise = "gaussian"))]
fn exact_mean(kernel: &PyKernel, m: Option<usize>, noise: &str) -> PyResult<f64> {
    let spec = volterra_core::mc::NoiseSpec::for_order(law(noise)?, kernel.inner.arity());
    process(&kernel.inner, m)?.mean(&spec).map_err(err)
}

/// Memory classification from the kernel's exponents.
#[pyfunction]
#[pyo3(signature = (kernel, off_diagonal = false))]
fn classify<'py>(py: Python<'py>, kernel: &PyKernel, off_diagonal: bool) -> PyResult<Bound<'py, PyAny>> {
    let spec = match &kernel.inner {
        Kernel::ProductPower { gammas } => MemorySpec::PowerBounds { gammas: gammas.clone(), off_diagonal },
        g => MemorySpec::Ghk { k: g.arity(), alpha: g.alpha() },
    };
    to_py(py, &limit::classify_memory(&spec))
}

/// Var Z(t) of the limit of N^{−H}(S_⌊Nt⌋ − E S_⌊Nt⌋), and its description.
#[pyfunction]
#[pyo3(signature = (kernel, t = 1.0))]
fn limit_variance(py: Python<'_>, kernel: &PyKernel, t: f64) -> PyResult<(f64, String)> {
    py.detach(|| {
        let q = QuadratureConfig::default();
        let spec = limit::build_limit_spec(&kernel.inner, &q)?;
        Ok((spec.variance(t, &q)?, spec.describe()))
    })
    .map_err(err)
}

/// Autocovariance estimates over `paths` paths of length n, with a log-log
/// fit over lags lo..=hi.
#[pyfunction]
#[pyo3(signature = (kernel, n, paths, lo, hi, m = None, seed = 1, noise = "gaussian"))]
#[allow(clippy::too_many_arguments)]
fn acf<'py>(
    py: Python<'py>,
    kernel: &PyKernel,
    n: usize,
    paths: usize,
    lo: usize,
    hi: usize,
    m: Option<usize>,
    seed: u64,
    noise: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let p = process(&kernel.inner, m)?;
    let law = law(noise)?;
    let series = py
        .detach(|| {
            let xs = map_paths(&*p, law, n, paths, seed, |x| x.to_vec());
            let mut s = limit::empirical_acf(&xs, hi)?;
            s.fit_window(lo, hi)?;
            Ok(s)
        })
        .map_err(err)?;
    to_py(py, &series)
}

/// ‖Q‖_p / ‖Q‖_2 for the off-diagonal chaos of the truncated kernel.
#[pyfunction]
#[pyo3(signature = (kernel, m, p, samples, seed = 1, bootstrap = 0, noise = "gaussian"))]
#[allow(clippy::too_many_arguments)]
fn hypercontractivity<'py>(
    py: Python<'py>,
    kernel: &PyKernel,
    m: usize,
    p: f64,
    samples: usize,
    seed: u64,
    bootstrap: usize,
    noise: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let a = TruncatedKernel::from_kernel(&kernel.inner, m).map_err(err)?;
    let law = law(noise)?;
    let rep = py
        .detach(|| limit::hypercontractivity_ratio(&a, law, p, samples, seed, bootstrap))
        .map_err(err)?;
    to_py(py, &rep)
}

/// The built-in tolerance manifest as JSON text.
#[pyfunction]
fn manifest() -> &'static str {
    Manifest::builtin_text()
}

/// Runs acceptance criteria (all by default) and returns their outcomes.
#[pyfunction]
#[pyo3(signature = (criteria = None, manifest = None))]
fn run_criteria<'py>(
    py: Python<'py>,
    criteria: Option<Vec<usize>>,
    manifest: Option<&str>,
) -> PyResult<Bound<'py, PyAny>> {
    let man = match manifest {
        Some(text) => Manifest::parse(text).map_err(err)?,
        None => Manifest::builtin(),
    };
    let ids = criteria.unwrap_or_else(|| verify::CRITERIA.iter().map(|c| c.0).collect());
    let outcomes: Vec<_> = py.detach(|| ids.iter().map(|&id| verify::run_criterion(id, &man)).collect());
    to_py(py, &outcomes)
}

#[pymodule]
fn _volterra(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", volterra_core::VERSION)?;
    m.add_class::<PyKernel>()?;
    m.add_function(wrap_pyfunction!(partitions, m)?)?;
    m.add_function(wrap_pyfunction!(bell, m)?)?;
    m.add_function(wrap_pyfunction!(appell, m)?)?;
    m.add_function(wrap_pyfunction!(terms, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_with_eps, m)?)?;
    m.add_function(wrap_pyfunction!(exact_mean, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(limit_variance, m)?)?;
    m.add_function(wrap_pyfunction!(acf, m)?)?;
    m.add_function(wrap_pyfunction!(hypercontractivity, m)?)?;
    m.add_function(wrap_pyfunction!(manifest, m)?)?;
    m.add_function(wrap_pyfunction!(run_criteria, m)?)?;
    Ok(())
}
