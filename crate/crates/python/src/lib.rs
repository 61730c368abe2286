use commoneig::classical::{eigenspaces_complex, perron_eigenpair, to_complex};
use commoneig::cli::status_of;
use commoneig::io::Status;
use commoneig::semigroup::{self, analyze, closure, layer_indices};
use commoneig::tropical::{eigencone, kleene_star, max_cycle_mean, principal_eigenpair, tropical_spectrum};
use commoneig::{
    AnyMatrix, Complex64, DomainTag, EigenPair, Error, MaxCone, MaxTimes, Matrix, NonNeg, Scalar, Semiring, SemigroupSpec, Vector,
    DEFAULT_TOL,
};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn py_err(e: Error) -> PyErr {
    match status_of(&e) {
        Status::InvalidInput => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn scalar_py(py: Python<'_>, s: Scalar) -> PyResult<Py<PyAny>> {
    Ok(match s {
        Scalar::Complex(z) => z.into_pyobject(py)?.into_any().unbind(),
        Scalar::NonnegReal(x) | Scalar::MaxTimes(x) => x.into_pyobject(py)?.into_any().unbind(),
    })
}

fn vector_py<S: Semiring>(py: Python<'_>, v: &Vector<S>) -> PyResult<Vec<Py<PyAny>>> {
    v.iter().map(|x| scalar_py(py, x.to_scalar())).collect()
}

fn entry<S: Semiring>(domain: DomainTag, x: &Bound<'_, PyAny>) -> PyResult<S> {
    let s = match domain {
        DomainTag::Complex => Scalar::Complex(x.extract::<Complex64>()?),
        DomainTag::NonnegReal => Scalar::NonnegReal(x.extract::<f64>()?),
        DomainTag::MaxTimes => Scalar::MaxTimes(x.extract::<f64>()?),
    };
    S::try_from_scalar(s).map_err(py_err)
}

fn typed_rows<S: Semiring>(domain: DomainTag, rows: &[Vec<Bound<'_, PyAny>>]) -> PyResult<Matrix<S>> {
    let rows = rows
        .iter()
        .map(|r| r.iter().map(|x| entry::<S>(domain, x)).collect::<PyResult<Vec<S>>>())
        .collect::<PyResult<Vec<_>>>()?;
    Matrix::from_rows(rows).map_err(py_err)
}

/// A matrix over one of the domains "complex", "nonneg" or "max-times".
#[pyclass(name = "Matrix", module = "commoneig", frozen, from_py_object)]
#[derive(Clone)]
struct PyMatrix {
    inner: AnyMatrix,
}

#[pymethods]
impl PyMatrix {
    #[new]
    fn new(domain: &str, rows: Vec<Vec<Bound<'_, PyAny>>>) -> PyResult<Self> {
        let domain: DomainTag = domain.parse().map_err(py_err)?;
        let inner = match domain {
            DomainTag::Complex => AnyMatrix::Complex(typed_rows(domain, &rows)?),
            DomainTag::NonnegReal => AnyMatrix::NonnegReal(typed_rows(domain, &rows)?),
            DomainTag::MaxTimes => AnyMatrix::MaxTimes(typed_rows(domain, &rows)?),
        };
        Ok(PyMatrix { inner })
    }

    #[getter]
    fn domain(&self) -> String {
        self.inner.domain().to_string()
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        self.inner.shape()
    }

    fn to_list(&self, py: Python<'_>) -> PyResult<Vec<Vec<Py<PyAny>>>> {
        let (r, c) = self.inner.shape();
        (0..r).map(|i| (0..c).map(|j| scalar_py(py, self.inner.get(i, j))).collect()).collect()
    }

    fn __matmul__(&self, other: &PyMatrix) -> PyResult<PyMatrix> {
        let inner = match (&self.inner, &other.inner) {
            (AnyMatrix::Complex(a), AnyMatrix::Complex(b)) => a.mul(b).map(AnyMatrix::Complex),
            (AnyMatrix::NonnegReal(a), AnyMatrix::NonnegReal(b)) => a.mul(b).map(AnyMatrix::NonnegReal),
            (AnyMatrix::MaxTimes(a), AnyMatrix::MaxTimes(b)) => a.mul(b).map(AnyMatrix::MaxTimes),
            (a, b) => Err(Error::DomainMismatch { left: a.domain(), right: b.domain() }),
        };
        Ok(PyMatrix { inner: inner.map_err(py_err)? })
    }

    fn power(&self, t: u32) -> PyResult<PyMatrix> {
        let inner = match &self.inner {
            AnyMatrix::Complex(a) => a.power(t).map(AnyMatrix::Complex),
            AnyMatrix::NonnegReal(a) => a.power(t).map(AnyMatrix::NonnegReal),
            AnyMatrix::MaxTimes(a) => a.power(t).map(AnyMatrix::MaxTimes),
        };
        Ok(PyMatrix { inner: inner.map_err(py_err)? })
    }

    #[pyo3(signature = (other, tol = DEFAULT_TOL))]
    fn commutes_with(&self, other: &PyMatrix, tol: f64) -> PyResult<bool> {
        match (&self.inner, &other.inner) {
            (AnyMatrix::Complex(a), AnyMatrix::Complex(b)) => a.commutes_with(b, tol),
            (AnyMatrix::NonnegReal(a), AnyMatrix::NonnegReal(b)) => a.commutes_with(b, tol),
            (AnyMatrix::MaxTimes(a), AnyMatrix::MaxTimes(b)) => a.commutes_with(b, tol),
            (a, b) => Err(Error::DomainMismatch { left: a.domain(), right: b.domain() }),
        }
        .map_err(py_err)
    }

    /// Largest modulus of an entry.
    fn norm_inf(&self) -> f64 {
        match &self.inner {
            AnyMatrix::Complex(a) => a.norm_inf(),
            AnyMatrix::NonnegReal(a) => a.norm_inf(),
            AnyMatrix::MaxTimes(a) => a.norm_inf(),
        }
    }

    fn __eq__(&self, other: &PyMatrix) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        let (r, c) = self.inner.shape();
        format!("Matrix(domain={:?}, shape=({r}, {c}))", self.domain())
    }
}

#[pyclass(name = "EigenPair", module = "commoneig", frozen, get_all)]
struct PyEigenPair {
    #[pyo3(name = "lambda_")]
    lambda: Py<PyAny>,
    vector: Vec<Py<PyAny>>,
    residual: f64,
    method: String,
}

impl PyEigenPair {
    fn from_pair<S: Semiring>(py: Python<'_>, p: &EigenPair<S>) -> PyResult<Self> {
        Ok(PyEigenPair {
            lambda: scalar_py(py, p.lambda.to_scalar())?,
            vector: vector_py(py, &p.vector)?,
            residual: p.residual,
            method: p.method.name().to_string(),
        })
    }
}

#[pymethods]
impl PyEigenPair {
    fn __repr__(&self) -> String {
        format!("EigenPair(lambda_={}, residual={:.3e}, method={:?})", self.lambda, self.residual, self.method)
    }
}

fn square(m: &PyMatrix) -> PyResult<()> {
    let (r, c) = m.inner.shape();
    if r != c {
        return Err(py_err(Error::NotSquare { rows: r, cols: c }));
    }
    Ok(())
}

fn largest_complex(a: &Matrix<Complex64>, tol: f64) -> commoneig::Result<EigenPair<Complex64>> {
    let space = eigenspaces_complex(a, tol)?
        .into_iter()
        .find(|s| !s.basis.is_empty())
        .ok_or_else(|| Error::InvariantViolation("no eigenspace found".into()))?;
    EigenPair::verified(a, space.lambda, space.basis[0].normalized_max(), commoneig::Method::Classical, tol)
}

/// One eigenpair: principal (max-times), Perron (nonneg) or of largest modulus (complex).
#[pyfunction]
#[pyo3(signature = (m, tol = DEFAULT_TOL, max_iter = 10_000))]
fn eig(py: Python<'_>, m: &PyMatrix, tol: f64, max_iter: usize) -> PyResult<PyEigenPair> {
    square(m)?;
    match &m.inner {
        AnyMatrix::MaxTimes(a) => PyEigenPair::from_pair(py, &principal_eigenpair(a, tol).map_err(py_err)?),
        AnyMatrix::NonnegReal(a) => PyEigenPair::from_pair(py, &perron_eigenpair(a, tol, max_iter).map_err(py_err)?),
        AnyMatrix::Complex(a) => PyEigenPair::from_pair(py, &largest_complex(a, tol).map_err(py_err)?),
    }
}

/// Every eigenvalue with one witnessing eigenvector; real domains other
/// than max-times are solved over the complex numbers.
#[pyfunction]
#[pyo3(signature = (m, tol = DEFAULT_TOL))]
fn spectrum(py: Python<'_>, m: &PyMatrix, tol: f64) -> PyResult<Vec<PyEigenPair>> {
    square(m)?;
    let complex = |a: &Matrix<Complex64>| -> PyResult<Vec<PyEigenPair>> {
        let mut out = Vec::new();
        for space in eigenspaces_complex(a, tol).map_err(py_err)? {
            if let Some(v) = space.basis.first() {
                let pair = EigenPair::verified(a, space.lambda, v.normalized_max(), commoneig::Method::Classical, tol).map_err(py_err)?;
                out.push(PyEigenPair::from_pair(py, &pair)?);
            }
        }
        Ok(out)
    };
    match &m.inner {
        AnyMatrix::MaxTimes(a) => {
            let mut out = Vec::new();
            for lambda in tropical_spectrum(a).map_err(py_err)? {
                let cone = eigencone(a, lambda, tol)
                    .map_err(py_err)?
                    .ok_or_else(|| PyRuntimeError::new_err(format!("no eigenvector for eigenvalue {}", lambda.0)))?;
                let v = cone.generator(0).normalized_max();
                let pair = EigenPair::verified(a, lambda, v, commoneig::Method::KleeneStar, tol).map_err(py_err)?;
                out.push(PyEigenPair::from_pair(py, &pair)?);
            }
            Ok(out)
        }
        AnyMatrix::NonnegReal(a) => complex(&to_complex(a).map_err(py_err)?),
        AnyMatrix::Complex(a) => complex(a),
    }
}

fn max_times(m: &PyMatrix) -> PyResult<&Matrix<MaxTimes>> {
    match &m.inner {
        AnyMatrix::MaxTimes(a) => Ok(a),
        other => Err(py_err(Error::UnsupportedDomain(other.domain()))),
    }
}

/// Largest geometric cycle mean of a max-times matrix.
#[pyfunction(name = "max_cycle_mean")]
fn max_cycle_mean_of(m: &PyMatrix) -> PyResult<f64> {
    Ok(max_cycle_mean(max_times(m)?).map_err(py_err)?.0 .0)
}

/// `I + A + A^2 + ...` over max-times; fails when some cycle mean exceeds 1.
#[pyfunction(name = "kleene_star")]
fn kleene_star_of(m: &PyMatrix) -> PyResult<PyMatrix> {
    Ok(PyMatrix { inner: AnyMatrix::MaxTimes(kleene_star(max_times(m)?).map_err(py_err)?) })
}

/// Max cone spanned by the columns of a max-times matrix.
#[pyclass(name = "MaxCone", module = "commoneig", frozen)]
struct PyMaxCone {
    inner: MaxCone,
}

#[pymethods]
impl PyMaxCone {
    #[new]
    fn new(generators: &PyMatrix) -> PyResult<Self> {
        Ok(PyMaxCone { inner: MaxCone::new(max_times(generators)?.clone()).map_err(py_err)? })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Greatest element of the cone below `y`.
    fn project(&self, y: Vec<f64>) -> PyResult<Vec<f64>> {
        let y = Vector::from_f64(&y).map_err(py_err)?;
        Ok(self.inner.project(&y).map_err(py_err)?.to_f64())
    }

    #[pyo3(signature = (x, tol = DEFAULT_TOL))]
    fn contains(&self, x: Vec<f64>, tol: f64) -> PyResult<bool> {
        self.inner.member(&Vector::from_f64(&x).map_err(py_err)?, tol).map_err(py_err)
    }

    #[pyo3(signature = (a, tol = DEFAULT_TOL))]
    fn is_invariant(&self, a: &PyMatrix, tol: f64) -> PyResult<bool> {
        self.inner.is_invariant(max_times(a)?, tol).map_err(py_err)
    }

    /// Eigenvector of `a` inside the cone, found through the induced matrix.
    #[pyo3(signature = (a, tol = DEFAULT_TOL))]
    fn eigenvector(&self, py: Python<'_>, a: &PyMatrix, tol: f64) -> PyResult<PyEigenPair> {
        let pair = commoneig::tropical::eigenvector_in_cone(&self.inner, max_times(a)?, tol).map_err(py_err)?;
        PyEigenPair::from_pair(py, &pair)
    }
}

#[pyclass(name = "CommonEigenReport", module = "commoneig", frozen, get_all)]
struct PyCommonEigenReport {
    vector: Vec<Py<PyAny>>,
    lambdas: Vec<Py<PyAny>>,
    residuals: Vec<f64>,
    classification: String,
    pathway: Vec<String>,
    warnings: Vec<String>,
}

#[pymethods]
impl PyCommonEigenReport {
    fn __repr__(&self) -> String {
        format!("CommonEigenReport(classification={:?}, residuals={:?})", self.classification, self.residuals)
    }
}

enum Family {
    Complex(SemigroupSpec<Complex64>),
    NonnegReal(SemigroupSpec<NonNeg>),
    MaxTimes(SemigroupSpec<MaxTimes>),
}

macro_rules! on_family {
    ($f:expr, $s:ident => $body:expr) => {
        match $f {
            Family::Complex($s) => $body,
            Family::NonnegReal($s) => $body,
            Family::MaxTimes($s) => $body,
        }
    };
}

fn spec_of<S: Semiring>(ms: &[PyMatrix], caps: (usize, usize, usize), tol: f64) -> PyResult<SemigroupSpec<S>>
where
    Matrix<S>: TryFrom<AnyMatrix, Error = Error>,
{
    let generators = ms.iter().map(|m| Matrix::<S>::try_from(m.inner.clone())).collect::<Result<Vec<_>, _>>().map_err(py_err)?;
    let spec = SemigroupSpec { generators, closure_cap: caps.0, word_cap: caps.1, quasi_bound: caps.2, tol };
    spec.validate().map_err(py_err)?;
    Ok(spec)
}

/// The semigroup generated by a finite family of square matrices.
#[pyclass(name = "Semigroup", module = "commoneig", frozen)]
struct PySemigroup {
    family: Family,
}

#[pymethods]
impl PySemigroup {
    #[new]
    #[pyo3(signature = (generators, closure_cap = 512, word_cap = 12, quasi_bound = 8, tol = DEFAULT_TOL))]
    fn new(generators: Vec<PyMatrix>, closure_cap: usize, word_cap: usize, quasi_bound: usize, tol: f64) -> PyResult<Self> {
        let first = generators.first().ok_or_else(|| PyValueError::new_err("at least one generator is required"))?;
        let caps = (closure_cap, word_cap, quasi_bound);
        let family = match first.inner.domain() {
            DomainTag::Complex => Family::Complex(spec_of(&generators, caps, tol)?),
            DomainTag::NonnegReal => Family::NonnegReal(spec_of(&generators, caps, tol)?),
            DomainTag::MaxTimes => Family::MaxTimes(spec_of(&generators, caps, tol)?),
        };
        Ok(PySemigroup { family })
    }

    #[getter]
    fn domain(&self) -> String {
        on_family!(&self.family, s => s.domain().to_string())
    }

    /// "commutative", "nilpotent(k)", "quasinilpotent(k)" or "unknown".
    fn classify(&self) -> PyResult<String> {
        on_family!(&self.family, s => Ok(semigroup::classify(s).map_err(py_err)?.to_string()))
    }

    /// Number of distinct elements found and whether the search hit a cap.
    fn closure_size(&self) -> PyResult<(usize, bool)> {
        on_family!(&self.family, s => {
            let c = closure(s).map_err(py_err)?;
            Ok((c.len(), c.truncated))
        })
    }

    /// Distinct elements of the product sets of words of length k, k = 1..=up_to.
    #[pyo3(signature = (up_to = None))]
    fn layer_sizes(&self, up_to: Option<usize>) -> PyResult<Vec<usize>> {
        on_family!(&self.family, s => {
            let c = closure(s).map_err(py_err)?;
            (1..=up_to.unwrap_or(s.quasi_bound))
                .map(|k| layer_indices(&c, k).map(|(l, _)| l.len()).map_err(py_err))
                .collect()
        })
    }

    /// Warnings raised while building the closure and its layers.
    fn warnings(&self) -> PyResult<Vec<String>> {
        on_family!(&self.family, s => Ok(analyze(s).map_err(py_err)?.warnings))
    }

    fn common_eigenvector(&self, py: Python<'_>) -> PyResult<PyCommonEigenReport> {
        on_family!(&self.family, s => {
            let r = semigroup::common_eigenvector(s).map_err(py_err)?;
            Ok(PyCommonEigenReport {
                vector: vector_py(py, &r.vector)?,
                lambdas: r.lambdas.iter().map(|l| scalar_py(py, l.to_scalar())).collect::<PyResult<_>>()?,
                residuals: r.residuals,
                classification: r.classification.to_string(),
                pathway: r.pathway,
                warnings: r.warnings,
            })
        })
    }

    fn __len__(&self) -> usize {
        on_family!(&self.family, s => s.generators.len())
    }
}

/// Parse a matrix file in the command-line JSON format.
#[pyfunction]
fn load_matrix(path: std::path::PathBuf) -> PyResult<PyMatrix> {
    Ok(PyMatrix { inner: commoneig::io::parse_matrix_file(path).map_err(py_err)? })
}

#[pyfunction]
#[pyo3(signature = (path, m, name = None))]
fn save_matrix(path: std::path::PathBuf, m: &PyMatrix, name: Option<String>) -> PyResult<()> {
    commoneig::io::write_matrix_file(path, &m.inner, name).map_err(py_err)
}

#[pymodule]
#[pyo3(name = "commoneig")]
fn commoneig_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMatrix>()?;
    m.add_class::<PyEigenPair>()?;
    m.add_class::<PyMaxCone>()?;
    m.add_class::<PySemigroup>()?;
    m.add_class::<PyCommonEigenReport>()?;
    m.add_function(wrap_pyfunction!(eig, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(max_cycle_mean_of, m)?)?;
    m.add_function(wrap_pyfunction!(kleene_star_of, m)?)?;
    m.add_function(wrap_pyfunction!(load_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(save_matrix, m)?)?;
    m.add("DEFAULT_TOL", DEFAULT_TOL)?;
    Ok(())
}
