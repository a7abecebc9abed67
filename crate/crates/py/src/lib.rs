//! Python bindings: catalog algebras, ideals, cohomology of `S_3`, criterion
//! fixtures, and the scenario runner. Reports cross the boundary as JSON
//! strings.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use rtlab::criterion;
use rtlab::linalg::Row;
use rtlab::ring_core::{self, LocalAlgebra};
use rtlab_cli::scenario::{self, AlgebraDecl, BaseDecl};
use rtlab_cli::{Options, Oracle, Outcome};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A finite local algebra over `Z/p^e`.
#[pyclass(name = "Algebra", module = "rtlab", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyAlgebra {
    inner: LocalAlgebra,
}

impl PyAlgebra {
    fn element(&self, x: Vec<i64>) -> PyResult<Row> {
        if x.len() != self.inner.rank() {
            return Err(value_error(format!(
                "expected {} coordinates, got {}",
                self.inner.rank(),
                x.len()
            )));
        }
        Ok(self.inner.from_i64s(&x))
    }
}

#[pymethods]
impl PyAlgebra {
    /// Builds a catalog algebra: base, dual_numbers, delta, truncated,
    /// square_zero, monogenic or finite_field.
    #[new]
    #[pyo3(signature = (catalog, p, e, params = Vec::new()))]
    fn new(catalog: String, p: u64, e: u32, params: Vec<i64>) -> PyResult<Self> {
        let decl = AlgebraDecl {
            catalog: Some(catalog),
            params,
            torsion: None,
            structure: None,
            unit: None,
            base: None,
        };
        let inner = scenario::build_algebra(Some(&decl), Some(BaseDecl { p, e }), "algebra")
            .map_err(value_error)?;
        Ok(PyAlgebra { inner })
    }

    #[getter]
    fn p(&self) -> u64 {
        self.inner.base().p()
    }

    #[getter]
    fn rank(&self) -> usize {
        self.inner.rank()
    }

    #[getter]
    fn log_order(&self) -> u32 {
        self.inner.log_order()
    }

    fn is_field(&self) -> bool {
        self.inner.is_field()
    }

    fn is_gorenstein(&self) -> bool {
        ring_core::is_gorenstein(&self.inner)
    }

    fn one(&self) -> Row {
        self.inner.one()
    }

    fn add(&self, x: Vec<i64>, y: Vec<i64>) -> PyResult<Row> {
        Ok(self.inner.add(&self.element(x)?, &self.element(y)?))
    }

    fn mul(&self, x: Vec<i64>, y: Vec<i64>) -> PyResult<Row> {
        Ok(self.inner.mul(&self.element(x)?, &self.element(y)?))
    }

    fn inv(&self, x: Vec<i64>) -> PyResult<Option<Row>> {
        Ok(self.inner.inv(&self.element(x)?))
    }

    fn is_unit(&self, x: Vec<i64>) -> PyResult<bool> {
        Ok(self.inner.is_unit(&self.element(x)?))
    }

    fn ideal(&self, generators: Vec<Vec<i64>>) -> PyResult<PyIdeal> {
        let gens = generators
            .into_iter()
            .map(|g| self.element(g))
            .collect::<PyResult<Vec<_>>>()?;
        Ok(PyIdeal {
            inner: ring_core::Ideal::from_generators(&self.inner, &gens),
        })
    }

    fn max_ideal(&self) -> PyIdeal {
        PyIdeal {
            inner: self.inner.max_ideal(),
        }
    }

    /// Every ideal, by enumeration.
    fn ideals(&self) -> Vec<PyIdeal> {
        ring_core::all_ideals(&self.inner)
            .into_iter()
            .map(|inner| PyIdeal { inner })
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Algebra(p={}, rank={}, |A|=p^{})",
            self.inner.base().p(),
            self.inner.rank(),
            self.inner.log_order()
        )
    }
}

#[pyclass(name = "Ideal", module = "rtlab", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyIdeal {
    inner: ring_core::Ideal,
}

#[pymethods]
impl PyIdeal {
    fn generators(&self) -> Vec<Row> {
        self.inner.generators()
    }

    #[getter]
    fn log_order(&self) -> u32 {
        self.inner.log_order()
    }

    fn is_principal(&self) -> (bool, Option<Row>) {
        self.inner.is_principal()
    }

    fn is_principal_exhaustive(&self) -> (bool, Option<Row>) {
        self.inner.is_principal_exhaustive()
    }

    fn min_generators(&self) -> usize {
        self.inner.minimal_generators().min_generators
    }

    fn min_generators_exhaustive(&self) -> usize {
        self.inner.minimal_generators_exhaustive()
    }

    fn annihilator(&self) -> PyIdeal {
        PyIdeal {
            inner: self.inner.annihilator(),
        }
    }

    fn contains(&self, other: &PyIdeal) -> bool {
        self.inner.contains_ideal(&other.inner)
    }

    fn __eq__(&self, other: &PyIdeal) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("Ideal({:?})", self.inner.generators())
    }
}

/// `(linear, exhaustive)` values of `log_3 |H^1(S_3, F_3(chi))|`.
#[pyfunction]
fn s3_h1(sign: bool) -> (u32, u32) {
    rtlab_cli::demos::s3_h1(sign)
}

/// Criterion reports for the built-in fixtures, as a JSON list.
#[pyfunction]
fn criterion_fixtures() -> PyResult<String> {
    let mut out = Vec::new();
    for f in criterion::positive_fixtures()
        .into_iter()
        .chain(criterion::negative_fixtures())
    {
        let r = criterion::check_cri1(&f.phi, &f.pi).map_err(value_error)?;
        out.push(serde_json::json!({ "name": f.name, "violates": f.violates, "report": r }));
    }
    serde_json::to_string(&out).map_err(value_error)
}

fn finish(o: Outcome) -> PyResult<(i32, String)> {
    match (o.report, o.message) {
        (Some(r), _) => Ok((o.code, rtlab_cli::render(&r))),
        (None, m) => Err(value_error(m.unwrap_or_default())),
    }
}

fn options(oracle: &str, max_order: u64) -> PyResult<Options> {
    let oracle = match oracle {
        "exhaustive" => Oracle::Exhaustive,
        "fast" => Oracle::Fast,
        other => return Err(value_error(format!("unknown oracle {other:?}"))),
    };
    Ok(Options { oracle, max_order })
}

/// Runs a TOML scenario; returns `(exit code, JSON report)`.
#[pyfunction]
#[pyo3(signature = (text, oracle = "exhaustive", max_order = 1 << 20))]
fn run_scenario(
    py: Python<'_>,
    text: &str,
    oracle: &str,
    max_order: u64,
) -> PyResult<(i32, String)> {
    let opts = options(oracle, max_order)?;
    finish(py.detach(|| rtlab_cli::run_text(text, &opts)))
}

#[pyfunction]
#[pyo3(signature = (name, oracle = "exhaustive", max_order = 1 << 20))]
fn demo(py: Python<'_>, name: &str, oracle: &str, max_order: u64) -> PyResult<(i32, String)> {
    let opts = options(oracle, max_order)?;
    finish(py.detach(|| rtlab_cli::demo(name, &opts)))
}

#[pyfunction]
#[pyo3(signature = (kind, count, seed = 1))]
fn fuzz(py: Python<'_>, kind: &str, count: usize, seed: u64) -> PyResult<(i32, String)> {
    finish(py.detach(|| rtlab_cli::fuzz(kind, count, seed)))
}

#[pymodule]
#[pyo3(name = "rtlab")]
fn rtlab_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyAlgebra>()?;
    m.add_class::<PyIdeal>()?;
    m.add_function(wrap_pyfunction!(s3_h1, m)?)?;
    m.add_function(wrap_pyfunction!(criterion_fixtures, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(demo, m)?)?;
    m.add_function(wrap_pyfunction!(fuzz, m)?)?;
    Ok(())
}
