//! Python bindings: β-shift admissibility, transfer-operator spectra, the
//! orbit oracle and the zero-temperature pipeline.

use std::sync::Arc;

use betatherm_core::beta::greedy_expansion as core_greedy;
use betatherm_core::involution::{check_duality, check_marginals, random_bilateral_pairs};
use betatherm_core::oracle::max_orbit_mean;
use betatherm_core::zerotemp::{self, TemperatureGrid};
use betatherm_core::{parse_config, BetaSpec, Error, JobConfig, Pipeline, Side, TransferOperator, Word};
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use pyo3::IntoPyObjectExt;
use serde_json::{json, Value};

create_exception!(betatherm, BetathermError, PyException);

fn to_py(e: Error) -> PyErr {
    BetathermError::new_err((e.to_string(), e.exit_code()))
}

fn value_to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    match v {
        Value::Null => Ok(py.None().into_bound(py)),
        Value::Bool(b) => b.into_bound_py_any(py),
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_bound_py_any(py),
            None => n.as_f64().unwrap_or(f64::NAN).into_bound_py_any(py),
        },
        Value::String(s) => s.into_bound_py_any(py),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(value_to_py(py, item)?)?;
            }
            Ok(list.into_any())
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, item) in map {
                dict.set_item(k, value_to_py(py, item)?)?;
            }
            Ok(dict.into_any())
        }
    }
}

fn side(transpose: bool) -> Side {
    if transpose {
        Side::Transpose
    } else {
        Side::Forward
    }
}

/// A β-shift given by `digits` (quasi-greedy expansion of 1) or by `value`.
#[pyclass(frozen, module = "betatherm")]
struct BetaShift {
    spec: BetaSpec,
}

#[pymethods]
impl BetaShift {
    #[new]
    #[pyo3(signature = (digits=None, value=None, max_digits=64))]
    fn new(digits: Option<&str>, value: Option<f64>, max_digits: usize) -> PyResult<Self> {
        let spec = match (digits, value) {
            (Some(d), None) => BetaSpec::from_digits_str(d),
            (None, Some(b)) => BetaSpec::from_value(b, max_digits),
            _ => return Err(BetathermError::new_err(("give exactly one of digits and value", 1))),
        }
        .map_err(to_py)?;
        Ok(BetaShift { spec })
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.spec.beta()
    }

    #[getter]
    fn xbeta(&self) -> String {
        self.spec.xbeta().to_string()
    }

    #[getter]
    fn alphabet_top(&self) -> u8 {
        self.spec.alphabet_top()
    }

    #[pyo3(signature = (word, transpose=false))]
    fn is_admissible(&self, word: &str, transpose: bool) -> PyResult<bool> {
        let w: Word = word.parse().map_err(to_py)?;
        self.spec.is_admissible(w.digits(), side(transpose)).map_err(to_py)
    }

    #[pyo3(signature = (n, transpose=false))]
    fn language(&self, n: usize, transpose: bool) -> PyResult<Vec<String>> {
        let words = self.spec.enumerate_language(n, side(transpose)).map_err(to_py)?;
        Ok(words.iter().map(|w| w.to_string()).collect())
    }

    fn __repr__(&self) -> String {
        format!("BetaShift(xbeta={:?}, beta={})", self.spec.xbeta().to_string(), self.spec.beta())
    }
}

#[pyfunction]
fn greedy_expansion(alpha: f64, beta: f64, n: usize) -> PyResult<String> {
    core_greedy(alpha, beta, n).map(|w| w.to_string()).map_err(to_py)
}

/// A parsed job configuration with its β-shift and potential.
#[pyclass(frozen, module = "betatherm")]
struct Job {
    cfg: JobConfig,
}

impl Job {
    fn pipeline(&self, depth: usize) -> PyResult<Arc<Pipeline>> {
        let (spec, a) = self.cfg.build().map_err(to_py)?;
        Ok(Arc::new(Pipeline::new(&spec, &a, depth).map_err(to_py)?))
    }

    fn grid(&self, t_grid: Option<&str>) -> PyResult<TemperatureGrid> {
        match t_grid {
            Some(s) => s.parse().map_err(to_py),
            None => Ok(self.cfg.t_grid.clone()),
        }
    }

    fn report(&self, depth: usize, t_grid: Option<&str>) -> PyResult<(zerotemp::ZeroTempReport, betatherm_core::OracleResult)> {
        let (spec, a) = self.cfg.build().map_err(to_py)?;
        let oracle = max_orbit_mean(&a, self.cfg.max_period, &spec).map_err(to_py)?;
        let report = zerotemp::run(
            self.pipeline(depth)?,
            &self.grid(t_grid)?,
            &self.cfg.zero_temp_options(),
            Some(&oracle),
        )
        .map_err(to_py)?;
        Ok((report, oracle))
    }
}

#[pymethods]
impl Job {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Job {
            cfg: parse_config(text).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| to_py(Error::Io(format!("{path}: {e}"))))?;
        Self::from_json(&text)
    }

    #[getter]
    fn depth(&self) -> usize {
        self.cfg.depth
    }

    fn to_json(&self) -> String {
        self.cfg.to_canonical_string()
    }

    #[pyo3(signature = (t=1.0))]
    fn spectrum<'py>(&self, py: Python<'py>, t: f64) -> PyResult<Bound<'py, PyAny>> {
        let (spec, a) = self.cfg.build().map_err(to_py)?;
        let op = TransferOperator::new(&a, &spec, self.cfg.depth).map_err(to_py)?;
        let st = py
            .detach(|| op.power_iteration(t, self.cfg.power_options()))
            .map_err(to_py)?;
        let words: Vec<String> = st.language.words().iter().map(|w| w.to_string()).collect();
        let v = json!({
            "t": t,
            "lambda": st.lambda,
            "log_lambda": st.log_lambda,
            "residual": st.residual,
            "iterations": st.iterations,
            "words": words,
            "psi": st.psi().values,
            "rho": st.rho().masses,
            "gibbs": st.gibbs().masses,
        });
        value_to_py(py, &v)
    }

    #[pyo3(signature = (t=1.0, pairs=100))]
    fn involution<'py>(&self, py: Python<'py>, t: f64, pairs: usize) -> PyResult<Bound<'py, PyAny>> {
        let pl = self.pipeline(self.cfg.depth)?;
        let opts = self.cfg.power_options();
        let seed = self.cfg.seed;
        let v = py
            .detach(|| -> Result<Value, Error> {
                let spec = pl.spec();
                let mut worst: f64 = 0.0;
                for p in random_bilateral_pairs(spec, pairs, 4, seed)? {
                    worst = worst.max(check_duality(
                        pl.potential(),
                        pl.transpose_potential(),
                        &p.past,
                        &p.future,
                        pl.kernel_spec(),
                        spec,
                    )?);
                }
                let st = pl.state(t, opts)?;
                let (dp, df) = check_marginals(&pl.coupling(&st), &st.transpose.gibbs(), &st.forward.gibbs());
                Ok(json!({
                    "t": t,
                    "c_A": st.log_c,
                    "duality_max_residual": worst,
                    "marginal_defects": { "past": dp, "future": df },
                }))
            })
            .map_err(to_py)?;
        value_to_py(py, &v)
    }

    #[pyo3(signature = (max_period=None))]
    fn oracle<'py>(&self, py: Python<'py>, max_period: Option<usize>) -> PyResult<Bound<'py, PyAny>> {
        let (spec, a) = self.cfg.build().map_err(to_py)?;
        let r = max_orbit_mean(&a, max_period.unwrap_or(self.cfg.max_period), &spec).map_err(to_py)?;
        let v = json!({
            "m": r.m,
            "argmax_cycles": r.argmax.iter().map(|o| o.word.to_string()).collect::<Vec<_>>(),
            "unique": r.unique,
        });
        value_to_py(py, &v)
    }

    #[pyo3(signature = (t_grid=None))]
    fn zerotemp<'py>(&self, py: Python<'py>, t_grid: Option<&str>) -> PyResult<Bound<'py, PyAny>> {
        let (report, _) = self.report(self.cfg.depth, t_grid)?;
        let mut v = serde_json::to_value(report.summary()).expect("summary serializes");
        v["t"] = json!(report.rows.iter().map(|r| r.t).collect::<Vec<_>>());
        v["log_lambda_over_t"] = json!(report.rows.iter().map(|r| r.log_lambda_over_t).collect::<Vec<_>>());
        v["c_over_t"] = json!(report.rows.iter().map(|r| r.c_over_t).collect::<Vec<_>>());
        value_to_py(py, &v)
    }

    #[pyo3(signature = (cylinder, t_grid=None))]
    fn ldp<'py>(&self, py: Python<'py>, cylinder: &str, t_grid: Option<&str>) -> PyResult<Bound<'py, PyAny>> {
        let w: Word = cylinder.parse().map_err(to_py)?;
        let (report, oracle) = self.report(self.cfg.depth.max(w.len()), t_grid)?;
        let r = report.ldp_cylinder_limit(&w, &oracle).map_err(to_py)?;
        let v = json!({
            "cylinder": w.to_string(),
            "empirical_limit": r.empirical_limit,
            "sup_I": r.sup_i,
            "gap": r.gap,
            "witness_point": r.witness.as_ref().map(|x| x.to_string()),
            "unique": r.unique,
            "series": r.series,
        });
        value_to_py(py, &v)
    }

    fn __repr__(&self) -> String {
        format!("Job(depth={}, potential_depth={})", self.cfg.depth, self.cfg.potential.depth)
    }
}

#[pymodule]
fn betatherm(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("BetathermError", m.py().get_type::<BetathermError>())?;
    m.add_class::<BetaShift>()?;
    m.add_class::<Job>()?;
    m.add_function(wrap_pyfunction!(greedy_expansion, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn side_mapping() {
        assert_eq!(side(false), Side::Forward);
        assert_eq!(side(true), Side::Transpose);
    }
}
