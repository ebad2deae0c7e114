//! Python bindings for `macregion`.
//!
//! Library errors surface as `ValueError`, except numerical failures
//! (`ArithmeticError`) and infeasible targets (`InfeasibleError`).

use pyo3::create_exception;
use pyo3::exceptions::{PyArithmeticError, PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use macregion::io::{schedule_from_json, schedule_to_json};
use macregion::region::{self, Scheme, DEFAULT_SAMPLES};
use macregion::scheduler::{self as sched, User};
use macregion::{gap, sim, MacError};

create_exception!(macregion_py, InfeasibleError, PyException);

fn py_err(e: MacError) -> PyErr {
    match e {
        MacError::Numerical(_) => PyArithmeticError::new_err(e.to_string()),
        MacError::Infeasible { .. } | MacError::NoSuperposition(_) => InfeasibleError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for macregion::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

/// Target symbol-error probability with an optional coding gain in dB.
#[pyclass(name = "GapParams", frozen, skip_from_py_object, module = "macregion_py")]
#[derive(Clone, Copy)]
struct PyGapParams {
    inner: gap::GapParams,
}

#[pymethods]
impl PyGapParams {
    #[new]
    #[pyo3(signature = (pe, coding_gain_db = 0.0))]
    fn new(pe: f64, coding_gain_db: f64) -> PyResult<Self> {
        Ok(Self { inner: gap::GapParams::new(pe, coding_gain_db).py()? })
    }

    #[getter]
    fn pe(&self) -> f64 {
        self.inner.target_pe()
    }

    #[getter]
    fn coding_gain_db(&self) -> f64 {
        self.inner.coding_gain_db()
    }

    fn gap(&self, bits: u32) -> PyResult<f64> {
        gap::gap(bits, &self.inner).py()
    }

    fn gap_continuous(&self, rate: f64) -> PyResult<f64> {
        gap::gap_continuous(rate, &self.inner).py()
    }

    fn gap_inf(&self) -> PyResult<f64> {
        gap::gap_inf(&self.inner).py()
    }

    /// Power needed for `bits` bits per symbol at noise level `n0`.
    #[pyo3(signature = (bits, n0 = 1.0))]
    fn level(&self, bits: u32, n0: f64) -> PyResult<f64> {
        gap::power_for_integer_rate(bits, n0, &self.inner).py()
    }

    #[pyo3(signature = (power, n0 = 1.0))]
    fn max_integer_rate(&self, power: f64, n0: f64) -> PyResult<u32> {
        gap::max_integer_rate(power, n0, &self.inner).py()
    }

    /// Solves `r = ½·log2(1 + P / (Γ(r)·N0))`.
    #[pyo3(signature = (power, n0 = 1.0))]
    fn rate_fixed_point(&self, power: f64, n0: f64) -> PyResult<f64> {
        gap::rate_fixed_point(power, n0, &self.inner).py()
    }

    fn __repr__(&self) -> String {
        format!("GapParams(pe={:e}, coding_gain_db={})", self.inner.target_pe(), self.inner.coding_gain_db())
    }
}

/// Two-user scenario; the stronger user is always user 1.
#[pyclass(name = "Scenario", frozen, skip_from_py_object, module = "macregion_py")]
#[derive(Clone, Copy)]
struct PyScenario {
    inner: sched::Scenario,
}

#[pymethods]
impl PyScenario {
    #[new]
    #[pyo3(signature = (p1, p2, n0, pe, coding_gain_db = 0.0))]
    fn new(p1: f64, p2: f64, n0: f64, pe: f64, coding_gain_db: f64) -> PyResult<Self> {
        let params = gap::GapParams::new(pe, coding_gain_db).py()?;
        Ok(Self { inner: sched::Scenario::new(p1, p2, n0, params).py()? })
    }

    /// Scenario with both powers exactly on integer-rate levels.
    #[staticmethod]
    #[pyo3(signature = (bits1, bits2, pe, n0 = 1.0, coding_gain_db = 0.0))]
    fn at_integer_levels(bits1: u32, bits2: u32, pe: f64, n0: f64, coding_gain_db: f64) -> PyResult<Self> {
        let params = gap::GapParams::new(pe, coding_gain_db).py()?;
        Ok(Self { inner: sched::Scenario::at_integer_levels(bits1, bits2, n0, params).py()? })
    }

    #[getter]
    fn p1(&self) -> f64 {
        self.inner.p1()
    }

    #[getter]
    fn p2(&self) -> f64 {
        self.inner.p2()
    }

    #[getter]
    fn n0(&self) -> f64 {
        self.inner.n0()
    }

    #[getter]
    fn gap_params(&self) -> PyGapParams {
        PyGapParams { inner: *self.inner.gap_params() }
    }

    #[getter]
    fn swapped(&self) -> bool {
        self.inner.swapped()
    }

    #[getter]
    fn r1(&self) -> PyResult<u32> {
        self.inner.r1().py()
    }

    #[getter]
    fn r2(&self) -> PyResult<u32> {
        self.inner.r2().py()
    }

    fn lambda2(&self) -> PyResult<f64> {
        sched::lambda2(&self.inner).py()
    }

    /// `(lambda1, (r1, r2))` for the power-controlled corner with user 2 at full rate.
    fn lambda1_and_point_b1(&self) -> PyResult<(f64, (f64, f64))> {
        let c = sched::lambda1_and_point_b1(&self.inner).py()?;
        Ok((c.lambda1, (c.point.r1, c.point.r2)))
    }

    fn point_c1(&self) -> PyResult<(f64, f64)> {
        let p = sched::point_c1(&self.inner).py()?;
        Ok((p.r1, p.r2))
    }

    fn point_b(&self) -> PyResult<(f64, f64)> {
        let p = sched::point_b(&self.inner).py()?;
        Ok((p.r1, p.r2))
    }

    fn point_c(&self) -> PyResult<(f64, f64)> {
        let p = sched::point_c(&self.inner).py()?;
        Ok((p.r1, p.r2))
    }

    /// Boundary vertices of `scheme`, from the r2 axis to the r1 axis.
    #[pyo3(signature = (scheme, samples = DEFAULT_SAMPLES))]
    fn region(&self, scheme: &str, samples: usize) -> PyResult<Vec<(f64, f64)>> {
        let scheme: Scheme = scheme.parse().py()?;
        let r = region::region_for(scheme, &self.inner, samples).py()?;
        Ok(r.vertices().iter().map(|p| (p.r1, p.r2)).collect())
    }

    fn sum_rate_gap(&self) -> PyResult<f64> {
        region::sum_rate_gap(&self.inner).py()
    }

    /// Whether region `outer` holds every vertex of region `inner`.
    #[pyo3(signature = (outer, inner, tol = 1e-9, samples = DEFAULT_SAMPLES))]
    fn contains(&self, outer: &str, inner: &str, tol: f64, samples: usize) -> PyResult<bool> {
        let outer = region::region_for(outer.parse().py()?, &self.inner, samples).py()?;
        let inner = region::region_for(inner.parse().py()?, &self.inner, samples).py()?;
        Ok(region::region_contains(&outer, &inner, tol))
    }

    /// Plain-text comparison table.
    #[pyo3(signature = (samples = DEFAULT_SAMPLES))]
    fn compare(&self, samples: usize) -> PyResult<String> {
        macregion::cli::compare_table(&self.inner, samples).py()
    }

    /// Schedule for `b`, `c`, `b1`, `c1` or `theta=<0..1>`.
    fn schedule(&self, target: &str) -> PyResult<PySchedule> {
        let target: sched::Target = target.parse().py()?;
        Ok(PySchedule { inner: sched::synth_schedule(target, &self.inner).py()?, target: Some(target) })
    }

    fn __repr__(&self) -> String {
        format!(
            "Scenario(p1={}, p2={}, n0={}, pe={:e})",
            self.inner.p1(),
            self.inner.p2(),
            self.inner.n0(),
            self.inner.gap_params().target_pe()
        )
    }
}

#[pyclass(name = "Schedule", frozen, skip_from_py_object, module = "macregion_py")]
#[derive(Clone)]
struct PySchedule {
    inner: macregion::Schedule,
    target: Option<sched::Target>,
}

#[pymethods]
impl PySchedule {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: schedule_from_json(text).py()?, target: None })
    }

    fn to_json(&self) -> String {
        schedule_to_json(&self.inner, self.target)
    }

    #[getter]
    fn scenario(&self) -> PyScenario {
        PyScenario { inner: *self.inner.scenario() }
    }

    #[getter]
    fn rates(&self) -> (f64, f64) {
        let r = self.inner.rates();
        (r.r1, r.r2)
    }

    /// Phases as `(fraction, (bits1, power1), (bits2, power2))`.
    #[getter]
    fn phases(&self) -> Vec<(f64, (u32, f64), (u32, f64))> {
        self.inner
            .phases()
            .iter()
            .map(|p| (p.fraction(), (p.user1().bits(), p.user1().power()), (p.user2().bits(), p.user2().power())))
            .collect()
    }

    fn average_power(&self, user: u8) -> PyResult<f64> {
        let user = match user {
            1 => User::One,
            2 => User::Two,
            _ => return Err(PyValueError::new_err("user must be 1 or 2")),
        };
        Ok(self.inner.average_power(user))
    }

    /// Violated checks as messages; empty when the schedule is valid.
    fn validate(&self) -> Vec<String> {
        sched::validate_schedule(&self.inner).violations.iter().map(|v| v.to_string()).collect()
    }

    /// Monte Carlo run; returns the report fields as a dict.
    #[pyo3(signature = (symbols = 1_000_000, seed = 0))]
    fn simulate<'py>(&self, py: Python<'py>, symbols: u64, seed: u64) -> PyResult<Bound<'py, PyDict>> {
        let schedule = self.inner.clone();
        let report = py.detach(move || sim::run_schedule(&schedule, symbols, seed)).py()?;
        let pe = self.inner.scenario().gap_params().target_pe();
        let d = PyDict::new(py);
        d.set_item("per_user_ser", report.per_user_ser.to_vec())?;
        d.set_item("ser_ci95", report.ser_ci95.to_vec())?;
        d.set_item("per_user_errors", report.per_user_errors.to_vec())?;
        d.set_item("per_user_symbols", report.per_user_symbols.to_vec())?;
        d.set_item("symbols_run", report.symbols_run)?;
        d.set_item("throughput_bits", report.throughput_bits)?;
        d.set_item("joint_ser", report.joint_ser)?;
        d.set_item("seed", report.seed)?;
        d.set_item("rng", report.rng.clone())?;
        d.set_item("complies", report.complies(pe))?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        let r = self.inner.rates();
        format!("Schedule(phases={}, rates=({}, {}))", self.inner.phases().len(), r.r1, r.r2)
    }
}

#[pyfunction]
fn q_func(x: f64) -> PyResult<f64> {
    gap::q_func(x).py()
}

#[pyfunction]
fn q_inv(p: f64) -> PyResult<f64> {
    gap::q_inv(p).py()
}

/// Symbol-error probability of `2^bits`-PAM at `snr`.
#[pyfunction]
fn pam_ser(snr: f64, bits: u32) -> PyResult<f64> {
    gap::pam_ser(snr, bits).py()
}

#[pyfunction]
fn pam_dmin(power: f64, bits: u32) -> PyResult<f64> {
    gap::pam_dmin(power, bits).py()
}

#[pyfunction]
fn schemes() -> Vec<&'static str> {
    Scheme::ALL.iter().map(|s| s.name()).collect()
}

#[pymodule]
fn macregion_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGapParams>()?;
    m.add_class::<PyScenario>()?;
    m.add_class::<PySchedule>()?;
    m.add_function(wrap_pyfunction!(q_func, m)?)?;
    m.add_function(wrap_pyfunction!(q_inv, m)?)?;
    m.add_function(wrap_pyfunction!(pam_ser, m)?)?;
    m.add_function(wrap_pyfunction!(pam_dmin, m)?)?;
    m.add_function(wrap_pyfunction!(schemes, m)?)?;
    m.add("InfeasibleError", m.py().get_type::<InfeasibleError>())?;
    Ok(())
}
