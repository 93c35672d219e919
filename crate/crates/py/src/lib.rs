//! Python bindings: parameter derivation, constants, optimizers, the
//! symmetry-breaking detector and full reports.

use ckn_cli::commands::{cmd_report, ReportOptions, Timings};
use ckn_cli::output::to_json;
use ckn_cli::{CliError, Config};
use ckn_core::calculus::ModelE;
use ckn_core::optimizers::{ckn_sides, euler_lagrange_residual, weyl_extension_check, OptimizerE};
use ckn_core::params::{derive, CknParams, DerivedParams};
use ckn_core::quadrature::QuadSettings;
use ckn_core::special::closed_form_constants;
use ckn_core::spectral::{self, ScanGrid};
use ckn_core::CknError;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn core_err(e: CknError) -> PyErr {
    match e {
        CknError::NonConvergence { .. }
        | CknError::IllConditioned(_)
        | CknError::SupportViolation(_)
        | CknError::PositivityViolation(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn cli_err(e: CliError) -> PyErr {
    match e {
        CliError::Core(e) => core_err(e),
        CliError::Schema(_) | CliError::Config(_) => PyValueError::new_err(e.to_string()),
        CliError::Output(_) => PyRuntimeError::new_err(e.to_string()),
    }
}

/// Admissible parameters `(A, a, b)` with their derived exponents.
#[pyclass(frozen, module = "ckn")]
struct Params {
    inner: CknParams,
    dp: DerivedParams,
}

#[pymethods]
impl Params {
    #[new]
    fn new(exponents: Vec<f64>, a: f64, b: f64) -> PyResult<Self> {
        let inner = CknParams::new(exponents, a, b).map_err(core_err)?;
        let dp = derive(&inner).map_err(core_err)?;
        Ok(Self { inner, dp })
    }

    #[getter]
    fn exponents(&self) -> Vec<f64> {
        self.inner.weight.exponents().to_vec()
    }

    #[getter]
    fn a(&self) -> f64 {
        self.inner.a
    }

    #[getter]
    fn b(&self) -> f64 {
        self.inner.b
    }

    #[getter]
    fn d(&self) -> usize {
        self.dp.d
    }

    #[getter]
    fn monomial_dim(&self) -> f64 {
        self.dp.monomial_dim
    }

    #[getter]
    fn p(&self) -> f64 {
        self.dp.p
    }

    #[getter]
    fn n(&self) -> f64 {
        self.dp.n
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.dp.alpha
    }

    #[getter]
    fn alpha_sq(&self) -> f64 {
        self.dp.alpha_sq
    }

    #[getter]
    fn fs_bound(&self) -> f64 {
        self.dp.fs_bound
    }

    #[getter]
    fn regime(&self) -> &'static str {
        self.dp.regime.as_str()
    }

    #[getter]
    fn tight_constant(&self) -> f64 {
        self.dp.tight_constant()
    }

    fn identity_residuals(&self) -> (f64, f64) {
        self.dp.identity_residuals()
    }

    /// `Z`, `C_opt` and their factors in closed form.
    fn constants<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let c = closed_form_constants(&self.inner, &self.dp).map_err(core_err)?;
        let out = PyDict::new(py);
        out.set_item("sphere_area", c.sphere_area)?;
        out.set_item("profile_integral", c.profile_integral)?;
        out.set_item("z", c.z)?;
        out.set_item("c_opt", c.c_opt)?;
        out.set_item("c_opt_proved_sharp", c.c_opt_proved_sharp)?;
        Ok(out)
    }

    /// CKN ratio of the optimizer `(s + t |x|^{2 alpha})^{-(n-2)/2}` by quadrature.
    #[pyo3(signature = (s=1.0, t=1.0))]
    fn optimizer_ratio(&self, s: f64, t: f64) -> PyResult<f64> {
        let o = OptimizerE::new(s, t, self.dp).map_err(core_err)?;
        let sides = ckn_sides(
            &o.profile(),
            &self.inner,
            &self.dp,
            &QuadSettings::default(),
        )
        .map_err(core_err)?;
        Ok(sides.ratio)
    }

    /// Relative Euler-Lagrange residual of the optimizer at the point `x`.
    #[pyo3(signature = (x, s=1.0, t=1.0))]
    fn euler_lagrange_residual(&self, x: Vec<f64>, s: f64, t: f64) -> PyResult<f64> {
        let o = OptimizerE::new(s, t, self.dp).map_err(core_err)?;
        let m = ModelE::new(self.dp, self.inner.weight.clone());
        euler_lagrange_residual(&o, &m, &x).map_err(core_err)
    }

    /// First eigenvalue of `-L_theta` by Rayleigh-Ritz at `degree`.
    #[pyo3(signature = (degree=4))]
    fn sphere_first_eigenvalue(&self, degree: usize) -> PyResult<f64> {
        spectral::sphere_first_eigenvalue(&self.inner.weight, degree, &QuadSettings::default())
            .map(|s| s.first())
            .map_err(core_err)
    }

    /// Linearized symmetry-breaking detector at the constant function.
    #[pyo3(signature = (degree=4))]
    fn detector<'py>(&self, py: Python<'py>, degree: usize) -> PyResult<Bound<'py, PyDict>> {
        let v = spectral::symmetry_breaking_detector(&self.inner, degree, &QuadSettings::default())
            .map_err(core_err)?;
        let out = PyDict::new(py);
        out.set_item("lambda_theta_1", v.lambda_theta_1)?;
        out.set_item("test_quotient", v.test_quotient)?;
        out.set_item("closed_form_quotient", v.closed_form_quotient)?;
        out.set_item("threshold", v.threshold)?;
        out.set_item("verdict", v.verdict.as_str())?;
        out.set_item("agrees_with_fs", v.agrees_with_fs)?;
        Ok(out)
    }

    fn __repr__(&self) -> String {
        format!(
            "Params(exponents={:?}, a={:?}, b={:?})",
            self.inner.weight.exponents(),
            self.inner.a,
            self.inner.b
        )
    }
}

/// Detector over an `(a, b)` grid with `b` read as `b - a` when `offset`.
#[pyfunction]
#[pyo3(signature = (exponents, a_range, b_range, steps=(20, 20), offset=true, degree=4))]
fn phase_scan<'py>(
    py: Python<'py>,
    exponents: Vec<f64>,
    a_range: (f64, f64),
    b_range: (f64, f64),
    steps: (usize, usize),
    offset: bool,
    degree: usize,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let weight = ckn_core::params::MonomialWeight::new(exponents).map_err(core_err)?;
    let grid = ScanGrid {
        a_range,
        b_range,
        b_axis: if offset {
            spectral::BAxis::Offset
        } else {
            spectral::BAxis::Absolute
        },
        a_steps: steps.0,
        b_steps: steps.1,
    };
    let rows =
        spectral::phase_scan(&weight, &grid, degree, &QuadSettings::default()).map_err(core_err)?;
    rows.into_iter()
        .map(|r| {
            let out = PyDict::new(py);
            out.set_item("a", r.a)?;
            out.set_item("b", r.b)?;
            out.set_item("alpha_sq", r.alpha_sq)?;
            out.set_item("fs_bound", r.fs_bound)?;
            out.set_item("regime", r.regime.map(|g| g.as_str()))?;
            out.set_item("lambda_theta_1", r.lambda_theta_1)?;
            out.set_item("quotient", r.quotient)?;
            out.set_item("threshold", r.threshold)?;
            out.set_item("verdict", r.verdict.map(|v| v.as_str()))?;
            out.set_item("agree", r.agree)?;
            out.set_item("skipped", r.skipped)?;
            Ok(out)
        })
        .collect()
}

/// `(l1, l_{p/2}, equality)` for nonnegative chamber masses.
#[pyfunction]
fn weyl_check(masses: Vec<f64>, p: f64) -> PyResult<(f64, f64, bool)> {
    let w = weyl_extension_check(&masses, p).map_err(core_err)?;
    Ok((w.l1, w.lp2, w.equality))
}

/// Full report for a JSON configuration, as the JSON document the CLI writes
/// without its timing object.
#[pyfunction]
#[pyo3(signature = (config_json, samples=1000, degree=4))]
fn report(py: Python<'_>, config_json: &str, samples: usize, degree: usize) -> PyResult<String> {
    let config = Config::from_json(config_json).map_err(cli_err)?;
    py.detach(|| {
        let mut timings = Timings::default();
        let r = cmd_report(&config, ReportOptions { samples, degree }, &mut timings)?;
        to_json(&r)
    })
    .map_err(cli_err)
}

#[pymodule]
fn ckn(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Params>()?;
    m.add_function(wrap_pyfunction!(phase_scan, m)?)?;
    m.add_function(wrap_pyfunction!(weyl_check, m)?)?;
    m.add_function(wrap_pyfunction!(report, m)?)?;
    Ok(())
}
