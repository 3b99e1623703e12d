//! Python bindings for the `wavelet_vlasov` core crate.
//!
//! Arrays cross the boundary as nested lists indexed `[i][j]`, with `i` along x
//! and `j` along v.

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use ::wavelet_vlasov as core;
use core::grid::{Axis, PhaseGrid};
use core::io::diagnostics::{compute_diagnostics, DiagnosticsRecord};
use core::io::{load_config, parse_config, RunConfig};
use core::mra::{Boundary, PredictionStencil};
use core::mra2d::{forward_transform_2d, inverse_transform_2d, threshold, Grid2};
use core::scenarios::ScenarioConfig;
use core::semilag::{SimState, Splitting, Stepper};

fn to_py(e: core::Error) -> PyErr {
    let msg = format!("{}: {e}", e.category());
    match e {
        core::Error::Io { .. } => PyIOError::new_err(msg),
        core::Error::Config { .. } | core::Error::Parse { .. } => PyValueError::new_err(msg),
        _ => PyRuntimeError::new_err(msg),
    }
}

fn boundary(name: &str) -> PyResult<Boundary> {
    match name {
        "periodic" => Ok(Boundary::Periodic),
        "zero" => Ok(Boundary::ZeroExtension),
        other => Err(PyValueError::new_err(format!("unknown boundary {other:?}"))),
    }
}

fn grid_from_rows(rows: Vec<Vec<f64>>) -> PyResult<Grid2> {
    let nx = rows.len();
    let nv = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != nv) {
        return Err(PyValueError::new_err("rows must all have the same length"));
    }
    Ok(Grid2 { nx, nv, data: rows.concat() })
}

fn grid_to_rows(g: &Grid2) -> Vec<Vec<f64>> {
    g.data.chunks(g.nv.max(1)).map(<[f64]>::to_vec).collect()
}

/// Midpoint prediction weights of order `n` (`2n + 2` taps).
#[pyfunction]
fn stencil_weights(n: usize) -> Vec<f64> {
    PredictionStencil::new(n).weights().to_vec()
}

/// Forward 1D transform: returns `(coarse, details)` with `details[l]` at level `j0 + l`.
#[pyfunction]
#[pyo3(signature = (values, j0, j1, n = 1, boundary = "periodic"))]
fn forward_1d(values: Vec<f64>, j0: u32, j1: u32, n: usize, boundary: &str) -> PyResult<(Vec<f64>, Vec<Vec<f64>>)> {
    let s = PredictionStencil::new(n);
    let c = core::mra::forward_transform_1d(&values, j0, j1, &s, self::boundary(boundary)?).map_err(to_py)?;
    Ok((c.coarse, c.details))
}

/// Round trip through the 1D transform, optionally dropping details below `eps`.
#[pyfunction]
#[pyo3(signature = (values, j0, j1, n = 1, boundary = "periodic", eps = 0.0))]
fn compress_1d(values: Vec<f64>, j0: u32, j1: u32, n: usize, boundary: &str, eps: f64) -> PyResult<Vec<f64>> {
    let s = PredictionStencil::new(n);
    let mut c = core::mra::forward_transform_1d(&values, j0, j1, &s, self::boundary(boundary)?).map_err(to_py)?;
    c.details.iter_mut().flatten().filter(|d| d.abs() < eps).for_each(|d| *d = 0.0);
    core::mra::inverse_transform_1d(&c, &s).map_err(to_py)
}

/// A thresholded 2D representation on a unit-cell grid.
#[pyclass(module = "wavelet_vlasov")]
struct Sparse2D {
    rep: core::SparseRep,
}

#[pymethods]
impl Sparse2D {
    /// Decomposes `values` (shape `2^j1 x 2^j1`) over `[x0, x1] x [v0, v1]`.
    #[new]
    #[pyo3(signature = (values, j0, j1, eps, n = 1, x_range = (0.0, 1.0), v_range = (0.0, 1.0), x_boundary = "periodic", v_boundary = "periodic"))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        values: Vec<Vec<f64>>,
        j0: u32,
        j1: u32,
        eps: f64,
        n: usize,
        x_range: (f64, f64),
        v_range: (f64, f64),
        x_boundary: &str,
        v_boundary: &str,
    ) -> PyResult<Self> {
        let grid = PhaseGrid::new(
            Axis::new(x_range.0, x_range.1, 1, boundary(x_boundary)?),
            Axis::new(v_range.0, v_range.1, 1, boundary(v_boundary)?),
            j0,
            j1,
            n,
        )
        .map_err(to_py)?;
        let f = grid_from_rows(values)?;
        let coeffs = forward_transform_2d(&grid, &f).map_err(to_py)?;
        Ok(Sparse2D { rep: threshold(&coeffs, eps) })
    }

    /// Coarse samples plus retained details.
    fn active_count(&self) -> usize {
        self.rep.active_count()
    }

    fn detail_count(&self) -> usize {
        self.rep.detail_count()
    }

    /// Active positions as finest-grid indices.
    fn active_positions(&self) -> Vec<(usize, usize)> {
        self.rep.active_positions()
    }

    /// Point value of the interpolant.
    fn evaluate(&self, x: f64, v: f64) -> f64 {
        self.rep.evaluate(x, v)
    }

    /// Reconstruction on the finest grid.
    fn to_dense(&self) -> PyResult<Vec<Vec<f64>>> {
        let g = inverse_transform_2d(&self.rep.to_coeffs()).map_err(to_py)?;
        Ok(grid_to_rows(&g))
    }
}

/// Diagnostics of one state.
#[pyclass(module = "wavelet_vlasov", get_all, frozen, skip_from_py_object)]
#[derive(Clone)]
struct Diagnostics {
    t: f64,
    mass: f64,
    l1: f64,
    l2: f64,
    fmax: f64,
    e_energy: f64,
    active: usize,
    ratio: f64,
}

impl From<DiagnosticsRecord> for Diagnostics {
    fn from(d: DiagnosticsRecord) -> Self {
        Diagnostics {
            t: d.t,
            mass: d.mass,
            l1: d.l1,
            l2: d.l2,
            fmax: d.fmax,
            e_energy: d.e_energy,
            active: d.active,
            ratio: d.ratio,
        }
    }
}

#[pymethods]
impl Diagnostics {
    fn __repr__(&self) -> String {
        format!(
            "Diagnostics(t={}, mass={}, l1={}, l2={}, fmax={}, e_energy={}, active={}, ratio={})",
            self.t, self.mass, self.l1, self.l2, self.fmax, self.e_energy, self.active, self.ratio
        )
    }
}

/// A simulation held in memory; nothing is written to disk.
#[pyclass(module = "wavelet_vlasov")]
struct Simulation {
    config: RunConfig,
    stepper: Stepper,
    state: SimState,
}

impl Simulation {
    fn from_config(config: RunConfig) -> PyResult<Self> {
        let stepper = core::io::driver::build_stepper(&config).map_err(to_py)?;
        let state = stepper.initial_state(config.eps).map_err(to_py)?;
        Ok(Simulation { config, stepper, state })
    }
}

#[pymethods]
impl Simulation {
    /// `scenario` is `"cylinder"` or `"two_stream"`; `eps = None` steps densely.
    #[new]
    #[pyo3(signature = (scenario, j0, j1, dt, eps = None, n = 1, splitting = "lie", alpha = 0.25, k0 = 0.5, vmax = 7.0))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        scenario: &str,
        j0: u32,
        j1: u32,
        dt: f64,
        eps: Option<f64>,
        n: usize,
        splitting: &str,
        alpha: f64,
        k0: f64,
        vmax: f64,
    ) -> PyResult<Self> {
        let sc = match scenario {
            "cylinder" => ScenarioConfig::cylinder(),
            "two_stream" => ScenarioConfig::two_stream(alpha, k0, vmax),
            other => return Err(PyValueError::new_err(format!("unknown scenario {other:?}"))),
        };
        let mut config = RunConfig::new(sc, j0, j1, dt, 0);
        config.order_n = n;
        config.eps = eps;
        config.splitting = match splitting {
            "lie" => Splitting::Lie,
            "strang" => Splitting::Strang,
            other => return Err(PyValueError::new_err(format!("unknown splitting {other:?}"))),
        };
        config
            .validate()
            .map_err(|(key, msg)| PyValueError::new_err(format!("{key}: {msg}")))?;
        Self::from_config(config)
    }

    /// Builds a simulation from TOML text, the same format the command line reads.
    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        Self::from_config(parse_config(text).map_err(to_py)?)
    }

    #[staticmethod]
    fn from_file(path: std::path::PathBuf) -> PyResult<Self> {
        Self::from_config(load_config(&path).map_err(to_py)?)
    }

    #[getter]
    fn t(&self) -> f64 {
        self.state.t
    }

    #[getter]
    fn step_count(&self) -> usize {
        self.state.step
    }

    #[getter]
    fn dt(&self) -> f64 {
        self.config.dt
    }

    /// Advances `count` steps of the configured size.
    #[pyo3(signature = (count = 1))]
    fn step(&mut self, py: Python<'_>, count: usize) -> PyResult<()> {
        let (stepper, dt, eps) = (&self.stepper, self.config.dt, self.config.eps);
        let mut state = self.state.clone();
        let state = py
            .detach(move || -> core::Result<SimState> {
                for _ in 0..count {
                    state = stepper.step(&state, dt, eps)?;
                }
                Ok(state)
            })
            .map_err(to_py)?;
        self.state = state;
        Ok(())
    }

    fn diagnostics(&self) -> Diagnostics {
        compute_diagnostics(&self.stepper.grid, &self.state).into()
    }

    /// The distribution on the finest grid.
    fn to_dense(&self) -> Vec<Vec<f64>> {
        grid_to_rows(&self.state.f.to_dense())
    }

    /// `(xs, vs)`, the finest-grid coordinates.
    fn coordinates(&self) -> (Vec<f64>, Vec<f64>) {
        let g = &self.stepper.grid;
        let (nx, nv) = g.fine_dims();
        let xs = (0..nx).map(|i| g.fine_coords((i, 0)).0).collect();
        let vs = (0..nv).map(|j| g.fine_coords((0, j)).1).collect();
        (xs, vs)
    }

    /// Electric field on the x grid.
    fn electric_field(&self) -> Vec<f64> {
        self.state.field.e_field.clone()
    }
}

#[pymodule]
#[pyo3(name = "wavelet_vlasov")]
fn wavelet_vlasov_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(stencil_weights, m)?)?;
    m.add_function(wrap_pyfunction!(forward_1d, m)?)?;
    m.add_function(wrap_pyfunction!(compress_1d, m)?)?;
    m.add_class::<Sparse2D>()?;
    m.add_class::<Diagnostics>()?;
    m.add_class::<Simulation>()?;
    Ok(())
}
