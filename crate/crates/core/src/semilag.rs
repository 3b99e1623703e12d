//! Split semi-Lagrangian time stepping, dense and adaptive.
//!
//! Each substep moves along one phase-space axis only, so the foot of every
//! characteristic is known in closed form: `x - v dt` for the x substep and
//! `v - a(x) dt` for the v substep, where `a` is the acceleration `(q/m) E` or
//! the applied field. Values at the feet are interpolated through the wavelet
//! representation of the previous distribution.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::fields::{self, FieldProfile, CHARGE, MASS};
use crate::grid::{Axis, FinePos, PhaseGrid};
use crate::mesh::{self, ActiveSet, Direction};
use crate::mra::Boundary;
use crate::mra2d::{reconstruct_dense, Grid2, SparseRep, DEFAULT_EVAL_DEPTH};
use crate::scenarios::{FieldMode, ScenarioConfig};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Splitting {
    /// Full x step, field, full v step.
    #[default]
    Lie,
    /// Half x step, field, full v step, half x step.
    Strang,
}

/// The distribution function, either on the full finest grid or compressed.
#[derive(Clone, Debug)]
pub enum Distribution {
    Dense(Grid2),
    Sparse(SparseRep),
}

impl Distribution {
    /// Finest-level samples.
    pub fn to_dense(&self) -> Grid2 {
        match self {
            Distribution::Dense(g) => g.clone(),
            Distribution::Sparse(rep) => reconstruct_dense(rep),
        }
    }

    /// Active node count (the full grid size for dense storage).
    pub fn active_count(&self) -> usize {
        match self {
            Distribution::Dense(g) => g.data.len(),
            Distribution::Sparse(rep) => rep.active_count(),
        }
    }

    pub fn as_sparse(&self) -> Option<&SparseRep> {
        match self {
            Distribution::Sparse(rep) => Some(rep),
            Distribution::Dense(_) => None,
        }
    }
}

/// Running tallies kept alongside the state.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunStats {
    pub steps: usize,
    pub last_active: usize,
    pub peak_active: usize,
    /// Sizes of the last x and v compute meshes.
    pub last_mesh_points: (usize, usize),
}

#[derive(Clone, Debug)]
pub struct SimState {
    pub t: f64,
    pub f: Distribution,
    pub field: FieldProfile,
    pub step: usize,
    pub stats: RunStats,
}

/// Value of the distribution at the foot of each target along one axis.
///
/// `shift(i_orth)` returns the displacement (in physical units) of the
/// characteristic through the orthogonal index; targets sharing an orthogonal
/// index share interpolation weights.
fn advect_points(
    rep: &SparseRep,
    direction: Direction,
    shift: impl Fn(usize) -> f64,
    targets: impl Iterator<Item = FinePos>,
) -> Vec<(FinePos, f64)> {
    let grid = rep.grid();
    let axis: &Axis = match direction {
        Direction::X => &grid.x,
        Direction::V => &grid.v,
    };
    let h = axis.spacing(grid.fine_level);
    let table = rep.table();
    let mut weights: HashMap<usize, (f64, Vec<(i64, f64)>)> = HashMap::new();
    let mut eval = rep.evaluator();
    targets
        .map(|pos| {
            let (along, orth) = match direction {
                Direction::X => (pos.0, pos.1),
                Direction::V => (pos.1, pos.0),
            };
            let (disp, w) = weights.entry(orth).or_insert_with(|| {
                let d = shift(orth);
                let mut w = Vec::new();
                table.weights(-d / h, &mut w);
                (d, w)
            });
            if axis.boundary == Boundary::ZeroExtension {
                let foot = axis.coord(grid.fine_level, along as i64) - *disp;
                if !axis.contains(foot) {
                    return (pos, 0.0);
                }
            }
            let base = along as i64;
            let value = w
                .iter()
                .map(|&(k, wk)| {
                    let m = base + k;
                    wk * match direction {
                        Direction::X => eval.nodal_index(m, pos.1 as i64),
                        Direction::V => eval.nodal_index(pos.0 as i64, m),
                    }
                })
                .sum();
            (pos, value)
        })
        .collect()
}

fn all_positions(grid: &PhaseGrid) -> impl Iterator<Item = FinePos> {
    let (nx, nv) = grid.fine_dims();
    (0..nx).flat_map(move |i| (0..nv).map(move |j| (i, j)))
}

fn scatter(grid: &PhaseGrid, values: Vec<(FinePos, f64)>) -> Grid2 {
    let (nx, nv) = grid.fine_dims();
    let mut out = Grid2::zeros(nx, nv);
    for (p, v) in values {
        out.set(p.0, p.1, v);
    }
    out
}

/// x substep on the full grid: `f*(x_i, v_j) = f(x_i - v_j dt, v_j)`.
pub fn advect_x(rep: &SparseRep, dt: f64) -> Grid2 {
    let grid = rep.grid();
    let values = advect_points(
        rep,
        Direction::X,
        |j| grid.v.coord(grid.fine_level, j as i64) * dt,
        all_positions(grid),
    );
    scatter(grid, values)
}

/// v substep on the full grid: `f(x_i, v_j - a_i dt)` with `a_i` the acceleration at `x_i`.
pub fn advect_v(rep: &SparseRep, acceleration: &[f64], dt: f64) -> Grid2 {
    let grid = rep.grid();
    let values = advect_points(
        rep,
        Direction::V,
        |i| acceleration[i] * dt,
        all_positions(grid),
    );
    scatter(grid, values)
}

/// Acceleration `(q/m) E` on the finest x grid.
pub fn acceleration_from_field(field: &FieldProfile) -> Vec<f64> {
    field.e_field.iter().map(|e| CHARGE / MASS * e).collect()
}

/// Everything needed to advance a state.
#[derive(Clone, Debug)]
pub struct Stepper {
    pub grid: PhaseGrid,
    pub scenario: ScenarioConfig,
    pub splitting: Splitting,
    /// Test hook: treat every grid point as predicted in the adaptive stepper.
    pub full_prediction: bool,
    /// Tabulation depth of the scaling function used for interpolation.
    pub eval_depth: u32,
}

impl Stepper {
    pub fn new(grid: PhaseGrid, scenario: ScenarioConfig, splitting: Splitting) -> Self {
        Stepper {
            grid,
            scenario,
            splitting,
            full_prediction: false,
            eval_depth: DEFAULT_EVAL_DEPTH,
        }
    }

    fn tabulated(&self, rep: SparseRep) -> SparseRep {
        if self.eval_depth == DEFAULT_EVAL_DEPTH {
            rep
        } else {
            rep.with_eval_depth(self.eval_depth)
        }
    }

    fn decompose(&self, f: &Grid2, eps: f64) -> Result<SparseRep> {
        Ok(self.tabulated(SparseRep::from_dense(&self.grid, f, eps)?))
    }

    /// Field profile of a finest-level distribution (zero for applied-field runs).
    pub fn field_of(&self, f: &Grid2) -> Result<FieldProfile> {
        match self.scenario.field_mode {
            FieldMode::SelfConsistent => fields::self_consistent_field(&self.grid, f),
            FieldMode::Applied => Ok(FieldProfile::zeros(
                self.grid.x.points(self.grid.fine_level),
                self.grid.x.length(),
            )),
        }
    }

    /// Field of a compressed distribution; the density quadrature runs on its
    /// finest-level reconstruction.
    pub fn field_of_rep(&self, rep: &SparseRep) -> Result<FieldProfile> {
        match self.scenario.field_mode {
            FieldMode::SelfConsistent => self.field_of(&reconstruct_dense(rep)),
            FieldMode::Applied => self.field_of(&Grid2::zeros(0, 0)),
        }
    }

    pub fn acceleration(&self, field: &FieldProfile) -> Vec<f64> {
        match self.scenario.field_mode {
            FieldMode::SelfConsistent => acceleration_from_field(field),
            FieldMode::Applied => (0..self.grid.x.points(self.grid.fine_level))
                .map(|i| {
                    let x = self.grid.x.coord(self.grid.fine_level, i as i64);
                    self.scenario.applied_acceleration(x)
                })
                .collect(),
        }
    }

    /// Initial state; `eps = None` selects the dense representation.
    pub fn initial_state(&self, eps: Option<f64>) -> Result<SimState> {
        let f0 = self.scenario.sample(&self.grid);
        self.state_from_dense(f0, eps)
    }

    pub fn state_from_dense(&self, f0: Grid2, eps: Option<f64>) -> Result<SimState> {
        let field = self.field_of(&f0)?;
        let f = match eps {
            None => Distribution::Dense(f0),
            Some(eps) => {
                let rep = self.decompose(&f0, eps)?;
                check_not_degenerate(&rep, eps)?;
                Distribution::Sparse(rep)
            }
        };
        let active = f.active_count();
        Ok(SimState {
            t: 0.0,
            f,
            field,
            step: 0,
            stats: RunStats {
                last_active: active,
                peak_active: active,
                ..RunStats::default()
            },
        })
    }

    fn dense_x(&self, f: &Grid2, dt: f64) -> Result<Grid2> {
        let rep = self.decompose(f, 0.0)?;
        Ok(advect_x(&rep, dt))
    }

    fn dense_v(&self, f: &Grid2, field: &FieldProfile, dt: f64) -> Result<Grid2> {
        let rep = self.decompose(f, 0.0)?;
        Ok(advect_v(&rep, &self.acceleration(field), dt))
    }

    /// One step on the full finest grid.
    pub fn step_nonadaptive(&self, state: &SimState, dt: f64) -> Result<SimState> {
        let f = match &state.f {
            Distribution::Dense(g) => g,
            Distribution::Sparse(_) => {
                return Err(Error::MalformedGrid(
                    "dense stepper needs a dense distribution".into(),
                ))
            }
        };
        let (f_new, field) = match self.splitting {
            Splitting::Lie => {
                let f_star = self.dense_x(f, dt)?;
                let field = self.field_of(&f_star)?;
                (self.dense_v(&f_star, &field, dt)?, field)
            }
            Splitting::Strang => {
                let f_half = self.dense_x(f, 0.5 * dt)?;
                let field = self.field_of(&f_half)?;
                let f_v = self.dense_v(&f_half, &field, dt)?;
                let f_new = self.dense_x(&f_v, 0.5 * dt)?;
                let field = self.field_of(&f_new)?;
                (f_new, field)
            }
        };
        check_finite(&f_new)?;
        Ok(advance(state, Distribution::Dense(f_new), field, dt, (0, 0)))
    }

    /// One adaptive substep: predict, close, advect on the closed mesh,
    /// transform and compress.
    fn adaptive_substep(
        &self,
        rep: &SparseRep,
        direction: Direction,
        dt: f64,
        acceleration: Option<&[f64]>,
        eps: f64,
    ) -> Result<(SparseRep, usize)> {
        let grid = &self.grid;
        let current = ActiveSet::from_rep(rep);
        let predicted = if self.full_prediction {
            ActiveSet::full(grid)
        } else {
            match direction {
                Direction::X => mesh::predict_active_set(&current, |_, v| v * dt, direction),
                Direction::V => {
                    let acc = acceleration.expect("v substep needs an acceleration");
                    let fine = grid.fine_level;
                    mesh::predict_active_set(
                        &current,
                        |x, _| {
                            let i = grid.x.grid_units(fine, x).round() as usize;
                            acc[i.min(acc.len() - 1)] * dt
                        },
                        direction,
                    )
                }
            }
        };
        let compute_mesh = mesh::closure(&predicted);
        let points = compute_mesh.points().iter().copied();
        let samples = match direction {
            Direction::X => advect_points(
                rep,
                direction,
                |j| grid.v.coord(grid.fine_level, j as i64) * dt,
                points,
            ),
            Direction::V => {
                let acc = acceleration.expect("v substep needs an acceleration");
                advect_points(rep, direction, |i| acc[i] * dt, points)
            }
        };
        let new_rep = self.tabulated(compress_samples(grid, &samples, eps));
        check_not_degenerate(&new_rep, eps)?;
        Ok((new_rep, compute_mesh.len()))
    }

    /// One step of the adaptive scheme, stages in order: predict in x, build the
    /// compute mesh, advect in x, transform, compress, field, predict in v,
    /// build the compute mesh, advect in v, transform, compress.
    pub fn step_adaptive(&self, state: &SimState, dt: f64, eps: f64) -> Result<SimState> {
        let rep = state.f.as_sparse().ok_or_else(|| {
            Error::MalformedGrid("adaptive stepper needs a sparse distribution".into())
        })?;
        let (rep_new, field, meshes) = match self.splitting {
            Splitting::Lie => {
                let (rep_star, mx) = self.adaptive_substep(rep, Direction::X, dt, None, eps)?;
                let field = self.field_of_rep(&rep_star)?;
                let acc = self.acceleration(&field);
                let (rep_new, mv) =
                    self.adaptive_substep(&rep_star, Direction::V, dt, Some(&acc), eps)?;
                (rep_new, field, (mx, mv))
            }
            Splitting::Strang => {
                let (rep_half, mx) =
                    self.adaptive_substep(rep, Direction::X, 0.5 * dt, None, eps)?;
                let field = self.field_of_rep(&rep_half)?;
                let acc = self.acceleration(&field);
                let (rep_v, mv) =
                    self.adaptive_substep(&rep_half, Direction::V, dt, Some(&acc), eps)?;
                let (rep_new, _) =
                    self.adaptive_substep(&rep_v, Direction::X, 0.5 * dt, None, eps)?;
                let field = self.field_of_rep(&rep_new)?;
                (rep_new, field, (mx, mv))
            }
        };
        Ok(advance(state, Distribution::Sparse(rep_new), field, dt, meshes))
    }

    /// Dispatches on the state's representation.
    pub fn step(&self, state: &SimState, dt: f64, eps: Option<f64>) -> Result<SimState> {
        match (&state.f, eps) {
            (Distribution::Dense(_), _) => self.step_nonadaptive(state, dt),
            (Distribution::Sparse(_), Some(eps)) => self.step_adaptive(state, dt, eps),
            (Distribution::Sparse(_), None) => self.step_adaptive(state, dt, 0.0),
        }
    }

    /// Detail nodes that a dense x substep would retain at `eps` but the
    /// forward-Euler prediction missed.
    pub fn prediction_misses_x(&self, rep: &SparseRep, dt: f64, eps: f64) -> Result<usize> {
        let predicted = mesh::predict_active_set(&ActiveSet::from_rep(rep), |_, v| v * dt, Direction::X);
        let reference = advect_x(rep, dt);
        let truth = SparseRep::from_dense(&self.grid, &reference, eps)?;
        Ok(truth
            .detail_positions()
            .into_iter()
            .filter(|&p| !predicted.contains(p))
            .count())
    }
}

/// Builds a compressed representation from samples on a dependency-closed point set.
fn compress_samples(grid: &PhaseGrid, samples: &[(FinePos, f64)], eps: f64) -> SparseRep {
    let values: HashMap<usize, f64> = samples
        .iter()
        .map(|&(p, v)| (grid.fine_offset(p), v))
        .collect();
    let read = |p: FinePos| -> f64 {
        *values
            .get(&grid.fine_offset(p))
            .expect("compute mesh is closed under prediction dependencies")
    };
    let (cx, cv) = grid.dims(grid.coarse_level);
    let s = grid.fine_level - grid.coarse_level;
    let coarse = Grid2::from_fn(cx, cv, |i, j| read((i << s, j << s)));
    let mut details: HashMap<usize, f64> = HashMap::new();
    let mut seeds = Vec::new();
    for &(p, value) in samples {
        if grid.position_level(p) == grid.coarse_level {
            continue;
        }
        let d = value - grid.predict_at(p, read);
        details.insert(grid.fine_offset(p), d);
        if d.abs() >= eps {
            seeds.push(p);
        }
    }
    let kept = if seeds.len() == details.len() {
        seeds.into_iter().collect()
    } else {
        mesh::close_positions(grid, seeds)
    };
    let mut retained = HashMap::with_capacity(kept.len());
    let mut nodal = HashMap::with_capacity(kept.len());
    for p in kept {
        let o = grid.fine_offset(p);
        if let Some(&d) = details.get(&o) {
            retained.insert(o, d);
            nodal.insert(o, values[&o]);
        }
    }
    SparseRep::from_parts(grid.clone(), coarse, retained, nodal)
}

fn advance(
    state: &SimState,
    f: Distribution,
    field: FieldProfile,
    dt: f64,
    meshes: (usize, usize),
) -> SimState {
    let active = f.active_count();
    SimState {
        t: state.t + dt,
        f,
        field,
        step: state.step + 1,
        stats: RunStats {
            steps: state.stats.steps + 1,
            last_active: active,
            peak_active: state.stats.peak_active.max(active),
            last_mesh_points: meshes,
        },
    }
}

fn check_finite(f: &Grid2) -> Result<()> {
    if f.data.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite("distribution function".into()))
    }
}

fn check_not_degenerate(rep: &SparseRep, eps: f64) -> Result<()> {
    let below = rep.coarse().data.iter().all(|c| c.abs() < eps) && rep.detail_count() == 0;
    if below || rep.is_zero() {
        return Err(Error::DegenerateState(format!(
            "every coefficient is below the threshold {eps:e}"
        )));
    }
    Ok(())
}

/// Receives the state after every step of [`run`].
pub trait RunObserver {
    fn observe(&mut self, stepper: &Stepper, state: &SimState) -> Result<()>;

    fn finish(&mut self, _stepper: &Stepper, _state: &SimState) -> Result<()> {
        Ok(())
    }
}

impl RunObserver for () {
    fn observe(&mut self, _: &Stepper, _: &SimState) -> Result<()> {
        Ok(())
    }
}

/// Applies `n_steps` steps, notifying the observer at the start and after each step.
/// The observer is finalized even if a step fails.
pub fn run(
    stepper: &Stepper,
    initial: SimState,
    dt: f64,
    n_steps: usize,
    eps: Option<f64>,
    observer: &mut dyn RunObserver,
) -> Result<SimState> {
    observer.observe(stepper, &initial)?;
    let mut state = initial;
    for _ in 0..n_steps {
        match stepper.step(&state, dt, eps) {
            Ok(next) => state = next,
            Err(e) => {
                observer.finish(stepper, &state)?;
                return Err(e);
            }
        }
        observer.observe(stepper, &state)?;
    }
    observer.finish(stepper, &state)?;
    Ok(state)
}
