//! Runs a configured simulation and writes its artifacts.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::io::config::RunConfig;
use crate::io::diagnostics::{compute_diagnostics, DiagnosticsRecord};
use crate::io::output;
use crate::semilag::{run, RunObserver, SimState, Stepper};

/// Command-line settings that take precedence over the config file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub eps: Option<f64>,
    pub dense: bool,
    pub steps: Option<usize>,
}

impl Overrides {
    /// `--dense` wins over `--eps`.
    pub fn apply(&self, mut config: RunConfig) -> Result<RunConfig> {
        if let Some(dir) = &self.out {
            config.output.dir = dir.clone();
        }
        if let Some(eps) = self.eps {
            config.eps = Some(eps);
        }
        if self.dense {
            config.eps = None;
        }
        if let Some(steps) = self.steps {
            config.n_steps = steps;
        }
        config.validate().map_err(|(key, message)| Error::Config {
            key: key.to_string(),
            line: 0,
            message: format!("{message} (command-line override)"),
        })?;
        Ok(config)
    }
}

pub const TIMESERIES_FILE: &str = "timeseries.csv";

pub fn snapshot_file(step: usize) -> String {
    format!("snapshot_{step:06}.csv")
}

pub fn mesh_file(step: usize) -> String {
    format!("mesh_{step:06}.csv")
}

/// Writes the time series, snapshots and meshes at the configured cadence.
/// The initial and final states are always written.
pub struct OutputSink {
    dir: PathBuf,
    diag_every: usize,
    snapshot_every: usize,
    mesh_every: usize,
    pub records: Vec<DiagnosticsRecord>,
    last_record_step: Option<usize>,
}

impl OutputSink {
    pub fn new(config: &RunConfig) -> Result<Self> {
        let dir = config.output.dir.clone();
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        output::start_timeseries(&dir.join(TIMESERIES_FILE))?;
        Ok(OutputSink {
            dir,
            diag_every: config.output.diag_every,
            snapshot_every: config.output.snapshot_every,
            mesh_every: config.output.mesh_every,
            records: Vec::new(),
            last_record_step: None,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn due(every: usize, step: usize) -> bool {
        step == 0 || (every > 0 && step % every == 0)
    }

    fn record(&mut self, stepper: &Stepper, state: &SimState) -> Result<()> {
        let record = compute_diagnostics(&stepper.grid, state);
        output::append_timeseries(&record, &self.dir.join(TIMESERIES_FILE))?;
        self.records.push(record);
        self.last_record_step = Some(state.step);
        Ok(())
    }

    fn snapshot(&self, stepper: &Stepper, state: &SimState) -> Result<()> {
        let path = self.dir.join(snapshot_file(state.step));
        output::write_snapshot(&stepper.grid, &state.f.to_dense(), &path)
    }

    fn mesh(&self, state: &SimState) -> Result<()> {
        match state.f.as_sparse() {
            Some(rep) => output::write_mesh(rep, &self.dir.join(mesh_file(state.step))),
            None => Ok(()),
        }
    }
}

impl RunObserver for OutputSink {
    fn observe(&mut self, stepper: &Stepper, state: &SimState) -> Result<()> {
        if Self::due(self.diag_every, state.step) {
            self.record(stepper, state)?;
        }
        if Self::due(self.snapshot_every, state.step) {
            self.snapshot(stepper, state)?;
        }
        if Self::due(self.mesh_every, state.step) {
            self.mesh(state)?;
        }
        Ok(())
    }

    fn finish(&mut self, stepper: &Stepper, state: &SimState) -> Result<()> {
        if self.last_record_step != Some(state.step) {
            self.record(stepper, state)?;
        }
        if !Self::due(self.snapshot_every, state.step) {
            self.snapshot(stepper, state)?;
        }
        if !Self::due(self.mesh_every, state.step) {
            self.mesh(state)?;
        }
        Ok(())
    }
}

/// Outcome of [`execute`].
#[derive(Clone, Debug)]
pub struct RunSummary {
    pub final_state: SimState,
    pub records: Vec<DiagnosticsRecord>,
    pub output_dir: PathBuf,
}

pub fn build_stepper(config: &RunConfig) -> Result<Stepper> {
    let grid = config
        .scenario
        .phase_grid(config.coarse_level, config.fine_level, config.order_n)?;
    let mut stepper = Stepper::new(grid, config.scenario.clone(), config.splitting);
    stepper.eval_depth = config.eval_depth;
    Ok(stepper)
}

/// Runs `config` to completion, writing into its output directory.
pub fn execute(config: &RunConfig) -> Result<RunSummary> {
    let stepper = build_stepper(config)?;
    let initial = stepper.initial_state(config.eps)?;
    let mut sink = OutputSink::new(config)?;
    let final_state = run(&stepper, initial, config.dt, config.n_steps, config.eps, &mut sink)?;
    Ok(RunSummary {
        final_state,
        records: sink.records,
        output_dir: config.output.dir.clone(),
    })
}
