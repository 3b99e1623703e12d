//! Run configuration, read from a small TOML file.
//!
//! ```toml
//! scenario = "two_stream"   # or "cylinder"
//! j0 = 4                    # coarsest level
//! j1 = 7                    # finest level
//! dt = 0.125
//! n_steps = 240
//! eps = 1e-4                # omit for a dense (non-adaptive) run
//! ```
//!
//! Optional keys and defaults: `order = 1` (stencil N), `splitting = "lie"`
//! (or `"strang"`), `alpha = 0.25`, `k0 = 0.5`, `vmax = 7.0`,
//! `output_dir = "output"`, `diag_every = 1`, `snapshot_every = 0` (final
//! snapshot only), `mesh_every = 0` (final mesh only, adaptive runs),
//! `eval_depth = 6`. Unknown keys are rejected.

use std::path::PathBuf;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::scenarios::ScenarioConfig;
use crate::semilag::Splitting;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: String,
    j0: u32,
    j1: u32,
    dt: f64,
    n_steps: usize,
    eps: Option<f64>,
    order: Option<usize>,
    splitting: Option<String>,
    alpha: Option<f64>,
    k0: Option<f64>,
    vmax: Option<f64>,
    output_dir: Option<PathBuf>,
    diag_every: Option<usize>,
    snapshot_every: Option<usize>,
    mesh_every: Option<usize>,
    eval_depth: Option<u32>,
}

/// Where and how often a run writes its artifacts.
#[derive(Clone, Debug, PartialEq)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Steps between time-series rows (0 disables; the final step is always written).
    pub diag_every: usize,
    /// Steps between snapshots (0 keeps only the initial and final ones).
    pub snapshot_every: usize,
    pub mesh_every: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("output"),
            diag_every: 1,
            snapshot_every: 0,
            mesh_every: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub scenario: ScenarioConfig,
    pub coarse_level: u32,
    pub fine_level: u32,
    pub order_n: usize,
    pub dt: f64,
    pub n_steps: usize,
    /// `None` selects the dense stepper.
    pub eps: Option<f64>,
    pub splitting: Splitting,
    pub eval_depth: u32,
    pub output: OutputConfig,
}

impl RunConfig {
    /// A dense run with the default output settings.
    pub fn new(scenario: ScenarioConfig, coarse_level: u32, fine_level: u32, dt: f64, n_steps: usize) -> Self {
        RunConfig {
            scenario,
            coarse_level,
            fine_level,
            order_n: 1,
            dt,
            n_steps,
            eps: None,
            splitting: Splitting::Lie,
            eval_depth: crate::mra2d::DEFAULT_EVAL_DEPTH,
            output: OutputConfig::default(),
        }
    }

    /// Checks the invariants; the error names the offending key.
    pub fn validate(&self) -> std::result::Result<(), (&'static str, String)> {
        if self.coarse_level >= self.fine_level {
            return Err((
                "j0",
                format!(
                    "coarse level j0 = {} must be strictly below the fine level j1 = {}",
                    self.coarse_level, self.fine_level
                ),
            ));
        }
        if self.fine_level > 14 {
            return Err(("j1", format!("j1 = {} is too large", self.fine_level)));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(("dt", format!("dt must be positive, got {}", self.dt)));
        }
        if let Some(eps) = self.eps {
            if !(eps >= 0.0) || !eps.is_finite() {
                return Err(("eps", format!("eps must be non-negative, got {eps}")));
            }
        }
        if self.order_n > 3 {
            return Err(("order", format!("order must be in 0..=3, got {}", self.order_n)));
        }
        if self.eval_depth == 0 || self.eval_depth > 12 {
            return Err(("eval_depth", format!("eval_depth must be in 1..=12, got {}", self.eval_depth)));
        }
        Ok(())
    }
}

fn line_of(text: &str, key: &str) -> usize {
    text.lines()
        .position(|l| {
            let l = l.trim_start();
            l.strip_prefix(key)
                .is_some_and(|rest| rest.trim_start().starts_with('='))
        })
        .map_or(0, |i| i + 1)
}

fn line_at_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn config_error(text: &str, key: &str, message: String) -> Error {
    Error::Config {
        key: key.to_string(),
        line: line_of(text, key),
        message,
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let message = e.message().to_string();
        let named = message.split('`').nth(1).map(str::to_string);
        let line = match (e.span(), &named) {
            (_, Some(key)) if message.starts_with("missing field") => line_of(text, key),
            (Some(span), _) => line_at_offset(text, span.start),
            (None, Some(key)) => line_of(text, key),
            (None, None) => 0,
        };
        // fall back to the key written on the offending line
        let key = named.or_else(|| {
            text.lines()
                .nth(line.checked_sub(1)?)
                .and_then(|l| l.split_once('='))
                .map(|(k, _)| k.trim().to_string())
        });
        match key {
            Some(key) => Error::Config { key, line, message },
            None => Error::ConfigSyntax(format!("line {line}: {message}")),
        }
    })?;

    let alpha = raw.alpha.unwrap_or(0.25);
    let k0 = raw.k0.unwrap_or(0.5);
    let vmax = raw.vmax.unwrap_or(7.0);
    let scenario = match raw.scenario.as_str() {
        "cylinder" => ScenarioConfig::cylinder(),
        "two_stream" | "twostream" => {
            if !(k0 > 0.0) {
                return Err(config_error(text, "k0", format!("k0 must be positive, got {k0}")));
            }
            if !(vmax > 0.0) {
                return Err(config_error(text, "vmax", format!("vmax must be positive, got {vmax}")));
            }
            ScenarioConfig::two_stream(alpha, k0, vmax)
        }
        other => {
            return Err(config_error(
                text,
                "scenario",
                format!("unknown scenario `{other}` (expected `cylinder` or `two_stream`)"),
            ))
        }
    };
    let splitting = match raw.splitting.as_deref() {
        None | Some("lie") => Splitting::Lie,
        Some("strang") => Splitting::Strang,
        Some(other) => {
            return Err(config_error(
                text,
                "splitting",
                format!("unknown splitting `{other}` (expected `lie` or `strang`)"),
            ))
        }
    };
    let defaults = OutputConfig::default();
    let config = RunConfig {
        scenario,
        coarse_level: raw.j0,
        fine_level: raw.j1,
        order_n: raw.order.unwrap_or(1),
        dt: raw.dt,
        n_steps: raw.n_steps,
        eps: raw.eps,
        splitting,
        eval_depth: raw.eval_depth.unwrap_or(crate::mra2d::DEFAULT_EVAL_DEPTH),
        output: OutputConfig {
            dir: raw.output_dir.unwrap_or(defaults.dir),
            diag_every: raw.diag_every.unwrap_or(defaults.diag_every),
            snapshot_every: raw.snapshot_every.unwrap_or(defaults.snapshot_every),
            mesh_every: raw.mesh_every.unwrap_or(defaults.mesh_every),
        },
    };
    config
        .validate()
        .map_err(|(key, message)| config_error(text, key, message))?;
    Ok(config)
}

pub fn load_config(path: &std::path::Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
        key: "<file>".into(),
        line: 0,
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::ScenarioKind;

    const MINIMAL: &str = "scenario = \"two_stream\"\nj0 = 4\nj1 = 7\ndt = 0.125\nn_steps = 10\n";

    #[test]
    fn minimal_two_stream() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.scenario.kind, ScenarioKind::TwoStream);
        assert_eq!(c.splitting, Splitting::Lie);
        assert_eq!(c.eps, None);
        assert_eq!(c.dt, 0.125);
        assert_eq!(c.order_n, 1);
        assert!((c.scenario.x.hi - 4.0 * std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn level_constraint() {
        let text = MINIMAL.replace("j1 = 7", "j1 = 4");
        match parse_config(&text).unwrap_err() {
            Error::Config { key, line, message } => {
                assert_eq!(key, "j0");
                assert_eq!(line, 2);
                assert!(message.contains("strictly below"));
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn unknown_and_missing_keys() {
        let text = format!("{MINIMAL}colour = 3\n");
        match parse_config(&text).unwrap_err() {
            Error::Config { key, line, .. } => {
                assert_eq!(key, "colour");
                assert_eq!(line, 6);
            }
            e => panic!("unexpected {e:?}"),
        }
        let text = MINIMAL.replace("dt = 0.125\n", "");
        match parse_config(&text).unwrap_err() {
            Error::Config { key, .. } => assert_eq!(key, "dt"),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn type_mismatch_names_line() {
        let text = MINIMAL.replace("dt = 0.125", "dt = \"fast\"");
        match parse_config(&text).unwrap_err() {
            Error::Config { key, line, .. } => {
                assert_eq!(key, "dt");
                assert_eq!(line, 4);
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn eps_and_strang() {
        let text = format!("{MINIMAL}eps = 1e-4\nsplitting = \"strang\"\n");
        let c = parse_config(&text).unwrap();
        assert_eq!(c.eps, Some(1e-4));
        assert_eq!(c.splitting, Splitting::Strang);
    }
}
