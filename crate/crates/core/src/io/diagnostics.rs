use crate::fields::{electric_energy, trapezoid_weights};
use crate::grid::PhaseGrid;
use crate::mra2d::Grid2;
use crate::semilag::SimState;

/// Integral quantities of one state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass: f64,
    pub l1: f64,
    pub l2: f64,
    pub fmax: f64,
    pub e_energy: f64,
    pub active: usize,
    /// Active nodes over the full finest grid size.
    pub ratio: f64,
}

/// `(mass, l1, l2, fmax)` by the trapezoid rule in both directions.
pub fn norms(grid: &PhaseGrid, f: &Grid2) -> (f64, f64, f64, f64) {
    let wx = trapezoid_weights(&grid.x, grid.fine_level);
    let wv = trapezoid_weights(&grid.v, grid.fine_level);
    let (mut mass, mut l1, mut l2sq, mut fmax) = (0.0, 0.0, 0.0, 0.0f64);
    for (i, &a) in wx.iter().enumerate() {
        let (mut m, mut a1, mut a2) = (0.0, 0.0, 0.0);
        for (j, &b) in wv.iter().enumerate() {
            let v = f.get(i, j);
            m += b * v;
            a1 += b * v.abs();
            a2 += b * v * v;
            fmax = fmax.max(v.abs());
        }
        mass += a * m;
        l1 += a * a1;
        l2sq += a * a2;
    }
    (mass, l1, l2sq.sqrt(), fmax)
}

pub fn compute_diagnostics(grid: &PhaseGrid, state: &SimState) -> DiagnosticsRecord {
    let f = state.f.to_dense();
    let (mass, l1, l2, fmax) = norms(grid, &f);
    let active = state.f.active_count();
    DiagnosticsRecord {
        t: state.t,
        mass,
        l1,
        l2,
        fmax,
        e_energy: electric_energy(&state.field),
        active,
        ratio: active as f64 / grid.fine_len() as f64,
    }
}

/// Depth of the phase-space hole around `(L/2, 0)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HoleProbe {
    /// Minimum of `f` over `|x - L/2| <= L/8`, `|v| <= 0.5`.
    pub min_now: f64,
    /// Maximum of the initial distribution over the same box.
    pub initial_max: f64,
}

impl HoleProbe {
    /// The hole is present once the minimum drops below 20% of the initial maximum.
    pub fn triggered(&self) -> bool {
        self.min_now < 0.2 * self.initial_max
    }
}

pub fn hole_probe(grid: &PhaseGrid, f: &Grid2, f0: &Grid2) -> HoleProbe {
    let centre = grid.x.lo + 0.5 * grid.x.length();
    let half_width = grid.x.length() / 8.0;
    let mut probe = HoleProbe {
        min_now: f64::INFINITY,
        initial_max: f64::NEG_INFINITY,
    };
    let (nx, nv) = grid.fine_dims();
    for i in 0..nx {
        for j in 0..nv {
            let (x, v) = grid.fine_coords((i, j));
            if (x - centre).abs() <= half_width && v.abs() <= 0.5 {
                probe.min_now = probe.min_now.min(f.get(i, j));
                probe.initial_max = probe.initial_max.max(f0.get(i, j));
            }
        }
    }
    probe
}
