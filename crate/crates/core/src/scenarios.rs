//! Initial conditions and exact reference solutions.

use std::f64::consts::PI;

use crate::error::Result;
use crate::grid::{Axis, PhaseGrid};
use crate::mra::Boundary;
use crate::mra2d::Grid2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScenarioKind {
    /// Slotted disk rigidly rotated by the field `(v, -x)`.
    Cylinder,
    /// Two counter-streaming electron beams with a cosine density perturbation.
    TwoStream,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldMode {
    /// Known external field, no Poisson solve.
    Applied,
    SelfConsistent,
}

/// Slot half-width of the cylinder.
pub const SLOT_HALF_WIDTH: f64 = 0.125;
pub const CYLINDER_RADIUS: f64 = 0.5;

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    pub x: Axis,
    pub v: Axis,
    pub alpha: f64,
    pub k0: f64,
    pub field_mode: FieldMode,
}

impl ScenarioConfig {
    /// `[-0.5, 0.5]^2`, zero extension on both axes.
    pub fn cylinder() -> Self {
        ScenarioConfig {
            kind: ScenarioKind::Cylinder,
            x: Axis::new(-0.5, 0.5, 1, Boundary::ZeroExtension),
            v: Axis::new(-0.5, 0.5, 1, Boundary::ZeroExtension),
            alpha: 0.0,
            k0: 0.0,
            field_mode: FieldMode::Applied,
        }
    }

    /// Periodic in x with period `2 pi / k0`, `|v| <= vmax` with zero extension.
    pub fn two_stream(alpha: f64, k0: f64, vmax: f64) -> Self {
        ScenarioConfig {
            kind: ScenarioKind::TwoStream,
            x: Axis::new(0.0, 2.0 * PI / k0, 1, Boundary::Periodic),
            v: Axis::new(-vmax, vmax, 1, Boundary::ZeroExtension),
            alpha,
            k0,
            field_mode: FieldMode::SelfConsistent,
        }
    }

    /// The configuration used for the instability run: `alpha = 0.25`, `k0 = 0.5`, `vmax = 7`.
    pub fn two_stream_default() -> Self {
        Self::two_stream(0.25, 0.5, 7.0)
    }

    pub fn phase_grid(&self, coarse_level: u32, fine_level: u32, order_n: usize) -> Result<PhaseGrid> {
        PhaseGrid::new(self.x, self.v, coarse_level, fine_level, order_n)
    }

    pub fn initial_value(&self, x: f64, v: f64) -> f64 {
        match self.kind {
            ScenarioKind::Cylinder => init_cylinder(x, v),
            ScenarioKind::TwoStream => init_two_stream(x, v, self.alpha, self.k0),
        }
    }

    /// Initial condition sampled on the finest grid.
    pub fn sample(&self, grid: &PhaseGrid) -> Grid2 {
        let (nx, nv) = grid.fine_dims();
        Grid2::from_fn(nx, nv, |i, j| {
            let (x, v) = grid.fine_coords((i, j));
            self.initial_value(x, v)
        })
    }

    /// Characteristic acceleration `dv/dt` as a function of `x` for applied-field runs.
    pub fn applied_acceleration(&self, x: f64) -> f64 {
        match self.kind {
            ScenarioKind::Cylinder => crate::fields::applied_field_cylinder(x, 0.0).1,
            ScenarioKind::TwoStream => 0.0,
        }
    }
}

pub fn init_cylinder(x: f64, v: f64) -> f64 {
    let inside = (x * x + v * v).sqrt() < CYLINDER_RADIUS;
    if inside && (x < 0.0 || v.abs() > SLOT_HALF_WIDTH) {
        1.0
    } else {
        0.0
    }
}

pub fn init_two_stream(x: f64, v: f64, alpha: f64, k0: f64) -> f64 {
    v * v * (-0.5 * v * v).exp() * (1.0 + alpha * (k0 * x).cos()) / (2.0 * PI).sqrt()
}

/// Exact solution of `f_t + v f_x - x f_v = 0`: a clockwise rigid rotation.
pub fn exact_cylinder_solution(t: f64, x: f64, v: f64) -> f64 {
    let (s, c) = t.sin_cos();
    init_cylinder(x * c - v * s, x * s + v * c)
}

/// Area of the slotted disk.
pub fn cylinder_area() -> f64 {
    let (r, b) = (CYLINDER_RADIUS, SLOT_HALF_WIDTH);
    let slot = b * (r * r - b * b).sqrt() + r * r * (b / r).asin();
    PI * r * r - slot
}

fn segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0);
    let (qx, qy) = (a.0 + t * dx, a.1 + t * dy);
    ((p.0 - qx).powi(2) + (p.1 - qy).powi(2)).sqrt()
}

/// Distance from `(x, v)` to the jump set of the exact cylinder solution at time `t`.
pub fn cylinder_discontinuity_distance(t: f64, x: f64, v: f64) -> f64 {
    let (s, c) = t.sin_cos();
    let p = (x * c - v * s, x * s + v * c);
    let (r, b) = (CYLINDER_RADIUS, SLOT_HALF_WIDTH);
    let mouth = (r * r - b * b).sqrt();
    // circular arc, minus the part cut away by the slot mouth
    let rho = (p.0 * p.0 + p.1 * p.1).sqrt();
    let arc = if p.0 > 0.0 && p.1.abs() < b {
        let ends = [(mouth, b), (mouth, -b)];
        ends.iter()
            .map(|e| ((p.0 - e.0).powi(2) + (p.1 - e.1).powi(2)).sqrt())
            .fold(f64::INFINITY, f64::min)
    } else {
        (rho - r).abs()
    };
    let walls = [
        segment_distance(p, (0.0, b), (mouth, b)),
        segment_distance(p, (0.0, -b), (mouth, -b)),
        segment_distance(p, (0.0, -b), (0.0, b)),
    ];
    walls.iter().copied().fold(arc, f64::min)
}
