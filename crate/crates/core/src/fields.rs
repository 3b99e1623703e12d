//! Charge density, the periodic Poisson solve and field diagnostics.
//!
//! Normalized units: electron charge `q = -1`, mass `m = 1`, `eps0 = 1`, time
//! in inverse plasma frequencies. A uniform neutralizing background is implied
//! by removing the spatial mean of the charge density.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::grid::{Axis, PhaseGrid};
use crate::mra::Boundary;
use crate::mra2d::Grid2;

pub const CHARGE: f64 = -1.0;
pub const MASS: f64 = 1.0;
pub const EPS0: f64 = 1.0;

/// Electrostatic field on the finest x grid.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldProfile {
    /// Spatial period.
    pub length: f64,
    /// Net charge density (zero mean).
    pub rho: Vec<f64>,
    pub e_field: Vec<f64>,
    pub phi: Option<Vec<f64>>,
}

impl FieldProfile {
    pub fn zeros(n: usize, length: f64) -> Self {
        FieldProfile {
            length,
            rho: vec![0.0; n],
            e_field: vec![0.0; n],
            phi: None,
        }
    }

    pub fn dx(&self) -> f64 {
        self.length / self.e_field.len() as f64
    }
}

/// Trapezoid weights of a uniform axis sampled at `lo + k h`, `k < n`.
/// A zero-extended axis also includes the (zero) end point at `hi`.
pub fn trapezoid_weights(axis: &Axis, level: u32) -> Vec<f64> {
    let n = axis.points(level);
    let h = axis.spacing(level);
    let mut w = vec![h; n];
    if axis.boundary == Boundary::ZeroExtension {
        w[0] = 0.5 * h;
    }
    w
}

/// Net charge density `q * int f dv` minus its spatial mean, from finest-level samples.
pub fn charge_density(grid: &PhaseGrid, f: &Grid2) -> Vec<f64> {
    let wv = trapezoid_weights(&grid.v, grid.fine_level);
    let mut rho: Vec<f64> = (0..f.nx)
        .map(|i| {
            let row = &f.data[i * f.nv..(i + 1) * f.nv];
            CHARGE * row.iter().zip(&wv).map(|(a, w)| a * w).sum::<f64>()
        })
        .collect();
    let mean = rho.iter().sum::<f64>() / rho.len() as f64;
    rho.iter_mut().for_each(|r| *r -= mean);
    rho
}

/// Spectral solve of `-eps0 phi'' = rho` with zero-mean `phi`, and `E = -phi'`.
pub fn solve_poisson_periodic(rho_net: &[f64], length: f64) -> Result<FieldProfile> {
    let n = rho_net.len();
    if n == 0 {
        return Err(Error::MalformedGrid("empty charge density".into()));
    }
    let mean = rho_net.iter().sum::<f64>() / n as f64;
    let scale = rho_net.iter().fold(1.0f64, |m, r| m.max(r.abs()));
    let tolerance = 1e-10 * scale;
    if mean.abs() > tolerance {
        return Err(Error::Solvability { mean, tolerance });
    }
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(n);
    let ifft = planner.plan_fft_inverse(n);
    let mut rho_hat: Vec<Complex<f64>> = rho_net.iter().map(|&r| Complex::new(r, 0.0)).collect();
    fft.process(&mut rho_hat);
    let mut phi_hat = vec![Complex::new(0.0, 0.0); n];
    let mut e_hat = vec![Complex::new(0.0, 0.0); n];
    for m in 1..n {
        let k = wavenumber(m, n, length);
        phi_hat[m] = rho_hat[m] / (EPS0 * k * k);
        // the Nyquist mode has no odd derivative on a real grid
        if 2 * m != n {
            e_hat[m] = -Complex::new(0.0, k) * phi_hat[m];
        }
    }
    ifft.process(&mut phi_hat);
    ifft.process(&mut e_hat);
    let inv = 1.0 / n as f64;
    Ok(FieldProfile {
        length,
        rho: rho_net.to_vec(),
        e_field: e_hat.iter().map(|c| c.re * inv).collect(),
        phi: Some(phi_hat.iter().map(|c| c.re * inv).collect()),
    })
}

fn wavenumber(m: usize, n: usize, length: f64) -> f64 {
    let signed = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
    2.0 * std::f64::consts::PI * signed / length
}

/// Spectral derivative of a periodic sequence (Nyquist mode dropped).
pub fn spectral_derivative(values: &[f64], length: f64) -> Vec<f64> {
    let n = values.len();
    let mut planner = FftPlanner::<f64>::new();
    let mut hat: Vec<Complex<f64>> = values.iter().map(|&r| Complex::new(r, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut hat);
    hat[0] = Complex::new(0.0, 0.0);
    for (m, h) in hat.iter_mut().enumerate().skip(1) {
        *h = if 2 * m == n {
            Complex::new(0.0, 0.0)
        } else {
            *h * Complex::new(0.0, wavenumber(m, n, length))
        };
    }
    planner.plan_fft_inverse(n).process(&mut hat);
    hat.iter().map(|c| c.re / n as f64).collect()
}

/// Self-consistent field of a finest-level distribution.
pub fn self_consistent_field(grid: &PhaseGrid, f: &Grid2) -> Result<FieldProfile> {
    let rho = charge_density(grid, f);
    solve_poisson_periodic(&rho, grid.x.length())
}

/// Advection field `(dx/dt, dv/dt)` of the rotating-cylinder test.
pub fn applied_field_cylinder(x: f64, v: f64) -> (f64, f64) {
    (v, -x)
}

/// `(1/2) sum E_i^2 dx`.
pub fn electric_energy(field: &FieldProfile) -> f64 {
    let dx = field.dx();
    0.5 * field.e_field.iter().map(|e| e * e).sum::<f64>() * dx
}
