//! One-dimensional interpolating multiresolution analysis.
//!
//! Values at level `j` live on the uniform grid `x_k = k 2^{-j}` (scaled by the
//! axis length). Going up one level keeps the even samples and predicts the odd
//! ones with the centred Lagrange polynomial of odd degree `2N+1`; a detail is
//! the difference between the true odd sample and its prediction. Coefficients
//! are point values, without any `2^{j/2}` normalization.

use num_rational::Ratio;

use crate::error::{Error, Result};

/// How stencil indices outside `0..n` are resolved.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Boundary {
    /// Indices wrap modulo the grid length.
    Periodic,
    /// Values outside the grid read as zero.
    ZeroExtension,
}

impl Boundary {
    /// Maps a possibly out-of-range index onto the grid, or `None` if it reads as zero.
    #[inline]
    pub fn resolve(self, i: i64, n: usize) -> Option<usize> {
        let n = n as i64;
        match self {
            Boundary::Periodic => Some(i.rem_euclid(n) as usize),
            Boundary::ZeroExtension => (0..n).contains(&i).then_some(i as usize),
        }
    }

    #[inline]
    pub fn fetch(self, values: &[f64], i: i64) -> f64 {
        self.resolve(i, values.len()).map_or(0.0, |i| values[i])
    }
}

/// Midpoint weights of the degree-`2N+1` Lagrange interpolant.
///
/// `weights[i]` multiplies `c_{k-N+i}` when predicting the value halfway
/// between `c_k` and `c_{k+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct PredictionStencil {
    order_n: usize,
    exact: Vec<Ratio<i64>>,
    weights: Vec<f64>,
}

impl PredictionStencil {
    pub fn new(order_n: usize) -> Self {
        lagrange_midpoint_weights(order_n)
    }

    pub fn order_n(&self) -> usize {
        self.order_n
    }

    /// Number of taps, `2N + 2`.
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn exact_weights(&self) -> &[Ratio<i64>] {
        &self.exact
    }

    /// Offset of the first tap relative to the left neighbour `k`.
    #[inline]
    pub fn first_offset(&self) -> i64 {
        -(self.order_n as i64)
    }

    /// Predicted value between positions `k` and `k + 1` given a sample accessor.
    #[inline]
    pub fn predict_with(&self, k: i64, mut sample: impl FnMut(i64) -> f64) -> f64 {
        let start = k + self.first_offset();
        self.weights
            .iter()
            .enumerate()
            .map(|(i, w)| w * sample(start + i as i64))
            .sum()
    }
}

impl Default for PredictionStencil {
    fn default() -> Self {
        PredictionStencil::new(1)
    }
}

/// Builds the midpoint weights of the Lagrange interpolant on the nodes
/// `-(2N+1), .., -1, 1, .., 2N+1`, evaluated at `0`.
pub fn lagrange_midpoint_weights(order_n: usize) -> PredictionStencil {
    let taps = 2 * order_n + 2;
    let nodes: Vec<i64> = (0..taps as i64)
        .map(|i| 2 * i - (2 * order_n as i64 + 1))
        .collect();
    let exact: Vec<Ratio<i64>> = (0..taps)
        .map(|i| {
            nodes
                .iter()
                .enumerate()
                .filter(|&(m, _)| m != i)
                .fold(Ratio::from_integer(1), |acc, (_, &xm)| {
                    acc * Ratio::new(-xm, nodes[i] - xm)
                })
        })
        .collect();
    let weights = exact
        .iter()
        .map(|r| *r.numer() as f64 / *r.denom() as f64)
        .collect();
    PredictionStencil {
        order_n,
        exact,
        weights,
    }
}

/// Doubles the resolution of `coarse`: even entries copy, odd entries are predicted.
pub fn predict(coarse: &[f64], stencil: &PredictionStencil, boundary: Boundary) -> Vec<f64> {
    let mut fine = vec![0.0; 2 * coarse.len()];
    for (k, &c) in coarse.iter().enumerate() {
        fine[2 * k] = c;
        fine[2 * k + 1] = stencil.predict_with(k as i64, |i| boundary.fetch(coarse, i));
    }
    fine
}

/// Restriction to the even samples.
pub fn project(fine: &[f64]) -> Result<Vec<f64>> {
    if fine.len() % 2 != 0 {
        return Err(Error::MalformedGrid(format!(
            "cannot project a sequence of odd length {}",
            fine.len()
        )));
    }
    Ok(fine.iter().step_by(2).copied().collect())
}

/// Multilevel coefficients of a 1D sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct Coeffs1D {
    pub coarse_level: u32,
    pub fine_level: u32,
    pub boundary: Boundary,
    /// `c^{j0}` values.
    pub coarse: Vec<f64>,
    /// `details[j - j0]` holds `d^j` for `j` in `j0..j1`.
    pub details: Vec<Vec<f64>>,
}

impl Coeffs1D {
    pub fn level_details(&self, level: u32) -> &[f64] {
        &self.details[(level - self.coarse_level) as usize]
    }
}

fn base_cells(len: usize, fine_level: u32) -> Result<usize> {
    let scale = 1usize << fine_level;
    if len == 0 || len % scale != 0 {
        return Err(Error::MalformedGrid(format!(
            "length {len} is not a multiple of 2^{fine_level}"
        )));
    }
    Ok(len / scale)
}

pub fn forward_transform_1d(
    values: &[f64],
    coarse_level: u32,
    fine_level: u32,
    stencil: &PredictionStencil,
    boundary: Boundary,
) -> Result<Coeffs1D> {
    if coarse_level >= fine_level {
        return Err(Error::MalformedGrid(format!(
            "coarse level {coarse_level} must be below fine level {fine_level}"
        )));
    }
    base_cells(values.len(), fine_level)?;
    let mut current = values.to_vec();
    let mut details = Vec::with_capacity((fine_level - coarse_level) as usize);
    for _ in coarse_level..fine_level {
        let coarse = project(&current)?;
        let d: Vec<f64> = (0..coarse.len())
            .map(|k| {
                current[2 * k + 1]
                    - stencil.predict_with(k as i64, |i| boundary.fetch(&coarse, i))
            })
            .collect();
        details.push(d);
        current = coarse;
    }
    details.reverse();
    Ok(Coeffs1D {
        coarse_level,
        fine_level,
        boundary,
        coarse: current,
        details,
    })
}

pub fn inverse_transform_1d(coeffs: &Coeffs1D, stencil: &PredictionStencil) -> Result<Vec<f64>> {
    let levels = coeffs.fine_level.checked_sub(coeffs.coarse_level).unwrap_or(0) as usize;
    if levels == 0 || coeffs.details.len() != levels {
        return Err(Error::MalformedGrid(format!(
            "expected {levels} detail levels, found {}",
            coeffs.details.len()
        )));
    }
    let mut current = coeffs.coarse.clone();
    for d in &coeffs.details {
        if d.len() != current.len() {
            return Err(Error::MalformedGrid(format!(
                "detail level has {} entries, expected {}",
                d.len(),
                current.len()
            )));
        }
        let mut fine = predict(&current, stencil, coeffs.boundary);
        for (k, dk) in d.iter().enumerate() {
            fine[2 * k + 1] += dk;
        }
        current = fine;
    }
    Ok(current)
}

/// Samples of the scaling function on the dyadic grid of step `2^{-depth}`.
#[derive(Clone, Debug)]
pub struct ScalingSamples {
    pub order_n: usize,
    pub depth: u32,
    /// `values[i]` is `phi(-(2N+1) + i * 2^{-depth})`.
    pub values: Vec<f64>,
}

impl ScalingSamples {
    pub fn support_radius(&self) -> i64 {
        2 * self.order_n as i64 + 1
    }

    pub fn step(&self) -> f64 {
        (-(self.depth as f64)).exp2()
    }

    pub fn abscissa(&self, i: usize) -> f64 {
        -(self.support_radius() as f64) + i as f64 * self.step()
    }

    /// Sample at the dyadic abscissa `-(2N+1) + i 2^{-depth}`; zero outside the table.
    #[inline]
    pub fn at(&self, i: i64) -> f64 {
        if i < 0 {
            0.0
        } else {
            self.values.get(i as usize).copied().unwrap_or(0.0)
        }
    }
}

/// Cascade construction of `phi`: refine a Kronecker delta `depth` times.
pub fn scaling_function_eval(order_n: usize, depth: u32) -> ScalingSamples {
    let stencil = PredictionStencil::new(order_n);
    let radius = 2 * order_n + 1;
    let mut current = vec![0.0; 2 * radius + 1];
    current[radius] = 1.0;
    for _ in 0..depth {
        let mut fine = predict(&current, &stencil, Boundary::ZeroExtension);
        // the last odd entry lies beyond +radius, where phi vanishes
        fine.pop();
        current = fine;
    }
    ScalingSamples {
        order_n,
        depth,
        values: current,
    }
}

/// Point evaluation of `sum_k c_k phi(s - k)` through a tabulated scaling function.
///
/// Between table samples the function is interpolated with the same centred
/// degree-`2N+1` Lagrange polynomial the prediction operator uses, so
/// polynomials up to that degree are reproduced exactly.
#[derive(Clone, Debug)]
pub struct ScalingTable {
    samples: ScalingSamples,
    scale: f64,
}

impl ScalingTable {
    pub fn new(order_n: usize, depth: u32) -> Self {
        let samples = scaling_function_eval(order_n, depth);
        ScalingTable {
            scale: (depth as f64).exp2(),
            samples,
        }
    }

    pub fn order_n(&self) -> usize {
        self.samples.order_n
    }

    pub fn depth(&self) -> u32 {
        self.samples.depth
    }

    pub fn samples(&self) -> &ScalingSamples {
        &self.samples
    }

    /// Interpolated `phi(t)`.
    pub fn phi(&self, t: f64) -> f64 {
        let g = (t + self.samples.support_radius() as f64) * self.scale;
        let g0 = g.floor();
        let lw = local_lagrange(self.samples.order_n, g - g0);
        self.blend(g0 as i64, &lw)
    }

    #[inline]
    fn blend(&self, base: i64, lw: &[f64]) -> f64 {
        let n = self.samples.order_n as i64;
        lw.iter()
            .enumerate()
            .map(|(i, w)| w * self.samples.at(base - n + i as i64))
            .sum()
    }

    /// Weights `(k, phi(s - k))` of the grid samples contributing at abscissa `s`
    /// (in grid units). A grid point yields the single weight `(s, 1)`.
    pub fn weights(&self, s: f64, out: &mut Vec<(i64, f64)>) {
        out.clear();
        let i0 = s.floor();
        let frac = s - i0;
        let i0 = i0 as i64;
        if frac == 0.0 {
            out.push((i0, 1.0));
            return;
        }
        let g = frac * self.scale;
        let g0 = g.floor();
        let lw = local_lagrange(self.samples.order_n, g - g0);
        let g0 = g0 as i64;
        let radius = self.samples.support_radius();
        let per_unit = 1i64 << self.samples.depth;
        for k in (i0 - radius + 1)..=(i0 + radius) {
            // t = s - k = frac + (i0 - k)
            let base = (i0 - k + radius) * per_unit + g0;
            let w = self.blend(base, &lw);
            if w != 0.0 {
                out.push((k, w));
            }
        }
    }
}

/// Lagrange weights on the nodes `-N..=N+1` evaluated at `u` in `[0, 1)`.
fn local_lagrange(order_n: usize, u: f64) -> Vec<f64> {
    let n = order_n as i64;
    let nodes: Vec<f64> = (-n..=n + 1).map(|m| m as f64).collect();
    (0..nodes.len())
        .map(|i| {
            let mut num = 1.0;
            let mut den = 1.0;
            for (m, &xm) in nodes.iter().enumerate() {
                if m != i {
                    num *= u - xm;
                    den *= nodes[i] - xm;
                }
            }
            num / den
        })
        .collect()
}
