//! Tensor-product multiresolution on the phase-space grid.
//!
//! Each level adds three families of details on top of the coarser samples:
//! row details at `(2k1+1, 2k2)` predicted in x, col details at `(2k1, 2k2+1)`
//! predicted in v, and mid details at `(2k1+1, 2k2+1)` predicted in v first and
//! then in x from those intermediate values.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::grid::{DyadicNode2D, FinePos, NodeKind, PhaseGrid};
use crate::mesh;
use crate::mra::{PredictionStencil, ScalingTable};

/// Default number of dyadic levels below the finest grid used to tabulate
/// the scaling function for point evaluation.
pub const DEFAULT_EVAL_DEPTH: u32 = 6;

/// Dense 2D array, row-major with x as the slow index.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid2 {
    pub nx: usize,
    pub nv: usize,
    pub data: Vec<f64>,
}

impl Grid2 {
    pub fn zeros(nx: usize, nv: usize) -> Self {
        Grid2 {
            nx,
            nv,
            data: vec![0.0; nx * nv],
        }
    }

    pub fn from_fn(nx: usize, nv: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(nx * nv);
        for i in 0..nx {
            for j in 0..nv {
                data.push(f(i, j));
            }
        }
        Grid2 { nx, nv, data }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.nv + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.nv + j] = value;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Grid2) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Sample with boundary resolution; `None` reads as zero.
    #[inline]
    fn fetch(&self, grid: &PhaseGrid, m1: i64, m2: i64) -> f64 {
        match (
            grid.x.boundary.resolve(m1, self.nx),
            grid.v.boundary.resolve(m2, self.nv),
        ) {
            (Some(i), Some(j)) => self.get(i, j),
            _ => 0.0,
        }
    }
}

/// Details of one level.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelDetails {
    pub row: Grid2,
    pub col: Grid2,
    pub mid: Grid2,
}

/// Dense multilevel coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Coeffs2D {
    pub grid: PhaseGrid,
    pub coarse: Grid2,
    /// `levels[j - j0]` holds the details of level `j`.
    pub levels: Vec<LevelDetails>,
}

impl Coeffs2D {
    pub fn level(&self, level: u32) -> &LevelDetails {
        &self.levels[(level - self.grid.coarse_level) as usize]
    }

    pub fn level_mut(&mut self, level: u32) -> &mut LevelDetails {
        &mut self.levels[(level - self.grid.coarse_level) as usize]
    }

    /// Detail coefficient of a node (coarse nodes return their value).
    pub fn get(&self, node: &DyadicNode2D) -> f64 {
        let (k1, k2) = (node.k1 as usize, node.k2 as usize);
        match node.kind {
            NodeKind::Coarse => self.coarse.get(k1, k2),
            NodeKind::RowDetail => self.level(node.level).row.get(k1, k2),
            NodeKind::ColDetail => self.level(node.level).col.get(k1, k2),
            NodeKind::MidDetail => self.level(node.level).mid.get(k1, k2),
        }
    }

    pub fn set(&mut self, node: &DyadicNode2D, value: f64) {
        let (k1, k2) = (node.k1 as usize, node.k2 as usize);
        match node.kind {
            NodeKind::Coarse => self.coarse.set(k1, k2, value),
            NodeKind::RowDetail => self.level_mut(node.level).row.set(k1, k2, value),
            NodeKind::ColDetail => self.level_mut(node.level).col.set(k1, k2, value),
            NodeKind::MidDetail => self.level_mut(node.level).mid.set(k1, k2, value),
        }
    }
}

fn predict_row(c: &Grid2, grid: &PhaseGrid, k1: i64, k2: i64) -> f64 {
    grid.stencil.predict_with(k1, |m1| c.fetch(grid, m1, k2))
}

fn predict_col(c: &Grid2, grid: &PhaseGrid, k1: i64, k2: i64) -> f64 {
    grid.stencil.predict_with(k2, |m2| c.fetch(grid, k1, m2))
}

fn predict_mid(c: &Grid2, grid: &PhaseGrid, k1: i64, k2: i64) -> f64 {
    let s: &PredictionStencil = &grid.stencil;
    let off = s.first_offset();
    let mut column = [0.0f64; 16];
    for (a, slot) in column.iter_mut().enumerate().take(s.len()) {
        let m1 = k1 + off + a as i64;
        *slot = s.predict_with(k2, |m2| c.fetch(grid, m1, m2));
    }
    s.predict_with(k1, |m1| column[(m1 - k1 - off) as usize])
}

/// Full 2D decomposition of finest-level samples.
pub fn forward_transform_2d(grid: &PhaseGrid, values: &Grid2) -> Result<Coeffs2D> {
    let (nx, nv) = grid.fine_dims();
    if values.nx != nx || values.nv != nv || values.data.len() != nx * nv {
        return Err(Error::MalformedGrid(format!(
            "expected a {nx}x{nv} grid, got {}x{}",
            values.nx, values.nv
        )));
    }
    let mut current = values.clone();
    let mut levels = Vec::new();
    for level in (grid.coarse_level..grid.fine_level).rev() {
        let (cx, cv) = grid.dims(level);
        let coarse = Grid2::from_fn(cx, cv, |i, j| current.get(2 * i, 2 * j));
        let mut row = Grid2::zeros(cx, cv);
        let mut col = Grid2::zeros(cx, cv);
        let mut mid = Grid2::zeros(cx, cv);
        for i in 0..cx {
            for j in 0..cv {
                let (k1, k2) = (i as i64, j as i64);
                row.set(i, j, current.get(2 * i + 1, 2 * j) - predict_row(&coarse, grid, k1, k2));
                col.set(i, j, current.get(2 * i, 2 * j + 1) - predict_col(&coarse, grid, k1, k2));
                mid.set(
                    i,
                    j,
                    current.get(2 * i + 1, 2 * j + 1) - predict_mid(&coarse, grid, k1, k2),
                );
            }
        }
        levels.push(LevelDetails { row, col, mid });
        current = coarse;
    }
    levels.reverse();
    Ok(Coeffs2D {
        grid: grid.clone(),
        coarse: current,
        levels,
    })
}

/// Refines `coarse` by one level, adding the given details (or none).
fn refine_level(grid: &PhaseGrid, coarse: &Grid2, details: Option<&LevelDetails>) -> Grid2 {
    let (cx, cv) = (coarse.nx, coarse.nv);
    let mut fine = Grid2::zeros(2 * cx, 2 * cv);
    for i in 0..cx {
        for j in 0..cv {
            let (k1, k2) = (i as i64, j as i64);
            let (dr, dc, dm) = details.map_or((0.0, 0.0, 0.0), |d| {
                (d.row.get(i, j), d.col.get(i, j), d.mid.get(i, j))
            });
            fine.set(2 * i, 2 * j, coarse.get(i, j));
            fine.set(2 * i + 1, 2 * j, predict_row(coarse, grid, k1, k2) + dr);
            fine.set(2 * i, 2 * j + 1, predict_col(coarse, grid, k1, k2) + dc);
            fine.set(2 * i + 1, 2 * j + 1, predict_mid(coarse, grid, k1, k2) + dm);
        }
    }
    fine
}

fn check_shapes(coeffs: &Coeffs2D) -> Result<()> {
    let grid = &coeffs.grid;
    let expected = (grid.fine_level - grid.coarse_level) as usize;
    if coeffs.levels.len() != expected {
        return Err(Error::MalformedGrid(format!(
            "expected {expected} detail levels, found {}",
            coeffs.levels.len()
        )));
    }
    let (cx, cv) = grid.dims(grid.coarse_level);
    if coeffs.coarse.nx != cx || coeffs.coarse.nv != cv {
        return Err(Error::MalformedGrid("coarse grid has the wrong shape".into()));
    }
    for (i, lvl) in coeffs.levels.iter().enumerate() {
        let (lx, lv) = grid.dims(grid.coarse_level + i as u32);
        for g in [&lvl.row, &lvl.col, &lvl.mid] {
            if g.nx != lx || g.nv != lv {
                return Err(Error::MalformedGrid(format!(
                    "detail grid of level {} has the wrong shape",
                    grid.coarse_level + i as u32
                )));
            }
        }
    }
    Ok(())
}

pub fn inverse_transform_2d(coeffs: &Coeffs2D) -> Result<Grid2> {
    check_shapes(coeffs)?;
    let mut current = coeffs.coarse.clone();
    for lvl in &coeffs.levels {
        current = refine_level(&coeffs.grid, &current, Some(lvl));
    }
    Ok(current)
}

/// Compressed distribution function: the full coarse grid, the retained
/// details, and the point values at every retained node.
///
/// The retained detail set is closed under prediction dependencies, so the
/// value at any retained node is reproduced exactly from the coefficients.
#[derive(Clone, Debug)]
pub struct SparseRep {
    grid: PhaseGrid,
    coarse: Grid2,
    /// Keyed by finest-grid offset.
    details: HashMap<usize, f64>,
    nodal: HashMap<usize, f64>,
    table: ScalingTable,
}

impl SparseRep {
    pub(crate) fn from_parts(
        grid: PhaseGrid,
        coarse: Grid2,
        details: HashMap<usize, f64>,
        nodal: HashMap<usize, f64>,
    ) -> Self {
        let table = ScalingTable::new(grid.order_n(), DEFAULT_EVAL_DEPTH);
        SparseRep {
            grid,
            coarse,
            details,
            nodal,
            table,
        }
    }

    /// Decomposes finest-level samples and compresses at `eps`, caching node
    /// values straight from the samples.
    pub fn from_dense(grid: &PhaseGrid, values: &Grid2, eps: f64) -> Result<Self> {
        let coeffs = forward_transform_2d(grid, values)?;
        let mut rep = threshold(&coeffs, eps);
        for (&offset, slot) in rep.nodal.iter_mut() {
            *slot = values.data[offset];
        }
        Ok(rep)
    }

    /// Sets the tabulation depth used by point evaluation.
    pub fn with_eval_depth(mut self, depth: u32) -> Self {
        self.table = ScalingTable::new(self.grid.order_n(), depth);
        self
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn coarse(&self) -> &Grid2 {
        &self.coarse
    }

    pub fn table(&self) -> &ScalingTable {
        &self.table
    }

    pub fn detail_count(&self) -> usize {
        self.details.len()
    }

    /// Coarse nodes plus retained detail nodes.
    pub fn active_count(&self) -> usize {
        self.grid.coarse_len() + self.details.len()
    }

    pub fn detail_at(&self, pos: FinePos) -> Option<f64> {
        self.details.get(&self.grid.fine_offset(pos)).copied()
    }

    /// Cached value at a retained node.
    pub fn nodal_at(&self, pos: FinePos) -> Option<f64> {
        let offset = self.grid.fine_offset(pos);
        if let Some(v) = self.nodal.get(&offset) {
            return Some(*v);
        }
        let node = self.grid.node_at(pos);
        (node.kind == NodeKind::Coarse).then(|| self.coarse.get(node.k1 as usize, node.k2 as usize))
    }

    /// Finest positions of all retained detail nodes, sorted.
    pub fn detail_positions(&self) -> Vec<FinePos> {
        let mut keys: Vec<usize> = self.details.keys().copied().collect();
        keys.sort_unstable();
        keys.into_iter()
            .map(|o| self.grid.fine_pos_of_offset(o))
            .collect()
    }

    /// Finest positions of all active nodes (coarse and detail), sorted.
    pub fn active_positions(&self) -> Vec<FinePos> {
        let mut out = mesh::coarse_positions(&self.grid);
        out.extend(self.detail_positions());
        out.sort_unstable();
        out
    }

    /// All active nodes with their value and detail (coarse nodes report a zero detail).
    pub fn active_nodes(&self) -> Vec<(DyadicNode2D, f64, f64)> {
        self.active_positions()
            .into_iter()
            .map(|p| {
                let node = self.grid.node_at(p);
                let value = self.nodal_at(p).unwrap_or(0.0);
                let detail = self.detail_at(p).unwrap_or(0.0);
                (node, value, detail)
            })
            .collect()
    }

    /// Back to dense coefficients, inactive details set to zero.
    pub fn to_coeffs(&self) -> Coeffs2D {
        let grid = &self.grid;
        let levels = (grid.coarse_level..grid.fine_level)
            .map(|l| {
                let (nx, nv) = grid.dims(l);
                LevelDetails {
                    row: Grid2::zeros(nx, nv),
                    col: Grid2::zeros(nx, nv),
                    mid: Grid2::zeros(nx, nv),
                }
            })
            .collect();
        let mut coeffs = Coeffs2D {
            grid: grid.clone(),
            coarse: self.coarse.clone(),
            levels,
        };
        for (&offset, &d) in &self.details {
            let node = grid.node_at(grid.fine_pos_of_offset(offset));
            coeffs.set(&node, d);
        }
        coeffs
    }

    pub fn evaluator(&self) -> Evaluator<'_> {
        Evaluator::new(self)
    }

    /// Value of the represented function at an arbitrary phase-space point.
    pub fn evaluate(&self, x: f64, v: f64) -> f64 {
        self.evaluator().evaluate(x, v)
    }

    /// Whether every retained node is identically zero.
    pub fn is_zero(&self) -> bool {
        self.coarse.data.iter().all(|&c| c == 0.0) && self.details.values().all(|&d| d == 0.0)
    }
}

/// Compression: keeps every coarse value and the details with `|d| >= eps`,
/// closed under prediction dependencies.
pub fn threshold(coeffs: &Coeffs2D, eps: f64) -> SparseRep {
    let grid = &coeffs.grid;
    let (nx, nv) = grid.fine_dims();
    let mut seeds = Vec::new();
    for i1 in 0..nx {
        for i2 in 0..nv {
            let pos = (i1, i2);
            let node = grid.node_at(pos);
            if node.kind != NodeKind::Coarse && coeffs.get(&node).abs() >= eps {
                seeds.push(pos);
            }
        }
    }
    let closed = mesh::close_positions(grid, seeds);
    let details: HashMap<usize, f64> = closed
        .iter()
        .filter(|&&p| grid.position_level(p) > grid.coarse_level)
        .map(|&p| (grid.fine_offset(p), coeffs.get(&grid.node_at(p))))
        .collect();
    let nodal = if details.is_empty() {
        HashMap::new()
    } else {
        let dense = inverse_transform_2d(coeffs).expect("coefficients built on their own grid");
        details
            .keys()
            .map(|&o| (o, dense.data[o]))
            .collect()
    };
    SparseRep::from_parts(grid.clone(), coeffs.coarse.clone(), details, nodal)
}

/// Finest-level reconstruction with inactive details read as zero.
pub fn reconstruct_dense(rep: &SparseRep) -> Grid2 {
    inverse_transform_2d(&rep.to_coeffs()).expect("sparse rep is well formed")
}

/// Point evaluation of a [`SparseRep`].
///
/// Finest-level values are rebuilt on demand from the retained coefficients
/// (cached node values first, then recursive prediction) and memoized, then
/// combined with tabulated scaling-function weights.
pub struct Evaluator<'a> {
    rep: &'a SparseRep,
    memo: HashMap<usize, f64>,
    wx: Vec<(i64, f64)>,
    wv: Vec<(i64, f64)>,
}

impl<'a> Evaluator<'a> {
    pub fn new(rep: &'a SparseRep) -> Self {
        Evaluator {
            rep,
            memo: HashMap::new(),
            wx: Vec::new(),
            wv: Vec::new(),
        }
    }

    /// Finest-level value at a grid position (already boundary-resolved).
    pub fn nodal(&mut self, pos: FinePos) -> f64 {
        let rep = self.rep;
        let grid = &rep.grid;
        let offset = grid.fine_offset(pos);
        if let Some(&v) = rep.nodal.get(&offset) {
            return v;
        }
        if let Some(&v) = self.memo.get(&offset) {
            return v;
        }
        let level = grid.position_level(pos);
        let value = if level == grid.coarse_level {
            let s = grid.fine_level - level;
            rep.coarse.get(pos.0 >> s, pos.1 >> s)
        } else {
            let detail = rep.details.get(&offset).copied().unwrap_or(0.0);
            grid.predict_at(pos, |p| self.nodal(p)) + detail
        };
        self.memo.insert(offset, value);
        value
    }

    /// Finest-level value at possibly out-of-range indices.
    pub fn nodal_index(&mut self, i1: i64, i2: i64) -> f64 {
        let grid = &self.rep.grid;
        match grid.resolve(grid.fine_level, i1, i2) {
            Some(p) => self.nodal(p),
            None => 0.0,
        }
    }

    /// Evaluates at fractional finest-grid coordinates `(s1, s2)`.
    pub fn evaluate_units(&mut self, s1: f64, s2: f64) -> f64 {
        let table = &self.rep.table;
        let mut wx = std::mem::take(&mut self.wx);
        let mut wv = std::mem::take(&mut self.wv);
        table.weights(s1, &mut wx);
        table.weights(s2, &mut wv);
        let mut total = 0.0;
        for &(k1, a) in &wx {
            let mut inner = 0.0;
            for &(k2, b) in &wv {
                inner += b * self.nodal_index(k1, k2);
            }
            total += a * inner;
        }
        self.wx = wx;
        self.wv = wv;
        total
    }

    pub fn evaluate(&mut self, x: f64, v: f64) -> f64 {
        let grid = &self.rep.grid;
        if !grid.x.contains(x) || !grid.v.contains(v) {
            return 0.0;
        }
        let s1 = grid.x.grid_units(grid.fine_level, x);
        let s2 = grid.v.grid_units(grid.fine_level, v);
        self.evaluate_units(s1, s2)
    }
}
