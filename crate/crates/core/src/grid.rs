//! Phase-space geometry: axes, dyadic levels and node addressing.

use std::fmt;

use crate::error::{Error, Result};
use crate::mra::{Boundary, PredictionStencil};

/// One phase-space axis `[lo, hi)` split into `cells` base cells at level 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub cells: usize,
    pub boundary: Boundary,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, cells: usize, boundary: Boundary) -> Self {
        Axis {
            lo,
            hi,
            cells,
            boundary,
        }
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    /// Number of samples at `level`.
    pub fn points(&self, level: u32) -> usize {
        self.cells << level
    }

    pub fn spacing(&self, level: u32) -> f64 {
        self.length() / self.points(level) as f64
    }

    pub fn coord(&self, level: u32, index: i64) -> f64 {
        self.lo + index as f64 * self.spacing(level)
    }

    /// Position of `coord` in grid units of `level`.
    pub fn grid_units(&self, level: u32, coord: f64) -> f64 {
        (coord - self.lo) / self.spacing(level)
    }

    /// True if `coord` is inside the closed domain (always true when periodic).
    pub fn contains(&self, coord: f64) -> bool {
        match self.boundary {
            Boundary::Periodic => true,
            Boundary::ZeroExtension => coord >= self.lo && coord <= self.hi,
        }
    }
}

/// Role of a node in the tensor-product decomposition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    Coarse,
    /// Odd in x, even in v.
    RowDetail,
    /// Even in x, odd in v.
    ColDetail,
    /// Odd in both.
    MidDetail,
}

impl NodeKind {
    pub fn name(self) -> &'static str {
        match self {
            NodeKind::Coarse => "Coarse",
            NodeKind::RowDetail => "RowDetail",
            NodeKind::ColDetail => "ColDetail",
            NodeKind::MidDetail => "MidDetail",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "Coarse" => Some(NodeKind::Coarse),
            "RowDetail" => Some(NodeKind::RowDetail),
            "ColDetail" => Some(NodeKind::ColDetail),
            "MidDetail" => Some(NodeKind::MidDetail),
            _ => None,
        }
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A point of the dyadic phase-space mesh.
///
/// Coarse nodes carry level `j0` and their level-`j0` indices. A detail node of
/// level `j` sits at the level-`j+1` position `(2k1+1, 2k2)` (row),
/// `(2k1, 2k2+1)` (col) or `(2k1+1, 2k2+1)` (mid).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicNode2D {
    pub level: u32,
    pub k1: i64,
    pub k2: i64,
    pub kind: NodeKind,
}

/// Index of a finest-level sample `(i1, i2)`.
pub type FinePos = (usize, usize);

/// Full description of the multilevel phase-space grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseGrid {
    pub x: Axis,
    pub v: Axis,
    pub coarse_level: u32,
    pub fine_level: u32,
    pub stencil: PredictionStencil,
}

impl PhaseGrid {
    pub fn new(x: Axis, v: Axis, coarse_level: u32, fine_level: u32, order_n: usize) -> Result<Self> {
        if coarse_level >= fine_level {
            return Err(Error::MalformedGrid(format!(
                "coarse level {coarse_level} must be below fine level {fine_level}"
            )));
        }
        if x.cells == 0 || v.cells == 0 || !(x.length() > 0.0) || !(v.length() > 0.0) {
            return Err(Error::MalformedGrid("empty axis".into()));
        }
        if fine_level > 24 {
            return Err(Error::MalformedGrid(format!("fine level {fine_level} too large")));
        }
        Ok(PhaseGrid {
            x,
            v,
            coarse_level,
            fine_level,
            stencil: PredictionStencil::new(order_n),
        })
    }

    pub fn order_n(&self) -> usize {
        self.stencil.order_n()
    }

    pub fn dims(&self, level: u32) -> (usize, usize) {
        (self.x.points(level), self.v.points(level))
    }

    pub fn fine_dims(&self) -> (usize, usize) {
        self.dims(self.fine_level)
    }

    pub fn fine_len(&self) -> usize {
        let (nx, nv) = self.fine_dims();
        nx * nv
    }

    pub fn coarse_len(&self) -> usize {
        let (nx, nv) = self.dims(self.coarse_level);
        nx * nv
    }

    /// Row-major offset of a finest-level sample (x is the slow index).
    #[inline]
    pub fn fine_offset(&self, pos: FinePos) -> usize {
        pos.0 * self.v.points(self.fine_level) + pos.1
    }

    pub fn fine_pos_of_offset(&self, offset: usize) -> FinePos {
        let nv = self.v.points(self.fine_level);
        (offset / nv, offset % nv)
    }

    /// Physical coordinates of a finest-level sample.
    pub fn fine_coords(&self, pos: FinePos) -> (f64, f64) {
        (
            self.x.coord(self.fine_level, pos.0 as i64),
            self.v.coord(self.fine_level, pos.1 as i64),
        )
    }

    #[inline]
    fn shift(&self, level: u32) -> u32 {
        self.fine_level - level
    }

    /// Finest-level position of the level-`level` sample `(m1, m2)`, after
    /// boundary resolution. `None` when it falls outside a zero-extended axis.
    #[inline]
    pub fn resolve(&self, level: u32, m1: i64, m2: i64) -> Option<FinePos> {
        let (nx, nv) = self.dims(level);
        let i1 = self.x.boundary.resolve(m1, nx)?;
        let i2 = self.v.boundary.resolve(m2, nv)?;
        let s = self.shift(level);
        Some((i1 << s, i2 << s))
    }

    /// Coarsest level whose grid contains the finest-level position.
    #[inline]
    pub fn position_level(&self, pos: FinePos) -> u32 {
        let tz = |i: usize| if i == 0 { u32::MAX } else { i.trailing_zeros() };
        let t = tz(pos.0).min(tz(pos.1)).min(self.fine_level - self.coarse_level);
        self.fine_level - t
    }

    /// The unique node living at a finest-level position.
    pub fn node_at(&self, pos: FinePos) -> DyadicNode2D {
        let level = self.position_level(pos);
        let s = self.shift(level);
        let (q1, q2) = ((pos.0 >> s) as i64, (pos.1 >> s) as i64);
        if level == self.coarse_level {
            return DyadicNode2D {
                level,
                k1: q1,
                k2: q2,
                kind: NodeKind::Coarse,
            };
        }
        let kind = match (q1 & 1, q2 & 1) {
            (1, 0) => NodeKind::RowDetail,
            (0, 1) => NodeKind::ColDetail,
            (1, 1) => NodeKind::MidDetail,
            _ => unreachable!("position level is minimal"),
        };
        DyadicNode2D {
            level: level - 1,
            k1: q1 >> 1,
            k2: q2 >> 1,
            kind,
        }
    }

    /// Finest-level position of a node; `None` if the node is not on this grid.
    pub fn node_position(&self, node: &DyadicNode2D) -> Option<FinePos> {
        let (level, q1, q2) = match node.kind {
            NodeKind::Coarse => {
                if node.level != self.coarse_level {
                    return None;
                }
                (node.level, node.k1, node.k2)
            }
            kind => {
                if node.level < self.coarse_level || node.level >= self.fine_level {
                    return None;
                }
                let (a, b) = match kind {
                    NodeKind::RowDetail => (1, 0),
                    NodeKind::ColDetail => (0, 1),
                    _ => (1, 1),
                };
                (node.level + 1, 2 * node.k1 + a, 2 * node.k2 + b)
            }
        };
        let (nx, nv) = self.dims(level);
        if q1 < 0 || q2 < 0 || q1 as usize >= nx || q2 as usize >= nv {
            return None;
        }
        let s = self.shift(level);
        Some(((q1 as usize) << s, (q2 as usize) << s))
    }

    /// Finest positions whose values enter the prediction at `pos`, i.e. the
    /// coarser-level samples of the tensor stencil. Empty for coarse nodes.
    pub fn stencil_positions(&self, pos: FinePos, out: &mut Vec<FinePos>) {
        out.clear();
        let level = self.position_level(pos);
        if level == self.coarse_level {
            return;
        }
        let s = self.shift(level);
        let (q1, q2) = ((pos.0 >> s) as i64, (pos.1 >> s) as i64);
        let parent = level - 1;
        let taps = self.stencil.len() as i64;
        let off = self.stencil.first_offset();
        let xs: Vec<i64> = if q1 & 1 == 1 {
            (0..taps).map(|i| (q1 >> 1) + off + i).collect()
        } else {
            vec![q1 >> 1]
        };
        let vs: Vec<i64> = if q2 & 1 == 1 {
            (0..taps).map(|i| (q2 >> 1) + off + i).collect()
        } else {
            vec![q2 >> 1]
        };
        for &m1 in &xs {
            for &m2 in &vs {
                if let Some(p) = self.resolve(parent, m1, m2) {
                    out.push(p);
                }
            }
        }
    }

    /// Prediction of the value at a non-coarse finest position from samples of
    /// the parent level. Mid points are predicted in v first, then in x.
    #[inline]
    pub fn predict_at(&self, pos: FinePos, mut sample: impl FnMut(FinePos) -> f64) -> f64 {
        let level = self.position_level(pos);
        debug_assert!(level > self.coarse_level);
        let s = self.shift(level);
        let (q1, q2) = ((pos.0 >> s) as i64, (pos.1 >> s) as i64);
        let parent = level - 1;
        let (k1, k2) = (q1 >> 1, q2 >> 1);
        let mut read = |m1: i64, m2: i64| self.resolve(parent, m1, m2).map_or(0.0, &mut sample);
        match (q1 & 1, q2 & 1) {
            (1, 0) => self.stencil.predict_with(k1, |m1| read(m1, k2)),
            (0, 1) => self.stencil.predict_with(k2, |m2| read(k1, m2)),
            (1, 1) => {
                let taps = self.stencil.len();
                let off = self.stencil.first_offset();
                let mut column = [0.0f64; 16];
                for (a, slot) in column.iter_mut().enumerate().take(taps) {
                    let m1 = k1 + off + a as i64;
                    *slot = self.stencil.predict_with(k2, |m2| read(m1, m2));
                }
                self.stencil
                    .predict_with(k1, |m1| column[(m1 - k1 - off) as usize])
            }
            _ => unreachable!("even-even positions belong to a coarser level"),
        }
    }

    /// Number of nodes per level over the full grid (coarse count first).
    pub fn full_node_count(&self) -> usize {
        self.fine_len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> PhaseGrid {
        let ax = Axis::new(0.0, 1.0, 1, Boundary::Periodic);
        PhaseGrid::new(ax, ax, 2, 5, 1).unwrap()
    }

    #[test]
    fn node_position_is_a_bijection() {
        let g = grid();
        let (nx, nv) = g.fine_dims();
        let mut seen = std::collections::HashSet::new();
        for i1 in 0..nx {
            for i2 in 0..nv {
                let node = g.node_at((i1, i2));
                assert_eq!(g.node_position(&node), Some((i1, i2)));
                assert!(seen.insert(node));
                if node.kind == NodeKind::Coarse {
                    assert_eq!(node.level, 2);
                } else {
                    assert!(node.level >= 2 && node.level < 5);
                }
            }
        }
    }

    #[test]
    fn node_kinds_follow_parity() {
        let g = grid();
        // level-3 detail at k = (1, 2): row position (3, 4) at level 4 -> finest (6, 8)
        let row = g.node_at((6, 8));
        assert_eq!(
            row,
            DyadicNode2D {
                level: 3,
                k1: 1,
                k2: 2,
                kind: NodeKind::RowDetail
            }
        );
        assert_eq!(g.node_at((8, 6)).kind, NodeKind::ColDetail);
        assert_eq!(g.node_at((6, 6)).kind, NodeKind::MidDetail);
        assert_eq!(g.node_at((8, 16)).kind, NodeKind::Coarse);
    }

    #[test]
    fn stencil_sizes() {
        let g = grid();
        let mut out = Vec::new();
        g.stencil_positions((6, 8), &mut out);
        assert_eq!(out.len(), 4);
        g.stencil_positions((6, 6), &mut out);
        assert_eq!(out.len(), 16);
        g.stencil_positions((8, 16), &mut out);
        assert!(out.is_empty());
    }
}
