//! Adaptive mesh bookkeeping: the active node set, its forward-characteristic
//! prediction, and the dependency-closed set of points a transform reads.

use std::collections::{BTreeMap, BTreeSet};

use crate::grid::{DyadicNode2D, FinePos, NodeKind, PhaseGrid};
use crate::mra::Boundary;
use crate::mra2d::SparseRep;

/// Axis along which a split substep moves points.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    X,
    V,
}

/// Finest positions of the coarse nodes.
pub fn coarse_positions(grid: &PhaseGrid) -> Vec<FinePos> {
    let (nx, nv) = grid.dims(grid.coarse_level);
    let s = grid.fine_level - grid.coarse_level;
    (0..nx)
        .flat_map(|i| (0..nv).map(move |j| (i << s, j << s)))
        .collect()
}

/// Adds to `seeds` every position read, directly or transitively, by the
/// prediction of a member.
pub fn close_positions(grid: &PhaseGrid, seeds: impl IntoIterator<Item = FinePos>) -> BTreeSet<FinePos> {
    let mut set: BTreeSet<FinePos> = BTreeSet::new();
    let mut work: Vec<FinePos> = Vec::new();
    for p in seeds {
        if set.insert(p) {
            work.push(p);
        }
    }
    let mut stencil = Vec::new();
    while let Some(p) = work.pop() {
        grid.stencil_positions(p, &mut stencil);
        for &q in &stencil {
            if set.insert(q) {
                work.push(q);
            }
        }
    }
    set
}

/// The adaptive mesh: all coarse nodes plus a set of detail nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct ActiveSet {
    grid: PhaseGrid,
    positions: BTreeSet<FinePos>,
}

impl ActiveSet {
    pub fn coarse_only(grid: &PhaseGrid) -> Self {
        ActiveSet {
            grid: grid.clone(),
            positions: coarse_positions(grid).into_iter().collect(),
        }
    }

    /// Every node of the grid.
    pub fn full(grid: &PhaseGrid) -> Self {
        let (nx, nv) = grid.fine_dims();
        ActiveSet {
            grid: grid.clone(),
            positions: (0..nx).flat_map(|i| (0..nv).map(move |j| (i, j))).collect(),
        }
    }

    /// Builds a set from finest positions; coarse nodes are always added.
    pub fn from_positions(grid: &PhaseGrid, positions: impl IntoIterator<Item = FinePos>) -> Self {
        let mut set = Self::coarse_only(grid);
        let (nx, nv) = grid.fine_dims();
        set.positions
            .extend(positions.into_iter().filter(|p| p.0 < nx && p.1 < nv));
        set
    }

    pub fn from_nodes<'a>(grid: &PhaseGrid, nodes: impl IntoIterator<Item = &'a DyadicNode2D>) -> Self {
        Self::from_positions(grid, nodes.into_iter().filter_map(|n| grid.node_position(n)))
    }

    pub fn from_rep(rep: &SparseRep) -> Self {
        ActiveSet {
            grid: rep.grid().clone(),
            positions: rep.active_positions().into_iter().collect(),
        }
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn positions(&self) -> &BTreeSet<FinePos> {
        &self.positions
    }

    pub fn contains(&self, pos: FinePos) -> bool {
        self.positions.contains(&pos)
    }

    pub fn contains_node(&self, node: &DyadicNode2D) -> bool {
        self.grid
            .node_position(node)
            .is_some_and(|p| self.positions.contains(&p))
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = DyadicNode2D> + '_ {
        self.positions.iter().map(|&p| self.grid.node_at(p))
    }

    pub fn is_subset(&self, other: &ActiveSet) -> bool {
        self.positions.is_subset(&other.positions)
    }
}

/// Per-level node tally of an active set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActiveCounts {
    pub total: usize,
    pub coarse: usize,
    /// Nodes per level (coarse nodes are counted at level `j0`).
    pub per_level: BTreeMap<u32, usize>,
}

pub fn count_active(set: &ActiveSet) -> ActiveCounts {
    let mut per_level = BTreeMap::new();
    let mut coarse = 0;
    for node in set.nodes() {
        if node.kind == NodeKind::Coarse {
            coarse += 1;
        }
        *per_level.entry(node.level).or_insert(0) += 1;
    }
    ActiveCounts {
        total: set.len(),
        coarse,
        per_level,
    }
}

/// Forward-Euler prediction of where details will be needed after a substep.
///
/// Each node is pushed along `direction` by `displacement(x, v)`. At one level
/// finer than the node's own position (capped at the finest level) the cells
/// swept between start and end point are retained, widened by the `2N+2`-point
/// interpolation stencil; the orthogonal index is kept. Nodes whose endpoint
/// leaves a zero-extended axis are dropped.
pub fn predict_active_set(
    set: &ActiveSet,
    displacement: impl Fn(f64, f64) -> f64,
    direction: Direction,
) -> ActiveSet {
    let grid = &set.grid;
    let n = grid.order_n() as i64;
    let mut out = ActiveSet::coarse_only(grid);
    for &pos in &set.positions {
        let (x, v) = grid.fine_coords(pos);
        let d = displacement(x, v);
        debug_assert!(d.is_finite(), "non-finite displacement at {pos:?}");
        let level = (grid.position_level(pos) + 1).min(grid.fine_level);
        let shift = grid.fine_level - level;
        let (axis, start, along, orth) = match direction {
            Direction::X => (&grid.x, x, pos.0, pos.1),
            Direction::V => (&grid.v, v, pos.1, pos.0),
        };
        let end = start + d;
        if axis.boundary == Boundary::ZeroExtension && !axis.contains(end) {
            continue;
        }
        let s0 = (along >> shift) as f64;
        let s1 = s0 + d / axis.spacing(level);
        let first = s0.min(s1).floor() as i64 - n;
        let last = s0.max(s1).floor() as i64 + n + 1;
        let o = (orth >> shift) as i64;
        for m in first..=last {
            let (m1, m2) = match direction {
                Direction::X => (m, o),
                Direction::V => (o, m),
            };
            if let Some(p) = grid.resolve(level, m1, m2) {
                out.positions.insert(p);
            }
        }
    }
    out
}

/// Points at which the distribution must be known to compute the transform
/// on a target active set.
#[derive(Clone, Debug, PartialEq)]
pub struct ComputeMesh {
    grid: PhaseGrid,
    targets: BTreeSet<FinePos>,
    points: BTreeSet<FinePos>,
}

impl ComputeMesh {
    pub fn points(&self) -> &BTreeSet<FinePos> {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, pos: FinePos) -> bool {
        self.points.contains(&pos)
    }

    /// The same points viewed as an active set.
    pub fn as_active_set(&self) -> ActiveSet {
        ActiveSet::from_positions(&self.grid, self.points.iter().copied())
    }

    /// For every mesh point, the target nodes whose own value or prediction reads it.
    pub fn back_map(&self) -> BTreeMap<FinePos, Vec<DyadicNode2D>> {
        let mut map: BTreeMap<FinePos, Vec<DyadicNode2D>> = BTreeMap::new();
        let mut stencil = Vec::new();
        let mut pending: Vec<FinePos> = self.targets.iter().copied().collect();
        let mut origin: BTreeMap<FinePos, BTreeSet<FinePos>> = BTreeMap::new();
        for &t in &self.targets {
            origin.entry(t).or_default().insert(t);
        }
        // propagate target ownership down the dependency cone
        while let Some(p) = pending.pop() {
            let owners = origin[&p].clone();
            self.grid.stencil_positions(p, &mut stencil);
            for &q in &stencil {
                let entry = origin.entry(q).or_default();
                let before = entry.len();
                entry.extend(owners.iter().copied());
                if entry.len() != before {
                    pending.push(q);
                }
            }
        }
        for (p, owners) in origin {
            map.insert(p, owners.into_iter().map(|o| self.grid.node_at(o)).collect());
        }
        map
    }
}

/// Transitive closure of a target set under prediction dependencies.
pub fn closure(target: &ActiveSet) -> ComputeMesh {
    ComputeMesh {
        grid: target.grid.clone(),
        targets: target.positions.clone(),
        points: close_positions(&target.grid, target.positions.iter().copied()),
    }
}
