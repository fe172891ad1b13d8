use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Netlist, Placement};
use crate::objective::overlap_len;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    /// Left-of relations, packed along x.
    Horizontal,
    /// Below relations, packed along y.
    Vertical,
}

impl Axis {
    pub fn other(self) -> Axis {
        match self {
            Axis::Horizontal => Axis::Vertical,
            Axis::Vertical => Axis::Horizontal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ArcKind {
    Original,
    Inserted,
}

const NONE: u8 = 0;
const ORIGINAL: u8 = 1;
const INSERTED: u8 = 2;

/// Directed graph over module ids stored as a dense adjacency matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintGraph {
    n: usize,
    cells: Vec<u8>,
    arcs: usize,
}

impl ConstraintGraph {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            cells: vec![NONE; n * n],
            arcs: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn arc_count(&self) -> usize {
        self.arcs
    }

    pub fn has(&self, from: usize, to: usize) -> bool {
        self.cells[from * self.n + to] != NONE
    }

    pub fn kind(&self, from: usize, to: usize) -> Option<ArcKind> {
        match self.cells[from * self.n + to] {
            ORIGINAL => Some(ArcKind::Original),
            INSERTED => Some(ArcKind::Inserted),
            _ => None,
        }
    }

    /// True when the pair is ordered in either direction.
    pub fn orders(&self, a: usize, b: usize) -> bool {
        self.has(a, b) || self.has(b, a)
    }

    pub fn insert(&mut self, from: usize, to: usize, kind: ArcKind) {
        assert_ne!(from, to, "self loops are not allowed");
        let cell = &mut self.cells[from * self.n + to];
        if *cell == NONE {
            self.arcs += 1;
        }
        *cell = match kind {
            ArcKind::Original => ORIGINAL,
            ArcKind::Inserted => INSERTED,
        };
    }

    pub fn remove(&mut self, from: usize, to: usize) -> bool {
        let cell = &mut self.cells[from * self.n + to];
        if *cell == NONE {
            return false;
        }
        *cell = NONE;
        self.arcs -= 1;
        true
    }

    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n;
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != NONE)
            .map(move |(k, _)| (k / n, k % n))
    }

    pub fn successors(&self, from: usize) -> impl Iterator<Item = usize> + '_ {
        let row = &self.cells[from * self.n..(from + 1) * self.n];
        row.iter()
            .enumerate()
            .filter(|(_, &c)| c != NONE)
            .map(|(j, _)| j)
    }

    pub fn predecessors(&self, to: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&i| self.cells[i * self.n + to] != NONE)
    }

    /// Kahn topological order, or the first arc found on a cycle.
    pub fn topological_order(&self) -> Result<Vec<usize>> {
        let n = self.n;
        let mut indeg = vec![0usize; n];
        for (_, to) in self.arcs() {
            indeg[to] += 1;
        }
        let mut queue: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        let mut head = 0;
        while head < queue.len() {
            let i = queue[head];
            head += 1;
            order.push(i);
            for j in self.successors(i) {
                indeg[j] -= 1;
                if indeg[j] == 0 {
                    queue.push(j);
                }
            }
        }
        if order.len() < n {
            let stuck = (0..n).find(|&i| indeg[i] > 0).expect("a node remains");
            let from = self
                .predecessors(stuck)
                .find(|&p| indeg[p] > 0)
                .unwrap_or(stuck);
            return Err(Error::Cycle { from, to: stuck });
        }
        Ok(order)
    }
}

/// Horizontal and vertical constraint graphs of one layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CgPair {
    pub hcg: ConstraintGraph,
    pub vcg: ConstraintGraph,
}

impl CgPair {
    pub fn new(n: usize) -> Self {
        Self {
            hcg: ConstraintGraph::new(n),
            vcg: ConstraintGraph::new(n),
        }
    }

    pub fn len(&self) -> usize {
        self.hcg.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hcg.is_empty()
    }

    pub fn graph(&self, axis: Axis) -> &ConstraintGraph {
        match axis {
            Axis::Horizontal => &self.hcg,
            Axis::Vertical => &self.vcg,
        }
    }

    pub fn graph_mut(&mut self, axis: Axis) -> &mut ConstraintGraph {
        match axis {
            Axis::Horizontal => &mut self.hcg,
            Axis::Vertical => &mut self.vcg,
        }
    }

    /// First pair not ordered by any arc, if any.
    pub fn unordered_pair(&self) -> Option<(usize, usize)> {
        let n = self.len();
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .find(|&(i, j)| !self.hcg.orders(i, j) && !self.vcg.orders(i, j))
    }
}

/// Builds the graph pair of a placement.
///
/// Each pair is ordered along x by `(left, bottom, id)` and along y by
/// `(bottom, left, id)`. Pairs separated in both projections get an arc in
/// each graph; pairs overlapping in exactly one projection get an arc in the
/// other graph; pairs overlapping in both go to the graph of the shorter
/// overlap, horizontal on ties.
pub fn build_cg(placement: &Placement, netlist: &Netlist) -> CgPair {
    let dims = netlist.dims(&placement.rotated);
    let n = dims.len();
    let left: Vec<f64> = (0..n).map(|i| placement.x[i] - 0.5 * dims[i].0).collect();
    let bottom: Vec<f64> = (0..n).map(|i| placement.y[i] - 0.5 * dims[i].1).collect();
    let x_before = |a: usize, b: usize| {
        left[a]
            .total_cmp(&left[b])
            .then(bottom[a].total_cmp(&bottom[b]))
            .then(a.cmp(&b))
            .is_lt()
    };
    let y_before = |a: usize, b: usize| {
        bottom[a]
            .total_cmp(&bottom[b])
            .then(left[a].total_cmp(&left[b]))
            .then(a.cmp(&b))
            .is_lt()
    };

    let mut cg = CgPair::new(n);
    for i in 0..n {
        for j in i + 1..n {
            let ox = overlap_len(placement.x[i], placement.x[j], dims[i].0, dims[j].0);
            let oy = overlap_len(placement.y[i], placement.y[j], dims[i].1, dims[j].1);
            let (h, v) = match (ox > 0.0, oy > 0.0) {
                (false, false) => (true, true),
                (false, true) => (true, false),
                (true, false) => (false, true),
                (true, true) => (ox <= oy, ox > oy),
            };
            if h {
                let (a, b) = if x_before(i, j) { (i, j) } else { (j, i) };
                cg.hcg.insert(a, b, ArcKind::Original);
            }
            if v {
                let (a, b) = if y_before(i, j) { (i, j) } else { (j, i) };
                cg.vcg.insert(a, b, ArcKind::Original);
            }
        }
    }
    cg
}

/// Longest-path coordinates along one axis.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisPacking {
    /// Lower coordinate (left or bottom edge) of each module.
    pub lower: Vec<f64>,
    pub extent: f64,
    pub order: Vec<usize>,
}

/// Packs one graph: each module sits at the longest weighted path from the
/// sources. Coordinates are nudged up by ulps where rounding of the center
/// representation would otherwise report a sliver of overlap.
pub fn pack_axis(graph: &ConstraintGraph, sizes: &[f64]) -> Result<AxisPacking> {
    let order = graph.topological_order()?;
    let n = sizes.len();
    let mut lower = vec![0.0f64; n];
    for &s in &order {
        let mut at = 0.0f64;
        for p in graph.predecessors(s) {
            at = at.max(lower[p] + sizes[p]);
        }
        loop {
            let c = at + 0.5 * sizes[s];
            let clash = graph
                .predecessors(s)
                .any(|p| overlap_len(lower[p] + 0.5 * sizes[p], c, sizes[p], sizes[s]) > 0.0);
            if !clash {
                break;
            }
            at = at.next_up();
        }
        lower[s] = at;
    }
    let extent = (0..n).map(|i| lower[i] + sizes[i]).fold(0.0, f64::max);
    Ok(AxisPacking {
        lower,
        extent,
        order,
    })
}

/// Overlap-free layout of a graph pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Packing {
    pub x: AxisPacking,
    pub y: AxisPacking,
}

impl Packing {
    pub fn axis(&self, axis: Axis) -> &AxisPacking {
        match axis {
            Axis::Horizontal => &self.x,
            Axis::Vertical => &self.y,
        }
    }

    pub fn width(&self) -> f64 {
        self.x.extent
    }

    pub fn height(&self) -> f64 {
        self.y.extent
    }

    /// Module centers with the given orientation bits.
    pub fn placement(&self, dims: &[(f64, f64)], rotated: &[bool]) -> Placement {
        let x = dims
            .iter()
            .zip(&self.x.lower)
            .map(|(d, l)| l + 0.5 * d.0)
            .collect();
        let y = dims
            .iter()
            .zip(&self.y.lower)
            .map(|(d, l)| l + 0.5 * d.1)
            .collect();
        Placement {
            x,
            y,
            rotated: rotated.to_vec(),
        }
    }
}

pub(crate) fn sizes(dims: &[(f64, f64)], axis: Axis) -> Vec<f64> {
    dims.iter()
        .map(|d| match axis {
            Axis::Horizontal => d.0,
            Axis::Vertical => d.1,
        })
        .collect()
}

/// Packs both graphs without auditing pair completeness.
pub(crate) fn pack_dims(cg: &CgPair, dims: &[(f64, f64)]) -> Result<Packing> {
    Ok(Packing {
        x: pack_axis(&cg.hcg, &sizes(dims, Axis::Horizontal))?,
        y: pack_axis(&cg.vcg, &sizes(dims, Axis::Vertical))?,
    })
}

/// Translates a pair-complete graph pair into an overlap-free placement
/// anchored at the origin.
pub fn pack(cg: &CgPair, netlist: &Netlist, rotated: &[bool]) -> Result<(Placement, Packing)> {
    if let Some((i, j)) = cg.unordered_pair() {
        return Err(Error::IncompletePair(i, j));
    }
    let dims = netlist.dims(rotated);
    let packing = pack_dims(cg, &dims)?;
    Ok((packing.placement(&dims, rotated), packing))
}

/// Tolerance for calling a slack zero, scaled to the span.
pub(crate) fn zero_tol(span: f64) -> f64 {
    1e-9 * span.abs().max(1.0)
}

/// Per-module slack along one axis against `span = max(extent, limit)`.
pub fn axis_slack(
    graph: &ConstraintGraph,
    sizes: &[f64],
    packing: &AxisPacking,
    limit: f64,
) -> Vec<f64> {
    let span = packing.extent.max(limit);
    let n = sizes.len();
    let mut tail = vec![0.0f64; n];
    for &i in packing.order.iter().rev() {
        let rest = graph.successors(i).map(|s| tail[s]).fold(0.0, f64::max);
        tail[i] = sizes[i] + rest;
    }
    (0..n)
        .map(|i| (span - tail[i] - packing.lower[i]).max(0.0))
        .collect()
}

/// Horizontal and vertical slack of every module.
pub fn slacks(
    cg: &CgPair,
    dims: &[(f64, f64)],
    packing: &Packing,
    width_limit: f64,
    height_limit: f64,
) -> (Vec<f64>, Vec<f64>) {
    (
        axis_slack(
            &cg.hcg,
            &sizes(dims, Axis::Horizontal),
            &packing.x,
            width_limit,
        ),
        axis_slack(
            &cg.vcg,
            &sizes(dims, Axis::Vertical),
            &packing.y,
            height_limit,
        ),
    )
}

/// Arcs of `graph` whose endpoints both have zero slack and sit back to back.
pub fn critical_arcs(
    graph: &ConstraintGraph,
    sizes: &[f64],
    packing: &AxisPacking,
    slack: &[f64],
    limit: f64,
) -> Vec<(usize, usize)> {
    let tol = zero_tol(packing.extent.max(limit));
    graph
        .arcs()
        .filter(|&(a, b)| {
            slack[a] <= tol
                && slack[b] <= tol
                && (packing.lower[a] + sizes[a] - packing.lower[b]).abs() <= tol
        })
        .collect()
}

/// Weight of a critical arc `a → b`: slack left along the other axis after
/// stacking the pair there.
///
/// `other_lower`, `other_slack` and `other_sizes` refer to the other axis.
pub fn weight(
    a: usize,
    b: usize,
    other_lower: &[f64],
    other_slack: &[f64],
    other_sizes: &[f64],
) -> f64 {
    if other_lower[a] <= other_lower[b] {
        other_slack[a] - other_sizes[b]
    } else {
        other_slack[b] - other_sizes[a]
    }
}

/// Arcs of the `axis` graph that are redundant: the pair's projections on the
/// other axis are disjoint in the packing and the other graph orders the pair.
pub fn compressible_arcs(
    cg: &CgPair,
    axis: Axis,
    dims: &[(f64, f64)],
    packing: &Packing,
) -> Vec<(usize, usize)> {
    let other = axis.other();
    let other_graph = cg.graph(other);
    let lo = &packing.axis(other).lower;
    let sz = sizes(dims, other);
    cg.graph(axis)
        .arcs()
        .filter(|&(a, b)| {
            let disjoint = lo[a] + sz[a] <= lo[b] || lo[b] + sz[b] <= lo[a];
            disjoint && other_graph.orders(a, b)
        })
        .collect()
}
