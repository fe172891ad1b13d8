//! Nonsmooth floorplanning cost: wirelength `W`, pairwise overlap `D` and
//! boundary violation `B`, with the composites `f_g = αW + λD + μB` and
//! `f_l = λD + μB`.
//!
//! Subgradients pick an element of the Clarke subdifferential. At a kink the
//! choice between the adjacent branch slopes is made uniformly at random.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::model::{Netlist, Outline, Placement};
use crate::optim::Objective;
use crate::SimRng;

/// Absolute tolerance on branch conditions when deciding that a point sits on a kink.
pub const BREAKPOINT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveWeights {
    pub alpha: f64,
    pub lambda: f64,
    pub mu: f64,
}

impl ObjectiveWeights {
    pub fn new(alpha: f64, lambda: f64, mu: f64) -> Self {
        Self { alpha, lambda, mu }
    }

    /// The legalization weights: wirelength switched off.
    pub fn legalization(lambda: f64, mu: f64) -> Self {
        Self {
            alpha: 0.0,
            lambda,
            mu,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Subgradient {
    pub gx: Vec<f64>,
    pub gy: Vec<f64>,
}

impl Subgradient {
    fn from_vector(g: &[f64]) -> Self {
        let n = g.len() / 2;
        Self {
            gx: g[..n].to_vec(),
            gy: g[n..].to_vec(),
        }
    }
}

/// Overlap of two intervals given their centers and lengths, as the three-branch
/// piecewise function of the center distance.
pub fn overlap_len(ci: f64, cj: f64, wi: f64, wj: f64) -> f64 {
    let d = (ci - cj).abs();
    let outer = 0.5 * (wi + wj);
    if d >= outer {
        0.0
    } else if d <= 0.5 * (wi - wj).abs() {
        wi.min(wj)
    } else {
        outer - d
    }
}

/// Derivative of [`overlap_len`] with respect to `ci`, with random branch
/// selection at breakpoints.
fn overlap_slope(ci: f64, cj: f64, wi: f64, wj: f64, rng: &mut SimRng) -> f64 {
    let diff = ci - cj;
    let d = diff.abs();
    let inner = 0.5 * (wi - wj).abs();
    let outer = 0.5 * (wi + wj);

    let slope_d = if d > outer + BREAKPOINT_TOL {
        0.0
    } else if (d - outer).abs() <= BREAKPOINT_TOL {
        if rng.random_bool(0.5) {
            -1.0
        } else {
            0.0
        }
    } else if d < inner - BREAKPOINT_TOL {
        0.0
    } else if (d - inner).abs() <= BREAKPOINT_TOL && inner > BREAKPOINT_TOL {
        if rng.random_bool(0.5) {
            -1.0
        } else {
            0.0
        }
    } else {
        -1.0
    };
    if slope_d == 0.0 {
        return 0.0;
    }
    let sign = if diff > BREAKPOINT_TOL {
        1.0
    } else if diff < -BREAKPOINT_TOL {
        -1.0
    } else if rng.random_bool(0.5) {
        1.0
    } else {
        -1.0
    };
    slope_d * sign
}

/// Random pick between `0` and `active` at a kink of `max(0, t)`.
fn hinge_slope(t: f64, active: f64, rng: &mut SimRng) -> f64 {
    if t > BREAKPOINT_TOL {
        active
    } else if t >= -BREAKPOINT_TOL {
        if rng.random_bool(0.5) {
            active
        } else {
            0.0
        }
    } else {
        0.0
    }
}

/// Shared evaluator over a flat `x ‖ y` vector with fixed effective dimensions.
#[derive(Debug, Clone)]
pub struct FloorplanCost<'a> {
    netlist: &'a Netlist,
    outline: Outline,
    weights: ObjectiveWeights,
    dims: Vec<(f64, f64)>,
    term_x: Vec<Vec<f64>>,
    term_y: Vec<Vec<f64>>,
}

impl<'a> FloorplanCost<'a> {
    pub fn new(
        netlist: &'a Netlist,
        outline: Outline,
        weights: ObjectiveWeights,
        rotated: &[bool],
    ) -> Self {
        let term_x = netlist
            .nets
            .iter()
            .map(|n| {
                n.terminal_pins
                    .iter()
                    .map(|&t| netlist.terminals[t].x)
                    .collect()
            })
            .collect();
        let term_y = netlist
            .nets
            .iter()
            .map(|n| {
                n.terminal_pins
                    .iter()
                    .map(|&t| netlist.terminals[t].y)
                    .collect()
            })
            .collect();
        Self {
            netlist,
            outline,
            weights,
            dims: netlist.dims(rotated),
            term_x,
            term_y,
        }
    }

    pub fn weights(&self) -> ObjectiveWeights {
        self.weights
    }

    pub fn set_weights(&mut self, weights: ObjectiveWeights) {
        self.weights = weights;
    }

    fn n(&self) -> usize {
        self.dims.len()
    }

    /// Wirelength of the layout with centers `x`, `y`.
    pub fn hpwl_xy(&self, x: &[f64], y: &[f64]) -> f64 {
        self.wirelength(x, y, None)
    }

    /// `(W, D, B)` at `u`.
    pub fn terms(&self, u: &[f64]) -> (f64, f64, f64) {
        let n = self.n();
        let (x, y) = u.split_at(n);
        (
            self.wirelength(x, y, None),
            self.overlap(x, y, None),
            self.boundary(x, y, None),
        )
    }

    fn combine(&self, (w, d, b): (f64, f64, f64)) -> f64 {
        let ObjectiveWeights { alpha, lambda, mu } = self.weights;
        let mut f = 0.0;
        if alpha != 0.0 {
            f += alpha * w;
        }
        if lambda != 0.0 {
            f += lambda * d;
        }
        if mu != 0.0 {
            f += mu * b;
        }
        f
    }

    fn wirelength(&self, x: &[f64], y: &[f64], mut grad: Option<(&mut [f64], &mut SimRng)>) -> f64 {
        let mut total = 0.0;
        let alpha = self.weights.alpha;
        let n = self.n();
        for (k, net) in self.netlist.nets.iter().enumerate() {
            match grad.as_mut() {
                Some((g, rng)) if alpha != 0.0 => {
                    let (gx, gy) = g.split_at_mut(n);
                    total += net_axis(
                        &net.module_pins,
                        x,
                        &self.term_x[k],
                        Some((alpha, gx, &mut **rng)),
                    );
                    total += net_axis(
                        &net.module_pins,
                        y,
                        &self.term_y[k],
                        Some((alpha, gy, &mut **rng)),
                    );
                }
                _ => {
                    total += net_axis(&net.module_pins, x, &self.term_x[k], None);
                    total += net_axis(&net.module_pins, y, &self.term_y[k], None);
                }
            }
        }
        total
    }

    fn overlap(&self, x: &[f64], y: &[f64], mut grad: Option<(&mut [f64], &mut SimRng)>) -> f64 {
        let n = self.n();
        let dims = &self.dims;
        let lambda = self.weights.lambda;
        let mut order: Vec<usize> = (0..n).collect();
        let left = |i: usize| x[i] - 0.5 * dims[i].0;
        order.sort_by(|&a, &b| left(a).total_cmp(&left(b)).then(a.cmp(&b)));

        let mut total = 0.0;
        for (a, &i) in order.iter().enumerate() {
            let (wi, hi) = dims[i];
            let right_i = x[i] + 0.5 * wi;
            let margin = 1e-9 * (1.0 + right_i.abs());
            for &j in &order[a + 1..] {
                if left(j) > right_i + margin {
                    break;
                }
                let (wj, hj) = dims[j];
                let dy = (y[i] - y[j]).abs();
                if dy > 0.5 * (hi + hj) + BREAKPOINT_TOL {
                    continue;
                }
                let ox = overlap_len(x[i], x[j], wi, wj);
                let oy = overlap_len(y[i], y[j], hi, hj);
                total += ox * oy;
                if let Some((g, rng)) = grad.as_mut() {
                    if lambda == 0.0 {
                        continue;
                    }
                    if oy > 0.0 {
                        let sx = overlap_slope(x[i], x[j], wi, wj, rng);
                        if sx != 0.0 {
                            g[i] += lambda * oy * sx;
                            g[j] -= lambda * oy * sx;
                        }
                    }
                    if ox > 0.0 {
                        let sy = overlap_slope(y[i], y[j], hi, hj, rng);
                        if sy != 0.0 {
                            g[n + i] += lambda * ox * sy;
                            g[n + j] -= lambda * ox * sy;
                        }
                    }
                }
            }
        }
        total
    }

    fn boundary(&self, x: &[f64], y: &[f64], mut grad: Option<(&mut [f64], &mut SimRng)>) -> f64 {
        let n = self.n();
        let (wo, ho) = (self.outline.width, self.outline.height);
        let mu = self.weights.mu;
        let mut total = 0.0;
        for (i, &(w, h)) in self.dims.iter().enumerate() {
            let lo_x = 0.5 * w - x[i];
            let hi_x = 0.5 * w + x[i] - wo;
            let lo_y = 0.5 * h - y[i];
            let hi_y = 0.5 * h + y[i] - ho;
            total += lo_x.max(0.0) + hi_x.max(0.0) + lo_y.max(0.0) + hi_y.max(0.0);
            if let Some((g, rng)) = grad.as_mut() {
                if mu == 0.0 {
                    continue;
                }
                g[i] += mu * (hinge_slope(lo_x, -1.0, rng) + hinge_slope(hi_x, 1.0, rng));
                g[n + i] += mu * (hinge_slope(lo_y, -1.0, rng) + hinge_slope(hi_y, 1.0, rng));
            }
        }
        total
    }
}

/// Extent of one net along one axis; optionally adds `±alpha` to the chosen
/// extreme module pins.
fn net_axis(
    mods: &[usize],
    coord: &[f64],
    terms: &[f64],
    grad: Option<(f64, &mut [f64], &mut SimRng)>,
) -> f64 {
    let mut hi = f64::NEG_INFINITY;
    let mut lo = f64::INFINITY;
    for &m in mods {
        hi = hi.max(coord[m]);
        lo = lo.min(coord[m]);
    }
    for &t in terms {
        hi = hi.max(t);
        lo = lo.min(t);
    }
    let pins = mods.len() + terms.len();
    if pins == 0 {
        return 0.0;
    }
    let extent = hi - lo;
    let Some((alpha, g, rng)) = grad else {
        return extent;
    };
    if pins < 2 {
        return extent;
    }
    let value = |p: usize| {
        if p < mods.len() {
            coord[mods[p]]
        } else {
            terms[p - mods.len()]
        }
    };

    let pick = |target: f64, exclude: Option<usize>, rng: &mut SimRng| -> usize {
        let tied = |p: usize| (value(p) - target).abs() <= BREAKPOINT_TOL && Some(p) != exclude;
        let count = (0..pins).filter(|&p| tied(p)).count();
        if count == 0 {
            // only reachable when the excluded pin was the unique extreme
            return exclude.unwrap_or(0);
        }
        let r = if count == 1 {
            0
        } else {
            rng.random_range(0..count)
        };
        (0..pins).filter(|&p| tied(p)).nth(r).unwrap()
    };

    let top = pick(hi, None, rng);
    let bottom = pick(lo, Some(top), rng);
    if top != bottom {
        if top < mods.len() {
            g[mods[top]] += alpha;
        }
        if bottom < mods.len() {
            g[mods[bottom]] -= alpha;
        }
    }
    extent
}

impl Objective for FloorplanCost<'_> {
    fn dim(&self) -> usize {
        2 * self.n()
    }

    fn value(&self, u: &[f64]) -> f64 {
        let n = self.n();
        let (x, y) = u.split_at(n);
        let ObjectiveWeights { alpha, lambda, mu } = self.weights;
        let w = if alpha != 0.0 {
            self.wirelength(x, y, None)
        } else {
            0.0
        };
        let d = if lambda != 0.0 {
            self.overlap(x, y, None)
        } else {
            0.0
        };
        let b = if mu != 0.0 {
            self.boundary(x, y, None)
        } else {
            0.0
        };
        self.combine((w, d, b))
    }

    fn subgradient(&self, u: &[f64], rng: &mut SimRng, grad: &mut [f64]) -> f64 {
        let n = self.n();
        grad.fill(0.0);
        let (x, y) = u.split_at(n);
        let ObjectiveWeights { alpha, lambda, mu } = self.weights;
        let w = if alpha != 0.0 {
            self.wirelength(x, y, Some((&mut *grad, &mut *rng)))
        } else {
            0.0
        };
        let d = if lambda != 0.0 {
            self.overlap(x, y, Some((&mut *grad, &mut *rng)))
        } else {
            0.0
        };
        let b = if mu != 0.0 {
            self.boundary(x, y, Some((&mut *grad, &mut *rng)))
        } else {
            0.0
        };
        self.combine((w, d, b))
    }
}

fn no_weights() -> ObjectiveWeights {
    ObjectiveWeights::new(1.0, 1.0, 1.0)
}

fn placeholder_outline() -> Outline {
    Outline {
        width: f64::INFINITY,
        height: f64::INFINITY,
        gamma: None,
        aspect_ratio: None,
    }
}

/// Half-perimeter wirelength over module centers and terminal pads.
pub fn hpwl(placement: &Placement, netlist: &Netlist) -> f64 {
    let cost = FloorplanCost::new(
        netlist,
        placeholder_outline(),
        no_weights(),
        &placement.rotated,
    );
    cost.wirelength(&placement.x, &placement.y, None)
}

/// Sum over module pairs of x-overlap times y-overlap, using effective dimensions.
pub fn total_overlap(placement: &Placement, netlist: &Netlist) -> f64 {
    let cost = FloorplanCost::new(
        netlist,
        placeholder_outline(),
        no_weights(),
        &placement.rotated,
    );
    cost.overlap(&placement.x, &placement.y, None)
}

pub fn boundary_violation(placement: &Placement, netlist: &Netlist, outline: &Outline) -> f64 {
    let cost = FloorplanCost::new(netlist, *outline, no_weights(), &placement.rotated);
    cost.boundary(&placement.x, &placement.y, None)
}

pub fn eval_fg(
    placement: &Placement,
    netlist: &Netlist,
    outline: &Outline,
    weights: &ObjectiveWeights,
) -> f64 {
    FloorplanCost::new(netlist, *outline, *weights, &placement.rotated)
        .value(&placement.to_vector())
}

pub fn eval_fl(
    placement: &Placement,
    netlist: &Netlist,
    outline: &Outline,
    weights: &ObjectiveWeights,
) -> f64 {
    let w = ObjectiveWeights::legalization(weights.lambda, weights.mu);
    eval_fg(placement, netlist, outline, &w)
}

pub fn subgrad_fg(
    placement: &Placement,
    netlist: &Netlist,
    outline: &Outline,
    weights: &ObjectiveWeights,
    rng: &mut SimRng,
) -> Subgradient {
    let cost = FloorplanCost::new(netlist, *outline, *weights, &placement.rotated);
    let mut g = vec![0.0; cost.dim()];
    cost.subgradient(&placement.to_vector(), rng, &mut g);
    Subgradient::from_vector(&g)
}

pub fn subgrad_fl(
    placement: &Placement,
    netlist: &Netlist,
    outline: &Outline,
    weights: &ObjectiveWeights,
    rng: &mut SimRng,
) -> Subgradient {
    let w = ObjectiveWeights::legalization(weights.lambda, weights.mu);
    subgrad_fg(placement, netlist, outline, &w, rng)
}

/// Exact legality: zero overlap and zero boundary violation.
pub fn is_legal(placement: &Placement, netlist: &Netlist, outline: &Outline) -> bool {
    total_overlap(placement, netlist) == 0.0
        && boundary_violation(placement, netlist, outline) == 0.0
}
