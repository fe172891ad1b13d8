//! Constraint-graph legalizers: edit the graph pair until the packed layout
//! fits the outline.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::graph::{
    axis_slack, build_cg, compressible_arcs, critical_arcs, pack_dims, sizes, weight, ArcKind,
    Axis, CgPair, Packing,
};
use crate::model::{Netlist, Outline, Placement};
use crate::objective::{is_legal, FloorplanCost, ObjectiveWeights};
use crate::SimRng;

/// Candidate count and selection distribution of the critical-arc move.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IlgConfig {
    /// Number of highest-weight critical arcs considered per move.
    pub k: usize,
    /// Selection probabilities over candidates ordered by increasing wirelength increment.
    pub pw: Vec<f64>,
}

impl IlgConfig {
    /// Greedy maximum-weight move, no wirelength look-ahead.
    pub fn la_cg() -> Self {
        Self {
            k: 1,
            pw: vec![1.0],
        }
    }

    pub fn ila_cgm() -> Self {
        Self {
            k: 3,
            pw: vec![0.9, 0.05, 0.05],
        }
    }

    pub fn ila_cgs() -> Self {
        Self {
            k: 3,
            pw: vec![1.0, 0.0, 0.0],
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IlgReport {
    /// Redundant arcs dropped.
    pub compressed: usize,
    /// Critical arcs moved to the other graph.
    pub moved: usize,
}

/// No critical relationship is left to move while the layout is still too large.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stall {
    pub axis: Axis,
    pub extent: f64,
    pub limit: f64,
}

/// Shared read-only data of one individual's legalization.
pub struct CgContext<'a> {
    pub netlist: &'a Netlist,
    pub outline: Outline,
    pub rotated: Vec<bool>,
    dims: Vec<(f64, f64)>,
    cost: FloorplanCost<'a>,
}

impl<'a> CgContext<'a> {
    pub fn new(netlist: &'a Netlist, outline: Outline, rotated: &[bool]) -> Self {
        Self {
            netlist,
            outline,
            rotated: rotated.to_vec(),
            dims: netlist.dims(rotated),
            cost: FloorplanCost::new(
                netlist,
                outline,
                ObjectiveWeights::new(1.0, 0.0, 0.0),
                rotated,
            ),
        }
    }

    pub fn dims(&self) -> &[(f64, f64)] {
        &self.dims
    }

    fn limit(&self, axis: Axis) -> f64 {
        match axis {
            Axis::Horizontal => self.outline.width,
            Axis::Vertical => self.outline.height,
        }
    }

    fn pack(&self, cg: &CgPair) -> Packing {
        pack_dims(cg, &self.dims).expect("legalizer edits keep both graphs acyclic")
    }

    fn hpwl(&self, packing: &Packing) -> f64 {
        let p = packing.placement(&self.dims, &self.rotated);
        self.cost.hpwl_xy(&p.x, &p.y)
    }
}

/// Pick an index from `pw` restricted to its first `len` entries.
fn choose(pw: &[f64], len: usize, rng: &mut SimRng) -> usize {
    let w: Vec<f64> = (0..len)
        .map(|i| pw.get(i).copied().unwrap_or(0.0).max(0.0))
        .collect();
    let sum: f64 = w.iter().sum();
    if !(sum > 0.0) {
        return 0;
    }
    if w.iter().filter(|&&v| v > 0.0).count() == 1 {
        return w.iter().position(|&v| v > 0.0).unwrap();
    }
    let r = rng.random::<f64>() * sum;
    let mut acc = 0.0;
    for (i, v) in w.iter().enumerate() {
        acc += v;
        if r < acc {
            return i;
        }
    }
    w.iter().rposition(|&v| v > 0.0).unwrap()
}

/// Shrinks the packed extent along `axis` to the outline by dropping
/// redundant arcs and moving critical arcs into the other graph.
pub fn ilg(
    axis: Axis,
    cg: &mut CgPair,
    ctx: &CgContext<'_>,
    cfg: &IlgConfig,
    rng: &mut SimRng,
) -> Result<IlgReport, Stall> {
    let other = axis.other();
    let limit = ctx.limit(axis);
    let other_limit = ctx.limit(other);
    let size = sizes(ctx.dims(), axis);
    let other_size = sizes(ctx.dims(), other);
    let mut report = IlgReport::default();

    loop {
        let packing = ctx.pack(cg);
        let extent = packing.axis(axis).extent;
        if extent <= limit {
            return Ok(report);
        }

        let redundant = compressible_arcs(cg, axis, ctx.dims(), &packing);
        if !redundant.is_empty() {
            // dropping arcs of this graph leaves the other packing unchanged,
            // so every arc found here stays redundant until it is removed
            for (a, b) in &redundant {
                cg.graph_mut(axis).remove(*a, *b);
            }
            report.compressed += redundant.len();
            continue;
        }

        let slack = axis_slack(cg.graph(axis), &size, packing.axis(axis), limit);
        let critical = critical_arcs(cg.graph(axis), &size, packing.axis(axis), &slack, limit);
        if critical.is_empty() {
            return Err(Stall {
                axis,
                extent,
                limit,
            });
        }
        let other_slack = axis_slack(
            cg.graph(other),
            &other_size,
            packing.axis(other),
            other_limit,
        );
        let other_lower = &packing.axis(other).lower;

        let mut ranked: Vec<((usize, usize), f64)> = critical
            .into_iter()
            .map(|(a, b)| ((a, b), weight(a, b, other_lower, &other_slack, &other_size)))
            .collect();
        ranked.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
        ranked.truncate(cfg.k.max(1));

        let target = |a: usize, b: usize| {
            if other_lower[a] <= other_lower[b] {
                (a, b)
            } else {
                (b, a)
            }
        };

        let (a, b) = if ranked.len() == 1 || cfg.k <= 1 {
            ranked[0].0
        } else {
            let base = ctx.hpwl(&packing);
            let mut scored: Vec<((usize, usize), f64)> = ranked
                .iter()
                .map(|&((a, b), _)| {
                    let (lo, hi) = target(a, b);
                    let had = cg.graph(other).kind(lo, hi);
                    let own = cg.graph(axis).kind(a, b).unwrap_or(ArcKind::Original);
                    cg.graph_mut(axis).remove(a, b);
                    cg.graph_mut(other).insert(lo, hi, ArcKind::Inserted);
                    let delta = ctx.hpwl(&ctx.pack(cg)) - base;
                    match had {
                        Some(kind) => cg.graph_mut(other).insert(lo, hi, kind),
                        None => {
                            cg.graph_mut(other).remove(lo, hi);
                        }
                    }
                    cg.graph_mut(axis).insert(a, b, own);
                    ((a, b), delta)
                })
                .collect();
            // stable: equal increments keep the weight ranking
            scored.sort_by(|x, y| x.1.total_cmp(&y.1));
            scored[choose(&cfg.pw, scored.len(), rng)].0
        };

        let (lo, hi) = target(a, b);
        cg.graph_mut(axis).remove(a, b);
        if !cg.graph(other).has(lo, hi) {
            cg.graph_mut(other).insert(lo, hi, ArcKind::Inserted);
        }
        report.moved += 1;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CgLegalizeConfig {
    pub ilg: IlgConfig,
    /// Rounds per individual.
    pub n_max: usize,
}

impl CgLegalizeConfig {
    pub fn la_cg() -> Self {
        Self {
            ilg: IlgConfig::la_cg(),
            n_max: 20,
        }
    }

    pub fn ila_cgm() -> Self {
        Self {
            ilg: IlgConfig::ila_cgm(),
            n_max: 20,
        }
    }

    pub fn ila_cgs() -> Self {
        Self {
            ilg: IlgConfig::ila_cgs(),
            n_max: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgOutcome {
    /// First legal placement found.
    pub placement: Option<Placement>,
    pub individual: Option<usize>,
    /// Rounds spent by the successful individual.
    pub rounds: usize,
    pub report: IlgReport,
    /// Individuals abandoned because no critical arc was left to move.
    pub stalled: usize,
    /// Individuals that used all rounds without fitting.
    pub exhausted: usize,
}

impl CgOutcome {
    pub fn is_legal(&self) -> bool {
        self.placement.is_some()
    }
}

/// Alternates horizontal and vertical graph legalization on each individual
/// in turn and returns the first placement that fits the outline.
pub fn ila_cg(
    population: &[Placement],
    netlist: &Netlist,
    outline: &Outline,
    cfg: &CgLegalizeConfig,
    rng: &mut SimRng,
) -> CgOutcome {
    let mut out = CgOutcome {
        placement: None,
        individual: None,
        rounds: 0,
        report: IlgReport::default(),
        stalled: 0,
        exhausted: 0,
    };
    'individuals: for (idx, start) in population.iter().enumerate() {
        let ctx = CgContext::new(netlist, *outline, &start.rotated);
        let mut current = start.clone();
        let mut report = IlgReport::default();
        for round in 1..=cfg.n_max {
            let mut cg = build_cg(&current, netlist);
            current = ctx.pack(&cg).placement(ctx.dims(), &ctx.rotated);
            for axis in [Axis::Horizontal, Axis::Vertical] {
                match ilg(axis, &mut cg, &ctx, &cfg.ilg, rng) {
                    Ok(r) => {
                        report.compressed += r.compressed;
                        report.moved += r.moved;
                    }
                    Err(stall) => {
                        log::debug!("individual {idx} stalled: {stall:?}");
                        out.stalled += 1;
                        continue 'individuals;
                    }
                }
            }
            let packing = ctx.pack(&cg);
            current = packing.placement(ctx.dims(), &ctx.rotated);
            if packing.width() <= outline.width
                && packing.height() <= outline.height
                && is_legal(&current, netlist, outline)
            {
                out.placement = Some(current);
                out.individual = Some(idx);
                out.rounds = round;
                out.report = report;
                return out;
            }
        }
        out.exhausted += 1;
    }
    out
}

/// The baseline: greedy maximum-weight moves.
pub fn la_cg(
    population: &[Placement],
    netlist: &Netlist,
    outline: &Outline,
    n_max: usize,
    rng: &mut SimRng,
) -> CgOutcome {
    let cfg = CgLegalizeConfig {
        ilg: IlgConfig::la_cg(),
        n_max,
    };
    ila_cg(population, netlist, outline, &cfg, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModuleSpec, Net};
    use rand::SeedableRng;

    fn netlist(dims: &[(f64, f64)], nets: Vec<Net>) -> Netlist {
        let modules = dims
            .iter()
            .enumerate()
            .map(|(i, &(w, h))| ModuleSpec {
                id: i,
                name: format!("m{i}"),
                width: w,
                height: h,
            })
            .collect();
        Netlist::new("t", modules, vec![], nets).unwrap()
    }

    #[test]
    fn fitting_layout_is_untouched() {
        let nl = netlist(&[(2.0, 2.0), (2.0, 2.0)], vec![]);
        let o = Outline::manual(10.0, 10.0).unwrap();
        let p = Placement::new(vec![1.0, 5.0], vec![1.0, 1.0], vec![false; 2]).unwrap();
        let mut cg = build_cg(&p, &nl);
        let before = cg.clone();
        let ctx = CgContext::new(&nl, o, &p.rotated);
        let mut rng = SimRng::seed_from_u64(0);
        let r = ilg(
            Axis::Horizontal,
            &mut cg,
            &ctx,
            &IlgConfig::ila_cgs(),
            &mut rng,
        )
        .unwrap();
        assert_eq!(r, IlgReport::default());
        assert_eq!(cg, before);
    }

    #[test]
    fn row_too_wide_gets_stacked() {
        // three 4x2 modules in a row need width 12 but the outline is 8x8
        let nl = netlist(&[(4.0, 2.0); 3], vec![]);
        let o = Outline::manual(8.0, 8.0).unwrap();
        let p = Placement::new(vec![2.0, 6.0, 10.0], vec![1.0; 3], vec![false; 3]).unwrap();
        let mut rng = SimRng::seed_from_u64(5);
        let out = ila_cg(&[p], &nl, &o, &CgLegalizeConfig::ila_cgs(), &mut rng);
        let placed = out.placement.expect("legal");
        assert!(is_legal(&placed, &nl, &o));
        assert!(out.report.moved >= 1);
    }

    #[test]
    fn already_legal_returns_in_first_round() {
        let nl = netlist(&[(2.0, 2.0); 3], vec![]);
        let o = Outline::manual(10.0, 10.0).unwrap();
        let p = Placement::new(vec![1.0, 4.0, 8.0], vec![1.0, 5.0, 2.0], vec![false; 3]).unwrap();
        let mut rng = SimRng::seed_from_u64(1);
        let out = la_cg(&[p], &nl, &o, 20, &mut rng);
        assert_eq!(out.individual, Some(0));
        assert_eq!(out.rounds, 1);
        assert_eq!(out.report.moved, 0);
    }

    #[test]
    fn module_wider_than_outline_stalls() {
        let nl = netlist(&[(12.0, 1.0)], vec![]);
        let o = Outline::manual(10.0, 10.0).unwrap();
        let p = Placement::new(vec![6.0], vec![1.0], vec![false]).unwrap();
        let mut rng = SimRng::seed_from_u64(1);
        let out = ila_cg(&[p], &nl, &o, &CgLegalizeConfig::ila_cgs(), &mut rng);
        assert!(!out.is_legal());
        assert_eq!(out.stalled, 1);
    }

    #[test]
    fn choose_respects_degenerate_distributions() {
        let mut rng = SimRng::seed_from_u64(3);
        for _ in 0..100 {
            assert_eq!(choose(&[1.0, 0.0, 0.0], 3, &mut rng), 0);
        }
        assert_eq!(choose(&[0.9, 0.05, 0.05], 1, &mut rng), 0);
    }

    #[test]
    fn choose_frequencies() {
        let mut rng = SimRng::seed_from_u64(42);
        let trials = 10_000;
        let mut counts = [0usize; 3];
        for _ in 0..trials {
            counts[choose(&[0.9, 0.05, 0.05], 3, &mut rng)] += 1;
        }
        for (c, p) in counts.iter().zip([0.9, 0.05, 0.05]) {
            let mean = trials as f64 * p;
            let sd = (trials as f64 * p * (1.0 - p)).sqrt();
            assert!((*c as f64 - mean).abs() <= 3.0 * sd, "{counts:?}");
        }
    }
}
