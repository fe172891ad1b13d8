//! Legalization by minimizing overlap + boundary violation, followed by one
//! constraint-graph compaction of the first legal individual.

use serde::{Deserialize, Serialize};

use crate::cg::{build_cg, pack};
use crate::error::{Error, Result};
use crate::model::{Netlist, Outline, Placement};
use crate::objective::{hpwl, is_legal, FloorplanCost, ObjectiveWeights};
use crate::optim::{csaq_run, CsaqConfig, StepControl};

#[derive(Debug, Clone, PartialEq)]
pub struct LegalizeConfig {
    pub lambda: f64,
    pub mu: f64,
    pub k_max: usize,
    pub k_t: usize,
    pub control: StepControl,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Compression {
    pub placement: Placement,
    pub hpwl_before: f64,
    pub hpwl_after: f64,
    /// False when packing would have broken legality and the input was kept.
    pub applied: bool,
}

/// Packs a legal placement toward the outline's lower-left corner.
///
/// Every arc of the graphs built from a legal layout is satisfied by that
/// layout, so the packing is never larger than it; the result is still
/// checked and the input returned when it is not exactly legal.
pub fn compress(
    placement: &Placement,
    netlist: &Netlist,
    outline: &Outline,
) -> Result<Compression> {
    if !is_legal(placement, netlist, outline) {
        return Err(Error::InvalidArgument(
            "compress needs a legal placement".into(),
        ));
    }
    let before = hpwl(placement, netlist);
    let cg = build_cg(placement, netlist);
    let (packed, packing) = pack(&cg, netlist, &placement.rotated)?;
    let fits = packing.width() <= outline.width && packing.height() <= outline.height;
    if fits && is_legal(&packed, netlist, outline) {
        Ok(Compression {
            hpwl_after: hpwl(&packed, netlist),
            placement: packed,
            hpwl_before: before,
            applied: true,
        })
    } else {
        log::warn!("compression left the outline; keeping the uncompressed layout");
        Ok(Compression {
            placement: placement.clone(),
            hpwl_before: before,
            hpwl_after: before,
            applied: false,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LaOutcome {
    /// Compressed legal placement, when one was found.
    pub legal: Option<Compression>,
    /// Individual with the lowest legalization cost at the end.
    pub best: Placement,
    pub min_cost: f64,
    pub iterations: usize,
    /// Every individual's final iterate.
    pub population: Vec<Placement>,
}

/// Minimizes `lambda * D + mu * B` over the population and stops at the first exact zero.
pub fn la_csaq(
    population: &[Placement],
    netlist: &Netlist,
    outline: &Outline,
    cfg: &LegalizeConfig,
    seed: u64,
) -> Result<LaOutcome> {
    if population.is_empty() {
        return Err(Error::InvalidArgument("empty population".into()));
    }
    let w = ObjectiveWeights::legalization(cfg.lambda, cfg.mu);
    let costs: Vec<FloorplanCost<'_>> = population
        .iter()
        .map(|p| FloorplanCost::new(netlist, *outline, w, &p.rotated))
        .collect();
    let start = population.iter().map(Placement::to_vector).collect();
    let run = CsaqConfig {
        k_max: cfg.k_max,
        k_t: cfg.k_t,
        control: cfg.control.clone(),
        stop_at_zero: true,
    };
    let out = csaq_run(&costs, start, &run, seed)?;

    let finals: Vec<Placement> = out
        .population
        .iter()
        .zip(population)
        .map(|(u, p)| Placement::from_vector(u, p.rotated.clone()))
        .collect();
    let (best_i, min_cost) = out
        .values
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .unwrap();

    let legal = match out.hit {
        Some((i, _)) if is_legal(&finals[i], netlist, outline) => {
            Some(compress(&finals[i], netlist, outline)?)
        }
        Some((i, _)) => {
            log::warn!("individual {i} reached zero cost but is not exactly legal");
            None
        }
        None => None,
    };
    Ok(LaOutcome {
        legal,
        best: finals[best_i].clone(),
        min_cost,
        iterations: out.iterations,
        population: finals,
    })
}
