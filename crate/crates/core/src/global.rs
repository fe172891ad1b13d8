//! Global floorplanning: repeated population passes on the wirelength +
//! overlap + boundary cost with a growing overlap weight.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Netlist, Outline, Placement};
use crate::objective::{FloorplanCost, ObjectiveWeights};
use crate::optim::{csaq_run, CsaqConfig, StepControl};
use crate::stream_rng;
use rand::RngCore;

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalConfig {
    /// Starting weights; `lambda` is multiplied by `q` after every pass.
    pub weights: ObjectiveWeights,
    pub q: f64,
    /// Passes stop once every individual's overlap is below `total_area / v`.
    pub v: f64,
    pub k_max: usize,
    pub k_t: usize,
    pub control: StepControl,
    pub max_passes: usize,
}

impl GlobalConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.q > 1.0) {
            return Err(Error::InvalidConfig(format!(
                "q must exceed 1, got {}",
                self.q
            )));
        }
        if !(self.v > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "v must be positive, got {}",
                self.v
            )));
        }
        if self.k_max == 0 || self.k_t == 0 {
            return Err(Error::InvalidConfig(
                "k_max and k_t must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GlobalOutcome {
    pub population: Vec<Placement>,
    pub passes: usize,
    /// Overlap weight after the last pass.
    pub lambda: f64,
    /// Every individual ended below the overlap threshold.
    pub near_feasible: bool,
    /// Raw overlap of each returned individual.
    pub overlaps: Vec<f64>,
}

fn overlaps(population: &[Placement], netlist: &Netlist, outline: &Outline) -> Vec<f64> {
    population
        .iter()
        .map(|p| {
            FloorplanCost::new(
                netlist,
                *outline,
                ObjectiveWeights::new(0.0, 1.0, 0.0),
                &p.rotated,
            )
            .terms(&p.to_vector())
            .1
        })
        .collect()
}

/// Runs passes until every individual is near-feasible or `max_passes` is hit.
///
/// Each pass starts a fresh controller from the previous pass's final iterates.
pub fn gfloorplan(
    population: Vec<Placement>,
    netlist: &Netlist,
    outline: &Outline,
    cfg: &GlobalConfig,
    seed: u64,
) -> Result<GlobalOutcome> {
    cfg.validate()?;
    if population.is_empty() {
        return Err(Error::InvalidArgument("empty population".into()));
    }
    let threshold = netlist.total_area() / cfg.v;
    let mut seeds = stream_rng(seed, u64::MAX);
    let mut population = population;
    let mut weights = cfg.weights;
    let mut passes = 0;

    loop {
        let d = overlaps(&population, netlist, outline);
        let done = d.iter().all(|&v| v < threshold);
        if done || passes >= cfg.max_passes {
            if !done {
                log::debug!(
                    "global floorplanning hit the pass cap at lambda {}",
                    weights.lambda
                );
            }
            return Ok(GlobalOutcome {
                population,
                passes,
                lambda: weights.lambda,
                near_feasible: done,
                overlaps: d,
            });
        }

        let costs: Vec<FloorplanCost<'_>> = population
            .iter()
            .map(|p| FloorplanCost::new(netlist, *outline, weights, &p.rotated))
            .collect();
        let start: Vec<Vec<f64>> = population.iter().map(Placement::to_vector).collect();
        let run = CsaqConfig {
            k_max: cfg.k_max,
            k_t: cfg.k_t,
            control: cfg.control.clone(),
            stop_at_zero: false,
        };
        let out = csaq_run(&costs, start, &run, seeds.next_u64())?;
        for (p, u) in population.iter_mut().zip(&out.population) {
            p.set_from_vector(u);
        }
        weights.lambda *= cfg.q;
        passes += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModuleSpec, Net};
    use crate::objective::total_overlap;

    fn toy() -> Netlist {
        let modules = (0..2)
            .map(|i| ModuleSpec {
                id: i,
                name: format!("m{i}"),
                width: 2.0,
                height: 2.0,
            })
            .collect();
        Netlist::new(
            "toy",
            modules,
            vec![],
            vec![Net {
                module_pins: vec![0, 1],
                terminal_pins: vec![],
            }],
        )
        .unwrap()
    }

    fn cfg(max_passes: usize) -> GlobalConfig {
        GlobalConfig {
            weights: ObjectiveWeights::new(1.0, 20.0, 10.0),
            q: 1.3,
            v: 10.0,
            k_max: 20,
            k_t: 5,
            control: StepControl::Learned {
                actions: vec![0.05, 0.1, 0.2, 0.4, 0.8],
                params: Default::default(),
            },
            max_passes,
        }
    }

    #[test]
    fn feasible_population_returns_immediately() {
        let nl = toy();
        let o = Outline::manual(10.0, 10.0).unwrap();
        let p = Placement::new(vec![1.0, 5.0], vec![1.0, 1.0], vec![false; 2]).unwrap();
        let out = gfloorplan(vec![p.clone(), p.clone()], &nl, &o, &cfg(30), 1).unwrap();
        assert_eq!(out.passes, 0);
        assert_eq!(out.lambda, 20.0);
        assert_eq!(out.population[0], p);
    }

    #[test]
    fn overlapping_pair_exits_below_threshold() {
        let nl = toy();
        let o = Outline::manual(10.0, 10.0).unwrap();
        let p = Placement::new(vec![5.0, 5.0], vec![5.0, 5.0], vec![false; 2]).unwrap();
        let mut q = p.clone();
        q.x[1] = 5.5;
        let out = gfloorplan(vec![p, q], &nl, &o, &cfg(30), 7).unwrap();
        assert!(out.near_feasible);
        for ind in &out.population {
            // A = 8, v = 10
            assert!(total_overlap(ind, &nl) < 0.8);
        }
        let mut expected = 20.0;
        for _ in 0..out.passes {
            expected *= 1.3;
        }
        assert_eq!(out.lambda, expected);
    }

    #[test]
    fn pass_cap_is_respected() {
        let nl = toy();
        let o = Outline::manual(2.0, 2.0).unwrap();
        let p = Placement::new(vec![1.0, 1.0], vec![1.0, 1.0], vec![false; 2]).unwrap();
        // steps far too short to separate the pair
        let mut c = cfg(3);
        c.control = StepControl::Fixed(1e-6);
        c.v = 1e12;
        let out = gfloorplan(vec![p.clone(), p], &nl, &o, &c, 3).unwrap();
        assert_eq!(out.passes, 3);
        assert!(!out.near_feasible);
    }

    #[test]
    fn rejects_bad_escalation() {
        let nl = toy();
        let o = Outline::manual(10.0, 10.0).unwrap();
        let mut c = cfg(3);
        c.q = 1.0;
        let p = Placement::zeros(2);
        assert!(gfloorplan(vec![p.clone(), p], &nl, &o, &c, 0).is_err());
    }
}
