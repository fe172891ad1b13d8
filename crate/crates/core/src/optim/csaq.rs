//! Population CSA with per-individual step scales chosen by a Q-table.

use super::{csa::CsaState, qlearn::reward, Objective, QController, QParams};
use crate::error::Result;
use crate::stream_rng;

/// How each individual's step scale is set.
#[derive(Debug, Clone, PartialEq)]
pub enum StepControl {
    /// Scale drawn from `actions`, re-drawn every `k_t` iterations from the Q-table.
    Learned { actions: Vec<f64>, params: QParams },
    /// Constant scale for every individual; the controller never runs.
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsaqConfig {
    pub k_max: usize,
    pub k_t: usize,
    pub control: StepControl,
    /// Stop as soon as any individual's objective is exactly zero.
    pub stop_at_zero: bool,
}

#[derive(Debug, Clone)]
pub struct CsaqOutcome {
    /// Final iterate of every individual, or the state at the moment of an early stop.
    pub population: Vec<Vec<f64>>,
    /// Objective at each returned iterate.
    pub values: Vec<f64>,
    /// Incumbent objective of each individual over the whole run.
    pub best_values: Vec<f64>,
    pub best_points: Vec<Vec<f64>>,
    /// `(individual, iteration)` of the first exact zero when `stop_at_zero` is set.
    pub hit: Option<(usize, usize)>,
    pub iterations: usize,
    pub controller: Option<QController>,
}

/// Runs the population recurrences. Individual `i` is evaluated with `objectives[i]`.
///
/// The random streams of individual `i` and of the controller are derived
/// from `seed`, so a run is reproducible bit for bit.
pub fn csaq_run<O: Objective>(
    objectives: &[O],
    population: Vec<Vec<f64>>,
    cfg: &CsaqConfig,
    seed: u64,
) -> Result<CsaqOutcome> {
    let p = population.len();
    assert_eq!(objectives.len(), p, "one objective per individual");
    assert!(
        cfg.k_max >= 1 && cfg.k_t >= 1,
        "k_max and k_t must be positive"
    );

    let mut rngs: Vec<_> = (0..p as u64).map(|i| stream_rng(seed, i)).collect();
    let mut ctl_rng = stream_rng(seed, p as u64);

    let mut controller = match &cfg.control {
        StepControl::Learned { actions, params } => {
            Some(QController::new(p, actions.clone(), *params)?)
        }
        StepControl::Fixed(_) => None,
    };

    let mut states: Vec<CsaState> = Vec::with_capacity(p);
    for (i, u) in population.into_iter().enumerate() {
        let c = match (&mut controller, &cfg.control) {
            (Some(ctl), _) => {
                let a = {
                    use rand::Rng;
                    ctl_rng.random_range(0..ctl.num_actions())
                };
                ctl.chosen[i] = a;
                ctl.actions()[a]
            }
            (None, StepControl::Fixed(c)) => *c,
            (None, StepControl::Learned { .. }) => unreachable!(),
        };
        states.push(CsaState::new(&objectives[i], u, c, &mut rngs[i]));
    }

    let mut window_start = vec![0.0; p];
    let mut current = vec![0.0; p];
    let mut rewards = vec![0.0; p];

    let finish = |states: Vec<CsaState>,
                  values: Vec<f64>,
                  hit: Option<(usize, usize)>,
                  iterations: usize,
                  controller: Option<QController>| {
        let best_values = states.iter().map(|s| s.best_f).collect();
        let best_points = states.iter().map(|s| s.best_u.clone()).collect();
        CsaqOutcome {
            population: states.into_iter().map(|s| s.u).collect(),
            values,
            best_values,
            best_points,
            hit,
            iterations,
            controller,
        }
    };

    for k in 1..=cfg.k_max {
        for i in 0..p {
            current[i] = states[i].probe(&objectives[i], &mut rngs[i]);
            if k == 1 {
                window_start[i] = current[i];
            }
            if cfg.stop_at_zero && current[i] == 0.0 {
                return Ok(finish(states, current, Some((i, k)), k, controller));
            }
        }

        if let Some(ctl) = controller.as_mut() {
            if k % cfg.k_t == 0 {
                for i in 0..p {
                    rewards[i] = reward(window_start[i], current[i]);
                }
                ctl.update_all(&rewards);
                for i in 0..p {
                    let a = ctl.sample_action_clamped(i, &mut ctl_rng);
                    ctl.chosen[i] = a;
                    states[i].c = ctl.actions()[a];
                    window_start[i] = current[i];
                }
            }
        }

        for s in states.iter_mut() {
            s.advance();
        }
    }

    let mut hit = None;
    for i in 0..p {
        current[i] = objectives[i].value(&states[i].u);
        states[i].record(current[i]);
        if cfg.stop_at_zero && hit.is_none() && current[i] == 0.0 {
            hit = Some((i, cfg.k_max));
        }
    }
    Ok(finish(states, current, hit, cfg.k_max, controller))
}
