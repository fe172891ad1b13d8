//! Q-table controller that picks each individual's step scale `c` from a
//! discrete action set. States are population individuals, actions are
//! candidate scale factors.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::SimRng;

/// Learning rate, discount and mixing coefficient of the Q update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QParams {
    pub alpha0: f64,
    pub gamma0: f64,
    pub m0: f64,
}

impl Default for QParams {
    fn default() -> Self {
        Self {
            alpha0: 0.4,
            gamma0: 0.8,
            m0: 0.6,
        }
    }
}

/// Reward for moving the objective from `f_pre` to `f_post`.
pub fn reward(f_pre: f64, f_post: f64) -> f64 {
    (f_pre - f_post) / 100.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct QController {
    q: Vec<f64>,
    states: usize,
    actions: Vec<f64>,
    params: QParams,
    /// Last reward credited to each state.
    pub rewards: Vec<f64>,
    /// Current action index of each state.
    pub chosen: Vec<usize>,
}

/// Initial value of every Q-table cell.
const Q_INIT: f64 = 1.0;

impl QController {
    pub fn new(states: usize, actions: Vec<f64>, params: QParams) -> Result<Self> {
        if states < 2 {
            return Err(Error::InvalidConfig(format!(
                "the Q controller needs at least 2 states, got {states}"
            )));
        }
        if actions.is_empty() || actions.iter().any(|&a| !(a > 0.0)) {
            return Err(Error::InvalidConfig(
                "action set must be non-empty with positive scale factors".into(),
            ));
        }
        Ok(Self {
            q: vec![Q_INIT; states * actions.len()],
            states,
            params,
            rewards: vec![0.0; states],
            chosen: vec![0; states],
            actions,
        })
    }

    pub fn num_states(&self) -> usize {
        self.states
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn actions(&self) -> &[f64] {
        &self.actions
    }

    pub fn params(&self) -> QParams {
        self.params
    }

    pub fn q(&self, state: usize, action: usize) -> f64 {
        self.q[state * self.actions.len() + action]
    }

    pub fn set_q(&mut self, state: usize, action: usize, value: f64) {
        let m = self.actions.len();
        self.q[state * m + action] = value;
    }

    pub fn row(&self, state: usize) -> &[f64] {
        let m = self.actions.len();
        &self.q[state * m..(state + 1) * m]
    }

    fn row_max(&self, state: usize) -> f64 {
        self.row(state)
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn check(&self, state: usize, action: usize) -> Result<()> {
        if state >= self.states || action >= self.actions.len() {
            return Err(Error::InvalidArgument(format!(
                "cell ({state}, {action}) outside a {}x{} table",
                self.states,
                self.actions.len()
            )));
        }
        Ok(())
    }

    /// New value of cell `(state, action)` given the other states' row maxima.
    fn updated_value(&self, state: usize, action: usize, reward: f64, row_max: &[f64]) -> f64 {
        let QParams { alpha0, gamma0, m0 } = self.params;
        let old = self.q(state, action);
        let others: f64 = row_max
            .iter()
            .enumerate()
            .filter(|&(l, _)| l != state)
            .map(|(_, v)| v)
            .sum();
        let q_max = m0 * old + (1.0 - m0) / (self.states as f64 - 1.0) * others;
        (1.0 - alpha0) * old + alpha0 * (reward + gamma0 * q_max)
    }

    /// Updates a single cell; every other cell is left unchanged.
    pub fn q_update(&mut self, state: usize, action: usize, reward: f64) -> Result<()> {
        self.check(state, action)?;
        let maxima: Vec<f64> = (0..self.states).map(|s| self.row_max(s)).collect();
        let v = self.updated_value(state, action, reward, &maxima);
        self.set_q(state, action, v);
        self.rewards[state] = reward;
        Ok(())
    }

    /// Credits `rewards[i]` to each state's current action, all against the
    /// same snapshot of row maxima.
    pub fn update_all(&mut self, rewards: &[f64]) {
        assert_eq!(rewards.len(), self.states);
        let maxima: Vec<f64> = (0..self.states).map(|s| self.row_max(s)).collect();
        let fresh: Vec<f64> = (0..self.states)
            .map(|s| self.updated_value(s, self.chosen[s], rewards[s], &maxima))
            .collect();
        for (s, v) in fresh.into_iter().enumerate() {
            let a = self.chosen[s];
            self.set_q(s, a, v);
        }
        self.rewards.copy_from_slice(rewards);
    }

    /// Action probabilities of one state, proportional to its Q-values.
    pub fn probabilities(&self, state: usize) -> Result<Vec<f64>> {
        self.check(state, 0)?;
        let row = self.row(state);
        let sum: f64 = row.iter().sum();
        if !(sum > 0.0) || !sum.is_finite() {
            return Err(Error::InvalidState(format!(
                "Q row {state} has non-positive sum {sum}"
            )));
        }
        if row.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidState(format!(
                "Q row {state} has negative entries"
            )));
        }
        Ok(row.iter().map(|v| v / sum).collect())
    }

    pub fn sample_action(&self, state: usize, rng: &mut SimRng) -> Result<usize> {
        let p = self.probabilities(state)?;
        Ok(draw(&p, rng))
    }

    /// Like [`QController::sample_action`] but tolerant of negative cells:
    /// samples proportionally to the positive parts, or uniformly when none
    /// is positive.
    pub fn sample_action_clamped(&self, state: usize, rng: &mut SimRng) -> usize {
        let weights: Vec<f64> = self.row(state).iter().map(|v| v.max(0.0)).collect();
        let sum: f64 = weights.iter().sum();
        if sum > 0.0 && sum.is_finite() {
            let p: Vec<f64> = weights.iter().map(|w| w / sum).collect();
            draw(&p, rng)
        } else {
            rng.random_range(0..self.actions.len())
        }
    }
}

fn draw(p: &[f64], rng: &mut SimRng) -> usize {
    let r: f64 = rng.random();
    let mut acc = 0.0;
    for (j, &pj) in p.iter().enumerate() {
        acc += pj;
        if r < acc {
            return j;
        }
    }
    // rounding left r above the last partial sum
    p.iter().rposition(|&v| v > 0.0).unwrap_or(p.len() - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn ctl() -> QController {
        QController::new(5, vec![0.1, 0.8, 5.0, 10.0, 20.0], QParams::default()).unwrap()
    }

    #[test]
    fn worked_update() {
        let mut c = ctl();
        c.set_q(0, 2, 2.0);
        // every other row has maximum 1
        c.q_update(0, 2, 0.0).unwrap();
        assert!((c.q(0, 2) - 1.712).abs() < 1e-12);
    }

    #[test]
    fn zero_learning_rate_is_identity() {
        let mut c = QController::new(
            3,
            vec![1.0, 2.0],
            QParams {
                alpha0: 0.0,
                ..QParams::default()
            },
        )
        .unwrap();
        let before = c.clone();
        c.q_update(1, 1, 50.0).unwrap();
        assert_eq!(c.q, before.q);
    }

    #[test]
    fn single_state_is_rejected() {
        assert!(matches!(
            QController::new(1, vec![1.0], QParams::default()),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn reward_examples() {
        assert_eq!(reward(300.0, 100.0), 2.0);
        assert_eq!(reward(42.0, 42.0), 0.0);
        assert_eq!(reward(100.0, 300.0), -2.0);
    }

    #[test]
    fn uniform_row_probabilities() {
        let p = ctl().probabilities(3).unwrap();
        assert!(p.iter().all(|&v| (v - 0.2).abs() < 1e-15));
    }

    #[test]
    fn dominant_action_probability() {
        let mut c = ctl();
        c.set_q(0, 0, 1.0);
        for j in 1..5 {
            c.set_q(0, j, 1e-9);
        }
        let p = c.probabilities(0).unwrap();
        // 1/(1+4ε) >= 1-4ε, up to rounding
        assert!(p[0] >= 1.0 - 4e-9 - 1e-15);
    }

    #[test]
    fn non_positive_row_is_invalid() {
        let mut c = ctl();
        for j in 0..5 {
            c.set_q(2, j, 0.0);
        }
        let mut rng = SimRng::seed_from_u64(0);
        assert!(matches!(
            c.sample_action(2, &mut rng),
            Err(Error::InvalidState(_))
        ));
        // the clamped sampler falls back to uniform
        assert!(c.sample_action_clamped(2, &mut rng) < 5);
    }

    #[test]
    fn update_all_touches_only_chosen_cells() {
        let mut c = ctl();
        c.chosen = vec![0, 1, 2, 3, 4];
        let before = c.clone();
        c.update_all(&[1.0, 0.0, 2.0, 0.5, 3.0]);
        let mut changed = 0;
        for s in 0..5 {
            for a in 0..5 {
                if c.q(s, a) != before.q(s, a) {
                    changed += 1;
                    assert_eq!(a, c.chosen[s]);
                }
            }
        }
        assert_eq!(changed, 5);
    }
}
