use super::{dot, norm, Objective};
use crate::SimRng;

/// Outcome of a single CSA iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepKind {
    /// The iterate moved by exactly `c` along the conjugate direction.
    Moved,
    /// The conjugate direction vanished; the iterate was left in place.
    Stationary,
}

/// Polak-Ribière conjugate subgradient iteration with step length `c`.
#[derive(Debug, Clone)]
pub struct CsaState {
    pub u: Vec<f64>,
    g_prev: Vec<f64>,
    d_prev: Vec<f64>,
    g: Vec<f64>,
    pub c: f64,
    pub best_u: Vec<f64>,
    pub best_f: f64,
}

impl CsaState {
    /// Starts at `u0` with `d_0 = 0` and `g_0 ∈ ∂f(u_0)`.
    pub fn new<O: Objective>(f: &O, u0: Vec<f64>, c: f64, rng: &mut SimRng) -> Self {
        assert_eq!(u0.len(), f.dim(), "initial point has wrong dimension");
        let mut g_prev = vec![0.0; u0.len()];
        let f0 = f.subgradient(&u0, rng, &mut g_prev);
        Self {
            best_u: u0.clone(),
            best_f: f0,
            g: vec![0.0; u0.len()],
            d_prev: vec![0.0; u0.len()],
            g_prev,
            u: u0,
            c,
        }
    }

    /// Takes a subgradient at the current iterate and returns `f` there.
    ///
    /// Split from [`CsaState::advance`] so a controller can act on the value
    /// before the step length is committed.
    pub fn probe<O: Objective>(&mut self, f: &O, rng: &mut SimRng) -> f64 {
        let fk = f.subgradient(&self.u, rng, &mut self.g);
        self.record(fk);
        fk
    }

    /// Moves along the conjugate direction built from the last probed subgradient.
    pub fn advance(&mut self) -> StepKind {
        let gp2 = dot(&self.g_prev, &self.g_prev);
        let eta = if gp2 > 0.0 {
            let num: f64 = self
                .g
                .iter()
                .zip(&self.g_prev)
                .map(|(gk, gp)| gk * (gk - gp))
                .sum();
            num / gp2
        } else {
            0.0
        };

        for (d, g) in self.d_prev.iter_mut().zip(&self.g) {
            *d = -g + eta * *d;
        }
        std::mem::swap(&mut self.g_prev, &mut self.g);

        let dn = norm(&self.d_prev);
        if !(dn > 0.0) || !dn.is_finite() {
            self.d_prev.fill(0.0);
            return StepKind::Stationary;
        }
        let step = self.c / dn;
        for (u, d) in self.u.iter_mut().zip(&self.d_prev) {
            *u += step * d;
        }
        StepKind::Moved
    }

    /// One full iteration: probe then advance.
    pub fn step<O: Objective>(&mut self, f: &O, rng: &mut SimRng) -> StepKind {
        self.probe(f, rng);
        self.advance()
    }

    /// Updates the incumbent with a value known to belong to the current iterate.
    pub fn record(&mut self, fk: f64) {
        if fk < self.best_f {
            self.best_f = fk;
            self.best_u.copy_from_slice(&self.u);
        }
    }

    pub fn direction(&self) -> &[f64] {
        &self.d_prev
    }
}

#[derive(Debug, Clone)]
pub struct CsaOutcome {
    pub best_u: Vec<f64>,
    pub best_f: f64,
    pub iterations: usize,
    pub stationary: bool,
}

/// Runs up to `k_max` CSA iterations from `u0` and returns the incumbent.
pub fn csa_run<O: Objective>(
    f: &O,
    u0: Vec<f64>,
    c: f64,
    k_max: usize,
    rng: &mut SimRng,
) -> CsaOutcome {
    assert!(k_max >= 1 && c > 0.0, "csa_run needs k_max >= 1 and c > 0");
    let mut state = CsaState::new(f, u0, c, rng);
    let mut iterations = 0;
    let mut stationary = false;
    for _ in 0..k_max {
        iterations += 1;
        if state.step(f, rng) == StepKind::Stationary {
            stationary = true;
            break;
        }
    }
    if !stationary {
        let f_last = f.value(&state.u);
        state.record(f_last);
    }
    CsaOutcome {
        best_u: state.best_u,
        best_f: state.best_f,
        iterations,
        stationary,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    /// `f(u) = ‖u‖₁` with a random sign at exact zeros.
    pub(crate) struct L1;

    impl Objective for L1 {
        fn dim(&self) -> usize {
            2
        }
        fn value(&self, u: &[f64]) -> f64 {
            u.iter().map(|v| v.abs()).sum()
        }
        fn subgradient(&self, u: &[f64], _rng: &mut SimRng, g: &mut [f64]) -> f64 {
            for (gi, ui) in g.iter_mut().zip(u) {
                *gi = if *ui > 0.0 {
                    1.0
                } else if *ui < 0.0 {
                    -1.0
                } else {
                    0.0
                };
            }
            self.value(u)
        }
    }

    struct Flat;

    impl Objective for Flat {
        fn dim(&self) -> usize {
            3
        }
        fn value(&self, _u: &[f64]) -> f64 {
            1.0
        }
        fn subgradient(&self, _u: &[f64], _rng: &mut SimRng, g: &mut [f64]) -> f64 {
            g.fill(0.0);
            1.0
        }
    }

    #[test]
    fn l1_descends() {
        let mut rng = SimRng::seed_from_u64(7);
        let out = csa_run(&L1, vec![5.0, 5.0], 1.0, 50, &mut rng);
        assert!(out.best_f < 10.0);
        assert!(out.best_f >= 0.0);
        assert!((L1.value(&out.best_u) - out.best_f).abs() < 1e-12);
    }

    #[test]
    fn equal_subgradients_reduce_to_steepest_descent() {
        let mut rng = SimRng::seed_from_u64(0);
        let mut s = CsaState::new(&L1, vec![5.0, 3.0], 0.5, &mut rng);
        s.step(&L1, &mut rng);
        // g_1 == g_0 so eta = 0 and d_1 = -g_1
        assert_eq!(s.direction(), &[-1.0, -1.0]);
        s.step(&L1, &mut rng);
        assert_eq!(s.direction(), &[-1.0, -1.0]);
    }

    #[test]
    fn step_length_equals_c() {
        let mut rng = SimRng::seed_from_u64(1);
        let mut s = CsaState::new(&L1, vec![3.7, -2.2], 0.3, &mut rng);
        for _ in 0..40 {
            let before = s.u.clone();
            if s.step(&L1, &mut rng) == StepKind::Moved {
                let moved = norm(&[s.u[0] - before[0], s.u[1] - before[1]]);
                assert!((moved - 0.3).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_direction_stops_early() {
        let mut rng = SimRng::seed_from_u64(1);
        let out = csa_run(&Flat, vec![1.0, 2.0, 3.0], 1.0, 10, &mut rng);
        assert!(out.stationary);
        assert_eq!(out.iterations, 1);
        assert_eq!(out.best_u, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn incumbent_is_monotone() {
        let mut rng = SimRng::seed_from_u64(9);
        let mut s = CsaState::new(&L1, vec![10.0, -4.0], 2.5, &mut rng);
        let mut last = s.best_f;
        for _ in 0..100 {
            s.step(&L1, &mut rng);
            assert!(s.best_f <= last);
            last = s.best_f;
        }
    }
}
