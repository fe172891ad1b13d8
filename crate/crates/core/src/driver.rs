//! The outer loop: sample a population, floorplan globally, legalize, and
//! retry with some modules rotated until a legal layout appears.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::cg::{ila_cg, CgLegalizeConfig, IlgConfig};
use crate::error::{Error, Result};
use crate::global::{gfloorplan, GlobalConfig};
use crate::legalize::{la_csaq, LegalizeConfig};
use crate::model::{Netlist, Outline, Placement};
use crate::objective::{eval_fl, hpwl, is_legal, ObjectiveWeights};
use crate::optim::{QParams, StepControl};
use crate::preset::{Preset, StageParams};
use crate::{stream_rng, SimRng};

/// Optimizer pairing: first letter is global floorplanning, second is
/// legalization; `c` is plain CSA, `q` adds the step-scale controller.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Cc,
    Qc,
    Qq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Legalizer {
    LaCg,
    IlaCgm,
    IlaCgs,
    LaCsaq,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Cc => "cc",
            Mode::Qc => "qc",
            Mode::Qq => "qq",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cc" => Ok(Mode::Cc),
            "qc" => Ok(Mode::Qc),
            "qq" => Ok(Mode::Qq),
            _ => Err(Error::InvalidConfig(format!("unknown mode {s:?}"))),
        }
    }
}

impl fmt::Display for Legalizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Legalizer::LaCg => "la-cg",
            Legalizer::IlaCgm => "ila-cgm",
            Legalizer::IlaCgs => "ila-cgs",
            Legalizer::LaCsaq => "la-csaq",
        })
    }
}

impl FromStr for Legalizer {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "la-cg" => Ok(Legalizer::LaCg),
            "ila-cgm" => Ok(Legalizer::IlaCgm),
            "ila-cgs" => Ok(Legalizer::IlaCgs),
            "la-csaq" => Ok(Legalizer::LaCsaq),
            _ => Err(Error::InvalidConfig(format!("unknown legalizer {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsfConfig {
    pub mode: Mode,
    pub legalizer: Legalizer,
    /// Attempts before giving up.
    pub t_max: usize,
    /// Population size.
    pub p: usize,
    pub seed: u64,
    pub preset: Preset,
    /// Per-module flip probability between attempts.
    pub rotation_prob: f64,
    /// Rounds per individual for the graph-based legalizers.
    pub n_max: usize,
}

impl CsfConfig {
    pub fn new(preset: Preset, seed: u64) -> Self {
        Self {
            mode: Mode::Qq,
            legalizer: Legalizer::LaCsaq,
            t_max: 10,
            p: 5,
            seed,
            preset,
            rotation_prob: 0.3,
            n_max: 20,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.t_max == 0 {
            return Err(Error::InvalidConfig("t_max must be at least 1".into()));
        }
        if self.p < 2 {
            return Err(Error::InvalidConfig(format!(
                "population size must be at least 2, got {}",
                self.p
            )));
        }
        if !(0.0..=1.0).contains(&self.rotation_prob) {
            return Err(Error::InvalidConfig(format!(
                "rotation probability must lie in [0, 1], got {}",
                self.rotation_prob
            )));
        }
        if self.n_max == 0 {
            return Err(Error::InvalidConfig("n_max must be positive".into()));
        }
        self.preset.validate()
    }

    pub fn global_config(&self) -> GlobalConfig {
        let s = match self.mode {
            Mode::Cc => &self.preset.gp_csa,
            Mode::Qc | Mode::Qq => &self.preset.gp_csaq,
        };
        GlobalConfig {
            weights: ObjectiveWeights::new(s.alpha, s.lambda, s.mu),
            q: self.preset.q,
            v: s.v,
            k_max: s.k_max,
            k_t: s.k_t.min(s.k_max + 1),
            control: control(s, self.mode != Mode::Cc),
            max_passes: self.preset.max_passes,
        }
    }

    pub fn legalize_config(&self) -> LegalizeConfig {
        let s = match self.mode {
            Mode::Cc | Mode::Qc => &self.preset.la_csa,
            Mode::Qq => &self.preset.la_csaq,
        };
        LegalizeConfig {
            lambda: s.lambda,
            mu: s.mu,
            k_max: s.k_max,
            k_t: s.k_t.min(s.k_max + 1),
            control: control(s, self.mode == Mode::Qq),
        }
    }

    pub fn cg_config(&self) -> Option<CgLegalizeConfig> {
        let ilg = match self.legalizer {
            Legalizer::LaCg => IlgConfig::la_cg(),
            Legalizer::IlaCgm => IlgConfig::ila_cgm(),
            Legalizer::IlaCgs => IlgConfig::ila_cgs(),
            Legalizer::LaCsaq => return None,
        };
        Some(CgLegalizeConfig {
            ilg,
            n_max: self.n_max,
        })
    }
}

fn control(s: &StageParams, learned: bool) -> StepControl {
    if learned {
        StepControl::Learned {
            actions: s.actions.clone(),
            params: QParams::default(),
        }
    } else {
        StepControl::Fixed(s.c0)
    }
}

/// Latin hypercube sample of `p` placements: along each axis the `p` centers
/// of a module fall one per equal stratum of the outline, in random order.
pub fn lhs_init(
    netlist: &Netlist,
    outline: &Outline,
    p: usize,
    rng: &mut SimRng,
) -> Vec<Placement> {
    let n = netlist.num_modules();
    let mut pop: Vec<Placement> = (0..p).map(|_| Placement::zeros(n)).collect();
    let mut strata: Vec<usize> = (0..p).collect();
    for m in 0..n {
        for (axis, extent) in [(0, outline.width), (1, outline.height)] {
            let step = extent / p as f64;
            for j in (1..p).rev() {
                strata.swap(j, rng.random_range(0..=j));
            }
            for (ind, &s) in pop.iter_mut().zip(&strata) {
                let v = (s as f64 + rng.random::<f64>()) * step;
                if axis == 0 {
                    ind.x[m] = v;
                } else {
                    ind.y[m] = v;
                }
            }
        }
        for ind in pop.iter_mut() {
            ind.rotated[m] = rng.random_bool(0.5);
        }
    }
    pop
}

/// Flips each orientation bit independently with probability `prob`.
pub fn rotate_random(placement: &mut Placement, prob: f64, rng: &mut SimRng) {
    for r in placement.rotated.iter_mut() {
        if rng.random_bool(prob) {
            *r = !*r;
        }
    }
}

/// Result of one legalizer call on a population.
#[derive(Debug, Clone)]
pub struct LegalizeResult {
    pub placement: Option<Placement>,
    /// Closest-to-legal individual, for reporting failures.
    pub best: Placement,
    pub hpwl_before_compression: Option<f64>,
}

fn least_violation(
    population: &[Placement],
    netlist: &Netlist,
    outline: &Outline,
    w: &ObjectiveWeights,
) -> Placement {
    population
        .iter()
        .map(|p| (eval_fl(p, netlist, outline, w), p))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, p)| p.clone())
        .expect("non-empty population")
}

/// Runs the configured legalizer once on a population.
pub fn legalize(
    population: &[Placement],
    netlist: &Netlist,
    outline: &Outline,
    cfg: &CsfConfig,
    seed: u64,
) -> Result<LegalizeResult> {
    match cfg.cg_config() {
        Some(cg) => {
            let mut rng = stream_rng(seed, 0);
            let out = ila_cg(population, netlist, outline, &cg, &mut rng);
            let la = cfg.legalize_config();
            let w = ObjectiveWeights::legalization(la.lambda, la.mu);
            Ok(LegalizeResult {
                best: match &out.placement {
                    Some(p) => p.clone(),
                    None => least_violation(population, netlist, outline, &w),
                },
                placement: out.placement,
                hpwl_before_compression: None,
            })
        }
        None => {
            let out = la_csaq(population, netlist, outline, &cfg.legalize_config(), seed)?;
            Ok(match out.legal {
                Some(c) => LegalizeResult {
                    best: c.placement.clone(),
                    placement: Some(c.placement),
                    hpwl_before_compression: Some(c.hpwl_before),
                },
                None => LegalizeResult {
                    placement: None,
                    best: out.best,
                    hpwl_before_compression: None,
                },
            })
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CsfResult {
    pub placement: Placement,
    pub legal: bool,
    pub hpwl: f64,
    /// Seconds spent in global floorplanning, legalization, and overall.
    pub t_g: f64,
    pub t_l: f64,
    pub t_w: f64,
    pub attempts: usize,
}

/// Runs up to `t_max` attempts. On failure the least-violating layout seen
/// is returned with `legal == false`.
pub fn run_csf(netlist: &Netlist, outline: &Outline, cfg: &CsfConfig) -> Result<CsfResult> {
    cfg.validate()?;
    if netlist.num_modules() == 0 {
        return Err(Error::InvalidArgument("netlist has no modules".into()));
    }
    let wall = Instant::now();
    let mut rng = stream_rng(cfg.seed, 0);
    let gcfg = cfg.global_config();
    let la = cfg.legalize_config();
    let lw = ObjectiveWeights::legalization(la.lambda, la.mu);

    let mut population = lhs_init(netlist, outline, cfg.p, &mut rng);
    let (mut t_g, mut t_l) = (0.0, 0.0);
    let mut fallback: Option<(f64, Placement)> = None;

    for attempt in 1..=cfg.t_max {
        let t0 = Instant::now();
        let global = gfloorplan(population, netlist, outline, &gcfg, rng.next_u64())?;
        t_g += t0.elapsed().as_secs_f64();

        let t1 = Instant::now();
        let out = legalize(&global.population, netlist, outline, cfg, rng.next_u64())?;
        t_l += t1.elapsed().as_secs_f64();

        if let Some(p) = out.placement {
            debug_assert!(is_legal(&p, netlist, outline));
            return Ok(CsfResult {
                hpwl: hpwl(&p, netlist),
                placement: p,
                legal: true,
                t_g,
                t_l,
                t_w: wall.elapsed().as_secs_f64(),
                attempts: attempt,
            });
        }
        let cost = eval_fl(&out.best, netlist, outline, &lw);
        if fallback.as_ref().is_none_or(|(c, _)| cost < *c) {
            fallback = Some((cost, out.best));
        }
        log::debug!("attempt {attempt} failed, least violation {cost}");

        population = global.population;
        for p in population.iter_mut() {
            rotate_random(p, cfg.rotation_prob, &mut rng);
        }
    }

    let (_, p) = fallback.expect("at least one attempt");
    Ok(CsfResult {
        hpwl: hpwl(&p, netlist),
        legal: is_legal(&p, netlist, outline),
        placement: p,
        t_g,
        t_l,
        t_w: wall.elapsed().as_secs_f64(),
        attempts: cfg.t_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModuleSpec, Net};
    use rand::SeedableRng;

    fn netlist(n: usize) -> Netlist {
        let modules = (0..n)
            .map(|i| ModuleSpec {
                id: i,
                name: format!("m{i}"),
                width: 1.0 + (i % 3) as f64,
                height: 1.0 + (i % 2) as f64,
            })
            .collect();
        let nets = (0..n.saturating_sub(1))
            .map(|i| Net {
                module_pins: vec![i, i + 1],
                terminal_pins: vec![],
            })
            .collect();
        Netlist::new("chain", modules, vec![], nets).unwrap()
    }

    #[test]
    fn lhs_strata_are_distinct() {
        let nl = netlist(7);
        let o = Outline::manual(10.0, 6.0).unwrap();
        for seed in 0..100 {
            let mut rng = SimRng::seed_from_u64(seed);
            let pop = lhs_init(&nl, &o, 5, &mut rng);
            for m in 0..7 {
                let mut sx: Vec<usize> = pop.iter().map(|p| (p.x[m] / 2.0) as usize).collect();
                let mut sy: Vec<usize> = pop.iter().map(|p| (p.y[m] / 1.2) as usize).collect();
                sx.sort_unstable();
                sy.sort_unstable();
                assert_eq!(sx, vec![0, 1, 2, 3, 4]);
                assert_eq!(sy, vec![0, 1, 2, 3, 4]);
            }
        }
    }

    #[test]
    fn lhs_single_sample_is_uniform_in_outline() {
        let nl = netlist(3);
        let o = Outline::manual(10.0, 10.0).unwrap();
        let mut rng = SimRng::seed_from_u64(1);
        let pop = lhs_init(&nl, &o, 1, &mut rng);
        assert_eq!(pop.len(), 1);
        assert!(pop[0]
            .x
            .iter()
            .chain(&pop[0].y)
            .all(|&v| (0.0..10.0).contains(&v)));
    }

    #[test]
    fn rotation_extremes() {
        let mut rng = SimRng::seed_from_u64(0);
        let mut p = Placement::zeros(6);
        let before = p.clone();
        rotate_random(&mut p, 0.0, &mut rng);
        assert_eq!(p, before);
        rotate_random(&mut p, 1.0, &mut rng);
        assert!(p.rotated.iter().all(|&r| r));
        assert_eq!(p.x, before.x);
    }

    #[test]
    fn rotation_frequency() {
        let mut rng = SimRng::seed_from_u64(4);
        let n = 10_000;
        let mut p = Placement::zeros(n);
        rotate_random(&mut p, 0.3, &mut rng);
        let flips = p.rotated.iter().filter(|&&r| r).count() as f64;
        let sd = (n as f64 * 0.3 * 0.7).sqrt();
        assert!((flips - 3000.0).abs() <= 3.0 * sd);
    }

    #[test]
    fn mode_and_legalizer_names_round_trip() {
        for m in [Mode::Cc, Mode::Qc, Mode::Qq] {
            assert_eq!(m.to_string().parse::<Mode>().unwrap(), m);
        }
        for l in [
            Legalizer::LaCg,
            Legalizer::IlaCgm,
            Legalizer::IlaCgs,
            Legalizer::LaCsaq,
        ] {
            assert_eq!(l.to_string().parse::<Legalizer>().unwrap(), l);
        }
        assert!("qx".parse::<Mode>().is_err());
    }

    #[test]
    fn csa_modes_disable_the_controller() {
        let mut cfg = CsfConfig::new(Preset::gsrc(), 0);
        cfg.mode = Mode::Cc;
        assert_eq!(cfg.global_config().control, StepControl::Fixed(100.0));
        assert_eq!(cfg.legalize_config().control, StepControl::Fixed(50.0));
        cfg.mode = Mode::Qc;
        assert!(matches!(
            cfg.global_config().control,
            StepControl::Learned { .. }
        ));
        assert_eq!(cfg.legalize_config().control, StepControl::Fixed(50.0));
    }

    #[test]
    fn impossible_outline_fails_after_one_attempt() {
        let nl = netlist(6);
        // smaller than the total module area
        let o = Outline::manual(2.0, 2.0).unwrap();
        let mut cfg = CsfConfig::new(Preset::mcnc(false), 3);
        cfg.t_max = 1;
        let mut preset = cfg.preset.clone();
        preset.la_csaq.k_max = 50;
        cfg.preset = preset;
        let r = run_csf(&nl, &o, &cfg).unwrap();
        assert!(!r.legal);
        assert_eq!(r.attempts, 1);
        assert!(r.t_w >= r.t_g + r.t_l);
    }

    #[test]
    fn config_validation() {
        let mut cfg = CsfConfig::new(Preset::gsrc(), 0);
        cfg.p = 1;
        assert!(cfg.validate().is_err());
        cfg.p = 5;
        cfg.t_max = 0;
        assert!(cfg.validate().is_err());
    }
}
