//! Tuned parameters per benchmark family.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Mcnc,
    Gsrc,
}

/// Parameters of one optimizer in one stage. `k_t`, `alpha` and `v` are
/// unused where the stage or optimizer has no such knob.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageParams {
    pub k_t: usize,
    pub k_max: usize,
    pub alpha: f64,
    pub lambda: f64,
    pub mu: f64,
    /// Fixed step scale when the controller is off.
    pub c0: f64,
    /// Near-feasibility divisor: global floorplanning stops once every overlap is below `A / v`.
    pub v: f64,
    /// Step scales the controller chooses from.
    pub actions: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preset {
    pub family: Family,
    pub gp_csa: StageParams,
    pub gp_csaq: StageParams,
    pub la_csa: StageParams,
    pub la_csaq: StageParams,
    /// Overlap weight growth factor per global pass.
    pub q: f64,
    pub max_passes: usize,
}

const AMI33_GP: [f64; 5] = [80.0, 100.0, 120.0, 140.0, 160.0];
const AMI33_LA: [f64; 5] = [1.0, 8.0, 30.0, 60.0, 90.0];
const AMI49_GP: [f64; 5] = [130.0, 180.0, 220.0, 270.0, 330.0];
const AMI49_LA: [f64; 5] = [10.0, 50.0, 100.0, 150.0, 200.0];
const GSRC_GP: [f64; 5] = [8.0, 12.0, 15.0, 20.0, 25.0];
const GSRC_LA: [f64; 5] = [0.1, 0.8, 5.0, 10.0, 20.0];

#[allow(clippy::too_many_arguments)]
fn stage(
    k_t: usize,
    k_max: usize,
    alpha: f64,
    lambda: f64,
    mu: f64,
    c0: f64,
    v: f64,
    actions: &[f64],
) -> StageParams {
    StageParams {
        k_t,
        k_max,
        alpha,
        lambda,
        mu,
        c0,
        v,
        actions: actions.to_vec(),
    }
}

impl Preset {
    /// MCNC parameters with the action groups tuned for ami33 (`large = false`) or ami49.
    pub fn mcnc(large: bool) -> Self {
        let (gp, la) = if large {
            (&AMI49_GP, &AMI49_LA)
        } else {
            (&AMI33_GP, &AMI33_LA)
        };
        Self {
            family: Family::Mcnc,
            gp_csa: stage(usize::MAX, 50, 1.0, 20.0, 10.0, 1000.0, 10.0, gp),
            gp_csaq: stage(10, 50, 1.0, 20.0, 10.0, 330.0, 10.0, gp),
            la_csa: stage(usize::MAX, 2000, 0.0, 1.0, 10.0, 500.0, 10.0, la),
            la_csaq: stage(100, 2000, 0.0, 1.0, 10.0, 100.0, 10.0, la),
            q: 1.3,
            max_passes: 30,
        }
    }

    pub fn gsrc() -> Self {
        Self {
            family: Family::Gsrc,
            gp_csa: stage(usize::MAX, 50, 1.0, 20.0, 100.0, 100.0, 100.0, &GSRC_GP),
            gp_csaq: stage(40, 200, 1.0, 20.0, 100.0, 25.0, 100.0, &GSRC_GP),
            la_csa: stage(usize::MAX, 2000, 0.0, 1.0, 10.0, 50.0, 100.0, &GSRC_LA),
            la_csaq: stage(100, 5000, 0.0, 1.0, 10.0, 10.0, 100.0, &GSRC_LA),
            q: 1.3,
            max_passes: 30,
        }
    }

    /// Up to 49 modules counts as MCNC, with the ami33 groups up to 33 modules.
    pub fn auto(num_modules: usize) -> Self {
        if num_modules <= 33 {
            Self::mcnc(false)
        } else if num_modules <= 49 {
            Self::mcnc(true)
        } else {
            Self::gsrc()
        }
    }

    pub fn for_family(family: Family, num_modules: usize) -> Self {
        match family {
            Family::Mcnc => Self::mcnc(num_modules > 33),
            Family::Gsrc => Self::gsrc(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.q > 1.0) {
            return Err(Error::InvalidConfig(format!(
                "escalation q must exceed 1, got {}",
                self.q
            )));
        }
        for (name, s) in [
            ("gp_csa", &self.gp_csa),
            ("gp_csaq", &self.gp_csaq),
            ("la_csa", &self.la_csa),
            ("la_csaq", &self.la_csaq),
        ] {
            if s.k_max == 0 || s.k_t == 0 {
                return Err(Error::InvalidConfig(format!(
                    "{name}: k_max and k_t must be positive"
                )));
            }
            if !(s.v > 0.0) || !(s.c0 > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "{name}: v and c0 must be positive"
                )));
            }
            if s.actions.is_empty() || s.actions.iter().any(|&a| !(a > 0.0)) {
                return Err(Error::InvalidConfig(format!(
                    "{name}: actions must be positive"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mcnc_global_matches_table() {
        let p = Preset::mcnc(true);
        let s = &p.gp_csaq;
        assert_eq!(
            (s.alpha, s.lambda, s.mu, s.v, s.k_t, s.k_max),
            (1.0, 20.0, 10.0, 10.0, 10, 50)
        );
        assert_eq!(s.actions, vec![130.0, 180.0, 220.0, 270.0, 330.0]);
    }

    #[test]
    fn gsrc_legalization_matches_table() {
        let s = Preset::gsrc().la_csaq;
        assert_eq!((s.lambda, s.mu, s.k_t, s.k_max), (1.0, 10.0, 100, 5000));
        assert_eq!(s.actions, vec![0.1, 0.8, 5.0, 10.0, 20.0]);
    }

    #[test]
    fn auto_detection() {
        assert_eq!(Preset::auto(33).gp_csaq.actions, AMI33_GP.to_vec());
        assert_eq!(Preset::auto(49).gp_csaq.actions, AMI49_GP.to_vec());
        assert_eq!(Preset::auto(100).family, Family::Gsrc);
    }

    #[test]
    fn presets_validate() {
        Preset::gsrc().validate().unwrap();
        Preset::mcnc(false).validate().unwrap();
        let mut bad = Preset::gsrc();
        bad.q = 1.0;
        assert!(bad.validate().is_err());
    }
}
