use serde::{Deserialize, Serialize};

use super::DomainSpec;
use crate::error::{Error, Result};

/// Smooth nonnegative bump subtracted from the Hardy weight. Its profile is
/// `amplitude * sin²(π t_r) * sin²(π t_φ)` with `t_r` the position of
/// `log r` in `(log r_c, log r_d)` and `t_φ` the position of `φ` in
/// `(phi1, phi2)`; it vanishes outside that window. With `relative` set the
/// profile is further divided by `r²`, i.e. measured in units of the Hardy
/// weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WBump {
    pub amplitude: f64,
    pub r_c: f64,
    pub r_d: f64,
    pub phi1: f64,
    pub phi2: f64,
    #[serde(default)]
    pub relative: bool,
}

impl WBump {
    pub fn eval(&self, r: f64, phi: f64) -> f64 {
        if r <= self.r_c || r >= self.r_d || phi <= self.phi1 || phi >= self.phi2 {
            return 0.0;
        }
        let tr = (r / self.r_c).ln() / (self.r_d / self.r_c).ln();
        let tp = (phi - self.phi1) / (self.phi2 - self.phi1);
        let s = (std::f64::consts::PI * tr).sin();
        let t = (std::f64::consts::PI * tp).sin();
        let w = self.amplitude * s * s * t * t;
        if self.relative {
            w / (r * r)
        } else {
            w
        }
    }
}

/// `V = base - Σ W`, with base `1/|x|²` when `hardy` is set and `1` otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub hardy: bool,
    #[serde(default)]
    pub w_bumps: Vec<WBump>,
}

impl Default for PotentialSpec {
    fn default() -> Self {
        PotentialSpec::hardy()
    }
}

impl PotentialSpec {
    pub fn hardy() -> Self {
        PotentialSpec {
            hardy: true,
            w_bumps: Vec::new(),
        }
    }

    /// Constant weight `1`, giving the ordinary mass matrix.
    pub fn unit() -> Self {
        PotentialSpec {
            hardy: false,
            w_bumps: Vec::new(),
        }
    }

    pub fn with_bump(mut self, bump: WBump) -> Self {
        self.w_bumps.push(bump);
        self
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let r2 = x * x + y * y;
        let base = if self.hardy { 1.0 / r2 } else { 1.0 };
        if self.w_bumps.is_empty() {
            return base;
        }
        let r = r2.sqrt();
        let phi = y.atan2(x).rem_euclid(2.0 * std::f64::consts::PI);
        base - self.w_bumps.iter().map(|w| w.eval(r, phi)).sum::<f64>()
    }

    /// Each bump must be nonzero and supported strictly inside the
    /// unperturbed cone `0 < φ < theta`.
    pub fn validate(&self, domain: &DomainSpec) -> Result<()> {
        for w in &self.w_bumps {
            if !(w.amplitude >= 0.0 && w.amplitude.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "bump amplitude {} must be nonnegative",
                    w.amplitude
                )));
            }
            if !(w.r_c > 0.0 && w.r_c < w.r_d) {
                return Err(Error::InvalidInput(format!(
                    "bump radii must satisfy 0 < r_c < r_d (got {}, {})",
                    w.r_c, w.r_d
                )));
            }
            if !(0.0 < w.phi1 && w.phi1 < w.phi2 && w.phi2 < domain.theta) {
                return Err(Error::InvalidInput(format!(
                    "bump window [{}, {}] not strictly inside the cone (0, {})",
                    w.phi1, w.phi2, domain.theta
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
    fn bump_profile() {
        let w = WBump {
            amplitude: 0.3,
            r_c: 0.5,
            r_d: 2.0,
            phi1: 0.2,
            phi2: 1.0,
            relative: false,
        };
        assert!((w.eval(1.0, 0.6) - 0.3).abs() < 1e-15);
        assert_eq!(w.eval(0.4, 0.6), 0.0);
        assert_eq!(w.eval(1.0, 1.1), 0.0);
        let pot = PotentialSpec::hardy().with_bump(w);
        let v = pot.eval(0.6f64.cos(), 0.6f64.sin());
        assert!((v - 0.7).abs() < 1e-12);
    }

    #[test]
    fn bump_must_sit_inside_cone() {
        let d = DomainSpec::sector(1.0, 2.0, 0.1, 10.0);
        let pot = PotentialSpec::hardy().with_bump(WBump {
            amplitude: 0.1,
            r_c: 0.5,
            r_d: 2.0,
            phi1: 0.5,
            phi2: 1.2,
            relative: false,
        });
        assert!(pot.validate(&d).is_err());
    }
}
