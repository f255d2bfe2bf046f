use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Angular bulge attached to the lateral edge `φ = theta` over `r_a < r < r_b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bulge {
    pub r_a: f64,
    pub r_b: f64,
    pub extra_angle: f64,
}

/// Truncated sector `{r_min < r < r_max, 0 < φ < theta}` plus bulges,
/// inside the ambient sector `0 < φ < theta_x`. The FEM is planar (`N = 2`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub theta: f64,
    pub theta_x: f64,
    #[serde(default)]
    pub bulges: Vec<Bulge>,
    pub r_min: f64,
    pub r_max: f64,
}

impl DomainSpec {
    pub fn sector(theta: f64, theta_x: f64, r_min: f64, r_max: f64) -> Self {
        DomainSpec {
            theta,
            theta_x,
            bulges: Vec::new(),
            r_min,
            r_max,
        }
    }

    pub fn with_bulge(mut self, bulge: Bulge) -> Self {
        self.bulges.push(bulge);
        self
    }

    /// Same domain with a different truncation band.
    pub fn truncated(&self, r_min: f64, r_max: f64) -> Self {
        DomainSpec {
            r_min,
            r_max,
            ..self.clone()
        }
    }

    pub fn without_bulges(&self) -> Self {
        DomainSpec {
            bulges: Vec::new(),
            ..self.clone()
        }
    }

    /// `log(r_max / r_min)`.
    pub fn length(&self) -> f64 {
        (self.r_max / self.r_min).ln()
    }

    pub fn is_pure_cone(&self) -> bool {
        self.bulges.is_empty()
    }

    /// Largest opening reached by the perturbed domain.
    pub fn max_opening(&self) -> f64 {
        self.bulges
            .iter()
            .map(|b| self.theta + b.extra_angle)
            .fold(self.theta, f64::max)
    }
}

/// Validates the spec and merges overlapping bulges into their hull
/// (union of radial bands, largest extra angle). Bulges come back sorted by
/// `r_a`.
pub fn build_domain(spec: DomainSpec) -> Result<DomainSpec> {
    if !(spec.r_min > 0.0 && spec.r_min < spec.r_max && spec.r_max.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "truncation radii must satisfy 0 < r_min < r_max (got {}, {})",
            spec.r_min, spec.r_max
        )));
    }
    if !(spec.theta_x > 0.0 && spec.theta_x <= 2.0 * PI) {
        return Err(Error::InvalidInput(format!(
            "ambient opening theta_X = {} outside (0, 2π]",
            spec.theta_x
        )));
    }
    if !(spec.theta > 0.0 && spec.theta <= spec.theta_x) {
        return Err(Error::InvalidInput(format!(
            "cone opening theta = {} must lie in (0, theta_X = {}]",
            spec.theta, spec.theta_x
        )));
    }
    for b in &spec.bulges {
        if !(b.extra_angle > 0.0) {
            return Err(Error::InvalidInput(format!(
                "bulge extra_angle = {} must be positive",
                b.extra_angle
            )));
        }
        let opening = spec.theta + b.extra_angle;
        if opening > spec.theta_x * (1.0 + 1e-12) {
            return Err(Error::BulgeOutsideAmbient {
                opening,
                theta_x: spec.theta_x,
            });
        }
        if !(spec.r_min < b.r_a && b.r_a < b.r_b && b.r_b < spec.r_max) {
            return Err(Error::BulgeOutsideBand {
                r_a: b.r_a,
                r_b: b.r_b,
                r_min: spec.r_min,
                r_max: spec.r_max,
            });
        }
    }

    let mut bulges = spec.bulges.clone();
    bulges.sort_by(|p, q| p.r_a.total_cmp(&q.r_a));
    let mut merged: Vec<Bulge> = Vec::with_capacity(bulges.len());
    for b in bulges {
        match merged.last_mut() {
            Some(last) if b.r_a <= last.r_b => {
                last.r_b = last.r_b.max(b.r_b);
                last.extra_angle = last.extra_angle.max(b.extra_angle);
            }
            _ => merged.push(b),
        }
    }
    Ok(DomainSpec {
        bulges: merged,
        ..spec
    })
}
