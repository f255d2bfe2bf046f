//! Experiment configuration. Every config file carries `schema_version`;
//! see `docs/config.md` for the JSON layout.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::eig::EigOptions;
use crate::error::{Error, Result};
use crate::geometry::{Bulge, DomainSpec, PotentialSpec, WBump};

pub const SCHEMA_VERSION: u32 = 1;

/// Truncation radii of one sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub r_min: f64,
    pub r_max: f64,
}

impl Truncation {
    /// `[10^-k, 10^k]`
    pub fn decades(k: f64) -> Self {
        Truncation {
            r_min: 10f64.powf(-k),
            r_max: 10f64.powf(k),
        }
    }

    pub fn length(&self) -> f64 {
        (self.r_max / self.r_min).ln()
    }
}

/// Fixed mesh size in log-polar units, `h = ln 10 / elements_per_decade`,
/// used in both the radial and the angular direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    pub elements_per_decade: f64,
}

impl Default for Resolution {
    fn default() -> Self {
        Resolution {
            elements_per_decade: 32.0,
        }
    }
}

impl Resolution {
    pub fn h(&self) -> f64 {
        10f64.ln() / self.elements_per_decade
    }

    pub fn n_radial(&self, t: &Truncation) -> usize {
        ((t.length() / self.h()).round() as usize).max(2)
    }

    pub fn n_angular(&self, theta: f64) -> usize {
        ((theta / self.h()).round() as usize).max(2)
    }
}

/// Classification thresholds of the localization surrogate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    /// Localized needs the ratio at the largest `L` to reach this.
    pub localized_min_ratio: f64,
    /// Largest tolerated drop of the ratio between consecutive sweep points.
    pub trend_slack: f64,
    /// Spreading needs `max_annulus_fraction × decades` at most this.
    pub spreading_max_product: f64,
    /// ... and the product to vary by at most this fraction along the sweep.
    pub spreading_flatness: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            localized_min_ratio: 0.9,
            trend_slack: 0.02,
            spreading_max_product: 2.5,
            spreading_flatness: 0.3,
        }
    }
}

fn default_true() -> bool {
    true
}

/// A family of truncated domains solved at constant resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPlan {
    pub theta: f64,
    pub theta_x: f64,
    #[serde(default)]
    pub bulges: Vec<Bulge>,
    #[serde(default)]
    pub potential: PotentialSpec,
    /// Strictly increasing in `L`.
    pub schedule: Vec<Truncation>,
    #[serde(default)]
    pub resolution: Resolution,
    #[serde(default)]
    pub solver: EigOptions,
    #[serde(default)]
    pub thresholds: Thresholds,
    /// Reference window for the localization ratio; defaults to
    /// `[r_a/10, 10 r_b]` of the bulge hull, or `[0.1, 10]` without bulges.
    #[serde(default)]
    pub window: Option<[f64; 2]>,
    /// Run sweep points concurrently.
    #[serde(default = "default_true")]
    pub parallel: bool,
    /// Deflated steps of the second-eigenvalue probe per point (0 disables it).
    #[serde(default)]
    pub gap_probe_steps: usize,
}

impl SweepPlan {
    /// Quarter-plane defaults: `θ = π/2` inside the half-plane.
    pub fn new(theta: f64, theta_x: f64, schedule: Vec<Truncation>) -> Self {
        SweepPlan {
            theta,
            theta_x,
            bulges: Vec::new(),
            potential: PotentialSpec::hardy(),
            schedule,
            resolution: Resolution::default(),
            solver: EigOptions::default(),
            thresholds: Thresholds::default(),
            window: None,
            parallel: true,
            gap_probe_steps: 0,
        }
    }

    pub fn with_bulge(mut self, b: Bulge) -> Self {
        self.bulges.push(b);
        self
    }

    pub fn with_bulges(mut self, bulges: Vec<Bulge>) -> Self {
        self.bulges = bulges;
        self
    }

    pub fn with_potential(mut self, p: PotentialSpec) -> Self {
        self.potential = p;
        self
    }

    pub fn with_resolution(mut self, elements_per_decade: f64) -> Self {
        self.resolution = Resolution {
            elements_per_decade,
        };
        self
    }

    pub fn domain(&self, t: &Truncation) -> DomainSpec {
        DomainSpec {
            theta: self.theta,
            theta_x: self.theta_x,
            bulges: self.bulges.clone(),
            r_min: t.r_min,
            r_max: t.r_max,
        }
    }

    /// Radial hull `(r_a, r_b)` of all bulges.
    pub fn bulge_hull(&self) -> Option<(f64, f64)> {
        let ra = self.bulges.iter().map(|b| b.r_a).reduce(f64::min)?;
        let rb = self.bulges.iter().map(|b| b.r_b).reduce(f64::max)?;
        Some((ra, rb))
    }

    pub fn reference_window(&self) -> [f64; 2] {
        if let Some(w) = self.window {
            return w;
        }
        match self.bulge_hull() {
            Some((ra, rb)) => [ra / 10.0, 10.0 * rb],
            None => [0.1, 10.0],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schedule.is_empty() {
            return Err(Error::InvalidInput("empty truncation schedule".into()));
        }
        for w in self.schedule.windows(2) {
            if !(w[1].length() > w[0].length()) {
                return Err(Error::InvalidInput(format!(
                    "schedule must be strictly increasing in L ({} then {})",
                    w[0].length(),
                    w[1].length()
                )));
            }
        }
        if !(self.resolution.elements_per_decade > 0.0) {
            return Err(Error::InvalidInput("elements_per_decade must be positive".into()));
        }
        let [lo, hi] = self.reference_window();
        if !(lo > 0.0 && lo < hi) {
            return Err(Error::InvalidInput(format!("bad reference window [{lo}, {hi}]")));
        }
        for t in &self.schedule {
            let d = crate::geometry::build_domain(self.domain(t))?;
            self.potential.validate(&d)?;
        }
        Ok(())
    }
}

/// `sweep` and `decay`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub schema_version: u32,
    pub plan: SweepPlan,
}

/// `gap`: paired sweeps with and without `bulge`, plus an optional chain
/// of nested bulge widths checked at the largest truncation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapConfig {
    pub schema_version: u32,
    /// Bulge-free plan (its `bulges` are ignored).
    pub plan: SweepPlan,
    pub bulge: Option<Bulge>,
    /// Required margin in `μ_∞(C∪B) < μ_C - delta`.
    #[serde(default)]
    pub delta: f64,
    #[serde(default)]
    pub nested_extra_angles: Vec<f64>,
}

/// `probe`: one sweep per bulge width, widths in shrinking order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub schema_version: u32,
    /// Carries the potential with its W bumps; `bulges` are ignored.
    pub plan: SweepPlan,
    pub r_a: f64,
    pub r_b: f64,
    pub extra_angles: Vec<f64>,
    /// Relative distance of `μ_∞` to `μ_C` allowed for spreading verdicts.
    #[serde(default = "default_spreading_tol")]
    pub spreading_mu_tol: f64,
}

fn default_spreading_tol() -> f64 {
    0.01
}

/// `bump-search`: sectors of the ambient cone of growing angle and length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BumpConfig {
    pub schema_version: u32,
    pub theta_x: f64,
    /// Bump angles as fractions of `theta_x`, paired with `schedule`.
    pub angle_fractions: Vec<f64>,
    pub schedule: Vec<Truncation>,
    #[serde(default)]
    pub resolution: Resolution,
    #[serde(default)]
    pub solver: EigOptions,
}

/// `mono`: the three monotonicity chains on one truncation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonoConfig {
    pub schema_version: u32,
    pub theta: f64,
    pub theta_x: f64,
    pub truncation: Truncation,
    #[serde(default)]
    pub resolution: Resolution,
    #[serde(default)]
    pub solver: EigOptions,
    /// Bulge band of the domain chain.
    pub r_a: f64,
    pub r_b: f64,
    /// Increasing extra angles (domain enlargement).
    pub extra_angles: Vec<f64>,
    /// Number of uniform refinements in the mesh chain.
    #[serde(default = "default_refinements")]
    pub refinements: usize,
    /// Shape of W; its amplitude is replaced by each entry of `w_amplitudes`.
    pub w_bump: WBump,
    /// Increasing W amplitudes (potential decrease).
    pub w_amplitudes: Vec<f64>,
}

fn default_refinements() -> usize {
    2
}

pub trait Versioned {
    fn schema_version(&self) -> u32;
}

macro_rules! versioned {
    ($($t:ty),*) => {
        $(impl Versioned for $t {
            fn schema_version(&self) -> u32 {
                self.schema_version
            }
        })*
    };
}

versioned!(SweepConfig, GapConfig, ProbeConfig, BumpConfig, MonoConfig);

pub fn parse_config<T: DeserializeOwned + Versioned>(text: &str) -> Result<T> {
    let cfg: T = serde_json::from_str(text)?;
    if cfg.schema_version() != SCHEMA_VERSION {
        return Err(Error::InvalidInput(format!(
            "unsupported schema_version {} (expected {SCHEMA_VERSION})",
            cfg.schema_version()
        )));
    }
    Ok(cfg)
}

pub fn load_config<T: DeserializeOwned + Versioned>(path: &Path) -> Result<T> {
    parse_config(&std::fs::read_to_string(path)?)
}
