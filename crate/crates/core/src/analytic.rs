//! Closed-form spectral objects of the model cone
//! `C = {(r, ω) : r > 0, ω ∈ D}` with the Hardy weight `1/|x|²`.
//!
//! Separating variables turns `-Δu - μ u/|x|² = 0` into the spherical
//! eigenproblem `-Δ_S v = λ_D v` on `D` and the Euler equation
//! `-u'' - (N-1)/r u' - (μ - λ_D)/r² u = 0`, whose solutions are powers
//! `r^{α±}`. Everything here is a pure function of its inputs.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shape of the cross-section `D ⊂ S^{N-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SectionKind {
    /// Arc of opening `theta` on the unit circle (`N = 2`).
    Arc { theta: f64 },
    /// Polar cap `{polar angle < theta0}` on `S²` (`N = 3`).
    Cap { theta0: f64 },
    /// Arbitrary cross-section given only through its eigenvalue.
    Explicit { lambda_d: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossSection {
    pub dimension: usize,
    pub kind: SectionKind,
}

impl CrossSection {
    pub fn new(dimension: usize, kind: SectionKind) -> Result<Self> {
        let cs = CrossSection { dimension, kind };
        cs.validate()?;
        Ok(cs)
    }

    pub fn arc(theta: f64) -> Result<Self> {
        Self::new(2, SectionKind::Arc { theta })
    }

    pub fn cap(theta0: f64) -> Result<Self> {
        Self::new(3, SectionKind::Cap { theta0 })
    }

    pub fn explicit(dimension: usize, lambda_d: f64) -> Result<Self> {
        Self::new(dimension, SectionKind::Explicit { lambda_d })
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension < 2 {
            return Err(Error::InvalidInput(format!(
                "dimension N = {} must be at least 2",
                self.dimension
            )));
        }
        match self.kind {
            SectionKind::Arc { theta } => {
                if !(theta > 0.0 && theta < 2.0 * PI) {
                    return Err(Error::InvalidInput(format!(
                        "arc opening {theta} outside (0, 2π)"
                    )));
                }
                if self.dimension != 2 {
                    return Err(Error::InvalidInput(
                        "an arc cross-section requires N = 2".into(),
                    ));
                }
            }
            SectionKind::Cap { theta0 } => {
                if !(theta0 > 0.0 && theta0 < PI) {
                    return Err(Error::InvalidInput(format!(
                        "cap angle {theta0} outside (0, π)"
                    )));
                }
                if self.dimension != 3 {
                    return Err(Error::InvalidInput(
                        "a cap cross-section requires N = 3".into(),
                    ));
                }
            }
            SectionKind::Explicit { lambda_d } => {
                if !(lambda_d > 0.0 && lambda_d.is_finite()) {
                    return Err(Error::InvalidInput(format!(
                        "explicit lambda_D = {lambda_d} must be positive"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Principal cross-section eigenfunction `v_D`, normalized to `sup v_D = 1`.
#[derive(Debug, Clone, PartialEq)]
pub enum AngularProfile {
    /// `sin(π φ / theta)` on `(0, theta)`.
    Sine { theta: f64 },
    /// Values and derivatives on the uniform grid `k * step`, `k = 0..len`,
    /// interpolated by cubic Hermite segments.
    Tabulated {
        step: f64,
        values: Vec<f64>,
        slopes: Vec<f64>,
    },
    /// Explicit cross-sections carry no sampler.
    Unavailable,
}

impl AngularProfile {
    pub fn is_available(&self) -> bool {
        !matches!(self, AngularProfile::Unavailable)
    }

    /// Value at `angle`; zero outside the cross-section, `None` when unavailable.
    pub fn eval(&self, angle: f64) -> Option<f64> {
        match self {
            AngularProfile::Sine { theta } => {
                if angle <= 0.0 || angle >= *theta {
                    Some(0.0)
                } else {
                    Some((PI * angle / theta).sin())
                }
            }
            AngularProfile::Tabulated {
                step,
                values,
                slopes,
            } => {
                let end = step * (values.len() - 1) as f64;
                if angle < 0.0 || angle >= end {
                    return Some(0.0);
                }
                let k = ((angle / step) as usize).min(values.len() - 2);
                let t = (angle - k as f64 * step) / step;
                let (h00, h10, h01, h11) = (
                    (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t),
                    t * (1.0 - t) * (1.0 - t),
                    t * t * (3.0 - 2.0 * t),
                    t * t * (t - 1.0),
                );
                Some(
                    h00 * values[k]
                        + h10 * step * slopes[k]
                        + h01 * values[k + 1]
                        + h11 * step * slopes[k + 1],
                )
            }
            AngularProfile::Unavailable => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossSectionEigenpair {
    pub lambda_d: f64,
    pub profile: AngularProfile,
}

/// RK4 steps used by the cap shooting.
const SHOOTING_STEPS: usize = 4000;
const SHOOTING_TOL: f64 = 1e-10;
const MAX_BISECTION_STEPS: usize = 200;

/// Principal Dirichlet eigenpair of `-Δ_S` on the cross-section.
pub fn cross_section_eigenpair(cs: &CrossSection) -> Result<CrossSectionEigenpair> {
    cs.validate()?;
    match cs.kind {
        SectionKind::Arc { theta } => Ok(CrossSectionEigenpair {
            lambda_d: (PI / theta).powi(2),
            profile: AngularProfile::Sine { theta },
        }),
        SectionKind::Cap { theta0 } => shoot_cap(theta0),
        SectionKind::Explicit { lambda_d } => Ok(CrossSectionEigenpair {
            lambda_d,
            profile: AngularProfile::Unavailable,
        }),
    }
}

/// Integrates the Legendre form `v'' + cot θ v' + λ v = 0`, `v(0) = 1`,
/// `v'(0) = 0`, on `[0, theta0]`. The first step uses the regular series
/// `1 - λθ²/4 + λ(λ - 2/3)θ⁴/64` to step off the singular point.
fn legendre_trajectory(lambda: f64, theta0: f64, steps: usize) -> (Vec<f64>, Vec<f64>) {
    let h = theta0 / steps as f64;
    let mut v = Vec::with_capacity(steps + 1);
    let mut dv = Vec::with_capacity(steps + 1);
    v.push(1.0);
    dv.push(0.0);
    let c2 = -lambda / 4.0;
    let c4 = lambda * (lambda - 2.0 / 3.0) / 64.0;
    v.push(1.0 + c2 * h * h + c4 * h.powi(4));
    dv.push(2.0 * c2 * h + 4.0 * c4 * h.powi(3));

    let rhs = |t: f64, y: [f64; 2]| -> [f64; 2] { [y[1], -y[1] / t.tan() - lambda * y[0]] };
    for k in 1..steps {
        let t = k as f64 * h;
        let y = [v[k], dv[k]];
        let k1 = rhs(t, y);
        let k2 = rhs(t + 0.5 * h, [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
        let k3 = rhs(t + 0.5 * h, [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
        let k4 = rhs(t + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
        v.push(y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]));
        dv.push(y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]));
    }
    (v, dv)
}

/// True when the trajectory reaches zero somewhere in `(0, theta0]`, i.e.
/// `lambda` lies above the principal eigenvalue (Sturm comparison).
fn has_zero(lambda: f64, theta0: f64) -> bool {
    let (v, _) = legendre_trajectory(lambda, theta0, SHOOTING_STEPS);
    v.iter().any(|&x| x <= 0.0)
}

fn shoot_cap(theta0: f64) -> Result<CrossSectionEigenpair> {
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut steps = 0;
    while !has_zero(hi, theta0) {
        lo = hi;
        hi *= 2.0;
        steps += 1;
        if steps > 64 {
            return Err(Error::ShootingFailed { steps });
        }
    }
    let mut steps = 0;
    while hi - lo > SHOOTING_TOL * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if has_zero(mid, theta0) {
            hi = mid;
        } else {
            lo = mid;
        }
        steps += 1;
        if steps >= MAX_BISECTION_STEPS {
            return Err(Error::ShootingFailed { steps });
        }
    }
    let lambda_d = 0.5 * (lo + hi);
    let (mut values, mut slopes) = legendre_trajectory(lambda_d, theta0, SHOOTING_STEPS);
    let sup = values.iter().cloned().fold(f64::MIN, f64::max);
    values.iter_mut().for_each(|x| *x = (*x / sup).max(0.0));
    slopes.iter_mut().for_each(|x| *x /= sup);
    *values.last_mut().unwrap() = 0.0;
    Ok(CrossSectionEigenpair {
        lambda_d,
        profile: AngularProfile::Tabulated {
            step: theta0 / SHOOTING_STEPS as f64,
            values,
            slopes,
        },
    })
}

/// `λ_D` together with the critical coupling `μ_C = (N-2)²/4 + λ_D`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeSpectrum {
    pub lambda_d: f64,
    pub mu_c: f64,
    pub dimension: usize,
}

impl ConeSpectrum {
    /// `(N-2)²/4`, the Hardy constant of the punctured space.
    pub fn full_space_constant(&self) -> f64 {
        let m = self.dimension as f64 - 2.0;
        m * m / 4.0
    }
}

pub fn hardy_constant(dimension: usize, lambda_d: f64) -> Result<ConeSpectrum> {
    if dimension < 2 {
        return Err(Error::InvalidInput(format!(
            "dimension N = {dimension} must be at least 2"
        )));
    }
    if !(lambda_d > 0.0 && lambda_d.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "lambda_D = {lambda_d} must be positive"
        )));
    }
    let m = dimension as f64 - 2.0;
    Ok(ConeSpectrum {
        lambda_d,
        mu_c: m * m / 4.0 + lambda_d,
        dimension,
    })
}

/// Roots `α±` of `α² + (N-2)α + (μ - λ_D) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentPair {
    pub alpha_plus: f64,
    pub alpha_minus: f64,
    pub discriminant: f64,
}

pub fn exponents(dimension: usize, lambda_d: f64, mu: f64) -> Result<ExponentPair> {
    let spec = hardy_constant(dimension, lambda_d)?;
    let m = dimension as f64 - 2.0;
    let discriminant = m * m - 4.0 * (mu - lambda_d);
    // Rounding at μ = μ_C can leave a tiny negative discriminant.
    let discriminant = if discriminant < 0.0 && discriminant > -1e-12 * (m * m + lambda_d.abs()) {
        0.0
    } else {
        discriminant
    };
    if discriminant < 0.0 {
        return Err(Error::SupercriticalCoupling {
            mu,
            mu_c: spec.mu_c,
        });
    }
    let root = discriminant.sqrt();
    // Stable pairing: compute the larger-magnitude root directly and the
    // other through Vieta's product.
    let (alpha_plus, alpha_minus) = if m > 0.0 {
        let minus = (-m - root) / 2.0;
        let plus = if minus != 0.0 {
            (mu - lambda_d) / minus
        } else {
            (-m + root) / 2.0
        };
        (plus, minus)
    } else {
        ((-m + root) / 2.0, (-m - root) / 2.0)
    };
    Ok(ExponentPair {
        alpha_plus,
        alpha_minus,
        discriminant,
    })
}

/// `a r^{α+} + b r^{α-}`, plus `r^{α-} log r` when `log_flag` is set
/// (only meaningful at the double root `μ = μ_C`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub a: f64,
    pub b: f64,
    pub exponents: ExponentPair,
    pub log_flag: bool,
}

impl RadialProfile {
    /// The companion `r^{-(N-2)/2} log r` of the critical ground state.
    pub fn log_companion(spec: &ConeSpectrum) -> Self {
        let alpha = -(spec.dimension as f64 - 2.0) / 2.0;
        RadialProfile {
            a: 0.0,
            b: 0.0,
            exponents: ExponentPair {
                alpha_plus: alpha,
                alpha_minus: alpha,
                discriminant: 0.0,
            },
            log_flag: true,
        }
    }

    /// Pure power `r^alpha` (used for synthetic checks).
    pub fn power(alpha: f64) -> Self {
        RadialProfile {
            a: 1.0,
            b: 0.0,
            exponents: ExponentPair {
                alpha_plus: alpha,
                alpha_minus: alpha,
                discriminant: 0.0,
            },
            log_flag: false,
        }
    }

    fn log_coefficient(&self) -> f64 {
        if self.log_flag {
            1.0
        } else {
            0.0
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        let (p, m) = (self.exponents.alpha_plus, self.exponents.alpha_minus);
        self.a * r.powf(p) + self.b * r.powf(m) + self.log_coefficient() * r.powf(m) * r.ln()
    }

    pub fn derivative(&self, r: f64) -> f64 {
        let (p, m) = (self.exponents.alpha_plus, self.exponents.alpha_minus);
        self.a * p * r.powf(p - 1.0)
            + self.b * m * r.powf(m - 1.0)
            + self.log_coefficient() * r.powf(m - 1.0) * (m * r.ln() + 1.0)
    }

    pub fn second_derivative(&self, r: f64) -> f64 {
        let (p, m) = (self.exponents.alpha_plus, self.exponents.alpha_minus);
        self.a * p * (p - 1.0) * r.powf(p - 2.0)
            + self.b * m * (m - 1.0) * r.powf(m - 2.0)
            + self.log_coefficient()
                * r.powf(m - 2.0)
                * (m * (m - 1.0) * r.ln() + 2.0 * m - 1.0)
    }
}

pub fn separated_solution(spec: &ConeSpectrum, mu: f64, a: f64, b: f64) -> Result<RadialProfile> {
    if !(a >= 0.0 && b >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "coefficients a = {a}, b = {b} must be nonnegative"
        )));
    }
    Ok(RadialProfile {
        a,
        b,
        exponents: exponents(spec.dimension, spec.lambda_d, mu)?,
        log_flag: false,
    })
}

/// `-u'' - (N-1)/r u' - (μ - λ_D)/r² u` with exact derivatives of the profile.
pub fn euler_residual(profile: &RadialProfile, spec: &ConeSpectrum, mu: f64, r: f64) -> f64 {
    let n = spec.dimension as f64;
    -profile.second_derivative(r)
        - (n - 1.0) / r * profile.derivative(r)
        - (mu - spec.lambda_d) / (r * r) * profile.eval(r)
}

/// Same operator applied to an arbitrary radial function by central
/// differences with step `r * 1e-5`. Its rounding floor is about
/// `1e-6 |u| / r²`, so it serves generic functions; closed-form profiles go
/// through [`euler_residual`].
pub fn euler_residual_fd<F: Fn(f64) -> f64>(f: F, spec: &ConeSpectrum, mu: f64, r: f64) -> f64 {
    let h = r * 1e-5;
    let (fm, f0, fp) = (f(r - h), f(r), f(r + h));
    let d1 = (fp - fm) / (2.0 * h);
    let d2 = (fp - 2.0 * f0 + fm) / (h * h);
    let n = spec.dimension as f64;
    -d2 - (n - 1.0) / r * d1 - (mu - spec.lambda_d) / (r * r) * f0
}

/// Principal Dirichlet pair of the truncated cone `{r_min < r < r_max} × D`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncatedCone {
    pub spectrum: ConeSpectrum,
    pub r_min: f64,
    pub r_max: f64,
    /// `log(r_max / r_min)`.
    pub length: f64,
    pub mu_trunc: f64,
}

impl TruncatedCone {
    /// Radial factor `r^{-(N-2)/2} sin(π log(r/r_min) / L)`.
    pub fn radial(&self, r: f64) -> f64 {
        if r <= self.r_min || r >= self.r_max {
            return 0.0;
        }
        let alpha = -(self.spectrum.dimension as f64 - 2.0) / 2.0;
        r.powf(alpha) * (PI * (r / self.r_min).ln() / self.length).sin()
    }

    /// `u_exact(r, ω)`; `None` when the angular profile is unavailable.
    pub fn eval(&self, r: f64, angle: f64, profile: &AngularProfile) -> Option<f64> {
        profile.eval(angle).map(|v| self.radial(r) * v)
    }
}

pub fn truncated_cone_mu(spec: &ConeSpectrum, r_min: f64, r_max: f64) -> Result<TruncatedCone> {
    if !(r_min > 0.0 && r_min < r_max && r_max.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "truncation radii must satisfy 0 < r_min < r_max (got {r_min}, {r_max})"
        )));
    }
    let length = (r_max / r_min).ln();
    Ok(TruncatedCone {
        spectrum: *spec,
        r_min,
        r_max,
        length,
        mu_trunc: spec.mu_c + (PI / length).powi(2),
    })
}
