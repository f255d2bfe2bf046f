//! Concentration of the V-weighted mass and power-law decay fits of
//! discrete eigenvectors.

use serde::{Deserialize, Serialize};

use crate::analytic::{exponents, ConeSpectrum};
use crate::error::{Error, Result};
use crate::fem::v_mass_samples;
use crate::geometry::{Mesh, PotentialSpec};

/// Distribution of `∫ V u²` over one-decade annuli.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationDiagnostic {
    /// `log10 r` of the annulus edges, from `log10 r_min` in unit steps
    /// (the last annulus may be shorter).
    pub edges: Vec<f64>,
    pub fractions: Vec<f64>,
    pub window: [f64; 2],
    pub localization_ratio: f64,
    pub max_annulus_fraction: f64,
    /// `log10(r_max / r_min)`
    pub decades: f64,
}

impl ConcentrationDiagnostic {
    /// `max_annulus_fraction × decades`; about 2 for a sine-shaped spread.
    pub fn spreading_product(&self) -> f64 {
        self.max_annulus_fraction * self.decades
    }
}

/// Mass is taken per quadrature point of the mass rule, so the fractions sum
/// to one up to rounding.
pub fn concentration(
    mesh: &Mesh,
    pot: &PotentialSpec,
    u: &[f64],
    r_min: f64,
    r_max: f64,
    window: [f64; 2],
) -> Result<ConcentrationDiagnostic> {
    let samples = v_mass_samples(mesh, pot, u)?;
    let lo = r_min.log10();
    let decades = (r_max / r_min).log10();
    let n = (decades - 1e-9).ceil().max(1.0) as usize;
    let mut edges: Vec<f64> = (0..n).map(|i| lo + i as f64).collect();
    edges.push(r_max.log10());
    let mut mass = vec![0.0; n];
    let mut inside = 0.0;
    let mut total = 0.0;
    for &(r, m) in &samples {
        let i = ((r.log10() - lo).floor().max(0.0) as usize).min(n - 1);
        mass[i] += m;
        total += m;
        if r >= window[0] && r <= window[1] {
            inside += m;
        }
    }
    if !(total > 0.0) {
        return Err(Error::VDegenerate(total));
    }
    let fractions: Vec<f64> = mass.iter().map(|m| m / total).collect();
    let max_annulus_fraction = fractions.iter().cloned().fold(0.0, f64::max);
    Ok(ConcentrationDiagnostic {
        edges,
        fractions,
        window,
        localization_ratio: inside / total,
        max_annulus_fraction,
        decades,
    })
}

/// Ordinary least squares `y ≈ a + b x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub intercept: f64,
    pub slope: f64,
    /// Standard error of the slope.
    pub slope_se: f64,
    /// Standard error of the intercept.
    pub intercept_se: f64,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return Err(Error::WindowTooSmall { samples: n });
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::InvalidInput("degenerate abscissae in line fit".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let (slope_se, intercept_se) = if n > 2 {
        let ssr: f64 = x
            .iter()
            .zip(y)
            .map(|(a, b)| (b - intercept - slope * a).powi(2))
            .sum();
        let s2 = ssr / (nf - 2.0);
        ((s2 / sxx).sqrt(), (s2 * (1.0 / nf + mx * mx / sxx)).sqrt())
    } else {
        (0.0, 0.0)
    };
    Ok(LineFit {
        intercept,
        slope,
        slope_se,
        intercept_se,
    })
}

pub const MIN_DECAY_SAMPLES: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub window: [f64; 2],
    pub samples: usize,
    pub slope: f64,
    pub std_error: f64,
    /// `α_+` for the near window, `α_-` for the far one.
    pub predicted: f64,
    pub abs_deviation: f64,
    /// `None` when the predicted exponent vanishes.
    pub rel_deviation: Option<f64>,
    /// Whether `sin(π log(r/r_min)/L)` was divided out first.
    pub envelope_removed: bool,
}

/// Slope of `log u` against `log r` along the ray nearest `phi`, using vertex
/// values with radius in `window`.
pub fn ray_slope(
    mesh: &Mesh,
    u: &[f64],
    phi: f64,
    window: [f64; 2],
    envelope: Option<(f64, f64)>,
) -> Result<(LineFit, usize)> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for v in mesh.ray_vertices(phi) {
        let r = mesh.vertices[v].r;
        if r < window[0] || r > window[1] || !(u[v] > 0.0) {
            continue;
        }
        let mut y = u[v].ln();
        if let Some((r_min, len)) = envelope {
            let s = (std::f64::consts::PI * (r / r_min).ln() / len).sin();
            if !(s > 0.0) {
                continue;
            }
            y -= s.ln();
        }
        xs.push(r.ln());
        ys.push(y);
    }
    if xs.len() < MIN_DECAY_SAMPLES {
        return Err(Error::WindowTooSmall { samples: xs.len() });
    }
    Ok((fit_line(&xs, &ys)?, xs.len()))
}

/// Decay windows for a mesh spanning `[r_min, r_max]`: the two decades next
/// to each truncation radius and one decade around the reference band
/// `(r_a, r_b)` are excluded.
pub fn decay_windows(r_min: f64, r_max: f64, band: (f64, f64)) -> ([f64; 2], [f64; 2]) {
    (
        [r_min * 100.0, band.0 / 10.0],
        [band.1 * 10.0, r_max / 100.0],
    )
}

/// Near and far decay fits of a vertex vector `u` against `α_±(mu_limit)`.
/// `band` is the bulge hull, or `None` for the pure cone, in which case the
/// reference band is `{1}` and the sine envelope is removed.
pub fn decay_fit(
    mesh: &Mesh,
    u: &[f64],
    mu_limit: f64,
    spec: &ConeSpectrum,
    band: Option<(f64, f64)>,
) -> Result<(DecayFit, DecayFit)> {
    let theta = mesh
        .theta
        .ok_or_else(|| Error::InvalidInput("mesh carries no cone opening".into()))?;
    let r_min = mesh.vertices.iter().map(|v| v.r).fold(f64::INFINITY, f64::min);
    let r_max = mesh.vertices.iter().map(|v| v.r).fold(0.0, f64::max);
    let len = (r_max / r_min).ln();
    let envelope = band.is_none().then_some((r_min, len));
    let (near_w, far_w) = decay_windows(r_min, r_max, band.unwrap_or((1.0, 1.0)));
    // Limits marginally above μ_C (discretization) read as critical.
    let ex = exponents(spec.dimension, spec.lambda_d, mu_limit.min(spec.mu_c))?;
    let make = |window: [f64; 2], predicted: f64| -> Result<DecayFit> {
        let (fit, samples) = ray_slope(mesh, u, theta / 2.0, window, envelope)?;
        let abs_deviation = (fit.slope - predicted).abs();
        Ok(DecayFit {
            window,
            samples,
            slope: fit.slope,
            std_error: fit.slope_se,
            predicted,
            abs_deviation,
            rel_deviation: (predicted.abs() > 1e-12).then(|| abs_deviation / predicted.abs()),
            envelope_removed: envelope.is_some(),
        })
    };
    Ok((make(near_w, ex.alpha_plus)?, make(far_w, ex.alpha_minus)?))
}
