//! Truncation sweeps and their verdicts.

use serde::{Deserialize, Serialize};

use crate::analytic::{hardy_constant, ConeSpectrum};
use crate::eig::{second_eigenvalue_probe, smallest_pair_with, EigResult};
use crate::error::{Error, Result};
use crate::fem::AssembledSystem;
use crate::geometry::{build_domain, generate_mesh, Mesh};
use crate::parallel::Parallelism;

use super::config::{SweepPlan, Thresholds, Truncation};
use super::diagnostics::{concentration, decay_fit, fit_line, ConcentrationDiagnostic, DecayFit};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "L")]
    pub l: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub dofs: usize,
    pub mu_h: f64,
    pub residual: f64,
    pub iterations: usize,
    pub positivity_ok: bool,
    pub localization_ratio: f64,
    pub max_annulus_fraction: f64,
    pub slope_near: Option<f64>,
    pub slope_far: Option<f64>,
    /// Upper bound on the second eigenvalue, when the gap probe ran.
    pub mu2: Option<f64>,
    pub simple: Option<bool>,
}

/// Everything computed at one sweep point.
#[derive(Debug, Clone)]
pub struct PointSolution {
    pub truncation: Truncation,
    pub mesh: Mesh,
    pub system: AssembledSystem,
    pub eig: EigResult,
    /// `u_h` on all vertices (zero on Dirichlet ones).
    pub u_vertex: Vec<f64>,
    pub concentration: ConcentrationDiagnostic,
    pub row: SweepRow,
}

pub fn cone_spectrum(theta: f64) -> Result<ConeSpectrum> {
    hardy_constant(2, (std::f64::consts::PI / theta).powi(2))
}

/// Mesh, assemble, solve and diagnose one truncation of `plan`. A Perron
/// violation beyond tolerance fails the point.
pub fn solve_point(plan: &SweepPlan, t: &Truncation, par: Parallelism) -> Result<PointSolution> {
    let domain = build_domain(plan.domain(t))?;
    plan.potential.validate(&domain)?;
    let mesh = generate_mesh(
        &domain,
        plan.resolution.n_radial(t),
        plan.resolution.n_angular(plan.theta),
    )?;
    let system = AssembledSystem::assemble(&mesh, &plan.potential, par)?;
    let eig = smallest_pair_with(&system, &plan.solver)?;
    if !eig.positivity_ok {
        return Err(Error::AssertionFailed(format!(
            "Perron positivity violated at L = {}: min/max = {:e}",
            t.length(),
            eig.min_relative_entry
        )));
    }
    let u_vertex = system.dofs.extend(&eig.u_h);
    let conc = concentration(
        &mesh,
        &plan.potential,
        &u_vertex,
        t.r_min,
        t.r_max,
        plan.reference_window(),
    )?;
    let spec = cone_spectrum(plan.theta)?;
    let fits = decay_fit(&mesh, &u_vertex, eig.mu_h, &spec, plan.bulge_hull()).ok();
    let gap = if plan.gap_probe_steps > 0 {
        Some(second_eigenvalue_probe(&system, &eig, plan.gap_probe_steps)?)
    } else {
        None
    };
    let row = SweepRow {
        l: t.length(),
        r_min: t.r_min,
        r_max: t.r_max,
        dofs: system.dim(),
        mu_h: eig.mu_h,
        residual: eig.rel_residual,
        iterations: eig.iterations,
        positivity_ok: eig.positivity_ok,
        localization_ratio: conc.localization_ratio,
        max_annulus_fraction: conc.max_annulus_fraction,
        slope_near: fits.as_ref().map(|f| f.0.slope),
        slope_far: fits.as_ref().map(|f| f.1.slope),
        mu2: gap.map(|g| g.mu2_estimate),
        simple: gap.map(|g| g.simple),
    };
    Ok(PointSolution {
        truncation: *t,
        mesh,
        system,
        eig,
        u_vertex,
        concentration: conc,
        row,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    LocalizedMinimizer,
    SpreadingNonattained,
    Inconclusive,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::LocalizedMinimizer => "localized-minimizer",
            Classification::SpreadingNonattained => "spreading-nonattained",
            Classification::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    /// `μ_∞` of the fit `μ(L) = μ_∞ + c/L²` (the single value when only one
    /// point is available).
    pub mu_extrapolated: f64,
    pub fit_c: f64,
    pub mu_extrapolated_se: f64,
    pub mu_c: f64,
    pub gap_vs_mu_c: f64,
    pub localization_trend: Vec<f64>,
    /// `max_annulus_fraction × decades` per point.
    pub spreading_products: Vec<f64>,
    pub decay: Option<(DecayFit, DecayFit)>,
    pub classification: Classification,
    pub thresholds: Thresholds,
    /// Sweep points that failed (L, message); the verdict uses the rest.
    pub failed_points: Vec<(f64, String)>,
}

/// Pure function of the recorded diagnostics.
pub fn classify(ratios: &[f64], products: &[f64], th: &Thresholds) -> Classification {
    let (Some(&last_ratio), Some(&last_product)) = (ratios.last(), products.last()) else {
        return Classification::Inconclusive;
    };
    let holds_on = ratios.windows(2).all(|w| w[1] >= w[0] - th.trend_slack);
    if last_ratio >= th.localized_min_ratio && holds_on {
        return Classification::LocalizedMinimizer;
    }
    let pmax = products.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let pmin = products.iter().cloned().fold(f64::INFINITY, f64::min);
    let flat = pmax <= (1.0 + th.spreading_flatness) * pmin;
    if last_product <= th.spreading_max_product && flat {
        return Classification::SpreadingNonattained;
    }
    Classification::Inconclusive
}

/// Least squares of `μ` against `1/L²`: `(μ_∞, c, se(μ_∞))`.
pub fn extrapolate(rows: &[SweepRow]) -> (f64, f64, f64) {
    if rows.len() < 2 {
        return (rows.first().map_or(f64::NAN, |r| r.mu_h), 0.0, f64::NAN);
    }
    let x: Vec<f64> = rows.iter().map(|r| 1.0 / (r.l * r.l)).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.mu_h).collect();
    match fit_line(&x, &y) {
        Ok(f) => (f.intercept, f.slope, f.intercept_se),
        Err(_) => (f64::NAN, f64::NAN, f64::NAN),
    }
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    /// Successful points, sorted by `L`.
    pub rows: Vec<SweepRow>,
    pub histograms: Vec<(f64, ConcentrationDiagnostic)>,
    pub verdict: Verdict,
    /// Solution at the largest successful `L`.
    pub last: Option<PointSolution>,
}

impl SweepOutcome {
    pub fn is_complete(&self) -> bool {
        self.verdict.failed_points.is_empty()
    }
}

pub fn sweep_truncation(plan: &SweepPlan) -> Result<SweepOutcome> {
    plan.validate()?;
    let (outer, inner) = if plan.parallel {
        (Parallelism::default(), Parallelism::Sequential)
    } else {
        (Parallelism::Sequential, Parallelism::Sequential)
    };
    let results = outer.map_slice(&plan.schedule, |t| (t.length(), solve_point(plan, t, inner)));
    let mut ok = Vec::new();
    let mut failed = Vec::new();
    for (l, r) in results {
        match r {
            Ok(p) => ok.push(p),
            Err(e) => failed.push((l, e.to_string())),
        }
    }
    ok.sort_by(|a, b| a.row.l.total_cmp(&b.row.l));
    let rows: Vec<SweepRow> = ok.iter().map(|p| p.row.clone()).collect();
    let histograms = ok.iter().map(|p| (p.row.l, p.concentration.clone())).collect();
    let spec = cone_spectrum(plan.theta)?;
    let (mu_inf, c, se) = extrapolate(&rows);
    let last = ok.pop();
    let decay = last.as_ref().and_then(|p| {
        decay_fit(&p.mesh, &p.u_vertex, mu_inf, &spec, plan.bulge_hull()).ok()
    });
    let ratios: Vec<f64> = rows.iter().map(|r| r.localization_ratio).collect();
    let products: Vec<f64> = rows
        .iter()
        .map(|r| r.max_annulus_fraction * (r.r_max / r.r_min).log10())
        .collect();
    let verdict = Verdict {
        mu_extrapolated: mu_inf,
        fit_c: c,
        mu_extrapolated_se: se,
        mu_c: spec.mu_c,
        gap_vs_mu_c: spec.mu_c - mu_inf,
        classification: classify(&ratios, &products, &plan.thresholds),
        localization_trend: ratios,
        spreading_products: products,
        decay,
        thresholds: plan.thresholds,
        failed_points: failed,
    };
    Ok(SweepOutcome {
        rows,
        histograms,
        verdict,
        last,
    })
}
