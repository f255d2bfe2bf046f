//! Experiments built on sweeps: strict gap, decay exponents, shrinking-bump
//! probe, bump search in the ambient cone, monotonicity chains.

use serde::{Deserialize, Serialize};

use crate::analytic::{hardy_constant, truncated_cone_mu};
use crate::eig::smallest_pair_with;
use crate::error::Result;
use crate::fem::AssembledSystem;
use crate::geometry::{build_domain, generate_mesh, refine_mesh, Bulge, DomainSpec, PotentialSpec};
use crate::parallel::Parallelism;

use super::config::{BumpConfig, GapConfig, MonoConfig, ProbeConfig, SweepConfig, Truncation};
use super::sweep::{sweep_truncation, Classification, SweepOutcome, SweepRow, Verdict};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Assertion {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Assertion {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

pub fn all_passed(assertions: &[Assertion]) -> bool {
    assertions.iter().all(|a| a.passed)
}

fn complete(name: &str, out: &SweepOutcome) -> Assertion {
    Assertion::new(
        &format!("{name}: all sweep points solved"),
        out.is_complete(),
        format!("{:?}", out.verdict.failed_points),
    )
}

#[derive(Debug, Clone)]
pub struct GapReport {
    pub cone: SweepOutcome,
    pub perturbed: SweepOutcome,
    /// `(L, μ_h(C), μ_h(C∪B), μ_h(C) - μ_h(C∪B))`
    pub pointwise: Vec<[f64; 4]>,
    pub mu_inf_gap: f64,
    /// `(extra_angle, μ_h)` at the largest truncation, cone first.
    pub nested_chain: Vec<(f64, f64)>,
    pub assertions: Vec<Assertion>,
}

fn solve_mu(domain: DomainSpec, cfg_res: &super::config::Resolution, theta: f64, pot: &PotentialSpec, solver: &crate::eig::EigOptions) -> Result<(usize, f64)> {
    let d = build_domain(domain)?;
    pot.validate(&d)?;
    let t = Truncation {
        r_min: d.r_min,
        r_max: d.r_max,
    };
    let mesh = generate_mesh(&d, cfg_res.n_radial(&t), cfg_res.n_angular(theta))?;
    let sys = AssembledSystem::assemble(&mesh, pot, Parallelism::default())?;
    let eig = smallest_pair_with(&sys, solver)?;
    Ok((sys.dim(), eig.mu_h))
}

/// Paired sweeps with identical schedule, resolution and reference window.
pub fn gap_experiment(cfg: &GapConfig) -> Result<GapReport> {
    let mut cone_plan = cfg.plan.clone().with_bulges(Vec::new());
    let mut bulge_plan = cone_plan.clone().with_bulges(cfg.bulge.into_iter().collect());
    let window = bulge_plan.reference_window();
    cone_plan.window = Some(window);
    bulge_plan.window = Some(window);

    let cone = sweep_truncation(&cone_plan)?;
    let perturbed = if cfg.bulge.is_some() {
        sweep_truncation(&bulge_plan)?
    } else {
        cone.clone()
    };
    let pointwise: Vec<[f64; 4]> = cone
        .rows
        .iter()
        .zip(&perturbed.rows)
        .map(|(c, p)| [c.l, c.mu_h, p.mu_h, c.mu_h - p.mu_h])
        .collect();
    let mu_c = cone.verdict.mu_c;
    let mu_inf_gap = mu_c - perturbed.verdict.mu_extrapolated;
    let mut assertions = vec![complete("cone", &cone), complete("perturbed", &perturbed)];
    let mut nested_chain = Vec::new();
    if let Some(bulge) = cfg.bulge {
        assertions.push(Assertion::new(
            "strict gap at every sweep point",
            pointwise.len() == cone_plan.schedule.len() && pointwise.iter().all(|p| p[3] > 0.0),
            format!("min gap {:e}", pointwise.iter().map(|p| p[3]).fold(f64::INFINITY, f64::min)),
        ));
        let bound = mu_c - cfg.delta;
        assertions.push(Assertion::new(
            "extrapolated gap below mu_C - delta",
            perturbed.verdict.mu_extrapolated < bound,
            format!(
                "mu_inf(C∪B) = {:.6}, mu_C - delta = {:.6}",
                perturbed.verdict.mu_extrapolated, bound
            ),
        ));
        if !cfg.nested_extra_angles.is_empty() {
            let t = *cone_plan.schedule.last().unwrap();
            let theta = cone_plan.theta;
            nested_chain.push((0.0, cone.rows.last().map_or(f64::NAN, |r| r.mu_h)));
            for &extra in &cfg.nested_extra_angles {
                let d = cone_plan.domain(&t).with_bulge(Bulge {
                    extra_angle: extra,
                    ..bulge
                });
                let (_, mu) = solve_mu(d, &cone_plan.resolution, theta, &cone_plan.potential, &cone_plan.solver)?;
                nested_chain.push((extra, mu));
            }
            let ordered = cfg.nested_extra_angles.windows(2).all(|w| w[0] < w[1]);
            let decreasing = nested_chain.windows(2).all(|w| w[1].1 < w[0].1);
            assertions.push(Assertion::new(
                "nested bulges give a strictly decreasing chain",
                ordered && decreasing,
                format!("{nested_chain:?}"),
            ));
        }
    }
    Ok(GapReport {
        cone,
        perturbed,
        pointwise,
        mu_inf_gap,
        nested_chain,
        assertions,
    })
}

#[derive(Debug, Clone)]
pub struct DecayReport {
    pub outcome: SweepOutcome,
    pub tolerance: f64,
    pub assertions: Vec<Assertion>,
}

/// Decay fits of the minimizer at the largest truncation, judged against
/// `α_±(μ_∞)`: relative deviation when the exponent is nonzero, absolute
/// otherwise.
pub fn decay_experiment(cfg: &SweepConfig, tolerance: f64) -> Result<DecayReport> {
    let outcome = sweep_truncation(&cfg.plan)?;
    let mut assertions = vec![complete("sweep", &outcome)];
    match &outcome.verdict.decay {
        Some((near, far)) => {
            for (name, f) in [("near", near), ("far", far)] {
                let dev = f.rel_deviation.unwrap_or(f.abs_deviation);
                assertions.push(Assertion::new(
                    &format!("{name} slope within tolerance"),
                    dev <= tolerance,
                    format!("slope {:.5} vs predicted {:.5}", f.slope, f.predicted),
                ));
            }
        }
        None => assertions.push(Assertion::new(
            "decay windows available",
            false,
            "largest truncation leaves no fit window".into(),
        )),
    }
    Ok(DecayReport {
        outcome,
        tolerance,
        assertions,
    })
}

#[derive(Debug, Clone)]
pub struct ProbeEntry {
    pub extra_angle: f64,
    pub outcome: SweepOutcome,
}

#[derive(Debug, Clone)]
pub struct ProbeReport {
    pub entries: Vec<ProbeEntry>,
    /// Index of the first spreading verdict in shrinking order.
    pub crossover_index: Option<usize>,
    /// No localized verdict after the first spreading one.
    pub monotone: bool,
    /// First entry localized and last entry spreading.
    pub transition_observed: bool,
    pub assertions: Vec<Assertion>,
}

impl ProbeReport {
    pub fn classifications(&self) -> Vec<Classification> {
        self.entries.iter().map(|e| e.outcome.verdict.classification).collect()
    }
}

pub fn transition_is_monotone(cls: &[Classification]) -> bool {
    match cls.iter().position(|c| *c == Classification::SpreadingNonattained) {
        Some(k) => !cls[k..].contains(&Classification::LocalizedMinimizer),
        None => true,
    }
}

pub fn nonattainment_probe(cfg: &ProbeConfig) -> Result<ProbeReport> {
    let mut entries = Vec::with_capacity(cfg.extra_angles.len());
    for &extra in &cfg.extra_angles {
        let plan = cfg.plan.clone().with_bulges(vec![Bulge {
            r_a: cfg.r_a,
            r_b: cfg.r_b,
            extra_angle: extra,
        }]);
        entries.push(ProbeEntry {
            extra_angle: extra,
            outcome: sweep_truncation(&plan)?,
        });
    }
    let cls: Vec<Classification> = entries.iter().map(|e| e.outcome.verdict.classification).collect();
    let crossover_index = cls.iter().position(|c| *c == Classification::SpreadingNonattained);
    let monotone = transition_is_monotone(&cls);
    let transition_observed = cls.first() == Some(&Classification::LocalizedMinimizer)
        && cls.last() == Some(&Classification::SpreadingNonattained);
    let shrinking = cfg.extra_angles.windows(2).all(|w| w[1] < w[0]);
    let mut assertions = vec![
        Assertion::new("bulges listed in shrinking order", shrinking, format!("{:?}", cfg.extra_angles)),
        Assertion::new("monotone transition", monotone, format!("{cls:?}")),
    ];
    for e in &entries {
        assertions.push(complete(&format!("extra_angle {}", e.extra_angle), &e.outcome));
        let v = &e.outcome.verdict;
        if v.classification == Classification::SpreadingNonattained {
            let rel = (v.mu_extrapolated - v.mu_c).abs() / v.mu_c;
            assertions.push(Assertion::new(
                &format!("spreading mu_inf near mu_C (extra_angle {})", e.extra_angle),
                rel <= cfg.spreading_mu_tol,
                format!("mu_inf = {:.6}, relative distance {:.2e}", v.mu_extrapolated, rel),
            ));
        }
    }
    Ok(ProbeReport {
        entries,
        crossover_index,
        monotone,
        transition_observed,
        assertions,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BumpRow {
    pub angle: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub dofs: usize,
    pub mu_b: f64,
    /// Exact `(π/angle)² + (π/L)²` of the truncated sector.
    pub mu_exact: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BumpReport {
    pub mu_x: f64,
    pub rows: Vec<BumpRow>,
    pub assertions: Vec<Assertion>,
}

/// Each bump is a truncated sector of the ambient cone, treated as the whole
/// domain.
pub fn bump_search(cfg: &BumpConfig) -> Result<BumpReport> {
    if cfg.angle_fractions.len() != cfg.schedule.len() {
        return Err(crate::Error::InvalidInput(
            "angle_fractions and schedule must have equal length".into(),
        ));
    }
    let mu_x = (std::f64::consts::PI / cfg.theta_x).powi(2);
    let jobs: Vec<(f64, Truncation)> = cfg
        .angle_fractions
        .iter()
        .map(|f| f * cfg.theta_x)
        .zip(cfg.schedule.iter().copied())
        .collect();
    let rows = Parallelism::default()
        .map_slice(&jobs, |(angle, t)| -> Result<BumpRow> {
            let d = DomainSpec::sector(*angle, cfg.theta_x, t.r_min, t.r_max);
            let (dofs, mu_b) = solve_mu(d, &cfg.resolution, *angle, &PotentialSpec::hardy(), &cfg.solver)?;
            let spec = hardy_constant(2, (std::f64::consts::PI / angle).powi(2))?;
            Ok(BumpRow {
                angle: *angle,
                l: t.length(),
                dofs,
                mu_b,
                mu_exact: truncated_cone_mu(&spec, t.r_min, t.r_max)?.mu_trunc,
            })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let floor = mu_x * (1.0 - cfg.solver.tol);
    let assertions = vec![
        Assertion::new(
            "every bump satisfies mu_B >= mu_X",
            rows.iter().all(|r| r.mu_b >= floor),
            format!("mu_X = {mu_x:.6}"),
        ),
        Assertion::new(
            "mu_B decreases along the series",
            rows.windows(2).all(|w| w[1].mu_b < w[0].mu_b),
            format!("{:?}", rows.iter().map(|r| r.mu_b).collect::<Vec<_>>()),
        ),
    ];
    Ok(BumpReport {
        mu_x,
        rows,
        assertions,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonoReport {
    /// `(extra_angle, μ_h)`, cone first.
    pub domain_chain: Vec<(f64, f64)>,
    /// `(dofs, μ_h)` per refinement level.
    pub refinement_chain: Vec<(usize, f64)>,
    /// `(amplitude, μ_h)`
    pub potential_chain: Vec<(f64, f64)>,
    pub assertions: Vec<Assertion>,
}

pub fn monotonicity_suite(cfg: &MonoConfig) -> Result<MonoReport> {
    let t = cfg.truncation;
    let cone = DomainSpec::sector(cfg.theta, cfg.theta_x, t.r_min, t.r_max);
    let hardy = PotentialSpec::hardy();
    let bulge = |extra: f64| Bulge {
        r_a: cfg.r_a,
        r_b: cfg.r_b,
        extra_angle: extra,
    };

    let mut domain_chain = vec![(0.0, solve_mu(cone.clone(), &cfg.resolution, cfg.theta, &hardy, &cfg.solver)?.1)];
    for &e in &cfg.extra_angles {
        let (_, mu) = solve_mu(cone.clone().with_bulge(bulge(e)), &cfg.resolution, cfg.theta, &hardy, &cfg.solver)?;
        domain_chain.push((e, mu));
    }

    let base = match cfg.extra_angles.last() {
        Some(&e) => cone.clone().with_bulge(bulge(e)),
        None => cone.clone(),
    };
    let base = build_domain(base)?;
    let mut mesh = generate_mesh(&base, cfg.resolution.n_radial(&t), cfg.resolution.n_angular(cfg.theta))?;
    let mut refinement_chain = Vec::new();
    for level in 0..=cfg.refinements {
        if level > 0 {
            mesh = refine_mesh(&mesh);
        }
        let sys = AssembledSystem::assemble(&mesh, &hardy, Parallelism::default())?;
        let eig = smallest_pair_with(&sys, &cfg.solver)?;
        refinement_chain.push((sys.dim(), eig.mu_h));
    }

    let mut potential_chain = Vec::new();
    for &a in &cfg.w_amplitudes {
        let pot = PotentialSpec::hardy().with_bump(crate::geometry::WBump {
            amplitude: a,
            ..cfg.w_bump
        });
        let (_, mu) = solve_mu(cone.clone(), &cfg.resolution, cfg.theta, &pot, &cfg.solver)?;
        potential_chain.push((a, mu));
    }

    let slack = |mu: f64| mu * 10.0 * cfg.solver.tol.max(1e-14);
    let assertions = vec![
        Assertion::new(
            "domain enlargement strictly decreases mu_h",
            cfg.extra_angles.windows(2).all(|w| w[0] < w[1])
                && domain_chain.windows(2).all(|w| w[1].1 < w[0].1),
            format!("{domain_chain:?}"),
        ),
        Assertion::new(
            "refinement does not increase mu_h",
            refinement_chain.windows(2).all(|w| w[1].1 <= w[0].1 + slack(w[0].1)),
            format!("{refinement_chain:?}"),
        ),
        Assertion::new(
            "potential decrease does not decrease mu_h",
            cfg.w_amplitudes.windows(2).all(|w| w[0] < w[1])
                && potential_chain.windows(2).all(|w| w[1].1 >= w[0].1 - slack(w[0].1)),
            format!("{potential_chain:?}"),
        ),
    ];
    Ok(MonoReport {
        domain_chain,
        refinement_chain,
        potential_chain,
        assertions,
    })
}

/// Verdict of a sweep together with its rows, for serialization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesSummary {
    pub label: String,
    pub verdict: Verdict,
    pub rows: Vec<SweepRow>,
}
