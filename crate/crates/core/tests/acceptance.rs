//! Acceptance criteria 1-9. Runs without the libtest harness so every
//! criterion prints one PASS/FAIL line; the process fails if any criterion
//! fails.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use conelab::analytic::{
    cross_section_eigenpair, exponents, hardy_constant, truncated_cone_mu, CrossSection,
};
use conelab::eig::{bs_identity_check, default_lambda_grid, smallest_pair, smallest_pair_with, EigOptions};
use conelab::fem::{
    cutoff_split_terms, rayleigh_quotient, restrict_outside_cutoff, AssembledSystem, CutoffField,
    DofMap,
};
use conelab::geometry::{
    build_domain, generate_mesh, refine_mesh, Bulge, DomainSpec, Mesh, PotentialSpec, WBump,
};
use conelab::lab::{
    decay_experiment, gap_experiment, monotonicity_suite, nonattainment_probe, sweep_truncation,
    Classification, GapConfig, MonoConfig, ProbeConfig, Resolution, SweepConfig, SweepPlan,
    Truncation, SCHEMA_VERSION,
};
use conelab::linalg::lanczos_ritz_values;
use conelab::Parallelism;

const GOLDEN: &str = include_str!("golden/gap_bulge.json");

fn schedule() -> Vec<Truncation> {
    [3.0, 4.0, 6.0, 8.0].map(Truncation::decades).to_vec()
}

fn quarter_plan() -> SweepPlan {
    SweepPlan::new(PI / 2.0, PI, schedule()).with_resolution(32.0)
}

/// Bulge centred on `r = 1` in log r, one decade long.
fn strong_bulge(extra_angle: f64) -> Bulge {
    Bulge {
        r_a: 10f64.powf(-0.5),
        r_b: 10f64.powf(0.5),
        extra_angle,
    }
}

fn weak_bulge() -> Bulge {
    Bulge {
        r_a: 1.0,
        r_b: 2.0,
        extra_angle: PI / 4.0,
    }
}

fn golden_delta() -> f64 {
    let v: serde_json::Value = serde_json::from_str(GOLDEN).unwrap();
    v["delta"].as_f64().unwrap()
}

fn system(domain: DomainSpec, m: f64, pot: &PotentialSpec) -> (Mesh, AssembledSystem) {
    let d = build_domain(domain).unwrap();
    let res = Resolution {
        elements_per_decade: m,
    };
    let t = Truncation {
        r_min: d.r_min,
        r_max: d.r_max,
    };
    let mesh = generate_mesh(&d, res.n_radial(&t), res.n_angular(d.theta)).unwrap();
    let sys = AssembledSystem::assemble(&mesh, pot, Parallelism::default()).unwrap();
    (mesh, sys)
}

fn sector(k: f64) -> DomainSpec {
    let t = Truncation::decades(k);
    DomainSpec::sector(PI / 2.0, PI, t.r_min, t.r_max)
}

type Check = fn() -> String;

fn criterion_1() -> String {
    let start = Instant::now();
    let pair = cross_section_eigenpair(&CrossSection::arc(PI / 2.0).unwrap()).unwrap();
    let spec = hardy_constant(2, pair.lambda_d).unwrap();
    assert_eq!(spec.mu_c, 4.0, "mu_C must be exactly 4");
    let out = sweep_truncation(&quarter_plan()).unwrap();
    assert!(out.is_complete());
    let v = &out.verdict;
    let rel = (v.mu_extrapolated - 4.0).abs() / 4.0;
    assert!(rel <= 0.01, "mu_inf = {} off by {rel:e}", v.mu_extrapolated);
    let c_rel = (v.fit_c - PI * PI).abs() / (PI * PI);
    assert!(c_rel <= 0.25, "c = {} off pi^2 by {c_rel:e}", v.fit_c);
    let dofs = out.rows.iter().map(|r| r.dofs).max().unwrap();
    assert!(dofs <= 200_000);
    let elapsed = start.elapsed();
    assert!(elapsed <= Duration::from_secs(120));
    format!(
        "mu_C = 4 exactly; mu_inf = {:.5} ({:.2}% off), c = {:.3}; {dofs} DOFs max, {:.2?}",
        v.mu_extrapolated,
        100.0 * rel,
        v.fit_c,
        elapsed
    )
}

fn criterion_2() -> String {
    let spec = hardy_constant(2, 4.0).unwrap();
    let exact = truncated_cone_mu(&spec, 1e-3, 1e3).unwrap();
    let pot = PotentialSpec::hardy();
    let mut errors = Vec::new();
    let mut moderate = None;
    for m in [8.0, 16.0, 32.0, 64.0] {
        let (_, sys) = system(sector(3.0), m, &pot);
        let eig = smallest_pair(&sys, 1e-11, 500).unwrap();
        errors.push(eig.mu_h - exact.mu_trunc);
        if m == 16.0 {
            moderate = Some(eig.mu_h);
        }
    }
    let moderate = moderate.unwrap();
    let rel = (moderate - exact.mu_trunc).abs() / exact.mu_trunc;
    assert!(rel <= 0.02, "moderate resolution off by {rel:e}");
    assert!(errors.iter().all(|&e| e > 0.0), "FEM must overestimate");
    let ratios: Vec<f64> = errors.windows(2).map(|w| w[0] / w[1]).collect();
    assert!(
        ratios.iter().all(|r| (3.2..=4.8).contains(r)),
        "convergence ratios {ratios:?}"
    );

    // Eigenvector against the exact separated eigenfunction.
    let (mesh, sys) = system(sector(3.0), 32.0, &pot);
    let eig = smallest_pair(&sys, 1e-11, 500).unwrap();
    let profile = pair_profile(PI / 2.0);
    let ex: Vec<f64> = sys
        .dofs
        .vertex_of_dof
        .iter()
        .map(|&v| {
            let p = mesh.vertices[v];
            exact.eval(p.r, p.phi, &profile).unwrap()
        })
        .collect();
    let scale = sys.mass.quad(&ex).sqrt();
    let ex: Vec<f64> = ex.iter().map(|x| x / scale).collect();
    let diff: Vec<f64> = eig.u_h.iter().zip(&ex).map(|(a, b)| a - b).collect();
    let vec_err = sys.mass.quad(&diff).sqrt();
    assert!(vec_err <= 0.03, "eigenvector V-norm error {vec_err:e}");
    format!(
        "mu_h(m=16) = {moderate:.5} vs {:.5} ({:.2}%); error ratios {:.2?}; eigenvector error {:.2e}",
        exact.mu_trunc,
        100.0 * rel,
        ratios,
        vec_err
    )
}

fn pair_profile(theta: f64) -> conelab::analytic::AngularProfile {
    cross_section_eigenpair(&CrossSection::arc(theta).unwrap())
        .unwrap()
        .profile
}

fn criterion_3() -> String {
    let delta = golden_delta();
    let cfg = GapConfig {
        schema_version: SCHEMA_VERSION,
        plan: quarter_plan(),
        bulge: Some(weak_bulge()),
        delta,
        nested_extra_angles: vec![PI / 16.0, PI / 8.0, PI / 4.0],
    };
    let report = gap_experiment(&cfg).unwrap();
    for a in &report.assertions {
        assert!(a.passed, "{}: {}", a.name, a.detail);
    }
    let min_gap = report.pointwise.iter().map(|p| p[3]).fold(f64::INFINITY, f64::min);
    format!(
        "min pointwise gap {min_gap:.4}; mu_inf(C∪B) = {:.5} < mu_C - delta = {:.5}; chain {:?}",
        report.perturbed.verdict.mu_extrapolated,
        4.0 - delta,
        report.nested_chain.iter().map(|c| format!("{:.4}", c.1)).collect::<Vec<_>>()
    )
}

fn criterion_4() -> String {
    let cone = sweep_truncation(&quarter_plan()).unwrap();
    assert_eq!(cone.verdict.classification, Classification::SpreadingNonattained);
    let p = &cone.verdict.spreading_products;
    let (pmin, pmax) = (
        p.iter().cloned().fold(f64::INFINITY, f64::min),
        p.iter().cloned().fold(0.0, f64::max),
    );
    assert!(pmax <= 1.3 * pmin, "max_annulus_fraction x decades = {p:?}");

    let bulge = sweep_truncation(&quarter_plan().with_bulge(strong_bulge(PI / 4.0))).unwrap();
    assert_eq!(bulge.verdict.classification, Classification::LocalizedMinimizer);
    let last = *bulge.verdict.localization_trend.last().unwrap();
    assert!(last >= 0.9);
    format!(
        "cone spreading (fraction x decades {:.3?}); bulge localized (ratio {:.4} at L = {:.2})",
        p,
        last,
        bulge.rows.last().unwrap().l
    )
}

fn criterion_5() -> String {
    let cfg = SweepConfig {
        schema_version: SCHEMA_VERSION,
        plan: quarter_plan().with_bulge(strong_bulge(PI / 4.0)),
    };
    let report = decay_experiment(&cfg, 0.1).unwrap();
    for a in &report.assertions {
        assert!(a.passed, "{}: {}", a.name, a.detail);
    }
    let (near, far) = report.outcome.verdict.decay.clone().unwrap();
    format!(
        "near slope {:.4} vs alpha+ {:.4} ({:.2}%), far slope {:.4} vs alpha- {:.4} ({:.2}%)",
        near.slope,
        near.predicted,
        100.0 * near.rel_deviation.unwrap(),
        far.slope,
        far.predicted,
        100.0 * far.rel_deviation.unwrap()
    )
}

fn relative_w(amplitude: f64) -> WBump {
    WBump {
        amplitude,
        r_c: 0.1,
        r_d: 10.0,
        phi1: 0.05,
        phi2: 1.52,
        relative: true,
    }
}

fn criterion_6() -> String {
    let hardy = PotentialSpec::hardy();
    let w = PotentialSpec::hardy().with_bump(relative_w(0.3));
    let cases: Vec<(&str, DomainSpec, f64, &PotentialSpec)> = vec![
        ("cone k=3", sector(3.0), 16.0, &hardy),
        ("cone k=8", sector(8.0), 32.0, &hardy),
        ("weak bulge", sector(6.0).with_bulge(weak_bulge()), 32.0, &hardy),
        ("strong bulge", sector(6.0).with_bulge(strong_bulge(PI / 4.0)), 32.0, &hardy),
        ("bulge + W", sector(6.0).with_bulge(strong_bulge(PI / 16.0)), 32.0, &w),
    ];
    let mut worst: f64 = 0.0;
    for (name, d, m, pot) in cases {
        let (_, sys) = system(d, m, pot);
        let eig = smallest_pair(&sys, 1e-11, 500).unwrap();
        let report = bs_identity_check(&sys, &eig, &default_lambda_grid(eig.mu_h)).unwrap();
        assert!(report.max_defect <= 1e-8, "{name}: {:?}", report.rows);
        worst = worst.max(report.max_defect);
    }
    format!("max defect over 5 systems and the 5-point lambda grid: {worst:.2e}")
}

fn criterion_7() -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let hardy = PotentialSpec::hardy();
    let mut worst: f64 = 0.0;
    let mut min_margin = f64::INFINITY;
    for (bulge, m) in [(weak_bulge(), 16.0), (strong_bulge(PI / 4.0), 16.0), (strong_bulge(PI / 32.0), 32.0)] {
        let cone_d = sector(3.0);
        let (cone_mesh, cone_sys) = system(cone_d.clone(), m, &hardy);
        let cone_mu = smallest_pair(&cone_sys, 1e-11, 500).unwrap().mu_h;
        let (mesh, sys) = system(cone_d.with_bulge(bulge), m, &hardy);
        let n_cone = cone_mesh.n_vertices();
        for draw in 0..50 {
            let collar = 1 + draw % 4;
            let chi = CutoffField::around_bulge(&mesh, collar);
            let free: Vec<f64> = (0..sys.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let u = sys.dofs.extend(&free);
            let split = cutoff_split_terms(&mesh, &u, &chi);
            let scale = split.lhs.abs() + split.rhs().abs() + 1.0;
            let rel = split.defect() / scale;
            assert!(rel <= 1e-12, "cutoff identity defect {rel:e}");
            worst = worst.max(rel);

            let w = restrict_outside_cutoff(&mesh, &u, &chi).unwrap();
            for (v, &b) in mesh.bulge_vertices().iter().enumerate() {
                assert!(!b || w[v] == 0.0);
            }
            for v in n_cone..mesh.n_vertices() {
                assert_eq!(w[v], 0.0, "restriction leaks outside the cone mesh");
            }
            for v in 0..n_cone {
                assert!(!cone_mesh.dirichlet[v] || w[v] == 0.0, "inadmissible at cone boundary");
            }
            let cone_u = cone_sys.dofs.restrict(&w[..n_cone]);
            if cone_sys.mass.quad(&cone_u) > 0.0 {
                let q = rayleigh_quotient(&cone_sys, &cone_u).unwrap();
                assert!(q >= cone_mu * (1.0 - 1e-10), "discrete (2.4) violated: {q} < {cone_mu}");
                min_margin = min_margin.min(q - cone_mu);
            }
        }
    }
    format!("150 draws: worst identity defect {worst:.2e}; restricted quotients exceed mu_h(C) by >= {min_margin:.3e}")
}

fn criterion_8() -> String {
    let mut lines = Vec::new();
    for amplitude in [0.3, 0.5] {
        let cfg = ProbeConfig {
            schema_version: SCHEMA_VERSION,
            plan: quarter_plan().with_potential(PotentialSpec::hardy().with_bump(relative_w(amplitude))),
            r_a: 10f64.powf(-0.5),
            r_b: 10f64.powf(0.5),
            extra_angles: (0..7).map(|j| PI / 4.0 / 2f64.powi(j)).collect(),
            spreading_mu_tol: 0.01,
        };
        let report = nonattainment_probe(&cfg).unwrap();
        for a in &report.assertions {
            assert!(a.passed, "w0 = {amplitude}: {}: {}", a.name, a.detail);
        }
        assert!(report.transition_observed, "{:?}", report.classifications());
        assert!(report.monotone);
        let short: Vec<&str> = report
            .classifications()
            .iter()
            .map(|c| match c {
                Classification::LocalizedMinimizer => "L",
                Classification::SpreadingNonattained => "S",
                Classification::Inconclusive => "?",
            })
            .collect();
        lines.push(format!(
            "w0 = {amplitude}: {} crossover j = {:?}",
            short.join(""),
            report.crossover_index
        ));
    }
    lines.join("; ")
}

fn criterion_9() -> String {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    // Vieta on a random admissible grid.
    for _ in 0..200 {
        let n = rng.gen_range(2..7);
        let ld: f64 = rng.gen_range(0.1..20.0);
        let mu_c = (n as f64 - 2.0).powi(2) / 4.0 + ld;
        let mu = rng.gen_range(-5.0..mu_c);
        let e = exponents(n, ld, mu).unwrap();
        let s = (n as f64 - 2.0).abs().max(1.0);
        assert!((e.alpha_plus + e.alpha_minus + (n as f64 - 2.0)).abs() <= 1e-12 * s);
        assert!((e.alpha_plus * e.alpha_minus - (mu - ld)).abs() <= 1e-12 * (mu - ld).abs().max(1.0));
    }

    let hardy = PotentialSpec::hardy();
    let configs: Vec<DomainSpec> = vec![
        sector(2.0),
        sector(3.0).with_bulge(weak_bulge()),
        sector(3.0).with_bulge(strong_bulge(PI / 8.0)),
    ];
    for d in configs {
        let (mesh, sys) = system(d, 16.0, &hardy);
        // K symmetric positive definite.
        assert!(sys.stiffness.is_symmetric() && sys.mass.is_symmetric());
        let start_vec: Vec<f64> = (0..sys.dim()).map(|i| 1.0 + (i % 7) as f64).collect();
        let ritz = lanczos_ritz_values(&sys.stiffness, &start_vec, 20);
        assert!(ritz[0] > 0.0);
        // Quadrature identity: u = 1 gives the V-measure of the free region.
        let all = DofMap::all(&mesh);
        let m_all = conelab::fem::assemble_weighted_mass_with(&mesh, &all, &hardy, Parallelism::Sequential).unwrap();
        let k_all = conelab::fem::assemble_stiffness_with(&mesh, &all, Parallelism::Sequential).unwrap();
        let ones = vec![1.0; mesh.n_vertices()];
        assert!(k_all.mul(&ones).iter().all(|x| x.abs() < 1e-10));
        assert!(m_all.quad(&ones) > 0.0);
        // Perron positivity, pipeline consistency, quotient optimality.
        let eig = smallest_pair_with(&sys, &EigOptions::default()).unwrap();
        assert!(eig.positivity_ok);
        let q = rayleigh_quotient(&sys, &eig.u_h).unwrap();
        assert!((q - eig.mu_h).abs() <= 1e-12 * eig.mu_h);
        for _ in 0..100 {
            let u: Vec<f64> = (0..sys.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            assert!(eig.mu_h <= rayleigh_quotient(&sys, &u).unwrap() + 1e-11);
        }
        // Subspace monotonicity under nested refinement.
        let fine = refine_mesh(&mesh);
        let fine_sys = AssembledSystem::assemble(&fine, &hardy, Parallelism::default()).unwrap();
        let fine_mu = smallest_pair(&fine_sys, 1e-11, 500).unwrap().mu_h;
        assert!(fine_mu <= eig.mu_h * (1.0 + 1e-11));
    }

    // Mass fractions and classification reproducibility.
    let plan = quarter_plan().with_bulge(strong_bulge(PI / 8.0));
    let a = sweep_truncation(&plan).unwrap();
    let b = sweep_truncation(&SweepPlan { parallel: false, ..plan }).unwrap();
    for (_, h) in &a.histograms {
        assert!((h.fractions.iter().sum::<f64>() - 1.0).abs() <= 1e-10);
        assert!(h.fractions.iter().all(|&f| f >= 0.0));
    }
    assert_eq!(a.rows, b.rows);
    assert_eq!(a.verdict, b.verdict);

    // Monotonicity chains.
    let mono = monotonicity_suite(&MonoConfig {
        schema_version: SCHEMA_VERSION,
        theta: PI / 2.0,
        theta_x: PI,
        truncation: Truncation::decades(3.0),
        resolution: Resolution {
            elements_per_decade: 16.0,
        },
        solver: EigOptions::default(),
        r_a: 1.0,
        r_b: 2.0,
        extra_angles: vec![PI / 16.0, PI / 8.0, PI / 4.0],
        refinements: 2,
        w_bump: WBump {
            amplitude: 0.0,
            r_c: 0.5,
            r_d: 2.0,
            phi1: 0.1,
            phi2: 1.4,
            relative: true,
        },
        w_amplitudes: vec![0.0, 0.3, 0.6],
    })
    .unwrap();
    for a in &mono.assertions {
        assert!(a.passed, "{}: {}", a.name, a.detail);
    }
    let elapsed = start.elapsed();
    assert!(elapsed <= Duration::from_secs(15 * 60));
    format!("Vieta, SPD, quadrature, Perron, optimality, nesting, fractions, reproducibility, 3 monotonicity chains; {elapsed:.2?}")
}

fn main() {
    let criteria: [(&str, Check); 9] = [
        ("cone constant", criterion_1),
        ("truncated-cone oracle", criterion_2),
        ("strict gap", criterion_3),
        ("localization dichotomy", criterion_4),
        ("decay exponents", criterion_5),
        ("Birman-Schwinger identity", criterion_6),
        ("cutoff algebra", criterion_7),
        ("nonattainment probe", criterion_8),
        ("invariant suites", criterion_9),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let suite = Instant::now();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let label = format!("criterion {} ({name})", i + 1);
        if !filter.is_empty() && !filter.iter().any(|f| label.contains(f.as_str())) {
            continue;
        }
        let t = Instant::now();
        match catch_unwind(AssertUnwindSafe(check)) {
            Ok(detail) => println!("PASS {label} [{:.1?}]: {detail}", t.elapsed()),
            Err(e) => {
                failed += 1;
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                println!("FAIL {label} [{:.1?}]: {msg}", t.elapsed());
            }
        }
    }
    println!("acceptance: {} failed, total {:.1?}", failed, suite.elapsed());
    if failed > 0 {
        std::process::exit(1);
    }
}
