use std::f64::consts::PI;

use proptest::prelude::*;

use conelab::analytic::{
    euler_residual, exponents, hardy_constant, separated_solution, truncated_cone_mu,
};
use conelab::eig::{bs_identity_check, smallest_pair};
use conelab::fem::{cutoff_split_terms, rayleigh_quotient, AssembledSystem, CutoffField};
use conelab::geometry::{build_domain, generate_mesh, Bulge, DomainSpec, Mesh, PotentialSpec};
use conelab::lab::{
    classify, concentration, gap_experiment, sweep_truncation, transition_is_monotone,
    Classification, GapConfig, SweepPlan, Thresholds, Truncation, SCHEMA_VERSION,
};
use conelab::Parallelism;

fn bulge_mesh(ra: f64, rb: f64, extra: f64, n_radial: usize) -> Mesh {
    let d = build_domain(
        DomainSpec::sector(PI / 2.0, PI, 1e-2, 1e2).with_bulge(Bulge {
            r_a: ra,
            r_b: rb,
            extra_angle: extra,
        }),
    )
    .unwrap();
    generate_mesh(&d, n_radial, 6).unwrap()
}

fn cls() -> impl Strategy<Value = Classification> {
    prop_oneof![
        Just(Classification::LocalizedMinimizer),
        Just(Classification::SpreadingNonattained),
        Just(Classification::Inconclusive),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn vieta(n in 2usize..8, ld in 0.05f64..30.0, frac in 0.0f64..1.0) {
        let spec = hardy_constant(n, ld).unwrap();
        let mu = spec.mu_c * frac - 3.0 * (1.0 - frac);
        let e = exponents(n, ld, mu).unwrap();
        prop_assert!((e.alpha_plus + e.alpha_minus + n as f64 - 2.0).abs() < 1e-12 * (n as f64));
        prop_assert!((e.alpha_plus * e.alpha_minus - (mu - ld)).abs() < 1e-11 * (mu - ld).abs().max(1.0));
        prop_assert!(e.alpha_plus >= e.alpha_minus);
    }

    #[test]
    fn separated_solutions_solve_euler(n in 2usize..6, ld in 0.5f64..20.0, frac in 0.0f64..1.0,
                                       a in 0.0f64..2.0, b in 0.0f64..2.0, logr in -3.0f64..3.0) {
        let spec = hardy_constant(n, ld).unwrap();
        let mu = spec.mu_c * frac;
        let p = separated_solution(&spec, mu, a, b).unwrap();
        let r = 10f64.powf(logr);
        let scale = (p.eval(r).abs() / (r * r)).max(p.second_derivative(r).abs()).max(1e-300);
        prop_assert!(euler_residual(&p, &spec, mu, r).abs() <= 1e-10 * scale);
    }

    #[test]
    fn truncated_mu_decreases_to_mu_c(ld in 0.5f64..20.0, l1 in 1.0f64..20.0, dl in 0.1f64..20.0) {
        let spec = hardy_constant(2, ld).unwrap();
        let a = truncated_cone_mu(&spec, 1.0, l1.exp()).unwrap().mu_trunc;
        let b = truncated_cone_mu(&spec, 1.0, (l1 + dl).exp()).unwrap().mu_trunc;
        prop_assert!(b < a && b > spec.mu_c);
    }

    #[test]
    fn cutoff_identity_random(u_seed in proptest::collection::vec(-1.0f64..1.0, 1..64),
                              collar in 1usize..4, extra in 0.1f64..1.2) {
        let mesh = bulge_mesh(0.5, 2.0, extra, 24);
        let u: Vec<f64> = (0..mesh.n_vertices())
            .map(|i| if mesh.dirichlet[i] { 0.0 } else { u_seed[i % u_seed.len()] * (1.0 + (i % 5) as f64) })
            .collect();
        let chi = CutoffField::around_bulge(&mesh, collar);
        let s = cutoff_split_terms(&mesh, &u, &chi);
        prop_assert!(s.defect() <= 1e-12 * (s.lhs.abs() + 1.0));
    }

    #[test]
    fn mass_fractions_partition(seed in proptest::collection::vec(0.0f64..1.0, 8..32)) {
        let mesh = bulge_mesh(0.5, 2.0, 0.5, 24);
        let u: Vec<f64> = (0..mesh.n_vertices())
            .map(|i| if mesh.dirichlet[i] { 0.0 } else { 0.01 + seed[i % seed.len()] })
            .collect();
        let c = concentration(&mesh, &PotentialSpec::hardy(), &u, 1e-2, 1e2, [0.05, 20.0]).unwrap();
        prop_assert!((c.fractions.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(c.fractions.iter().all(|&f| f >= 0.0));
        prop_assert!((0.0..=1.0).contains(&c.localization_ratio));
    }

    #[test]
    fn classify_is_deterministic(r in proptest::collection::vec(0.0f64..1.0, 0..6),
                                 p in proptest::collection::vec(0.5f64..8.0, 0..6)) {
        let th = Thresholds::default();
        prop_assert_eq!(classify(&r, &p, &th), classify(&r, &p, &th));
    }

    #[test]
    fn monotone_transition_rule(v in proptest::collection::vec(cls(), 0..10)) {
        let s = v.iter().position(|c| *c == Classification::SpreadingNonattained);
        let expected = match s {
            Some(k) => v[k..].iter().all(|c| *c != Classification::LocalizedMinimizer),
            None => true,
        };
        prop_assert_eq!(transition_is_monotone(&v), expected);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn domain_monotonicity(e1 in 0.05f64..0.7, de in 0.05f64..0.7) {
        let pot = PotentialSpec::hardy();
        let mu = |e: f64| {
            let m = bulge_mesh(0.5, 2.0, e, 32);
            let sys = AssembledSystem::assemble(&m, &pot, Parallelism::Sequential).unwrap();
            smallest_pair(&sys, 1e-11, 500).unwrap().mu_h
        };
        // Column snapping can make nearby angles share a mesh.
        prop_assert!(mu(e1 + de) <= mu(e1) + 1e-9);
    }

    #[test]
    fn rayleigh_quotient_bounds(seed in proptest::collection::vec(-1.0f64..1.0, 4..40), extra in 0.1f64..1.0) {
        let m = bulge_mesh(0.5, 2.0, extra, 24);
        let sys = AssembledSystem::assemble(&m, &PotentialSpec::hardy(), Parallelism::Sequential).unwrap();
        let eig = smallest_pair(&sys, 1e-11, 500).unwrap();
        let u: Vec<f64> = (0..sys.dim()).map(|i| seed[i % seed.len()] + 0.01 * i as f64).collect();
        prop_assert!(rayleigh_quotient(&sys, &u).unwrap() >= eig.mu_h - 1e-10);
        let q = rayleigh_quotient(&sys, &eig.u_h).unwrap();
        prop_assert!((q - eig.mu_h).abs() <= 1e-12 * eig.mu_h);
        let bs = bs_identity_check(&sys, &eig, &[0.0, 0.5 * eig.mu_h, 0.9 * eig.mu_h]).unwrap();
        prop_assert!(bs.max_defect <= 1e-8);
    }
}

#[test]
fn empty_bulge_gap_matches_cone_sweep() {
    let plan = SweepPlan::new(PI / 2.0, PI, [2.0, 3.0].map(Truncation::decades).to_vec()).with_resolution(16.0);
    let cone = sweep_truncation(&plan).unwrap();
    let report = gap_experiment(&GapConfig {
        schema_version: SCHEMA_VERSION,
        plan,
        bulge: None,
        delta: 0.0,
        nested_extra_angles: vec![],
    })
    .unwrap();
    assert_eq!(report.perturbed.rows, cone.rows);
    assert!(report.pointwise.iter().all(|p| p[3] == 0.0));
}

#[test]
fn sequential_and_parallel_sweeps_agree() {
    let plan = SweepPlan::new(PI / 2.0, PI, [2.0, 3.0, 4.0].map(Truncation::decades).to_vec())
        .with_bulge(Bulge { r_a: 1.0, r_b: 2.0, extra_angle: PI / 4.0 })
        .with_resolution(16.0);
    let a = sweep_truncation(&plan).unwrap();
    let b = sweep_truncation(&SweepPlan { parallel: false, ..plan }).unwrap();
    assert_eq!(a.rows, b.rows);
    assert_eq!(a.verdict, b.verdict);
}
