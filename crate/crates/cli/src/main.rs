use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use conelab::analytic::{
    cross_section_eigenpair, exponents, hardy_constant, truncated_cone_mu, CrossSection,
};
use conelab::eig::{bs_identity_check, default_lambda_grid, smallest_pair_with, EigOptions};
use conelab::fem::AssembledSystem;
use conelab::geometry::{build_domain, generate_mesh, refine_mesh, Bulge, DomainSpec, PotentialSpec};
use conelab::lab::{self, output, Resolution, Truncation};
use conelab::Parallelism;

#[derive(Parser)]
#[command(name = "conelab", version, about = "Rayleigh quotients of -Δ - μV on planar cones with bulges")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form cone spectrum as JSON.
    Analytic(AnalyticArgs),
    /// Dump a mesh as text.
    Mesh(MeshArgs),
    /// Principal eigenpair as JSON.
    Solve(SolveArgs),
    /// Birman-Schwinger defect table as CSV.
    BsCheck(BsArgs),
    /// Truncation sweep.
    Sweep(ExperimentArgs),
    /// Paired sweeps with and without a bulge.
    Gap(ExperimentArgs),
    /// Decay-exponent fits at the largest truncation.
    Decay(ExperimentArgs),
    /// Shrinking-bulge nonattainment probe.
    Probe(ExperimentArgs),
    /// Sectors of the ambient cone approaching its constant.
    BumpSearch(ExperimentArgs),
    /// Domain, refinement and potential monotonicity chains.
    Mono(ExperimentArgs),
}

#[derive(Args)]
struct AnalyticArgs {
    #[arg(long = "N", default_value_t = 2)]
    n: usize,
    /// Arc opening (N = 2).
    #[arg(long, group = "section")]
    theta: Option<f64>,
    /// Cap half-angle (N = 3).
    #[arg(long, group = "section")]
    theta0: Option<f64>,
    #[arg(long = "lambdaD", group = "section")]
    lambda_d: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    rmin: Option<f64>,
    #[arg(long)]
    rmax: Option<f64>,
}

#[derive(Args, Clone)]
struct DomainArgs {
    #[arg(long, default_value_t = PI / 2.0)]
    theta: f64,
    #[arg(long = "theta-x", default_value_t = PI)]
    theta_x: f64,
    #[arg(long, default_value_t = 1e-3)]
    rmin: f64,
    #[arg(long, default_value_t = 1e3)]
    rmax: f64,
    /// Bulge as `r_a,r_b,extra_angle`; repeatable.
    #[arg(long, value_parser = parse_bulge)]
    bulge: Vec<Bulge>,
}

impl DomainArgs {
    fn spec(&self) -> DomainSpec {
        let mut d = DomainSpec::sector(self.theta, self.theta_x, self.rmin, self.rmax);
        d.bulges = self.bulge.clone();
        d
    }
}

fn parse_bulge(s: &str) -> std::result::Result<Bulge, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| e.to_string()))
        .collect::<std::result::Result<_, _>>()?;
    match v[..] {
        [r_a, r_b, extra_angle] => Ok(Bulge {
            r_a,
            r_b,
            extra_angle,
        }),
        _ => Err("expected r_a,r_b,extra_angle".into()),
    }
}

#[derive(Args)]
struct MeshArgs {
    #[command(flatten)]
    domain: DomainArgs,
    #[arg(long, default_value_t = 24)]
    n_radial: usize,
    #[arg(long, default_value_t = 8)]
    n_angular: usize,
    /// Uniform refinements applied after generation.
    #[arg(long, default_value_t = 0)]
    refine: usize,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    domain: DomainArgs,
    #[arg(long, default_value_t = 16.0)]
    elements_per_decade: f64,
    /// JSON file with a potential spec (Hardy weight when absent).
    #[arg(long)]
    potential: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-11)]
    tol: f64,
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
}

#[derive(Args)]
struct BsArgs {
    #[command(flatten)]
    solve: SolveArgs,
    /// Fail when the largest defect exceeds this.
    #[arg(long, default_value_t = 1e-8)]
    max_defect: f64,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn assemble(args: &SolveArgs) -> Result<(AssembledSystem, EigOptions)> {
    let d = build_domain(args.domain.spec())?;
    let pot = match &args.potential {
        Some(p) => serde_json::from_str::<PotentialSpec>(
            &std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        )?,
        None => PotentialSpec::hardy(),
    };
    pot.validate(&d)?;
    let res = Resolution {
        elements_per_decade: args.elements_per_decade,
    };
    let t = Truncation {
        r_min: d.r_min,
        r_max: d.r_max,
    };
    let mesh = generate_mesh(&d, res.n_radial(&t), res.n_angular(d.theta))?;
    let sys = AssembledSystem::assemble(&mesh, &pot, Parallelism::default())?;
    let opts = EigOptions {
        tol: args.tol,
        max_iter: args.max_iter,
        ..EigOptions::default()
    };
    Ok((sys, opts))
}

fn analytic(a: &AnalyticArgs) -> Result<()> {
    let cs = match (a.theta, a.theta0, a.lambda_d) {
        (Some(t), _, _) => CrossSection::arc(t)?,
        (_, Some(t0), _) => CrossSection::cap(t0)?,
        (_, _, Some(l)) => CrossSection::explicit(a.n, l)?,
        _ => bail!("one of --theta, --theta0, --lambdaD is required"),
    };
    if cs.dimension != a.n {
        bail!("cross-section requires N = {} (got --N {})", cs.dimension, a.n);
    }
    let pair = cross_section_eigenpair(&cs)?;
    let spec = hardy_constant(a.n, pair.lambda_d)?;
    let (ap, am) = match a.mu {
        Some(mu) => {
            let e = exponents(a.n, pair.lambda_d, mu)?;
            (Some(e.alpha_plus), Some(e.alpha_minus))
        }
        None => (None, None),
    };
    let (l, mu_trunc) = match (a.rmin, a.rmax) {
        (Some(lo), Some(hi)) => {
            let t = truncated_cone_mu(&spec, lo, hi)?;
            (Some(t.length), Some(t.mu_trunc))
        }
        _ => (None, None),
    };
    let v = json!({
        "N": a.n,
        "lambda_D": pair.lambda_d,
        "mu_C": spec.mu_c,
        "mu": a.mu,
        "alpha_plus": ap,
        "alpha_minus": am,
        "L": l,
        "mu_trunc": mu_trunc,
        "v_D_available": pair.profile.is_available(),
    });
    println!("{}", serde_json::to_string_pretty(&v)?);
    Ok(())
}

fn mesh(a: &MeshArgs) -> Result<()> {
    let d = build_domain(a.domain.spec())?;
    let mut m = generate_mesh(&d, a.n_radial, a.n_angular)?;
    for _ in 0..a.refine {
        m = refine_mesh(&m);
    }
    let text = m.to_text();
    match &a.out {
        Some(p) => std::fs::write(p, text)?,
        None => {
            use std::io::Write;
            match std::io::stdout().lock().write_all(text.as_bytes()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(e.into()),
                _ => {}
            }
        }
    }
    Ok(())
}

fn solve(a: &SolveArgs) -> Result<bool> {
    let (sys, opts) = assemble(a)?;
    let eig = smallest_pair_with(&sys, &opts)?;
    let v = json!({
        "mu_h": eig.mu_h,
        "residual": eig.rel_residual,
        "iterations": eig.iterations,
        "positivity_ok": eig.positivity_ok,
        "dofs": sys.dim(),
    });
    println!("{}", serde_json::to_string_pretty(&v)?);
    Ok(eig.positivity_ok)
}

fn bs_check(a: &BsArgs) -> Result<bool> {
    let (sys, opts) = assemble(&a.solve)?;
    let eig = smallest_pair_with(&sys, &opts)?;
    let report = bs_identity_check(&sys, &eig, &default_lambda_grid(eig.mu_h))?;
    print!("{}", report.to_csv());
    Ok(report.max_defect <= a.max_defect)
}

fn experiment(kind: &str, a: &ExperimentArgs) -> Result<bool> {
    let cfg = a.config.as_path();
    let out: &Path = a.out.as_path();
    let ok = match kind {
        "sweep" => {
            let c: lab::SweepConfig = lab::load_config(cfg)?;
            output::write_sweep(out, &lab::sweep_truncation(&c.plan)?)?
        }
        "gap" => output::write_gap(out, &lab::gap_experiment(&lab::load_config(cfg)?)?)?,
        "decay" => output::write_decay(out, &lab::decay_experiment(&lab::load_config(cfg)?, 0.1)?)?,
        "probe" => output::write_probe(out, &lab::nonattainment_probe(&lab::load_config(cfg)?)?)?,
        "bump-search" => output::write_bump(out, &lab::bump_search(&lab::load_config(cfg)?)?)?,
        "mono" => output::write_mono(out, &lab::monotonicity_suite(&lab::load_config(cfg)?)?)?,
        _ => unreachable!(),
    };
    eprintln!(
        "{kind}: {} (outputs in {})",
        if ok { "all checks passed" } else { "ASSERTION FAILED" },
        out.display()
    );
    Ok(ok)
}

fn run(cli: Cli) -> Result<bool> {
    match &cli.command {
        Command::Analytic(a) => analytic(a).map(|_| true),
        Command::Mesh(a) => mesh(a).map(|_| true),
        Command::Solve(a) => solve(a),
        Command::BsCheck(a) => bs_check(a),
        Command::Sweep(a) => experiment("sweep", a),
        Command::Gap(a) => experiment("gap", a),
        Command::Decay(a) => experiment("decay", a),
        Command::Probe(a) => experiment("probe", a),
        Command::BumpSearch(a) => experiment("bump-search", a),
        Command::Mono(a) => experiment("mono", a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
