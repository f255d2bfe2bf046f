//! `results.csv`, `verdict.json` and `plotdata/*.csv` writers.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde_json::{json, Value};

use crate::error::Result;

use super::experiments::{
    all_passed, BumpReport, DecayReport, GapReport, MonoReport, ProbeReport,
};
use super::sweep::{SweepOutcome, SweepRow};

pub const RESULTS_HEADER: &str =
    "L,r_min,r_max,dofs,mu_h,residual,localization_ratio,max_annulus_fraction,slope_near,slope_far";

fn opt(x: Option<f64>) -> String {
    x.map_or(String::new(), |v| format!("{v:.10e}"))
}

pub fn results_csv(rows: &[SweepRow]) -> String {
    let mut out = format!("{RESULTS_HEADER}\n");
    for r in rows {
        writeln!(
            out,
            "{:.10},{:.6e},{:.6e},{},{:.12},{:.3e},{:.10},{:.10},{},{}",
            r.l,
            r.r_min,
            r.r_max,
            r.dofs,
            r.mu_h,
            r.residual,
            r.localization_ratio,
            r.max_annulus_fraction,
            opt(r.slope_near),
            opt(r.slope_far)
        )
        .unwrap();
    }
    out
}

/// `inv_L2, mu_h, fit` with the extrapolation line.
pub fn mu_vs_inv_l2_csv(out: &SweepOutcome) -> String {
    let mut s = String::from("inv_L2,mu_h,fit\n");
    for r in &out.rows {
        let x = 1.0 / (r.l * r.l);
        let fit = out.verdict.mu_extrapolated + out.verdict.fit_c * x;
        writeln!(s, "{x:.10e},{:.12},{fit:.12}", r.mu_h).unwrap();
    }
    s
}

pub fn histogram_csv(diag: &super::diagnostics::ConcentrationDiagnostic) -> String {
    let mut s = String::from("log10_r_lo,log10_r_hi,fraction\n");
    for (i, f) in diag.fractions.iter().enumerate() {
        writeln!(s, "{:.6},{:.6},{f:.12e}", diag.edges[i], diag.edges[i + 1]).unwrap();
    }
    s
}

/// Writes one sweep's plot data with file names prefixed by `label`.
fn write_series(dir: &Path, label: &str, out: &SweepOutcome) -> Result<()> {
    let plot = dir.join("plotdata");
    fs::create_dir_all(&plot)?;
    let prefix = if label.is_empty() { String::new() } else { format!("{label}_") };
    fs::write(plot.join(format!("{prefix}mu_vs_invL2.csv")), mu_vs_inv_l2_csv(out))?;
    fs::write(plot.join(format!("{prefix}results.csv")), results_csv(&out.rows))?;
    for (l, h) in &out.histograms {
        fs::write(plot.join(format!("{prefix}annulus_L{l:.4}.csv")), histogram_csv(h))?;
    }
    Ok(())
}

fn write_top(dir: &Path, rows: &[SweepRow], verdict: &Value) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("results.csv"), results_csv(rows))?;
    fs::write(dir.join("verdict.json"), serde_json::to_string_pretty(verdict)? + "\n")?;
    Ok(())
}

fn series_json(out: &SweepOutcome) -> Value {
    json!({ "verdict": out.verdict, "complete": out.is_complete() })
}

/// Returns whether every check passed (sweeps: all points solved).
pub fn write_sweep(dir: &Path, out: &SweepOutcome) -> Result<bool> {
    let ok = out.is_complete();
    write_top(dir, &out.rows, &json!({ "experiment": "sweep", "passed": ok, "sweep": series_json(out) }))?;
    write_series(dir, "", out)?;
    Ok(ok)
}

pub fn write_gap(dir: &Path, r: &GapReport) -> Result<bool> {
    let ok = all_passed(&r.assertions);
    let v = json!({
        "experiment": "gap",
        "passed": ok,
        "assertions": r.assertions,
        "mu_inf_gap": r.mu_inf_gap,
        "pointwise": r.pointwise.iter().map(|p| json!({"L": p[0], "mu_cone": p[1], "mu_perturbed": p[2], "gap": p[3]})).collect::<Vec<_>>(),
        "nested_chain": r.nested_chain,
        "cone": series_json(&r.cone),
        "perturbed": series_json(&r.perturbed),
    });
    write_top(dir, &r.perturbed.rows, &v)?;
    write_series(dir, "cone", &r.cone)?;
    write_series(dir, "perturbed", &r.perturbed)?;
    Ok(ok)
}

pub fn write_decay(dir: &Path, r: &DecayReport) -> Result<bool> {
    let ok = all_passed(&r.assertions);
    let v = json!({
        "experiment": "decay",
        "passed": ok,
        "tolerance": r.tolerance,
        "assertions": r.assertions,
        "sweep": series_json(&r.outcome),
    });
    write_top(dir, &r.outcome.rows, &v)?;
    write_series(dir, "", &r.outcome)?;
    if let Some(p) = &r.outcome.last {
        let theta = p.mesh.theta.unwrap_or(0.0);
        let mut s = String::from("r,u\n");
        for v in p.mesh.ray_vertices(theta / 2.0) {
            writeln!(s, "{:.10e},{:.10e}", p.mesh.vertices[v].r, p.u_vertex[v]).unwrap();
        }
        fs::write(dir.join("plotdata").join("ray_profile.csv"), s)?;
    }
    Ok(ok)
}

pub fn write_probe(dir: &Path, r: &ProbeReport) -> Result<bool> {
    let ok = all_passed(&r.assertions);
    let entries: Vec<Value> = r
        .entries
        .iter()
        .map(|e| json!({ "extra_angle": e.extra_angle, "sweep": series_json(&e.outcome) }))
        .collect();
    let v = json!({
        "experiment": "probe",
        "passed": ok,
        "assertions": r.assertions,
        "crossover_index": r.crossover_index,
        "monotone": r.monotone,
        "transition_observed": r.transition_observed,
        "classifications": r.classifications().iter().map(|c| c.as_str()).collect::<Vec<_>>(),
        "entries": entries,
    });
    let rows: Vec<SweepRow> = r.entries.first().map(|e| e.outcome.rows.clone()).unwrap_or_default();
    write_top(dir, &rows, &v)?;
    for (j, e) in r.entries.iter().enumerate() {
        write_series(dir, &format!("j{j}"), &e.outcome)?;
    }
    Ok(ok)
}

pub fn write_bump(dir: &Path, r: &BumpReport) -> Result<bool> {
    let ok = all_passed(&r.assertions);
    fs::create_dir_all(dir.join("plotdata"))?;
    let mut s = String::from("angle,L,dofs,mu_b,mu_exact\n");
    for b in &r.rows {
        writeln!(s, "{:.10},{:.10},{},{:.12},{:.12}", b.angle, b.l, b.dofs, b.mu_b, b.mu_exact).unwrap();
    }
    fs::write(dir.join("results.csv"), &s)?;
    fs::write(dir.join("plotdata").join("mu_b_series.csv"), &s)?;
    let v = json!({ "experiment": "bump-search", "passed": ok, "report": r });
    fs::write(dir.join("verdict.json"), serde_json::to_string_pretty(&v)? + "\n")?;
    Ok(ok)
}

pub fn write_mono(dir: &Path, r: &MonoReport) -> Result<bool> {
    let ok = all_passed(&r.assertions);
    fs::create_dir_all(dir.join("plotdata"))?;
    let mut s = String::from("chain,parameter,mu_h\n");
    for (e, mu) in &r.domain_chain {
        writeln!(s, "domain,{e:.10},{mu:.12}").unwrap();
    }
    for (n, mu) in &r.refinement_chain {
        writeln!(s, "refinement,{n},{mu:.12}").unwrap();
    }
    for (a, mu) in &r.potential_chain {
        writeln!(s, "potential,{a:.10},{mu:.12}").unwrap();
    }
    fs::write(dir.join("results.csv"), &s)?;
    fs::write(dir.join("plotdata").join("chains.csv"), &s)?;
    let v = json!({ "experiment": "mono", "passed": ok, "report": r });
    fs::write(dir.join("verdict.json"), serde_json::to_string_pretty(&v)? + "\n")?;
    Ok(ok)
}
