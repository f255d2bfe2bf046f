//! Principal eigenpair of the pencil `K u = μ M_V u`, resolvent solves
//! `(K - λ M_V) z = f` and the discrete Birman–Schwinger identity
//! `(K - λM_V)⁻¹ M_V u = u / (μ - λ)`.
//!
//! The eigensolver is inverse iteration with Rayleigh-quotient shifts. A shift
//! is accepted only if `K - σ M_V` admits a Cholesky factorization, which
//! certifies `σ < μ_1`; inner solves are PCG preconditioned by that factor.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::AssembledSystem;
use crate::linalg::{self, norm, reverse_cuthill_mckee, EnvelopeCholesky, SparseSym};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EigOptions {
    /// Target for `‖Ku - μM_Vu‖ / ‖Ku‖`.
    pub tol: f64,
    pub max_iter: usize,
    /// Relative residual of each inner linear solve.
    pub linear_tol: f64,
}

impl Default for EigOptions {
    fn default() -> Self {
        EigOptions {
            tol: 1e-11,
            max_iter: 500,
            linear_tol: 1e-13,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigResult {
    pub mu_h: f64,
    /// `M_V`-normalized, with positive entry sum.
    pub u_h: Vec<f64>,
    pub rel_residual: f64,
    pub iterations: usize,
    /// Most negative entry relative to the largest one (zero when all positive).
    pub min_relative_entry: f64,
    pub positivity_ok: bool,
    /// Final accepted shift and number of factorizations performed.
    pub shift: f64,
    pub factorizations: usize,
}

/// Relative undershoot tolerated by the discrete Perron check.
pub const PERRON_TOL: f64 = 1e-10;

fn factor(a: &SparseSym, ordering: &[usize]) -> Result<EnvelopeCholesky> {
    EnvelopeCholesky::with_ordering(a, ordering.to_vec())
}

/// Solve with the factor, then iterative refinement until the residual
/// reaches `tol` or stops decreasing. Returns the relative residual.
fn polished_solve(
    a: &SparseSym,
    f: &EnvelopeCholesky,
    rhs: &[f64],
    tol: f64,
) -> Result<(Vec<f64>, f64)> {
    let bnorm = norm(rhs);
    if bnorm == 0.0 {
        return Ok((vec![0.0; rhs.len()], 0.0));
    }
    let mut x = f.solve(rhs);
    let residual = |x: &[f64]| {
        let mut r = rhs.to_vec();
        linalg::axpy(-1.0, &a.mul(x), &mut r);
        r
    };
    let mut r = residual(&x);
    let mut rel = norm(&r) / bnorm;
    for _ in 0..8 {
        if rel <= tol {
            break;
        }
        let dx = f.solve(&r);
        let trial: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + b).collect();
        let rt = residual(&trial);
        let rel_t = norm(&rt) / bnorm;
        if !(rel_t < rel) {
            break;
        }
        x = trial;
        r = rt;
        rel = rel_t;
    }
    Ok((x, rel))
}

pub fn smallest_pair(sys: &AssembledSystem, tol: f64, max_iter: usize) -> Result<EigResult> {
    smallest_pair_with(
        sys,
        &EigOptions {
            tol,
            max_iter,
            ..EigOptions::default()
        },
    )
}

pub fn smallest_pair_with(sys: &AssembledSystem, opts: &EigOptions) -> Result<EigResult> {
    let (k, m) = (&sys.stiffness, &sys.mass);
    let n = sys.dim();
    let ordering = reverse_cuthill_mckee(k);

    let mut u = vec![1.0; n];
    let mnorm = m.quad(&u);
    if !(mnorm > 1e-300) {
        return Err(Error::VDegenerate(mnorm));
    }
    let mut sigma = 0.0;
    let mut shifted = k.clone();
    let mut fac = factor(&shifted, &ordering)?;
    let mut factorizations = 1;

    let mut rho;
    let mut rel;
    let mut iterations = 0;
    loop {
        iterations += 1;
        let (z, _) = polished_solve(&shifted, &fac, &m.mul(&u), opts.linear_tol)?;
        let zn = m.quad(&z).sqrt();
        if !(zn > 0.0 && zn.is_finite()) {
            return Err(Error::VDegenerate(zn));
        }
        u = z.iter().map(|x| x / zn).collect();
        let ku = k.mul(&u);
        let mu = m.mul(&u);
        rho = linalg::dot(&u, &ku);
        let r: Vec<f64> = ku.iter().zip(&mu).map(|(a, b)| a - rho * b).collect();
        rel = norm(&r) / norm(&ku);
        if rel <= opts.tol {
            break;
        }
        if iterations >= opts.max_iter {
            return Err(Error::NoConvergence(format!(
                "inverse iteration at relative residual {rel:e} after {iterations} steps"
            )));
        }
        // ρ ≥ μ_1 always; move the shift towards it while the factorization
        // still certifies definiteness.
        let gap = rho - sigma;
        if gap > 1e-6 * rho.abs() && factorizations < 40 {
            let mut target = sigma + 0.9 * gap;
            for _ in 0..12 {
                let candidate = k.combine(1.0, m, -target);
                factorizations += 1;
                match factor(&candidate, &ordering) {
                    Ok(f) => {
                        sigma = target;
                        shifted = candidate;
                        fac = f;
                        break;
                    }
                    Err(Error::NotPositiveDefinite { .. }) => {
                        target = sigma + 0.5 * (target - sigma);
                    }
                    Err(e) => return Err(e),
                }
            }
        }
    }

    if u.iter().sum::<f64>() < 0.0 {
        u.iter_mut().for_each(|x| *x = -*x);
    }
    let umax = u.iter().cloned().fold(0.0, f64::max);
    let umin = u.iter().cloned().fold(f64::INFINITY, f64::min);
    let min_relative_entry = (umin / umax).min(0.0);
    Ok(EigResult {
        mu_h: rho,
        u_h: u,
        rel_residual: rel,
        iterations,
        min_relative_entry,
        positivity_ok: min_relative_entry >= -PERRON_TOL,
        shift: sigma,
        factorizations,
    })
}

/// Largest absolute row sum.
fn norm_inf(a: &SparseSym) -> f64 {
    (0..a.dim())
        .map(|i| a.row(i).map(|(_, v)| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Normwise relative residual `‖f - Az‖ / (‖A‖ ‖z‖ + ‖f‖)` used as the
/// acceptance test of [`resolvent_solve`].
pub const RESOLVENT_TOL: f64 = 1e-12;

/// Solves `(K - λ M_V) z = rhs`. A failed Cholesky factorization of the
/// shifted matrix certifies `λ ≥ μ_1`.
pub fn resolvent_solve(sys: &AssembledSystem, lambda: f64, rhs: &[f64]) -> Result<Vec<f64>> {
    let a = sys.stiffness.combine(1.0, &sys.mass, -lambda);
    let f = match EnvelopeCholesky::new(&a) {
        Ok(f) => f,
        Err(Error::NotPositiveDefinite { .. }) => {
            return Err(Error::SupercriticalShift { lambda })
        }
        Err(e) => return Err(e),
    };
    let (z, rel) = polished_solve(&a, &f, rhs, 1e-15)?;
    let bnorm = norm(rhs);
    let eta = rel * bnorm / (norm_inf(&a) * norm(&z) + bnorm).max(f64::MIN_POSITIVE);
    if eta > RESOLVENT_TOL {
        return Err(Error::NoConvergence(format!(
            "resolvent residual {eta:e} above {RESOLVENT_TOL:e}"
        )));
    }
    Ok(z)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BsRow {
    pub lambda: f64,
    pub defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BsReport {
    pub rows: Vec<BsRow>,
    pub max_defect: f64,
}

impl BsReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lambda,defect\n");
        for row in &self.rows {
            out.push_str(&format!("{:.17e},{:.6e}\n", row.lambda, row.defect));
        }
        out
    }
}

/// The grid `{0, μ/4, μ/2, 3μ/4, 0.99μ}`.
pub fn default_lambda_grid(mu_h: f64) -> Vec<f64> {
    vec![0.0, 0.25 * mu_h, 0.5 * mu_h, 0.75 * mu_h, 0.99 * mu_h]
}

/// `max_λ ‖(K - λM_V)⁻¹ M_V u_h - u_h/(μ_h - λ)‖ / ‖u_h‖`.
pub fn bs_identity_check(sys: &AssembledSystem, eig: &EigResult, lambdas: &[f64]) -> Result<BsReport> {
    let mu_u = sys.mass.mul(&eig.u_h);
    let unorm = norm(&eig.u_h);
    let mut rows = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        if !(lambda >= 0.0) {
            return Err(Error::InvalidInput(format!("lambda = {lambda} must be nonnegative")));
        }
        if lambda >= eig.mu_h {
            return Err(Error::SupercriticalShift { lambda });
        }
        let z = resolvent_solve(sys, lambda, &mu_u)?;
        let scale = 1.0 / (eig.mu_h - lambda);
        let diff: Vec<f64> = z.iter().zip(&eig.u_h).map(|(a, b)| a - scale * b).collect();
        rows.push(BsRow {
            lambda,
            defect: norm(&diff) / unorm,
        });
    }
    let max_defect = rows.iter().map(|r| r.defect).fold(0.0, f64::max);
    Ok(BsReport { rows, max_defect })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapProbe {
    pub mu2_estimate: f64,
    /// `μ₂ > μ_h (1 + 1e-6)`.
    pub simple: bool,
}

/// Deflated inverse iteration for the second eigenvalue: iterates stay
/// `M_V`-orthogonal to `u_h`, so their Rayleigh quotients bound `μ₂` from
/// above and converge to it.
pub fn second_eigenvalue_probe(sys: &AssembledSystem, eig: &EigResult, steps: usize) -> Result<GapProbe> {
    let (k, m) = (&sys.stiffness, &sys.mass);
    let shift = 0.5 * eig.mu_h;
    let a = k.combine(1.0, m, -shift);
    let f = EnvelopeCholesky::new(&a)?;
    let mu1 = m.mul(&eig.u_h);
    let deflate = |v: &mut Vec<f64>| {
        let c = linalg::dot(v, &mu1);
        linalg::axpy(-c, &eig.u_h, v);
    };
    // Deterministic start with sign changes.
    let mut v: Vec<f64> = (0..sys.dim())
        .map(|i| ((i as f64) * 0.618_033_988_749_895).fract() - 0.5)
        .collect();
    deflate(&mut v);
    let mut rq = f64::INFINITY;
    for _ in 0..steps.max(1) {
        let mut z = f.solve(&m.mul(&v));
        deflate(&mut z);
        let zn = m.quad(&z).sqrt();
        if !(zn > 0.0) {
            break;
        }
        v = z.iter().map(|x| x / zn).collect();
        rq = k.quad(&v);
    }
    Ok(GapProbe {
        mu2_estimate: rq,
        simple: rq > eig.mu_h * (1.0 + 1e-6),
    })
}
