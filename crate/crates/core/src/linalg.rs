//! Sparse symmetric matrices and the solvers the eigen machinery needs:
//! preconditioned conjugate gradients, incomplete and complete (envelope)
//! Cholesky factorizations, reverse Cuthill–McKee ordering and a small
//! Lanczos driver.

use std::collections::VecDeque;
use std::fmt::Write as _;

use crate::error::{Error, Result};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

/// Symmetric matrix in compressed-row form, both triangles stored. Entries are
/// only ever inserted in mirrored pairs, so `A[i][j]` and `A[j][i]` are
/// bitwise equal.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSym {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseSym {
    /// Zero matrix with the given sparsity. `neighbors[i]` lists the
    /// off-diagonal columns of row `i`; the diagonal is always present and
    /// the pattern is symmetrized.
    pub fn from_pattern(n: usize, neighbors: &[Vec<usize>]) -> Self {
        let mut rows: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        for (i, nb) in neighbors.iter().enumerate() {
            for &j in nb {
                if j != i {
                    rows[i].push(j);
                    rows[j].push(i);
                }
            }
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        row_ptr.push(0);
        for mut r in rows {
            r.sort_unstable();
            r.dedup();
            cols.extend(r);
            row_ptr.push(cols.len());
        }
        let nnz = cols.len();
        SparseSym {
            n,
            row_ptr,
            cols,
            vals: vec![0.0; nnz],
        }
    }

    /// Dense-to-sparse conversion of a symmetric matrix (tests and small cases).
    pub fn from_dense(a: &[Vec<f64>]) -> Self {
        let n = a.len();
        let neighbors: Vec<Vec<usize>> = (0..n)
            .map(|i| (0..n).filter(|&j| j != i && a[i][j] != 0.0).collect())
            .collect();
        let mut m = SparseSym::from_pattern(n, &neighbors);
        for i in 0..n {
            for j in i..n {
                if a[i][j] != 0.0 {
                    m.add_sym(i, j, a[i][j]);
                }
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.cols[lo..hi].binary_search(&j).ok().map(|k| lo + k)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |k| self.vals[k])
    }

    /// Adds `v` to `(i, j)` and, off the diagonal, to `(j, i)`.
    pub fn add_sym(&mut self, i: usize, j: usize, v: f64) {
        let k = self.slot(i, j).expect("entry outside sparsity pattern");
        self.vals[k] += v;
        if i != j {
            let k = self.slot(j, i).expect("entry outside sparsity pattern");
            self.vals[k] += v;
        }
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.cols[lo..hi]
            .iter()
            .copied()
            .zip(self.vals[lo..hi].iter().copied())
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        }
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_into(x, &mut y);
        y
    }

    /// `xᵀ A x`
    pub fn quad(&self, x: &[f64]) -> f64 {
        dot(x, &self.mul(x))
    }

    /// `alpha * self + beta * other` on the union of both patterns.
    pub fn combine(&self, alpha: f64, other: &SparseSym, beta: f64) -> SparseSym {
        assert_eq!(self.n, other.n, "dimension mismatch");
        if self.row_ptr == other.row_ptr && self.cols == other.cols {
            return SparseSym {
                n: self.n,
                row_ptr: self.row_ptr.clone(),
                cols: self.cols.clone(),
                vals: self
                    .vals
                    .iter()
                    .zip(&other.vals)
                    .map(|(a, b)| alpha * a + beta * b)
                    .collect(),
            };
        }
        let mut row_ptr = Vec::with_capacity(self.n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for i in 0..self.n {
            let mut merged: Vec<(usize, f64)> = self
                .row(i)
                .map(|(j, v)| (j, alpha * v))
                .chain(other.row(i).map(|(j, v)| (j, beta * v)))
                .collect();
            merged.sort_by_key(|e| e.0);
            for (j, v) in merged {
                if cols.len() > row_ptr[i] && *cols.last().unwrap() == j {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(j);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        SparseSym {
            n: self.n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| self.row(i).all(|(j, v)| self.get(j, i) == v))
    }

    /// Coordinate text, one `row col value` line per stored entry.
    pub fn to_coo_text(&self) -> String {
        let mut out = String::new();
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                writeln!(out, "{i} {j} {v:.17e}").unwrap();
            }
        }
        out
    }
}

pub trait Preconditioner {
    /// `z ≈ A⁻¹ r`
    fn apply(&self, r: &[f64], z: &mut [f64]);
}

pub struct Jacobi {
    inv_diag: Vec<f64>,
}

impl Jacobi {
    pub fn new(a: &SparseSym) -> Result<Self> {
        let d = a.diagonal();
        if let Some((row, &pivot)) = d.iter().enumerate().find(|(_, &x)| x <= 0.0) {
            return Err(Error::NotPositiveDefinite { row, pivot });
        }
        Ok(Jacobi {
            inv_diag: d.iter().map(|x| 1.0 / x).collect(),
        })
    }
}

impl Preconditioner for Jacobi {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.iter_mut()
            .zip(r)
            .zip(&self.inv_diag)
            .for_each(|((zi, ri), d)| *zi = ri * d);
    }
}

/// Zero-fill incomplete Cholesky `A ≈ L Lᵀ` on the lower pattern of `A`.
/// When a pivot breaks down the diagonal is scaled by `1 + shift` and the
/// factorization restarted.
pub struct IncompleteCholesky {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    pub shift: f64,
}

impl IncompleteCholesky {
    pub fn new(a: &SparseSym) -> Self {
        let mut shift = 0.0;
        loop {
            if let Some(f) = Self::try_factor(a, shift) {
                return f;
            }
            shift = if shift == 0.0 { 1e-3 } else { 2.0 * shift };
        }
    }

    fn try_factor(a: &SparseSym, shift: f64) -> Option<Self> {
        let n = a.dim();
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for i in 0..n {
            for (j, v) in a.row(i) {
                if j <= i {
                    cols.push(j);
                    vals.push(if j == i { v * (1.0 + shift) } else { v });
                }
            }
            row_ptr.push(cols.len());
        }
        for i in 0..n {
            let (lo, hi) = (row_ptr[i], row_ptr[i + 1]);
            for p in lo..hi {
                let j = cols[p];
                // s = Σ_k L[i][k] L[j][k] over the shared pattern, k < j
                let (jlo, jhi) = (row_ptr[j], row_ptr[j + 1]);
                let (mut a_, mut b_) = (lo, jlo);
                let mut s = 0.0;
                while a_ < p && b_ < jhi {
                    let (ca, cb) = (cols[a_], cols[b_]);
                    if cb >= j {
                        break;
                    }
                    match ca.cmp(&cb) {
                        std::cmp::Ordering::Less => a_ += 1,
                        std::cmp::Ordering::Greater => b_ += 1,
                        std::cmp::Ordering::Equal => {
                            s += vals[a_] * vals[b_];
                            a_ += 1;
                            b_ += 1;
                        }
                    }
                }
                if j == i {
                    let d = vals[p] - s;
                    if !(d > 0.0) {
                        return None;
                    }
                    vals[p] = d.sqrt();
                } else {
                    vals[p] = (vals[p] - s) / vals[jhi - 1];
                }
            }
        }
        Some(IncompleteCholesky {
            n,
            row_ptr,
            cols,
            vals,
            shift,
        })
    }
}

impl Preconditioner for IncompleteCholesky {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        // L y = r
        for i in 0..self.n {
            let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
            let mut s = r[i];
            for p in lo..hi - 1 {
                s -= self.vals[p] * z[self.cols[p]];
            }
            z[i] = s / self.vals[hi - 1];
        }
        // Lᵀ x = y
        for i in (0..self.n).rev() {
            let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
            z[i] /= self.vals[hi - 1];
            let zi = z[i];
            for p in lo..hi - 1 {
                z[self.cols[p]] -= self.vals[p] * zi;
            }
        }
    }
}

/// Reverse Cuthill–McKee ordering of the matrix graph. Returns `perm` with
/// `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &SparseSym) -> Vec<usize> {
    let n = a.dim();
    let degree: Vec<usize> = (0..n).map(|i| a.row(i).count() - 1).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);

    let bfs_last = |start: usize, visited: &[bool]| -> usize {
        let mut seen = visited.to_vec();
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        let mut last = start;
        while let Some(v) = queue.pop_front() {
            last = v;
            for (w, _) in a.row(v) {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        last
    };

    while order.len() < n {
        let seed = (0..n)
            .filter(|&i| !visited[i])
            .min_by_key(|&i| degree[i])
            .unwrap();
        // Two BFS sweeps give a pseudo-peripheral start.
        let start = bfs_last(bfs_last(seed, &visited), &visited);
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = a
                .row(v)
                .map(|(w, _)| w)
                .filter(|&w| !visited[w])
                .collect();
            next.sort_by_key(|&w| (degree[w], w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

/// Complete Cholesky factorization `P A Pᵀ = L Lᵀ` in envelope (skyline)
/// storage under an RCM ordering. Failure of a pivot certifies that `A` is
/// not positive definite.
#[derive(Debug, Clone)]
pub struct EnvelopeCholesky {
    n: usize,
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    data: Vec<f64>,
}

impl EnvelopeCholesky {
    pub fn new(a: &SparseSym) -> Result<Self> {
        let perm = reverse_cuthill_mckee(a);
        Self::with_ordering(a, perm)
    }

    /// Reuses an ordering computed for a matrix with the same pattern.
    pub fn with_ordering(a: &SparseSym, perm: Vec<usize>) -> Result<Self> {
        let n = a.dim();
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let first: Vec<usize> = (0..n)
            .map(|i| a.row(perm[i]).map(|(j, _)| inv[j]).min().unwrap_or(i).min(i))
            .collect();
        let mut start = Vec::with_capacity(n + 1);
        start.push(0);
        for i in 0..n {
            start.push(start[i] + (i - first[i] + 1));
        }
        let mut data = vec![0.0; start[n]];
        for i in 0..n {
            for (j, v) in a.row(perm[i]) {
                let jn = inv[j];
                if jn <= i {
                    data[start[i] + jn - first[i]] = v;
                }
            }
        }
        for i in 0..n {
            let fi = first[i];
            for j in fi..=i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let ri = start[i] - fi;
                let rj = start[j] - fj;
                let mut s = data[ri + j];
                for k in k0..j {
                    s -= data[ri + k] * data[rj + k];
                }
                if j < i {
                    data[ri + j] = s / data[start[j + 1] - 1];
                } else {
                    if !(s > 0.0) || !s.is_finite() {
                        return Err(Error::NotPositiveDefinite {
                            row: perm[i],
                            pivot: s,
                        });
                    }
                    data[ri + i] = s.sqrt();
                }
            }
        }
        Ok(EnvelopeCholesky {
            n,
            perm,
            first,
            start,
            data,
        })
    }

    pub fn ordering(&self) -> &[usize] {
        &self.perm
    }

    pub fn envelope_size(&self) -> usize {
        self.data.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        self.solve_into(b, &mut x);
        x
    }

    fn solve_into(&self, b: &[f64], out: &mut [f64]) {
        let n = self.n;
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let ri = self.start[i] - fi;
            let mut s = y[i];
            for k in fi..i {
                s -= self.data[ri + k] * y[k];
            }
            y[i] = s / self.data[ri + i];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let ri = self.start[i] - fi;
            y[i] /= self.data[ri + i];
            let yi = y[i];
            for k in fi..i {
                y[k] -= self.data[ri + k] * yi;
            }
        }
        for (new, &old) in self.perm.iter().enumerate() {
            out[old] = y[new];
        }
    }
}

impl Preconditioner for EnvelopeCholesky {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        self.solve_into(r, z);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreconditionerKind {
    Jacobi,
    IncompleteCholesky,
    #[default]
    Cholesky,
}

#[derive(Debug, Clone)]
pub struct PcgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub rel_residual: f64,
}

/// Preconditioned conjugate gradients for SPD `a`. Stops when
/// `‖b - A x‖ ≤ tol ‖b‖`; a non-positive curvature `pᵀAp` is reported as
/// [`Error::NotPositiveDefinite`].
pub fn pcg(
    a: &SparseSym,
    b: &[f64],
    x0: Option<&[f64]>,
    pre: &dyn Preconditioner,
    tol: f64,
    max_iter: usize,
) -> Result<PcgOutcome> {
    let n = a.dim();
    let bnorm = norm(b);
    let mut x = x0.map_or_else(|| vec![0.0; n], |v| v.to_vec());
    if bnorm == 0.0 {
        return Ok(PcgOutcome {
            x: vec![0.0; n],
            iterations: 0,
            rel_residual: 0.0,
        });
    }
    let mut it = 0;
    loop {
        // Restarted from the true residual whenever the recursive one has
        // drifted below the tolerance without the iterate following.
        let mut r = b.to_vec();
        axpy(-1.0, &a.mul(&x), &mut r);
        let mut rel = norm(&r) / bnorm;
        if rel <= tol {
            return Ok(PcgOutcome {
                x,
                iterations: it,
                rel_residual: rel,
            });
        }
        let mut z = vec![0.0; n];
        pre.apply(&r, &mut z);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let mut ap = vec![0.0; n];
        let start = it;
        while rel > tol {
            if it >= max_iter {
                return Err(Error::NoConvergence(format!(
                    "PCG stalled at relative residual {rel:e} after {it} iterations"
                )));
            }
            a.mul_into(&p, &mut ap);
            let curv = dot(&p, &ap);
            if !(curv > 0.0) {
                return Err(Error::NotPositiveDefinite {
                    row: it,
                    pivot: curv,
                });
            }
            let alpha = rz / curv;
            axpy(alpha, &p, &mut x);
            axpy(-alpha, &ap, &mut r);
            it += 1;
            if (it - start) % 50 == 0 {
                r = b.to_vec();
                axpy(-1.0, &a.mul(&x), &mut r);
            }
            rel = norm(&r) / bnorm;
            pre.apply(&r, &mut z);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            p.iter_mut().zip(&z).for_each(|(pi, zi)| *pi = zi + beta * *pi);
        }
    }
}

/// Eigenvalues of the symmetric tridiagonal matrix `(diag, off)` in
/// ascending order, by Sturm-sequence bisection.
pub fn tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Vec<f64> {
    let n = diag.len();
    if n == 0 {
        return Vec::new();
    }
    let radius = (0..n)
        .map(|i| {
            let l = if i > 0 { off[i - 1].abs() } else { 0.0 };
            let r = if i + 1 < n { off[i].abs() } else { 0.0 };
            (diag[i] - l - r, diag[i] + l + r)
        })
        .fold((f64::INFINITY, f64::NEG_INFINITY), |acc, (lo, hi)| {
            (acc.0.min(lo), acc.1.max(hi))
        });
    // Number of eigenvalues strictly below x.
    let count_below = |x: f64| -> usize {
        let mut count = 0;
        let mut q = diag[0] - x;
        if q < 0.0 {
            count += 1;
        }
        for i in 1..n {
            let denom = if q == 0.0 { f64::EPSILON * (off[i - 1].abs() + 1e-300) } else { q };
            q = diag[i] - x - off[i - 1] * off[i - 1] / denom;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    };
    let scale = radius.0.abs().max(radius.1.abs()).max(f64::MIN_POSITIVE);
    (0..n)
        .map(|k| {
            let (mut lo, mut hi) = (radius.0, radius.1);
            while hi - lo > 4.0 * f64::EPSILON * scale {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if count_below(mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

/// Ritz values of `steps` Lanczos iterations on `a` from `start`, with full
/// reorthogonalization. Stops early on an invariant subspace.
pub fn lanczos_ritz_values(a: &SparseSym, start: &[f64], steps: usize) -> Vec<f64> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(steps);
    let mut alphas = Vec::with_capacity(steps);
    let mut betas = Vec::with_capacity(steps);
    let n0 = norm(start);
    if n0 == 0.0 {
        return Vec::new();
    }
    let mut q: Vec<f64> = start.iter().map(|x| x / n0).collect();
    for _ in 0..steps.min(a.dim()) {
        let mut w = a.mul(&q);
        let alpha = dot(&q, &w);
        basis.push(q);
        for _ in 0..2 {
            for v in &basis {
                let c = dot(v, &w);
                axpy(-c, v, &mut w);
            }
        }
        alphas.push(alpha);
        let beta = norm(&w);
        if beta <= 1e-14 * alpha.abs().max(1.0) {
            break;
        }
        betas.push(beta);
        q = w.iter().map(|x| x / beta).collect();
    }
    betas.truncate(alphas.len().saturating_sub(1));
    tridiagonal_eigenvalues(&alphas, &betas)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplace_1d(n: usize) -> SparseSym {
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            a[i][i] = 2.0;
            if i + 1 < n {
                a[i][i + 1] = -1.0;
                a[i + 1][i] = -1.0;
            }
        }
        SparseSym::from_dense(&a)
    }

    fn grid_laplace(nx: usize) -> SparseSym {
        let n = nx * nx;
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..nx {
            for j in 0..nx {
                let k = i * nx + j;
                a[k][k] = 4.0;
                if i + 1 < nx {
                    a[k][k + nx] = -1.0;
                    a[k + nx][k] = -1.0;
                }
                if j + 1 < nx {
                    a[k][k + 1] = -1.0;
                    a[k + 1][k] = -1.0;
                }
            }
        }
        SparseSym::from_dense(&a)
    }

    #[test]
    fn cholesky_solves_exactly() {
        let a = grid_laplace(9);
        let x: Vec<f64> = (0..a.dim()).map(|i| (i as f64 * 0.37).sin()).collect();
        let b = a.mul(&x);
        let f = EnvelopeCholesky::new(&a).unwrap();
        let y = f.solve(&b);
        let err = y.iter().zip(&x).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn cholesky_detects_indefinite() {
        let a = laplace_1d(20);
        // Smallest eigenvalue of tridiag(-1, 2, -1) is 4 sin²(π/42) ≈ 0.0224.
        let shifted = a.combine(1.0, &SparseSym::from_dense(&identity(20)), -0.03);
        assert!(matches!(
            EnvelopeCholesky::new(&shifted),
            Err(Error::NotPositiveDefinite { .. })
        ));
        let shifted = a.combine(1.0, &SparseSym::from_dense(&identity(20)), -0.02);
        assert!(EnvelopeCholesky::new(&shifted).is_ok());
    }

    fn identity(n: usize) -> Vec<Vec<f64>> {
        (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect()
    }

    #[test]
    fn pcg_with_every_preconditioner() {
        let a = grid_laplace(12);
        let b: Vec<f64> = (0..a.dim()).map(|i| 1.0 + (i % 7) as f64).collect();
        let jac = Jacobi::new(&a).unwrap();
        let ic = IncompleteCholesky::new(&a);
        let ch = EnvelopeCholesky::new(&a).unwrap();
        let mut iters = Vec::new();
        for pre in [&jac as &dyn Preconditioner, &ic, &ch] {
            let out = pcg(&a, &b, None, pre, 1e-12, 1000).unwrap();
            assert!(out.rel_residual <= 1e-12);
            iters.push(out.iterations);
        }
        assert!(iters[1] < iters[0]);
        assert!(iters[2] <= 2);
    }

    #[test]
    fn rcm_is_a_permutation_and_narrows_band() {
        let a = grid_laplace(10);
        let mut p = reverse_cuthill_mckee(&a);
        p.sort_unstable();
        assert_eq!(p, (0..100).collect::<Vec<_>>());
    }

    #[test]
    fn tridiagonal_spectrum() {
        let n = 12;
        let ev = tridiagonal_eigenvalues(&vec![2.0; n], &vec![-1.0; n - 1]);
        for (k, &e) in ev.iter().enumerate() {
            let exact = 4.0
                * (((k + 1) as f64) * std::f64::consts::PI / (2.0 * (n + 1) as f64))
                    .sin()
                    .powi(2);
            assert!((e - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn lanczos_extremes() {
        let a = laplace_1d(30);
        let ritz = lanczos_ritz_values(&a, &vec![1.0; 30], 30);
        let exact = 4.0 * (std::f64::consts::PI / 62.0).sin().powi(2);
        assert!((ritz[0] - exact).abs() < 1e-8);
        assert!(a.is_symmetric());
    }
}
