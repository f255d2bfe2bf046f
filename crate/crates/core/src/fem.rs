//! P1 finite elements for the pair of quadratic forms `∫|∇u|²` and
//! `∫V|u|²`, plus the cutoff algebra used to split energies around a bulge.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::geometry::{Mesh, PotentialSpec, Region, Vertex};
use crate::parallel::Parallelism;

pub use crate::linalg::SparseSym;

/// Interior 3-point rule, exact for quadratics: barycentric points
/// `(2/3, 1/6, 1/6)` and permutations, weight `1/3` each.
const QUAD3: [([f64; 3], f64); 3] = [
    ([2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0], 1.0 / 3.0),
    ([1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0], 1.0 / 3.0),
    ([1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0], 1.0 / 3.0),
];

/// Six-point symmetric rule exact for polynomials of degree 4.
const QUAD6: [([f64; 3], f64); 6] = {
    const A1: f64 = 0.445_948_490_915_965;
    const B1: f64 = 0.108_103_018_168_070;
    const W1: f64 = 0.223_381_589_678_011;
    const A2: f64 = 0.091_576_213_509_771;
    const B2: f64 = 0.816_847_572_980_459;
    const W2: f64 = 0.109_951_743_655_322;
    [
        ([A1, A1, B1], W1),
        ([A1, B1, A1], W1),
        ([B1, A1, A1], W1),
        ([A2, A2, B2], W2),
        ([A2, B2, A2], W2),
        ([B2, A2, A2], W2),
    ]
};

/// Area and the constant gradients of the three barycentric functions.
fn geometry(p: &[Vertex; 3]) -> (f64, [[f64; 2]; 3]) {
    let area = 0.5 * ((p[1].x - p[0].x) * (p[2].y - p[0].y) - (p[2].x - p[0].x) * (p[1].y - p[0].y));
    let inv = 1.0 / (2.0 * area);
    let grads = [
        [(p[1].y - p[2].y) * inv, (p[2].x - p[1].x) * inv],
        [(p[2].y - p[0].y) * inv, (p[0].x - p[2].x) * inv],
        [(p[0].y - p[1].y) * inv, (p[1].x - p[0].x) * inv],
    ];
    (area, grads)
}

fn corners(mesh: &Mesh, t: usize) -> [Vertex; 3] {
    let [a, b, c] = mesh.triangles[t];
    [mesh.vertices[a], mesh.vertices[b], mesh.vertices[c]]
}

pub fn element_stiffness(p: &[Vertex; 3]) -> Result<[[f64; 3]; 3]> {
    let (area, g) = geometry(p);
    let scale = p.iter().map(|v| v.x * v.x + v.y * v.y).fold(0.0, f64::max);
    if !(area > 1e-14 * scale.max(f64::MIN_POSITIVE)) {
        return Err(Error::DegenerateMesh(format!("element area {area:e}")));
    }
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = area * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
        }
    }
    Ok(k)
}

pub fn element_weighted_mass(p: &[Vertex; 3], pot: &PotentialSpec) -> Result<[[f64; 3]; 3]> {
    let (area, _) = geometry(p);
    let mut m = [[0.0; 3]; 3];
    for (bary, w) in QUAD3 {
        let x = bary[0] * p[0].x + bary[1] * p[1].x + bary[2] * p[2].x;
        let y = bary[0] * p[0].y + bary[1] * p[1].y + bary[2] * p[2].y;
        let v = pot.eval(x, y);
        if v < 0.0 {
            return Err(Error::PotentialSign { x, y, value: v });
        }
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += area * w * v * bary[i] * bary[j];
            }
        }
    }
    Ok(m)
}

/// Numbering of the unknowns: which vertices carry a degree of freedom.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    pub dof_of_vertex: Vec<Option<usize>>,
    pub vertex_of_dof: Vec<usize>,
}

impl DofMap {
    /// Dirichlet vertices eliminated.
    pub fn free(mesh: &Mesh) -> Self {
        Self::from_mask(&mesh.dirichlet)
    }

    /// Every vertex is an unknown (no boundary conditions).
    pub fn all(mesh: &Mesh) -> Self {
        Self::from_mask(&vec![false; mesh.n_vertices()])
    }

    fn from_mask(fixed: &[bool]) -> Self {
        let mut dof_of_vertex = vec![None; fixed.len()];
        let mut vertex_of_dof = Vec::new();
        for (v, &d) in fixed.iter().enumerate() {
            if !d {
                dof_of_vertex[v] = Some(vertex_of_dof.len());
                vertex_of_dof.push(v);
            }
        }
        DofMap {
            dof_of_vertex,
            vertex_of_dof,
        }
    }

    pub fn len(&self) -> usize {
        self.vertex_of_dof.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertex_of_dof.is_empty()
    }

    /// Vertex values to unknowns (values on eliminated vertices are dropped).
    pub fn restrict(&self, vertex_values: &[f64]) -> Vec<f64> {
        self.vertex_of_dof.iter().map(|&v| vertex_values[v]).collect()
    }

    /// Unknowns to vertex values, zero on eliminated vertices.
    pub fn extend(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dof_of_vertex.len()];
        for (k, &v) in self.vertex_of_dof.iter().enumerate() {
            out[v] = u[k];
        }
        out
    }

    fn pattern(&self, mesh: &Mesh) -> SparseSym {
        let mut neighbors = vec![Vec::new(); self.len()];
        for tri in &mesh.triangles {
            for &a in tri {
                if let Some(i) = self.dof_of_vertex[a] {
                    neighbors[i].extend(tri.iter().filter_map(|&b| self.dof_of_vertex[b]));
                }
            }
        }
        SparseSym::from_pattern(self.len(), &neighbors)
    }
}

/// Element matrices are computed independently (in parallel when asked) and
/// scattered sequentially in element order, so the result does not depend
/// on the thread count.
fn scatter(
    mesh: &Mesh,
    dofs: &DofMap,
    elements: Vec<[[f64; 3]; 3]>,
) -> SparseSym {
    let mut a = dofs.pattern(mesh);
    for (tri, e) in mesh.triangles.iter().zip(&elements) {
        for i in 0..3 {
            let Some(gi) = dofs.dof_of_vertex[tri[i]] else { continue };
            for j in i..3 {
                let Some(gj) = dofs.dof_of_vertex[tri[j]] else { continue };
                a.add_sym(gi, gj, e[i][j]);
            }
        }
    }
    a
}

pub fn assemble_stiffness_with(mesh: &Mesh, dofs: &DofMap, par: Parallelism) -> Result<SparseSym> {
    let elements = par
        .map_indexed(mesh.n_triangles(), |t| element_stiffness(&corners(mesh, t)))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(scatter(mesh, dofs, elements))
}

pub fn assemble_weighted_mass_with(
    mesh: &Mesh,
    dofs: &DofMap,
    pot: &PotentialSpec,
    par: Parallelism,
) -> Result<SparseSym> {
    let elements = par
        .map_indexed(mesh.n_triangles(), |t| element_weighted_mass(&corners(mesh, t), pot))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(scatter(mesh, dofs, elements))
}

/// Stiffness on the free (non-Dirichlet) unknowns.
pub fn assemble_stiffness(mesh: &Mesh) -> Result<SparseSym> {
    assemble_stiffness_with(mesh, &DofMap::free(mesh), Parallelism::default())
}

/// `V`-weighted mass on the free unknowns.
pub fn assemble_weighted_mass(mesh: &Mesh, pot: &PotentialSpec) -> Result<SparseSym> {
    assemble_weighted_mass_with(mesh, &DofMap::free(mesh), pot, Parallelism::default())
}

/// The discrete pencil `(K, M_V)` on the free unknowns.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    pub stiffness: SparseSym,
    pub mass: SparseSym,
    pub dofs: DofMap,
    /// Points of the rule used for `M_V`.
    pub quadrature_points: usize,
}

impl AssembledSystem {
    pub fn assemble(mesh: &Mesh, pot: &PotentialSpec, par: Parallelism) -> Result<Self> {
        let dofs = DofMap::free(mesh);
        if dofs.is_empty() {
            return Err(Error::DegenerateMesh("mesh has no free vertices".into()));
        }
        let stiffness = assemble_stiffness_with(mesh, &dofs, par)?;
        let mass = assemble_weighted_mass_with(mesh, &dofs, pot, par)?;
        if mass.diagonal().iter().all(|&d| d <= 0.0) {
            return Err(Error::VDegenerate(0.0));
        }
        Ok(AssembledSystem {
            stiffness,
            mass,
            dofs,
            quadrature_points: QUAD3.len(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dofs.len()
    }
}

/// `uᵀKu / uᵀM_Vu` for a vector of free unknowns.
pub fn rayleigh_quotient(sys: &AssembledSystem, u: &[f64]) -> Result<f64> {
    let den = sys.mass.quad(u);
    if !(den > 1e-300) {
        return Err(Error::VDegenerate(den));
    }
    Ok(sys.stiffness.quad(u) / den)
}

/// Per-vertex cutoff `χ ∈ [0, 1]`: one on the bulge closure, decaying
/// linearly with graph distance and zero beyond `collar` edges from it.
#[derive(Debug, Clone, PartialEq)]
pub struct CutoffField {
    pub values: Vec<f64>,
    pub collar: usize,
}

impl CutoffField {
    pub fn around_bulge(mesh: &Mesh, collar: usize) -> Self {
        let seeds = mesh.bulge_vertices();
        let mut dist = vec![usize::MAX; mesh.n_vertices()];
        let mut queue = VecDeque::new();
        for (v, &s) in seeds.iter().enumerate() {
            if s {
                dist[v] = 0;
                queue.push_back(v);
            }
        }
        let adjacency = vertex_adjacency(mesh);
        while let Some(v) = queue.pop_front() {
            for &w in &adjacency[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        let values = dist
            .iter()
            .map(|&d| {
                if d == usize::MAX {
                    0.0
                } else {
                    (1.0 - d as f64 / (collar + 1) as f64).max(0.0)
                }
            })
            .collect();
        CutoffField { values, collar }
    }

    pub fn constant(n_vertices: usize, value: f64) -> Self {
        CutoffField {
            values: vec![value; n_vertices],
            collar: usize::MAX,
        }
    }

    /// `0 ≤ χ ≤ 1` everywhere and `χ = 1` on every bulge triangle.
    pub fn check(&self, mesh: &Mesh) -> Result<()> {
        if self.values.len() != mesh.n_vertices() {
            return Err(Error::CutoffSupport(format!(
                "{} values for {} vertices",
                self.values.len(),
                mesh.n_vertices()
            )));
        }
        if let Some((v, x)) = self
            .values
            .iter()
            .enumerate()
            .find(|(_, &x)| !(0.0..=1.0).contains(&x))
        {
            return Err(Error::CutoffSupport(format!("chi = {x} at vertex {v}")));
        }
        for (v, &b) in mesh.bulge_vertices().iter().enumerate() {
            if b && self.values[v] != 1.0 {
                return Err(Error::CutoffSupport(format!(
                    "chi = {} on bulge vertex {v}",
                    self.values[v]
                )));
            }
        }
        Ok(())
    }
}

fn vertex_adjacency(mesh: &Mesh) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); mesh.n_vertices()];
    for tri in &mesh.triangles {
        for &a in tri {
            for &b in tri {
                if a != b {
                    adj[a].push(b);
                }
            }
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    adj
}

/// Both sides of the energy splitting
/// `∫|∇u|² - ∫|∇((1-χ)u)|² = -∫|∇χ|²u² + 2∫(1-χ)u∇χ·∇u + ∫χ(2-χ)|∇u|²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffSplit {
    pub lhs: f64,
    pub rhs_terms: [f64; 3],
}

impl CutoffSplit {
    pub fn rhs(&self) -> f64 {
        self.rhs_terms.iter().sum()
    }

    pub fn defect(&self) -> f64 {
        (self.lhs - self.rhs()).abs()
    }
}

/// Evaluates the splitting for vertex values `u` and cutoff `chi` with the
/// degree-4 rule on every element; `∇((1-χ)u)` is expanded as
/// `(1-χ)∇u - u∇χ` pointwise.
pub fn cutoff_split_terms(mesh: &Mesh, u: &[f64], chi: &CutoffField) -> CutoffSplit {
    let mut lhs = 0.0;
    let mut rhs = [0.0; 3];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let (area, g) = geometry(&corners(mesh, t));
        let uv = [u[tri[0]], u[tri[1]], u[tri[2]]];
        let cv = [chi.values[tri[0]], chi.values[tri[1]], chi.values[tri[2]]];
        let grad = |vals: &[f64; 3]| -> [f64; 2] {
            [
                vals[0] * g[0][0] + vals[1] * g[1][0] + vals[2] * g[2][0],
                vals[0] * g[0][1] + vals[1] * g[1][1] + vals[2] * g[2][1],
            ]
        };
        let gu = grad(&uv);
        let gc = grad(&cv);
        let gu2 = gu[0] * gu[0] + gu[1] * gu[1];
        let gc2 = gc[0] * gc[0] + gc[1] * gc[1];
        let gcu = gc[0] * gu[0] + gc[1] * gu[1];
        for (bary, w) in QUAD6 {
            let wt = area * w;
            let uq = bary[0] * uv[0] + bary[1] * uv[1] + bary[2] * uv[2];
            let cq = bary[0] * cv[0] + bary[1] * cv[1] + bary[2] * cv[2];
            let gx = (1.0 - cq) * gu[0] - uq * gc[0];
            let gy = (1.0 - cq) * gu[1] - uq * gc[1];
            lhs += wt * (gu2 - (gx * gx + gy * gy));
            rhs[0] -= wt * gc2 * uq * uq;
            rhs[1] += wt * 2.0 * (1.0 - cq) * uq * gcu;
            rhs[2] += wt * cq * (2.0 - cq) * gu2;
        }
    }
    CutoffSplit {
        lhs,
        rhs_terms: rhs,
    }
}

/// `(1 - χ) u` vertexwise; vanishes on every vertex of a bulge triangle, so it
/// is a valid trial function on the unperturbed cone.
pub fn restrict_outside_cutoff(mesh: &Mesh, u: &[f64], chi: &CutoffField) -> Result<Vec<f64>> {
    chi.check(mesh)?;
    Ok(u.iter()
        .zip(&chi.values)
        .map(|(x, c)| (1.0 - c) * x)
        .collect())
}

/// `(r, w V u²)` at every point of the 3-point rule, for vertex values `u`.
/// Summing the second components gives `uᵀ M_V u` exactly.
pub fn v_mass_samples(mesh: &Mesh, pot: &PotentialSpec, u: &[f64]) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::with_capacity(3 * mesh.n_triangles());
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let p = corners(mesh, t);
        let (area, _) = geometry(&p);
        for (bary, w) in QUAD3 {
            let x = bary[0] * p[0].x + bary[1] * p[1].x + bary[2] * p[2].x;
            let y = bary[0] * p[0].y + bary[1] * p[1].y + bary[2] * p[2].y;
            let v = pot.eval(x, y);
            if v < 0.0 {
                return Err(Error::PotentialSign { x, y, value: v });
            }
            let uq = bary[0] * u[tri[0]] + bary[1] * u[tri[1]] + bary[2] * u[tri[2]];
            out.push((x.hypot(y), area * w * v * uq * uq));
        }
    }
    Ok(out)
}

/// Number of triangles carrying each region tag.
pub fn region_counts(mesh: &Mesh) -> (usize, usize) {
    let bulge = mesh.regions.iter().filter(|&&r| r == Region::Bulge).count();
    (mesh.n_triangles() - bulge, bulge)
}
