use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{build_domain, DomainSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    pub x: f64,
    pub y: f64,
    pub r: f64,
    pub phi: f64,
}

impl Vertex {
    pub fn polar(r: f64, phi: f64) -> Self {
        Vertex {
            x: r * phi.cos(),
            y: r * phi.sin(),
            r,
            phi,
        }
    }

    pub fn cartesian(x: f64, y: f64) -> Self {
        let mut phi = y.atan2(x);
        if phi < -1e-14 {
            phi += 2.0 * PI;
        }
        Vertex {
            x,
            y,
            r: x.hypot(y),
            phi: phi.max(0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Cone,
    Bulge,
}

impl Region {
    pub fn as_str(&self) -> &'static str {
        match self {
            Region::Cone => "cone",
            Region::Bulge => "bulge",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grading {
    pub n_radial: usize,
    pub n_angular: usize,
    /// `r_{i+1} / r_i` of the generated layers.
    pub ratio: f64,
    pub refinements: usize,
}

/// A bulge as realized on the grid: its band is snapped to radial layers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BulgeBand {
    pub level_a: usize,
    pub level_b: usize,
    pub r_a: f64,
    pub r_b: f64,
    pub columns: usize,
    pub extra_angle: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<Vertex>,
    pub triangles: Vec<[usize; 3]>,
    pub dirichlet: Vec<bool>,
    pub regions: Vec<Region>,
    pub grading: Option<Grading>,
    /// Radii of the generated layers (empty for meshes built from parts).
    pub layer_radii: Vec<f64>,
    pub bands: Vec<BulgeBand>,
    /// Opening of the unperturbed cone, when known.
    pub theta: Option<f64>,
}

fn signed_area(p: &Vertex, q: &Vertex, s: &Vertex) -> f64 {
    0.5 * ((q.x - p.x) * (s.y - p.y) - (s.x - p.x) * (q.y - p.y))
}

/// Vertices on edges owned by exactly one triangle.
fn boundary_mask(n_vertices: usize, triangles: &[[usize; 3]]) -> Vec<bool> {
    let mut count: HashMap<(usize, usize), u32> = HashMap::new();
    for t in triangles {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            *count.entry((a.min(b), a.max(b))).or_default() += 1;
        }
    }
    let mut mask = vec![false; n_vertices];
    for ((a, b), c) in count {
        if c == 1 {
            mask[a] = true;
            mask[b] = true;
        }
    }
    mask
}

impl Mesh {
    /// Builds a mesh from raw parts; the Dirichlet mask is the polygon boundary.
    pub fn from_parts(
        vertices: Vec<Vertex>,
        triangles: Vec<[usize; 3]>,
        regions: Vec<Region>,
    ) -> Result<Self> {
        if regions.len() != triangles.len() {
            return Err(Error::InvalidInput(
                "one region tag per triangle required".into(),
            ));
        }
        if let Some(t) = triangles.iter().flatten().find(|&&i| i >= vertices.len()) {
            return Err(Error::InvalidInput(format!("vertex index {t} out of range")));
        }
        let mesh = Mesh {
            dirichlet: boundary_mask(vertices.len(), &triangles),
            vertices,
            triangles,
            regions,
            grading: None,
            layer_radii: Vec::new(),
            bands: Vec::new(),
            theta: None,
        };
        mesh.check_orientation()?;
        Ok(mesh)
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        signed_area(&self.vertices[a], &self.vertices[b], &self.vertices[c])
    }

    pub fn min_signed_area(&self) -> f64 {
        (0..self.n_triangles())
            .map(|t| self.signed_area(t))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn area(&self) -> f64 {
        (0..self.n_triangles()).map(|t| self.signed_area(t)).sum()
    }

    fn check_orientation(&self) -> Result<()> {
        for t in 0..self.n_triangles() {
            let [a, b, c] = self.triangles[t];
            let scale = [a, b, c]
                .iter()
                .map(|&i| {
                    let v = &self.vertices[i];
                    v.x * v.x + v.y * v.y
                })
                .fold(0.0, f64::max)
                .max(f64::MIN_POSITIVE);
            if self.signed_area(t) <= 1e-14 * scale {
                return Err(Error::DegenerateMesh(format!(
                    "triangle {t} has signed area {:e}",
                    self.signed_area(t)
                )));
            }
        }
        Ok(())
    }

    /// Vertices touched by a bulge-tagged triangle.
    pub fn bulge_vertices(&self) -> Vec<bool> {
        let mut mark = vec![false; self.n_vertices()];
        for (t, tri) in self.triangles.iter().enumerate() {
            if self.regions[t] == Region::Bulge {
                for &v in tri {
                    mark[v] = true;
                }
            }
        }
        mark
    }

    /// Vertices on the ray whose angle is closest to `phi`, sorted by radius.
    pub fn ray_vertices(&self, phi: f64) -> Vec<usize> {
        let best = self
            .vertices
            .iter()
            .map(|v| (v.phi - phi).abs())
            .fold(f64::INFINITY, f64::min);
        let mut ids: Vec<usize> = (0..self.n_vertices())
            .filter(|&i| ((self.vertices[i].phi - phi).abs() - best).abs() <= 1e-9)
            .collect();
        ids.sort_by(|&i, &j| self.vertices[i].r.total_cmp(&self.vertices[j].r));
        ids
    }

    /// Plain-text dump: `n_vertices n_triangles`, then `x y r phi dirichlet`
    /// per vertex, then `i j k tag` per triangle.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{} {}", self.n_vertices(), self.n_triangles()).unwrap();
        for (v, &d) in self.vertices.iter().zip(&self.dirichlet) {
            writeln!(
                out,
                "{:.17e} {:.17e} {:.17e} {:.17e} {}",
                v.x, v.y, v.r, v.phi, d as u8
            )
            .unwrap();
        }
        for (t, reg) in self.triangles.iter().zip(&self.regions) {
            writeln!(out, "{} {} {} {}", t[0], t[1], t[2], reg.as_str()).unwrap();
        }
        out
    }

    /// Inverse of [`Mesh::to_text`] (grading metadata is not stored).
    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |what: &str| Error::InvalidInput(format!("malformed mesh text: {what}"));
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| bad("missing header"))?;
        let counts: Vec<usize> = header
            .split_whitespace()
            .map(|s| s.parse().map_err(|_| bad("header")))
            .collect::<Result<_>>()?;
        if counts.len() != 2 {
            return Err(bad("header"));
        }
        let mut vertices = Vec::with_capacity(counts[0]);
        let mut dirichlet = Vec::with_capacity(counts[0]);
        for _ in 0..counts[0] {
            let f: Vec<&str> = lines
                .next()
                .ok_or_else(|| bad("vertex"))?
                .split_whitespace()
                .collect();
            if f.len() != 5 {
                return Err(bad("vertex line"));
            }
            let p = |s: &str| s.parse::<f64>().map_err(|_| bad("vertex value"));
            vertices.push(Vertex {
                x: p(f[0])?,
                y: p(f[1])?,
                r: p(f[2])?,
                phi: p(f[3])?,
            });
            dirichlet.push(f[4] == "1");
        }
        let mut triangles = Vec::with_capacity(counts[1]);
        let mut regions = Vec::with_capacity(counts[1]);
        for _ in 0..counts[1] {
            let f: Vec<&str> = lines
                .next()
                .ok_or_else(|| bad("triangle"))?
                .split_whitespace()
                .collect();
            if f.len() != 4 {
                return Err(bad("triangle line"));
            }
            let p = |s: &str| s.parse::<usize>().map_err(|_| bad("triangle index"));
            triangles.push([p(f[0])?, p(f[1])?, p(f[2])?]);
            regions.push(match f[3] {
                "cone" => Region::Cone,
                "bulge" => Region::Bulge,
                _ => return Err(bad("region tag")),
            });
        }
        let mut mesh = Mesh::from_parts(vertices, triangles, regions)?;
        mesh.dirichlet = dirichlet;
        Ok(mesh)
    }
}

/// Snaps a bulge's band to grid levels, keeping at least one layer and
/// staying off the truncation boundary when the grid allows it.
fn snap_band(level: f64, n_radial: usize) -> usize {
    (level.round().max(1.0) as usize).min(n_radial.saturating_sub(1).max(1))
}

/// Structured triangulation of the log-polar tensor grid
/// `s = log(r / r_min) ∈ [0, L]`, `φ ∈ [0, theta]`, with extra angular
/// columns on each bulge band. Cone vertices come first, numbered
/// `i * (n_angular + 1) + j`, so the pure-cone mesh of the same resolution
/// is a prefix sub-complex of any perturbed mesh.
pub fn generate_mesh(domain: &DomainSpec, n_radial: usize, n_angular: usize) -> Result<Mesh> {
    if n_radial < 2 || n_angular < 2 {
        return Err(Error::DegenerateMesh(format!(
            "resolution ({n_radial}, {n_angular}) below (2, 2)"
        )));
    }
    let domain = build_domain(domain.clone())?;
    let length = domain.length();
    let hs = length / n_radial as f64;
    let hphi = domain.theta / n_angular as f64;
    let layer_radii: Vec<f64> = (0..=n_radial)
        .map(|i| {
            if i == n_radial {
                domain.r_max
            } else {
                domain.r_min * (i as f64 * hs).exp()
            }
        })
        .collect();

    let stride = n_angular + 1;
    let mut vertices = Vec::with_capacity((n_radial + 1) * stride);
    for &r in &layer_radii {
        for j in 0..=n_angular {
            let phi = if j == n_angular {
                domain.theta
            } else {
                j as f64 * hphi
            };
            vertices.push(Vertex::polar(r, phi));
        }
    }
    let cone = |i: usize, j: usize| i * stride + j;
    let mut triangles = Vec::new();
    let mut regions = Vec::new();
    for i in 0..n_radial {
        for j in 0..n_angular {
            let (a, b, c, d) = (cone(i, j), cone(i + 1, j), cone(i + 1, j + 1), cone(i, j + 1));
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
            regions.extend([Region::Cone, Region::Cone]);
        }
    }

    // Snap bands, then merge bands that now touch or overlap.
    let mut bands: Vec<BulgeBand> = Vec::new();
    for b in &domain.bulges {
        let la = snap_band((b.r_a / domain.r_min).ln() / hs, n_radial);
        let mut lb = snap_band((b.r_b / domain.r_min).ln() / hs, n_radial);
        if lb <= la {
            lb = la + 1;
        }
        if lb > n_radial {
            return Err(Error::DegenerateMesh(
                "bulge band does not fit on the radial grid".into(),
            ));
        }
        match bands.last_mut() {
            Some(last) if la <= last.level_b => {
                last.level_b = last.level_b.max(lb);
                last.extra_angle = last.extra_angle.max(b.extra_angle);
            }
            _ => bands.push(BulgeBand {
                level_a: la,
                level_b: lb,
                r_a: 0.0,
                r_b: 0.0,
                columns: 0,
                extra_angle: b.extra_angle,
            }),
        }
    }
    for band in &mut bands {
        band.r_a = layer_radii[band.level_a];
        band.r_b = layer_radii[band.level_b];
        band.columns = ((band.extra_angle / hphi).round() as usize).max(1);
        let spacing = band.extra_angle / band.columns as f64;
        let base = vertices.len();
        let ncol = band.columns;
        for l in band.level_a..=band.level_b {
            for k in 1..=ncol {
                let phi = if k == ncol {
                    domain.theta + band.extra_angle
                } else {
                    domain.theta + k as f64 * spacing
                };
                vertices.push(Vertex::polar(layer_radii[l], phi));
            }
        }
        let node = |l: usize, k: usize| {
            if k == 0 {
                cone(l, n_angular)
            } else {
                base + (l - band.level_a) * ncol + (k - 1)
            }
        };
        for l in band.level_a..band.level_b {
            for k in 0..ncol {
                let (a, b, c, d) = (node(l, k), node(l + 1, k), node(l + 1, k + 1), node(l, k + 1));
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
                regions.extend([Region::Bulge, Region::Bulge]);
            }
        }
    }

    let mut mesh = Mesh::from_parts(vertices, triangles, regions)?;
    mesh.grading = Some(Grading {
        n_radial,
        n_angular,
        ratio: hs.exp(),
        refinements: 0,
    });
    mesh.layer_radii = layer_radii;
    mesh.bands = bands;
    mesh.theta = Some(domain.theta);
    Ok(mesh)
}

/// Uniform red refinement: every triangle splits into four through its
/// edge midpoints. Parent vertices keep their indices and coordinates.
pub fn refine_mesh(mesh: &Mesh) -> Mesh {
    let mut vertices = mesh.vertices.clone();
    let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
    let mut mid = |a: usize, b: usize, vertices: &mut Vec<Vertex>| -> usize {
        *midpoint.entry((a.min(b), a.max(b))).or_insert_with(|| {
            let (p, q) = (vertices[a], vertices[b]);
            vertices.push(Vertex::cartesian(0.5 * (p.x + q.x), 0.5 * (p.y + q.y)));
            vertices.len() - 1
        })
    };
    let mut triangles = Vec::with_capacity(4 * mesh.n_triangles());
    let mut regions = Vec::with_capacity(4 * mesh.n_triangles());
    for (t, &[a, b, c]) in mesh.triangles.iter().enumerate() {
        let ab = mid(a, b, &mut vertices);
        let bc = mid(b, c, &mut vertices);
        let ca = mid(c, a, &mut vertices);
        triangles.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
        regions.extend([mesh.regions[t]; 4]);
    }
    let dirichlet = boundary_mask(vertices.len(), &triangles);
    Mesh {
        vertices,
        triangles,
        dirichlet,
        regions,
        grading: mesh.grading.map(|g| Grading {
            refinements: g.refinements + 1,
            ..g
        }),
        layer_radii: mesh.layer_radii.clone(),
        bands: mesh.bands.clone(),
        theta: mesh.theta,
    }
}
