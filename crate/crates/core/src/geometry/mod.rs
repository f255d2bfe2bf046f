//! Planar domains `C ∪ B` inside an ambient cone `X`, the Hardy-type weight,
//! and structured triangulations graded geometrically in `r`.

mod domain;
mod mesh;
mod potential;

pub use domain::{build_domain, Bulge, DomainSpec};
pub use mesh::{generate_mesh, refine_mesh, BulgeBand, Grading, Mesh, Region, Vertex};
pub use potential::{PotentialSpec, WBump};
