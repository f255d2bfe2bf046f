use std::f64::consts::PI;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use conelab::fem::AssembledSystem;
use conelab::geometry::{build_domain, generate_mesh, Bulge, DomainSpec, PotentialSpec};
use conelab::Parallelism;

fn modes() -> Vec<(&'static str, Parallelism)> {
    let mut v = vec![("sequential", Parallelism::Sequential)];
    #[cfg(feature = "rayon")]
    v.push(("rayon", Parallelism::Rayon));
    v
}

fn assembly(c: &mut Criterion) {
    let d = build_domain(
        DomainSpec::sector(PI / 2.0, PI, 1e-4, 1e4).with_bulge(Bulge {
            r_a: 0.5,
            r_b: 2.0,
            extra_angle: PI / 4.0,
        }),
    )
    .unwrap();
    let pot = PotentialSpec::hardy();
    let mut g = c.benchmark_group("assemble");
    for n_radial in [128, 512] {
        let mesh = generate_mesh(&d, n_radial, 16).unwrap();
        for (name, par) in modes() {
            g.bench_with_input(BenchmarkId::new(name, mesh.n_triangles()), &mesh, |b, m| {
                b.iter(|| AssembledSystem::assemble(m, &pot, par).unwrap())
            });
        }
    }
    g.finish();
}

criterion_group!(benches, assembly);
criterion_main!(benches);
