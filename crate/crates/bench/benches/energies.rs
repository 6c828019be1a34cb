use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use subfrac_core::functionals::{bump, gagliardo_energy, phi_energy};
use subfrac_core::orlicz::{phi_tilde, PhiTildeArgument, PHI_TILDE_S_GRID};
use subfrac_core::quadrature::sphere_integral;
use subfrac_core::{HomogeneousGauge, OrliczFunction, QuadratureSpec};

fn gauge(g: &str) -> HomogeneousGauge {
    let k = if g == "h1" { "koranyi" } else { "euclidean" };
    HomogeneousGauge::from_ids(g, k).unwrap()
}

fn gagliardo(c: &mut Criterion) {
    let mut group = c.benchmark_group("gagliardo_energy");
    group.sample_size(10);
    let spec = QuadratureSpec::with_samples(1 << 14, 0);
    for g in ["r1", "r2", "h1"] {
        let ng = gauge(g);
        let u = bump(&ng, 1.0).unwrap();
        for phi in [OrliczFunction::power(2.0).unwrap(), OrliczFunction::power_log(2.0).unwrap()] {
            for s in [0.05, 0.5, 0.95] {
                let id = BenchmarkId::new(format!("{g}/{}", phi.id()), s);
                group.bench_with_input(id, &s, |b, &s| {
                    b.iter(|| gagliardo_energy(&u, &phi, black_box(s), &ng, &spec).unwrap())
                });
            }
        }
    }
    group.finish();
}

fn modular_and_sphere(c: &mut Criterion) {
    let spec = QuadratureSpec::with_samples(1 << 14, 0);
    let ng = gauge("h1");
    let u = bump(&ng, 1.0).unwrap();
    let phi = OrliczFunction::power(2.0).unwrap();
    c.bench_function("phi_energy/h1", |b| b.iter(|| phi_energy(&u, &phi, &ng, &spec).unwrap()));
    c.bench_function("sphere_integral/h1", |b| {
        b.iter(|| sphere_integral(|z| z.coords()[0].powi(2), &ng, &spec).unwrap())
    });
    let pl = OrliczFunction::power_log(2.0).unwrap();
    let small = QuadratureSpec::with_samples(1 << 10, 0);
    c.bench_function("phi_tilde_sweep/h1/power_log", |b| {
        b.iter(|| phi_tilde(&pl, &ng, &PhiTildeArgument::Norm(1.0), &PHI_TILDE_S_GRID, &small).unwrap())
    });
    c.bench_function("psi/power_log", |b| b.iter(|| pl.psi(black_box(3.7))));
}

criterion_group!(benches, gagliardo, modular_and_sphere);
criterion_main!(benches);
