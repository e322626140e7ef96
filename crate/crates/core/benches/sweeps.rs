use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;
use sonolink::directivity::{directed_sweep, grid_xz, superpose, Coherence, Emitter, EmitterSet};
use sonolink::fem::{AxiMesh, FieldSolution, MeshParams, Obstacle, RingsetGeometry, RingsetScenario};
use sonolink::sphere::efficiency_sweep;
use sonolink::{Exec, Medium};
use std::hint::black_box;

const UM: f64 = 1e-6;
const STRATEGIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn log_freqs(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|j| lo * (hi / lo).powf(j as f64 / (n - 1) as f64)).collect()
}

fn efficiency(c: &mut Criterion) {
    let m = Medium::low();
    let fs = log_freqs(400, 0.1e6, 3e9);
    let mut g = c.benchmark_group("efficiency_sweep_400");
    for (name, exec) in STRATEGIES {
        g.bench_function(name, |b| b.iter(|| efficiency_sweep(5.0 * UM, &m, 100.0 * UM, black_box(&fs), exec).unwrap()));
    }
    g.finish();
}

fn directed(c: &mut Criterion) {
    let m = Medium::low();
    let fs = log_freqs(32, 10e6, 500e6);
    let mut g = c.benchmark_group("directed_sweep_32");
    g.sample_size(10);
    for (name, exec) in STRATEGIES {
        g.bench_function(name, |b| b.iter(|| directed_sweep(5.0 * UM, &m, 100e-12, 100.0 * UM, black_box(&fs), exec).unwrap()));
    }
    g.finish();
}

fn intensity_grid(c: &mut Criterion) {
    let emitters = (0..4)
        .map(|j| Emitter {
            position: [(j as f64 - 1.5) * 20.0 * UM, 0.0, 0.0],
            radius: 2.0 * UM,
            amplitude: Complex64::from_polar(1e-6, 0.4 * j as f64),
            frequency: 50e6,
        })
        .collect();
    let set = EmitterSet::new(emitters, Coherence::Coherent, Medium::low()).unwrap();
    let mut g = c.benchmark_group("superpose");
    for n in [64, 256] {
        let pts = grid_xz((-100.0 * UM, 100.0 * UM), (5.0 * UM, 200.0 * UM), n, n);
        for (name, exec) in STRATEGIES {
            g.bench_with_input(BenchmarkId::new(name, n * n), &pts, |b, pts| b.iter(|| superpose(&set, pts, exec).unwrap()));
        }
    }
    g.finish();
}

fn small_mesh() -> MeshParams {
    MeshParams { domain_radius: 40.0 * UM, h_max: 1.5 * UM, h_surface: 0.1 * UM, ..MeshParams::default() }
}

/// Mesh generation is sequential; kept as the fixed cost next to the solves.
fn mesh(c: &mut Criterion) {
    let params = small_mesh();
    let obstacle = Obstacle::Ringset(RingsetGeometry::default());
    let mut g = c.benchmark_group("mesh");
    g.sample_size(10);
    g.bench_function("ringset_40um", |b| b.iter(|| AxiMesh::build(&obstacle, &params, 15.0 * UM).unwrap()));
    g.finish();
}

/// Element assembly, solve and calibration on a fixed mesh.
fn fem_solve(c: &mut Criterion) {
    let mut sc = RingsetScenario::ringset(100e6, Medium::low());
    sc.mesh = small_mesh();
    let mesh = sc.build_mesh().unwrap();
    let mut g = c.benchmark_group("fem_solve");
    g.sample_size(10);
    for (name, exec) in STRATEGIES {
        g.bench_function(name, |b| b.iter(|| FieldSolution::solve_on(&sc, mesh.clone(), exec).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, efficiency, directed, intensity_grid, mesh, fem_solve);
criterion_main!(benches);
