use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use langevin_core::noise::{make_path, Purpose, StreamKey};
use langevin_core::oracle::reference_solve;
use langevin_core::samplers::{Kernel, ProjectionParams};
use langevin_core::{run_chain, ChainOptions, RecordPolicy, SamplerKind, TauStream};
use langevin_perf::{potentials, start, DIMS};

fn normals(c: &mut Criterion) {
    let mut g = c.benchmark_group("normals");
    let key = StreamKey::new(1, 0, Purpose::Brownian);
    let mut buf = vec![0.0; 4096];
    g.throughput(Throughput::Elements(buf.len() as u64));
    g.bench_function("fill_4096", |b| {
        b.iter(|| key.fill_normals(black_box(0), &mut buf))
    });
    g.finish();
}

fn gradients(c: &mut Criterion) {
    let mut g = c.benchmark_group("grad");
    for &d in DIMS {
        let x = start(d);
        let mut out = vec![0.0; d];
        for (name, spec) in potentials(d) {
            g.bench_with_input(BenchmarkId::new(name, d), &x, |b, x| {
                b.iter(|| spec.grad_into(black_box(x), &mut out))
            });
        }
    }
    g.finish();
}

fn kernel_steps(c: &mut Criterion) {
    let h = 1.0 / 64.0;
    let mut g = c.benchmark_group("kernel_step");
    for &d in DIMS {
        let dw_tau = vec![0.01; d];
        let dw = vec![0.02; d];
        for (name, spec) in potentials(d) {
            for kind in [SamplerKind::Lmc, SamplerKind::Rlmc, SamplerKind::Prlmc] {
                let projection = match kind {
                    SamplerKind::Prlmc => match ProjectionParams::for_spec(&spec, 1.0, h) {
                        Ok(p) => Some(p),
                        Err(_) => continue, // Lipschitz potential, no projection radius
                    },
                    _ => None,
                };
                let mut kernel = Kernel::new(kind, &spec, h, projection).unwrap();
                let mut x = start(d);
                g.bench_function(BenchmarkId::new(format!("{kind}/{name}"), d), |b| {
                    b.iter(|| {
                        kernel.advance(&mut x, 0.5, &dw_tau, &dw);
                        x.copy_from_slice(&dw);
                    })
                });
            }
        }
    }
    g.finish();
}

fn paths(c: &mut Criterion) {
    let mut g = c.benchmark_group("path");
    g.sample_size(20);
    for &d in DIMS {
        g.bench_function(BenchmarkId::new("T1_href2^-10", d), |b| {
            b.iter(|| make_path(1, black_box(3), d, 1.0, 1.0 / 1024.0).unwrap())
        });
    }
    g.finish();
}

fn chains(c: &mut Criterion) {
    let (h, h_ref, horizon) = (1.0 / 32.0, 1.0 / 1024.0, 1.0);
    let opts = ChainOptions {
        record: RecordPolicy::FinalOnly,
        force: true,
        ..ChainOptions::default()
    };
    let mut g = c.benchmark_group("chain_T1");
    g.sample_size(20);
    for &d in DIMS {
        let path = make_path(1, 0, d, horizon, h_ref).unwrap();
        let taus = TauStream::new(1, 0);
        let x0 = start(d);
        for (name, spec) in potentials(d) {
            let polynomial = ProjectionParams::for_spec(&spec, 1.0, h).is_ok();
            for kind in [SamplerKind::Lmc, SamplerKind::Rlmc, SamplerKind::Prlmc] {
                if kind == SamplerKind::Prlmc && !polynomial {
                    continue;
                }
                g.bench_function(BenchmarkId::new(format!("{kind}/{name}"), d), |b| {
                    b.iter(|| run_chain(kind, &spec, &x0, h, 32, &path, &taus, &opts).unwrap())
                });
            }
            g.bench_function(BenchmarkId::new(format!("reference/{name}"), d), |b| {
                b.iter(|| reference_solve(&spec, &path, &x0, horizon).unwrap())
            });
        }
    }
    g.finish();
}

criterion_group!(benches, normals, gradients, kernel_steps, paths, chains);
criterion_main!(benches);
