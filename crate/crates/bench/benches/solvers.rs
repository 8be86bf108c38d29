use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use measdiv::generator::FGenerator;
use measdiv::measurement::search_pvm;
use measdiv::polar::duality_check;
use measdiv::uhlmann::{solve_extension, Direction};
use measdiv::variational::{measured_f_divergence, SolveOptions};
use measdiv_bench::{extension, hull, pair};

fn variational(c: &mut Criterion) {
    let opts = SolveOptions::default();
    let mut group = c.benchmark_group("variational");
    for dim in [2, 3, 4, 6] {
        let (rho, sigma) = pair(dim, 7);
        for g in [FGenerator::kl(), FGenerator::renyi(0.5).unwrap(), FGenerator::renyi(2.0).unwrap()] {
            group.bench_with_input(BenchmarkId::new(g.to_string(), dim), &dim, |b, _| {
                b.iter(|| measured_f_divergence(black_box(&rho), black_box(&sigma), &g, &opts).unwrap())
            });
        }
    }
    group.finish();
}

fn pvm_search(c: &mut Criterion) {
    let mut group = c.benchmark_group("pvm_search");
    group.sample_size(20);
    for dim in [2, 3] {
        let (rho, sigma) = pair(dim, 11);
        let g = FGenerator::kl();
        group.bench_with_input(BenchmarkId::from_parameter(dim), &dim, |b, _| {
            b.iter(|| search_pvm(black_box(&rho), black_box(&sigma), &g, 20, 3).unwrap())
        });
    }
    group.finish();
}

fn uhlmann(c: &mut Criterion) {
    let opts = SolveOptions::default();
    let mut group = c.benchmark_group("uhlmann");
    group.sample_size(10);
    for (direction, alpha) in [(Direction::ExtendRho, 0.25), (Direction::ExtendRho, 0.5), (Direction::ExtendSigma, 2.0)] {
        let p = extension(direction, alpha, 21);
        group.bench_function(format!("{direction}/{alpha}"), |b| b.iter(|| solve_extension(black_box(&p), &opts).unwrap()));
    }
    group.finish();
}

fn duality(c: &mut Criterion) {
    let opts = SolveOptions::default();
    let mut group = c.benchmark_group("duality");
    group.sample_size(10);
    for size in [1, 2, 3] {
        let (rho, set) = hull(size, 31);
        group.bench_with_input(BenchmarkId::from_parameter(size), &size, |b, _| {
            b.iter(|| duality_check(black_box(&rho), &set, &opts).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, variational, pvm_search, uhlmann, duality);
criterion_main!(benches);
