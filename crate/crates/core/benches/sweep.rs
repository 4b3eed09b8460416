use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use serrin_core::exec::{self, Execution};
use serrin_core::fem2d::{solve_poisson, DomainSpec, Mesh, Shape};
use serrin_core::identities::{radial_reports, IdentityKind, TestFunction, Tolerances};
use serrin_core::radial::{solve_ball_closed_form, BallProblem, SolveOptions};
use serrin_core::WarpModel;

fn radius_sweep(c: &mut Criterion) {
    let radii: Vec<f64> = (1..=20).map(|i| 0.1 * i as f64).collect();
    let kinds = IdentityKind::parse_list("hk,soap,pohozaev,divergence").unwrap();
    let mut group = c.benchmark_group("radius_sweep");
    group.sample_size(10);
    for exec in [Execution::Sequential, Execution::Parallel] {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            b.iter(|| {
                exec::map(exec, &radii, |&r| {
                    let p = BallProblem {
                        model: WarpModel::space_form(3, -1.0).unwrap(),
                        radius: r,
                    };
                    let sol = solve_ball_closed_form(&p, SolveOptions::default()).unwrap();
                    radial_reports(&sol, &kinds, TestFunction::Square, &Tolerances::default()).unwrap()
                })
            })
        });
    }
    group.finish();
}

fn fem_solve(c: &mut Criterion) {
    let spec = DomainSpec::new(Shape::Ellipse { a: 1.5, b: 1.0 }, 0.0, 0.03).unwrap();
    let mesh = Mesh::generate(&spec).unwrap();
    let mut group = c.benchmark_group("fem_solve");
    group.sample_size(10);
    for exec in [Execution::Sequential, Execution::Parallel] {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            b.iter(|| solve_poisson(black_box(&mesh), exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, radius_sweep, fem_solve);
criterion_main!(benches);
