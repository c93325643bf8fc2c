use criterion::Criterion;
use hurwitz_lab::kronecker::{self, KroneckerProblem, SearchBudget, Strategy};

pub fn bench(c: &mut Criterion) {
    let ln = |x: f64| x.ln() / std::f64::consts::TAU;
    let problem = KroneckerProblem::new(vec![ln(2.0), ln(3.0), ln(5.0)], vec![0.0, 0.5, 0.5], 0.05, 1.0).unwrap();
    let grid = SearchBudget::default();
    let lattice = SearchBudget {
        strategy: Strategy::Lattice,
        ..SearchBudget::default()
    };
    let mut group = c.benchmark_group("kronecker 3 terms");
    group.bench_function("grid", |b| b.iter(|| kronecker::solve(&problem, &grid).unwrap()));
    group.bench_function("lattice", |b| b.iter(|| kronecker::solve(&problem, &lattice).unwrap()));
    group.finish();
}
