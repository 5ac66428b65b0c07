use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use nalgebra::Vector2;

use hetrack::assignment::{greedy_assign, optimal_assign};
use hetrack::control::PmpSolver;
use hetrack::harness::{Policy, Simulation};
use hetrack::scenario::{RobotKind, RobotState, ScenarioConfig};
use hetrack_bench::random_table;

fn bench_assignment(c: &mut Criterion) {
    let (small_units, small_table) = random_table(2, 3, 3, 1);
    c.bench_function("greedy_assign 2+3 robots, 3 targets", |b| {
        b.iter(|| greedy_assign(black_box(&small_units), 3, black_box(&small_table)))
    });

    let (large_units, large_table) = random_table(8, 12, 10, 2);
    c.bench_function("greedy_assign 8+12 robots, 10 targets", |b| {
        b.iter(|| greedy_assign(black_box(&large_units), 10, black_box(&large_table)))
    });

    c.bench_function("optimal_assign 2+3 robots, 3 targets", |b| {
        b.iter(|| optimal_assign(black_box(&small_units), 3, black_box(&small_table)).unwrap())
    });
}

fn bench_control(c: &mut Criterion) {
    let solver = PmpSolver::new(0.1, 2.0);
    let start = RobotState::new(Vector2::new(-8.0, 3.0), 0.5, RobotKind::Sufficient);
    let trajectory: Vec<Vector2<f64>> = (0..10)
        .map(|k| Vector2::new(0.2 * k as f64, 2.0 - 0.1 * k as f64))
        .collect();
    c.bench_function("pmp solve cold, horizon 10", |b| {
        b.iter(|| solver.solve(black_box(&start), black_box(&trajectory)))
    });

    let warm = solver.solve(&start, &trajectory).actions;
    c.bench_function("pmp solve warm, horizon 10", |b| {
        b.iter(|| solver.solve_warm(black_box(&start), black_box(&trajectory), black_box(&warm)))
    });
}

fn bench_simulation(c: &mut Criterion) {
    let config = ScenarioConfig {
        n_targets: 2,
        time_steps: 100,
        ..ScenarioConfig::default()
    };
    c.bench_function("simulation step, 2 targets greedy", |b| {
        let mut simulation = Simulation::new(&config).unwrap();
        b.iter(|| {
            if simulation.world().step >= config.time_steps {
                simulation = Simulation::new(&config).unwrap();
            }
            simulation.step(Policy::Greedy).unwrap()
        })
    });
    c.bench_function("simulation step, 2 targets both policies", |b| {
        let mut simulation = Simulation::new(&config).unwrap();
        b.iter(|| {
            if simulation.world().step >= config.time_steps {
                simulation = Simulation::new(&config).unwrap();
            }
            simulation.step(Policy::Both).unwrap()
        })
    });
}

criterion_group!(benches, bench_assignment, bench_control, bench_simulation);
criterion_main!(benches);
