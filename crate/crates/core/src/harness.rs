//! Simulation loop and experiment drivers.
//!
//! Each step: build the quality table from the current robot states and
//! estimated target positions, assign units to targets, solve one
//! receding-horizon control problem per assigned robot and apply the first
//! action, advance the targets with process noise, collect measurements for
//! the assigned robots, and run one filter predict/update per target.
//!
//! Records capture the state *entering* a step, so the step-1 row shows the
//! designed initial estimation error and the cumulative RMSE at checkpoint 1
//! equals it exactly.

use nalgebra::{Matrix2, Vector2};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::assignment::{
    enumerate_units, greedy_assign, optimal_assign, verify_bound, AssignableUnit, Assignment,
    AssignmentError, BoundMode, QualityTable,
};
use crate::control::{ControlSolution, PmpSolver};
use crate::estimation::{ekf_predict, ekf_update, initial_belief, EkfBelief, EstimationError};
use crate::motion::{circular_drift_at, step_robot, step_target};
use crate::observability::{
    build_pair_matrix, build_pair_matrix_bearing, build_single_robot_matrix, tracking_quality,
};
use crate::scenario::{
    build_scenario_with_rng, LimitedSensorKind, RobotAction, RobotState, ScenarioConfig,
    ScenarioError, TargetState, WorldState,
};
use crate::sensing::{measure, MeasurementKind, SensingError};

/// Receding-horizon length of the per-robot control solve.
pub const CONTROL_HORIZON: usize = 10;
/// Floor on measurement variances fed to the filter, so noiseless scenarios
/// keep an invertible innovation covariance.
pub const MEASUREMENT_VARIANCE_FLOOR: f64 = 1e-12;
/// Floor on the process-noise variance rate fed to the filter, so the gain
/// never collapses to zero in noiseless scenarios.
pub const PROCESS_NOISE_FLOOR: f64 = 1e-9;
/// Cumulative-RMSE checkpoints reported in run summaries.
pub const RMSE_CHECKPOINTS: [usize; 8] = [1, 10, 20, 30, 40, 50, 75, 100];

/// Which assignment drives the simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    Greedy,
    /// Brute-force optimal assignment drives; sizes must satisfy the
    /// exhaustive-search guards.
    Optimal,
    /// Greedy drives, the optimal assignment is computed alongside for
    /// comparison.
    Both,
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Sensing(#[from] SensingError),
    #[error(transparent)]
    Estimation(#[from] EstimationError),
    #[error(transparent)]
    Assignment(#[from] AssignmentError),
}

/// Per-target slice of a step record.
#[derive(Debug, Clone)]
pub struct TargetRecord {
    pub true_position: Vector2<f64>,
    pub estimated_mean: Vector2<f64>,
    /// Euclidean distance between the true position and the mean (m).
    pub error: f64,
    pub covariance_trace: f64,
    /// Unit assigned this step, if any.
    pub unit: Option<AssignableUnit>,
}

/// Snapshot of one simulation step: the state entering the step, the
/// assignment chosen in it, and the actions applied during it.
#[derive(Debug, Clone)]
pub struct StepRecord {
    pub step: usize,
    pub targets: Vec<TargetRecord>,
    pub robots: Vec<(RobotState, RobotAction)>,
    pub assignment: Assignment,
    pub greedy_total: f64,
    pub optimal_total: Option<f64>,
}

/// Convergence bookkeeping across every control solve of a run.
#[derive(Debug, Clone, Copy, Default)]
pub struct ResidualStats {
    pub solves: usize,
    pub converged: usize,
    pub max_converged_residual: f64,
    pub max_residual: f64,
}

impl ResidualStats {
    fn record(&mut self, solution: &ControlSolution) {
        self.solves += 1;
        self.max_residual = self.max_residual.max(solution.stationarity_residual);
        if solution.converged {
            self.converged += 1;
            self.max_converged_residual = self
                .max_converged_residual
                .max(solution.stationarity_residual);
        }
    }
}

/// End-of-run summary.
#[derive(Debug, Clone)]
pub struct RunSummary {
    /// Per target: cumulative RMSE at each checkpoint step that fits in the
    /// run, `RMSE(k) = sqrt(mean of squared errors over steps 1..=k)`.
    pub rmse: Vec<Vec<(usize, f64)>>,
    /// Shifted greedy/optimal quality ratio at the final step, when the
    /// optimal assignment was computed.
    pub final_quality_ratio: Option<f64>,
    pub residuals: ResidualStats,
}

/// Shifted-quality totals of one step (see
/// [`QualityTable::shifted_nonnegative`]).
#[derive(Debug, Clone, Copy)]
pub struct ShiftedTotals {
    pub greedy: f64,
    pub optimal: f64,
    /// `greedy / optimal`, defined as 1 when the shifted optimum is zero.
    pub ratio: f64,
}

/// One executed step: the record plus comparison totals when available.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub record: StepRecord,
    pub shifted: Option<ShiftedTotals>,
}

/// Stateful simulation; [`run`] and [`compare_policies`] drive it.
pub struct Simulation {
    config: ScenarioConfig,
    world: WorldState,
    beliefs: Vec<EkfBelief>,
    units: Vec<AssignableUnit>,
    rng: ChaCha12Rng,
    solver: PmpSolver,
    /// Previous receding-horizon solution per robot, shifted one step, used
    /// to warm-start the next solve.
    warm_actions: Vec<Vec<RobotAction>>,
    residuals: ResidualStats,
}

impl Simulation {
    pub fn new(config: &ScenarioConfig) -> Result<Self, HarnessError> {
        config.validate()?;
        let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
        let world = build_scenario_with_rng(config, &mut rng)?;
        let beliefs = world
            .targets
            .iter()
            .map(|t| initial_belief(&t.position))
            .collect();
        let n_robots = world.robots.len();
        Ok(Self {
            config: config.clone(),
            world,
            beliefs,
            units: enumerate_units(config.n_sufficient, config.n_limited),
            rng,
            solver: PmpSolver::new(config.dt, config.robot_max_speed),
            warm_actions: vec![Vec::new(); n_robots],
            residuals: ResidualStats::default(),
        })
    }

    pub fn world(&self) -> &WorldState {
        &self.world
    }

    pub fn beliefs(&self) -> &[EkfBelief] {
        &self.beliefs
    }

    pub fn residuals(&self) -> ResidualStats {
        self.residuals
    }

    /// Tracking quality of every (unit, target) pair, evaluated at the
    /// estimated target positions. Geometrically degenerate pairings score
    /// `NEG_INFINITY`.
    pub fn quality_table(&self) -> QualityTable {
        let mut table = QualityTable::new();
        for (j, target) in self.world.targets.iter().enumerate() {
            let virtual_target = TargetState {
                position: self.beliefs[j].mean,
                ..*target
            };
            for &unit in &self.units {
                let quality = match unit {
                    AssignableUnit::Solo(i) => {
                        build_single_robot_matrix(&self.world.robots[i], &virtual_target)
                            .map(|o| tracking_quality(&o))
                            .unwrap_or(f64::NEG_INFINITY)
                    }
                    AssignableUnit::Pair(a, b) => match self.config.limited_sensor_kind {
                        LimitedSensorKind::RangeOnly => tracking_quality(&build_pair_matrix(
                            &self.world.robots[a],
                            &self.world.robots[b],
                            &virtual_target,
                        )),
                        LimitedSensorKind::BearingOnly => build_pair_matrix_bearing(
                            &self.world.robots[a],
                            &self.world.robots[b],
                            &virtual_target,
                        )
                        .map(|o| tracking_quality(&o))
                        .unwrap_or(f64::NEG_INFINITY),
                    },
                };
                table.insert(unit, j, quality);
            }
        }
        table
    }

    /// Predicted target positions at the end of each of the next
    /// [`CONTROL_HORIZON`] steps: the estimated mean rolled forward under the
    /// known circular drift.
    fn reference_trajectory(&self, target_index: usize) -> Vec<Vector2<f64>> {
        let target = &self.world.targets[target_index];
        let dt = self.config.dt;
        let mut position = self.beliefs[target_index].mean;
        let mut tau = target.phase_time;
        (0..CONTROL_HORIZON)
            .map(|_| {
                position += circular_drift_at(target.radius, target.angular_rate, tau) * dt;
                tau += dt;
                position
            })
            .collect()
    }

    /// Executes one simulation step under `policy`.
    pub fn step(&mut self, policy: Policy) -> Result<StepOutcome, HarnessError> {
        let step_index = self.world.step + 1;
        let n_targets = self.config.n_targets;

        let table = self.quality_table();
        let greedy = greedy_assign(&self.units, n_targets, &table);
        let (optimal, shifted) = if matches!(policy, Policy::Optimal | Policy::Both) {
            let optimal = optimal_assign(&self.units, n_targets, &table)?;
            let shifted_table = table.shifted_nonnegative();
            let greedy_shifted = greedy_assign(&self.units, n_targets, &shifted_table);
            let optimal_shifted = optimal_assign(&self.units, n_targets, &shifted_table)?;
            (
                Some(optimal),
                Some(ShiftedTotals {
                    greedy: greedy_shifted.total,
                    optimal: optimal_shifted.total,
                    ratio: quality_ratio(greedy_shifted.total, optimal_shifted.total),
                }),
            )
        } else {
            (None, None)
        };
        let optimal_total = optimal.as_ref().map(|o| o.total);
        let assignment = match (policy, optimal) {
            (Policy::Optimal, Some(optimal)) => optimal.assignment,
            _ => greedy.assignment,
        };

        // Snapshot the state entering this step for the record.
        let entering_targets: Vec<TargetRecord> = (0..n_targets)
            .map(|j| TargetRecord {
                true_position: self.world.targets[j].position,
                estimated_mean: self.beliefs[j].mean,
                error: (self.world.targets[j].position - self.beliefs[j].mean).norm(),
                covariance_trace: self.beliefs[j].trace(),
                unit: assignment.unit_for(j),
            })
            .collect();
        let entering_robots = self.world.robots.clone();

        // One receding-horizon solve per assigned robot; everyone else holds
        // position.
        let mut actions = vec![RobotAction::default(); self.world.robots.len()];
        for (target_index, unit) in assignment.iter() {
            let trajectory = self.reference_trajectory(target_index);
            for robot_index in unit.robots() {
                let warm = &self.warm_actions[robot_index];
                let solution = if warm.is_empty() {
                    self.solver
                        .solve(&self.world.robots[robot_index], &trajectory)
                } else {
                    self.solver
                        .solve_warm(&self.world.robots[robot_index], &trajectory, warm)
                };
                self.residuals.record(&solution);
                actions[robot_index] = solution.actions[0];
                let mut next_warm: Vec<RobotAction> = solution.actions[1..].to_vec();
                next_warm.push(*solution.actions.last().expect("nonempty horizon"));
                self.warm_actions[robot_index] = next_warm;
            }
        }

        for (robot, action) in self.world.robots.iter_mut().zip(&actions) {
            *robot = step_robot(robot, action, self.config.dt);
        }

        let pre_step_targets = self.world.targets.clone();
        for target in &mut self.world.targets {
            *target = step_target(
                target,
                self.config.dt,
                &mut self.rng,
                self.config.process_noise_sigma,
            );
        }

        let process_noise = Matrix2::identity()
            * self
                .config
                .process_noise_sigma
                .powi(2)
                .max(PROCESS_NOISE_FLOOR);
        for (j, pre_step_target) in pre_step_targets.iter().enumerate() {
            let predicted = ekf_predict(
                &self.beliefs[j],
                pre_step_target,
                self.config.dt,
                &process_noise,
            );
            self.beliefs[j] = match assignment.unit_for(j) {
                Some(unit) => {
                    let mut measurements = Vec::new();
                    let mut variances = Vec::new();
                    for robot_index in unit.robots() {
                        let batch = measure(
                            &self.world.robots[robot_index],
                            &self.world.targets[j],
                            &mut self.rng,
                            &self.config,
                            robot_index,
                            j,
                        )?;
                        for m in batch {
                            variances.push(self.measurement_variance(m.kind));
                            measurements.push(m);
                        }
                    }
                    ekf_update(&predicted, &measurements, &self.world.robots, &variances)?
                }
                None => predicted,
            };
        }

        self.world.step = step_index;
        self.world.clock = step_index as f64 * self.config.dt;

        Ok(StepOutcome {
            record: StepRecord {
                step: step_index,
                targets: entering_targets,
                robots: entering_robots.into_iter().zip(actions).collect(),
                assignment,
                greedy_total: greedy.total,
                optimal_total,
            },
            shifted,
        })
    }

    fn measurement_variance(&self, kind: MeasurementKind) -> f64 {
        let sigma = match kind {
            MeasurementKind::Range => self.config.range_noise_sigma,
            MeasurementKind::Bearing => self.config.bearing_noise_sigma,
        };
        (sigma * sigma).max(MEASUREMENT_VARIANCE_FLOOR)
    }
}

/// Greedy/optimal ratio of shifted totals; a zero optimum means every finite
/// table entry was identical, where both policies tie.
pub fn quality_ratio(greedy_shifted: f64, optimal_shifted: f64) -> f64 {
    if optimal_shifted > 0.0 {
        greedy_shifted / optimal_shifted
    } else {
        1.0
    }
}

/// Runs a full simulation and returns the per-step records plus the summary.
pub fn run(
    config: &ScenarioConfig,
    policy: Policy,
) -> Result<(Vec<StepRecord>, RunSummary), HarnessError> {
    let mut simulation = Simulation::new(config)?;
    let mut records = Vec::with_capacity(config.time_steps);
    let mut last_shifted = None;
    for _ in 0..config.time_steps {
        let outcome = simulation.step(policy)?;
        if outcome.shifted.is_some() {
            last_shifted = outcome.shifted;
        }
        records.push(outcome.record);
    }

    let mut rmse = Vec::with_capacity(config.n_targets);
    for j in 0..config.n_targets {
        let mut sum_squared = 0.0;
        let mut checkpoints = Vec::new();
        for record in &records {
            sum_squared += record.targets[j].error.powi(2);
            if RMSE_CHECKPOINTS.contains(&record.step) {
                checkpoints.push((record.step, (sum_squared / record.step as f64).sqrt()));
            }
        }
        rmse.push(checkpoints);
    }

    Ok((
        records,
        RunSummary {
            rmse,
            final_quality_ratio: last_shifted.map(|s| s.ratio),
            residuals: simulation.residuals(),
        },
    ))
}

/// One step of one seed in a policy comparison.
#[derive(Debug, Clone, Copy)]
pub struct RatioRow {
    pub seed: u64,
    pub step: usize,
    pub greedy_raw: f64,
    pub optimal_raw: f64,
    pub greedy_shifted: f64,
    pub optimal_shifted: f64,
    pub ratio: f64,
}

/// Result of [`compare_policies`].
#[derive(Debug, Clone)]
pub struct CompareReport {
    pub rows: Vec<RatioRow>,
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// Rows whose ratio left `[0.5 - 1e-9, 1 + 1e-9]`.
    pub violations: usize,
}

/// Runs the simulation once per seed with the greedy assignment driving and
/// the optimal assignment computed alongside, recording the shifted
/// greedy/optimal quality ratio at every step.
pub fn compare_policies(
    config: &ScenarioConfig,
    seeds: &[u64],
) -> Result<CompareReport, HarnessError> {
    let mut report = CompareReport {
        rows: Vec::new(),
        min_ratio: f64::INFINITY,
        max_ratio: f64::NEG_INFINITY,
        violations: 0,
    };
    for &seed in seeds {
        let seeded = ScenarioConfig {
            seed,
            ..config.clone()
        };
        let mut simulation = Simulation::new(&seeded)?;
        for _ in 0..seeded.time_steps {
            let outcome = simulation.step(Policy::Both)?;
            let shifted = outcome.shifted.expect("Both policy computes totals");
            let ratio = shifted.ratio;
            report.min_ratio = report.min_ratio.min(ratio);
            report.max_ratio = report.max_ratio.max(ratio);
            if !(0.5 - 1e-9..=1.0 + 1e-9).contains(&ratio) {
                report.violations += 1;
            }
            report.rows.push(RatioRow {
                seed,
                step: outcome.record.step,
                greedy_raw: outcome.record.greedy_total,
                optimal_raw: outcome.record.optimal_total.expect("optimal computed"),
                greedy_shifted: shifted.greedy,
                optimal_shifted: shifted.optimal,
                ratio,
            });
        }
    }
    Ok(report)
}

/// One synthetic bound experiment instance.
#[derive(Debug, Clone, Copy)]
pub struct BoundTrial {
    pub index: usize,
    pub n_sufficient: usize,
    pub n_limited: usize,
    pub n_targets: usize,
    pub greedy_total: f64,
    pub optimal_total: f64,
    pub holds: bool,
}

/// Runs `instances` random-table experiments and checks the approximation
/// bound of `mode` on each. `Submodular` draws per-target values (the induced
/// set function is additive, hence nondecreasing submodular) on the 2-solo /
/// 3-limited team; `Arbitrary` draws independent nonnegative values on
/// randomized team sizes.
pub fn bound_trials(mode: BoundMode, instances: usize, base_seed: u64) -> Vec<BoundTrial> {
    use rand::Rng;
    let mut trials = Vec::with_capacity(instances);
    for index in 0..instances {
        let mut rng = ChaCha12Rng::seed_from_u64(base_seed.wrapping_add(index as u64));
        let (n_sufficient, n_limited, n_targets) = match mode {
            BoundMode::Submodular => (2, 3, rng.random_range(1..=3)),
            BoundMode::Arbitrary => (
                rng.random_range(0..=3),
                rng.random_range(0..=4),
                rng.random_range(1..=5),
            ),
        };
        let units = enumerate_units(n_sufficient, n_limited);
        let mut table = QualityTable::new();
        match mode {
            BoundMode::Submodular => {
                for target in 0..n_targets {
                    let value = rng.random_range(0.0..10.0);
                    for &unit in &units {
                        table.insert(unit, target, value);
                    }
                }
            }
            BoundMode::Arbitrary => {
                for &unit in &units {
                    for target in 0..n_targets {
                        table.insert(unit, target, rng.random_range(0.0..10.0));
                    }
                }
            }
        }
        let greedy = greedy_assign(&units, n_targets, &table);
        let optimal = optimal_assign(&units, n_targets, &table).expect("trial sizes within guards");
        trials.push(BoundTrial {
            index,
            n_sufficient,
            n_limited,
            n_targets,
            greedy_total: greedy.total,
            optimal_total: optimal.total,
            holds: verify_bound(greedy.total, optimal.total, mode),
        });
    }
    trials
}
