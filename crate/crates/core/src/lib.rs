//! Heterogeneous sensor-to-target assignment and multi-target tracking.
//!
//! A team of mobile robots tracks moving targets. Robots come in two kinds:
//! *sufficient* robots carry both a range and a bearing sensor and can track a
//! target alone, while *limited* robots carry a single sensor and must operate
//! in pairs. The library provides:
//!
//! - a seeded scenario generator and a flat key/value config format
//!   ([`scenario`]),
//! - unicycle robot and noisy circular target kinematics ([`motion`]),
//! - range / bearing measurement models ([`sensing`]),
//! - observability matrices and the `log det(OᵀO)` tracking-quality metric
//!   ([`observability`]),
//! - the transversal-matroid assignment machinery: greedy assignment, a
//!   brute-force optimum, rank/span oracles, and approximation-bound checks
//!   ([`assignment`]),
//! - a per-target extended Kalman filter ([`estimation`]),
//! - a Pontryagin forward-backward sweep motion solver ([`control`]),
//! - the simulation loop, policy comparison, and synthetic bound experiments
//!   ([`harness`]), with CSV reporting in [`report`].

pub mod assignment;
pub mod control;
pub mod estimation;
pub mod harness;
pub mod motion;
pub mod observability;
pub mod report;
pub mod scenario;
pub mod sensing;

pub use assignment::{
    enumerate_units, greedy_assign, optimal_assign, verify_bound, AssignableUnit, Assignment,
    AssignmentError, AssignmentGraph, BoundMode, QualityTable,
};
pub use control::{hamiltonian, ControlSolution, CostateTrajectory, PmpSolver};
pub use estimation::{ekf_predict, ekf_update, initial_belief, EkfBelief, EstimationError};

pub use harness::{compare_policies, run, Policy, RunSummary, StepRecord};
pub use observability::{tracking_quality, ObservabilityMatrix, RowLabel};
pub use scenario::{
    build_scenario, derive_target_radius, LimitedSensorKind, RobotAction, RobotKind, RobotState,
    ScenarioConfig, ScenarioError, TargetState, WorldState,
};
pub use sensing::{measure, Measurement, MeasurementKind, SensingError};
