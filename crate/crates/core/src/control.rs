//! Pontryagin-based robot motion: a forward-backward sweep solver for the
//! two-point boundary-value problem of chasing a target reference.
//!
//! The per-step Hamiltonian combines the costate terms with a quadratic
//! tracking-error + control-effort cost. States integrate forward under the
//! current actions; costates integrate backward from a zero terminal
//! condition with the costate equations
//! `l1' = -(x1 - y1)`, `l2' = -(x2 - y2)`,
//! `l3' = l1*v*sin(theta) - l2*v*cos(theta)` evaluated at the landed state of
//! each step, which makes `lambda_k` the exact sensitivity of the discrete
//! cost to the state entering step `k`. Actions then relax toward the
//! stationarity solution `v = -(l1*cos(theta) + l2*sin(theta))`, `w = -l3`
//! until the residual of those first-order conditions drops below tolerance;
//! each relaxation step is damped gradient descent on the total cost.
//!
//! The speed limit enters the sweep as a projection: the velocity target is
//! clamped before each relaxed update, so the iterate stays inside the box
//! and the sweep remains stable even for references far beyond reach (an
//! unconstrained sweep cycles there, since the costate gains grow with the
//! planned speed). Wherever the limit is inactive the projection is the
//! identity and the converged actions satisfy the interior stationarity
//! equations exactly.
//!
//! `target_traj[k]` is the reference the k-th action should land on, i.e. the
//! predicted target position at the end of step `k`.

use nalgebra::Vector2;

use crate::motion::step_robot;
use crate::scenario::{RobotAction, RobotState};

/// Costate triples per step; the terminal triple is exactly zero by
/// construction.
#[derive(Debug, Clone, PartialEq)]
pub struct CostateTrajectory {
    lambdas: Vec<[f64; 3]>,
}

impl CostateTrajectory {
    pub fn lambdas(&self) -> &[[f64; 3]] {
        &self.lambdas
    }

    pub fn terminal(&self) -> [f64; 3] {
        *self.lambdas.last().expect("nonempty costate trajectory")
    }
}

/// Converged (or best-effort) solution of one solve.
#[derive(Debug, Clone)]
pub struct ControlSolution {
    /// One action per horizon step, velocity within the speed limit.
    pub actions: Vec<RobotAction>,
    /// Robot states under `actions`: `horizon + 1` entries starting at the
    /// initial state.
    pub states: Vec<RobotState>,
    pub costates: CostateTrajectory,
    /// Largest per-step stationarity gap at the returned actions.
    pub stationarity_residual: f64,
    /// True when the residual dropped below tolerance within the sweep cap.
    pub converged: bool,
    pub sweeps: usize,
}

/// Hamiltonian of the tracking problem at one step.
pub fn hamiltonian(
    robot: &RobotState,
    target_ref: &Vector2<f64>,
    action: &RobotAction,
    costate: [f64; 3],
) -> f64 {
    let (v, w) = (action.linear_velocity, action.angular_velocity);
    let error = robot.position - target_ref;
    costate[0] * v * robot.heading.cos()
        + costate[1] * v * robot.heading.sin()
        + costate[2] * w
        + 0.5 * (error.x * error.x + error.y * error.y + v * v + w * w)
}

/// Forward-backward sweep solver.
#[derive(Debug, Clone)]
pub struct PmpSolver {
    pub dt: f64,
    pub max_speed: f64,
    pub relaxation: f64,
    pub tolerance: f64,
    pub max_sweeps: usize,
}

impl PmpSolver {
    pub fn new(dt: f64, max_speed: f64) -> Self {
        Self {
            dt,
            max_speed,
            relaxation: 0.1,
            tolerance: 1e-6,
            max_sweeps: 500,
        }
    }

    /// Solves over a horizon of `target_traj.len()` steps from zero initial
    /// actions.
    pub fn solve(&self, initial: &RobotState, target_traj: &[Vector2<f64>]) -> ControlSolution {
        self.solve_warm(initial, target_traj, &[])
    }

    /// Solves with an initial action guess (typically the previous
    /// receding-horizon solution shifted by one step). The guess is truncated
    /// or zero-padded to the horizon.
    pub fn solve_warm(
        &self,
        initial: &RobotState,
        target_traj: &[Vector2<f64>],
        warm_start: &[RobotAction],
    ) -> ControlSolution {
        self.run(initial, target_traj, warm_start).0
    }

    /// Test-only access to the per-sweep cost trace.
    #[doc(hidden)]
    pub fn run_for_tests(
        &self,
        initial: &RobotState,
        target_traj: &[Vector2<f64>],
    ) -> (ControlSolution, Vec<f64>) {
        self.run(initial, target_traj, &[])
    }

    /// Sweep loop; also returns the total cost recorded at the start of every
    /// sweep so tests can check that the relaxed updates never increase it.
    pub(crate) fn run(
        &self,
        initial: &RobotState,
        target_traj: &[Vector2<f64>],
        warm_start: &[RobotAction],
    ) -> (ControlSolution, Vec<f64>) {
        let horizon = target_traj.len();
        assert!(horizon >= 1, "horizon must be at least one step");
        let mut actions = vec![RobotAction::default(); horizon];
        for (slot, warm) in actions.iter_mut().zip(warm_start) {
            slot.linear_velocity = warm.linear_velocity.clamp(-self.max_speed, self.max_speed);
            slot.angular_velocity = warm.angular_velocity;
        }

        let mut costs = Vec::new();
        let mut sweeps = 0;
        let (lambdas, residual, converged) = loop {
            let states = self.forward(initial, &actions);
            costs.push(self.cost(&states, &actions, target_traj));
            let lambdas = self.backward(&states, &actions, target_traj);
            let residual = self.residual(&states, &actions, &lambdas);
            if residual < self.tolerance {
                break (lambdas, residual, true);
            }
            if sweeps >= self.max_sweeps {
                break (lambdas, residual, false);
            }
            for k in 0..horizon {
                let (v_opt, w_opt) = self.projected_stationary(&states[k], lambdas[k]);
                actions[k].linear_velocity +=
                    self.relaxation * (v_opt - actions[k].linear_velocity);
                actions[k].angular_velocity +=
                    self.relaxation * (w_opt - actions[k].angular_velocity);
            }
            sweeps += 1;
        };

        let states = self.forward(initial, &actions);
        let solution = ControlSolution {
            actions,
            states,
            costates: CostateTrajectory { lambdas },
            stationarity_residual: residual,
            converged,
            sweeps,
        };
        debug_assert_eq!(solution.costates.terminal(), [0.0; 3]);
        debug_assert!(solution
            .actions
            .iter()
            .all(|a| a.linear_velocity.abs() <= self.max_speed));
        (solution, costs)
    }

    fn forward(&self, initial: &RobotState, actions: &[RobotAction]) -> Vec<RobotState> {
        let mut states = Vec::with_capacity(actions.len() + 1);
        states.push(*initial);
        for action in actions {
            states.push(step_robot(states.last().unwrap(), action, self.dt));
        }
        states
    }

    /// Backward costate sweep from the zero terminal condition, with the
    /// right-hand side evaluated at the landed state of each step. The
    /// `l3` coupling term at the final step multiplies the zero terminal
    /// costate and vanishes, so no action beyond the horizon is needed.
    fn backward(
        &self,
        states: &[RobotState],
        actions: &[RobotAction],
        target_traj: &[Vector2<f64>],
    ) -> Vec<[f64; 3]> {
        let horizon = actions.len();
        let mut lambdas = vec![[0.0; 3]; horizon + 1];
        for k in (0..horizon).rev() {
            let next = lambdas[k + 1];
            let landed = &states[k + 1];
            let error = landed.position - target_traj[k];
            let v = actions.get(k + 1).map_or(0.0, |a| a.linear_velocity);
            lambdas[k] = [
                next[0] + self.dt * error.x,
                next[1] + self.dt * error.y,
                next[2]
                    - self.dt
                        * (next[0] * v * landed.heading.sin() - next[1] * v * landed.heading.cos()),
            ];
        }
        lambdas
    }

    fn residual(
        &self,
        states: &[RobotState],
        actions: &[RobotAction],
        lambdas: &[[f64; 3]],
    ) -> f64 {
        actions
            .iter()
            .enumerate()
            .map(|(k, action)| {
                let (v_opt, w_opt) = self.projected_stationary(&states[k], lambdas[k]);
                let dv = (action.linear_velocity - v_opt).abs();
                let dw = (action.angular_velocity - w_opt).abs();
                dv.max(dw)
            })
            .fold(0.0, f64::max)
    }

    /// Stationarity solution with the velocity component projected onto the
    /// admissible box.
    fn projected_stationary(&self, state: &RobotState, lambda: [f64; 3]) -> (f64, f64) {
        let v = -(lambda[0] * state.heading.cos() + lambda[1] * state.heading.sin());
        (v.clamp(-self.max_speed, self.max_speed), -lambda[2])
    }

    fn cost(
        &self,
        states: &[RobotState],
        actions: &[RobotAction],
        target_traj: &[Vector2<f64>],
    ) -> f64 {
        actions
            .iter()
            .enumerate()
            .map(|(k, action)| {
                let error = states[k + 1].position - target_traj[k];
                0.5 * (error.norm_squared()
                    + action.linear_velocity * action.linear_velocity
                    + action.angular_velocity * action.angular_velocity)
                    * self.dt
            })
            .sum()
    }
}
