//! Observability matrices and the tracking-quality metric.
//!
//! Tracking quality of a candidate robot(s)-target pairing is
//! `q = log det(OᵀO)`, where `O` stacks the measurement Jacobians with the
//! target-gradients of the first Lie derivatives of the measurement models
//! along the circular target drift. Two stacks are used:
//!
//! - single sufficient robot (4x2): range Jacobian, bearing Jacobian, the
//!   Lie-range gradient `[-d*phi*sin(phi*t), d*phi*cos(phi*t)]`, and the
//!   Lie-bearing gradient `[a, b]`;
//! - pair of limited range robots (3x2): one range Jacobian per robot plus
//!   the drift row `[d*cos(phi*t), d*sin(phi*t)]`.
//!
//! All rows are differentiated with respect to the planar target position
//! only, so `O` always has two columns and `OᵀO` is a 2x2 Gram matrix.

use nalgebra::{Matrix2, Vector2};

use crate::scenario::{RobotKind, RobotState, TargetState};
use crate::sensing::SensingError;

/// `det(OᵀO)` at or below this floor is treated as singular and reported as
/// `NEG_INFINITY`, so the greedy stage never trades a non-observable
/// configuration for an observable one.
pub const DET_FLOOR: f64 = 1e-12;

/// Provenance of one observability row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowLabel {
    RangeJac,
    BearingJac,
    LieRange,
    LieBearing,
}

/// Row-stacked observability matrix with two columns.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservabilityMatrix {
    rows: Vec<[f64; 2]>,
    labels: Vec<RowLabel>,
}

impl ObservabilityMatrix {
    pub fn from_rows(rows: Vec<[f64; 2]>, labels: Vec<RowLabel>) -> Self {
        assert_eq!(rows.len(), labels.len(), "one label per row");
        Self { rows, labels }
    }

    pub fn rows(&self) -> &[[f64; 2]] {
        &self.rows
    }

    pub fn labels(&self) -> &[RowLabel] {
        &self.labels
    }

    /// The 2x2 Gram matrix `OᵀO`.
    pub fn gram(&self) -> Matrix2<f64> {
        let mut g = Matrix2::zeros();
        for row in &self.rows {
            g[(0, 0)] += row[0] * row[0];
            g[(0, 1)] += row[0] * row[1];
            g[(1, 1)] += row[1] * row[1];
        }
        g[(1, 0)] = g[(0, 1)];
        g
    }
}

/// Gradient of the half-squared-range model with respect to the target
/// position, evaluated at `point`: the displacement `[dx, dy]`.
pub fn range_jacobian_at(robot: &RobotState, point: &Vector2<f64>) -> [f64; 2] {
    let delta = point - robot.position;
    [delta.x, delta.y]
}

/// Gradient of the bearing model with respect to the target position:
/// `[-dy, dx] / |delta|^2`.
pub fn bearing_jacobian_at(
    robot: &RobotState,
    point: &Vector2<f64>,
) -> Result<[f64; 2], SensingError> {
    let delta = point - robot.position;
    let rho2 = delta.x * delta.x + delta.y * delta.y;
    if rho2 == 0.0 {
        return Err(SensingError::CoincidentPositions);
    }
    Ok([-delta.y / rho2, delta.x / rho2])
}

pub fn range_jacobian(robot: &RobotState, target: &TargetState) -> [f64; 2] {
    range_jacobian_at(robot, &target.position)
}

pub fn bearing_jacobian(
    robot: &RobotState,
    target: &TargetState,
) -> Result<[f64; 2], SensingError> {
    bearing_jacobian_at(robot, &target.position)
}

/// Target-gradient of the Lie derivative of the range model along the target
/// drift. The Lie derivative is linear in the target position, so the row is
/// position-independent: `[-d*phi*sin(phi*t), d*phi*cos(phi*t)]`.
pub fn lie_range_row(_robot: &RobotState, target: &TargetState) -> [f64; 2] {
    let (d, phi, t) = (target.radius, target.angular_rate, target.phase_time);
    [-d * phi * (phi * t).sin(), d * phi * (phi * t).cos()]
}

/// Target-gradient `[a, b]` of the Lie derivative of the bearing model along
/// the target drift (quotient rule applied to
/// `(dy*sin + dx*cos) * d*phi / rho^2`).
pub fn lie_bearing_row(robot: &RobotState, target: &TargetState) -> Result<[f64; 2], SensingError> {
    let delta = target.position - robot.position;
    let rho2 = delta.x * delta.x + delta.y * delta.y;
    if rho2 == 0.0 {
        return Err(SensingError::CoincidentPositions);
    }
    let (d, phi, t) = (target.radius, target.angular_rate, target.phase_time);
    let (sin, cos) = (phi * t).sin_cos();
    let numerator = d * phi * (delta.y * sin + delta.x * cos);
    let a = d * phi * cos / rho2 - 2.0 * delta.x * numerator / (rho2 * rho2);
    let b = d * phi * sin / rho2 - 2.0 * delta.y * numerator / (rho2 * rho2);
    Ok([a, b])
}

/// 4x2 observability matrix of a single sufficient robot.
pub fn build_single_robot_matrix(
    robot: &RobotState,
    target: &TargetState,
) -> Result<ObservabilityMatrix, SensingError> {
    debug_assert_eq!(robot.kind, RobotKind::Sufficient);
    Ok(ObservabilityMatrix::from_rows(
        vec![
            range_jacobian(robot, target),
            bearing_jacobian(robot, target)?,
            lie_range_row(robot, target),
            lie_bearing_row(robot, target)?,
        ],
        vec![
            RowLabel::RangeJac,
            RowLabel::BearingJac,
            RowLabel::LieRange,
            RowLabel::LieBearing,
        ],
    ))
}

/// 3x2 observability matrix of a pair of range-only limited robots: two range
/// Jacobians plus the drift row `[d*cos(phi*t), d*sin(phi*t)]`.
pub fn build_pair_matrix(
    robot1: &RobotState,
    robot2: &RobotState,
    target: &TargetState,
) -> ObservabilityMatrix {
    debug_assert_eq!(robot1.kind, RobotKind::Limited);
    debug_assert_eq!(robot2.kind, RobotKind::Limited);
    let (d, phi, t) = (target.radius, target.angular_rate, target.phase_time);
    ObservabilityMatrix::from_rows(
        vec![
            range_jacobian(robot1, target),
            range_jacobian(robot2, target),
            [d * (phi * t).cos(), d * (phi * t).sin()],
        ],
        vec![RowLabel::RangeJac, RowLabel::RangeJac, RowLabel::LieRange],
    )
}

/// 3x2 observability matrix of a pair of bearing-only limited robots; same
/// construction as [`build_pair_matrix`] with bearing Jacobians in place of
/// the range rows.
pub fn build_pair_matrix_bearing(
    robot1: &RobotState,
    robot2: &RobotState,
    target: &TargetState,
) -> Result<ObservabilityMatrix, SensingError> {
    debug_assert_eq!(robot1.kind, RobotKind::Limited);
    debug_assert_eq!(robot2.kind, RobotKind::Limited);
    let (d, phi, t) = (target.radius, target.angular_rate, target.phase_time);
    Ok(ObservabilityMatrix::from_rows(
        vec![
            bearing_jacobian(robot1, target)?,
            bearing_jacobian(robot2, target)?,
            [d * (phi * t).cos(), d * (phi * t).sin()],
        ],
        vec![
            RowLabel::BearingJac,
            RowLabel::BearingJac,
            RowLabel::LieRange,
        ],
    ))
}

/// `log det(OᵀO)`, or `NEG_INFINITY` when the Gram determinant is at or below
/// [`DET_FLOOR`].
pub fn tracking_quality(matrix: &ObservabilityMatrix) -> f64 {
    let g = matrix.gram();
    let det = g[(0, 0)] * g[(1, 1)] - g[(0, 1)] * g[(1, 0)];
    if det <= DET_FLOOR {
        f64::NEG_INFINITY
    } else {
        det.ln()
    }
}
