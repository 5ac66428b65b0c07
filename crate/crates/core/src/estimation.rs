//! Per-target extended Kalman filter.
//!
//! The filter state is the planar target position only; the circular-motion
//! parameters (radius, angular rate, phase) are known model inputs. The
//! predict step therefore applies a state-independent drift (identity state
//! Jacobian), and the update step linearizes the range / bearing models at
//! the predicted mean. The covariance update uses the Joseph form and is
//! re-symmetrized with eigenvalues clamped at zero, so the belief stays
//! symmetric PSD through arbitrarily long runs.

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use thiserror::Error;

use crate::motion::{circular_drift, wrap_angle};
use crate::observability::{bearing_jacobian_at, range_jacobian_at};
use crate::scenario::{RobotState, TargetState};
use crate::sensing::{bearing_value, range_value, Measurement, MeasurementKind};

/// Gaussian belief over a target's planar position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EkfBelief {
    pub mean: Vector2<f64>,
    pub covariance: Matrix2<f64>,
}

impl EkfBelief {
    pub fn new(mean: Vector2<f64>, covariance: Matrix2<f64>) -> Self {
        Self { mean, covariance }
    }

    pub fn trace(&self) -> f64 {
        self.covariance.trace()
    }
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum EstimationError {
    #[error("innovation covariance is singular")]
    SingularInnovationCovariance,
    #[error("measurement robot index {0} does not resolve")]
    UnknownRobot(usize),
}

/// Initial offset applied to the true position when seeding a belief; its
/// norm (0.7071 m) is the designed step-1 error.
pub const INITIAL_OFFSET: Vector2<f64> = Vector2::new(0.5, 0.5);
/// Initial covariance is `INITIAL_VARIANCE * I`.
pub const INITIAL_VARIANCE: f64 = 0.5;

/// Belief seeded from the true target position with the designed offset and
/// covariance.
pub fn initial_belief(true_position: &Vector2<f64>) -> EkfBelief {
    EkfBelief::new(
        true_position + INITIAL_OFFSET,
        Matrix2::identity() * INITIAL_VARIANCE,
    )
}

/// Predict step over `dt`: the mean moves by the known circular drift
/// evaluated at the model's current phase time, and the covariance grows by
/// `Q * dt` (the drift does not depend on the state, so the state Jacobian is
/// the identity).
pub fn ekf_predict(
    belief: &EkfBelief,
    target_model: &TargetState,
    dt: f64,
    process_noise: &Matrix2<f64>,
) -> EkfBelief {
    debug_assert!(dt > 0.0);
    EkfBelief {
        mean: belief.mean + circular_drift(target_model) * dt,
        covariance: symmetrize(belief.covariance + process_noise * dt),
    }
}

/// Measurement update with a stacked Jacobian built from all measurements of
/// one target. Bearing innovations are wrapped to (-pi, pi]; the covariance
/// update uses the Joseph form. `variances` is the per-measurement noise
/// variance, aligned with `measurements`. An empty batch returns the belief
/// unchanged.
pub fn ekf_update(
    belief: &EkfBelief,
    measurements: &[Measurement],
    robots: &[RobotState],
    variances: &[f64],
) -> Result<EkfBelief, EstimationError> {
    assert_eq!(measurements.len(), variances.len());
    if measurements.is_empty() {
        return Ok(*belief);
    }
    let n = measurements.len();
    let mut jacobian = DMatrix::zeros(n, 2);
    let mut innovation = DVector::zeros(n);
    for (row, m) in measurements.iter().enumerate() {
        let robot = robots
            .get(m.robot_index)
            .ok_or(EstimationError::UnknownRobot(m.robot_index))?;
        match m.kind {
            MeasurementKind::Range => {
                let j = range_jacobian_at(robot, &belief.mean);
                jacobian[(row, 0)] = j[0];
                jacobian[(row, 1)] = j[1];
                innovation[row] = m.value - range_value(robot, &belief.mean);
            }
            MeasurementKind::Bearing => {
                // A mean sitting exactly on the robot makes the bearing model
                // singular; treat it like a singular update.
                let j = bearing_jacobian_at(robot, &belief.mean)
                    .map_err(|_| EstimationError::SingularInnovationCovariance)?;
                let predicted = bearing_value(robot, &belief.mean)
                    .map_err(|_| EstimationError::SingularInnovationCovariance)?;
                jacobian[(row, 0)] = j[0];
                jacobian[(row, 1)] = j[1];
                innovation[row] = wrap_angle(m.value - predicted);
            }
        }
    }
    let noise = DMatrix::from_diagonal(&DVector::from_row_slice(variances));
    let p = DMatrix::from_fn(2, 2, |i, j| belief.covariance[(i, j)]);
    let innovation_cov = &jacobian * &p * jacobian.transpose() + &noise;
    let inv = innovation_cov
        .clone()
        .try_inverse()
        .ok_or(EstimationError::SingularInnovationCovariance)?;
    let gain = &p * jacobian.transpose() * inv;

    let corrected = &gain * innovation;
    let mean = belief.mean + Vector2::new(corrected[0], corrected[1]);

    // Joseph form: (I - KH) P (I - KH)^T + K R K^T.
    let identity = DMatrix::identity(2, 2);
    let i_kh = identity - &gain * jacobian;
    let updated = &i_kh * p * i_kh.transpose() + &gain * noise * gain.transpose();
    let covariance = clamp_psd(symmetrize(Matrix2::from_fn(|i, j| updated[(i, j)])));
    Ok(EkfBelief { mean, covariance })
}

fn symmetrize(m: Matrix2<f64>) -> Matrix2<f64> {
    (m + m.transpose()) * 0.5
}

/// Clamps negative eigenvalues of a symmetric 2x2 matrix to zero. Rounding
/// may push an eigenvalue slightly negative; anything below -1e-10 would be a
/// real defect and is asserted against.
fn clamp_psd(m: Matrix2<f64>) -> Matrix2<f64> {
    let eigen = nalgebra::SymmetricEigen::new(m);
    debug_assert!(
        eigen.eigenvalues.min() >= -1e-10,
        "covariance lost positive semidefiniteness: {:?}",
        eigen.eigenvalues
    );
    if eigen.eigenvalues.min() >= 0.0 {
        return m;
    }
    let clamped = eigen.eigenvalues.map(|v| v.max(0.0));
    eigen.eigenvectors * Matrix2::from_diagonal(&clamped) * eigen.eigenvectors.transpose()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::RobotKind;
    use crate::sensing;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn target(x: f64, y: f64, t: f64) -> TargetState {
        TargetState::new(Vector2::new(x, y), 20.0, 0.1, t).unwrap()
    }

    fn robot(x: f64, y: f64) -> RobotState {
        RobotState::new(Vector2::new(x, y), 0.3, RobotKind::Sufficient)
    }

    fn exact_measurements(robot_state: &RobotState, point: &Vector2<f64>) -> Vec<Measurement> {
        vec![
            Measurement {
                value: sensing::range_value(robot_state, point),
                kind: MeasurementKind::Range,
                robot_index: 0,
                target_index: 0,
            },
            Measurement {
                value: sensing::bearing_value(robot_state, point).unwrap(),
                kind: MeasurementKind::Bearing,
                robot_index: 0,
                target_index: 0,
            },
        ]
    }

    #[test]
    fn initial_belief_has_designed_error() {
        let belief = initial_belief(&Vector2::new(3.0, -1.0));
        assert_relative_eq!(
            (belief.mean - Vector2::new(3.0, -1.0)).norm(),
            0.5f64.sqrt()
        );
        assert_relative_eq!(belief.trace(), 1.0);
    }

    #[test]
    fn predict_with_zero_noise_keeps_covariance() {
        let belief = EkfBelief::new(Vector2::zeros(), Matrix2::identity());
        let next = ekf_predict(&belief, &target(0.0, 0.0, 0.0), 0.1, &Matrix2::zeros());
        assert_eq!(next.covariance, belief.covariance);
    }

    #[test]
    fn predict_applies_known_drift() {
        let belief = EkfBelief::new(Vector2::zeros(), Matrix2::identity());
        let next = ekf_predict(&belief, &target(5.0, 5.0, 0.0), 0.1, &Matrix2::zeros());
        assert!(next.mean.x.abs() < 1e-12);
        assert_relative_eq!(next.mean.y, 0.2, max_relative = 1e-12);
    }

    #[test]
    fn predict_grows_trace_by_process_noise() {
        let sigma = 0.2f64;
        let q = Matrix2::identity() * sigma * sigma;
        let belief = EkfBelief::new(Vector2::zeros(), Matrix2::identity());
        let next = ekf_predict(&belief, &target(0.0, 0.0, 0.0), 0.1, &q);
        assert_relative_eq!(next.trace(), belief.trace() + 2.0 * sigma * sigma * 0.1);
    }

    #[test]
    fn trace_grows_linearly_without_measurements() {
        let q = Matrix2::identity() * 0.04;
        let mut belief = EkfBelief::new(Vector2::zeros(), Matrix2::identity() * 0.5);
        let t = target(0.0, 0.0, 0.0);
        for k in 1..=10 {
            belief = ekf_predict(&belief, &t, 0.1, &q);
            assert_relative_eq!(belief.trace(), 1.0 + k as f64 * q.trace() * 0.1);
        }
    }

    #[test]
    fn empty_update_is_identity() {
        let belief = EkfBelief::new(Vector2::new(1.0, 2.0), Matrix2::identity());
        let next = ekf_update(&belief, &[], &[], &[]).unwrap();
        assert_eq!(next, belief);
    }

    #[test]
    fn exact_measurements_pin_a_static_target() {
        // Predict on a static target only re-inflates the covariance; the
        // repeated exact-measurement update then contracts the mean onto the
        // truth (the filter's fixed point).
        let r = robot(0.0, 0.0);
        let truth = Vector2::new(3.0, 4.0);
        let q = Matrix2::identity() * 0.04;
        let mut belief = initial_belief(&truth);
        let variances = [1e-12, 1e-12];
        for _ in 0..50 {
            belief = EkfBelief::new(belief.mean, belief.covariance + q * 0.1);
            belief =
                ekf_update(&belief, &exact_measurements(&r, &truth), &[r], &variances).unwrap();
        }
        assert!(
            (belief.mean - truth).norm() < 1e-3,
            "residual error {}",
            (belief.mean - truth).norm()
        );
    }

    #[test]
    fn update_never_increases_trace() {
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        let r = robot(0.0, 0.0);
        for _ in 0..100 {
            let truth = Vector2::new(rng.random_range(-8.0..8.0), rng.random_range(-8.0..8.0));
            if (truth - r.position).norm() < 0.5 {
                continue;
            }
            let spread = rng.random_range(0.05..2.0);
            let belief = EkfBelief::new(
                truth + Vector2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
                Matrix2::identity() * spread,
            );
            let next = ekf_update(
                &belief,
                &exact_measurements(&r, &truth),
                &[r],
                &[0.04, 0.04],
            )
            .unwrap();
            assert!(next.trace() <= belief.trace() + 1e-12);
            // Covariance stays symmetric PSD.
            assert!((next.covariance[(0, 1)] - next.covariance[(1, 0)]).abs() < 1e-12);
            let eig = nalgebra::SymmetricEigen::new(next.covariance);
            assert!(eig.eigenvalues.min() >= -1e-10);
        }
    }

    #[test]
    fn bearing_innovation_wraps_across_pi() {
        // True target just below the -pi side, mean just above the +pi side:
        // the raw innovation is ~2*pi but must collapse to a small correction.
        let r = robot(0.0, 0.0);
        let truth = Vector2::new(-5.0, -0.05);
        let belief = EkfBelief::new(Vector2::new(-5.0, 0.05), Matrix2::identity() * 0.1);
        let next = ekf_update(
            &belief,
            &exact_measurements(&r, &truth),
            &[r],
            &[0.04, 0.04],
        )
        .unwrap();
        assert!(
            (next.mean - truth).norm() < (belief.mean - truth).norm(),
            "update moved away from the target"
        );
    }

    #[test]
    fn unknown_robot_index_errors() {
        let belief = EkfBelief::new(Vector2::zeros(), Matrix2::identity());
        let m = Measurement {
            value: 1.0,
            kind: MeasurementKind::Range,
            robot_index: 3,
            target_index: 0,
        };
        assert_eq!(
            ekf_update(&belief, &[m], &[], &[0.04]),
            Err(EstimationError::UnknownRobot(3))
        );
    }

    #[test]
    fn singular_innovation_is_reported() {
        // Zero covariance and zero measurement noise make S exactly zero.
        let r = robot(0.0, 0.0);
        let belief = EkfBelief::new(Vector2::new(3.0, 4.0), Matrix2::zeros());
        let m = Measurement {
            value: 12.5,
            kind: MeasurementKind::Range,
            robot_index: 0,
            target_index: 0,
        };
        assert_eq!(
            ekf_update(&belief, &[m], &[r], &[0.0]),
            Err(EstimationError::SingularInnovationCovariance)
        );
    }
}
