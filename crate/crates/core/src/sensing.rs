//! Range and bearing measurement models.
//!
//! The range sensor reports half the squared robot-target distance; its
//! gradient with respect to the target position is then simply the
//! displacement vector, which is what the observability rows build on. The
//! bearing sensor reports the target direction relative to the robot heading,
//! normalized to (-pi, pi].

use nalgebra::Vector2;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::motion::wrap_angle;
use crate::scenario::{RobotKind, RobotState, ScenarioConfig, TargetState};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasurementKind {
    Range,
    Bearing,
}

/// One scalar sensor reading of a target by a robot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    /// Half-squared-range (m^2) or bearing (rad, wrapped to (-pi, pi]).
    pub value: f64,
    pub kind: MeasurementKind,
    pub robot_index: usize,
    pub target_index: usize,
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum SensingError {
    #[error("robot and target positions coincide; bearing is undefined")]
    CoincidentPositions,
}

/// Noiseless range model at an arbitrary point: `0.5 * |point - robot|^2`.
pub fn range_value(robot: &RobotState, point: &Vector2<f64>) -> f64 {
    let delta = point - robot.position;
    0.5 * (delta.x * delta.x + delta.y * delta.y)
}

/// Noiseless bearing model at an arbitrary point:
/// `atan2(dy, dx) - heading`, wrapped to (-pi, pi].
pub fn bearing_value(robot: &RobotState, point: &Vector2<f64>) -> Result<f64, SensingError> {
    let delta = point - robot.position;
    if delta.x == 0.0 && delta.y == 0.0 {
        return Err(SensingError::CoincidentPositions);
    }
    Ok(wrap_angle(delta.y.atan2(delta.x) - robot.heading))
}

/// Range measurement of a target with an explicit additive noise term.
pub fn range_measurement(
    robot: &RobotState,
    target: &TargetState,
    noise: f64,
    robot_index: usize,
    target_index: usize,
) -> Measurement {
    Measurement {
        value: range_value(robot, &target.position) + noise,
        kind: MeasurementKind::Range,
        robot_index,
        target_index,
    }
}

/// Bearing measurement of a target with an explicit additive noise term.
pub fn bearing_measurement(
    robot: &RobotState,
    target: &TargetState,
    noise: f64,
    robot_index: usize,
    target_index: usize,
) -> Result<Measurement, SensingError> {
    Ok(Measurement {
        value: wrap_angle(bearing_value(robot, &target.position)? + noise),
        kind: MeasurementKind::Bearing,
        robot_index,
        target_index,
    })
}

fn sample_noise(rng: &mut ChaCha12Rng, sigma: f64) -> f64 {
    if sigma > 0.0 {
        Normal::new(0.0, sigma)
            .expect("valid noise std")
            .sample(rng)
    } else {
        0.0
    }
}

/// All measurements a robot takes of its assigned target: a sufficient robot
/// returns `[Range, Bearing]` with independent noise, a limited robot returns
/// its single configured modality.
pub fn measure(
    robot: &RobotState,
    target: &TargetState,
    rng: &mut ChaCha12Rng,
    config: &ScenarioConfig,
    robot_index: usize,
    target_index: usize,
) -> Result<Vec<Measurement>, SensingError> {
    use crate::scenario::LimitedSensorKind;
    match robot.kind {
        RobotKind::Sufficient => {
            let range_noise = sample_noise(rng, config.range_noise_sigma);
            let bearing_noise = sample_noise(rng, config.bearing_noise_sigma);
            Ok(vec![
                range_measurement(robot, target, range_noise, robot_index, target_index),
                bearing_measurement(robot, target, bearing_noise, robot_index, target_index)?,
            ])
        }
        RobotKind::Limited => match config.limited_sensor_kind {
            LimitedSensorKind::RangeOnly => {
                let noise = sample_noise(rng, config.range_noise_sigma);
                Ok(vec![range_measurement(
                    robot,
                    target,
                    noise,
                    robot_index,
                    target_index,
                )])
            }
            LimitedSensorKind::BearingOnly => {
                let noise = sample_noise(rng, config.bearing_noise_sigma);
                Ok(vec![bearing_measurement(
                    robot,
                    target,
                    noise,
                    robot_index,
                    target_index,
                )?])
            }
        },
    }
}
