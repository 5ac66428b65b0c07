//! Discrete-time kinematics: unicycle robots and noisy circular targets.

use nalgebra::Vector2;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};

use crate::scenario::{RobotAction, RobotState, TargetState};

/// Normalizes an angle to (-pi, pi].
pub fn wrap_angle(angle: f64) -> f64 {
    let mut a = angle.rem_euclid(std::f64::consts::TAU);
    if a > std::f64::consts::PI {
        a -= std::f64::consts::TAU;
    }
    a
}

/// Forward-Euler unicycle step; heading is renormalized after the update.
pub fn step_robot(state: &RobotState, action: &RobotAction, dt: f64) -> RobotState {
    debug_assert!(dt > 0.0);
    let v = action.linear_velocity;
    RobotState {
        position: state.position
            + Vector2::new(v * state.heading.cos() * dt, v * state.heading.sin() * dt),
        heading: wrap_angle(state.heading + action.angular_velocity * dt),
        kind: state.kind,
    }
}

/// Drift velocity of a circular-motion target at its current phase time.
pub fn circular_drift(target: &TargetState) -> Vector2<f64> {
    circular_drift_at(target.radius, target.angular_rate, target.phase_time)
}

/// Drift velocity of circular motion with radius `d`, rate `phi`, at time `t`:
/// `(-d*phi*sin(phi*t), d*phi*cos(phi*t))`.
pub fn circular_drift_at(d: f64, phi: f64, t: f64) -> Vector2<f64> {
    Vector2::new(-d * phi * (phi * t).sin(), d * phi * (phi * t).cos())
}

/// Euler step of the noiseless circular motion; the phase advances with the
/// step.
pub fn step_target_noiseless(state: &TargetState, dt: f64) -> TargetState {
    debug_assert!(dt > 0.0);
    TargetState {
        position: state.position + circular_drift(state) * dt,
        phase_time: state.phase_time + dt,
        ..*state
    }
}

/// Euler step of the circular motion plus process noise. Each position axis
/// receives an independent `N(0, sigma^2 * dt)` increment, the standard
/// discretization of continuous-time white noise with covariance
/// `diag(sigma^2, sigma^2)`.
pub fn step_target(state: &TargetState, dt: f64, rng: &mut ChaCha12Rng, sigma: f64) -> TargetState {
    let mut next = step_target_noiseless(state, dt);
    if sigma > 0.0 {
        let noise = Normal::new(0.0, sigma * dt.sqrt()).expect("valid noise std");
        next.position.x += noise.sample(rng);
        next.position.y += noise.sample(rng);
    }
    next
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::RobotKind;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use std::f64::consts::PI;

    fn robot(x: f64, y: f64, heading: f64) -> RobotState {
        RobotState::new(Vector2::new(x, y), heading, RobotKind::Sufficient)
    }

    fn target(d: f64, phi: f64, t: f64) -> TargetState {
        TargetState::new(Vector2::zeros(), d, phi, t).unwrap()
    }

    #[test]
    fn straight_line_translation() {
        let next = step_robot(&robot(0.0, 0.0, 0.0), &RobotAction::new(1.0, 0.0), 1.0);
        assert_relative_eq!(next.position.x, 1.0);
        assert_relative_eq!(next.position.y, 0.0);
        assert_relative_eq!(next.heading, 0.0);
    }

    #[test]
    fn northward_translation() {
        let next = step_robot(&robot(0.0, 0.0, PI / 2.0), &RobotAction::new(2.0, 0.0), 0.5);
        assert!(next.position.x.abs() < 1e-15);
        assert_relative_eq!(next.position.y, 1.0);
        assert_relative_eq!(next.heading, PI / 2.0);
    }

    #[test]
    fn heading_wraps_after_full_turn() {
        let next = step_robot(&robot(0.0, 0.0, 0.0), &RobotAction::new(0.0, PI), 2.0);
        assert_relative_eq!(next.heading, 0.0);
        assert_relative_eq!(next.position.x, 0.0);
    }

    #[test]
    fn zero_action_is_identity_on_position() {
        let start = robot(3.0, -4.0, 1.2);
        let next = step_robot(&start, &RobotAction::default(), 0.1);
        assert_eq!(next.position, start.position);
        assert_relative_eq!(next.heading, start.heading);
    }

    #[test]
    fn initial_drift_points_north() {
        // d=20, phi=0.1, t=0: velocity (0, 2), so dy = (0, 0.02) over 0.01 s.
        let next = step_target_noiseless(&target(20.0, 0.1, 0.0), 0.01);
        assert!(next.position.x.abs() < 1e-12);
        assert_relative_eq!(next.position.y, 0.02, max_relative = 1e-12);
        assert_relative_eq!(next.phase_time, 0.01);
    }

    #[test]
    fn noiseless_revolution_returns_to_start() {
        let dt = 1e-3;
        let phi = 0.1_f64;
        let steps = (std::f64::consts::TAU / (phi * dt)).round() as usize;
        let start = target(20.0, phi, 0.0);
        let mut state = start;
        for _ in 0..steps {
            state = step_target_noiseless(&state, dt);
        }
        assert!(
            (state.position - start.position).norm() < 1e-2,
            "drift {}",
            (state.position - start.position).norm()
        );
    }

    #[test]
    fn noiseless_speed_matches_radius_times_rate() {
        let mut state = target(20.0, 0.1, 0.3);
        for _ in 0..100 {
            let before = state.position;
            state = step_target_noiseless(&state, 0.05);
            let speed = (state.position - before).norm() / 0.05;
            assert!((speed - 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn seeded_noise_is_reproducible() {
        let run = || {
            let mut rng = ChaCha12Rng::seed_from_u64(7);
            let mut state = target(20.0, 0.1, 0.0);
            for _ in 0..20 {
                state = step_target(&state, 0.1, &mut rng, 0.2);
            }
            state
        };
        assert_eq!(run(), run());
    }

    proptest! {
        #[test]
        fn heading_stays_normalized(
            heading in -10.0f64..10.0,
            omega in -10.0f64..10.0,
            dt in 1e-3f64..5.0,
        ) {
            let next = step_robot(&robot(0.0, 0.0, heading), &RobotAction::new(0.0, omega), dt);
            prop_assert!(next.heading > -PI && next.heading <= PI);
        }
    }
}
