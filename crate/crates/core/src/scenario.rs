//! Scenario configuration, world state, and seeded construction.
//!
//! A scenario is built from a [`ScenarioConfig`]: `n_sufficient` robots with
//! range+bearing sensors, `n_limited` single-sensor robots, and `n_targets`
//! targets on noisy circular trajectories. Robots are placed uniformly at
//! random inside a square of the configured half-width; targets are placed
//! uniformly in the same square with a random circular-motion phase. All
//! randomness flows through one seeded generator, so a fixed config yields a
//! bit-identical world.

use std::collections::BTreeSet;
use std::f64::consts::{PI, TAU};
use std::path::Path;

use nalgebra::Vector2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::motion::wrap_angle;

/// Sensor modality carried by limited robots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitedSensorKind {
    RangeOnly,
    BearingOnly,
}

/// Full description of a simulation scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// Number of robots with both range and bearing sensors.
    pub n_sufficient: usize,
    /// Number of single-sensor robots (must pair up to track).
    pub n_limited: usize,
    /// Number of targets.
    pub n_targets: usize,
    /// Simulation length in steps.
    pub time_steps: usize,
    /// Integration step (s).
    pub dt: f64,
    /// Target process-noise standard deviation (m).
    pub process_noise_sigma: f64,
    /// Range measurement noise standard deviation (m).
    pub range_noise_sigma: f64,
    /// Bearing measurement noise standard deviation (rad).
    pub bearing_noise_sigma: f64,
    /// Target tangential speed (m/s).
    pub target_speed: f64,
    /// Target angular rate (rad/s).
    pub target_angular_rate: f64,
    /// Robot linear-velocity limit (m/s).
    pub robot_max_speed: f64,
    /// RNG seed; fixes placement, phases, and every noise draw.
    pub seed: u64,
    /// Modality of the limited robots' single sensor.
    pub limited_sensor_kind: LimitedSensorKind,
    /// Half-width of the square placement region (m).
    pub placement_box_half_width: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_sufficient: 2,
            n_limited: 3,
            n_targets: 2,
            time_steps: 100,
            dt: 0.1,
            process_noise_sigma: 0.2,
            range_noise_sigma: 0.2,
            bearing_noise_sigma: 0.2,
            target_speed: 2.0,
            target_angular_rate: 0.1,
            robot_max_speed: 2.0,
            seed: 0,
            limited_sensor_kind: LimitedSensorKind::RangeOnly,
            placement_box_half_width: 10.0,
        }
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error(
        "infeasible scenario: {n_sufficient} sufficient + floor({n_limited}/2) pairs < {n_targets} targets"
    )]
    InfeasibleScenario {
        n_sufficient: usize,
        n_limited: usize,
        n_targets: usize,
    },
    #[error("invalid parameter {name}: {message}")]
    InvalidParameter { name: &'static str, message: String },
    #[error("target angular rate must be nonzero")]
    ZeroAngularRate,
    #[error("config line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("config line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("config line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: String },
    #[error("failed to read config: {0}")]
    Io(#[from] std::io::Error),
}

impl ScenarioConfig {
    /// Number of assignable units a scenario can field at once.
    pub fn unit_capacity(&self) -> usize {
        self.n_sufficient + self.n_limited / 2
    }

    /// Checks every config invariant; [`build_scenario`] and the harness
    /// refuse configs that fail here.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.unit_capacity() < self.n_targets {
            return Err(ScenarioError::InfeasibleScenario {
                n_sufficient: self.n_sufficient,
                n_limited: self.n_limited,
                n_targets: self.n_targets,
            });
        }
        let positive: [(&'static str, f64); 4] = [
            ("dt", self.dt),
            ("target_speed", self.target_speed),
            ("robot_max_speed", self.robot_max_speed),
            ("placement_box_half_width", self.placement_box_half_width),
        ];
        for (name, value) in positive {
            if value.is_nan() || value <= 0.0 {
                return Err(ScenarioError::InvalidParameter {
                    name,
                    message: format!("must be > 0, got {value}"),
                });
            }
        }
        // Noise levels may be zero (noiseless runs are a supported mode) but
        // never negative.
        let nonnegative: [(&'static str, f64); 3] = [
            ("process_noise_sigma", self.process_noise_sigma),
            ("range_noise_sigma", self.range_noise_sigma),
            ("bearing_noise_sigma", self.bearing_noise_sigma),
        ];
        for (name, value) in nonnegative {
            if value.is_nan() || value < 0.0 {
                return Err(ScenarioError::InvalidParameter {
                    name,
                    message: format!("must be >= 0, got {value}"),
                });
            }
        }
        if self.time_steps < 1 {
            return Err(ScenarioError::InvalidParameter {
                name: "time_steps",
                message: "must be >= 1".into(),
            });
        }
        if self.target_angular_rate == 0.0 {
            return Err(ScenarioError::ZeroAngularRate);
        }
        Ok(())
    }

    /// Parses the flat `key = value` config format. `#` starts a comment,
    /// blank lines are skipped, unknown and duplicate keys are errors, and
    /// missing keys fall back to [`ScenarioConfig::default`].
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        let mut config = Self::default();
        let mut seen = BTreeSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = match raw.split_once('#') {
                Some((before, _)) => before,
                None => raw,
            }
            .trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| ScenarioError::Parse {
                    line,
                    message: format!("expected `key = value`, got `{content}`"),
                })?;
            let key = key.trim();
            let value = value.trim();
            if !seen.insert(key.to_string()) {
                return Err(ScenarioError::DuplicateKey {
                    line,
                    key: key.to_string(),
                });
            }
            config.set_field(key, value, line)?;
        }
        Ok(config)
    }

    /// Reads and parses a config file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ScenarioError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    fn set_field(&mut self, key: &str, value: &str, line: usize) -> Result<(), ScenarioError> {
        fn num<T: std::str::FromStr>(value: &str, line: usize) -> Result<T, ScenarioError> {
            value.parse().map_err(|_| ScenarioError::Parse {
                line,
                message: format!("cannot parse `{value}`"),
            })
        }
        match key {
            "n_sufficient" => self.n_sufficient = num(value, line)?,
            "n_limited" => self.n_limited = num(value, line)?,
            "n_targets" => self.n_targets = num(value, line)?,
            "time_steps" => self.time_steps = num(value, line)?,
            "dt" => self.dt = num(value, line)?,
            "process_noise_sigma" => self.process_noise_sigma = num(value, line)?,
            "range_noise_sigma" => self.range_noise_sigma = num(value, line)?,
            "bearing_noise_sigma" => self.bearing_noise_sigma = num(value, line)?,
            "target_speed" => self.target_speed = num(value, line)?,
            "target_angular_rate" => self.target_angular_rate = num(value, line)?,
            "robot_max_speed" => self.robot_max_speed = num(value, line)?,
            "seed" => self.seed = num(value, line)?,
            "placement_box_half_width" => self.placement_box_half_width = num(value, line)?,
            "limited_sensor_kind" => {
                self.limited_sensor_kind = match value {
                    "range_only" => LimitedSensorKind::RangeOnly,
                    "bearing_only" => LimitedSensorKind::BearingOnly,
                    other => {
                        return Err(ScenarioError::Parse {
                            line,
                            message: format!(
                        "limited_sensor_kind must be `range_only` or `bearing_only`, got `{other}`"
                    ),
                        })
                    }
                }
            }
            other => {
                return Err(ScenarioError::UnknownKey {
                    line,
                    key: other.to_string(),
                })
            }
        }
        Ok(())
    }
}

/// Sensing class of a robot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RobotKind {
    /// Range + bearing; can track a target alone.
    Sufficient,
    /// Single sensor; must be paired.
    Limited,
}

/// Planar unicycle pose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotState {
    pub position: Vector2<f64>,
    /// Heading, normalized to (-pi, pi].
    pub heading: f64,
    pub kind: RobotKind,
}

impl RobotState {
    pub fn new(position: Vector2<f64>, heading: f64, kind: RobotKind) -> Self {
        Self {
            position,
            heading: wrap_angle(heading),
            kind,
        }
    }
}

/// Robot control input: linear and angular velocity.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RobotAction {
    pub linear_velocity: f64,
    pub angular_velocity: f64,
}

impl RobotAction {
    pub fn new(linear_velocity: f64, angular_velocity: f64) -> Self {
        Self {
            linear_velocity,
            angular_velocity,
        }
    }
}

/// Target on a circular trajectory of radius `radius`, angular rate
/// `angular_rate`, with `phase_time` the time argument entering sin/cos.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetState {
    pub position: Vector2<f64>,
    pub radius: f64,
    pub angular_rate: f64,
    pub phase_time: f64,
}

impl TargetState {
    pub fn new(
        position: Vector2<f64>,
        radius: f64,
        angular_rate: f64,
        phase_time: f64,
    ) -> Result<Self, ScenarioError> {
        if radius.is_nan() || radius <= 0.0 {
            return Err(ScenarioError::InvalidParameter {
                name: "radius",
                message: format!("must be > 0, got {radius}"),
            });
        }
        Ok(Self {
            position,
            radius,
            angular_rate,
            phase_time,
        })
    }
}

/// Complete world snapshot: all robots, all targets, and the step clock.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    pub robots: Vec<RobotState>,
    pub targets: Vec<TargetState>,
    /// Completed simulation steps.
    pub step: usize,
    /// Elapsed time, `step * dt` (s).
    pub clock: f64,
}

/// Circle radius consistent with a tangential speed and angular rate
/// (`radius = speed / |angular_rate|`).
pub fn derive_target_radius(speed: f64, angular_rate: f64) -> Result<f64, ScenarioError> {
    if angular_rate == 0.0 {
        return Err(ScenarioError::ZeroAngularRate);
    }
    Ok(speed / angular_rate.abs())
}

/// Builds the initial world from a config with a fresh RNG seeded from
/// `config.seed`.
pub fn build_scenario(config: &ScenarioConfig) -> Result<WorldState, ScenarioError> {
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    build_scenario_with_rng(config, &mut rng)
}

/// Builds the initial world, drawing placement and phases from `rng`. The
/// harness uses this form so the simulation noise continues the same stream.
pub fn build_scenario_with_rng(
    config: &ScenarioConfig,
    rng: &mut ChaCha12Rng,
) -> Result<WorldState, ScenarioError> {
    config.validate()?;
    let w = config.placement_box_half_width;
    let n_robots = config.n_sufficient + config.n_limited;
    let mut robots = Vec::with_capacity(n_robots);
    for i in 0..n_robots {
        let x = rng.random_range(-w..w);
        let y = rng.random_range(-w..w);
        let heading = rng.random_range(-PI..PI);
        let kind = if i < config.n_sufficient {
            RobotKind::Sufficient
        } else {
            RobotKind::Limited
        };
        robots.push(RobotState::new(Vector2::new(x, y), heading, kind));
    }
    let radius = derive_target_radius(config.target_speed, config.target_angular_rate)?;
    let mut targets = Vec::with_capacity(config.n_targets);
    for _ in 0..config.n_targets {
        let x = rng.random_range(-w..w);
        let y = rng.random_range(-w..w);
        let phase_angle = rng.random_range(0.0..TAU);
        targets.push(TargetState::new(
            Vector2::new(x, y),
            radius,
            config.target_angular_rate,
            phase_angle / config.target_angular_rate,
        )?);
    }
    Ok(WorldState {
        robots,
        targets,
        step: 0,
        clock: 0.0,
    })
}
