//! Constant-speed unicycle kinematics.
//!
//! A robot at position `r = (x, y)` with heading `theta` moves at fixed
//! forward speed `v` and is steered only through its turn rate `u`:
//! `dr/dt = v e^{i theta}`, `dtheta/dt = u`. Under a constant `u` the robot
//! traces a circular arc (or a straight line when `u` vanishes), so
//! zero-order-hold propagation is exact: no integration scheme is involved.
//!
//! At the nominal turn rate `omega0` the robot circles the fixed point
//! `z = r + (v / omega0) i e^{i theta}`, its *virtual center*. The steering
//! laws in [`crate::control`] move `z`, not `r`, toward coverage goals.

use crate::geometry::Point2;

/// Turn rates with magnitude at or below this follow the straight-line
/// branch of the arc formulas.
pub const STRAIGHT_LINE_TURN_RATE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DynamicsError {
    #[error("orbit center undefined at u = 0 (infinite turning radius)")]
    ZeroTurnRate,
    #[error("propagation duration must be nonnegative, got {0}")]
    NegativeDuration(f64),
    #[error("{0} must be finite and positive, got {1}")]
    NonPositive(&'static str, f64),
    #[error("non-finite {0}")]
    NonFinite(&'static str),
}

/// Pose and speed of one unicycle. Heading is kept in `(-pi, pi]`; the
/// forward speed is fixed and positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotState {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub v: f64,
}

impl RobotState {
    pub fn new(x: f64, y: f64, theta: f64, v: f64) -> Result<Self, DynamicsError> {
        if !(x.is_finite() && y.is_finite() && theta.is_finite()) {
            return Err(DynamicsError::NonFinite("robot pose"));
        }
        if !(v.is_finite() && v > 0.0) {
            return Err(DynamicsError::NonPositive("speed", v));
        }
        Ok(RobotState {
            x,
            y,
            theta: wrap_angle(theta),
            v,
        })
    }

    pub fn position(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }

    /// Unit heading vector `e^{i theta}`.
    pub fn heading(&self) -> Point2 {
        Point2::from_angle(self.theta)
    }
}

/// World-level constants shared by every robot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorldParams {
    /// Nominal turn rate, rad/s, positive (robots orbit counter-clockwise
    /// when undisturbed).
    pub omega0: f64,
}

impl WorldParams {
    pub fn new(omega0: f64) -> Result<Self, DynamicsError> {
        if !(omega0.is_finite() && omega0 > 0.0) {
            return Err(DynamicsError::NonPositive("omega0", omega0));
        }
        Ok(WorldParams { omega0 })
    }
}

/// Normalizes an angle to `(-pi, pi]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let w = theta.rem_euclid(two_pi);
    if w > std::f64::consts::PI {
        w - two_pi
    } else {
        w
    }
}

/// The fixed point the robot circles at the nominal turn rate:
/// `z = r + (v / omega0) i e^{i theta}`.
pub fn virtual_center(state: &RobotState, world: &WorldParams) -> Point2 {
    state.position() + state.heading().rot90() * (state.v / world.omega0)
}

/// Center of the circle traced under a constant turn rate `u != 0`:
/// `c = r + (v / u) i e^{i theta}`.
pub fn orbit_center(state: &RobotState, u: f64) -> Result<Point2, DynamicsError> {
    if u == 0.0 {
        return Err(DynamicsError::ZeroTurnRate);
    }
    Ok(state.position() + state.heading().rot90() * (state.v / u))
}

/// Exact propagation under a turn rate held constant for `dt >= 0` seconds:
/// a circular arc for `|u|` above [`STRAIGHT_LINE_TURN_RATE`], a straight
/// line otherwise.
pub fn propagate(state: &RobotState, u: f64, dt: f64) -> Result<RobotState, DynamicsError> {
    if !(dt.is_finite() && u.is_finite()) {
        return Err(DynamicsError::NonFinite("propagation input"));
    }
    if dt < 0.0 {
        return Err(DynamicsError::NegativeDuration(dt));
    }
    let (x, y, theta) = if u.abs() > STRAIGHT_LINE_TURN_RATE {
        let theta1 = state.theta + u * dt;
        let r = state.v / u;
        (
            state.x + r * (theta1.sin() - state.theta.sin()),
            state.y - r * (theta1.cos() - state.theta.cos()),
            theta1,
        )
    } else {
        (
            state.x + state.v * dt * state.theta.cos(),
            state.y + state.v * dt * state.theta.sin(),
            state.theta,
        )
    };
    Ok(RobotState {
        x,
        y,
        theta: wrap_angle(theta),
        v: state.v,
    })
}

/// Velocity of the virtual center under the applied turn rate `u`:
/// `dz/dt = v e^{i theta} (1 - u / omega0)`. Zero exactly when `u = omega0`.
pub fn virtual_center_velocity(state: &RobotState, u: f64, world: &WorldParams) -> Point2 {
    state.heading() * (state.v * (1.0 - u / world.omega0))
}
