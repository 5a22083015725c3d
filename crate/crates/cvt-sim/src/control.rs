//! Steering laws and trigger schedulers.
//!
//! Every robot drives its virtual center `z` toward the centroid `C` of its
//! Voronoi cell by modulating the turn rate around the nominal `omega0`:
//!
//! ```text
//! u = omega0 + gamma * omega0 * g,    g = <z - C, v e^{i theta}>
//! ```
//!
//! `g` is the projection of the center error onto the velocity; its sign
//! says whether tightening (`u > omega0`) or widening the turn shrinks the
//! error. Three update disciplines share this law:
//!
//! - *continuous*: `u` recomputed every simulation step from fresh data;
//! - *event*: `u` held between triggers; the mismatch `e = u_held - u(t)`
//!   is monitored against the threshold `sigma gamma omega0 |g| + mu(t)`,
//!   and the hold ends when it is reached;
//! - *self-triggered*: no monitoring at all; at each update the robot
//!   computes the time derivative of its input and from it a horizon `xi`
//!   after which the mismatch could first reach the threshold, then sleeps
//!   until that deadline unless a neighbor broadcast arrives earlier.
//!
//! A controller never reads another robot's live state. Everything it knows
//! about neighbors comes from a [`LocalView`]: its own fresh state plus the
//! last broadcast snapshot of every other robot.

use std::collections::BTreeMap;

use crate::dynamics::{virtual_center_velocity, RobotState, WorldParams};
use crate::geometry::{
    cell_and_neighbors, cell_moments, centroid_jacobians, compute_voronoi, ConvexPolygon,
    DensityField, GeometryError, Point2, COINCIDENT_GENERATOR_TOL,
};

/// Below this magnitude the input derivative is treated as zero and the
/// self-trigger horizon falls back to its cap (the input is already at its
/// target to first order).
pub const UDOT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ControlError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("{name} must satisfy {requirement}, got {value}")]
    InvalidParam {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("robot {0} has no decay rate (got {1} rates)")]
    MissingAlpha(usize, usize),
}

/// Update discipline for the steering law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Mode {
    #[serde(rename = "continuous")]
    Continuous,
    #[serde(rename = "event")]
    Event,
    #[serde(rename = "self")]
    SelfTriggered,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Continuous => "continuous",
            Mode::Event => "event",
            Mode::SelfTriggered => "self",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "continuous" => Ok(Mode::Continuous),
            "event" => Ok(Mode::Event),
            "self" => Ok(Mode::SelfTriggered),
            other => Err(format!(
                "unknown mode `{other}` (expected continuous, event, or self)"
            )),
        }
    }
}

/// Gains and trigger parameters shared by the whole team.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerParams {
    /// Control gain, positive.
    pub gamma: f64,
    /// Threshold weight on `|g|`, strictly between 0 and 1.
    pub sigma: f64,
    /// Per-robot decay rates of the threshold offset `mu`, each in (0, 1).
    pub alpha: Vec<f64>,
    /// Nominal turn rate, rad/s, positive.
    pub omega0: f64,
    /// Cap on the self-trigger horizon, seconds, positive.
    pub xi_max: f64,
    pub mode: Mode,
}

impl ControllerParams {
    pub fn new(
        gamma: f64,
        sigma: f64,
        alpha: Vec<f64>,
        omega0: f64,
        xi_max: f64,
        mode: Mode,
    ) -> Result<Self, ControlError> {
        let positive = |name, value: f64| {
            if value.is_finite() && value > 0.0 {
                Ok(())
            } else {
                Err(ControlError::InvalidParam {
                    name,
                    requirement: "be finite and positive",
                    value,
                })
            }
        };
        positive("gamma", gamma)?;
        positive("omega0", omega0)?;
        positive("xi_max", xi_max)?;
        if !(sigma > 0.0 && sigma < 1.0) {
            return Err(ControlError::InvalidParam {
                name: "sigma",
                requirement: "lie strictly between 0 and 1",
                value: sigma,
            });
        }
        for &a in &alpha {
            if !(a > 0.0 && a < 1.0) {
                return Err(ControlError::InvalidParam {
                    name: "alpha",
                    requirement: "lie strictly between 0 and 1",
                    value: a,
                });
            }
        }
        Ok(ControllerParams {
            gamma,
            sigma,
            alpha,
            omega0,
            xi_max,
            mode,
        })
    }

    pub fn world(&self) -> WorldParams {
        WorldParams { omega0: self.omega0 }
    }

    fn alpha_for(&self, k: usize) -> Result<f64, ControlError> {
        self.alpha
            .get(k)
            .copied()
            .ok_or(ControlError::MissingAlpha(k, self.alpha.len()))
    }

    /// Time-decaying threshold offset `mu_k(t) = gamma omega0 e^{-alpha_k t}`
    /// (absolute simulation time, not time since the last trigger).
    pub fn mu(&self, k: usize, t: f64) -> Result<f64, ControlError> {
        Ok(self.gamma * self.omega0 * (-self.alpha_for(k)? * t).exp())
    }

    /// Mismatch threshold `sigma gamma omega0 |g| + mu_k(t)`.
    pub fn threshold(&self, k: usize, g: f64, t: f64) -> Result<f64, ControlError> {
        Ok(self.sigma * self.gamma * self.omega0 * g.abs() + self.mu(k, t)?)
    }
}

/// Last broadcast state of one other robot, as remembered locally.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborSnapshot {
    pub z: Point2,
    pub theta: f64,
    /// Turn rate the neighbor reported holding.
    pub u: f64,
    /// Forward speed (static, known from configuration).
    pub v: f64,
    /// Time the snapshot was taken.
    pub t: f64,
}

/// Everything a single robot's controller may read: its own fresh state and
/// the snapshot map of every other robot, keyed by robot index.
#[derive(Debug, Clone, Copy)]
pub struct LocalView<'a> {
    pub index: usize,
    pub state: RobotState,
    /// Own current virtual center.
    pub z: Point2,
    pub snapshots: &'a BTreeMap<usize, NeighborSnapshot>,
    pub region: &'a ConvexPolygon,
    pub density: &'a DensityField,
}

impl LocalView<'_> {
    /// Generator set as this robot believes it to be: own fresh center at
    /// its index, snapshot centers elsewhere. Snapshot keys together with
    /// `index` must form a contiguous range starting at zero.
    pub fn generators(&self) -> Vec<Point2> {
        let n = self.snapshots.len() + 1;
        let mut gens = vec![Point2::ZERO; n];
        gens[self.index] = self.z;
        for (&j, snap) in self.snapshots {
            debug_assert!(j != self.index && j < n, "snapshot key {j} out of range");
            gens[j] = snap.z;
        }
        gens
    }

    fn check_distinct(&self, gens: &[Point2]) -> Result<(), ControlError> {
        for i in 0..gens.len() {
            for j in (i + 1)..gens.len() {
                if gens[i].dist(gens[j]) < COINCIDENT_GENERATOR_TOL {
                    return Err(GeometryError::CoincidentGenerators(i, j).into());
                }
            }
        }
        Ok(())
    }
}

/// Cell of the owning robot as induced by its local view.
#[derive(Debug, Clone)]
pub struct LocalCell {
    pub centroid: Point2,
    pub mass: f64,
    pub cell: ConvexPolygon,
    /// Indices whose bisectors bound the cell, ascending.
    pub neighbors: Vec<usize>,
}

/// Computes the robot's Voronoi cell, its density-weighted centroid and
/// mass, and the neighbor set, all from the (possibly stale) local view.
pub fn local_centroid(view: &LocalView) -> Result<LocalCell, ControlError> {
    let gens = view.generators();
    view.check_distinct(&gens)?;
    let (cell, neighbors) = cell_and_neighbors(&gens, view.region, view.index)?;
    let cell = cell.ok_or(GeometryError::EmptyCell(view.index))?;
    let moments = cell_moments(&cell, view.density)?;
    Ok(LocalCell {
        centroid: moments.centroid,
        mass: moments.mass,
        cell,
        neighbors,
    })
}

/// Projection of the center error onto the velocity vector:
/// `g = <z - C, v e^{i theta}>`.
pub fn g_aux(z: Point2, c: Point2, state: &RobotState) -> f64 {
    (z - c).dot(state.heading() * state.v)
}

/// Scalar observables of one controller evaluation.
///
/// `o` is `|z - C| * v`, the product of the two vector norms entering `g`,
/// and `psi` the angle between those vectors, so `|g| = o |cos psi|` holds
/// to rounding. `f` is the trigger comparator `|e| - threshold`; negative
/// while the hold is sound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    pub g: f64,
    pub psi: f64,
    pub o: f64,
    pub f: f64,
}

/// One evaluation of the steering law on a local view.
#[derive(Debug, Clone)]
pub struct Evaluation {
    /// The would-be continuous input at this instant.
    pub u: f64,
    pub local: LocalCell,
    /// Diagnostics with `f` not yet filled (no mismatch context here).
    pub diag: Diagnostics,
}

/// Evaluates the steering law `u = omega0 (1 + gamma g)` on the view.
pub fn evaluate(view: &LocalView, params: &ControllerParams) -> Result<Evaluation, ControlError> {
    let local = local_centroid(view)?;
    let err = view.z - local.centroid;
    let vel = view.state.heading() * view.state.v;
    let g = err.dot(vel);
    let o = err.norm() * vel.norm();
    let psi = if err.norm() == 0.0 {
        0.0
    } else {
        err.cross(vel).atan2(err.dot(vel))
    };
    Ok(Evaluation {
        u: params.omega0 + params.gamma * params.omega0 * g,
        local,
        diag: Diagnostics {
            g,
            psi,
            o,
            f: f64::NAN,
        },
    })
}

/// The would-be continuous input on this view.
pub fn control_input(view: &LocalView, params: &ControllerParams) -> Result<f64, ControlError> {
    Ok(evaluate(view, params)?.u)
}

/// Trigger comparator `f = |e| - sigma gamma omega0 |g| - mu_k(t)`; an event
/// fires when it reaches zero from below.
pub fn trigger_function(
    e: f64,
    g: f64,
    t: f64,
    params: &ControllerParams,
    k: usize,
) -> Result<f64, ControlError> {
    Ok(e.abs() - params.threshold(k, g, t)?)
}

/// Hold bookkeeping of one robot between updates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriggerState {
    /// Time of the last own control update.
    pub t_last: f64,
    /// Input held since then.
    pub u_held: f64,
    /// Mismatch `u_held - u(t)` as of the last evaluation; exactly zero
    /// right after every update.
    pub e: f64,
    /// Next wake-up time (self mode only).
    pub next_deadline: Option<f64>,
    /// Own broadcasts so far.
    pub trigger_count: u64,
    /// Input derivative at the last update (self mode only).
    pub last_udot: f64,
}

impl TriggerState {
    /// State before the first update: nominal circling, no mismatch.
    pub fn initial(omega0: f64) -> Self {
        TriggerState {
            t_last: 0.0,
            u_held: omega0,
            e: 0.0,
            next_deadline: None,
            trigger_count: 0,
            last_udot: 0.0,
        }
    }
}

/// Outcome of one event-mode monitoring step.
#[derive(Debug, Clone)]
pub struct EventStep {
    pub fire: bool,
    pub trig: TriggerState,
    /// Diagnostics of the monitoring evaluation; `f` is the comparator value
    /// BEFORE any reset, so at fire steps it is the measured overshoot.
    pub diag: Diagnostics,
    /// The monitored continuous input at this instant.
    pub u_now: f64,
}

/// Event-mode monitoring at one instant: computes the current mismatch from
/// a fresh own state (snapshots stay as last received) and fires the trigger
/// when the comparator reaches zero. On a fire the held input is replaced by
/// the current one, so the mismatch resets to exactly zero.
pub fn event_step(
    t: f64,
    view: &LocalView,
    trig: &TriggerState,
    params: &ControllerParams,
) -> Result<EventStep, ControlError> {
    let eval = evaluate(view, params)?;
    let e = trig.u_held - eval.u;
    let f = trigger_function(e, eval.diag.g, t, params, view.index)?;
    let diag = Diagnostics { f, ..eval.diag };
    let fire = f >= 0.0;
    let trig = if fire {
        TriggerState {
            t_last: t,
            u_held: eval.u,
            e: 0.0,
            trigger_count: trig.trigger_count + 1,
            ..*trig
        }
    } else {
        TriggerState { e, ..*trig }
    };
    Ok(EventStep {
        fire,
        trig,
        diag,
        u_now: eval.u,
    })
}

/// Rebases the hold on the current view without counting a broadcast: the
/// receiving side of a neighbor update in event mode.
pub fn apply_update(
    t: f64,
    view: &LocalView,
    trig: &TriggerState,
    params: &ControllerParams,
) -> Result<(TriggerState, Evaluation), ControlError> {
    let eval = evaluate(view, params)?;
    let trig = TriggerState {
        t_last: t,
        u_held: eval.u,
        e: 0.0,
        ..*trig
    };
    Ok((trig, eval))
}

/// Time derivative of the steering law at an update instant, accounting for
/// own motion under the newly held input and for the anticipated motion of
/// each neighbor under its last broadcast input:
///
/// ```text
/// du/dt = gamma omega0 [ <dz/dt - dC/dt, v e^{i theta}>
///                      + <z - C, i v u e^{i theta}> ]
/// ```
///
/// with `dC/dt` assembled from finite-difference centroid Jacobians.
pub fn u_dot(
    view: &LocalView,
    u_held: f64,
    params: &ControllerParams,
) -> Result<f64, ControlError> {
    let gens = view.generators();
    view.check_distinct(&gens)?;
    let diagram = compute_voronoi(&gens, view.region)?;
    let k = view.index;
    let cell = diagram.cell(k).ok_or(GeometryError::EmptyCell(k))?;
    let c = cell_moments(cell, view.density)?.centroid;
    let jac = centroid_jacobians(&diagram, view.density, k)?;
    let world = params.world();

    let apply = |m: &[[f64; 2]; 2], v: Point2| {
        Point2::new(m[0][0] * v.re + m[0][1] * v.im, m[1][0] * v.re + m[1][1] * v.im)
    };
    let zdot_k = virtual_center_velocity(&view.state, u_held, &world);
    let mut cdot = Point2::ZERO;
    for (&j, m) in &jac {
        let zdot_j = if j == k {
            zdot_k
        } else {
            let snap = &view.snapshots[&j];
            Point2::from_angle(snap.theta) * (snap.v * (1.0 - snap.u / params.omega0))
        };
        cdot = cdot + apply(m, zdot_j);
    }

    let vel = view.state.heading() * view.state.v;
    let term1 = (zdot_k - cdot).dot(vel);
    let term2 = (view.z - c).dot(vel.rot90() * u_held);
    Ok(params.gamma * params.omega0 * (term1 + term2))
}

/// Self-trigger horizon: the earliest time the mismatch estimate
/// `|udot| (t - t_l)` could reach the threshold estimate
/// `sigma |u(t) - omega0| + mu_k(t_l)` under worst-case alignment,
///
/// ```text
/// xi = (sigma |u_held - omega0| + mu_k(t_l)) / ((1 - sigma) |udot|)
/// ```
///
/// capped at `xi_max`, which is also returned outright when the derivative
/// is below [`UDOT_FLOOR`] (input at its target, nothing to chase).
pub fn xi_next(
    u_held: f64,
    udot: f64,
    t_l: f64,
    params: &ControllerParams,
    k: usize,
) -> Result<f64, ControlError> {
    if udot.abs() <= UDOT_FLOOR {
        return Ok(params.xi_max);
    }
    let xi = (params.sigma * (u_held - params.omega0).abs() + params.mu(k, t_l)?)
        / ((1.0 - params.sigma) * udot.abs());
    Ok(xi.min(params.xi_max))
}

/// Outcome of a self-mode update (own deadline fire or neighbor reception):
/// fresh held input, its derivative, and the next deadline.
#[derive(Debug, Clone)]
pub struct SelfUpdate {
    pub trig: TriggerState,
    pub eval: Evaluation,
    /// Horizon used for the new deadline.
    pub xi: f64,
}

/// Recomputes the hold, the input derivative, and the wake-up deadline from
/// the current view. Used both when the robot's own deadline expires and
/// when a neighbor broadcast arrives (the deadline is then re-anchored at
/// the reception time). Does not count a broadcast; callers do.
pub fn self_update(
    t: f64,
    view: &LocalView,
    trig: &TriggerState,
    params: &ControllerParams,
) -> Result<SelfUpdate, ControlError> {
    let eval = evaluate(view, params)?;
    let u_held = eval.u;
    let udot = u_dot(view, u_held, params)?;
    let xi = xi_next(u_held, udot, t, params, view.index)?;
    let trig = TriggerState {
        t_last: t,
        u_held,
        e: 0.0,
        next_deadline: Some(t + xi),
        last_udot: udot,
        trigger_count: trig.trigger_count,
    };
    Ok(SelfUpdate { trig, eval, xi })
}
