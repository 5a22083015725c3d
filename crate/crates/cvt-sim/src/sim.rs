//! Deterministic fixed-step closed-loop simulation.
//!
//! Time advances on a fixed grid `t_i = i * dt`. Inputs applied at barrier
//! `i` are held over `(t_i, t_{i+1}]` and robots propagate exactly along the
//! resulting arcs, so the only approximations in a run are the trigger
//! monitoring resolution (event mode) and the quadrature of non-uniform
//! densities.
//!
//! Per mode, a barrier does:
//!
//! - *continuous*: refresh every snapshot with true states, recompute every
//!   input.
//! - *event*: monitor every robot's trigger function on its own fresh state
//!   and last-received snapshots (phase A, decisions only), then apply fires
//!   in ascending robot order with immediate broadcast delivery (phase B);
//!   receivers rebase their held input on the spot.
//! - *self*: nothing. Self-triggered robots act at their computed deadlines,
//!   which the loop processes at their exact times inside the step,
//!   propagating piecewise between them. A broadcast re-anchors every
//!   recipient's deadline at the reception time.
//!
//! Metrics are ground truth: the trace's cell centroids and coverage cost
//! come from a fresh diagram of the true virtual centers, even though the
//! controllers only ever see snapshots.

use std::collections::BTreeMap;
use std::io::Write as IoWrite;

use crate::control::{
    self, ControlError, Diagnostics, LocalView, Mode, NeighborSnapshot, TriggerState,
};
use crate::dynamics::{propagate, virtual_center, DynamicsError, RobotState, WorldParams};
use crate::geometry::{
    cell_moments, compute_voronoi, coverage_cost_of_diagram, ConvexPolygon, DensityField,
    GeometryError, Point2,
};
use crate::network::{Message, NetworkError, NetworkLog, NetworkStats};
use crate::scenario::ScenarioConfig;

/// Cap on trigger cascades processed inside one step; hitting it means the
/// schedule has collapsed into (numerical) Zeno behavior.
const MAX_EVENTS_PER_STEP: usize = 10_000;

/// Resolution of the optional event-time bisection refinement, seconds.
const REFINE_RESOLUTION: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("control failure at t = {t}: {source}")]
    Control { t: f64, source: ControlError },
    #[error("dynamics failure at t = {t}: {source}")]
    Dynamics { t: f64, source: DynamicsError },
    #[error("geometry failure at t = {t}: {source}")]
    Geometry { t: f64, source: GeometryError },
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("invariant violated at t = {t}: {what}")]
    Monitor { t: f64, what: String },
}

/// Per-robot observables of one trace sample.
#[derive(Debug, Clone, PartialEq)]
pub struct RobotSample {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    /// Input in effect for the following interval (the held one).
    pub u: f64,
    /// True virtual center.
    pub z: Point2,
    /// Centroid of this robot's cell in the fresh ground-truth diagram.
    pub c: Point2,
    /// Mass of that cell.
    pub m: f64,
    /// Mismatch after any updates at this barrier; exactly zero on rows
    /// where the robot fired.
    pub e: f64,
    /// Trigger comparator as monitored (before updates); at fire rows this
    /// is the measured overshoot, nonnegative.
    pub f: f64,
    /// Controller-view error projection, angle, and norm product; satisfy
    /// `|g| = o |cos psi|`.
    pub g: f64,
    pub psi: f64,
    pub o: f64,
}

/// One sampled instant of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub t: f64,
    pub robots: Vec<RobotSample>,
    /// Ground-truth coverage cost of the true centers.
    pub h_v: f64,
    /// Robots that broadcast since the previous sample (inclusive of this
    /// barrier).
    pub fired: Vec<usize>,
}

/// Everything recorded at one self-mode update instant, sufficient to replay
/// the controller computation (for derivative and soundness checks).
#[derive(Debug, Clone)]
pub struct SelfInterval {
    pub robot: usize,
    /// Update instant (deadline fire or neighbor reception).
    pub t: f64,
    pub xi: f64,
    pub u_held: f64,
    pub udot: f64,
    /// Threshold offset at the update instant.
    pub mu: f64,
    /// Whether `xi` was clamped to `xi_max` (or the derivative floor hit).
    pub capped: bool,
    pub state: RobotState,
    pub z: Point2,
    pub snapshots: BTreeMap<usize, NeighborSnapshot>,
}

/// Run-level results, also serialized to `summary.json`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct Summary {
    pub name: String,
    pub mode: String,
    pub dt: f64,
    /// Simulated horizon `n_steps * dt`.
    pub duration: f64,
    pub n_robots: usize,
    pub h_v_initial: f64,
    pub h_v_final: f64,
    /// `max_k |z_k - C_k|` at the final sample, meters.
    pub final_max_center_distance: f64,
    /// `max_k |u_k - omega0|` at the final sample, rad/s.
    pub final_max_input_deviation: f64,
    /// Same maximum taken over the last tenth of the samples.
    pub steady_max_input_deviation: f64,
    /// Final max center distance below the scenario's tolerance.
    pub converged: bool,
    pub trigger_counts: Vec<u64>,
    pub total_triggers: u64,
    pub message_count: usize,
    /// Smallest gap between one robot's consecutive broadcasts, seconds.
    pub min_inter_event: Option<f64>,
    /// Event mode: worst threshold overshoot at a fire, absolute (rad/s)
    /// and relative to the threshold at that instant.
    pub max_overshoot_abs: f64,
    pub max_overshoot_rel: f64,
    /// Largest increase of the coverage cost between consecutive samples
    /// (zero when it only ever decreased).
    pub h_v_max_increase: f64,
    /// Worst relative mismatch between the coverage cost and its
    /// cell-moment decomposition across samples.
    pub decomposition_max_residual: f64,
    /// A true virtual center left the region at some sample.
    pub center_exited_region: bool,
    /// Self mode: smallest horizon scheduled.
    pub min_xi: Option<f64>,
    /// Self mode: worst residual of the deadline construction identity
    /// `(1 - sigma) |udot| xi = sigma |u_held - omega0| + mu` over uncapped
    /// horizons.
    pub deadline_residual_max: Option<f64>,
    /// Self mode: minimum over a fine grid of the signed margin
    /// `sigma |udot tau + u_held - omega0| + mu - |udot| tau` up to each
    /// deadline. Negative values mean the linear estimate admitted a
    /// threshold crossing before the deadline (reported, not asserted).
    pub self_margin_min: Option<f64>,
}

/// Full output of [`run`].
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trace: Vec<TraceRecord>,
    pub log: NetworkLog,
    pub stats: NetworkStats,
    pub summary: Summary,
    /// Self mode only: one entry per control update.
    pub self_intervals: Vec<SelfInterval>,
}

/// Relative residual of the coverage-cost decomposition
/// `H = sum_k (J_k + M_k |z_k - C_k|^2)` at one configuration, computed by
/// two independent routes (direct quadrature vs cell moments).
pub fn verify_decomposition(
    generators: &[Point2],
    region: &ConvexPolygon,
    phi: &DensityField,
) -> Result<f64, GeometryError> {
    let diagram = compute_voronoi(generators, region)?;
    let h = coverage_cost_of_diagram(&diagram, phi);
    let mut sum = 0.0;
    for (k, cell) in diagram.cells().iter().enumerate() {
        let Some(cell) = cell else { continue };
        let m = cell_moments(cell, phi)?;
        sum += m.polar_moment + m.mass * (generators[k] - m.centroid).norm_sq();
    }
    Ok((h - sum).abs() / h.max(f64::MIN_POSITIVE))
}

struct Engine<'a> {
    cfg: &'a ScenarioConfig,
    world: WorldParams,
    robots: Vec<RobotState>,
    trig: Vec<TriggerState>,
    snaps: Vec<BTreeMap<usize, NeighborSnapshot>>,
    /// Each robot's neighbor set as of its own last evaluation.
    neighbor_sets: Vec<Vec<usize>>,
    log: NetworkLog,
    /// Monitored diagnostics per robot, refreshed at barriers.
    diag: Vec<Diagnostics>,
    /// Robots that broadcast since the last sample.
    fired_since_sample: Vec<usize>,
    trace: Vec<TraceRecord>,
    self_intervals: Vec<SelfInterval>,
    // Monitors and accumulators.
    h_prev: Option<f64>,
    h_max_increase: f64,
    decomp_max: f64,
    max_overshoot_abs: f64,
    max_overshoot_rel: f64,
    center_exited: bool,
    min_xi: Option<f64>,
    deadline_residual_max: Option<f64>,
    self_margin_min: Option<f64>,
}

impl<'a> Engine<'a> {
    fn new(cfg: &'a ScenarioConfig) -> Self {
        let n = cfg.robots.len();
        let world = cfg.params.world();
        let robots = cfg.robots.clone();
        let mut snaps: Vec<BTreeMap<usize, NeighborSnapshot>> = vec![BTreeMap::new(); n];
        // Seed everyone's snapshots from the true initial states, as if a
        // synchronization round had happened just before the run.
        for (k, snap_map) in snaps.iter_mut().enumerate() {
            for (j, r) in robots.iter().enumerate() {
                if j != k {
                    snap_map.insert(
                        j,
                        NeighborSnapshot {
                            z: virtual_center(r, &world),
                            theta: r.theta,
                            u: cfg.params.omega0,
                            v: r.v,
                            t: 0.0,
                        },
                    );
                }
            }
        }
        Engine {
            cfg,
            world,
            robots,
            trig: vec![TriggerState::initial(cfg.params.omega0); n],
            snaps,
            neighbor_sets: vec![Vec::new(); n],
            log: NetworkLog::default(),
            diag: vec![
                Diagnostics {
                    g: 0.0,
                    psi: 0.0,
                    o: 0.0,
                    f: 0.0,
                };
                n
            ],
            fired_since_sample: Vec::new(),
            trace: Vec::new(),
            self_intervals: Vec::new(),
            h_prev: None,
            h_max_increase: 0.0,
            decomp_max: 0.0,
            max_overshoot_abs: 0.0,
            max_overshoot_rel: 0.0,
            center_exited: false,
            min_xi: None,
            deadline_residual_max: None,
            self_margin_min: None,
        }
    }

    fn n(&self) -> usize {
        self.robots.len()
    }

    fn view(&self, k: usize) -> LocalView<'_> {
        LocalView {
            index: k,
            state: self.robots[k],
            z: virtual_center(&self.robots[k], &self.world),
            snapshots: &self.snaps[k],
            region: &self.cfg.region,
            density: &self.cfg.density,
        }
    }

    fn control_err(t: f64) -> impl Fn(ControlError) -> SimError {
        move |source| SimError::Control { t, source }
    }

    /// Union-rule recipient set for a broadcast by `k`: its own current
    /// neighbor estimate plus everyone who currently believes `k` is their
    /// neighbor.
    fn recipients_of(&self, k: usize) -> Vec<usize> {
        let mut r: Vec<usize> = self.neighbor_sets[k].clone();
        for (j, set) in self.neighbor_sets.iter().enumerate() {
            if j != k && set.contains(&k) && !r.contains(&j) {
                r.push(j);
            }
        }
        r.retain(|&j| j != k);
        r.sort_unstable();
        r
    }

    /// Broadcasts robot `k`'s current state and held input, delivering to
    /// the union recipient set. Each recipient stores the snapshot and
    /// immediately rebases its own hold (and, in self mode, re-anchors its
    /// deadline at `t`).
    fn broadcast_and_deliver(&mut self, t: f64, k: usize) -> Result<(), SimError> {
        let z = virtual_center(&self.robots[k], &self.world);
        let recipients = self.recipients_of(k);
        let msg = Message {
            t,
            sender: k,
            recipients: recipients.clone(),
            z,
            theta: self.robots[k].theta,
            u: self.trig[k].u_held,
        };
        self.log.broadcast(msg)?;
        self.fired_since_sample.push(k);
        let snapshot = NeighborSnapshot {
            z,
            theta: self.robots[k].theta,
            u: self.trig[k].u_held,
            v: self.robots[k].v,
            t,
        };
        for j in recipients {
            self.snaps[j].insert(k, snapshot);
            self.receive_update(t, j)?;
        }
        Ok(())
    }

    /// Recipient-side reaction to a fresh snapshot.
    fn receive_update(&mut self, t: f64, j: usize) -> Result<(), SimError> {
        match self.cfg.params.mode {
            Mode::Continuous => unreachable!("continuous mode does not broadcast"),
            Mode::Event => {
                let (trig, eval) = {
                    let view = self.view(j);
                    control::apply_update(t, &view, &self.trig[j], &self.cfg.params)
                        .map_err(Self::control_err(t))?
                };
                self.trig[j] = trig;
                self.neighbor_sets[j] = eval.local.neighbors;
            }
            Mode::SelfTriggered => {
                self.self_mode_update(t, j, false)?;
            }
        }
        Ok(())
    }

    /// A self-mode control update for robot `k` at time `t`: recompute the
    /// hold, its derivative, and the next deadline; record the interval for
    /// later soundness checks. `own_fire` distinguishes deadline fires
    /// (which broadcast and count) from neighbor receptions.
    fn self_mode_update(&mut self, t: f64, k: usize, own_fire: bool) -> Result<(), SimError> {
        let up = {
            let view = self.view(k);
            control::self_update(t, &view, &self.trig[k], &self.cfg.params)
                .map_err(Self::control_err(t))?
        };
        let mu = self
            .cfg
            .params
            .mu(k, t)
            .map_err(Self::control_err(t))?;
        let xi_formula = {
            let denom = (1.0 - self.cfg.params.sigma) * up.trig.last_udot.abs();
            if up.trig.last_udot.abs() <= control::UDOT_FLOOR {
                f64::INFINITY
            } else {
                (self.cfg.params.sigma * (up.trig.u_held - self.cfg.params.omega0).abs() + mu)
                    / denom
            }
        };
        let capped = up.xi < xi_formula || xi_formula.is_infinite();
        self.min_xi = Some(self.min_xi.map_or(up.xi, |m| m.min(up.xi)));
        self.self_intervals.push(SelfInterval {
            robot: k,
            t,
            xi: up.xi,
            u_held: up.trig.u_held,
            udot: up.trig.last_udot,
            mu,
            capped,
            state: self.robots[k],
            z: virtual_center(&self.robots[k], &self.world),
            snapshots: self.snaps[k].clone(),
        });
        if !capped {
            let residual = ((1.0 - self.cfg.params.sigma) * up.trig.last_udot.abs() * up.xi
                - (self.cfg.params.sigma * (up.trig.u_held - self.cfg.params.omega0).abs() + mu))
                .abs();
            let max = self.deadline_residual_max.get_or_insert(0.0);
            *max = max.max(residual);
        }
        // Signed soundness margin of the linear estimate on a fine grid up
        // to the deadline (reported, not asserted: worst-case alignment can
        // make it negative by design of the horizon formula).
        let b = up.trig.u_held - self.cfg.params.omega0;
        for i in 1..=16 {
            let tau = up.xi * (i as f64 / 16.0);
            let margin = self.cfg.params.sigma * (up.trig.last_udot * tau + b).abs() + mu
                - (up.trig.last_udot * tau).abs();
            let min = self.self_margin_min.get_or_insert(margin);
            *min = min.min(margin);
        }
        let mut trig = up.trig;
        if own_fire {
            trig.trigger_count += 1;
        }
        self.trig[k] = trig;
        self.neighbor_sets[k] = up.eval.local.neighbors;
        if own_fire {
            self.broadcast_and_deliver(t, k)?;
        }
        Ok(())
    }

    /// Forced initial update of every robot at t = 0, ascending index. In
    /// the triggered modes each update broadcasts, so later robots already
    /// see the earlier robots' fresh holds.
    fn initial_fires(&mut self) -> Result<(), SimError> {
        // Pre-compute everyone's neighbor estimate from the seeded
        // snapshots so the first broadcasts have recipient sets.
        for k in 0..self.n() {
            let local = {
                let view = self.view(k);
                control::local_centroid(&view).map_err(Self::control_err(0.0))?
            };
            self.neighbor_sets[k] = local.neighbors;
        }
        match self.cfg.params.mode {
            Mode::Continuous => self.continuous_barrier(0.0)?,
            Mode::Event => {
                for k in 0..self.n() {
                    let (trig, eval) = {
                        let view = self.view(k);
                        control::apply_update(0.0, &view, &self.trig[k], &self.cfg.params)
                            .map_err(Self::control_err(0.0))?
                    };
                    self.trig[k] = TriggerState {
                        trigger_count: trig.trigger_count + 1,
                        ..trig
                    };
                    self.neighbor_sets[k] = eval.local.neighbors.clone();
                    self.diag[k] = Diagnostics {
                        f: control::trigger_function(0.0, eval.diag.g, 0.0, &self.cfg.params, k)
                            .map_err(Self::control_err(0.0))?,
                        ..eval.diag
                    };
                    self.broadcast_and_deliver(0.0, k)?;
                }
            }
            Mode::SelfTriggered => {
                for k in 0..self.n() {
                    self.self_mode_update(0.0, k, true)?;
                }
            }
        }
        Ok(())
    }

    /// Continuous mode: refresh all snapshots with true states and rebase
    /// every hold. All decisions use the same pre-barrier states.
    fn continuous_barrier(&mut self, t: f64) -> Result<(), SimError> {
        let states = self.robots.clone();
        let held: Vec<f64> = self.trig.iter().map(|tr| tr.u_held).collect();
        for k in 0..self.n() {
            for j in 0..self.n() {
                if j != k {
                    self.snaps[k].insert(
                        j,
                        NeighborSnapshot {
                            z: virtual_center(&states[j], &self.world),
                            theta: states[j].theta,
                            u: held[j],
                            v: states[j].v,
                            t,
                        },
                    );
                }
            }
        }
        for k in 0..self.n() {
            let (trig, eval) = {
                let view = self.view(k);
                control::apply_update(t, &view, &self.trig[k], &self.cfg.params)
                    .map_err(Self::control_err(t))?
            };
            self.trig[k] = trig;
            self.neighbor_sets[k] = eval.local.neighbors.clone();
            self.diag[k] = Diagnostics {
                f: control::trigger_function(0.0, eval.diag.g, t, &self.cfg.params, k)
                    .map_err(Self::control_err(t))?,
                ..eval.diag
            };
        }
        Ok(())
    }

    /// Event mode barrier: monitor all robots on pre-barrier snapshots
    /// (phase A), then apply fires ascending with immediate delivery
    /// (phase B).
    fn event_barrier(&mut self, t: f64) -> Result<(), SimError> {
        let mut fires = Vec::new();
        for k in 0..self.n() {
            let step = {
                let view = self.view(k);
                control::event_step(t, &view, &self.trig[k], &self.cfg.params)
                    .map_err(Self::control_err(t))?
            };
            self.diag[k] = step.diag;
            if step.fire {
                fires.push(k);
                // Overshoot bookkeeping from the monitored comparator.
                let thr = self
                    .cfg
                    .params
                    .threshold(k, step.diag.g, t)
                    .map_err(Self::control_err(t))?;
                let overshoot = step.diag.f.max(0.0);
                self.max_overshoot_abs = self.max_overshoot_abs.max(overshoot);
                if thr > 0.0 {
                    self.max_overshoot_rel = self.max_overshoot_rel.max(overshoot / thr);
                }
                if self.cfg.strict && thr > 0.0 && overshoot / thr > 0.02 {
                    return Err(SimError::Monitor {
                        t,
                        what: format!(
                            "event threshold overshoot {overshoot:.3e} exceeds 2% of threshold {thr:.3e} for robot {k}"
                        ),
                    });
                }
            } else {
                // Commit the monitored mismatch.
                self.trig[k] = step.trig;
            }
        }
        for &k in &fires {
            let (trig, eval) = {
                let view = self.view(k);
                control::apply_update(t, &view, &self.trig[k], &self.cfg.params)
                    .map_err(Self::control_err(t))?
            };
            self.trig[k] = TriggerState {
                trigger_count: trig.trigger_count + 1,
                ..trig
            };
            self.neighbor_sets[k] = eval.local.neighbors.clone();
            self.broadcast_and_deliver(t, k)?;
        }
        Ok(())
    }

    /// Event mode barrier with bisection refinement: fires detected at the
    /// barrier are moved back to their threshold-crossing instants (found on
    /// the robot's own frozen-hold trajectory over the last step), processed
    /// in time order with immediate delivery, and the interval is then
    /// re-propagated piecewise. Crossings induced by in-interval deliveries
    /// surface at the next barrier.
    fn event_barrier_refined(&mut self, t: f64, dt: f64) -> Result<(), SimError> {
        let t0 = t - dt;
        let start_states = self.robots.clone();
        let mut crossings: Vec<(f64, usize)> = Vec::new();
        for k in 0..self.n() {
            let step = {
                let view = self.view(k);
                control::event_step(t, &view, &self.trig[k], &self.cfg.params)
                    .map_err(Self::control_err(t))?
            };
            self.diag[k] = step.diag;
            if step.fire {
                let t_star = self.refine_crossing(k, &start_states[k], t0, dt)?;
                crossings.push((t_star, k));
            } else {
                self.trig[k] = step.trig;
            }
        }
        if crossings.is_empty() {
            return Ok(());
        }
        // Rewind to the step start and replay the interval piecewise.
        self.robots = start_states;
        let mut t_now = t0;
        crossings.sort_by(|a, b| a.partial_cmp(b).expect("finite crossing times"));
        for (t_star, k) in crossings {
            self.propagate_all(t_now, t_star)?;
            t_now = t_star;
            let (trig, eval) = {
                let view = self.view(k);
                control::apply_update(t_star, &view, &self.trig[k], &self.cfg.params)
                    .map_err(Self::control_err(t_star))?
            };
            self.trig[k] = TriggerState {
                trigger_count: trig.trigger_count + 1,
                ..trig
            };
            self.neighbor_sets[k] = eval.local.neighbors.clone();
            self.broadcast_and_deliver(t_star, k)?;
        }
        self.propagate_all(t_now, t)?;
        Ok(())
    }

    /// Bisection of the comparator's sign change over `(t0, t0 + dt]` along
    /// robot `k`'s own trajectory under its held input, with snapshots
    /// frozen. The comparator is negative at `t0` (no fire last barrier) and
    /// nonnegative at the end.
    fn refine_crossing(
        &self,
        k: usize,
        start: &RobotState,
        t0: f64,
        dt: f64,
    ) -> Result<f64, SimError> {
        let f_at = |tau: f64| -> Result<f64, SimError> {
            let state = propagate(start, self.trig[k].u_held, tau)
                .map_err(|source| SimError::Dynamics { t: t0 + tau, source })?;
            let view = LocalView {
                index: k,
                state,
                z: virtual_center(&state, &self.world),
                snapshots: &self.snaps[k],
                region: &self.cfg.region,
                density: &self.cfg.density,
            };
            let step = control::event_step(t0 + tau, &view, &self.trig[k], &self.cfg.params)
                .map_err(Self::control_err(t0 + tau))?;
            Ok(step.diag.f)
        };
        let mut lo = 0.0;
        let mut hi = dt;
        if f_at(lo)? >= 0.0 {
            // Already at or past the threshold when the interval opened
            // (can happen right after a neighbor-induced rebase); fire at
            // the start.
            return Ok(t0);
        }
        while hi - lo > REFINE_RESOLUTION {
            let mid = 0.5 * (lo + hi);
            if f_at(mid)? >= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(t0 + hi)
    }

    /// Self mode: process all deadlines inside `(t_now, t_barrier]` at their
    /// exact times, propagating piecewise.
    fn self_interval(&mut self, mut t_now: f64, t_barrier: f64) -> Result<f64, SimError> {
        let mut processed = 0usize;
        loop {
            let next = (0..self.n())
                .filter_map(|k| self.trig[k].next_deadline.map(|d| (d, k)))
                .filter(|&(d, _)| d <= t_barrier)
                .min_by(|a, b| a.partial_cmp(b).expect("finite deadlines"));
            let Some((t_e, k)) = next else { break };
            processed += 1;
            if processed > MAX_EVENTS_PER_STEP {
                return Err(SimError::Monitor {
                    t: t_e,
                    what: format!(
                        "more than {MAX_EVENTS_PER_STEP} trigger events in one step (Zeno collapse)"
                    ),
                });
            }
            self.propagate_all(t_now, t_e)?;
            t_now = t_e;
            self.self_mode_update(t_e, k, true)?;
        }
        self.propagate_all(t_now, t_barrier)?;
        Ok(t_barrier)
    }

    fn propagate_all(&mut self, from: f64, to: f64) -> Result<(), SimError> {
        let dt = to - from;
        for k in 0..self.n() {
            self.robots[k] = propagate(&self.robots[k], self.trig[k].u_held, dt)
                .map_err(|source| SimError::Dynamics { t: to, source })?;
        }
        Ok(())
    }

    /// Ground-truth sample at a barrier. In self and continuous modes the
    /// per-robot diagnostics are recomputed as an observer would see them;
    /// event mode keeps the monitored phase-A values.
    fn sample(&mut self, t: f64) -> Result<(), SimError> {
        let zs: Vec<Point2> = self
            .robots
            .iter()
            .map(|r| virtual_center(r, &self.world))
            .collect();
        let diagram = compute_voronoi(&zs, &self.cfg.region)
            .map_err(|source| SimError::Geometry { t, source })?;
        let h_v = coverage_cost_of_diagram(&diagram, &self.cfg.density);

        // Decomposition monitor: H against cell moments.
        let mut decomposed = 0.0;
        let mut cs = vec![Point2::ZERO; self.n()];
        let mut ms = vec![0.0; self.n()];
        for k in 0..self.n() {
            match diagram.cell(k) {
                Some(cell) => {
                    let m = cell_moments(cell, &self.cfg.density)
                        .map_err(|source| SimError::Geometry { t, source })?;
                    decomposed += m.polar_moment + m.mass * (zs[k] - m.centroid).norm_sq();
                    cs[k] = m.centroid;
                    ms[k] = m.mass;
                }
                None => {
                    // True cell vanished: the center is far outside the
                    // region. Record the center itself so distances read 0.
                    cs[k] = zs[k];
                    ms[k] = 0.0;
                }
            }
        }
        let residual = (h_v - decomposed).abs() / h_v.max(f64::MIN_POSITIVE);
        self.decomp_max = self.decomp_max.max(residual);
        if self.cfg.strict && residual >= 1e-8 {
            return Err(SimError::Monitor {
                t,
                what: format!("coverage decomposition residual {residual:.3e} at or above 1e-8"),
            });
        }

        if let Some(prev) = self.h_prev {
            let increase = h_v - prev;
            self.h_max_increase = self.h_max_increase.max(increase.max(0.0));
            if self.cfg.strict && self.cfg.params.mode == Mode::Continuous && increase > 1e-9 {
                return Err(SimError::Monitor {
                    t,
                    what: format!("coverage cost increased by {increase:.3e} between samples"),
                });
            }
        }
        self.h_prev = Some(h_v);

        if zs.iter().any(|z| !self.cfg.region.contains(*z, 1e-9)) {
            self.center_exited = true;
        }

        // Observer diagnostics for the modes without per-barrier monitoring.
        if matches!(self.cfg.params.mode, Mode::SelfTriggered | Mode::Continuous) {
            for k in 0..self.n() {
                let eval = {
                    let view = self.view(k);
                    control::evaluate(&view, &self.cfg.params).map_err(Self::control_err(t))?
                };
                let e = self.trig[k].u_held - eval.u;
                self.trig[k].e = e;
                self.diag[k] = Diagnostics {
                    f: control::trigger_function(e, eval.diag.g, t, &self.cfg.params, k)
                        .map_err(Self::control_err(t))?,
                    ..eval.diag
                };
            }
        }

        let robots = (0..self.n())
            .map(|k| RobotSample {
                x: self.robots[k].x,
                y: self.robots[k].y,
                theta: self.robots[k].theta,
                u: self.trig[k].u_held,
                z: zs[k],
                c: cs[k],
                m: ms[k],
                e: self.trig[k].e,
                f: self.diag[k].f,
                g: self.diag[k].g,
                psi: self.diag[k].psi,
                o: self.diag[k].o,
            })
            .collect();
        let mut fired = std::mem::take(&mut self.fired_since_sample);
        fired.sort_unstable();
        fired.dedup();
        self.trace.push(TraceRecord {
            t,
            robots,
            h_v,
            fired,
        });
        Ok(())
    }

    fn finish(self) -> RunOutput {
        let stats = self.log.stats(self.n());
        let last = self.trace.last().expect("at least the t=0 sample exists");
        let final_max_center_distance = last
            .robots
            .iter()
            .map(|r| r.z.dist(r.c))
            .fold(0.0, f64::max);
        let final_max_input_deviation = last
            .robots
            .iter()
            .map(|r| (r.u - self.cfg.params.omega0).abs())
            .fold(0.0, f64::max);
        let tail = self.trace.len().saturating_sub(self.trace.len() / 10).max(1) - 1;
        let steady_max_input_deviation = self.trace[tail..]
            .iter()
            .flat_map(|rec| rec.robots.iter())
            .map(|r| (r.u - self.cfg.params.omega0).abs())
            .fold(0.0, f64::max);
        let is_self = self.cfg.params.mode == Mode::SelfTriggered;
        let summary = Summary {
            name: self.cfg.name.clone(),
            mode: self.cfg.params.mode.to_string(),
            dt: self.cfg.dt,
            duration: self.cfg.n_steps() as f64 * self.cfg.dt,
            n_robots: self.n(),
            h_v_initial: self.trace.first().map(|r| r.h_v).unwrap_or(0.0),
            h_v_final: last.h_v,
            final_max_center_distance,
            final_max_input_deviation,
            steady_max_input_deviation,
            converged: final_max_center_distance < self.cfg.convergence_tol,
            trigger_counts: stats.trigger_counts.clone(),
            total_triggers: stats.total_triggers(),
            message_count: stats.message_count,
            min_inter_event: stats.min_inter_event,
            max_overshoot_abs: self.max_overshoot_abs,
            max_overshoot_rel: self.max_overshoot_rel,
            h_v_max_increase: self.h_max_increase,
            decomposition_max_residual: self.decomp_max,
            center_exited_region: self.center_exited,
            min_xi: if is_self { self.min_xi } else { None },
            deadline_residual_max: if is_self {
                self.deadline_residual_max
            } else {
                None
            },
            self_margin_min: if is_self { self.self_margin_min } else { None },
        };
        RunOutput {
            trace: self.trace,
            log: self.log,
            stats,
            summary,
            self_intervals: self.self_intervals,
        }
    }
}

/// Runs a scenario to completion.
pub fn run(cfg: &ScenarioConfig) -> Result<RunOutput, SimError> {
    let mut engine = Engine::new(cfg);
    let n_steps = cfg.n_steps();
    let dt = cfg.dt;

    engine.initial_fires()?;
    engine.sample(0.0)?;

    for i in 1..=n_steps {
        let t = i as f64 * dt;
        match cfg.params.mode {
            Mode::Continuous => {
                engine.propagate_all(t - dt, t)?;
                engine.continuous_barrier(t)?;
            }
            Mode::Event => {
                engine.propagate_all(t - dt, t)?;
                if cfg.refine_event_times {
                    engine.event_barrier_refined(t, dt)?;
                } else {
                    engine.event_barrier(t)?;
                }
            }
            Mode::SelfTriggered => {
                engine.self_interval(t - dt, t)?;
            }
        }
        if i % cfg.sample_every == 0 || i == n_steps {
            engine.sample(t)?;
        }
    }

    Ok(engine.finish())
}

/// Writes the trace as CSV: `t`, fourteen per-robot columns suffixed `_k`
/// (0-based robot index), `h_v`, and the pipe-joined `fired` set.
pub fn write_trace_csv<W: IoWrite>(trace: &[TraceRecord], n: usize, w: &mut W) -> std::io::Result<()> {
    let mut header = String::from("t");
    for k in 0..n {
        for col in [
            "x", "y", "theta", "u", "z_re", "z_im", "c_re", "c_im", "m", "e", "f", "g", "psi", "o",
        ] {
            header.push_str(&format!(",{col}_{k}"));
        }
    }
    header.push_str(",h_v,fired");
    writeln!(w, "{header}")?;
    for rec in trace {
        let mut line = format!("{}", rec.t);
        for r in &rec.robots {
            line.push_str(&format!(
                ",{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.x, r.y, r.theta, r.u, r.z.re, r.z.im, r.c.re, r.c.im, r.m, r.e, r.f, r.g, r.psi,
                r.o
            ));
        }
        let fired: Vec<String> = rec.fired.iter().map(|k| k.to_string()).collect();
        line.push_str(&format!(",{},{}", rec.h_v, fired.join("|")));
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// Pretty JSON for the run summary.
pub fn summary_json(summary: &Summary) -> String {
    serde_json::to_string_pretty(summary).expect("summary serialization cannot fail")
}
