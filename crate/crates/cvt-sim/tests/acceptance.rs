//! End-to-end acceptance gate: nine checks covering geometry oracles,
//! gradient and decomposition identities, closed-loop convergence in all
//! three update modes, trigger soundness, dynamics exactness, and bitwise
//! determinism. Each test prints one `criterion N PASS` line on success.

use std::collections::BTreeMap;
use std::sync::OnceLock;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cvt_sim::control::{self, ControllerParams, LocalView, Mode, NeighborSnapshot};
use cvt_sim::dynamics::{propagate, virtual_center, RobotState, WorldParams};
use cvt_sim::geometry::{
    compute_voronoi, coverage_cost, coverage_gradient, ConvexPolygon, DensityField, Point2,
};
use cvt_sim::network::write_messages_csv;
use cvt_sim::scenario::ScenarioConfig;
use cvt_sim::sim::{self, verify_decomposition, write_trace_csv, RunOutput};

const REGION_W: f64 = 4.0;
const REGION_H: f64 = 2.8;

fn benchmark_region() -> ConvexPolygon {
    ConvexPolygon::rectangle(0.0, 0.0, REGION_W, REGION_H).unwrap()
}

fn uniform() -> DensityField {
    DensityField::uniform(1.0).unwrap()
}

/// Four well-separated generators inside the benchmark region, deterministic
/// per seed stream.
fn random_generators(rng: &mut ChaCha8Rng) -> Vec<Point2> {
    loop {
        let gens: Vec<Point2> = (0..4)
            .map(|_| {
                Point2::new(
                    rng.gen_range(0.05..REGION_W - 0.05),
                    rng.gen_range(0.05..REGION_H - 0.05),
                )
            })
            .collect();
        let ok = gens
            .iter()
            .enumerate()
            .all(|(i, a)| gens[i + 1..].iter().all(|b| a.dist(*b) > 0.05));
        if ok {
            return gens;
        }
    }
}

struct Timed {
    out: RunOutput,
    secs: f64,
}

fn timed_run(cfg: &ScenarioConfig) -> Timed {
    let started = Instant::now();
    let out = sim::run(cfg).expect("bundled scenario must run");
    Timed {
        out,
        secs: started.elapsed().as_secs_f64(),
    }
}

fn scenario(mode: Mode, sample_every: usize) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::builtin("paper_4robots").unwrap();
    cfg.params.mode = mode;
    cfg.sample_every = sample_every;
    cfg
}

fn continuous_run() -> &'static Timed {
    static RUN: OnceLock<Timed> = OnceLock::new();
    RUN.get_or_init(|| timed_run(&scenario(Mode::Continuous, 10)))
}

/// Event mode sampled at every step so the trace exposes every monitored
/// comparator value.
fn event_run() -> &'static Timed {
    static RUN: OnceLock<Timed> = OnceLock::new();
    RUN.get_or_init(|| timed_run(&scenario(Mode::Event, 1)))
}

fn self_run() -> &'static Timed {
    static RUN: OnceLock<Timed> = OnceLock::new();
    RUN.get_or_init(|| timed_run(&scenario(Mode::SelfTriggered, 100)))
}

#[test]
fn criterion_1_voronoi_cells_match_nearest_generator_rasterization() {
    let started = Instant::now();
    let region = benchmark_region();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
    let (nx, ny) = (400usize, 280usize);
    let (hx, hy) = (REGION_W / nx as f64, REGION_H / ny as f64);
    let mut worst_agreement = 1.0f64;
    for config in 0..50 {
        let gens = random_generators(&mut rng);
        let diagram = compute_voronoi(&gens, &region).unwrap();

        let area: f64 = diagram
            .cells()
            .iter()
            .flatten()
            .map(|c| c.area())
            .sum();
        let area_err = (area - REGION_W * REGION_H).abs() / (REGION_W * REGION_H);
        assert!(
            area_err < 1e-9,
            "config {config}: cell areas sum to {area}, relative error {area_err}"
        );

        let mut agree = 0usize;
        for i in 0..nx {
            for j in 0..ny {
                let p = Point2::new((i as f64 + 0.5) * hx, (j as f64 + 0.5) * hy);
                let nearest = (0..4)
                    .min_by(|&a, &b| {
                        (p - gens[a])
                            .norm_sq()
                            .partial_cmp(&(p - gens[b]).norm_sq())
                            .unwrap()
                    })
                    .unwrap();
                let inside = diagram
                    .cell(nearest)
                    .is_some_and(|cell| cell.contains(p, 1e-9));
                if inside {
                    agree += 1;
                }
            }
        }
        let agreement = agree as f64 / (nx * ny) as f64;
        worst_agreement = worst_agreement.min(agreement);
        assert!(
            agreement >= 0.999,
            "config {config}: rasterization agreement only {agreement}"
        );
    }
    let secs = started.elapsed().as_secs_f64();
    assert!(secs < 10.0, "raster oracle took {secs:.1} s, budget 10 s");
    println!(
        "criterion 1 PASS: 50 configs, worst pixel agreement {:.5}, areas exact to 1e-9, {:.2} s",
        worst_agreement, secs
    );
}

#[test]
fn criterion_2_gradient_matches_finite_differences() {
    let started = Instant::now();
    let region = benchmark_region();
    let phi = uniform();
    let mut rng = ChaCha8Rng::seed_from_u64(0x9E3779B9);
    let h = 1e-5;
    let mut checked = 0usize;
    let mut worst_rel = 0.0f64;
    while checked < 20 {
        let gens = random_generators(&mut rng);
        let base = compute_voronoi(&gens, &region).unwrap();
        if base.cells().iter().any(|c| c.is_none()) {
            continue;
        }

        // The finite-difference step must not change the diagram topology,
        // otherwise one-sided kinks would pollute the comparison.
        let mut topology_ok = true;
        'probe: for k in 0..4 {
            for unit in [Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)] {
                for sign in [1.0, -1.0] {
                    let mut moved = gens.clone();
                    moved[k] = moved[k] + unit * (sign * h);
                    let d = compute_voronoi(&moved, &region).unwrap();
                    if d.adjacency() != base.adjacency()
                        || d.cells().iter().any(|c| c.is_none())
                    {
                        topology_ok = false;
                        break 'probe;
                    }
                }
            }
        }
        if !topology_ok {
            continue;
        }

        let grad = coverage_gradient(&gens, &region, &phi).unwrap();
        for k in 0..4 {
            for (axis, unit) in [(0, Point2::new(1.0, 0.0)), (1, Point2::new(0.0, 1.0))] {
                let mut plus = gens.clone();
                plus[k] = plus[k] + unit * h;
                let mut minus = gens.clone();
                minus[k] = minus[k] + unit * (-h);
                let fd = (coverage_cost(&plus, &region, &phi).unwrap()
                    - coverage_cost(&minus, &region, &phi).unwrap())
                    / (2.0 * h);
                let analytic = if axis == 0 { grad[k].re } else { grad[k].im };
                let rel = (analytic - fd).abs() / fd.abs().max(1e-2);
                worst_rel = worst_rel.max(rel);
                assert!(
                    rel < 1e-4,
                    "config {checked} robot {k} axis {axis}: fd {fd} vs analytic {analytic}"
                );
            }
        }
        checked += 1;
    }
    let secs = started.elapsed().as_secs_f64();
    assert!(secs < 30.0, "gradient check took {secs:.1} s, budget 30 s");
    println!(
        "criterion 2 PASS: 20 topology-preserving configs, worst component error {:.2e} rel, {:.2} s",
        worst_rel, secs
    );
}

#[test]
fn criterion_3_cost_decomposes_into_cell_moments() {
    let region = benchmark_region();
    let phi = uniform();
    let mut rng = ChaCha8Rng::seed_from_u64(0xDEC0);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let gens = random_generators(&mut rng);
        let residual = verify_decomposition(&gens, &region, &phi).unwrap();
        worst = worst.max(residual);
        assert!(residual < 1e-8, "decomposition residual {residual}");
    }
    println!(
        "criterion 3 PASS: 20 configs, worst decomposition residual {:.2e} rel",
        worst
    );
}

#[test]
fn criterion_4_continuous_mode_descends_to_a_centroidal_configuration() {
    let run = continuous_run();
    let s = &run.out.summary;
    assert!(
        run.secs < 60.0,
        "continuous 120 s run took {:.1} s, budget 60 s",
        run.secs
    );

    for pair in run.out.trace.windows(2) {
        let increase = pair[1].h_v - pair[0].h_v;
        assert!(
            increase <= 1e-9,
            "H_V increased by {increase} between t = {} and t = {}",
            pair[0].t,
            pair[1].t
        );
    }

    assert!(
        s.final_max_center_distance < 0.02,
        "final center distance {}",
        s.final_max_center_distance
    );
    let omega0 = 0.536;
    assert!(
        s.final_max_input_deviation < 0.05 * omega0,
        "final input deviation {}",
        s.final_max_input_deviation
    );
    // Steady-orbit invariant over the last tenth of the run.
    assert!(
        s.steady_max_input_deviation < 0.05 * omega0,
        "steady input deviation {}",
        s.steady_max_input_deviation
    );
    println!(
        "criterion 4 PASS: H_V {:.3} -> {:.4} monotone, final dist {:.2e} m, |u - omega0| {:.2e}, {:.1} s",
        s.h_v_initial, s.h_v_final, s.final_max_center_distance, s.final_max_input_deviation,
        run.secs
    );
}

#[test]
fn criterion_5_event_mode_respects_thresholds_and_resets_exactly() {
    let run = event_run();
    let s = &run.out.summary;
    let cfg = scenario(Mode::Event, 1);
    let p = &cfg.params;

    assert!(
        s.final_max_center_distance < 0.05,
        "final center distance {}",
        s.final_max_center_distance
    );

    let mut fires = 0usize;
    let mut worst_rel = 0.0f64;
    for rec in &run.out.trace {
        for (k, r) in rec.robots.iter().enumerate() {
            let fired = rec.fired.contains(&k);
            if fired {
                assert_eq!(r.e, 0.0, "robot {k} at t = {}: e = {} after fire", rec.t, r.e);
            }
            if rec.t == 0.0 {
                continue; // forced synchronization round, no comparator crossing
            }
            let threshold = p.sigma * p.gamma * p.omega0 * r.g.abs() + p.mu(k, rec.t).unwrap();
            if fired {
                fires += 1;
                assert!(
                    r.f >= 0.0,
                    "robot {k} fired at t = {} with comparator {}",
                    rec.t,
                    r.f
                );
                let rel = r.f / threshold;
                worst_rel = worst_rel.max(rel);
                assert!(
                    rel < 0.02,
                    "robot {k} at t = {}: overshoot {} exceeds 2% of threshold {}",
                    rec.t,
                    r.f,
                    threshold
                );
            } else {
                assert!(
                    r.f < 0.0,
                    "robot {k} at t = {}: comparator {} nonnegative without a fire",
                    rec.t,
                    r.f
                );
            }
        }
    }
    assert!(fires > 0, "no triggers after the initial round");
    println!(
        "criterion 5 PASS: {} fires, every |e| within threshold + 2%, worst overshoot {:.3}%, exact resets",
        fires,
        100.0 * worst_rel
    );
}

#[test]
fn criterion_6_triggering_is_zeno_free() {
    let event = event_run();
    let selfr = self_run();
    let dt = 0.001;

    for (k, intervals) in event.out.stats.intervals.iter().enumerate() {
        let min = intervals.iter().copied().fold(f64::INFINITY, f64::min);
        assert!(
            min > 2.0 * dt,
            "event robot {k}: min inter-event interval {min} not above 2 dt"
        );
    }
    for (k, intervals) in selfr.out.stats.intervals.iter().enumerate() {
        let min = intervals.iter().copied().fold(f64::INFINITY, f64::min);
        assert!(
            min > 1e-3,
            "self robot {k}: min inter-event interval {min} not above 1 ms"
        );
    }
    println!(
        "criterion 6 PASS: event triggers {:?} (min gap {:.3} s), self triggers {:?} (min gap {:.4} s)",
        event.out.summary.trigger_counts,
        event.out.summary.min_inter_event.unwrap(),
        selfr.out.summary.trigger_counts,
        selfr.out.summary.min_inter_event.unwrap()
    );
}

/// Forward difference of the steering law along the coupled flow in which
/// the robot moves under its held input and every neighbor moves under its
/// last-broadcast input.
fn u_dot_numeric(
    state: &RobotState,
    snapshots: &BTreeMap<usize, NeighborSnapshot>,
    index: usize,
    u_held: f64,
    params: &ControllerParams,
    region: &ConvexPolygon,
    density: &DensityField,
    h: f64,
) -> f64 {
    let world = WorldParams::new(params.omega0).unwrap();
    let eval_at = |tau: f64| -> f64 {
        let own = propagate(state, u_held, tau).unwrap();
        let z = virtual_center(&own, &world);
        let mut moved = BTreeMap::new();
        for (&j, snap) in snapshots {
            let r = snap.z - Point2::from_angle(snap.theta).rot90() * (snap.v / params.omega0);
            let sj = RobotState::new(r.re, r.im, snap.theta, snap.v).unwrap();
            let sj = propagate(&sj, snap.u, tau).unwrap();
            moved.insert(
                j,
                NeighborSnapshot {
                    z: virtual_center(&sj, &world),
                    theta: sj.theta,
                    u: snap.u,
                    v: snap.v,
                    t: snap.t,
                },
            );
        }
        let view = LocalView {
            index,
            state: own,
            z,
            snapshots: &moved,
            region,
            density,
        };
        control::control_input(&view, params).unwrap()
    };
    (eval_at(h) - eval_at(0.0)) / h
}

#[test]
fn criterion_7_self_trigger_deadlines_are_sound() {
    let run = self_run();
    let cfg = scenario(Mode::SelfTriggered, 100);
    let p = &cfg.params;

    // Deadline construction identity on every uncapped interval.
    let mut uncapped = 0usize;
    for w in &run.out.self_intervals {
        if w.capped {
            assert_eq!(w.xi, p.xi_max, "capped horizon not at the cap");
            continue;
        }
        uncapped += 1;
        let residual = ((1.0 - p.sigma) * w.udot.abs() * w.xi
            - (p.sigma * (w.u_held - p.omega0).abs() + w.mu))
            .abs();
        assert!(
            residual < 1e-9,
            "robot {} at t = {}: deadline residual {residual}",
            w.robot,
            w.t
        );
    }

    // Analytic derivative against numerical differentiation at 20 sampled
    // update instants with a meaningful derivative magnitude.
    let candidates: Vec<&sim::SelfInterval> = run
        .out
        .self_intervals
        .iter()
        .filter(|w| w.udot.abs() > 1e-3)
        .collect();
    assert!(
        candidates.len() >= 20,
        "only {} intervals with |udot| > 1e-3",
        candidates.len()
    );
    let stride = candidates.len() / 20;
    let mut worst_rel = 0.0f64;
    for i in 0..20 {
        let w = candidates[i * stride];
        let numeric = u_dot_numeric(
            &w.state,
            &w.snapshots,
            w.robot,
            w.u_held,
            p,
            &cfg.region,
            &cfg.density,
            1e-6,
        );
        let rel = (w.udot - numeric).abs() / numeric.abs().max(1e-12);
        worst_rel = worst_rel.max(rel);
        assert!(
            rel < 1e-3,
            "robot {} at t = {}: analytic udot {} vs numeric {numeric}",
            w.robot,
            w.t,
            w.udot
        );
    }
    println!(
        "criterion 7 PASS: {} uncapped deadlines residual < 1e-9, udot matches FD at 20 instants (worst {:.2e} rel)",
        uncapped, worst_rel
    );
}

#[test]
fn criterion_8_arc_propagation_is_exact() {
    let world = WorldParams::new(0.536).unwrap();
    let start = RobotState::new(1.2, 0.7, 0.9, 0.16).unwrap();

    let mut worst_gap = 0.0f64;
    for &u in &[0.536, -1.2, 3.0, 1e-13, 0.0] {
        for &n in &[2usize, 7, 40] {
            let total = 2.0;
            let single = propagate(&start, u, total).unwrap();
            let mut stepped = start;
            for _ in 0..n {
                stepped = propagate(&stepped, u, total / n as f64).unwrap();
            }
            let gap = Point2::new(single.x - stepped.x, single.y - stepped.y)
                .norm()
                .max((single.theta - stepped.theta).abs());
            worst_gap = worst_gap.max(gap);
            assert!(gap < 1e-12, "u = {u}, {n} substeps: gap {gap}");
        }
    }

    // Under the nominal turn rate the virtual center must not move.
    let z0 = virtual_center(&start, &world);
    let mut state = start;
    let mut worst_drift = 0.0f64;
    for _ in 0..100 {
        state = propagate(&state, world.omega0, 1.0).unwrap();
        let drift = virtual_center(&state, &world).dist(z0);
        worst_drift = worst_drift.max(drift);
    }
    assert!(worst_drift < 1e-12, "virtual center drifted {worst_drift}");
    println!(
        "criterion 8 PASS: substep composition gap {:.2e}, 100 s virtual-center drift {:.2e}",
        worst_gap, worst_drift
    );
}

#[test]
fn criterion_9_runs_are_bitwise_deterministic() {
    for (mode, sample_every, first) in [
        (Mode::Continuous, 10, &continuous_run().out),
        (Mode::Event, 1, &event_run().out),
        (Mode::SelfTriggered, 100, &self_run().out),
    ] {
        let second = sim::run(&scenario(mode, sample_every)).unwrap();
        let n = first.summary.n_robots;

        let mut trace_a = Vec::new();
        let mut trace_b = Vec::new();
        write_trace_csv(&first.trace, n, &mut trace_a).unwrap();
        write_trace_csv(&second.trace, n, &mut trace_b).unwrap();
        assert!(trace_a == trace_b, "trace differs between runs ({mode})");

        let mut msg_a = Vec::new();
        let mut msg_b = Vec::new();
        write_messages_csv(&first.log, &mut msg_a).unwrap();
        write_messages_csv(&second.log, &mut msg_b).unwrap();
        assert!(msg_a == msg_b, "message log differs between runs ({mode})");

        assert_eq!(
            sim::summary_json(&first.summary),
            sim::summary_json(&second.summary),
            "summary differs between runs ({mode})"
        );
    }
    println!("criterion 9 PASS: repeated runs byte-identical in all three modes");
}

/// Not a numbered criterion, but the cost-halving invariant the triggered
/// modes must uphold on the bundled scenario.
#[test]
fn triggered_modes_halve_the_coverage_cost() {
    for run in [&event_run().out, &self_run().out] {
        let s = &run.summary;
        assert!(
            s.h_v_final < 0.5 * s.h_v_initial,
            "{}: H_V {} -> {}",
            s.mode,
            s.h_v_initial,
            s.h_v_final
        );
    }
    // Cell moments stay consistent with the cost on every sample.
    for run in [&continuous_run().out, &event_run().out, &self_run().out] {
        assert!(
            run.summary.decomposition_max_residual < 1e-8,
            "{}: decomposition residual {}",
            run.summary.mode,
            run.summary.decomposition_max_residual
        );
    }
}
