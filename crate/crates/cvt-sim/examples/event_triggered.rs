//! Event-triggered coverage: robots broadcast only when their held input
//! drifts past a state-dependent threshold. Prints the trigger schedule and
//! the mismatch/threshold picture at a few fire instants.
//!
//!     cargo run --release --example event_triggered

use cvt_sim::scenario::ScenarioConfig;
use cvt_sim::sim;

fn main() {
    let cfg = ScenarioConfig::builtin("paper_4robots").unwrap(); // event mode
    let out = sim::run(&cfg).unwrap();
    let s = &out.summary;

    println!(
        "{} broadcasts over {} s (continuous control would update {} times):",
        s.message_count,
        s.duration,
        4 * cfg.n_steps()
    );
    for (k, count) in s.trigger_counts.iter().enumerate() {
        let min_gap = out.stats.intervals[k]
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        println!("  robot {k}: {count} fires, min inter-event gap {:.3} s", min_gap);
    }

    println!();
    println!("first broadcasts:");
    for msg in out.log.messages().iter().take(8) {
        println!(
            "  t = {:7.3}  robot {} -> {:?}  u_held = {:.4}",
            msg.t, msg.sender, msg.recipients, msg.u
        );
    }

    println!();
    println!(
        "H_V {:.3} -> {:.4}; final max |z - C| = {:.2e} m; worst threshold overshoot {:.3}% of the threshold",
        s.h_v_initial, s.h_v_final, s.final_max_center_distance, 100.0 * s.max_overshoot_rel
    );
}
