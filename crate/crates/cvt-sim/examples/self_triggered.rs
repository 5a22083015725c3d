//! Self-triggered coverage: each robot computes, at every update, how long
//! its current input is guaranteed to stay within the trigger band, and
//! sleeps exactly that long. No monitoring happens in between.
//!
//!     cargo run --release --example self_triggered

use cvt_sim::control::Mode;
use cvt_sim::scenario::ScenarioConfig;
use cvt_sim::sim;

fn main() {
    let mut cfg = ScenarioConfig::builtin("paper_4robots").unwrap();
    cfg.params.mode = Mode::SelfTriggered;

    let out = sim::run(&cfg).unwrap();
    let s = &out.summary;

    println!("first scheduled horizons:");
    for w in out.self_intervals.iter().take(10) {
        println!(
            "  t = {:7.4}  robot {}  u_held = {:+.4}  udot = {:+.3e}  xi = {:.4} s{}",
            w.t,
            w.robot,
            w.u_held,
            w.udot,
            w.xi,
            if w.capped { "  (capped)" } else { "" }
        );
    }

    let capped = out.self_intervals.iter().filter(|w| w.capped).count();
    println!();
    println!(
        "{} control updates ({} deadline fires), {} capped at xi_max = {} s, smallest horizon {:.4} s",
        out.self_intervals.len(),
        s.total_triggers,
        capped,
        cfg.params.xi_max,
        s.min_xi.unwrap()
    );
    println!(
        "H_V {:.3} -> {:.4}; min inter-event gap {:.4} s; worst deadline-identity residual {:.2e}",
        s.h_v_initial,
        s.h_v_final,
        s.min_inter_event.unwrap(),
        s.deadline_residual_max.unwrap()
    );
}
