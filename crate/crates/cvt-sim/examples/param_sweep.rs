//! Sweep the trigger sensitivity sigma across both triggered modes and
//! compare how much communication each setting needs.
//!
//!     cargo run --release --example param_sweep

use cvt_sim::scenario::ScenarioConfig;
use cvt_sim::sweep::{run_sweep, thread_cap, SweepGrid};

fn main() {
    let base = ScenarioConfig::builtin("paper_4robots").unwrap();
    let grid = SweepGrid::from_toml_str(
        r#"
        sigma = [0.2, 0.5, 0.8]
        mode = ["event", "self"]
    "#,
    )
    .unwrap();

    let rows = run_sweep(&base, &grid, thread_cap()).unwrap();

    println!("sigma  mode   H_V(end)  triggers  min gap [s]");
    for r in &rows {
        println!(
            "{:4.1}   {:5}  {:7.4}   {:5}     {:.4}",
            r.sigma,
            r.mode.to_string(),
            r.h_v_end,
            r.total_triggers,
            r.min_inter_event.unwrap_or(f64::NAN)
        );
    }
    println!();
    println!("sigma widens the mismatch band each trigger rule tolerates, which");
    println!("reshapes the firing schedule; the cost still settles near the");
    println!("centroidal optimum in every row");
}
