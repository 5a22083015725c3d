//! Integration tests for the command-line front end: exit codes, emitted
//! file schemas, overrides, and sweep behavior.

use std::path::Path;
use std::process::{Command, Output};

fn cvt_sim(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cvt-sim"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn short_event_run_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = cvt_sim(
        &["--mode", "event", "--duration", "2", "--out", "run"],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("paper_4robots"), "stdout: {stdout}");

    let run = dir.path().join("run");
    let trace = std::fs::read_to_string(run.join("trace.csv")).unwrap();
    let mut lines = trace.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("t,x_0,y_0,theta_0,u_0,"));
    assert!(header.ends_with(",h_v,fired"));
    let cols = header.split(',').count();
    assert_eq!(cols, 1 + 4 * 14 + 2);
    let mut rows = 0;
    for line in lines {
        assert_eq!(line.split(',').count(), cols);
        rows += 1;
    }
    // t = 0 plus one sample per 100 steps over 2000 steps.
    assert_eq!(rows, 21);

    let messages = std::fs::read_to_string(run.join("messages.csv")).unwrap();
    let mut msg_lines = messages.lines();
    assert_eq!(
        msg_lines.next().unwrap(),
        "t,sender,recipients,z_re,z_im,theta,u"
    );
    assert!(msg_lines.next().is_some(), "at least the initial round");

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(run.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["mode"], "event");
    assert_eq!(summary["n_robots"], 4);
    assert!(summary["h_v_final"].as_f64().unwrap() > 0.0);
}

#[test]
fn full_event_run_reports_convergence() {
    let dir = tempfile::tempdir().unwrap();
    let out = cvt_sim(
        &["--mode", "event", "--emit-trace", "false", "--out", "run"],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(!dir.path().join("run/trace.csv").exists());
    let summary: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("run/summary.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(summary["converged"], true);
    assert!(summary["final_max_center_distance"].as_f64().unwrap() < 0.05);
}

#[test]
fn missing_config_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = cvt_sim(&["--config", "nope.toml"], dir.path());
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("nope.toml"));
}

#[test]
fn unknown_builtin_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = cvt_sim(&["--config", "paper_5robots"], dir.path());
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("paper_5robots"));
}

#[test]
fn center_outside_region_exits_2_and_names_the_robot() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("bad.toml"),
        r#"
        [region]
        vertices = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]

        [[robots]]
        x = 0.5
        y = 0.3
        theta = 0.0

        [[robots]]
        x = 5.0
        y = 0.3
        theta = 0.0
    "#,
    )
    .unwrap();
    let out = cvt_sim(&["--config", "bad.toml"], dir.path());
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("robot 2"), "stderr: {}", stderr(&out));
}

#[test]
fn bad_mode_and_bad_overrides_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = cvt_sim(&["--mode", "sometimes"], dir.path());
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("sometimes"));

    let out = cvt_sim(&["--dt", "-0.5"], dir.path());
    assert_eq!(code(&out), 2);

    let out = cvt_sim(&["--dt", "5.0", "--duration", "2.0"], dir.path());
    assert_eq!(code(&out), 2);
}

#[test]
fn strict_mode_violation_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    // Coarse monitoring against a nearly-zero threshold: the first fire
    // overshoots far past the 2% bound.
    std::fs::write(
        dir.path().join("coarse.toml"),
        r#"
        name = "coarse"
        mode = "event"
        dt = 0.25
        duration = 30.0
        sample_every = 1

        [region]
        vertices = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]

        [params]
        gamma = 0.5
        sigma = 0.05
        alpha = 0.8
        omega0 = 0.536
        xi_max = 2.0

        [[robots]]
        x = 0.25
        y = 0.1
        theta = 0.0
        v = 0.16
    "#,
    )
    .unwrap();
    let out = cvt_sim(&["--config", "coarse.toml", "--strict"], dir.path());
    assert_eq!(code(&out), 3, "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("overshoot"), "stderr: {}", stderr(&out));
}

#[test]
fn sweep_writes_one_row_per_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("grid.toml"), "sigma = [0.3, 0.5, 0.7]\n").unwrap();
    let out = cvt_sim(
        &["--duration", "1", "--sweep", "grid.toml", "--out", "sw"],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let csv = std::fs::read_to_string(dir.path().join("sw/sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "gamma,sigma,alpha,xi_max,mode,h_v_end,total_triggers,min_inter_event"
    );
    assert_eq!(lines.len(), 4);
    for line in &lines[1..] {
        assert_eq!(line.split(',').count(), 8);
    }
}

#[test]
fn empty_sweep_grid_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("empty.toml"), "# nothing swept\n").unwrap();
    let out = cvt_sim(&["--sweep", "empty.toml"], dir.path());
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("empty"));
}

#[test]
fn repeated_runs_emit_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a", "b"] {
        let out = cvt_sim(
            &["--mode", "self", "--duration", "3", "--out", name],
            dir.path(),
        );
        assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    }
    for file in ["trace.csv", "messages.csv", "summary.json"] {
        let a = std::fs::read(dir.path().join("a").join(file)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(file)).unwrap();
        assert!(a == b, "{file} differs between identical runs");
    }
}
