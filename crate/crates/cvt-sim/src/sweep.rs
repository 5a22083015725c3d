//! Parameter-grid sweeps: the same scenario run across a Cartesian grid of
//! controller settings, one summary row per point.
//!
//! A grid file is TOML with up to five lists:
//!
//! ```toml
//! gamma = [2.0, 6.0]
//! sigma = [0.3, 0.5, 0.7]
//! alpha = [0.05]
//! xi_max = [2.0]
//! mode = ["event", "self"]
//! ```
//!
//! Omitted (or empty) lists keep the base scenario's value for that
//! parameter; at least one list must be nonempty. Points run independently,
//! optionally in parallel, and rows always come back in grid order
//! (gamma-major, mode-minor), so output is deterministic regardless of the
//! thread count.

use std::io::Write as IoWrite;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;

use crate::control::{ControllerParams, Mode};
use crate::scenario::ScenarioConfig;
use crate::sim::{self, SimError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SweepError {
    #[error("sweep grid is empty: no parameter list has any entries")]
    EmptyGrid,
    #[error("could not read sweep grid {path}: {message}")]
    Io { path: String, message: String },
    #[error("sweep grid does not parse: {0}")]
    Syntax(String),
    #[error("grid point gamma={gamma} sigma={sigma} alpha={alpha} xi_max={xi_max} mode={mode} is invalid: {message}")]
    BadPoint {
        gamma: f64,
        sigma: f64,
        alpha: f64,
        xi_max: f64,
        mode: Mode,
        message: String,
    },
    #[error("run failed at grid point {index}: {source}")]
    Run { index: usize, source: SimError },
}

/// Lists of values to sweep; empty lists mean "keep the base value".
#[derive(Debug, Clone, Default, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    #[serde(default)]
    pub gamma: Vec<f64>,
    #[serde(default)]
    pub sigma: Vec<f64>,
    #[serde(default)]
    pub alpha: Vec<f64>,
    #[serde(default)]
    pub xi_max: Vec<f64>,
    #[serde(default)]
    pub mode: Vec<Mode>,
}

impl SweepGrid {
    pub fn from_toml_str(text: &str) -> Result<Self, SweepError> {
        toml::from_str(text).map_err(|e| SweepError::Syntax(e.to_string()))
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self, SweepError> {
        let text = std::fs::read_to_string(path).map_err(|e| SweepError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_toml_str(&text)
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.is_empty()
            && self.sigma.is_empty()
            && self.alpha.is_empty()
            && self.xi_max.is_empty()
            && self.mode.is_empty()
    }

    /// All grid points in deterministic order, with omitted dimensions
    /// pinned to the base scenario's values.
    fn points(&self, base: &ScenarioConfig) -> Vec<GridPoint> {
        fn dim<T: Clone>(list: &[T], base: T) -> Vec<T> {
            if list.is_empty() {
                vec![base]
            } else {
                list.to_vec()
            }
        }
        let gammas = dim(&self.gamma, base.params.gamma);
        let sigmas = dim(&self.sigma, base.params.sigma);
        // The base alpha may be per-robot; a swept alpha is a shared scalar.
        let alphas = dim(&self.alpha, base.params.alpha[0]);
        let xi_maxes = dim(&self.xi_max, base.params.xi_max);
        let modes = dim(&self.mode, base.params.mode);
        let mut points = Vec::new();
        for &gamma in &gammas {
            for &sigma in &sigmas {
                for &alpha in &alphas {
                    for &xi_max in &xi_maxes {
                        for &mode in &modes {
                            points.push(GridPoint {
                                gamma,
                                sigma,
                                alpha,
                                xi_max,
                                mode,
                            });
                        }
                    }
                }
            }
        }
        points
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct GridPoint {
    gamma: f64,
    sigma: f64,
    alpha: f64,
    xi_max: f64,
    mode: Mode,
}

/// One sweep result row.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub gamma: f64,
    pub sigma: f64,
    pub alpha: f64,
    pub xi_max: f64,
    pub mode: Mode,
    pub h_v_end: f64,
    pub total_triggers: u64,
    pub min_inter_event: Option<f64>,
}

/// Parallelism cap: `CVT_SIM_THREADS` when set to a positive integer,
/// otherwise the machine's available parallelism.
pub fn thread_cap() -> usize {
    if let Ok(s) = std::env::var("CVT_SIM_THREADS") {
        if let Ok(n) = s.trim().parse::<usize>() {
            if n > 0 {
                return n;
            }
        }
    }
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Runs every grid point against the base scenario. `threads` workers pull
/// points off a shared counter; results are reordered to grid order.
pub fn run_sweep(
    base: &ScenarioConfig,
    grid: &SweepGrid,
    threads: usize,
) -> Result<Vec<SweepRow>, SweepError> {
    if grid.is_empty() {
        return Err(SweepError::EmptyGrid);
    }
    let points = grid.points(base);

    // Validate all points up front so failures are config errors, not
    // mid-sweep surprises.
    let configs: Vec<ScenarioConfig> = points
        .iter()
        .map(|p| {
            let params = ControllerParams::new(
                p.gamma,
                p.sigma,
                vec![p.alpha; base.robots.len()],
                base.params.omega0,
                p.xi_max,
                p.mode,
            )
            .map_err(|e| SweepError::BadPoint {
                gamma: p.gamma,
                sigma: p.sigma,
                alpha: p.alpha,
                xi_max: p.xi_max,
                mode: p.mode,
                message: e.to_string(),
            })?;
            let mut cfg = base.clone();
            cfg.params = params;
            Ok(cfg)
        })
        .collect::<Result<_, _>>()?;

    let workers = threads.clamp(1, configs.len());
    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel::<(usize, Result<SweepRow, SweepError>)>();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            let tx = tx.clone();
            let next = &next;
            let configs = &configs;
            let points = &points;
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= configs.len() {
                    break;
                }
                let result = sim::run(&configs[i])
                    .map(|out| SweepRow {
                        gamma: points[i].gamma,
                        sigma: points[i].sigma,
                        alpha: points[i].alpha,
                        xi_max: points[i].xi_max,
                        mode: points[i].mode,
                        h_v_end: out.summary.h_v_final,
                        total_triggers: out.summary.total_triggers,
                        min_inter_event: out.summary.min_inter_event,
                    })
                    .map_err(|source| SweepError::Run { index: i, source });
                if tx.send((i, result)).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        let mut slots: Vec<Option<Result<SweepRow, SweepError>>> = vec![None; configs.len()];
        for (i, result) in rx {
            slots[i] = Some(result);
        }
        slots
            .into_iter()
            .map(|slot| slot.expect("every grid point reports exactly once"))
            .collect()
    })
}

/// Writes rows as CSV:
/// `gamma,sigma,alpha,xi_max,mode,h_v_end,total_triggers,min_inter_event`
/// (the last column empty when no robot fired twice).
pub fn write_sweep_csv<W: IoWrite>(rows: &[SweepRow], w: &mut W) -> std::io::Result<()> {
    writeln!(
        w,
        "gamma,sigma,alpha,xi_max,mode,h_v_end,total_triggers,min_inter_event"
    )?;
    for r in rows {
        let min = r
            .min_inter_event
            .map(|m| m.to_string())
            .unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.gamma, r.sigma, r.alpha, r.xi_max, r.mode, r.h_v_end, r.total_triggers, min
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ScenarioConfig {
        let mut cfg = ScenarioConfig::builtin("paper_4robots").unwrap();
        cfg.duration = 1.0;
        cfg
    }

    #[test]
    fn empty_grid_is_rejected() {
        let grid = SweepGrid::default();
        assert!(matches!(
            run_sweep(&base(), &grid, 1),
            Err(SweepError::EmptyGrid)
        ));
    }

    #[test]
    fn sigma_grid_of_three_gives_three_rows() {
        let grid = SweepGrid::from_toml_str("sigma = [0.3, 0.5, 0.7]").unwrap();
        let rows = run_sweep(&base(), &grid, 2).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].sigma, 0.3);
        assert_eq!(rows[1].sigma, 0.5);
        assert_eq!(rows[2].sigma, 0.7);
        // Unswept dimensions keep the base values.
        let base = base();
        assert_eq!(rows[0].gamma, base.params.gamma);
        assert_eq!(rows[0].mode, base.params.mode);
    }

    #[test]
    fn grid_order_is_independent_of_thread_count() {
        let grid = SweepGrid::from_toml_str(
            r#"
            sigma = [0.4, 0.6]
            mode = ["event", "self"]
        "#,
        )
        .unwrap();
        let rows1 = run_sweep(&base(), &grid, 1).unwrap();
        let rows4 = run_sweep(&base(), &grid, 4).unwrap();
        assert_eq!(rows1, rows4);
        assert_eq!(rows1.len(), 4);
        // sigma-major, mode-minor.
        assert_eq!(
            rows1
                .iter()
                .map(|r| (r.sigma, r.mode))
                .collect::<Vec<_>>(),
            vec![
                (0.4, Mode::Event),
                (0.4, Mode::SelfTriggered),
                (0.6, Mode::Event),
                (0.6, Mode::SelfTriggered),
            ]
        );
    }

    #[test]
    fn invalid_grid_point_is_a_config_error() {
        let grid = SweepGrid::from_toml_str("sigma = [1.5]").unwrap();
        assert!(matches!(
            run_sweep(&base(), &grid, 1),
            Err(SweepError::BadPoint { .. })
        ));
    }

    #[test]
    fn unknown_grid_key_is_rejected() {
        assert!(matches!(
            SweepGrid::from_toml_str("gampa = [1.0]"),
            Err(SweepError::Syntax(_))
        ));
    }

    #[test]
    fn csv_has_one_line_per_row_plus_header() {
        let grid = SweepGrid::from_toml_str("gamma = [2.0, 6.0]").unwrap();
        let base = base();
        let rows = run_sweep(&base, &grid, 2).unwrap();
        let mut buf = Vec::new();
        write_sweep_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(
            lines[0],
            "gamma,sigma,alpha,xi_max,mode,h_v_end,total_triggers,min_inter_event"
        );
        let prefix = format!(
            "2,{},{},{},event,",
            base.params.sigma, base.params.alpha[0], base.params.xi_max
        );
        assert!(lines[1].starts_with(&prefix), "line was: {}", lines[1]);
    }
}
