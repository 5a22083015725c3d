//! Scenario files: the TOML schema, validation, and bundled scenarios.
//!
//! A scenario pins everything a run needs: the convex region, the density,
//! the robot fleet with initial poses, controller gains, the update mode,
//! and the time grid. Parsing is strict about physics (initial virtual
//! centers must lie inside the region, generators must be distinct) so that
//! runs fail at load time, not 80 seconds into a simulation.
//!
//! ```toml
//! name = "two_bots"
//! mode = "event"              # continuous | event | self
//! dt = 0.001                  # s
//! duration = 120.0            # s
//! sample_every = 100          # steps between trace samples
//!
//! [region]
//! vertices = [[0.0, 0.0], [4.0, 0.0], [4.0, 2.8], [0.0, 2.8]]
//!
//! [density]
//! kind = "uniform"            # uniform | gaussian | grid
//! value = 1.0
//!
//! [params]
//! gamma = 1.0
//! sigma = 0.5
//! alpha = 0.1                 # scalar, or one value per robot
//! omega0 = 0.536              # rad/s
//! xi_max = 2.0                # s
//!
//! [[robots]]
//! x = 0.6
//! y = 0.2
//! theta = 0.0
//! v = 0.16                    # m/s
//! ```

use std::path::Path;

use crate::control::{ControlError, ControllerParams, Mode};
use crate::dynamics::{virtual_center, DynamicsError, RobotState};
use crate::geometry::{
    ConvexPolygon, DensityField, GeometryError, GridDensity, Point2, COINCIDENT_GENERATOR_TOL,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {message}")]
    Io { path: String, message: String },
    #[error("config syntax error: {0}")]
    Syntax(String),
    #[error("invalid region: {0}")]
    Region(GeometryError),
    #[error("invalid density: {0}")]
    Density(GeometryError),
    #[error("scenario has no robots")]
    NoRobots,
    #[error("robot {robot}: {source}")]
    Robot {
        /// 1-based, matching the order of `[[robots]]` tables in the file.
        robot: usize,
        source: DynamicsError,
    },
    #[error("robot {robot}: initial virtual center ({z}) lies outside the region")]
    CenterOutsideRegion { robot: usize, z: Point2 },
    #[error("robots {a} and {b}: initial virtual centers coincide (distance {dist:.2e} m)")]
    CentersCoincide { a: usize, b: usize, dist: f64 },
    #[error("params.alpha lists {got} values for {expected} robots")]
    AlphaCount { expected: usize, got: usize },
    #[error(transparent)]
    Params(ControlError),
    #[error("{field} must be {requirement}, got {value}")]
    BadField {
        field: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("unknown scenario `{0}`: not a readable file and not a bundled name (bundled: paper_4robots)")]
    UnknownScenario(String),
}

/// A fully validated run description.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub name: String,
    pub region: ConvexPolygon,
    pub density: DensityField,
    pub robots: Vec<RobotState>,
    pub params: ControllerParams,
    /// Step size, seconds.
    pub dt: f64,
    /// Requested horizon, seconds; the simulated horizon is
    /// [`Self::n_steps`]` * dt`.
    pub duration: f64,
    /// Steps between trace samples (1 = every step).
    pub sample_every: usize,
    /// Reserved for randomized variants of a scenario; carried through to
    /// outputs so runs are reproducible byte for byte.
    pub seed: u64,
    /// Abort on invariant monitor violations instead of reporting them.
    pub strict: bool,
    /// Bisect event-mode trigger crossings to 1e-6 s instead of firing at
    /// step boundaries.
    pub refine_event_times: bool,
    /// `converged` in the summary means the final max center error is below
    /// this, meters.
    pub convergence_tol: f64,
}

const PAPER_4ROBOTS: &str = include_str!("../scenarios/paper_4robots.toml");

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let raw: ScenarioFile =
            toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
        raw.validate()
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_toml_str(&text)
    }

    /// Loads a path, falling back to a bundled scenario of that name.
    pub fn load(spec: &str) -> Result<Self, ConfigError> {
        let path = Path::new(spec);
        if path.is_file() {
            return Self::from_path(path);
        }
        Self::builtin(spec).ok_or_else(|| ConfigError::UnknownScenario(spec.to_string()))
    }

    /// The bundled scenarios by name.
    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "paper_4robots" => {
                Some(Self::from_toml_str(PAPER_4ROBOTS).expect("bundled scenario must parse"))
            }
            _ => None,
        }
    }

    pub fn builtin_names() -> &'static [&'static str] {
        &["paper_4robots"]
    }

    /// Number of propagation steps; the barrier times are `0, dt, ..,
    /// n_steps * dt`.
    pub fn n_steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }

    /// Canonical TOML with every field spelled out; parsing it back yields
    /// an identical config, and re-serializing yields identical text.
    pub fn to_toml(&self) -> String {
        let file = ScenarioFile {
            name: Some(self.name.clone()),
            mode: Some(self.params.mode),
            dt: Some(self.dt),
            duration: Some(self.duration),
            sample_every: Some(self.sample_every),
            seed: Some(self.seed),
            strict: Some(self.strict),
            refine_event_times: Some(self.refine_event_times),
            convergence_tol: Some(self.convergence_tol),
            region: RegionFile {
                vertices: self
                    .region
                    .vertices()
                    .iter()
                    .map(|p| [p.re, p.im])
                    .collect(),
            },
            density: Some(match &self.density {
                DensityField::Uniform(v) => DensityFile::Uniform { value: Some(*v) },
                DensityField::Gaussian {
                    center,
                    sigma,
                    amplitude,
                } => DensityFile::Gaussian {
                    center: [center.re, center.im],
                    sigma: *sigma,
                    amplitude: Some(*amplitude),
                },
                DensityField::Grid(g) => DensityFile::Grid {
                    origin: [g.origin().re, g.origin().im],
                    spacing: [g.spacing().0, g.spacing().1],
                    values: g.values().to_vec(),
                },
            }),
            params: Some(ParamsFile {
                gamma: Some(self.params.gamma),
                sigma: Some(self.params.sigma),
                alpha: Some(AlphaFile::PerRobot(self.params.alpha.clone())),
                omega0: Some(self.params.omega0),
                xi_max: Some(self.params.xi_max),
            }),
            robots: self
                .robots
                .iter()
                .map(|r| RobotFile {
                    x: r.x,
                    y: r.y,
                    theta: r.theta,
                    v: Some(r.v),
                })
                .collect(),
        };
        toml::to_string(&file).expect("scenario serialization cannot fail")
    }

    /// Initial virtual centers, in robot order.
    pub fn initial_centers(&self) -> Vec<Point2> {
        let world = self.params.world();
        self.robots
            .iter()
            .map(|r| virtual_center(r, &world))
            .collect()
    }
}

#[derive(serde::Serialize, serde::Deserialize)]
struct ScenarioFile {
    name: Option<String>,
    mode: Option<Mode>,
    dt: Option<f64>,
    duration: Option<f64>,
    sample_every: Option<usize>,
    seed: Option<u64>,
    strict: Option<bool>,
    refine_event_times: Option<bool>,
    convergence_tol: Option<f64>,
    region: RegionFile,
    density: Option<DensityFile>,
    params: Option<ParamsFile>,
    #[serde(default)]
    robots: Vec<RobotFile>,
}

#[derive(serde::Serialize, serde::Deserialize)]
struct RegionFile {
    vertices: Vec<[f64; 2]>,
}

#[derive(serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum DensityFile {
    Uniform {
        value: Option<f64>,
    },
    Gaussian {
        center: [f64; 2],
        sigma: f64,
        amplitude: Option<f64>,
    },
    Grid {
        origin: [f64; 2],
        spacing: [f64; 2],
        values: Vec<Vec<f64>>,
    },
}

#[derive(serde::Serialize, serde::Deserialize)]
struct ParamsFile {
    gamma: Option<f64>,
    sigma: Option<f64>,
    alpha: Option<AlphaFile>,
    omega0: Option<f64>,
    xi_max: Option<f64>,
}

#[derive(serde::Serialize, serde::Deserialize)]
#[serde(untagged)]
enum AlphaFile {
    Scalar(f64),
    PerRobot(Vec<f64>),
}

#[derive(serde::Serialize, serde::Deserialize)]
struct RobotFile {
    x: f64,
    y: f64,
    theta: f64,
    v: Option<f64>,
}

impl ScenarioFile {
    fn validate(self) -> Result<ScenarioConfig, ConfigError> {
        let region = ConvexPolygon::new(
            self.region
                .vertices
                .iter()
                .map(|&[x, y]| Point2::new(x, y))
                .collect(),
        )
        .map_err(ConfigError::Region)?;

        let density = match self.density.unwrap_or(DensityFile::Uniform { value: None }) {
            DensityFile::Uniform { value } => DensityField::uniform(value.unwrap_or(1.0)),
            DensityFile::Gaussian {
                center,
                sigma,
                amplitude,
            } => DensityField::gaussian(
                Point2::new(center[0], center[1]),
                sigma,
                amplitude.unwrap_or(1.0),
            ),
            DensityFile::Grid {
                origin,
                spacing,
                values,
            } => GridDensity::new(
                Point2::new(origin[0], origin[1]),
                (spacing[0], spacing[1]),
                values,
            )
            .map(DensityField::Grid),
        }
        .map_err(ConfigError::Density)?;

        if self.robots.is_empty() {
            return Err(ConfigError::NoRobots);
        }
        let robots: Vec<RobotState> = self
            .robots
            .iter()
            .enumerate()
            .map(|(i, r)| {
                RobotState::new(r.x, r.y, r.theta, r.v.unwrap_or(0.16))
                    .map_err(|source| ConfigError::Robot {
                        robot: i + 1,
                        source,
                    })
            })
            .collect::<Result<_, _>>()?;
        let n = robots.len();

        let p = self.params.unwrap_or(ParamsFile {
            gamma: None,
            sigma: None,
            alpha: None,
            omega0: None,
            xi_max: None,
        });
        let alpha = match p.alpha.unwrap_or(AlphaFile::Scalar(0.1)) {
            AlphaFile::Scalar(a) => vec![a; n],
            AlphaFile::PerRobot(list) => {
                if list.len() != n {
                    return Err(ConfigError::AlphaCount {
                        expected: n,
                        got: list.len(),
                    });
                }
                list
            }
        };
        let params = ControllerParams::new(
            p.gamma.unwrap_or(1.0),
            p.sigma.unwrap_or(0.5),
            alpha,
            p.omega0.unwrap_or(0.536),
            p.xi_max.unwrap_or(2.0),
            self.mode.unwrap_or(Mode::Continuous),
        )
        .map_err(ConfigError::Params)?;

        let world = params.world();
        let centers: Vec<Point2> = robots.iter().map(|r| virtual_center(r, &world)).collect();
        for (i, &z) in centers.iter().enumerate() {
            if !region.contains(z, 1e-9) {
                return Err(ConfigError::CenterOutsideRegion { robot: i + 1, z });
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let dist = centers[i].dist(centers[j]);
                if dist < COINCIDENT_GENERATOR_TOL {
                    return Err(ConfigError::CentersCoincide {
                        a: i + 1,
                        b: j + 1,
                        dist,
                    });
                }
            }
        }

        let field = |field, value: f64, ok: bool, requirement| {
            if ok {
                Ok(value)
            } else {
                Err(ConfigError::BadField {
                    field,
                    requirement,
                    value,
                })
            }
        };
        let dt = self.dt.unwrap_or(0.001);
        let dt = field("dt", dt, dt.is_finite() && dt > 0.0, "finite and positive")?;
        let duration = self.duration.unwrap_or(120.0);
        let duration = field(
            "duration",
            duration,
            duration.is_finite() && duration >= dt,
            "finite and at least dt",
        )?;
        let sample_every = self.sample_every.unwrap_or(100);
        field(
            "sample_every",
            sample_every as f64,
            sample_every >= 1,
            "at least 1",
        )?;
        let convergence_tol = self.convergence_tol.unwrap_or(0.05);
        let convergence_tol = field(
            "convergence_tol",
            convergence_tol,
            convergence_tol.is_finite() && convergence_tol > 0.0,
            "finite and positive",
        )?;

        Ok(ScenarioConfig {
            name: self.name.unwrap_or_else(|| "unnamed".to_string()),
            region,
            density,
            robots,
            params,
            dt,
            duration,
            sample_every,
            seed: self.seed.unwrap_or(0),
            strict: self.strict.unwrap_or(false),
            refine_event_times: self.refine_event_times.unwrap_or(false),
            convergence_tol,
        })
    }
}
