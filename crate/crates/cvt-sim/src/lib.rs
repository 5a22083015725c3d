//! Coverage control for constant-speed unicycle robots.
//!
//! A team of planar unicycles, each moving at a fixed forward speed, has to
//! spread out over a convex region so that the weighted quadratic coverage
//! cost of the induced Voronoi partition is minimized. Because the vehicles
//! cannot stop, each robot steers the *center of the circular orbit* it would
//! settle on (its virtual center) toward the centroid of its Voronoi cell by
//! modulating its turn rate around a nominal rate `omega0`.
//!
//! The crate provides:
//!
//! - [`geometry`]: convex polygons, bounded Voronoi diagrams built by pairwise
//!   half-plane clipping, density-weighted cell moments, the coverage cost and
//!   its gradient, and finite-difference centroid Jacobians.
//! - [`dynamics`]: the unicycle model with exact zero-order-hold propagation
//!   along circular arcs, virtual centers, and virtual-center velocities.
//! - [`control`]: the continuous steering law plus the event-triggered and
//!   self-triggered update schedulers built on top of it, operating on
//!   broadcast snapshots of neighbor states.
//! - [`network`]: the simulated zero-delay broadcast channel, message log,
//!   and trigger statistics.
//! - [`sim`]: the deterministic fixed-step closed-loop simulator producing
//!   trace records, a message log, and a run summary.
//! - [`scenario`]: the TOML scenario schema, validation, and the bundled
//!   `paper_4robots` scenario.
//! - [`sweep`]: parameter-grid sweeps over scenarios, optionally in parallel.
//!
//! The `cvt-sim` binary is a thin command-line front end over [`sim`] and
//! [`sweep`]; the `examples/` directory demonstrates each major capability.

pub mod control;
pub mod dynamics;
pub mod geometry;
pub mod network;
pub mod scenario;
pub mod sim;
pub mod sweep;

pub use control::{ControllerParams, Mode};
pub use dynamics::{RobotState, WorldParams};
pub use geometry::{
    compute_voronoi, coverage_cost, coverage_gradient, CellMoments, ConvexPolygon, DensityField,
    GeometryError, Point2, VoronoiDiagram,
};
pub use scenario::{ConfigError, ScenarioConfig};
pub use sim::{run, RunOutput, SimError, Summary, TraceRecord};
