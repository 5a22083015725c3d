//! Planar geometry for coverage control: convex polygons, bounded Voronoi
//! diagrams, density-weighted cell moments, and the coverage cost functional.
//!
//! Positions are treated as points of the complex plane, so the scalar
//! product of two vectors is `Re(conj(a) * b)` and a rotation by 90 degrees
//! is multiplication by `i`. All lengths are in meters.

mod density;
mod moments;
mod polygon;
mod voronoi;

pub use density::{DensityField, GridDensity};
pub use moments::{
    cell_moments, cell_moments_with_refinement, centroid_jacobians, centroid_jacobians_with_step,
    coverage_cost, coverage_cost_of_diagram, coverage_gradient, coverage_gradient_of_diagram,
    CellMoments, Mat2, JACOBIAN_STEP, QUADRATURE_REFINEMENT,
};
pub use polygon::ConvexPolygon;
pub use voronoi::{compute_voronoi, half_plane_clip, VoronoiDiagram};
pub(crate) use voronoi::cell_and_neighbors;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Generators closer than this are rejected as coincident (the perpendicular
/// bisector between them is numerically meaningless).
pub const COINCIDENT_GENERATOR_TOL: f64 = 1e-9;

/// Vertices within this distance of a bisector line are treated as lying on
/// the shared boundary between two cells.
pub const SHARED_EDGE_TOL: f64 = 1e-9;

/// A shared boundary segment must be longer than this for two cells to count
/// as adjacent; shorter contacts are single-point touches up to rounding.
pub const ADJACENCY_MIN_EDGE: f64 = 1e-7;

/// Epsilon applied to cross products in orientation and convexity tests.
pub const ORIENTATION_EPS: f64 = 1e-12;

/// Polygons with less area than this are treated as empty clip results.
pub const DEGENERATE_AREA: f64 = 1e-12;

/// Errors from geometric constructions.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    /// Fewer than three effective vertices or (numerically) zero area.
    #[error("degenerate polygon: {0}")]
    DegeneratePolygon(String),
    /// Vertex ring bends the wrong way somewhere.
    #[error("polygon is not convex near vertex {0}")]
    NotConvex(usize),
    /// A coordinate was NaN or infinite.
    #[error("non-finite coordinate in {0}")]
    NonFinite(&'static str),
    /// Two generators are closer than [`COINCIDENT_GENERATOR_TOL`].
    #[error("generators {0} and {1} coincide (distance < 1e-9 m)")]
    CoincidentGenerators(usize, usize),
    /// No generators were supplied.
    #[error("degenerate generator set: no generators")]
    DegenerateGeneratorSet,
    /// The requested cell owns no part of the region.
    #[error("empty cell for generator {0}")]
    EmptyCell(usize),
    /// The density integrates to zero over a cell, so its centroid is
    /// undefined.
    #[error("cell has zero mass under the density")]
    ZeroMass,
    /// A finite-difference perturbation would bring two generators within
    /// [`COINCIDENT_GENERATOR_TOL`] of each other.
    #[error("jacobian step collision: perturbing generator {0} collides with generator {1}")]
    JacobianStepCollision(usize, usize),
    /// Index out of range for the diagram.
    #[error("no generator with index {0}")]
    BadIndex(usize),
}

/// A point (or vector) of the plane, stored as a complex number.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    /// Real part, meters.
    pub re: f64,
    /// Imaginary part, meters.
    pub im: f64,
}

impl Point2 {
    pub const ZERO: Point2 = Point2 { re: 0.0, im: 0.0 };

    pub fn new(re: f64, im: f64) -> Self {
        Point2 { re, im }
    }

    /// Unit vector `e^{i theta}`.
    pub fn from_angle(theta: f64) -> Self {
        Point2::new(theta.cos(), theta.sin())
    }

    /// Scalar product `<a, b> = Re(conj(a) * b)`.
    pub fn dot(self, other: Point2) -> f64 {
        self.re * other.re + self.im * other.im
    }

    /// `Im(conj(a) * b)`: positive when `b` lies counter-clockwise of `a`.
    pub fn cross(self, other: Point2) -> f64 {
        self.re * other.im - self.im * other.re
    }

    /// Multiplication by `i`: rotation by +90 degrees.
    pub fn rot90(self) -> Point2 {
        Point2::new(-self.im, self.re)
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dist(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.re + rhs.re, self.im + rhs.im)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.re - rhs.re, self.im - rhs.im)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.re, -self.im)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, rhs: f64) -> Point2 {
        Point2::new(self.re * rhs, self.im * rhs)
    }
}

impl fmt::Display for Point2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.re, self.im)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_product_is_real_part_of_conjugate_product() {
        let a = Point2::new(1.0, 2.0);
        let b = Point2::new(3.0, -1.0);
        // conj(1+2i)*(3-i) = (1-2i)(3-i) = 3 - i - 6i + 2i^2 = 1 - 7i
        assert_eq!(a.dot(b), 1.0);
        assert_eq!(a.cross(b), -7.0);
    }

    #[test]
    fn rot90_is_multiplication_by_i() {
        let a = Point2::new(2.0, 5.0);
        let r = a.rot90();
        assert_eq!(r, Point2::new(-5.0, 2.0));
        assert_eq!(a.dot(r), 0.0);
        assert!(a.cross(r) > 0.0);
    }

    #[test]
    fn from_angle_is_unit() {
        for k in 0..8 {
            let theta = k as f64 * 0.7;
            let e = Point2::from_angle(theta);
            assert!((e.norm() - 1.0).abs() < 1e-15);
        }
    }
}
