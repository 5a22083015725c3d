use super::{GeometryError, Point2, DEGENERATE_AREA, ORIENTATION_EPS, SHARED_EDGE_TOL};

/// A convex polygon with counter-clockwise vertices and positive area.
///
/// Collinear vertices are tolerated (half-plane clipping produces them); a
/// reflex vertex is rejected. Construction normalizes clockwise input by
/// reversing it.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPolygon {
    vertices: Vec<Point2>,
    area: f64,
}

impl ConvexPolygon {
    pub fn new(vertices: Vec<Point2>) -> Result<Self, GeometryError> {
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite("polygon vertex"));
        }
        let mut vertices = dedup_ring(vertices);
        if vertices.len() < 3 {
            return Err(GeometryError::DegeneratePolygon(format!(
                "{} distinct vertices",
                vertices.len()
            )));
        }
        let signed = signed_area(&vertices);
        if signed.abs() <= DEGENERATE_AREA {
            return Err(GeometryError::DegeneratePolygon(format!(
                "area {:.3e}",
                signed.abs()
            )));
        }
        if signed < 0.0 {
            vertices.reverse();
        }
        let n = vertices.len();
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            if (b - a).cross(c - b) < -ORIENTATION_EPS {
                return Err(GeometryError::NotConvex((i + 1) % n));
            }
        }
        let area = signed.abs();
        Ok(ConvexPolygon { vertices, area })
    }

    /// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self, GeometryError> {
        ConvexPolygon::new(vec![
            Point2::new(x0, y0),
            Point2::new(x1, y0),
            Point2::new(x1, y1),
            Point2::new(x0, y1),
        ])
    }

    /// Constructor for clip results: dedups the ring and returns `None` for
    /// empty or degenerate leftovers instead of an error. Input must already
    /// be counter-clockwise convex up to rounding.
    pub(crate) fn from_clip(vertices: Vec<Point2>) -> Option<Self> {
        let vertices = dedup_ring(vertices);
        if vertices.len() < 3 {
            return None;
        }
        let area = signed_area(&vertices);
        if area <= DEGENERATE_AREA {
            return None;
        }
        Some(ConvexPolygon { vertices, area })
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    /// Cyclic edge list `(v_i, v_{i+1})`.
    pub fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Whether `p` lies inside or within `tol` of the boundary.
    pub fn contains(&self, p: Point2, tol: f64) -> bool {
        self.edges().all(|(a, b)| {
            let edge = b - a;
            // Signed distance scales with the edge length; normalize so that
            // `tol` is a distance.
            edge.cross(p - a) >= -tol * edge.norm()
        })
    }

    /// Arithmetic mean of the vertices. Inside by convexity; used as the fan
    /// pivot for quadrature. This is not the area centroid.
    pub fn vertex_mean(&self) -> Point2 {
        let mut s = Point2::ZERO;
        for &v in &self.vertices {
            s = s + v;
        }
        s * (1.0 / self.vertices.len() as f64)
    }
}

/// Shoelace sum; positive for counter-clockwise rings.
pub(crate) fn signed_area(vertices: &[Point2]) -> f64 {
    let n = vertices.len();
    let mut acc = 0.0;
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        acc += a.cross(b);
    }
    0.5 * acc
}

/// Removes cyclically-consecutive vertices closer than [`SHARED_EDGE_TOL`].
fn dedup_ring(vertices: Vec<Point2>) -> Vec<Point2> {
    let mut out: Vec<Point2> = Vec::with_capacity(vertices.len());
    for v in vertices {
        if out.last().is_none_or(|&last| last.dist(v) > SHARED_EDGE_TOL) {
            out.push(v);
        }
    }
    while out.len() >= 2 && out[0].dist(*out.last().unwrap()) <= SHARED_EDGE_TOL {
        out.pop();
    }
    out
}
