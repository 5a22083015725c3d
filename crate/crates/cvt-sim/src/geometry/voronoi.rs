use super::polygon::ConvexPolygon;
use super::{
    GeometryError, Point2, ADJACENCY_MIN_EDGE, COINCIDENT_GENERATOR_TOL, SHARED_EDGE_TOL,
};

/// Points on the clip boundary within this signed margin are kept; both
/// half-planes of a bisector keep them, which avoids cracks along shared
/// edges at the cost of overlap slivers far below the area tolerances.
const CLIP_BOUNDARY_TOL: f64 = 1e-12;

/// Clips `poly` to the closed half-plane of points at least as close to `a`
/// as to `b`. Returns `None` when nothing of positive area remains.
///
/// Requires `a != b`; the dividing line is the perpendicular bisector of the
/// segment `ab`.
pub fn half_plane_clip(
    poly: &ConvexPolygon,
    a: Point2,
    b: Point2,
) -> Result<Option<ConvexPolygon>, GeometryError> {
    if !a.is_finite() || !b.is_finite() {
        return Err(GeometryError::NonFinite("bisector point"));
    }
    if a.dist(b) < COINCIDENT_GENERATOR_TOL {
        return Err(GeometryError::CoincidentGenerators(0, 1));
    }
    Ok(clip_unchecked(poly.vertices(), a, b).and_then(ConvexPolygon::from_clip))
}

/// Sutherland-Hodgman pass against the single half-plane `n . q <= c` with
/// `n = b - a`, `c = (|b|^2 - |a|^2) / 2`, which is `|q - a| <= |q - b|`.
/// Returns the raw vertex ring (possibly with near-duplicates) or `None`
/// when every vertex is strictly outside.
fn clip_unchecked(vertices: &[Point2], a: Point2, b: Point2) -> Option<Vec<Point2>> {
    let n = b - a;
    let c = 0.5 * (b.norm_sq() - a.norm_sq());
    let s: Vec<f64> = vertices.iter().map(|&v| n.dot(v) - c).collect();
    // Signedness is scale-dependent (`n` is not normalized); the boundary
    // tolerance is scaled back to a distance.
    let tol = CLIP_BOUNDARY_TOL * n.norm();
    let mut out: Vec<Point2> = Vec::with_capacity(vertices.len() + 2);
    let m = vertices.len();
    for i in 0..m {
        let j = (i + 1) % m;
        let inside_i = s[i] <= tol;
        let inside_j = s[j] <= tol;
        if inside_i {
            out.push(vertices[i]);
        }
        if inside_i != inside_j {
            let t = (s[i] / (s[i] - s[j])).clamp(0.0, 1.0);
            out.push(vertices[i] + (vertices[j] - vertices[i]) * t);
        }
    }
    if out.is_empty() {
        None
    } else {
        Some(out)
    }
}

/// A Voronoi partition of a convex region, cells clipped to the region.
///
/// Generators may lie outside the region; their cells are the (possibly
/// empty) parts of the region closest to them. Nonempty cells partition the
/// region up to clipping tolerances, and adjacency is symmetric.
#[derive(Debug, Clone)]
pub struct VoronoiDiagram {
    generators: Vec<Point2>,
    region: ConvexPolygon,
    cells: Vec<Option<ConvexPolygon>>,
    /// `adjacency[k]`: sorted indices of cells sharing a boundary segment of
    /// length > [`ADJACENCY_MIN_EDGE`] with cell `k`.
    adjacency: Vec<Vec<usize>>,
}

impl VoronoiDiagram {
    pub fn generators(&self) -> &[Point2] {
        &self.generators
    }

    pub fn region(&self) -> &ConvexPolygon {
        &self.region
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// The cell of generator `k`, or `None` when no part of the region is
    /// closest to it (possible only for generators outside the region).
    pub fn cell(&self, k: usize) -> Option<&ConvexPolygon> {
        self.cells.get(k).and_then(|c| c.as_ref())
    }

    pub fn cells(&self) -> &[Option<ConvexPolygon>] {
        &self.cells
    }

    pub fn neighbors(&self, k: usize) -> &[usize] {
        &self.adjacency[k]
    }

    pub fn adjacency(&self) -> &[Vec<usize>] {
        &self.adjacency
    }
}

/// Intersects the region with every bisector half-plane of generator `k`
/// against the others. Shared helper of [`compute_voronoi`] and the
/// finite-difference Jacobians, which re-clip single cells.
pub(crate) fn clip_cell(
    generators: &[Point2],
    region: &ConvexPolygon,
    k: usize,
) -> Result<Option<ConvexPolygon>, GeometryError> {
    let mut ring: Vec<Point2> = region.vertices().to_vec();
    for (j, &zj) in generators.iter().enumerate() {
        if j == k {
            continue;
        }
        match clip_unchecked(&ring, generators[k], zj) {
            Some(next) => ring = next,
            None => return Ok(None),
        }
    }
    Ok(ConvexPolygon::from_clip(ring))
}

/// Cell of generator `k` together with the sorted indices of the generators
/// whose bisectors contribute an edge longer than [`ADJACENCY_MIN_EDGE`].
/// Cheaper than building the whole diagram when only one cell is needed
/// (each robot's controller sees exactly one).
pub(crate) fn cell_and_neighbors(
    generators: &[Point2],
    region: &ConvexPolygon,
    k: usize,
) -> Result<(Option<ConvexPolygon>, Vec<usize>), GeometryError> {
    let Some(cell) = clip_cell(generators, region, k)? else {
        return Ok((None, Vec::new()));
    };
    let mut neighbors = Vec::new();
    for (j, &zj) in generators.iter().enumerate() {
        if j != k && shared_edge_length(&cell, generators[k], zj) > ADJACENCY_MIN_EDGE {
            neighbors.push(j);
        }
    }
    Ok((Some(cell), neighbors))
}

/// Builds the Voronoi diagram of `generators` clipped to `region` by pairwise
/// half-plane clipping (quadratic in the number of generators).
pub fn compute_voronoi(
    generators: &[Point2],
    region: &ConvexPolygon,
) -> Result<VoronoiDiagram, GeometryError> {
    if generators.is_empty() {
        return Err(GeometryError::DegenerateGeneratorSet);
    }
    if generators.iter().any(|g| !g.is_finite()) {
        return Err(GeometryError::NonFinite("generator"));
    }
    let n = generators.len();
    for i in 0..n {
        for j in (i + 1)..n {
            if generators[i].dist(generators[j]) < COINCIDENT_GENERATOR_TOL {
                return Err(GeometryError::CoincidentGenerators(i, j));
            }
        }
    }
    let mut cells = Vec::with_capacity(n);
    for k in 0..n {
        cells.push(clip_cell(generators, region, k)?);
    }
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
    for k in 0..n {
        for j in (k + 1)..n {
            let (Some(ck), Some(_)) = (&cells[k], &cells[j]) else {
                continue;
            };
            if shared_edge_length(ck, generators[k], generators[j]) > ADJACENCY_MIN_EDGE {
                adjacency[k].push(j);
                adjacency[j].push(k);
            }
        }
    }
    Ok(VoronoiDiagram {
        generators: generators.to_vec(),
        region: region.clone(),
        cells,
        adjacency,
    })
}

/// Total length of the edges of `cell` lying on the perpendicular bisector
/// of `a` and `b` (both endpoints within [`SHARED_EDGE_TOL`] of the line).
fn shared_edge_length(cell: &ConvexPolygon, a: Point2, b: Point2) -> f64 {
    let n = b - a;
    let c = 0.5 * (b.norm_sq() - a.norm_sq());
    let inv_norm = 1.0 / n.norm();
    let line_dist = |p: Point2| (n.dot(p) - c).abs() * inv_norm;
    cell.edges()
        .filter(|&(p, q)| line_dist(p) <= SHARED_EDGE_TOL && line_dist(q) <= SHARED_EDGE_TOL)
        .map(|(p, q)| p.dist(q))
        .sum()
}
