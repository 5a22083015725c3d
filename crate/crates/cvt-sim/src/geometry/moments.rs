use std::collections::BTreeMap;

use super::polygon::ConvexPolygon;
use super::voronoi::{clip_cell, VoronoiDiagram};
use super::{DensityField, GeometryError, Point2, COINCIDENT_GENERATOR_TOL};

/// Uniform triangle-refinement levels applied before the 7-point rule; each
/// level splits every triangle into four.
pub const QUADRATURE_REFINEMENT: u32 = 1;

/// Central-difference step for centroid Jacobians, meters.
pub const JACOBIAN_STEP: f64 = 1e-5;

/// 2x2 Jacobian in row-major order: `m[r][c] = d out_r / d in_c` with
/// coordinates ordered `(re, im)`.
pub type Mat2 = [[f64; 2]; 2];

/// Density-weighted moments of a cell: mass `M`, centroid `C`, and the polar
/// second moment `J` about the centroid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellMoments {
    /// `M = integral of phi` over the cell; strictly positive.
    pub mass: f64,
    /// `C = (1/M) integral of q phi(q)`; inside the cell by convexity.
    pub centroid: Point2,
    /// `J = integral of |q - C|^2 phi(q)`; nonnegative.
    pub polar_moment: f64,
}

// Degree-5 rule with 7 points per triangle (weights relative to the triangle
// area): the barycenter plus two symmetric orbits.
fn seven_point_rule() -> [(f64, f64, f64); 7] {
    let s15 = 15.0_f64.sqrt();
    let w0 = 9.0 / 40.0;
    let b1 = (6.0 + s15) / 21.0;
    let w1 = (155.0 + s15) / 1200.0;
    let b2 = (6.0 - s15) / 21.0;
    let w2 = (155.0 - s15) / 1200.0;
    [
        (1.0 / 3.0, 1.0 / 3.0, w0),
        (1.0 - 2.0 * b1, b1, w1),
        (b1, 1.0 - 2.0 * b1, w1),
        (b1, b1, w1),
        (1.0 - 2.0 * b2, b2, w2),
        (b2, 1.0 - 2.0 * b2, w2),
        (b2, b2, w2),
    ]
}

/// Applies `f(point, weight)` over the triangle `(a, b, c)`, recursively
/// split `levels` times into four congruent triangles. Weights sum to the
/// signed triangle area; the rule is exact for polynomials up to degree 5.
fn triangle_quadrature(
    a: Point2,
    b: Point2,
    c: Point2,
    levels: u32,
    rule: &[(f64, f64, f64); 7],
    f: &mut impl FnMut(Point2, f64),
) {
    if levels == 0 {
        let signed_area = 0.5 * (b - a).cross(c - a);
        for &(l1, l2, w) in rule {
            let l3 = 1.0 - l1 - l2;
            let q = a * l1 + b * l2 + c * l3;
            f(q, w * signed_area);
        }
        return;
    }
    let ab = (a + b) * 0.5;
    let bc = (b + c) * 0.5;
    let ca = (c + a) * 0.5;
    triangle_quadrature(a, ab, ca, levels - 1, rule, f);
    triangle_quadrature(ab, b, bc, levels - 1, rule, f);
    triangle_quadrature(ca, bc, c, levels - 1, rule, f);
    triangle_quadrature(ab, bc, ca, levels - 1, rule, f);
}

/// Applies `f(point, weight)` over `cell`, fan-triangulated from the mean of
/// its vertices.
pub(crate) fn polygon_quadrature(
    cell: &ConvexPolygon,
    levels: u32,
    f: &mut impl FnMut(Point2, f64),
) {
    let pivot = cell.vertex_mean();
    let rule = seven_point_rule();
    for (p, q) in cell.edges() {
        triangle_quadrature(pivot, p, q, levels, &rule, f);
    }
}

/// Mass, centroid, and centroid polar moment of `cell` under `phi`.
///
/// Uniform densities use exact shoelace closed forms; other densities use
/// fan quadrature with [`QUADRATURE_REFINEMENT`] refinement levels. Errors
/// when the density integrates to zero over the cell.
pub fn cell_moments(cell: &ConvexPolygon, phi: &DensityField) -> Result<CellMoments, GeometryError> {
    cell_moments_with_refinement(cell, phi, QUADRATURE_REFINEMENT)
}

/// [`cell_moments`] with an explicit refinement level (for convergence
/// studies and oracle comparisons).
pub fn cell_moments_with_refinement(
    cell: &ConvexPolygon,
    phi: &DensityField,
    levels: u32,
) -> Result<CellMoments, GeometryError> {
    if let Some(value) = phi.is_uniform() {
        return Ok(uniform_moments(cell, value));
    }
    // Raw moments about the fan pivot to limit cancellation, shifted to the
    // centroid afterwards: J = m2' - M |C - pivot|^2.
    let pivot = cell.vertex_mean();
    let mut m0 = 0.0;
    let mut m1 = Point2::ZERO;
    let mut m2 = 0.0;
    polygon_quadrature(cell, levels, &mut |q, w| {
        let d = phi.eval(q);
        let r = q - pivot;
        m0 += w * d;
        m1 = m1 + r * (w * d);
        m2 += w * d * r.norm_sq();
    });
    if !(m0 > 0.0) {
        return Err(GeometryError::ZeroMass);
    }
    let offset = m1 * (1.0 / m0);
    Ok(CellMoments {
        mass: m0,
        centroid: pivot + offset,
        polar_moment: (m2 - m0 * offset.norm_sq()).max(0.0),
    })
}

/// Exact closed forms for constant density: shoelace area, the standard
/// polygon centroid sum, and the polar second moment about the origin
/// shifted to the centroid by the parallel-axis rule.
fn uniform_moments(cell: &ConvexPolygon, value: f64) -> CellMoments {
    let vs = cell.vertices();
    let n = vs.len();
    // Work relative to the first vertex for numerical headroom.
    let origin = vs[0];
    let mut area2 = 0.0; // twice the area
    let mut cx = 0.0;
    let mut cy = 0.0;
    let mut j0 = 0.0; // integral of |q|^2 about `origin`, times 12
    for i in 0..n {
        let p = vs[i] - origin;
        let q = vs[(i + 1) % n] - origin;
        let cr = p.cross(q);
        area2 += cr;
        cx += (p.re + q.re) * cr;
        cy += (p.im + q.im) * cr;
        j0 += cr * (p.norm_sq() + p.dot(q) + q.norm_sq());
    }
    let area = 0.5 * area2;
    let centroid_rel = Point2::new(cx / (6.0 * area), cy / (6.0 * area));
    let polar_about_origin = j0 / 12.0;
    let polar = polar_about_origin - area * centroid_rel.norm_sq();
    CellMoments {
        mass: value * area,
        centroid: origin + centroid_rel,
        polar_moment: (value * polar).max(0.0),
    }
}

/// The coverage cost `H = sum_k integral over cell k of |q - z_k|^2 phi(q)`,
/// evaluated by quadrature over every nonempty cell. Empty cells contribute
/// nothing.
pub fn coverage_cost(
    generators: &[Point2],
    region: &ConvexPolygon,
    phi: &DensityField,
) -> Result<f64, GeometryError> {
    let diagram = super::compute_voronoi(generators, region)?;
    Ok(coverage_cost_of_diagram(&diagram, phi))
}

/// [`coverage_cost`] for an already-built diagram.
pub fn coverage_cost_of_diagram(diagram: &VoronoiDiagram, phi: &DensityField) -> f64 {
    let mut total = 0.0;
    for (k, cell) in diagram.cells().iter().enumerate() {
        let Some(cell) = cell else { continue };
        let z = diagram.generators()[k];
        let mut acc = 0.0;
        polygon_quadrature(cell, QUADRATURE_REFINEMENT, &mut |q, w| {
            acc += w * phi.eval(q) * (q - z).norm_sq();
        });
        total += acc;
    }
    total
}

/// Gradient of the coverage cost with respect to each generator:
/// `d H / d z_k = 2 M_k (z_k - C_k)`. Generators with empty cells have no
/// local influence on the cost and get a zero gradient.
pub fn coverage_gradient(
    generators: &[Point2],
    region: &ConvexPolygon,
    phi: &DensityField,
) -> Result<Vec<Point2>, GeometryError> {
    let diagram = super::compute_voronoi(generators, region)?;
    coverage_gradient_of_diagram(&diagram, phi)
}

/// [`coverage_gradient`] for an already-built diagram.
pub fn coverage_gradient_of_diagram(
    diagram: &VoronoiDiagram,
    phi: &DensityField,
) -> Result<Vec<Point2>, GeometryError> {
    let mut out = Vec::with_capacity(diagram.len());
    for (k, cell) in diagram.cells().iter().enumerate() {
        match cell {
            Some(cell) => {
                let m = cell_moments(cell, phi)?;
                out.push((diagram.generators()[k] - m.centroid) * (2.0 * m.mass));
            }
            None => out.push(Point2::ZERO),
        }
    }
    Ok(out)
}

/// Central-difference Jacobians of cell `k`'s centroid with respect to the
/// positions of generator `k` and each of its Voronoi neighbors, using step
/// [`JACOBIAN_STEP`]. Entries for other generators are identically zero and
/// omitted from the map.
///
/// The step must not change the cell topology; callers probing near
/// degenerate configurations should verify adjacency stability themselves.
pub fn centroid_jacobians(
    diagram: &VoronoiDiagram,
    phi: &DensityField,
    k: usize,
) -> Result<BTreeMap<usize, Mat2>, GeometryError> {
    centroid_jacobians_with_step(diagram, phi, k, JACOBIAN_STEP)
}

/// [`centroid_jacobians`] with an explicit step (for step-halving checks).
pub fn centroid_jacobians_with_step(
    diagram: &VoronoiDiagram,
    phi: &DensityField,
    k: usize,
    step: f64,
) -> Result<BTreeMap<usize, Mat2>, GeometryError> {
    if k >= diagram.len() {
        return Err(GeometryError::BadIndex(k));
    }
    if diagram.cell(k).is_none() {
        return Err(GeometryError::EmptyCell(k));
    }
    let mut out = BTreeMap::new();
    let mut targets = vec![k];
    targets.extend_from_slice(diagram.neighbors(k));
    for j in targets {
        let mut jac = [[0.0; 2]; 2];
        for (axis, unit) in [(0, Point2::new(1.0, 0.0)), (1, Point2::new(0.0, 1.0))] {
            let c_plus = perturbed_centroid(diagram, phi, k, j, unit * step)?;
            let c_minus = perturbed_centroid(diagram, phi, k, j, unit * (-step))?;
            let d = (c_plus - c_minus) * (1.0 / (2.0 * step));
            jac[0][axis] = d.re;
            jac[1][axis] = d.im;
        }
        out.insert(j, jac);
    }
    Ok(out)
}

/// Centroid of cell `k` after displacing generator `j` by `delta`.
fn perturbed_centroid(
    diagram: &VoronoiDiagram,
    phi: &DensityField,
    k: usize,
    j: usize,
    delta: Point2,
) -> Result<Point2, GeometryError> {
    let mut gens = diagram.generators().to_vec();
    gens[j] = gens[j] + delta;
    for (i, g) in gens.iter().enumerate() {
        if i != j && g.dist(gens[j]) < COINCIDENT_GENERATOR_TOL {
            return Err(GeometryError::JacobianStepCollision(j, i));
        }
    }
    let cell = clip_cell(&gens, diagram.region(), k)?.ok_or(GeometryError::EmptyCell(k))?;
    Ok(cell_moments(&cell, phi)?.centroid)
}
