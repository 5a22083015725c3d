//! Build a bounded Voronoi diagram for a handful of generators and print
//! each cell's vertices, area, centroid, and neighbors.
//!
//!     cargo run --example voronoi_cells

use cvt_sim::geometry::{cell_moments, compute_voronoi, ConvexPolygon, DensityField, Point2};

fn main() {
    let region = ConvexPolygon::rectangle(0.0, 0.0, 4.0, 2.8).unwrap();
    let phi = DensityField::uniform(1.0).unwrap();
    let generators = vec![
        Point2::new(0.7, 0.6),
        Point2::new(3.1, 0.9),
        Point2::new(1.6, 2.2),
        Point2::new(2.9, 2.1),
    ];

    let diagram = compute_voronoi(&generators, &region).unwrap();

    let mut total_area = 0.0;
    for (k, cell) in diagram.cells().iter().enumerate() {
        let cell = cell.as_ref().expect("interior generators own cells");
        let m = cell_moments(cell, &phi).unwrap();
        total_area += cell.area();
        println!(
            "cell {k}: generator ({:.2}, {:.2}), area {:.4}, centroid ({:.4}, {:.4}), polar moment {:.4}",
            generators[k].re, generators[k].im, cell.area(), m.centroid.re, m.centroid.im,
            m.polar_moment
        );
        let verts: Vec<String> = cell
            .vertices()
            .iter()
            .map(|v| format!("({:.3}, {:.3})", v.re, v.im))
            .collect();
        println!("  vertices: {}", verts.join(" "));
        println!("  neighbors: {:?}", diagram.neighbors(k));
    }
    println!(
        "cells partition the region: total area {total_area:.12} vs {:.12}",
        region.area()
    );
}
