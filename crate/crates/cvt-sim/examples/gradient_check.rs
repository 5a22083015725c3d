//! Verify the closed-form coverage gradient 2 M_k (z_k - C_k) against
//! central finite differences of the cost, component by component.
//!
//!     cargo run --example gradient_check

use cvt_sim::geometry::{coverage_cost, coverage_gradient, ConvexPolygon, DensityField, Point2};

fn main() {
    let region = ConvexPolygon::rectangle(0.0, 0.0, 4.0, 2.8).unwrap();
    let phi = DensityField::uniform(1.0).unwrap();
    let generators = vec![
        Point2::new(0.8, 0.7),
        Point2::new(2.9, 1.0),
        Point2::new(1.7, 2.1),
        Point2::new(3.3, 2.3),
    ];

    let grad = coverage_gradient(&generators, &region, &phi).unwrap();
    let h = 1e-5;

    println!("robot  axis  analytic        finite diff     |error|");
    let mut worst = 0.0f64;
    for k in 0..generators.len() {
        for (axis, unit) in [("x", Point2::new(1.0, 0.0)), ("y", Point2::new(0.0, 1.0))] {
            let mut plus = generators.clone();
            plus[k] = plus[k] + unit * h;
            let mut minus = generators.clone();
            minus[k] = minus[k] + unit * (-h);
            let fd = (coverage_cost(&plus, &region, &phi).unwrap()
                - coverage_cost(&minus, &region, &phi).unwrap())
                / (2.0 * h);
            let analytic = match axis {
                "x" => grad[k].re,
                _ => grad[k].im,
            };
            let err = (analytic - fd).abs();
            worst = worst.max(err);
            println!("{k}      {axis}     {analytic:+.10}  {fd:+.10}  {err:.2e}");
        }
    }
    println!();
    println!("worst absolute mismatch: {worst:.2e} (finite-difference step {h})");
}
