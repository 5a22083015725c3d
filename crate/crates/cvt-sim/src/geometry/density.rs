use super::{GeometryError, Point2};

/// A nonnegative weighting density over the region.
///
/// Every cell that moments are requested for must carry strictly positive
/// mass; [`super::cell_moments`] rejects cells where the density integrates
/// to zero. Uniform and Gaussian fields are positive everywhere by
/// construction, grid fields may vanish on parts of their support (for
/// example a linear ramp sampled down to zero at one edge).
#[derive(Debug, Clone, PartialEq)]
pub enum DensityField {
    /// Constant value everywhere.
    Uniform(f64),
    /// Samples on a rectangular grid, bilinearly interpolated.
    Grid(GridDensity),
    /// Offset-free isotropic Gaussian bump, positive everywhere.
    Gaussian {
        center: Point2,
        sigma: f64,
        amplitude: f64,
    },
}

impl DensityField {
    pub fn uniform(value: f64) -> Result<Self, GeometryError> {
        if !(value.is_finite() && value > 0.0) {
            return Err(GeometryError::NonFinite("uniform density value"));
        }
        Ok(DensityField::Uniform(value))
    }

    pub fn gaussian(center: Point2, sigma: f64, amplitude: f64) -> Result<Self, GeometryError> {
        if !center.is_finite() || !(sigma.is_finite() && sigma > 0.0) {
            return Err(GeometryError::NonFinite("gaussian density parameter"));
        }
        if !(amplitude.is_finite() && amplitude > 0.0) {
            return Err(GeometryError::NonFinite("gaussian density amplitude"));
        }
        Ok(DensityField::Gaussian {
            center,
            sigma,
            amplitude,
        })
    }

    pub fn eval(&self, q: Point2) -> f64 {
        match self {
            DensityField::Uniform(v) => *v,
            DensityField::Grid(g) => g.eval(q),
            DensityField::Gaussian {
                center,
                sigma,
                amplitude,
            } => {
                let d2 = (q - *center).norm_sq();
                amplitude * (-d2 / (2.0 * sigma * sigma)).exp()
            }
        }
    }

    pub fn is_uniform(&self) -> Option<f64> {
        match self {
            DensityField::Uniform(v) => Some(*v),
            _ => None,
        }
    }
}

/// Nonnegative samples on a regular grid with bilinear interpolation between
/// them. Queries outside the grid clamp to the border samples.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity {
    origin: Point2,
    spacing: (f64, f64),
    /// `values[row][col]`, row `j` sampled at `origin.im + j * spacing.1`.
    values: Vec<Vec<f64>>,
}

impl GridDensity {
    pub fn new(
        origin: Point2,
        spacing: (f64, f64),
        values: Vec<Vec<f64>>,
    ) -> Result<Self, GeometryError> {
        if !origin.is_finite()
            || !(spacing.0.is_finite() && spacing.0 > 0.0)
            || !(spacing.1.is_finite() && spacing.1 > 0.0)
        {
            return Err(GeometryError::NonFinite("grid density geometry"));
        }
        let rows = values.len();
        let cols = values.first().map_or(0, |r| r.len());
        if rows < 2 || cols < 2 || values.iter().any(|r| r.len() != cols) {
            return Err(GeometryError::DegeneratePolygon(
                "grid density needs at least 2x2 rectangular samples".into(),
            ));
        }
        if values
            .iter()
            .flatten()
            .any(|v| !(v.is_finite() && *v >= 0.0))
        {
            return Err(GeometryError::NonFinite("grid density sample"));
        }
        if values.iter().flatten().all(|v| *v == 0.0) {
            return Err(GeometryError::NonFinite("grid density is identically zero"));
        }
        Ok(GridDensity {
            origin,
            spacing,
            values,
        })
    }

    pub fn origin(&self) -> Point2 {
        self.origin
    }

    pub fn spacing(&self) -> (f64, f64) {
        self.spacing
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    fn eval(&self, q: Point2) -> f64 {
        let cols = self.values[0].len();
        let rows = self.values.len();
        let fx = ((q.re - self.origin.re) / self.spacing.0).clamp(0.0, (cols - 1) as f64);
        let fy = ((q.im - self.origin.im) / self.spacing.1).clamp(0.0, (rows - 1) as f64);
        let i = (fx.floor() as usize).min(cols - 2);
        let j = (fy.floor() as usize).min(rows - 2);
        let tx = fx - i as f64;
        let ty = fy - j as f64;
        let v00 = self.values[j][i];
        let v10 = self.values[j][i + 1];
        let v01 = self.values[j + 1][i];
        let v11 = self.values[j + 1][i + 1];
        let bottom = v00 + tx * (v10 - v00);
        let top = v01 + tx * (v11 - v01);
        bottom + ty * (top - bottom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rejects_negative_and_all_zero() {
        assert!(GridDensity::new(
            Point2::ZERO,
            (1.0, 1.0),
            vec![vec![-0.1, 1.0], vec![0.5, 1.0]],
        )
        .is_err());
        assert!(GridDensity::new(
            Point2::ZERO,
            (1.0, 1.0),
            vec![vec![0.0, 0.0], vec![0.0, 0.0]],
        )
        .is_err());
    }

    #[test]
    fn grid_bilinear_matches_linear_function() {
        // phi(x, y) = 1 + 2x + 3y is reproduced exactly by bilinear
        // interpolation of its corner samples.
        let g = GridDensity::new(
            Point2::ZERO,
            (2.0, 2.0),
            vec![vec![1.0, 5.0], vec![7.0, 11.0]],
        )
        .unwrap();
        let phi = |x: f64, y: f64| 1.0 + 2.0 * x + 3.0 * y;
        for &(x, y) in &[(0.0, 0.0), (2.0, 2.0), (1.0, 1.0), (0.3, 1.7), (2.0, 0.5)] {
            assert!((g.eval(Point2::new(x, y)) - phi(x, y)).abs() < 1e-12);
        }
        // Outside the grid the border value is held.
        assert_eq!(g.eval(Point2::new(-1.0, 0.0)), 1.0);
        assert_eq!(g.eval(Point2::new(3.0, 3.0)), 11.0);
    }

    #[test]
    fn gaussian_is_positive_and_peaks_at_center() {
        let phi = DensityField::gaussian(Point2::new(1.0, 1.0), 0.5, 2.0).unwrap();
        assert_eq!(phi.eval(Point2::new(1.0, 1.0)), 2.0);
        let far = phi.eval(Point2::new(10.0, 10.0));
        assert!(far > 0.0 && far < 1e-10);
    }

    #[test]
    fn uniform_rejects_nonpositive() {
        assert!(DensityField::uniform(0.0).is_err());
        assert!(DensityField::uniform(-1.0).is_err());
        assert!(DensityField::uniform(f64::NAN).is_err());
    }
}
