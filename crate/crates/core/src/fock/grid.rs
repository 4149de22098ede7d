use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Uniform rapidity grid with trapezoidal weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpec", into = "GridSpec")]
pub struct RapidityGrid {
    theta_min: f64,
    theta_max: f64,
    points: Vec<f64>,
    weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct GridSpec {
    theta_min: f64,
    theta_max: f64,
    n_points: usize,
}

impl TryFrom<GridSpec> for RapidityGrid {
    type Error = Error;
    fn try_from(s: GridSpec) -> Result<Self> {
        RapidityGrid::new(s.theta_min, s.theta_max, s.n_points)
    }
}

impl From<RapidityGrid> for GridSpec {
    fn from(g: RapidityGrid) -> Self {
        GridSpec { theta_min: g.theta_min, theta_max: g.theta_max, n_points: g.len() }
    }
}

impl RapidityGrid {
    pub fn new(theta_min: f64, theta_max: f64, n_points: usize) -> Result<Self> {
        if !(theta_min < theta_max) || !theta_min.is_finite() || !theta_max.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "grid range must satisfy theta_min < theta_max, got [{theta_min}, {theta_max}]"
            )));
        }
        if n_points < 2 {
            return Err(Error::InvalidParameter(format!("grid needs at least 2 points, got {n_points}")));
        }
        let h = (theta_max - theta_min) / (n_points - 1) as f64;
        let points = (0..n_points).map(|i| theta_min + h * i as f64).collect();
        let mut weights = vec![h; n_points];
        weights[0] *= 0.5;
        weights[n_points - 1] *= 0.5;
        Ok(Self { theta_min, theta_max, points, weights })
    }

    /// Symmetric grid `[-half_range, half_range]`.
    pub fn symmetric(half_range: f64, n_points: usize) -> Result<Self> {
        Self::new(-half_range, half_range, n_points)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn theta_min(&self) -> f64 {
        self.theta_min
    }

    pub fn theta_max(&self) -> f64 {
        self.theta_max
    }

    pub fn spacing(&self) -> f64 {
        (self.theta_max - self.theta_min) / (self.len() - 1) as f64
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn theta(&self, i: usize) -> f64 {
        self.points[i]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    /// Index of the mirrored point `-θ_i`, if the grid contains it.
    pub fn mirror_index(&self, i: usize) -> Option<usize> {
        let j = self.len() - 1 - i;
        ((self.points[j] + self.points[i]).abs() < 1e-12 * (1.0 + self.points[i].abs())).then_some(j)
    }
}
