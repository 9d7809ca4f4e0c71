//! Time grids `0 = t_0 < t_1 < ... < t_N = T`.

use crate::error::{GcqError, Result};

/// Strictly increasing time grid starting at zero, with cached steps
/// `Δ_j = t_j - t_{j-1}` for `j = 1..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeMesh {
    points: Vec<f64>,
    steps: Vec<f64>,
}

/// Extreme step sizes of a mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshStats {
    pub delta_min: f64,
    pub delta_max: f64,
    pub count: usize,
}

impl MeshStats {
    pub fn new(delta_min: f64, delta_max: f64, count: usize) -> Result<Self> {
        if !(delta_min > 0.0 && delta_min <= delta_max && delta_max.is_finite()) || count == 0 {
            return Err(GcqError::Mesh(format!(
                "inconsistent mesh statistics (min {delta_min}, max {delta_max}, N {count})"
            )));
        }
        Ok(MeshStats {
            delta_min,
            delta_max,
            count,
        })
    }
}

impl TimeMesh {
    /// Validates a user supplied grid. Only `t_0 = 0`, finiteness and strict
    /// monotonicity are enforced; no step-ratio condition is imposed.
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(GcqError::Mesh("a mesh needs at least two points".into()));
        }
        if points[0] != 0.0 {
            return Err(GcqError::Mesh(format!("t_0 must be 0, got {}", points[0])));
        }
        if let Some(bad) = points.iter().find(|t| !t.is_finite()) {
            return Err(GcqError::Mesh(format!("non-finite mesh point {bad}")));
        }
        let steps: Vec<f64> = points.windows(2).map(|w| w[1] - w[0]).collect();
        if let Some(j) = steps.iter().position(|&d| d <= 0.0) {
            return Err(GcqError::Mesh(format!(
                "mesh is not strictly increasing at t_{} = {}",
                j + 1,
                points[j + 1]
            )));
        }
        Ok(TimeMesh { points, steps })
    }

    /// `N` equal steps on `[0, T]`.
    pub fn uniform(n: usize, horizon: f64) -> Result<Self> {
        check_size(n, horizon)?;
        let mut points: Vec<f64> = (0..=n).map(|j| horizon * j as f64 / n as f64).collect();
        points[n] = horizon;
        Self::new(points)
    }

    /// Algebraically graded mesh `t_j = T (j/N)^α`.
    pub fn graded(n: usize, alpha: f64, horizon: f64) -> Result<Self> {
        graded_mesh(n, alpha, horizon)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Steps `Δ_1..Δ_N`; `steps()[n - 1]` is `Δ_n`.
    pub fn steps(&self) -> &[f64] {
        &self.steps
    }

    /// `Δ_n` for `1 ≤ n ≤ N`.
    pub fn step(&self, n: usize) -> f64 {
        self.steps[n - 1]
    }

    /// Number of steps `N`.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    pub fn stats(&self) -> MeshStats {
        mesh_stats(self)
    }

    /// True when all steps are bitwise equal.
    pub fn is_uniform(&self) -> bool {
        self.steps.iter().all(|&d| d == self.steps[0])
    }
}

fn check_size(n: usize, horizon: f64) -> Result<()> {
    if n == 0 {
        return Err(GcqError::Parameter(
            "number of steps N must be at least 1".into(),
        ));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(GcqError::Parameter(format!(
            "horizon T must be positive, got {horizon}"
        )));
    }
    Ok(())
}

/// Graded mesh `t_j = T (j/N)^α`, `j = 0..=N`, with `α ≥ 1`.
pub fn graded_mesh(n: usize, alpha: f64, horizon: f64) -> Result<TimeMesh> {
    check_size(n, horizon)?;
    if !(alpha >= 1.0 && alpha.is_finite()) {
        return Err(GcqError::Parameter(format!(
            "grading exponent must be >= 1, got {alpha}"
        )));
    }
    let points = (0..=n)
        .map(|j| horizon * (j as f64 / n as f64).powf(alpha))
        .collect();
    TimeMesh::new(points)
}

pub fn mesh_stats(mesh: &TimeMesh) -> MeshStats {
    let (delta_min, delta_max) = mesh
        .steps
        .iter()
        .fold((f64::INFINITY, 0.0_f64), |(lo, hi), &d| {
            (lo.min(d), hi.max(d))
        });
    MeshStats {
        delta_min,
        delta_max,
        count: mesh.len(),
    }
}
