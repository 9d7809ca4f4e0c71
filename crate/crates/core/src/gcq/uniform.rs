//! Classical trapezoidal CQ weights on a uniform grid, used as a baseline.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{GcqError, Result};
use crate::symbol::TransferSymbol;

/// Length `L` and radius `λ` of the circle rule for the generating function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformCqParameters {
    pub count: usize,
    pub lambda: f64,
}

/// `L = max(256, 4N)` and `λ = ε^{1/(L+1)}`: the aliasing error `O(λ^{L+1})`
/// sits at machine precision while the roundoff amplification `λ^{-j}` stays
/// below `ε^{-1/4}` for the `j ≤ N` weights that are used.
pub fn default_uniform_parameters(n: usize) -> UniformCqParameters {
    let count = (4 * n).max(256);
    UniformCqParameters {
        count,
        lambda: f64::EPSILON.powf(1.0 / (count as f64 + 1.0)),
    }
}

/// `δ(ζ) = 2(1 - ζ)/(1 + ζ)`.
fn trapezoidal_generating(zeta: Complex64) -> Complex64 {
    2.0 * (1.0 - zeta) / (1.0 + zeta)
}

/// Weights `ω_0..ω_L` of `K(δ(ζ)/Δ) = Σ_j ω_j ζ^j`, computed by the
/// `(L+1)`-point trapezoidal rule on `|ζ| = λ`.
pub fn uniform_cq_weights(
    symbol: &TransferSymbol,
    delta: f64,
    count: usize,
    lambda: f64,
) -> Result<Vec<Complex64>> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(GcqError::Parameter(format!(
            "lambda = {lambda} outside (0, 1)"
        )));
    }
    if !(delta > 0.0 && delta.is_finite()) || count == 0 {
        return Err(GcqError::Parameter(format!(
            "uniform CQ needs a positive step and L >= 1 (Δ = {delta}, L = {count})"
        )));
    }
    let m = count + 1;
    let values = (0..m)
        .map(|l| {
            let zeta = Complex64::from_polar(lambda, -2.0 * PI * l as f64 / m as f64);
            symbol.evaluate(trapezoidal_generating(zeta) / delta)
        })
        .collect::<Result<Vec<_>>>()?;
    let weights = (0..m)
        .map(|j| {
            let terms: Vec<Complex64> = values
                .iter()
                .enumerate()
                .map(|(l, v)| {
                    v * Complex64::from_polar(1.0, 2.0 * PI * ((l * j) % m) as f64 / m as f64)
                })
                .collect();
            crate::sum::pairwise_sum(&terms) * lambda.powi(-(j as i32)) / m as f64
        })
        .collect();
    Ok(weights)
}
