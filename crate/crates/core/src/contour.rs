//! Quadrature rules for the contour integrals behind the gCQ weights.
//!
//! The production rule lives on the circle `|s - M| = M`, parametrized by
//! Jacobi elliptic functions so that the nodes cluster near the real poles
//! of the one-step recursions. The parameter line is `σ + iK'/2` with real
//! `σ`; along it `|sn| = k^{-1/2}` and the Möbius map
//!
//! ```text
//! γ(σ) = M/(q-1) · ( √(2q-1) · (k⁻¹ + sn(σ|k²)) / (k⁻¹ - sn(σ|k²)) - 1 )
//! ```
//!
//! sends it onto the circle. Weights are normalized to the positive
//! orientation, so `Σ_ℓ w_ℓ f(s_ℓ) ≈ (1/2πi) ∮ f(s) ds` with the circle
//! traversed counterclockwise.
//!
//! A plain circle rule ([`ContourRule::circle`]) is provided for oracle
//! computations that need a contour away from the origin.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::elliptic::{complete_elliptic_k, jacobi_sn_cn_dn, EllipticParameter};
use crate::error::{GcqError, Result};
use crate::gcq::StepperKind;
use crate::mesh::{MeshStats, TimeMesh};

/// Parameters of the elliptic circle rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourParams {
    /// Method constant `R`.
    pub method_constant: f64,
    /// Circle center and radius `M`.
    pub center: f64,
    /// `q = M / Δ_min`.
    pub q: f64,
    /// Elliptic modulus `k`.
    pub modulus: f64,
    /// `m = k²` together with its complement.
    pub parameter: EllipticParameter,
    /// `K(k²)`.
    pub quarter_period: f64,
    /// `K'(k²) = K(1 - k²)`.
    pub complementary_quarter_period: f64,
    /// Number of nodes `N_Q`.
    pub node_count: usize,
}

impl ContourParams {
    pub fn new(stats: MeshStats, stepper: StepperKind, node_count: usize) -> Result<Self> {
        if node_count == 0 {
            return Err(GcqError::Parameter(
                "node count N_Q must be positive".into(),
            ));
        }
        let method_constant = stepper.method_constant();
        let center = method_constant * (stats.delta_max.powi(-2)).max(1.0 / stats.delta_min);
        let q = center / stats.delta_min;
        if !(q > 1.0 && q.is_finite()) {
            return Err(GcqError::Contour(format!(
                "q = M/Δ_min = {q} must exceed 1 (M = {center}, Δ_min = {})",
                stats.delta_min
            )));
        }
        let r = (2.0 * q - 1.0).sqrt();
        let modulus = (q - r) / (q + r);
        // 1 - k² = 4qr/(q+r)² without cancellation.
        let complement = 4.0 * q * r / ((q + r) * (q + r));
        let parameter = EllipticParameter::from_parts(modulus * modulus, complement)?;
        let quarter_period = complete_elliptic_k(parameter);
        let complementary_quarter_period = complete_elliptic_k(EllipticParameter::from_parts(
            complement,
            modulus * modulus,
        )?);
        Ok(ContourParams {
            method_constant,
            center,
            q,
            modulus,
            parameter,
            quarter_period,
            complementary_quarter_period,
            node_count,
        })
    }

    /// `√(2q - 1)`.
    fn root(&self) -> f64 {
        (2.0 * self.q - 1.0).sqrt()
    }

    /// True when `z` lies strictly inside the circle.
    pub fn contains(&self, z: Complex64) -> bool {
        (z - self.center).norm() < self.center
    }
}

/// Shape of the contour a rule was built on.
#[derive(Debug, Clone, PartialEq)]
pub enum ContourGeometry {
    /// Elliptic-parametrized circle of center and radius `M`.
    Elliptic(ContourParams),
    /// Equispaced trapezoidal rule on a circle.
    Circle { center: Complex64, radius: f64 },
}

/// Complex nodes and positively oriented weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourRule {
    nodes: Vec<Complex64>,
    weights: Vec<Complex64>,
    geometry: ContourGeometry,
}

/// Default node count `⌈N log₂² N⌉`, and 16 for `N = 1`.
pub fn default_node_count(n: usize) -> usize {
    if n <= 1 {
        return 16;
    }
    let l = (n as f64).log2();
    (n as f64 * l * l).ceil() as usize
}

/// Builds the elliptic rule for a mesh with the given statistics.
pub fn build_contour(
    stats: MeshStats,
    n: usize,
    stepper: StepperKind,
    node_count_override: Option<usize>,
) -> Result<ContourRule> {
    let node_count = node_count_override.unwrap_or_else(|| default_node_count(n));
    let params = ContourParams::new(stats, stepper, node_count)?;
    Ok(ContourRule::elliptic(params))
}

/// `γ(σ + iK'/2)` and its derivative with respect to `σ`.
pub fn gamma_point_and_derivative(sigma: f64, params: &ContourParams) -> (Complex64, Complex64) {
    let m = params.parameter;
    let mm = m.m();
    // Addition formula for u = σ + iy: real-argument values at (σ | m) and (y | 1 - m).
    let a = jacobi_sn_cn_dn(sigma, m);
    let b = jacobi_sn_cn_dn(
        0.5 * params.complementary_quarter_period,
        EllipticParameter::from_parts(m.complement(), mm).expect("valid complementary pair"),
    );
    let den = b.cn * b.cn + mm * a.sn * a.sn * b.sn * b.sn;
    let sn = Complex64::new(a.sn * b.dn, a.cn * a.dn * b.sn * b.cn) / den;
    let cn = Complex64::new(a.cn * b.cn, -a.sn * a.dn * b.sn * b.dn) / den;
    let dn = Complex64::new(a.dn * b.cn * b.dn, -mm * a.sn * a.cn * b.sn) / den;

    let k = params.modulus;
    let inv_k = 1.0 / k;
    let r = params.root();
    let scale = params.center / (params.q - 1.0);
    let mut point = scale * (r * (inv_k + sn) / (inv_k - sn) - 1.0);
    // Near the origin the real part is O(|z|²/M) and lost to cancellation;
    // recover it from the accurate imaginary part.
    let c = params.center;
    if point.re < c {
        point.re = point.im * point.im / (c + (c * c - point.im * point.im).max(0.0).sqrt());
    }
    let gap = inv_k - sn;
    let derivative = scale * r * 2.0 * cn * dn / (k * gap * gap);
    (point, derivative)
}

impl ContourRule {
    /// Elliptic rule with `σ_ℓ = -K + (ℓ - 1/2)·4K/N_Q`.
    pub fn elliptic(params: ContourParams) -> Self {
        let nq = params.node_count;
        let kk = params.quarter_period;
        let h = 4.0 * kk / nq as f64;
        // Positive orientation: the parameter line runs clockwise, hence the sign.
        let prefactor = -h / (2.0 * PI * Complex64::i());
        let (nodes, weights) = (1..=nq)
            .map(|l| {
                let sigma = -kk + (l as f64 - 0.5) * h;
                let (z, dz) = gamma_point_and_derivative(sigma, &params);
                (z, prefactor * dz)
            })
            .unzip();
        ContourRule {
            nodes,
            weights,
            geometry: ContourGeometry::Elliptic(params),
        }
    }

    /// Trapezoidal rule on `|s - center| = radius` with `n` nodes at angles
    /// `2π(ℓ - 1/2)/n`.
    pub fn circle(center: Complex64, radius: f64, n: usize) -> Result<Self> {
        if n == 0 || !(radius > 0.0 && radius.is_finite()) {
            return Err(GcqError::Parameter(format!(
                "circle rule needs n > 0 and a positive radius (n = {n}, radius = {radius})"
            )));
        }
        let (nodes, weights) = (1..=n)
            .map(|l| {
                let theta = 2.0 * PI * (l as f64 - 0.5) / n as f64;
                let e = Complex64::from_polar(radius, theta);
                (center + e, e / n as f64)
            })
            .unzip();
        Ok(ContourRule {
            nodes,
            weights,
            geometry: ContourGeometry::Circle { center, radius },
        })
    }

    /// Elliptic rule for `mesh`, checking that every stepper pole is enclosed.
    pub fn for_mesh(
        mesh: &TimeMesh,
        stepper: StepperKind,
        node_count_override: Option<usize>,
    ) -> Result<Self> {
        let rule = build_contour(mesh.stats(), mesh.len(), stepper, node_count_override)?;
        for pole in stepper.real_poles(mesh) {
            if !rule.encloses(Complex64::new(pole, 0.0)) {
                return Err(GcqError::Contour(format!(
                    "stepper pole {pole} is not strictly inside the contour"
                )));
            }
        }
        Ok(rule)
    }

    pub fn nodes(&self) -> &[Complex64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    pub fn geometry(&self) -> &ContourGeometry {
        &self.geometry
    }

    /// Parameters of an elliptic rule.
    pub fn params(&self) -> Option<&ContourParams> {
        match &self.geometry {
            ContourGeometry::Elliptic(p) => Some(p),
            ContourGeometry::Circle { .. } => None,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// True when `z` lies strictly inside the contour.
    pub fn encloses(&self, z: Complex64) -> bool {
        match &self.geometry {
            ContourGeometry::Elliptic(p) => p.contains(z),
            ContourGeometry::Circle { center, radius } => (z - center).norm() < *radius,
        }
    }

    /// Rule restricted to the closed upper half-plane for integrands with
    /// `f(conj s) = conj f(s)`: the real part of a sum over the reduced rule
    /// equals the full sum. Off-axis weights are doubled.
    pub fn conjugate_half(&self) -> ContourRule {
        let n = self.len();
        let mut nodes = Vec::with_capacity(n / 2 + 1);
        let mut weights = Vec::with_capacity(n / 2 + 1);
        for (&z, &w) in self.nodes.iter().zip(&self.weights) {
            let tol = 1e-14 * z.norm();
            if z.im > tol {
                nodes.push(z);
                weights.push(2.0 * w);
            } else if z.im.abs() <= tol {
                nodes.push(Complex64::new(z.re, 0.0));
                weights.push(w);
            }
        }
        ContourRule {
            nodes,
            weights,
            geometry: self.geometry.clone(),
        }
    }
}

/// `Σ_ℓ w_ℓ / (s_ℓ - pole)`, which approximates 1 for an enclosed pole.
pub fn cauchy_validate(rule: &ContourRule, pole: Complex64) -> Result<Complex64> {
    if !rule.encloses(pole) {
        return Err(GcqError::Validation(format!(
            "pole {pole} is not strictly inside the contour"
        )));
    }
    let terms: Vec<Complex64> = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&z, &w)| w / (z - pole))
        .collect();
    Ok(crate::sum::pairwise_sum(&terms))
}
