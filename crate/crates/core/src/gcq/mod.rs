//! One-step recursions and the gCQ solve drivers.
//!
//! Each stepper is applied to `u' = s u + g` at every contour node. The
//! discrete convolution is then `φ_n = (1/2πi) ∮ K(s) u_n(s) ds` over a
//! negatively oriented contour enclosing the stepper poles. Contour rules in
//! this crate carry positively oriented weights, so the drivers subtract the
//! quadrature sum and add the residue at the newest pole in closed form.

mod solve;
mod uniform;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{GcqError, Result};
use crate::mesh::TimeMesh;

pub use solve::{backward_solve, forward_solve, BackwardIndex, SolveOptions, SolverState};
pub use uniform::{default_uniform_parameters, uniform_cq_weights, UniformCqParameters};

/// Relative size of `|1 - A s|` below which a node counts as sitting on a pole.
const NEAR_POLE: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StepperKind {
    Trapezoidal,
    Bdf2,
    /// Backward Euler; baseline only.
    Bdf1,
}

impl StepperKind {
    /// Contour scaling constant `R`.
    pub fn method_constant(self) -> f64 {
        match self {
            StepperKind::Bdf1 => 1.0,
            StepperKind::Bdf2 => 1.5,
            StepperKind::Trapezoidal => 2.0,
        }
    }

    /// Real pole of step `n` (`1 ≤ n ≤ N`): `2/Δ_n`, `1/A_n` or `1/Δ_n`.
    pub fn pole(self, mesh: &TimeMesh, n: usize) -> f64 {
        match self {
            StepperKind::Trapezoidal => 2.0 / mesh.step(n),
            StepperKind::Bdf2 => 1.0 / Bdf2Coefficients::for_step(mesh, n).a,
            StepperKind::Bdf1 => 1.0 / mesh.step(n),
        }
    }

    pub fn real_poles(self, mesh: &TimeMesh) -> Vec<f64> {
        (1..=mesh.len()).map(|n| self.pole(mesh, n)).collect()
    }

    pub fn name(self) -> &'static str {
        match self {
            StepperKind::Trapezoidal => "trap",
            StepperKind::Bdf2 => "bdf2",
            StepperKind::Bdf1 => "bdf1",
        }
    }
}

impl fmt::Display for StepperKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StepperKind {
    type Err = GcqError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "trap" | "trapezoidal" => Ok(StepperKind::Trapezoidal),
            "bdf2" => Ok(StepperKind::Bdf2),
            "bdf1" | "euler" => Ok(StepperKind::Bdf1),
            other => Err(GcqError::Parameter(format!(
                "unknown stepper `{other}` (expected trap, bdf2 or bdf1)"
            ))),
        }
    }
}

/// Variable-step BDF2 coefficients of step `n`:
/// `u_n = (B u_{n-1} - C u_{n-2} + A g_n) / (1 - A s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bdf2Coefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Bdf2Coefficients {
    /// From the previous step `Δ_{n-1}` and the current step `Δ_n`.
    pub fn new(delta_prev: f64, delta: f64) -> Self {
        let sum = delta_prev + delta;
        let den = delta_prev * (delta_prev + 2.0 * delta);
        Bdf2Coefficients {
            a: delta * sum / (delta_prev + 2.0 * delta),
            b: sum * sum / den,
            c: delta * delta / den,
        }
    }

    /// Coefficients of step `n ≥ 1`, with `Δ_0 = Δ_1`.
    pub fn for_step(mesh: &TimeMesh, n: usize) -> Self {
        let prev = if n == 1 {
            mesh.step(1)
        } else {
            mesh.step(n - 1)
        };
        Self::new(prev, mesh.step(n))
    }
}

fn near_pole(den: Complex64, scale: Complex64) -> bool {
    den.norm() < NEAR_POLE * scale.norm().max(1.0)
}

/// In-place trapezoidal step; `step` only labels errors.
pub(crate) fn advance_trapezoidal(
    u: &mut [Complex64],
    s: &[Complex64],
    delta: f64,
    g_prev: Complex64,
    g_curr: Complex64,
    step: usize,
) -> Result<()> {
    let g = g_prev + g_curr;
    for (node, (ui, &si)) in u.iter_mut().zip(s).enumerate() {
        let num = 2.0 + delta * si;
        let den = 2.0 - delta * si;
        if near_pole(den, num) {
            return Err(GcqError::NearPole { step, node });
        }
        *ui = (*ui * num + g * delta) / den;
    }
    Ok(())
}

pub(crate) fn advance_bdf2(
    u: &mut [Complex64],
    u_prev2: &mut [Complex64],
    s: &[Complex64],
    coeffs: Bdf2Coefficients,
    g_curr: Complex64,
    step: usize,
) -> Result<()> {
    let Bdf2Coefficients { a, b, c } = coeffs;
    for (node, ((ui, u2), &si)) in u.iter_mut().zip(u_prev2.iter_mut()).zip(s).enumerate() {
        let den = 1.0 - a * si;
        if near_pole(den, Complex64::new(1.0, 0.0)) {
            return Err(GcqError::NearPole { step, node });
        }
        let next = (*ui * b - *u2 * c + g_curr * a) / den;
        *u2 = *ui;
        *ui = next;
    }
    Ok(())
}

pub(crate) fn advance_bdf1(
    u: &mut [Complex64],
    s: &[Complex64],
    delta: f64,
    g_curr: Complex64,
    step: usize,
) -> Result<()> {
    for (node, (ui, &si)) in u.iter_mut().zip(s).enumerate() {
        let den = 1.0 - delta * si;
        if near_pole(den, Complex64::new(1.0, 0.0)) {
            return Err(GcqError::NearPole { step, node });
        }
        *ui = (*ui + g_curr * delta) / den;
    }
    Ok(())
}

/// `u_n(s) = u_{n-1}(s)(2 + Δ_n s)/(2 - Δ_n s) + (g_{n-1} + g_n) Δ_n/(2 - Δ_n s)`.
pub fn step_trapezoidal(
    u_prev: &[Complex64],
    s: &[Complex64],
    delta_n: f64,
    g_prev: Complex64,
    g_curr: Complex64,
) -> Result<Vec<Complex64>> {
    check_lengths(u_prev.len(), s.len())?;
    let mut u = u_prev.to_vec();
    advance_trapezoidal(&mut u, s, delta_n, g_prev, g_curr, 0)?;
    Ok(u)
}

/// `u_n(s) = (u_{n-1} B_n - u_{n-2} C_n + g_n A_n) / (1 - A_n s)`.
pub fn step_bdf2(
    u_prev: &[Complex64],
    u_prev2: &[Complex64],
    s: &[Complex64],
    coeffs: Bdf2Coefficients,
    g_curr: Complex64,
) -> Result<Vec<Complex64>> {
    check_lengths(u_prev.len(), s.len())?;
    check_lengths(u_prev2.len(), s.len())?;
    let mut u = u_prev.to_vec();
    let mut u2 = u_prev2.to_vec();
    advance_bdf2(&mut u, &mut u2, s, coeffs, g_curr, 0)?;
    Ok(u)
}

/// `u_n(s) = (u_{n-1} + Δ_n g_n) / (1 - Δ_n s)`.
pub fn step_bdf1(
    u_prev: &[Complex64],
    s: &[Complex64],
    delta_n: f64,
    g_curr: Complex64,
) -> Result<Vec<Complex64>> {
    check_lengths(u_prev.len(), s.len())?;
    let mut u = u_prev.to_vec();
    advance_bdf1(&mut u, s, delta_n, g_curr, 0)?;
    Ok(u)
}

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(GcqError::Parameter(format!(
            "history length {a} does not match node count {b}"
        )));
    }
    Ok(())
}
