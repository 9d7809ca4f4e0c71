use std::collections::HashMap;

use log::warn;
use num_complex::Complex64;

use super::{advance_bdf1, advance_bdf2, advance_trapezoidal, Bdf2Coefficients, StepperKind};
use crate::contour::ContourRule;
use crate::error::{GcqError, Result};
use crate::mesh::TimeMesh;
use crate::sum::pairwise_sum;
use crate::symbol::TransferSymbol;

/// Pole used for the `g_{n-1}` correction of the backward trapezoidal solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BackwardIndex {
    /// `K(2/Δ_{n-1}) g_{n-1}`.
    #[default]
    Printed,
    /// `K(2/Δ_n) g_{n-1}`, the exact inverse of the forward recursion.
    Consistent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveOptions {
    /// Use only the upper half of the contour when symbol and data are real.
    pub use_symmetry: bool,
    pub backward_index: BackwardIndex,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            use_symmetry: true,
            backward_index: BackwardIndex::Printed,
        }
    }
}

/// History of one solve: `u_{n-1}(s_ℓ)` and, for BDF2, `u_{n-2}(s_ℓ)`.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub step: usize,
    pub history: Vec<Complex64>,
    pub history2: Vec<Complex64>,
}

impl SolverState {
    fn new(nodes: usize) -> Self {
        SolverState {
            step: 0,
            history: vec![Complex64::new(0.0, 0.0); nodes],
            history2: vec![Complex64::new(0.0, 0.0); nodes],
        }
    }
}

/// Symbol values at the contour nodes and cached values at real poles.
struct Evaluated<'a> {
    symbol: TransferSymbol,
    nodes: &'a [Complex64],
    weighted: Vec<Complex64>,
    real: bool,
    poles: HashMap<u64, Complex64>,
    buffer: Vec<Complex64>,
}

impl<'a> Evaluated<'a> {
    fn new(symbol: TransferSymbol, rule: &'a ContourRule, real: bool) -> Result<Self> {
        let weighted = rule
            .nodes()
            .iter()
            .zip(rule.weights())
            .map(|(&z, &w)| symbol.evaluate(z).map(|k| w * k))
            .collect::<Result<Vec<_>>>()?;
        Ok(Evaluated {
            symbol,
            nodes: rule.nodes(),
            buffer: Vec::with_capacity(weighted.len()),
            weighted,
            real,
            poles: HashMap::new(),
        })
    }

    /// `K` at a real pole, evaluated once per distinct value.
    fn at_pole(&mut self, pole: f64) -> Result<Complex64> {
        if let Some(&v) = self.poles.get(&pole.to_bits()) {
            return Ok(v);
        }
        let v = self.symbol.evaluate(Complex64::new(pole, 0.0))?;
        self.poles.insert(pole.to_bits(), v);
        Ok(v)
    }

    /// `-Σ_ℓ w_ℓ K(s_ℓ) h(s_ℓ)`: the contour part over the negatively oriented contour.
    fn contour_sum(&mut self, h: impl Fn(usize, Complex64) -> Complex64) -> Complex64 {
        self.buffer.clear();
        self.buffer.extend(
            self.weighted
                .iter()
                .zip(self.nodes)
                .enumerate()
                .map(|(l, (&wk, &z))| wk * h(l, z)),
        );
        let total = -pairwise_sum(&self.buffer);
        if self.real {
            Complex64::new(total.re, 0.0)
        } else {
            total
        }
    }
}

fn check_inputs(samples: &[Complex64], mesh: &TimeMesh, contour: &ContourRule) -> Result<()> {
    if samples.len() != mesh.len() + 1 {
        return Err(GcqError::Parameter(format!(
            "expected {} samples (t_0..t_N), got {}",
            mesh.len() + 1,
            samples.len()
        )));
    }
    if contour.is_empty() {
        return Err(GcqError::Parameter("empty contour rule".into()));
    }
    if samples
        .iter()
        .any(|v| !(v.re.is_finite() && v.im.is_finite()))
    {
        return Err(GcqError::Parameter("non-finite input sample".into()));
    }
    Ok(())
}

fn prepare<'a>(
    symbol: &TransferSymbol,
    samples: &[Complex64],
    contour: &'a ContourRule,
    options: SolveOptions,
    reduced: &'a mut Option<ContourRule>,
) -> Result<(&'a ContourRule, bool)> {
    let real =
        options.use_symmetry && symbol.is_real_coefficient() && samples.iter().all(|v| v.im == 0.0);
    if real {
        *reduced = Some(contour.conjugate_half());
        Ok((reduced.as_ref().expect("just set"), true))
    } else {
        Ok((contour, false))
    }
}

/// Forward gCQ: approximates `φ = K(∂_t) g` at every mesh point.
///
/// `g` holds samples of `g^{(ρ)}` at `t_0..t_N`; the symbol is applied as
/// `K_ρ(s) = s^{-ρ} K(s)`. The result has the same length as `g`, with
/// `φ_0 = 0`. The first step uses `K_ρ(2/Δ_1)(g_0 + g_1)`, which is the
/// recursion itself at `n = 1`; for causal data `g_0 = 0` and this is
/// `K_ρ(2/Δ_1) g_1`.
pub fn forward_solve(
    symbol: &TransferSymbol,
    rho: i32,
    g: &[Complex64],
    mesh: &TimeMesh,
    stepper: StepperKind,
    contour: &ContourRule,
    options: SolveOptions,
) -> Result<Vec<Complex64>> {
    check_inputs(g, mesh, contour)?;
    if g[0] != Complex64::new(0.0, 0.0) {
        warn!("g(t_0) = {} is not zero; data is not causal", g[0]);
    }
    let mut reduced = None;
    let (rule, real) = prepare(symbol, g, contour, options, &mut reduced)?;
    let mut ev = Evaluated::new(symbol.regularized(rho), rule, real)?;
    let s = rule.nodes();
    let mut state = SolverState::new(s.len());
    let mut phi = vec![Complex64::new(0.0, 0.0); g.len()];

    for n in 1..=mesh.len() {
        let delta = mesh.step(n);
        let u = &state.history;
        let u2 = &state.history2;
        phi[n] = match stepper {
            StepperKind::Trapezoidal => {
                let c = ev.contour_sum(|l, z| u[l] * (2.0 + delta * z) / (2.0 - delta * z));
                c + ev.at_pole(2.0 / delta)? * (g[n - 1] + g[n])
            }
            StepperKind::Bdf2 => {
                let k = Bdf2Coefficients::for_step(mesh, n);
                let c = ev.contour_sum(|l, z| (u[l] * k.b - u2[l] * k.c) / (1.0 - k.a * z));
                c + ev.at_pole(1.0 / k.a)? * g[n]
            }
            StepperKind::Bdf1 => {
                let c = ev.contour_sum(|l, z| u[l] / (1.0 - delta * z));
                c + ev.at_pole(1.0 / delta)? * g[n]
            }
        };
        advance(&mut state, s, mesh, stepper, n, g)?;
    }
    if real {
        phi.iter_mut().for_each(|v| v.im = 0.0);
    }
    Ok(phi)
}

/// Backward gCQ: solves `K(∂_t) g = φ` for `g` at every mesh point.
///
/// `phi` holds samples of `φ^{(ρ)}` at `t_0..t_N` and the symbol is applied
/// as `K_{-ρ}(s) = s^{ρ} K(s)`. The result has `g_0 = 0`.
pub fn backward_solve(
    symbol: &TransferSymbol,
    rho: i32,
    phi: &[Complex64],
    mesh: &TimeMesh,
    stepper: StepperKind,
    contour: &ContourRule,
    options: SolveOptions,
) -> Result<Vec<Complex64>> {
    check_inputs(phi, mesh, contour)?;
    let mut reduced = None;
    let (rule, real) = prepare(symbol, phi, contour, options, &mut reduced)?;
    let mut ev = Evaluated::new(symbol.regularized(-rho), rule, real)?;
    let s = rule.nodes();
    let mut state = SolverState::new(s.len());
    let mut g = vec![Complex64::new(0.0, 0.0); phi.len()];

    for n in 1..=mesh.len() {
        let delta = mesh.step(n);
        let u = &state.history;
        let u2 = &state.history2;
        let (rhs, pole) = match stepper {
            StepperKind::Trapezoidal => {
                let c = ev.contour_sum(|l, z| u[l] * (2.0 + delta * z) / (2.0 - delta * z));
                let correction = if n == 1 {
                    Complex64::new(0.0, 0.0)
                } else {
                    let p = match options.backward_index {
                        BackwardIndex::Printed => 2.0 / mesh.step(n - 1),
                        BackwardIndex::Consistent => 2.0 / delta,
                    };
                    ev.at_pole(p)? * g[n - 1]
                };
                (phi[n] - c - correction, 2.0 / delta)
            }
            StepperKind::Bdf2 => {
                let k = Bdf2Coefficients::for_step(mesh, n);
                let c = ev.contour_sum(|l, z| (u[l] * k.b - u2[l] * k.c) / (1.0 - k.a * z));
                (phi[n] - c, 1.0 / k.a)
            }
            StepperKind::Bdf1 => {
                let c = ev.contour_sum(|l, z| u[l] / (1.0 - delta * z));
                (phi[n] - c, 1.0 / delta)
            }
        };
        g[n] = linear_solve(ev.at_pole(pole)?, rhs, n, pole)?;
        advance(&mut state, s, mesh, stepper, n, &g)?;
    }
    if real {
        g.iter_mut().for_each(|v| v.im = 0.0);
    }
    Ok(g)
}

/// The solve `K(pole) g_n = r_n`; scalar here.
fn linear_solve(k: Complex64, rhs: Complex64, step: usize, pole: f64) -> Result<Complex64> {
    let x = rhs / k;
    if k == Complex64::new(0.0, 0.0) || !(x.re.is_finite() && x.im.is_finite()) {
        return Err(GcqError::SingularSolve { step, pole });
    }
    Ok(x)
}

/// Moves the history from `u_{n-1}` to `u_n` using `g_{n-1}`, `g_n`.
fn advance(
    state: &mut SolverState,
    s: &[Complex64],
    mesh: &TimeMesh,
    stepper: StepperKind,
    n: usize,
    g: &[Complex64],
) -> Result<()> {
    let delta = mesh.step(n);
    match stepper {
        StepperKind::Trapezoidal => {
            advance_trapezoidal(&mut state.history, s, delta, g[n - 1], g[n], n)?
        }
        StepperKind::Bdf2 => advance_bdf2(
            &mut state.history,
            &mut state.history2,
            s,
            Bdf2Coefficients::for_step(mesh, n),
            g[n],
            n,
        )?,
        StepperKind::Bdf1 => advance_bdf1(&mut state.history, s, delta, g[n], n)?,
    }
    state.step = n;
    Ok(())
}
