//! Experiment driver: reference problems, single solves, convergence studies,
//! CSV output and the identity check suites.

pub mod checks;
mod config;
mod study;

pub use config::{ExperimentConfig, KernelSpec, MeshSpec, Mode};
pub use study::{
    emit_csv, emit_pointwise_csv, fit_slope, run_convergence_study, run_solve,
    write_convergence_csv, write_pointwise_csv, ConvergenceReport, ConvergenceRow, PointwiseRow,
    ReferenceProblem, SolveReport,
};

use crate::error::{GcqError, Result};

/// Values of the reference problem `K(s) = (1 - e^{-2s})/(2s)`,
/// `φ(t) = t^{5/2} e^{-t}`, whose solution is `g(t) = 2 Σ_{k=0}^{⌊t/2⌋} φ'(t - 2k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExampleValues {
    pub phi: f64,
    pub phi_prime: f64,
    pub g: f64,
}

fn phi_prime(t: f64) -> f64 {
    (-t).exp() * t.powf(1.5) * (2.5 - t)
}

pub fn exact_example(t: f64) -> Result<ExampleValues> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(GcqError::Domain(format!(
            "time t = {t} must be nonnegative"
        )));
    }
    let terms = (t / 2.0).floor() as usize;
    let g = 2.0
        * (0..=terms)
            .map(|k| phi_prime(t - 2.0 * k as f64))
            .sum::<f64>();
    Ok(ExampleValues {
        phi: t.powf(2.5) * (-t).exp(),
        phi_prime: phi_prime(t),
        g,
    })
}

/// `φ''(t) = e^{-t} (15/4 t^{1/2} - 5 t^{3/2} + t^{5/2})`.
pub(crate) fn example_phi_second(t: f64) -> f64 {
    (-t).exp() * (3.75 * t.sqrt() - 5.0 * t.powf(1.5) + t.powf(2.5))
}

/// `g'(t)` for the reference problem.
pub(crate) fn example_g_prime(t: f64) -> f64 {
    let terms = (t / 2.0).floor() as usize;
    2.0 * (0..=terms)
        .map(|k| example_phi_second(t - 2.0 * k as f64))
        .sum::<f64>()
}
