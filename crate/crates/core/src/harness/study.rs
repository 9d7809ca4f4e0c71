use std::fs::File;
use std::io::{self, Write};
use std::path::Path;
use std::time::Instant;

use log::warn;
use num_complex::Complex64;
use rayon::prelude::*;

use super::config::{ExperimentConfig, Mode};
use super::{exact_example, example_g_prime};
use crate::contour::ContourRule;
use crate::error::{GcqError, Result};
use crate::gcq::{backward_solve, forward_solve};
use crate::mesh::TimeMesh;
use crate::symbol::TransferSymbol;

/// Problems with known solutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceProblem {
    /// `K(s) = (1 - e^{-2s})/(2s)`, `φ(t) = t^{5/2} e^{-t}`.
    Example,
    /// `K(s) = 1/s`: forward with `g ≡ 1` (so `φ = t`), backward with
    /// `φ = t²/2` (so `g = t`).
    Integrator,
}

impl ReferenceProblem {
    /// Recognizes the reference kernels by value, so `1/s`, `s^-1` and
    /// `power:-1` all match.
    pub fn for_symbol(symbol: &TransferSymbol) -> Option<Self> {
        let probes = [
            Complex64::new(0.7, 0.3),
            Complex64::new(3.1, -2.0),
            Complex64::new(40.0, 9.0),
        ];
        let matches = |f: &dyn Fn(Complex64) -> Complex64| {
            probes.iter().all(|&s| match symbol.evaluate(s) {
                Ok(v) => (v - f(s)).norm() <= 1e-13 * f(s).norm(),
                Err(_) => false,
            })
        };
        let example = TransferSymbol::example();
        if matches(&|s| example.evaluate(s).expect("right half-plane")) {
            Some(ReferenceProblem::Example)
        } else if matches(&|s| 1.0 / s) {
            Some(ReferenceProblem::Integrator)
        } else {
            None
        }
    }

    /// Input samples: `g^{(ρ)}` (forward) or `φ^{(ρ)}` (backward).
    pub fn input(self, mode: Mode, rho: i32, t: f64) -> Result<f64> {
        let unsupported =
            || GcqError::Parameter(format!("reference data for rho = {rho} is not available"));
        match (self, mode, rho) {
            (ReferenceProblem::Example, Mode::Forward, 0) => Ok(exact_example(t)?.g),
            (ReferenceProblem::Example, Mode::Forward, 1) => Ok(example_g_prime(t)),
            (ReferenceProblem::Example, Mode::Backward, 0) => Ok(exact_example(t)?.phi),
            (ReferenceProblem::Example, Mode::Backward, 1) => Ok(exact_example(t)?.phi_prime),
            (ReferenceProblem::Integrator, Mode::Forward, 0) => Ok(1.0),
            (ReferenceProblem::Integrator, Mode::Backward, 0) => Ok(0.5 * t * t),
            _ => Err(unsupported()),
        }
    }

    /// Exact output: `φ` (forward) or `g` (backward).
    pub fn exact(self, mode: Mode, t: f64) -> Result<f64> {
        match (self, mode) {
            (ReferenceProblem::Example, Mode::Forward) => Ok(exact_example(t)?.phi),
            (ReferenceProblem::Example, Mode::Backward) => Ok(exact_example(t)?.g),
            (ReferenceProblem::Integrator, Mode::Forward) => Ok(t),
            (ReferenceProblem::Integrator, Mode::Backward) => Ok(t),
        }
    }
}

/// Output of one solve.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub mesh: TimeMesh,
    pub node_count: usize,
    /// Approximation at `t_0..t_N`.
    pub values: Vec<Complex64>,
    /// Exact values at `t_0..t_N` when the kernel is a reference problem.
    pub exact: Option<Vec<f64>>,
}

impl SolveReport {
    /// Maximum absolute error over `t_1..t_N`.
    pub fn max_error(&self) -> Option<f64> {
        self.exact.as_ref().map(|e| {
            self.values[1..]
                .iter()
                .zip(&e[1..])
                .map(|(v, x)| (v - x).norm())
                .fold(0.0, f64::max)
        })
    }

    /// Absolute error at `t_N`.
    pub fn final_error(&self) -> Option<f64> {
        self.exact
            .as_ref()
            .map(|e| (self.values[self.values.len() - 1] - e[e.len() - 1]).norm())
    }

    pub fn pointwise(&self) -> Vec<PointwiseRow> {
        self.mesh
            .points()
            .iter()
            .enumerate()
            .map(|(i, &t)| PointwiseRow {
                t,
                value: self.values[i],
                exact: self.exact.as_ref().map(|e| e[i]),
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointwiseRow {
    pub t: f64,
    pub value: Complex64,
    pub exact: Option<f64>,
}

/// Solves the configured problem on the mesh with `n` steps (or the `N` of
/// the mesh string). Kernels without a reference solution are driven with the
/// data of the built-in example and report no errors.
pub fn run_solve(config: &ExperimentConfig, n: Option<usize>) -> Result<SolveReport> {
    let symbol = config.kernel.resolve()?;
    let mesh = config.mesh.build(n, config.horizon)?;
    let contour = ContourRule::for_mesh(&mesh, config.stepper, config.nq)?;
    let problem = ReferenceProblem::for_symbol(&symbol);
    let data_source = problem.unwrap_or(ReferenceProblem::Example);
    let data = mesh
        .points()
        .iter()
        .map(|&t| {
            data_source
                .input(config.mode, config.rho, t)
                .map(|v| Complex64::new(v, 0.0))
        })
        .collect::<Result<Vec<_>>>()?;
    let solve = match config.mode {
        Mode::Forward => forward_solve,
        Mode::Backward => backward_solve,
    };
    let values = solve(
        &symbol,
        config.rho,
        &data,
        &mesh,
        config.stepper,
        &contour,
        config.options,
    )?;
    let exact = match problem {
        Some(p) => Some(
            mesh.points()
                .iter()
                .map(|&t| p.exact(config.mode, t))
                .collect::<Result<Vec<_>>>()?,
        ),
        None => None,
    };
    Ok(SolveReport {
        node_count: contour.len(),
        mesh,
        values,
        exact,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub delta_max: f64,
    pub max_error: Option<f64>,
    pub final_error: Option<f64>,
    /// `log(e_{i-1}/e_i) / log(N_i/N_{i-1})`; absent on the first row.
    pub eoc: Option<f64>,
    pub seconds: Option<f64>,
    /// Failure message of a row whose solve did not complete.
    pub diagnostic: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    pub label: String,
}

impl ConvergenceReport {
    /// Least-squares slope of `-log(max_error)` against `log N` and the RMS
    /// residual of the fit, over rows that completed.
    pub fn fitted_slope(&self) -> Option<(f64, f64)> {
        let (ns, errs): (Vec<f64>, Vec<f64>) = self
            .rows
            .iter()
            .filter_map(|r| r.max_error.map(|e| (r.n as f64, e)))
            .unzip();
        fit_slope(&ns, &errs)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ConvergenceRow> {
        self.rows.iter().filter(|r| r.diagnostic.is_some())
    }

    /// Fills the EOC column from the error column.
    pub fn compute_eoc(&mut self) {
        for i in 0..self.rows.len() {
            self.rows[i].eoc = if i == 0 {
                None
            } else {
                let (a, b) = (&self.rows[i - 1], &self.rows[i]);
                match (a.max_error, b.max_error) {
                    (Some(ea), Some(eb)) if ea > 0.0 && eb > 0.0 => {
                        Some((ea / eb).ln() / (b.n as f64 / a.n as f64).ln())
                    }
                    _ => None,
                }
            };
        }
    }
}

/// Fits `log e = c - p log N`; returns `(p, rms residual)`. Needs two points
/// with positive errors.
pub fn fit_slope(ns: &[f64], errs: &[f64]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = ns
        .iter()
        .zip(errs)
        .filter(|(_, &e)| e > 0.0 && e.is_finite())
        .map(|(&n, &e)| (n.ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let rms = (pts.iter().map(|p| (p.1 - a - b * p.0).powi(2)).sum::<f64>() / m).sqrt();
    Some((-b, rms))
}

/// Runs every `N` of the study. Rows run in parallel and are reported in
/// order; a failing row carries a diagnostic and the others still run.
pub fn run_convergence_study(config: &ExperimentConfig) -> Result<ConvergenceReport> {
    config.validate()?;
    if config.n_list.is_empty() {
        return Err(GcqError::Parameter("a study needs at least one N".into()));
    }
    let symbol = config.kernel.resolve()?;
    if ReferenceProblem::for_symbol(&symbol).is_none() {
        return Err(GcqError::Parameter(format!(
            "no exact solution is known for kernel `{}`",
            config.kernel.text
        )));
    }
    let rows: Vec<ConvergenceRow> = config
        .n_list
        .par_iter()
        .map(|&n| {
            let start = Instant::now();
            let delta_max = config
                .mesh
                .build(Some(n), config.horizon)
                .map(|m| m.stats().delta_max)
                .unwrap_or(f64::NAN);
            let result = run_solve(config, Some(n));
            let seconds = config.timing.then(|| start.elapsed().as_secs_f64());
            match result {
                Ok(r) => ConvergenceRow {
                    n,
                    delta_max,
                    max_error: r.max_error(),
                    final_error: r.final_error(),
                    eoc: None,
                    seconds,
                    diagnostic: None,
                },
                Err(e) => {
                    warn!("N = {n}: {e}");
                    ConvergenceRow {
                        n,
                        delta_max,
                        max_error: None,
                        final_error: None,
                        eoc: None,
                        seconds,
                        diagnostic: Some(e.to_string()),
                    }
                }
            }
        })
        .collect();
    let mut report = ConvergenceReport {
        rows,
        label: format!(
            "{} {} {} {}",
            config.mode, config.kernel.text, config.stepper, config.mesh
        ),
    };
    report.compute_eoc();
    Ok(report)
}

fn field(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_convergence_csv<W: Write>(report: &ConvergenceReport, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "N",
        "delta_max",
        "max_error",
        "final_error",
        "eoc",
        "seconds",
    ])?;
    for r in &report.rows {
        w.write_record([
            r.n.to_string(),
            r.delta_max.to_string(),
            field(r.max_error),
            field(r.final_error),
            field(r.eoc),
            field(r.seconds),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_pointwise_csv<W: Write>(rows: &[PointwiseRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["t", "value_re", "value_im", "exact", "abs_error"])?;
    for r in rows {
        w.write_record([
            r.t.to_string(),
            r.value.re.to_string(),
            r.value.im.to_string(),
            field(r.exact),
            field(r.exact.map(|e| (r.value - e).norm())),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn create(path: &Path) -> Result<io::BufWriter<File>> {
    Ok(io::BufWriter::new(File::create(path)?))
}

/// Writes the convergence table to `path`.
pub fn emit_csv(report: &ConvergenceReport, path: &Path) -> Result<()> {
    write_convergence_csv(report, create(path)?)
}

pub fn emit_pointwise_csv(rows: &[PointwiseRow], path: &Path) -> Result<()> {
    write_pointwise_csv(rows, create(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{KernelSpec, MeshSpec};

    fn row(n: usize, e: f64) -> ConvergenceRow {
        ConvergenceRow {
            n,
            delta_max: 1.0 / n as f64,
            max_error: Some(e),
            final_error: Some(e / 2.0),
            eoc: None,
            seconds: None,
            diagnostic: None,
        }
    }

    #[test]
    fn reference_problem_detection() {
        let find = |s: &str| {
            ReferenceProblem::for_symbol(&TransferSymbol::resolve(s, None, None).unwrap())
        };
        assert_eq!(find("example1"), Some(ReferenceProblem::Example));
        assert_eq!(find("(1-exp(-2*s))/(2*s)"), Some(ReferenceProblem::Example));
        assert_eq!(find("1/s"), Some(ReferenceProblem::Integrator));
        assert_eq!(find("s^-1"), Some(ReferenceProblem::Integrator));
        assert_eq!(find("power:-1"), Some(ReferenceProblem::Integrator));
        assert_eq!(find("1/(s+1)"), None);
    }

    #[test]
    fn eoc_and_slope() {
        let mut r = ConvergenceReport {
            rows: vec![row(16, 1e-2), row(32, 2.5e-3), row(64, 6.25e-4)],
            label: String::new(),
        };
        r.compute_eoc();
        assert_eq!(r.rows[0].eoc, None);
        assert!((r.rows[1].eoc.unwrap() - 2.0).abs() < 1e-12);
        let (p, res) = r.fitted_slope().unwrap();
        assert!((p - 2.0).abs() < 1e-12 && res < 1e-12);
        // scale invariance
        let mut scaled = r.clone();
        scaled
            .rows
            .iter_mut()
            .for_each(|x| x.max_error = x.max_error.map(|e| e * 7.0));
        scaled.compute_eoc();
        for (a, b) in r.rows.iter().zip(&scaled.rows) {
            match (a.eoc, b.eoc) {
                (Some(x), Some(y)) => assert!((x - y).abs() < 1e-12),
                (None, None) => {}
                _ => panic!(),
            }
        }
        assert_eq!(fit_slope(&[8.0], &[1.0]), None);
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_convergence_csv(&ConvergenceReport::default(), &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "N,delta_max,max_error,final_error,eoc,seconds\n"
        );

        let mut r = ConvergenceReport {
            rows: (0..5)
                .map(|i| row(16 << i, 1.0 / (1 << (2 * i)) as f64))
                .collect(),
            label: String::new(),
        };
        r.compute_eoc();
        let mut buf = Vec::new();
        write_convergence_csv(&r, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 6);
        assert_eq!(lines[1], "16,0.0625,1,0.5,,");
        assert!(lines[2].starts_with("32,0.03125,0.25,0.125,2,"));
    }

    #[test]
    fn pointwise_csv_layout() {
        let rows = [
            PointwiseRow {
                t: 0.0,
                value: Complex64::new(0.0, 0.0),
                exact: Some(0.0),
            },
            PointwiseRow {
                t: 0.5,
                value: Complex64::new(1.25, 0.0),
                exact: Some(1.0),
            },
            PointwiseRow {
                t: 1.0,
                value: Complex64::new(2.0, 0.5),
                exact: None,
            },
        ];
        let mut buf = Vec::new();
        write_pointwise_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "t,value_re,value_im,exact,abs_error\n0,0,0,0,0\n0.5,1.25,0,1,0.25\n1,2,0.5,,\n"
        );
    }

    #[test]
    fn small_study_runs_and_is_deterministic() {
        let mut c = ExperimentConfig::new(KernelSpec::new("example1"), "graded:2".parse().unwrap());
        c.n_list = vec![8, 16, 32];
        let a = run_convergence_study(&c).unwrap();
        let b = run_convergence_study(&c).unwrap();
        assert_eq!(a, b);
        assert!(a.rows.iter().all(|r| r.diagnostic.is_none()));
        assert!(a.rows[2].max_error.unwrap() < a.rows[0].max_error.unwrap());
        let (mut x, mut y) = (Vec::new(), Vec::new());
        write_convergence_csv(&a, &mut x).unwrap();
        write_convergence_csv(&b, &mut y).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn failing_row_does_not_stop_the_study() {
        // N_Q = 1 still runs; a singular kernel value fails every row but the report survives.
        let mut c =
            ExperimentConfig::new(KernelSpec::new("example1"), MeshSpec::Uniform { n: None });
        c.n_list = vec![1, 4];
        c.horizon = 4.0; // N = 1: Δ = 4 gives q < 1, so the contour cannot be built
        let r = run_convergence_study(&c).unwrap();
        assert!(r.rows[0].diagnostic.is_some());
        assert!(r.rows[1].diagnostic.is_none());
        assert_eq!(r.failures().count(), 1);
    }

    #[test]
    fn study_needs_reference_kernel() {
        let mut c = ExperimentConfig::new(KernelSpec::new("1/(s+1)"), "uniform".parse().unwrap());
        c.n_list = vec![4];
        assert!(run_convergence_study(&c).is_err());
        // a plain solve still works and reports no exact values
        let r = run_solve(&c, Some(4)).unwrap();
        assert!(r.exact.is_none() && r.max_error().is_none());
    }
}
