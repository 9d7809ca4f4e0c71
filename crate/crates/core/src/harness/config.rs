use std::fmt;
use std::str::FromStr;

use crate::error::{GcqError, Result};
use crate::gcq::{SolveOptions, StepperKind};
use crate::mesh::{graded_mesh, TimeMesh};
use crate::symbol::TransferSymbol;

/// `uniform[:N]` or `graded:alpha[:N]`. A missing `N` must come from the study list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeshSpec {
    Uniform { n: Option<usize> },
    Graded { alpha: f64, n: Option<usize> },
}

impl MeshSpec {
    pub fn steps(&self) -> Option<usize> {
        match *self {
            MeshSpec::Uniform { n } | MeshSpec::Graded { n, .. } => n,
        }
    }

    pub fn alpha(&self) -> f64 {
        match *self {
            MeshSpec::Uniform { .. } => 1.0,
            MeshSpec::Graded { alpha, .. } => alpha,
        }
    }

    /// Mesh on `[0, horizon]` with `n` steps, or the string's own `N` when `n` is `None`.
    pub fn build(&self, n: Option<usize>, horizon: f64) -> Result<TimeMesh> {
        let n = n
            .or(self.steps())
            .ok_or_else(|| GcqError::Parameter("mesh spec has no step count N".into()))?;
        match *self {
            MeshSpec::Uniform { .. } => TimeMesh::uniform(n, horizon),
            MeshSpec::Graded { alpha, .. } => graded_mesh(n, alpha, horizon),
        }
    }
}

impl FromStr for MeshSpec {
    type Err = GcqError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            GcqError::Parameter(format!(
                "bad mesh spec `{s}` (expected uniform[:N] or graded:alpha[:N])"
            ))
        };
        let parse_n = |x: &str| x.trim().parse::<usize>().map_err(|_| bad());
        let parts: Vec<&str> = s.trim().split(':').collect();
        match parts.as_slice() {
            ["uniform"] => Ok(MeshSpec::Uniform { n: None }),
            ["uniform", n] => Ok(MeshSpec::Uniform {
                n: Some(parse_n(n)?),
            }),
            ["graded", a] | ["graded", a, _] => {
                let alpha = a.trim().parse::<f64>().map_err(|_| bad())?;
                let n = match parts.get(2) {
                    Some(n) => Some(parse_n(n)?),
                    None => None,
                };
                Ok(MeshSpec::Graded { alpha, n })
            }
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for MeshSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            MeshSpec::Uniform { n: None } => write!(f, "uniform"),
            MeshSpec::Uniform { n: Some(n) } => write!(f, "uniform:{n}"),
            MeshSpec::Graded { alpha, n: None } => write!(f, "graded:{alpha}"),
            MeshSpec::Graded { alpha, n: Some(n) } => write!(f, "graded:{alpha}:{n}"),
        }
    }
}

/// Registry name or expression text, plus optional growth metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    pub text: String,
    pub mu: Option<f64>,
    pub sigma0: Option<f64>,
}

impl KernelSpec {
    pub fn new(text: impl Into<String>) -> Self {
        KernelSpec {
            text: text.into(),
            mu: None,
            sigma0: None,
        }
    }

    pub fn resolve(&self) -> Result<TransferSymbol> {
        TransferSymbol::resolve(&self.text, self.mu, self.sigma0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Forward,
    Backward,
}

impl FromStr for Mode {
    type Err = GcqError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "forward" => Ok(Mode::Forward),
            "backward" => Ok(Mode::Backward),
            other => Err(GcqError::Parameter(format!(
                "unknown mode `{other}` (expected forward or backward)"
            ))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Forward => "forward",
            Mode::Backward => "backward",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kernel: KernelSpec,
    pub mode: Mode,
    pub stepper: StepperKind,
    pub mesh: MeshSpec,
    pub horizon: f64,
    pub rho: i32,
    /// Step counts of a study, strictly increasing.
    pub n_list: Vec<usize>,
    pub nq: Option<usize>,
    pub options: SolveOptions,
    /// Fill the `seconds` column; off by default so output is reproducible byte for byte.
    pub timing: bool,
}

impl ExperimentConfig {
    /// Backward trapezoidal solve of the reference problem on `[0, 1]`.
    pub fn new(kernel: KernelSpec, mesh: MeshSpec) -> Self {
        ExperimentConfig {
            kernel,
            mode: Mode::Backward,
            stepper: StepperKind::Trapezoidal,
            mesh,
            horizon: 1.0,
            rho: 0,
            n_list: Vec::new(),
            nq: None,
            options: SolveOptions::default(),
            timing: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(GcqError::Parameter(format!(
                "horizon T = {} must be positive",
                self.horizon
            )));
        }
        if self.rho < 0 {
            return Err(GcqError::Parameter(format!(
                "rho = {} must be nonnegative",
                self.rho
            )));
        }
        if self.n_list.windows(2).any(|w| w[1] <= w[0]) || self.n_list.contains(&0) {
            return Err(GcqError::Parameter(format!(
                "N list {:?} must be positive and strictly increasing",
                self.n_list
            )));
        }
        if self.nq == Some(0) {
            return Err(GcqError::Parameter("--nq must be positive".into()));
        }
        if let MeshSpec::Graded { alpha, .. } = self.mesh {
            if !(alpha >= 1.0) {
                return Err(GcqError::Parameter(format!(
                    "grading exponent {alpha} must be >= 1"
                )));
            }
        }
        self.kernel.resolve().map(|_| ())
    }
}
