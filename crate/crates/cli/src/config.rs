//! Run configuration: one JSON document per invocation, command-line flags
//! win over file values. Unknown keys are rejected everywhere.

use serde::{Deserialize, Serialize};

use homog2d::micro::MicrostructureSpec;
use homog2d::tensor::IsotropicModuli;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub microstructure: Option<MicrostructureSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phases: Option<PhasePair>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eig: Option<EigConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bloch: Option<BlochConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub laminate: Option<LaminateConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ellipticity: Option<EllipticityConfig>,
    /// Output paths; stripped from the resolved config embedded in reports
    /// so that re-running an embedded config reproduces the bytes.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhasePair {
    pub phase1: IsotropicModuli,
    pub phase2: IsotropicModuli,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<IsotropicModuli>,
}

fn default_tol() -> f64 {
    1e-9
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: default_tol(),
            max_iter: None,
            reference: None,
        }
    }
}

impl SolverConfig {
    pub fn to_opts(self) -> homog2d::solver::SolveOpts {
        homog2d::solver::SolveOpts {
            tol: self.tol,
            max_iter: self.max_iter,
            reference: self.reference,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigConfig {
    #[serde(default = "default_eig_tol")]
    pub eig_tol: f64,
    #[serde(default = "default_max_outer")]
    pub max_outer: usize,
    #[serde(default = "default_inner_tol")]
    pub inner_tol: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_eig_tol() -> f64 {
    1e-8
}
fn default_max_outer() -> usize {
    200
}
fn default_inner_tol() -> f64 {
    1e-10
}
fn default_seed() -> u64 {
    homog2d::coercivity::EigOpts::default().seed
}

impl Default for EigConfig {
    fn default() -> Self {
        Self {
            eig_tol: default_eig_tol(),
            max_outer: default_max_outer(),
            inner_tol: default_inner_tol(),
            seed: default_seed(),
        }
    }
}

impl EigConfig {
    pub fn to_opts(self) -> homog2d::coercivity::EigOpts {
        homog2d::coercivity::EigOpts {
            eig_tol: self.eig_tol,
            max_outer: self.max_outer,
            inner_tol: self.inner_tol,
            inner_max_iter: None,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlochConfig {
    #[serde(default = "default_k_grid")]
    pub k_grid: usize,
}

fn default_k_grid() -> usize {
    8
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaminateConfig {
    pub theta: f64,
    #[serde(default = "default_normal")]
    pub normal: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepRange>,
}

fn default_normal() -> [f64; 2] {
    [1.0, 0.0]
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRange {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    /// Also embed the homogenized tensor of every sample in the report.
    #[serde(default)]
    pub tensors: bool,
}

impl SweepRange {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        (0..self.count)
            .map(|i| self.start + (self.stop - self.start) * i as f64 / (self.count - 1) as f64)
            .collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EllipticityConfig {
    /// Path of a tensor JSON file ({"mandel": [9 numbers]}).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tensor: Option<String>,
    #[serde(default = "default_grid_n")]
    pub grid_n: usize,
    #[serde(default = "default_refine_tol")]
    pub refine_tol: f64,
}

fn default_grid_n() -> usize {
    360
}
fn default_refine_tol() -> f64 {
    1e-10
}

impl Default for EllipticityConfig {
    fn default() -> Self {
        Self {
            tensor: None,
            grid_n: default_grid_n(),
            refine_tol: default_refine_tol(),
        }
    }
}

impl EllipticityConfig {
    pub fn to_opts(&self) -> homog2d::tensor::RankOneOpts {
        homog2d::tensor::RankOneOpts {
            grid_n: self.grid_n,
            refine_tol: self.refine_tol,
            ..homog2d::tensor::RankOneOpts::default()
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
    /// Prefix for binary corrector dumps (three files, one per loading).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub correctors: Option<String>,
}

impl RunConfig {
    pub fn load(path: &std::path::Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("invalid config: {e}"))
    }

    /// Checks shared by every command.
    pub fn validate(&self) -> Result<(), String> {
        if let Some(ms) = &self.microstructure {
            if !ms.n.is_power_of_two() {
                return Err(format!(
                    "microstructure.n = {} must be a power of two (solver requirement)",
                    ms.n
                ));
            }
        }
        if let Some(s) = &self.solver {
            if !s.tol.is_finite() || s.tol <= 0.0 {
                return Err(format!("solver.tol = {} must be positive", s.tol));
            }
        }
        if let Some(e) = &self.eig {
            if !e.eig_tol.is_finite() || e.eig_tol <= 0.0 {
                return Err(format!("eig.eig_tol = {} must be positive", e.eig_tol));
            }
            if !e.inner_tol.is_finite() || e.inner_tol <= 0.0 {
                return Err(format!("eig.inner_tol = {} must be positive", e.inner_tol));
            }
        }
        if let Some(b) = &self.bloch {
            if b.k_grid < 2 {
                return Err(format!("bloch.k_grid = {} must be at least 2", b.k_grid));
            }
        }
        if let Some(l) = &self.laminate {
            if !(0.0..=1.0).contains(&l.theta) {
                return Err(format!("laminate.theta = {} outside [0, 1]", l.theta));
            }
            if l.normal == [0.0, 0.0] {
                return Err("laminate.normal must be nonzero".into());
            }
            if let Some(s) = &l.sweep {
                if s.count == 0 {
                    return Err("laminate.sweep.count must be positive".into());
                }
                if !(0.0..=1.0).contains(&s.start) || !(0.0..=1.0).contains(&s.stop) {
                    return Err("laminate.sweep range outside [0, 1]".into());
                }
            }
        }
        if let Some(e) = &self.ellipticity {
            if e.grid_n < 8 {
                return Err(format!(
                    "ellipticity.grid_n = {} must be at least 8",
                    e.grid_n
                ));
            }
            if !e.refine_tol.is_finite() || e.refine_tol <= 0.0 {
                return Err("ellipticity.refine_tol must be positive".into());
            }
        }
        Ok(())
    }

    pub fn microstructure(&self) -> Result<&MicrostructureSpec, String> {
        self.microstructure
            .as_ref()
            .ok_or_else(|| "config needs a \"microstructure\" section".into())
    }

    /// Phase pair for the commands that need no raster: the explicit
    /// `phases` section wins, otherwise the microstructure's moduli.
    pub fn phase_pair(&self) -> Result<PhasePair, String> {
        if let Some(p) = self.phases {
            return Ok(p);
        }
        if let Some(ms) = &self.microstructure {
            return Ok(PhasePair {
                phase1: ms.phase1,
                phase2: ms.phase2,
            });
        }
        Err("config needs a \"phases\" or \"microstructure\" section".into())
    }

    /// Copy embedded in reports: defaults materialized, output paths
    /// stripped.
    pub fn resolved_for_report(&self) -> RunConfig {
        let mut out = self.clone();
        out.output = None;
        out
    }
}
