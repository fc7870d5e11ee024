//! The five subcommands: configuration resolution, computation, report
//! and CSV emission, exit-code mapping.

use std::path::{Path, PathBuf};

use clap::Args;
use serde_json::{Map, Value};

use homog2d::coercivity;
use homog2d::density;
use homog2d::laminate::{self, LaminateSpec};
use homog2d::micro::Microstructure;
use homog2d::solver::{self, SolveError};
use homog2d::tensor::Tensor4;

use crate::config::{EllipticityConfig, LaminateConfig, RunConfig};
use crate::report;

/// Exit codes: 0 success, 1 usage/config error (and strict-mode
/// admissibility failures), 2 indefinite periodic form, 3 iterative solver
/// non-convergence, 4 ill-posed laminate problem.
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

#[derive(Args)]
pub struct Common {
    /// Path of the JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Report path; overrides the config's output.report. Without either
    /// the report goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Turn admissibility warnings into exit code 1.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Args)]
pub struct HomogenizeArgs {
    #[command(flatten)]
    pub common: Common,
    /// Override microstructure.n.
    #[arg(long)]
    pub n: Option<usize>,
    /// Override solver.tol.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Override output.correctors (dump prefix).
    #[arg(long)]
    pub correctors: Option<PathBuf>,
}

#[derive(Args)]
pub struct CoercivityArgs {
    #[command(flatten)]
    pub common: Common,
    /// Override microstructure.n.
    #[arg(long)]
    pub n: Option<usize>,
    /// Override eig.eig_tol.
    #[arg(long)]
    pub eig_tol: Option<f64>,
    /// Enable the Bloch sweep with this grid (overrides bloch.k_grid).
    #[arg(long)]
    pub k_grid: Option<usize>,
    /// Override output.csv for the Bloch samples.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args)]
pub struct LaminateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Override laminate.theta.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Override output.csv for the fraction sweep.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args)]
pub struct EllipticityArgs {
    #[command(flatten)]
    pub common: Common,
    /// Override ellipticity.tensor (path of a tensor JSON file).
    #[arg(long)]
    pub tensor: Option<PathBuf>,
}

fn load_config(common: &Common) -> Result<RunConfig, Failure> {
    RunConfig::load(&common.config).map_err(Failure::config)
}

fn build_micro(config: &RunConfig) -> Result<Microstructure, Failure> {
    config
        .microstructure()
        .map_err(Failure::config)?
        .build()
        .map_err(|e| Failure::config(format!("cannot build microstructure: {e}")))
}

/// Admissibility warnings shared by homogenize and coercivity; strict mode
/// turns them into a config-level failure naming the clauses.
fn admissibility_warnings(m: &Microstructure, strict: bool) -> Result<Vec<String>, Failure> {
    let rep = m.check_admissibility();
    let warnings: Vec<String> = rep
        .failures()
        .iter()
        .map(|clause| format!("admissibility clause failed: {clause}"))
        .collect();
    if strict && !warnings.is_empty() {
        return Err(Failure::config(format!(
            "strict mode: microstructure is not admissible ({})",
            rep.failures().join("; ")
        )));
    }
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    Ok(warnings)
}

fn write_report(common: &Common, config: &RunConfig, text: &str) -> Result<(), Failure> {
    let path = common.out.clone().or_else(|| {
        config
            .output
            .as_ref()
            .and_then(|o| o.report.clone().map(PathBuf::from))
    });
    match path {
        Some(p) => std::fs::write(&p, text)
            .map_err(|e| Failure::config(format!("cannot write report {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn csv_path(flag: &Option<PathBuf>, config: &RunConfig, common: &Common) -> Option<PathBuf> {
    flag.clone()
        .or_else(|| {
            config
                .output
                .as_ref()
                .and_then(|o| o.csv.clone().map(PathBuf::from))
        })
        .or_else(|| {
            let report = common.out.clone().or_else(|| {
                config
                    .output
                    .as_ref()
                    .and_then(|o| o.report.clone().map(PathBuf::from))
            })?;
            Some(report.with_extension("csv"))
        })
}

fn write_csv(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text)
        .map_err(|e| Failure::config(format!("cannot write csv {}: {e}", path.display())))
}

fn ellipticity_payload(
    lstar: &Tensor4,
    cfg: &EllipticityConfig,
) -> Result<Map<String, Value>, Failure> {
    let mut map = Map::new();
    let rep = lstar.rank_one_min(&cfg.to_opts());
    map.insert(
        "ellipticity".into(),
        report::to_value(&rep).map_err(Failure::config)?,
    );
    map.insert(
        "isotropic_projection".into(),
        report::to_value(&lstar.project_isotropic()).map_err(Failure::config)?,
    );
    Ok(map)
}

pub fn homogenize(args: &HomogenizeArgs) -> Result<u8, Failure> {
    let mut config = load_config(&args.common)?;
    if let Some(n) = args.n {
        config
            .microstructure
            .as_mut()
            .ok_or_else(|| Failure::config("--n needs a microstructure section"))?
            .n = n;
    }
    if let Some(tol) = args.tol {
        config.solver.get_or_insert_with(Default::default).tol = tol;
    }
    if let Some(prefix) = &args.correctors {
        config
            .output
            .get_or_insert_with(Default::default)
            .correctors = Some(prefix.display().to_string());
    }
    config.solver.get_or_insert_with(Default::default);
    config.ellipticity.get_or_insert_with(Default::default);
    config.validate().map_err(Failure::config)?;

    let micro = build_micro(&config)?;
    let warnings = admissibility_warnings(&micro, args.common.strict)?;
    let opts = config.solver.unwrap_or_default().to_opts();
    let ell_cfg = config.ellipticity.clone().unwrap_or_default();

    let mut payload = Map::new();
    let exit = match solver::homogenize(&micro, &opts) {
        Ok(sol) => {
            payload.insert("status".into(), Value::from("ok"));
            payload.insert(
                "solution".into(),
                report::to_value(&sol).map_err(Failure::config)?,
            );
            payload.extend(ellipticity_payload(&sol.lstar, &ell_cfg)?);
            if let Some(prefix) = config.output.as_ref().and_then(|o| o.correctors.as_ref()) {
                for (corr, tag) in sol.correctors.iter().zip(["e11", "e22", "e12"]) {
                    let path = format!("{prefix}_{tag}.bin");
                    corr.write_binary(&path).map_err(|e| {
                        Failure::config(format!("cannot write corrector {path}: {e}"))
                    })?;
                }
            }
            0
        }
        Err(SolveError::Indefinite { loading, iteration }) => {
            payload.insert("status".into(), Value::from("indefinite"));
            payload.insert("solution".into(), Value::Null);
            payload.insert(
                "indefiniteness".into(),
                serde_json::json!({
                    "detected": true,
                    "loading": loading,
                    "cg_iteration": iteration,
                }),
            );
            2
        }
        Err(e @ SolveError::MaxIter { .. }) => {
            return Err(Failure {
                code: 3,
                message: e.to_string(),
            });
        }
    };

    let text =
        report::envelope("homogenize", &config, &warnings, payload).map_err(Failure::config)?;
    write_report(&args.common, &config, &text)?;
    if exit == 2 {
        eprintln!("non-positive curvature: the periodic form is indefinite at this resolution");
    }
    Ok(exit)
}

pub fn coercivity(args: &CoercivityArgs) -> Result<u8, Failure> {
    let mut config = load_config(&args.common)?;
    if let Some(n) = args.n {
        config
            .microstructure
            .as_mut()
            .ok_or_else(|| Failure::config("--n needs a microstructure section"))?
            .n = n;
    }
    if let Some(tol) = args.eig_tol {
        config.eig.get_or_insert_with(Default::default).eig_tol = tol;
    }
    if let Some(k) = args.k_grid {
        config.bloch = Some(crate::config::BlochConfig { k_grid: k });
    }
    config.eig.get_or_insert_with(Default::default);
    config.validate().map_err(Failure::config)?;

    let micro = build_micro(&config)?;
    let warnings = admissibility_warnings(&micro, args.common.strict)?;
    let opts = config.eig.unwrap_or_default().to_opts();
    let k_grid = config.bloch.as_ref().map(|b| b.k_grid);

    let rep = coercivity::coercivity_report(&micro, k_grid, &opts).map_err(|e| Failure {
        code: 3,
        message: e.to_string(),
    })?;

    if k_grid.is_some() {
        if let Some(path) = csv_path(&args.csv, &config, &args.common) {
            let mut csv = String::from("k1,k2,lambda\n");
            for s in &rep.bloch_samples {
                csv.push_str(&format!("{},{},{}\n", s.k[0], s.k[1], s.lambda));
            }
            write_csv(&path, &csv)?;
        }
    }

    let mut payload = Map::new();
    payload.insert("status".into(), Value::from("ok"));
    payload.insert(
        "report".into(),
        report::to_value(&rep).map_err(Failure::config)?,
    );
    let text =
        report::envelope("coercivity", &config, &warnings, payload).map_err(Failure::config)?;
    write_report(&args.common, &config, &text)?;
    Ok(0)
}

pub fn decompose(args: &DecomposeArgs) -> Result<u8, Failure> {
    let config = load_config(&args.common)?;
    config.validate().map_err(Failure::config)?;
    let phases = config.phase_pair().map_err(Failure::config)?;
    let dec = density::decompose(phases.phase1, phases.phase2);

    let show = |name: &str, q: &density::QuadForm| {
        let k = match q.kernel {
            Some(k) => format!("kernel [{:.6}, {:.6}]", k[0], k[1]),
            None => "strictly definite".into(),
        };
        eprintln!(
            "{name} = [[{}, {}], [{}, {}]]  ({k})",
            q.matrix[0][0], q.matrix[0][1], q.matrix[1][0], q.matrix[1][1]
        );
    };
    show("P1", &dec.p1);
    show("R1", &dec.r1);
    show("P2", &dec.p2);
    show("R2", &dec.r2);
    match dec.alpha {
        Some(a) => eprintln!(
            "alpha = {a} (terms: p1 {}, r1 {}, p2 {}, r2 {})",
            dec.alpha_terms.p1, dec.alpha_terms.r1, dec.alpha_terms.p2, dec.alpha_terms.r2
        ),
        None => eprintln!("alpha not applicable: phase conditions fail"),
    }

    let mut payload = Map::new();
    payload.insert("status".into(), Value::from("ok"));
    payload.insert(
        "decomposition".into(),
        report::to_value(&dec).map_err(Failure::config)?,
    );
    let text = report::envelope("decompose", &config, &[], payload).map_err(Failure::config)?;
    write_report(&args.common, &config, &text)?;
    Ok(0)
}

pub fn laminate(args: &LaminateArgs) -> Result<u8, Failure> {
    let mut config = load_config(&args.common)?;
    if let Some(theta) = args.theta {
        match &mut config.laminate {
            Some(l) => l.theta = theta,
            None => {
                config.laminate = Some(LaminateConfig {
                    theta,
                    normal: [1.0, 0.0],
                    sweep: None,
                })
            }
        }
    }
    config.validate().map_err(Failure::config)?;
    let phases = config.phase_pair().map_err(Failure::config)?;
    let lam = config
        .laminate
        .clone()
        .ok_or_else(|| Failure::config("config needs a \"laminate\" section (or --theta)"))?;
    let ell_cfg = config.ellipticity.clone().unwrap_or_default();

    let spec = LaminateSpec::new(lam.theta, lam.normal, phases.phase1, phases.phase2);
    let lstar = laminate::laminate_homogenize(&spec).map_err(|e| Failure {
        code: 4,
        message: e.to_string(),
    })?;

    let mut payload = Map::new();
    payload.insert("status".into(), Value::from("ok"));
    payload.insert(
        "lstar".into(),
        report::to_value(&lstar).map_err(Failure::config)?,
    );
    payload.extend(ellipticity_payload(&lstar, &ell_cfg)?);

    if let Some(sweep) = &lam.sweep {
        let rows = laminate::ellipticity_vs_fraction(&spec, &sweep.values(), &ell_cfg.to_opts())
            .map_err(|e| Failure {
                code: 4,
                message: e.to_string(),
            })?;
        payload.insert(
            "sweep".into(),
            report::to_value(&rows).map_err(Failure::config)?,
        );
        if sweep.tensors {
            let mut tensors = Vec::with_capacity(rows.len());
            for &theta in &sweep.values() {
                let t = laminate::laminate_homogenize(&LaminateSpec::new(
                    theta,
                    lam.normal,
                    phases.phase1,
                    phases.phase2,
                ))
                .map_err(|e| Failure {
                    code: 4,
                    message: e.to_string(),
                })?;
                tensors.push(t);
            }
            payload.insert(
                "sweep_tensors".into(),
                report::to_value(&tensors).map_err(Failure::config)?,
            );
        }
        if let Some(path) = csv_path(&args.csv, &config, &args.common) {
            let mut csv = String::from("theta,min_rank_one,argmin_angle_a,argmin_angle_b\n");
            for r in &rows {
                csv.push_str(&format!(
                    "{},{},{},{}\n",
                    r.theta, r.min_rank_one, r.argmin_angle_a, r.argmin_angle_b
                ));
            }
            write_csv(&path, &csv)?;
        }
    } else {
        payload.insert("sweep".into(), Value::Null);
    }

    let text = report::envelope("laminate", &config, &[], payload).map_err(Failure::config)?;
    write_report(&args.common, &config, &text)?;
    Ok(0)
}

pub fn ellipticity(args: &EllipticityArgs) -> Result<u8, Failure> {
    let mut config = load_config(&args.common)?;
    if let Some(path) = &args.tensor {
        config
            .ellipticity
            .get_or_insert_with(Default::default)
            .tensor = Some(path.display().to_string());
    }
    config.validate().map_err(Failure::config)?;
    let ell_cfg = config.ellipticity.clone().unwrap_or_default();
    let path = ell_cfg
        .tensor
        .as_ref()
        .ok_or_else(|| Failure::config("ellipticity needs a tensor path (--tensor)"))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::config(format!("cannot read tensor {path}: {e}")))?;
    let tensor: Tensor4 = serde_json::from_str(&text)
        .map_err(|e| Failure::config(format!("invalid tensor JSON: {e}")))?;

    let mut payload = Map::new();
    payload.insert("status".into(), Value::from("ok"));
    payload.insert(
        "input".into(),
        report::to_value(&tensor).map_err(Failure::config)?,
    );
    payload.extend(ellipticity_payload(&tensor, &ell_cfg)?);
    let text = report::envelope("ellipticity", &config, &[], payload).map_err(Failure::config)?;
    write_report(&args.common, &config, &text)?;
    Ok(0)
}
