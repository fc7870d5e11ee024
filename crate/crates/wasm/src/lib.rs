//! Browser bindings for the interactive demo page.
//!
//! Three operations are exposed, each returning a JSON string for the page
//! to render: homogenize a generated microstructure, sweep the laminate
//! volume fraction, and sample the rank-one energy surface of a tensor.
//! The JSON-over-string interface keeps the binding layer free of glue
//! types; build with `wasm-pack build crates/wasm --target web`.

use wasm_bindgen::prelude::*;

use homog2d::laminate::{ellipticity_vs_fraction, LaminateSpec};
use homog2d::micro::{Axis, Microstructure};
use homog2d::solver::{homogenize, SolveError, SolveOpts};
use homog2d::tensor::{IsotropicModuli, RankOneOpts, Tensor4};

fn moduli(lambda: f64, mu: f64) -> IsotropicModuli {
    IsotropicModuli::new(lambda, mu)
}

fn tensor_json(t: &Tensor4) -> serde_json::Value {
    let m = t.mandel();
    serde_json::json!([
        m[0][0], m[0][1], m[0][2], m[1][0], m[1][1], m[1][2], m[2][0], m[2][1], m[2][2]
    ])
}

fn ellipticity_json(t: &Tensor4) -> serde_json::Value {
    let rep = t.rank_one_min(&RankOneOpts::default());
    let proj = t.project_isotropic();
    let class = match rep.classification {
        homog2d::tensor::Ellipticity::StrictlyStronglyElliptic => "strictly-strongly-elliptic",
        homog2d::tensor::Ellipticity::Degenerate => "degenerate",
        homog2d::tensor::Ellipticity::NotStronglyElliptic => "not-strongly-elliptic",
    };
    serde_json::json!({
        "min_rank_one": rep.min_value,
        "argmin_a": rep.argmin.a,
        "argmin_b": rep.argmin.b,
        "classification": class,
        "bulk_modulus": proj.bulk_modulus,
        "shear_modulus": proj.shear_modulus,
        "anisotropy_residual": proj.residual,
    })
}

pub fn homogenize_demo_impl(
    kind: &str,
    n: usize,
    param: f64,
    lambda1: f64,
    mu1: f64,
    lambda2: f64,
    mu2: f64,
) -> Result<String, String> {
    let n = n.clamp(8, 128).next_power_of_two();
    let p1 = moduli(lambda1, mu1);
    let p2 = moduli(lambda2, mu2);
    let micro = match kind {
        "disk" => Microstructure::disk(n, param, [0.5, 0.5], p1, p2).map_err(|e| e.to_string())?,
        "laminate" => {
            if !(0.0..=1.0).contains(&param) {
                return Err(format!("theta = {param} outside [0, 1]"));
            }
            Microstructure::laminate(n, param, Axis::X1, p1, p2)
        }
        other => return Err(format!("unknown microstructure kind '{other}'")),
    };
    let admissibility = micro.check_admissibility();
    let base = serde_json::json!({
        "n": n,
        "theta": micro.volume_fraction(),
        "chi": micro.cells(),
        "admissible": admissibility.admissible(),
        "condition_failures": admissibility.failures(),
    });
    let mut out = base;
    match homogenize(&micro, &SolveOpts::default()) {
        Ok(sol) => {
            out["status"] = "ok".into();
            out["lstar"] = tensor_json(&sol.lstar);
            out["ellipticity"] = ellipticity_json(&sol.lstar);
            out["cg_iterations"] = serde_json::json!(sol.diagnostics.cg_iterations);
        }
        Err(SolveError::Indefinite { loading, iteration }) => {
            out["status"] = "indefinite".into();
            out["indefiniteness"] = serde_json::json!({
                "loading": loading,
                "cg_iteration": iteration,
            });
        }
        Err(e @ SolveError::MaxIter { .. }) => return Err(e.to_string()),
    }
    Ok(out.to_string())
}

pub fn laminate_sweep_impl(
    lambda1: f64,
    mu1: f64,
    lambda2: f64,
    mu2: f64,
    samples: usize,
) -> Result<String, String> {
    let samples = samples.clamp(3, 400);
    let spec = LaminateSpec::new(0.5, [1.0, 0.0], moduli(lambda1, mu1), moduli(lambda2, mu2));
    let thetas: Vec<f64> = (0..=samples).map(|i| i as f64 / samples as f64).collect();
    // A coarser bracketing grid keeps the page interactive; the descent
    // still polishes each sample to the default tolerance.
    let opts = RankOneOpts {
        grid_n: 120,
        ..RankOneOpts::default()
    };
    let rows = ellipticity_vs_fraction(&spec, &thetas, &opts).map_err(|e| e.to_string())?;
    let theta: Vec<f64> = rows.iter().map(|r| r.theta).collect();
    let min: Vec<f64> = rows.iter().map(|r| r.min_rank_one).collect();
    Ok(serde_json::json!({ "theta": theta, "min_rank_one": min }).to_string())
}

pub fn rank_one_surface_impl(mandel: &[f64], grid: usize) -> Result<String, String> {
    if mandel.len() != 9 {
        return Err(format!("expected 9 Mandel entries, got {}", mandel.len()));
    }
    let grid = grid.clamp(16, 256);
    let t = Tensor4::from_mandel([
        [mandel[0], mandel[1], mandel[2]],
        [mandel[3], mandel[4], mandel[5]],
        [mandel[6], mandel[7], mandel[8]],
    ]);
    let mut values = Vec::with_capacity(grid * grid);
    for i in 0..grid {
        let ta = i as f64 * std::f64::consts::PI / grid as f64;
        let a = [ta.cos(), ta.sin()];
        for j in 0..grid {
            let tb = j as f64 * std::f64::consts::PI / grid as f64;
            let b = [tb.cos(), tb.sin()];
            let g = [[a[0] * b[0], a[0] * b[1]], [a[1] * b[0], a[1] * b[1]]];
            values.push(t.energy(g));
        }
    }
    let rep = t.rank_one_min(&RankOneOpts::default());
    let (angle_a, angle_b) = rep.argmin.angles();
    Ok(serde_json::json!({
        "grid": grid,
        "values": values,
        "min": rep.min_value,
        "argmin_angle_a": angle_a.rem_euclid(std::f64::consts::PI),
        "argmin_angle_b": angle_b.rem_euclid(std::f64::consts::PI),
    })
    .to_string())
}

/// Rasterize and homogenize a generated microstructure; `kind` is "disk"
/// (param = radius) or "laminate" (param = volume fraction).
#[wasm_bindgen]
pub fn homogenize_demo(
    kind: &str,
    n: usize,
    param: f64,
    lambda1: f64,
    mu1: f64,
    lambda2: f64,
    mu2: f64,
) -> Result<String, JsError> {
    homogenize_demo_impl(kind, n, param, lambda1, mu1, lambda2, mu2).map_err(|e| JsError::new(&e))
}

/// Rank-one minimum of the exact laminate tensor across the volume
/// fraction range.
#[wasm_bindgen]
pub fn laminate_sweep(
    lambda1: f64,
    mu1: f64,
    lambda2: f64,
    mu2: f64,
    samples: usize,
) -> Result<String, JsError> {
    laminate_sweep_impl(lambda1, mu1, lambda2, mu2, samples).map_err(|e| JsError::new(&e))
}

/// Energy surface (θ_a, θ_b) ↦ sym(a⊗b)·L sym(a⊗b) on a uniform angle grid.
#[wasm_bindgen]
pub fn rank_one_surface(mandel: &[f64], grid: usize) -> Result<String, JsError> {
    rank_one_surface_impl(mandel, grid).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn demo_disk_reports_strict_ellipticity() {
        let json = homogenize_demo_impl("disk", 16, 0.3, 0.0, 1.0, -4.0, 3.0).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["status"], "ok");
        assert_eq!(v["admissible"], true);
        assert_eq!(
            v["ellipticity"]["classification"],
            "strictly-strongly-elliptic"
        );
        assert_eq!(v["chi"].as_array().unwrap().len(), 256);
    }

    #[test]
    fn demo_laminate_half_degenerates() {
        let json = homogenize_demo_impl("laminate", 16, 0.5, 0.0, 1.0, -4.0, 3.0).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["status"], "ok");
        let min = v["ellipticity"]["min_rank_one"].as_f64().unwrap();
        assert!(
            min.abs() < 0.15,
            "laminate should be near-degenerate, got {min}"
        );
    }

    #[test]
    fn sweep_touches_zero_at_half() {
        let json = laminate_sweep_impl(0.0, 1.0, -4.0, 3.0, 4).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        let theta = v["theta"].as_array().unwrap();
        let min = v["min_rank_one"].as_array().unwrap();
        assert_eq!(theta.len(), 5);
        assert!(min[2].as_f64().unwrap().abs() < 1e-9);
    }

    #[test]
    fn surface_matches_minimum() {
        let mandel = [2.0, -2.0, 0.0, -2.0, 0.0, 0.0, 0.0, 0.0, 3.0];
        let json = rank_one_surface_impl(&mandel, 32).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        let values = v["values"].as_array().unwrap();
        assert_eq!(values.len(), 32 * 32);
        let grid_min = values
            .iter()
            .map(|x| x.as_f64().unwrap())
            .fold(f64::INFINITY, f64::min);
        let min = v["min"].as_f64().unwrap();
        assert!(min <= grid_min + 1e-12);

        assert!(rank_one_surface_impl(&mandel[..5], 32).is_err());
        assert!(homogenize_demo_impl("torus", 16, 0.3, 0.0, 1.0, -4.0, 3.0).is_err());
    }
}
