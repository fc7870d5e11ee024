//! Closed-form rank-one lamination of two isotropic phases.
//!
//! For a microstructure varying only along a unit normal n the cell problem
//! is one-dimensional and solvable exactly: the corrector gradient is
//! piecewise constant, `g ⊗ n` per phase, fixed by zero mean and traction
//! continuity across the interfaces. The acoustic blocks
//! `A_i = μ_i I + (λ_i+μ_i) n⊗n` must be invertible, which holds for
//! strictly strongly elliptic phases even when a bulk modulus is negative —
//! exactly the regime where reference-medium FFT splittings fail.
//!
//! The result is the solver's exact ground truth and reproduces the
//! classical loss of strong ellipticity of laminates with a degenerate
//! weak phase.

use serde::{Deserialize, Serialize};

use crate::linalg;
use crate::tensor::{EllipticityReport, IsotropicModuli, RankOneOpts, Tensor4, SQRT_2};

/// Laminate description: phase 1 occupies volume fraction `theta` in layers
/// perpendicular to `normal`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LaminateSpec {
    pub theta: f64,
    pub normal: [f64; 2],
    pub phase1: IsotropicModuli,
    pub phase2: IsotropicModuli,
}

impl LaminateSpec {
    pub fn new(
        theta: f64,
        normal: [f64; 2],
        phase1: IsotropicModuli,
        phase2: IsotropicModuli,
    ) -> Self {
        let norm = (normal[0] * normal[0] + normal[1] * normal[1]).sqrt();
        assert!(norm > 0.0, "laminate normal must be nonzero");
        assert!((0.0..=1.0).contains(&theta), "theta must lie in [0, 1]");
        Self {
            theta,
            normal: [normal[0] / norm, normal[1] / norm],
            phase1,
            phase2,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LaminateError {
    /// The normal acoustic block of the given phase is singular: the 1D
    /// cell problem is ill-posed.
    #[error("phase {phase} has a degenerate acoustic block along the lamination normal (μ = {mu}, λ+2μ = {normal_modulus})")]
    IllPosed {
        phase: usize,
        mu: f64,
        normal_modulus: f64,
    },
}

fn acoustic(m: IsotropicModuli, n: [f64; 2]) -> [[f64; 2]; 2] {
    let kp = m.lambda + m.mu;
    [
        [m.mu + kp * n[0] * n[0], kp * n[0] * n[1]],
        [kp * n[0] * n[1], m.mu + kp * n[1] * n[1]],
    ]
}

/// Exact homogenized tensor of the laminate.
pub fn laminate_homogenize(spec: &LaminateSpec) -> Result<Tensor4, LaminateError> {
    for (idx, phase) in [(1usize, spec.phase1), (2, spec.phase2)] {
        if phase.mu <= 0.0 || phase.lambda + 2.0 * phase.mu <= 0.0 {
            return Err(LaminateError::IllPosed {
                phase: idx,
                mu: phase.mu,
                normal_modulus: phase.lambda + 2.0 * phase.mu,
            });
        }
    }
    let n = spec.normal;
    let theta = spec.theta;
    let l1 = Tensor4::isotropic(spec.phase1);
    let l2 = Tensor4::isotropic(spec.phase2);
    let a1 = acoustic(spec.phase1, n);
    let a2 = acoustic(spec.phase2, n);
    let mix = [
        [
            (1.0 - theta) * a1[0][0] + theta * a2[0][0],
            (1.0 - theta) * a1[0][1] + theta * a2[0][1],
        ],
        [
            (1.0 - theta) * a1[1][0] + theta * a2[1][0],
            (1.0 - theta) * a1[1][1] + theta * a2[1][1],
        ],
    ];

    // Loadings are the Mandel basis matrices, so the Gram matrix below is
    // the Mandel representation directly.
    let basis: [[[f64; 2]; 2]; 3] = [
        [[1.0, 0.0], [0.0, 0.0]],
        [[0.0, 0.0], [0.0, 1.0]],
        [[0.0, 1.0 / SQRT_2], [1.0 / SQRT_2, 0.0]],
    ];

    // Per-phase strains for each loading.
    let mut strain1 = [[[0.0f64; 2]; 2]; 3];
    let mut strain2 = [[[0.0f64; 2]; 2]; 3];
    for (b, load) in basis.iter().enumerate() {
        // Traction jump [(L2 - L1) M] n drives the corrector.
        let jump = {
            let s1 = l1.apply(*load);
            let s2 = l2.apply(*load);
            [
                (s2[0][0] - s1[0][0]) * n[0] + (s2[0][1] - s1[0][1]) * n[1],
                (s2[1][0] - s1[1][0]) * n[0] + (s2[1][1] - s1[1][1]) * n[1],
            ]
        };
        // Well-posedness of the phases makes the mixed block SPD.
        let h = linalg::solve2(mix, jump).expect("mixed acoustic block is definite");
        let g1 = [(1.0 - theta) * h[0], (1.0 - theta) * h[1]];
        let g2 = [-theta * h[0], -theta * h[1]];
        for p in 0..2 {
            for q in 0..2 {
                let sym1 = 0.5 * (g1[p] * n[q] + g1[q] * n[p]);
                let sym2 = 0.5 * (g2[p] * n[q] + g2[q] * n[p]);
                strain1[b][p][q] = load[p][q] + sym1;
                strain2[b][p][q] = load[p][q] + sym2;
            }
        }
    }

    let pair = |l: &Tensor4, e: &[[f64; 2]; 2], f: &[[f64; 2]; 2]| -> f64 {
        let s = l.apply(*f);
        let mut acc = 0.0;
        for p in 0..2 {
            for q in 0..2 {
                acc += e[p][q] * s[p][q];
            }
        }
        acc
    };

    let mut mandel = [[0.0f64; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let v = theta * pair(&l1, &strain1[i], &strain1[j])
                + (1.0 - theta) * pair(&l2, &strain2[i], &strain2[j]);
            mandel[i][j] = v;
        }
    }
    Ok(Tensor4::from_mandel(mandel))
}

/// One row of the fraction sweep.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepPoint {
    pub theta: f64,
    pub min_rank_one: f64,
    pub argmin_angle_a: f64,
    pub argmin_angle_b: f64,
}

/// Evaluate `rank_one_min(laminate_homogenize)` across a fraction sweep.
pub fn ellipticity_vs_fraction(
    spec: &LaminateSpec,
    thetas: &[f64],
    opts: &RankOneOpts,
) -> Result<Vec<SweepPoint>, LaminateError> {
    let mut out = Vec::with_capacity(thetas.len());
    for &theta in thetas {
        let lstar = laminate_homogenize(&LaminateSpec { theta, ..*spec })?;
        let report: EllipticityReport = lstar.rank_one_min(opts);
        let (a, b) = report.argmin.angles();
        out.push(SweepPoint {
            theta,
            min_rank_one: report.min_value,
            argmin_angle_a: a,
            argmin_angle_b: b,
        });
    }
    Ok(out)
}
