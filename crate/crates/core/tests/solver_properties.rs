//! Structural properties of the homogenized tensor: variational bounds,
//! frame changes, and agreement with the closed-form laminate.

use homog2d::laminate::{laminate_homogenize, LaminateSpec};
use homog2d::micro::{Axis, Microstructure};
use homog2d::solver::{energy_of, homogenize, SolveOpts, LOADING_BASIS};
use homog2d::tensor::{IsotropicModuli, Tensor4};

fn vse_phases() -> (IsotropicModuli, IsotropicModuli) {
    (
        IsotropicModuli::new(1.0, 1.0),
        IsotropicModuli::new(2.0, 3.0),
    )
}

fn canonical_phases() -> (IsotropicModuli, IsotropicModuli) {
    (
        IsotropicModuli::new(0.0, 1.0),
        IsotropicModuli::new(-4.0, 3.0),
    )
}

fn max_entry_diff(a: &Tensor4, b: &Tensor4) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            worst = worst.max((a.mandel()[i][j] - b.mandel()[i][j]).abs());
        }
    }
    worst
}

fn test_cases() -> Vec<Microstructure> {
    let (v1, v2) = vse_phases();
    let (c1, c2) = canonical_phases();
    // Pseudo-random raster, fixed for reproducibility.
    let mut state = 0x5eedu64;
    let chi: Vec<u8> = (0..16 * 16)
        .map(|_| {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 33) & 1) as u8
        })
        .collect();
    vec![
        Microstructure::homogeneous(16, v1),
        Microstructure::laminate(16, 0.5, Axis::X1, v1, v2),
        Microstructure::disk(16, 0.3, [0.5, 0.5], c1, c2).unwrap(),
        Microstructure::from_cells(16, chi, v1, v2),
    ]
}

#[test]
fn voigt_upper_bound() {
    for m in test_cases() {
        let sol = homogenize(&m, &SolveOpts::default()).unwrap();
        let diff = m.mean_tensor() - sol.lstar;
        let scale = sol.lstar.frobenius_norm();
        assert!(
            diff.eigenvalues()[0] >= -1e-10 * scale.max(1.0),
            "Voigt violated: {:?}",
            diff.eigenvalues()
        );
    }
}

#[test]
fn reuss_lower_bound_for_very_strongly_elliptic_phases() {
    let (v1, v2) = vse_phases();
    assert!(v1.is_very_strongly_elliptic() && v2.is_very_strongly_elliptic());
    for m in [
        Microstructure::laminate(16, 0.5, Axis::X1, v1, v2),
        Microstructure::disk(16, 0.3, [0.5, 0.5], v1, v2).unwrap(),
    ] {
        let theta = m.volume_fraction();
        let sol = homogenize(&m, &SolveOpts::default()).unwrap();
        let harmonic = (Tensor4::isotropic(v1).inverse().unwrap() * theta
            + Tensor4::isotropic(v2).inverse().unwrap() * (1.0 - theta))
            .inverse()
            .unwrap();
        let diff = sol.lstar - harmonic;
        let scale = sol.lstar.frobenius_norm();
        assert!(
            diff.eigenvalues()[0] >= -1e-9 * scale.max(1.0),
            "Reuss violated: {:?}",
            diff.eigenvalues()
        );
    }
}

#[test]
fn nested_resolution_monotonicity() {
    // Same continuous coefficient field on nested Fourier spaces: every
    // quadratic form value of the minimum can only decrease.
    let opts = SolveOpts::default();
    for m in test_cases() {
        let coarse = homogenize(&m, &opts).unwrap();
        let fine = homogenize(&m.refine(2), &opts).unwrap();
        let diff = coarse.lstar - fine.lstar;
        let scale = coarse.lstar.frobenius_norm().max(1.0);
        assert!(
            diff.eigenvalues()[0] >= -1e-8 * scale,
            "monotonicity violated: {:?}",
            diff.eigenvalues()
        );
    }
}

#[test]
fn energy_identity_and_symmetry() {
    let opts = SolveOpts::default();
    for m in test_cases() {
        let sol = homogenize(&m, &opts).unwrap();
        assert!(sol.diagnostics.asymmetry_before_enforcement <= 1e-10);
        // Diagonal Mandel entries against the direct quadrature, with the
        // √2 scaling of the shear basis vector.
        for (i, loading) in LOADING_BASIS.iter().enumerate() {
            let quad = energy_of(&m, *loading, &sol.correctors[i]);
            let scale = if i == 2 { 2.0 } else { 1.0 };
            let assembled = sol.lstar.mandel()[i][i] / scale;
            assert!(
                (assembled - quad).abs() <= 1e-10 * quad.abs().max(1.0),
                "loading {i}: {assembled} vs {quad}"
            );
        }
        // Upper-bound property entrywise on the diagonal.
        let mean = m.mean_tensor();
        for i in 0..3 {
            assert!(sol.lstar.mandel()[i][i] <= mean.mandel()[i][i] + 1e-10);
        }
    }
}

#[test]
fn translation_invariance() {
    let (c1, c2) = canonical_phases();
    let m = Microstructure::disk(16, 0.3, [0.3, 0.6], c1, c2).unwrap();
    let opts = SolveOpts::default();
    let base = homogenize(&m, &opts).unwrap();
    let shifted = homogenize(&m.shifted(5, -7), &opts).unwrap();
    let scale = base.lstar.frobenius_norm();
    assert!(max_entry_diff(&base.lstar, &shifted.lstar) <= 1e-8 * scale.max(1.0));
}

#[test]
fn rotation_equivariance() {
    let (c1, c2) = canonical_phases();
    // Off-center disk so the raster has no rotation symmetry of its own.
    let m = Microstructure::disk(16, 0.28, [0.3, 0.55], c1, c2).unwrap();
    let opts = SolveOpts::default();
    let base = homogenize(&m, &opts).unwrap();
    let rotated = homogenize(&m.rotated90(), &opts).unwrap();
    let scale = base.lstar.frobenius_norm();
    assert!(
        max_entry_diff(&base.lstar.rotated90(), &rotated.lstar) <= 1e-8 * scale.max(1.0),
        "diff {}",
        max_entry_diff(&base.lstar.rotated90(), &rotated.lstar)
    );
}

#[test]
fn laminate_oracle_agreement_improves_with_resolution() {
    let (v1, v2) = vse_phases();
    let exact = laminate_homogenize(&LaminateSpec::new(0.5, [1.0, 0.0], v1, v2)).unwrap();
    let opts = SolveOpts::default();
    let mut errors = Vec::new();
    for n in [8, 16, 32] {
        let m = Microstructure::laminate(n, 0.5, Axis::X1, v1, v2);
        let sol = homogenize(&m, &opts).unwrap();
        errors.push((sol.lstar - exact).frobenius_norm() / exact.frobenius_norm());
    }
    assert!(
        errors[1] < errors[0] && errors[2] < errors[1],
        "errors {errors:?}"
    );
    assert!(errors[2] < 0.05, "errors {errors:?}");
}
