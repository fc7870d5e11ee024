//! 2D FFT plumbing and the spectral representation of the piecewise-constant
//! coefficient field.
//!
//! Fields live on square grids with points `x = (i/m, j/m)`, row-major index
//! `i*m + j`. Spectra are stored as Fourier coefficients (`field(x) =
//! Σ_k c(k) e^{2πi k·x}`), i.e. the unnormalized forward DFT divided by `m²`.
//!
//! Products of bandlimited fields with the coefficient field are formed on a
//! 2x-oversampled grid. The coefficient field placed there is not the raw
//! raster sample but the inverse transform of the exact Fourier coefficients
//! of the piecewise-constant raster (cell transforms carry separable sinc
//! factors). Pairings of that field against products of degree-n/2 trig
//! polynomials then reproduce the continuous integrals exactly, which is
//! what makes the Galerkin minimum monotone under grid refinement.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::micro::Microstructure;

/// Planned forward/inverse transforms for one square grid size.
pub(crate) struct Fft2 {
    pub m: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scratch: std::cell::RefCell<Vec<Complex64>>,
}

impl Fft2 {
    pub fn new(planner: &mut FftPlanner<f64>, m: usize) -> Self {
        let fwd = planner.plan_fft_forward(m);
        let inv = planner.plan_fft_inverse(m);
        let scratch_len = fwd
            .get_inplace_scratch_len()
            .max(inv.get_inplace_scratch_len());
        Self {
            m,
            fwd,
            inv,
            scratch: std::cell::RefCell::new(vec![Complex64::default(); scratch_len]),
        }
    }

    fn pass(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let m = self.m;
        let mut scratch = self.scratch.borrow_mut();
        for row in data.chunks_exact_mut(m) {
            plan.process_with_scratch(row, &mut scratch);
        }
        transpose(data, m);
        for row in data.chunks_exact_mut(m) {
            plan.process_with_scratch(row, &mut scratch);
        }
        transpose(data, m);
    }

    /// Values -> Fourier coefficients (normalized by 1/m²).
    pub fn forward(&self, data: &mut [Complex64]) {
        self.pass(data, &self.fwd);
        let scale = 1.0 / (self.m * self.m) as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }

    /// Fourier coefficients -> values.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.pass(data, &self.inv);
    }
}

fn transpose(data: &mut [Complex64], m: usize) {
    for i in 0..m {
        for j in (i + 1)..m {
            data.swap(i * m + j, j * m + i);
        }
    }
}

/// Signed frequency of DFT index `i` on a length-`m` grid.
pub(crate) fn freq(i: usize, m: usize) -> i64 {
    if i <= (m - 1) / 2 {
        i as i64
    } else {
        i as i64 - m as i64
    }
}

/// DFT index of signed frequency `k`.
pub(crate) fn index_of(k: i64, m: usize) -> usize {
    k.rem_euclid(m as i64) as usize
}

/// Frequencies kept in the Galerkin space at resolution `n`: the unpaired
/// Nyquist line of even grids is dropped (its spectral derivative is not
/// representable), the mean is handled separately.
pub(crate) fn is_active(k: i64, n: usize) -> bool {
    !(n % 2 == 0 && k == -(n as i64) / 2)
}

/// Spectral grids for one solve: coarse resolution `n`, fine `m = 2n`.
pub(crate) struct Engine {
    pub n: usize,
    pub fine: usize,
    pub coarse_fft: Fft2,
    pub fine_fft: Fft2,
}

impl Engine {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            fine: 2 * n,
            coarse_fft: Fft2::new(&mut planner, n),
            fine_fft: Fft2::new(&mut planner, 2 * n),
        }
    }

    /// Copy active coarse coefficients into a zero-padded fine spectrum.
    pub fn pad(&self, coarse: &[Complex64], fine: &mut [Complex64]) {
        let (n, m) = (self.n, self.fine);
        fine.fill(Complex64::default());
        for i in 0..n {
            let k1 = freq(i, n);
            if !is_active(k1, n) {
                continue;
            }
            let fi = index_of(k1, m);
            for j in 0..n {
                let k2 = freq(j, n);
                if !is_active(k2, n) {
                    continue;
                }
                fine[fi * m + index_of(k2, m)] = coarse[i * n + j];
            }
        }
    }
}

/// Lamé coefficient fields on the fine grid, spectrally consistent with the
/// piecewise-constant raster.
pub(crate) struct MaterialField {
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
}

impl MaterialField {
    pub fn new(micro: &Microstructure, engine: &Engine) -> Self {
        let chi = chi_filtered(micro, engine);
        let (l1, m1) = (micro.phase1.lambda, micro.phase1.mu);
        let (l2, m2) = (micro.phase2.lambda, micro.phase2.mu);
        let lambda = chi.iter().map(|&c| l2 + (l1 - l2) * c).collect();
        let mu = chi.iter().map(|&c| m2 + (m1 - m2) * c).collect();
        Self { lambda, mu }
    }
}

/// Exact Fourier coefficients of the piecewise-constant χ, truncated to the
/// fine lattice and transformed back to fine-grid values.
pub(crate) fn chi_filtered(micro: &Microstructure, engine: &Engine) -> Vec<f64> {
    let n = micro.n();
    assert_eq!(n, engine.n);
    let m = engine.fine;

    let mut raster: Vec<Complex64> = micro
        .cells()
        .iter()
        .map(|&c| Complex64::new(c as f64, 0.0))
        .collect();
    engine.coarse_fft.forward(&mut raster); // mean-normalized DFT of cell values

    let sinc = |k: i64| -> f64 {
        if k == 0 {
            1.0
        } else {
            let z = std::f64::consts::PI * k as f64 / n as f64;
            z.sin() / z
        }
    };

    let mut spec = vec![Complex64::default(); m * m];
    for a in 0..m {
        let k1 = freq(a, m);
        for b in 0..m {
            let k2 = freq(b, m);
            let amp = sinc(k1) * sinc(k2);
            if amp == 0.0 {
                // |k| = n: the cell-average structure kills the coefficient.
                continue;
            }
            // Cell centers sit at (c + 0.5)/n, hence the half-cell phase.
            let phase = -std::f64::consts::PI * (k1 + k2) as f64 / n as f64;
            let base = raster[index_of(k1, n) * n + index_of(k2, n)];
            spec[a * m + b] = base * Complex64::from_polar(amp, phase);
        }
    }
    engine.fine_fft.inverse(&mut spec);
    spec.into_iter().map(|v| v.re).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::IsotropicModuli;

    #[test]
    fn fft_round_trip() {
        let mut planner = FftPlanner::new();
        let fft = Fft2::new(&mut planner, 8);
        let orig: Vec<Complex64> = (0..64)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let mut data = orig.clone();
        fft.forward(&mut data);
        fft.inverse(&mut data);
        for (a, b) in data.iter().zip(orig.iter()) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn single_mode_coefficients() {
        let mut planner = FftPlanner::new();
        let fft = Fft2::new(&mut planner, 8);
        let m = 8;
        let (k1, k2) = (2i64, -3i64);
        let mut data = vec![Complex64::default(); m * m];
        for i in 0..m {
            for j in 0..m {
                let phase =
                    2.0 * std::f64::consts::PI * (k1 * i as i64 + k2 * j as i64) as f64 / m as f64;
                data[i * m + j] = Complex64::from_polar(1.0, phase);
            }
        }
        fft.forward(&mut data);
        for i in 0..m {
            for j in 0..m {
                let expect = if freq(i, m) == k1 && freq(j, m) == k2 {
                    1.0
                } else {
                    0.0
                };
                assert!((data[i * m + j] - expect).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn freq_tables() {
        assert_eq!(
            (0..8).map(|i| freq(i, 8)).collect::<Vec<_>>(),
            vec![0, 1, 2, 3, -4, -3, -2, -1]
        );
        assert_eq!(
            (0..5).map(|i| freq(i, 5)).collect::<Vec<_>>(),
            vec![0, 1, 2, -2, -1]
        );
        for k in -4..4 {
            assert_eq!(freq(index_of(k, 8), 8), k);
        }
        assert!(!is_active(-4, 8));
        assert!(is_active(3, 8));
        assert!(is_active(-2, 5));
    }

    #[test]
    fn chi_filtered_constant_and_mean() {
        let p = IsotropicModuli::new(1.0, 1.0);
        let micro = Microstructure::homogeneous(8, p);
        let engine = Engine::new(8);
        let chi = chi_filtered(&micro, &engine);
        assert!(chi.iter().all(|&c| (c - 1.0).abs() < 1e-13));

        let micro = Microstructure::laminate(8, 0.25, crate::micro::Axis::X1, p, p);
        let chi = chi_filtered(&micro, &engine);
        let mean: f64 = chi.iter().sum::<f64>() / chi.len() as f64;
        assert!((mean - 0.25).abs() < 1e-13);
    }

    /// Quadrature of χ_filtered against a bandlimited trig polynomial must
    /// reproduce the exact integral of the piecewise-constant χ against it.
    #[test]
    fn chi_filtered_exact_pairing() {
        let p = IsotropicModuli::new(1.0, 1.0);
        let n = 8usize;
        let micro = Microstructure::disk(n, 0.31, [0.4, 0.45], p, p).unwrap();
        let engine = Engine::new(n);
        let chi = chi_filtered(&micro, &engine);

        // Test mode frequencies within the product bandwidth of the solver.
        for (k1, k2) in [(0i64, 0i64), (1, 0), (3, -2), (-4, 4), (7, -8), (-8, -8)] {
            let m = engine.fine;
            // Quadrature of chi * cos / sin of the mode on the fine grid.
            let (mut qc, mut qs) = (0.0, 0.0);
            for i in 0..m {
                for j in 0..m {
                    let phase =
                        2.0 * std::f64::consts::PI * (k1 as f64 * i as f64 + k2 as f64 * j as f64)
                            / m as f64;
                    qc += chi[i * m + j] * phase.cos();
                    qs += chi[i * m + j] * phase.sin();
                }
            }
            qc /= (m * m) as f64;
            qs /= (m * m) as f64;

            // Exact integral over the phase-1 cells: product of 1D segment
            // integrals of e^{2πi k x}.
            let seg = |k: i64, c: usize| -> Complex64 {
                let h = 1.0 / n as f64;
                if k == 0 {
                    return Complex64::new(h, 0.0);
                }
                let w = 2.0 * std::f64::consts::PI * k as f64;
                let up = Complex64::from_polar(1.0, w * (c as f64 + 1.0) * h);
                let lo = Complex64::from_polar(1.0, w * c as f64 * h);
                (up - lo) / Complex64::new(0.0, w)
            };
            let mut exact = Complex64::default();
            for i in 0..n {
                for j in 0..n {
                    if micro.cells()[i * n + j] == 1 {
                        exact += seg(k1, i) * seg(k2, j);
                    }
                }
            }
            assert!(
                (qc - exact.re).abs() < 1e-12 && (qs - exact.im).abs() < 1e-12,
                "mode ({k1},{k2}): quadrature ({qc},{qs}) vs exact ({},{})",
                exact.re,
                exact.im
            );
        }
    }
}
