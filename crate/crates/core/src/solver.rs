//! Fourier–Galerkin solver for the periodic cell problem.
//!
//! For a loading M the corrector v minimizes `∫ (M+∇v)·L(x)(M+∇v) dx` over
//! periodic zero-mean vector fields with all representable lattice
//! frequencies (the unpaired Nyquist line of even grids is excluded, its
//! spectral derivative does not exist on the lattice). The operator is
//! applied matrix-free: differentiate spectrally, transform to a
//! 2x-oversampled real grid, apply the coefficient field pointwise,
//! transform back and take the spectral divergence, so the discrete energy
//! is the exact Galerkin restriction of the continuous quadratic form.
//!
//! The conjugate-gradient solve is preconditioned by the exactly inverted
//! constant-coefficient operator of a very strongly elliptic isotropic
//! reference. The pointwise energy density may be indefinite (the matrix
//! phase can have negative bulk modulus), so dominating-reference splitting
//! schemes are unusable here; CG only needs global positive definiteness of
//! the assembled form. Loss of that positivity shows up as a non-positive
//! curvature direction and is reported as a first-class outcome.

use std::io::{Read, Write};
use std::path::Path;

use rustfft::num_complex::Complex64;
use serde::Serialize;

use crate::fft::{self, Engine, MaterialField};
use crate::micro::Microstructure;
use crate::tensor::{IsotropicModuli, Tensor4, SQRT_2};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Options for the corrector solves.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SolveOpts {
    /// Relative residual target for CG.
    pub tol: f64,
    /// Iteration cap; defaults to `10·n` when absent.
    pub max_iter: Option<usize>,
    /// Reference moduli for the preconditioner; defaults to
    /// `μ₀ = (μ₁+μ₂)/2`, `λ₀` such that `λ₀+μ₀ = max(K₁, μ₀)`.
    pub reference: Option<IsotropicModuli>,
}

impl Default for SolveOpts {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: None,
            reference: None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SolveError {
    /// CG met a direction of non-positive curvature: the discrete form is
    /// not positive definite at this resolution.
    #[error("non-positive curvature in CG at iteration {iteration} (loading {loading}): the periodic form is indefinite at this resolution")]
    Indefinite { loading: usize, iteration: usize },
    #[error("CG did not reach tol after {iterations} iterations (loading {loading}, residual {residual:.3e})")]
    MaxIter {
        loading: usize,
        iterations: usize,
        residual: f64,
    },
}

/// Periodic corrector stored by its Fourier coefficients on the n×n lattice.
///
/// Invariants: the mean coefficient is exactly zero and the spectrum is
/// Hermitian (`vhat(-k) = conj(vhat(k))`), so the field is real-valued.
#[derive(Debug, Clone)]
pub struct CorrectorField {
    n: usize,
    vhat: [Vec<Complex64>; 2],
}

impl CorrectorField {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            vhat: [
                vec![Complex64::default(); n * n],
                vec![Complex64::default(); n * n],
            ],
        }
    }

    /// Project real-space samples onto the corrector space (zero mean,
    /// active frequencies, Hermitian by construction).
    pub fn from_values(n: usize, values: [Vec<f64>; 2]) -> Self {
        assert!(values.iter().all(|v| v.len() == n * n));
        let engine = Engine::new(n);
        let mut vhat = [
            vec![Complex64::default(); n * n],
            vec![Complex64::default(); n * n],
        ];
        for (p, vals) in values.iter().enumerate() {
            let mut buf: Vec<Complex64> = vals.iter().map(|&x| Complex64::new(x, 0.0)).collect();
            engine.coarse_fft.forward(&mut buf);
            vhat[p] = buf;
        }
        let mut out = Self { n, vhat };
        out.project();
        out
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vhat(&self, component: usize) -> &[Complex64] {
        &self.vhat[component]
    }

    /// Real-space samples on the n×n grid.
    pub fn values(&self) -> [Vec<f64>; 2] {
        let engine = Engine::new(self.n);
        let mut out: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
        for p in 0..2 {
            let mut buf = self.vhat[p].clone();
            engine.coarse_fft.inverse(&mut buf);
            out[p] = buf.into_iter().map(|c| c.re).collect();
        }
        out
    }

    /// Dealiased gradient sampled on the 2n×2n grid.
    pub fn gradient_fine(&self) -> GradField {
        let engine = Engine::new(self.n);
        let m = engine.fine;
        let mut comps: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; m * m]);
        let mut pad = vec![Complex64::default(); m * m];
        let mut work = vec![Complex64::default(); m * m];
        for p in 0..2 {
            engine.pad(&self.vhat[p], &mut pad);
            for q in 0..2 {
                for a in 0..m {
                    let k1 = fft::freq(a, m) as f64;
                    for b in 0..m {
                        let k2 = fft::freq(b, m) as f64;
                        let kq = if q == 0 { k1 } else { k2 };
                        work[a * m + b] = pad[a * m + b] * Complex64::new(0.0, TWO_PI * kq);
                    }
                }
                engine.fine_fft.inverse(&mut work);
                for (dst, src) in comps[2 * p + q].iter_mut().zip(work.iter()) {
                    *dst = src.re;
                }
            }
        }
        GradField { res: m, comps }
    }

    /// Enforce the stored invariants exactly: zero mean, inactive
    /// frequencies dropped, Hermitian symmetry.
    fn project(&mut self) {
        let n = self.n;
        for p in 0..2 {
            let spec = &mut self.vhat[p];
            spec[0] = Complex64::default();
            for i in 0..n {
                let k1 = fft::freq(i, n);
                for j in 0..n {
                    let k2 = fft::freq(j, n);
                    if !(fft::is_active(k1, n) && fft::is_active(k2, n)) {
                        spec[i * n + j] = Complex64::default();
                    }
                }
            }
            for i in 0..n {
                for j in 0..n {
                    let mi = fft::index_of(-(fft::freq(i, n)), n);
                    let mj = fft::index_of(-(fft::freq(j, n)), n);
                    if mi * n + mj <= i * n + j {
                        continue;
                    }
                    let avg = 0.5 * (spec[i * n + j] + spec[mi * n + mj].conj());
                    spec[i * n + j] = avg;
                    spec[mi * n + mj] = avg.conj();
                }
            }
            // Self-paired frequencies must be real.
            for i in 0..n {
                for j in 0..n {
                    let mi = fft::index_of(-(fft::freq(i, n)), n);
                    let mj = fft::index_of(-(fft::freq(j, n)), n);
                    if mi == i && mj == j {
                        spec[i * n + j] = Complex64::new(spec[i * n + j].re, 0.0);
                    }
                }
            }
        }
    }

    const MAGIC: &'static [u8; 8] = b"HOMOG2DC";

    /// Binary dump: 8-byte magic, n as little-endian u64, then the
    /// real-space values row-major with the two components interleaved
    /// (little-endian f64).
    pub fn write_binary(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        out.write_all(Self::MAGIC)?;
        out.write_all(&(self.n as u64).to_le_bytes())?;
        let vals = self.values();
        for idx in 0..self.n * self.n {
            out.write_all(&vals[0][idx].to_le_bytes())?;
            out.write_all(&vals[1][idx].to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary(path: impl AsRef<Path>) -> std::io::Result<Self> {
        let mut file = std::io::BufReader::new(std::fs::File::open(path)?);
        let mut magic = [0u8; 8];
        file.read_exact(&mut magic)?;
        if &magic != Self::MAGIC {
            return Err(std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                "bad magic",
            ));
        }
        let mut word = [0u8; 8];
        file.read_exact(&mut word)?;
        let n = u64::from_le_bytes(word) as usize;
        let mut values: [Vec<f64>; 2] = [vec![0.0; n * n], vec![0.0; n * n]];
        for idx in 0..n * n {
            for comp in &mut values {
                file.read_exact(&mut word)?;
                comp[idx] = f64::from_le_bytes(word);
            }
        }
        Ok(Self::from_values(n, values))
    }
}

/// A 2x2-matrix field sampled on a square grid; `comps[2p+q]` holds
/// `G_pq = ∂v_p/∂x_q` for gradients.
#[derive(Debug, Clone)]
pub struct GradField {
    pub res: usize,
    pub comps: [Vec<f64>; 4],
}

impl GradField {
    pub fn at(&self, idx: usize) -> [[f64; 2]; 2] {
        [
            [self.comps[0][idx], self.comps[1][idx]],
            [self.comps[2][idx], self.comps[3][idx]],
        ]
    }
}

/// Solver diagnostics embedded in reports.
#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    pub cg_iterations: [usize; 3],
    pub final_relative_residual: f64,
    pub asymmetry_before_enforcement: f64,
    pub indefiniteness_detected: bool,
}

/// Homogenization result: the three correctors for the loading basis
/// {E11, E22, E12} and the assembled tensor.
#[derive(Debug, Clone, Serialize)]
pub struct CellSolution {
    pub lstar: Tensor4,
    pub theta: f64,
    pub diagnostics: Diagnostics,
    pub resolution: usize,
    #[serde(skip)]
    pub correctors: [CorrectorField; 3],
}

/// The loading basis used by [`homogenize`]: E11, E22 and the symmetric
/// shear E12 = (e1⊗e2 + e2⊗e1)/2.
pub const LOADING_BASIS: [[[f64; 2]; 2]; 3] = [
    [[1.0, 0.0], [0.0, 0.0]],
    [[0.0, 0.0], [0.0, 1.0]],
    [[0.0, 0.5], [0.5, 0.0]],
];

/// Matrix-free application of the heterogeneous elastic form, shared by the
/// cell solver (`q = 0`, Hermitian-symmetric spectra) and the quasi-periodic
/// Bloch forms (`q ≠ 0`, genuinely complex fields).
pub(crate) struct SpectralOperator<'a> {
    pub engine: &'a Engine,
    mat: &'a MaterialField,
    /// Quasi-momentum in reciprocal-lattice units.
    pub q: [f64; 2],
    pad: [Vec<Complex64>; 2],
    strain: [Vec<Complex64>; 3],
    shat: [Vec<Complex64>; 3],
}

impl<'a> SpectralOperator<'a> {
    pub fn new(engine: &'a Engine, mat: &'a MaterialField, q: [f64; 2]) -> Self {
        let f = engine.fine * engine.fine;
        Self {
            engine,
            mat,
            q,
            pad: std::array::from_fn(|_| vec![Complex64::default(); f]),
            strain: std::array::from_fn(|_| vec![Complex64::default(); f]),
            shat: std::array::from_fn(|_| vec![Complex64::default(); f]),
        }
    }

    /// Fill `self.strain` with the symmetric part of `loading + ∇v` on the
    /// fine grid (components e11, e22, e12).
    fn strain_fields(&mut self, v: Option<&[Vec<Complex64>; 2]>, loading: [[f64; 2]; 2]) {
        let m = self.engine.fine;
        match v {
            Some(v) => {
                self.engine.pad(&v[0], &mut self.pad[0]);
                self.engine.pad(&v[1], &mut self.pad[1]);
                for a in 0..m {
                    let kap1 = fft::freq(a, m) as f64 + self.q[0];
                    for b in 0..m {
                        let kap2 = fft::freq(b, m) as f64 + self.q[1];
                        let idx = a * m + b;
                        let v1 = self.pad[0][idx];
                        let v2 = self.pad[1][idx];
                        let d1 = Complex64::new(0.0, TWO_PI * kap1);
                        let d2 = Complex64::new(0.0, TWO_PI * kap2);
                        self.strain[0][idx] = d1 * v1;
                        self.strain[1][idx] = d2 * v2;
                        self.strain[2][idx] = 0.5 * (d2 * v1 + d1 * v2);
                    }
                }
                for s in &mut self.strain {
                    self.engine.fine_fft.inverse(s);
                }
            }
            None => {
                for s in &mut self.strain {
                    s.fill(Complex64::default());
                }
            }
        }
        let e = [
            loading[0][0],
            loading[1][1],
            0.5 * (loading[0][1] + loading[1][0]),
        ];
        for c in 0..3 {
            if e[c] != 0.0 {
                for v in self.strain[c].iter_mut() {
                    *v += e[c];
                }
            }
        }
    }

    /// Pointwise stress of the current strain through the coefficient field,
    /// written into `self.shat` as fine-grid values.
    fn stress_values(&mut self) {
        let f = self.engine.fine * self.engine.fine;
        for idx in 0..f {
            let lam = self.mat.lambda[idx];
            let mu = self.mat.mu[idx];
            let tr = self.strain[0][idx] + self.strain[1][idx];
            self.shat[0][idx] = lam * tr + 2.0 * mu * self.strain[0][idx];
            self.shat[1][idx] = lam * tr + 2.0 * mu * self.strain[1][idx];
            self.shat[2][idx] = 2.0 * mu * self.strain[2][idx];
        }
    }

    /// Spectral divergence of the stress restricted to the coarse lattice:
    /// `out_p(k) = -2πi Σ_q κ_q Ŝ_pq(k)`.
    fn divergence(&mut self, out: &mut [Vec<Complex64>; 2]) {
        let n = self.engine.n;
        let m = self.engine.fine;
        for s in &mut self.shat {
            self.engine.fine_fft.forward(s);
        }
        for i in 0..n {
            let k1 = fft::freq(i, n);
            for j in 0..n {
                let k2 = fft::freq(j, n);
                let idx = i * n + j;
                if !(fft::is_active(k1, n) && fft::is_active(k2, n)) {
                    out[0][idx] = Complex64::default();
                    out[1][idx] = Complex64::default();
                    continue;
                }
                let fidx = fft::index_of(k1, m) * m + fft::index_of(k2, m);
                let kap1 = k1 as f64 + self.q[0];
                let kap2 = k2 as f64 + self.q[1];
                let g1 = Complex64::new(0.0, -TWO_PI * kap1);
                let g2 = Complex64::new(0.0, -TWO_PI * kap2);
                out[0][idx] = g1 * self.shat[0][fidx] + g2 * self.shat[2][fidx];
                out[1][idx] = g1 * self.shat[2][fidx] + g2 * self.shat[1][fidx];
            }
        }
    }

    /// `out = A v` where `A` is the L²-representation of the quadratic form
    /// `v ↦ ∫ ∇v · L ∇v` (with the quasi-momentum shift when `q ≠ 0`).
    pub fn apply(&mut self, v: &[Vec<Complex64>; 2], out: &mut [Vec<Complex64>; 2]) {
        self.strain_fields(Some(v), [[0.0; 2]; 2]);
        self.stress_values();
        self.divergence(out);
    }

    /// Right-hand side of the stationarity system `A v = -Dᵀ(L M)`.
    pub fn rhs(&mut self, loading: [[f64; 2]; 2], out: &mut [Vec<Complex64>; 2]) {
        self.strain_fields(None, loading);
        self.stress_values();
        self.divergence(out);
        for comp in out.iter_mut() {
            for v in comp.iter_mut() {
                *v = -*v;
            }
        }
    }

    /// Exact quadrature of the energy `∫ (M+∇v)·L(M+∇v)` (Hermitian form
    /// for complex fields).
    pub fn energy(&mut self, v: Option<&[Vec<Complex64>; 2]>, loading: [[f64; 2]; 2]) -> f64 {
        self.strain_fields(v, loading);
        let f = self.engine.fine * self.engine.fine;
        let mut acc = 0.0;
        for idx in 0..f {
            let e11 = self.strain[0][idx];
            let e22 = self.strain[1][idx];
            let e12 = self.strain[2][idx];
            let tr = e11 + e22;
            acc += self.mat.lambda[idx] * tr.norm_sqr()
                + 2.0 * self.mat.mu[idx] * (e11.norm_sqr() + e22.norm_sqr() + 2.0 * e12.norm_sqr());
        }
        acc / f as f64
    }

    /// Inverse of the constant-coefficient reference operator per active
    /// frequency, shifted by `-sigma` times the gradient Gram form.
    pub fn preconditioner(&self, reference: IsotropicModuli, sigma: f64) -> Preconditioner {
        let n = self.engine.n;
        let mut blocks = vec![[0.0; 3]; n * n];
        for i in 0..n {
            let k1 = fft::freq(i, n);
            for j in 0..n {
                let k2 = fft::freq(j, n);
                let kap = [k1 as f64 + self.q[0], k2 as f64 + self.q[1]];
                let k2norm = kap[0] * kap[0] + kap[1] * kap[1];
                if !(fft::is_active(k1, n) && fft::is_active(k2, n)) || k2norm == 0.0 {
                    continue;
                }
                let a = TWO_PI * TWO_PI * (reference.mu - sigma) * k2norm;
                let c = TWO_PI * TWO_PI * (reference.lambda + reference.mu);
                let denom = a + c * k2norm;
                // (a I + c κκᵀ)⁻¹ = (1/a)(I - c κκᵀ / (a + c|κ|²))
                let f = c / (a * denom);
                blocks[i * n + j] = [
                    1.0 / a - f * kap[0] * kap[0],
                    -f * kap[0] * kap[1],
                    1.0 / a - f * kap[1] * kap[1],
                ];
            }
        }
        Preconditioner { n, blocks }
    }
}

/// Frequency-diagonal SPD preconditioner (2x2 block per lattice point).
pub(crate) struct Preconditioner {
    n: usize,
    blocks: Vec<[f64; 3]>,
}

impl Preconditioner {
    pub fn apply(&self, r: &[Vec<Complex64>; 2], out: &mut [Vec<Complex64>; 2]) {
        for idx in 0..self.n * self.n {
            let b = &self.blocks[idx];
            out[0][idx] = b[0] * r[0][idx] + b[1] * r[1][idx];
            out[1][idx] = b[1] * r[0][idx] + b[2] * r[1][idx];
        }
    }
}

/// Reference moduli for the preconditioner.
pub(crate) fn default_reference(m: &Microstructure) -> IsotropicModuli {
    let mut mu0 = 0.5 * (m.phase1.mu + m.phase2.mu);
    if mu0 <= 0.0 {
        mu0 = m.phase1.mu.abs().max(m.phase2.mu.abs()).max(1e-30);
    }
    let k0 = m.phase1.bulk_modulus().max(mu0);
    IsotropicModuli::new(k0 - mu0, mu0)
}

pub(crate) type Spectra = [Vec<Complex64>; 2];

/// Real part of the Hermitian inner product, i.e. the L² pairing of the
/// underlying fields.
pub(crate) fn dot(a: &Spectra, b: &Spectra) -> f64 {
    let mut acc = 0.0;
    for p in 0..2 {
        for (x, y) in a[p].iter().zip(b[p].iter()) {
            acc += x.re * y.re + x.im * y.im;
        }
    }
    acc
}

fn zeros(n: usize) -> Spectra {
    [
        vec![Complex64::default(); n * n],
        vec![Complex64::default(); n * n],
    ]
}

/// Preconditioned CG on `A x = b` for a matrix-free symmetric `apply`;
/// returns iterations and the final relative residual.
pub(crate) fn pcg<F>(
    mut apply: F,
    n: usize,
    precond: &Preconditioner,
    b: &Spectra,
    tol: f64,
    max_iter: usize,
    loading: usize,
) -> Result<(Spectra, usize, f64), SolveError>
where
    F: FnMut(&Spectra, &mut Spectra),
{
    let bnorm = dot(b, b).sqrt();
    let mut x = zeros(n);
    if bnorm == 0.0 {
        return Ok((x, 0, 0.0));
    }
    let mut r = b.clone();
    let mut z = zeros(n);
    precond.apply(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = zeros(n);
    for it in 0..max_iter {
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(SolveError::Indefinite {
                loading,
                iteration: it,
            });
        }
        let alpha = rz / pap;
        for c in 0..2 {
            for idx in 0..n * n {
                x[c][idx] += alpha * p[c][idx];
                r[c][idx] -= alpha * ap[c][idx];
            }
        }
        let res = dot(&r, &r).sqrt() / bnorm;
        if res <= tol {
            return Ok((x, it + 1, res));
        }
        precond.apply(&r, &mut z);
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for c in 0..2 {
            for idx in 0..n * n {
                p[c][idx] = z[c][idx] + beta * p[c][idx];
            }
        }
    }
    let res = dot(&r, &r).sqrt() / bnorm;
    Err(SolveError::MaxIter {
        loading,
        iterations: max_iter,
        residual: res,
    })
}

/// Minimize the cell energy for one loading.
pub fn solve_corrector(
    m: &Microstructure,
    loading: [[f64; 2]; 2],
    opts: &SolveOpts,
) -> Result<CorrectorField, SolveError> {
    assert!(opts.tol > 0.0);
    let engine = Engine::new(m.n());
    let mat = MaterialField::new(m, &engine);
    let mut op = SpectralOperator::new(&engine, &mat, [0.0, 0.0]);
    let reference = opts.reference.unwrap_or_else(|| default_reference(m));
    let precond = op.preconditioner(reference, 0.0);
    let max_iter = opts.max_iter.unwrap_or(10 * m.n());
    let mut b = zeros(m.n());
    op.rhs(loading, &mut b);
    let (x, _, _) = pcg(
        |v, out| op.apply(v, out),
        m.n(),
        &precond,
        &b,
        opts.tol,
        max_iter,
        0,
    )?;
    let mut field = CorrectorField { n: m.n(), vhat: x };
    field.project();
    Ok(field)
}

/// Solve the three basis correctors and assemble the homogenized tensor
/// from the energy bilinear form.
pub fn homogenize(m: &Microstructure, opts: &SolveOpts) -> Result<CellSolution, SolveError> {
    assert!(opts.tol > 0.0);
    let n = m.n();
    let engine = Engine::new(n);
    let mat = MaterialField::new(m, &engine);
    let mut op = SpectralOperator::new(&engine, &mat, [0.0, 0.0]);
    let reference = opts.reference.unwrap_or_else(|| default_reference(m));
    let precond = op.preconditioner(reference, 0.0);
    let max_iter = opts.max_iter.unwrap_or(10 * n);

    let mut correctors: Vec<CorrectorField> = Vec::with_capacity(3);
    let mut iterations = [0usize; 3];
    let mut worst_residual = 0.0f64;
    let mut b = zeros(n);
    for (li, loading) in LOADING_BASIS.iter().enumerate() {
        op.rhs(*loading, &mut b);
        let (x, iters, res) = pcg(
            |v, out| op.apply(v, out),
            n,
            &precond,
            &b,
            opts.tol,
            max_iter,
            li,
        )?;
        iterations[li] = iters;
        worst_residual = worst_residual.max(res);
        let mut field = CorrectorField { n, vhat: x };
        field.project();
        correctors.push(field);
    }

    // Strains and stresses of each corrector on the fine grid, real parts.
    let f = engine.fine * engine.fine;
    let mut strains: Vec<[Vec<f64>; 3]> = Vec::with_capacity(3);
    let mut stresses: Vec<[Vec<f64>; 3]> = Vec::with_capacity(3);
    for (li, corr) in correctors.iter().enumerate() {
        op.strain_fields(Some(&corr.vhat), LOADING_BASIS[li]);
        let e: [Vec<f64>; 3] = std::array::from_fn(|c| op.strain[c].iter().map(|v| v.re).collect());
        op.stress_values();
        let s: [Vec<f64>; 3] = std::array::from_fn(|c| op.shat[c].iter().map(|v| v.re).collect());
        strains.push(e);
        stresses.push(s);
    }

    let mut gram = [[0.0f64; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut acc = 0.0;
            for idx in 0..f {
                acc += strains[i][0][idx] * stresses[j][0][idx]
                    + strains[i][1][idx] * stresses[j][1][idx]
                    + 2.0 * strains[i][2][idx] * stresses[j][2][idx];
            }
            gram[i][j] = acc / f as f64;
        }
    }

    let scale = gram.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut asym = 0.0f64;
    for i in 0..3 {
        for j in (i + 1)..3 {
            asym = asym.max((gram[i][j] - gram[j][i]).abs());
        }
    }
    let asym_rel = if scale > 0.0 { asym / scale } else { 0.0 };

    // Mandel scaling: the shear basis vector is √2 E12.
    let s = [1.0, 1.0, SQRT_2];
    let mut mandel = [[0.0f64; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            mandel[i][j] = s[i] * s[j] * 0.5 * (gram[i][j] + gram[j][i]);
        }
    }

    Ok(CellSolution {
        lstar: Tensor4::from_mandel(mandel),
        theta: m.volume_fraction(),
        diagnostics: Diagnostics {
            cg_iterations: iterations,
            final_relative_residual: worst_residual,
            asymmetry_before_enforcement: asym_rel,
            indefiniteness_detected: false,
        },
        resolution: n,
        correctors: [
            correctors[0].clone(),
            correctors[1].clone(),
            correctors[2].clone(),
        ],
    })
}

/// Exact discrete quadrature of `∫ (M+∇v)·L(x)(M+∇v)` for a given corrector.
pub fn energy_of(m: &Microstructure, loading: [[f64; 2]; 2], v: &CorrectorField) -> f64 {
    assert_eq!(m.n(), v.n(), "corrector resolution must match the raster");
    let engine = Engine::new(m.n());
    let mat = MaterialField::new(m, &engine);
    let mut op = SpectralOperator::new(&engine, &mat, [0.0, 0.0]);
    op.energy(Some(&v.vhat), loading)
}
