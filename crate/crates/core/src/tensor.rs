//! Fourth-order elasticity tensors in two dimensions.
//!
//! A stiffness tensor is a symmetric endomorphism of 2x2 symmetric matrices
//! and is stored as a symmetric 3x3 matrix in the orthonormal Mandel basis
//! `{e1⊗e1, e2⊗e2, (e1⊗e2+e2⊗e1)/√2}`, component order (11, 22, 12). The
//! √2 shear scaling preserves the Frobenius inner product, so eigenvalues,
//! norms and positive-semidefiniteness checks carry over to the matrix
//! representation with no weight bookkeeping.
//!
//! The tensor acts on full (non-symmetric) gradients by precomposition with
//! symmetrization: `energy(L, G) = sym(G) · L sym(G)`.

use serde::{Deserialize, Serialize};

use crate::linalg;

pub const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Lamé pair of an isotropic 2D stiffness. Both moduli may be negative;
/// the classification predicates tell the regimes apart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsotropicModuli {
    pub lambda: f64,
    pub mu: f64,
}

impl IsotropicModuli {
    pub fn new(lambda: f64, mu: f64) -> Self {
        Self { lambda, mu }
    }

    /// 2D bulk modulus `K = λ + μ`.
    pub fn bulk_modulus(&self) -> f64 {
        self.lambda + self.mu
    }

    /// Positive on all symmetric matrices: `μ > 0` and `K > 0`.
    pub fn is_very_strongly_elliptic(&self) -> bool {
        self.mu > 0.0 && self.bulk_modulus() > 0.0
    }

    /// Positive on rank-one matrices with a uniform margin:
    /// `μ > 0` and `λ + 2μ > 0`.
    pub fn is_strictly_strongly_elliptic(&self) -> bool {
        self.mu > 0.0 && self.lambda + 2.0 * self.mu > 0.0
    }
}

/// Fourth-order stiffness tensor, stored as its symmetric Mandel matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Tensor4Json", into = "Tensor4Json")]
pub struct Tensor4 {
    mandel: [[f64; 3]; 3],
}

/// JSON form: `{"mandel": [9 numbers, row-major]}`, component order
/// (11, 22, 12) with the √2 shear convention of the Mandel basis.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Tensor4Json {
    mandel: [f64; 9],
}

impl From<Tensor4> for Tensor4Json {
    fn from(t: Tensor4) -> Self {
        let m = &t.mandel;
        Tensor4Json {
            mandel: [
                m[0][0], m[0][1], m[0][2], m[1][0], m[1][1], m[1][2], m[2][0], m[2][1], m[2][2],
            ],
        }
    }
}

impl TryFrom<Tensor4Json> for Tensor4 {
    type Error = String;

    fn try_from(j: Tensor4Json) -> Result<Self, String> {
        let v = &j.mandel;
        if !v.iter().all(|x| x.is_finite()) {
            return Err("tensor entries must be finite".into());
        }
        let m = [[v[0], v[1], v[2]], [v[3], v[4], v[5]], [v[6], v[7], v[8]]];
        Ok(Tensor4::from_mandel(m))
    }
}

impl Tensor4 {
    /// Build from a Mandel matrix. The stored matrix is symmetrized exactly,
    /// so major symmetry is structural.
    pub fn from_mandel(m: [[f64; 3]; 3]) -> Self {
        let mut s = m;
        for i in 0..3 {
            for j in (i + 1)..3 {
                let v = 0.5 * (m[i][j] + m[j][i]);
                s[i][j] = v;
                s[j][i] = v;
            }
        }
        Self { mandel: s }
    }

    pub fn zero() -> Self {
        Self {
            mandel: [[0.0; 3]; 3],
        }
    }

    /// Isotropic stiffness `L_pqrs = λ δ_pq δ_rs + μ (δ_pr δ_qs + δ_ps δ_qr)`;
    /// in Mandel form `[[λ+2μ, λ, 0], [λ, λ+2μ, 0], [0, 0, 2μ]]`.
    pub fn isotropic(m: IsotropicModuli) -> Self {
        let (l, mu) = (m.lambda, m.mu);
        Self {
            mandel: [
                [l + 2.0 * mu, l, 0.0],
                [l, l + 2.0 * mu, 0.0],
                [0.0, 0.0, 2.0 * mu],
            ],
        }
    }

    pub fn from_lame(lambda: f64, mu: f64) -> Self {
        Self::isotropic(IsotropicModuli::new(lambda, mu))
    }

    pub fn mandel(&self) -> &[[f64; 3]; 3] {
        &self.mandel
    }

    /// Mandel vector of the symmetric part of a 2x2 matrix.
    fn sym_to_vec(g: [[f64; 2]; 2]) -> [f64; 3] {
        [g[0][0], g[1][1], SQRT_2 * 0.5 * (g[0][1] + g[1][0])]
    }

    fn vec_to_sym(v: [f64; 3]) -> [[f64; 2]; 2] {
        let s = v[2] / SQRT_2;
        [[v[0], s], [s, v[1]]]
    }

    /// Apply the tensor to the symmetric part of a gradient; the result is
    /// a symmetric 2x2 matrix (the stress of the strain `sym(g)`).
    pub fn apply(&self, g: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
        let v = Self::sym_to_vec(g);
        let mut out = [0.0; 3];
        for i in 0..3 {
            out[i] = self.mandel[i][0] * v[0] + self.mandel[i][1] * v[1] + self.mandel[i][2] * v[2];
        }
        Self::vec_to_sym(out)
    }

    /// Quadratic energy `sym(g) · L sym(g)`. For an isotropic tensor this is
    /// `λ (tr g)² + 2μ |sym g|²`; any skew part of `g` is annihilated.
    pub fn energy(&self, g: [[f64; 2]; 2]) -> f64 {
        let v = Self::sym_to_vec(g);
        let mut acc = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                acc += v[i] * self.mandel[i][j] * v[j];
            }
        }
        acc
    }

    /// Eigenvalues of the Mandel matrix, ascending. For an isotropic tensor
    /// they are `{2K, 2μ, 2μ}`.
    pub fn eigenvalues(&self) -> [f64; 3] {
        linalg::sym3_eigenvalues(&self.mandel)
    }

    /// True iff the smallest Mandel eigenvalue is `≥ -tol`, i.e. the tensor
    /// is non-negative as a quadratic form on all symmetric matrices.
    pub fn is_psd(&self, tol: f64) -> bool {
        self.eigenvalues()[0] >= -tol
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mandel
            .iter()
            .flatten()
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }

    /// Orthogonal projection onto the isotropic subspace:
    /// `K = (L1111 + L2222 + 2 L1122) / 4`, `μ = (tr mandel - 2K) / 4`,
    /// with the Frobenius distance to the projection as residual.
    pub fn project_isotropic(&self) -> IsotropicProjection {
        let m = &self.mandel;
        let bulk = (m[0][0] + m[1][1] + 2.0 * m[0][1]) / 4.0;
        let shear = (m[0][0] + m[1][1] + m[2][2] - 2.0 * bulk) / 4.0;
        let iso = Tensor4::from_lame(bulk - shear, shear);
        let residual = (*self - iso).frobenius_norm();
        IsotropicProjection {
            bulk_modulus: bulk,
            shear_modulus: shear,
            residual,
        }
    }

    /// Inverse as an endomorphism of symmetric matrices (Mandel matrix
    /// inverse); `None` when singular.
    pub fn inverse(&self) -> Option<Tensor4> {
        linalg::inv3(&self.mandel).map(Tensor4::from_mandel)
    }

    /// Push-forward under a rotation of the plane by `angle` radians:
    /// `(R ⊛ L)_pqrs = R_pa R_qb R_rc R_sd L_abcd`.
    pub fn rotated(&self, angle: f64) -> Tensor4 {
        let (s, c) = angle.sin_cos();
        // Columns are the Mandel vectors of R E_a R^T.
        let q = [
            [c * c, s * s, -SQRT_2 * c * s],
            [s * s, c * c, SQRT_2 * c * s],
            [SQRT_2 * c * s, -SQRT_2 * c * s, c * c - s * s],
        ];
        let mut tmp = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = 0.0;
                for k in 0..3 {
                    acc += self.mandel[i][k] * q[j][k];
                }
                tmp[i][j] = acc;
            }
        }
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = 0.0;
                for k in 0..3 {
                    acc += q[i][k] * tmp[k][j];
                }
                out[i][j] = acc;
            }
        }
        Tensor4::from_mandel(out)
    }

    /// Exact 90° rotation (the Mandel transform is a signed permutation).
    pub fn rotated90(&self) -> Tensor4 {
        let m = &self.mandel;
        Tensor4::from_mandel([
            [m[1][1], m[1][0], -m[1][2]],
            [m[0][1], m[0][0], -m[0][2]],
            [-m[2][1], -m[2][0], m[2][2]],
        ])
    }

    /// Global minimum of `sym(a⊗b) · L sym(a⊗b)` over unit vectors, with the
    /// minimizing pair and an ellipticity classification.
    ///
    /// The objective is scanned on a `grid_n × grid_n` angle grid over
    /// `[0,π)²` and polished by shrinking-step local descent. For isotropic
    /// input the closed form `min(μ, λ+2μ)` is used, cross-checked against
    /// the grid result.
    pub fn rank_one_min(&self, opts: &RankOneOpts) -> EllipticityReport {
        assert!(opts.grid_n >= 8, "rank_one_min needs grid_n >= 8");
        let scale = self.frobenius_norm();

        let f = |theta: f64, phi: f64| -> f64 {
            let a = [theta.cos(), theta.sin()];
            let b = [phi.cos(), phi.sin()];
            self.energy(outer(a, b))
        };

        // Exhaustive bracket of the global minimum.
        let step = std::f64::consts::PI / opts.grid_n as f64;
        let (mut bt, mut bp, mut bv) = (0.0, 0.0, f(0.0, 0.0));
        for i in 0..opts.grid_n {
            let t = i as f64 * step;
            for j in 0..opts.grid_n {
                let p = j as f64 * step;
                let v = f(t, p);
                if v < bv {
                    bv = v;
                    bt = t;
                    bp = p;
                }
            }
        }

        // Pattern descent; the value error shrinks like the squared step.
        let mut h = step;
        while h > 1e-9 {
            let mut moved = false;
            for (dt, dp) in [
                (h, 0.0),
                (-h, 0.0),
                (0.0, h),
                (0.0, -h),
                (h, h),
                (h, -h),
                (-h, h),
                (-h, -h),
            ] {
                let v = f(bt + dt, bp + dp);
                if v < bv {
                    bv = v;
                    bt += dt;
                    bp += dp;
                    moved = true;
                }
            }
            if !moved {
                h *= 0.5;
            }
        }

        let mut min_value = bv;
        let mut argmin = RankOnePair::from_angles(bt, bp);

        // Closed form for isotropic tensors: min(μ, λ+2μ), attained at
        // a ⟂ b resp. a ∥ b.
        let proj = self.project_isotropic();
        if proj.residual <= 1e-10 * scale.max(1.0) {
            let shear = proj.shear_modulus;
            let normal = proj.bulk_modulus + proj.shear_modulus; // λ + 2μ
            let (closed, pair) = if shear <= normal {
                (
                    shear,
                    RankOnePair::from_angles(0.0, std::f64::consts::FRAC_PI_2),
                )
            } else {
                (normal, RankOnePair::from_angles(0.0, 0.0))
            };
            if closed < bv
                || (closed - bv).abs() <= (100.0 * opts.refine_tol).max(1e-8 * scale.max(1.0))
            {
                min_value = closed;
                argmin = pair;
            }
        }

        EllipticityReport {
            min_value,
            argmin,
            classification: classify(min_value, scale, opts.degeneracy_rel_tol),
        }
    }
}

fn outer(a: [f64; 2], b: [f64; 2]) -> [[f64; 2]; 2] {
    [[a[0] * b[0], a[0] * b[1]], [a[1] * b[0], a[1] * b[1]]]
}

impl std::ops::Add for Tensor4 {
    type Output = Tensor4;
    fn add(self, rhs: Tensor4) -> Tensor4 {
        let mut m = self.mandel;
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += rhs.mandel[i][j];
            }
        }
        Tensor4 { mandel: m }
    }
}

impl std::ops::Sub for Tensor4 {
    type Output = Tensor4;
    fn sub(self, rhs: Tensor4) -> Tensor4 {
        let mut m = self.mandel;
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] -= rhs.mandel[i][j];
            }
        }
        Tensor4 { mandel: m }
    }
}

impl std::ops::Mul<f64> for Tensor4 {
    type Output = Tensor4;
    fn mul(self, rhs: f64) -> Tensor4 {
        let mut m = self.mandel;
        for row in m.iter_mut() {
            for v in row.iter_mut() {
                *v *= rhs;
            }
        }
        Tensor4 { mandel: m }
    }
}

/// Pair of unit vectors spanning a symmetrized rank-one matrix `sym(a⊗b)`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RankOnePair {
    pub a: [f64; 2],
    pub b: [f64; 2],
}

impl RankOnePair {
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        Self {
            a: [theta.cos(), theta.sin()],
            b: [phi.cos(), phi.sin()],
        }
    }

    pub fn angles(&self) -> (f64, f64) {
        (self.a[1].atan2(self.a[0]), self.b[1].atan2(self.b[0]))
    }
}

/// Outcome of the rank-one scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ellipticity {
    StrictlyStronglyElliptic,
    Degenerate,
    NotStronglyElliptic,
}

/// Minimum of the rank-one quadratic form with its minimizer.
///
/// The classification is a pure function of `min_value`, the tensor's
/// Frobenius norm, and the relative degeneracy tolerance.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EllipticityReport {
    pub min_value: f64,
    pub argmin: RankOnePair,
    pub classification: Ellipticity,
}

pub(crate) fn classify(min_value: f64, frobenius: f64, rel_tol: f64) -> Ellipticity {
    let threshold = rel_tol * frobenius.max(f64::MIN_POSITIVE);
    if min_value > threshold {
        Ellipticity::StrictlyStronglyElliptic
    } else if min_value < -threshold {
        Ellipticity::NotStronglyElliptic
    } else {
        Ellipticity::Degenerate
    }
}

/// Options for [`Tensor4::rank_one_min`].
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RankOneOpts {
    pub grid_n: usize,
    pub refine_tol: f64,
    /// Relative scale below which the minimum counts as degenerate.
    pub degeneracy_rel_tol: f64,
}

impl Default for RankOneOpts {
    fn default() -> Self {
        Self {
            grid_n: 360,
            refine_tol: 1e-10,
            degeneracy_rel_tol: 1e-7,
        }
    }
}

/// Result of [`Tensor4::project_isotropic`].
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct IsotropicProjection {
    pub bulk_modulus: f64,
    pub shear_modulus: f64,
    pub residual: f64,
}

impl IsotropicProjection {
    pub fn moduli(&self) -> IsotropicModuli {
        IsotropicModuli::new(self.bulk_modulus - self.shear_modulus, self.shear_modulus)
    }
}
