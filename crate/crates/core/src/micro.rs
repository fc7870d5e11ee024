//! Periodic two-phase microstructures on the unit torus.
//!
//! The characteristic function χ of the inclusion (phase 1) is stored as a
//! cell-centered raster on an n×n grid of `[0,1)²`; index arithmetic wraps
//! modulo n, so the torus topology is implicit. Cell `(i, j)` covers
//! `[i/n, (i+1)/n) × [j/n, (j+1)/n)` and its center sits at
//! `((i+0.5)/n, (j+0.5)/n)`.
//!
//! Rasters approximate the open Lipschitz inclusions of the continuum
//! setting; no attempt is made to certify boundary regularity, refinement
//! is the accuracy mechanism.

use std::collections::VecDeque;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::tensor::IsotropicModuli;

/// Relative tolerance for the codimension-one equality clause
/// `μ₁ = -(λ₂+μ₂)` of the admissible-phase conditions.
pub const EQ_CLAUSE_REL_TOL: f64 = 1e-12;

/// Axis index for laminate normals; serialized as the number 1 or 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X1,
    X2,
}

impl Serialize for Axis {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_u8(match self {
            Axis::X1 => 1,
            Axis::X2 => 2,
        })
    }
}

impl<'de> Deserialize<'de> for Axis {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        match u8::deserialize(deserializer)? {
            1 => Ok(Axis::X1),
            2 => Ok(Axis::X2),
            other => Err(serde::de::Error::custom(format!(
                "normal_axis must be 1 or 2, got {other}"
            ))),
        }
    }
}

/// Two-phase raster on the unit torus with the phase moduli.
#[derive(Debug, Clone, PartialEq)]
pub struct Microstructure {
    n: usize,
    chi: Vec<u8>,
    pub phase1: IsotropicModuli,
    pub phase2: IsotropicModuli,
}

#[derive(Debug, thiserror::Error)]
pub enum GeometryError {
    #[error("disk radius {0} outside (0, 0.5); matrix connectivity is jeopardized")]
    BadRadius(f64),
}

#[derive(Debug, thiserror::Error)]
pub enum RasterError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed PGM header: {0}")]
    Header(String),
    #[error("only square images are supported, got {width}x{height}")]
    NotSquare { width: usize, height: usize },
    #[error("ambiguous phase: pixel value {value} is neither 0 nor maxval {maxval}")]
    AmbiguousPhase { value: u32, maxval: u32 },
}

impl Microstructure {
    fn from_chi(n: usize, chi: Vec<u8>, phase1: IsotropicModuli, phase2: IsotropicModuli) -> Self {
        assert!(n >= 1 && chi.len() == n * n);
        debug_assert!(chi.iter().all(|&c| c <= 1));
        Self {
            n,
            chi,
            phase1,
            phase2,
        }
    }

    /// Single-phase raster (χ ≡ 1 with both phases equal).
    pub fn homogeneous(n: usize, m: IsotropicModuli) -> Self {
        Self::from_chi(n, vec![1; n * n], m, m)
    }

    /// Slab of phase 1 of width `round(theta·n)/n` perpendicular to
    /// `normal_axis` (rounding half away from zero); the attained volume
    /// fraction may differ from `theta` by at most `1/(2n)`.
    pub fn laminate(
        n: usize,
        theta: f64,
        normal_axis: Axis,
        phase1: IsotropicModuli,
        phase2: IsotropicModuli,
    ) -> Self {
        assert!(n >= 2, "laminate needs n >= 2");
        assert!((0.0..=1.0).contains(&theta), "theta must lie in [0, 1]");
        let width = (theta * n as f64).round() as usize; // round half away from zero
        let mut chi = vec![0u8; n * n];
        for i in 0..n {
            for j in 0..n {
                let along = match normal_axis {
                    Axis::X1 => i,
                    Axis::X2 => j,
                };
                if along < width {
                    chi[i * n + j] = 1;
                }
            }
        }
        Self::from_chi(n, chi, phase1, phase2)
    }

    /// Disk inclusion: cell is phase 1 iff the torus distance from its
    /// center to `center` is below `radius`. Radii `≥ 0.5` are rejected.
    pub fn disk(
        n: usize,
        radius: f64,
        center: [f64; 2],
        phase1: IsotropicModuli,
        phase2: IsotropicModuli,
    ) -> Result<Self, GeometryError> {
        if !(radius > 0.0 && radius < 0.5) {
            return Err(GeometryError::BadRadius(radius));
        }
        assert!(n >= 1);
        let mut chi = vec![0u8; n * n];
        for i in 0..n {
            for j in 0..n {
                let x = [(i as f64 + 0.5) / n as f64, (j as f64 + 0.5) / n as f64];
                if torus_distance(x, center) < radius {
                    chi[i * n + j] = 1;
                }
            }
        }
        Ok(Self::from_chi(n, chi, phase1, phase2))
    }

    /// Build from an arbitrary 0/1 raster (row-major over the first axis).
    pub fn from_cells(
        n: usize,
        chi: Vec<u8>,
        phase1: IsotropicModuli,
        phase2: IsotropicModuli,
    ) -> Self {
        assert!(chi.iter().all(|&c| c <= 1), "cells must be 0 or 1");
        Self::from_chi(n, chi, phase1, phase2)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cells(&self) -> &[u8] {
        &self.chi
    }

    /// χ at cell `(i, j)`, indices wrapping modulo n.
    pub fn chi(&self, i: isize, j: isize) -> u8 {
        let n = self.n as isize;
        let i = i.rem_euclid(n) as usize;
        let j = j.rem_euclid(n) as usize;
        self.chi[i * self.n + j]
    }

    /// Volume fraction θ of phase 1.
    pub fn volume_fraction(&self) -> f64 {
        self.chi.iter().map(|&c| c as u64).sum::<u64>() as f64 / (self.n * self.n) as f64
    }

    /// Same continuous coefficient field at `factor`-times the resolution
    /// (cell subdivision).
    pub fn refine(&self, factor: usize) -> Self {
        assert!(factor >= 1);
        let m = self.n * factor;
        let mut chi = vec![0u8; m * m];
        for i in 0..m {
            for j in 0..m {
                chi[i * m + j] = self.chi[(i / factor) * self.n + (j / factor)];
            }
        }
        Self::from_chi(m, chi, self.phase1, self.phase2)
    }

    /// Cyclic shift of the raster by whole cells.
    pub fn shifted(&self, di: isize, dj: isize) -> Self {
        let n = self.n;
        let mut chi = vec![0u8; n * n];
        for i in 0..n {
            for j in 0..n {
                chi[i * n + j] = self.chi(i as isize - di, j as isize - dj);
            }
        }
        Self::from_chi(n, chi, self.phase1, self.phase2)
    }

    /// Rotate the raster field by 90° counter-clockwise: χ'(x) = χ(R⁻¹x),
    /// an exact permutation of cells.
    pub fn rotated90(&self) -> Self {
        let n = self.n;
        let mut chi = vec![0u8; n * n];
        for i in 0..n {
            for j in 0..n {
                chi[i * n + j] = self.chi[j * n + (n - 1 - i)];
            }
        }
        Self::from_chi(n, chi, self.phase1, self.phase2)
    }

    /// Arithmetic-mean stiffness `θ L¹ + (1-θ) L²`.
    pub fn mean_tensor(&self) -> crate::tensor::Tensor4 {
        let theta = self.volume_fraction();
        crate::tensor::Tensor4::isotropic(self.phase1) * theta
            + crate::tensor::Tensor4::isotropic(self.phase2) * (1.0 - theta)
    }

    /// Evaluate the phase conditions on the moduli and the matrix
    /// connectivity of `{χ = 0}` (4-adjacency with periodic wrap).
    pub fn check_admissibility(&self) -> AdmissibilityReport {
        let clauses = Eq3Clauses::check(self.phase1, self.phase2);
        AdmissibilityReport {
            cond_eq3: clauses.all(),
            clauses,
            matrix_connected: self.matrix_connected(),
            volume_fraction: self.volume_fraction(),
        }
    }

    /// Breadth-first search over `{χ = 0}` cells; true iff they form one
    /// 4-connected component on the torus (vacuously true when empty).
    pub fn matrix_connected(&self) -> bool {
        let n = self.n as isize;
        let total = self.chi.iter().filter(|&&c| c == 0).count();
        if total == 0 {
            return true;
        }
        let seed = self.chi.iter().position(|&c| c == 0).unwrap();
        let mut seen = vec![false; self.chi.len()];
        seen[seed] = true;
        let mut queue = VecDeque::from([(seed / self.n, seed % self.n)]);
        let mut count = 1usize;
        while let Some((i, j)) = queue.pop_front() {
            for (di, dj) in [(1isize, 0isize), (-1, 0), (0, 1), (0, -1)] {
                let ni = (i as isize + di).rem_euclid(n) as usize;
                let nj = (j as isize + dj).rem_euclid(n) as usize;
                let idx = ni * self.n + nj;
                if !seen[idx] && self.chi[idx] == 0 {
                    seen[idx] = true;
                    count += 1;
                    queue.push_back((ni, nj));
                }
            }
        }
        count == total
    }

    /// Read a PGM (P2 or P5) raster; pixel 0 maps to phase 2, pixel = maxval
    /// to phase 1, anything else is an error. Square images only.
    pub fn from_pgm(
        path: impl AsRef<Path>,
        phase1: IsotropicModuli,
        phase2: IsotropicModuli,
    ) -> Result<Self, RasterError> {
        let bytes = std::fs::read(path)?;
        // Header tokens are parsed bytewise so that binary P5 data starting
        // right after the single whitespace following maxval stays intact.
        fn next_token(bytes: &[u8], pos: &mut usize) -> Result<String, RasterError> {
            loop {
                while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
                    *pos += 1;
                }
                if *pos < bytes.len() && bytes[*pos] == b'#' {
                    while *pos < bytes.len() && bytes[*pos] != b'\n' {
                        *pos += 1;
                    }
                    continue;
                }
                break;
            }
            let start = *pos;
            while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
            if start == *pos {
                return Err(RasterError::Header("unexpected end of file".into()));
            }
            String::from_utf8(bytes[start..*pos].to_vec())
                .map_err(|_| RasterError::Header("non-ascii header token".into()))
        }
        let parse = |s: &str| -> Result<usize, RasterError> {
            s.parse()
                .map_err(|_| RasterError::Header(format!("bad integer '{s}'")))
        };

        let mut pos = 0usize;
        let magic = next_token(&bytes, &mut pos)?;
        if magic != "P2" && magic != "P5" {
            return Err(RasterError::Header(format!("unsupported magic '{magic}'")));
        }
        let width = parse(&next_token(&bytes, &mut pos)?)?;
        let height = parse(&next_token(&bytes, &mut pos)?)?;
        let maxval = parse(&next_token(&bytes, &mut pos)?)? as u32;
        if !(1..=65535).contains(&maxval) {
            return Err(RasterError::Header(format!("maxval {maxval} out of range")));
        }
        if width != height {
            return Err(RasterError::NotSquare { width, height });
        }
        let n = width;
        let mut pixels = Vec::with_capacity(n * n);
        if magic == "P2" {
            for _ in 0..n * n {
                pixels.push(parse(&next_token(&bytes, &mut pos)?)? as u32);
            }
        } else {
            // Exactly one whitespace byte separates maxval from the data.
            pos += 1;
            let per_px = if maxval > 255 { 2 } else { 1 };
            let data = &bytes[pos.min(bytes.len())..];
            if data.len() < n * n * per_px {
                return Err(RasterError::Header("truncated P5 pixel data".into()));
            }
            for k in 0..n * n {
                let v = if per_px == 1 {
                    data[k] as u32
                } else {
                    u32::from(data[2 * k]) << 8 | u32::from(data[2 * k + 1])
                };
                pixels.push(v);
            }
        }
        let mut chi = Vec::with_capacity(n * n);
        for &v in &pixels {
            chi.push(match v {
                0 => 0u8,
                v if v == maxval => 1u8,
                v => return Err(RasterError::AmbiguousPhase { value: v, maxval }),
            });
        }
        Ok(Self::from_chi(n, chi, phase1, phase2))
    }

    /// Write the raster as binary PGM (P5, maxval 255): phase 1 ↦ 255,
    /// phase 2 ↦ 0.
    pub fn to_pgm(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        write!(out, "P5\n{} {}\n255\n", self.n, self.n)?;
        let bytes: Vec<u8> = self
            .chi
            .iter()
            .map(|&c| if c == 1 { 255 } else { 0 })
            .collect();
        out.write_all(&bytes)?;
        Ok(())
    }
}

fn torus_distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    let mut acc = 0.0;
    for d in 0..2 {
        let raw = (a[d] - b[d]).rem_euclid(1.0);
        let dist = raw.min(1.0 - raw);
        acc += dist * dist;
    }
    acc.sqrt()
}

/// Per-clause breakdown of the admissible-phase conditions
/// `0 < μ₁ = -(λ₂+μ₂) < μ₂` and `K₁ > 0`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Eq3Clauses {
    pub mu1_positive: bool,
    /// `μ₁ = -(λ₂+μ₂)` to relative tolerance [`EQ_CLAUSE_REL_TOL`].
    pub shear_bulk_equality: bool,
    pub mu1_below_mu2: bool,
    pub k1_positive: bool,
}

impl Eq3Clauses {
    pub fn check(phase1: IsotropicModuli, phase2: IsotropicModuli) -> Self {
        let k2 = phase2.bulk_modulus();
        let scale = phase1.mu.abs().max(k2.abs());
        Self {
            mu1_positive: phase1.mu > 0.0,
            shear_bulk_equality: (phase1.mu + k2).abs() <= EQ_CLAUSE_REL_TOL * scale,
            mu1_below_mu2: phase1.mu < phase2.mu,
            k1_positive: phase1.bulk_modulus() > 0.0,
        }
    }

    pub fn all(&self) -> bool {
        self.mu1_positive && self.shear_bulk_equality && self.mu1_below_mu2 && self.k1_positive
    }
}

/// Result of [`Microstructure::check_admissibility`].
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub cond_eq3: bool,
    pub clauses: Eq3Clauses,
    pub matrix_connected: bool,
    pub volume_fraction: f64,
}

impl AdmissibilityReport {
    pub fn admissible(&self) -> bool {
        self.cond_eq3 && self.matrix_connected
    }

    /// Human-readable names of the failing clauses.
    pub fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.clauses.mu1_positive {
            out.push("mu1 > 0");
        }
        if !self.clauses.shear_bulk_equality {
            out.push("mu1 = -(lambda2 + mu2)");
        }
        if !self.clauses.mu1_below_mu2 {
            out.push("mu1 < mu2");
        }
        if !self.clauses.k1_positive {
            out.push("K1 > 0");
        }
        if !self.matrix_connected {
            out.push("matrix phase connected");
        }
        out
    }
}

/// JSON descriptor for building a microstructure:
/// `{"n", "generator": {...}, "phase1": {"lambda","mu"}, "phase2": {...}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MicrostructureSpec {
    pub n: usize,
    pub generator: Generator,
    pub phase1: IsotropicModuli,
    pub phase2: IsotropicModuli,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Generator {
    Laminate { theta: f64, normal_axis: Axis },
    Disk { radius: f64, center: [f64; 2] },
    Raster { path: String },
}

#[derive(Debug, thiserror::Error)]
pub enum BuildError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Raster(#[from] RasterError),
    #[error("raster resolution {got} does not match requested n = {want}")]
    ResolutionMismatch { got: usize, want: usize },
    #[error("invalid parameter: {0}")]
    Invalid(String),
}

impl MicrostructureSpec {
    pub fn build(&self) -> Result<Microstructure, BuildError> {
        if self.n < 2 {
            return Err(BuildError::Invalid(format!("n = {} too small", self.n)));
        }
        match &self.generator {
            Generator::Laminate { theta, normal_axis } => {
                if !(0.0..=1.0).contains(theta) {
                    return Err(BuildError::Invalid(format!(
                        "theta = {theta} outside [0, 1]"
                    )));
                }
                Ok(Microstructure::laminate(
                    self.n,
                    *theta,
                    *normal_axis,
                    self.phase1,
                    self.phase2,
                ))
            }
            Generator::Disk { radius, center } => Ok(Microstructure::disk(
                self.n,
                *radius,
                *center,
                self.phase1,
                self.phase2,
            )?),
            Generator::Raster { path } => {
                let m = Microstructure::from_pgm(path, self.phase1, self.phase2)?;
                if m.n() != self.n {
                    return Err(BuildError::ResolutionMismatch {
                        got: m.n(),
                        want: self.n,
                    });
                }
                Ok(m)
            }
        }
    }
}
