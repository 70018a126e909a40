//! Cross-ratio systems on a triangulated surface and their vertex residuals.
//!
//! A cross-ratio system assigns X: E → ℂ∖{0} subject to two equations at
//! every vertex i, with the link neighbors j₁, …, j_r numbered *clockwise*
//! (loop edges contribute both of their slots):
//!
//! ```text
//!   (1)  X_{ij₁} X_{ij₂} ⋯ X_{ij_r} = 1
//!   (2)  X_{ij₁} + X_{ij₁}X_{ij₂} + ⋯ + X_{ij₁}⋯X_{ij_r} = 0
//! ```
//!
//! X is stored in polar pieces, X = exp(u + iΘ) with u = log|X| and
//! Θ = arg X ∈ [0, π), so that the solver for |X| never takes complex
//! logarithms of partial products: the modulus part of (1) is the linear
//! statement Σ_link u = 0.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::surface::{SurfaceError, Triangulation, TriangulationFile};

#[derive(Debug, Error)]
pub enum CrossRatioError {
    #[error("expected {expected} edge values, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("theta[{edge}] = {theta} lies outside the Delaunay range [0, π)")]
    ThetaOutOfRange { edge: usize, theta: f64 },
    #[error("cross ratio on edge {edge} has zero modulus")]
    ZeroCrossRatio { edge: usize },
    #[error(transparent)]
    Surface(#[from] SurfaceError),
}

/// An angle structure Θ: E → [0, π), the fixed argument data of a pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleStructure {
    tri: Arc<Triangulation>,
    theta: Vec<f64>,
}

impl AngleStructure {
    pub fn new(tri: Arc<Triangulation>, theta: Vec<f64>) -> Result<Self, CrossRatioError> {
        if theta.len() != tri.n_edges() {
            return Err(CrossRatioError::LengthMismatch {
                expected: tri.n_edges(),
                found: theta.len(),
            });
        }
        for (e, &t) in theta.iter().enumerate() {
            if !(0.0..std::f64::consts::PI).contains(&t) {
                return Err(CrossRatioError::ThetaOutOfRange { edge: e, theta: t });
            }
        }
        Ok(Self { tri, theta })
    }

    pub fn triangulation(&self) -> &Arc<Triangulation> {
        &self.tri
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Σ of Θ over the link of `v`, loop edges counted twice.
    pub fn link_sum(&self, v: usize) -> f64 {
        self.tri
            .vertex_link(v)
            .corners()
            .iter()
            .map(|&h| self.theta[self.tri.edge_of(h)])
            .sum()
    }
}

/// A cross-ratio system X = exp(u + iΘ) on the edges of a triangulation.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossRatioSystem {
    tri: Arc<Triangulation>,
    log_mag: Vec<f64>,
    theta: Vec<f64>,
}

impl CrossRatioSystem {
    pub fn new(
        tri: Arc<Triangulation>,
        log_mag: Vec<f64>,
        theta: Vec<f64>,
    ) -> Result<Self, CrossRatioError> {
        if log_mag.len() != tri.n_edges() {
            return Err(CrossRatioError::LengthMismatch {
                expected: tri.n_edges(),
                found: log_mag.len(),
            });
        }
        let angles = AngleStructure::new(tri, theta)?;
        Ok(Self {
            tri: angles.tri,
            log_mag,
            theta: angles.theta,
        })
    }

    /// Builds the polar storage from explicit cross-ratio values.
    ///
    /// Arguments are snapped to 0 when within 1e−9 below it (concyclic
    /// neighbors produce exact zeros up to rounding); arguments elsewhere
    /// outside [0, π) are rejected.
    pub fn from_x_values(
        tri: Arc<Triangulation>,
        xs: &[Complex64],
    ) -> Result<Self, CrossRatioError> {
        if xs.len() != tri.n_edges() {
            return Err(CrossRatioError::LengthMismatch {
                expected: tri.n_edges(),
                found: xs.len(),
            });
        }
        let mut log_mag = Vec::with_capacity(xs.len());
        let mut theta = Vec::with_capacity(xs.len());
        for (e, x) in xs.iter().enumerate() {
            if x.norm() == 0.0 {
                return Err(CrossRatioError::ZeroCrossRatio { edge: e });
            }
            log_mag.push(x.norm().ln());
            let mut arg = x.arg();
            if (-1e-9..0.0).contains(&arg) {
                arg = 0.0;
            }
            if !(0.0..std::f64::consts::PI).contains(&arg) {
                return Err(CrossRatioError::ThetaOutOfRange { edge: e, theta: arg });
            }
            theta.push(arg);
        }
        Self::new(tri, log_mag, theta)
    }

    pub fn triangulation(&self) -> &Arc<Triangulation> {
        &self.tri
    }

    pub fn log_mag(&self) -> &[f64] {
        &self.log_mag
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn angle_structure(&self) -> AngleStructure {
        AngleStructure {
            tri: self.tri.clone(),
            theta: self.theta.clone(),
        }
    }

    /// Replaces the moduli, keeping Θ bit-identical.
    pub fn with_log_mag(&self, log_mag: Vec<f64>) -> Result<Self, CrossRatioError> {
        Self::new(self.tri.clone(), log_mag, self.theta.clone())
    }

    /// X on edge `e`.
    pub fn x(&self, e: usize) -> Complex64 {
        Complex64::from_polar(self.log_mag[e].exp(), self.theta[e])
    }

    pub fn x_values(&self) -> Vec<Complex64> {
        (0..self.tri.n_edges()).map(|e| self.x(e)).collect()
    }

    /// X along the clockwise link slots of `v`.
    pub fn link_x(&self, v: usize) -> Vec<Complex64> {
        self.tri
            .vertex_link(v)
            .corners()
            .iter()
            .map(|&h| self.x(self.tri.edge_of(h)))
            .collect()
    }

    /// Left-hand side of Eq. (1) minus one: Π_link X − 1.
    pub fn product_residual(&self, v: usize) -> Complex64 {
        let mut p = Complex64::new(1.0, 0.0);
        for x in self.link_x(v) {
            p *= x;
        }
        p - Complex64::new(1.0, 0.0)
    }

    /// Left-hand side of Eq. (2): the telescoping sum of partial products
    /// along the clockwise link, starting at the canonical corner.
    pub fn sum_residual(&self, v: usize) -> Complex64 {
        self.sum_residual_rotated(v, 0)
    }

    /// Eq. (2) with the link start rotated forward by `shift` slots.
    ///
    /// When Eq. (1) holds the value transforms as S ↦ S / P_shift with
    /// P_shift the partial product over the skipped slots, so the zero set
    /// is rotation-invariant.
    pub fn sum_residual_rotated(&self, v: usize, shift: usize) -> Complex64 {
        let xs = self.link_x(v);
        let r = xs.len();
        let mut p = Complex64::new(1.0, 0.0);
        let mut s = Complex64::new(0.0, 0.0);
        for m in 0..r {
            p *= xs[(shift + m) % r];
            s += p;
        }
        s
    }

    /// max over vertices of |Eq. 1 residual| and |Eq. 2 residual|.
    pub fn max_residual(&self) -> f64 {
        (0..self.tri.n_vertices())
            .map(|v| self.product_residual(v).norm().max(self.sum_residual(v).norm()))
            .fold(0.0, f64::max)
    }
}

/// Serialized pattern: triangulation plus per-edge Θ and log|X|.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PatternFile {
    pub triangulation: TriangulationFile,
    pub theta: Vec<f64>,
    pub log_mag: Vec<f64>,
}

impl PatternFile {
    pub fn from_system(x: &CrossRatioSystem) -> Self {
        Self {
            triangulation: TriangulationFile::from_triangulation(x.triangulation()),
            theta: x.theta().to_vec(),
            log_mag: x.log_mag().to_vec(),
        }
    }

    pub fn build(&self) -> Result<CrossRatioSystem, CrossRatioError> {
        let tri = Arc::new(self.triangulation.build()?);
        CrossRatioSystem::new(tri, self.log_mag.clone(), self.theta.clone())
    }
}
