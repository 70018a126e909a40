//! Circle patterns on triangulated surfaces via complex cross ratios.
//!
//! A pattern assigns to every edge of a triangulated closed oriented surface
//! a cross ratio X ∈ ℂ∖{0}, the complex cross ratio of the four corners of
//! the two triangles sharing that edge in any developed position:
//!
//! ```text
//!     X_ij = − (z_k − z_i)(z_l − z_j) / ((z_i − z_l)(z_j − z_k))
//! ```
//!
//! for faces ijk and jil glued along ij. Around every vertex the X satisfy a
//! multiplicative closure equation and a telescoping sum equation; the pair
//! determines the pattern up to Möbius transformations. This crate provides:
//!
//! * [`surface`] — half-edge triangulations with loop and multiple edges,
//!   vertex links, dual spanning trees and fundamental domains;
//! * [`geometry`] — points of ℂP¹, Möbius transformations, 2×2 complex
//!   matrices, and the cross ratio of four points;
//! * [`numeric`] — SVD-based null spaces, ranks, and least-squares solves
//!   with explicit singular-value thresholds;
//! * [`crossratio`] — cross-ratio systems, vertex residuals, and the angle
//!   structures Θ;
//! * [`delaunay`] — the angle-sum Delaunay test over dual cycles;
//! * [`solver`] — Gauss–Newton iteration for |X| at fixed Θ;
//! * [`patterns`] — worked examples: flat tori, the octahedron, and the
//!   genus-2 Bolza pattern;
//! * [`tangent`] — the linearized spaces W^ℂ and W_X^ℂ, numerical kernels,
//!   minimum-norm lifts, vertex move fields, and the rigidity test;
//! * [`holonomy`] — developing maps into ℂP¹, the SL(2,ℂ) holonomy
//!   representation, the sl(2,ℂ)-valued edge one-form α, its primitive, and
//!   the tangent cocycles τ;
//! * [`forms`] — the Penner form ω_P^ℂ, the cellular cup-product form ω, and
//!   the Goldman form ω_G via boundary periods, together with the numerical
//!   comparison ω_G = ω = ½ ω_P^ℂ;
//! * [`report`] — a serializable summary of every check run on one pattern.
//!
//! All numerics are plain f64 at desk scale; kernels and least-squares
//! solves go through SVD with explicit singular-value thresholds.

pub mod crossratio;
pub mod delaunay;
pub mod geometry;
pub mod numeric;
pub mod patterns;
pub mod solver;
pub mod surface;
pub mod forms;
pub mod holonomy;
pub mod report;
pub mod tangent;

pub use crossratio::{AngleStructure, CrossRatioSystem};
pub use geometry::{cross_ratio_from_points, Mat2, Mobius, ProjPoint};
pub use surface::{FundamentalDomain, Triangulation, VertexLink};
