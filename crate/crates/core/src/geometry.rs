//! Projective points on ℂP¹, 2×2 complex matrices, Möbius transformations,
//! and the edge cross ratio.
//!
//! Points are stored homogeneously as [w₀ : w₁] with z = w₀/w₁, so ∞ is a
//! regular value and the four-point cross ratio
//!
//! ```text
//!     X = − [k,i][l,j] / ([i,l][j,k]),      [p,q] = p₀q₁ − p₁q₀
//! ```
//!
//! needs no case analysis. Affine coordinates are extracted only where a
//! formula demands them (the edge one-form), with explicit failure on points
//! at or near infinity.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    /// Point collisions drive the cross ratio to 0, ∞, or 0/0.
    #[error("degenerate quadruple: cross ratio is {kind} (|num| = {num:.3e}, |den| = {den:.3e})")]
    DegenerateQuadruple {
        kind: &'static str,
        num: f64,
        den: f64,
    },
    /// An affine coordinate was required for a point at infinity.
    #[error("point at infinity where an affine coordinate is required")]
    InfinitePoint,
    /// A matrix with vanishing determinant cannot be normalized to SL(2,ℂ).
    #[error("matrix determinant {det:.3e} is too small to normalize")]
    SingularMatrix { det: f64 },
}

/// A point of ℂP¹ in homogeneous coordinates [w₀ : w₁], z = w₀/w₁.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjPoint {
    pub w: [Complex64; 2],
}

impl ProjPoint {
    pub fn from_affine(z: Complex64) -> Self {
        Self {
            w: [z, Complex64::new(1.0, 0.0)],
        }
        .normalized()
    }

    pub fn infinity() -> Self {
        Self {
            w: [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        }
    }

    /// Scales the larger component to modulus 1 (projective representative).
    pub fn normalized(self) -> Self {
        let m = self.w[0].norm().max(self.w[1].norm());
        if m == 0.0 {
            return self;
        }
        Self {
            w: [self.w[0] / m, self.w[1] / m],
        }
    }

    /// Affine coordinate; fails within `1e-13` (relative) of infinity.
    pub fn affine(&self) -> Result<Complex64, GeometryError> {
        let scale = self.w[0].norm().max(self.w[1].norm());
        if self.w[1].norm() <= 1e-13 * scale {
            return Err(GeometryError::InfinitePoint);
        }
        Ok(self.w[0] / self.w[1])
    }

    /// Chordal distance on ℂP¹ (scale-invariant, 0 iff equal points).
    pub fn chordal_distance(&self, other: &Self) -> f64 {
        let num = bracket(self, other).norm();
        let na = (self.w[0].norm_sqr() + self.w[1].norm_sqr()).sqrt();
        let nb = (other.w[0].norm_sqr() + other.w[1].norm_sqr()).sqrt();
        num / (na * nb)
    }
}

/// The determinant bracket [p,q] = p₀q₁ − p₁q₀; zero iff p = q in ℂP¹.
pub fn bracket(p: &ProjPoint, q: &ProjPoint) -> Complex64 {
    p.w[0] * q.w[1] - p.w[1] * q.w[0]
}

/// Cross ratio of the four developed corners around an edge ij:
/// faces ijk (left of i→j) and jil (right), X = −(z_k−z_i)(z_l−z_j) /
/// ((z_i−z_l)(z_j−z_k)). Errors when collisions force X ∈ {0, ∞} or 0/0.
pub fn cross_ratio_from_points(
    zi: &ProjPoint,
    zj: &ProjPoint,
    zk: &ProjPoint,
    zl: &ProjPoint,
) -> Result<Complex64, GeometryError> {
    let (zi, zj, zk, zl) = (zi.normalized(), zj.normalized(), zk.normalized(), zl.normalized());
    let num = bracket(&zk, &zi) * bracket(&zl, &zj);
    let den = bracket(&zi, &zl) * bracket(&zj, &zk);
    let eps = 1e-26;
    match (num.norm_sqr() <= eps, den.norm_sqr() <= eps) {
        (true, true) => Err(GeometryError::DegenerateQuadruple {
            kind: "0/0",
            num: num.norm(),
            den: den.norm(),
        }),
        (true, false) => Err(GeometryError::DegenerateQuadruple {
            kind: "zero",
            num: num.norm(),
            den: den.norm(),
        }),
        (false, true) => Err(GeometryError::DegenerateQuadruple {
            kind: "infinite",
            num: num.norm(),
            den: den.norm(),
        }),
        (false, false) => Ok(-num / den),
    }
}

/// Given X and the developed points z_i, z_j, z_k of the left face ijk,
/// the fourth point z_l across the edge: ẑ_l = X·[ẑ_j,ẑ_k]·ẑ_i − [ẑ_k,ẑ_i]·ẑ_j.
pub fn fourth_point(x: Complex64, zi: &ProjPoint, zj: &ProjPoint, zk: &ProjPoint) -> ProjPoint {
    let a = x * bracket(zj, zk);
    let b = bracket(zk, zi);
    ProjPoint {
        w: [a * zi.w[0] - b * zj.w[0], a * zi.w[1] - b * zj.w[1]],
    }
    .normalized()
}

/// A 2×2 complex matrix; used both for SL(2,ℂ) elements and for sl(2,ℂ)
/// (traceless) values of the edge one-form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl Mat2 {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Self { a, b, c, d }
    }

    pub fn zero() -> Self {
        let z = Complex64::new(0.0, 0.0);
        Self::new(z, z, z, z)
    }

    pub fn identity() -> Self {
        let (o, z) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        Self::new(o, z, z, o)
    }

    pub fn trace(&self) -> Complex64 {
        self.a + self.d
    }

    pub fn det(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    pub fn frobenius_norm(&self) -> f64 {
        (self.a.norm_sqr() + self.b.norm_sqr() + self.c.norm_sqr() + self.d.norm_sqr()).sqrt()
    }

    /// min(‖M − I‖_F, ‖M + I‖_F): distance to the identity in PSL(2,ℂ) terms.
    pub fn projective_distance_to_identity(&self) -> f64 {
        let i = Mat2::identity();
        (*self - i).frobenius_norm().min((*self + i).frobenius_norm())
    }
}

impl std::ops::Add for Mat2 {
    type Output = Mat2;
    fn add(self, r: Mat2) -> Mat2 {
        Mat2::new(self.a + r.a, self.b + r.b, self.c + r.c, self.d + r.d)
    }
}

impl std::ops::Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, r: Mat2) -> Mat2 {
        Mat2::new(self.a - r.a, self.b - r.b, self.c - r.c, self.d - r.d)
    }
}

impl std::ops::Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl std::ops::Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, r: Mat2) -> Mat2 {
        Mat2::new(
            self.a * r.a + self.b * r.c,
            self.a * r.b + self.b * r.d,
            self.c * r.a + self.d * r.c,
            self.c * r.b + self.d * r.d,
        )
    }
}

/// A Möbius transformation as an SL(2,ℂ) matrix (det = 1; the lift sign is
/// not canonical, and all comparisons of holonomies are made up to ±).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mobius {
    pub m: Mat2,
}

impl Mobius {
    pub fn identity() -> Self {
        Self {
            m: Mat2::identity(),
        }
    }

    /// Normalizes a matrix to det 1; the square-root branch makes the sign
    /// of the result arbitrary.
    pub fn from_mat(m: Mat2) -> Result<Self, GeometryError> {
        let det = m.det();
        if det.norm() < 1e-24 {
            return Err(GeometryError::SingularMatrix { det: det.norm() });
        }
        Ok(Self {
            m: m.scale(Complex64::new(1.0, 0.0) / det.sqrt()),
        })
    }

    /// Exact inverse of a det-1 matrix: adjugate.
    pub fn inverse(&self) -> Self {
        Self {
            m: Mat2::new(self.m.d, -self.m.b, -self.m.c, self.m.a),
        }
    }

    pub fn compose(&self, r: &Mobius) -> Self {
        Self { m: self.m * r.m }
    }

    pub fn apply(&self, p: &ProjPoint) -> ProjPoint {
        ProjPoint {
            w: [
                self.m.a * p.w[0] + self.m.b * p.w[1],
                self.m.c * p.w[0] + self.m.d * p.w[1],
            ],
        }
        .normalized()
    }

    pub fn apply_affine(&self, z: Complex64) -> Result<Complex64, GeometryError> {
        self.apply(&ProjPoint::from_affine(z)).affine()
    }

    /// Derivative dγ/dz at an affine point: 1/(cz + d)² for det 1.
    pub fn derivative_at(&self, z: Complex64) -> Complex64 {
        let den = self.m.c * z + self.m.d;
        Complex64::new(1.0, 0.0) / (den * den)
    }

    /// Adjoint action on matrices: Ad_γ(A) = γ A γ⁻¹ (sign-independent).
    pub fn ad(&self, a: &Mat2) -> Mat2 {
        self.m * *a * self.inverse().m
    }

    /// The unique Möbius transformation sending three distinct points to
    /// three distinct points, via the standard maps through (0, 1, ∞).
    pub fn from_three_points(
        from: [&ProjPoint; 3],
        to: [&ProjPoint; 3],
    ) -> Result<Self, GeometryError> {
        let std_map = |p: [&ProjPoint; 3]| -> Mat2 {
            // rows chosen so that p₀ → 0, p₁ → 1, p₂ → ∞
            let b23 = bracket(p[1], p[2]);
            let b21 = bracket(p[1], p[0]);
            Mat2::new(
                b23 * p[0].w[1],
                -b23 * p[0].w[0],
                b21 * p[2].w[1],
                -b21 * p[2].w[0],
            )
        };
        let f = std_map(from);
        let t = std_map(to);
        let t_inv = Mat2::new(t.d, -t.b, -t.c, t.a).scale(Complex64::new(1.0, 0.0) / t.det());
        Mobius::from_mat(t_inv * f)
    }

    pub fn frobenius_distance(&self, other: &Mobius) -> f64 {
        (self.m - other.m).frobenius_norm()
    }

    /// Distance to ±other, the natural PSL(2,ℂ) comparison.
    pub fn projective_distance(&self, other: &Mobius) -> f64 {
        (self.m - other.m)
            .frobenius_norm()
            .min((self.m + other.m).frobenius_norm())
    }
}
