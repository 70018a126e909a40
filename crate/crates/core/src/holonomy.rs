//! Developing maps into ℂP¹, SL(2,ℂ) holonomy, the edge one-form α, its
//! primitive m on dual vertices, and the variation cocycle τ = hol(x).
//!
//! A cross ratio system is developed over the breadth-first dual spanning
//! tree of a fundamental domain: the root face is placed on a seed triple
//! and each further face adds one corner by the homogeneous fourth-point
//! formula ẑ_l = X·[ẑ_j,ẑ_k]·ẑ_i − [ẑ_k,ẑ_i]·ẑ_j.  Every non-tree edge
//! then carries a deck transformation ρ ∈ SL(2,ℂ) identifying the two
//! placements of its far face; vertex-cycle words in these generators must
//! close up to ±Id, which is the numerical shadow of Eqs. (1)–(2).
//!
//! A tangent vector x induces the sl(2,ℂ)-valued one-form of osculating
//! Möbius generators on directed edges,
//!
//! ```text
//!   α(i→j) = x_ij/(z_j−z_i) · [ (z_i+z_j)/2   −z_i·z_j  ]
//!                             [     1         −(z_i+z_j)/2 ]
//! ```
//!
//! which is closed around every vertex and equivariant, α∘γ = Adρ_γ(α).
//! Integrating α over the dual tree gives m per face (m(root) = 0), and
//! for the generator crossing half-edge h with left face A and right face
//! B the cocycle is
//!
//! ```text
//!   τ_γ = m(A) − α(h) − Adρ_γ(m(B)),
//! ```
//!
//! extended to words by τ_{γ₁γ₂} = τ_{γ₁} + Adρ_{γ₁}(τ_{γ₂}).  τ is the
//! logarithmic derivative ρ̇ρ⁻¹ of the holonomy along the deformation
//! X(t) = X·exp(t·x), which the tests confirm by finite differences.

use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::crossratio::CrossRatioSystem;
use crate::geometry::{
    cross_ratio_from_points, fourth_point, GeometryError, Mat2, Mobius, ProjPoint,
};
use crate::numeric::complex_least_squares;
use crate::surface::{FundamentalDomain, Triangulation};

/// Development is rejected when a vertex-cycle word strays further than
/// this from ±Id.
pub const DEFECT_TOL: f64 = 1e-6;

/// Closedness residual above which a one-form has no primitive.
pub const CLOSEDNESS_TOL: f64 = 1e-6;

/// Lower bound on |w₁|/max(|w₀|,|w₁|) for a corner to count as finite.
const FINITE_RATIO: f64 = 1e-8;

/// Minimal chordal separation of the corners within a developed face.
const SEPARATION_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum HolonomyError {
    #[error("degenerate layout at face {face}: {source}")]
    DegenerateLayout {
        face: usize,
        #[source]
        source: GeometryError,
    },
    #[error("corner {corner} develops too close to infinity (|w1|/|w| = {ratio:.2e})")]
    NonFiniteCorner { corner: usize, ratio: f64 },
    #[error("no seed gave a finite nondegenerate layout in {attempts} attempts")]
    SeedsExhausted { attempts: usize },
    #[error("vertex {vertex} cycle holonomy is {defect:.3e} from ±Id; layout inconsistent")]
    HolonomyInconsistent { vertex: usize, defect: f64 },
    #[error("expected {expected} edge values, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("one-form is not closed at vertex {vertex}: residual {residual:.3e}")]
    NotClosed { vertex: usize, residual: f64 },
}

/// A cross ratio system developed over one fundamental domain.
///
/// Corner positions live in the chart of their own face; faces glued along
/// dual-tree edges share corner positions exactly, and crossing a non-tree
/// half-edge h applies [`DevelopedPattern::rho_dir`] to pass from the chart
/// of `face(twin h)` to the chart of `face(h)`.
#[derive(Debug, Clone)]
pub struct DevelopedPattern {
    tri: Arc<Triangulation>,
    fd: FundamentalDomain,
    x_values: Vec<Complex64>,
    corner_z: Vec<ProjPoint>,
    corner_w: Vec<Complex64>,
    rho: Vec<Mobius>,
}

impl DevelopedPattern {
    pub fn triangulation(&self) -> &Arc<Triangulation> {
        &self.tri
    }

    pub fn fundamental_domain(&self) -> &FundamentalDomain {
        &self.fd
    }

    pub fn x_value(&self, e: usize) -> Complex64 {
        self.x_values[e]
    }

    pub fn x_values(&self) -> &[Complex64] {
        &self.x_values
    }

    /// Developed position of the origin corner of half-edge `h`.
    pub fn corner_point(&self, h: usize) -> ProjPoint {
        self.corner_z[h]
    }

    /// Affine developed position (finite by construction).
    pub fn corner_affine(&self, h: usize) -> Complex64 {
        self.corner_w[h]
    }

    /// Deck transformations, one per fundamental-domain generator.
    pub fn generator_rho(&self) -> &[Mobius] {
        &self.rho
    }

    /// Chart transition for crossing `h`: maps the chart of `face(twin h)`
    /// onto the chart of `face(h)`. Exactly the identity on tree edges.
    pub fn rho_dir(&self, h: usize) -> Mobius {
        let e = self.tri.edge_of(h);
        match self.fd.generator_of(e) {
            None => Mobius::identity(),
            Some(g) => {
                if self.fd.generators()[g].half_edge == h {
                    self.rho[g]
                } else {
                    self.rho[g].inverse()
                }
            }
        }
    }

    /// Holonomy of a signed generator letter (1-based; negative = inverse).
    pub fn rho_letter(&self, letter: i32) -> Mobius {
        let g = (letter.unsigned_abs() as usize) - 1;
        if letter > 0 {
            self.rho[g]
        } else {
            self.rho[g].inverse()
        }
    }

    /// Holonomy of a word of signed generator letters, first letter acting
    /// first along the walk (matrices composed left to right).
    pub fn word_holonomy(&self, letters: &[i32]) -> Mobius {
        letters.iter().fold(Mobius::identity(), |acc, &l| {
            acc.compose(&self.rho_letter(l))
        })
    }

    /// The four developed corners around edge `e` in the chart of its
    /// canonical half-edge: (z_i, z_j, z_k, z_l) with faces ijk and jil.
    pub fn edge_quadruple(&self, e: usize) -> [ProjPoint; 4] {
        let h = self.tri.edge_half_edges(e)[0];
        let t = self.tri.twin(h);
        [
            self.corner_z[h],
            self.corner_z[self.tri.next(h)],
            self.corner_z[self.tri.prev(h)],
            self.rho_dir(h).apply(&self.corner_z[self.tri.prev(t)]),
        ]
    }

    /// max over edges of |cross ratio of developed corners − X_e|.
    pub fn max_cross_ratio_error(&self) -> f64 {
        (0..self.tri.n_edges())
            .map(|e| {
                let [zi, zj, zk, zl] = self.edge_quadruple(e);
                match cross_ratio_from_points(&zi, &zj, &zk, &zl) {
                    Ok(x) => (x - self.x_values[e]).norm(),
                    Err(_) => f64::INFINITY,
                }
            })
            .fold(0.0, f64::max)
    }

    /// Walks clockwise around `v`, recording per-slot frames and letters.
    pub fn star_walk(&self, v: usize) -> StarWalk {
        let slots: Vec<usize> = self.tri.vertex_link(v).corners().to_vec();
        let mut frames = Vec::with_capacity(slots.len());
        let mut words = Vec::with_capacity(slots.len());
        let mut g = Mobius::identity();
        let mut w: Vec<i32> = Vec::new();
        for &s in &slots {
            frames.push(g);
            words.push(w.clone());
            g = g.compose(&self.rho_dir(s));
            if let Some(l) = self.fd.letter(&self.tri, s) {
                w.push(l);
            }
        }
        StarWalk {
            vertex: v,
            slots,
            frames,
            words,
            closure: g,
            closure_word: w,
        }
    }

    /// Distance of the vertex-cycle word of `v` from ±Id.
    pub fn vertex_cycle_defect(&self, v: usize) -> f64 {
        self.star_walk(v).closure.m.projective_distance_to_identity()
    }

    /// The largest vertex-cycle defect; for one-vertex triangulations this
    /// is the defect of the surface relator.
    pub fn max_vertex_cycle_defect(&self) -> f64 {
        (0..self.tri.n_vertices())
            .map(|v| self.vertex_cycle_defect(v))
            .fold(0.0, f64::max)
    }
}

/// The clockwise walk around one developed copy of a vertex.
///
/// `frames[m]` carries the chart of `face(slots[m])` into the chart of
/// `face(slots[0])`; the developed center `frames[m](corner(slots[m]))` is
/// constant along the walk by construction. `words[m]` is the generator
/// word accumulated before slot m, and `closure` is the vertex-cycle
/// holonomy (≈ ±Id on a consistent pattern).
#[derive(Debug, Clone)]
pub struct StarWalk {
    pub vertex: usize,
    pub slots: Vec<usize>,
    pub frames: Vec<Mobius>,
    pub words: Vec<Vec<i32>>,
    pub closure: Mobius,
    pub closure_word: Vec<i32>,
}

/// Develops `x` over the fundamental domain from an explicit seed for the
/// three corners of the root face.
pub fn develop(
    x: &CrossRatioSystem,
    fd: &FundamentalDomain,
    seed: &[ProjPoint; 3],
) -> Result<DevelopedPattern, HolonomyError> {
    develop_values(x.triangulation(), &x.x_values(), fd, seed)
}

/// Develops `x`, retrying a fixed list of seeds until every corner is
/// finite and well separated.
pub fn develop_auto(
    x: &CrossRatioSystem,
    fd: &FundamentalDomain,
) -> Result<DevelopedPattern, HolonomyError> {
    let values = x.x_values();
    let seeds = default_seeds();
    for seed in &seeds {
        match develop_values(x.triangulation(), &values, fd, seed) {
            Ok(dev) => return Ok(dev),
            Err(HolonomyError::NonFiniteCorner { .. })
            | Err(HolonomyError::DegenerateLayout { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(HolonomyError::SeedsExhausted { attempts: seeds.len() })
}

/// Re-develops along the deformation X_e(t) = X_e·exp(t·x_e), keeping the
/// fundamental domain and the seed of `base` fixed so holonomies are
/// directly comparable.
pub fn develop_perturbed(
    base: &DevelopedPattern,
    direction: &[Complex64],
    t: f64,
) -> Result<DevelopedPattern, HolonomyError> {
    if direction.len() != base.tri.n_edges() {
        return Err(HolonomyError::LengthMismatch {
            expected: base.tri.n_edges(),
            found: direction.len(),
        });
    }
    let values: Vec<Complex64> = base
        .x_values
        .iter()
        .zip(direction)
        .map(|(&x, &d)| x * (d * t).exp())
        .collect();
    let r = base.fd.root();
    let seed = [
        base.corner_z[3 * r],
        base.corner_z[3 * r + 1],
        base.corner_z[3 * r + 2],
    ];
    develop_values(&base.tri, &values, &base.fd, &seed)
}

/// Core propagation on raw X values (the deformed values in the
/// finite-difference checks are not Delaunay-range cross ratio systems).
pub fn develop_values(
    tri: &Arc<Triangulation>,
    x_values: &[Complex64],
    fd: &FundamentalDomain,
    seed: &[ProjPoint; 3],
) -> Result<DevelopedPattern, HolonomyError> {
    if x_values.len() != tri.n_edges() {
        return Err(HolonomyError::LengthMismatch {
            expected: tri.n_edges(),
            found: x_values.len(),
        });
    }
    let mut corner_z = vec![ProjPoint::infinity(); tri.n_half_edges()];
    let root = fd.root();
    for k in 0..3 {
        corner_z[3 * root + k] = seed[k].normalized();
    }
    check_face_separation(&corner_z, root)?;

    for &f in &fd.face_order()[1..] {
        let hc = fd
            .entry_half_edge(f)
            .expect("non-root faces have an entry half-edge");
        let hp = tri.twin(hc);
        let x = x_values[tri.edge_of(hc)];
        corner_z[hc] = corner_z[tri.next(hp)];
        corner_z[tri.next(hc)] = corner_z[hp];
        corner_z[tri.prev(hc)] = fourth_point(
            x,
            &corner_z[hp],
            &corner_z[tri.next(hp)],
            &corner_z[tri.prev(hp)],
        );
        check_face_separation(&corner_z, f)?;
    }

    let mut corner_w = vec![Complex64::new(0.0, 0.0); tri.n_half_edges()];
    for c in 0..tri.n_half_edges() {
        let p = corner_z[c].normalized();
        let ratio = p.w[1].norm() / p.w[0].norm().max(p.w[1].norm());
        if ratio < FINITE_RATIO {
            return Err(HolonomyError::NonFiniteCorner { corner: c, ratio });
        }
        corner_w[c] = p.w[0] / p.w[1];
    }

    let mut rho = Vec::with_capacity(fd.generators().len());
    for gen in fd.generators() {
        let h = gen.half_edge;
        let t = tri.twin(h);
        let x = x_values[tri.edge_of(h)];
        let far = fourth_point(x, &corner_z[h], &corner_z[tri.next(h)], &corner_z[tri.prev(h)]);
        let m = Mobius::from_three_points(
            [&corner_z[t], &corner_z[tri.next(t)], &corner_z[tri.prev(t)]],
            [&corner_z[tri.next(h)], &corner_z[h], &far],
        )
        .map_err(|source| HolonomyError::DegenerateLayout {
            face: tri.face(h),
            source,
        })?;
        rho.push(m);
    }

    let dev = DevelopedPattern {
        tri: tri.clone(),
        fd: fd.clone(),
        x_values: x_values.to_vec(),
        corner_z,
        corner_w,
        rho,
    };
    for v in 0..tri.n_vertices() {
        let defect = dev.vertex_cycle_defect(v);
        if defect > DEFECT_TOL {
            return Err(HolonomyError::HolonomyInconsistent { vertex: v, defect });
        }
    }
    Ok(dev)
}

fn check_face_separation(corner_z: &[ProjPoint], f: usize) -> Result<(), HolonomyError> {
    for (a, b) in [(0, 1), (1, 2), (2, 0)] {
        let d = corner_z[3 * f + a].chordal_distance(&corner_z[3 * f + b]);
        if d < SEPARATION_TOL {
            return Err(HolonomyError::DegenerateLayout {
                face: f,
                source: GeometryError::DegenerateQuadruple {
                    kind: "coincident corners",
                    num: d,
                    den: 1.0,
                },
            });
        }
    }
    Ok(())
}

/// Seed triples tried by [`develop_auto`]: the equilateral triple and a few
/// Möbius twists of it, enough to push all corners away from ∞.
fn default_seeds() -> Vec<[ProjPoint; 3]> {
    let tau = Complex64::from_polar(1.0, std::f64::consts::PI / 3.0);
    let base = [
        Complex64::new(0.0, 0.0),
        Complex64::new(1.0, 0.0),
        tau,
    ];
    let mut seeds = vec![[
        ProjPoint::from_affine(base[0]),
        ProjPoint::from_affine(base[1]),
        ProjPoint::from_affine(base[2]),
    ]];
    for c in [
        Complex64::new(0.37, 0.21),
        Complex64::new(-1.31, 0.73),
        Complex64::new(0.11, -1.57),
        Complex64::new(2.93, 0.41),
        Complex64::new(-0.62, -0.38),
    ] {
        // z ↦ 1/(z − c) keeps three finite seeds finite and relocates ∞.
        seeds.push([
            ProjPoint::from_affine(1.0 / (base[0] - c)),
            ProjPoint::from_affine(1.0 / (base[1] - c)),
            ProjPoint::from_affine(1.0 / (base[2] - c)),
        ]);
    }
    seeds
}

/// The osculating one-form α on half-edges, each value expressed in the
/// chart of its own face.
#[derive(Debug, Clone)]
pub struct EdgeOneForm {
    alpha: Vec<Mat2>,
}

impl EdgeOneForm {
    /// α of the directed edge origin(h) → dst(h), in face(h)'s chart.
    pub fn alpha(&self, h: usize) -> Mat2 {
        self.alpha[h]
    }

    /// max over vertices of ‖Σ_slots Ad_{frame}(α)‖_F, the discrete
    /// closedness Σ_j α(i→j) = 0 evaluated around one developed copy.
    pub fn closedness_residual(&self, dev: &DevelopedPattern) -> f64 {
        (0..dev.tri.n_vertices())
            .map(|v| {
                let walk = dev.star_walk(v);
                let mut sum = Mat2::zero();
                for (m, &s) in walk.slots.iter().enumerate() {
                    sum = sum + walk.frames[m].ad(&self.alpha[s]);
                }
                sum.frobenius_norm()
            })
            .fold(0.0, f64::max)
    }

    /// max over edges of ‖α(h) + Adρ_dir(h)(α(twin h))‖_F: equivariance
    /// across chart transitions (plain antisymmetry on tree edges).
    pub fn equivariance_residual(&self, dev: &DevelopedPattern) -> f64 {
        (0..dev.tri.n_edges())
            .map(|e| {
                let h = dev.tri.edge_half_edges(e)[0];
                let t = dev.tri.twin(h);
                let transported = dev.rho_dir(h).ad(&self.alpha[t]);
                (self.alpha[h] + transported).frobenius_norm()
            })
            .fold(0.0, f64::max)
    }
}

/// Builds α from a tangent field: α(i→j) = x_ij/(z_j−z_i)·N(z_i,z_j) with
/// the nilpotent-direction matrix N displayed in the module docs.
pub fn alpha_form(
    x_field: &[Complex64],
    dev: &DevelopedPattern,
) -> Result<EdgeOneForm, HolonomyError> {
    let tri = &dev.tri;
    if x_field.len() != tri.n_edges() {
        return Err(HolonomyError::LengthMismatch {
            expected: tri.n_edges(),
            found: x_field.len(),
        });
    }
    let alpha = (0..tri.n_half_edges())
        .map(|h| {
            let zi = dev.corner_w[h];
            let zj = dev.corner_w[tri.next(h)];
            let s = x_field[tri.edge_of(h)] / (zj - zi);
            let half_sum = (zi + zj) * 0.5;
            Mat2::new(s * half_sum, -s * zi * zj, s, -s * half_sum)
        })
        .collect();
    Ok(EdgeOneForm { alpha })
}

/// Integrates α over the dual spanning tree: m(root) = 0 and
/// m(left) − m(right) = α on every tree edge.
pub fn primitive_m(
    alpha: &EdgeOneForm,
    dev: &DevelopedPattern,
) -> Result<Vec<Mat2>, HolonomyError> {
    let closed = alpha.closedness_residual(dev);
    if closed > CLOSEDNESS_TOL {
        let vertex = (0..dev.tri.n_vertices())
            .max_by(|&a, &b| {
                let ra = single_vertex_closedness(alpha, dev, a);
                let rb = single_vertex_closedness(alpha, dev, b);
                ra.total_cmp(&rb)
            })
            .unwrap_or(0);
        return Err(HolonomyError::NotClosed { vertex, residual: closed });
    }
    let mut m = vec![Mat2::zero(); dev.tri.n_faces()];
    for &f in &dev.fd.face_order()[1..] {
        let hc = dev.fd.entry_half_edge(f).expect("non-root face");
        let hp = dev.tri.twin(hc);
        m[f] = m[dev.tri.face(hp)] - alpha.alpha(hp);
    }
    Ok(m)
}

fn single_vertex_closedness(alpha: &EdgeOneForm, dev: &DevelopedPattern, v: usize) -> f64 {
    let walk = dev.star_walk(v);
    let mut sum = Mat2::zero();
    for (m, &s) in walk.slots.iter().enumerate() {
        sum = sum + walk.frames[m].ad(&alpha.alpha(s));
    }
    sum.frobenius_norm()
}

/// The variation cocycle on the fundamental-domain generators.
#[derive(Debug, Clone)]
pub struct Cocycle {
    /// τ per generator, aligned with `FundamentalDomain::generators()`.
    pub tau: Vec<Mat2>,
}

impl Cocycle {
    /// τ of a signed generator letter: τ_{γ⁻¹} = −Adρ_{γ⁻¹}(τ_γ).
    pub fn letter_tau(&self, dev: &DevelopedPattern, letter: i32) -> Mat2 {
        let g = (letter.unsigned_abs() as usize) - 1;
        if letter > 0 {
            self.tau[g]
        } else {
            -dev.rho_letter(letter).ad(&self.tau[g])
        }
    }

    /// Extends (ρ, τ) along a word by the cocycle rule
    /// τ_{γ₁γ₂} = τ_{γ₁} + Adρ_{γ₁}(τ_{γ₂}).
    pub fn word_pair(&self, dev: &DevelopedPattern, letters: &[i32]) -> (Mobius, Mat2) {
        let mut g = Mobius::identity();
        let mut t = Mat2::zero();
        for &l in letters {
            t = t + g.ad(&self.letter_tau(dev, l));
            g = g.compose(&dev.rho_letter(l));
        }
        (g, t)
    }
}

/// The linear map hol: builds α and m from `x_field` and evaluates
/// τ_γ = m(A) − α(h) − Adρ_γ(m(B)) on each generator crossing h, with
/// A = face(h) and B = face(twin h).
pub fn hol(x_field: &[Complex64], dev: &DevelopedPattern) -> Result<Cocycle, HolonomyError> {
    let alpha = alpha_form(x_field, dev)?;
    let m = primitive_m(&alpha, dev)?;
    Ok(hol_from_parts(&alpha, &m, dev))
}

/// τ from precomputed parts; separate so tests can shift m by a constant.
pub fn hol_from_parts(alpha: &EdgeOneForm, m: &[Mat2], dev: &DevelopedPattern) -> Cocycle {
    let tau = dev
        .fd
        .generators()
        .iter()
        .enumerate()
        .map(|(g, gen)| {
            let h = gen.half_edge;
            let a = dev.tri.face(h);
            let b = dev.tri.face(dev.tri.twin(h));
            m[a] - alpha.alpha(h) - dev.rho[g].ad(&m[b])
        })
        .collect();
    Cocycle { tau }
}

/// Least-squares distance of τ to the coboundaries
/// τ_γ = τ₀ − Adρ_γ(τ₀), in the Frobenius norm stacked over generators;
/// returns the distance and the fitted τ₀.
pub fn coboundary_distance(tau: &Cocycle, dev: &DevelopedPattern) -> (f64, Mat2) {
    let basis = [
        Mat2::new(
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(-1.0, 0.0),
        ),
        Mat2::new(
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        ),
        Mat2::new(
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
        ),
    ];
    let mut rows = Vec::with_capacity(4 * tau.tau.len());
    let mut rhs = Vec::with_capacity(4 * tau.tau.len());
    for (g, t) in tau.tau.iter().enumerate() {
        let cols: Vec<Mat2> = basis
            .iter()
            .map(|e| *e - dev.rho[g].ad(e))
            .collect();
        for entry in 0..4 {
            let pick = |m: &Mat2| match entry {
                0 => m.a,
                1 => m.b,
                2 => m.c,
                _ => m.d,
            };
            rows.push(cols.iter().map(pick).collect());
            rhs.push(pick(t));
        }
    }
    let (sol, residual) = complex_least_squares(&rows, &rhs, 3);
    let fitted = basis[0].scale(sol[0]) + basis[1].scale(sol[1]) + basis[2].scale(sol[2]);
    (residual, fitted)
}

/// Central-difference derivative of the generator holonomies along
/// X(t) = X·exp(t·x): returns ρ̇ρ⁻¹ per generator, the quantity hol(x)
/// approximates to O(t²).
pub fn holonomy_derivative(
    base: &DevelopedPattern,
    direction: &[Complex64],
    t: f64,
) -> Result<Vec<Mat2>, HolonomyError> {
    let plus = develop_perturbed(base, direction, t)?;
    let minus = develop_perturbed(base, direction, -t)?;
    Ok(base
        .rho
        .iter()
        .enumerate()
        .map(|(g, r0)| {
            let rp = align_sign(&plus.rho[g], r0);
            let rm = align_sign(&minus.rho[g], r0);
            let diff = (rp.m - rm.m).scale(Complex64::new(1.0 / (2.0 * t), 0.0));
            diff * r0.inverse().m
        })
        .collect())
}

/// Chooses the SL(2,ℂ) lift of `m` closest to `reference` (PSL semantics).
fn align_sign(m: &Mobius, reference: &Mobius) -> Mobius {
    if (m.m - reference.m).frobenius_norm() <= (m.m + reference.m).frobenius_norm() {
        *m
    } else {
        Mobius { m: -m.m }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    use crate::patterns::{
        bolza_generators, example_bolza, example_flat_torus, example_hex_torus,
        example_octahedron,
    };
    use crate::surface::fundamental_domain;
    use crate::tangent::{a_field, h_apply, kernel_complex};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn dev_of(x: &CrossRatioSystem) -> DevelopedPattern {
        let fd = fundamental_domain(x.triangulation(), 0);
        develop_auto(x, &fd).expect("develops")
    }

    fn kernel_vectors(x: &CrossRatioSystem) -> Vec<Vec<Complex64>> {
        kernel_complex(x, 1e-9).basis
    }

    #[test]
    fn hex_torus_develops_to_the_equilateral_lattice() {
        let x = example_hex_torus();
        let fd = fundamental_domain(x.triangulation(), 0);
        let tau = Complex64::from_polar(1.0, std::f64::consts::PI / 3.0);
        let seed = [
            ProjPoint::from_affine(c(0.0, 0.0)),
            ProjPoint::from_affine(c(1.0, 0.0)),
            ProjPoint::from_affine(tau),
        ];
        let dev = develop(&x, &fd, &seed).unwrap();
        // Every developed corner lands on the triangular lattice ℤ + ℤτ.
        let lattice_defect = |w: Complex64| -> f64 {
            let q = w.im / tau.im;
            let p = w.re - q * tau.re;
            (p - p.round()).abs().max((q - q.round()).abs())
        };
        for h in 0..6 {
            let w = dev.corner_affine(h);
            assert!(lattice_defect(w) < 1e-12, "corner {h} off-lattice: {w}");
        }
        assert!(dev.corner_affine(0).norm() < 1e-14, "root corner pinned to the seed");
        // Both deck transformations are Euclidean translations: parabolic
        // fixing ∞, i.e. c = 0, a = d = ±1, b = ±(lattice vector).
        assert_eq!(dev.generator_rho().len(), 2);
        for (g, r) in dev.generator_rho().iter().enumerate() {
            assert!(r.m.c.norm() < 1e-12, "generator {g} not affine: c = {}", r.m.c);
            assert!((r.m.a - r.m.d).norm() < 1e-12, "generator {g} not a translation");
            let shift = r.m.b / r.m.d;
            eprintln!("hex generator {g}: translation by {shift}");
            assert!(shift.norm() > 0.5, "nontrivial translation");
            assert!(lattice_defect(shift) < 1e-12, "deck shift is a lattice vector");
        }
        assert!(dev.max_cross_ratio_error() < 1e-12);
        assert!(dev.max_vertex_cycle_defect() < 1e-12);
    }

    #[test]
    fn developed_quadruples_reproduce_x_on_all_examples() {
        for (name, x) in [
            ("hex torus", example_hex_torus()),
            ("flat torus 2", example_flat_torus(2)),
            ("flat torus 3", example_flat_torus(3)),
            ("octahedron", example_octahedron()),
            ("bolza", example_bolza()),
        ] {
            let dev = dev_of(&x);
            let cr = dev.max_cross_ratio_error();
            let defect = dev.max_vertex_cycle_defect();
            eprintln!("{name}: cross-ratio err={cr:.2e}, max vertex defect={defect:.2e}");
            assert!(cr < 1e-9, "{name}: cross ratio error {cr:.2e}");
            assert!(defect < 1e-8, "{name}: vertex defect {defect:.2e}");
        }
    }

    #[test]
    fn reseeding_conjugates_the_development() {
        let x = example_bolza();
        let fd = fundamental_domain(x.triangulation(), 0);
        let a = develop_auto(&x, &fd).unwrap();
        let g = Mobius::from_mat(Mat2::new(c(1.2, 0.3), c(-0.4, 0.1), c(0.2, -0.2), c(0.8, 0.0)))
            .unwrap();
        let r = fd.root();
        let seed2 = [
            g.apply(&a.corner_point(3 * r)),
            g.apply(&a.corner_point(3 * r + 1)),
            g.apply(&a.corner_point(3 * r + 2)),
        ];
        let b = develop(&x, &fd, &seed2).unwrap();
        assert!(b.max_cross_ratio_error() < 1e-9, "cross ratios are Möbius invariant");
        // Holonomies conjugate: ρ_b = ±g ρ_a g⁻¹.
        let mut max_rho = 0.0f64;
        for (ra, rb) in a.generator_rho().iter().zip(b.generator_rho()) {
            let conj = g.compose(ra).compose(&g.inverse());
            max_rho = max_rho.max(rb.projective_distance(&conj));
        }
        eprintln!("bolza reseed: max conjugation defect {max_rho:.2e}");
        assert!(max_rho < 1e-8);
        // And α conjugates entrywise for a kernel field.
        let x_field = &kernel_vectors(&x)[0];
        let aa = alpha_form(x_field, &a).unwrap();
        let ab = alpha_form(x_field, &b).unwrap();
        let mut max_alpha = 0.0f64;
        for h in 0..x.triangulation().n_half_edges() {
            let want = g.ad(&aa.alpha(h));
            max_alpha = max_alpha.max((ab.alpha(h) - want).frobenius_norm());
        }
        eprintln!("bolza reseed: max α conjugation defect {max_alpha:.2e}");
        assert!(max_alpha < 1e-9);
    }

    #[test]
    fn bolza_deck_transformations_match_the_octagon_pairings() {
        let x = example_bolza();
        let tri = x.triangulation();
        let fd = fundamental_domain(tri, 0);
        // Seed the root on its own chart corners so the development
        // reproduces the hyperbolic-octagon picture literally.
        let v = crate::patterns::bolza_corners();
        let seed = [
            ProjPoint::from_affine(v[0]),
            ProjPoint::from_affine(v[1]),
            ProjPoint::from_affine(v[2]),
        ];
        let dev = develop(&x, &fd, &seed).unwrap();

        // Chart transition for crossing h, built from the side pairings:
        // identity on the five fan diagonals, g_s across side s.
        let gens = bolza_generators();
        let side_of_half = |h: usize| -> Option<(usize, bool)> {
            match h {
                0 => Some((0, false)),
                10 => Some((0, true)),
                1 => Some((1, false)),
                13 => Some((1, true)),
                4 => Some((2, false)),
                16 => Some((2, true)),
                7 => Some((3, false)),
                17 => Some((3, true)),
                _ => None,
            }
        };
        let chart_cross = |h: usize| -> Mobius {
            match side_of_half(h) {
                None => Mobius::identity(),
                Some((s, inv)) => {
                    if inv {
                        gens[s].inverse()
                    } else {
                        gens[s]
                    }
                }
            }
        };
        // Frames per face along the dual tree.
        let mut frame = vec![Mobius::identity(); tri.n_faces()];
        for &f in &fd.face_order()[1..] {
            let hc = fd.entry_half_edge(f).unwrap();
            let hp = tri.twin(hc);
            frame[f] = frame[tri.face(hp)].compose(&chart_cross(hp));
        }
        // Every developed corner matches the frame applied to its chart
        // position (faces are the fan (v_0, v_{p+1}, v_{p+2})).
        let mut max_pos = 0.0f64;
        for f in 0..tri.n_faces() {
            let chart = [v[0], v[f + 1], v[f + 2]];
            for k in 0..3 {
                let want = frame[f].apply(&ProjPoint::from_affine(chart[k]));
                max_pos = max_pos.max(dev.corner_point(3 * f + k).chordal_distance(&want));
            }
        }
        eprintln!("bolza layout vs chart frames: max defect {max_pos:.2e}");
        assert!(max_pos < 1e-9);
        // Deck transformations are the corresponding side-pairing words,
        // and each lies in PSU(1,1) (preserves the unit disk).
        let j = Mat2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0));
        let mut max_rho = 0.0f64;
        for (g, gen) in fd.generators().iter().enumerate() {
            let h = gen.half_edge;
            let t = tri.twin(h);
            let want = frame[tri.face(h)]
                .compose(&chart_cross(h))
                .compose(&frame[tri.face(t)].inverse());
            let rho = dev.generator_rho()[g];
            max_rho = max_rho.max(rho.projective_distance(&want));
            let adj = Mat2::new(
                rho.m.a.conj(),
                rho.m.c.conj(),
                rho.m.b.conj(),
                rho.m.d.conj(),
            );
            let disk = (adj * j * rho.m - j).frobenius_norm();
            assert!(disk < 1e-8, "generator {g} leaves the unit disk: {disk:.2e}");
        }
        eprintln!("bolza deck vs side-pairing words: max defect {max_rho:.2e}");
        assert!(max_rho < 1e-8);
        assert!(dev.max_vertex_cycle_defect() < 1e-8, "genus-2 relator closes");
    }

    #[test]
    fn octahedron_holonomy_is_trivial() {
        let x = example_octahedron();
        let dev = dev_of(&x);
        assert_eq!(dev.generator_rho().len(), 5, "E − (F − 1) = 12 − 7");
        let mut max_defect = 0.0f64;
        for r in dev.generator_rho() {
            max_defect = max_defect.max(r.m.projective_distance_to_identity());
        }
        eprintln!("octahedron generators: max distance to ±Id = {max_defect:.2e}");
        assert!(max_defect < 1e-8, "sphere developing is globally consistent");
    }

    #[test]
    fn alpha_is_closed_and_equivariant_on_kernel_fields() {
        for (name, x) in [("hex torus", example_hex_torus()), ("bolza", example_bolza())] {
            let dev = dev_of(&x);
            let mut max_closed = 0.0f64;
            let mut max_equi = 0.0f64;
            for b in &kernel_vectors(&x) {
                let alpha = alpha_form(b, &dev).unwrap();
                max_closed = max_closed.max(alpha.closedness_residual(&dev));
                max_equi = max_equi.max(alpha.equivariance_residual(&dev));
            }
            eprintln!("{name}: closedness={max_closed:.2e} equivariance={max_equi:.2e}");
            assert!(max_closed < 1e-10, "{name}: {max_closed:.2e}");
            assert!(max_equi < 1e-10, "{name}: {max_equi:.2e}");
        }
        // The zero field gives the zero form.
        let x = example_hex_torus();
        let dev = dev_of(&x);
        let alpha = alpha_form(&[c(0.0, 0.0); 3], &dev).unwrap();
        for h in 0..6 {
            assert_eq!(alpha.alpha(h).frobenius_norm(), 0.0);
        }
    }

    #[test]
    fn primitive_recovers_alpha_and_is_path_independent() {
        // Tree edges recover α by construction; on the sphere the non-tree
        // edges must agree too (trivial holonomy, simply connected).
        let x = example_octahedron();
        let dev = dev_of(&x);
        let field = h_apply(x.triangulation(), &a_field(&x, 0).unwrap()).unwrap();
        let alpha = alpha_form(&field, &dev).unwrap();
        let m = primitive_m(&alpha, &dev).unwrap();
        let tri = x.triangulation();
        let mut max_tree = 0.0f64;
        let mut max_cotree = 0.0f64;
        for e in 0..tri.n_edges() {
            let h = tri.edge_half_edges(e)[0];
            let diff = m[tri.face(h)] - m[tri.face(tri.twin(h))] - alpha.alpha(h);
            if dev.fundamental_domain().is_tree_edge(e) {
                max_tree = max_tree.max(diff.frobenius_norm());
            } else {
                // Transport m across the pairing: ρ ≈ ±Id here, so the
                // plain difference already measures path independence.
                max_cotree = max_cotree.max(diff.frobenius_norm());
            }
        }
        eprintln!("octahedron m: tree residual={max_tree:.2e}, cotree={max_cotree:.2e}");
        assert!(max_tree < 1e-12);
        assert!(max_cotree < 1e-9, "closed α integrates path-independently");
    }

    #[test]
    fn primitive_rejects_non_closed_forms() {
        let x = example_bolza();
        let dev = dev_of(&x);
        let mut rng = StdRng::seed_from_u64(41);
        let field: Vec<Complex64> = (0..9)
            .map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let alpha = alpha_form(&field, &dev).unwrap();
        let err = primitive_m(&alpha, &dev).unwrap_err();
        assert!(matches!(err, HolonomyError::NotClosed { .. }), "{err}");
    }

    #[test]
    fn hol_is_linear_and_vanishes_at_zero() {
        let x = example_bolza();
        let dev = dev_of(&x);
        let zero = hol(&[c(0.0, 0.0); 9], &dev).unwrap();
        for t in &zero.tau {
            assert!(t.frobenius_norm() < 1e-14);
        }
        let basis = kernel_vectors(&x);
        let lambda = c(0.7, -0.4);
        let u = &basis[0];
        let v = &basis[1];
        let sum: Vec<Complex64> = u.iter().zip(v).map(|(&a, &b)| a + lambda * b).collect();
        let tu = hol(u, &dev).unwrap();
        let tv = hol(v, &dev).unwrap();
        let ts = hol(&sum, &dev).unwrap();
        let mut max_err = 0.0f64;
        for g in 0..tu.tau.len() {
            let want = tu.tau[g] + tv.tau[g].scale(lambda);
            max_err = max_err.max((ts.tau[g] - want).frobenius_norm());
        }
        eprintln!("hol linearity: max_err={max_err:.2e}");
        assert!(max_err < 1e-10);
    }

    #[test]
    fn vertex_star_words_carry_zero_cocycle() {
        // Around any vertex the crossing word is trivial in π₁, so its
        // holonomy is ±Id and its accumulated τ vanishes — this exercises
        // Eq. 7 together with the closedness of α.
        for (name, x) in [("hex torus", example_hex_torus()), ("bolza", example_bolza())] {
            let dev = dev_of(&x);
            let field = &kernel_vectors(&x)[0];
            let tau = hol(field, &dev).unwrap();
            let mut max_rho = 0.0f64;
            let mut max_tau = 0.0f64;
            for v in 0..x.triangulation().n_vertices() {
                let walk = dev.star_walk(v);
                let (g, t) = tau.word_pair(&dev, &walk.closure_word);
                max_rho = max_rho.max(g.m.projective_distance_to_identity());
                max_tau = max_tau.max(t.frobenius_norm());
            }
            eprintln!("{name}: star word ρ defect={max_rho:.2e}, τ defect={max_tau:.2e}");
            assert!(max_rho < 1e-8, "{name}");
            assert!(max_tau < 1e-9, "{name}");
        }
    }

    #[test]
    fn coboundary_distance_detects_exact_coboundaries() {
        let x = example_bolza();
        let dev = dev_of(&x);
        let mut rng = StdRng::seed_from_u64(47);
        let mut r = || c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        let a = r();
        let tau0 = Mat2::new(a, r(), r(), -a);
        let tau = Cocycle {
            tau: dev
                .generator_rho()
                .iter()
                .map(|rho| tau0 - rho.ad(&tau0))
                .collect(),
        };
        let (d, fitted) = coboundary_distance(&tau, &dev);
        eprintln!("exact coboundary distance: {d:.2e}");
        assert!(d < 1e-12);
        assert!((fitted - tau0).frobenius_norm() < 1e-9, "fit recovers τ₀");
        // The zero cocycle is a coboundary at distance 0.
        let zero = Cocycle { tau: vec![Mat2::zero(); dev.generator_rho().len()] };
        assert!(coboundary_distance(&zero, &dev).0 < 1e-13);
        // A kernel vector's class is typically far from the coboundaries.
        let t = hol(&kernel_vectors(&x)[0], &dev).unwrap();
        let (d, _) = coboundary_distance(&t, &dev);
        eprintln!("bolza kernel vector: coboundary distance {d:.3e} (reported)");
    }

    #[test]
    fn vertex_move_on_flat_torus_is_a_coboundary() {
        // Moving one vertex deforms the developing map but not the complex
        // projective structure: hol(x^(i)) must be trivial in cohomology.
        let x = example_flat_torus(2);
        let dev = dev_of(&x);
        let mut max_d = 0.0f64;
        for i in 0..4 {
            let field = h_apply(x.triangulation(), &a_field(&x, i).unwrap()).unwrap();
            let tau = hol(&field, &dev).unwrap();
            let (d, _) = coboundary_distance(&tau, &dev);
            max_d = max_d.max(d);
        }
        eprintln!("flat torus 2 vertex moves: max coboundary distance {max_d:.2e}");
        assert!(max_d < 1e-8);
    }

    #[test]
    fn rebasing_m_shifts_tau_by_a_coboundary() {
        let x = example_bolza();
        let dev = dev_of(&x);
        let field = &kernel_vectors(&x)[2];
        let alpha = alpha_form(field, &dev).unwrap();
        let m = primitive_m(&alpha, &dev).unwrap();
        let tau = hol_from_parts(&alpha, &m, &dev);
        let shift = Mat2::new(c(0.3, -0.1), c(0.2, 0.5), c(-0.7, 0.1), c(-0.3, 0.1));
        let shifted: Vec<Mat2> = m.iter().map(|&mm| mm + shift).collect();
        let tau2 = hol_from_parts(&alpha, &shifted, &dev);
        let delta = Cocycle {
            tau: tau2
                .tau
                .iter()
                .zip(&tau.tau)
                .map(|(&a, &b)| a - b)
                .collect(),
        };
        let (d, fitted) = coboundary_distance(&delta, &dev);
        eprintln!("m-rebase coboundary distance: {d:.2e}");
        assert!(d < 1e-12, "base-face change is a coboundary");
        assert!((fitted - shift).frobenius_norm() < 1e-9);
    }

    #[test]
    fn finite_difference_matches_hol() {
        for (name, x) in [("hex torus", example_hex_torus()), ("bolza", example_bolza())] {
            let dev = dev_of(&x);
            let mut max_err = 0.0f64;
            for b in kernel_vectors(&x).iter().take(3) {
                let tau = hol(b, &dev).unwrap();
                let numeric = holonomy_derivative(&dev, b, 1e-5).unwrap();
                for (g, num) in numeric.iter().enumerate() {
                    max_err = max_err.max((*num - tau.tau[g]).frobenius_norm());
                }
            }
            eprintln!("{name}: |finite-difference − hol| max_err={max_err:.2e}");
            assert!(max_err < 1e-4, "{name}: {max_err:.2e}");
        }
    }

    #[test]
    fn degenerate_seeds_and_bad_lengths_are_rejected() {
        let x = example_hex_torus();
        let fd = fundamental_domain(x.triangulation(), 0);
        let p = ProjPoint::from_affine(c(0.3, 0.0));
        let err = develop(&x, &fd, &[p, p, ProjPoint::from_affine(c(1.0, 0.0))]).unwrap_err();
        assert!(matches!(err, HolonomyError::DegenerateLayout { .. }), "{err}");
        let dev = dev_of(&x);
        let err = alpha_form(&[c(1.0, 0.0); 7], &dev).unwrap_err();
        assert!(matches!(err, HolonomyError::LengthMismatch { expected: 3, found: 7 }), "{err}");
    }
}
