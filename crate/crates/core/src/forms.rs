//! The three bilinear forms on tangent vectors: the Penner face sum ω̃_P
//! and its descent ω_P^ℂ, the cellular cup-product form ω, and Goldman's
//! form ω_G evaluated by boundary periods.
//!
//! The Penner form acts on lifted edge data a, ã ∈ ℂ^E:
//!
//! ```text
//!   ω̃_P(a, ã) = −2 Σ_{ijk∈F} [ a_ij(ã_jk − ã_ki) + a_jk(ã_ki − ã_ij)
//!                              + a_ki(ã_ij − ã_jk) ]
//!              = 2 Σ_E a·x̃ = −2 Σ_E ã·x        (x = h(a), x̃ = h(ã)),
//! ```
//!
//! and ω_P^ℂ(x, x̃) := ω̃_P(lift x, lift x̃) is lift-independent.
//!
//! The cup form lives on the dual cell complex: the 2-cell around vertex i
//! is a polygon whose oriented sides carry the one-form α, triangulated by
//! a fan with diagonals extended by the zero-boundary-sum rule, each
//! triangle contributing
//!
//! ```text
//!   α∪α̃(φ) = (1/6)[α(e₁)α̃(e₂) + α(e₂)α̃(e₃) + α(e₃)α̃(e₁)]
//!           − (1/6)[α(e₁)α̃(e₃) + α(e₂)α̃(e₁) + α(e₃)α̃(e₂)],
//! ```
//!
//! and ω(x, x̃) = Σ_cells tr(α∪α̃).  Goldman's form is the same quantity
//! collapsed onto the boundary of the fundamental domain: the two star
//! traversals of each edge are deck-related by a word γ, matched pairs
//! cancel exactly, and each unmatched pair contributes
//! −tr(τ_γ·Ad ρ_γ(α̃-side)), consuming only the cocycle τ = hol(x) and the
//! boundary combinatorics.  On kernel vectors the three agree:
//! ω_G = ω = ½·ω_P^ℂ, real on W_X^ℝ.

use num_complex::Complex64;
use thiserror::Error;

use crate::crossratio::CrossRatioSystem;
use crate::geometry::Mat2;
use crate::holonomy::{alpha_form, hol, DevelopedPattern, EdgeOneForm, HolonomyError, StarWalk};
use crate::numeric::real_rank;
use crate::surface::Triangulation;
use crate::tangent::{kernel_complex, kernel_real, lift, TangentError};

#[derive(Debug, Error)]
pub enum FormsError {
    #[error("degenerate pair: {which} coincide")]
    DegeneratePair { which: &'static str },
    #[error("expected {expected} edge values, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("theorem identity violated: max discrepancy {max_discrepancy:.3e} > tol {tol:.1e}")]
    TheoremViolation { max_discrepancy: f64, tol: f64 },
    #[error(transparent)]
    Tangent(#[from] TangentError),
    #[error(transparent)]
    Holonomy(#[from] HolonomyError),
}

/// The Penner face sum ω̃_P(a, ã) on lifted edge data.
pub fn penner_tilde(
    tri: &Triangulation,
    a: &[Complex64],
    at: &[Complex64],
) -> Result<Complex64, FormsError> {
    for v in [a, at] {
        if v.len() != tri.n_edges() {
            return Err(FormsError::LengthMismatch {
                expected: tri.n_edges(),
                found: v.len(),
            });
        }
    }
    let mut sum = Complex64::new(0.0, 0.0);
    for f in 0..tri.n_faces() {
        let e = [
            tri.edge_of(3 * f),
            tri.edge_of(3 * f + 1),
            tri.edge_of(3 * f + 2),
        ];
        for r in 0..3 {
            sum += a[e[r]] * (at[e[(r + 1) % 3]] - at[e[(r + 2) % 3]]);
        }
    }
    Ok(-2.0 * sum)
}

/// ω_P^ℂ(x, x̃) = ω̃_P(lift x, lift x̃); independent of the lifts because
/// ω̃_P(a, ã) = 2Σ a·h(ã).
pub fn omega_p(
    tri: &Triangulation,
    x: &[Complex64],
    xt: &[Complex64],
) -> Result<Complex64, FormsError> {
    let a = lift(tri, x)?;
    let at = lift(tri, xt)?;
    penner_tilde(tri, &a, &at)
}

/// The osculating sl(2,ℂ) matrix N(z_i, z_j) of the trace lemma (the α
/// matrix of a unit tangent value).
pub fn osculating_matrix(zi: Complex64, zj: Complex64) -> Result<Mat2, FormsError> {
    let d = zj - zi;
    if d.norm() < 1e-14 * zi.norm().max(zj.norm()).max(1.0) {
        return Err(FormsError::DegeneratePair { which: "z_i, z_j" });
    }
    let s = Complex64::new(1.0, 0.0) / d;
    let half_sum = (zi + zj) * 0.5;
    Ok(Mat2::new(s * half_sum, -s * zi * zj, s, -s * half_sum))
}

/// Both sides of the trace lemma: lhs = tr(N(z_i,z_j)·N(z_k,z_l)) by
/// literal matrix multiplication, rhs the closed form
/// ½ − (z_i−z_k)(z_j−z_l)/((z_i−z_j)(z_k−z_l)).
pub fn trace_pair(
    zi: Complex64,
    zj: Complex64,
    zk: Complex64,
    zl: Complex64,
) -> Result<(Complex64, Complex64), FormsError> {
    let n1 = osculating_matrix(zi, zj)?;
    let n2 = osculating_matrix(zk, zl).map_err(|_| FormsError::DegeneratePair {
        which: "z_k, z_l",
    })?;
    let lhs = (n1 * n2).trace();
    let rhs = Complex64::new(0.5, 0.0) - (zi - zk) * (zj - zl) / ((zi - zj) * (zk - zl));
    Ok((lhs, rhs))
}

/// Oriented boundary sides of the dual 2-cell around `v`, assembled in the
/// star chart of its canonical corner.
///
/// The surface orientation runs the cell boundary against the star walk,
/// so corner j is the face of slot r−j (mod r) and the side leaving it
/// crosses the spoke of slot m = r−1−j carrying Ad_{g_m}(α(s_m)); with
/// this orientation the cell sum matches ½ω_P^ℂ rather than its negative.
pub fn dual_polygon_sides(walk: &StarWalk, alpha: &EdgeOneForm) -> Vec<Mat2> {
    let r = walk.slots.len();
    (0..r)
        .map(|j| {
            let m = r - 1 - j;
            walk.frames[m].ad(&alpha.alpha(walk.slots[m]))
        })
        .collect()
}

/// Cup product of a dual polygon from its oriented boundary sides.
///
/// Diagonals from the fan root get the unique values making every fan
/// triangle's boundary sum vanish (telescoping the sides); Eq. tricup is
/// then summed over the fan.  For closed boundaries the value does not
/// depend on `root`.
pub fn polygon_cup(sides: &[Mat2], sides_tilde: &[Mat2], root: usize) -> Mat2 {
    let r = sides.len();
    debug_assert_eq!(r, sides_tilde.len());
    let mut total = Mat2::zero();
    if r < 3 {
        return total;
    }
    let b = |m: usize| sides[(root + m) % r];
    let bt = |m: usize| sides_tilde[(root + m) % r];
    // d[m] = value on the diagonal corner 0 → corner m (rooted labels).
    let mut d = b(0);
    let mut dt = bt(0);
    let sixth = Complex64::new(1.0 / 6.0, 0.0);
    for m in 1..r - 1 {
        let (a1, a2, a3) = (d, b(m), -(d + b(m)));
        let (t1, t2, t3) = (dt, bt(m), -(dt + bt(m)));
        let plus = a1 * t2 + a2 * t3 + a3 * t1;
        let minus = a1 * t3 + a2 * t1 + a3 * t2;
        total = total + (plus - minus).scale(sixth);
        d = d + b(m);
        dt = dt + bt(m);
    }
    total
}

/// The cup-product form ω(x, x̃) = Σ over dual 2-cells of tr(α∪α̃), one
/// cell per surface vertex, each assembled in its own star chart.
pub fn omega_cup(
    x: &[Complex64],
    xt: &[Complex64],
    dev: &DevelopedPattern,
) -> Result<Complex64, FormsError> {
    let alpha = alpha_form(x, dev)?;
    let alpha_t = alpha_form(xt, dev)?;
    let mut total = Complex64::new(0.0, 0.0);
    for v in 0..dev.triangulation().n_vertices() {
        let walk = dev.star_walk(v);
        let sides = dual_polygon_sides(&walk, &alpha);
        let sides_t = dual_polygon_sides(&walk, &alpha_t);
        total += polygon_cup(&sides, &sides_t, 0).trace();
    }
    Ok(total)
}

/// Cancels adjacent inverse letters; an empty result is the identity word.
fn reduce_word(letters: Vec<i32>) -> Vec<i32> {
    let mut out: Vec<i32> = Vec::with_capacity(letters.len());
    for l in letters {
        if out.last() == Some(&-l) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

/// Goldman's form by boundary periods over the dual-tree fundamental
/// domain.
///
/// Each edge is traversed once by the dual cell of each endpoint; the two
/// traversals are copies related by the deck word γ read off the star
/// walks.  Matched traversals (empty word) cancel exactly and are skipped;
/// every unmatched pair contributes −tr(τ_γ·Ad ρ_γ(side₁)) = tr(τ_γ·side₂)
/// with τ = hol(x) and side₂ the α̃-side of the second traversal, the
/// primitive m cancelling between the pair.  Pairing a coboundary against
/// a closed α̃ gives exactly zero, so τ is first gauge-normalised by its
/// best-fit coboundary; this keeps the products O(1) for fundamental
/// domains whose deck words are strongly hyperbolic.
pub fn omega_g(
    x: &[Complex64],
    xt: &[Complex64],
    dev: &DevelopedPattern,
) -> Result<Complex64, FormsError> {
    let tau = hol(x, dev)?;
    let alpha_t = alpha_form(xt, dev)?;
    omega_g_from_parts(&tau, &alpha_t, dev, false)
}

/// Core pairing; `swap_roles` relabels which traversal of each edge is
/// "first" (the value is provably label-independent; tests assert it).
pub(crate) fn omega_g_from_parts(
    tau: &crate::holonomy::Cocycle,
    alpha_t: &EdgeOneForm,
    dev: &DevelopedPattern,
    swap_roles: bool,
) -> Result<Complex64, FormsError> {
    let tri = dev.triangulation().clone();
    let fd = dev.fundamental_domain();
    // Gauge normalisation: subtracting the fitted coboundary leaves the
    // pairing untouched but shrinks |τ| to the size of its cohomology
    // class.
    let (_, tau0) = crate::holonomy::coboundary_distance(tau, dev);
    let tau = crate::holonomy::Cocycle {
        tau: tau
            .tau
            .iter()
            .enumerate()
            .map(|(g, t)| *t - (tau0 - dev.generator_rho()[g].ad(&tau0)))
            .collect(),
    };
    let walks: Vec<StarWalk> = (0..tri.n_vertices()).map(|v| dev.star_walk(v)).collect();
    let mut slot_of = vec![(0usize, 0usize); tri.n_half_edges()];
    for (v, w) in walks.iter().enumerate() {
        for (m, &s) in w.slots.iter().enumerate() {
            slot_of[s] = (v, m);
        }
    }
    let mut total = Complex64::new(0.0, 0.0);
    for e in 0..tri.n_edges() {
        let pair = tri.edge_half_edges(e);
        let (h, t) = if swap_roles {
            (pair[1], pair[0])
        } else {
            (pair[0], pair[1])
        };
        let (v1, m1) = slot_of[h];
        let (v2, m2) = slot_of[t];
        // γ carries the first traversal's copy onto the second's:
        // γ = g'_{m2} ∘ ρ_dir(h)⁻¹ ∘ g_{m1}⁻¹ as a generator word.
        let mut word = walks[v2].words[m2].clone();
        if let Some(l) = fd.letter(&tri, h) {
            word.push(-l);
        }
        word.extend(walks[v1].words[m1].iter().rev().map(|&l| -l));
        let word = reduce_word(word);
        if word.is_empty() {
            continue;
        }
        // Ad ρ_γ(side₁) = −side₂ exactly, so pair with the second side
        // instead of amplifying the first through Ad ρ_γ.
        let (_, tau_w) = tau.word_pair(dev, &word);
        let side2 = walks[v2].frames[m2].ad(&alpha_t.alpha(t));
        total += (tau_w * side2).trace();
    }
    Ok(total)
}

/// Gram matrices of the three forms on the kernel bases and the theorem
/// verdict.
#[derive(Debug, Clone)]
pub struct TheoremReport {
    /// ω_G on the complex kernel basis pairs.
    pub gram_omega_g: Vec<Vec<Complex64>>,
    /// ω (cup) on the same pairs.
    pub gram_omega_cup: Vec<Vec<Complex64>>,
    /// ½·ω_P^ℂ on the same pairs.
    pub gram_half_penner: Vec<Vec<Complex64>>,
    /// max |ω_G − ω|, |ω − ½ω_P^ℂ|, |ω_G − ½ω_P^ℂ| over all pairs.
    pub max_discrepancy: f64,
    /// max |Im ω_G| over real kernel basis pairs.
    pub max_im_omega_g_real: f64,
    /// Re ω_G on the real kernel basis.
    pub gram_re_omega_g_real: Vec<Vec<f64>>,
    /// Numerical rank of the real Gram matrix (reported, never asserted).
    pub re_omega_g_rank: usize,
    /// Tolerance the verdict was taken at.
    pub tol: f64,
}

/// Evaluates (ω_G, ω, ½ω_P^ℂ) on every pair of complex kernel basis
/// vectors and Im ω_G on real kernel pairs; any discrepancy beyond `tol`
/// is a `TheoremViolation` (an implementation bug, not a counterexample).
pub fn check_theorem(
    x: &CrossRatioSystem,
    dev: &DevelopedPattern,
    tol: f64,
) -> Result<TheoremReport, FormsError> {
    let tri = x.triangulation();
    let kc = kernel_complex(x, 1e-9);
    let n = kc.dim();
    let mut gram_omega_g = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    let mut gram_omega_cup = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    let mut gram_half_penner = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    let mut max_discrepancy = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let g = omega_g(&kc.basis[i], &kc.basis[j], dev)?;
            let c = omega_cup(&kc.basis[i], &kc.basis[j], dev)?;
            let p = omega_p(tri, &kc.basis[i], &kc.basis[j])? * 0.5;
            gram_omega_g[i][j] = g;
            gram_omega_cup[i][j] = c;
            gram_half_penner[i][j] = p;
            max_discrepancy = max_discrepancy
                .max((g - c).norm())
                .max((c - p).norm())
                .max((g - p).norm());
        }
    }
    let kr = kernel_real(x, 1e-9);
    let m = kr.dim();
    let mut gram_re = vec![vec![0.0; m]; m];
    let mut max_im = 0.0f64;
    for i in 0..m {
        for j in 0..m {
            let u: Vec<Complex64> = kr.basis[i].iter().map(|&v| Complex64::new(v, 0.0)).collect();
            let w: Vec<Complex64> = kr.basis[j].iter().map(|&v| Complex64::new(v, 0.0)).collect();
            let g = omega_g(&u, &w, dev)?;
            gram_re[i][j] = g.re;
            max_im = max_im.max(g.im.abs());
        }
    }
    let re_omega_g_rank = if m == 0 {
        0
    } else {
        let scale = gram_re
            .iter()
            .flatten()
            .fold(0.0f64, |acc, &v| acc.max(v.abs()));
        if scale < 1e-12 {
            0
        } else {
            real_rank(&gram_re, m, 1e-9).0
        }
    };
    if max_discrepancy > tol || max_im > tol {
        return Err(FormsError::TheoremViolation {
            max_discrepancy: max_discrepancy.max(max_im),
            tol,
        });
    }
    Ok(TheoremReport {
        gram_omega_g,
        gram_omega_cup,
        gram_half_penner,
        max_discrepancy,
        max_im_omega_g_real: max_im,
        gram_re_omega_g_real: gram_re,
        re_omega_g_rank,
        tol,
    })
}
