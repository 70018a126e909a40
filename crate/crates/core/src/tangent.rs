//! Linearized cross-ratio equations: the spaces W^ℂ, W_X^ℂ, W_X^ℝ, the
//! lift map h, and vertex-move tangent fields.
//!
//! A tangent vector is x: E → ℂ, the logarithmic derivative of X along a
//! deformation.  Differentiating the vertex equations gives, per vertex
//! with clockwise link slots 1..r,
//!
//! ```text
//!   (3)  x_{i1} + x_{i2} + ⋯ + x_{ir} = 0
//!   (4)  x_{i1}X_{i1} + (x_{i1}+x_{i2})X_{i1}X_{i2} + ⋯
//!          + (x_{i1}+⋯+x_{ir})X_{i1}⋯X_{ir} = 0
//! ```
//!
//! W^ℂ is cut out by (3) alone, W_X^ℂ by both, and W_X^ℝ = W_X^ℂ ∩ ℝ^E.
//! Kernels are computed by SVD of the stacked constraint rows; rotating a
//! link's starting corner scales row (4) by a nonzero factor and leaves all
//! kernels unchanged.
//!
//! The surjection h: ℂ^E → W^ℂ sends a to x_ij = a_ki − a_il + a_lj − a_jk
//! (faces ijk, jil around the edge, corner-resolved so loop and multiple
//! edges are safe); `lift` inverts it by a minimum-norm solve.  The fields
//! x^(i) = h(a^(i)) of a single moving vertex are built in
//! [`vertex_move_field`] from the developed star, and their independence is
//! the infinitesimal-rigidity test.

use num_complex::Complex64;
use thiserror::Error;

use crate::crossratio::CrossRatioSystem;
use crate::holonomy::DevelopedPattern;
use crate::numeric::{
    complex_min_norm_solve, complex_null_space, real_null_space, real_rank, NullSpace,
};
use crate::surface::Triangulation;

/// Residual above which an input is rejected as outside W^ℂ.
pub const MEMBERSHIP_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum TangentError {
    #[error("expected {expected} edge values, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("field lies outside W^ℂ: Σ_link x = {residual:.3e} at vertex {vertex}")]
    NotInW { vertex: usize, residual: f64 },
    #[error("vertex {vertex} has a loop edge; a^(i) needs distinct spoke edges")]
    LoopAtVertex { vertex: usize },
    #[error("degenerate developed link at vertex {vertex}: {reason}")]
    DegenerateLink { vertex: usize, reason: String },
}

/// Orthonormal basis of a tangent kernel, with the diagnostics needed to
/// audit the rank decision.
#[derive(Debug, Clone)]
pub struct KernelBasis<T> {
    /// Orthonormal spanning vectors, each of length |E|.
    pub basis: Vec<Vec<T>>,
    /// Full singular-value spectrum of the constraint matrix, descending.
    pub singular_values: Vec<f64>,
    /// Relative threshold used: σ < tol·σ_max counts as zero.
    pub tol: f64,
    /// Ratio across the cut, when both sides are populated.
    pub gap_ratio: Option<f64>,
    /// Singular values crowd the threshold; dimensions are fragile.
    pub ill_conditioned: bool,
}

impl<T> KernelBasis<T> {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    fn from_null_space(ns: NullSpace<T>, tol: f64) -> Self {
        Self {
            basis: ns.basis,
            singular_values: ns.singular_values,
            tol,
            gap_ratio: ns.gap_ratio,
            ill_conditioned: ns.ill_conditioned,
        }
    }
}

/// Per-vertex suffix coefficients of Eq. (4): the value is
/// Σ_slots x_e·c_s with c_s = Σ_{m≥s} P_m over the clockwise partial
/// products P_m of the link.
fn eq4_slot_coefficients(x: &CrossRatioSystem, v: usize) -> (Vec<usize>, Vec<Complex64>) {
    let tri = x.triangulation();
    let edges: Vec<usize> = tri
        .vertex_link(v)
        .corners()
        .iter()
        .map(|&h| tri.edge_of(h))
        .collect();
    let mut partial = Vec::with_capacity(edges.len());
    let mut p = Complex64::new(1.0, 0.0);
    for &e in &edges {
        p *= x.x(e);
        partial.push(p);
    }
    let mut suffix = vec![Complex64::new(0.0, 0.0); edges.len()];
    let mut acc = Complex64::new(0.0, 0.0);
    for s in (0..edges.len()).rev() {
        acc += partial[s];
        suffix[s] = acc;
    }
    (edges, suffix)
}

/// Evaluates Eqs. (3) and (4) at every vertex for a candidate tangent
/// field.
pub fn linearized_residuals(
    x: &CrossRatioSystem,
    field: &[Complex64],
) -> Result<Vec<(Complex64, Complex64)>, TangentError> {
    let tri = x.triangulation();
    if field.len() != tri.n_edges() {
        return Err(TangentError::LengthMismatch {
            expected: tri.n_edges(),
            found: field.len(),
        });
    }
    Ok((0..tri.n_vertices())
        .map(|v| {
            let (edges, suffix) = eq4_slot_coefficients(x, v);
            let eq3: Complex64 = edges.iter().map(|&e| field[e]).sum();
            let eq4: Complex64 = edges.iter().zip(&suffix).map(|(&e, c)| field[e] * c).sum();
            (eq3, eq4)
        })
        .collect())
}

/// max over vertices of the two linearized residual moduli.
pub fn max_linearized_residual(
    x: &CrossRatioSystem,
    field: &[Complex64],
) -> Result<f64, TangentError> {
    Ok(linearized_residuals(x, field)?
        .iter()
        .map(|(a, b)| a.norm().max(b.norm()))
        .fold(0.0, f64::max))
}

/// W_X^ℂ as the null space of the 2n×|E| complex matrix stacking Eqs. (3)
/// and (4) per vertex.
pub fn kernel_complex(x: &CrossRatioSystem, tol: f64) -> KernelBasis<Complex64> {
    let tri = x.triangulation();
    let n_e = tri.n_edges();
    let mut rows = Vec::with_capacity(2 * tri.n_vertices());
    for v in 0..tri.n_vertices() {
        let (edges, suffix) = eq4_slot_coefficients(x, v);
        let mut row3 = vec![Complex64::new(0.0, 0.0); n_e];
        let mut row4 = vec![Complex64::new(0.0, 0.0); n_e];
        for (s, &e) in edges.iter().enumerate() {
            row3[e] += Complex64::new(1.0, 0.0);
            row4[e] += suffix[s];
        }
        rows.push(row3);
        rows.push(row4);
    }
    KernelBasis::from_null_space(complex_null_space(&rows, n_e, tol), tol)
}

/// W_X^ℝ as the null space of the 3n×|E| real matrix stacking Eq. (3) and
/// the real and imaginary parts of Eq. (4) per vertex.
pub fn kernel_real(x: &CrossRatioSystem, tol: f64) -> KernelBasis<f64> {
    let tri = x.triangulation();
    let n_e = tri.n_edges();
    let mut rows = Vec::with_capacity(3 * tri.n_vertices());
    for v in 0..tri.n_vertices() {
        let (edges, suffix) = eq4_slot_coefficients(x, v);
        let mut row3 = vec![0.0; n_e];
        let mut row_re = vec![0.0; n_e];
        let mut row_im = vec![0.0; n_e];
        for (s, &e) in edges.iter().enumerate() {
            row3[e] += 1.0;
            row_re[e] += suffix[s].re;
            row_im[e] += suffix[s].im;
        }
        rows.push(row3);
        rows.push(row_re);
        rows.push(row_im);
    }
    KernelBasis::from_null_space(real_null_space(&rows, n_e, tol), tol)
}

/// The four corner-resolved terms of h(a) on edge `e`: with h the canonical
/// half-edge (faces ijk left, jil right),
/// h(a)_ij = a_ki − a_il + a_lj − a_jk.
fn h_terms(tri: &Triangulation, e: usize) -> [(usize, f64); 4] {
    let h = tri.edge_half_edges(e)[0];
    let t = tri.twin(h);
    [
        (tri.edge_of(tri.prev(h)), 1.0),  // a_ki
        (tri.edge_of(tri.next(t)), -1.0), // a_il
        (tri.edge_of(tri.prev(t)), 1.0),  // a_lj
        (tri.edge_of(tri.next(h)), -1.0), // a_jk
    ]
}

/// Applies the surjection h: ℂ^E → W^ℂ.
pub fn h_apply(tri: &Triangulation, a: &[Complex64]) -> Result<Vec<Complex64>, TangentError> {
    if a.len() != tri.n_edges() {
        return Err(TangentError::LengthMismatch {
            expected: tri.n_edges(),
            found: a.len(),
        });
    }
    Ok((0..tri.n_edges())
        .map(|e| {
            h_terms(tri, e)
                .iter()
                .map(|&(f, sign)| a[f] * sign)
                .sum()
        })
        .collect())
}

/// A minimum-norm preimage under h: returns a with h(a) = x.
///
/// The image of h is exactly W^ℂ, so inputs violating Eq. (3) beyond
/// [`MEMBERSHIP_TOL`] are rejected as `NotInW`.
pub fn lift(tri: &Triangulation, x: &[Complex64]) -> Result<Vec<Complex64>, TangentError> {
    if x.len() != tri.n_edges() {
        return Err(TangentError::LengthMismatch {
            expected: tri.n_edges(),
            found: x.len(),
        });
    }
    let scale = x.iter().map(|v| v.norm()).fold(1.0, f64::max);
    for v in 0..tri.n_vertices() {
        let eq3: Complex64 = tri
            .vertex_link(v)
            .corners()
            .iter()
            .map(|&h| x[tri.edge_of(h)])
            .sum();
        if eq3.norm() > MEMBERSHIP_TOL * scale {
            return Err(TangentError::NotInW { vertex: v, residual: eq3.norm() });
        }
    }
    let n_e = tri.n_edges();
    let rows: Vec<Vec<Complex64>> = (0..n_e)
        .map(|e| {
            let mut row = vec![Complex64::new(0.0, 0.0); n_e];
            for (f, sign) in h_terms(tri, e) {
                row[f] += Complex64::new(sign, 0.0);
            }
            row
        })
        .collect();
    let (a, residual) = complex_min_norm_solve(&rows, x, n_e, 1e-12);
    debug_assert!(
        residual <= 1e-9 * scale,
        "h(a) = x unsolvable within W^ℂ: residual {residual:.3e}"
    );
    Ok(a)
}

/// The per-vertex table a^(i): on the j-th clockwise spoke
/// a^(i)_{ij} = −(X_{i1} + X_{i1}X_{i2} + ⋯ + X_{i1}⋯X_{i,j−1}), zero off
/// the star.  The table assigns one value per spoke slot, and a loop at
/// `i` occupies two slots of the same edge, so loops are rejected; any
/// non-loop edge fills exactly one slot and the table is well defined.
/// On loop-free stars x^(i) = h(a^(i)) realizes the single-vertex move;
/// the general case is [`vertex_move_field`].
pub fn a_field(x: &CrossRatioSystem, i: usize) -> Result<Vec<Complex64>, TangentError> {
    let tri = x.triangulation();
    let link = tri.vertex_link(i);
    let spokes = link.spoke_edges();
    for &e in &spokes {
        if tri.is_loop(e) {
            return Err(TangentError::LoopAtVertex { vertex: i });
        }
    }
    let mut a = vec![Complex64::new(0.0, 0.0); tri.n_edges()];
    let mut prefix = Complex64::new(0.0, 0.0);
    let mut p = Complex64::new(1.0, 0.0);
    for &e in &spokes {
        a[e] = -prefix;
        p *= x.x(e);
        prefix += p;
    }
    Ok(a)
}

/// The tangent field x^(i) of moving the single vertex `i` while all other
/// vertices and the holonomy stay fixed.
///
/// Works in the developed picture: the star of `i` is walked once and the
/// base copy of the vertex is given the velocity
/// ż_i = −(z_r−z_i)(z_1−z_i)/(z_1−z_r) of the proof (a tangent to the
/// circle through the first and last link neighbors); every other copy
/// moves equivariantly, ż∘γ = dρ_γ(ż), which the chain rule through the
/// star frames and deck transformations realizes.  Each edge then picks up
/// the logarithmic derivative of its cross ratio,
///
/// ```text
///   x_e = (ż_i−ż_k)/(z_i−z_k) − (ż_l−ż_i)/(z_l−z_i)
///       + (ż_j−ż_l)/(z_j−z_l) − (ż_k−ż_j)/(z_k−z_j),
/// ```
///
/// summed over whichever of the four quadruple corners cover `i`.  This is
/// valid for loop and repeated edges where the a^(i) table breaks down,
/// and reduces to x^(i) = h(a^(i)) on embedded stars.  Membership in
/// W_X^ℂ is verified before returning.
pub fn vertex_move_field(
    x: &CrossRatioSystem,
    dev: &DevelopedPattern,
    i: usize,
) -> Result<Vec<Complex64>, TangentError> {
    let tri = x.triangulation();
    let walk = dev.star_walk(i);
    let r = walk.slots.len();
    if r < 3 {
        return Err(TangentError::DegenerateLink {
            vertex: i,
            reason: format!("degree {r} < 3"),
        });
    }
    let center = dev.corner_affine(walk.slots[0]);
    let first = dev.corner_affine(tri.next(walk.slots[0]));
    let last = walk.frames[r - 1]
        .apply(&dev.corner_point(tri.next(walk.slots[r - 1])))
        .affine()
        .map_err(|e| TangentError::DegenerateLink { vertex: i, reason: e.to_string() })?;
    let den = first - last;
    if den.norm() < 1e-13 * first.norm().max(last.norm()).max(1.0) {
        return Err(TangentError::DegenerateLink {
            vertex: i,
            reason: "first and last link neighbors develop to one point".into(),
        });
    }
    let v0 = -(last - center) * (first - center) / den;
    // Velocity of the copy of i seen at each star slot, in that slot's own
    // chart: the slot corner is g_m⁻¹ of the base copy.
    let mut vel: Vec<Option<Complex64>> = vec![None; tri.n_half_edges()];
    for (m, &s) in walk.slots.iter().enumerate() {
        vel[s] = Some(walk.frames[m].inverse().derivative_at(center) * v0);
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut out = vec![zero; tri.n_edges()];
    for e in 0..tri.n_edges() {
        let h = tri.edge_half_edges(e)[0];
        let (h1, h2, h3) = (h, tri.next(h), tri.prev(h));
        let h4 = tri.prev(tri.twin(h));
        let z1 = dev.corner_affine(h1);
        let z2 = dev.corner_affine(h2);
        let z3 = dev.corner_affine(h3);
        let rho = dev.rho_dir(h);
        let z4 = rho
            .apply(&dev.corner_point(h4))
            .affine()
            .map_err(|er| TangentError::DegenerateLink { vertex: i, reason: er.to_string() })?;
        let d1 = vel[h1].unwrap_or(zero);
        let d2 = vel[h2].unwrap_or(zero);
        let d3 = vel[h3].unwrap_or(zero);
        let d4 = vel[h4]
            .map(|v| rho.derivative_at(dev.corner_affine(h4)) * v)
            .unwrap_or(zero);
        out[e] = (d1 - d3) / (z1 - z3) - (d4 - d1) / (z4 - z1) + (d2 - d4) / (z2 - z4)
            - (d3 - d2) / (z3 - z2);
    }
    let scale = out.iter().map(|v| v.norm()).fold(1.0, f64::max);
    let residual = max_linearized_residual(x, &out)?;
    if residual > 100.0 * MEMBERSHIP_TOL * scale {
        let worst = linearized_residuals(x, &out)?
            .iter()
            .enumerate()
            .max_by(|(_, (a3, a4)), (_, (b3, b4))| {
                a3.norm().max(a4.norm()).total_cmp(&b3.norm().max(b4.norm()))
            })
            .map(|(v, _)| v)
            .unwrap_or(i);
        return Err(TangentError::NotInW { vertex: worst, residual });
    }
    Ok(out)
}

/// Outcome of the infinitesimal-rigidity test on
/// β = {Re x^(1), Im x^(1), …, Re x^(n), Im x^(n)}.
#[derive(Debug, Clone)]
pub struct RigidityReport {
    /// x^(i), one per vertex.
    pub vertex_fields: Vec<Vec<Complex64>>,
    /// Singular values of the stacked 2n×|E| real matrix of β, descending.
    pub singular_values: Vec<f64>,
    /// Numerical rank of β.
    pub rank: usize,
    /// β linearly independent ⟺ no vertex motion fixes the structure.
    pub rigid: bool,
    /// dim W^ℝ, from the Eq. (3) rows alone.
    pub dim_w_real: usize,
    /// dim W^ℝ − rank β: the dimension W_X^ℝ must have, since W_X^ℝ is
    /// the ω_P-complement of span β inside W^ℝ.
    pub implied_dim_wx_real: usize,
}

/// Ranks the vertex-move fields and derives the rigidity verdict and the
/// implied kernel dimension.  Singular values below an absolute floor of
/// 1e−12 count as zero even when they top the spectrum — an all-zero β
/// (every vertex motion a global Möbius motion, as on one-vertex flat
/// tori) must rank 0, not full.
pub fn rigidity_check(
    x: &CrossRatioSystem,
    dev: &DevelopedPattern,
    tol: f64,
) -> Result<RigidityReport, TangentError> {
    let tri = x.triangulation();
    let n_e = tri.n_edges();
    let mut vertex_fields = Vec::with_capacity(tri.n_vertices());
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(2 * tri.n_vertices());
    for i in 0..tri.n_vertices() {
        let f = vertex_move_field(x, dev, i)?;
        rows.push(f.iter().map(|v| v.re).collect());
        rows.push(f.iter().map(|v| v.im).collect());
        vertex_fields.push(f);
    }
    let (_, singular_values) = real_rank(&rows, n_e, tol);
    let cut = singular_values.first().map_or(0.0, |s| tol * s).max(1e-12);
    let rank = singular_values.iter().filter(|&&s| s >= cut).count();

    let eq3_rows: Vec<Vec<f64>> = (0..tri.n_vertices())
        .map(|v| {
            let mut row = vec![0.0; n_e];
            for &h in tri.vertex_link(v).corners() {
                row[tri.edge_of(h)] += 1.0;
            }
            row
        })
        .collect();
    let (eq3_rank, _) = real_rank(&eq3_rows, n_e, tol);
    let dim_w_real = n_e - eq3_rank;
    Ok(RigidityReport {
        rigid: rank == 2 * tri.n_vertices(),
        implied_dim_wx_real: dim_w_real.saturating_sub(rank),
        vertex_fields,
        singular_values,
        rank,
        dim_w_real,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    use crate::patterns::{
        example_bolza, example_flat_torus, example_hex_torus, example_octahedron,
    };

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_field(rng: &mut StdRng, n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|_| c(2.0 * rng.random::<f64>() - 1.0, 2.0 * rng.random::<f64>() - 1.0))
            .collect()
    }

    #[test]
    fn hex_torus_linearized_values() {
        let x = example_hex_torus();
        // (1, −1, 0): both equations vanish (suffix coefficients per edge
        // all equal 1 − i√3, and Eq. 3 sums each edge twice).
        let r = linearized_residuals(&x, &[c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(r[0].0.norm() < 1e-14, "Eq3 = {}", r[0].0);
        assert!(r[0].1.norm() < 1e-13, "Eq4 = {}", r[0].1);
        // (1, 1, 1): Eq. 3 counts the six link slots.
        let r = linearized_residuals(&x, &[c(1.0, 0.0); 3]).unwrap();
        assert!((r[0].0 - c(6.0, 0.0)).norm() < 1e-14, "Eq3 = {}", r[0].0);
        // Zero field: everything vanishes.
        let r = linearized_residuals(&x, &[c(0.0, 0.0); 3]).unwrap();
        assert_eq!((r[0].0, r[0].1), (c(0.0, 0.0), c(0.0, 0.0)));
    }

    #[test]
    fn hex_torus_kernel_dimensions() {
        let x = example_hex_torus();
        let kc = kernel_complex(&x, 1e-9);
        let kr = kernel_real(&x, 1e-9);
        eprintln!(
            "hex torus: dim W_X^C = {}, dim W_X^R = {}, σ = {:?}",
            kc.dim(),
            kr.dim(),
            kc.singular_values
        );
        // Eq. 4's row is (1−i√3)/2 times Eq. 3's: one independent
        // constraint, so both kernels have dimension 2.
        assert_eq!(kc.dim(), 2);
        assert_eq!(kr.dim(), 2);
        assert!(!kc.ill_conditioned);
        assert!(!kr.ill_conditioned);
    }

    #[test]
    fn kernel_vectors_satisfy_the_equations() {
        for (name, x) in [
            ("hex torus", example_hex_torus()),
            ("flat torus 3", example_flat_torus(3)),
            ("octahedron", example_octahedron()),
            ("bolza", example_bolza()),
        ] {
            let kc = kernel_complex(&x, 1e-9);
            let mut max_err = 0.0f64;
            for b in &kc.basis {
                max_err = max_err.max(max_linearized_residual(&x, b).unwrap());
            }
            let kr = kernel_real(&x, 1e-9);
            for b in &kr.basis {
                let bc: Vec<Complex64> = b.iter().map(|&v| c(v, 0.0)).collect();
                max_err = max_err.max(max_linearized_residual(&x, &bc).unwrap());
            }
            eprintln!("{name}: kernel residual max_err={max_err:.2e}");
            assert!(max_err < 1e-10, "{name}: residual {max_err:.2e}");
        }
    }

    #[test]
    fn kernel_dimension_lower_bounds() {
        for (name, x) in [
            ("hex torus", example_hex_torus()),
            ("flat torus 2", example_flat_torus(2)),
            ("flat torus 3", example_flat_torus(3)),
            ("octahedron", example_octahedron()),
            ("bolza", example_bolza()),
        ] {
            let tri = x.triangulation().clone();
            let (e, n) = (tri.n_edges() as i64, tri.n_vertices() as i64);
            let kc = kernel_complex(&x, 1e-9).dim() as i64;
            let kr = kernel_real(&x, 1e-9).dim() as i64;
            eprintln!("{name}: |E|={e} n={n} dim_C={kc} dim_R={kr}");
            assert!(kc >= e - 2 * n, "{name}: dim_C {kc} < |E|−2|V| = {}", e - 2 * n);
            assert!(kr >= e - 3 * n, "{name}: dim_R {kr} < |E|−3|V| = {}", e - 3 * n);
        }
    }

    #[test]
    fn bolza_kernel_dimensions_match_the_count() {
        let x = example_bolza();
        let kc = kernel_complex(&x, 1e-9);
        let kr = kernel_real(&x, 1e-9);
        eprintln!(
            "bolza: dim W_X^C = {} (6g−6+n = 7), dim W_X^R = {} (6g−6 = 6), σ_C = {:?}",
            kc.dim(),
            kr.dim(),
            kc.singular_values
        );
        assert_eq!(kc.dim(), 7, "6g−6+n at g=2, n=1");
        assert_eq!(kr.dim(), 6, "6g−6 at g=2");
        assert!(!kc.ill_conditioned);
        assert!(!kr.ill_conditioned);
    }

    #[test]
    fn h_image_lies_in_w() {
        let mut rng = StdRng::seed_from_u64(23);
        for (name, x) in [
            ("hex torus", example_hex_torus()),
            ("flat torus 2", example_flat_torus(2)),
            ("bolza", example_bolza()),
        ] {
            let tri = x.triangulation();
            let mut max_err = 0.0f64;
            for _ in 0..100 {
                let a = random_field(&mut rng, tri.n_edges());
                let hx = h_apply(tri, &a).unwrap();
                for v in 0..tri.n_vertices() {
                    let eq3: Complex64 = tri
                        .vertex_link(v)
                        .corners()
                        .iter()
                        .map(|&h| hx[tri.edge_of(h)])
                        .sum();
                    max_err = max_err.max(eq3.norm());
                }
            }
            eprintln!("{name}: h image Eq3 max_err={max_err:.2e}");
            assert!(max_err < 1e-12, "{name}");
        }
    }

    #[test]
    fn lift_round_trips_on_w() {
        let mut rng = StdRng::seed_from_u64(29);
        for (name, x) in [
            ("hex torus", example_hex_torus()),
            ("flat torus 2", example_flat_torus(2)),
            ("octahedron", example_octahedron()),
            ("bolza", example_bolza()),
        ] {
            let tri = x.triangulation();
            let mut max_err = 0.0f64;
            for _ in 0..50 {
                // Produce a member of W^ℂ as h of something random.
                let w = h_apply(tri, &random_field(&mut rng, tri.n_edges())).unwrap();
                let a = lift(tri, &w).unwrap();
                let back = h_apply(tri, &a).unwrap();
                for (u, v) in back.iter().zip(&w) {
                    max_err = max_err.max((u - v).norm());
                }
            }
            eprintln!("{name}: h∘lift round trip max_err={max_err:.2e}");
            assert!(max_err < 1e-11, "{name}: {max_err:.2e}");
        }
    }

    #[test]
    fn lift_of_zero_is_zero_and_outsiders_are_rejected() {
        let x = example_hex_torus();
        let tri = x.triangulation();
        let a = lift(tri, &[c(0.0, 0.0); 3]).unwrap();
        assert!(a.iter().all(|v| v.norm() < 1e-14), "minimum-norm lift of 0 is 0");
        let err = lift(tri, &[c(1.0, 0.0); 3]).unwrap_err();
        assert!(matches!(err, TangentError::NotInW { vertex: 0, .. }), "{err}");
    }

    #[test]
    fn kernel_fields_lift_and_return() {
        // Members of W_X^ℂ are in particular in W^ℂ, so they lift.
        let x = example_bolza();
        let tri = x.triangulation();
        let kc = kernel_complex(&x, 1e-9);
        for b in &kc.basis {
            let a = lift(tri, b).unwrap();
            let back = h_apply(tri, &a).unwrap();
            let err: f64 = back.iter().zip(b).map(|(u, v)| (u - v).norm()).fold(0.0, f64::max);
            assert!(err < 1e-11, "{err:.2e}");
        }
    }

    #[test]
    fn a_field_rejects_loops_and_feeds_h() {
        let x = example_bolza();
        let err = a_field(&x, 0).unwrap_err();
        assert!(matches!(err, TangentError::LoopAtVertex { vertex: 0 }), "{err}");

        // The one-vertex hex torus star is all loops as well.
        let x = example_hex_torus();
        let err = a_field(&x, 0).unwrap_err();
        assert!(matches!(err, TangentError::LoopAtVertex { vertex: 0 }), "{err}");

        // On the loop-free flat torus, x^(i) = h(a^(i)) lies in W_X^ℂ.
        let x = example_flat_torus(2);
        let tri = x.triangulation();
        let mut max_err = 0.0f64;
        for i in 0..tri.n_vertices() {
            let a = a_field(&x, i).unwrap();
            let xi = h_apply(tri, &a).unwrap();
            max_err = max_err.max(max_linearized_residual(&x, &xi).unwrap());
            let scale: f64 = xi.iter().map(|v| v.norm()).fold(0.0, f64::max);
            assert!(scale > 1e-6, "vertex move {i} should be nontrivial");
        }
        eprintln!("flat torus 2: x^(i) membership max_err={max_err:.2e}");
        assert!(max_err < 1e-10);
    }

    fn developed(x: &CrossRatioSystem) -> DevelopedPattern {
        let fd = crate::surface::fundamental_domain(x.triangulation(), 0);
        crate::holonomy::develop_auto(x, &fd).expect("develops")
    }

    #[test]
    fn vertex_moves_lie_in_the_kernel() {
        for (name, x) in [
            ("hex torus", example_hex_torus()),
            ("flat torus 2", example_flat_torus(2)),
            ("flat torus 3", example_flat_torus(3)),
            ("octahedron", example_octahedron()),
            ("bolza", example_bolza()),
        ] {
            let dev = developed(&x);
            let mut max_res = 0.0f64;
            for i in 0..x.triangulation().n_vertices() {
                let f = vertex_move_field(&x, &dev, i).unwrap();
                max_res = max_res.max(max_linearized_residual(&x, &f).unwrap());
            }
            eprintln!("{name}: vertex-move membership max_err={max_res:.2e}");
            assert!(max_res < 1e-10, "{name}: {max_res:.2e}");
        }
    }

    #[test]
    fn one_vertex_flat_torus_moves_are_global() {
        // Every copy of the single vertex translates identically, so the
        // motion is a Möbius motion of the whole plane and x^(0) = 0.
        let x = example_hex_torus();
        let dev = developed(&x);
        let f = vertex_move_field(&x, &dev, 0).unwrap();
        let norm: f64 = f.iter().map(|v| v.norm()).fold(0.0, f64::max);
        eprintln!("hex torus: |x^(0)|_∞ = {norm:.2e}");
        assert!(norm < 1e-12, "translation-invariant pattern: {norm:.2e}");
    }

    #[test]
    fn zdot_route_matches_the_a_table_on_embedded_stars() {
        for (name, x) in [
            ("flat torus 2", example_flat_torus(2)),
            ("octahedron", example_octahedron()),
        ] {
            let dev = developed(&x);
            let tri = x.triangulation();
            let mut max_err = 0.0f64;
            for i in 0..tri.n_vertices() {
                let via_table = h_apply(tri, &a_field(&x, i).unwrap()).unwrap();
                let via_zdot = vertex_move_field(&x, &dev, i).unwrap();
                let err: f64 = via_table
                    .iter()
                    .zip(&via_zdot)
                    .map(|(u, v)| (u - v).norm())
                    .fold(0.0, f64::max);
                max_err = max_err.max(err);
            }
            eprintln!("{name}: |h(a^(i)) − ż-route| max_err={max_err:.2e}");
            assert!(max_err < 1e-10, "{name}: {max_err:.2e}");
        }
    }

    #[test]
    fn bolza_vertex_move_is_a_coboundary() {
        // Around the loop edges only the ż-route applies; the resulting τ
        // must still be trivial in cohomology.
        let x = example_bolza();
        let dev = developed(&x);
        let f = vertex_move_field(&x, &dev, 0).unwrap();
        let scale: f64 = f.iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(scale > 1e-6, "hyperbolic vertex move is nontrivial");
        let tau = crate::holonomy::hol(&f, &dev).unwrap();
        let (d, _) = crate::holonomy::coboundary_distance(&tau, &dev);
        eprintln!("bolza x^(0): coboundary distance {d:.2e}");
        assert!(d < 1e-8);
    }

    #[test]
    fn rigidity_verdicts_on_the_examples() {
        for (name, x, want_rank, want_dim_w, rigid) in [
            ("hex torus", example_hex_torus(), 0, 2, false),
            ("bolza", example_bolza(), 2, 8, true),
        ] {
            let dev = developed(&x);
            let rep = rigidity_check(&x, &dev, 1e-9).unwrap();
            eprintln!(
                "{name}: rank β={}, dim W^ℝ={}, implied dim W_X^ℝ={}, σ={:?}",
                rep.rank, rep.dim_w_real, rep.implied_dim_wx_real, rep.singular_values
            );
            assert_eq!(rep.rank, want_rank, "{name} rank");
            assert_eq!(rep.dim_w_real, want_dim_w, "{name} dim W^ℝ");
            assert_eq!(rep.rigid, rigid, "{name} verdict");
        }
    }

    #[test]
    fn implied_dimension_matches_the_real_kernel() {
        // dim W_X^ℝ = dim W^ℝ − rank β on every example: the symplectic
        // complement identity at the level of dimensions.
        for (name, x) in [
            ("hex torus", example_hex_torus()),
            ("flat torus 2", example_flat_torus(2)),
            ("octahedron", example_octahedron()),
            ("bolza", example_bolza()),
        ] {
            let dev = developed(&x);
            let rep = rigidity_check(&x, &dev, 1e-9).unwrap();
            let kr = kernel_real(&x, 1e-9);
            eprintln!(
                "{name}: implied={}, kernel dim={}, rank β={}",
                rep.implied_dim_wx_real,
                kr.dim(),
                rep.rank
            );
            assert_eq!(rep.implied_dim_wx_real, kr.dim(), "{name}");
        }
    }
}
