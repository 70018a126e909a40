//! Machine-readable diagnostics: everything the pipeline measures about a
//! pattern, gathered into one serializable report.
//!
//! A report is deterministic for a given pattern and tool version: fixed
//! iteration orders, no wall-clock content (the optional `generated_at`
//! field is the single isolatable exception, left unset by the library).
//! Floats go through the shortest-round-trip encoder, so every value
//! re-parses to the identical bit pattern.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::crossratio::CrossRatioSystem;
use crate::delaunay::{is_delaunay, DelaunayReport};
use crate::forms::{check_theorem, FormsError};
use crate::holonomy::{develop_auto, HolonomyError};
use crate::surface::fundamental_domain;
use crate::tangent::{kernel_complex, kernel_real, rigidity_check, TangentError};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Holonomy(#[from] HolonomyError),
    #[error(transparent)]
    Tangent(#[from] TangentError),
    #[error(transparent)]
    Forms(#[from] FormsError),
}

/// Knobs for report generation; the defaults match the library-wide
/// tolerances.
#[derive(Debug, Clone)]
pub struct ReportOptions {
    /// Rank cutoff for kernel dimensions (relative to σ_max).
    pub kernel_tol: f64,
    /// Budget for the three-form agreement verdict.
    pub theorem_tol: f64,
    /// Dual-cycle enumeration bound for the Delaunay check.
    pub max_cycle_len: usize,
    /// Root face of the fundamental domain.
    pub seed_face: usize,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            kernel_tol: 1e-9,
            theorem_tol: 1e-8,
            max_cycle_len: 12,
            seed_face: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TriangulationSummary {
    pub genus: usize,
    pub n_vertices: usize,
    pub n_edges: usize,
    pub n_faces: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ResidualSummary {
    /// max_v |Π X − 1| (equation 1).
    pub max_product_residual: f64,
    /// max_v |Σ partial products| (equation 2).
    pub max_sum_residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct KernelSummary {
    pub dim_complex: usize,
    pub singular_values_complex: Vec<f64>,
    pub dim_real: usize,
    pub singular_values_real: Vec<f64>,
    pub tol: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct HolonomySummary {
    pub n_generators: usize,
    /// max over edges of the reproduced-cross-ratio error of the layout.
    pub max_cross_ratio_error: f64,
    /// max over vertices of the star-word holonomy's distance to ±Id.
    pub max_vertex_cycle_defect: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RigiditySummary {
    pub rank: usize,
    pub rigid: bool,
    pub dim_w_real: usize,
    pub implied_dim_wx_real: usize,
    pub singular_values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TheoremSummary {
    /// max pairwise |ω_G − ω|, |ω − ½ω_P^ℂ|, |ω_G − ½ω_P^ℂ| over the
    /// complex kernel basis.
    pub max_discrepancy: f64,
    /// max |Im ω_G| over real kernel pairs.
    pub max_im_omega_g_real: f64,
    /// Gram matrices on the complex kernel basis, entries as [re, im].
    pub gram_omega_g: Vec<Vec<[f64; 2]>>,
    pub gram_omega_cup: Vec<Vec<[f64; 2]>>,
    pub gram_half_penner: Vec<Vec<[f64; 2]>>,
    /// Re ω_G on the real kernel basis with its numerical rank (reported,
    /// never asserted).
    pub gram_re_omega_g_real: Vec<Vec<f64>>,
    pub re_omega_g_rank: usize,
    pub tol: f64,
    /// "ok" when every identity holds within `tol`, else "violated".
    pub verdict: String,
}

/// The full diagnostic record for one pattern.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PatternReport {
    pub tool_version: String,
    pub triangulation: TriangulationSummary,
    pub residuals: ResidualSummary,
    pub delaunay: DelaunayCheckSummary,
    pub kernel: KernelSummary,
    pub holonomy: HolonomySummary,
    pub rigidity: RigiditySummary,
    pub theorem: TheoremSummary,
    /// Optional wall-clock stamp; never set by the library so that equal
    /// inputs give byte-identical reports.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub generated_at: Option<String>,
}

/// Serializable digest of [`DelaunayReport`] (violation lists included).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DelaunayCheckSummary {
    pub is_delaunay: bool,
    pub condition_i: bool,
    pub vertex_sum_max_error: f64,
    pub max_cycle_len: usize,
    pub cycles_constrained: usize,
    pub n_violations: usize,
}

fn gram_to_pairs(g: &[Vec<Complex64>]) -> Vec<Vec<[f64; 2]>> {
    g.iter()
        .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

impl From<&DelaunayReport> for DelaunayCheckSummary {
    fn from(r: &DelaunayReport) -> Self {
        DelaunayCheckSummary {
            is_delaunay: r.is_delaunay,
            condition_i: r.condition_i,
            vertex_sum_max_error: r.vertex_sum_max_error,
            max_cycle_len: r.max_cycle_len,
            cycles_constrained: r.cycles_constrained,
            n_violations: r.violations.len(),
        }
    }
}

/// Runs the whole pipeline on `x` and gathers the measurements.
///
/// The theorem check is always evaluated to completion; its verdict string
/// records whether the discrepancies stayed within `opts.theorem_tol`.
pub fn pattern_report(
    x: &CrossRatioSystem,
    opts: &ReportOptions,
) -> Result<PatternReport, ReportError> {
    let tri = x.triangulation();
    let mut max_prod = 0.0f64;
    let mut max_sum = 0.0f64;
    for v in 0..tri.n_vertices() {
        max_prod = max_prod.max(x.product_residual(v).norm());
        max_sum = max_sum.max(x.sum_residual(v).norm());
    }

    let delaunay = is_delaunay(&x.angle_structure(), opts.max_cycle_len);

    let kc = kernel_complex(x, opts.kernel_tol);
    let kr = kernel_real(x, opts.kernel_tol);

    let fd = fundamental_domain(tri, opts.seed_face);
    let dev = develop_auto(x, &fd)?;
    let rig = rigidity_check(x, &dev, opts.kernel_tol)?;

    // Infinite budget: the report always carries the measured values, and
    // the verdict is judged against the requested tolerance afterwards.
    let thm = check_theorem(x, &dev, f64::INFINITY)?;
    let ok = thm.max_discrepancy <= opts.theorem_tol
        && thm.max_im_omega_g_real <= opts.theorem_tol;

    Ok(PatternReport {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        triangulation: TriangulationSummary {
            genus: tri.genus(),
            n_vertices: tri.n_vertices(),
            n_edges: tri.n_edges(),
            n_faces: tri.n_faces(),
        },
        residuals: ResidualSummary {
            max_product_residual: max_prod,
            max_sum_residual: max_sum,
        },
        delaunay: (&delaunay).into(),
        kernel: KernelSummary {
            dim_complex: kc.dim(),
            singular_values_complex: kc.singular_values.clone(),
            dim_real: kr.dim(),
            singular_values_real: kr.singular_values.clone(),
            tol: opts.kernel_tol,
        },
        holonomy: HolonomySummary {
            n_generators: dev.fundamental_domain().generators().len(),
            max_cross_ratio_error: dev.max_cross_ratio_error(),
            max_vertex_cycle_defect: dev.max_vertex_cycle_defect(),
        },
        rigidity: RigiditySummary {
            rank: rig.rank,
            rigid: rig.rigid,
            dim_w_real: rig.dim_w_real,
            implied_dim_wx_real: rig.implied_dim_wx_real,
            singular_values: rig.singular_values.clone(),
        },
        theorem: TheoremSummary {
            max_discrepancy: thm.max_discrepancy,
            max_im_omega_g_real: thm.max_im_omega_g_real,
            gram_omega_g: gram_to_pairs(&thm.gram_omega_g),
            gram_omega_cup: gram_to_pairs(&thm.gram_omega_cup),
            gram_half_penner: gram_to_pairs(&thm.gram_half_penner),
            gram_re_omega_g_real: thm.gram_re_omega_g_real.clone(),
            re_omega_g_rank: thm.re_omega_g_rank,
            tol: opts.theorem_tol,
            verdict: if ok { "ok".to_string() } else { "violated".to_string() },
        },
        generated_at: None,
    })
}
