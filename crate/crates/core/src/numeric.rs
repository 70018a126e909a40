//! Shared dense linear algebra: null spaces, minimum-norm solves, and least
//! squares over ℂ and ℝ via SVD.
//!
//! All systems here are desk-scale (a few dozen unknowns), so everything is
//! routed through nalgebra's dense SVD. Wide matrices are zero-padded to
//! square first: the thin SVD of the padded matrix carries a full V factor,
//! which is exactly what null-space extraction needs, and padding with zero
//! rows changes neither the singular values nor V.
//!
//! Rank decisions use a relative threshold `tol · σ_max`. A decomposition is
//! flagged ill-conditioned when the singular values do not separate cleanly
//! around that threshold (gap ratio below 10), in which case reported
//! dimensions should not be trusted to the last unit.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Relative singular-value threshold used by default throughout the crate.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

/// Minimum acceptable ratio between the smallest kept and largest dropped
/// singular value before a rank decision is flagged.
pub const GAP_FLAG_RATIO: f64 = 10.0;

/// Outcome of a null-space computation.
#[derive(Debug, Clone)]
pub struct NullSpace<T> {
    /// Orthonormal basis vectors of the null space (length `n_cols` each).
    pub basis: Vec<Vec<T>>,
    /// All singular values of the (padded) matrix, descending.
    pub singular_values: Vec<f64>,
    /// Number of singular values above the threshold.
    pub rank: usize,
    /// `σ_rank−1 / σ_rank` across the cut; `None` when one side is empty.
    pub gap_ratio: Option<f64>,
    /// True when some singular value lies within a factor [`GAP_FLAG_RATIO`]
    /// of the threshold on either side, so the rank decision is fragile.
    pub ill_conditioned: bool,
}

fn pad_rows_c(rows: &[Vec<Complex64>], n_cols: usize) -> DMatrix<Complex64> {
    let n = rows.len().max(n_cols);
    let mut m = DMatrix::zeros(n, n_cols);
    for (r, row) in rows.iter().enumerate() {
        assert_eq!(row.len(), n_cols, "row {r} has wrong length");
        for (c, &v) in row.iter().enumerate() {
            m[(r, c)] = v;
        }
    }
    m
}

fn pad_rows_r(rows: &[Vec<f64>], n_cols: usize) -> DMatrix<f64> {
    let n = rows.len().max(n_cols);
    let mut m = DMatrix::zeros(n, n_cols);
    for (r, row) in rows.iter().enumerate() {
        assert_eq!(row.len(), n_cols, "row {r} has wrong length");
        for (c, &v) in row.iter().enumerate() {
            m[(r, c)] = v;
        }
    }
    m
}

fn rank_and_gap(sv: &[f64], tol: f64) -> (usize, Option<f64>, bool) {
    let sigma_max = sv.first().copied().unwrap_or(0.0);
    if sigma_max == 0.0 {
        return (0, None, false);
    }
    let cut = tol * sigma_max;
    let rank = sv.iter().filter(|&&s| s > cut).count();
    let kept_close = rank > 0 && sv[rank - 1] < GAP_FLAG_RATIO * cut;
    let dropped_close = rank < sv.len() && sv[rank] > cut / GAP_FLAG_RATIO;
    let gap_ratio = if rank > 0 && rank < sv.len() && sv[rank] > 0.0 {
        Some(sv[rank - 1] / sv[rank])
    } else {
        None
    };
    (rank, gap_ratio, kept_close || dropped_close)
}

/// Null space of a complex matrix given as rows over `n_cols` unknowns.
pub fn complex_null_space(rows: &[Vec<Complex64>], n_cols: usize, tol: f64) -> NullSpace<Complex64> {
    let m = pad_rows_c(rows, n_cols);
    let svd = m.svd(false, true);
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    let (rank, gap_ratio, ill_conditioned) = rank_and_gap(&sv, tol);
    let v_t = svd.v_t.expect("V^H requested");
    let mut basis = Vec::new();
    for r in rank..n_cols {
        // Row r of V^H, conjugated, is column r of V.
        basis.push((0..n_cols).map(|c| v_t[(r, c)].conj()).collect());
    }
    NullSpace {
        basis,
        singular_values: sv,
        rank,
        gap_ratio,
        ill_conditioned,
    }
}

/// Null space of a real matrix given as rows over `n_cols` unknowns.
pub fn real_null_space(rows: &[Vec<f64>], n_cols: usize, tol: f64) -> NullSpace<f64> {
    let m = pad_rows_r(rows, n_cols);
    let svd = m.svd(false, true);
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    let (rank, gap_ratio, ill_conditioned) = rank_and_gap(&sv, tol);
    let v_t = svd.v_t.expect("V^T requested");
    let mut basis = Vec::new();
    for r in rank..n_cols {
        basis.push((0..n_cols).map(|c| v_t[(r, c)]).collect());
    }
    NullSpace {
        basis,
        singular_values: sv,
        rank,
        gap_ratio,
        ill_conditioned,
    }
}

/// Numerical rank of a real matrix.
pub fn real_rank(rows: &[Vec<f64>], n_cols: usize, tol: f64) -> (usize, Vec<f64>) {
    let ns = real_null_space(rows, n_cols, tol);
    (ns.rank, ns.singular_values)
}

/// Minimum-norm solution of an (often underdetermined) complex system.
/// Returns the residual norm alongside the solution.
pub fn complex_min_norm_solve(
    rows: &[Vec<Complex64>],
    rhs: &[Complex64],
    n_cols: usize,
    tol: f64,
) -> (Vec<Complex64>, f64) {
    assert_eq!(rows.len(), rhs.len());
    let m = pad_rows_c(rows, n_cols);
    let mut b = DVector::zeros(m.nrows());
    for (i, &v) in rhs.iter().enumerate() {
        b[i] = v;
    }
    let svd = m.clone().svd(true, true);
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let x = svd
        .solve(&b, tol * sigma_max)
        .expect("SVD solve with U, V computed");
    let residual = (&m * &x - &b).norm();
    (x.iter().copied().collect(), residual)
}

/// Minimum-norm solution of a real system, with residual norm.
pub fn real_min_norm_solve(
    rows: &[Vec<f64>],
    rhs: &[f64],
    n_cols: usize,
    tol: f64,
) -> (Vec<f64>, f64) {
    assert_eq!(rows.len(), rhs.len());
    let m = pad_rows_r(rows, n_cols);
    let mut b = DVector::zeros(m.nrows());
    for (i, &v) in rhs.iter().enumerate() {
        b[i] = v;
    }
    let svd = m.clone().svd(true, true);
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let x = svd
        .solve(&b, tol * sigma_max)
        .expect("SVD solve with U, V computed");
    let residual = (&m * &x - &b).norm();
    (x.iter().copied().collect(), residual)
}

/// Least-squares solution of a tall complex system (minimizes ‖Ax − b‖₂).
pub fn complex_least_squares(
    rows: &[Vec<Complex64>],
    rhs: &[Complex64],
    n_cols: usize,
) -> (Vec<Complex64>, f64) {
    complex_min_norm_solve(rows, rhs, n_cols, 1e-12)
}
