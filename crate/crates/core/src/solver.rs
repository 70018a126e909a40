//! Gauss–Newton solver for the moduli of a cross-ratio system at fixed
//! angles.
//!
//! With Θ prescribed and satisfying the vertex condition Σ_link Θ = 2π,
//! the remaining unknowns are u = log|X| ∈ ℝ^E.  Equation (1) splits into
//! the linear statement Σ_link u = 0 (its argument part holds by the
//! precondition), and equation (2) stays genuinely nonlinear:
//!
//! ```text
//!   S(v) = Σ_{m=1}^{r} Π_{s≤m} X_{ij_s} = 0,    X = exp(u + iΘ).
//! ```
//!
//! The residual vector stacks, per vertex, {Σ_link u, Re S, Im S}; its
//! Jacobian in u is assembled from the same partial products
//! (∂S/∂u_e = Σ_{slots s on e} Σ_{m≥s} P_m).  The system is underdetermined
//! — solutions form a positive-dimensional manifold — so each step is the
//! minimum-norm least-squares solution, damped by step halving.  Θ is
//! never touched: the result carries the input angles bit for bit.

use std::f64::consts::TAU;

use num_complex::Complex64;
use thiserror::Error;

use crate::crossratio::{AngleStructure, CrossRatioError, CrossRatioSystem};
use crate::numeric::{real_min_norm_solve, DEFAULT_RANK_TOL};

/// Hard bound on |u| beyond which the iteration counts as diverged.
pub const U_BOUND: f64 = 50.0;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("angle structure violates Σ_link Θ = 2π at vertex {vertex} (sum = {link_sum})")]
    AngleObstruction { vertex: usize, link_sum: f64 },
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("iterates diverged: max |u| = {max_abs_u:.3e} exceeds {U_BOUND}")]
    DivergedToInfinity { max_abs_u: f64 },
    #[error(transparent)]
    CrossRatio(#[from] CrossRatioError),
}

/// Convergence diagnostics of [`solve_pattern`].
#[derive(Debug, Clone, Copy)]
pub struct SolveStats {
    /// Accepted Gauss–Newton steps.
    pub iterations: usize,
    /// max over vertices of |Π X − 1| and |S| at the returned point.
    pub final_residual: f64,
}

fn residual_vector(x: &CrossRatioSystem) -> Vec<f64> {
    let tri = x.triangulation();
    let mut r = Vec::with_capacity(3 * tri.n_vertices());
    for v in 0..tri.n_vertices() {
        let link_u: f64 = tri
            .vertex_link(v)
            .corners()
            .iter()
            .map(|&h| x.log_mag()[tri.edge_of(h)])
            .sum();
        let s = x.sum_residual(v);
        r.push(link_u);
        r.push(s.re);
        r.push(s.im);
    }
    r
}

fn jacobian(x: &CrossRatioSystem) -> Vec<Vec<f64>> {
    let tri = x.triangulation();
    let n_e = tri.n_edges();
    let mut rows = Vec::with_capacity(3 * tri.n_vertices());
    for v in 0..tri.n_vertices() {
        let corners = tri.vertex_link(v).corners();
        let edges: Vec<usize> = corners.iter().map(|&h| tri.edge_of(h)).collect();
        // Partial products P_m and their suffix sums c_s = Σ_{m≥s} P_m.
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
        let mut row_lin = vec![0.0; n_e];
        let mut row_re = vec![0.0; n_e];
        let mut row_im = vec![0.0; n_e];
        for (s, &e) in edges.iter().enumerate() {
            row_lin[e] += 1.0;
            row_re[e] += suffix[s].re;
            row_im[e] += suffix[s].im;
        }
        rows.push(row_lin);
        rows.push(row_re);
        rows.push(row_im);
    }
    rows
}

fn norm2(r: &[f64]) -> f64 {
    r.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Solves for moduli u with angles fixed: returns X = exp(u + iΘ) whose
/// vertex residuals are at most `tol`, starting from `u0`.
///
/// Rejects angle structures violating Σ_link Θ = 2π (to 1e−9) up front,
/// since equation (1) is then unsatisfiable on the moduli alone.
pub fn solve_pattern(
    angles: &AngleStructure,
    u0: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(CrossRatioSystem, SolveStats), SolveError> {
    let tri = angles.triangulation().clone();
    for v in 0..tri.n_vertices() {
        let link_sum = angles.link_sum(v);
        if (link_sum - TAU).abs() > 1e-9 {
            return Err(SolveError::AngleObstruction { vertex: v, link_sum });
        }
    }
    let mut x = CrossRatioSystem::new(tri.clone(), u0.to_vec(), angles.theta().to_vec())?;

    for iterations in 0..=max_iter {
        let residual = x.max_residual();
        if residual <= tol {
            return Ok((x, SolveStats { iterations, final_residual: residual }));
        }
        if iterations == max_iter {
            break;
        }
        let r = residual_vector(&x);
        let j = jacobian(&x);
        let rhs: Vec<f64> = r.iter().map(|a| -a).collect();
        let (step, _) = real_min_norm_solve(&j, &rhs, tri.n_edges(), DEFAULT_RANK_TOL);

        // Step halving on the stacked residual norm.
        let current = norm2(&r);
        let mut alpha = 1.0f64;
        let mut accepted = None;
        for _ in 0..30 {
            let u_try: Vec<f64> =
                x.log_mag().iter().zip(&step).map(|(u, d)| u + alpha * d).collect();
            let x_try = x.with_log_mag(u_try)?;
            if norm2(&residual_vector(&x_try)) < current {
                accepted = Some(x_try);
                break;
            }
            alpha *= 0.5;
        }
        let Some(next) = accepted else {
            return Err(SolveError::NoConvergence { iterations, residual });
        };
        x = next;
        let max_abs_u = x.log_mag().iter().fold(0.0f64, |m, u| m.max(u.abs()));
        if max_abs_u > U_BOUND {
            return Err(SolveError::DivergedToInfinity { max_abs_u });
        }
    }
    let residual = x.max_residual();
    Err(SolveError::NoConvergence { iterations: max_iter, residual })
}
