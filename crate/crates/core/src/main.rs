//! `circlepat`: cross-ratio circle patterns from the command line.
//!
//! Every subcommand writes one JSON document to standard output (or to
//! `--output`) and a short human summary to standard error, so the tool
//! composes in pipelines.  Exit codes: 0 success, 1 validation failure,
//! 2 convergence failure, 3 I/O or format error; structured failures still
//! emit a JSON error object.

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Deserialize;
use serde_json::{json, Value};

use circle_patterns::crossratio::{AngleStructure, CrossRatioSystem, PatternFile};
use circle_patterns::forms::{check_theorem, FormsError};
use circle_patterns::geometry::Mat2;
use circle_patterns::holonomy::develop_auto;
use circle_patterns::patterns::{
    example_bolza, example_flat_torus, example_hex_torus, example_octahedron,
};
use circle_patterns::report::{pattern_report, ReportOptions};
use circle_patterns::solver::{solve_pattern, SolveError};
use circle_patterns::surface::{fundamental_domain, TriangulationFile};
use circle_patterns::tangent::{kernel_complex, kernel_real, rigidity_check};

#[derive(Parser)]
#[command(
    name = "circlepat",
    version,
    about = "Circle patterns via complex cross ratios: solving, tangent spaces, holonomy, and the three bilinear forms",
    arg_required_else_help = true
)]
struct Cli {
    /// Write the JSON output to this file instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ExampleName {
    /// One-vertex flat torus, X ≡ e^{iπ/3}.
    HexTorus,
    /// k×k square-grid torus with right-angled crossings.
    FlatTorus,
    /// Boundary of the octahedron: a Koebe pattern on the sphere.
    Octahedron,
    /// Genus-2 Bolza surface from the regular hyperbolic octagon.
    Bolza,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Field {
    Real,
    Complex,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Pairs {
    /// Evaluate the forms on all pairs of kernel basis vectors.
    Basis,
}

#[derive(Subcommand)]
enum Command {
    /// Emit a built-in example pattern as JSON.
    Example {
        #[arg(value_enum)]
        name: ExampleName,
        /// Grid size for the flat torus family.
        #[arg(long, default_value_t = 2)]
        size: usize,
    },
    /// Run the full diagnostic pipeline on a pattern file.
    Validate {
        pattern: PathBuf,
        /// Largest acceptable vertex-equation residual.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Dual-cycle enumeration bound for the Delaunay check.
        #[arg(long, default_value_t = 12)]
        max_cycle_len: usize,
        /// Root face of the fundamental domain.
        #[arg(long, default_value_t = 0)]
        seed_face: usize,
    },
    /// Solve for moduli u = log|X| with the angles Θ held fixed.
    Solve {
        /// Pattern or angle file providing the triangulation and Θ.
        #[arg(long)]
        theta: PathBuf,
        /// Optional JSON array with initial per-edge moduli (default 0).
        #[arg(long)]
        init: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, default_value_t = 100)]
        max_iter: usize,
    },
    /// Kernel basis of the linearized vertex equations.
    Tangent {
        pattern: PathBuf,
        #[arg(long, value_enum, default_value_t = Field::Complex)]
        field: Field,
        /// Rank cutoff relative to the largest singular value.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Develop the pattern and report deck generators and defects.
    Holonomy {
        pattern: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed_face: usize,
    },
    /// Gram matrices of ω_G, ω, and ½ω_P^ℂ on the kernel basis.
    Forms {
        pattern: PathBuf,
        #[arg(long, value_enum, default_value_t = Pairs::Basis)]
        pairs: Pairs,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed_face: usize,
    },
    /// Verify ω_G = ω = ½ω_P^ℂ on all kernel pairs.
    CheckTheorem {
        pattern: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed_face: usize,
    },
    /// Vertex-move rank test for infinitesimal rigidity.
    Rigidity {
        pattern: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed_face: usize,
    },
}

/// A failed run: the exit code plus the message for the error object.
struct Failure {
    code: u8,
    message: String,
}

/// A completed run: the JSON document, a one-line summary for standard
/// error, and the exit code (validate/check-theorem may signal 1).
struct Outcome {
    json: Value,
    summary: String,
    code: u8,
}

fn ok(json: Value, summary: String) -> Result<Outcome, Failure> {
    Ok(Outcome { json, summary, code: 0 })
}

fn fail(code: u8, message: impl Display) -> Failure {
    Failure { code, message: message.to_string() }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| fail(3, format!("{}: {e}", path.display())))
}

fn load_pattern(path: &Path) -> Result<CrossRatioSystem, Failure> {
    let text = read_text(path)?;
    let file: PatternFile =
        serde_json::from_str(&text).map_err(|e| fail(3, format!("{}: {e}", path.display())))?;
    file.build().map_err(|e| fail(3, format!("{}: {e}", path.display())))
}

fn c_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn mat_json(m: &Mat2) -> Value {
    json!([[c_json(m.a), c_json(m.b)], [c_json(m.c), c_json(m.d)]])
}

fn gram_json(g: &[Vec<Complex64>]) -> Value {
    Value::Array(
        g.iter()
            .map(|row| Value::Array(row.iter().map(|&z| c_json(z)).collect()))
            .collect(),
    )
}

fn dispatch(command: &Command) -> Result<Outcome, Failure> {
    match command {
        Command::Example { name, size } => {
            let (x, label) = match name {
                ExampleName::HexTorus => (example_hex_torus(), "hex-torus".to_string()),
                ExampleName::FlatTorus => (example_flat_torus(*size), format!("flat-torus ({size}×{size})")),
                ExampleName::Octahedron => (example_octahedron(), "octahedron".to_string()),
                ExampleName::Bolza => (example_bolza(), "bolza".to_string()),
            };
            let tri = x.triangulation();
            let summary = format!(
                "{label}: genus {}, |V|={}, |E|={}, |F|={}",
                tri.genus(),
                tri.n_vertices(),
                tri.n_edges(),
                tri.n_faces()
            );
            let file = PatternFile::from_system(&x);
            let json = serde_json::to_value(&file).map_err(|e| fail(3, e))?;
            ok(json, summary)
        }

        Command::Validate { pattern, tol, max_cycle_len, seed_face } => {
            let x = load_pattern(pattern)?;
            let opts = ReportOptions {
                kernel_tol: 1e-9,
                theorem_tol: *tol,
                max_cycle_len: *max_cycle_len,
                seed_face: *seed_face,
            };
            let report = pattern_report(&x, &opts).map_err(|e| fail(1, e))?;
            let residual_ok = report.residuals.max_product_residual <= *tol
                && report.residuals.max_sum_residual <= *tol;
            let summary = format!(
                "residuals max {:.2e} ({}); delaunay {}; dim W_X = {}ℂ/{}ℝ; theorem {}",
                report
                    .residuals
                    .max_product_residual
                    .max(report.residuals.max_sum_residual),
                if residual_ok { "ok" } else { "FAIL" },
                report.delaunay.is_delaunay,
                report.kernel.dim_complex,
                report.kernel.dim_real,
                report.theorem.verdict,
            );
            let json = serde_json::to_value(&report).map_err(|e| fail(3, e))?;
            Ok(Outcome { json, summary, code: if residual_ok { 0 } else { 1 } })
        }

        Command::Solve { theta, init, tol, max_iter } => {
            #[derive(Deserialize)]
            struct AngleFile {
                triangulation: TriangulationFile,
                theta: Vec<f64>,
            }
            let text = read_text(theta)?;
            let file: AngleFile = serde_json::from_str(&text)
                .map_err(|e| fail(3, format!("{}: {e}", theta.display())))?;
            let tri = Arc::new(
                file.triangulation
                    .build()
                    .map_err(|e| fail(3, format!("{}: {e}", theta.display())))?,
            );
            let angles = AngleStructure::new(tri.clone(), file.theta)
                .map_err(|e| fail(3, format!("{}: {e}", theta.display())))?;
            let u0 = match init {
                Some(p) => {
                    let text = read_text(p)?;
                    serde_json::from_str::<Vec<f64>>(&text)
                        .map_err(|e| fail(3, format!("{}: {e}", p.display())))?
                }
                None => vec![0.0; tri.n_edges()],
            };
            let (x, stats) = solve_pattern(&angles, &u0, *tol, *max_iter).map_err(|e| {
                let code = match e {
                    SolveError::NoConvergence { .. } | SolveError::DivergedToInfinity { .. } => 2,
                    SolveError::AngleObstruction { .. } => 1,
                    SolveError::CrossRatio(_) => 3,
                };
                fail(code, e)
            })?;
            let summary = format!(
                "converged in {} iterations, residual {:.2e}",
                stats.iterations, stats.final_residual
            );
            let json = json!({
                "pattern": serde_json::to_value(PatternFile::from_system(&x)).map_err(|e| fail(3, e))?,
                "iterations": stats.iterations,
                "final_residual": stats.final_residual,
            });
            ok(json, summary)
        }

        Command::Tangent { pattern, field, tol } => {
            let x = load_pattern(pattern)?;
            let (json, summary) = match field {
                Field::Complex => {
                    let k = kernel_complex(&x, *tol);
                    let basis: Vec<Value> = k
                        .basis
                        .iter()
                        .map(|v| Value::Array(v.iter().map(|&z| c_json(z)).collect()))
                        .collect();
                    (
                        json!({
                            "field": "complex",
                            "dim": k.dim(),
                            "singular_values": k.singular_values,
                            "gap_ratio": k.gap_ratio,
                            "ill_conditioned": k.ill_conditioned,
                            "tol": k.tol,
                            "basis": basis,
                        }),
                        format!("dim_ℂ W_X^ℂ = {} (tol {:.1e})", k.dim(), tol),
                    )
                }
                Field::Real => {
                    let k = kernel_real(&x, *tol);
                    (
                        json!({
                            "field": "real",
                            "dim": k.dim(),
                            "singular_values": k.singular_values,
                            "gap_ratio": k.gap_ratio,
                            "ill_conditioned": k.ill_conditioned,
                            "tol": k.tol,
                            "basis": k.basis,
                        }),
                        format!("dim_ℝ W_X^ℝ = {} (tol {:.1e})", k.dim(), tol),
                    )
                }
            };
            ok(json, summary)
        }

        Command::Holonomy { pattern, seed_face } => {
            let x = load_pattern(pattern)?;
            let fd = fundamental_domain(x.triangulation(), *seed_face);
            let dev = develop_auto(&x, &fd).map_err(|e| fail(1, e))?;
            let tri = dev.triangulation();
            let generators: Vec<Value> = fd
                .generators()
                .iter()
                .zip(dev.generator_rho())
                .enumerate()
                .map(|(i, (g, rho))| {
                    json!({
                        "index": i,
                        "edge": g.edge,
                        "half_edge": g.half_edge,
                        "matrix": mat_json(&rho.m),
                    })
                })
                .collect();
            let defects: Vec<f64> = (0..tri.n_vertices())
                .map(|v| dev.vertex_cycle_defect(v))
                .collect();
            // The dual-complex presentation's relators are the vertex-star
            // words, so their worst holonomy defect is the relator defect.
            let relator_defect = defects.iter().copied().fold(0.0f64, f64::max);
            let summary = format!(
                "{} generators; relator defect {relator_defect:.2e}; layout error {:.2e}",
                generators.len(),
                dev.max_cross_ratio_error()
            );
            let json = json!({
                "n_generators": generators.len(),
                "generators": generators,
                "relator_defect": relator_defect,
                "vertex_cycle_defects": defects,
                "max_cross_ratio_error": dev.max_cross_ratio_error(),
            });
            ok(json, summary)
        }

        Command::Forms { pattern, pairs: Pairs::Basis, tol, seed_face } => {
            let x = load_pattern(pattern)?;
            let fd = fundamental_domain(x.triangulation(), *seed_face);
            let dev = develop_auto(&x, &fd).map_err(|e| fail(1, e))?;
            let thm = check_theorem(&x, &dev, f64::INFINITY).map_err(|e| fail(1, e))?;
            let summary = format!(
                "{} kernel vectors; max pairwise discrepancy {:.2e}",
                thm.gram_omega_g.len(),
                thm.max_discrepancy
            );
            let json = json!({
                "dim": thm.gram_omega_g.len(),
                "kernel_tol": tol,
                "gram_omega_g": gram_json(&thm.gram_omega_g),
                "gram_omega_cup": gram_json(&thm.gram_omega_cup),
                "gram_half_penner": gram_json(&thm.gram_half_penner),
                "gram_re_omega_g_real": thm.gram_re_omega_g_real,
                "re_omega_g_rank": thm.re_omega_g_rank,
                "max_discrepancy": thm.max_discrepancy,
                "max_im_omega_g_real": thm.max_im_omega_g_real,
            });
            ok(json, summary)
        }

        Command::CheckTheorem { pattern, tol, seed_face } => {
            let x = load_pattern(pattern)?;
            let fd = fundamental_domain(x.triangulation(), *seed_face);
            let dev = develop_auto(&x, &fd).map_err(|e| fail(1, e))?;
            match check_theorem(&x, &dev, *tol) {
                Ok(thm) => ok(
                    json!({
                        "pass": true,
                        "max_discrepancy": thm.max_discrepancy,
                        "max_im_omega_g_real": thm.max_im_omega_g_real,
                        "re_omega_g_rank": thm.re_omega_g_rank,
                        "tol": tol,
                    }),
                    format!(
                        "PASS: ω_G = ω = ½ω_P^ℂ, max discrepancy {:.2e} ≤ {tol:.1e}",
                        thm.max_discrepancy
                    ),
                ),
                Err(FormsError::TheoremViolation { max_discrepancy, tol }) => Ok(Outcome {
                    json: json!({
                        "pass": false,
                        "max_discrepancy": max_discrepancy,
                        "tol": tol,
                    }),
                    summary: format!(
                        "FAIL: max discrepancy {max_discrepancy:.2e} > {tol:.1e}"
                    ),
                    code: 1,
                }),
                Err(e) => Err(fail(1, e)),
            }
        }

        Command::Rigidity { pattern, tol, seed_face } => {
            let x = load_pattern(pattern)?;
            let fd = fundamental_domain(x.triangulation(), *seed_face);
            let dev = develop_auto(&x, &fd).map_err(|e| fail(1, e))?;
            let rig = rigidity_check(&x, &dev, *tol).map_err(|e| fail(1, e))?;
            let summary = format!(
                "{}: rank β = {} of {}, implied dim W_X^ℝ = {}",
                if rig.rigid { "rigid" } else { "flexible" },
                rig.rank,
                2 * x.triangulation().n_vertices(),
                rig.implied_dim_wx_real
            );
            let json = json!({
                "rigid": rig.rigid,
                "rank": rig.rank,
                "n_vertices": x.triangulation().n_vertices(),
                "dim_w_real": rig.dim_w_real,
                "implied_dim_wx_real": rig.implied_dim_wx_real,
                "singular_values": rig.singular_values,
                "tol": tol,
            });
            ok(json, summary)
        }
    }
}

fn emit(output: &Option<PathBuf>, value: &Value) -> Result<(), Failure> {
    let text = format!("{:#}\n", value);
    match output {
        Some(path) => fs::write(path, text).map_err(|e| fail(3, format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli.command) {
        Ok(out) => {
            if let Err(f) = emit(&cli.output, &out.json) {
                eprintln!("error: {}", f.message);
                return ExitCode::from(f.code);
            }
            eprintln!("{}", out.summary);
            ExitCode::from(out.code)
        }
        Err(f) => {
            let err_json = json!({ "error": f.message, "exit_code": f.code });
            let _ = emit(&cli.output, &err_json);
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
