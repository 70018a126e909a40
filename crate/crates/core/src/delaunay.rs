//! The Delaunay test for angle structures.
//!
//! An angle structure Θ: E → [0, π) is Delaunay when
//!
//! * (i) at every vertex the link angles sum to 2π (loop edges counted
//!   twice), and
//! * (ii) every simple closed dual path that is contractible — but does not
//!   enclose exactly one vertex — crosses total angle strictly greater
//!   than 2π.
//!
//! Condition (ii) is verified by enumerating simple dual cycles up to a
//! configurable length bound (full enumeration is exponential) and
//! classifying each cycle topologically: the surface is cut along the
//! curve, the pieces are glued back up with a union–find, and a side is a
//! disk exactly when its Euler characteristic is 1.  Cycles around a single
//! vertex carry angle sum exactly 2π by (i) and are exempt.

use std::f64::consts::TAU;

use serde::Serialize;

use crate::crossratio::AngleStructure;
use crate::surface::Triangulation;

/// Tolerance for the per-vertex sum Σ Θ = 2π of condition (i).
pub const VERTEX_SUM_TOL: f64 = 1e-12;

/// Margin below which a constrained dual cycle's angle sum counts as
/// violating the strict inequality of condition (ii).
pub const CYCLE_MARGIN: f64 = 1e-12;

/// A contractible dual cycle whose crossed angles do not exceed 2π.
#[derive(Debug, Clone, Serialize)]
pub struct DualCycleViolation {
    /// Faces the dual path runs through, in order.
    pub faces: Vec<usize>,
    /// Edges crossed between consecutive faces.
    pub edges: Vec<usize>,
    /// Σ Θ over the crossed edges; ≤ 2π (within margin).
    pub angle_sum: f64,
}

/// Result of the Delaunay test.
#[derive(Debug, Clone, Serialize)]
pub struct DelaunayReport {
    /// max over vertices of |Σ_link Θ − 2π|.
    pub vertex_sum_max_error: f64,
    /// Condition (i): every vertex sum within [`VERTEX_SUM_TOL`].
    pub condition_i: bool,
    /// Length bound used for the dual-cycle enumeration.
    pub max_cycle_len: usize,
    /// Simple dual cycles enumerated within the bound.
    pub cycles_enumerated: usize,
    /// Cycles that bound a disk and are subject to the > 2π constraint.
    pub cycles_constrained: usize,
    /// Contractible cycles skipped for enclosing exactly one vertex.
    pub cycles_exempt: usize,
    /// Constrained cycles at or below 2π.
    pub violations: Vec<DualCycleViolation>,
    /// Both conditions hold (condition (ii) up to the length bound).
    pub is_delaunay: bool,
}

/// Checks Def.-style Delaunay conditions (i) and (ii) for an angle
/// structure; (ii) is exhaustive only up to `max_cycle_len` crossed edges.
pub fn is_delaunay(angles: &AngleStructure, max_cycle_len: usize) -> DelaunayReport {
    let tri = angles.triangulation();
    let theta = angles.theta();

    let mut vertex_sum_max_error = 0.0f64;
    for v in 0..tri.n_vertices() {
        vertex_sum_max_error = vertex_sum_max_error.max((angles.link_sum(v) - TAU).abs());
    }
    let condition_i = vertex_sum_max_error <= VERTEX_SUM_TOL;

    let mut cycles_enumerated = 0usize;
    let mut cycles_constrained = 0usize;
    let mut cycles_exempt = 0usize;
    let mut violations = Vec::new();

    enumerate_simple_dual_cycles(tri, max_cycle_len, |cycle| {
        cycles_enumerated += 1;
        let Some(sides) = separate(tri, cycle) else {
            return; // non-separating, hence non-contractible: no constraint
        };
        if !sides.iter().any(|s| s.euler == 1) {
            return; // separating but bounding no disk: non-contractible
        }
        if sides.iter().any(|s| s.euler == 1 && s.n_vertices == 1) {
            cycles_exempt += 1;
            return;
        }
        cycles_constrained += 1;
        let angle_sum: f64 = cycle.iter().map(|&h| theta[tri.edge_of(h)]).sum();
        if angle_sum <= TAU + CYCLE_MARGIN {
            violations.push(DualCycleViolation {
                faces: cycle.iter().map(|&h| tri.face(h)).collect(),
                edges: cycle.iter().map(|&h| tri.edge_of(h)).collect(),
                angle_sum,
            });
        }
    });

    let is_delaunay = condition_i && violations.is_empty();
    DelaunayReport {
        vertex_sum_max_error,
        condition_i,
        max_cycle_len,
        cycles_enumerated,
        cycles_constrained,
        cycles_exempt,
        violations,
        is_delaunay,
    }
}

/// Enumerates simple closed dual paths with at most `max_len` crossings,
/// one representative per cycle (rooted at its smallest face, lower first
/// crossing).  A cycle is passed to `visit` as the sequence of half-edges
/// it crosses outward: face(h_m) is the m-th face and each edge is crossed
/// once.
fn enumerate_simple_dual_cycles<F: FnMut(&[usize])>(
    tri: &Triangulation,
    max_len: usize,
    mut visit: F,
) {
    let n_faces = tri.n_faces();
    let mut in_path = vec![false; n_faces];
    let mut edge_used = vec![false; tri.n_edges()];
    let mut stack: Vec<usize> = Vec::new();

    fn dfs<F: FnMut(&[usize])>(
        tri: &Triangulation,
        root: usize,
        max_len: usize,
        in_path: &mut [bool],
        edge_used: &mut [bool],
        stack: &mut Vec<usize>,
        visit: &mut F,
    ) {
        let current = tri.face(tri.twin(*stack.last().unwrap()));
        for h in tri.face_half_edges(current) {
            let e = tri.edge_of(h);
            if edge_used[e] {
                continue;
            }
            let nbr = tri.face(tri.twin(h));
            if nbr == root {
                // Keep one of the two traversal directions per cycle.
                stack.push(h);
                if tri.edge_of(stack[0]) < e {
                    visit(stack);
                }
                stack.pop();
            } else if !in_path[nbr] && nbr > root && stack.len() + 1 < max_len {
                stack.push(h);
                in_path[nbr] = true;
                edge_used[e] = true;
                dfs(tri, root, max_len, in_path, edge_used, stack, visit);
                edge_used[e] = false;
                in_path[nbr] = false;
                stack.pop();
            }
        }
    }

    for root in 0..n_faces {
        in_path[root] = true;
        for h0 in tri.face_half_edges(root) {
            let nbr = tri.face(tri.twin(h0));
            if nbr == root {
                // Self-glued face: the dual loop crossing one edge once.
                if h0 < tri.twin(h0) && max_len >= 1 {
                    stack.push(h0);
                    visit(&stack);
                    stack.pop();
                }
                continue;
            }
            if nbr < root || max_len < 2 {
                continue;
            }
            stack.push(h0);
            in_path[nbr] = true;
            edge_used[tri.edge_of(h0)] = true;
            dfs(tri, root, max_len, &mut in_path, &mut edge_used, &mut stack, &mut visit);
            edge_used[tri.edge_of(h0)] = false;
            in_path[nbr] = false;
            stack.pop();
        }
        in_path[root] = false;
    }
}

#[derive(Debug, Clone, Copy)]
struct Side {
    euler: i64,
    n_vertices: usize,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }
    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
        }
    }
}

/// Cuts the surface along the dual cycle and reports the two sides, or
/// `None` when the curve does not separate.
///
/// Pieces are tracked by face corners: a crossed face falls apart into the
/// cut-off corner between its two crossed sides and a quadrilateral with
/// the remaining two corners; gluing survives across uncrossed edges and
/// across the two stubs of each crossed edge.  Per side the CW count is
/// χ = V + pieces − stubs − uncrossed edges + uncrossed faces.
fn separate(tri: &Triangulation, cycle: &[usize]) -> Option<[Side; 2]> {
    let k = cycle.len();
    let mut crossed_edge = vec![false; tri.n_edges()];
    let mut crossed_face = vec![false; tri.n_faces()];
    for &h in cycle {
        crossed_edge[tri.edge_of(h)] = true;
        crossed_face[tri.face(h)] = true;
    }

    let mut uf = UnionFind::new(tri.n_half_edges());
    // Split faces into pieces. Entering corner of face(h_m) is
    // twin(h_{m−1}); leaving corner is h_m; the corner slot between the two
    // crossed sides is cut off, the other two stay together.
    let mut cut_slot = vec![usize::MAX; tri.n_faces()];
    for m in 0..k {
        let leave = cycle[m];
        let enter = tri.twin(cycle[(m + k - 1) % k]);
        debug_assert_eq!(tri.face(enter), tri.face(leave));
        debug_assert_ne!(enter, leave, "cycle crosses one edge twice in a face");
        debug_assert!(tri.next(enter) == leave || tri.next(leave) == enter);
        let cut = if tri.next(enter) == leave { leave } else { enter };
        cut_slot[tri.face(leave)] = cut;
        uf.union(tri.next(cut), tri.prev(cut));
    }
    for f in 0..tri.n_faces() {
        if !crossed_face[f] {
            let [a, b, c] = tri.face_half_edges(f);
            uf.union(a, b);
            uf.union(b, c);
        }
    }
    // Glue across uncrossed edges, and across the two stubs of each crossed
    // edge (the stub at a vertex joins the two adjacent corner slots there).
    for e in 0..tri.n_edges() {
        let [h, t] = tri.edge_half_edges(e);
        if crossed_edge[e] {
            uf.union(h, tri.next(t));
            uf.union(tri.next(h), t);
        } else {
            uf.union(h, t);
        }
    }

    let side0 = uf.find(cycle[0]);
    let side_of =
        |uf: &mut UnionFind, slot: usize| -> usize { usize::from(uf.find(slot) != side0) };
    // Verify there are exactly two components overall.
    let mut roots = Vec::new();
    for s in 0..tri.n_half_edges() {
        let r = uf.find(s);
        if !roots.contains(&r) {
            roots.push(r);
        }
    }
    match roots.len() {
        1 => return None,
        2 => {}
        n => unreachable!("cutting a connected surface along one curve left {n} components"),
    }

    let mut sides = [
        Side { euler: 0, n_vertices: 0 },
        Side { euler: 0, n_vertices: 0 },
    ];
    // Vertices: the curve misses them, so any corner slot at the vertex
    // determines its side.
    for v in 0..tri.n_vertices() {
        let slot = tri.vertex_link(v).corners()[0];
        let s = side_of(&mut uf, slot);
        sides[s].euler += 1;
        sides[s].n_vertices += 1;
    }
    for e in 0..tri.n_edges() {
        let h = tri.edge_half_edges(e)[0];
        if crossed_edge[e] {
            // Two stubs, each on the side of its endpoint.
            for slot in [h, tri.next(h)] {
                sides[side_of(&mut uf, slot)].euler -= 1;
            }
        } else {
            sides[side_of(&mut uf, h)].euler -= 1;
        }
    }
    for f in 0..tri.n_faces() {
        if crossed_face[f] {
            let cut = cut_slot[f];
            sides[side_of(&mut uf, cut)].euler += 1;
            sides[side_of(&mut uf, tri.next(cut))].euler += 1;
        } else {
            sides[side_of(&mut uf, tri.face_half_edges(f)[0])].euler += 1;
        }
    }
    Some(sides)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;
    use std::sync::Arc;

    use crate::crossratio::AngleStructure;
    use crate::patterns::{example_bolza, example_flat_torus, example_octahedron};
    use crate::surface::{hex_torus_triangulation, octahedron_triangulation};

    #[test]
    fn hex_torus_is_delaunay_vacuously() {
        let tri = Arc::new(hex_torus_triangulation());
        let angles = AngleStructure::new(tri, vec![PI / 3.0; 3]).unwrap();
        let report = is_delaunay(&angles, 12);
        eprintln!(
            "hex torus: {} cycles, {} constrained, {} exempt",
            report.cycles_enumerated, report.cycles_constrained, report.cycles_exempt
        );
        assert!(report.condition_i, "6·π/3 = 2π");
        assert!(report.vertex_sum_max_error < 1e-13);
        // Two faces share three edges: the three 2-cycles are all essential
        // loops on the torus, so condition (ii) never constrains anything.
        assert_eq!(report.cycles_enumerated, 3);
        assert_eq!(report.cycles_constrained, 0);
        assert_eq!(report.cycles_exempt, 0);
        assert!(report.is_delaunay);
    }

    #[test]
    fn zero_angles_fail_condition_i() {
        let tri = Arc::new(hex_torus_triangulation());
        let angles = AngleStructure::new(tri, vec![0.0; 3]).unwrap();
        let report = is_delaunay(&angles, 12);
        assert!(!report.condition_i);
        assert!(!report.is_delaunay);
        assert!((report.vertex_sum_max_error - TAU).abs() < 1e-13);
    }

    #[test]
    fn octahedron_is_delaunay_with_single_vertex_exemptions() {
        let x = example_octahedron();
        let report = is_delaunay(&x.angle_structure(), 12);
        eprintln!(
            "octahedron: {} cycles, {} constrained, {} exempt, max Σ error {:.2e}",
            report.cycles_enumerated,
            report.cycles_constrained,
            report.cycles_exempt,
            report.vertex_sum_max_error
        );
        assert!(report.condition_i, "degree 4 × π/2 = 2π at every vertex");
        // The dual cube's six 4-cycles each enclose one octahedron vertex.
        assert_eq!(report.cycles_exempt, 6);
        assert!(report.cycles_constrained > 0, "genus 0: longer cycles all bound disks");
        assert!(report.violations.is_empty());
        assert!(report.is_delaunay);
    }

    #[test]
    fn flat_torus_is_delaunay_despite_zero_diagonal_angles() {
        for k in [2usize, 3] {
            let x = example_flat_torus(k);
            let report = is_delaunay(&x.angle_structure(), 8);
            eprintln!(
                "flat torus k={k}: {} cycles, {} constrained, {} exempt",
                report.cycles_enumerated, report.cycles_constrained, report.cycles_exempt
            );
            assert!(report.condition_i);
            assert_eq!(report.cycles_exempt, k * k, "one exempt hexagon per vertex");
            assert!(report.violations.is_empty(), "k={k}: {:?}", report.violations);
            assert!(report.is_delaunay);
        }
    }

    #[test]
    fn bolza_is_delaunay() {
        let x = example_bolza();
        // Six faces: the enumeration within any bound ≥ 6 is complete.
        let report = is_delaunay(&x.angle_structure(), 12);
        eprintln!(
            "bolza: Σ error {:.2e}, {} cycles, {} constrained",
            report.vertex_sum_max_error, report.cycles_enumerated, report.cycles_constrained
        );
        assert!(report.condition_i, "18 corner angles at the vertex sum to 2π");
        // Every simple dual cycle crosses some glued octagon side exactly
        // once, so its holonomy word is a nonempty product of distinct
        // generators: nothing is contractible.
        assert_eq!(report.cycles_constrained, 0);
        assert_eq!(report.cycles_exempt, 0);
        assert!(report.is_delaunay);
    }

    #[test]
    fn small_angles_violate_condition_ii() {
        // Θ ≡ 0.1 on the octahedron: vertex-star cycles (sum 0.4) are
        // exempt, but every longer disk cycle falls far short of 2π.
        let tri = Arc::new(octahedron_triangulation());
        let angles = AngleStructure::new(tri, vec![0.1; 12]).unwrap();
        let report = is_delaunay(&angles, 12);
        assert!(!report.condition_i);
        assert!(!report.violations.is_empty());
        assert_eq!(report.cycles_exempt, 6);
        for v in &report.violations {
            let expect = 0.1 * v.edges.len() as f64;
            assert!((v.angle_sum - expect).abs() < 1e-12);
            assert!(v.angle_sum < TAU);
            assert_eq!(v.faces.len(), v.edges.len());
        }
        assert!(!report.is_delaunay);
    }
}
