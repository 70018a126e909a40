//! Triangulated closed oriented surfaces with half-edge connectivity.
//!
//! Faces are stored as counterclockwise vertex triples. All traversal is
//! corner-based, so loop edges and multiple edges between the same vertex
//! pair are fully supported: a one-vertex torus with face list
//! `[(0,0,0), (0,0,0)]` is a valid input provided the corner gluing is given
//! explicitly (vertex labels alone cannot identify opposite half-edges
//! there).
//!
//! Half-edge `h` lives in face `h / 3` at corner `h % 3` and is directed
//! from `faces[h/3][h%3]` to the next corner of the face. `twin(h)` is the
//! oppositely directed half-edge of the neighboring face. The *clockwise*
//! order of the corners around a vertex — the order in which the vertex
//! equations of a cross-ratio system multiply their factors — is obtained by
//! iterating `h ↦ next(twin(h))` over outgoing half-edges, which runs
//! against the counterclockwise face orientation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors reported while building or traversing a triangulation.
#[derive(Debug, Error)]
pub enum SurfaceError {
    /// A face references a vertex id outside `0..n_vertices`.
    #[error("face {face} references vertex {vertex} but only {n_vertices} vertices are declared")]
    InvalidIndex {
        face: usize,
        vertex: usize,
        n_vertices: usize,
    },
    /// An undirected edge is incident to a number of face sides other than two.
    #[error("edge between vertices {i} and {j} has {count} incident face sides; a closed surface needs exactly 2")]
    NonManifold { i: usize, j: usize, count: usize },
    /// A vertex whose corners do not form a single cycle.
    #[error("the corners around vertex {vertex} split into more than one cycle")]
    NonManifoldVertex { vertex: usize },
    /// Two face sides traverse an edge in the same direction, so no
    /// orientation-compatible gluing exists.
    #[error("edge between vertices {i} and {j} is traversed twice in the same direction; faces are not consistently oriented")]
    OrientationMismatch { i: usize, j: usize },
    /// An edge with only one incident face side.
    #[error("edge between vertices {i} and {j} borders only one face; the surface is not closed")]
    NotClosed { i: usize, j: usize },
    /// Vertex labels do not determine the gluing (loop or multiple edges).
    #[error("edge between vertices {i} and {j} appears {count} times; supply corner_gluing to disambiguate")]
    AmbiguousGluing { i: usize, j: usize, count: usize },
    /// The face adjacency graph is not connected.
    #[error("the triangulation is not connected ({components} face components)")]
    Disconnected { components: usize },
    /// An explicit corner gluing that is not a fixed-point-free involution on
    /// half-edges, or that pairs half-edges with incompatible endpoints.
    #[error("corner_gluing is invalid: {reason}")]
    BadGluing { reason: String },
}

/// A triangulated closed oriented surface in half-edge form.
///
/// Invariants established by [`Triangulation::build`]:
/// * every undirected edge has exactly two incident face sides with opposite
///   directions (closed, consistently oriented);
/// * the corners around each vertex form a single cycle (manifold);
/// * the face adjacency graph is connected;
/// * `n_vertices − n_edges + n_faces = 2 − 2·genus` with integer genus ≥ 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triangulation {
    n_vertices: usize,
    faces: Vec<[usize; 3]>,
    twin: Vec<usize>,
    /// Half-edge id → undirected edge id.
    edge_of: Vec<usize>,
    /// Edge id → `[h, twin(h)]` with `h` the lower half-edge id.
    edges: Vec<[usize; 2]>,
    /// Vertex id → outgoing half-edges in clockwise order, starting at the
    /// outgoing half-edge with the lowest id.
    links: Vec<Vec<usize>>,
    genus: usize,
}

impl Triangulation {
    /// Builds a triangulation from counterclockwise faces.
    ///
    /// When `corner_gluing` is `None` the gluing is inferred from vertex
    /// labels, which is only possible when every undirected edge is uniquely
    /// identified by its endpoints (no loops, no multiple edges). Explicit
    /// gluing is a list of unordered half-edge pairs covering every
    /// half-edge exactly once.
    pub fn build(
        n_vertices: usize,
        faces: Vec<[usize; 3]>,
        corner_gluing: Option<&[[usize; 2]]>,
    ) -> Result<Self, SurfaceError> {
        for (f, tri) in faces.iter().enumerate() {
            for &v in tri {
                if v >= n_vertices {
                    return Err(SurfaceError::InvalidIndex {
                        face: f,
                        vertex: v,
                        n_vertices,
                    });
                }
            }
        }
        let nh = 3 * faces.len();
        let origin = |h: usize| faces[h / 3][h % 3];
        let dst = |h: usize| faces[h / 3][(h % 3 + 1) % 3];

        let twin = match corner_gluing {
            Some(pairs) => {
                let mut twin = vec![usize::MAX; nh];
                for &[a, b] in pairs {
                    if a >= nh || b >= nh || a == b {
                        return Err(SurfaceError::BadGluing {
                            reason: format!("pair [{a}, {b}] is out of range or degenerate"),
                        });
                    }
                    if twin[a] != usize::MAX || twin[b] != usize::MAX {
                        return Err(SurfaceError::BadGluing {
                            reason: format!("half-edge {a} or {b} is glued twice"),
                        });
                    }
                    if origin(a) != dst(b) || dst(a) != origin(b) {
                        return Err(SurfaceError::BadGluing {
                            reason: format!(
                                "pair [{a}, {b}] glues vertices ({},{}) to ({},{}); directions must be opposite",
                                origin(a),
                                dst(a),
                                origin(b),
                                dst(b)
                            ),
                        });
                    }
                    twin[a] = b;
                    twin[b] = a;
                }
                if let Some(h) = twin.iter().position(|&t| t == usize::MAX) {
                    return Err(SurfaceError::BadGluing {
                        reason: format!("half-edge {h} is not glued"),
                    });
                }
                twin
            }
            None => {
                // Group half-edges by unordered endpoint pair.
                let mut groups: std::collections::BTreeMap<(usize, usize), Vec<usize>> =
                    std::collections::BTreeMap::new();
                for h in 0..nh {
                    let (i, j) = (origin(h), dst(h));
                    let key = (i.min(j), i.max(j));
                    groups.entry(key).or_default().push(h);
                }
                let mut twin = vec![usize::MAX; nh];
                for (&(i, j), hs) in &groups {
                    match hs.len() {
                        1 => return Err(SurfaceError::NotClosed { i, j }),
                        2 => {
                            let (a, b) = (hs[0], hs[1]);
                            if i != j && origin(a) == origin(b) {
                                return Err(SurfaceError::OrientationMismatch { i, j });
                            }
                            if i == j {
                                // A single loop edge: gluing is forced, but the
                                // two sides cannot be checked by labels.
                                return Err(SurfaceError::AmbiguousGluing { i, j, count: 2 });
                            }
                            twin[a] = b;
                            twin[b] = a;
                        }
                        n if n % 2 == 1 => {
                            return Err(SurfaceError::NonManifold { i, j, count: n })
                        }
                        n => return Err(SurfaceError::AmbiguousGluing { i, j, count: n }),
                    }
                }
                twin
            }
        };

        // Undirected edges: one id per twin pair, ordered by lower half-edge.
        let mut edge_of = vec![usize::MAX; nh];
        let mut edges = Vec::new();
        for h in 0..nh {
            if h < twin[h] {
                edge_of[h] = edges.len();
                edge_of[twin[h]] = edges.len();
                edges.push([h, twin[h]]);
            }
        }

        // Manifold vertex links: the outgoing half-edges at each vertex must
        // form one cycle under clockwise rotation h ↦ next(twin(h)).
        let next = |h: usize| h / 3 * 3 + (h % 3 + 1) % 3;
        let mut links: Vec<Vec<usize>> = vec![Vec::new(); n_vertices];
        let mut out_count = vec![0usize; n_vertices];
        let mut first_out = vec![usize::MAX; n_vertices];
        for h in 0..nh {
            let v = origin(h);
            out_count[v] += 1;
            first_out[v] = first_out[v].min(h);
        }
        for v in 0..n_vertices {
            if out_count[v] == 0 {
                continue;
            }
            let start = first_out[v];
            let mut h = start;
            loop {
                links[v].push(h);
                if links[v].len() > out_count[v] {
                    return Err(SurfaceError::NonManifoldVertex { vertex: v });
                }
                h = next(twin[h]);
                if h == start {
                    break;
                }
            }
            if links[v].len() != out_count[v] {
                return Err(SurfaceError::NonManifoldVertex { vertex: v });
            }
        }

        // Connectivity of the face adjacency graph.
        if !faces.is_empty() {
            let mut seen = vec![false; faces.len()];
            let mut stack = vec![0usize];
            seen[0] = true;
            let mut reached = 1;
            while let Some(f) = stack.pop() {
                for c in 0..3 {
                    let g = twin[3 * f + c] / 3;
                    if !seen[g] {
                        seen[g] = true;
                        reached += 1;
                        stack.push(g);
                    }
                }
            }
            if reached != faces.len() {
                let components = 1 + seen.iter().filter(|s| !**s).count().min(1);
                return Err(SurfaceError::Disconnected { components });
            }
        }

        let chi = n_vertices as i64 - edges.len() as i64 + faces.len() as i64;
        debug_assert!(chi % 2 == 0, "closed oriented surface has even Euler characteristic");
        let genus = ((2 - chi) / 2).max(0) as usize;

        Ok(Self {
            n_vertices,
            faces,
            twin,
            edge_of,
            edges,
            links,
            genus,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn n_half_edges(&self) -> usize {
        3 * self.faces.len()
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    /// The face containing half-edge `h`.
    pub fn face(&self, h: usize) -> usize {
        h / 3
    }

    /// The three half-edges of face `f`, in counterclockwise corner order.
    pub fn face_half_edges(&self, f: usize) -> [usize; 3] {
        [3 * f, 3 * f + 1, 3 * f + 2]
    }

    /// Source vertex of half-edge `h`.
    pub fn origin(&self, h: usize) -> usize {
        self.faces[h / 3][h % 3]
    }

    /// Target vertex of half-edge `h`.
    pub fn dst(&self, h: usize) -> usize {
        self.faces[h / 3][(h % 3 + 1) % 3]
    }

    /// Next half-edge counterclockwise within the same face.
    pub fn next(&self, h: usize) -> usize {
        h / 3 * 3 + (h % 3 + 1) % 3
    }

    /// Previous half-edge within the same face.
    pub fn prev(&self, h: usize) -> usize {
        h / 3 * 3 + (h % 3 + 2) % 3
    }

    /// The oppositely directed half-edge across the shared edge.
    pub fn twin(&self, h: usize) -> usize {
        self.twin[h]
    }

    /// Undirected edge id of half-edge `h`.
    pub fn edge_of(&self, h: usize) -> usize {
        self.edge_of[h]
    }

    /// The two half-edges of edge `e`, lower id first.
    pub fn edge_half_edges(&self, e: usize) -> [usize; 2] {
        self.edges[e]
    }

    /// Endpoint vertices of edge `e` (in the direction of its lower half-edge).
    pub fn edge_endpoints(&self, e: usize) -> (usize, usize) {
        let h = self.edges[e][0];
        (self.origin(h), self.dst(h))
    }

    /// True if edge `e` joins a vertex to itself.
    pub fn is_loop(&self, e: usize) -> bool {
        let (i, j) = self.edge_endpoints(e);
        i == j
    }

    /// The next outgoing half-edge clockwise around `origin(h)`.
    pub fn clockwise_next(&self, h: usize) -> usize {
        self.next(self.twin[h])
    }

    /// The next outgoing half-edge counterclockwise around `origin(h)`.
    pub fn counterclockwise_next(&self, h: usize) -> usize {
        self.twin[self.prev(h)]
    }

    /// The clockwise vertex link of `v`.
    ///
    /// `corners[m]` is the m-th outgoing half-edge in clockwise order,
    /// starting from the outgoing half-edge with the lowest id; the spoke
    /// edge of slot m is `edge_of(corners[m])` and loop edges occupy two
    /// slots. The degree equals the number of corners at `v`.
    pub fn vertex_link(&self, v: usize) -> VertexLink<'_> {
        VertexLink {
            tri: self,
            vertex: v,
            corners: &self.links[v],
        }
    }

    /// Degree of vertex `v` (loop edges counted twice).
    pub fn degree(&self, v: usize) -> usize {
        self.links[v].len()
    }
}

/// The cyclically ordered corners around a vertex, clockwise.
#[derive(Debug, Clone, Copy)]
pub struct VertexLink<'a> {
    tri: &'a Triangulation,
    vertex: usize,
    corners: &'a [usize],
}

impl<'a> VertexLink<'a> {
    pub fn vertex(&self) -> usize {
        self.vertex
    }

    pub fn degree(&self) -> usize {
        self.corners.len()
    }

    /// Outgoing half-edges in clockwise order.
    pub fn corners(&self) -> &'a [usize] {
        self.corners
    }

    /// Spoke edge ids in clockwise order (one entry per slot; a loop edge
    /// appears in two slots).
    pub fn spoke_edges(&self) -> Vec<usize> {
        self.corners.iter().map(|&h| self.tri.edge_of(h)).collect()
    }

    /// Link neighbor vertices in clockwise order.
    pub fn neighbors(&self) -> Vec<usize> {
        self.corners.iter().map(|&h| self.tri.dst(h)).collect()
    }
}

/// A generator of the fundamental group attached to a non-tree dual edge.
///
/// The canonical crossing direction is *via the lower half-edge*: crossing
/// from `face(half_edge)` into `face(twin(half_edge))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Generator {
    /// Undirected edge crossed by this generator.
    pub edge: usize,
    /// The lower half-edge of that edge; the canonical crossing leaves its face.
    pub half_edge: usize,
}

/// A dual spanning tree rooted at a face, presenting the surface as a
/// simply connected union of faces glued along tree edges, with one
/// fundamental-group generator per remaining edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FundamentalDomain {
    root: usize,
    /// Faces in BFS discovery order (deterministic: half-edge order).
    order: Vec<usize>,
    /// Per face: the half-edge *in that face* crossed when entering it from
    /// its BFS parent; `None` for the root.
    entry: Vec<Option<usize>>,
    /// Edge id → true when the edge lies in the dual spanning tree.
    tree_edge: Vec<bool>,
    generators: Vec<Generator>,
    /// Edge id → index into `generators` for non-tree edges.
    generator_of: Vec<Option<usize>>,
}

impl FundamentalDomain {
    pub fn root(&self) -> usize {
        self.root
    }

    /// Faces in BFS order; the first entry is the root.
    pub fn face_order(&self) -> &[usize] {
        &self.order
    }

    /// The half-edge in `f` crossed when `f` was entered from its parent.
    pub fn entry_half_edge(&self, f: usize) -> Option<usize> {
        self.entry[f]
    }

    pub fn is_tree_edge(&self, e: usize) -> bool {
        self.tree_edge[e]
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    /// Generator index for a non-tree edge.
    pub fn generator_of(&self, e: usize) -> Option<usize> {
        self.generator_of[e]
    }

    /// Signed generator letter for crossing *out of* `face(h)` through `h`:
    /// positive when `h` is the canonical half-edge, negative for the
    /// reverse crossing, `None` on tree edges. Letters are 1-based so that
    /// `-letter` encodes the inverse.
    pub fn letter(&self, tri: &Triangulation, h: usize) -> Option<i32> {
        let e = tri.edge_of(h);
        self.generator_of[e].map(|g| {
            if self.generators[g].half_edge == h {
                g as i32 + 1
            } else {
                -(g as i32 + 1)
            }
        })
    }
}

/// Builds the BFS dual spanning tree rooted at `root` and the induced
/// fundamental-group generators, one per non-tree edge.
pub fn fundamental_domain(tri: &Triangulation, root: usize) -> FundamentalDomain {
    assert!(root < tri.n_faces(), "root face {root} out of range");
    let nf = tri.n_faces();
    let mut entry = vec![None; nf];
    let mut seen = vec![false; nf];
    let mut order = Vec::with_capacity(nf);
    let mut tree_edge = vec![false; tri.n_edges()];
    let mut queue = std::collections::VecDeque::new();
    seen[root] = true;
    queue.push_back(root);
    while let Some(f) = queue.pop_front() {
        order.push(f);
        for c in 0..3 {
            let h = 3 * f + c;
            let t = tri.twin(h);
            let g = tri.face(t);
            if !seen[g] {
                seen[g] = true;
                entry[g] = Some(t);
                tree_edge[tri.edge_of(h)] = true;
                queue.push_back(g);
            }
        }
    }
    let mut generators = Vec::new();
    let mut generator_of = vec![None; tri.n_edges()];
    for e in 0..tri.n_edges() {
        if !tree_edge[e] {
            generator_of[e] = Some(generators.len());
            generators.push(Generator {
                edge: e,
                half_edge: tri.edge_half_edges(e)[0],
            });
        }
    }
    FundamentalDomain {
        root,
        order,
        entry,
        tree_edge,
        generators,
        generator_of,
    }
}

/// Serialized form of a triangulation.
///
/// `corner_gluing` is required exactly when vertex labels do not determine
/// the gluing (loop edges or multiple edges).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TriangulationFile {
    pub n_vertices: usize,
    pub faces: Vec<[usize; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corner_gluing: Option<Vec<[usize; 2]>>,
}

impl TriangulationFile {
    pub fn build(&self) -> Result<Triangulation, SurfaceError> {
        Triangulation::build(self.n_vertices, self.faces.clone(), self.corner_gluing.as_deref())
    }

    pub fn from_triangulation(tri: &Triangulation) -> Self {
        Self {
            n_vertices: tri.n_vertices(),
            faces: tri.faces().to_vec(),
            corner_gluing: Some((0..tri.n_edges()).map(|e| tri.edge_half_edges(e)).collect()),
        }
    }
}

/// The standard one-vertex torus: two faces, three edges, explicit gluing.
pub fn hex_torus_triangulation() -> Triangulation {
    // Fundamental parallelogram spanned by 1 and τ, faces (0, 1, τ) and
    // (1, 1+τ, τ); the twin pairs identify translated sides.
    Triangulation::build(1, vec![[0, 0, 0], [0, 0, 0]], Some(&[[0, 4], [1, 5], [2, 3]]))
        .expect("hex torus is valid")
}

/// The octahedron: vertices 0..3 on the equator, 4 north, 5 south.
pub fn octahedron_triangulation() -> Triangulation {
    let mut faces = Vec::new();
    for k in 0..4usize {
        let k1 = (k + 1) % 4;
        faces.push([4, k1, k]);
        faces.push([5, k, k1]);
    }
    Triangulation::build(6, faces, None).expect("octahedron is valid")
}
