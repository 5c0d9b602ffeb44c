//! Finite Δ-complexes triangulating oriented surfaces.
//!
//! A complex is given by a list of triangular faces and a list of side
//! gluings. Face `f` has corners `0, 1, 2` in anticlockwise order, and side
//! `s` runs from corner `s` to corner `s + 1 (mod 3)`. Gluings always reverse
//! orientation: gluing side `(f, s)` to side `(g, t)` identifies corner `s`
//! of `f` with corner `t + 1` of `g` and corner `s + 1` of `f` with corner
//! `t` of `g`. Vertices and edges are derived as equivalence classes.

mod curve;
mod domain;
mod hypotheses;
mod spec;

pub use curve::{cut_corner, normalize_curve, CurveError, CurveStep, NormalCurve};
pub use domain::{cut_fundamental_domain, DomainError, FundamentalDomain};
pub use hypotheses::{check_hypotheses, HypothesisCheck, HypothesisReport};
pub use spec::{ComplexSpec, CurveSpec, FaceSpec, Gluing, GluingSense};

use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::fmt;
use thiserror::Error;

/// A corner of a face: `(face, index)` with `index` in `0..3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct CornerId {
    pub face: usize,
    pub index: usize,
}

impl CornerId {
    pub fn new(face: usize, index: usize) -> Self {
        Self { face, index }
    }

    /// Position of this corner in a flat per-corner array.
    pub fn flat(self) -> usize {
        3 * self.face + self.index
    }

    pub fn from_flat(i: usize) -> Self {
        Self::new(i / 3, i % 3)
    }
}

impl From<[usize; 2]> for CornerId {
    fn from(v: [usize; 2]) -> Self {
        Self::new(v[0], v[1])
    }
}

impl From<CornerId> for [usize; 2] {
    fn from(c: CornerId) -> Self {
        [c.face, c.index]
    }
}

impl fmt::Display for CornerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.face, self.index)
    }
}

/// A side of a face: `(face, index)`, running from corner `index` to corner
/// `index + 1 (mod 3)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct Side {
    pub face: usize,
    pub index: usize,
}

impl Side {
    pub fn new(face: usize, index: usize) -> Self {
        Self { face, index }
    }

    pub fn flat(self) -> usize {
        3 * self.face + self.index
    }

    pub fn from_flat(i: usize) -> Self {
        Self::new(i / 3, i % 3)
    }

    /// Corner where this side starts.
    pub fn start(self) -> CornerId {
        CornerId::new(self.face, self.index)
    }

    /// Corner where this side ends.
    pub fn end(self) -> CornerId {
        CornerId::new(self.face, (self.index + 1) % 3)
    }
}

impl From<[usize; 2]> for Side {
    fn from(v: [usize; 2]) -> Self {
        Self::new(v[0], v[1])
    }
}

impl From<Side> for [usize; 2] {
    fn from(s: Side) -> Self {
        [s.face, s.index]
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.face, self.index)
    }
}

/// Index of a vertex. Vertices are numbered by their smallest corner.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub usize);

/// Index of an edge. Edges are numbered by their smallest side, which is
/// also the edge's canonical representative in files.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SurfaceKind {
    Disc,
    Sphere,
    Torus,
}

impl fmt::Display for SurfaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SurfaceKind::Disc => "disc",
            SurfaceKind::Sphere => "sphere",
            SurfaceKind::Torus => "torus",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Vertex {
    /// Corners at this vertex in anticlockwise order. For a boundary vertex
    /// the list starts at the corner following the outgoing boundary side.
    pub corners: Vec<CornerId>,
    pub boundary: bool,
}

impl Vertex {
    pub fn degree(&self) -> usize {
        self.corners.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    /// One side for a boundary edge, two for an interior edge. The first
    /// side is the canonical (smallest) one.
    pub sides: Vec<Side>,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.sides.len() == 1
    }

    pub fn canonical(&self) -> Side {
        self.sides[0]
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ComplexError {
    #[error("complex has no faces")]
    Empty,
    #[error("face ids must be exactly 0..{count} without repeats")]
    InvalidFaceIds { count: usize },
    #[error("side {0} is out of range")]
    SideOutOfRange(Side),
    #[error("side {0} is glued to itself")]
    SelfGluedSide(Side),
    #[error("non-surface: side {0} appears in more than one gluing")]
    NonSurface(Side),
    #[error("non-surface: the corners at vertex containing {0} do not form a single fan")]
    NonManifoldVertex(CornerId),
    #[error("gluing of {0} and {1} preserves orientation")]
    NonOrientable(Side, Side),
    #[error("complex is disconnected")]
    Disconnected,
    #[error("unsupported topology: Euler characteristic {euler}, {boundary_edges} boundary edges")]
    UnsupportedTopology { euler: i64, boundary_edges: usize },
}

/// Vertex and edge structure derived from a side pairing, without any
/// assumption on the resulting surface.
#[derive(Clone, Debug)]
pub(crate) struct Skeleton {
    pub partner: Vec<Option<Side>>,
    pub corner_vertex: Vec<VertexId>,
    pub vertices: Vec<Vertex>,
    pub side_edge: Vec<EdgeId>,
    pub edges: Vec<Edge>,
}

impl Skeleton {
    pub fn new(partner: Vec<Option<Side>>) -> Result<Self, ComplexError> {
        let n = partner.len();
        let mut uf = UnionFind::new(n);
        for (i, p) in partner.iter().enumerate() {
            if let Some(q) = p {
                let s = Side::from_flat(i);
                uf.union(s.start().flat(), q.end().flat());
                uf.union(s.end().flat(), q.start().flat());
            }
        }
        let succ = |c: CornerId| -> Option<CornerId> {
            let incoming = Side::new(c.face, (c.index + 2) % 3);
            partner[incoming.flat()].map(|q| q.start())
        };
        let pred = |c: CornerId| -> Option<CornerId> {
            let outgoing = Side::new(c.face, c.index);
            partner[outgoing.flat()].map(|q| q.end())
        };

        // Classes are discovered in increasing order of their smallest corner.
        let mut root_vertex = vec![usize::MAX; n];
        let mut class_members: Vec<Vec<usize>> = Vec::new();
        for i in 0..n {
            let r = uf.find(i);
            if root_vertex[r] == usize::MAX {
                root_vertex[r] = class_members.len();
                class_members.push(Vec::new());
            }
            class_members[root_vertex[r]].push(i);
        }
        let mut corner_vertex = vec![VertexId(0); n];
        let mut vertices = Vec::with_capacity(class_members.len());
        for (v, members) in class_members.iter().enumerate() {
            for &i in members {
                corner_vertex[i] = VertexId(v);
            }
            let first = CornerId::from_flat(members[0]);
            let begin = members
                .iter()
                .map(|&i| CornerId::from_flat(i))
                .find(|&c| pred(c).is_none());
            let boundary = begin.is_some();
            let start = begin.unwrap_or(first);
            let mut corners = vec![start];
            let mut cur = start;
            while let Some(next) = succ(cur) {
                if next == start {
                    break;
                }
                corners.push(next);
                cur = next;
                if corners.len() > members.len() {
                    break;
                }
            }
            if corners.len() != members.len() {
                return Err(ComplexError::NonManifoldVertex(first));
            }
            vertices.push(Vertex { corners, boundary });
        }

        let mut side_edge = vec![EdgeId(usize::MAX); n];
        let mut edges = Vec::new();
        for i in 0..n {
            if side_edge[i].0 != usize::MAX {
                continue;
            }
            let s = Side::from_flat(i);
            let id = EdgeId(edges.len());
            side_edge[i] = id;
            let mut sides = vec![s];
            if let Some(q) = partner[i] {
                side_edge[q.flat()] = id;
                sides.push(q);
            }
            edges.push(Edge { sides });
        }
        Ok(Self {
            partner,
            corner_vertex,
            vertices,
            side_edge,
            edges,
        })
    }
}

/// A validated Δ-complex with derived vertices, edges and surface type.
#[derive(Clone, Debug)]
pub struct Complex {
    spec: ComplexSpec,
    sk: Skeleton,
    kind: SurfaceKind,
}

impl Complex {
    pub fn spec(&self) -> &ComplexSpec {
        &self.spec
    }

    pub fn kind(&self) -> SurfaceKind {
        self.kind
    }

    pub fn num_faces(&self) -> usize {
        self.sk.partner.len() / 3
    }

    pub fn num_corners(&self) -> usize {
        self.sk.partner.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.sk.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.sk.edges.len()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.num_vertices() as i64 - self.num_edges() as i64 + self.num_faces() as i64
    }

    pub fn corners(&self) -> impl Iterator<Item = CornerId> {
        (0..self.num_corners()).map(CornerId::from_flat)
    }

    pub fn vertex(&self, v: VertexId) -> &Vertex {
        &self.sk.vertices[v.0]
    }

    pub fn vertices(&self) -> impl Iterator<Item = (VertexId, &Vertex)> {
        self.sk.vertices.iter().enumerate().map(|(i, v)| (VertexId(i), v))
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.sk.edges[e.0]
    }

    pub fn edges(&self) -> impl Iterator<Item = (EdgeId, &Edge)> {
        self.sk.edges.iter().enumerate().map(|(i, e)| (EdgeId(i), e))
    }

    pub fn vertex_of(&self, c: CornerId) -> VertexId {
        self.sk.corner_vertex[c.flat()]
    }

    pub fn edge_of(&self, s: Side) -> EdgeId {
        self.sk.side_edge[s.flat()]
    }

    /// The side glued to `s`, if any.
    pub fn partner(&self, s: Side) -> Option<Side> {
        self.sk.partner[s.flat()]
    }

    /// Vertices at the start and end of a side.
    pub fn side_vertices(&self, s: Side) -> (VertexId, VertexId) {
        (self.vertex_of(s.start()), self.vertex_of(s.end()))
    }

    /// Vertices of the three corners of a face.
    pub fn face_vertices(&self, f: usize) -> [VertexId; 3] {
        [0, 1, 2].map(|i| self.vertex_of(CornerId::new(f, i)))
    }

    /// Next corner anticlockwise around the shared vertex.
    pub fn corner_succ(&self, c: CornerId) -> Option<CornerId> {
        self.partner(Side::new(c.face, (c.index + 2) % 3))
            .map(|q| q.start())
    }

    /// Next corner clockwise around the shared vertex.
    pub fn corner_pred(&self, c: CornerId) -> Option<CornerId> {
        self.partner(Side::new(c.face, c.index)).map(|q| q.end())
    }

    /// Boundary vertices in the order of the boundary cycle.
    pub fn boundary_vertices(&self) -> Vec<VertexId> {
        self.boundary_cycle()
            .into_iter()
            .map(|s| self.vertex_of(s.start()))
            .collect()
    }

    /// Boundary sides in anticlockwise order (interior on the left), starting
    /// at the smallest boundary side. Empty for closed surfaces.
    pub fn boundary_cycle(&self) -> Vec<Side> {
        let first = match (0..self.num_corners())
            .map(Side::from_flat)
            .find(|&s| self.partner(s).is_none())
        {
            Some(s) => s,
            None => return Vec::new(),
        };
        let mut out = vec![first];
        let mut cur = first;
        loop {
            let v = self.vertex_of(cur.end());
            let next = self.vertex(v).corners[0];
            let side = Side::new(next.face, next.index);
            if side == first || out.len() > self.num_corners() {
                break;
            }
            out.push(side);
            cur = side;
        }
        out
    }

    /// Complex obtained by keeping `faces` (renumbered in the given order) and
    /// dropping every gluing that involves a dropped face or a side in `cut`.
    /// Returns the sub-complex and, for each new face, its original index.
    pub fn subcomplex(
        &self,
        faces: &[usize],
        cut: &[Side],
    ) -> Result<(Complex, Vec<usize>), ComplexError> {
        let mut new_index = vec![usize::MAX; self.num_faces()];
        for (i, &f) in faces.iter().enumerate() {
            new_index[f] = i;
        }
        let mut is_cut = vec![false; self.num_corners()];
        for s in cut {
            is_cut[s.flat()] = true;
            if let Some(q) = self.partner(*s) {
                is_cut[q.flat()] = true;
            }
        }
        let mut gluings = Vec::new();
        for (_, e) in self.edges() {
            if e.sides.len() != 2 {
                continue;
            }
            let (a, b) = (e.sides[0], e.sides[1]);
            if is_cut[a.flat()] || new_index[a.face] == usize::MAX || new_index[b.face] == usize::MAX
            {
                continue;
            }
            gluings.push(Gluing::new(
                Side::new(new_index[a.face], a.index),
                Side::new(new_index[b.face], b.index),
            ));
        }
        let spec = ComplexSpec {
            faces: (0..faces.len()).map(|id| FaceSpec { id }).collect(),
            gluings,
            curves: Default::default(),
        };
        Ok((build_complex(spec)?, faces.to_vec()))
    }

    pub(crate) fn skeleton(&self) -> &Skeleton {
        &self.sk
    }
}

/// Validate a specification and derive the complex.
pub fn build_complex(spec: ComplexSpec) -> Result<Complex, ComplexError> {
    let nf = spec.faces.len();
    if nf == 0 {
        return Err(ComplexError::Empty);
    }
    let mut seen = vec![false; nf];
    for f in &spec.faces {
        if f.id >= nf || seen[f.id] {
            return Err(ComplexError::InvalidFaceIds { count: nf });
        }
        seen[f.id] = true;
    }
    let mut partner: Vec<Option<Side>> = vec![None; 3 * nf];
    for g in &spec.gluings {
        for s in [g.a, g.b] {
            if s.face >= nf || s.index >= 3 {
                return Err(ComplexError::SideOutOfRange(s));
            }
        }
        if g.a == g.b {
            return Err(ComplexError::SelfGluedSide(g.a));
        }
        if g.sense == GluingSense::Preserving {
            return Err(ComplexError::NonOrientable(g.a, g.b));
        }
        for s in [g.a, g.b] {
            if partner[s.flat()].is_some() {
                return Err(ComplexError::NonSurface(s));
            }
        }
        partner[g.a.flat()] = Some(g.b);
        partner[g.b.flat()] = Some(g.a);
    }

    // Connectivity of the face adjacency graph.
    let mut reached = vec![false; nf];
    let mut queue = VecDeque::from([0usize]);
    reached[0] = true;
    while let Some(f) = queue.pop_front() {
        for i in 0..3 {
            if let Some(q) = partner[3 * f + i] {
                if !reached[q.face] {
                    reached[q.face] = true;
                    queue.push_back(q.face);
                }
            }
        }
    }
    if reached.iter().any(|r| !r) {
        return Err(ComplexError::Disconnected);
    }

    let sk = Skeleton::new(partner)?;
    let euler = sk.vertices.len() as i64 - sk.edges.len() as i64 + nf as i64;
    let boundary_edges = sk.edges.iter().filter(|e| e.is_boundary()).count();
    let kind = match (boundary_edges > 0, euler) {
        (true, 1) => SurfaceKind::Disc,
        (false, 2) => SurfaceKind::Sphere,
        (false, 0) => SurfaceKind::Torus,
        _ => {
            return Err(ComplexError::UnsupportedTopology {
                euler,
                boundary_edges,
            })
        }
    };
    Ok(Complex { spec, sk, kind })
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}
