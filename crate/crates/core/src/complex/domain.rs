//! Cutting a torus along two edge loops into a disc.
//!
//! The first loop `l` is a shortest non-separating edge cycle. After cutting
//! along it the torus becomes an annulus, and the second loop `m` is a
//! shortest edge path across the annulus joining the two copies of one
//! vertex of `l`. Cutting along both gives a disc `K0` whose boundary reads,
//! anticlockwise, `l` (bottom), `m` (right), `l` reversed (top) and `m`
//! reversed (left). `K0` keeps the face and corner numbering of the torus.

use super::{
    CornerId, Complex, ComplexError, EdgeId, Side, Skeleton, SurfaceKind, UnionFind, VertexId,
};
use std::collections::{BTreeSet, VecDeque};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("complex is not a torus")]
    NotTorus,
    #[error("no cut along edge loops produced a disc")]
    CutFailed,
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

#[derive(Clone, Debug)]
pub struct FundamentalDomain {
    /// The cut disc. Its faces and corners are those of the torus.
    pub k0: Complex,
    /// First loop as oriented sides, each with the loop's left face.
    pub l_loop: Vec<Side>,
    /// Second loop, starting and ending at the base vertex of `l_loop`.
    pub m_loop: Vec<Side>,
    /// Boundary sides of `k0`: bottom copy of `l` (the left sides of
    /// `l_loop`), top copy (their partners), right copy of `m` (left sides of
    /// `m_loop`) and left copy (their partners), all listed in loop order.
    pub l_bottom: Vec<Side>,
    pub l_top: Vec<Side>,
    pub m_right: Vec<Side>,
    pub m_left: Vec<Side>,
    /// Vertices of `k0` along each boundary path, in loop order, endpoints
    /// included.
    pub p_bottom: Vec<VertexId>,
    pub p_top: Vec<VertexId>,
    pub p_left: Vec<VertexId>,
    pub p_right: Vec<VertexId>,
    /// For each vertex of `k0`, its offset in units of the two translations
    /// (along `l`, along `m`) from the representative copy of its vertex.
    pub offsets: Vec<[i64; 2]>,
    /// For each torus vertex, the `k0` vertex chosen as representative.
    pub representative: Vec<VertexId>,
    /// For each `k0` vertex, the torus vertex it covers.
    pub torus_vertex: Vec<VertexId>,
}

impl FundamentalDomain {
    pub fn k0_vertex_of(&self, c: CornerId) -> VertexId {
        self.k0.vertex_of(c)
    }

    /// Edges of the torus lying on the boundary of `k0`.
    pub fn cut_edges(&self, k: &Complex) -> Vec<EdgeId> {
        let mut v: Vec<EdgeId> = self
            .l_loop
            .iter()
            .chain(&self.m_loop)
            .map(|&s| k.edge_of(s))
            .collect();
        v.sort();
        v
    }
}

/// Cut a torus into a fundamental domain.
pub fn cut_fundamental_domain(k: &Complex) -> Result<FundamentalDomain, DomainError> {
    if k.kind() != SurfaceKind::Torus {
        return Err(DomainError::NotTorus);
    }
    for cand in loop_candidates(k) {
        if let Some(d) = try_cut(k, &cand) {
            return Ok(d);
        }
    }
    Err(DomainError::CutFailed)
}

fn edge_endpoints(k: &Complex, e: EdgeId) -> (VertexId, VertexId) {
    k.side_vertices(k.edge(e).canonical())
}

/// Non-separating simple edge cycles from breadth-first trees, ordered by
/// length then by sorted edge ids. Each is returned as oriented sides.
fn loop_candidates(k: &Complex) -> Vec<Vec<Side>> {
    let nv = k.num_vertices();
    let mut adj: Vec<Vec<(EdgeId, VertexId)>> = vec![Vec::new(); nv];
    for (e, _) in k.edges() {
        let (u, w) = edge_endpoints(k, e);
        adj[u.0].push((e, w));
        if u != w {
            adj[w.0].push((e, u));
        }
    }
    let mut seen: BTreeSet<Vec<EdgeId>> = BTreeSet::new();
    let mut found: Vec<(usize, Vec<EdgeId>, Vec<Side>)> = Vec::new();
    for root in 0..nv {
        let mut parent: Vec<Option<(EdgeId, VertexId)>> = vec![None; nv];
        let mut depth = vec![usize::MAX; nv];
        depth[root] = 0;
        let mut queue = VecDeque::from([VertexId(root)]);
        while let Some(x) = queue.pop_front() {
            for &(e, y) in &adj[x.0] {
                if depth[y.0] == usize::MAX {
                    depth[y.0] = depth[x.0] + 1;
                    parent[y.0] = Some((e, x));
                    queue.push_back(y);
                }
            }
        }
        let tree: BTreeSet<EdgeId> = parent.iter().flatten().map(|p| p.0).collect();
        for (e, _) in k.edges() {
            if tree.contains(&e) {
                continue;
            }
            let (x, y) = edge_endpoints(k, e);
            // Walk both ends up to their lowest common ancestor.
            let (mut a, mut b) = (x, y);
            let mut up_a = Vec::new();
            let mut up_b = Vec::new();
            while a != b {
                if depth[a.0] >= depth[b.0] {
                    let (pe, pv) = parent[a.0].expect("tree path");
                    up_a.push((pe, a, pv));
                    a = pv;
                } else {
                    let (pe, pv) = parent[b.0].expect("tree path");
                    up_b.push((pe, b, pv));
                    b = pv;
                }
            }
            // Vertex walk: lca -> .. -> x -(e)-> y -> .. -> lca.
            let mut walk: Vec<(EdgeId, VertexId, VertexId)> = Vec::new();
            for &(pe, child, par) in up_a.iter().rev() {
                walk.push((pe, par, child));
            }
            walk.push((e, x, y));
            for &(pe, child, par) in &up_b {
                walk.push((pe, child, par));
            }
            let mut ids: Vec<EdgeId> = walk.iter().map(|w| w.0).collect();
            ids.sort();
            if !seen.insert(ids.clone()) {
                continue;
            }
            let sides: Option<Vec<Side>> = walk
                .iter()
                .map(|&(edge, from, to)| oriented_side(k, edge, from, to))
                .collect();
            let Some(sides) = sides else { continue };
            if is_separating(k, &ids) {
                continue;
            }
            found.push((ids.len(), ids, sides));
        }
    }
    found.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
    found.into_iter().map(|f| f.2).collect()
}

fn oriented_side(k: &Complex, e: EdgeId, from: VertexId, to: VertexId) -> Option<Side> {
    k.edge(e)
        .sides
        .iter()
        .copied()
        .find(|&s| k.side_vertices(s) == (from, to))
}

fn is_separating(k: &Complex, cut: &[EdgeId]) -> bool {
    let nf = k.num_faces();
    let mut reached = vec![false; nf];
    reached[0] = true;
    let mut queue = VecDeque::from([0usize]);
    while let Some(f) = queue.pop_front() {
        for i in 0..3 {
            let s = Side::new(f, i);
            if cut.contains(&k.edge_of(s)) {
                continue;
            }
            if let Some(q) = k.partner(s) {
                if !reached[q.face] {
                    reached[q.face] = true;
                    queue.push_back(q.face);
                }
            }
        }
    }
    reached.iter().any(|r| !r)
}

fn cut_partner(k: &Complex, cut: &[Side]) -> Vec<Option<Side>> {
    let mut partner = k.skeleton().partner.clone();
    for &s in cut {
        if let Some(q) = partner[s.flat()] {
            partner[q.flat()] = None;
        }
        partner[s.flat()] = None;
    }
    partner
}

fn try_cut(k: &Complex, l_loop: &[Side]) -> Option<FundamentalDomain> {
    let nl = l_loop.len();
    let annulus = Skeleton::new(cut_partner(k, l_loop)).ok()?;
    let av = |c: CornerId| annulus.corner_vertex[c.flat()];
    let left: Vec<VertexId> = l_loop.iter().map(|s| av(s.start())).collect();
    let right: Vec<VertexId> = l_loop
        .iter()
        .map(|s| av(k.partner(*s).expect("torus edge").end()))
        .collect();

    // Annulus adjacency over interior edges, in torus edge order.
    let na = annulus.vertices.len();
    let mut adj: Vec<Vec<(EdgeId, Side)>> = vec![Vec::new(); na];
    for edge in &annulus.edges {
        if edge.sides.len() != 2 {
            continue;
        }
        for &s in &edge.sides {
            adj[av(s.start()).0].push((k.edge_of(s), s));
        }
    }
    for list in &mut adj {
        list.sort();
    }

    let mut best: Option<(usize, Vec<EdgeId>, usize, Vec<Side>)> = None;
    for a in 0..nl {
        let (src, dst) = (left[a], right[a]);
        let mut prev: Vec<Option<Side>> = vec![None; na];
        let mut visited = vec![false; na];
        visited[src.0] = true;
        let mut queue = VecDeque::from([src]);
        while let Some(x) = queue.pop_front() {
            if x == dst {
                break;
            }
            if x != src && annulus.vertices[x.0].boundary {
                continue;
            }
            for &(_, s) in &adj[x.0] {
                let y = av(s.end());
                if !visited[y.0] && (y == dst || !annulus.vertices[y.0].boundary) {
                    visited[y.0] = true;
                    prev[y.0] = Some(s);
                    queue.push_back(y);
                }
            }
        }
        if !visited[dst.0] {
            continue;
        }
        let mut path = Vec::new();
        let mut cur = dst;
        while cur != src {
            let s = prev[cur.0]?;
            path.push(s);
            cur = av(s.start());
        }
        path.reverse();
        let mut ids: Vec<EdgeId> = path.iter().map(|&s| k.edge_of(s)).collect();
        ids.sort();
        let key = (path.len(), ids, a, path);
        if best.as_ref().is_none_or(|b| (key.0, &key.1) < (b.0, &b.1)) {
            best = Some(key);
        }
    }
    let (_, _, a, m_path) = best?;

    let mut l_rot = l_loop.to_vec();
    l_rot.rotate_left(a);
    // Orient each path side so that its face is on the left of the path.
    let m_loop: Vec<Side> = m_path;
    let cut: Vec<Side> = l_rot.iter().chain(&m_loop).copied().collect();
    let all_faces: Vec<usize> = (0..k.num_faces()).collect();
    let (k0, _) = k.subcomplex(&all_faces, &cut).ok()?;
    if k0.kind() != SurfaceKind::Disc {
        return None;
    }

    let partner = |s: Side| k.partner(s).expect("torus edge");
    let l_bottom = l_rot.clone();
    let l_top: Vec<Side> = l_rot.iter().map(|&s| partner(s)).collect();
    let m_right = m_loop.clone();
    let m_left: Vec<Side> = m_loop.iter().map(|&s| partner(s)).collect();
    let v0 = |c: CornerId| k0.vertex_of(c);
    let forward = |sides: &[Side]| -> Vec<VertexId> {
        let mut v: Vec<VertexId> = sides.iter().map(|s| v0(s.start())).collect();
        v.push(v0(sides.last().unwrap().end()));
        v
    };
    let backward = |sides: &[Side]| -> Vec<VertexId> {
        let mut v: Vec<VertexId> = sides.iter().map(|s| v0(s.end())).collect();
        v.push(v0(sides.last().unwrap().start()));
        v
    };
    let p_bottom = forward(&l_bottom);
    let p_top = backward(&l_top);
    let p_right = forward(&m_right);
    let p_left = backward(&m_left);
    let corners_ok = p_bottom[0] == p_left[0]
        && p_bottom[nl] == p_right[0]
        && p_top[0] == p_left[m_loop.len()]
        && p_top[nl] == p_right[m_loop.len()];
    if !corners_ok {
        return None;
    }

    // Lattice offsets of vertex copies.
    let n0 = k0.num_vertices();
    let torus_vertex: Vec<VertexId> = (0..n0)
        .map(|i| k.vertex_of(k0.vertex(VertexId(i)).corners[0]))
        .collect();
    let mut links: Vec<Vec<(usize, [i64; 2])>> = vec![Vec::new(); n0];
    let mut link = |x: VertexId, y: VertexId, d: [i64; 2]| {
        links[x.0].push((y.0, d));
        links[y.0].push((x.0, [-d[0], -d[1]]));
    };
    for j in 0..=nl {
        link(p_bottom[j], p_top[j], [0, 1]);
    }
    for i in 0..=m_loop.len() {
        link(p_left[i], p_right[i], [1, 0]);
    }
    let mut uf = UnionFind::new(n0);
    for (x, l) in links.iter().enumerate() {
        for &(y, _) in l {
            uf.union(x, y);
        }
    }
    let mut offsets: Vec<Option<[i64; 2]>> = vec![None; n0];
    let mut representative = vec![VertexId(usize::MAX); k.num_vertices()];
    for x in 0..n0 {
        if offsets[x].is_some() {
            continue;
        }
        // `x` is the smallest vertex of its class since roots are minimal.
        debug_assert_eq!(uf.find(x), x);
        offsets[x] = Some([0, 0]);
        representative[torus_vertex[x].0] = VertexId(x);
        let mut queue = VecDeque::from([x]);
        while let Some(y) = queue.pop_front() {
            let oy = offsets[y].unwrap();
            for &(z, d) in &links[y] {
                let oz = [oy[0] + d[0], oy[1] + d[1]];
                match offsets[z] {
                    None => {
                        offsets[z] = Some(oz);
                        queue.push_back(z);
                    }
                    Some(prev) if prev != oz => return None,
                    _ => {}
                }
            }
        }
    }
    if representative.iter().any(|r| r.0 == usize::MAX) {
        return None;
    }
    // Copies of one torus vertex must all be linked by the identifications.
    for x in 0..n0 {
        if uf.find(x) != representative[torus_vertex[x].0].0 {
            return None;
        }
    }

    Some(FundamentalDomain {
        k0,
        l_loop: l_rot,
        m_loop,
        l_bottom,
        l_top,
        m_right,
        m_left,
        p_bottom,
        p_top,
        p_left,
        p_right,
        offsets: offsets.into_iter().map(|o| o.unwrap()).collect(),
        representative,
        torus_vertex,
    })
}
