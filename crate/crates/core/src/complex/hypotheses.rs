//! Combinatorial hypotheses under which packings exist.
//!
//! Discs and spheres must be simplicial. For tori the requirement is on the
//! universal cover; only necessary local conditions are checked here, and
//! layouts are certified afterwards.

use super::{cut_fundamental_domain, Complex, CornerId, Side, SurfaceKind, VertexId};
use serde::Serialize;
use std::collections::BTreeSet;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HypothesisCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub kind: SurfaceKind,
    pub simplicial: bool,
    pub checks: Vec<HypothesisCheck>,
    pub passed: bool,
}

fn check(name: &'static str, failures: Vec<String>) -> HypothesisCheck {
    HypothesisCheck {
        name,
        passed: failures.is_empty(),
        detail: failures.join("; "),
    }
}

fn simplicial_checks(k: &Complex) -> Vec<HypothesisCheck> {
    let mut repeated = Vec::new();
    let mut sets: BTreeSet<[VertexId; 3]> = BTreeSet::new();
    let mut duplicate_sets = Vec::new();
    for f in 0..k.num_faces() {
        let mut vs = k.face_vertices(f);
        vs.sort();
        if vs[0] == vs[1] || vs[1] == vs[2] {
            repeated.push(format!("face {f}"));
        } else if !sets.insert(vs) {
            duplicate_sets.push(format!("face {f}"));
        }
    }
    let mut pairs: BTreeSet<(VertexId, VertexId)> = BTreeSet::new();
    let mut multiple = Vec::new();
    for (e, edge) in k.edges() {
        let (u, w) = k.side_vertices(edge.canonical());
        if u == w {
            continue; // already reported as a repeated face vertex
        }
        if !pairs.insert((u.min(w), u.max(w))) {
            multiple.push(format!("edge {}", e.0));
        }
    }
    vec![
        check("distinct_face_vertices", repeated),
        check("distinct_face_vertex_sets", duplicate_sets),
        check("no_multiple_edges", multiple),
    ]
}

fn torus_checks(k: &Complex) -> Vec<HypothesisCheck> {
    let mut self_sides = Vec::new();
    let mut face_self = Vec::new();
    for i in 0..k.num_corners() {
        let s = Side::from_flat(i);
        if let Some(q) = k.partner(s) {
            if q == s {
                self_sides.push(format!("side {s}"));
            } else if q.face == s.face && s < q {
                face_self.push(format!("sides {s} and {q}"));
            }
        }
    }
    let mut links = Vec::new();
    for (v, vertex) in k.vertices() {
        if vertex.degree() < 3 {
            links.push(format!("vertex {} has degree {}", v.0, vertex.degree()));
        }
    }
    if links.is_empty() && face_self.is_empty() {
        match cut_fundamental_domain(k) {
            Ok(d) => {
                for (v, vertex) in k.vertices() {
                    let mut seen: BTreeSet<(VertexId, [i64; 2])> = BTreeSet::new();
                    for &c in &vertex.corners {
                        let x = d.k0_vertex_of(c);
                        let ox = d.offsets[x.0];
                        for step in 1..3 {
                            let y = d.k0_vertex_of(CornerId::new(c.face, (c.index + step) % 3));
                            let oy = d.offsets[y.0];
                            seen.insert((d.torus_vertex[y.0], [oy[0] - ox[0], oy[1] - ox[1]]));
                        }
                    }
                    if seen.contains(&(v, [0, 0])) {
                        links.push(format!("vertex {} is joined to itself in the cover", v.0));
                    } else if seen.len() != vertex.degree() {
                        links.push(format!(
                            "vertex {} has {} distinct neighbours in the cover, degree {}",
                            v.0,
                            seen.len(),
                            vertex.degree()
                        ));
                    }
                }
            }
            Err(e) => links.push(format!("fundamental domain: {e}")),
        }
    }
    vec![
        check("no_self_glued_side", self_sides),
        check("no_face_self_gluing", face_self),
        check("embedded_vertex_links", links),
    ]
}

/// Run the hypothesis checks appropriate to the surface type.
pub fn check_hypotheses(k: &Complex) -> HypothesisReport {
    let simplicial_part = simplicial_checks(k);
    let simplicial = simplicial_part.iter().all(|c| c.passed);
    let checks = match k.kind() {
        SurfaceKind::Disc | SurfaceKind::Sphere => simplicial_part,
        SurfaceKind::Torus => torus_checks(k),
    };
    let passed = checks.iter().all(|c| c.passed);
    HypothesisReport {
        kind: k.kind(),
        simplicial,
        checks,
        passed,
    }
}
