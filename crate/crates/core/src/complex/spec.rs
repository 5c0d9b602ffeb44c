//! File format for complexes.
//!
//! ```json
//! {
//!   "faces": [{"id": 0}, {"id": 1}],
//!   "gluings": [[[0, 2], [1, 0]], [[0, 0], [1, 1]], [[0, 1], [1, 2]]],
//!   "curves": {"lambda": [[0, 1], [0, 2]]}
//! }
//! ```
//!
//! A gluing may carry a third element, `"reversing"` (the default) or
//! `"preserving"`; the latter is rejected as non-orientable. Curves list the
//! crossed edges by their canonical side. The object form
//! `{"crossings": [...], "start_face": f}` fixes the face entered after the
//! first crossing; without it the first crossing leaves the face of the
//! edge's canonical side.

use super::Side;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexSpec {
    pub faces: Vec<FaceSpec>,
    #[serde(default)]
    pub gluings: Vec<Gluing>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub curves: BTreeMap<String, CurveSpec>,
}

impl ComplexSpec {
    /// Spec with faces `0..n` and the given gluings.
    pub fn new(num_faces: usize, gluings: Vec<Gluing>) -> Self {
        Self {
            faces: (0..num_faces).map(|id| FaceSpec { id }).collect(),
            gluings,
            curves: BTreeMap::new(),
        }
    }

    /// Build a spec from oriented vertex triples, gluing each directed edge
    /// `u -> v` to the opposite `v -> u`. Only meaningful when every
    /// unordered vertex pair bounds at most two faces.
    pub fn from_triangles(triangles: &[[usize; 3]]) -> Self {
        let mut by_edge: BTreeMap<(usize, usize), Side> = BTreeMap::new();
        for (f, t) in triangles.iter().enumerate() {
            for i in 0..3 {
                by_edge.insert((t[i], t[(i + 1) % 3]), Side::new(f, i));
            }
        }
        let mut gluings = Vec::new();
        for (&(u, v), &s) in &by_edge {
            if u < v {
                if let Some(&q) = by_edge.get(&(v, u)) {
                    gluings.push(Gluing::new(s, q));
                }
            }
        }
        gluings.sort_by_key(|g| g.a.min(g.b));
        Self::new(triangles.len(), gluings)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaceSpec {
    pub id: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum GluingSense {
    #[default]
    Reversing,
    Preserving,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "GluingRepr", into = "GluingRepr")]
pub struct Gluing {
    pub a: Side,
    pub b: Side,
    pub sense: GluingSense,
}

impl Gluing {
    pub fn new(a: Side, b: Side) -> Self {
        Self {
            a,
            b,
            sense: GluingSense::Reversing,
        }
    }
}

#[derive(Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
enum GluingRepr {
    Plain([Side; 2]),
    WithSense(Side, Side, GluingSense),
}

impl From<GluingRepr> for Gluing {
    fn from(r: GluingRepr) -> Self {
        match r {
            GluingRepr::Plain([a, b]) => Gluing::new(a, b),
            GluingRepr::WithSense(a, b, sense) => Gluing { a, b, sense },
        }
    }
}

impl From<Gluing> for GluingRepr {
    fn from(g: Gluing) -> Self {
        match g.sense {
            GluingSense::Reversing => GluingRepr::Plain([g.a, g.b]),
            GluingSense::Preserving => GluingRepr::WithSense(g.a, g.b, g.sense),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CurveSpec {
    Crossings(Vec<Side>),
    Detailed {
        crossings: Vec<Side>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        start_face: Option<usize>,
    },
}

impl CurveSpec {
    pub fn crossings(&self) -> &[Side] {
        match self {
            CurveSpec::Crossings(c) => c,
            CurveSpec::Detailed { crossings, .. } => crossings,
        }
    }

    pub fn start_face(&self) -> Option<usize> {
        match self {
            CurveSpec::Crossings(_) => None,
            CurveSpec::Detailed { start_face, .. } => *start_face,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_plain_and_annotated_gluings() {
        let s: ComplexSpec = serde_json::from_str(
            r#"{"faces":[{"id":0},{"id":1}],
                "gluings":[[[0,2],[1,0]],[[0,0],[1,1],"preserving"]],
                "curves":{"a":[[0,1]],"b":{"crossings":[[0,2]],"start_face":1}}}"#,
        )
        .unwrap();
        assert_eq!(s.gluings[0], Gluing::new(Side::new(0, 2), Side::new(1, 0)));
        assert_eq!(s.gluings[1].sense, GluingSense::Preserving);
        assert_eq!(s.curves["a"].crossings(), &[Side::new(0, 1)]);
        assert_eq!(s.curves["b"].start_face(), Some(1));
        let back = serde_json::to_string(&s).unwrap();
        let again: ComplexSpec = serde_json::from_str(&back).unwrap();
        assert_eq!(s, again);
    }
}
