//! Closed normal curves: cyclic sequences of arcs, each crossing a face from
//! one side to another and cutting off the corner between them.

use super::{Complex, CurveSpec, EdgeId, Side, VertexId};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CurveError {
    #[error("curve has no crossings")]
    Empty,
    #[error("crossing {step} uses a boundary edge")]
    BoundaryCrossing { step: usize },
    #[error("step {step} enters and exits a face through the same edge")]
    NotNormal { step: usize },
    #[error("crossings {step} and {next} do not bound a common face", next = step + 1)]
    NoSharedFace { step: usize },
    #[error("crossing sequence does not close up")]
    OpenCurve,
    #[error("vertex {0:?} is on the boundary")]
    BoundaryVertex(VertexId),
    #[error("edge loop is not closed around a consistent fan")]
    BadLoop,
}

/// One arc of a normal curve: it lies in `face`, cuts off corner `corner`
/// and turns anticlockwise around it when `delta` is `+1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveStep {
    pub face: usize,
    pub corner: usize,
    pub delta: i8,
    #[serde(skip)]
    entry: usize,
    #[serde(skip)]
    exit: usize,
}

impl CurveStep {
    pub fn entry_side(&self) -> Side {
        Side::new(self.face, self.entry)
    }

    pub fn exit_side(&self) -> Side {
        Side::new(self.face, self.exit)
    }
}

/// The corner cut off by an arc entering a face through side `entry` and
/// leaving through side `exit`, with the arc's turning sign.
pub fn cut_corner(entry: usize, exit: usize) -> Option<(usize, i8)> {
    if entry >= 3 || exit >= 3 || entry == exit {
        return None;
    }
    // Side k runs from corner k to k+1, so sides k and k+2 meet at corner k.
    let k = if exit == (entry + 1) % 3 { exit } else { entry };
    let delta = if entry == k { 1 } else { -1 };
    Some((k, delta))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalCurve {
    pub steps: Vec<CurveStep>,
}

impl NormalCurve {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Build a curve from the sides through which it leaves successive
    /// faces. Step `j` lies in the face entered across `exits[j]`.
    pub fn from_exits(complex: &Complex, exits: &[Side]) -> Result<Self, CurveError> {
        let n = exits.len();
        if n == 0 {
            return Err(CurveError::Empty);
        }
        let mut steps = Vec::with_capacity(n);
        for j in 0..n {
            let entry = complex
                .partner(exits[j])
                .ok_or(CurveError::BoundaryCrossing { step: j })?;
            let exit = exits[(j + 1) % n];
            if exit.face != entry.face {
                return Err(if j + 1 == n {
                    CurveError::OpenCurve
                } else {
                    CurveError::NoSharedFace { step: j }
                });
            }
            let (corner, delta) =
                cut_corner(entry.index, exit.index).ok_or(CurveError::NotNormal { step: j })?;
            steps.push(CurveStep {
                face: entry.face,
                corner,
                delta,
                entry: entry.index,
                exit: exit.index,
            });
        }
        Ok(Self { steps })
    }

    /// Build a curve from crossed edges, with the first crossing leaving the
    /// face of `first_exit`.
    pub fn from_crossings(
        complex: &Complex,
        crossings: &[EdgeId],
        first_exit: Side,
    ) -> Result<Self, CurveError> {
        let n = crossings.len();
        if n == 0 {
            return Err(CurveError::Empty);
        }
        for (j, &e) in crossings.iter().enumerate() {
            if complex.edge(e).is_boundary() {
                return Err(CurveError::BoundaryCrossing { step: j });
            }
        }
        let mut exits = Vec::with_capacity(n);
        let mut cur = first_exit;
        for j in 0..n {
            exits.push(cur);
            let entry = complex.partner(cur).expect("interior edge");
            let next_edge = crossings[(j + 1) % n];
            let found = (0..3)
                .map(|i| Side::new(entry.face, i))
                .find(|&s| s != entry && complex.edge_of(s) == next_edge);
            cur = match found {
                Some(s) => s,
                None if complex.edge_of(entry) == next_edge => {
                    return Err(CurveError::NotNormal { step: j })
                }
                None => return Err(CurveError::NoSharedFace { step: j }),
            };
        }
        if cur != exits[0] {
            return Err(CurveError::OpenCurve);
        }
        Self::from_exits(complex, &exits)
    }

    /// Curve described in a complex file.
    pub fn from_spec(complex: &Complex, spec: &CurveSpec) -> Result<Self, CurveError> {
        let crossings: Vec<EdgeId> = spec.crossings().iter().map(|&s| complex.edge_of(s)).collect();
        let first = *crossings.first().ok_or(CurveError::Empty)?;
        let edge = complex.edge(first);
        if edge.is_boundary() {
            return Err(CurveError::BoundaryCrossing { step: 0 });
        }
        let first_exit = match spec.start_face() {
            None => edge.canonical(),
            Some(f) => *edge
                .sides
                .iter()
                .find(|s| complex.partner(**s).map(|q| q.face) == Some(f))
                .ok_or(CurveError::NoSharedFace { step: 0 })?,
        };
        Self::from_crossings(complex, &crossings, first_exit)
    }

    /// Small loop around an interior vertex, turning anticlockwise.
    pub fn around_vertex(complex: &Complex, v: VertexId) -> Result<Self, CurveError> {
        let vertex = complex.vertex(v);
        if vertex.boundary {
            return Err(CurveError::BoundaryVertex(v));
        }
        let exits: Vec<Side> = vertex
            .corners
            .iter()
            .map(|c| Side::new(c.face, (c.index + 2) % 3))
            .collect();
        Self::from_exits(complex, &exits)
    }

    /// Parallel copy of a closed edge loop, running along its left side.
    /// `edge_loop` lists the oriented edges as the sides having the loop's
    /// left-hand faces; consecutive sides must meet head to tail.
    pub fn pushoff(complex: &Complex, edge_loop: &[Side]) -> Result<Self, CurveError> {
        let n = edge_loop.len();
        if n == 0 {
            return Err(CurveError::Empty);
        }
        let mut exits = Vec::new();
        for j in 0..n {
            let incoming = edge_loop[j];
            let outgoing = edge_loop[(j + 1) % n];
            if complex.vertex_of(incoming.end()) != complex.vertex_of(outgoing.start()) {
                return Err(CurveError::BadLoop);
            }
            let mut c = incoming.end();
            let target = outgoing.start();
            let mut guard = 0;
            while c != target {
                exits.push(Side::new(c.face, c.index));
                c = complex.corner_pred(c).ok_or(CurveError::BadLoop)?;
                guard += 1;
                if guard > complex.num_corners() {
                    return Err(CurveError::BadLoop);
                }
            }
        }
        Self::from_exits(complex, &exits)
    }

    /// The same curve traversed backwards.
    pub fn reversed(&self) -> Self {
        let steps = self
            .steps
            .iter()
            .rev()
            .map(|s| CurveStep {
                face: s.face,
                corner: s.corner,
                delta: -s.delta,
                entry: s.exit,
                exit: s.entry,
            })
            .collect();
        Self { steps }
    }

    /// Signed count of crossings with a closed edge loop (given by its
    /// left-hand sides). A crossing from the loop's right to its left
    /// counts `+1`.
    pub fn intersection_number(&self, complex: &Complex, edge_loop: &[Side]) -> i64 {
        let mut total = 0;
        for step in &self.steps {
            let entered = step.entry_side();
            for &l in edge_loop {
                if entered == l {
                    total += 1;
                } else if complex.partner(l) == Some(entered) {
                    total -= 1;
                }
            }
        }
        total
    }

    /// Whether two curves agree up to a cyclic shift of their steps.
    pub fn cyclically_equal(&self, other: &Self) -> bool {
        let n = self.steps.len();
        if n != other.steps.len() {
            return false;
        }
        if n == 0 {
            return true;
        }
        (0..n).any(|shift| (0..n).all(|j| self.steps[j] == other.steps[(j + shift) % n]))
    }
}

/// Normalize a closed sequence of crossed edges. The first crossing leaves
/// the face of its edge's canonical side.
pub fn normalize_curve(complex: &Complex, crossings: &[EdgeId]) -> Result<NormalCurve, CurveError> {
    let first = *crossings.first().ok_or(CurveError::Empty)?;
    let edge = complex.edge(first);
    if edge.is_boundary() {
        return Err(CurveError::BoundaryCrossing { step: 0 });
    }
    NormalCurve::from_crossings(complex, crossings, edge.canonical())
}
