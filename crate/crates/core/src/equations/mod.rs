//! Circle packing equations.
//!
//! Each corner carries a value `m = cot(θ/2)`. The equation kinds are:
//!
//! * triangle: `m_u m_v m_w - m_u - m_v - m_w = 0` (angles of a face sum to π);
//! * edge: `m(Δ1,v1) m(Δ2,v2) - m(Δ1,v2) m(Δ2,v1) = 0` (the two faces on an
//!   edge agree on the ratio of its endpoint radii);
//! * vertex: `Im ∏ (m_j + i) = 0` over the corners around an interior vertex
//!   (angles sum to a multiple of 2π);
//! * holonomy: `Im ∏ (m_j + i δ_j) = 0` along a normal curve on a torus;
//! * pin: `m - c = 0`;
//! * boundary ratio: `c_v m_v - c_w m_w = 0`.
//!
//! In unbranched mode the vertex and holonomy equations are replaced by their
//! angle forms `Σ 2 arg(m_j + i) - 2π` and `Σ 2 arg(m_j + i δ_j)`.

mod system;

pub use system::{
    assemble_system, Assignment, EquationSystem, Flavor, PinnedCorner, SparseMatrix,
    SystemExport, SystemOptions,
};

use crate::complex::{
    Complex, CornerId, CurveError, DomainError, EdgeId, NormalCurve, Side, VertexId,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    #[default]
    Branched,
    Unbranched,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EquationError {
    #[error("corners {0:?} are not the three corners of one face")]
    WrongFace([CornerId; 3]),
    #[error("edge {0:?} is on the boundary")]
    BoundaryEdge(EdgeId),
    #[error("vertex {0:?} is on the boundary")]
    BoundaryVertex(VertexId),
    #[error("vertex {vertex:?} has degree {degree}, need at least 3")]
    DegreeTooSmall { vertex: VertexId, degree: usize },
    #[error("holonomy curve {0:?} is empty")]
    NotClosed(String),
    #[error("option mismatch: {0}")]
    OptionMismatch(String),
    #[error("invalid reduction choice: {0}")]
    InvalidReductionChoice(String),
    #[error("no value for corner {0}")]
    MissingValue(CornerId),
    #[error("assignment has {got} faces, complex has {expected}")]
    AssignmentSize { expected: usize, got: usize },
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Curve(#[from] CurveError),
}

/// Angle `θ = 2 atan2(1, m)`, in `(0, π)` for `m > 0`.
pub fn angle_from_m(m: f64) -> f64 {
    2.0 * 1f64.atan2(m)
}

/// Inverse of [`angle_from_m`]: `m = cot(θ/2)`.
pub fn m_from_angle(theta: f64) -> f64 {
    1.0 / (theta / 2.0).tan()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EquationKind {
    Triangle,
    Edge,
    Vertex,
    Holonomy,
    Pin,
    BoundaryRatio,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Equation {
    Triangle {
        corners: [CornerId; 3],
    },
    /// Corners in the order (Δ1 v1, Δ2 v2, Δ1 v2, Δ2 v1).
    Edge {
        corners: [CornerId; 4],
    },
    Vertex {
        corners: Vec<CornerId>,
    },
    Holonomy {
        name: String,
        corners: Vec<CornerId>,
        deltas: Vec<i8>,
    },
    Pin {
        corner: CornerId,
        value: f64,
    },
    /// `weights[0] * m(corners[0]) = weights[1] * m(corners[1])`.
    BoundaryRatio {
        corners: [CornerId; 2],
        weights: [f64; 2],
    },
}

/// Equation of a face's three corners.
pub fn triangle_equation(corners: [CornerId; 3]) -> Result<Equation, EquationError> {
    let f = corners[0].face;
    let mut idx: Vec<usize> = corners.iter().map(|c| c.index).collect();
    idx.sort();
    if corners.iter().any(|c| c.face != f) || idx != [0, 1, 2] {
        return Err(EquationError::WrongFace(corners));
    }
    Ok(Equation::Triangle { corners })
}

/// Equation of an interior edge.
pub fn edge_equation(complex: &Complex, e: EdgeId) -> Result<Equation, EquationError> {
    let edge = complex.edge(e);
    if edge.is_boundary() {
        return Err(EquationError::BoundaryEdge(e));
    }
    let (s1, s2): (Side, Side) = (edge.sides[0], edge.sides[1]);
    // Side s1 runs v1 -> v2 in Δ1; its partner runs v2 -> v1 in Δ2.
    Ok(Equation::Edge {
        corners: [s1.start(), s2.start(), s1.end(), s2.end()],
    })
}

/// Equation of an interior vertex.
pub fn vertex_equation(complex: &Complex, v: VertexId) -> Result<Equation, EquationError> {
    let vertex = complex.vertex(v);
    if vertex.boundary {
        return Err(EquationError::BoundaryVertex(v));
    }
    if vertex.degree() < 3 {
        return Err(EquationError::DegreeTooSmall {
            vertex: v,
            degree: vertex.degree(),
        });
    }
    Ok(Equation::Vertex {
        corners: vertex.corners.clone(),
    })
}

/// Equation of a closed normal curve.
pub fn holonomy_equation(name: &str, curve: &NormalCurve) -> Result<Equation, EquationError> {
    if curve.is_empty() {
        return Err(EquationError::NotClosed(name.to_string()));
    }
    Ok(Equation::Holonomy {
        name: name.to_string(),
        corners: curve
            .steps
            .iter()
            .map(|s| CornerId::new(s.face, s.corner))
            .collect(),
        deltas: curve.steps.iter().map(|s| s.delta).collect(),
    })
}

fn unit_deltas(n: usize) -> Vec<i8> {
    vec![1; n]
}

/// `∏ (m_j + i δ_j)` and, for each factor, the product of the others.
fn product_and_cofactors(ms: &[f64], deltas: &[i8]) -> (Complex64, Vec<Complex64>) {
    let n = ms.len();
    let factor = |j: usize| Complex64::new(ms[j], deltas[j] as f64);
    let mut prefix = vec![Complex64::new(1.0, 0.0); n + 1];
    for j in 0..n {
        prefix[j + 1] = prefix[j] * factor(j);
    }
    let mut suffix = vec![Complex64::new(1.0, 0.0); n + 1];
    for j in (0..n).rev() {
        suffix[j] = suffix[j + 1] * factor(j);
    }
    let cof = (0..n).map(|j| prefix[j] * suffix[j + 1]).collect();
    (prefix[n], cof)
}

fn arg_sum(ms: &[f64], deltas: &[i8]) -> f64 {
    ms.iter()
        .zip(deltas)
        .map(|(&m, &d)| (d as f64).atan2(m))
        .sum()
}

impl Equation {
    pub fn kind(&self) -> EquationKind {
        match self {
            Equation::Triangle { .. } => EquationKind::Triangle,
            Equation::Edge { .. } => EquationKind::Edge,
            Equation::Vertex { .. } => EquationKind::Vertex,
            Equation::Holonomy { .. } => EquationKind::Holonomy,
            Equation::Pin { .. } => EquationKind::Pin,
            Equation::BoundaryRatio { .. } => EquationKind::BoundaryRatio,
        }
    }

    pub fn corners(&self) -> Vec<CornerId> {
        match self {
            Equation::Triangle { corners } => corners.to_vec(),
            Equation::Edge { corners } => corners.to_vec(),
            Equation::Vertex { corners } | Equation::Holonomy { corners, .. } => corners.clone(),
            Equation::Pin { corner, .. } => vec![*corner],
            Equation::BoundaryRatio { corners, .. } => corners.to_vec(),
        }
    }

    /// Turning signs of the product factors (all `+1` except for holonomy).
    pub fn deltas(&self) -> Vec<i8> {
        match self {
            Equation::Holonomy { deltas, .. } => deltas.clone(),
            other => unit_deltas(other.corners().len()),
        }
    }

    pub(crate) fn sort_key(&self) -> (EquationKind, Vec<CornerId>) {
        (self.kind(), self.corners())
    }

    /// Residual at the corner values `ms` (listed as in [`Equation::corners`]).
    pub fn residual_at(&self, mode: Mode, ms: &[f64]) -> f64 {
        match self {
            Equation::Triangle { .. } => ms[0] * ms[1] * ms[2] - ms[0] - ms[1] - ms[2],
            Equation::Edge { .. } => ms[0] * ms[1] - ms[2] * ms[3],
            Equation::Vertex { .. } | Equation::Holonomy { .. } => {
                let deltas = self.deltas();
                match (mode, self) {
                    (Mode::Branched, _) => product_and_cofactors(ms, &deltas).0.im,
                    (Mode::Unbranched, Equation::Vertex { .. }) => {
                        2.0 * arg_sum(ms, &deltas) - 2.0 * PI
                    }
                    (Mode::Unbranched, _) => 2.0 * arg_sum(ms, &deltas),
                }
            }
            Equation::Pin { value, .. } => ms[0] - value,
            Equation::BoundaryRatio { weights, .. } => weights[0] * ms[0] - weights[1] * ms[1],
        }
    }

    /// Partial derivatives with respect to each listed corner value.
    pub fn gradient_at(&self, mode: Mode, ms: &[f64]) -> Vec<f64> {
        match self {
            Equation::Triangle { .. } => vec![
                ms[1] * ms[2] - 1.0,
                ms[0] * ms[2] - 1.0,
                ms[0] * ms[1] - 1.0,
            ],
            Equation::Edge { .. } => vec![ms[1], ms[0], -ms[3], -ms[2]],
            Equation::Vertex { .. } | Equation::Holonomy { .. } => {
                let deltas = self.deltas();
                match mode {
                    Mode::Branched => product_and_cofactors(ms, &deltas)
                        .1
                        .iter()
                        .map(|c| c.im)
                        .collect(),
                    Mode::Unbranched => ms
                        .iter()
                        .zip(&deltas)
                        .map(|(&m, &d)| -2.0 * d as f64 / (1.0 + m * m))
                        .collect(),
                }
            }
            Equation::Pin { .. } => vec![1.0],
            Equation::BoundaryRatio { weights, .. } => vec![weights[0], -weights[1]],
        }
    }

    /// Residual divided by the natural size of the equation's terms, so that
    /// it is invariant under rescaling of the values it compares.
    pub fn normalized_at(&self, mode: Mode, ms: &[f64]) -> f64 {
        let r = self.residual_at(mode, ms);
        let modulus = |deltas: &[i8]| -> f64 {
            ms.iter()
                .zip(deltas)
                .map(|(m, &d)| (m * m + (d as f64).powi(2)).sqrt())
                .product()
        };
        let scale = match self {
            Equation::Triangle { .. } => modulus(&[1, 1, 1]),
            Equation::Edge { .. } => (ms[0] * ms[1]).abs() + (ms[2] * ms[3]).abs(),
            Equation::Vertex { .. } | Equation::Holonomy { .. } => match mode {
                Mode::Branched => modulus(&self.deltas()),
                Mode::Unbranched => 1.0,
            },
            Equation::Pin { value, .. } => value.abs().max(1.0),
            Equation::BoundaryRatio { weights, .. } => {
                (weights[0] * ms[0]).abs() + (weights[1] * ms[1]).abs()
            }
        };
        if scale > 0.0 {
            r / scale
        } else {
            r
        }
    }

    /// Residual in a well-scaled form with the same zero set on positive
    /// variables, and its gradient with respect to `log m` of each corner.
    ///
    /// Products of `m + iδ` are divided by their modulus, so triangle and
    /// vertex residuals become cosines and sines of half angle sums; edge,
    /// pin and ratio equations become differences of logarithms.
    pub(crate) fn scaled_at(&self, mode: Mode, ms: &[f64]) -> (f64, Vec<f64>) {
        let dphi = |m: f64, d: f64| -d * m / (1.0 + m * m);
        match self {
            Equation::Triangle { .. } => {
                let s = arg_sum(ms, &[1, 1, 1]);
                let g = ms.iter().map(|&m| -s.sin() * dphi(m, 1.0)).collect();
                (s.cos(), g)
            }
            Equation::Vertex { .. } | Equation::Holonomy { .. } => {
                let deltas = self.deltas();
                let s = arg_sum(ms, &deltas);
                let per: Vec<f64> = ms
                    .iter()
                    .zip(&deltas)
                    .map(|(&m, &d)| dphi(m, d as f64))
                    .collect();
                match mode {
                    Mode::Branched => (s.sin(), per.iter().map(|p| s.cos() * p).collect()),
                    Mode::Unbranched => {
                        let offset = if matches!(self, Equation::Vertex { .. }) {
                            2.0 * PI
                        } else {
                            0.0
                        };
                        (2.0 * s - offset, per.iter().map(|p| 2.0 * p).collect())
                    }
                }
            }
            Equation::Edge { .. } => {
                let (p, q) = (ms[0] * ms[1], ms[2] * ms[3]);
                if p * q > 0.0 {
                    ((p.abs() / q.abs()).ln(), vec![1.0, 1.0, -1.0, -1.0])
                } else {
                    let scale = 0.5 * (p.abs() + q.abs()) + f64::MIN_POSITIVE;
                    ((p - q) / scale, vec![p / scale, p / scale, -q / scale, -q / scale])
                }
            }
            Equation::Pin { value, .. } => {
                if *value > 0.0 && ms[0] > 0.0 {
                    ((ms[0] / value).ln(), vec![1.0])
                } else {
                    (ms[0] - value, vec![ms[0]])
                }
            }
            Equation::BoundaryRatio { weights, .. } => {
                let (p, q) = (weights[0] * ms[0], weights[1] * ms[1]);
                if p > 0.0 && q > 0.0 {
                    ((p / q).ln(), vec![1.0, -1.0])
                } else {
                    let scale = 0.5 * (p.abs() + q.abs()) + f64::MIN_POSITIVE;
                    ((p - q) / scale, vec![p / scale, -q / scale])
                }
            }
        }
    }
}
