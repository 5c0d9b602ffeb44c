//! Circle packings from solutions: angles, curvatures, planar placement,
//! spherical lift and torus development, with tangency certification.

mod svg;

pub use svg::render_svg;

use crate::complex::{
    cut_fundamental_domain, Complex, ComplexError, CornerId, DomainError, FundamentalDomain,
    NormalCurve, Side, SurfaceKind, VertexId,
};
use crate::equations::{angle_from_m, Assignment, EquationError, EquationKind, EquationSystem};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LayoutError {
    #[error("value at corner {0} is not positive")]
    NonPositiveValue(CornerId),
    #[error("curvatures disagree by {0:e} (relative)")]
    InconsistentCurvatures(f64),
    #[error("curvature scale factors around the torus are {0} and {1}, not 1")]
    TorusScaleMismatch(f64, f64),
    #[error("residual {0:e} is too large to lay out")]
    ResidualTooLarge(f64),
    #[error("vertex {vertex:?} placed at two positions {distance:e} apart")]
    PlacementMismatch { vertex: VertexId, distance: f64 },
    #[error("boundary circles of the outer face are not congruent (spread {0:e})")]
    NotEquilateralBoundary(f64),
    #[error("north pole is covered by the circle of vertex {0:?}")]
    NorthPoleCovered(VertexId),
    #[error("boundary of the fundamental domain does not close up (mismatch {0:e})")]
    BoundaryMismatch(f64),
    #[error("lattice vectors are degenerate")]
    DegenerateLattice,
    #[error("vertex equations are violated (residual {0:e})")]
    VertexEquationsViolated(f64),
    #[error("expected a {expected} system, got {got}")]
    WrongSurface { expected: SurfaceKind, got: SurfaceKind },
    #[error(transparent)]
    Equation(#[from] EquationError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct LayoutOptions {
    /// Radius multiplier for planar layouts.
    pub scale: f64,
    pub seed_face: Option<usize>,
    /// Vertex normalized to curvature 1 (default vertex 0).
    pub base_vertex: Option<VertexId>,
    /// Relative tolerance for placement, tangency and closure checks.
    pub tolerance: f64,
    /// Bound on the normalized residual of the input assignment.
    pub residual_tolerance: f64,
}

impl Default for LayoutOptions {
    fn default() -> Self {
        Self {
            scale: 1.0,
            seed_face: None,
            base_vertex: None,
            tolerance: 1e-9,
            residual_tolerance: 1e-9,
        }
    }
}

/// Angle at every corner, `theta[face][index]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AngleData {
    pub theta: Vec<[f64; 3]>,
}

impl AngleData {
    pub fn get(&self, c: CornerId) -> f64 {
        self.theta[c.face][c.index]
    }
}

/// Corner angles `2 atan2(1, m)`. Pinned corners may be negative; the
/// default sphere pin `-√3` gives `5π/3`.
pub fn angles_from_solution(
    system: &EquationSystem,
    assignment: &Assignment,
) -> Result<AngleData, LayoutError> {
    let values = system.corner_values(assignment)?;
    for c in system.variables() {
        if !(values[c.flat()] > 0.0) {
            return Err(LayoutError::NonPositiveValue(*c));
        }
    }
    Ok(AngleData {
        theta: values
            .chunks(3)
            .map(|m| [angle_from_m(m[0]), angle_from_m(m[1]), angle_from_m(m[2])])
            .collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvatureData {
    /// Curvature of every vertex, up to one global factor.
    pub kappa: Vec<f64>,
    /// Vertex with curvature 1.
    pub base: VertexId,
    /// Largest relative disagreement met while propagating.
    pub mismatch: f64,
    /// Torus: ratio of curvatures across the two cut loops (1 on solutions).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cycle_factors: Option<[f64; 2]>,
}

/// Disc region of the complex laid out in the plane: the complex itself, the
/// sphere minus its pinned face, or the cut torus.
struct Development {
    dev: Complex,
    /// Dev face to original face.
    face_map: Vec<usize>,
    /// Dev vertex to original vertex.
    vertex_map: Vec<VertexId>,
    domain: Option<FundamentalDomain>,
}

impl Development {
    fn new(system: &EquationSystem) -> Result<Self, LayoutError> {
        let k = system.complex();
        let (dev, face_map, domain) = match k.kind() {
            SurfaceKind::Disc => (k.clone(), (0..k.num_faces()).collect(), None),
            SurfaceKind::Sphere => {
                let d0 = system.delta0().unwrap_or(0);
                let keep: Vec<usize> = (0..k.num_faces()).filter(|&f| f != d0).collect();
                let (dev, map) = k.subcomplex(&keep, &[])?;
                (dev, map, None)
            }
            SurfaceKind::Torus => {
                let d = cut_fundamental_domain(k)?;
                (d.k0.clone(), (0..k.num_faces()).collect(), Some(d))
            }
        };
        let mut vertex_map = vec![VertexId(0); dev.num_vertices()];
        for c in dev.corners() {
            vertex_map[dev.vertex_of(c).0] = k.vertex_of(CornerId::new(face_map[c.face], c.index));
        }
        Ok(Self {
            dev,
            face_map,
            vertex_map,
            domain,
        })
    }

    fn original(&self, c: CornerId) -> CornerId {
        CornerId::new(self.face_map[c.face], c.index)
    }

    /// Dev vertex standing for an original vertex.
    fn dev_vertex(&self, v: VertexId) -> VertexId {
        match &self.domain {
            Some(d) => d.representative[v.0],
            None => VertexId(self.vertex_map.iter().position(|&w| w == v).unwrap_or(0)),
        }
    }

    /// Curvature per dev vertex with `kappa(base) = 1`, propagated face by
    /// face using `kappa ∝ 1/m` within each face.
    fn curvatures(&self, values: &[f64], base: VertexId) -> (Vec<f64>, f64) {
        let dev = &self.dev;
        let m = |c: CornerId| values[self.original(c).flat()];
        let mut face_scale = vec![f64::NAN; dev.num_faces()];
        let start = dev.vertex(base).corners[0];
        face_scale[start.face] = m(start);
        let mut queue = VecDeque::from([start.face]);
        while let Some(f) = queue.pop_front() {
            for s in 0..3 {
                let Some(q) = dev.partner(Side::new(f, s)) else {
                    continue;
                };
                if !face_scale[q.face].is_nan() {
                    continue;
                }
                // Corner q.start() sits at the same vertex as corner s+1 of f.
                let kappa = face_scale[f] / m(CornerId::new(f, (s + 1) % 3));
                face_scale[q.face] = kappa * m(q.start());
                queue.push_back(q.face);
            }
        }
        let mut kappa = vec![f64::NAN; dev.num_vertices()];
        let mut mismatch = 0.0f64;
        for c in dev.corners() {
            let v = dev.vertex_of(c).0;
            let k = face_scale[c.face] / m(c);
            if kappa[v].is_nan() {
                kappa[v] = k;
            } else {
                mismatch = mismatch.max((k - kappa[v]).abs() / kappa[v].abs());
            }
        }
        (kappa, mismatch)
    }

    /// Positions of dev vertices from angles, with the seed side of length
    /// `r_u + r_v`. Returns per-face corner points and the largest distance
    /// between two placements of one vertex.
    fn place(
        &self,
        angles: &AngleData,
        radius: &[f64],
        seed_face: usize,
    ) -> (Vec<[[f64; 2]; 3]>, Vec<[f64; 2]>, f64, VertexId) {
        let dev = &self.dev;
        let theta = |c: CornerId| angles.get(self.original(c));
        // Third corner of face f from corner a at p and corner a+1 at q, by
        // the angle at a and the law of sines.
        let third = |f: usize, a: usize, p: [f64; 2], q: [f64; 2]| -> [f64; 2] {
            let (b, c) = ((a + 1) % 3, (a + 2) % 3);
            let (dx, dy) = (q[0] - p[0], q[1] - p[1]);
            let ratio = theta(CornerId::new(f, b)).sin() / theta(CornerId::new(f, c)).sin();
            let (s, co) = theta(CornerId::new(f, a)).sin_cos();
            [
                p[0] + ratio * (co * dx - s * dy),
                p[1] + ratio * (s * dx + co * dy),
            ]
        };
        let mut pts = vec![[[f64::NAN; 2]; 3]; dev.num_faces()];
        let v0 = dev.vertex_of(CornerId::new(seed_face, 0)).0;
        let v1 = dev.vertex_of(CornerId::new(seed_face, 1)).0;
        let p0 = [0.0, 0.0];
        let p1 = [radius[v0] + radius[v1], 0.0];
        pts[seed_face] = [p0, p1, third(seed_face, 0, p0, p1)];
        let mut done = vec![false; dev.num_faces()];
        done[seed_face] = true;
        let mut queue = VecDeque::from([seed_face]);
        while let Some(f) = queue.pop_front() {
            for s in 0..3 {
                let Some(q) = dev.partner(Side::new(f, s)) else {
                    continue;
                };
                if done[q.face] {
                    continue;
                }
                let (g, t) = (q.face, q.index);
                let p = pts[f][(s + 1) % 3];
                let r = pts[f][s];
                let mut face = [[0.0; 2]; 3];
                face[t] = p;
                face[(t + 1) % 3] = r;
                face[(t + 2) % 3] = third(g, t, p, r);
                pts[g] = face;
                done[g] = true;
                queue.push_back(g);
            }
        }
        let mut pos = vec![[f64::NAN; 2]; dev.num_vertices()];
        let mut worst = (0.0f64, VertexId(0));
        for c in dev.corners() {
            let v = dev.vertex_of(c).0;
            let p = pts[c.face][c.index];
            if pos[v][0].is_nan() {
                pos[v] = p;
            } else {
                let d = (p[0] - pos[v][0]).hypot(p[1] - pos[v][1]);
                if !(d <= worst.0) {
                    worst = (d, self.vertex_map[v]);
                }
            }
        }
        (pts, pos, worst.0, worst.1)
    }
}

fn check_residual(
    system: &EquationSystem,
    assignment: &Assignment,
    tol: f64,
) -> Result<Vec<f64>, LayoutError> {
    let values = system.corner_values(assignment)?;
    for c in system.variables() {
        if !(values[c.flat()] > 0.0) {
            return Err(LayoutError::NonPositiveValue(*c));
        }
    }
    let worst = system
        .normalized_from_corners(&values)
        .iter()
        .fold(0.0f64, |a, r| if r.is_nan() { f64::NAN } else { a.max(r.abs()) });
    if !(worst <= tol) {
        return Err(LayoutError::ResidualTooLarge(worst));
    }
    Ok(values)
}

fn curvature_data(
    system: &EquationSystem,
    devel: &Development,
    values: &[f64],
    base: VertexId,
    tol: f64,
) -> Result<(CurvatureData, Vec<f64>), LayoutError> {
    let k = system.complex();
    let (dev_kappa, mismatch) = devel.curvatures(values, devel.dev_vertex(base));
    if !(mismatch <= tol) {
        return Err(LayoutError::InconsistentCurvatures(mismatch));
    }
    let mut kappa = vec![f64::NAN; k.num_vertices()];
    for (i, &v) in devel.vertex_map.iter().enumerate() {
        if kappa[v.0].is_nan() || devel.domain.as_ref().map(|d| d.representative[v.0].0) == Some(i)
        {
            kappa[v.0] = dev_kappa[i];
        }
    }
    let cycle_factors = devel.domain.as_ref().map(|d| {
        let factor = |from: &[VertexId], to: &[VertexId]| {
            let mut worst = 1.0f64;
            for (a, b) in from.iter().zip(to) {
                let r = dev_kappa[b.0] / dev_kappa[a.0];
                if (r - 1.0).abs() >= (worst - 1.0).abs() {
                    worst = r;
                }
            }
            worst
        };
        [factor(&d.p_left, &d.p_right), factor(&d.p_bottom, &d.p_top)]
    });
    if let Some([a, b]) = cycle_factors {
        if !((a - 1.0).abs() <= tol && (b - 1.0).abs() <= tol) {
            return Err(LayoutError::TorusScaleMismatch(a, b));
        }
    }
    Ok((
        CurvatureData {
            kappa,
            base,
            mismatch,
            cycle_factors,
        },
        dev_kappa,
    ))
}

/// Curvature of every vertex, normalized to 1 at `base` (default vertex 0).
/// On a sphere the pinned face is left out; on a torus curvatures are
/// propagated over the cut domain and compared across the cut.
pub fn curvatures_from_solution(
    system: &EquationSystem,
    assignment: &Assignment,
    base: Option<VertexId>,
    tol: f64,
) -> Result<CurvatureData, LayoutError> {
    let values = system.corner_values(assignment)?;
    for c in system.variables() {
        if !(values[c.flat()] > 0.0) {
            return Err(LayoutError::NonPositiveValue(*c));
        }
    }
    let devel = Development::new(system)?;
    Ok(curvature_data(system, &devel, &values, base.unwrap_or(VertexId(0)), tol)?.0)
}

/// Values `m = √(κ_u κ_v + κ_v κ_w + κ_w κ_u) / κ_v` at every corner.
pub fn m_from_curvatures(complex: &Complex, kappa: &[f64]) -> Assignment {
    let mut values = Vec::with_capacity(complex.num_corners());
    for f in 0..complex.num_faces() {
        let k = complex.face_vertices(f).map(|v| kappa[v.0]);
        let l = (k[0] * k[1] + k[1] * k[2] + k[2] * k[0]).sqrt();
        values.extend(k.iter().map(|x| l / x));
    }
    Assignment::from_values(&values)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Geometry {
    Plane,
    Sphere,
    TorusLattice,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub vertex: VertexId,
    /// Planar centre, or unit vector of the cap centre on the sphere.
    pub center: Vec<f64>,
    /// Euclidean radius, or spherical radius on the sphere.
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlacedFace {
    pub face: usize,
    pub vertices: [VertexId; 3],
    pub points: [Vec<f64>; 3],
    /// Torus: lattice offset of each corner from its vertex's circle.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offsets: Option<[[i64; 2]; 3]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificationReport {
    /// Largest `|distance - (r_u + r_v)|` over realized edges, relative to
    /// the largest radius.
    pub max_tangency: f64,
    /// Largest orientation defect of a face, relative to the largest radius
    /// squared (zero when every face is positively oriented).
    pub max_orientation: f64,
    /// Torus: largest gap between a face corner and its lattice-translated
    /// circle centre, relative to the largest radius.
    pub max_closure: f64,
    /// Edges, as vertex pairs, whose tangency defect exceeds the tolerance.
    pub offending_edges: Vec<[VertexId; 2]>,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Packing {
    pub geometry: Geometry,
    pub circles: Vec<Circle>,
    pub faces: Vec<PlacedFace>,
    /// Sphere: the planar packing that was lifted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planar: Option<Vec<Circle>>,
    /// Torus: translations along the two cut loops.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<[[f64; 2]; 2]>,
    pub certification: CertificationReport,
}

impl Packing {
    /// Curvature of every vertex: reciprocal Euclidean radii, taken from the
    /// planar packing for spheres.
    pub fn curvatures(&self) -> Vec<f64> {
        let circles = self.planar.as_ref().unwrap_or(&self.circles);
        let mut kappa = vec![f64::NAN; circles.len()];
        for c in circles {
            kappa[c.vertex.0] = 1.0 / c.radius;
        }
        kappa
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn cross(a: &[f64], b: &[f64]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Certify tangency along every realized edge, orientation of every face
/// and, on a torus, closure of faces onto lattice-translated circles.
pub fn check_packing(packing: &Packing, tol: f64) -> CertificationReport {
    let radius: Vec<f64> = {
        let mut r = vec![f64::NAN; packing.circles.len()];
        for c in &packing.circles {
            r[c.vertex.0] = c.radius;
        }
        r
    };
    let rmax = radius.iter().fold(0.0f64, |a, &x| a.max(x));
    let mut tangency = 0.0f64;
    let mut orientation = 0.0f64;
    let mut closure = 0.0f64;
    let mut offending = Vec::new();
    for face in &packing.faces {
        for i in 0..3 {
            let j = (i + 1) % 3;
            let (u, v) = (face.vertices[i], face.vertices[j]);
            let (p, q) = (&face.points[i], &face.points[j]);
            let dist = match packing.geometry {
                Geometry::Sphere => dot(p, q).clamp(-1.0, 1.0).acos(),
                _ => (p[0] - q[0]).hypot(p[1] - q[1]),
            };
            let defect = (dist - radius[u.0] - radius[v.0]).abs() / rmax;
            if !(defect <= tol) {
                let pair = [u.min(v), u.max(v)];
                if !offending.contains(&pair) {
                    offending.push(pair);
                }
            }
            tangency = if defect.is_nan() { f64::NAN } else { tangency.max(defect) };
        }
        let [a, b, c] = &face.points;
        let signed = match packing.geometry {
            Geometry::Sphere => dot(&cross(a, b), c),
            _ => (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]),
        };
        let scale = if packing.geometry == Geometry::Sphere { 1.0 } else { rmax * rmax };
        orientation = orientation.max((-signed / scale).max(0.0));
        if let (Some(offsets), Some(t)) = (&face.offsets, &packing.lattice) {
            for i in 0..3 {
                let center = &packing.circles[face.vertices[i].0].center;
                let o = offsets[i];
                let expect = [
                    center[0] + o[0] as f64 * t[0][0] + o[1] as f64 * t[1][0],
                    center[1] + o[0] as f64 * t[0][1] + o[1] as f64 * t[1][1],
                ];
                let gap = (expect[0] - face.points[i][0]).hypot(expect[1] - face.points[i][1]);
                closure = closure.max(gap / rmax);
            }
        }
    }
    offending.sort();
    let passed = tangency <= tol && orientation <= tol && closure <= tol;
    CertificationReport {
        max_tangency: tangency,
        max_orientation: orientation,
        max_closure: closure,
        offending_edges: offending,
        tolerance: tol,
        passed,
    }
}

struct Planar {
    devel: Development,
    curv: CurvatureData,
    dev_radius: Vec<f64>,
    points: Vec<[[f64; 2]; 3]>,
    pos: Vec<[f64; 2]>,
}

fn planar_layout(
    system: &EquationSystem,
    assignment: &Assignment,
    options: &LayoutOptions,
) -> Result<Planar, LayoutError> {
    let values = check_residual(system, assignment, options.residual_tolerance)?;
    let devel = Development::new(system)?;
    let base = options.base_vertex.unwrap_or(VertexId(0));
    let (curv, dev_kappa) = curvature_data(system, &devel, &values, base, options.tolerance)?;
    let angles = angles_from_solution(system, assignment)?;
    let dev_radius: Vec<f64> = dev_kappa.iter().map(|k| options.scale / k).collect();
    let seed = match options.seed_face {
        Some(f) => devel
            .face_map
            .iter()
            .position(|&g| g == f)
            .ok_or_else(|| EquationError::OptionMismatch(format!("face {f} is not laid out")))?,
        None => 0,
    };
    let (points, pos, worst, vertex) = devel.place(&angles, &dev_radius, seed);
    let rmax = dev_radius.iter().fold(0.0f64, |a, &x| a.max(x));
    if !(worst <= options.tolerance * rmax) {
        return Err(LayoutError::PlacementMismatch {
            vertex,
            distance: worst,
        });
    }
    Ok(Planar {
        devel,
        curv,
        dev_radius,
        points,
        pos,
    })
}

fn require(system: &EquationSystem, kind: SurfaceKind) -> Result<(), LayoutError> {
    let got = system.complex().kind();
    if got != kind {
        return Err(LayoutError::WrongSurface {
            expected: kind,
            got,
        });
    }
    Ok(())
}

/// Lay out a disc solution in the plane. The seed face has its corner 0 at
/// the origin and corner 1 on the positive x-axis.
pub fn realize_disc(
    system: &EquationSystem,
    assignment: &Assignment,
    options: &LayoutOptions,
) -> Result<Packing, LayoutError> {
    require(system, SurfaceKind::Disc)?;
    let p = planar_layout(system, assignment, options)?;
    let k = system.complex();
    let circles = (0..k.num_vertices())
        .map(|v| Circle {
            vertex: VertexId(v),
            center: p.pos[v].to_vec(),
            radius: p.dev_radius[v],
        })
        .collect();
    let faces = (0..k.num_faces())
        .map(|f| PlacedFace {
            face: f,
            vertices: k.face_vertices(f),
            points: p.points[f].map(|x| x.to_vec()),
            offsets: None,
        })
        .collect();
    let mut packing = Packing {
        geometry: Geometry::Plane,
        circles,
        faces,
        planar: None,
        lattice: None,
        certification: empty_report(options.tolerance),
    };
    packing.certification = check_packing(&packing, options.tolerance);
    Ok(packing)
}

fn empty_report(tol: f64) -> CertificationReport {
    CertificationReport {
        max_tangency: 0.0,
        max_orientation: 0.0,
        max_closure: 0.0,
        offending_edges: Vec::new(),
        tolerance: tol,
        passed: true,
    }
}

/// Spherical cap bounded by the image of a planar circle under inverse
/// stereographic projection from the north pole, on the side away from the
/// pole.
fn lift_circle(center: [f64; 2], radius: f64) -> ([f64; 3], f64) {
    let lift = |x: f64, y: f64| {
        let d = 1.0 + x * x + y * y;
        [2.0 * x / d, 2.0 * y / d, (x * x + y * y - 1.0) / d]
    };
    let q: Vec<[f64; 3]> = (0..3)
        .map(|j| {
            let a = 2.0 * PI * j as f64 / 3.0;
            lift(center[0] + radius * a.cos(), center[1] + radius * a.sin())
        })
        .collect();
    let e1 = [q[1][0] - q[0][0], q[1][1] - q[0][1], q[1][2] - q[0][2]];
    let e2 = [q[2][0] - q[0][0], q[2][1] - q[0][1], q[2][2] - q[0][2]];
    let n = cross(&e1, &e2);
    let len = dot(&n, &n).sqrt();
    let mut n = n.map(|x| x / len);
    let mut d = dot(&n, &q[0]);
    if n[2] >= d {
        // The cap centred at n would contain the pole.
        n = n.map(|x| -x);
        d = -d;
    }
    (n, d.clamp(-1.0, 1.0).acos())
}

/// Lay out a sphere solution: the complex minus the pinned face in the
/// plane, then lifted to the unit sphere with the pole in the interstice of
/// the pinned face. The planar scale is chosen so the cap centres have mean
/// height zero.
pub fn realize_sphere(
    system: &EquationSystem,
    assignment: &Assignment,
    options: &LayoutOptions,
) -> Result<Packing, LayoutError> {
    require(system, SurfaceKind::Sphere)?;
    let p = planar_layout(system, assignment, options)?;
    let k = system.complex();
    let d0 = system.delta0().unwrap_or(0);
    let outer = k.face_vertices(d0);
    let ko: Vec<f64> = outer.iter().map(|&v| p.curv.kappa[v.0]).collect();
    let kmax = ko.iter().fold(0.0f64, |a, &x| a.max(x));
    let kmin = ko.iter().fold(f64::INFINITY, |a, &x| a.min(x));
    let spread = (kmax - kmin) / kmax;
    if !(spread <= options.tolerance) {
        return Err(LayoutError::NotEquilateralBoundary(spread));
    }

    // Planar circle per vertex, centred on the outer triangle and reflected
    // so that the lift preserves orientation.
    let dev_of = |v: VertexId| p.devel.dev_vertex(v).0;
    let centroid = outer.iter().fold([0.0, 0.0], |acc, &v| {
        let q = p.pos[dev_of(v)];
        [acc[0] + q[0] / 3.0, acc[1] + q[1] / 3.0]
    });
    let plane: Vec<([f64; 2], f64)> = (0..k.num_vertices())
        .map(|v| {
            let i = dev_of(VertexId(v));
            let q = p.pos[i];
            ([q[0] - centroid[0], centroid[1] - q[1]], p.dev_radius[i])
        })
        .collect();
    let lifted = |s: f64| -> Vec<([f64; 3], f64)> {
        plane
            .iter()
            .map(|(c, r)| lift_circle([s * c[0], s * c[1]], s * r))
            .collect()
    };
    let mean_z = |s: f64| lifted(s).iter().map(|(c, _)| c[2]).sum::<f64>() / plane.len() as f64;
    let (mut lo, mut hi) = (-40.0f64, 40.0f64);
    let scale = if mean_z(lo.exp()) < 0.0 && mean_z(hi.exp()) > 0.0 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mean_z(mid.exp()) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (0.5 * (lo + hi)).exp()
    } else {
        1.0
    };
    let caps = lifted(scale);
    for (v, (c, rho)) in caps.iter().enumerate() {
        if c[2] >= rho.cos() - options.tolerance {
            return Err(LayoutError::NorthPoleCovered(VertexId(v)));
        }
    }
    let circles = caps
        .iter()
        .enumerate()
        .map(|(v, (c, rho))| Circle {
            vertex: VertexId(v),
            center: c.to_vec(),
            radius: *rho,
        })
        .collect();
    let planar = plane
        .iter()
        .enumerate()
        .map(|(v, (c, r))| Circle {
            vertex: VertexId(v),
            center: vec![scale * c[0], scale * c[1]],
            radius: scale * r,
        })
        .collect();
    let faces = (0..k.num_faces())
        .map(|f| {
            let vs = k.face_vertices(f);
            PlacedFace {
                face: f,
                vertices: vs,
                points: vs.map(|v| caps[v.0].0.to_vec()),
                offsets: None,
            }
        })
        .collect();
    let mut packing = Packing {
        geometry: Geometry::Sphere,
        circles,
        faces,
        planar: Some(planar),
        lattice: None,
        certification: empty_report(options.tolerance),
    };
    packing.certification = check_packing(&packing, options.tolerance);
    Ok(packing)
}

/// Lay out a torus solution: the cut domain in the plane, with the two
/// translations identifying opposite sides of its boundary.
pub fn realize_torus(
    system: &EquationSystem,
    assignment: &Assignment,
    options: &LayoutOptions,
) -> Result<Packing, LayoutError> {
    require(system, SurfaceKind::Torus)?;
    let p = planar_layout(system, assignment, options)?;
    let d = p.devel.domain.as_ref().expect("torus development has a domain");
    let k = system.complex();
    let at = |v: VertexId| p.pos[v.0];
    let diff = |a: [f64; 2], b: [f64; 2]| [a[0] - b[0], a[1] - b[1]];
    let t_l = diff(at(d.p_right[0]), at(d.p_left[0]));
    let t_m = diff(at(d.p_top[0]), at(d.p_bottom[0]));
    let rmax = p.dev_radius.iter().fold(0.0f64, |a, &x| a.max(x));
    let det = t_l[0] * t_m[1] - t_l[1] * t_m[0];
    if !(det.abs() > options.tolerance * t_l[0].hypot(t_l[1]) * t_m[0].hypot(t_m[1])) {
        return Err(LayoutError::DegenerateLattice);
    }
    let mut gap = 0.0f64;
    for x in 0..p.pos.len() {
        let rep = d.representative[d.torus_vertex[x].0];
        let o = d.offsets[x];
        let base = at(rep);
        let expect = [
            base[0] + o[0] as f64 * t_l[0] + o[1] as f64 * t_m[0],
            base[1] + o[0] as f64 * t_l[1] + o[1] as f64 * t_m[1],
        ];
        gap = gap.max((expect[0] - p.pos[x][0]).hypot(expect[1] - p.pos[x][1]));
    }
    if !(gap <= options.tolerance * rmax) {
        return Err(LayoutError::BoundaryMismatch(gap / rmax));
    }
    let circles = (0..k.num_vertices())
        .map(|v| {
            let rep = d.representative[v];
            Circle {
                vertex: VertexId(v),
                center: at(rep).to_vec(),
                radius: p.dev_radius[rep.0],
            }
        })
        .collect();
    let faces = (0..k.num_faces())
        .map(|f| PlacedFace {
            face: f,
            vertices: k.face_vertices(f),
            points: p.points[f].map(|x| x.to_vec()),
            offsets: Some([0, 1, 2].map(|i| d.offsets[d.k0_vertex_of(CornerId::new(f, i)).0])),
        })
        .collect();
    let mut packing = Packing {
        geometry: Geometry::TorusLattice,
        circles,
        faces,
        planar: None,
        lattice: Some([t_l, t_m]),
        certification: empty_report(options.tolerance),
    };
    packing.certification = check_packing(&packing, options.tolerance);
    Ok(packing)
}

/// Lay out any solution according to the surface type.
pub fn realize(
    system: &EquationSystem,
    assignment: &Assignment,
    options: &LayoutOptions,
) -> Result<Packing, LayoutError> {
    match system.complex().kind() {
        SurfaceKind::Disc => realize_disc(system, assignment, options),
        SurfaceKind::Sphere => realize_sphere(system, assignment, options),
        SurfaceKind::Torus => realize_torus(system, assignment, options),
    }
}

/// Signed angle sum `Σ δ_j θ_j` along a closed normal curve, reduced to
/// `(-π, π]`. Requires the vertex equations of `system` to hold.
pub fn theta_holonomy(
    system: &EquationSystem,
    assignment: &Assignment,
    curve: &NormalCurve,
    tol: f64,
) -> Result<f64, LayoutError> {
    let values = system.corner_values(assignment)?;
    let normalized = system.normalized_from_corners(&values);
    let worst = system
        .equations()
        .iter()
        .zip(&normalized)
        .filter(|(e, _)| e.kind() == EquationKind::Vertex)
        .fold(0.0f64, |a, (_, r)| a.max(r.abs()));
    if !(worst <= tol) {
        return Err(LayoutError::VertexEquationsViolated(worst));
    }
    let total: f64 = curve
        .steps
        .iter()
        .map(|s| s.delta as f64 * angle_from_m(values[CornerId::new(s.face, s.corner).flat()]))
        .sum();
    Ok(reduce_angle(total))
}

/// Representative of an angle in `(-π, π]`.
pub fn reduce_angle(x: f64) -> f64 {
    let mut r = x.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{build_complex, ComplexSpec};
    use crate::equations::{assemble_system, Flavor, SystemOptions};
    use crate::fixtures;
    use crate::solver::{solve, SolveConfig};

    const S3: f64 = 1.732_050_807_568_877_2;

    fn solved(spec: ComplexSpec, o: SystemOptions) -> (EquationSystem, Assignment) {
        let s = assemble_system(&build_complex(spec).unwrap(), &o).unwrap();
        let a = solve(&s, &SolveConfig::default()).unwrap().ensure_converged().unwrap();
        (s, a.assignment)
    }

    fn tetra() -> (EquationSystem, Assignment) {
        solved(
            fixtures::tetrahedron(),
            SystemOptions {
                flavor: Flavor::Reduced,
                delta0: Some(3),
                ..Default::default()
            },
        )
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn angle_examples() {
        assert!(close(angle_from_m(S3), PI / 3.0, 1e-15));
        assert!(close(angle_from_m(1.0), PI / 2.0, 1e-15));
        assert!(close(angle_from_m(2.0 + S3), PI / 6.0, 1e-15));
        let (s, a) = tetra();
        let ang = angles_from_solution(&s, &a).unwrap();
        for i in 0..3 {
            assert!(close(ang.theta[3][i], 5.0 * PI / 3.0, 1e-15));
        }
    }

    #[test]
    fn lone_triangle() {
        let s = assemble_system(
            &build_complex(fixtures::single_face()).unwrap(),
            &SystemOptions::default(),
        )
        .unwrap();
        let a = Assignment::uniform(1, S3);
        let c = curvatures_from_solution(&s, &a, None, 1e-12).unwrap();
        assert!(c.kappa.iter().all(|&k| close(k, 1.0, 1e-15)));
        let p = realize_disc(&s, &a, &LayoutOptions::default()).unwrap();
        let pts = &p.faces[0].points;
        for i in 0..3 {
            let j = (i + 1) % 3;
            let d = (pts[i][0] - pts[j][0]).hypot(pts[i][1] - pts[j][1]);
            assert!(close(d, 2.0, 1e-14));
            assert!(close(p.circles[i].radius, 1.0, 1e-15));
        }
        assert!(p.certification.passed);
    }

    #[test]
    fn tetrahedron_curvatures_and_disc_layout() {
        let (s, a) = tetra();
        let c = curvatures_from_solution(&s, &a, None, 1e-9).unwrap();
        // Vertex 0 is the centre; petals have ratio 2/√3 - 1 to it.
        for v in 1..4 {
            assert!(close(c.kappa[v], 2.0 / S3 - 1.0, 1e-12));
        }
        // The same values on the 3-flower give the equilateral picture.
        let flower = assemble_system(
            &build_complex(fixtures::flower(3)).unwrap(),
            &SystemOptions::default(),
        )
        .unwrap();
        let fa = Assignment {
            m: a.m[..3].to_vec(),
        };
        let p = realize_disc(&flower, &fa, &LayoutOptions::default()).unwrap();
        assert!(p.certification.passed, "{:?}", p.certification);
        let centre = &p.circles[0].center;
        let petals: Vec<&Vec<f64>> = (1..4).map(|v| &p.circles[v].center).collect();
        let side = |i: usize, j: usize| {
            (petals[i][0] - petals[j][0]).hypot(petals[i][1] - petals[j][1])
        };
        assert!(close(side(0, 1), side(1, 2), 1e-12) && close(side(1, 2), side(2, 0), 1e-12));
        let cx = (petals[0][0] + petals[1][0] + petals[2][0]) / 3.0;
        let cy = (petals[0][1] + petals[1][1] + petals[2][1]) / 3.0;
        assert!(close(cx, centre[0], 1e-12) && close(cy, centre[1], 1e-12));
    }

    #[test]
    fn tetrahedron_on_the_sphere_is_regular() {
        let (s, a) = tetra();
        let p = realize_sphere(&s, &a, &LayoutOptions::default()).unwrap();
        assert!(p.certification.passed, "{:?}", p.certification);
        let rho = p.circles[0].radius;
        for c in &p.circles {
            assert!(close(c.radius, rho, 1e-9));
        }
        // Centres of a regular tetrahedron: pairwise dot products -1/3.
        for i in 0..4 {
            for j in 0..i {
                assert!(close(dot(&p.circles[i].center, &p.circles[j].center), -1.0 / 3.0, 1e-9));
            }
        }
    }

    #[test]
    fn standard_torus_is_hexagonal() {
        let (s, a) = solved(fixtures::standard_torus(), SystemOptions::default());
        let p = realize_torus(&s, &a, &LayoutOptions::default()).unwrap();
        assert!(p.certification.passed, "{:?}", p.certification);
        let [t1, t2] = p.lattice.unwrap();
        assert!(close(t1[0].hypot(t1[1]), 2.0, 1e-12));
        assert!(close(t2[0].hypot(t2[1]), 2.0, 1e-12));
        let cos = (t1[0] * t2[0] + t1[1] * t2[1]) / 4.0;
        assert!(close(cos.abs(), 0.5, 1e-12));
        assert!(t1[0] * t2[1] - t1[1] * t2[0] > 0.0);

        let big = realize_torus(&s, &a, &LayoutOptions { scale: 3.0, ..Default::default() }).unwrap();
        let [b1, _] = big.lattice.unwrap();
        assert!(close(b1[0].hypot(b1[1]), 6.0, 1e-12));
    }

    #[test]
    fn perturbed_radius_fails_certification() {
        let (s, a) = tetra();
        let mut p = realize_sphere(&s, &a, &LayoutOptions::default()).unwrap();
        p.circles[2].radius *= 1.01;
        let r = check_packing(&p, 1e-9);
        assert!(!r.passed);
        assert!(r.offending_edges.iter().all(|e| e.contains(&VertexId(2))));
        assert_eq!(r.offending_edges.len(), 3);
    }

    #[test]
    fn round_trip_through_curvatures() {
        for (s, a) in [
            tetra(),
            solved(fixtures::standard_torus(), SystemOptions::default()),
            solved(fixtures::icosahedron(), SystemOptions { flavor: Flavor::Reduced, ..Default::default() }),
        ] {
            let p = realize(&s, &a, &LayoutOptions::default()).unwrap();
            let back = m_from_curvatures(s.complex(), &p.curvatures());
            for c in s.variables() {
                let (x, y) = (a.get(*c).unwrap(), back.get(*c).unwrap());
                assert!((x - y).abs() <= 1e-9 * x, "{c}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn holonomy_angles() {
        let (s, a) = solved(fixtures::standard_torus(), SystemOptions::default());
        let l = s.lambda().unwrap();
        assert!(close(theta_holonomy(&s, &a, l, 1e-9).unwrap(), 0.0, 1e-12));
        let k = s.complex();
        let around = NormalCurve::around_vertex(k, VertexId(0)).unwrap();
        assert!(close(theta_holonomy(&s, &a, &around, 1e-9).unwrap(), 0.0, 1e-12));
        let mut bad = a.clone();
        bad.set(CornerId::new(0, 0), 1.0);
        assert!(matches!(
            theta_holonomy(&s, &bad, l, 1e-9),
            Err(LayoutError::VertexEquationsViolated(_))
        ));
    }

    #[test]
    fn seed_face_does_not_change_shape() {
        let k = build_complex(fixtures::flower(5)).unwrap();
        let curv = k.boundary_vertices().into_iter().zip([1.0, 2.0, 0.5, 1.5, 3.0]).collect();
        let o = SystemOptions {
            boundary_curvatures: Some(curv),
            ..Default::default()
        };
        let s = assemble_system(&k, &o).unwrap();
        let a = solve(&s, &SolveConfig::default()).unwrap().ensure_converged().unwrap().assignment;
        let p0 = realize_disc(&s, &a, &LayoutOptions::default()).unwrap();
        let p3 = realize_disc(&s, &a, &LayoutOptions { seed_face: Some(3), ..Default::default() }).unwrap();
        for u in 0..6 {
            for v in 0..u {
                let d = |p: &Packing| {
                    let (a, b) = (&p.circles[u].center, &p.circles[v].center);
                    (a[0] - b[0]).hypot(a[1] - b[1])
                };
                assert!(close(d(&p0), d(&p3), 1e-12));
            }
        }
    }

    #[test]
    fn non_solution_is_rejected() {
        let s = assemble_system(
            &build_complex(fixtures::flower(4)).unwrap(),
            &SystemOptions::default(),
        )
        .unwrap();
        assert!(matches!(
            realize_disc(&s, &Assignment::uniform(4, 1.0), &LayoutOptions::default()),
            Err(LayoutError::ResidualTooLarge(_))
        ));
    }
}
