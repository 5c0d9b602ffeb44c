//! Assembly and evaluation of complete equation systems.

use super::{
    edge_equation, holonomy_equation, triangle_equation, vertex_equation, Equation,
    EquationError, EquationKind, Mode,
};
use crate::complex::{
    cut_fundamental_domain, Complex, CornerId, EdgeId, NormalCurve, SurfaceKind, VertexId,
};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Value pinned at the three corners of the omitted face of a sphere.
pub const SPHERE_PIN: f64 = -1.732_050_807_568_877_2;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Flavor {
    #[default]
    Full,
    Reduced,
}

/// Options for [`assemble_system`]. Fields that do not apply to the surface
/// type must be left unset.
#[derive(Clone, Debug, Default)]
pub struct SystemOptions {
    pub mode: Mode,
    pub flavor: Flavor,
    /// Sphere: the face whose corners are pinned (default face 0).
    pub delta0: Option<usize>,
    /// Sphere: pinned values at the corners of `delta0` (default `-√3` each).
    pub delta0_values: Option<[f64; 3]>,
    /// Reduced sphere or torus: the omitted edge equation.
    pub e0: Option<EdgeId>,
    /// Reduced torus: the omitted vertex equation (default vertex 0).
    pub v0: Option<VertexId>,
    /// Torus: holonomy curves. Defaults are the curves named `lambda` and
    /// `mu` in the complex file, else the pushoffs of the cut loops.
    pub lambda: Option<NormalCurve>,
    pub mu: Option<NormalCurve>,
    /// Disc: corners fixed to constants.
    pub pins: Vec<(CornerId, f64)>,
    /// Disc: curvature of every boundary vertex, up to scale.
    pub boundary_curvatures: Option<Vec<(VertexId, f64)>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PinnedCorner {
    pub corner: CornerId,
    pub value: f64,
}

/// Values for the corners of a complex, `m[face][index]`. Missing values
/// are `null`; pinned corners take the system's constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub m: Vec<[Option<f64>; 3]>,
}

impl Assignment {
    pub fn uniform(num_faces: usize, value: f64) -> Self {
        Self {
            m: vec![[Some(value); 3]; num_faces],
        }
    }

    pub fn from_values(values: &[f64]) -> Self {
        Self {
            m: values
                .chunks(3)
                .map(|c| [Some(c[0]), Some(c[1]), Some(c[2])])
                .collect(),
        }
    }

    pub fn get(&self, c: CornerId) -> Option<f64> {
        self.m.get(c.face).and_then(|f| f[c.index])
    }

    pub fn set(&mut self, c: CornerId, value: f64) {
        self.m[c.face][c.index] = Some(value);
    }
}

/// Sparse matrix as `(row, column, value)` triplets.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SparseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl SparseMatrix {
    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for &(i, j, v) in &self.entries {
            m[(i, j)] += v;
        }
        m
    }
}

/// Serialized form of a system.
#[derive(Clone, Debug, Serialize)]
pub struct SystemExport {
    pub kind: SurfaceKind,
    pub mode: Mode,
    pub flavor: Flavor,
    pub variables: Vec<CornerId>,
    pub pinned: Vec<PinnedCorner>,
    pub equations: Vec<Equation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta0: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e0: Option<EdgeId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v0: Option<VertexId>,
}

/// An assembled system: equations, variable corners and pinned corners.
#[derive(Clone, Debug)]
pub struct EquationSystem {
    complex: Complex,
    mode: Mode,
    flavor: Flavor,
    variables: Vec<CornerId>,
    pinned: Vec<PinnedCorner>,
    equations: Vec<Equation>,
    column: Vec<Option<usize>>,
    pin_value: Vec<Option<f64>>,
    delta0: Option<usize>,
    e0: Option<EdgeId>,
    v0: Option<VertexId>,
    lambda: Option<NormalCurve>,
    mu: Option<NormalCurve>,
}

fn mismatch(msg: &str) -> EquationError {
    EquationError::OptionMismatch(msg.to_string())
}

fn invalid(msg: String) -> EquationError {
    EquationError::InvalidReductionChoice(msg)
}

/// Assemble the circle packing equations of `complex`.
pub fn assemble_system(
    complex: &Complex,
    options: &SystemOptions,
) -> Result<EquationSystem, EquationError> {
    let kind = complex.kind();
    let o = options;
    if kind != SurfaceKind::Sphere && (o.delta0.is_some() || o.delta0_values.is_some()) {
        return Err(mismatch("delta0 applies to spheres only"));
    }
    if kind != SurfaceKind::Torus && (o.lambda.is_some() || o.mu.is_some() || o.v0.is_some()) {
        return Err(mismatch("lambda, mu and v0 apply to tori only"));
    }
    if kind != SurfaceKind::Disc && (!o.pins.is_empty() || o.boundary_curvatures.is_some()) {
        return Err(mismatch("pins and boundary ratios apply to discs only"));
    }
    if o.flavor == Flavor::Full && (o.e0.is_some() || o.v0.is_some()) {
        return Err(mismatch("e0 and v0 apply to reduced systems only"));
    }

    let mut equations = Vec::new();
    let mut pinned = Vec::new();
    let (mut delta0, mut e0, mut v0) = (None, None, None);
    let (mut lambda, mut mu) = (None, None);

    let interior_vertex_eqs = |skip: &dyn Fn(VertexId) -> bool| -> Result<Vec<Equation>, EquationError> {
        complex
            .vertices()
            .filter(|(v, vx)| !vx.boundary && !skip(*v))
            .map(|(v, _)| vertex_equation(complex, v))
            .collect()
    };
    let interior_edge_eqs = |skip: Option<EdgeId>| -> Result<Vec<Equation>, EquationError> {
        complex
            .edges()
            .filter(|(e, edge)| !edge.is_boundary() && Some(*e) != skip)
            .map(|(e, _)| edge_equation(complex, e))
            .collect()
    };
    let triangle_eqs = |skip: Option<usize>| -> Result<Vec<Equation>, EquationError> {
        (0..complex.num_faces())
            .filter(|&f| Some(f) != skip)
            .map(|f| triangle_equation([0, 1, 2].map(|i| CornerId::new(f, i))))
            .collect()
    };

    match kind {
        SurfaceKind::Disc => {
            if o.flavor == Flavor::Reduced {
                return Err(mismatch("discs have no reduced system"));
            }
            equations.extend(triangle_eqs(None)?);
            equations.extend(interior_edge_eqs(None)?);
            equations.extend(interior_vertex_eqs(&|_| false)?);
            for &(corner, value) in &o.pins {
                if corner.face >= complex.num_faces() || corner.index > 2 {
                    return Err(mismatch(&format!("pinned corner {corner} does not exist")));
                }
                equations.push(Equation::Pin { corner, value });
            }
            if let Some(curv) = &o.boundary_curvatures {
                let mut kappa = vec![None; complex.num_vertices()];
                for &(v, k) in curv {
                    if v.0 >= kappa.len() || !complex.vertex(v).boundary {
                        return Err(mismatch(&format!("vertex {} is not a boundary vertex", v.0)));
                    }
                    if !(k > 0.0 && k.is_finite()) {
                        return Err(mismatch("boundary curvatures must be positive"));
                    }
                    kappa[v.0] = Some(k);
                }
                for s in complex.boundary_cycle() {
                    let (u, w) = complex.side_vertices(s);
                    let (ku, kw) = match (kappa[u.0], kappa[w.0]) {
                        (Some(a), Some(b)) => (a, b),
                        _ => return Err(mismatch("a curvature is needed at every boundary vertex")),
                    };
                    equations.push(Equation::BoundaryRatio {
                        corners: [s.start(), s.end()],
                        weights: [ku, kw],
                    });
                }
            }
        }
        SurfaceKind::Sphere => {
            let d0 = o.delta0.unwrap_or(0);
            if d0 >= complex.num_faces() {
                return Err(mismatch(&format!("face {d0} does not exist")));
            }
            delta0 = Some(d0);
            let values = o.delta0_values.unwrap_or([SPHERE_PIN; 3]);
            for (i, &value) in values.iter().enumerate() {
                pinned.push(PinnedCorner {
                    corner: CornerId::new(d0, i),
                    value,
                });
            }
            equations.extend(triangle_eqs(Some(d0))?);
            match o.flavor {
                Flavor::Full => {
                    equations.extend(interior_edge_eqs(None)?);
                    equations.extend(interior_vertex_eqs(&|_| false)?);
                }
                Flavor::Reduced => {
                    let face_edges: Vec<EdgeId> = (0..3)
                        .map(|i| complex.edge_of(crate::complex::Side::new(d0, i)))
                        .collect();
                    let e = match o.e0 {
                        Some(e) if face_edges.contains(&e) => e,
                        Some(e) => {
                            return Err(invalid(format!("edge {} is not an edge of face {d0}", e.0)))
                        }
                        None => *face_edges.iter().min().expect("three edges"),
                    };
                    e0 = Some(e);
                    let face_vs = complex.face_vertices(d0);
                    equations.extend(interior_edge_eqs(Some(e))?);
                    equations.extend(interior_vertex_eqs(&|v| face_vs.contains(&v))?);
                }
            }
        }
        SurfaceKind::Torus => {
            let domain = cut_fundamental_domain(complex)?;
            let named = |name: &str| -> Result<Option<NormalCurve>, EquationError> {
                complex
                    .spec()
                    .curves
                    .get(name)
                    .map(|c| NormalCurve::from_spec(complex, c))
                    .transpose()
                    .map_err(Into::into)
            };
            let l = match (o.lambda.clone(), named("lambda")?) {
                (Some(c), _) | (None, Some(c)) => c,
                (None, None) => NormalCurve::pushoff(complex, &domain.l_loop)?,
            };
            let m = match (o.mu.clone(), named("mu")?) {
                (Some(c), _) | (None, Some(c)) => c,
                (None, None) => NormalCurve::pushoff(complex, &domain.m_loop)?,
            };
            // Coordinates of each class against the cut loops; a basis has
            // determinant ±1.
            let coords = |c: &NormalCurve| {
                [
                    c.intersection_number(complex, &domain.m_loop),
                    c.intersection_number(complex, &domain.l_loop),
                ]
            };
            let (cl, cm) = (coords(&l), coords(&m));
            if (cl[0] * cm[1] - cl[1] * cm[0]).abs() != 1 {
                return Err(mismatch("lambda and mu do not form a homology basis"));
            }
            equations.extend(triangle_eqs(None)?);
            match o.flavor {
                Flavor::Full => {
                    equations.extend(interior_edge_eqs(None)?);
                    equations.extend(interior_vertex_eqs(&|_| false)?);
                }
                Flavor::Reduced => {
                    let cut = domain.cut_edges(complex);
                    let e = match o.e0 {
                        Some(e) if cut.contains(&e) => e,
                        Some(e) => {
                            return Err(invalid(format!(
                                "edge {} is not on the fundamental domain boundary",
                                e.0
                            )))
                        }
                        None => cut[0],
                    };
                    let v = o.v0.unwrap_or(VertexId(0));
                    if v.0 >= complex.num_vertices() {
                        return Err(invalid(format!("vertex {} does not exist", v.0)));
                    }
                    e0 = Some(e);
                    v0 = Some(v);
                    equations.extend(interior_edge_eqs(Some(e))?);
                    equations.extend(interior_vertex_eqs(&|w| w == v)?);
                }
            }
            equations.push(holonomy_equation("lambda", &l)?);
            equations.push(holonomy_equation("mu", &m)?);
            lambda = Some(l);
            mu = Some(m);
        }
    }

    equations.sort_by_key(|e| e.sort_key());

    let n = complex.num_corners();
    let mut pin_value = vec![None; n];
    for p in &pinned {
        pin_value[p.corner.flat()] = Some(p.value);
    }
    let mut column = vec![None; n];
    let mut variables = Vec::new();
    for c in complex.corners() {
        if pin_value[c.flat()].is_none() {
            column[c.flat()] = Some(variables.len());
            variables.push(c);
        }
    }
    Ok(EquationSystem {
        complex: complex.clone(),
        mode: o.mode,
        flavor: o.flavor,
        variables,
        pinned,
        equations,
        column,
        pin_value,
        delta0,
        e0,
        v0,
        lambda,
        mu,
    })
}

impl EquationSystem {
    pub fn complex(&self) -> &Complex {
        &self.complex
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn variables(&self) -> &[CornerId] {
        &self.variables
    }

    pub fn pinned(&self) -> &[PinnedCorner] {
        &self.pinned
    }

    pub fn equations(&self) -> &[Equation] {
        &self.equations
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn num_equations(&self) -> usize {
        self.equations.len()
    }

    pub fn delta0(&self) -> Option<usize> {
        self.delta0
    }

    pub fn e0(&self) -> Option<EdgeId> {
        self.e0
    }

    pub fn v0(&self) -> Option<VertexId> {
        self.v0
    }

    pub fn lambda(&self) -> Option<&NormalCurve> {
        self.lambda.as_ref()
    }

    pub fn mu(&self) -> Option<&NormalCurve> {
        self.mu.as_ref()
    }

    /// Column of a variable corner, `None` for pinned corners.
    pub fn column_of(&self, c: CornerId) -> Option<usize> {
        self.column[c.flat()]
    }

    /// Number of equations of each kind, in kind order.
    pub fn counts(&self) -> Vec<(EquationKind, usize)> {
        let mut out: Vec<(EquationKind, usize)> = Vec::new();
        for eq in &self.equations {
            match out.last_mut() {
                Some((k, n)) if *k == eq.kind() => *n += 1,
                _ => out.push((eq.kind(), 1)),
            }
        }
        out
    }

    /// Values of every corner (flat order) from an assignment.
    pub fn corner_values(&self, a: &Assignment) -> Result<Vec<f64>, EquationError> {
        if a.m.len() != self.complex.num_faces() {
            return Err(EquationError::AssignmentSize {
                expected: self.complex.num_faces(),
                got: a.m.len(),
            });
        }
        self.complex
            .corners()
            .map(|c| match self.pin_value[c.flat()] {
                Some(v) => Ok(v),
                None => a.get(c).ok_or(EquationError::MissingValue(c)),
            })
            .collect()
    }

    /// Values of every corner from the variable vector.
    pub fn corner_values_from(&self, x: &[f64]) -> Vec<f64> {
        (0..self.complex.num_corners())
            .map(|i| match (self.pin_value[i], self.column[i]) {
                (Some(v), _) => v,
                (None, Some(j)) => x[j],
                (None, None) => unreachable!("corner is neither pinned nor a variable"),
            })
            .collect()
    }

    pub fn variables_of(&self, a: &Assignment) -> Result<Vec<f64>, EquationError> {
        let all = self.corner_values(a)?;
        Ok(self.variables.iter().map(|c| all[c.flat()]).collect())
    }

    pub fn assignment_from(&self, x: &[f64]) -> Assignment {
        Assignment::from_values(&self.corner_values_from(x))
    }

    fn gather(eq: &Equation, all: &[f64]) -> Vec<f64> {
        eq.corners().iter().map(|c| all[c.flat()]).collect()
    }

    pub(crate) fn residual_from_corners(&self, all: &[f64]) -> Vec<f64> {
        self.equations
            .iter()
            .map(|eq| eq.residual_at(self.mode, &Self::gather(eq, all)))
            .collect()
    }

    pub(crate) fn normalized_from_corners(&self, all: &[f64]) -> Vec<f64> {
        self.equations
            .iter()
            .map(|eq| eq.normalized_at(self.mode, &Self::gather(eq, all)))
            .collect()
    }

    pub fn residual(&self, a: &Assignment) -> Result<Vec<f64>, EquationError> {
        Ok(self.residual_from_corners(&self.corner_values(a)?))
    }

    pub fn jacobian(&self, a: &Assignment) -> Result<SparseMatrix, EquationError> {
        let all = self.corner_values(a)?;
        let mut entries = Vec::new();
        for (i, eq) in self.equations.iter().enumerate() {
            let g = eq.gradient_at(self.mode, &Self::gather(eq, &all));
            for (c, d) in eq.corners().iter().zip(g) {
                if let Some(j) = self.column[c.flat()] {
                    entries.push((i, j, d));
                }
            }
        }
        Ok(SparseMatrix {
            rows: self.equations.len(),
            cols: self.variables.len(),
            entries,
        })
    }

    /// Scaled residuals and their dense Jacobian with respect to `log m` of
    /// each variable, at the variable vector `x` (all entries positive).
    pub(crate) fn scaled(&self, x: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
        let all = self.corner_values_from(x);
        let mut r = Vec::with_capacity(self.equations.len());
        let mut jac = DMatrix::zeros(self.equations.len(), self.variables.len());
        for (i, eq) in self.equations.iter().enumerate() {
            let (ri, g) = eq.scaled_at(self.mode, &Self::gather(eq, &all));
            r.push(ri);
            for (c, d) in eq.corners().iter().zip(g) {
                if let Some(j) = self.column[c.flat()] {
                    jac[(i, j)] += d;
                }
            }
        }
        (r, jac)
    }

    pub fn export(&self) -> SystemExport {
        SystemExport {
            kind: self.complex.kind(),
            mode: self.mode,
            flavor: self.flavor,
            variables: self.variables.clone(),
            pinned: self.pinned.clone(),
            equations: self.equations.clone(),
            delta0: self.delta0,
            e0: self.e0,
            v0: self.v0,
        }
    }
}
