//! Positive solutions of equation systems by damped least squares.
//!
//! Variables are written `m = exp(u)`, so every iterate is positive, and
//! Levenberg–Marquardt steps are taken on the scaled residuals of the
//! system (see [`Equation`](crate::equations::Equation)). Stalled runs
//! restart from a perturbed initial point.

use crate::complex::{CornerId, SurfaceKind, VertexId};
use crate::equations::{
    angle_from_m, Assignment, EquationError, EquationKind, EquationSystem, Flavor,
};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("system is underdetermined: {variables} variables, {independent} independent equations")]
    Underdetermined { variables: usize, independent: usize },
    #[error("solver did not converge (residual {residual:e} after {iterations} iterations)")]
    DidNotConverge { residual: f64, iterations: usize },
    #[error("residual is not finite at the initial point")]
    NonFiniteResidual,
    #[error("initial value at corner {0} is not positive")]
    NonPositiveInitial(CornerId),
    #[error(transparent)]
    Equation(#[from] EquationError),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub enum Initialization {
    /// Every variable `√3`, i.e. every angle `π/3`.
    #[default]
    AllEquilateral,
    UserSupplied(Assignment),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveConfig {
    pub max_iterations: usize,
    /// Bound on the ∞-norm of the scaled residual.
    pub residual_tolerance: f64,
    pub step_tolerance: f64,
    pub initial_damping: f64,
    pub damping_growth: f64,
    pub damping_shrink: f64,
    pub initialization: Initialization,
    pub seed: u64,
    pub max_restarts: usize,
    /// Record one trace row per iteration.
    pub trace: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            residual_tolerance: 1e-12,
            step_tolerance: 1e-14,
            initial_damping: 1e-3,
            damping_growth: 10.0,
            damping_shrink: 0.1,
            initialization: Initialization::AllEquilateral,
            seed: 0,
            max_restarts: 8,
            trace: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub restart: usize,
    pub iteration: usize,
    pub residual: f64,
    pub damping: f64,
    /// Smallest variable value at this iterate.
    pub min_value: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BranchIndex {
    pub vertex: VertexId,
    pub beta: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveReport {
    pub assignment: Assignment,
    pub converged: bool,
    /// ∞-norm of the scaled residual.
    pub final_residual: f64,
    /// ∞-norm of the residuals as defined by the equations.
    pub raw_residual: f64,
    pub iterations: usize,
    pub rank: usize,
    pub branch_indices: Vec<BranchIndex>,
    pub restarts: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceRow>>,
}

impl SolveReport {
    pub fn ensure_converged(self) -> Result<Self, SolveError> {
        if self.converged {
            Ok(self)
        } else {
            Err(SolveError::DidNotConverge {
                residual: self.final_residual,
                iterations: self.iterations,
            })
        }
    }

    /// Iteration trace as CSV with columns iteration, residual, damping.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("iteration,residual,damping\n");
        for (n, row) in self.trace.iter().flatten().enumerate() {
            let _ = writeln!(out, "{},{:e},{:e}", n, row.residual, row.damping);
        }
        out
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, x| if x.is_nan() { f64::NAN } else { a.max(x.abs()) })
}

/// Number of singular values above `1e-8` times the largest.
pub fn numerical_rank(m: &DMatrix<f64>) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let top = sv.iter().fold(0.0f64, |a, &x| a.max(x));
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&x| x > 1e-8 * top).count()
}

/// Branch index of every interior vertex from the corner values: the
/// integer `β` with angle sum `2π(β + 1)`.
pub fn branch_indices(system: &EquationSystem, values: &[f64]) -> Vec<BranchIndex> {
    let k = system.complex();
    k.vertices()
        .filter(|(_, v)| !v.boundary)
        .map(|(id, v)| {
            let total: f64 = v.corners.iter().map(|c| angle_from_m(values[c.flat()])).sum();
            BranchIndex {
                vertex: id,
                beta: (total / (2.0 * PI)).round() as i64 - 1,
            }
        })
        .collect()
}

struct Run {
    u: Vec<f64>,
    residual: f64,
    converged: bool,
    iterations: usize,
}

/// Runs whose log-values leave `[-LOG_BOUND, LOG_BOUND]` are heading for a
/// degenerate point at infinity and are abandoned.
const LOG_BOUND: f64 = 20.0;

fn cost(r: &[f64]) -> f64 {
    r.iter().map(|x| x * x).sum::<f64>()
}

fn levenberg_marquardt(
    system: &EquationSystem,
    config: &SolveConfig,
    u0: Vec<f64>,
    restart: usize,
    trace: &mut Option<Vec<TraceRow>>,
) -> Run {
    let n = u0.len();
    let exp = |u: &[f64]| u.iter().map(|x| x.exp()).collect::<Vec<f64>>();
    let mut u = u0;
    let (mut r, mut jac) = system.scaled(&exp(&u));
    let mut lambda = config.initial_damping;
    let mut iterations = 0;
    loop {
        let norm = inf_norm(&r);
        if let Some(rows) = trace.as_mut() {
            rows.push(TraceRow {
                restart,
                iteration: iterations,
                residual: norm,
                damping: lambda,
                min_value: u.iter().fold(f64::INFINITY, |a, x| a.min(x.exp())),
            });
        }
        if norm <= config.residual_tolerance || iterations >= config.max_iterations || n == 0 {
            return Run {
                u,
                residual: norm,
                converged: norm <= config.residual_tolerance,
                iterations,
            };
        }
        iterations += 1;
        let rv = DVector::from_column_slice(&r);
        let jt = jac.transpose();
        let a = &jt * &jac;
        let g = &jt * &rv;
        let diag_max = a.diagonal().iter().fold(0.0f64, |m, x| m.max(*x));
        let floor = 1e-12 * diag_max.max(1e-300);
        let current = cost(&r);
        let mut accepted = false;
        let mut small_step = false;
        while lambda < 1e20 {
            let mut lhs = a.clone();
            for i in 0..n {
                lhs[(i, i)] += lambda * a[(i, i)].max(floor);
            }
            let step = match lhs.cholesky() {
                Some(ch) => ch.solve(&(-&g)),
                None => {
                    lambda *= config.damping_growth;
                    continue;
                }
            };
            let trial: Vec<f64> = u.iter().zip(step.iter()).map(|(x, d)| x + d).collect();
            let (rt, jt_new) = system.scaled(&exp(&trial));
            let ct = cost(&rt);
            if ct.is_finite() && ct < current {
                small_step = step.amax() < config.step_tolerance;
                u = trial;
                r = rt;
                jac = jt_new;
                lambda = (lambda * config.damping_shrink).max(1e-15);
                accepted = true;
                break;
            }
            if step.amax() < config.step_tolerance {
                small_step = true;
                break;
            }
            lambda *= config.damping_growth;
        }
        if !accepted || small_step || u.iter().any(|x| x.abs() > LOG_BOUND) {
            let norm = inf_norm(&r);
            return Run {
                u,
                residual: norm,
                converged: norm <= config.residual_tolerance,
                iterations,
            };
        }
    }
}

const POLISH_STEPS: usize = 3;

/// A few lightly damped Gauss-Newton steps past the tolerance, each kept
/// only if it lowers the cost. Omitted equations of reduced systems and
/// high-degree raw residuals benefit from the last digits.
fn polish(system: &EquationSystem, mut u: Vec<f64>) -> (Vec<f64>, f64) {
    let exp = |u: &[f64]| u.iter().map(|x| x.exp()).collect::<Vec<f64>>();
    let (mut r, mut jac) = system.scaled(&exp(&u));
    for _ in 0..POLISH_STEPS {
        let rv = DVector::from_column_slice(&r);
        let jt = jac.transpose();
        let mut a = &jt * &jac;
        let diag_max = a.diagonal().iter().fold(0.0f64, |m, x| m.max(*x));
        for i in 0..u.len() {
            a[(i, i)] += 1e-14 * diag_max.max(1e-300);
        }
        let Some(ch) = a.cholesky() else { break };
        let step = ch.solve(&(-(&jt * &rv)));
        let trial: Vec<f64> = u.iter().zip(step.iter()).map(|(x, d)| x + d).collect();
        let (rt, jt_new) = system.scaled(&exp(&trial));
        if !(cost(&rt) < cost(&r)) {
            break;
        }
        u = trial;
        r = rt;
        jac = jt_new;
    }
    let norm = inf_norm(&r);
    (u, norm)
}

/// Solve `system` for a positive assignment.
///
/// Returns `Underdetermined` when the system has fewer equations than
/// variables, or when its Jacobian at the solution found has deficient
/// column rank. A run that fails to reach the tolerance still yields a
/// report, with `converged` unset.
pub fn solve(system: &EquationSystem, config: &SolveConfig) -> Result<SolveReport, SolveError> {
    let n = system.num_variables();
    if n > system.num_equations() {
        return Err(SolveError::Underdetermined {
            variables: n,
            independent: system.num_equations(),
        });
    }
    let x0 = match &config.initialization {
        Initialization::AllEquilateral => vec![3f64.sqrt(); n],
        Initialization::UserSupplied(a) => {
            let x = system.variables_of(a)?;
            if let Some(j) = x.iter().position(|v| !(*v > 0.0)) {
                return Err(SolveError::NonPositiveInitial(system.variables()[j]));
            }
            x
        }
    };
    let u0: Vec<f64> = x0.iter().map(|x| x.ln()).collect();
    let (r0, _) = system.scaled(&x0);
    if !r0.iter().all(|x| x.is_finite()) {
        return Err(SolveError::NonFiniteResidual);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut trace = config.trace.then(Vec::new);
    let mut best = levenberg_marquardt(system, config, u0.clone(), 0, &mut trace);
    let mut total = best.iterations;
    let mut restarts = 0;
    while !best.converged && restarts < config.max_restarts {
        restarts += 1;
        let start: Vec<f64> = u0.iter().map(|x| x + rng.gen_range(-0.5..0.5)).collect();
        let run = levenberg_marquardt(system, config, start, restarts, &mut trace);
        total += run.iterations;
        if run.converged || run.residual < best.residual || best.residual.is_nan() {
            best = run;
        }
    }

    if best.converged {
        let (u, residual) = polish(system, std::mem::take(&mut best.u));
        best.u = u;
        best.residual = residual;
    }
    let x: Vec<f64> = best.u.iter().map(|v| v.exp()).collect();
    let (_, jac) = system.scaled(&x);
    let rank = numerical_rank(&jac);
    if best.converged && rank < n {
        return Err(SolveError::Underdetermined {
            variables: n,
            independent: rank,
        });
    }
    let values = system.corner_values_from(&x);
    let raw = system.residual_from_corners(&values);
    Ok(SolveReport {
        assignment: system.assignment_from(&x),
        converged: best.converged,
        final_residual: best.residual,
        raw_residual: inf_norm(&raw),
        iterations: total,
        rank,
        branch_indices: branch_indices(system, &values),
        restarts,
        trace,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    /// Residuals as defined by the equations.
    pub residuals: Vec<f64>,
    /// Residuals divided by the natural scale of each equation.
    pub normalized: Vec<f64>,
    pub max_residual: f64,
    pub max_normalized: f64,
    /// Indices of equations whose normalized residual exceeds the tolerance.
    pub violated: Vec<usize>,
    /// Variable corners whose value is not positive.
    pub nonpositive: Vec<CornerId>,
    pub branch_indices: Vec<BranchIndex>,
    pub passed: bool,
}

/// Check an assignment against a system. Pinned corners are exempt from the
/// positivity check. Equations are judged by their normalized residuals.
pub fn verify_solution(
    system: &EquationSystem,
    assignment: &Assignment,
    tol: f64,
) -> Result<VerificationReport, SolveError> {
    let values = system.corner_values(assignment)?;
    let residuals = system.residual_from_corners(&values);
    let normalized = system.normalized_from_corners(&values);
    let violated: Vec<usize> = normalized
        .iter()
        .enumerate()
        .filter(|(_, r)| !(r.abs() <= tol))
        .map(|(i, _)| i)
        .collect();
    let nonpositive: Vec<CornerId> = system
        .variables()
        .iter()
        .copied()
        .filter(|c| !(values[c.flat()] > 0.0))
        .collect();
    Ok(VerificationReport {
        max_residual: inf_norm(&residuals),
        max_normalized: inf_norm(&normalized),
        passed: violated.is_empty() && nonpositive.is_empty(),
        residuals,
        normalized,
        violated,
        nonpositive,
        branch_indices: branch_indices(system, &values),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditReport {
    pub kind: SurfaceKind,
    pub flavor: Flavor,
    pub variables: usize,
    pub equations: usize,
    pub by_kind: Vec<(EquationKind, usize)>,
    /// Variables minus equations.
    pub difference: i64,
    /// Variables minus equations, leaving out pins and boundary ratios.
    pub core_difference: i64,
    /// Value of `core_difference` predicted by the topology.
    pub expected: i64,
    pub matches: bool,
}

/// Count variables and equations and compare with the expected dimension:
/// `n - 1` for a disc with `n` boundary vertices, `0` for reduced spheres
/// and tori, `-4` and `-2` for full spheres and tori.
pub fn dimension_audit(system: &EquationSystem) -> AuditReport {
    let k = system.complex();
    let by_kind = system.counts();
    let constraints: usize = by_kind
        .iter()
        .filter(|(kind, _)| matches!(kind, EquationKind::Pin | EquationKind::BoundaryRatio))
        .map(|(_, n)| n)
        .sum();
    let vars = system.num_variables() as i64;
    let eqs = system.num_equations() as i64;
    let expected = match (k.kind(), system.flavor()) {
        (SurfaceKind::Disc, _) => k.boundary_vertices().len() as i64 - 1,
        (_, Flavor::Reduced) => 0,
        (SurfaceKind::Sphere, Flavor::Full) => -4,
        (SurfaceKind::Torus, Flavor::Full) => -2,
    };
    let core_difference = vars - (eqs - constraints as i64);
    AuditReport {
        kind: k.kind(),
        flavor: system.flavor(),
        variables: system.num_variables(),
        equations: system.num_equations(),
        by_kind,
        difference: vars - eqs,
        core_difference,
        expected,
        matches: core_difference == expected,
    }
}
