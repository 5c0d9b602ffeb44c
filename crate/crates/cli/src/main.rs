use circpack::complex::{
    build_complex, check_hypotheses, Complex, ComplexSpec, CornerId, EdgeId, NormalCurve,
    SurfaceKind, VertexId,
};
use circpack::descartes::{self, Flower};
use circpack::equations::{assemble_system, Assignment, EquationSystem, Flavor, Mode, SystemOptions};
use circpack::layout::{check_packing, m_from_curvatures, realize, render_svg, LayoutOptions, Packing};
use circpack::solver::{dimension_audit, solve, verify_solution, Initialization, SolveConfig, SolveError};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const TOL_ENV: &str = "CIRCPACK_TOL";
const DEFAULT_TOL: f64 = 1e-9;

#[derive(Parser)]
#[command(name = "circpack", version, about = "Circle packings from corner equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report surface type, counts, hypotheses and dimension audits.
    Validate {
        complex: PathBuf,
    },
    /// Write the equation system as JSON.
    Equations {
        complex: PathBuf,
        #[command(flatten)]
        system: SystemArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Solve the system and write the solve report.
    Solve {
        complex: PathBuf,
        #[command(flatten)]
        system: SystemArgs,
        /// Initial values (assignment JSON, flat list, or a solve report).
        #[arg(long)]
        assignment: Option<PathBuf>,
        /// Write the per-iteration residual trace as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Lay out a solution (solving first when no assignment is given).
    Layout {
        complex: PathBuf,
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long)]
        assignment: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long)]
        seed_face: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        /// Packing JSON; the SVG goes next to it unless --svg is given.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Re-check an assignment and/or a packing against the system.
    Verify {
        complex: PathBuf,
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long)]
        assignment: Option<PathBuf>,
        #[arg(long)]
        packing: Option<PathBuf>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Symmetric Descartes residuals of random or given flowers, as CSV.
    Descartes {
        #[arg(long, default_value_t = 6)]
        flower_n: usize,
        #[arg(long, default_value_t = 0)]
        beta: u32,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Evaluate this flower JSON instead of sampling.
        #[arg(long)]
        flower: Option<PathBuf>,
        #[arg(long)]
        tol: Option<f64>,
    },
}

#[derive(Args, Clone, Default)]
struct SystemArgs {
    /// Require a sphere.
    #[arg(long, conflicts_with_all = ["torus", "disc"])]
    sphere: bool,
    /// Require a torus.
    #[arg(long, conflicts_with = "disc")]
    torus: bool,
    /// Require a disc.
    #[arg(long)]
    disc: bool,
    /// Use the reduced system.
    #[arg(long)]
    reduced: bool,
    /// Use the angle-sum form of the vertex and holonomy equations.
    #[arg(long)]
    unbranched: bool,
    /// Sphere: face whose corners are pinned.
    #[arg(long)]
    delta0: Option<usize>,
    /// Omitted edge equation of the reduced system.
    #[arg(long)]
    e0: Option<usize>,
    /// Omitted vertex equation of the reduced torus system.
    #[arg(long)]
    v0: Option<usize>,
    /// Torus: name of the first holonomy curve in the complex file.
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    mu: Option<String>,
    /// Disc: pin a corner, FACE:INDEX=VALUE.
    #[arg(long, value_parser = parse_pin)]
    pin: Vec<(CornerId, f64)>,
    /// Disc: curvature of a boundary vertex, VERTEX=KAPPA.
    #[arg(long, value_parser = parse_ratio)]
    ratio: Vec<(VertexId, f64)>,
}

fn parse_pin(s: &str) -> Result<(CornerId, f64), String> {
    let (corner, value) = s.split_once('=').ok_or("expected FACE:INDEX=VALUE")?;
    let (f, i) = corner.split_once(':').ok_or("expected FACE:INDEX=VALUE")?;
    let f: usize = f.trim().parse().map_err(|e| format!("face: {e}"))?;
    let i: usize = i.trim().parse().map_err(|e| format!("index: {e}"))?;
    if i > 2 {
        return Err(format!("corner index {i} out of range"));
    }
    let v: f64 = value.trim().parse().map_err(|e| format!("value: {e}"))?;
    Ok((CornerId::new(f, i), v))
}

fn parse_ratio(s: &str) -> Result<(VertexId, f64), String> {
    let (v, k) = s.split_once('=').ok_or("expected VERTEX=KAPPA")?;
    let v: usize = v.trim().parse().map_err(|e| format!("vertex: {e}"))?;
    let k: f64 = k.trim().parse().map_err(|e| format!("curvature: {e}"))?;
    Ok((VertexId(v), k))
}

/// Failure with its exit status.
#[derive(Debug)]
struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
    detail: Option<Value>,
}

impl Failure {
    fn usage(message: impl ToString) -> Self {
        Self {
            code: 2,
            kind: "usage",
            message: message.to_string(),
            detail: None,
        }
    }

    fn verification(message: impl ToString) -> Self {
        Self {
            code: 1,
            kind: "verification",
            message: message.to_string(),
            detail: None,
        }
    }
}

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::Equation(e) => Failure::usage(e),
            SolveError::NonPositiveInitial(_) | SolveError::NonFiniteResidual => Failure::usage(e),
            SolveError::Underdetermined { .. } | SolveError::DidNotConverge { .. } => Failure {
                code: 3,
                kind: "convergence",
                message: e.to_string(),
                detail: None,
            },
        }
    }
}

type Outcome = Result<(), Failure>;

fn tolerance(flag: Option<f64>) -> Result<f64, Failure> {
    if let Some(t) = flag {
        return Ok(t);
    }
    match std::env::var(TOL_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|e| Failure::usage(format!("{TOL_ENV}={s:?}: {e}"))),
        Err(_) => Ok(DEFAULT_TOL),
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

/// Shortest round-trip decimal, as in the JSON outputs.
fn num(x: f64) -> String {
    serde_json::to_string(&x).expect("serializable")
}

fn emit(text: &str, path: Option<&Path>) -> Outcome {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::usage(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_complex(path: &Path) -> Result<Complex, Failure> {
    let spec: ComplexSpec = read_json(path)?;
    build_complex(spec).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum AssignmentFile {
    Flat(Vec<f64>),
    Direct(Assignment),
    Report { assignment: Assignment },
}

fn load_assignment(path: &Path, complex: &Complex) -> Result<Assignment, Failure> {
    let a = match read_json::<AssignmentFile>(path)? {
        AssignmentFile::Flat(v) => {
            if v.len() != complex.num_corners() {
                return Err(Failure::usage(format!(
                    "{}: expected {} values, got {}",
                    path.display(),
                    complex.num_corners(),
                    v.len()
                )));
            }
            Assignment::from_values(&v)
        }
        AssignmentFile::Direct(a) | AssignmentFile::Report { assignment: a } => a,
    };
    Ok(a)
}

fn named_curve(complex: &Complex, name: &Option<String>) -> Result<Option<NormalCurve>, Failure> {
    let Some(name) = name else { return Ok(None) };
    let spec = complex
        .spec()
        .curves
        .get(name)
        .ok_or_else(|| Failure::usage(format!("no curve named {name:?}")))?;
    NormalCurve::from_spec(complex, spec)
        .map(Some)
        .map_err(|e| Failure::usage(format!("curve {name:?}: {e}")))
}

fn build_system(complex: &Complex, args: &SystemArgs) -> Result<EquationSystem, Failure> {
    let required = [
        (args.sphere, SurfaceKind::Sphere),
        (args.torus, SurfaceKind::Torus),
        (args.disc, SurfaceKind::Disc),
    ];
    for (flag, kind) in required {
        if flag && complex.kind() != kind {
            return Err(Failure::usage(format!(
                "expected a {kind}, the complex is a {}",
                complex.kind()
            )));
        }
    }
    let options = SystemOptions {
        mode: if args.unbranched { Mode::Unbranched } else { Mode::Branched },
        flavor: if args.reduced { Flavor::Reduced } else { Flavor::Full },
        delta0: args.delta0,
        e0: args.e0.map(EdgeId),
        v0: args.v0.map(VertexId),
        lambda: named_curve(complex, &args.lambda)?,
        mu: named_curve(complex, &args.mu)?,
        pins: args.pin.clone(),
        boundary_curvatures: (!args.ratio.is_empty()).then(|| args.ratio.clone()),
        ..SystemOptions::default()
    };
    assemble_system(complex, &options).map_err(Failure::usage)
}

fn validate(path: &Path) -> Outcome {
    let complex = load_complex(path)?;
    let hypotheses = check_hypotheses(&complex);
    let flavors: &[Flavor] = match complex.kind() {
        SurfaceKind::Disc => &[Flavor::Full],
        _ => &[Flavor::Full, Flavor::Reduced],
    };
    let audits: Vec<Value> = flavors
        .iter()
        .map(|&flavor| {
            let options = SystemOptions {
                flavor,
                ..SystemOptions::default()
            };
            match assemble_system(&complex, &options) {
                Ok(system) => serde_json::to_value(dimension_audit(&system)).expect("serializable"),
                Err(e) => json!({ "flavor": flavor, "error": e.to_string() }),
            }
        })
        .collect();
    let passed = hypotheses.passed;
    let report = json!({
        "kind": complex.kind(),
        "faces": complex.num_faces(),
        "corners": complex.num_corners(),
        "vertices": complex.num_vertices(),
        "edges": complex.num_edges(),
        "euler_characteristic": complex.euler_characteristic(),
        "boundary_vertices": complex.boundary_vertices().len(),
        "hypotheses": hypotheses,
        "audits": audits,
    });
    emit(&to_json(&report), None)?;
    if passed {
        Ok(())
    } else {
        Err(Failure::verification("combinatorial hypotheses fail"))
    }
}

fn run_solve(
    system: &EquationSystem,
    init: Option<Assignment>,
    seed: u64,
    trace: bool,
) -> Result<circpack::solver::SolveReport, Failure> {
    let config = SolveConfig {
        initialization: init.map_or(Initialization::AllEquilateral, Initialization::UserSupplied),
        seed,
        trace,
        ..SolveConfig::default()
    };
    Ok(solve(system, &config)?)
}

fn svg_path(output: Option<&Path>, svg: Option<PathBuf>) -> Option<PathBuf> {
    svg.or_else(|| output.map(|p| p.with_extension("svg")))
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Validate { complex } => validate(&complex),
        Command::Equations {
            complex,
            system,
            output,
        } => {
            let k = load_complex(&complex)?;
            let s = build_system(&k, &system)?;
            emit(&to_json(&s.export()), output.as_deref())
        }
        Command::Solve {
            complex,
            system,
            assignment,
            trace,
            seed,
            output,
        } => {
            let k = load_complex(&complex)?;
            let s = build_system(&k, &system)?;
            let init = assignment.map(|p| load_assignment(&p, &k)).transpose()?;
            let report = run_solve(&s, init, seed, trace.is_some())?;
            if let Some(p) = &trace {
                emit(&report.trace_csv(), Some(p))?;
            }
            emit(&to_json(&report), output.as_deref())?;
            if report.converged {
                Ok(())
            } else {
                Err(SolveError::DidNotConverge {
                    residual: report.final_residual,
                    iterations: report.iterations,
                }
                .into())
            }
        }
        Command::Layout {
            complex,
            system,
            assignment,
            scale,
            seed_face,
            tol,
            output,
            svg,
        } => {
            let tol = tolerance(tol)?;
            let k = load_complex(&complex)?;
            let s = build_system(&k, &system)?;
            let a = match assignment {
                Some(p) => load_assignment(&p, &k)?,
                None => {
                    let report = run_solve(&s, None, 0, false)?;
                    report.ensure_converged().map_err(Failure::from)?.assignment
                }
            };
            let options = LayoutOptions {
                scale,
                seed_face,
                tolerance: tol,
                residual_tolerance: tol,
                ..LayoutOptions::default()
            };
            let packing = realize(&s, &a, &options).map_err(Failure::verification)?;
            if let Some(p) = svg_path(output.as_deref(), svg) {
                emit(&render_svg(&packing), Some(&p))?;
            }
            emit(&to_json(&packing), output.as_deref())?;
            if packing.certification.passed {
                Ok(())
            } else {
                Err(Failure::verification("packing fails certification"))
            }
        }
        Command::Verify {
            complex,
            system,
            assignment,
            packing,
            tol,
        } => {
            if assignment.is_none() && packing.is_none() {
                return Err(Failure::usage("verify needs --assignment and/or --packing"));
            }
            let tol = tolerance(tol)?;
            let k = load_complex(&complex)?;
            let s = build_system(&k, &system)?;
            let mut report = serde_json::Map::new();
            let mut passed = true;
            if let Some(p) = assignment {
                let a = load_assignment(&p, &k)?;
                let v = verify_solution(&s, &a, tol)?;
                passed &= v.passed;
                report.insert("assignment".into(), serde_json::to_value(&v).expect("serializable"));
            }
            if let Some(p) = packing {
                let packing: Packing = read_json(&p)?;
                if packing.circles.len() != k.num_vertices() {
                    return Err(Failure::usage(format!(
                        "{}: {} circles for {} vertices",
                        p.display(),
                        packing.circles.len(),
                        k.num_vertices()
                    )));
                }
                let certification = check_packing(&packing, tol);
                let recovered = m_from_curvatures(&k, &packing.curvatures());
                let v = verify_solution(&s, &recovered, tol)?;
                passed &= certification.passed && v.passed;
                report.insert(
                    "packing".into(),
                    json!({ "certification": certification, "recovered": v }),
                );
            }
            report.insert("passed".into(), Value::Bool(passed));
            emit(&to_json(&report), None)?;
            if passed {
                Ok(())
            } else {
                Err(Failure::verification("verification failed"))
            }
        }
        Command::Descartes {
            flower_n,
            beta,
            count,
            seed,
            flower,
            tol,
        } => {
            let tol = tolerance(tol)?;
            let flowers: Vec<(String, Flower)> = match flower {
                Some(p) => vec![("".into(), read_json(&p)?)],
                None => (0..count as u64)
                    .map(|i| {
                        let s = seed + i;
                        descartes::random_flower(flower_n, beta, s)
                            .map(|f| (s.to_string(), f))
                            .map_err(|e| Failure {
                                code: 3,
                                kind: "convergence",
                                message: e.to_string(),
                                detail: Some(json!({ "seed": s })),
                            })
                    })
                    .collect::<Result<_, _>>()?,
            };
            let mut out = String::from("seed,n,angle_sum,branch_index,residual,normalized_residual\n");
            let mut passed = true;
            for (s, f) in &flowers {
                let ms = descartes::m_from_flower(f).map_err(Failure::usage)?;
                let r = descartes::symmetric_descartes_residual(&ms);
                let nr = descartes::normalized_descartes_residual(&ms);
                passed &= nr.abs() < tol;
                let angle = f.angle_sum().map_err(Failure::usage)?;
                let beta = f.branch_index().map_err(Failure::usage)?;
                let _ = writeln!(
                    out,
                    "{s},{},{},{beta},{},{}",
                    f.petals.len(),
                    num(angle),
                    num(r),
                    num(nr)
                );
            }
            emit(&out, None)?;
            if passed {
                Ok(())
            } else {
                Err(Failure::verification("normalized residual above tolerance"))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                e.exit();
            }
            eprintln!("{}", json!({ "error": "usage", "message": e.to_string().trim_end() }));
            return ExitCode::from(2);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let mut err = json!({ "error": f.kind, "message": f.message });
            if let Some(d) = f.detail {
                err["detail"] = d;
            }
            eprintln!("{err}");
            ExitCode::from(f.code)
        }
    }
}
