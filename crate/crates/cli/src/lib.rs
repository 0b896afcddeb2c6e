//! Command-line front end. [`run`] parses an argument vector, executes one command and
//! returns the exit status together with the text destined for stdout, so that tests can
//! drive the tool in-process.

pub mod json;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use geocut::lens::{covering_degree, verify_emptiness, verify_trig_inequality, BoundaryStratum};
use geocut::oracle::{brute_force_minimizers, compare_with_closed_form};
use geocut::planner::{
    build_decomposition, continuity_probe, frontier_clearance, gc_ledger, piece_is_empty, plan_with, random_pair, sample_in_piece,
    velocity_of, PieceKind, DEFAULT_PATH_SAMPLES, PROBE_CLEARANCE,
};
use geocut::sampling::stratum_pair;
use geocut::symdecomp::{builtin_example, gc_upper_bound_fibered, gc_upper_bound_symmetric};
use geocut::tol::{LAND_TOL, ORACLE_GRID, TIE_TOL};
use geocut::{Error, ManifoldPoint, ModelManifold, StratumTag, TangentAtPoint, Tolerances};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Map, Value};
use std::collections::BTreeMap;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

const DEFAULT_VERIFY_SAMPLES: usize = 10_000;
const DEFAULT_DECOMPOSE_SAMPLES: usize = 100;
const PROBE_RADIUS: f64 = 1e-3;
const PROBE_LIMIT: f64 = 1e-2;
const PROBE_SAMPLES: usize = 50;

#[derive(Debug, Parser)]
#[command(name = "geocut", version, about = "Cut loci, minimal geodesics and geodesic motion planners")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Seed for every sampled quantity.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Absolute tolerance for distance ties.
    #[arg(long, global = true)]
    tie_tol: Option<f64>,
    /// Landing tolerance of the shooting oracle.
    #[arg(long, global = true)]
    land_tol: Option<f64>,
    /// Sample count (path points for plan, points for verify-lens, pairs per piece for decompose).
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Write the JSON document here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Write the sampled path of a plan as CSV, one point per row.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PairArgs {
    /// Manifold: s<n>, cp<n>, hp<n> or lens<p>.
    spec: String,
    /// Ambient lift of the first point, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    from: String,
    /// Ambient lift of the second point, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    to: String,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Motion plan between two points.
    Plan(PairArgs),
    /// Cut stratum of a pair.
    Classify(PairArgs),
    /// Every minimizing geodesic between two points.
    Geodesics(PairArgs),
    /// Cut time of the geodesic with a given initial direction.
    CutTime {
        spec: String,
        #[arg(long, allow_hyphen_values = true)]
        at: String,
        #[arg(long, allow_hyphen_values = true)]
        velocity: String,
    },
    /// Fundamental-domain checks for L(p;1).
    VerifyLens {
        p: u32,
        /// Largest p in the trigonometric inequality scan.
        #[arg(long, default_value_t = 500)]
        trig_max: u32,
    },
    /// Geodesic-complexity bound arithmetic.
    Bounds {
        /// gr2c4, cpn(n) or hpn(n).
        #[arg(long, conflicts_with_all = ["input", "json"])]
        builtin: Option<String>,
        /// JSON file with {rank, groups} or {secat} or {builtin}.
        #[arg(long, conflicts_with = "json")]
        input: Option<PathBuf>,
        /// The same JSON description given inline.
        #[arg(long)]
        json: Option<String>,
    },
    /// Brute-force shooting enumeration compared with the closed form.
    Oracle {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = ORACLE_GRID)]
        grid: usize,
    },
    /// Decomposition of M x M into planner pieces, with sampled validation.
    Decompose { spec: String },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Plan(_) => "plan",
            Command::Classify(_) => "classify",
            Command::Geodesics(_) => "geodesics",
            Command::CutTime { .. } => "cut-time",
            Command::VerifyLens { .. } => "verify-lens",
            Command::Bounds { .. } => "bounds",
            Command::Oracle { .. } => "oracle",
            Command::Decompose { .. } => "decompose",
        }
    }

    fn spec(&self) -> Option<String> {
        match self {
            Command::Plan(a) | Command::Classify(a) | Command::Geodesics(a) => Some(a.spec.clone()),
            Command::Oracle { pair, .. } => Some(pair.spec.clone()),
            Command::CutTime { spec, .. } | Command::Decompose { spec } => Some(spec.clone()),
            Command::VerifyLens { p, .. } => Some(format!("lens{p}")),
            Command::Bounds { .. } => None,
        }
    }

    fn default_samples(&self) -> Option<usize> {
        match self {
            Command::Plan(_) => Some(DEFAULT_PATH_SAMPLES),
            Command::VerifyLens { .. } => Some(DEFAULT_VERIFY_SAMPLES),
            Command::Decompose { .. } => Some(DEFAULT_DECOMPOSE_SAMPLES),
            _ => None,
        }
    }
}

/// The effective configuration, echoed in every document.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub manifold: Option<String>,
    pub seed: u64,
    pub tie_tol: f64,
    pub land_tol: f64,
    pub samples: Option<usize>,
    pub output: Option<String>,
    pub csv: Option<String>,
}

impl RunConfig {
    fn tolerances(&self) -> Tolerances {
        Tolerances { tie_tol: self.tie_tol, land_tol: self.land_tol }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub status: i32,
    pub stdout: String,
}

#[derive(Debug)]
struct Failure {
    status: i32,
    kind: String,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { status: EXIT_USAGE, kind: "usage".into(), message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::NonUnit { .. }
            | Error::NonTangent { .. }
            | Error::NonHorizontal { .. }
            | Error::DimensionMismatch { .. }
            | Error::OutsideHalfSpace { .. }
            | Error::ManifoldMismatch { .. }
            | Error::IndexOutOfRange { .. }
            | Error::SingularIndex { .. }
            | Error::InvalidStratum { .. }
            | Error::Unsupported(_)
            | Error::EmptyInput
            | Error::MissingCardinality(_)
            | Error::NonPositiveBound
            | Error::DegenerateRootData(_)
            | Error::UnknownExample(_)
            | Error::BadManifoldSpec(_)
            | Error::InvalidInput(_) => EXIT_USAGE,
            _ => EXIT_FAILED,
        };
        Self { status, kind: error_kind(&e).into(), message: e.to_string() }
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::NonUnit { .. } => "non_unit",
        Error::NonTangent { .. } => "non_tangent",
        Error::NonHorizontal { .. } => "non_horizontal",
        Error::DimensionMismatch { .. } => "dimension_mismatch",
        Error::OutsideHalfSpace { .. } => "outside_half_space",
        Error::ManifoldMismatch { .. } => "manifold_mismatch",
        Error::AmbiguousNearCut { .. } => "ambiguous_near_cut",
        Error::NonAdjacentTie { .. } => "non_adjacent_tie",
        Error::UnexpectedTieMultiplicity { .. } => "unexpected_tie_multiplicity",
        Error::NotUnitary { .. } => "not_unitary",
        Error::IsometryMismatch { .. } => "isometry_mismatch",
        Error::IndexOutOfRange { .. } => "index_out_of_range",
        Error::SingularIndex { .. } => "singular_index",
        Error::InvalidStratum { .. } => "invalid_stratum",
        Error::LemmaViolation { .. } => "lemma_violation",
        Error::InequalityViolation { .. } => "inequality_violation",
        Error::Unsupported(_) => "unsupported",
        Error::NoPiece => "no_piece",
        Error::OverlappingPieces { .. } => "overlapping_pieces",
        Error::EmptyInput => "empty_input",
        Error::MissingCardinality(_) => "missing_cardinality",
        Error::NonPositiveBound => "non_positive_bound",
        Error::DegenerateRootData(_) => "degenerate_root_data",
        Error::UnknownExample(_) => "unknown_example",
        Error::GridTooCoarse { .. } => "grid_too_coarse",
        Error::BadManifoldSpec(_) => "bad_manifold_spec",
        Error::InvalidInput(_) => "invalid_input",
    }
}

/// Runs one command. `argv[0]` is the program name.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let status = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            if status == EXIT_OK {
                return Outcome { status, stdout: e.to_string() };
            }
            let doc = json!({
                "config": Value::Null,
                "error": {"kind": "usage", "message": e.to_string()},
            });
            return Outcome { status, stdout: json::to_string(&doc) + "\n" };
        }
    };
    let config = RunConfig {
        command: cli.command.name().into(),
        manifold: cli.command.spec(),
        seed: cli.global.seed,
        tie_tol: cli.global.tie_tol.unwrap_or(TIE_TOL),
        land_tol: cli.global.land_tol.unwrap_or(LAND_TOL),
        samples: cli.global.samples.or(cli.command.default_samples()),
        output: cli.global.output.as_ref().map(|p| p.display().to_string()),
        csv: cli.global.csv.as_ref().map(|p| p.display().to_string()),
    };
    let (status, body) = match execute(&cli, &config) {
        Ok((passed, body)) => (if passed { EXIT_OK } else { EXIT_FAILED }, body),
        Err(f) => {
            let mut body = Map::new();
            body.insert("error".into(), json!({"kind": f.kind, "message": f.message}));
            (f.status, body)
        }
    };
    let mut doc = Map::new();
    doc.insert("config".into(), serde_json::to_value(&config).expect("config serializes"));
    doc.extend(body);
    let text = json::to_string(&Value::Object(doc)) + "\n";
    match &cli.global.output {
        Some(path) => match std::fs::write(path, &text) {
            Ok(()) => Outcome { status, stdout: String::new() },
            Err(e) => {
                let doc = json!({
                    "config": config,
                    "error": {"kind": "io", "message": format!("cannot write {}: {e}", path.display())},
                });
                Outcome { status: EXIT_FAILED, stdout: json::to_string(&doc) + "\n" }
            }
        },
        None => Outcome { status, stdout: text },
    }
}

type Body = Map<String, Value>;

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("core types serialize")
}

fn execute(cli: &Cli, config: &RunConfig) -> Result<(bool, Body), Failure> {
    if cli.global.csv.is_some() && !matches!(cli.command, Command::Plan(_)) {
        return Err(Failure::usage("--csv applies to the plan command only"));
    }
    if !(config.tie_tol > 0.0) || !(config.land_tol > 0.0) {
        return Err(Failure::usage("tolerances must be positive"));
    }
    let tol = config.tolerances();
    match &cli.command {
        Command::Plan(a) => cmd_plan(a, config, &tol, cli.global.csv.as_deref()),
        Command::Classify(a) => {
            let (m, x, y) = pair(a)?;
            let label = m.classify_pair_with(&x, &y, &tol)?;
            let mut b = pair_body(&m, &x, &y)?;
            b.insert("stratum".into(), to_value(&label));
            Ok((true, b))
        }
        Command::Geodesics(a) => {
            let (m, x, y) = pair(a)?;
            let e = m.minimal_geodesics_with(&x, &y, &tol)?;
            let mut b = pair_body(&m, &x, &y)?;
            // A positive-dimensional family has no finite count.
            let count = if e.family.is_some() { Value::Null } else { json!(e.count()) };
            b.insert("count".into(), count);
            b.insert("geodesics".into(), to_value(&e));
            Ok((true, b))
        }
        Command::CutTime { spec, at, velocity } => {
            let m = manifold(spec)?;
            let x = point(&m, at)?;
            let raw = coords(velocity)?;
            if raw.len() != m.ambient_dim() {
                return Err(Error::DimensionMismatch { expected: m.ambient_dim(), got: raw.len() }.into());
            }
            let v = horizontal_unit(&m, &x, &raw)?;
            let t = m.tangent_cut_time(&x, &v)?;
            let mut b = Body::new();
            b.insert("manifold".into(), json!(m.to_string()));
            b.insert("x".into(), json!(x.coords()));
            b.insert("velocity".into(), json!(v.vec));
            b.insert("cut_time".into(), json!(t));
            Ok((true, b))
        }
        Command::VerifyLens { p, trig_max } => cmd_verify_lens(*p, *trig_max, config, &tol),
        Command::Bounds { builtin, input, json: inline } => cmd_bounds(builtin.as_deref(), input.as_deref(), inline.as_deref()),
        Command::Oracle { pair: a, grid } => {
            let (m, x, y) = pair(a)?;
            let report = brute_force_minimizers(&m, &x, &y, *grid, config.land_tol)?;
            let cmp = compare_with_closed_form(&m, &x, &y, &report)?;
            let mut b = pair_body(&m, &x, &y)?;
            b.insert("report".into(), to_value(&report));
            b.insert("comparison".into(), to_value(&cmp));
            b.insert("passed".into(), json!(cmp.count_match));
            Ok((cmp.count_match, b))
        }
        Command::Decompose { spec } => cmd_decompose(spec, config, &tol),
    }
}

fn manifold(spec: &str) -> Result<ModelManifold, Failure> {
    Ok(spec.parse::<ModelManifold>()?)
}

fn coords(text: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .map(|s| {
            let s = s.trim();
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Failure::usage(format!("cannot read coordinate {s:?} in {text:?}")))
        })
        .collect()
}

/// The point with the given ambient coordinates, normalized and stored by its canonical lift.
fn point(m: &ModelManifold, text: &str) -> Result<ManifoldPoint, Failure> {
    let raw = m.point_normalized(coords(text)?)?;
    Ok(ManifoldPoint { manifold: *m, lift: raw.canonical_lift() })
}

fn pair(a: &PairArgs) -> Result<(ModelManifold, ManifoldPoint, ManifoldPoint), Failure> {
    let m = manifold(&a.spec)?;
    Ok((m, point(&m, &a.from)?, point(&m, &a.to)?))
}

fn pair_body(m: &ModelManifold, x: &ManifoldPoint, y: &ManifoldPoint) -> Result<Body, Failure> {
    let mut b = Body::new();
    b.insert("manifold".into(), json!(m.to_string()));
    b.insert("x".into(), json!(x.coords()));
    b.insert("y".into(), json!(y.coords()));
    b.insert("distance".into(), json!(m.distance(x, y)?));
    Ok(b)
}

/// Projects `raw` onto the horizontal space at the lift of `x` and normalizes.
fn horizontal_unit(m: &ModelManifold, x: &ManifoldPoint, raw: &[f64]) -> Result<TangentAtPoint, Failure> {
    let mut v = raw.to_vec();
    let mut against = vec![x.coords().to_vec()];
    against.extend(m.vertical_basis(x.coords()));
    for _ in 0..2 {
        for b in &against {
            let nb: f64 = b.iter().map(|c| c * c).sum();
            let c: f64 = b.iter().zip(&v).map(|(p, q)| p * q).sum::<f64>() / nb;
            v.iter_mut().zip(b).for_each(|(vi, bi)| *vi -= c * bi);
        }
    }
    let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    if n < 1e-12 {
        return Err(Failure::usage("velocity has no horizontal component at the given point"));
    }
    Ok(TangentAtPoint { base: x.lift.clone(), vec: v.iter().map(|c| c / n).collect() })
}

fn cmd_plan(a: &PairArgs, config: &RunConfig, tol: &Tolerances, csv: Option<&Path>) -> Result<(bool, Body), Failure> {
    let (m, x, y) = pair(a)?;
    let d = build_decomposition(&m)?;
    let samples = config.samples.unwrap_or(DEFAULT_PATH_SAMPLES);
    let plan = plan_with(&d, &x, &y, samples, tol)?;
    let label = m.classify_pair_with(&x, &y, tol)?;
    if let Some(path) = csv {
        write_csv(path, &plan.samples).map_err(|e| Failure {
            status: EXIT_FAILED,
            kind: "io".into(),
            message: format!("cannot write {}: {e}", path.display()),
        })?;
    }
    let piece = d.piece(plan.piece_id)?;
    let mut b = pair_body(&m, &x, &y)?;
    b.insert("stratum".into(), to_value(&label));
    b.insert("piece_id".into(), json!(plan.piece_id));
    b.insert("piece".into(), to_value(piece));
    b.insert("length".into(), json!(plan.segment.length));
    b.insert("start_lift".into(), json!(plan.segment.start.coords()));
    b.insert("initial_velocity".into(), json!(plan.segment.initial_velocity.vec));
    b.insert("velocity".into(), json!(velocity_of(&plan).vec));
    b.insert("samples".into(), json!(plan.samples.iter().map(|s| s.coords().to_vec()).collect::<Vec<_>>()));
    Ok((true, b))
}

fn write_csv(path: &Path, samples: &[ManifoldPoint]) -> Result<(), Box<dyn std::error::Error>> {
    let mut w = csv::Writer::from_path(path)?;
    let dim = samples.first().map_or(0, |s| s.coords().len());
    let mut header = vec!["index".to_string()];
    header.extend((0..dim).map(|i| format!("c{i}")));
    w.write_record(&header)?;
    for (i, s) in samples.iter().enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(s.coords().iter().map(|c| json::format_f64(*c)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_verify_lens(p: u32, trig_max: u32, config: &RunConfig, tol: &Tolerances) -> Result<(bool, Body), Failure> {
    let m = ModelManifold::lens(p)?;
    let samples = config.samples.unwrap_or(DEFAULT_VERIFY_SAMPLES);
    let mut b = Body::new();
    b.insert("p".into(), json!(p));
    let mut passed = true;

    let mut violations = 0usize;
    match verify_emptiness(p, samples, config.seed) {
        Ok(r) => {
            violations += r.violations;
            passed &= r.violations == 0 && (samples < 10_000 || r.stratum_hits.len() == 3);
            b.insert("emptiness".into(), to_value(&r));
        }
        Err(Error::LemmaViolation { point, indices }) => {
            violations += 1;
            passed = false;
            b.insert("emptiness".into(), json!({"violation": {"point": point, "indices": indices}}));
        }
        Err(e) => return Err(e.into()),
    }
    b.insert("violations".into(), json!(violations));

    match verify_trig_inequality(trig_max.max(3)) {
        Ok(r) => {
            b.insert("trig_min_margin".into(), json!(r.min_margin));
            b.insert("trig".into(), to_value(&r));
        }
        Err(Error::InequalityViolation { p, m, margin }) => {
            passed = false;
            b.insert("trig_min_margin".into(), json!(margin));
            b.insert("trig".into(), json!({"violation": {"p": p, "m": m, "margin": margin}}));
        }
        Err(e) => return Err(e.into()),
    }

    let c1 = covering_degree(p, BoundaryStratum::FaceFirst);
    let circle = covering_degree(p, BoundaryStratum::Circle);
    b.insert("covering".into(), json!({"C1": c1, "Cp-1": circle}));

    // Constructed pairs on each stratum must carry exactly as many minimizers as the
    // covering degree, with adjacent ties on the two-geodesic stratum.
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(1);
    let mut consistency = BTreeMap::new();
    for (tag, expected, name) in [(StratumTag::LensC1, c1, "C1"), (StratumTag::LensCpMinus1, circle, "Cp-1")] {
        let mut mismatches = 0usize;
        let mut first_mismatch: Option<Value> = None;
        for _ in 0..samples {
            let (x, y) = stratum_pair(&m, tag, &mut rng)?;
            let ok = match (m.classify_pair_with(&x, &y, tol), m.minimal_geodesics_with(&x, &y, tol)) {
                (Ok(l), Ok(e)) => {
                    let adjacent = tag != StratumTag::LensC1
                        || (l.tie_indices.len() == 2 && {
                            let (i, j) = (l.tie_indices[0], l.tie_indices[1]);
                            (j + p - i) % p == 1 || (i + p - j) % p == 1
                        });
                    l.tag == tag && e.count() == expected as usize && adjacent
                }
                _ => false,
            };
            if !ok {
                mismatches += 1;
                first_mismatch.get_or_insert_with(|| json!({"x": x.coords(), "y": y.coords()}));
            }
        }
        passed &= mismatches == 0;
        consistency.insert(name, json!({"samples": samples, "mismatches": mismatches, "first_mismatch": first_mismatch}));
    }
    b.insert("consistency".into(), to_value(&consistency));
    b.insert("passed".into(), json!(passed));
    Ok((passed, b))
}

fn cmd_bounds(builtin: Option<&str>, input: Option<&Path>, inline: Option<&str>) -> Result<(bool, Body), Failure> {
    let description: Value = match (builtin, input, inline) {
        (Some(name), _, _) => json!({"builtin": name}),
        (None, Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| Failure::usage(format!("invalid JSON in {}: {e}", path.display())))?
        }
        (None, None, Some(text)) => {
            serde_json::from_str(text).map_err(|e| Failure::usage(format!("invalid JSON: {e}")))?
        }
        (None, None, None) => return Err(Failure::usage("bounds needs --builtin, --input or --json")),
    };
    let obj = description.as_object().ok_or_else(|| Failure::usage("bounds description must be a JSON object"))?;
    let mut b = Body::new();
    if let Some(name) = obj.get("builtin") {
        let name = name.as_str().ok_or_else(|| Failure::usage("builtin must be a string"))?;
        let ex = builtin_example(name)?;
        let passed = ex.bound.result == ex.expected;
        b.insert("kind".into(), json!("symmetric"));
        b.insert("builtin".into(), json!(ex.name));
        b.insert("result".into(), json!(ex.bound.result));
        b.insert("trace".into(), trace(ex.bound.maxima.iter().map(|m| m.1)));
        b.insert("maxima".into(), to_value(&ex.bound.maxima));
        b.insert("groups".into(), to_value(&ex.groups));
        b.insert("pieces".into(), to_value(&ex.pieces));
        b.insert("manifold_dim".into(), json!(ex.manifold_dim));
        b.insert("expected".into(), json!(ex.expected));
        b.insert("passed".into(), json!(passed));
        return Ok((passed, b));
    }
    if let Some(list) = obj.get("secat") {
        let bounds: Vec<usize> = serde_json::from_value(list.clone())
            .map_err(|e| Failure::usage(format!("secat must be a list of nonnegative integers: {e}")))?;
        let result = gc_upper_bound_fibered(&bounds)?;
        b.insert("kind".into(), json!("fibered"));
        b.insert("result".into(), json!(result));
        b.insert("trace".into(), trace(bounds.iter().copied()));
        b.insert("passed".into(), json!(true));
        return Ok((true, b));
    }
    let groups = obj.get("groups").ok_or_else(|| Failure::usage("bounds description needs groups, secat or builtin"))?;
    let raw: BTreeMap<String, Vec<usize>> = serde_json::from_value(groups.clone())
        .map_err(|e| Failure::usage(format!("groups must map cardinalities to integer lists: {e}")))?;
    let mut parsed = BTreeMap::new();
    for (k, v) in raw {
        let i: usize = k.trim().parse().map_err(|_| Failure::usage(format!("group key {k:?} is not an integer")))?;
        parsed.insert(i, v);
    }
    if let Some(rank) = obj.get("rank") {
        let rank = rank.as_u64().ok_or_else(|| Failure::usage("rank must be a positive integer"))? as usize;
        if let Some(i) = (1..=rank).find(|i| !parsed.contains_key(i)) {
            return Err(Error::MissingCardinality(i).into());
        }
        if parsed.keys().any(|&k| k > rank) {
            return Err(Failure::usage(format!("group keys exceed rank {rank}")));
        }
    }
    let bound = gc_upper_bound_symmetric(&parsed)?;
    b.insert("kind".into(), json!("symmetric"));
    b.insert("result".into(), json!(bound.result));
    b.insert("trace".into(), trace(bound.maxima.iter().map(|m| m.1)));
    b.insert("maxima".into(), to_value(&bound.maxima));
    b.insert("passed".into(), json!(true));
    Ok((true, b))
}

/// The summands followed by the final `"+1"`.
fn trace(terms: impl Iterator<Item = usize>) -> Value {
    let mut t: Vec<Value> = terms.map(|v| json!(v)).collect();
    t.push(json!("+1"));
    Value::Array(t)
}

fn cmd_decompose(spec: &str, config: &RunConfig, tol: &Tolerances) -> Result<(bool, Body), Failure> {
    let m = manifold(spec)?;
    let d = build_decomposition(&m)?;
    let ledger = gc_ledger(&m)?;
    let samples = config.samples.unwrap_or(DEFAULT_DECOMPOSE_SAMPLES);
    let mut passed = true;
    let mut validation = Vec::new();
    for piece in &d.pieces {
        if piece_is_empty(&m, piece.kind) {
            validation.push(json!({"piece_id": piece.id, "empty": true}));
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(piece.id as u64 + 1);
        let mut accepted = 0usize;
        let mut landed = 0usize;
        let mut worst_landing: f64 = 0.0;
        let mut center = None;
        let mut first_failure: Option<Value> = None;
        for _ in 0..samples {
            let (x, y) = sample_in_piece(&m, piece.kind, &mut rng)?;
            let check = || -> geocut::Result<(bool, f64)> {
                let inside = d.accepting(&x, &y, tol)? == vec![piece.id];
                let plan = plan_with(&d, &x, &y, 2, tol)?;
                let err = m.distance(plan.samples.last().expect("two samples"), &y)?
                    + (plan.segment.length - m.distance(&x, &y)?).abs();
                Ok((inside, err))
            };
            let outcome = check();
            if let Ok((inside, err)) = outcome {
                accepted += usize::from(inside);
                worst_landing = worst_landing.max(err);
                landed += usize::from(err <= 1e-9);
            }
            if !matches!(outcome, Ok((true, err)) if err <= 1e-9) && first_failure.is_none() {
                let error = outcome.err().map(|e| e.to_string());
                first_failure = Some(json!({"x": x.coords(), "y": y.coords(), "error": error}));
            }
            // Probe around the first sample that keeps clear of the piece frontier.
            if center.is_none() && frontier_clearance(&d, piece.id, &x, &y, tol).is_ok_and(|c| c >= PROBE_CLEARANCE) {
                center = Some((x, y));
            }
        }
        let probe = match (&center, piece.kind) {
            (Some((x, y)), kind) if kind != PieceKind::AntipodalPole => {
                match continuity_probe(&d, piece.id, x, y, PROBE_RADIUS, PROBE_SAMPLES, config.seed, tol) {
                    Ok(r) => {
                        passed &= r.max_velocity_deviation <= PROBE_LIMIT;
                        Some(to_value(&r))
                    }
                    Err(e) => {
                        passed = false;
                        Some(json!({"error": e.to_string()}))
                    }
                }
            }
            _ => None,
        };
        passed &= accepted == samples && landed == samples;
        validation.push(json!({
            "piece_id": piece.id,
            "empty": false,
            "samples": samples,
            "accepted": accepted,
            "landed": landed,
            "max_landing_error": worst_landing,
            "probe": probe,
            "first_failure": first_failure,
        }));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut partition_failures = 0usize;
    for _ in 0..samples {
        let (x, y) = random_pair(&m, &mut rng);
        if d.accepting(&x, &y, tol).map_or(true, |ids| ids.len() != 1) {
            partition_failures += 1;
        }
    }
    passed &= partition_failures == 0;
    let mut b = Body::new();
    b.insert("manifold".into(), json!(m.to_string()));
    b.insert("pieces".into(), to_value(&d.pieces));
    b.insert("ledger".into(), to_value(&d.ledger));
    b.insert("gc_ledger".into(), to_value(&ledger));
    b.insert("validation".into(), Value::Array(validation));
    b.insert("partition".into(), json!({"samples": samples, "failures": partition_failures}));
    b.insert("passed".into(), json!(passed));
    Ok((passed, b))
}
