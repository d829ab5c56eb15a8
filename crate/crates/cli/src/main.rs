//! Command-line front end: one subcommand per library entry point, JSON
//! reports, deterministic output.
//!
//! Exit codes: 0 success or witness found, 1 negative verdict, 2 usage or
//! input error, 3 internal certification failure (duality gap, provenance
//! mismatch, concavity precondition).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::{json, Value};

use lipfree::error::Error;
use lipfree::katetov::grow_urysohn;
use lipfree::lipschitz::{lipschitz_constant, mcshane_extend};
use lipfree::molecule::Molecule;
use lipfree::norm::{dual_norm, holmes_norm, norm_certificate, primal_norm};
use lipfree::pipeline::{phi, theorem1_check};
use lipfree::space::{
    bound_transform, normalize_diameter_one, psi_unbounded, snowflake,
    validate_code, FiniteMetricSpace, MetricCode, PointedSpace,
};
use lipfree::suite::{run_suite, RunConfig};
use lipfree::weaver::is_concave;
use lipfree::isometry::{find_dilatation, find_isometry};

#[derive(Parser)]
#[command(name = "lipfree", version, about = "Finite-scale Lipschitz-free space toolkit")]
struct Cli {
    /// Numeric tolerance for validation and certification.
    #[arg(long, global = true, default_value_t = 1e-9, env = "LIPFREE_TOL")]
    tol: f64,
    /// Seed for randomized procedures.
    #[arg(long, global = true, default_value_t = 17, env = "LIPFREE_SEED")]
    seed: u64,
    /// Point budget for growth procedures.
    #[arg(long, global = true, default_value_t = 10_000, env = "LIPFREE_BUDGET")]
    budget: usize,
    /// Write the report here instead of stdout.
    #[arg(long, global = true, env = "LIPFREE_OUT")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the four metric code conditions on a space file.
    Validate { space: PathBuf },
    /// Apply a metric transform to a space file.
    Transform {
        space: PathBuf,
        #[command(flatten)]
        which: TransformArgs,
    },
    /// Compute the free-space norm of a molecule file.
    Norm {
        molecule: PathBuf,
        /// Primal (transportation) solver only.
        #[arg(long, conflicts_with_all = ["dual", "both"])]
        primal: bool,
        /// Dual (Lipschitz program) solver only.
        #[arg(long, conflicts_with = "both")]
        dual: bool,
        /// Both solvers with a duality certificate (default).
        #[arg(long)]
        both: bool,
    },
    /// Evaluate the basepoint-expansion norm formula on a coefficient file.
    Holmes { file: PathBuf },
    /// Extend a partial 1-Lipschitz function to the whole space.
    Extend { file: PathBuf },
    /// Search for an isometry between two space files.
    Isometry { x: PathBuf, y: PathBuf },
    /// Search for a dilatation between two space files.
    Dilatation { x: PathBuf, y: PathBuf },
    /// Test concavity via extreme points of the free-space unit ball.
    Concave {
        space: PathBuf,
        #[arg(long, default_value_t = 0)]
        basepoint: usize,
    },
    /// Urysohn approximation commands.
    Urysohn {
        #[command(subcommand)]
        action: UrysohnCommand,
    },
    /// Run the reduction pipeline on a code file.
    Reduce {
        code: PathBuf,
        /// Also write the full free-space instance here.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Verify the three-way equivalence on a pair of code files.
    Theorem1 { d: PathBuf, dprime: PathBuf },
    /// Run the acceptance property suite.
    Suite,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct TransformArgs {
    /// d -> d/(1+d).
    #[arg(long)]
    bound: bool,
    /// d -> d^alpha.
    #[arg(long, value_name = "ALPHA")]
    snowflake: Option<f64>,
    /// Adjoin the gadget pair forcing diameter exactly 1.
    #[arg(long)]
    diam1: bool,
    /// Adjoin a length-K ray making the diameter grow with K.
    #[arg(long, value_name = "K")]
    psi: Option<usize>,
}

#[derive(Subcommand)]
enum UrysohnCommand {
    /// Grow a seed space toward grid-valued extension closure.
    Grow {
        #[arg(value_name = "SEED")]
        seed_space: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        grid: Vec<f64>,
        #[arg(long, default_value_t = 2)]
        max_subset: usize,
        #[arg(long, default_value_t = 8)]
        rounds: usize,
        /// Shuffle sweep order with the global seed instead of the
        /// deterministic lexicographic order.
        #[arg(long)]
        shuffle: bool,
    },
}

/// A space given inline or as a path to a space file.
#[derive(Deserialize)]
#[serde(untagged)]
enum SpaceRef {
    Inline(MetricCode),
    Path(String),
}

#[derive(Deserialize)]
struct MoleculeFile {
    space: SpaceRef,
    entries: BTreeMap<String, f64>,
}

#[derive(Deserialize)]
struct HolmesFile {
    space: SpaceRef,
    #[serde(default)]
    basepoint: Option<usize>,
    coeffs: Vec<(f64, usize)>,
}

#[derive(Deserialize)]
struct ExtendFile {
    space: SpaceRef,
    partial: BTreeMap<String, f64>,
}

enum Failure {
    /// Bad usage or bad input data.
    Input(String),
    /// A solver self-check failed.
    Certification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::DualityGap { .. }
            | Error::Solver(_)
            | Error::NotUnitNorm { .. }
            | Error::ProvenanceMismatch { .. }
            | Error::NotConcave { .. } => Failure::Certification(e.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type CmdResult = Result<(Value, bool), Failure>;

/// Rounds to 12 significant digits so reports are stable and readable.
fn sig(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        v
    } else {
        format!("{v:.11e}").parse().unwrap()
    }
}

fn read_code(path: &Path) -> Result<MetricCode, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let code: MetricCode = serde_json::from_str(&text)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    if code.n != code.d.len() || code.d.iter().any(|row| row.len() != code.n) {
        return Err(Failure::Input(format!(
            "{}: matrix shape does not match n",
            path.display()
        )));
    }
    Ok(code)
}

fn resolve_space(r: &SpaceRef, base: &Path) -> Result<MetricCode, Failure> {
    match r {
        SpaceRef::Inline(code) => Ok(code.clone()),
        SpaceRef::Path(p) => {
            let path = base.parent().unwrap_or(Path::new(".")).join(p);
            read_code(&path)
        }
    }
}

fn load_space(code: &MetricCode, tol: f64) -> Result<FiniteMetricSpace, Failure> {
    Ok(FiniteMetricSpace::from_code(code, tol)?)
}

fn parse_entries(entries: &BTreeMap<String, f64>) -> Result<Molecule, Failure> {
    let mut map = BTreeMap::new();
    for (k, &v) in entries {
        let idx: usize = k
            .parse()
            .map_err(|_| Failure::Input(format!("bad point index {k:?}")))?;
        map.insert(idx, v);
    }
    Ok(Molecule::new(map)?)
}

fn witness_value(mapping: &[usize]) -> Value {
    json!(mapping)
}

fn run(cli: &Cli) -> CmdResult {
    let tol = cli.tol;
    match &cli.command {
        Command::Validate { space } => {
            let code = read_code(space)?;
            let violations = validate_code(&code, tol);
            if violations.is_empty() {
                Ok((json!({ "valid": true, "n": code.n }), true))
            } else {
                let list: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
                Err(Failure::Input(
                    json!({ "valid": false, "violations": list }).to_string(),
                ))
            }
        }
        Command::Transform { space, which } => {
            let code = read_code(space)?;
            let s = load_space(&code, tol)?;
            let (name, out) = if which.bound {
                ("bound", bound_transform(&s))
            } else if let Some(alpha) = which.snowflake {
                ("snowflake", snowflake(&s, alpha)?)
            } else if which.diam1 {
                ("diam1", normalize_diameter_one(&s)?)
            } else {
                ("psi", psi_unbounded(&s, which.psi.unwrap())?)
            };
            Ok((
                json!({ "transform": name, "space": out.to_code() }),
                true,
            ))
        }
        Command::Norm {
            molecule,
            primal,
            dual,
            ..
        } => {
            let file: MoleculeFile = serde_json::from_str(&std::fs::read_to_string(molecule)?)?;
            let code = resolve_space(&file.space, molecule)?;
            let space = load_space(&code, tol)?;
            let m = parse_entries(&file.entries)?;
            let basepoint = code.basepoint.unwrap_or(0);
            let pointed = PointedSpace::new(space.clone(), basepoint)?;
            if *primal {
                let p = primal_norm(&m, &space)?;
                let decomposition: Vec<Value> = p
                    .decomposition
                    .iter()
                    .map(|&(a, b, c)| json!([a, b, sig(c)]))
                    .collect();
                Ok((
                    json!({ "value": sig(p.value), "decomposition": decomposition }),
                    true,
                ))
            } else if *dual {
                let d = dual_norm(&m, &pointed)?;
                let witness: Vec<f64> = d.witness.values.iter().map(|&v| sig(v)).collect();
                Ok((json!({ "value": sig(d.value), "witness": witness }), true))
            } else {
                let cert = norm_certificate(&m, &pointed, tol)?;
                let decomposition: Vec<Value> = cert
                    .primal
                    .iter()
                    .map(|&(a, b, c)| json!([a, b, sig(c)]))
                    .collect();
                let witness: Vec<f64> = cert.dual_witness.values.iter().map(|&v| sig(v)).collect();
                Ok((
                    json!({
                        "value": sig(cert.value),
                        "primal_value": sig(cert.primal_value),
                        "dual_value": sig(cert.dual_value),
                        "gap": sig(cert.gap),
                        "decomposition": decomposition,
                        "dual_witness": witness,
                    }),
                    true,
                ))
            }
        }
        Command::Holmes { file } => {
            let hf: HolmesFile = serde_json::from_str(&std::fs::read_to_string(file)?)?;
            let code = resolve_space(&hf.space, file)?;
            let space = load_space(&code, tol)?;
            let basepoint = hf.basepoint.or(code.basepoint).unwrap_or(0);
            let pointed = PointedSpace::new(space.clone(), basepoint)?;
            let value = holmes_norm(&hf.coeffs, &pointed)?;
            let terms: Vec<(f64, Molecule)> = hf
                .coeffs
                .iter()
                .map(|&(l, x)| (l, Molecule::elementary(x, basepoint)))
                .collect();
            let free = primal_norm(&Molecule::combine(&terms), &space)?.value;
            Ok((
                json!({
                    "value": sig(value),
                    "free_norm": sig(free),
                    "deviation": sig((value - free).abs()),
                }),
                true,
            ))
        }
        Command::Extend { file } => {
            let ef: ExtendFile = serde_json::from_str(&std::fs::read_to_string(file)?)?;
            let code = resolve_space(&ef.space, file)?;
            let space = load_space(&code, tol)?;
            let mut partial = BTreeMap::new();
            for (k, &v) in &ef.partial {
                let idx: usize = k
                    .parse()
                    .map_err(|_| Failure::Input(format!("bad point index {k:?}")))?;
                partial.insert(idx, v);
            }
            let f = mcshane_extend(&partial, &space, tol)?;
            let constant = lipschitz_constant(&f, &space);
            let values: Vec<f64> = f.values.iter().map(|&v| sig(v)).collect();
            Ok((
                json!({ "values": values, "lipschitz_constant": sig(constant) }),
                true,
            ))
        }
        Command::Isometry { x, y } => {
            let sx = load_space(&read_code(x)?, tol)?;
            let sy = load_space(&read_code(y)?, tol)?;
            match find_isometry(&sx, &sy, tol) {
                Some(w) => Ok((json!({ "witness": witness_value(&w.mapping) }), true)),
                None => Ok((json!({ "witness": null }), false)),
            }
        }
        Command::Dilatation { x, y } => {
            let sx = load_space(&read_code(x)?, tol)?;
            let sy = load_space(&read_code(y)?, tol)?;
            match find_dilatation(&sx, &sy, tol) {
                Some(w) => Ok((
                    json!({
                        "witness": witness_value(&w.mapping),
                        "lambda": sig(w.lambda),
                    }),
                    true,
                )),
                None => Ok((json!({ "witness": null }), false)),
            }
        }
        Command::Concave { space, basepoint } => {
            let s = load_space(&read_code(space)?, tol)?;
            let report = is_concave(&s, *basepoint, tol)?;
            let failures: Vec<Value> = report
                .failures
                .iter()
                .map(|f| {
                    json!({
                        "pair": [f.p, f.q],
                        "margin": sig(f.margin),
                        "witness": f.witness,
                    })
                })
                .collect();
            Ok((
                json!({ "concave": report.concave, "failures": failures }),
                report.concave,
            ))
        }
        Command::Urysohn {
            action:
                UrysohnCommand::Grow {
                    seed_space,
                    grid,
                    max_subset,
                    rounds,
                    shuffle,
                },
        } => {
            let s = load_space(&read_code(seed_space)?, tol)?;
            let rng_seed = shuffle.then_some(cli.seed);
            let approx = grow_urysohn(&s, grid, *max_subset, *rounds, rng_seed, cli.budget, tol)?;
            if let Some(out) = &cli.out {
                std::fs::write(
                    out,
                    serde_json::to_string_pretty(&approx.space.to_code())? + "\n",
                )?;
                let mut log_lines = String::new();
                for record in &approx.log {
                    log_lines.push_str(&serde_json::to_string(record)?);
                    log_lines.push('\n');
                }
                let mut log_path = out.as_os_str().to_owned();
                log_path.push(".log.jsonl");
                std::fs::write(&log_path, log_lines)?;
            }
            Ok((
                json!({
                    "points": approx.space.len(),
                    "unrealized": approx.unrealized,
                    "extensions": approx.log.len(),
                    "space": approx.space.to_code(),
                }),
                approx.unrealized == 0,
            ))
        }
        Command::Reduce { code, emit } => {
            let c = read_code(code)?;
            let instance = phi(&c, tol)?;
            if let Some(path) = emit {
                std::fs::write(path, serde_json::to_string_pretty(&instance)? + "\n")?;
            }
            let mut base = instance.pointed.space.to_code();
            base.basepoint = Some(instance.pointed.basepoint);
            let stages: Vec<&str> = instance
                .provenance
                .stages
                .iter()
                .map(|s| s.stage.as_str())
                .collect();
            Ok((json!({ "base": base, "stages": stages }), true))
        }
        Command::Theorem1 { d, dprime } => {
            let report = theorem1_check(&read_code(d)?, &read_code(dprime)?, tol)?;
            if !report.agree {
                return Err(Failure::Certification(
                    "the three equivalence verdicts disagree".into(),
                ));
            }
            Ok((
                json!({
                    "spaces_isometric": report.spaces_isometric,
                    "free_spaces_isometric": report.free_spaces_isometric,
                    "basepoint_isometry": report.basepoint_isometry,
                    "agree": report.agree,
                    "space_witness": report.space_witness.as_ref().map(|w| &w.mapping),
                    "free_witness": report.free_witness.as_ref().map(|w| &w.mapping),
                    "basepoint_witness": report.basepoint_witness.as_ref().map(|w| &w.mapping),
                }),
                report.spaces_isometric,
            ))
        }
        Command::Suite => {
            let config = RunConfig {
                tolerance: tol,
                rng_seed: cli.seed,
                point_budget: cli.budget,
            };
            let report = run_suite(&config);
            let all = report.all_passed;
            Ok((serde_json::to_value(&report)?, all))
        }
    }
}

fn emit(out: &Option<PathBuf>, report: &Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(report)? + "\n";
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((report, positive)) => {
            // The urysohn command already wrote dedicated files to --out.
            let to_file = !matches!(
                cli.command,
                Command::Urysohn { .. }
            );
            let target = if to_file { cli.out.clone() } else { None };
            if emit(&target, &report).is_err() {
                return ExitCode::from(2);
            }
            ExitCode::from(if positive { 0 } else { 1 })
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Certification(msg)) => {
            eprintln!("certification failure: {msg}");
            ExitCode::from(3)
        }
    }
}
