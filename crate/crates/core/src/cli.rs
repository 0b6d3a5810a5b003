//! Command-line interface.
//!
//! [`run`] parses an argument vector, executes one subcommand and returns the
//! exit code together with the text for stdout and stderr. Exit codes: 0 pass,
//! 1 fail, 2 usage, parameter or regime error, 3 numeric error.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::bases::{gell_mann_basis, make_partition, OperatorBasis, Partition};
use crate::conditions::{check_necessary, check_sufficient, feasibility_screen, radii};
use crate::construct::{
    fixture_povm, from_expansion, mum3_optimal_partition, optimal_n2_pauli, simplex_x_matrix,
    sufficient_construct_with, sufficient_x_max, Fixture,
};
use crate::error::{PovmError, Result};
use crate::geometry::{
    default_half_width, ratio_curve, region_scan_with_tol, simplex_radii, write_curve_csv, MRule,
    Plane, DEFAULT_GRID,
};
use crate::herm::DEFAULT_PSD_TOL;
use crate::io::{read_basis, read_partition, read_povm, write_povm};
use crate::model::{povm_params, validate_povm, NmPovm, DEFAULT_VALIDATION_TOL};
use crate::random::random_orthogonal;

#[derive(Parser, Debug)]
#[command(
    name = "povm",
    version,
    about = "Construct, validate and analyse (N,M)-POVMs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the defining relations and positivity of a POVM file.
    Validate {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_VALIDATION_TOL)]
        tol: f64,
    },
    /// Build a POVM and write it as JSON.
    Construct(ConstructArgs),
    /// Evaluate an existence condition.
    Check(CheckArgs),
    /// Map the PSD region of I/M + u G_mu + v G_nu.
    Scan(ScanArgs),
    /// Inner and outer radii and their ratio.
    Radii {
        #[arg(long)]
        d: usize,
        #[arg(long = "M")]
        m: usize,
    },
    /// R(d) = r_in^2 / r_out^2 for 2 <= d <= d_max.
    Curve {
        #[arg(long, default_value_t = 32)]
        d_max: usize,
        #[arg(long, value_enum, default_value = "m-ge-d")]
        rule: MRule,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// List the reference POVMs, optionally writing them to a directory.
    Fixtures {
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_VALIDATION_TOL)]
        tol: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Kind {
    Sufficient,
    PauliN2,
    Mum3,
    Fixture,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Sufficient,
    Necessary,
    Screen,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(clap::Args, Debug)]
struct ConstructArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long = "M")]
    m: Option<usize>,
    /// Defaults to the sufficient bound for `--kind sufficient`.
    #[arg(long)]
    x: Option<f64>,
    #[arg(long)]
    basis: Option<PathBuf>,
    #[arg(long)]
    partition: Option<PathBuf>,
    #[arg(long, value_enum)]
    fixture: Option<Fixture>,
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Include the construction report (block rotations, angles).
    #[arg(long)]
    report: bool,
}

#[derive(clap::Args, Debug)]
struct CheckArgs {
    #[arg(long, value_enum)]
    mode: Mode,
    #[arg(long, conflicts_with_all = ["d", "n", "m"])]
    input: Option<PathBuf>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long = "M")]
    m: Option<usize>,
    #[arg(long)]
    x: Option<f64>,
    /// Random basis rotations tried by the sufficient-mode sweep.
    #[arg(long, default_value_t = 0)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_PSD_TOL)]
    tol: f64,
}

#[derive(clap::Args, Debug)]
struct ScanArgs {
    #[arg(long)]
    d: usize,
    #[arg(long = "M")]
    m: usize,
    #[arg(long)]
    mu: usize,
    #[arg(long)]
    nu: usize,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    n: usize,
    /// Half-width; defaults to 1.1 r_out.
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    basis: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_PSD_TOL)]
    tol: f64,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

/// Outcome of one invocation.
#[derive(Clone, Debug)]
pub struct CommandResult {
    pub exit_code: i32,
    /// Structured report; `Null` when the command emitted CSV on stdout.
    pub report: Value,
    pub stdout: String,
    pub stderr: String,
}

impl CommandResult {
    fn report(passed: bool, report: Value) -> Self {
        let stdout = serde_json::to_string_pretty(&report).expect("serializable") + "\n";
        Self {
            exit_code: if passed { 0 } else { 1 },
            report,
            stdout,
            stderr: String::new(),
        }
    }

    fn error(e: &PovmError) -> Self {
        let exit_code = match e {
            PovmError::NotPsd { .. } => 1,
            PovmError::Numeric { .. } | PovmError::Internal(_) => 3,
            _ => 2,
        };
        let report = json!({ "passed": false, "error": e.to_string() });
        let stdout = serde_json::to_string_pretty(&report).expect("serializable") + "\n";
        Self {
            exit_code,
            report,
            stdout,
            stderr: format!("error: {e}\n"),
        }
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

pub fn run<I, T>(argv: I) -> CommandResult
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                CommandResult {
                    exit_code: 2,
                    report: Value::Null,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                CommandResult {
                    exit_code: 0,
                    report: Value::Null,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    let outcome = match cli.command {
        Command::Validate { file, tol } => validate(&file, tol),
        Command::Construct(args) => construct(args),
        Command::Check(args) => check(args),
        Command::Scan(args) => scan(args),
        Command::Radii { d, m } => radii_cmd(d, m),
        Command::Curve {
            d_max,
            rule,
            format,
            output,
        } => curve(d_max, rule, format, output),
        Command::Fixtures { output, tol } => fixtures(output, tol),
    };
    outcome.unwrap_or_else(|e| CommandResult::error(&e))
}

fn require<T>(v: Option<T>, flag: &str) -> Result<T> {
    v.ok_or_else(|| PovmError::Parameter(format!("missing required flag {flag}")))
}

fn validate(file: &Path, tol: f64) -> Result<CommandResult> {
    let p = read_povm(file)?;
    let r = validate_povm(&p, tol)?;
    Ok(CommandResult::report(r.passed, to_value(&r)))
}

fn load_basis(path: &Option<PathBuf>, d: usize) -> Result<OperatorBasis> {
    match path {
        Some(p) => {
            let b = read_basis(p)?;
            if b.dim() != d {
                return Err(PovmError::Dimension {
                    expected: d,
                    found: b.dim(),
                });
            }
            Ok(b)
        }
        None => gell_mann_basis(d),
    }
}

fn load_partition(path: &Option<PathBuf>, d: usize, n: usize, m: usize) -> Result<Partition> {
    match path {
        Some(p) => {
            let part = read_partition(p)?;
            if (part.dim(), part.n(), part.m()) != (d, n, m) {
                return Err(PovmError::Partition(format!(
                    "partition file is for (d,N,M) = ({},{},{}), expected ({d},{n},{m})",
                    part.dim(),
                    part.n(),
                    part.m()
                )));
            }
            Ok(part)
        }
        None => make_partition(d, n, m, None),
    }
}

fn construct(args: ConstructArgs) -> Result<CommandResult> {
    let (povm, extra): (NmPovm, Value) = match args.kind {
        Kind::Sufficient => {
            let (d, n, m) = (
                require(args.d, "--d")?,
                require(args.n, "--N")?,
                require(args.m, "--M")?,
            );
            let x = args.x.unwrap_or_else(|| sufficient_x_max(d, m));
            let basis = load_basis(&args.basis, d)?;
            let partition = load_partition(&args.partition, d, n, m)?;
            let p = sufficient_construct_with(x, &basis, &partition)?;
            let extra = json!({ "kind": "sufficient", "partition": partition.blocks(), "x_bound": sufficient_x_max(d, m) });
            (p, extra)
        }
        Kind::PauliN2 => {
            let d = require(args.d, "--d")?;
            if !d.is_power_of_two() || d < 2 {
                return Err(PovmError::Parameter(format!(
                    "pauli-n2 needs d = 2^k, got {d}"
                )));
            }
            let n = require(args.n, "--N")?;
            if args.m.is_some_and(|m| m != 2) {
                return Err(PovmError::Parameter("pauli-n2 has M = 2".into()));
            }
            let p = optimal_n2_pauli(d.trailing_zeros() as usize, n)?;
            (p, json!({ "kind": "pauli-n2" }))
        }
        Kind::Mum3 => {
            let (p, report) = mum3_optimal_partition()?;
            (p, to_value(&report))
        }
        Kind::Fixture => {
            let f = require(args.fixture, "--fixture")?;
            (
                fixture_povm(f),
                json!({ "kind": "fixture", "name": f.name() }),
            )
        }
    };
    if let Some(path) = &args.output {
        write_povm(path, &povm)?;
    }
    let validation = validate_povm(&povm, DEFAULT_VALIDATION_TOL)?;
    let mut report = json!({ "validation": validation });
    if args.report {
        report["construction"] = extra;
    }
    if let Some(path) = &args.output {
        report["output"] = json!(path.display().to_string());
    }
    Ok(CommandResult::report(validation.passed, report))
}

fn check_params(args: &CheckArgs) -> Result<(Option<NmPovm>, usize, usize, usize)> {
    match &args.input {
        Some(path) => {
            let p = read_povm(path)?;
            let q = *p.params();
            Ok((Some(p), q.d, q.n, q.m))
        }
        None => Ok((
            None,
            require(args.d, "--d")?,
            require(args.n, "--N")?,
            require(args.m, "--M")?,
        )),
    }
}

#[derive(Serialize)]
struct SweepReport {
    trials: usize,
    seed: u64,
    worst_min_eigenvalue: f64,
    worst_trial: Option<usize>,
    passed: bool,
}

/// Builds the simplex expansion at `x` in `trials` random rotations of the
/// Gell-Mann basis and records the worst element eigenvalue.
fn sufficient_sweep(
    d: usize,
    n: usize,
    m: usize,
    x: f64,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<SweepReport> {
    let params = povm_params(d, n, m, x)?;
    let basis = gell_mann_basis(d)?;
    let partition = make_partition(d, n, m, None)?;
    let xmat = simplex_x_matrix(d, n, m, &partition)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    let mut worst_trial = None;
    for t in 0..trials {
        let rotated = basis.rotated(&random_orthogonal(d * d - 1, &mut rng))?;
        let e = from_expansion(&rotated, &xmat, &params, false)?;
        if e.report.min_eigenvalue < worst {
            worst = e.report.min_eigenvalue;
            worst_trial = Some(t);
        }
    }
    Ok(SweepReport {
        trials,
        seed,
        worst_min_eigenvalue: worst,
        worst_trial,
        passed: trials == 0 || worst >= -tol,
    })
}

fn check(args: CheckArgs) -> Result<CommandResult> {
    let (povm, d, n, m) = check_params(&args)?;
    match args.mode {
        Mode::Sufficient => {
            let x = match (&povm, args.x) {
                (Some(p), _) => p.params().x,
                (None, Some(x)) => x,
                (None, None) => sufficient_x_max(d, m),
            };
            let params = povm_params(d, n, m, x)?;
            let satisfied = check_sufficient(&params);
            let mut report = json!({
                "mode": "sufficient",
                "d": d, "N": n, "M": m, "x": x,
                "x_bound": sufficient_x_max(d, m),
                "satisfied": satisfied,
            });
            let mut passed = satisfied;
            if args.trials > 0 {
                let sweep = sufficient_sweep(d, n, m, x, args.trials, args.seed, args.tol)?;
                passed &= sweep.passed;
                report["sweep"] = to_value(&sweep);
            }
            report["passed"] = json!(passed);
            Ok(CommandResult::report(passed, report))
        }
        Mode::Necessary => {
            let p =
                povm.ok_or_else(|| PovmError::Parameter("necessary mode needs --input".into()))?;
            let r = check_necessary(&p)?;
            Ok(CommandResult::report(r.passed, to_value(&r)))
        }
        Mode::Screen => {
            let r = feasibility_screen(d, n, m)?;
            Ok(CommandResult::report(!r.excluded, to_value(&r)))
        }
    }
}

fn scan(args: ScanArgs) -> Result<CommandResult> {
    let basis = load_basis(&args.basis, args.d)?;
    let r = match args.r {
        Some(r) => r,
        None => default_half_width(args.d, args.m)?,
    };
    let s = region_scan_with_tol(&basis, args.mu, args.nu, args.m, args.n, r, args.tol)?;
    let plane = Plane::new(&basis, args.mu, args.nu, args.m)?;
    let axes: Vec<Value> = [("+mu", 0.0), ("+nu", 0.5), ("-mu", 1.0), ("-nu", 1.5)]
        .iter()
        .map(|&(name, turns)| json!({ "direction": name, "radius": plane.boundary_radius(turns * std::f64::consts::PI) }))
        .collect();
    let disk = s.disk_violations(s.overlays.r_in);
    let passed = disk == 0 && s.star_violations() == 0;
    let summary = json!({
        "plane": [args.mu, args.nu],
        "d": args.d, "M": args.m, "n": s.n, "r": s.r, "tol": s.tol,
        "r_in": s.overlays.r_in, "r_out": s.overlays.r_out,
        "psd_fraction": s.psd_fraction(),
        "boundary_radii": axes,
        "disk_violations": disk,
        "passed": passed,
    });
    match (args.format, &args.output) {
        (Format::Csv, None) => {
            let mut out = Vec::new();
            s.write_csv(&mut out)?;
            Ok(CommandResult {
                exit_code: if passed { 0 } else { 1 },
                report: Value::Null,
                stdout: String::from_utf8(out).expect("ascii"),
                stderr: String::new(),
            })
        }
        (Format::Csv, Some(path)) => {
            s.write_csv(std::io::BufWriter::new(std::fs::File::create(path)?))?;
            Ok(CommandResult::report(passed, summary))
        }
        (Format::Json, path) => {
            let mut full = summary;
            full["scan"] = to_value(&s);
            match path {
                Some(path) => {
                    std::fs::write(path, serde_json::to_string(&full["scan"])? + "\n")?;
                    full.as_object_mut().expect("object").remove("scan");
                    Ok(CommandResult::report(passed, full))
                }
                None => Ok(CommandResult::report(passed, full)),
            }
        }
    }
}

fn radii_cmd(d: usize, m: usize) -> Result<CommandResult> {
    let r = radii(d, m)?;
    let s = simplex_radii(d, m)?;
    let mut report = to_value(&r);
    report["simplex"] = to_value(&s);
    Ok(CommandResult::report(s.agreement <= 1e-14, report))
}

fn curve(
    d_max: usize,
    rule: MRule,
    format: Format,
    output: Option<PathBuf>,
) -> Result<CommandResult> {
    let c = ratio_curve(d_max, rule)?;
    let text = match format {
        Format::Json => serde_json::to_string_pretty(&json!({ "rule": rule, "curve": c }))? + "\n",
        Format::Csv => {
            let mut out = Vec::new();
            write_curve_csv(&c, &mut out)?;
            String::from_utf8(out).expect("ascii")
        }
    };
    match output {
        Some(path) => {
            std::fs::write(&path, &text)?;
            Ok(CommandResult::report(
                true,
                json!({ "rule": rule, "points": c.len(), "output": path.display().to_string() }),
            ))
        }
        None => Ok(CommandResult {
            exit_code: 0,
            report: Value::Null,
            stdout: text,
            stderr: String::new(),
        }),
    }
}

fn fixtures(output: Option<PathBuf>, tol: f64) -> Result<CommandResult> {
    if let Some(dir) = &output {
        std::fs::create_dir_all(dir)?;
    }
    let mut entries = Vec::new();
    let mut passed = true;
    for f in Fixture::ALL {
        let p = fixture_povm(f);
        let r = validate_povm(&p, tol)?;
        passed &= r.passed;
        let mut entry = json!({
            "name": f.name(),
            "d": r.d, "N": r.n, "M": r.m, "x": r.x,
            "optimal": r.optimal,
            "passed": r.passed,
        });
        if let Some(dir) = &output {
            let path = dir.join(format!("{}.json", f.name()));
            write_povm(&path, &p)?;
            entry["file"] = json!(path.display().to_string());
        }
        entries.push(entry);
    }
    Ok(CommandResult::report(
        passed,
        json!({ "fixtures": entries, "passed": passed }),
    ))
}
