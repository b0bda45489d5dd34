use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use qcrypt::games::{
    chained_certificate, correlation_bound, game_value, rac_dimension_bound, simulate_single_prover, XorGame,
};
use qcrypt::locking::{locking_accessible_info, LockingFamily};
use qcrypt::mubclifford::{
    check_mutually_unbiased, latin_square_mub, latin_square_mub_prime, pauli_mub, standard_bases, LatinSquare, MubSet,
};
use qcrypt::noisyot::{
    depolarizing_delta_max, practical_crossover, practical_exponent, security_bound_perfect, security_bound_practical,
    simulate_rot, Attack, LinearCode, PracticalParams, RotParams, RotSetting,
};
use qcrypt::pistar::{
    guess_basis_baseline, pistar_and_value, pistar_value, srm_lower_bound, srm_success, star_boolean_upper, star_value,
    FunctionTable, HiddenFunctionEnsemble,
};
use qcrypt::sdpsolve::{gram_problem, solve, verify_certificate};
use qcrypt::uncertainty::{clifford_collision_relation, clifford_shannon_relation, min_avg_shannon, DEFAULT_RESTARTS};
use qcrypt::{Error, SUITES};

const DEFAULT_SEED: u64 = 20_240_601;
const TOL: f64 = 1e-10;

#[derive(Parser, Debug)]
#[command(name = "qcrypt", version, about = "Numerical checks of quantum cryptography bounds")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Seed for randomized restarts and simulations (default: QCRYPT_SEED or a fixed constant).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the result here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
    Pretty,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// CHSH correlation bound by SDP with certificate check.
    ///
    /// CSV columns: certificate, dual, gap, value
    Tsirelson,
    /// Chained Bell correlations, solver against the analytic certificate.
    ///
    /// CSV columns: certificate, closed_form, n, value
    ChainedChsh {
        /// Single n; all of 2..=8 when omitted.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Classical and quantum value of an XOR game.
    ///
    /// CSV columns: classical, correlation_bound, game, quantum, single_prover
    Game(GameArgs),
    /// Build a MUB family and check mutual unbiasedness.
    ///
    /// CSV columns: d, family, m, unbiased, worst_deviation
    Mub(FamilyArgs),
    /// Entropic uncertainty: numerical minimum against the analytic bound.
    ///
    /// CSV columns: achieved, bound, d, gap, m_or_k, relation
    Uncertainty(UncertaintyArgs),
    /// Hidden-function discrimination with and without basis information.
    ///
    /// CSV columns: baseline, function, n, n_bases, pistar, srm, srm_bound, star, star_upper, and_closed_form
    Pistar(PistarArgs),
    /// Accessible-information sandwich of a MUB ensemble.
    ///
    /// CSV columns: d, family, m, n, lower, tight, upper
    Locking(FamilyArgs),
    /// Bit-string commitment impossibility check.
    ///
    /// CSV columns: a, b, c, n, possible, slack
    Qbsc {
        #[arg(long)]
        n: f64,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
    },
    /// Security bound of randomized OT under depolarizing storage.
    ///
    /// CSV columns: bound, crossover, delta_max, ell, exponent, m, n, p_error, r, secure
    OtTradeoff(TradeoffArgs),
    /// Monte-Carlo run of the OT protocol.
    ///
    /// CSV columns: abort_rate, aborted, adversary_guess_rate, correct, correctness_rate, decoding_failures, envelope, trials
    OtSim(SimArgs),
    /// Dimension lower bound from a random access code.
    ///
    /// CSV columns: bound_bits, outcomes, p, settings
    RacBound {
        #[arg(long)]
        settings: usize,
        #[arg(long)]
        outcomes: usize,
        #[arg(long)]
        p: f64,
    },
    /// List the acceptance suites.
    ///
    /// CSV columns: module, name, result
    Suites,
}

#[derive(Args, Debug)]
struct GameArgs {
    /// chsh, chained:<n> or gisin:<n>.
    #[arg(long, conflicts_with = "file")]
    builtin: Option<String>,
    /// JSON game file.
    #[arg(long)]
    file: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyKind {
    Standard,
    Pauli,
    Latin,
}

#[derive(Args, Debug)]
struct FamilyArgs {
    #[arg(long, value_enum, default_value_t = FamilyKind::Standard)]
    family: FamilyKind,
    /// Qubits for the standard family.
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Prime dimension for the Pauli family.
    #[arg(long, default_value_t = 3)]
    d: usize,
    /// Side of the Latin squares (dimension s²).
    #[arg(long, default_value_t = 3)]
    s: usize,
    /// Number of bases to keep.
    #[arg(long, default_value_t = 2)]
    m: usize,
    /// Latin square files (1-based symbols, one row per line); row and column squares are added.
    #[arg(long = "latin-file")]
    latin_files: Vec<PathBuf>,
}

#[derive(Args, Debug)]
struct UncertaintyArgs {
    /// Anticommuting observables instead of MUBs.
    #[arg(long)]
    clifford: bool,
    /// Collision entropy (Clifford only).
    #[arg(long)]
    collision: bool,
    /// Number of observables for --clifford.
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = DEFAULT_RESTARTS)]
    restarts: usize,
    #[command(flatten)]
    family: FamilyArgs,
}

#[derive(Args, Debug)]
struct PistarArgs {
    /// and, xor or bit:<i>.
    #[arg(long, default_value = "and", conflicts_with = "function_file")]
    function: String,
    /// JSON function table {"n": …, "table": […]}.
    #[arg(long)]
    function_file: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Number of bases among {I, H, K}^⊗n.
    #[arg(long, default_value_t = 2)]
    bases: usize,
    /// Use P(1…1) = ½ for AND with two bases.
    #[arg(long)]
    skewed: bool,
}

#[derive(Args, Debug)]
struct TradeoffArgs {
    /// Depolarizing storage parameter.
    #[arg(long)]
    r: f64,
    #[arg(long, default_value_t = 0.0)]
    p_error: f64,
    #[arg(long, default_value_t = 500)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    ell: usize,
    /// Protocol with erasures and error correction (implied by a nonzero --p-error).
    #[arg(long)]
    practical: bool,
    #[arg(long, default_value_t = 0.0)]
    p_erase: f64,
    /// Emit one row per r ∈ {0, 0.05, …, 1} instead of the single --r.
    #[arg(long)]
    sweep: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AttackKind {
    None,
    Breidbart,
    Store,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CodeKind {
    Hamming74,
    Hamming84,
    Repetition3,
}

#[derive(Args, Debug)]
struct SimArgs {
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, value_enum, default_value_t = AttackKind::None)]
    attack: AttackKind,
    /// Storage noise for --attack store.
    #[arg(long, default_value_t = 0.5)]
    r: f64,
    #[arg(long, default_value_t = 16)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    ell: usize,
    #[arg(long, default_value_t = 0.0)]
    p_erase: f64,
    #[arg(long, default_value_t = 0.0)]
    p_error: f64,
    #[arg(long, value_enum, default_value_t = CodeKind::Hamming74)]
    code: CodeKind,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Lib(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self::Lib(e)
    }
}

type CliResult<T> = Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

fn read(path: &PathBuf) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn seed(cli: &Cli) -> CliResult<u64> {
    if let Some(s) = cli.seed {
        return Ok(s);
    }
    match std::env::var("QCRYPT_SEED") {
        Ok(v) => v.trim().parse().map_err(|_| CliError::Usage(format!("QCRYPT_SEED={v:?} is not an unsigned integer"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn verdict(optimal: bool) -> &'static str {
    if optimal {
        "optimal"
    } else {
        "not-optimal"
    }
}

fn family(args: &FamilyArgs) -> CliResult<(MubSet, LockingFamily)> {
    let m = args.m;
    match args.family {
        FamilyKind::Standard => {
            if m > 3 {
                return usage("the standard family has at most three bases");
            }
            Ok((standard_bases(args.n)?.take(m)?, LockingFamily::Standard { n: args.n, bases: m }))
        }
        FamilyKind::Pauli => Ok((pauli_mub(args.d)?.take(m)?, LockingFamily::Pauli { d: args.d, bases: m })),
        FamilyKind::Latin if args.latin_files.is_empty() => {
            Ok((latin_square_mub_prime(args.s)?.take(m)?, LockingFamily::Latin { s: args.s, bases: m }))
        }
        FamilyKind::Latin => {
            let squares =
                args.latin_files.iter().map(|p| Ok(LatinSquare::parse(&read(p)?)?)).collect::<CliResult<Vec<_>>>()?;
            let s = squares[0].side();
            Ok((latin_square_mub(&squares, s, true)?.take(m)?, LockingFamily::Latin { s, bases: m }))
        }
    }
}

fn family_name(f: FamilyKind) -> &'static str {
    match f {
        FamilyKind::Standard => "standard",
        FamilyKind::Pauli => "pauli",
        FamilyKind::Latin => "latin",
    }
}

fn tradeoff_row(a: &TradeoffArgs, r: f64) -> CliResult<Value> {
    let delta = depolarizing_delta_max(r)?;
    let crossover = if delta < 1.0 { Some(practical_crossover(delta)?) } else { None };
    let with_errors = a.practical || a.p_error > 0.0;
    let (m, bound, exponent) = if with_errors {
        if !(0.0..1.0).contains(&a.p_erase) {
            return usage("--p-erase must lie in [0,1)");
        }
        let m = ((1.0 - a.p_erase) * a.n as f64).floor() as usize;
        (m, security_bound_practical(m, a.ell, a.p_error, delta)?, practical_exponent(a.p_error, delta)?)
    } else {
        (a.n, security_bound_perfect(a.n, a.ell, delta)?, practical_exponent(0.0, delta)?)
    };
    Ok(json!({
        "r": r,
        "p_error": a.p_error,
        "n": a.n,
        "m": m,
        "ell": a.ell,
        "delta_max": delta,
        "exponent": exponent,
        "bound": bound,
        "secure": exponent < 0.0,
        "crossover": crossover,
    }))
}

fn run(cli: &Cli) -> CliResult<Value> {
    let seed = seed(cli)?;
    match &cli.command {
        Command::Tsirelson => {
            let p = gram_problem(&[vec![1.0, 1.0], vec![1.0, -1.0]])?;
            let s = solve(&p, TOL)?;
            let rep = verify_certificate(&p, &s.primal, &s.dual, 1e-6)?;
            Ok(
                json!({"value": s.primal_value, "dual": s.dual_value, "gap": s.gap, "certificate": verdict(rep.optimal)}),
            )
        }
        Command::ChainedChsh { n } => {
            let ns: Vec<usize> = match n {
                Some(n) => vec![*n],
                None => (2..=8).collect(),
            };
            let mut rows = Vec::new();
            for &n in &ns {
                let cert = chained_certificate(n)?;
                let solved = correlation_bound(&qcrypt::games::chained_matrix(n)?, TOL)?;
                rows.push(json!({
                    "n": n,
                    "value": solved.value,
                    "closed_form": cert.closed_form,
                    "certificate": verdict(cert.report.optimal),
                }));
            }
            Ok(json!({ "rows": rows }))
        }
        Command::Game(a) => {
            let (name, g) = match (&a.builtin, &a.file) {
                (_, Some(f)) => {
                    let v: Value = serde_json::from_str(&read(f)?).map_err(Error::from)?;
                    (f.display().to_string(), XorGame::from_json_value(&v)?)
                }
                (Some(b), None) => (b.clone(), XorGame::builtin(b)?),
                (None, None) => ("chsh".to_string(), XorGame::chsh()),
            };
            let v = game_value(&g, TOL)?;
            let sp = simulate_single_prover(&g, &v.alice_vectors, &v.bob_vectors)?;
            Ok(json!({
                "game": name,
                "classical": v.classical,
                "quantum": v.quantum,
                "correlation_bound": v.correlation_bound,
                "single_prover": sp,
            }))
        }
        Command::Mub(a) => {
            let (m, _) = family(a)?;
            let rep = check_mutually_unbiased(m.bases(), 1e-8);
            Ok(json!({
                "family": family_name(a.family),
                "d": m.dim(),
                "m": m.len(),
                "unbiased": rep.unbiased,
                "worst_deviation": rep.worst_deviation,
            }))
        }
        Command::Uncertainty(a) => {
            let res = if a.clifford {
                if a.collision {
                    clifford_collision_relation(a.family.n, a.k, a.restarts, seed)?
                } else {
                    clifford_shannon_relation(a.family.n, a.k, a.restarts, seed)?
                }
            } else {
                if a.collision {
                    return usage("--collision is only available with --clifford");
                }
                min_avg_shannon(&family(&a.family)?.0, a.restarts, seed)?
            };
            let mut v = res.to_json_value();
            if let Value::Object(m) = &mut v {
                m.remove("minimizer");
                m.insert("gap".into(), json!(res.gap()));
            }
            Ok(v)
        }
        Command::Pistar(a) => {
            let f = match &a.function_file {
                Some(p) => {
                    let v: Value = serde_json::from_str(&read(p)?).map_err(Error::from)?;
                    FunctionTable::from_json_value(&v)?
                }
                None => FunctionTable::builtin(&a.function, a.n)?,
            };
            let name = a.function_file.as_ref().map_or(a.function.clone(), |p| p.display().to_string());
            let e = if a.skewed {
                if a.function != "and" || a.bases != 2 || a.function_file.is_some() {
                    return usage("--skewed applies to the built-in AND with two bases");
                }
                HiddenFunctionEnsemble::and_skewed(f.n())?
            } else {
                HiddenFunctionEnsemble::standard(f.clone(), a.bases)?
            };
            let small = e.dim() * e.n_outcomes() <= 64;
            let pistar = if small { Some(pistar_value(&e, TOL)?.value) } else { None };
            let srm = if e.is_balanced() { Some(srm_success(&e)?) } else { None };
            let and_closed = if a.skewed { Some(pistar_and_value(f.n())?) } else { None };
            Ok(json!({
                "function": name,
                "n": f.n(),
                "n_bases": e.n_bases(),
                "star": star_value(&e, TOL)?,
                "pistar": pistar,
                "srm": srm,
                "srm_bound": srm_lower_bound(e.n_bases(), e.ny())?,
                "baseline": guess_basis_baseline(e.n_bases(), e.ny())?,
                "star_upper": star_boolean_upper(e.n_bases())?,
                "and_closed_form": and_closed,
            }))
        }
        Command::Locking(a) => {
            let (_, fam) = family(a)?;
            if !a.latin_files.is_empty() {
                return usage("locking uses the built-in Latin squares; drop --latin-file");
            }
            Ok(locking_accessible_info(fam, DEFAULT_RESTARTS, seed)?.to_json_value())
        }
        Command::Qbsc { n, a, b } => {
            let v = qcrypt::locking::qbsc_impossibility(*n, *a, *b)?;
            Ok(
                json!({"n": n, "a": a, "b": b, "c": qcrypt::locking::qbsc_constant(), "possible": v.possible, "slack": v.slack}),
            )
        }
        Command::OtTradeoff(a) => {
            if a.sweep {
                let rows = (0..=20).map(|k| tradeoff_row(a, k as f64 * 0.05)).collect::<CliResult<Vec<_>>>()?;
                Ok(json!({ "rows": rows }))
            } else {
                tradeoff_row(a, a.r)
            }
        }
        Command::OtSim(a) => {
            let rot = RotParams::new(a.n, a.ell, seed)?;
            let setting = if a.p_erase > 0.0 || a.p_error > 0.0 {
                let code = match a.code {
                    CodeKind::Hamming74 => LinearCode::hamming74(),
                    CodeKind::Hamming84 => LinearCode::extended_hamming84(),
                    CodeKind::Repetition3 => LinearCode::repetition(3)?,
                };
                RotSetting::Practical(PracticalParams::new(rot, a.p_erase, a.p_error, code)?)
            } else {
                RotSetting::Perfect(rot)
            };
            let attack = match a.attack {
                AttackKind::None => Attack::None,
                AttackKind::Breidbart => Attack::Breidbart,
                AttackKind::Store => Attack::Store { r: a.r },
            };
            Ok(simulate_rot(&setting, attack, a.trials)?.to_json_value())
        }
        Command::RacBound { settings, outcomes, p } => {
            let b = rac_dimension_bound(*settings, *outcomes, *p)?;
            Ok(json!({"settings": settings, "outcomes": outcomes, "p": p, "bound_bits": b}))
        }
        Command::Suites => {
            let rows: Vec<Value> =
                SUITES.iter().map(|(n, r, m)| json!({"name": n, "result": r, "module": m})).collect();
            Ok(json!({ "rows": rows }))
        }
    }
}

/// 7 decimals for |v| ≥ 1, otherwise 7 significant digits.
fn round7(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    let s = if v.abs() >= 1.0 { format!("{v:.7}") } else { format!("{v:.6e}") };
    s.parse().unwrap_or(v)
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64() {
                *v = json!(round7(x));
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_value),
        Value::Object(m) => m.values_mut().for_each(round_value),
        _ => {}
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn rows_of(v: &Value) -> Vec<Map<String, Value>> {
    match v.get("rows").and_then(Value::as_array) {
        Some(rows) => rows.iter().filter_map(|r| r.as_object().cloned()).collect(),
        None => v.as_object().map(|m| vec![m.clone()]).unwrap_or_default(),
    }
}

fn render(v: &Value, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(v).expect("serializable") + "\n",
        Format::Csv => {
            let rows = rows_of(v);
            let Some(first) = rows.first() else { return String::new() };
            let keys: Vec<&String> = first.keys().filter(|k| !first[*k].is_array() && !first[*k].is_object()).collect();
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&keys).expect("in-memory write");
            for r in &rows {
                w.write_record(keys.iter().map(|k| scalar(r.get(*k).unwrap_or(&Value::Null))))
                    .expect("in-memory write");
            }
            String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
        }
        Format::Pretty => {
            let rows = rows_of(v);
            let mut out = String::new();
            for (i, r) in rows.iter().enumerate() {
                if i > 0 {
                    out.push('\n');
                }
                let width = r.keys().map(String::len).max().unwrap_or(0);
                for (k, val) in r {
                    let _ = writeln!(out, "{k:<width$}  {}", scalar(val));
                }
            }
            out
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(mut v) => {
            round_value(&mut v);
            let text = render(&v, cli.format);
            match &cli.output {
                Some(p) => {
                    if let Err(e) = fs::write(p, text) {
                        eprintln!("error: cannot write {}: {e}", p.display());
                        return ExitCode::from(2);
                    }
                }
                None => print!("{text}"),
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            match &e {
                CliError::Usage(m) => eprintln!("error: {m}"),
                CliError::Lib(l) => eprintln!("error: {l}"),
            }
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &CliError) -> u8 {
    match e {
        CliError::Lib(l) if l.is_numerical() => 3,
        _ => 2,
    }
}
