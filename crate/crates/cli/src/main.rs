use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use etaforge::analytic::{multiplier_fixtures, MultiplierEstimator, UnimodularMatrix};
use etaforge::characters::eta_chi_level;
use etaforge::cusps::{eta_chi_order_table, order_rows, valence_sum};
use etaforge::decompose::{sturm_bound, DecompositionProblem, Decomposer};
use etaforge::eisenstein::{e2_series, e2t_series};
use etaforge::eta::{eta_chi_series, eta_series, expand_quotient};
use etaforge::verify::{self, Suite};
use etaforge::{Complex64, CycSeries, DirChar, Error, EtaQuotientExpr};
use serde::Serialize;

const EXIT_HELP: &str = "\
Exit status:
  0  success (decompose: certified; verify: all checks pass)
  1  decomposition not certified, or a verification check failed
  2  usage error (bad flags or arguments)
  3  input file could not be read
  4  malformed descriptor, series or quotient file
  5  precondition failed (precision too low, non-real character, weight mismatch, ...)

Environment:
  ETAFORGE_PREC_DEFAULT  default for --prec (integer, 120 if unset)";

#[derive(Parser, Debug)]
#[command(name = "etaforge", version, about = "Generalized Dedekind eta functions and eta-quotient decomposition", after_help = EXIT_HELP)]
struct Cli {
    /// Print machine-readable JSON.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Expand a series to a given precision.
    Expand(ExpandArgs),
    /// Orders of eta_chi at the cusps of Gamma_0(u^2).
    Orders {
        /// Real primitive character descriptor, e.g. kronecker:3 or psi4.
        #[arg(long = "char")]
        chi: String,
    },
    /// Write a q-expansion as an (generalized) eta-quotient.
    Decompose(DecomposeArgs),
    /// Run a verification suite.
    Verify {
        #[arg(value_enum)]
        suite: SuiteArg,
    },
    /// Estimate multipliers f(gamma tau) / f(tau) of a weight-0 quotient.
    Multiplier(MultiplierArgs),
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Object {
    Eta,
    EtaChi,
    E2,
    E2t,
    Quotient,
}

#[derive(Args, Debug)]
struct ExpandArgs {
    #[arg(value_enum)]
    object: Object,
    /// Number of coefficients.
    #[arg(long)]
    prec: Option<usize>,
    /// Character for eta-chi.
    #[arg(long = "char")]
    chi: Option<String>,
    /// First character of E_2^{psi,phi}.
    #[arg(long)]
    psi: Option<String>,
    /// Second character of E_2^{psi,phi}.
    #[arg(long)]
    phi: Option<String>,
    /// Level t of E_{2,t} = E_2 - t E_2|V_t.
    #[arg(long)]
    t: Option<u64>,
    /// Quotient JSON file.
    #[arg(long)]
    file: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(group = clap::ArgGroup::new("input").required(true).args(["series", "quotient"]))]
struct DecomposeArgs {
    #[arg(long)]
    level: u64,
    #[arg(long, default_value_t = 0)]
    weight: i64,
    /// QSeries JSON file.
    #[arg(long)]
    series: Option<PathBuf>,
    /// Quotient JSON file, expanded to --prec before decomposing.
    #[arg(long)]
    quotient: Option<PathBuf>,
    #[arg(long)]
    prec: Option<usize>,
}

#[derive(Args, Debug)]
#[command(group = clap::ArgGroup::new("input").required(true).args(["chi", "quotient"]))]
struct MultiplierArgs {
    /// Use eta_chi on Gamma_0(u^2).
    #[arg(long = "char")]
    chi: Option<String>,
    /// Quotient JSON file.
    #[arg(long)]
    quotient: Option<PathBuf>,
    /// Matrix a,b,c,d; defaults to the fixture generators of the level.
    #[arg(long, value_parser = parse_matrix, allow_hyphen_values = true)]
    gamma: Option<UnimodularMatrix>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum SuiteArg {
    Lemma1,
    Lemma2,
    Lemma3,
    Basis,
    Multiplier,
    Valence,
}

impl SuiteArg {
    fn suite(self) -> Suite {
        let name = self.to_possible_value().expect("no skipped variants");
        Suite::from_str(name.get_name()).expect("suite names agree")
    }
}

fn parse_matrix(s: &str) -> Result<UnimodularMatrix, String> {
    let v: Vec<i64> = s
        .split(',')
        .map(|x| x.trim().parse::<i64>().map_err(|e| format!("{x:?}: {e}")))
        .collect::<Result<_, _>>()?;
    if v.len() != 4 {
        return Err("expected a,b,c,d".into());
    }
    UnimodularMatrix::new(v[0], v[1], v[2], v[3]).map_err(|e| e.to_string())
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Io(PathBuf, std::io::Error),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Io(..) => 3,
            Failure::Core(Error::Parse(_) | Error::Descriptor(_) | Error::InconsistentCharacter(_)) => 4,
            Failure::Core(_) => 5,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "{m}"),
            Failure::Io(p, e) => write!(f, "{}: {e}", p.display()),
            Failure::Core(e) => write!(f, "{e}"),
        }
    }
}

type Outcome = Result<bool, Failure>;

fn default_precision() -> Result<usize, Failure> {
    match std::env::var("ETAFORGE_PREC_DEFAULT") {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("ETAFORGE_PREC_DEFAULT={s:?} is not an integer"))),
        Err(_) => Ok(120),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(path.to_path_buf(), e))
}

fn character(s: &str) -> Result<DirChar, Failure> {
    Ok(DirChar::from_descriptor(s)?)
}

macro_rules! outln {
    ($out:expr, $($arg:tt)*) => {{
        use std::fmt::Write as _;
        writeln!($out, $($arg)*).expect("writing to a String")
    }};
}

fn print_json<T: Serialize>(out: &mut String, v: &T) {
    outln!(out, "{}", serde_json::to_string(v).expect("serializable output"));
}

fn print_series(out: &mut String, f: &CycSeries, json: bool) {
    if json {
        outln!(out, "{}", f.to_json_string());
        return;
    }
    outln!(out, "leading exponent {}, precision {}", f.leading_exponent(), f.precision());
    for (n, c) in f.coeffs().iter().enumerate() {
        outln!(out, "q^{n:<4} {c}");
    }
}

fn expand(a: &ExpandArgs, json: bool, out: &mut String) -> Outcome {
    let prec = match a.prec {
        Some(p) => p,
        None => default_precision()?,
    };
    let need = |v: &Option<String>, flag: &str| {
        v.as_deref()
            .ok_or_else(|| Failure::Usage(format!("--{flag} is required for this object")))
            .and_then(character)
    };
    let f = match a.object {
        Object::Eta => eta_series(prec),
        Object::EtaChi => eta_chi_series(&need(&a.chi, "char")?, prec)?,
        Object::E2 => e2_series(&need(&a.psi, "psi")?, &need(&a.phi, "phi")?, prec).series,
        Object::E2t => {
            let t = a.t.ok_or_else(|| Failure::Usage("--t is required for e2t".into()))?;
            e2t_series(t, prec)?
        }
        Object::Quotient => {
            let path = a
                .file
                .as_ref()
                .ok_or_else(|| Failure::Usage("--file is required for quotient".into()))?;
            expand_quotient(&EtaQuotientExpr::from_json_str(&read(path)?)?, prec)?
        }
    };
    print_series(out, &f, json);
    Ok(true)
}

#[derive(Serialize)]
struct OrdersJson {
    character: String,
    level: u64,
    valence_sum: i64,
    cusps: Vec<etaforge::cusps::CuspOrderRow>,
}

fn orders(chi: &str, json: bool, out: &mut String) -> Outcome {
    let chi = character(chi)?;
    let table = eta_chi_order_table(&chi)?;
    let rows = order_rows(&table);
    let level = eta_chi_level(&chi);
    if json {
        print_json(out, &OrdersJson {
            character: chi.descriptor(),
            level,
            valence_sum: valence_sum(&table),
            cusps: rows,
        });
        return Ok(true);
    }
    outln!(out, "eta_chi for {} on Gamma_0({level})", chi.descriptor());
    let w = rows.iter().map(|r| r.cusp.len()).max().unwrap_or(0).max(4);
    outln!(out, "{:>w$}  {:>5}  {:>6}", "cusp", "width", "order");
    for r in &rows {
        outln!(out, "{:>w$}  {:>5}  {:>6}", r.cusp, r.width, r.order);
    }
    outln!(out, "valence sum {}", valence_sum(&table));
    Ok(true)
}

fn decompose(a: &DecomposeArgs, json: bool, out: &mut String) -> Outcome {
    let input = if let Some(path) = &a.series {
        CycSeries::from_json_str(&read(path)?)?
    } else {
        let path = a.quotient.as_ref().expect("clap enforces one input");
        let e = EtaQuotientExpr::from_json_str(&read(path)?)?;
        let prec = match a.prec {
            Some(p) => p,
            None => default_precision()?.max(sturm_bound(a.level) + 10),
        };
        expand_quotient(&e, prec)?
    };
    let p = DecompositionProblem::new(a.level, a.weight, input)?;
    let r = Decomposer::new().decompose(&p)?;
    if json {
        print_json(out, &r.to_json(a.weight));
        return Ok(r.certified);
    }
    outln!(out, "level {} ({}), weight {}", a.level, r.class, a.weight);
    outln!(out, "constant {}", r.expr.constant);
    for (k, x) in &r.expr.terms {
        outln!(out, "  t = {:<4} {:<16} {}", k.t, k.chi, x);
    }
    if r.raw != r.expr {
        outln!(out, "exponents of f^12 / Delta^{}:", a.weight);
        for (k, x) in &r.raw.terms {
            outln!(out, "  t = {:<4} {:<16} {}", k.t, k.chi, x);
        }
    }
    outln!(out, "rank {} of {} columns", r.rank, r.columns);
    match r.first_nonzero_residual {
        None => outln!(out, "residual zero through q^{}", r.residual.precision().saturating_sub(1)),
        Some(i) => outln!(out, "residual nonzero, first at q^{i}"),
    }
    outln!(out, "{}", if r.certified { "certified" } else { "not certified" });
    Ok(r.certified)
}

fn run_verify(s: SuiteArg, json: bool, out: &mut String) -> Outcome {
    let report = verify::run(s.suite())?;
    if json {
        print_json(out, &report);
    } else {
        outln!(out, "{report}");
    }
    Ok(report.passed())
}

#[derive(Serialize)]
struct MultiplierRow {
    gamma: [i64; 4],
    tau: [String; 2],
    nu: [String; 2],
    deviation: String,
}

fn multiplier(a: &MultiplierArgs, json: bool, out: &mut String) -> Outcome {
    let e = if let Some(path) = &a.quotient {
        EtaQuotientExpr::from_json_str(&read(path)?)?
    } else {
        let chi = character(a.chi.as_deref().expect("clap enforces one input"))?;
        EtaQuotientExpr::new(eta_chi_level(&chi)).with_term(1, &chi, 1)
    };
    let gammas = match &a.gamma {
        Some(g) => vec![*g],
        None => multiplier_fixtures(e.level),
    };
    let mut est = MultiplierEstimator::<f64>::default();
    let mut rows = Vec::new();
    for g in &gammas {
        if !g.in_gamma0(e.level) {
            return Err(Error::Precondition(format!("{g:?} is not in Gamma_0({})", e.level)).into());
        }
        let tau: Complex64 = etaforge::analytic::default_point(g);
        let nu = est.estimate(&e, g, tau)?;
        let dev = (nu.powi(12) - Complex64::new(1.0, 0.0)).norm();
        rows.push(MultiplierRow {
            gamma: [g.a, g.b, g.c, g.d],
            tau: [format!("{:.16e}", tau.re), format!("{:.16e}", tau.im)],
            nu: [format!("{:.16e}", nu.re), format!("{:.16e}", nu.im)],
            deviation: format!("{dev:.16e}"),
        });
    }
    if json {
        print_json(out, &rows);
    } else {
        for r in &rows {
            outln!(out, 
                "gamma [[{}, {}], [{}, {}]]  nu = ({}, {})  |nu^12 - 1| = {}",
                r.gamma[0], r.gamma[1], r.gamma[2], r.gamma[3], r.nu[0], r.nu[1], r.deviation
            );
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = String::new();
    let outcome = match &cli.command {
        Command::Expand(a) => expand(a, cli.json, &mut out),
        Command::Orders { chi } => orders(chi, cli.json, &mut out),
        Command::Decompose(a) => decompose(a, cli.json, &mut out),
        Command::Verify { suite } => run_verify(*suite, cli.json, &mut out),
        Command::Multiplier(a) => multiplier(a, cli.json, &mut out),
    };
    // a closed pipe downstream is not an error of ours
    let _ = std::io::stdout().lock().write_all(out.as_bytes());
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("etaforge: {f}");
            ExitCode::from(f.code())
        }
    }
}
