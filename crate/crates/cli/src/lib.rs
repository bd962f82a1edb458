//! Command line front end: argument parsing, config merging and dispatch.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::parser::ValueSource;
use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use heightlab::cf::{expand, ExpansionStatus};
use heightlab::error::Error;
use heightlab::experiments::{
    box_count_probe, critical_exponent, khintchine_experiment, min_split_experiment, series_diagnostic,
    RunConfig, DEFAULT_MIN_SPLIT_CAPS, DEFAULT_Q_MAX,
};
use heightlab::exponents::{c_estimate_with, omega_estimate_with, DEFAULT_WARMUP};
use heightlab::heights::{fs_exponent, height, log_height, HeightKind, HeightValue};
use heightlab::numerics::{
    parse_exact, parse_targets, RationalPoint, RealTarget, ReducedRational, DEFAULT_PRECISION_BITS,
};
use heightlab::search::{
    brute_force_best, fast_best, records, solutions_count, write_records_csv, DEFAULT_ENUM_CAP,
};
use num_rational::BigRational;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PRECISION: i32 = 3;
pub const EXIT_CAP: i32 = 4;
pub const EXIT_PREDICATE: i32 = 5;

const AFTER_HELP: &str = "\
Exit codes: 0 success, 1 other failure (I/O, insufficient data), 2 usage or domain error,
3 precision budget exhausted, 4 enumeration cap exceeded, 5 failed acceptance predicate.";

#[derive(Parser, Debug)]
#[command(
    name = "heightlab",
    version,
    about = "Diophantine approximation under generalized heights",
    after_help = AFTER_HELP,
    args_override_self = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Continued fraction expansion and convergent table of a target
    Cf(CfArgs),
    /// Heights of a rational point, or Dirichlet exponents for dimension d
    Heights(HeightsArgs),
    /// Best approximation, record chain or solution count under a height
    Approx(ApproxArgs),
    /// Exponent or approximation-constant trace along the record chain
    Exponent(ExponentArgs),
    /// Run an experiment (khintchine, box-count, min-split)
    Experiment(ExperimentArgs),
    /// Covering-series partial sums and convergence verdict
    Series(SeriesArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentName {
    Khintchine,
    BoxCount,
    MinSplit,
}

#[derive(Args, Debug)]
pub struct Common {
    /// Refinement budget for each target, in bits
    #[arg(long, value_name = "BITS", default_value_t = DEFAULT_PRECISION_BITS)]
    pub precision_bits: u32,
    /// Write output to this path instead of stdout
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// key=value file with defaults; explicit flags win
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CfArgs {
    /// Target (golden, sqrt2, e, liouville, dec:<x>, seed:<n>[:<coord>])
    #[arg(long, value_name = "TARGET")]
    pub target: String,
    /// Number of partial quotients
    #[arg(long, default_value_t = 10)]
    pub depth: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct HeightsArgs {
    /// Coordinate of the rational point (repeatable; exact dec:<x> targets)
    #[arg(long, value_name = "TARGET")]
    pub target: Vec<String>,
    /// Restrict to one height kind
    #[arg(long, visible_alias = "kind", value_name = "KIND", value_parser = parse_kind)]
    pub height: Option<HeightKind>,
    /// Print Dirichlet exponents for this dimension instead
    #[arg(long, value_name = "D")]
    pub d: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct ApproxArgs {
    /// Target coordinate (repeatable)
    #[arg(long, value_name = "TARGET", required = true)]
    pub target: Vec<String>,
    /// Height kind: max, min, prod, prodroot, lcm
    #[arg(long, visible_alias = "kind", value_name = "KIND", value_parser = parse_kind)]
    pub height: HeightKind,
    /// Height bound, an integer or <int>/<root> for a root of an integer
    #[arg(long, value_name = "B[/R]", value_parser = parse_height_value)]
    pub bound: Option<HeightValue>,
    /// Count points with |x - r| < H(r)^-tau and H(r) <= bound
    #[arg(long)]
    pub count: bool,
    /// Exponent for --count, as p/q
    #[arg(long, value_name = "P/Q", value_parser = parse_rational)]
    pub tau: Option<BigRational>,
    /// Print the record chain up to this height instead of one best point
    #[arg(long, value_name = "H", value_parser = parse_height_value)]
    pub cap: Option<HeightValue>,
    /// Use exhaustive enumeration for the best point
    #[arg(long)]
    pub brute: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct ExponentArgs {
    /// Target coordinate (repeatable)
    #[arg(long, value_name = "TARGET", required = true)]
    pub target: Vec<String>,
    /// Height kind
    #[arg(long, visible_alias = "kind", value_name = "KIND", value_parser = parse_kind)]
    pub height: HeightKind,
    /// Height cap for the record chain
    #[arg(long, value_name = "H", value_parser = parse_height_value)]
    pub cap: HeightValue,
    /// Trace |x - r| H(r)^tau instead of the exponent quotient
    #[arg(long, value_name = "P/Q", value_parser = parse_rational)]
    pub tau: Option<BigRational>,
    /// Records below this height are ignored by the estimate
    #[arg(long, default_value_t = DEFAULT_WARMUP)]
    pub warmup: u64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct ExperimentArgs {
    /// Experiment to run
    #[arg(value_enum, default_value_t = ExperimentName::Khintchine)]
    pub name: ExperimentName,
    /// Dimension
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Height kind
    #[arg(long, visible_alias = "kind", value_name = "KIND", value_parser = parse_kind, default_value = "max")]
    pub height: HeightKind,
    /// Number of trials
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    /// Base seed; trial i uses seed + i
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Height cap (khintchine) or comma-separated caps (min-split)
    #[arg(long, value_name = "H")]
    pub cap: Option<String>,
    /// Exponent (box-count, min-split)
    #[arg(long, value_name = "P/Q", value_parser = parse_rational)]
    pub tau: Option<BigRational>,
    /// Grid levels for box-count, as lo..hi
    #[arg(long, value_name = "LO..HI", default_value = "6..14")]
    pub levels: String,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct SeriesArgs {
    /// Height kind: max or prodroot
    #[arg(long, visible_alias = "kind", value_name = "KIND", value_parser = parse_kind)]
    pub height: HeightKind,
    /// Dimension
    #[arg(long)]
    pub d: usize,
    /// Exponent tau >= 2
    #[arg(long, value_name = "P/Q", value_parser = parse_rational)]
    pub tau: BigRational,
    /// Dimension parameter s > 0
    #[arg(long, value_name = "S", value_parser = parse_rational)]
    pub s: BigRational,
    /// Partial-sum cut-offs (repeatable)
    #[arg(long = "q-max", value_name = "Q")]
    pub q_max: Vec<u64>,
    #[command(flatten)]
    pub common: Common,
}

fn parse_kind(s: &str) -> Result<HeightKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_rational(s: &str) -> Result<BigRational, String> {
    parse_exact(s).map_err(|e| e.to_string())
}

/// Accepts "10^k", "1ek" and the height grammar "<int>[/<root>]".
fn parse_height_value(s: &str) -> Result<HeightValue, String> {
    let s = s.trim();
    let pow = s.split_once('^').or_else(|| s.split_once(['e', 'E']));
    if let Some((m, k)) = pow {
        let m: u64 = m.parse().map_err(|_| format!("bad height {s:?}"))?;
        let k: u32 = k.parse().map_err(|_| format!("bad height {s:?}"))?;
        let base = if s.contains('^') { m.checked_pow(k) } else { 10u64.checked_pow(k).and_then(|t| t.checked_mul(m)) };
        return base.map(HeightValue::integer).ok_or_else(|| format!("height {s:?} overflows"));
    }
    s.parse().map_err(|e: Error| e.to_string())
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Domain(_) | Error::Parse(_) | Error::UnboundedSearch(_) => EXIT_USAGE,
        Error::PrecisionExhausted(_) => EXIT_PRECISION,
        Error::CapExceeded(_) => EXIT_CAP,
        Error::InsufficientData(_) | Error::Io(_) => EXIT_FAILURE,
    }
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn dispatch<S: AsRef<str>>(argv: &[S], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let argv: Vec<String> = argv.iter().map(|s| s.as_ref().to_string()).collect();
    let cli = match parse_with_config(&argv) {
        Ok(c) => c,
        Err(Failure::Clap(e)) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if code == EXIT_OK {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
                if e.kind() == clap::error::ErrorKind::UnknownArgument {
                    let _ = write!(err, "\n{}", subcommand_help(&argv));
                }
            }
            return code;
        }
        Err(Failure::Config(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            return EXIT_USAGE;
        }
    };
    match run(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn subcommand_help(argv: &[String]) -> String {
    let mut root = Cli::command();
    let name = argv.get(1).cloned().unwrap_or_default();
    match root.find_subcommand_mut(&name) {
        Some(sub) => sub.clone().bin_name(format!("heightlab {name}")).render_help().to_string(),
        None => root.render_help().to_string(),
    }
}

/// Integers print without a denominator.
fn fmt_q(r: &ReducedRational) -> String {
    if r.denom() == &1.into() {
        r.numer().to_string()
    } else {
        r.to_string()
    }
}

enum Failure {
    Clap(clap::Error),
    Config(String),
}

fn read_config(path: &Path) -> Result<Vec<(String, String)>, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("config {}: {e}", path.display()))?;
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("config {} line {}: expected key=value", path.display(), i + 1))?;
        pairs.push((k.trim().replace('_', "-"), v.trim().to_string()));
    }
    Ok(pairs)
}

fn parse_with_config(argv: &[String]) -> Result<Cli, Failure> {
    let root = Cli::command();
    let strict = root.clone().try_get_matches_from(argv);
    let wants_config = argv.iter().any(|a| a == "--config" || a.starts_with("--config="));
    let matches = match strict {
        Ok(m) if !wants_config => return Cli::from_arg_matches(&m).map_err(Failure::Clap),
        Err(e) if !wants_config => return Err(Failure::Clap(e)),
        // required flags may come from the config file
        _ => root.clone().ignore_errors(true).try_get_matches_from(argv).map_err(Failure::Clap)?,
    };
    let Some((sub_name, sub_m)) = matches.subcommand() else {
        return Cli::try_parse_from(argv).map_err(Failure::Clap);
    };
    let Some(path) = sub_m.get_one::<PathBuf>("config") else {
        return Cli::try_parse_from(argv).map_err(Failure::Clap);
    };
    let sub_cmd = root.find_subcommand(sub_name).expect("known subcommand");
    let mut positional = Vec::new();
    let mut extra = Vec::new();
    for (key, value) in read_config(path).map_err(Failure::Config)? {
        let arg = sub_cmd
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()) || (a.is_positional() && a.get_id().as_str() == key))
            .ok_or_else(|| Failure::Config(format!("config key {key:?} is not an option of {sub_name}")))?;
        if key == "config" {
            return Err(Failure::Config("config files cannot include other config files".into()));
        }
        if sub_m.value_source(arg.get_id().as_str()) == Some(ValueSource::CommandLine) {
            continue;
        }
        if arg.is_positional() {
            positional.push(value);
        } else if !arg.get_action().takes_values() {
            if matches!(value.as_str(), "true" | "yes" | "1") {
                extra.push(format!("--{key}"));
            }
        } else {
            extra.push(format!("--{key}"));
            extra.push(value);
        }
    }
    let mut merged: Vec<String> = vec![argv[0].clone(), sub_name.to_string()];
    let rest = &argv[2..];
    // a positional value from the config goes first, unless one was given
    let has_positional = sub_cmd
        .get_arguments()
        .filter(|a| a.is_positional())
        .any(|a| sub_m.value_source(a.get_id().as_str()) == Some(ValueSource::CommandLine));
    if !has_positional {
        merged.extend(positional);
    }
    merged.extend(extra);
    merged.extend(rest.iter().cloned());
    Cli::try_parse_from(merged).map_err(Failure::Clap)
}

type Res = heightlab::Result<i32>;

fn emit(common: &Common, out: &mut dyn Write, f: impl FnOnce(&mut dyn Write) -> heightlab::Result<()>) -> heightlab::Result<()> {
    match &common.out {
        Some(p) => {
            let mut file = io::BufWriter::new(fs::File::create(p)?);
            f(&mut file)?;
            file.flush()?;
            Ok(())
        }
        None => f(out),
    }
}

fn json(w: &mut dyn Write, v: &impl serde::Serialize) -> heightlab::Result<()> {
    serde_json::to_writer_pretty(&mut *w, v)?;
    writeln!(w)?;
    Ok(())
}

fn csv_writer(w: &mut dyn Write) -> csv::Writer<&mut dyn Write> {
    csv::Writer::from_writer(w)
}

fn run(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Res {
    match cmd {
        Command::Cf(a) => run_cf(a, out, err),
        Command::Heights(a) => run_heights(a, out),
        Command::Approx(a) => run_approx(a, out, err),
        Command::Exponent(a) => run_exponent(a, out, err),
        Command::Experiment(a) => run_experiment(a, out, err),
        Command::Series(a) => run_series(a, out),
    }
}

fn run_cf(a: CfArgs, out: &mut dyn Write, err: &mut dyn Write) -> Res {
    let x = RealTarget::parse_with_budget(&a.target, a.common.precision_bits)?;
    let table = expand(&x, a.depth)?;
    emit(&a.common, out, |w| match a.common.format {
        Format::Csv => table.write_csv(w),
        Format::Json => json(w, &table),
    })?;
    if table.status == ExpansionStatus::BudgetExhausted {
        writeln!(err, "precision budget exhausted after {} partial quotients", table.len())?;
        return Ok(EXIT_PRECISION);
    }
    Ok(EXIT_OK)
}

fn run_heights(a: HeightsArgs, out: &mut dyn Write) -> Res {
    let kinds: Vec<HeightKind> = match a.height {
        Some(k) => vec![k],
        None => HeightKind::ALL.to_vec(),
    };
    if a.target.is_empty() {
        let Some(d) = a.d else {
            return Err(Error::Domain("heights needs --target coordinates or --d".into()));
        };
        let mut rows = Vec::new();
        for k in kinds {
            match fs_exponent(k, d) {
                Ok(iv) => {
                    let f = iv.to_f64();
                    rows.push(serde_json::json!({
                        "kind": k.name(), "d": d, "exponent_lo": f.lo, "exponent_hi": f.hi,
                    }));
                }
                Err(Error::Domain(_)) => continue,
                Err(e) => return Err(e),
            }
        }
        return emit(&a.common, out, |w| match a.common.format {
            Format::Json => json(w, &rows),
            Format::Csv => {
                let mut c = csv_writer(w);
                c.write_record(["kind", "d", "exponent_lo", "exponent_hi"])?;
                for r in &rows {
                    c.write_record([
                        r["kind"].as_str().unwrap_or_default().to_string(),
                        r["d"].to_string(),
                        r["exponent_lo"].to_string(),
                        r["exponent_hi"].to_string(),
                    ])?;
                }
                c.flush()?;
                Ok(())
            }
        })
        .map(|_| EXIT_OK);
    }
    let xs = parse_targets(&a.target, a.common.precision_bits)?;
    let coords = xs
        .iter()
        .map(|t| {
            t.exact_value()
                .cloned()
                .map(ReducedRational::from_ratio)
                .ok_or_else(|| Error::Domain(format!("heights needs rational coordinates, got {t}")))
        })
        .collect::<heightlab::Result<Vec<_>>>()?;
    let r = RationalPoint::new(coords);
    let rows: Vec<serde_json::Value> = kinds
        .iter()
        .map(|&k| {
            let h = height(&r, k);
            let l = log_height(&r, k);
            serde_json::json!({
                "point": r.to_string(), "kind": k.name(), "height": h.to_string(),
                "log_height_lo": l.lo, "log_height_hi": l.hi,
            })
        })
        .collect();
    emit(&a.common, out, |w| match a.common.format {
        Format::Json => json(w, &rows),
        Format::Csv => {
            let mut c = csv_writer(w);
            c.write_record(["point", "kind", "height", "log_height_lo", "log_height_hi"])?;
            for r in &rows {
                c.write_record(["point", "kind", "height"].map(|k| r[k].as_str().unwrap_or_default().to_string()).into_iter().chain(
                    ["log_height_lo", "log_height_hi"].map(|k| r[k].to_string()),
                ))?;
            }
            c.flush()?;
            Ok(())
        }
    })?;
    Ok(EXIT_OK)
}

fn run_approx(a: ApproxArgs, out: &mut dyn Write, err: &mut dyn Write) -> Res {
    let x = parse_targets(&a.target, a.common.precision_bits)?;
    if a.count {
        let tau = a.tau.ok_or_else(|| Error::Domain("--count needs --tau".into()))?;
        let bound = a.bound.ok_or_else(|| Error::Domain("--count needs --bound".into()))?;
        let c = solutions_count(&x, a.height, &tau, &bound)?;
        emit(&a.common, out, |w| match a.common.format {
            Format::Json => json(w, &c),
            Format::Csv => {
                let mut cw = csv_writer(w);
                cw.write_record(["count", "exact"])?;
                cw.write_record([c.count.to_string(), c.exact.to_string()])?;
                cw.flush()?;
                Ok(())
            }
        })?;
        return Ok(EXIT_OK);
    }
    if a.height == HeightKind::Min {
        writeln!(
            err,
            "error: the min height has no finite best approximation (one denominator is free); \
             use --count with --tau to count solutions instead"
        )?;
        return Ok(EXIT_USAGE);
    }
    if let Some(cap) = a.cap {
        let recs = records(&x, a.height, &cap)?;
        emit(&a.common, out, |w| match a.common.format {
            Format::Json => json(w, &recs),
            Format::Csv => write_records_csv(&recs, w),
        })?;
        return Ok(EXIT_OK);
    }
    let bound = a.bound.ok_or_else(|| Error::Domain("approx needs --bound, --cap or --count".into()))?;
    let best = if a.brute { brute_force_best(&x, a.height, &bound)? } else { fast_best(&x, a.height, &bound)? };
    emit(&a.common, out, |w| match a.common.format {
        Format::Json => json(w, &best),
        Format::Csv => write_records_csv(std::slice::from_ref(&best), w),
    })?;
    Ok(EXIT_OK)
}

fn run_exponent(a: ExponentArgs, out: &mut dyn Write, err: &mut dyn Write) -> Res {
    let x = parse_targets(&a.target, a.common.precision_bits)?;
    if let Some(tau) = a.tau {
        let t = c_estimate_with(&x, a.height, &tau, &a.cap, a.warmup)?;
        emit(&a.common, out, |w| match a.common.format {
            Format::Json => json(w, &t),
            Format::Csv => t.write_csv(w),
        })?;
        writeln!(err, "constant estimate [{:.9e}, {:.9e}]", t.estimate.lo, t.estimate.hi)?;
        return Ok(EXIT_OK);
    }
    let t = omega_estimate_with(&x, a.height, &a.cap, a.warmup)?;
    emit(&a.common, out, |w| match a.common.format {
        Format::Json => json(w, &t),
        Format::Csv => t.write_csv(w),
    })?;
    writeln!(err, "exponent estimate [{:.9}, {:.9}]", t.estimate.lo, t.estimate.hi)?;
    Ok(EXIT_OK)
}

fn parse_levels(s: &str) -> heightlab::Result<Vec<u32>> {
    let bad = || Error::Parse(format!("levels {s:?}: expected lo..hi"));
    let (lo, hi) = s.split_once("..").ok_or_else(bad)?;
    let lo: u32 = lo.trim().parse().map_err(|_| bad())?;
    let hi: u32 = hi.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
    Ok((lo..=hi).collect())
}

fn parse_cap_list(s: &str) -> heightlab::Result<Vec<u64>> {
    s.split(',')
        .map(|c| {
            let h = parse_height_value(c).map_err(Error::Parse)?;
            if h.root() != 1 {
                return Err(Error::Parse(format!("cap {c:?} must be an integer")));
            }
            h.base().try_into().map_err(|_| Error::Parse(format!("cap {c:?} too large")))
        })
        .collect()
}

fn run_experiment(a: ExperimentArgs, out: &mut dyn Write, err: &mut dyn Write) -> Res {
    match a.name {
        ExperimentName::Khintchine => {
            let cap = match &a.cap {
                Some(c) => parse_height_value(c).map_err(Error::Parse)?,
                None => HeightValue::integer(1_000_000),
            };
            let cfg = RunConfig {
                experiment: "khintchine".into(),
                d: a.d,
                kind: a.height,
                tau: None,
                base_seed: a.seed,
                trials: a.trials,
                height_cap: cap,
                precision_bits: a.common.precision_bits,
                enum_cap: DEFAULT_ENUM_CAP,
                warmup: DEFAULT_WARMUP,
                out: a.common.out.clone(),
            };
            let r = khintchine_experiment(&cfg)?;
            match (a.common.format, &a.common.out) {
                (_, Some(p)) => writeln!(out, "wrote {}", p.display())?,
                (Format::Json, None) => json(out, &r)?,
                (Format::Csv, None) => {
                    let mut c = csv_writer(out);
                    c.write_record(["index", "seed", "status", "estimate", "estimate_lo", "estimate_hi", "running_max", "records"])?;
                    for t in &r.trials {
                        let f = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
                        c.write_record([
                            t.index.to_string(),
                            t.seed.to_string(),
                            t.status.clone(),
                            f(t.estimate),
                            f(t.estimate_lo),
                            f(t.estimate_hi),
                            f(t.running_max),
                            t.records.to_string(),
                        ])?;
                    }
                    c.flush()?;
                }
            }
            for p in &r.predicates {
                writeln!(err, "{} {}: {}", if p.passed { "PASS" } else { "FAIL" }, p.name, p.detail)?;
            }
            Ok(if r.passed() { EXIT_OK } else { EXIT_PREDICATE })
        }
        ExperimentName::BoxCount => {
            let tau = a.tau.unwrap_or_else(|| BigRational::from_integer(4.into()));
            let levels = parse_levels(&a.levels)?;
            let b = box_count_probe(a.height, &tau, a.d, &levels)?;
            emit(&a.common, out, |w| match a.common.format {
                Format::Json => json(w, &b),
                Format::Csv => {
                    let mut c = csv_writer(w);
                    c.write_record(["level", "centers", "count", "skipped"])?;
                    for l in &b.levels {
                        c.write_record([l.level.to_string(), l.centers.to_string(), l.count.to_string(), l.skipped.to_string()])?;
                    }
                    c.flush()?;
                    Ok(())
                }
            })?;
            let target = critical_exponent(a.d, &tau)?;
            let t = ReducedRational::from_ratio(target).to_f64();
            let ok = (b.slope - t).abs() <= 0.3;
            writeln!(
                err,
                "{} slope {:.4} (residual {:.4}), expected {t} +/- 0.3",
                if ok { "PASS" } else { "FAIL" },
                b.slope,
                b.residual
            )?;
            Ok(if ok { EXIT_OK } else { EXIT_PREDICATE })
        }
        ExperimentName::MinSplit => {
            let tau = a.tau.unwrap_or_else(|| BigRational::from_integer(5.into()));
            let caps = match &a.cap {
                Some(c) => parse_cap_list(c)?,
                None => DEFAULT_MIN_SPLIT_CAPS.to_vec(),
            };
            let m = min_split_experiment(&tau, &caps)?;
            emit(&a.common, out, |w| match a.common.format {
                Format::Json => json(w, &m),
                Format::Csv => {
                    let mut c = csv_writer(w);
                    c.write_record(["label", "targets", "cap", "count", "exact", "growth", "predicted"])?;
                    for r in &m.rows {
                        for (i, cap) in m.caps.iter().enumerate() {
                            c.write_record([
                                r.label.clone(),
                                r.targets.join(" "),
                                cap.to_string(),
                                r.counts[i].to_string(),
                                r.exact[i].to_string(),
                                format!("{:?}", r.growth).to_lowercase(),
                                format!("{:?}", r.predicted).to_lowercase(),
                            ])?;
                        }
                    }
                    c.flush()?;
                    Ok(())
                }
            })?;
            for r in &m.rows {
                writeln!(
                    err,
                    "{} {}: counts {:?}, {:?} (predicted {:?})",
                    if r.passed() { "PASS" } else { "FAIL" },
                    r.label,
                    r.counts,
                    r.growth,
                    r.predicted
                )?;
            }
            Ok(if m.passed() { EXIT_OK } else { EXIT_PREDICATE })
        }
    }
}

fn run_series(a: SeriesArgs, out: &mut dyn Write) -> Res {
    let qs = if a.q_max.is_empty() { DEFAULT_Q_MAX.to_vec() } else { a.q_max.clone() };
    let r = series_diagnostic(a.height, a.d, &a.tau, &a.s, &qs)?;
    emit(&a.common, out, |w| match a.common.format {
        Format::Json => json(w, &r),
        Format::Csv => {
            let mut c = csv_writer(w);
            c.write_record(["kind", "d", "tau", "s", "exponent", "critical_exponent", "verdict", "q_max", "partial_sum"])?;
            for p in &r.partial_sums {
                c.write_record([
                    r.kind.name().to_string(),
                    r.d.to_string(),
                    fmt_q(&r.tau),
                    fmt_q(&r.s),
                    fmt_q(&r.exponent),
                    fmt_q(&r.critical_exponent),
                    r.verdict.to_string(),
                    p.q_max.to_string(),
                    format!("{:.12e}", p.sum),
                ])?;
            }
            c.flush()?;
            Ok(())
        }
    })?;
    Ok(EXIT_OK)
}
