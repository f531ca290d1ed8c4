//! Command-line front end: key=value configuration, the six subcommands, exit codes.
//!
//! Settings come from built-in defaults, then an optional `--config` file of
//! key=value lines ('#' starts a comment), then `--key=value` flags. Every output
//! embeds the resolved configuration and the library version.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::str::FromStr;

use clap::{Arg, ArgAction, Command};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rug::Rational;
use serde::Serialize;
use serde_json::json;

use crate::arith::{parse_rational_literal, ArithError, ExactReal, Precision, QuadraticSurd, Theta};
use crate::cantor::{bv4_check, dim_lower_bound, CantorError, CantorSchedule};
use crate::construction::{
    derive_params, extract_witness, run, Checkpoint, ConstructionError, Manifest, Mode, Overrides, Params, RunOptions,
};
use crate::geometry::{check_duality_line, check_duality_point, random_line_instance, random_point_instance};
use crate::oracle::{scan_grid, verify_witness};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXIT_OK: i32 = 0;
/// a check ran and did not pass (verify, check-schedule)
pub const EXIT_FAILED_CHECK: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_EXTINCTION: i32 = 3;
pub const EXIT_PRECISION: i32 = 4;
pub const EXIT_VIOLATION: i32 = 5;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError { code: EXIT_CONFIG, message: msg.into() }
}

impl From<ConstructionError> for CliError {
    fn from(e: ConstructionError) -> Self {
        let code = if e.is_precision() {
            EXIT_PRECISION
        } else {
            match &e {
                ConstructionError::InvalidParams(_) | ConstructionError::Budget(_) | ConstructionError::Checkpoint(_) => {
                    EXIT_CONFIG
                }
                ConstructionError::Extinction { .. } => EXIT_EXTINCTION,
                ConstructionError::Violation(_) => EXIT_VIOLATION,
                _ => 1,
            }
        };
        CliError { code, message: e.to_string() }
    }
}

impl From<CantorError> for CliError {
    fn from(e: CantorError) -> Self {
        let code = match &e {
            CantorError::Arith(ArithError::PrecisionExhausted { .. }) => EXIT_PRECISION,
            _ => EXIT_CONFIG,
        };
        CliError { code, message: e.to_string() }
    }
}

struct Key {
    name: &'static str,
    default: Option<&'static str>,
    help: &'static str,
}

const fn key(name: &'static str, default: Option<&'static str>, help: &'static str) -> Key {
    Key { name, default, help }
}

const COMMON: &[Key] = &[
    key("output", Some("-"), "output path, '-' for stdout"),
    key("threads", Some("0"), "worker threads, 0 for one per core"),
    key("precision_cap", Some("4096"), "largest working precision in bits"),
];

const PARAMS: &[Key] = &[
    key("theta", None, "quadratic irrational, e.g. (1+sqrt(5))/2"),
    key("mode", Some("proof"), "proof or exploration"),
    key("R", None, "base branching number; derived in proof mode when absent"),
    key("c", None, "override for c (rational)"),
    key("c1", None, "override for c1 (rational)"),
];

const CONSTRUCT: &[Key] = &[
    key("theta", None, "quadratic irrational"),
    key("mode", Some("exploration"), "proof or exploration"),
    key("R", Some("16"), "base branching number"),
    key("c", None, "override for c (rational)"),
    key("c1", None, "override for c1 (rational)"),
    key("beam_width", Some("8"), "surviving intervals kept per level"),
    key("depth", Some("12"), "number of levels"),
    key("audit", Some("true"), "run the block and case audits"),
    key("max_children", Some("50000000"), "abort a level with more children than this"),
    key("checkpoint", None, "write a resumable checkpoint here after every level"),
    key("resume", None, "resume from this checkpoint"),
    key("dump", None, "JSON-lines file for the danger intervals on extinction"),
];

const VERIFY: &[Key] = &[
    key("witness", None, "construct manifest to read the witness (and defaults) from"),
    key("theta", None, "quadratic irrational; defaults to the manifest's"),
    key("lo", None, "witness left end (rational)"),
    key("hi", None, "witness right end (rational)"),
    key("c", None, "threshold; defaults to the manifest's c"),
    key("N", Some("1000000"), "largest q"),
    key("Amax", Some("1000"), "largest |A|"),
    key("Bmax", Some("1000"), "largest |B|"),
];

const SCAN: &[Key] = &[
    key("x_lo", None, "left end of the x range (surd literal)"),
    key("x_hi", None, "right end of the x range"),
    key("y_lo", None, "left end of the y range"),
    key("y_hi", None, "right end of the y range"),
    key("resolution", Some("10"), "nodes per axis"),
    key("N", Some("1000"), "largest q"),
];

const CHECK_SCHEDULE: &[Key] = &[
    key("R", Some("128"), "base branching number"),
    key("n_min", Some("3"), "first n checked"),
    key("n_max", Some("100000"), "last n checked"),
    key("rows", Some("false"), "include every per-n row"),
];

const DUALITY: &[Key] = &[
    key("theta", Some("(1+sqrt(5))/2"), "quadratic irrational"),
    key("trials", Some("10000"), "instances of each kind"),
    key("seed", Some("1"), "RNG seed"),
];

const COMMANDS: &[(&str, &str, &[Key])] = &[
    ("params", "derive and print the construction constants", PARAMS),
    ("construct", "run the beam construction and emit a manifest", CONSTRUCT),
    ("verify", "finite-range margins of a witness midpoint", VERIFY),
    ("scan", "point margins on a grid, as CSV", SCAN),
    ("check-schedule", "certify the weighted sum inequality for the growing schedule", CHECK_SCHEDULE),
    ("duality", "randomized checks of the point and line duality statements", DUALITY),
];

fn keys_of(cmd: &str) -> Vec<&'static Key> {
    let own = COMMANDS.iter().find(|(n, _, _)| *n == cmd).map(|(_, _, k)| *k).unwrap_or(&[]);
    own.iter().chain(COMMON.iter()).collect()
}

/// Resolved key=value settings for one command.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub command: String,
    pub values: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn get(&self, k: &str) -> Option<&str> {
        self.values.get(k).map(String::as_str)
    }

    fn req(&self, k: &str) -> Result<&str, CliError> {
        self.get(k).ok_or_else(|| config_err(format!("missing required key {k}")))
    }

    fn parse<T: FromStr>(&self, k: &str) -> Result<T, CliError>
    where
        T::Err: fmt::Display,
    {
        let v = self.req(k)?;
        v.parse().map_err(|e| config_err(format!("bad value for {k}: {v:?} ({e})")))
    }

    fn parse_opt<T: FromStr>(&self, k: &str) -> Result<Option<T>, CliError>
    where
        T::Err: fmt::Display,
    {
        self.get(k).map(|_| self.parse(k)).transpose()
    }

    fn rational(&self, k: &str) -> Result<Option<Rational>, CliError> {
        self.get(k)
            .map(|v| parse_rational_literal(v).map_err(|e| config_err(format!("bad value for {k}: {e}"))))
            .transpose()
    }

    fn precision(&self) -> Result<Precision, CliError> {
        Ok(Precision::with_cap(self.parse("precision_cap")?))
    }
}

/// Parses a key=value file; blank lines and '#' comments are skipped.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| config_err(format!("config line {}: expected key=value", i + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Merges defaults, a config file and flags; unknown keys are rejected.
pub fn resolve(
    command: &str,
    file: &[(String, String)],
    flags: &[(String, String)],
) -> Result<RunConfig, CliError> {
    let keys = keys_of(command);
    let mut values = BTreeMap::new();
    for k in &keys {
        if let Some(d) = k.default {
            values.insert(k.name.to_string(), d.to_string());
        }
    }
    for (k, v) in file.iter().chain(flags) {
        if !keys.iter().any(|x| x.name == k) {
            return Err(config_err(format!("unknown key {k:?} for {command}")));
        }
        values.insert(k.clone(), v.clone());
    }
    Ok(RunConfig { command: command.to_string(), values })
}

fn cli() -> Command {
    let mut top = Command::new("madcantor")
        .version(VERSION)
        .about("Cantor constructions on a vertical line, schedule certificates and brute-force oracles")
        .subcommand_required(true)
        .arg_required_else_help(true);
    for (name, about, _) in COMMANDS {
        let mut sub = Command::new(*name).about(*about).arg(
            Arg::new("config").long("config").value_name("PATH").help("key=value file, '#' comments"),
        );
        for k in keys_of(name) {
            let mut a = Arg::new(k.name).long(k.name).value_name("VALUE").help(k.help).action(ArgAction::Set);
            if let Some(d) = k.default {
                a = a.help(format!("{} [default: {d}]", k.help));
            }
            sub = sub.arg(a);
        }
        top = top.subcommand(sub);
    }
    top
}

/// Parses argv into a resolved configuration.
pub fn config_from_args<I, T>(args: I) -> Result<RunConfig, Result<String, CliError>>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let m = cli().try_get_matches_from(args).map_err(|e| {
        use clap::error::ErrorKind;
        match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Ok(e.to_string()),
            _ => Err(config_err(e.to_string())),
        }
    })?;
    let (name, sub) = m.subcommand().expect("subcommand required");
    let file = match sub.get_one::<String>("config") {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Err(config_err(format!("cannot read {path}: {e}"))))?;
            parse_config_text(&text).map_err(Err)?
        }
        None => Vec::new(),
    };
    let flags: Vec<(String, String)> = keys_of(name)
        .iter()
        .filter_map(|k| sub.get_one::<String>(k.name).map(|v| (k.name.to_string(), v.clone())))
        .collect();
    resolve(name, &file, &flags).map_err(Err)
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    version: &'static str,
    command: &'a str,
    config: &'a BTreeMap<String, String>,
    result: T,
}

fn envelope<T: Serialize>(cfg: &RunConfig, result: T) -> String {
    let e = Envelope { version: VERSION, command: &cfg.command, config: &cfg.values, result };
    serde_json::to_string_pretty(&e).expect("plain data") + "\n"
}

fn write_file(path: &str, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| config_err(format!("cannot write {path}: {e}")))
}

fn theta_from(s: &str) -> Result<Theta, CliError> {
    let surd = QuadraticSurd::from_str(s).map_err(|e| config_err(format!("bad theta: {e}")))?;
    Ok(Theta::new(surd))
}

fn params_from(cfg: &RunConfig) -> Result<Params, CliError> {
    let theta = theta_from(cfg.req("theta")?)?;
    let mode: Mode = cfg.parse("mode")?;
    let r = cfg.parse_opt::<u64>("R")?;
    let ov = Overrides { c: cfg.rational("c")?, c1: cfg.rational("c1")? };
    Ok(derive_params(theta, r, mode, &ov, cfg.precision()?)?)
}

/// Output text and exit code of a finished command.
#[derive(Debug)]
pub struct Outcome {
    pub text: String,
    pub code: i32,
}

pub fn cmd_params(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = params_from(cfg)?;
    Ok(Outcome { text: envelope(cfg, p.to_json()), code: EXIT_OK })
}

pub fn cmd_construct(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let params = params_from(cfg)?;
    let opts = RunOptions {
        beam_width: cfg.parse("beam_width")?,
        depth: cfg.parse("depth")?,
        audit: cfg.parse("audit")?,
        max_children: cfg.parse("max_children")?,
    };
    if opts.beam_width == 0 {
        return Err(config_err("beam_width must be positive"));
    }
    let resume = match cfg.get("resume") {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| config_err(format!("cannot read {path}: {e}")))?;
            let v: serde_json::Value =
                serde_json::from_str(&text).map_err(|e| config_err(format!("bad checkpoint {path}: {e}")))?;
            let cp: Checkpoint = serde_json::from_value(v.get("checkpoint").cloned().unwrap_or(v))
                .map_err(|e| config_err(format!("bad checkpoint {path}: {e}")))?;
            let b = cp.into_branch(&params)?;
            if b.depth > opts.depth {
                return Err(config_err(format!("checkpoint depth {} exceeds depth {}", b.depth, opts.depth)));
            }
            Some(b)
        }
        None => None,
    };
    let cp_path = cfg.get("checkpoint").map(str::to_string);
    let on_level = |b: &crate::construction::Branch| -> Result<(), ConstructionError> {
        if let Some(path) = &cp_path {
            let text = serde_json::to_string(&json!({
                "version": VERSION,
                "config": cfg.values,
                "checkpoint": Checkpoint::of(b, &params),
            }))
            .expect("plain data");
            fs::write(path, text).map_err(|e| ConstructionError::Checkpoint(format!("cannot write {path}: {e}")))?;
        }
        Ok(())
    };
    let branch = match run(&params, &opts, resume, on_level) {
        Ok(b) => b,
        Err(ConstructionError::Extinction { level, dump }) => {
            let lines: String = dump.iter().map(|d| format!("{d}\n")).collect();
            match cfg.get("dump") {
                Some(path) => write_file(path, &lines)?,
                None => eprint!("{lines}"),
            }
            return Err(CliError {
                code: EXIT_EXTINCTION,
                message: format!("beam extinct at level {level} ({} danger intervals)", dump.len()),
            });
        }
        Err(e) => return Err(e.into()),
    };
    // the witness is recomputed inside Manifest::build; this surfaces a bad branch early
    extract_witness(&branch, branch.depth)?;
    let manifest = Manifest::build(&params, &branch, cfg.values.clone())?;
    let text = serde_json::to_string_pretty(&manifest).expect("plain data") + "\n";
    Ok(Outcome { text, code: EXIT_OK })
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let manifest: Option<serde_json::Value> = match cfg.get("witness") {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| config_err(format!("cannot read {path}: {e}")))?;
            Some(serde_json::from_str(&text).map_err(|e| config_err(format!("bad manifest {path}: {e}")))?)
        }
        None => None,
    };
    let from_manifest = |ptr: &str| -> Option<String> {
        manifest.as_ref().and_then(|m| m.pointer(ptr)).and_then(|v| v.as_str()).map(str::to_string)
    };
    let pick = |k: &str, ptr: &str| -> Result<String, CliError> {
        cfg.get(k)
            .map(str::to_string)
            .or_else(|| from_manifest(ptr))
            .ok_or_else(|| config_err(format!("missing required key {k} (or a witness manifest)")))
    };
    let theta = theta_from(&pick("theta", "/params/theta")?)?;
    let rat = |k: &str, ptr: &str| -> Result<Rational, CliError> {
        let s = pick(k, ptr)?;
        parse_rational_literal(&s).map_err(|e| config_err(format!("bad value for {k}: {e}")))
    };
    let lo = rat("lo", "/witness/lo")?;
    let hi = rat("hi", "/witness/hi")?;
    let c = rat("c", "/params/c")?;
    if lo > hi {
        return Err(config_err("lo > hi"));
    }
    let (n, am, bm): (u64, u64, u64) = (cfg.parse("N")?, cfg.parse("Amax")?, cfg.parse("Bmax")?);
    if n == 0 || am == 0 || bm == 0 {
        return Err(config_err("N, Amax and Bmax must be positive"));
    }
    let report = verify_witness(theta.surd(), &lo, &hi, &c, n, am, bm);
    let code = if report.pass { EXIT_OK } else { EXIT_FAILED_CHECK };
    Ok(Outcome { text: envelope(cfg, report), code })
}

pub fn cmd_scan(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let real = |k: &str| -> Result<ExactReal, CliError> {
        cfg.req(k)?.parse().map_err(|e| config_err(format!("bad value for {k}: {e}")))
    };
    let (x0, x1, y0, y1) = (real("x_lo")?, real("x_hi")?, real("y_lo")?, real("y_hi")?);
    for (a, b) in [(&x0, &x1), (&y0, &y1)] {
        if !a.compatible(b) {
            return Err(config_err("range ends must share a quadratic field"));
        }
    }
    let res: usize = cfg.parse("resolution")?;
    let n: u64 = cfg.parse("N")?;
    if res == 0 || n == 0 {
        return Err(config_err("resolution and N must be positive"));
    }
    let grid = scan_grid((&x0, &x1), (&y0, &y1), res, n);
    let mut meta = vec![("version".to_string(), VERSION.to_string()), ("command".into(), "scan".into())];
    meta.extend(cfg.values.iter().map(|(k, v)| (k.clone(), v.clone())));
    Ok(Outcome { text: grid.to_csv(&meta), code: EXIT_OK })
}

pub fn cmd_check_schedule(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let r: u64 = cfg.parse("R")?;
    let (n_min, n_max): (u64, u64) = (cfg.parse("n_min")?, cfg.parse("n_max")?);
    if n_min > n_max {
        return Err(config_err("n_min > n_max"));
    }
    let schedule = CantorSchedule::growing(r);
    let mut cert = bv4_check(&schedule, n_min, n_max, cfg.precision()?)?;
    let dim = dim_lower_bound(&schedule, n_max);
    if !cfg.parse::<bool>("rows")? {
        cert.rows.retain(|row| !row.pass);
    }
    let code = if cert.all_pass { EXIT_OK } else { EXIT_FAILED_CHECK };
    Ok(Outcome { text: envelope(cfg, json!({ "certificate": cert, "dim_bound": dim })), code })
}

#[derive(Serialize)]
struct DualitySummary {
    trials: u64,
    point_violations: u64,
    line_violations: u64,
    failures: Vec<String>,
}

pub fn cmd_duality(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let theta = theta_from(cfg.req("theta")?)?;
    let trials: u64 = cfg.parse("trials")?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.parse("seed")?);
    let mut sum = DualitySummary { trials, point_violations: 0, line_violations: 0, failures: Vec::new() };
    let surd = theta.surd();
    for _ in 0..trials {
        let (a, b, d) = random_point_instance(surd, &mut rng);
        let rep = check_duality_point(&a, &b, surd, &ExactReal::from_rational(&d));
        if rep.violations() > 0 {
            sum.point_violations += 1;
            sum.failures.push(format!("point {a} {b} delta={d}"));
        }
        let (a, b, d) = random_line_instance(surd, &mut rng);
        let rep = check_duality_line(&a, &b, surd, &ExactReal::from_rational(&d));
        if rep.violations() > 0 {
            sum.line_violations += 1;
            sum.failures.push(format!("line {a} {b} delta={d}"));
        }
    }
    let code = if sum.point_violations + sum.line_violations == 0 { EXIT_OK } else { EXIT_VIOLATION };
    Ok(Outcome { text: envelope(cfg, sum), code })
}

/// Runs a resolved configuration and writes its output.
pub fn execute(cfg: &RunConfig) -> Result<i32, CliError> {
    let threads: usize = cfg.parse("threads")?;
    if threads > 0 {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let out = match cfg.command.as_str() {
        "params" => cmd_params(cfg)?,
        "construct" => cmd_construct(cfg)?,
        "verify" => cmd_verify(cfg)?,
        "scan" => cmd_scan(cfg)?,
        "check-schedule" => cmd_check_schedule(cfg)?,
        "duality" => cmd_duality(cfg)?,
        other => return Err(config_err(format!("unknown command {other}"))),
    };
    match cfg.req("output")? {
        "-" => print!("{}", out.text),
        path => write_file(path, &out.text)?,
    }
    Ok(out.code)
}

/// Entry point for the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cfg = match config_from_args(args) {
        Ok(c) => c,
        Err(Ok(help)) => {
            print!("{help}");
            return EXIT_OK;
        }
        Err(Err(e)) => {
            eprintln!("{e}");
            return e.code;
        }
    };
    match execute(&cfg) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(v: &[(&str, &str)]) -> Vec<(String, String)> {
        v.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
    }

    #[test]
    fn config_text_and_precedence() {
        let file = parse_config_text("# comment\nmode = exploration\n\nR=16 # trailing\n").unwrap();
        assert_eq!(file, pairs(&[("mode", "exploration"), ("R", "16")]));
        let cfg = resolve("params", &file, &pairs(&[("R", "32")])).unwrap();
        assert_eq!(cfg.get("R"), Some("32"));
        assert_eq!(cfg.get("mode"), Some("exploration"));
        assert_eq!(cfg.get("output"), Some("-"));
        assert!(parse_config_text("novalue\n").is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        let e = resolve("params", &pairs(&[("bogus", "1")]), &[]).unwrap_err();
        assert_eq!(e.code, EXIT_CONFIG);
        let e = config_from_args(["madcantor", "params", "--bogus=1"]).unwrap_err().unwrap_err();
        assert_eq!(e.code, EXIT_CONFIG);
        // keys of one command are not valid for another
        assert!(resolve("scan", &pairs(&[("depth", "3")]), &[]).is_err());
    }

    #[test]
    fn missing_theta_is_a_config_error() {
        let cfg = config_from_args(["madcantor", "params", "--mode=proof"]).unwrap();
        let e = cmd_params(&cfg).unwrap_err();
        assert_eq!(e.code, EXIT_CONFIG);
    }

    #[test]
    fn proof_params_and_exploration_violations() {
        let cfg = config_from_args(["madcantor", "params", "--theta=(1+1*sqrt(5))/2", "--mode=proof"]).unwrap();
        let out = cmd_params(&cfg).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out.text).unwrap();
        assert_eq!(v["result"]["R"], 21215);
        assert_eq!(v["config"]["mode"], "proof");
        assert_eq!(v["version"], VERSION);
        let cfg = config_from_args(["madcantor", "params", "--theta=(1+sqrt(5))/2", "--mode=exploration", "--R=16"])
            .unwrap();
        let v: serde_json::Value = serde_json::from_str(&cmd_params(&cfg).unwrap().text).unwrap();
        assert!(!v["result"]["violations"].as_array().unwrap().is_empty());
        let cfg = config_from_args(["madcantor", "params", "--theta=(1+sqrt(5))/2", "--mode=proof", "--R=16"]).unwrap();
        assert_eq!(cmd_params(&cfg).unwrap_err().code, EXIT_CONFIG);
    }

    #[test]
    fn error_codes() {
        let ext = ConstructionError::Extinction { level: 4, dump: vec![] };
        assert_eq!(CliError::from(ext).code, EXIT_EXTINCTION);
        let prec = ConstructionError::Arith(ArithError::PrecisionExhausted { cap: 64, what: "x".into() });
        assert_eq!(CliError::from(prec).code, EXIT_PRECISION);
        assert_eq!(CliError::from(ConstructionError::Violation("v".into())).code, EXIT_VIOLATION);
        assert_eq!(CliError::from(ConstructionError::Budget("b".into())).code, EXIT_CONFIG);
    }
}
