//! The `bexdep` command line: `test`, `simulate` and `klproject`.
//!
//! JSON goes to standard output, diagnostics to standard error. Exit status
//! is 0 when the command ran (whatever the test decided), 2 for input or
//! configuration errors and 3 for internal failures.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use nalgebra::DMatrix;
use serde::Serialize;
use serde_json::{json, Value};

use crate::beret::{beret_test, projected_points, BeretConfig};
use crate::error::{Error, Result};
use crate::exact::Correction;
use crate::io;
use crate::kl::{kl_fit, kl_scores, smallest_k_for_energy, CurveSet, KlModel};
use crate::multifit::{cuboid_points, Mode, MultiFitConfig};
use crate::report::{TestReport, SCHEMA_VERSION};
use crate::sim::{estimate_power, write_power_csv, Placement, ScenarioFamily, Shape, TestMethod, NOISE_LEVELS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "bexdep", version, about = "Binary-expansion tests of independence")]
pub struct Cli {
    /// Worker threads (default: available cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test independence of the samples in two CSV files.
    Test(TestArgs),
    /// Estimate power curves over noise levels.
    Simulate(SimulateArgs),
    /// Project curves onto standardized Karhunen-Loève scores.
    Klproject(KlArgs),
}

/// Test parameters settable by flag or config file.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// `key = value` file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// multifit, beret or bet.
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub r_max: Option<u32>,
    #[arg(long)]
    pub d_max: Option<u32>,
    /// exhaustive or adaptive.
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub min_count: Option<u64>,
    #[arg(long)]
    pub p_expand: Option<f64>,
    /// Number of projection pairs.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// bonferroni or holm.
    #[arg(long)]
    pub correction: Option<String>,
    /// Karhunen-Loève truncation.
    #[arg(long)]
    pub k: Option<usize>,
    /// Choose the truncation by captured variance fraction instead of `k`.
    #[arg(long, conflicts_with = "k")]
    pub energy: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    pub x: PathBuf,
    pub y: PathBuf,
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Read X as curves (grid row, then one curve per row).
    #[arg(long)]
    pub functional_x: bool,
    /// Read Y as curves.
    #[arg(long)]
    pub functional_y: bool,
    /// Truncation for functional Y (default: same rule as X).
    #[arg(long)]
    pub k_y: Option<usize>,
    /// Include every individual test in the report.
    #[arg(long)]
    pub full: bool,
    /// Write the observations behind the strongest finding as CSV.
    #[arg(long)]
    pub points_out: Option<PathBuf>,
    /// Include wall time in the report (makes output run-dependent).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Comma-separated scenario names (linear, parabolic, circular, sine,
    /// checkerboard, local, null).
    #[arg(long, default_value = "linear,parabolic,circular,sine,checkerboard,local")]
    pub scenario: String,
    /// Comma-separated placements.
    #[arg(long, default_value = "marginal")]
    pub placement: String,
    /// Comma-separated methods.
    #[arg(long, default_value = "multifit,beret")]
    pub methods: String,
    #[arg(long, default_value_t = 200)]
    pub reps: usize,
    #[arg(long, default_value_t = 128)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub p: usize,
    #[arg(long, default_value_t = 2)]
    pub q: usize,
    /// Noise levels, e.g. `1-20` or `1,5,10`.
    #[arg(long, default_value = "1-20")]
    pub levels: String,
    /// Output directory for `power_{method}_{placement}.csv`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct KlArgs {
    pub curves: PathBuf,
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Scores CSV to write.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Multifit,
    Beret,
    Bet,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "multifit" => Ok(Method::Multifit),
            "beret" => Ok(Method::Beret),
            "bet" => Ok(Method::Bet),
            other => Err(Error::InvalidParameter(format!("unknown method '{other}'"))),
        }
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub method: Method,
    pub alpha: f64,
    pub r_max: u32,
    pub d_max: u32,
    pub mode: Mode,
    pub min_count: u64,
    pub p_expand: f64,
    pub m: usize,
    pub seed: u64,
    pub correction: Correction,
    pub k: Option<usize>,
    pub energy: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let mf = MultiFitConfig::default();
        let be = BeretConfig::default();
        RunConfig {
            method: Method::Multifit,
            alpha: mf.alpha,
            r_max: mf.r_max,
            d_max: be.d_max,
            mode: mf.mode,
            min_count: mf.min_count,
            p_expand: mf.p_expand,
            m: be.m,
            seed: be.seed,
            correction: mf.correction,
            k: None,
            energy: None,
        }
    }
}

const CONFIG_KEYS: [&str; 12] =
    ["method", "alpha", "r_max", "d_max", "mode", "min_count", "p_expand", "m", "seed", "correction", "k", "energy"];

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::InvalidParameter(format!("invalid value '{v}' for {key}")))
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) =
            line.split_once('=').ok_or_else(|| Error::Input(format!("config line {}: expected key = value", i + 1)))?;
        let key = key.trim();
        if !CONFIG_KEYS.contains(&key) {
            return Err(Error::Input(format!("config line {}: unknown key '{key}'", i + 1)));
        }
        out.insert(key.to_string(), value.trim().to_string());
    }
    Ok(out)
}

impl RunConfig {
    fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "method" => self.method = v.parse()?,
            "alpha" => self.alpha = parse_value(key, v)?,
            "r_max" => self.r_max = parse_value(key, v)?,
            "d_max" => self.d_max = parse_value(key, v)?,
            "mode" => self.mode = v.parse()?,
            "min_count" => self.min_count = parse_value(key, v)?,
            "p_expand" => self.p_expand = parse_value(key, v)?,
            "m" => self.m = parse_value(key, v)?,
            "seed" => self.seed = parse_value(key, v)?,
            "correction" => self.correction = v.parse()?,
            "k" => self.k = Some(parse_value(key, v)?),
            "energy" => self.energy = Some(parse_value(key, v)?),
            other => return Err(Error::Input(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    /// Defaults, then the config file, then flags.
    pub fn resolve(args: &ConfigArgs) -> Result<Self> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &args.config {
            let text = fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
            let entries = parse_config_file(&text).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
            if entries.contains_key("k") && entries.contains_key("energy") {
                return Err(Error::Input(format!("{}: give either k or energy, not both", path.display())));
            }
            for (k, v) in entries {
                cfg.set(&k, &v)?;
            }
        }
        if args.k.is_some() || args.energy.is_some() {
            // a truncation flag replaces the file's truncation rule
            cfg.k = None;
            cfg.energy = None;
        }
        let flags: [(&str, Option<String>); 12] = [
            ("method", args.method.clone()),
            ("alpha", args.alpha.map(|v| v.to_string())),
            ("r_max", args.r_max.map(|v| v.to_string())),
            ("d_max", args.d_max.map(|v| v.to_string())),
            ("mode", args.mode.clone()),
            ("min_count", args.min_count.map(|v| v.to_string())),
            ("p_expand", args.p_expand.map(|v| v.to_string())),
            ("m", args.m.map(|v| v.to_string())),
            ("seed", args.seed.map(|v| v.to_string())),
            ("correction", args.correction.clone()),
            ("k", args.k.map(|v| v.to_string())),
            ("energy", args.energy.map(|v| v.to_string())),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, &v)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if !(self.p_expand > 0.0 && self.p_expand <= 1.0) {
            return Err(Error::InvalidParameter(format!("p_expand must lie in (0, 1], got {}", self.p_expand)));
        }
        if self.k.is_some() && self.energy.is_some() {
            return Err(Error::InvalidParameter("give either k or energy, not both".into()));
        }
        if self.k == Some(0) {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        if let Some(e) = self.energy {
            if !(e > 0.0 && e <= 1.0) {
                return Err(Error::InvalidParameter(format!("energy must lie in (0, 1], got {e}")));
            }
        }
        Ok(())
    }

    pub fn multifit(&self) -> MultiFitConfig {
        MultiFitConfig {
            r_max: self.r_max,
            alpha: self.alpha,
            mode: self.mode,
            min_count: self.min_count,
            p_expand: self.p_expand,
            correction: self.correction,
        }
    }

    pub fn beret(&self) -> BeretConfig {
        BeretConfig { m: self.m, d_max: self.d_max, alpha: self.alpha, seed: self.seed, correction: self.correction }
    }

    /// Truncation for a curve set: explicit `k`, else the energy rule
    /// (default 0.95).
    pub fn truncation(&self, cs: &CurveSet) -> Result<usize> {
        match self.k {
            Some(k) => Ok(k),
            None => smallest_k_for_energy(cs, self.energy.unwrap_or(0.95)),
        }
    }
}

/// Failure of a command, carrying its exit status.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { code: EXIT_INPUT, message: e.to_string() }
    }
}

fn internal(e: impl std::fmt::Display) -> Failure {
    Failure { code: EXIT_INTERNAL, message: e.to_string() }
}

fn kl_summary(model: &KlModel, n: usize) -> Value {
    json!({
        "n": n,
        "m": model.grid.len(),
        "k": model.k(),
        "lambdas": model.lambdas,
        "energy_fraction": model.energy_fraction(),
        "total_variance": model.total_variance,
        "rank": model.rank,
    })
}

/// Reads a sample, projecting it onto KL scores when `functional`.
fn load_sample(path: &Path, functional: bool, k: Option<usize>, cfg: &RunConfig) -> Result<(DMatrix<f64>, Value)> {
    if !functional {
        return Ok((io::read_matrix_csv(path)?, Value::Null));
    }
    let cs = io::read_curves_csv(path)?;
    let k = match k {
        Some(k) => k,
        None => cfg.truncation(&cs)?,
    };
    let model = kl_fit(&cs, k)?;
    let scores = kl_scores(&cs, &model)?;
    Ok((scores.scores, kl_summary(&model, cs.n())))
}

fn write_points(path: &Path, report: &TestReport, x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<()> {
    let mut out = io::create(path)?;
    let res = match report {
        TestReport::MultiFit(r) => {
            let Some(best) = r.strongest() else {
                return Err(Error::Input("no cuboid was tested; nothing to write".into()));
            };
            let pts = cuboid_points(x, y, &best.cuboid)?;
            writeln!(out, "index,u,v,x_bit,y_bit").and_then(|_| {
                pts.iter().try_for_each(|p| writeln!(out, "{},{},{},{},{}", p.index, p.u, p.v, p.x_bit, p.y_bit))
            })
        }
        TestReport::Beret(r) => {
            let pts = projected_points(x, y, r.strongest_projection(), r.strongest().stat.lambda)?;
            writeln!(out, "s_proj,t_proj,u,v,region").and_then(|_| {
                pts.iter().try_for_each(|p| writeln!(out, "{},{},{},{},{}", p.s_proj, p.t_proj, p.u, p.v, p.a_lambda))
            })
        }
    };
    res.and_then(|_| out.flush()).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

/// Runs the configured test on already loaded samples.
pub fn run_test(x: &DMatrix<f64>, y: &DMatrix<f64>, cfg: &RunConfig) -> Result<TestReport> {
    match cfg.method {
        Method::Multifit => TestMethod::MultiFit(cfg.multifit()).run(x, y, cfg.seed),
        Method::Beret => TestMethod::Beret(cfg.beret()).run(x, y, cfg.seed),
        Method::Bet => {
            if x.ncols() != 1 || y.ncols() != 1 {
                return Err(Error::DimensionMismatch(format!(
                    "bet needs univariate X and Y, got {} and {} columns",
                    x.ncols(),
                    y.ncols()
                )));
            }
            // a single trivial projection: the plain binary expansion test
            beret_test(x, y, &BeretConfig { m: 1, ..cfg.beret() }).map(TestReport::Beret)
        }
    }
}

fn print_json(v: &Value) -> std::result::Result<(), Failure> {
    let text = serde_json::to_string_pretty(v).map_err(internal)?;
    let mut stdout = std::io::stdout().lock();
    writeln!(stdout, "{text}").map_err(internal)
}

fn cmd_test(args: &TestArgs) -> std::result::Result<(), Failure> {
    let start = Instant::now();
    let cfg = RunConfig::resolve(&args.config)?;
    let (x, kl_x) = load_sample(&args.x, args.functional_x, cfg.k, &cfg)?;
    let (y, kl_y) = load_sample(&args.y, args.functional_y, args.k_y.or(cfg.k), &cfg)?;
    let report = run_test(&x, &y, &cfg)?;
    if let Some(path) = &args.points_out {
        write_points(path, &report, &x, &y)?;
    }
    let elapsed = start.elapsed();
    let mut v = json!({ "schema_version": SCHEMA_VERSION, "command": "test", "config": cfg });
    if let (Value::Object(obj), Value::Object(body)) = (&mut v, report.to_json(args.full)) {
        obj.extend(body);
    }
    if cfg.method == Method::Bet {
        v["method"] = json!("bet");
    }
    if !kl_x.is_null() || !kl_y.is_null() {
        v["kl"] = json!({ "x": kl_x, "y": kl_y });
    }
    if args.timing {
        v["wall_time_ms"] = json!(elapsed.as_secs_f64() * 1e3);
    }
    eprintln!("bexdep test: {} on n = {} in {:.1} ms", cfg.method_name(), x.nrows(), elapsed.as_secs_f64() * 1e3);
    print_json(&v)
}

impl RunConfig {
    fn method_name(&self) -> &'static str {
        match self.method {
            Method::Multifit => "multifit",
            Method::Beret => "beret",
            Method::Bet => "bet",
        }
    }
}

fn comma_list<T: std::str::FromStr<Err = Error>>(s: &str) -> Result<Vec<T>> {
    s.split(',').map(|v| v.trim()).filter(|v| !v.is_empty()).map(str::parse).collect()
}

/// Parses `1-20` or `1,5,10` (or a mix) into noise levels.
pub fn parse_levels(s: &str) -> Result<Vec<u32>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let bad = || Error::InvalidParameter(format!("invalid noise levels '{s}'"));
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (u32, u32) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
                if a > b {
                    return Err(bad());
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(|_| bad())?),
        }
    }
    if out.is_empty() || out.iter().any(|l| !(1..=NOISE_LEVELS).contains(l)) {
        return Err(Error::InvalidParameter(format!("noise levels must lie in 1..={NOISE_LEVELS}, got '{s}'")));
    }
    Ok(out)
}

fn cmd_simulate(args: &SimulateArgs) -> std::result::Result<(), Failure> {
    let start = Instant::now();
    let cfg = RunConfig::resolve(&args.config)?;
    let shapes: Vec<Shape> = comma_list(&args.scenario)?;
    let placements: Vec<Placement> = comma_list(&args.placement)?;
    let methods: Vec<Method> = comma_list(&args.methods)?;
    let levels = parse_levels(&args.levels)?;
    if args.reps == 0 {
        return Err(Error::InvalidParameter("reps must be at least 1".into()).into());
    }
    if shapes.is_empty() || placements.is_empty() || methods.is_empty() {
        return Err(Error::InvalidParameter("need at least one scenario, placement and method".into()).into());
    }
    fs::create_dir_all(&args.out).map_err(|e| Error::Input(format!("{}: {e}", args.out.display())))?;
    let mut files = Vec::new();
    for &method in &methods {
        let test = match method {
            Method::Multifit => TestMethod::MultiFit(cfg.multifit()),
            Method::Beret => TestMethod::Beret(cfg.beret()),
            Method::Bet => {
                return Err(Error::InvalidParameter("bet is univariate; simulate multifit or beret".into()).into())
            }
        };
        for &placement in &placements {
            let mut curves = Vec::new();
            for &shape in &shapes {
                let family = ScenarioFamily { p: args.p, q: args.q, ..ScenarioFamily::new(shape, placement, args.n) };
                // every (scenario, placement) gets its own stream; methods share it
                let seed = crate::rng::derive_seed(cfg.seed, &[shape as u64, placement as u64]);
                curves.push(estimate_power(&test, &family, &levels, args.reps, cfg.alpha, seed)?);
            }
            let name = format!("power_{}_{}.csv", test.id(), placement);
            let path = args.out.join(&name);
            let mut out = io::create(&path)?;
            write_power_csv(&curves, &mut out)
                .and_then(|_| out.flush())
                .map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
            files.push(name);
        }
    }
    eprintln!("bexdep simulate: {} files in {:.1} s", files.len(), start.elapsed().as_secs_f64());
    print_json(&json!({
        "schema_version": SCHEMA_VERSION,
        "command": "simulate",
        "config": cfg,
        "scenarios": shapes,
        "placements": placements,
        "methods": methods,
        "reps": args.reps,
        "n": args.n,
        "dims": [args.p, args.q],
        "levels": levels,
        "files": files,
    }))
}

fn cmd_klproject(args: &KlArgs) -> std::result::Result<(), Failure> {
    let cfg = RunConfig::resolve(&args.config)?;
    let cs = io::read_curves_csv(&args.curves)?;
    let model = kl_fit(&cs, cfg.truncation(&cs)?)?;
    let scores = kl_scores(&cs, &model)?;
    let mut out = io::create(&args.out)?;
    scores
        .write_csv(&mut out)
        .and_then(|_| out.flush())
        .map_err(|e| Error::Input(format!("{}: {e}", args.out.display())))?;
    let mut v = json!({ "schema_version": SCHEMA_VERSION, "command": "klproject" });
    if let (Value::Object(obj), Value::Object(body)) = (&mut v, kl_summary(&model, cs.n())) {
        obj.extend(body);
    }
    print_json(&v)
}

fn dispatch(cli: &Cli) -> std::result::Result<(), Failure> {
    match &cli.command {
        Command::Test(a) => cmd_test(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Klproject(a) => cmd_klproject(a),
    }
}

/// Runs a parsed command line and returns the exit status.
pub fn execute(cli: &Cli) -> i32 {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("bexdep: --threads must be at least 1");
            return EXIT_INPUT;
        }
        builder = builder.num_threads(t);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("bexdep: {e}");
            return EXIT_INTERNAL;
        }
    };
    let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| pool.install(|| dispatch(cli))));
    match outcome {
        Ok(Ok(())) => EXIT_OK,
        Ok(Err(f)) => {
            eprintln!("bexdep: {}", f.message);
            f.code
        }
        Err(_) => EXIT_INTERNAL,
    }
}

/// Entry point for the binary.
pub fn run() -> i32 {
    match Cli::try_parse() {
        Ok(cli) => execute(&cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_INPUT
            } else {
                EXIT_OK
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_parsing() {
        let m = parse_config_file("# defaults\nalpha = 0.1\n\nmethod=beret # inline\n").unwrap();
        assert_eq!(m.get("alpha").map(String::as_str), Some("0.1"));
        assert_eq!(m.get("method").map(String::as_str), Some("beret"));
        assert!(parse_config_file("alpah = 0.1").unwrap_err().to_string().contains("unknown key"));
        assert!(parse_config_file("alpha").is_err());
    }

    #[test]
    fn flags_override_file_override_defaults() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "alpha = 0.1\nr_max = 2\nmethod = beret").unwrap();
        let args = ConfigArgs { config: Some(f.path().into()), r_max: Some(3), ..Default::default() };
        let cfg = RunConfig::resolve(&args).unwrap();
        assert_eq!((cfg.alpha, cfg.r_max, cfg.method, cfg.d_max), (0.1, 3, Method::Beret, 4));

        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "k = 3").unwrap();
        let args = ConfigArgs { config: Some(f.path().into()), energy: Some(0.9), ..Default::default() };
        let cfg = RunConfig::resolve(&args).unwrap();
        assert_eq!((cfg.k, cfg.energy), (None, Some(0.9)));

        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "k = 3\nenergy = 0.9").unwrap();
        assert!(RunConfig::resolve(&ConfigArgs { config: Some(f.path().into()), ..Default::default() }).is_err());
    }

    #[test]
    fn invalid_values_are_rejected() {
        let bad = [
            ConfigArgs { alpha: Some(1.5), ..Default::default() },
            ConfigArgs { method: Some("dcor".into()), ..Default::default() },
            ConfigArgs { k: Some(2), energy: Some(0.9), ..Default::default() },
            ConfigArgs { correction: Some("sidak".into()), ..Default::default() },
        ];
        for a in bad {
            assert!(RunConfig::resolve(&a).is_err(), "{a:?}");
        }
    }

    #[test]
    fn level_lists() {
        assert_eq!(parse_levels("1-3,10").unwrap(), vec![1, 2, 3, 10]);
        assert_eq!(parse_levels("1-20").unwrap().len(), 20);
        assert!(parse_levels("0-3").is_err());
        assert!(parse_levels("5-2").is_err());
        assert!(parse_levels("x").is_err());
    }
}
