//! Command-line front end.
//!
//! Every subcommand computes its artifacts in memory and writes them only
//! once all of them are ready, so a failing run leaves no partial files.
//! With `--out DIR` the tables and a `verdict.json` go to `DIR`; without
//! it the table is printed on stdout and the verdict on stderr.
//!
//! A config file (`--config FILE`) holds one `key = value` pair per line,
//! where `key` is the long name of any flag of the subcommand; `#` starts a
//! comment. Flags given on the command line override the file. Boolean
//! flags take `true` or `false`.
//!
//! Exit status: 0 when every declared check passes, 1 when a check fails
//! or cannot be completed, 2 for malformed configuration.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::acceptance;
use crate::error::{Error, Result};
use crate::limits::{anomalous_charfn, anomalous_density, convergence_report, JumpLaw, TimeGrid};
use crate::operators::{eigenfunction_report, fcaa_report, governing_report, ResidualGrid};
use crate::processes::{
    counting_pmf, simulate_fractional_poisson, simulate_para_markov_chain, simulate_para_markov_counting,
    write_paths_csv, JumpPath, TransitionMatrix,
};
use crate::sampling::RngStream;
use crate::specfun::{survival_from_mixture, MLParams, MixingMeasure, SurvivalSpec};
use crate::stablelaw::{ml_charfn, waiting_charfn_mc, waiting_charfn_product, SpectralFamily};

#[derive(Debug, Parser)]
#[command(name = "paramarkov", version, args_override_self = true, about = "Para-Markov chains, Mittag-Leffler laws and their scaling limits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Model, Monte Carlo and output settings shared by all subcommands.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Flat `key = value` config file; command-line flags take precedence
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true)]
    pub lambda: Option<f64>,
    /// `lamperti`, `pointmass` or `atoms:FILE` (lines of `rate weight`)
    #[arg(long, global = true)]
    pub mixing: Option<String>,
    /// JSON spectral family for `stable-law`
    #[arg(long, global = true)]
    pub spectral: Option<PathBuf>,
    #[arg(long, global = true)]
    pub paths: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Time grid `t1,...,tk`
    #[arg(long, global = true)]
    pub grid: Option<String>,
    /// Frequencies; vector points are separated by `;`, coordinates by `,`
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub xi: Option<String>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate paths to CSV (path_id, epoch, state)
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Process::Chain)]
        process: Process,
        /// Rows separated by `;`, entries by `,`
        #[arg(long, default_value = "0,1;1,0")]
        transition: String,
        #[arg(long, default_value_t = 0)]
        initial: usize,
        #[arg(long, default_value_t = 10.0)]
        horizon: f64,
    },
    /// Tabulate a law: characteristic function, survival, counting pmf or
    /// limit density
    Law {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, group = "table")]
        charfn: Option<CharfnKind>,
        #[arg(long, group = "table")]
        survival: bool,
        #[arg(long, group = "table")]
        pmf: bool,
        #[arg(long, group = "table")]
        density: bool,
        #[arg(long, default_value_t = 20)]
        kmax: usize,
        /// Evaluation points for `--density`, same grammar as `--xi`
        #[arg(long, allow_hyphen_values = true)]
        x: Option<String>,
    },
    /// Residual checks, reported as JSON
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        check: Check,
        #[arg(long, default_value_t = 1e-3)]
        h: f64,
        #[arg(long)]
        t_min: Option<f64>,
        #[arg(long)]
        t_max: Option<f64>,
        /// Evaluation time of the FCAA check
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 20)]
        kmax: usize,
        #[arg(long)]
        tolerance: Option<f64>,
        /// Chain for the governing check
        #[arg(long, default_value = "0,1;1,0")]
        transition: String,
    },
    /// Convergence of the rescaled random walk to its limit, as CSV
    CtrwLimit {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "10,100,1000")]
        n: String,
        #[arg(long, value_enum, default_value_t = Jumps::Rademacher)]
        jumps: Jumps,
    },
    /// Product formula against Monte Carlo for stable waiting times, as CSV
    StableLaw {
        #[command(flatten)]
        common: Common,
        /// Dimension of the default independent-increment family
        #[arg(long, default_value_t = 2)]
        dim: usize,
    },
    /// Run the acceptance suite
    Selftest {
        #[command(flatten)]
        common: Common,
        /// Comma-separated criterion numbers; all when absent
        #[arg(long)]
        criteria: Option<String>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Process {
    /// Para-Markov chain driven by `--transition`
    Chain,
    /// Para-Markov counting process
    Counting,
    /// Renewal process with Mittag-Leffler waiting times
    Renewal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CharfnKind {
    /// Mittag-Leffler waiting time, `λ / (λ + (−iξ)^α)`
    Ml,
    /// Time-changed Brownian motion on `--grid`
    Anomalous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Check {
    Eigenfunction,
    Fcaa,
    Governing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Jumps {
    Rademacher,
    Normal,
    Uniform,
}

impl From<Jumps> for JumpLaw {
    fn from(j: Jumps) -> Self {
        match j {
            Jumps::Rademacher => JumpLaw::Rademacher,
            Jumps::Normal => JumpLaw::StandardNormal,
            Jumps::Uniform => JumpLaw::CenteredUniform,
        }
    }
}

/// Outcome of a subcommand before anything is written.
#[derive(Debug)]
pub struct Outcome {
    /// `(file name, contents)`; the first is the primary table.
    pub files: Vec<(String, String)>,
    pub verdict: Value,
    pub pass: bool,
}

/// Reasons a run stops with a non-zero status.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Check(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Check(_) => 1,
        }
    }
}

fn config_err(e: impl std::fmt::Display) -> Failure {
    Failure::Config(e.to_string())
}

fn check_err(e: Error) -> Failure {
    Failure::Check(e.to_string())
}

/// Parses arguments, runs the subcommand and writes its artifacts. Returns
/// the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match with_config(args) {
        Ok(a) => a,
        Err(f) => return report_failure(&f),
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let out = common(&cli.command).out.clone();
    match run(&cli.command).and_then(|o| emit(&o, out.as_deref()).map(|_| o)) {
        Ok(o) => {
            if o.pass {
                0
            } else {
                eprintln!("paramarkov: check failed");
                1
            }
        }
        Err(f) => report_failure(&f),
    }
}

fn report_failure(f: &Failure) -> i32 {
    match f {
        Failure::Config(m) => eprintln!("paramarkov: configuration error: {m}"),
        Failure::Check(m) => eprintln!("paramarkov: check could not be completed: {m}"),
    }
    f.exit_code()
}

pub fn main() -> i32 {
    main_with_args(std::env::args_os())
}

fn common(cmd: &Command) -> &Common {
    match cmd {
        Command::Simulate { common, .. }
        | Command::Law { common, .. }
        | Command::Verify { common, .. }
        | Command::CtrwLimit { common, .. }
        | Command::StableLaw { common, .. }
        | Command::Selftest { common, .. } => common,
    }
}

/// Splices the entries of `--config FILE` into the argument list right
/// after the subcommand, so later command-line flags override them.
fn with_config(args: Vec<OsString>) -> std::result::Result<Vec<OsString>, Failure> {
    let text: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let mut path = None;
    for (i, a) in text.iter().enumerate() {
        if a == "--config" {
            path = Some(text.get(i + 1).cloned().ok_or_else(|| config_err("--config needs a file"))?);
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else { return Ok(args) };
    let body = fs::read_to_string(&path).map_err(|e| config_err(format!("{path}: {e}")))?;
    let tokens = parse_config(&body).map_err(|m| config_err(format!("{path}: {m}")))?;
    if args.len() < 2 {
        return Ok(args);
    }
    let mut spliced = args[..2].to_vec();
    spliced.extend(tokens.into_iter().map(OsString::from));
    spliced.extend(args[2..].iter().cloned());
    Ok(spliced)
}

/// `key = value` lines into `--key value` tokens.
pub fn parse_config(body: &str) -> std::result::Result<Vec<String>, String> {
    let mut tokens = Vec::new();
    for (no, raw) in body.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected `key = value`", no + 1))?;
        let (key, value) = (key.trim(), value.trim());
        let valid = !key.is_empty() && key.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
        if !valid || key == "config" {
            return Err(format!("line {}: invalid key `{key}`", no + 1));
        }
        let flag = format!("--{}", key.replace('_', "-"));
        match value {
            "true" => tokens.push(flag),
            "false" => {}
            _ => tokens.push(format!("{flag}={value}")),
        }
    }
    Ok(tokens)
}

/// Writes every artifact, or nothing if the output directory is unusable.
fn emit(o: &Outcome, out: Option<&Path>) -> std::result::Result<(), Failure> {
    let verdict = serde_json::to_string_pretty(&o.verdict).expect("verdict serializes");
    match out {
        None => {
            if let Some((_, primary)) = o.files.first() {
                print!("{primary}");
            }
            eprintln!("{}", serde_json::to_string(&o.verdict).expect("verdict serializes"));
        }
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| config_err(format!("{}: {e}", dir.display())))?;
            let io = |e: std::io::Error| Failure::Check(e.to_string());
            for (name, body) in &o.files {
                fs::write(dir.join(name), body).map_err(io)?;
            }
            fs::write(dir.join("verdict.json"), verdict + "\n").map_err(io)?;
        }
    }
    Ok(())
}

/// Resolved model and sampling settings.
struct Model {
    alpha: f64,
    lambda: f64,
    spec: SurvivalSpec,
    rng: RngStream,
}

impl Common {
    fn model(&self) -> std::result::Result<Model, Failure> {
        let alpha = self.alpha.unwrap_or(0.5);
        let lambda = self.lambda.unwrap_or(1.0);
        let mixing = match self.mixing.as_deref().unwrap_or("lamperti") {
            "lamperti" => MLParams::new(alpha, lambda).map_err(config_err)?.mixing(),
            "pointmass" => MixingMeasure::point_mass(lambda).map_err(config_err)?,
            m => match m.strip_prefix("atoms:") {
                Some(file) => load_atoms(Path::new(file))?,
                None => return Err(config_err(format!("unknown mixing `{m}`"))),
            },
        };
        let spec = SurvivalSpec::new(mixing).map_err(config_err)?;
        let rng = RngStream::new(self.seed.unwrap_or(acceptance::SEED), 0);
        Ok(Model {
            alpha: spec.alpha(),
            lambda,
            spec,
            rng,
        })
    }

    fn grid(&self, default: &str) -> std::result::Result<TimeGrid, Failure> {
        let times = parse_list(self.grid.as_deref().unwrap_or(default))?;
        TimeGrid::new(times).map_err(config_err)
    }

    fn xi_scalars(&self) -> std::result::Result<Vec<f64>, Failure> {
        let xi = self.xi.as_deref().ok_or_else(|| config_err("--xi is required"))?;
        parse_list(&xi.replace(';', ","))
    }

    fn xi_points(&self, dim: usize) -> std::result::Result<Vec<Vec<f64>>, Failure> {
        let xi = self.xi.as_deref().ok_or_else(|| config_err("--xi is required"))?;
        parse_points(xi, dim)
    }

    fn paths(&self, default: usize) -> std::result::Result<usize, Failure> {
        match self.paths.unwrap_or(default) {
            0 => Err(config_err("--paths must be positive")),
            p => Ok(p),
        }
    }
}

fn parse_list(s: &str) -> std::result::Result<Vec<f64>, Failure> {
    let v = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| config_err(format!("`{t}`: {e}"))))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if v.iter().any(|x| !x.is_finite()) {
        return Err(config_err(format!("non-finite value in `{s}`")));
    }
    Ok(v)
}

/// Points separated by `;`. In one dimension a plain comma list is also
/// read as a list of points.
fn parse_points(s: &str, dim: usize) -> std::result::Result<Vec<Vec<f64>>, Failure> {
    if dim == 1 && !s.contains(';') {
        return Ok(parse_list(s)?.into_iter().map(|x| vec![x]).collect());
    }
    let points = s.split(';').map(parse_list).collect::<std::result::Result<Vec<_>, _>>()?;
    if let Some(p) = points.iter().find(|p| p.len() != dim) {
        return Err(config_err(format!("point of dimension {} where {dim} is expected", p.len())));
    }
    Ok(points)
}

fn parse_matrix(s: &str) -> std::result::Result<TransitionMatrix, Failure> {
    let rows = s.split(';').map(parse_list).collect::<std::result::Result<Vec<_>, _>>()?;
    TransitionMatrix::from_rows(&rows).map_err(config_err)
}

fn load_atoms(path: &Path) -> std::result::Result<MixingMeasure, Failure> {
    let body = fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    let mut atoms = Vec::new();
    for line in body.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let v: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()).collect();
        let [rate, weight] = v[..] else {
            return Err(config_err(format!("atom line `{line}` needs `rate weight`")));
        };
        let num = |t: &str| t.parse::<f64>().map_err(|e| config_err(format!("`{t}`: {e}")));
        atoms.push((num(rate)?, num(weight)?));
    }
    MixingMeasure::atoms(atoms).map_err(config_err)
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn join(v: &[f64]) -> String {
    v.iter().map(|&x| fmt(x)).collect::<Vec<_>>().join(";")
}

/// Validates the configuration, then runs the subcommand.
pub fn run(cmd: &Command) -> std::result::Result<Outcome, Failure> {
    match cmd {
        Command::Simulate {
            common,
            process,
            transition,
            initial,
            horizon,
        } => simulate(common, *process, transition, *initial, *horizon),
        Command::Law {
            common,
            charfn,
            survival,
            pmf,
            density,
            kmax,
            x,
        } => {
            let table = match (charfn, survival, pmf, density) {
                (Some(k), ..) => Table::Charfn(*k),
                (_, true, ..) => Table::Survival,
                (_, _, true, _) => Table::Pmf(*kmax),
                (_, _, _, true) => Table::Density(x.as_deref()),
                _ => return Err(config_err("law needs one of --charfn, --survival, --pmf, --density")),
            };
            law(common, table)
        }
        Command::Verify {
            common,
            check,
            h,
            t_min,
            t_max,
            t,
            kmax,
            tolerance,
            transition,
        } => verify(common, *check, *h, (*t_min, *t_max), *t, *kmax, *tolerance, transition),
        Command::CtrwLimit { common, n, jumps } => ctrw_limit(common, n, *jumps),
        Command::StableLaw { common, dim } => stable_law(common, *dim),
        Command::Selftest { criteria, .. } => selftest(criteria.as_deref()),
    }
}

fn simulate(
    common: &Common,
    process: Process,
    transition: &str,
    initial: usize,
    horizon: f64,
) -> std::result::Result<Outcome, Failure> {
    let m = common.model()?;
    let paths = common.paths(100)?;
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(config_err("--horizon must be positive"));
    }
    let chain = parse_matrix(transition)?;
    if initial >= chain.states() {
        return Err(config_err(format!("--initial {initial} outside {} states", chain.states())));
    }
    if process == Process::Renewal && !matches!(m.spec.mixing, MixingMeasure::Lamperti { .. } | MixingMeasure::PointMass { .. }) {
        return Err(config_err("renewal paths need Lamperti or point-mass mixing"));
    }
    let ml = MLParams::new(m.alpha, m.lambda).map_err(config_err)?;
    let runs: Vec<JumpPath> = (0..paths as u64)
        .map(|i| {
            let mut rng = m.rng.substream(i);
            match process {
                Process::Chain => simulate_para_markov_chain(&chain, &m.spec, initial, horizon, &mut rng),
                Process::Counting => simulate_para_markov_counting(&m.spec, horizon, &mut rng),
                Process::Renewal => simulate_fractional_poisson(ml, horizon, &mut rng),
            }
        })
        .collect::<Result<_>>()
        .map_err(check_err)?;
    let mut csv = Vec::new();
    write_paths_csv(&mut csv, &runs).map_err(check_err)?;
    let truncated = runs.iter().filter(|p| p.truncated).count();
    Ok(Outcome {
        files: vec![("paths.csv".into(), String::from_utf8(csv).expect("ascii csv"))],
        verdict: json!({
            "command": "simulate",
            "paths": paths,
            "horizon": horizon,
            "truncated_paths": truncated,
            "pass": truncated == 0,
        }),
        pass: truncated == 0,
    })
}

enum Table<'a> {
    Charfn(CharfnKind),
    Survival,
    Pmf(usize),
    Density(Option<&'a str>),
}

fn law(common: &Common, table: Table) -> std::result::Result<Outcome, Failure> {
    let m = common.model()?;
    let mut csv = String::new();
    let kind;
    match table {
        Table::Charfn(CharfnKind::Ml) => {
            kind = "charfn-ml";
            let xi = common.xi_scalars()?;
            csv.push_str("xi,re,im\n");
            for x in xi {
                let v = ml_charfn(m.alpha, m.lambda, x).map_err(config_err)?;
                csv.push_str(&format!("{},{},{}\n", fmt(x), fmt(v.re), fmt(v.im)));
            }
        }
        Table::Charfn(CharfnKind::Anomalous) => {
            kind = "charfn-anomalous";
            let grid = common.grid("1")?;
            let points = common.xi_points(grid.len())?;
            csv.push_str("xi,value\n");
            for xi in points {
                let v = anomalous_charfn(&m.spec, &grid, &xi).map_err(check_err)?;
                csv.push_str(&format!("{},{}\n", join(&xi), fmt(v)));
            }
        }
        Table::Survival => {
            kind = "survival";
            let grid = common.grid("0.5,1,2,5,10")?;
            csv.push_str("t,survival\n");
            for &t in grid.times() {
                let v = survival_from_mixture(&m.spec, t).map_err(check_err)?;
                csv.push_str(&format!("{},{}\n", fmt(t), fmt(v)));
            }
        }
        Table::Pmf(kmax) => {
            kind = "pmf";
            let grid = common.grid("1")?;
            csv.push_str("t,k,pmf\n");
            for &t in grid.times() {
                let pmf = counting_pmf(&m.spec, t, kmax).map_err(check_err)?;
                for (k, p) in pmf.iter().enumerate() {
                    csv.push_str(&format!("{},{k},{}\n", fmt(t), fmt(*p)));
                }
            }
        }
        Table::Density(x) => {
            kind = "density";
            let grid = common.grid("1")?;
            let x = x.ok_or_else(|| config_err("--density needs --x"))?;
            let points = parse_points(x, grid.len())?;
            csv.push_str("x,density\n");
            for p in points {
                let v = anomalous_density(&m.spec, &grid, &p).map_err(check_err)?;
                csv.push_str(&format!("{},{}\n", join(&p), fmt(v)));
            }
        }
    }
    let rows = csv.lines().count() - 1;
    let finite = csv
        .lines()
        .skip(1)
        .all(|l| l.rsplit(',').next().is_some_and(|v| v.parse::<f64>().is_ok_and(|x| !x.is_nan())));
    Ok(Outcome {
        files: vec![("law.csv".into(), csv)],
        verdict: json!({"command": "law", "table": kind, "rows": rows, "pass": finite}),
        pass: finite,
    })
}

#[allow(clippy::too_many_arguments)]
fn verify(
    common: &Common,
    check: Check,
    h: f64,
    (t_min, t_max): (Option<f64>, Option<f64>),
    t: f64,
    kmax: usize,
    tolerance: Option<f64>,
    transition: &str,
) -> std::result::Result<Outcome, Failure> {
    let m = common.model()?;
    let ml = MLParams::new(m.alpha, m.lambda).map_err(config_err)?;
    let report = match check {
        Check::Eigenfunction => {
            let grid = ResidualGrid::new(h, t_min.unwrap_or(0.1), t_max.unwrap_or(2.0)).map_err(config_err)?;
            eigenfunction_report(ml, grid, tolerance.unwrap_or(0.02))
        }
        Check::Fcaa => fcaa_report(ml, t, h, kmax, tolerance.unwrap_or(0.02)),
        Check::Governing => {
            let chain = parse_matrix(transition)?;
            let grid = ResidualGrid::new(h, t_min.unwrap_or(0.2), t_max.unwrap_or(2.0)).map_err(config_err)?;
            governing_report(&chain, &m.spec, grid, tolerance.unwrap_or(0.05))
        }
    }
    .map_err(|e| match e {
        Error::Domain(_) | Error::OffGrid(_) | Error::InvalidMatrix(_) => config_err(e),
        e => check_err(e),
    })?;
    let body: Value = serde_json::from_str(&report.to_json()).expect("report is JSON");
    Ok(Outcome {
        files: vec![("verify.json".into(), serde_json::to_string_pretty(&body).expect("json") + "\n")],
        verdict: json!({"command": "verify", "check": report.check, "residual": report.residual, "pass": report.pass}),
        pass: report.pass,
    })
}

fn ctrw_limit(common: &Common, n: &str, jumps: Jumps) -> std::result::Result<Outcome, Failure> {
    let m = common.model()?;
    let grid = common.grid("0.5,1")?;
    let xi = common.xi_points(grid.len())?;
    let paths = common.paths(100_000)?;
    let n_list = n
        .split(',')
        .map(|t| match t.trim().parse::<u64>() {
            Ok(v) if v > 0 => Ok(v),
            _ => Err(config_err(format!("`{t}` is not a positive scale"))),
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let report = convergence_report(&m.spec, jumps.into(), &grid, &xi, &n_list, paths, &m.rng).map_err(check_err)?;
    let mut csv = Vec::new();
    report.write_csv(&mut csv, &grid).map_err(check_err)?;
    let n_max = *n_list.iter().max().expect("non-empty");
    let final_pass = report.rows_at(n_max).all(|r| r.pass);
    let pass = final_pass && report.trend_ok;
    Ok(Outcome {
        files: vec![("ctrw.csv".into(), String::from_utf8(csv).expect("ascii csv"))],
        verdict: json!({
            "command": "ctrw-limit",
            "n_max": n_max,
            "rows_pass_at_n_max": final_pass,
            "max_deviation": report.max_deviation,
            "trend_ok": report.trend_ok,
            "pass": pass,
        }),
        pass,
    })
}

fn stable_law(common: &Common, dim: usize) -> std::result::Result<Outcome, Failure> {
    let lambda = common.lambda.unwrap_or(1.0);
    let fam = match &common.spectral {
        Some(path) => SpectralFamily::load(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?,
        None => SpectralFamily::independent_increments(common.alpha.unwrap_or(0.5), dim).map_err(config_err)?,
    };
    if (fam.hurst() * fam.alpha() - 1.0).abs() > 1e-12 {
        return Err(config_err("the product formula needs hurst = 1/alpha"));
    }
    let xi = common.xi_points(fam.dimension())?;
    let paths = common.paths(100_000)?;
    let rng = RngStream::new(common.seed.unwrap_or(acceptance::SEED), 0);
    let mut csv = String::from("xi,product_re,product_im,mc_re,mc_im,se,z,pass\n");
    let mut pass = true;
    for (i, x) in xi.iter().enumerate() {
        let exact = waiting_charfn_product(&fam, lambda, x).map_err(check_err)?;
        let mc = waiting_charfn_mc(&fam, lambda, x, &rng.substream(i as u64), paths).map_err(check_err)?;
        let z = mc.z_score(exact);
        let ok = z <= 3.0;
        pass &= ok;
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{ok}\n",
            join(x),
            fmt(exact.re),
            fmt(exact.im),
            fmt(mc.value.re),
            fmt(mc.value.im),
            fmt(mc.se),
            fmt(z)
        ));
    }
    Ok(Outcome {
        files: vec![("stable.csv".into(), csv)],
        verdict: json!({"command": "stable-law", "points": xi.len(), "paths": paths, "pass": pass}),
        pass,
    })
}

fn selftest(criteria: Option<&str>) -> std::result::Result<Outcome, Failure> {
    let ids: Vec<u8> = match criteria {
        None => acceptance::CRITERIA.to_vec(),
        Some(s) => s
            .split(',')
            .map(|t| match t.trim().parse::<u8>() {
                Ok(id) if acceptance::CRITERIA.contains(&id) => Ok(id),
                _ => Err(config_err(format!("no criterion `{t}`"))),
            })
            .collect::<std::result::Result<_, _>>()?,
    };
    let mut lines = String::new();
    let mut results = Vec::new();
    for id in ids {
        let c = acceptance::run(id).map_err(check_err)?;
        eprintln!("{c}");
        lines.push_str(&format!("{c}\n"));
        results.push(c);
    }
    let pass = results.iter().all(|c| c.pass);
    let failed: Vec<u8> = results.iter().filter(|c| !c.pass).map(|c| c.id).collect();
    Ok(Outcome {
        files: vec![
            ("selftest.txt".into(), lines),
            ("selftest.json".into(), serde_json::to_string_pretty(&results).expect("json") + "\n"),
        ],
        verdict: json!({"command": "selftest", "failed": failed, "pass": pass}),
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_grammar() {
        let t = parse_config("# header\nalpha = 0.7 # memory\n\nsurvival = true\npmf=false\nt_min = 0.3\n").unwrap();
        assert_eq!(t, vec!["--alpha=0.7", "--survival", "--t-min=0.3"]);
        assert!(parse_config("alpha 0.7").is_err());
        assert!(parse_config("al pha = 1").is_err());
        assert!(parse_config("config = other.cfg").is_err());
    }

    #[test]
    fn point_lists() {
        assert_eq!(parse_points("1,2,3", 1).unwrap(), vec![vec![1.0], vec![2.0], vec![3.0]]);
        assert_eq!(parse_points("1,2;-1,0.5", 2).unwrap(), vec![vec![1.0, 2.0], vec![-1.0, 0.5]]);
        assert!(parse_points("1,2,3", 2).is_err());
        assert!(parse_list("1,x").is_err());
        assert!(parse_list("1,inf").is_err());
    }

    #[test]
    fn ml_charfn_at_zero_is_one() {
        let cli = Cli::try_parse_from(["paramarkov", "law", "--charfn", "ml", "--alpha", "1", "--lambda", "2", "--xi", "0"]).unwrap();
        let o = run(&cli.command).unwrap();
        assert!(o.pass);
        let row = o.files[0].1.lines().nth(1).unwrap();
        let re: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(re, 1.0);
    }

    #[test]
    fn bad_mixing_is_config_error() {
        let cli = Cli::try_parse_from(["paramarkov", "law", "--survival", "--mixing", "gamma"]).unwrap();
        assert_eq!(run(&cli.command).unwrap_err().exit_code(), 2);
        let cli = Cli::try_parse_from(["paramarkov", "law", "--survival", "--alpha", "1.5"]).unwrap();
        assert_eq!(run(&cli.command).unwrap_err().exit_code(), 2);
    }
}
