//! The `buffon` command line.
//!
//! Exit codes: 0 on success, 1 on invalid input, 2 when a self-check fails.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::discrepancy::{estimate_sup, DiscConfig};
use crate::geometry::{BodySpec, ConvexBody, Vec2};
use crate::harness::{self, SweepConfig};
use crate::steinhaus::{build_to_length, DirectionRule, SetManifest, ShiftMode, SteinhausSet};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{field}: {message}")]
    Invalid {
        field: &'static str,
        message: String,
    },
    #[error("{0}")]
    Assertion(String),
}

impl CliError {
    fn invalid(field: &'static str, message: impl ToString) -> Self {
        CliError::Invalid {
            field,
            message: message.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid { .. } => 1,
            CliError::Assertion(_) => 2,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "buffon",
    version,
    about = "Shifted Steinhaus grids and their Buffon discrepancy"
)]
pub struct Cli {
    /// JSON file with defaults for the options below and the estimator.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed; every random stream is derived from it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads, 0 for one per core.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a set of exact total length and write its manifest.
    Build(BuildArgs),
    /// Estimate the sup discrepancy of a built set.
    Disc(DiscArgs),
    /// Sweep target lengths and write one CSV row per length.
    Sweep(SweepArgs),
    /// Tail frequencies of the endpoint error for a fixed chord.
    Tails(TailsArgs),
    /// Spread of the grid length over random phases.
    LengthStudy(LengthArgs),
    /// Compare fast crossing counts against explicit segment enumeration.
    OracleCheck(OracleArgs),
    /// Emit gnuplot data and script from a sweep CSV.
    Plot(PlotArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Shifted,
    Zero,
}

impl From<ModeArg> for ShiftMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Shifted => ShiftMode::Shifted,
            ModeArg::Zero => ShiftMode::Zero,
        }
    }
}

#[derive(Debug, Args)]
pub struct EstimatorArgs {
    #[arg(long)]
    pub theta_res: Option<usize>,
    #[arg(long)]
    pub offset_res: Option<usize>,
    #[arg(long)]
    pub refine: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[arg(long)]
    pub body: Option<PathBuf>,
    #[arg(long)]
    pub length: f64,
    #[arg(long, value_enum, default_value = "shifted")]
    pub mode: ModeArg,
    #[arg(long)]
    pub k0: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DiscArgs {
    #[arg(long)]
    pub set: PathBuf,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
    /// Report file; printed to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub body: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "shifted")]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 1e3)]
    pub l_min: f64,
    #[arg(long, default_value_t = 3e6)]
    pub l_max: f64,
    #[arg(long, default_value_t = 8)]
    pub points: usize,
    #[arg(long)]
    pub k0: Option<f64>,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
    /// Fill the wall_time_seconds column; otherwise it is 0.
    #[arg(long)]
    pub timing: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TailsArgs {
    #[arg(long)]
    pub body: Option<PathBuf>,
    #[arg(long, default_value_t = 256)]
    pub n: usize,
    #[arg(long, default_value_t = 0.01)]
    pub eps: f64,
    /// Chord start as `x,y`.
    #[arg(long, value_parser = parse_point, default_value = "0.1,0.2")]
    pub x: Vec2,
    /// Chord end as `x,y`.
    #[arg(long, value_parser = parse_point, default_value = "0.9,0.7")]
    pub y: Vec2,
    #[arg(long, default_value_t = 100_000)]
    pub trials: usize,
    /// Thresholds, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "8,16,24,32")]
    pub s: Vec<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LengthArgs {
    #[arg(long)]
    pub body: Option<PathBuf>,
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Body for a fresh grid; exclusive with `--set`.
    #[arg(long, conflicts_with = "set")]
    pub body: Option<PathBuf>,
    /// Manifest of a built set.
    #[arg(long)]
    pub set: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long, value_enum, default_value = "shifted")]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 10_000)]
    pub lines: usize,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[arg(long)]
    pub csv: PathBuf,
    /// Output stem; `.dat` and `.gp` are appended.
    #[arg(long)]
    pub out: PathBuf,
    /// Divide the sup estimate by `(ln L)^deflate`.
    #[arg(long)]
    pub deflate: Option<f64>,
}

/// Contents of `--config`. Unknown keys are rejected.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub body: Option<PathBuf>,
    pub k0: Option<f64>,
    pub max_retries: Option<u32>,
    pub theta_res: Option<usize>,
    pub offset_res: Option<usize>,
    pub refine_rounds: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::invalid("config", format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::invalid("config", format!("{}: {e}", path.display())))
    }
}

/// Options shared by every subcommand after merging flags over the config file.
struct Context {
    file: FileConfig,
    seed: u64,
}

impl Context {
    fn body(&self, flag: &Option<PathBuf>) -> Result<ConvexBody> {
        let path = flag
            .as_ref()
            .or(self.file.body.as_ref())
            .ok_or_else(|| CliError::invalid("body", "a body file is required (--body)"))?;
        BodySpec::load(path)
            .and_then(|spec| spec.build())
            .map_err(|e| CliError::invalid("body", e))
    }

    fn k0(&self, flag: Option<f64>) -> Result<f64> {
        let k0 = flag
            .or(self.file.k0)
            .unwrap_or(SweepConfig::new(ShiftMode::Shifted, 0).k0);
        if !k0.is_finite() || k0 < 0.0 {
            return Err(CliError::invalid(
                "k0",
                format!("must be a finite non-negative number, got {k0}"),
            ));
        }
        Ok(k0)
    }

    fn max_retries(&self) -> u32 {
        self.file
            .max_retries
            .unwrap_or(SweepConfig::new(ShiftMode::Shifted, 0).max_retries)
    }

    fn disc(&self, args: &EstimatorArgs) -> DiscConfig {
        let d = DiscConfig::default();
        DiscConfig {
            theta_res: args
                .theta_res
                .or(self.file.theta_res)
                .unwrap_or(d.theta_res),
            offset_res: args
                .offset_res
                .or(self.file.offset_res)
                .unwrap_or(d.offset_res),
            refine_rounds: args
                .refine
                .or(self.file.refine_rounds)
                .unwrap_or(d.refine_rounds),
            seed: self.seed,
        }
    }
}

fn parse_point(s: &str) -> std::result::Result<Vec2, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected `x,y`, got `{s}`"));
    }
    let x = parts[0].trim().parse::<f64>().map_err(|e| e.to_string())?;
    let y = parts[1].trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok(Vec2::new(x, y))
}

fn write_text(path: &Path, text: &str, field: &'static str) -> Result<()> {
    std::fs::write(path, text)
        .map_err(|e| CliError::invalid(field, format!("{}: {e}", path.display())))
}

fn emit(out: &Option<PathBuf>, text: String) -> Result<()> {
    match out {
        Some(p) => write_text(p, &(text + "\n"), "out"),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let threads = cli.threads.or(file.threads).unwrap_or(0);
    if threads > 0 {
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    let ctx = Context {
        seed: cli.seed.or(file.seed).unwrap_or(0),
        file,
    };
    match &cli.command {
        Command::Build(a) => build(&ctx, a),
        Command::Disc(a) => disc(&ctx, a),
        Command::Sweep(a) => sweep(&ctx, a),
        Command::Tails(a) => tails(&ctx, a),
        Command::LengthStudy(a) => length_study(&ctx, a),
        Command::OracleCheck(a) => oracle_check(&ctx, a),
        Command::Plot(a) => plot(a),
    }
}

fn build(ctx: &Context, a: &BuildArgs) -> Result<()> {
    let body = ctx.body(&a.body)?;
    let mode = ShiftMode::from(a.mode);
    let built = build_to_length(
        &body,
        a.length,
        ctx.k0(a.k0)?,
        mode,
        DirectionRule::for_mode(mode),
        ctx.seed,
        ctx.max_retries(),
    )
    .map_err(|e| CliError::invalid("length", e))?;
    SetManifest::from_set(&built.set, Some(ctx.seed))
        .save(&a.out)
        .map_err(|e| CliError::invalid("out", e))?;
    println!(
        "n = {}, eps = {:?}, padding segments = {}, total length = {:?}",
        built.set.n(),
        built.set.eps(),
        built.set.padding().len(),
        built.set.total_length()
    );
    Ok(())
}

fn load_set(path: &Path) -> Result<SteinhausSet> {
    SetManifest::load(path)
        .and_then(|m| m.to_set())
        .map_err(|e| CliError::invalid("set", e))
}

fn disc(ctx: &Context, a: &DiscArgs) -> Result<()> {
    let set = load_set(&a.set)?;
    let report = estimate_sup(&set, set.total_length(), &ctx.disc(&a.estimator))
        .map_err(|e| CliError::invalid("estimator", e))?;
    emit(&a.out, report.to_json())
}

fn sweep(ctx: &Context, a: &SweepArgs) -> Result<()> {
    if !(a.l_min > 0.0 && a.l_max >= a.l_min && a.l_max.is_finite()) {
        return Err(CliError::invalid("l_min", "need 0 < l_min <= l_max"));
    }
    if a.points == 0 {
        return Err(CliError::invalid("points", "must be positive"));
    }
    let body = ctx.body(&a.body)?;
    let mut config = SweepConfig::new(a.mode.into(), ctx.seed);
    config.k0 = ctx.k0(a.k0)?;
    config.max_retries = ctx.max_retries();
    config.disc = ctx.disc(&a.estimator);
    config.record_timing = a.timing;
    let lengths = harness::geometric_grid(a.l_min, a.l_max, a.points);
    let result = harness::run_sweep(&body, &lengths, &config);
    let csv = harness::sweep_csv(&result.rows).map_err(|e| CliError::invalid("out", e))?;
    write_text(&a.out, &csv, "out")?;
    for r in &result.rows {
        if r.n < harness::MIN_ASYMPTOTIC_N {
            println!(
                "L = {:?}: n = {} is below {}, row excluded from fits",
                r.l_target,
                r.n,
                harness::MIN_ASYMPTOTIC_N
            );
        }
    }
    if let Ok(fit) = harness::fit_slope(
        &result.rows,
        harness::SweepField::LTarget,
        harness::SweepField::SupEstimate,
        None,
    ) {
        println!(
            "fitted exponent {:.4} over {} rows",
            fit.exponent, fit.points_used
        );
    }
    if result.failures.is_empty() {
        Ok(())
    } else {
        let msgs: Vec<String> = result
            .failures
            .iter()
            .map(|(l, m)| format!("L = {l:?}: {m}"))
            .collect();
        Err(CliError::invalid("length", msgs.join("; ")))
    }
}

fn tails(ctx: &Context, a: &TailsArgs) -> Result<()> {
    let body = ctx.body(&a.body)?;
    for (field, p) in [("x", a.x), ("y", a.y)] {
        if !body.contains(p) {
            return Err(CliError::invalid(field, format!("{p} is outside the body")));
        }
    }
    let study = harness::z_tail_study(&body, a.n, a.eps, a.x, a.y, a.trials, &a.s, ctx.seed)
        .map_err(|e| CliError::invalid("n", e))?;
    emit(
        &a.out,
        serde_json::to_string_pretty(&study).expect("study serializes"),
    )
}

fn length_study(ctx: &Context, a: &LengthArgs) -> Result<()> {
    let body = ctx.body(&a.body)?;
    let study = harness::length_study(&body, a.n, a.eps, a.trials, ctx.seed)
        .map_err(|e| CliError::invalid("n", e))?;
    emit(
        &a.out,
        serde_json::to_string_pretty(&study).expect("study serializes"),
    )
}

fn oracle_check(ctx: &Context, a: &OracleArgs) -> Result<()> {
    let set = match &a.set {
        Some(p) => load_set(p)?,
        None => {
            let body = ctx.body(&a.body)?;
            let n =
                a.n.ok_or_else(|| CliError::invalid("n", "required unless --set is given"))?;
            let eps = a
                .eps
                .ok_or_else(|| CliError::invalid("eps", "required unless --set is given"))?;
            let shifts = ShiftMode::from(a.mode).shifts(n, ctx.seed);
            SteinhausSet::new(body, n, eps, shifts).map_err(|e| CliError::invalid("n", e))?
        }
    };
    let check = harness::oracle_check(&set, a.lines, ctx.seed);
    if let Some(m) = check.mismatch {
        return Err(CliError::Assertion(format!(
            "oracle mismatch on {}: fast path counts {} grid + {} padding crossings, oracle counts {} + {}",
            m.line, m.fast_grid, m.fast_padding, m.oracle_grid, m.oracle_padding
        )));
    }
    print!("{}/{} agree", check.agree, check.lines);
    if check.unresolved > 0 {
        print!(
            " ({} lines stayed exceptional under jitter)",
            check.unresolved
        );
    }
    println!();
    Ok(())
}

fn plot(a: &PlotArgs) -> Result<()> {
    let rows = harness::read_csv(&a.csv).map_err(|e| CliError::invalid("csv", e))?;
    harness::write_gnuplot(&rows, a.deflate, &a.out).map_err(|e| CliError::invalid("out", e))?;
    println!(
        "wrote {} and {}",
        a.out.with_extension("dat").display(),
        a.out.with_extension("gp").display()
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_parser() {
        assert_eq!(parse_point("0.5, -1").unwrap(), Vec2::new(0.5, -1.0));
        assert!(parse_point("1").is_err());
        assert!(parse_point("a,b").is_err());
    }

    #[test]
    fn missing_body_names_field() {
        let cli = Cli::try_parse_from(["buffon", "length-study", "--trials", "10"]).unwrap();
        match execute(cli) {
            Err(CliError::Invalid { field, .. }) => assert_eq!(field, "body"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn config_rejects_unknown_keys() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, r#"{"seed": 1, "theta_resolution": 5}"#).unwrap();
        assert!(matches!(
            FileConfig::load(&p),
            Err(CliError::Invalid {
                field: "config",
                ..
            })
        ));
        std::fs::write(&p, r#"{"seed": 1, "theta_res": 64}"#).unwrap();
        assert_eq!(FileConfig::load(&p).unwrap().theta_res, Some(64));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run(["buffon", "sweep"]), 1);
        assert_eq!(run(["buffon", "--help"]), 0);
        assert_eq!(CliError::Assertion("x".into()).exit_code(), 2);
    }
}
