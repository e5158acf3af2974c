//! Command-line front end: wires kernels, interval families, the operator,
//! and the convergence experiments into reproducible file-based runs.
//!
//! Exit codes: 0 success, 1 domain/hypothesis failure, 2 input/parse failure.
//! Output is byte-deterministic: floats are printed with 17 significant
//! digits, rows in fixed order, `\n` line endings.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::analysis::{self, RateMode, BOUND_VALIDITY_TOLERANCE};
use crate::error::Error;
use crate::functions::{self, TargetFunction};
use crate::intervals::{IntervalSequence, IntervalSpec};
use crate::kernel::{self, Kernel, KernelSpec, Support};
use crate::moments;
use crate::operator::{self, OperatorConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_PARSE: i32 = 2;

/// Defect threshold for certifying compactly supported kernels.
const COMPACT_DEFECT_THRESHOLD: f64 = 1e-10;
/// Defect threshold for decay kernels (grid sup + analytic tail).
const DECAY_DEFECT_THRESHOLD: f64 = 1e-6;
/// Required analytic bound on the truncated series tail for decay kernels.
const DECAY_TAIL_THRESHOLD: f64 = 1e-9;

#[derive(Debug)]
pub enum CliError {
    /// Bad input: malformed JSON/CSV, unreadable files (exit 2).
    Parse(String),
    /// Domain or hypothesis failure (exit 1).
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => EXIT_PARSE,
            CliError::Domain(_) => EXIT_DOMAIN,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Parse(m) => write!(f, "{m}"),
            CliError::Domain(m) => write!(f, "{m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Domain(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "kantorovich-sampling",
    about = "Kantorovich sampling operators: kernels, moments, reconstruction, convergence experiments",
    version
)]
pub struct Cli {
    /// Output file (defaults to stdout, or the config's output.path)
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// Output format
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Size of the thread pool used for parallel evaluation
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Overrides the seed of seeded interval families from the config
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Certify a kernel spec against the admissibility conditions
    VerifyKernel(VerifyKernelArgs),
    /// Compute the moment table of a kernel
    Moments(MomentsArgs),
    /// Evaluate K_w f on a grid
    Apply(ApplyArgs),
    /// Max Voronovskaya residual per w
    Voronovskaya(ConfigOnlyArgs),
    /// Residual/error vs theorem bound per w, with fitted order
    RateTable(RateArgs),
    /// Bound-validity check (adds the compact-support variant when possible)
    BoundCheck(RateArgs),
    /// Reconstruct from averaged samples read from CSV
    Reconstruct(ReconstructArgs),
}

#[derive(Debug, Args)]
pub struct VerifyKernelArgs {
    /// Path to a kernel spec JSON file
    pub spec: PathBuf,
    /// Fractional moment order to include in the certificate
    #[arg(long)]
    pub beta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct MomentsArgs {
    /// Path to a kernel spec JSON file
    pub spec: PathBuf,
    /// Fractional moment order to include in the table
    #[arg(long)]
    pub beta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ApplyArgs {
    /// Path to an experiment config JSON file
    pub config: PathBuf,
    /// Add a column with the point-sampling series T_w f
    #[arg(long)]
    pub compare_sampling: bool,
}

#[derive(Debug, Args)]
pub struct ConfigOnlyArgs {
    /// Path to an experiment config JSON file
    pub config: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Voronovskaya,
    Theorem3,
}

#[derive(Debug, Args)]
pub struct RateArgs {
    /// Path to an experiment config JSON file
    pub config: PathBuf,
    /// Which theorem the bound column comes from
    #[arg(long, value_enum, default_value = "voronovskaya")]
    pub mode: ModeArg,
    /// Hoelder order for theorem3 mode
    #[arg(long, default_value_t = 0.5)]
    pub beta: f64,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    /// CSV file of averaged samples, header "k,value"
    pub samples: PathBuf,
    /// Path to an experiment config JSON file
    pub config: PathBuf,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kernel: KernelSpec,
    pub intervals: IntervalSpec,
    pub function: String,
    pub w_list: Vec<f64>,
    pub x_grid: GridSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: Option<OutputSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub truncation: f64,
    pub quadrature_order: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            truncation: operator::DEFAULT_TRUNCATION_TOLERANCE,
            quadrature_order: operator::DEFAULT_QUADRATURE_ORDER,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: PathBuf,
    pub format: Format,
}

/// 17 significant digits: round-trips every f64 and keeps output byte-stable.
fn fmt_f(v: f64) -> String {
    format!("{v:.16e}")
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Parse(format!("malformed JSON in {}: {e}", path.display())))
}

struct OutputSink {
    path: Option<PathBuf>,
    format: Format,
}

impl OutputSink {
    fn resolve(cli: &Cli, config_output: Option<&OutputSpec>) -> OutputSink {
        OutputSink {
            path: cli
                .output
                .clone()
                .or_else(|| config_output.map(|o| o.path.clone())),
            format: cli
                .format
                .or(config_output.map(|o| o.format))
                .unwrap_or(Format::Csv),
        }
    }

    fn write(&self, content: &str) -> CliResult<()> {
        match &self.path {
            Some(p) => fs::write(p, content)
                .map_err(|e| CliError::Parse(format!("cannot write {}: {e}", p.display()))),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(content.as_bytes())
                    .map_err(|e| CliError::Parse(format!("cannot write stdout: {e}")))
            }
        }
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> CliResult<String> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| CliError::Parse(format!("serialization failed: {e}")))
}

fn load_config(cli: &Cli, path: &Path) -> CliResult<(ExperimentConfig, IntervalSequence)> {
    let mut config: ExperimentConfig = read_json(path)?;
    if let Some(seed) = cli.seed {
        if let IntervalSpec::SymmetricAlpha { seed: s, .. } = &mut config.intervals {
            *s = seed;
        }
    }
    if config.w_list.is_empty() {
        return Err(CliError::Domain("config w_list must be nonempty".into()));
    }
    for pair in config.w_list.windows(2) {
        if !(pair[1] > pair[0]) {
            return Err(CliError::Domain(
                "config w_list must be strictly increasing".into(),
            ));
        }
    }
    let intervals = IntervalSequence::from_spec(&config.intervals)?;
    Ok((config, intervals))
}

fn grid_of(config: &ExperimentConfig) -> Vec<f64> {
    crate::grid::linspace(config.x_grid.start, config.x_grid.stop, config.x_grid.points)
}

fn function_of(config: &ExperimentConfig) -> CliResult<TargetFunction> {
    Ok(functions::builtin(&config.function)?)
}

fn operator_config<'a>(
    kernel: &'a Kernel,
    intervals: &'a IntervalSequence,
    w: f64,
    tol: &Tolerances,
) -> CliResult<OperatorConfig<'a>> {
    Ok(OperatorConfig::new(
        kernel,
        intervals,
        w,
        tol.truncation,
        tol.quadrature_order,
    )?)
}

pub fn run(cli: &Cli) -> CliResult<i32> {
    if let Some(n) = cli.threads {
        // ignore "already initialized": harmless on repeat calls in-process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match &cli.command {
        Command::VerifyKernel(args) => cmd_verify_kernel(cli, args),
        Command::Moments(args) => cmd_moments(cli, args),
        Command::Apply(args) => cmd_apply(cli, args),
        Command::Voronovskaya(args) => cmd_voronovskaya(cli, args),
        Command::RateTable(args) => cmd_rate_table(cli, args, false),
        Command::BoundCheck(args) => cmd_rate_table(cli, args, true),
        Command::Reconstruct(args) => cmd_reconstruct(cli, args),
    }
}

fn kv_csv(pairs: &[(String, String)]) -> String {
    let mut s = String::from("key,value\n");
    for (k, v) in pairs {
        s.push_str(k);
        s.push(',');
        s.push_str(v);
        s.push('\n');
    }
    s
}

fn cmd_verify_kernel(cli: &Cli, args: &VerifyKernelArgs) -> CliResult<i32> {
    let spec: KernelSpec = read_json(&args.spec)?;
    let kernel = Kernel::from_spec(spec)?;
    let radii: Vec<f64> = match kernel.support() {
        Support::CompactInterval { .. } => vec![1.0, 2.0, 4.0, 8.0],
        Support::PolynomialDecay { .. } => vec![5.0, 10.0, 20.0, 40.0],
    };
    let cert = kernel::certify(&kernel, 1024, &radii, args.beta)?;

    let (threshold, tail_ok) = match kernel.support() {
        Support::CompactInterval { .. } => (COMPACT_DEFECT_THRESHOLD, true),
        Support::PolynomialDecay { .. } => (
            DECAY_DEFECT_THRESHOLD,
            cert.series_tail_bound <= DECAY_TAIL_THRESHOLD,
        ),
    };
    let ok = cert.partition_of_unity_defect <= threshold
        && cert.first_moment_defect <= threshold
        && cert.m2_finite
        && tail_ok;

    let sink = OutputSink::resolve(cli, None);
    match sink.format {
        Format::Json => sink.write(&to_json(&cert)?)?,
        Format::Csv => {
            let mut pairs = vec![
                ("kernel".to_string(), cert.kernel.clone()),
                ("grid_size".to_string(), cert.grid_size.to_string()),
                (
                    "partition_of_unity_defect".to_string(),
                    fmt_f(cert.partition_of_unity_defect),
                ),
                (
                    "first_moment_defect".to_string(),
                    fmt_f(cert.first_moment_defect),
                ),
                ("m2_finite".to_string(), cert.m2_finite.to_string()),
                ("m2_sup".to_string(), fmt_f(cert.m2_sup)),
                (
                    "series_tail_bound".to_string(),
                    fmt_f(cert.series_tail_bound),
                ),
                ("m2_tail_bound".to_string(), fmt_f(cert.m2_tail_bound)),
            ];
            for t in &cert.tail_vanishing {
                pairs.push((format!("tail_at_radius_{}", t.radius), fmt_f(t.value)));
            }
            if let Some(fb) = &cert.fractional_beta {
                pairs.push((format!("fractional_moment_{}", fb.beta), fmt_f(fb.value)));
            }
            pairs.push(("admissible".to_string(), ok.to_string()));
            sink.write(&kv_csv(&pairs))?;
        }
    }
    Ok(if ok { EXIT_OK } else { EXIT_DOMAIN })
}

fn cmd_moments(cli: &Cli, args: &MomentsArgs) -> CliResult<i32> {
    let spec: KernelSpec = read_json(&args.spec)?;
    let kernel = Kernel::from_spec(spec)?;
    let table = moments::moment_table(&kernel, args.beta)?;
    let sink = OutputSink::resolve(cli, None);
    match sink.format {
        Format::Json => sink.write(&to_json(&table)?)?,
        Format::Csv => {
            let mut pairs = vec![
                ("kernel".to_string(), table.kernel_name.clone()),
                ("m0_defect".to_string(), fmt_f(table.m0_defect)),
                ("m1_defect".to_string(), fmt_f(table.m1_defect)),
                ("m0".to_string(), fmt_f(table.m0)),
                ("m1".to_string(), fmt_f(table.m1)),
                ("m2".to_string(), fmt_f(table.m2)),
                (
                    "truncation_radius".to_string(),
                    fmt_f(table.truncation_radius),
                ),
                ("tail_bound".to_string(), fmt_f(table.tail_bound)),
            ];
            if let Some(fe) = &table.fractional {
                pairs.push((format!("fractional_moment_{}", fe.beta), fmt_f(fe.value)));
            }
            sink.write(&kv_csv(&pairs))?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_apply(cli: &Cli, args: &ApplyArgs) -> CliResult<i32> {
    let (config, intervals) = load_config(cli, &args.config)?;
    let kernel = Kernel::from_spec(config.kernel.clone())?;
    let f = function_of(&config)?;
    let grid = grid_of(&config);
    let w = config.w_list[0];
    let cfg = operator_config(&kernel, &intervals, w, &config.tolerances)?;

    let kw = operator::apply_on_grid(&f, &grid, &cfg)?;
    let tw = if args.compare_sampling {
        let mut v = Vec::with_capacity(grid.len());
        for &x in &grid {
            v.push(operator::apply_generalized_sampling(&f, x, &cfg)?);
        }
        Some(v)
    } else {
        None
    };

    let sink = OutputSink::resolve(cli, config.output.as_ref());
    match sink.format {
        Format::Csv => {
            let mut s = String::from(if tw.is_some() {
                "x,kantorovich,sampling\n"
            } else {
                "x,kantorovich\n"
            });
            for (i, &x) in grid.iter().enumerate() {
                s.push_str(&fmt_f(x));
                s.push(',');
                s.push_str(&fmt_f(kw[i]));
                if let Some(tw) = &tw {
                    s.push(',');
                    s.push_str(&fmt_f(tw[i]));
                }
                s.push('\n');
            }
            sink.write(&s)?;
        }
        Format::Json => {
            let rows: Vec<serde_json::Value> = grid
                .iter()
                .enumerate()
                .map(|(i, &x)| {
                    let mut row = serde_json::json!({ "x": x, "kantorovich": kw[i] });
                    if let Some(tw) = &tw {
                        row["sampling"] = serde_json::json!(tw[i]);
                    }
                    row
                })
                .collect();
            sink.write(&to_json(&serde_json::json!({
                "w": w,
                "kernel": kernel.name(),
                "intervals": intervals.describe(),
                "function": f.name(),
                "rows": rows,
            }))?)?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_voronovskaya(cli: &Cli, args: &ConfigOnlyArgs) -> CliResult<i32> {
    let (config, intervals) = load_config(cli, &args.config)?;
    let kernel = Kernel::from_spec(config.kernel.clone())?;
    let f = function_of(&config)?;
    let grid = grid_of(&config);

    let mut rows = Vec::with_capacity(config.w_list.len());
    for &w in &config.w_list {
        let cfg = operator_config(&kernel, &intervals, w, &config.tolerances)?;
        let mut max = 0.0f64;
        for &x in &grid {
            max = max.max(analysis::voronovskaya_residual(&f, x, &cfg)?.abs());
        }
        rows.push((w, max));
    }

    let sink = OutputSink::resolve(cli, config.output.as_ref());
    match sink.format {
        Format::Csv => {
            let mut s = String::from("w,max_abs_residual\n");
            for (w, r) in &rows {
                s.push_str(&format!("{},{}\n", fmt_f(*w), fmt_f(*r)));
            }
            sink.write(&s)?;
        }
        Format::Json => {
            let rows: Vec<serde_json::Value> = rows
                .iter()
                .map(|(w, r)| serde_json::json!({ "w": w, "max_abs_residual": r }))
                .collect();
            sink.write(&to_json(&serde_json::json!({
                "kernel": kernel.name(),
                "intervals": intervals.describe(),
                "function": f.name(),
                "alpha": intervals.alpha(),
                "rows": rows,
            }))?)?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_rate_table(cli: &Cli, args: &RateArgs, with_compact: bool) -> CliResult<i32> {
    let (config, intervals) = load_config(cli, &args.config)?;
    let kernel = Kernel::from_spec(config.kernel.clone())?;
    let f = function_of(&config)?;
    let grid = grid_of(&config);
    let mode = match args.mode {
        ModeArg::Voronovskaya => RateMode::Voronovskaya,
        ModeArg::Theorem3 => RateMode::HolderOrder { beta: args.beta },
    };

    let report = analysis::rate_table(&f, &kernel, &intervals, &config.w_list, &grid, mode)?;

    // compact-support variant of the first-order bound, where applicable
    let compact_bounds: Option<Vec<f64>> = if with_compact
        && mode == RateMode::Voronovskaya
        && kernel.compact_radius().is_some()
    {
        let r = kernel.compact_radius().unwrap();
        let table = moments::moment_table_cached(&kernel, None)?;
        let profile = analysis::derivative_modulus_profile(&f, &intervals, &config.w_list)?;
        let mut v = Vec::with_capacity(config.w_list.len());
        for &w in &config.w_list {
            let cfg = operator_config(&kernel, &intervals, w, &config.tolerances)?;
            v.push(analysis::theorem2_bound_compact(
                &f, &cfg, &table, &profile, r,
            )?);
        }
        Some(v)
    } else {
        None
    };

    let sink = OutputSink::resolve(cli, config.output.as_ref());
    match sink.format {
        Format::Csv => {
            let mut s = String::from(if compact_bounds.is_some() {
                "w,max_abs_residual,theorem_bound,ratio,compact_bound\n"
            } else {
                "w,max_abs_residual,theorem_bound,ratio\n"
            });
            for (i, row) in report.rows.iter().enumerate() {
                s.push_str(&format!(
                    "{},{},{},{}",
                    fmt_f(row.w),
                    fmt_f(row.max_abs_residual),
                    fmt_f(row.theorem_bound),
                    fmt_f(row.ratio)
                ));
                if let Some(cb) = &compact_bounds {
                    s.push(',');
                    s.push_str(&fmt_f(cb[i]));
                }
                s.push('\n');
            }
            sink.write(&s)?;
        }
        Format::Json => {
            let mut value = serde_json::to_value(&report)
                .map_err(|e| CliError::Parse(format!("serialization failed: {e}")))?;
            if let Some(cb) = &compact_bounds {
                value["compact_bounds"] = serde_json::json!(cb);
            }
            sink.write(&to_json(&value)?)?;
        }
    }

    match report.fitted_order {
        Some(order) => println!("fitted_order = {}", fmt_f(order)),
        None => println!("fitted_order = n/a (errors at floating-point floor)"),
    }

    let mut ok = report.bounds_hold();
    if let Some(cb) = &compact_bounds {
        for (i, row) in report.rows.iter().enumerate() {
            // the tighter of the two bounds must still dominate
            let best = row.theorem_bound.min(cb[i]);
            if row.max_abs_residual > best * BOUND_VALIDITY_TOLERANCE
                && row.max_abs_residual > analysis::ZERO_BOUND_FLOOR
            {
                ok = false;
            }
        }
    }
    if !ok {
        eprintln!(
            "bound-validity violation: residual exceeds bound * {BOUND_VALIDITY_TOLERANCE}"
        );
        return Ok(EXIT_DOMAIN);
    }
    Ok(EXIT_OK)
}

fn parse_samples(path: &Path) -> CliResult<BTreeMap<i64, f64>> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == "k,value" => {}
        other => {
            return Err(CliError::Parse(format!(
                "samples CSV must start with header 'k,value', got {other:?}"
            )))
        }
    }
    let mut map = BTreeMap::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (ks, vs) = line.split_once(',').ok_or_else(|| {
            CliError::Parse(format!("line {}: expected 'k,value'", lineno + 2))
        })?;
        let k: i64 = ks
            .trim()
            .parse()
            .map_err(|e| CliError::Parse(format!("line {}: bad index: {e}", lineno + 2)))?;
        let v: f64 = vs
            .trim()
            .parse()
            .map_err(|e| CliError::Parse(format!("line {}: bad value: {e}", lineno + 2)))?;
        if !v.is_finite() {
            return Err(CliError::Parse(format!(
                "line {}: sample value must be finite",
                lineno + 2
            )));
        }
        map.insert(k, v);
    }
    Ok(map)
}

fn cmd_reconstruct(cli: &Cli, args: &ReconstructArgs) -> CliResult<i32> {
    let samples = parse_samples(&args.samples)?;
    let (config, intervals) = load_config(cli, &args.config)?;
    let kernel = Kernel::from_spec(config.kernel.clone())?;
    let grid = grid_of(&config);
    let w = config.w_list[0];
    let cfg = operator_config(&kernel, &intervals, w, &config.tolerances)?;

    let mut values = Vec::with_capacity(grid.len());
    for &x in &grid {
        match operator::apply_from_samples(&samples, x, &cfg) {
            Ok(v) => values.push(v),
            Err(Error::MissingSample(k)) => {
                return Err(CliError::Domain(format!(
                    "sample gap: index k = {k} required for x = {x} is missing"
                )))
            }
            Err(e) => return Err(e.into()),
        }
    }

    let sink = OutputSink::resolve(cli, config.output.as_ref());
    match sink.format {
        Format::Csv => {
            let mut s = String::from("x,reconstruction\n");
            for (i, &x) in grid.iter().enumerate() {
                s.push_str(&format!("{},{}\n", fmt_f(x), fmt_f(values[i])));
            }
            sink.write(&s)?;
        }
        Format::Json => {
            let rows: Vec<serde_json::Value> = grid
                .iter()
                .zip(&values)
                .map(|(&x, &v)| serde_json::json!({ "x": x, "reconstruction": v }))
                .collect();
            sink.write(&to_json(&serde_json::json!({
                "w": w,
                "kernel": kernel.name(),
                "rows": rows,
            }))?)?;
        }
    }
    Ok(EXIT_OK)
}
