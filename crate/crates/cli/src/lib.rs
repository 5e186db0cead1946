//! Command-line driver: bound curves, SNR thresholds, crossover regions and
//! exponent tables written as CSV (with `#` metadata) or JSON.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use spbound::analysis::{
    crossover_length, evaluate_bound_spec, snr_threshold, ChannelFamily, ThresholdQuery,
};
use spbound::channel::{make_bsc, make_mpsk_awgn, Channel, DiscreteChannel, DEFAULT_QUAD_ORDER};
use spbound::exponents::{esp, random_coding_exponent};
use spbound::numeric::db_to_linear;
use spbound::{BoundError, BoundKind, CodeSpec};
use thiserror::Error;

pub mod check;

/// Environment variable read for the worker thread count.
pub const THREADS_ENV: &str = "SPBOUND_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration `{field}`: {reason}")]
    Config { field: String, reason: String },
    #[error(transparent)]
    Bound(#[from] BoundError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Check(String),
}

impl CliError {
    /// 2 for anything the user can fix in the configuration, 3 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Io { .. } => 2,
            CliError::Bound(BoundError::InvalidParameter { .. } | BoundError::NotStochastic { .. }) => 2,
            CliError::Bound(_) | CliError::Check(_) => 3,
        }
    }
}

fn config_err(field: &str, reason: impl Into<String>) -> CliError {
    CliError::Config { field: field.to_string(), reason: reason.into() }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser, Serialize)]
#[command(name = "spbound", version, about = "Sphere-packing and random-coding bounds for block codes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// write output here instead of stdout
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
    /// emit JSON instead of CSV
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// ln P_e of each bound over an Eb/N0 grid
    Curve(CurveArgs),
    /// Eb/N0 at which each bound reaches a target error probability
    Threshold(ThresholdArgs),
    /// smallest block length at which one bound overtakes another, per rate
    Region(RegionArgs),
    /// sphere-packing and random-coding exponents over a rate grid
    Exponent(ExponentArgs),
    /// run the built-in invariant checks
    Check,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelName {
    Bsc,
    BpskAwgn,
    QpskAwgn,
    #[value(name = "8psk-awgn")]
    #[serde(rename = "8psk-awgn")]
    Psk8Awgn,
    DmcFile,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RateUnit {
    Bits,
    Nats,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SnrUnit {
    Db,
    Linear,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AwgnArgs {
    #[arg(long, value_enum)]
    pub channel: ChannelName,
    /// Gauss-Legendre order per axis for the AWGN integrals
    #[arg(long, default_value_t = DEFAULT_QUAD_ORDER)]
    pub quad_order: usize,
}

impl AwgnArgs {
    fn family(&self) -> Result<ChannelFamily> {
        if self.quad_order < 2 {
            return Err(config_err("quad_order", "must be at least 2"));
        }
        let m = match self.channel {
            ChannelName::BpskAwgn => 2,
            ChannelName::QpskAwgn => 4,
            ChannelName::Psk8Awgn => 8,
            other => {
                return Err(config_err("channel", format!("{other:?} has no SNR axis; use an AWGN channel")))
            }
        };
        Ok(ChannelFamily::Psk { m, quad_order: self.quad_order })
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CodeArgs {
    /// block length in channel uses
    #[arg(short, long)]
    pub n: u64,
    #[arg(short, long)]
    pub rate: f64,
    #[arg(long, value_enum, default_value_t = RateUnit::Bits)]
    pub rate_unit: RateUnit,
    /// fraction of codewords kept by expurgation (ISP only)
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
}

impl CodeArgs {
    fn spec(&self) -> Result<CodeSpec> {
        let nats = to_nats(self.rate, self.rate_unit);
        Ok(CodeSpec::new(self.n, nats)?.with_alpha(self.alpha)?)
    }
}

fn to_nats(rate: f64, unit: RateUnit) -> f64 {
    match unit {
        RateUnit::Bits => rate * std::f64::consts::LN_2,
        RateUnit::Nats => rate,
    }
}

fn to_bits(rate: f64, unit: RateUnit) -> f64 {
    match unit {
        RateUnit::Bits => rate,
        RateUnit::Nats => rate / std::f64::consts::LN_2,
    }
}

fn parse_bounds(list: &[BoundKind], field: &str) -> Result<Vec<BoundKind>> {
    if list.is_empty() {
        return Err(config_err(field, "empty bound list"));
    }
    if list.contains(&BoundKind::Sp67) {
        return Err(config_err(field, "sp67 needs a discrete channel; use the exponent subcommand"));
    }
    Ok(list.to_vec())
}

fn bound_kind(s: &str) -> std::result::Result<BoundKind, String> {
    s.parse()
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CurveArgs {
    #[command(flatten)]
    pub awgn: AwgnArgs,
    #[command(flatten)]
    pub code: CodeArgs,
    /// comma-separated: sp59, vf, isp, rc, clb
    #[arg(long, value_delimiter = ',', value_parser = bound_kind, default_value = "sp59,vf,isp,rc")]
    pub bounds: Vec<BoundKind>,
    /// Eb/N0 grid start (dB)
    #[arg(long, default_value_t = 0.0)]
    pub snr_start: f64,
    /// Eb/N0 grid end (dB, inclusive)
    #[arg(long, default_value_t = 6.0)]
    pub snr_stop: f64,
    #[arg(long, default_value_t = 0.25)]
    pub snr_step: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ThresholdArgs {
    #[command(flatten)]
    pub awgn: AwgnArgs,
    #[arg(short, long)]
    pub n: u64,
    #[arg(short, long)]
    pub rate: f64,
    #[arg(long, value_enum, default_value_t = RateUnit::Bits)]
    pub rate_unit: RateUnit,
    #[arg(long, value_delimiter = ',', value_parser = bound_kind, default_value = "sp59,vf,isp,rc,clb")]
    pub bounds: Vec<BoundKind>,
    /// comma-separated target error probabilities
    #[arg(long, value_delimiter = ',', default_value = "1e-5")]
    pub pe: Vec<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RegionArgs {
    #[command(flatten)]
    pub awgn: AwgnArgs,
    #[arg(long)]
    pub rate_start: f64,
    /// inclusive; defaults to the start (a single rate)
    #[arg(long)]
    pub rate_stop: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    pub rate_step: f64,
    #[arg(long, value_enum, default_value_t = RateUnit::Bits)]
    pub rate_unit: RateUnit,
    /// comma-separated bound pairs `a:b`; each column is the smallest N at
    /// which `a` has a threshold at least as high as `b`
    #[arg(long, value_delimiter = ',', default_value = "isp:sp59,vf:sp59")]
    pub pairs: Vec<String>,
    #[arg(long, default_value_t = 1e-6)]
    pub pe: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ExponentArgs {
    #[arg(long, value_enum)]
    pub channel: ChannelName,
    /// crossover probability for `bsc`
    #[arg(long)]
    pub p: Option<f64>,
    /// transition matrix file for `dmc-file`: "K J" then K rows of J probabilities
    #[arg(long)]
    pub dmc: Option<PathBuf>,
    /// symbol SNR Es/N0 for the AWGN channels
    #[arg(long)]
    pub snr: Option<f64>,
    #[arg(long, value_enum, default_value_t = SnrUnit::Db)]
    pub snr_unit: SnrUnit,
    #[arg(long, default_value_t = DEFAULT_QUAD_ORDER)]
    pub quad_order: usize,
    #[arg(long, default_value_t = 0.05)]
    pub rate_start: f64,
    #[arg(long)]
    pub rate_stop: f64,
    #[arg(long, default_value_t = 0.05)]
    pub rate_step: f64,
    #[arg(long, value_enum, default_value_t = RateUnit::Nats)]
    pub rate_unit: RateUnit,
}

/// Parses the plain-text DMC format: first line "K J", then K rows of J
/// probabilities each.
pub fn parse_dmc(text: &str) -> Result<DiscreteChannel> {
    let mut tokens = text.split_whitespace();
    let mut dim = |what: &str| -> Result<usize> {
        tokens
            .next()
            .ok_or_else(|| config_err("dmc", format!("missing {what}")))?
            .parse()
            .map_err(|e| config_err("dmc", format!("{what}: {e}")))
    };
    let (k, j) = (dim("K")?, dim("J")?);
    let values: Vec<f64> = tokens
        .map(|t| t.parse().map_err(|e| config_err("dmc", format!("`{t}`: {e}"))))
        .collect::<Result<_>>()?;
    if values.len() != k * j {
        return Err(config_err("dmc", format!("expected {} probabilities, found {}", k * j, values.len())));
    }
    Ok(DiscreteChannel::new(values.chunks(j).map(<[f64]>::to_vec).collect())?)
}

fn read_dmc(path: &Path) -> Result<DiscreteChannel> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    parse_dmc(&text)
}

/// Inclusive arithmetic grid; the endpoint is kept when it is within rounding.
fn grid(start: f64, stop: f64, step: f64, field: &str) -> Result<Vec<f64>> {
    if !(start.is_finite() && stop.is_finite()) || stop < start {
        return Err(config_err(field, format!("range [{start}, {stop}] is empty")));
    }
    if !(step > 0.0) {
        return Err(config_err(field, "step must be positive"));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    if count > 100_000 {
        return Err(config_err(field, format!("{count} points is too many")));
    }
    Ok((0..count).map(|i| start + step * i as f64).collect())
}

/// One table entry; a missing number is a failed or censored evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Num(Option<f64>),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(Some(v))
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        Cell::Num(v)
    }
}

impl Cell {
    fn csv_field(&self) -> String {
        match self {
            Cell::Num(v) => v.map(|x| (x + 0.0).to_string()).unwrap_or_default(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Num(v) => v.map_or(serde_json::Value::Null, |x| (x + 0.0).into()),
            Cell::Text(s) => s.clone().into(),
        }
    }
}

/// A rectangular result: named columns, one row per grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Serialize)]
struct JsonDoc<'a> {
    version: &'a str,
    config: &'a Cli,
    columns: &'a [String],
    rows: Vec<serde_json::Map<String, serde_json::Value>>,
}

/// Renders the table as CSV with a `#` metadata header, or as JSON.
pub fn render(cli: &Cli, table: &Table) -> Result<String> {
    let version = env!("CARGO_PKG_VERSION");
    let config = serde_json::to_string(cli).expect("config serialises");
    if cli.json {
        let rows = table
            .rows
            .iter()
            .map(|r| {
                table
                    .columns
                    .iter()
                    .zip(r)
                    .map(|(c, v)| (c.clone(), v.json()))
                    .collect()
            })
            .collect();
        let doc = JsonDoc { version, config: cli, columns: &table.columns, rows };
        let mut s = serde_json::to_string_pretty(&doc).expect("document serialises");
        s.push('\n');
        return Ok(s);
    }
    let mut out = String::new();
    writeln!(out, "# spbound {version}").unwrap();
    writeln!(out, "# config: {config}").unwrap();
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Check(format!("csv: {e}"));
    w.write_record(&table.columns).map_err(csv_err)?;
    for row in &table.rows {
        w.write_record(row.iter().map(Cell::csv_field)).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Check(format!("csv: {e}")))?;
    out.push_str(&String::from_utf8(bytes).expect("csv is utf-8"));
    Ok(out)
}

pub fn run_curve(a: &CurveArgs) -> Result<Table> {
    let family = a.awgn.family()?;
    let spec = a.code.spec()?;
    let bounds = parse_bounds(&a.bounds, "bounds")?;
    let snrs = grid(a.snr_start, a.snr_stop, a.snr_step, "snr")?;
    // fail on a bad rate before starting the sweep
    evaluate_bound_spec(BoundKind::Clb, &family, &spec, snrs[0])?;
    let rows: Vec<Vec<Cell>> = snrs
        .par_iter()
        .map(|&db| {
            let mut row = vec![Cell::from(db)];
            row.extend(bounds.iter().map(|&k| evaluate_bound_spec(k, &family, &spec, db).ok().map(|r| r.log_pe).into()));
            row
        })
        .collect();
    let mut columns = vec!["eb_n0_db".to_string()];
    columns.extend(bounds.iter().map(|k| format!("ln_pe_{k}")));
    Ok(Table { columns, rows })
}

pub fn run_threshold(a: &ThresholdArgs) -> Result<Table> {
    let family = a.awgn.family()?;
    let bounds = parse_bounds(&a.bounds, "bounds")?;
    if a.pe.is_empty() {
        return Err(config_err("pe", "no target probabilities"));
    }
    let rate_bits = to_bits(a.rate, a.rate_unit);
    let queries: Vec<ThresholdQuery> = a
        .pe
        .iter()
        .flat_map(|&pe| {
            bounds.iter().map(move |&k| ThresholdQuery {
                bound_kind: k,
                channel_family: family,
                n: a.n,
                rate_bits,
                target_pe: pe,
            })
        })
        .collect();
    for q in &queries {
        q.validate()?;
    }
    let results: Vec<Option<f64>> =
        queries.par_iter().map(|q| snr_threshold(q).ok().map(|t| t.eb_over_n0_db)).collect();
    let mut columns = vec!["pe_target".to_string()];
    columns.extend(bounds.iter().map(|k| format!("eb_n0_db_{k}")));
    let rows = a
        .pe
        .iter()
        .zip(results.chunks(bounds.len()))
        .map(|(&pe, r)| std::iter::once(Cell::from(pe)).chain(r.iter().map(|&v| v.into())).collect())
        .collect();
    Ok(Table { columns, rows })
}

fn parse_pair(s: &str) -> Result<(BoundKind, BoundKind)> {
    let (a, b) = s.split_once(':').ok_or_else(|| config_err("pairs", format!("`{s}` is not of the form a:b")))?;
    let k = |x: &str| x.trim().parse::<BoundKind>().map_err(|e| config_err("pairs", e));
    Ok((k(a)?, k(b)?))
}

pub fn run_region(a: &RegionArgs) -> Result<Table> {
    let family = a.awgn.family()?;
    if !(a.pe > 0.0 && a.pe < 1.0) {
        return Err(config_err("pe", format!("{} outside (0, 1)", a.pe)));
    }
    let pairs = a.pairs.iter().map(|p| parse_pair(p)).collect::<Result<Vec<_>>>()?;
    if pairs.is_empty() {
        return Err(config_err("pairs", "empty bound list"));
    }
    parse_bounds(&pairs.iter().flat_map(|&(x, y)| [x, y]).collect::<Vec<_>>(), "pairs")?;
    let rates = grid(a.rate_start, a.rate_stop.unwrap_or(a.rate_start), a.rate_step, "rate")?;
    let jobs: Vec<(f64, (BoundKind, BoundKind))> =
        rates.iter().flat_map(|&r| pairs.iter().map(move |&p| (to_bits(r, a.rate_unit), p))).collect();
    for &(r, (x, _)) in &jobs {
        ThresholdQuery { bound_kind: x, channel_family: family, n: 1, rate_bits: r, target_pe: a.pe }.validate()?;
    }
    let found = jobs
        .par_iter()
        .map(|&(r, (x, y))| crossover_length(&family, r, a.pe, x, y))
        .collect::<spbound::Result<Vec<_>>>()?;
    let mut columns = vec!["rate".to_string(), "pe_target".to_string()];
    columns.extend(pairs.iter().map(|(x, y)| format!("n_{x}_vs_{y}")));
    // censored entries (no crossover below the search limit) are left empty
    let rows = rates
        .iter()
        .zip(found.chunks(pairs.len()))
        .map(|(&r, c)| {
            [Cell::from(r), Cell::from(a.pe)].into_iter().chain(c.iter().map(|x| x.n.map(|n| n as f64).into())).collect()
        })
        .collect();
    Ok(Table { columns, rows })
}

fn exponent_channel(a: &ExponentArgs) -> Result<Channel> {
    let es = || -> Result<f64> {
        let v = a.snr.ok_or_else(|| config_err("snr", "required for AWGN channels"))?;
        Ok(match a.snr_unit {
            SnrUnit::Db => db_to_linear(v),
            SnrUnit::Linear => v,
        })
    };
    let psk = |m| -> Result<Channel> { Ok(make_mpsk_awgn(m, es()?, a.quad_order)?.into()) };
    match a.channel {
        ChannelName::Bsc => {
            let p = a.p.ok_or_else(|| config_err("p", "required for bsc"))?;
            Ok(make_bsc(p)?.into())
        }
        ChannelName::DmcFile => {
            let path = a.dmc.as_ref().ok_or_else(|| config_err("dmc", "required for dmc-file"))?;
            Ok(read_dmc(path)?.into())
        }
        ChannelName::BpskAwgn => psk(2),
        ChannelName::QpskAwgn => psk(4),
        ChannelName::Psk8Awgn => psk(8),
    }
}

pub fn run_exponent(a: &ExponentArgs) -> Result<Table> {
    let ch = exponent_channel(a)?;
    let rates = grid(a.rate_start, a.rate_stop, a.rate_step, "rate")?;
    if !(rates[0] > 0.0) {
        return Err(config_err("rate", "rates must be positive"));
    }
    let rows = rates
        .par_iter()
        .map(|&r| -> Result<Vec<Cell>> {
            let nats = to_nats(r, a.rate_unit);
            let sp = esp(&ch, nats)?;
            let (er, rho_r) = random_coding_exponent(&ch, nats)?;
            Ok(vec![r.into(), sp.value.into(), sp.optimizer_rho.into(), er.into(), rho_r.into()])
        })
        .collect::<Result<Vec<_>>>()?;
    let unit = match a.rate_unit {
        RateUnit::Bits => "bits",
        RateUnit::Nats => "nats",
    };
    let columns = [format!("rate_{unit}"), "e_sp".into(), "rho_sp".into(), "e_r".into(), "rho_r".into()];
    Ok(Table { columns: columns.to_vec(), rows })
}

/// Runs one invocation and writes its output.
pub fn run(cli: &Cli) -> Result<()> {
    let table = match &cli.command {
        Command::Curve(a) => run_curve(a)?,
        Command::Threshold(a) => run_threshold(a)?,
        Command::Region(a) => run_region(a)?,
        Command::Exponent(a) => run_exponent(a)?,
        Command::Check => check::run_checks(),
    };
    let text = render(cli, &table)?;
    match &cli.output {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io { path: path.clone(), source })?,
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io { path: "<stdout>".into(), source })?,
    }
    if let Command::Check = cli.command {
        let failed = check::failures(&table);
        if failed > 0 {
            return Err(CliError::Check(format!("{failed} check(s) failed")));
        }
    }
    Ok(())
}

/// Sizes the global thread pool from [`THREADS_ENV`] when it is set.
pub fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v.trim().parse().map_err(|_| config_err(THREADS_ENV, format!("`{v}` is not a thread count")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| config_err(THREADS_ENV, e.to_string()))
}
