//! Batch driver for the ribbon-graph laboratory: sampling runs, statistics
//! reports, theory curves, volume tables, stable-graph listings, and the
//! acceptance battery. All randomness flows from `--seed`; outputs carry no
//! wall-clock values, so reruns of a fixed config are byte-identical.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use ribbonlab::acceptance::run_all;
use ribbonlab::run::{
    build_report, parse_grid, parse_interval, read_sample_jsonl, run_trials, write_histogram_csv,
    write_sample_jsonl, write_stablegraphs_json, write_theory_csv, write_volumes_csv, RunConfig,
    VolumeTable,
};

#[derive(Parser)]
#[command(name = "ribbonlab", version, about = "Random one-faced metric ribbon graphs at large genus")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample uniform one-faced trivalent metric maps, one JSONL record per trial
    Sample(SampleArgs),
    /// Aggregate a sample log into a statistics report plus histogram CSV
    Report(ReportArgs),
    /// Tabulate the limiting cycle-length intensity over a grid
    Theory(TheoryArgs),
    /// Compare exact volume formulas against their large-genus forms
    Volumes(VolumesArgs),
    /// List stable graph classes with automorphism orders and bound checks
    Stablegraphs(StableArgs),
    /// Run the acceptance battery, one line per criterion
    Verify,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    genus: u32,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Total boundary length (default 12·genus)
    #[arg(long)]
    boundary_total: Option<f64>,
    /// Census records cycles of length below this bound
    #[arg(long, default_value_t = 4.0)]
    b_max: f64,
    /// Census records cycles of at most this many edges
    #[arg(long, default_value_t = 12)]
    d_max: usize,
    /// Worker threads (env RIBBONSPEC_THREADS overrides)
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Suppress the metadata header line
    #[arg(long)]
    no_meta: bool,
}

#[derive(Args)]
struct ReportArgs {
    /// Sample log produced by `sample`
    #[arg(long)]
    input: PathBuf,
    /// Interval `a:b[:r]` for count statistics (repeatable; default four unit
    /// intervals covering [0, 4))
    #[arg(long = "interval")]
    intervals: Vec<String>,
    /// Histogram bin count over [0, b_max)
    #[arg(long, default_value_t = 50)]
    bins: usize,
    /// Report JSON path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Histogram CSV path (skipped when omitted)
    #[arg(long)]
    histogram: Option<PathBuf>,
    /// Suppress the histogram CSV comment header
    #[arg(long)]
    no_meta: bool,
}

#[derive(Args)]
struct TheoryArgs {
    /// Boundary scaling constant
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    /// Evaluation grid `start:stop:step`
    #[arg(long, default_value = "0:4:0.01")]
    grid: String,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    no_meta: bool,
}

#[derive(Args)]
struct VolumesArgs {
    /// Table family: `g1` (exact vs series), `saddle`, or `both`
    #[arg(long, default_value = "both")]
    family: String,
    /// Largest genus of the doubling ladder 8, 16, ..
    #[arg(long, default_value_t = 128)]
    gmax: u32,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    no_meta: bool,
}

#[derive(Args)]
struct StableArgs {
    #[arg(long)]
    genus: u32,
    #[arg(long)]
    leaves: usize,
    /// Keep only classes with a separating structure
    #[arg(long)]
    separating_only: bool,
    /// Attach the vertex-factorization inequality check to separating classes
    #[arg(long)]
    check_kk: bool,
    /// Append the summed separating bound with this constant
    #[arg(long)]
    sum_bound: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn writer(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn cmd_sample(args: SampleArgs) -> Result<()> {
    let mut cfg = RunConfig::new(args.genus, args.seed);
    cfg.trials = args.trials;
    cfg.boundary_total = args.boundary_total;
    cfg.b_max = args.b_max;
    cfg.d_max = args.d_max;
    cfg.workers = match std::env::var("RIBBONSPEC_THREADS") {
        Ok(v) => v.parse().context("RIBBONSPEC_THREADS must be a worker count")?,
        Err(_) => args.workers,
    };
    let records = run_trials(&cfg)?;
    let mut out = writer(&args.out)?;
    write_sample_jsonl(&cfg, &records, !args.no_meta, &mut out)?;
    Ok(())
}

fn cmd_report(args: ReportArgs) -> Result<()> {
    let input = File::open(&args.input)
        .with_context(|| format!("opening {}", args.input.display()))?;
    let records = read_sample_jsonl(BufReader::new(input))?;
    let first = records.first().context("sample log holds no records")?;
    let mut cfg = RunConfig::new(first.genus, first.seed);
    cfg.trials = records.len() as u64;
    cfg.boundary_total = Some(first.boundary_total);
    cfg.b_max = first.b_max;
    cfg.d_max = first.d_max;
    cfg.bins = args.bins;
    if !args.intervals.is_empty() {
        cfg.intervals = args
            .intervals
            .iter()
            .map(|t| parse_interval(t).map_err(Into::into))
            .collect::<Result<_>>()?;
    }
    cfg.validate()?;
    let (report, hist) = build_report(&cfg, &records)?;
    let mut out = writer(&args.out)?;
    serde_json::to_writer_pretty(&mut out, &report)?;
    writeln!(out)?;
    if let Some(path) = &args.histogram {
        let meta = format!(
            "tool=ribbonlab command=report input={} bins={}",
            args.input.display(),
            args.bins
        );
        let mut hout = writer(&Some(path.clone()))?;
        write_histogram_csv(&hist, (!args.no_meta).then_some(meta.as_str()), &mut hout)?;
    }
    Ok(())
}

fn cmd_theory(args: TheoryArgs) -> Result<()> {
    let grid = parse_grid(&args.grid)?;
    let mut out = writer(&args.out)?;
    write_theory_csv(args.mu, grid, !args.no_meta, &mut out)?;
    Ok(())
}

fn cmd_volumes(args: VolumesArgs) -> Result<()> {
    let table = match args.family.as_str() {
        "g1" => VolumeTable::Volume,
        "saddle" => VolumeTable::Saddle,
        "both" => VolumeTable::Both,
        other => bail!("unknown volume family {other:?} (expected g1, saddle, or both)"),
    };
    let mut out = writer(&args.out)?;
    write_volumes_csv(args.gmax, table, !args.no_meta, &mut out)?;
    Ok(())
}

fn cmd_stablegraphs(args: StableArgs) -> Result<()> {
    let mut out = writer(&args.out)?;
    write_stablegraphs_json(
        args.genus,
        args.leaves,
        args.separating_only,
        args.check_kk,
        args.sum_bound,
        &mut out,
    )?;
    Ok(())
}

fn cmd_verify() -> Result<()> {
    let results = run_all();
    let mut failures = 0;
    let mut out = BufWriter::new(io::stdout());
    for r in &results {
        let tag = if r.passed { "PASS" } else { "FAIL" };
        writeln!(out, "criterion {} ({}): {} — {}", r.index, r.name, tag, r.detail)?;
        if !r.passed {
            failures += 1;
        }
    }
    out.flush()?;
    if failures > 0 {
        bail!("{failures} of {} acceptance criteria failed", results.len());
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Sample(args) => cmd_sample(args),
        Cmd::Report(args) => cmd_report(args),
        Cmd::Theory(args) => cmd_theory(args),
        Cmd::Volumes(args) => cmd_volumes(args),
        Cmd::Stablegraphs(args) => cmd_stablegraphs(args),
        Cmd::Verify => cmd_verify(),
    }
}
