// Copyright 2026 The dpbins Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dpbins::{
    aggregate, export_release, partition_baseline, partition_pattern_preserving, release_with,
    BaselineConfig, BinSeries, ExportFormat, Partition, PartitionConfig, PrivacyBudget,
    RandomizedThresholds, RawSeries, ReleaseOptions, ScaleMode, SeededRng, Thresholds,
};
use dpbins_cli::config::CLAMP_RANGE;
use dpbins_cli::experiment::{write_summary_csv, write_trace_csv, write_trials_csv};
use dpbins_cli::verify::DEFAULT_EPSILONS;
use dpbins_cli::{
    generate_synthetic, run_experiment, verify_dp_grid, ExperimentConfig, SyntheticSpec,
};
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "dpbins",
    version,
    about = "Pattern-preserving private release of time-series bins"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Partition one series into buckets and write the partition as JSON.
    Partition(PartitionArgs),
    /// Partition and release one series.
    Release(ReleaseArgs),
    /// Run a multi-trial comparison and write summary and trace CSVs.
    Experiment(ExperimentArgs),
    /// Check the threshold-noise likelihood ratio over a grid of margins.
    VerifyDp(VerifyArgs),
    /// Generate a synthetic series as CSV.
    Synth(SynthArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    Ours,
    Baseline,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScaleArg {
    ProofAlpha,
    UnitScale,
}

impl From<ScaleArg> for ScaleMode {
    fn from(s: ScaleArg) -> Self {
        match s {
            ScaleArg::ProofAlpha => ScaleMode::ProofAlpha,
            ScaleArg::UnitScale => ScaleMode::UnitScale,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args)]
struct SeriesArgs {
    /// Raw series CSV: `value` or `timestamp,value` per line.
    #[arg(long)]
    input: PathBuf,
    /// Raw records per bin.
    #[arg(long, default_value_t = 1)]
    window: usize,
    #[arg(long, default_value_t = 30.0)]
    t_d: f64,
    #[arg(long, default_value_t = 4)]
    t_l: usize,
    #[arg(long, default_value_t = 15.0)]
    t_r: f64,
    #[arg(long, default_value_t = 0.5)]
    eps1: f64,
    #[arg(long, default_value_t = 0.5)]
    eps2: f64,
    #[arg(long, default_value_t = 160.0 / 14.0)]
    alpha: f64,
    #[arg(long, env = "DPBINS_SEED")]
    seed: u64,
    #[arg(long)]
    zero_noise: bool,
    #[arg(long, value_enum, default_value_t = ScaleArg::ProofAlpha)]
    scale_mode: ScaleArg,
    #[arg(long, value_enum, default_value_t = AlgorithmArg::Ours)]
    algorithm: AlgorithmArg,
}

#[derive(Args)]
struct PartitionArgs {
    #[command(flatten)]
    series: SeriesArgs,
    /// Output path; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ReleaseArgs {
    #[command(flatten)]
    series: SeriesArgs,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Clamp released values to 50..=210.
    #[arg(long)]
    clamp: bool,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, env = "DPBINS_SEED")]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    zero_noise: bool,
    /// Measure wall-clock times (summary is then not byte-reproducible).
    #[arg(long)]
    timing: bool,
    /// Extra `key=value` overrides, applied after the config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    summary: PathBuf,
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Per-trial rows.
    #[arg(long)]
    trials_out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 160.0 / 14.0)]
    alpha: f64,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_EPSILONS)]
    eps: Vec<f64>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 2016)]
    length: usize,
    #[arg(long, default_value_t = 75.0)]
    base_level: f64,
    #[arg(long, default_value_t = 2.0)]
    walk_step_sd: f64,
    #[arg(long, default_value_t = 20)]
    jump_count: usize,
    #[arg(long, default_value_t = 15.0)]
    jump_lo: f64,
    #[arg(long, default_value_t = 30.0)]
    jump_hi: f64,
    #[arg(long, env = "DPBINS_SEED")]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also write the injected jump indices, one per line.
    #[arg(long)]
    jumps_out: Option<PathBuf>,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

fn load_series(args: &SeriesArgs) -> Result<BinSeries> {
    let f = File::open(&args.input).with_context(|| format!("opening {}", args.input.display()))?;
    let raw = RawSeries::from_csv(BufReader::new(f))
        .with_context(|| format!("reading {}", args.input.display()))?;
    Ok(aggregate(&raw, args.window)?)
}

#[derive(Serialize)]
struct PartitionDoc<'a> {
    algorithm: &'static str,
    thresholds: Thresholds,
    randomized: Option<RandomizedThresholds>,
    partition: &'a Partition,
}

fn run_partition(
    args: &SeriesArgs,
) -> Result<(
    BinSeries,
    Partition,
    Option<RandomizedThresholds>,
    SeededRng,
)> {
    let s = load_series(args)?;
    let thresholds = Thresholds::new(args.t_d, args.t_l, args.t_r)?;
    let budget = PrivacyBudget::new(args.eps1, args.eps2, args.alpha)?;
    let mut rng = SeededRng::new(args.seed);
    let (p, hat) = match args.algorithm {
        AlgorithmArg::Ours => {
            let cfg = PartitionConfig {
                thresholds,
                budget,
                scale_mode: args.scale_mode.into(),
                zero_noise: args.zero_noise,
            };
            let (p, hat) = partition_pattern_preserving(&s, &cfg, &mut rng)?;
            (p, Some(hat))
        }
        AlgorithmArg::Baseline => {
            let cfg = BaselineConfig {
                t_d: args.t_d,
                t_l: args.t_l,
                budget,
                scale_mode: args.scale_mode.into(),
                zero_noise: args.zero_noise,
            };
            (partition_baseline(&s, &cfg, &mut rng)?, None)
        }
    };
    Ok((s, p, hat, rng))
}

fn cmd_partition(args: PartitionArgs) -> Result<()> {
    let (_, p, randomized, _) = run_partition(&args.series)?;
    let doc = PartitionDoc {
        algorithm: match args.series.algorithm {
            AlgorithmArg::Ours => "pattern_preserving",
            AlgorithmArg::Baseline => "baseline",
        },
        thresholds: Thresholds {
            t_d: args.series.t_d,
            t_l: args.series.t_l,
            t_r: args.series.t_r,
        },
        randomized,
        partition: &p,
    };
    let mut out = sink(args.output.as_deref())?;
    serde_json::to_writer_pretty(&mut out, &doc)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn cmd_release(args: ReleaseArgs) -> Result<()> {
    let (s, p, _, mut rng) = run_partition(&args.series)?;
    let budget = PrivacyBudget::new(args.series.eps1, args.series.eps2, args.series.alpha)?;
    let opts = ReleaseOptions {
        zero_noise: args.series.zero_noise,
        clamp: args.clamp.then_some(CLAMP_RANGE),
    };
    let r = release_with(&s, &p, &budget, &mut rng, &opts)?;
    let fmt = match args.format {
        FormatArg::Csv => ExportFormat::Csv,
        FormatArg::Json => ExportFormat::Json,
    };
    export_release(&r, fmt, sink(args.output.as_deref())?)?;
    Ok(())
}

fn cmd_experiment(args: ExperimentArgs) -> Result<()> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    for kv in &args.overrides {
        let Some((k, v)) = kv.split_once('=') else {
            bail!("--set expects KEY=VALUE, got {kv:?}");
        };
        cfg.set(k, v)
            .map_err(|e| anyhow::anyhow!("--set {kv}: {e}"))?;
    }
    if let Some(seed) = args.seed {
        cfg.base_seed = seed;
    }
    if let Some(trials) = args.trials {
        cfg.trials = trials;
    }
    cfg.zero_noise |= args.zero_noise;
    cfg.timing |= args.timing;

    let out = run_experiment(&cfg)?;
    let mut w = create(&args.summary)?;
    write_summary_csv(&out.summary, &mut w)?;
    w.flush()?;
    if let Some(path) = &args.trace {
        let mut w = create(path)?;
        write_trace_csv(&out.trace, &mut w)?;
        w.flush()?;
    }
    if let Some(path) = &args.trials_out {
        let mut w = create(path)?;
        write_trials_csv(&out.trials, cfg.timing, &mut w)?;
        w.flush()?;
    }
    for r in &out.summary {
        eprintln!(
            "{:<20} {:<10} preservation {:>7}  abs_err_part {:.4}",
            r.algorithm,
            r.variant,
            r.preservation_mean
                .map_or_else(|| "NA".to_string(), |p| format!("{p:.2}%")),
            r.abs_err_part_mean
        );
    }
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<()> {
    let report = verify_dp_grid(args.alpha, &args.eps)?;
    println!("alpha = {}", report.alpha);
    println!("scale alpha/eps1:");
    for l in &report.private_scale {
        println!(
            "  eps1 = {:<5} points {:>3}  max ratio {:.9}  e^eps1 {:.9}  {}",
            l.eps1,
            l.points,
            l.max_ratio,
            l.bound,
            if l.failures == 0 { "PASS" } else { "FAIL" }
        );
    }
    println!("scale 1/eps1 (comparison):");
    for l in &report.unit_scale {
        println!(
            "  eps1 = {:<5} points {:>3}  max ratio {:.9}  e^eps1 {:.9}  {} violations",
            l.eps1, l.points, l.max_ratio, l.bound, l.failures
        );
    }
    if !report.private_scale_ok() {
        bail!("ratio bound violated at scale alpha/eps1");
    }
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Result<()> {
    let spec = SyntheticSpec {
        length: args.length,
        base_level: args.base_level,
        walk_step_sd: args.walk_step_sd,
        jump_count: args.jump_count,
        jump_magnitude_range: (args.jump_lo, args.jump_hi),
        seed: args.seed,
        ..Default::default()
    };
    let s = generate_synthetic(&spec)?;
    let mut out = sink(args.output.as_deref())?;
    writeln!(out, "value")?;
    for v in s.series.bins() {
        writeln!(out, "{v}")?;
    }
    out.flush()?;
    if let Some(path) = &args.jumps_out {
        let mut w = create(path)?;
        for i in &s.jump_indices {
            writeln!(w, "{i}")?;
        }
        w.flush()?;
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Partition(a) => cmd_partition(a),
        Command::Release(a) => cmd_release(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::VerifyDp(a) => cmd_verify(a),
        Command::Synth(a) => cmd_synth(a),
    }
}
