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

//! Multi-trial comparison of the pattern-preserving partitioner against
//! baseline variants.

use std::io::Write;
use std::time::{Duration, Instant};

use dpbins::metrics::error_metrics_values;
use dpbins::{
    aggregate, ground_truth_rapid_changes, partition_baseline, partition_pattern_preserving,
    preservation_pct, release_with, validate_partition, BaselineConfig, BinSeries, MetricsReport,
    Partition, PartitionConfig, RawSeries, ReleaseOptions, SeededRng,
};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, InputSpec, CLAMP_RANGE};
use crate::synth::{generate_synthetic, SyntheticSpec};
use crate::{HarnessError, Result};

pub const SUMMARY_HEADER: &str = "algorithm,variant,trials,preservation_mean,preservation_sd,\
abs_err_part_mean,rel_err_part_mean,abs_err_rel_mean,rel_err_rel_mean,\
partition_ms_median,total_ms_median";

pub const TRIALS_HEADER: &str = "trial,seed,algorithm,variant,rapid_changes,buckets,preservation,\
abs_err_part,rel_err_part,abs_err_rel,rel_err_rel,partition_ms,total_ms";

pub const PATTERN_PRESERVING: &str = "pattern_preserving";
pub const BASELINE: &str = "baseline";

#[derive(Clone, Debug, PartialEq)]
enum Algorithm {
    PatternPreserving,
    Baseline { t_d: f64 },
}

impl Algorithm {
    fn name(&self) -> &'static str {
        match self {
            Algorithm::PatternPreserving => PATTERN_PRESERVING,
            Algorithm::Baseline { .. } => BASELINE,
        }
    }

    fn variant(&self) -> String {
        match self {
            Algorithm::PatternPreserving => "default".into(),
            Algorithm::Baseline { t_d } => format!("t_d={t_d}"),
        }
    }

    fn trace_label(&self) -> String {
        match self {
            Algorithm::PatternPreserving => "ours".into(),
            Algorithm::Baseline { t_d } => format!("baseline_td{t_d}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialRow {
    pub trial: usize,
    pub seed: u64,
    pub algorithm: &'static str,
    pub variant: String,
    pub rapid_changes: usize,
    pub buckets: usize,
    pub report: MetricsReport,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub algorithm: &'static str,
    pub variant: String,
    pub trials: usize,
    pub preservation_mean: Option<f64>,
    pub preservation_sd: Option<f64>,
    pub abs_err_part_mean: f64,
    pub rel_err_part_mean: f64,
    pub abs_err_rel_mean: f64,
    pub rel_err_rel_mean: f64,
    pub partition_ms_median: Option<f64>,
    pub total_ms_median: Option<f64>,
}

/// Per-bin values of the first trial, one column per series.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trace {
    pub columns: Vec<String>,
    /// `columns.len()` values per bin, without the bin index.
    pub rows: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentOutput {
    pub trials: Vec<TrialRow>,
    pub summary: Vec<SummaryRow>,
    pub trace: Trace,
}

impl ExperimentOutput {
    pub fn summary_for(&self, algorithm: &str, variant: &str) -> Option<&SummaryRow> {
        self.summary
            .iter()
            .find(|r| r.algorithm == algorithm && r.variant == variant)
    }

    pub fn ours(&self) -> &SummaryRow {
        self.summary_for(PATTERN_PRESERVING, "default")
            .expect("pattern-preserving summary row is always present")
    }

    pub fn baseline(&self, t_d: f64) -> Option<&SummaryRow> {
        self.summary_for(BASELINE, &format!("t_d={t_d}"))
    }
}

fn algorithms(cfg: &ExperimentConfig) -> Vec<Algorithm> {
    std::iter::once(Algorithm::PatternPreserving)
        .chain(
            cfg.baseline_t_d_variants
                .iter()
                .map(|&t_d| Algorithm::Baseline { t_d }),
        )
        .collect()
}

pub fn trial_seed(base_seed: u64, trial: usize) -> u64 {
    base_seed.wrapping_add(trial as u64)
}

fn load_file_series(path: &std::path::Path, window: usize) -> Result<BinSeries> {
    let f = std::fs::File::open(path)
        .map_err(|e| HarnessError::io(format!("opening {}", path.display()), e))?;
    let raw = RawSeries::from_csv(std::io::BufReader::new(f))?;
    Ok(aggregate(&raw, window)?)
}

struct TrialOutcome {
    rows: Vec<TrialRow>,
    trace: Option<Trace>,
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

fn run_trial(
    cfg: &ExperimentConfig,
    algos: &[Algorithm],
    fixed: Option<&BinSeries>,
    trial: usize,
) -> Result<TrialOutcome> {
    let seed = trial_seed(cfg.base_seed, trial);
    let generated;
    let series = match (fixed, &cfg.input) {
        (Some(s), _) => s,
        (None, InputSpec::Synthetic(spec)) => {
            generated = generate_synthetic(&SyntheticSpec {
                seed,
                ..spec.clone()
            })?
            .series;
            &generated
        }
        (None, InputSpec::File(_)) => unreachable!("file input is loaded up front"),
    };
    let gt = ground_truth_rapid_changes(series, cfg.thresholds.t_r);
    let opts = ReleaseOptions {
        zero_noise: cfg.zero_noise,
        clamp: cfg.clamp.then_some(CLAMP_RANGE),
    };
    let exact = ReleaseOptions {
        zero_noise: true,
        clamp: None,
    };

    let want_trace = trial == 1;
    let mut trace = Trace::default();
    if want_trace {
        trace.columns.push("original".into());
    }
    let mut columns: Vec<Vec<f64>> = vec![series.bins().to_vec()];
    let mut rows = Vec::with_capacity(algos.len());

    for (k, algo) in algos.iter().enumerate() {
        let mut rng = SeededRng::with_stream(seed, k as u64 + 1);
        let start = Instant::now();
        let partition: Partition = match algo {
            Algorithm::PatternPreserving => {
                let pc = PartitionConfig {
                    thresholds: cfg.thresholds,
                    budget: cfg.budget,
                    scale_mode: cfg.scale_mode,
                    zero_noise: cfg.zero_noise,
                };
                partition_pattern_preserving(series, &pc, &mut rng)?.0
            }
            Algorithm::Baseline { t_d } => {
                let bc = BaselineConfig {
                    t_d: *t_d,
                    t_l: cfg.thresholds.t_l,
                    budget: cfg.budget,
                    scale_mode: cfg.scale_mode,
                    zero_noise: cfg.zero_noise,
                };
                partition_baseline(series, &bc, &mut rng)?
            }
        };
        let partition_time = start.elapsed();
        let released = release_with(series, &partition, &cfg.budget, &mut rng, &opts)?;
        let total_time = start.elapsed();

        let v = validate_partition(&partition, series);
        if !v.ok {
            return Err(dpbins::Error::InvalidPartition(v.diagnostics).into());
        }
        let step = release_with(series, &partition, &cfg.budget, &mut rng, &exact)?;
        let part_err = error_metrics_values(series, &step.values, cfg.delta_floor)?;
        let rel_err = error_metrics_values(series, &released.values, cfg.delta_floor)?;

        if want_trace {
            trace
                .columns
                .push(format!("{}_partition_step", algo.trace_label()));
            trace
                .columns
                .push(format!("{}_released", algo.trace_label()));
            columns.push(step.values);
            columns.push(released.values);
        }

        rows.push(TrialRow {
            trial,
            seed,
            algorithm: algo.name(),
            variant: algo.variant(),
            rapid_changes: gt.len(),
            buckets: partition.len(),
            report: MetricsReport {
                preservation_pct: preservation_pct(&gt, &partition, cfg.detection),
                abs_err_partition: part_err.abs,
                rel_err_partition: part_err.rel,
                abs_err_release: rel_err.abs,
                rel_err_release: rel_err.rel,
                partition_time: if cfg.timing {
                    partition_time
                } else {
                    Duration::ZERO
                },
                total_time: if cfg.timing {
                    total_time
                } else {
                    Duration::ZERO
                },
            },
        });
    }

    let trace = want_trace.then(|| {
        trace.rows = (0..series.len())
            .map(|i| columns.iter().map(|c| c[i]).collect())
            .collect();
        trace
    });
    Ok(TrialOutcome { rows, trace })
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn sample_sd(xs: &[f64]) -> Option<f64> {
    let m = mean(xs.iter().copied())?;
    if xs.len() < 2 {
        return Some(0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - m).powi(2)).sum();
    Some((ss / (xs.len() - 1) as f64).sqrt())
}

fn median(mut xs: Vec<f64>) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    Some(if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    })
}

fn summarize(cfg: &ExperimentConfig, algo: &Algorithm, rows: &[&TrialRow]) -> SummaryRow {
    let pres: Vec<f64> = rows
        .iter()
        .filter_map(|r| r.report.preservation_pct)
        .collect();
    let avg = |f: fn(&MetricsReport) -> f64| mean(rows.iter().map(|r| f(&r.report))).unwrap_or(0.0);
    let timing = |f: fn(&MetricsReport) -> Duration| {
        if cfg.timing {
            median(rows.iter().map(|r| ms(f(&r.report))).collect())
        } else {
            None
        }
    };
    SummaryRow {
        algorithm: algo.name(),
        variant: algo.variant(),
        trials: rows.len(),
        preservation_mean: mean(pres.iter().copied()),
        preservation_sd: sample_sd(&pres),
        abs_err_part_mean: avg(|m| m.abs_err_partition),
        rel_err_part_mean: avg(|m| m.rel_err_partition),
        abs_err_rel_mean: avg(|m| m.abs_err_release),
        rel_err_rel_mean: avg(|m| m.rel_err_release),
        partition_ms_median: timing(|m| m.partition_time),
        total_ms_median: timing(|m| m.total_time),
    }
}

/// Runs `cfg.trials` trials with seeds `base_seed + 1 ..= base_seed + trials`.
///
/// Trials run in parallel unless timing is on; results are always ordered by
/// trial index, so output depends only on `cfg`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let algos = algorithms(cfg);
    let fixed = match &cfg.input {
        InputSpec::File(path) => Some(load_file_series(path, cfg.window)?),
        InputSpec::Synthetic(_) => None,
    };
    let run = |t: usize| run_trial(cfg, &algos, fixed.as_ref(), t);
    let outcomes: Vec<TrialOutcome> = if cfg.timing {
        (1..=cfg.trials).map(run).collect::<Result<_>>()?
    } else {
        (1..=cfg.trials)
            .into_par_iter()
            .map(run)
            .collect::<Result<_>>()?
    };

    let mut trace = Trace::default();
    let mut trials = Vec::with_capacity(outcomes.len() * algos.len());
    for o in outcomes {
        if let Some(t) = o.trace {
            trace = t;
        }
        trials.extend(o.rows);
    }
    let summary = algos
        .iter()
        .map(|a| {
            let rows: Vec<&TrialRow> = trials
                .iter()
                .filter(|r| r.algorithm == a.name() && r.variant == a.variant())
                .collect();
            summarize(cfg, a, &rows)
        })
        .collect();
    Ok(ExperimentOutput {
        trials,
        summary,
        trace,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| x.to_string())
}

fn io_err(e: std::io::Error) -> HarnessError {
    HarnessError::io("writing csv", e)
}

pub fn write_summary_csv<W: Write>(rows: &[SummaryRow], mut out: W) -> Result<()> {
    writeln!(out, "{SUMMARY_HEADER}").map_err(io_err)?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.algorithm,
            r.variant,
            r.trials,
            opt(r.preservation_mean),
            opt(r.preservation_sd),
            r.abs_err_part_mean,
            r.rel_err_part_mean,
            r.abs_err_rel_mean,
            r.rel_err_rel_mean,
            opt(r.partition_ms_median),
            opt(r.total_ms_median),
        )
        .map_err(io_err)?;
    }
    Ok(())
}

pub fn write_trials_csv<W: Write>(rows: &[TrialRow], timing: bool, mut out: W) -> Result<()> {
    writeln!(out, "{TRIALS_HEADER}").map_err(io_err)?;
    for r in rows {
        let m = &r.report;
        let t = |d: Duration| {
            if timing {
                ms(d).to_string()
            } else {
                "NA".into()
            }
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.trial,
            r.seed,
            r.algorithm,
            r.variant,
            r.rapid_changes,
            r.buckets,
            opt(m.preservation_pct),
            m.abs_err_partition,
            m.rel_err_partition,
            m.abs_err_release,
            m.rel_err_release,
            t(m.partition_time),
            t(m.total_time),
        )
        .map_err(io_err)?;
    }
    Ok(())
}

pub fn write_trace_csv<W: Write>(trace: &Trace, mut out: W) -> Result<()> {
    writeln!(out, "bin_index,{}", trace.columns.join(",")).map_err(io_err)?;
    for (i, row) in trace.rows.iter().enumerate() {
        let cells: Vec<String> = row.iter().map(f64::to_string).collect();
        writeln!(out, "{},{}", i + 1, cells.join(",")).map_err(io_err)?;
    }
    Ok(())
}
