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

//! Single-scan bucket partitioning.
//!
//! Both partitioners grow a bucket while its value spread stays within the
//! randomized spread threshold and its length stays below `t_l`. A bucket
//! that reaches `t_l` bins is closed immediately.
//!
//! The pattern-preserving partitioner adds a jump rule checked on every
//! adjacent pair before growth: when `|x[i-1] - x[i]|` exceeds the randomized
//! jump threshold, both bins end up in single-bin buckets. If `x[i-1]` already
//! sits at the end of a closed multi-bin bucket, it is popped back out of that
//! bucket (a backtrack). Backtracking never reaches past the most recently
//! closed bucket.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::{
    randomize_thresholds, LaplaceParams, RandomizedThresholds, ScaleMode, SeededRng,
};
use crate::series::{BinSeries, Partition, PrivacyBudget, Thresholds};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionConfig {
    pub thresholds: Thresholds,
    pub budget: PrivacyBudget,
    pub scale_mode: ScaleMode,
    pub zero_noise: bool,
}

impl PartitionConfig {
    pub fn validate(&self) -> Result<()> {
        self.thresholds.validate()?;
        self.budget.validate()
    }
}

/// The comparison partitioner: spread and length thresholds only.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineConfig {
    pub t_d: f64,
    pub t_l: usize,
    pub budget: PrivacyBudget,
    pub scale_mode: ScaleMode,
    pub zero_noise: bool,
}

impl BaselineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_d.is_finite() && self.t_d > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "t_d must be positive, got {}",
                self.t_d
            )));
        }
        if self.t_l == 0 {
            return Err(Error::InvalidParameter("t_l must be at least 1".into()));
        }
        self.budget.validate()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanCost {
    /// Bins read by the forward scan plus bins re-read by backtracks.
    pub bin_visits: usize,
    pub backtracks: usize,
}

struct OpenBucket {
    start: usize,
    min: f64,
    max: f64,
}

/// Scan state. Ranges are 0-based and inclusive.
struct Scanner {
    t_d_hat: f64,
    t_r_hat: Option<f64>,
    t_l: usize,
    closed: Vec<(usize, usize)>,
    open: Option<OpenBucket>,
    previous: Option<f64>,
    cost: ScanCost,
}

impl Scanner {
    fn new(t_d_hat: f64, t_r_hat: Option<f64>, t_l: usize, n: usize) -> Self {
        Scanner {
            t_d_hat,
            t_r_hat,
            t_l,
            closed: Vec::with_capacity(n / t_l.max(1) + 1),
            open: None,
            previous: None,
            cost: ScanCost::default(),
        }
    }

    fn run(mut self, bins: &[f64]) -> (Vec<(usize, usize)>, ScanCost) {
        for (i, &x) in bins.iter().enumerate() {
            self.step(i, x);
        }
        if let Some(b) = self.open.take() {
            self.closed.push((b.start, bins.len() - 1));
        }
        (self.closed, self.cost)
    }

    fn step(&mut self, i: usize, x: f64) {
        self.cost.bin_visits += 1;
        let rapid = match (self.previous, self.t_r_hat) {
            (Some(prev), Some(t_r_hat)) => (prev - x).abs() > t_r_hat,
            _ => false,
        };
        self.previous = Some(x);
        if rapid {
            self.isolate_previous(i);
            self.closed.push((i, i));
            return;
        }

        let grown = match &mut self.open {
            Some(b) => {
                let (lo, hi) = (b.min.min(x), b.max.max(x));
                if hi - lo <= self.t_d_hat && i - b.start < self.t_l {
                    b.min = lo;
                    b.max = hi;
                    true
                } else {
                    self.closed.push((b.start, i - 1));
                    false
                }
            }
            None => false,
        };
        if !grown {
            self.open = Some(OpenBucket {
                start: i,
                min: x,
                max: x,
            });
        }
        if let Some(b) = &self.open {
            if i + 1 - b.start >= self.t_l {
                self.closed.push((b.start, i));
                self.open = None;
            }
        }
    }

    /// Puts bin `i - 1` into a bucket of its own.
    fn isolate_previous(&mut self, i: usize) {
        let prev = i - 1;
        match self.open.take() {
            Some(b) => {
                if b.start < prev {
                    self.closed.push((b.start, prev - 1));
                }
                self.closed.push((prev, prev));
            }
            None => {
                // With no open bucket, bin i - 1 ends the last closed bucket.
                let last = self
                    .closed
                    .last_mut()
                    .expect("a bin before i was scanned, so a bucket was closed");
                debug_assert_eq!(last.1, prev);
                if last.0 < last.1 {
                    last.1 -= 1;
                    self.closed.push((prev, prev));
                    self.cost.backtracks += 1;
                    self.cost.bin_visits += 1;
                }
            }
        }
    }
}

fn to_partition(s: &BinSeries, ranges: Vec<(usize, usize)>) -> Partition {
    let one_based: Vec<(usize, usize)> = ranges.into_iter().map(|(a, b)| (a + 1, b + 1)).collect();
    Partition::from_ranges(s, &one_based)
}

type Scan = (Vec<(usize, usize)>, ScanCost, RandomizedThresholds);

fn scan_pattern_preserving(
    s: &BinSeries,
    cfg: &PartitionConfig,
    rng: &mut SeededRng,
) -> Result<Scan> {
    cfg.validate()?;
    let hat = randomize_thresholds(
        rng,
        &cfg.thresholds,
        &cfg.budget,
        cfg.scale_mode,
        cfg.zero_noise,
    )?;
    let (ranges, cost) =
        Scanner::new(hat.t_d_hat, Some(hat.t_r_hat), cfg.thresholds.t_l, s.len()).run(s.bins());
    Ok((ranges, cost, hat))
}

/// Partitions `s` so that every adjacent jump above the randomized jump
/// threshold falls between two single-bin buckets.
///
/// `Y` and `Y'` are drawn once from `rng` (unless `cfg.zero_noise`) and
/// returned alongside the partition.
pub fn partition_pattern_preserving(
    s: &BinSeries,
    cfg: &PartitionConfig,
    rng: &mut SeededRng,
) -> Result<(Partition, RandomizedThresholds)> {
    let (ranges, _, hat) = scan_pattern_preserving(s, cfg, rng)?;
    Ok((to_partition(s, ranges), hat))
}

/// Greedy spread/length partitioner with a randomized spread threshold and
/// no jump rule.
pub fn partition_baseline(
    s: &BinSeries,
    cfg: &BaselineConfig,
    rng: &mut SeededRng,
) -> Result<Partition> {
    cfg.validate()?;
    let y = if cfg.zero_noise {
        0.0
    } else {
        let params = LaplaceParams::new(cfg.scale_mode.threshold_scale(&cfg.budget))?;
        crate::noise::sample_laplace(rng, &params)
    };
    let (ranges, _) = Scanner::new(cfg.t_d + y, None, cfg.t_l, s.len()).run(s.bins());
    Ok(to_partition(s, ranges))
}

/// Instrumented run of [`partition_pattern_preserving`].
pub fn scan_cost(s: &BinSeries, cfg: &PartitionConfig, rng: &mut SeededRng) -> Result<ScanCost> {
    scan_pattern_preserving(s, cfg, rng).map(|(_, cost, _)| cost)
}
