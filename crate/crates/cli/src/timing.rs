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

//! Wall-clock timing of partitioning and release.

use std::time::{Duration, Instant};

use dpbins::{partition_pattern_preserving, release, BinSeries, PartitionConfig, SeededRng};

use crate::{HarnessError, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimingReport {
    /// Median time to partition.
    pub partition: Duration,
    /// Median time to partition and release.
    pub total: Duration,
    pub repeats: usize,
}

fn median(mut xs: Vec<Duration>) -> Duration {
    xs.sort_unstable();
    xs[xs.len() / 2]
}

/// Times `repeats` runs of the pattern-preserving pipeline on `s`. Every run
/// uses the same seed so each does identical work.
pub fn time_partition(
    cfg: &PartitionConfig,
    s: &BinSeries,
    repeats: usize,
) -> Result<TimingReport> {
    if repeats == 0 {
        return Err(HarnessError::Config(
            "timing needs at least one repeat".into(),
        ));
    }
    let mut partition = Vec::with_capacity(repeats);
    let mut total = Vec::with_capacity(repeats);
    for _ in 0..repeats {
        let mut rng = SeededRng::new(0);
        let start = Instant::now();
        let (p, _) = partition_pattern_preserving(s, cfg, &mut rng)?;
        partition.push(start.elapsed());
        let r = release(s, &p, &cfg.budget, &mut rng, cfg.zero_noise)?;
        total.push(start.elapsed());
        std::hint::black_box(r);
    }
    Ok(TimingReport {
        partition: median(partition),
        total: median(total),
        repeats,
    })
}
