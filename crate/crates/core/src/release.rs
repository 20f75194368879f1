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

//! Noisy release of bucket averages.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::{sample_laplace, LaplaceParams, SeededRng};
use crate::series::{validate_partition, BinSeries, Partition, PrivacyBudget};

/// Released per-bin values. `values[i]` is the noisy average of the bucket
/// holding bin `i + 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReleasedSeries {
    pub values: Vec<f64>,
    pub bucket_values: Vec<f64>,
    pub partition: Partition,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ReleaseOptions {
    pub zero_noise: bool,
    /// Clamp released bucket values into `[lo, hi]` after noising.
    pub clamp: Option<(f64, f64)>,
}

/// Releases each bucket's mean plus an independent `Lap(alpha / eps2)` draw.
///
/// Every bucket uses the same scale: a single-bin bucket's average moves by
/// the full `alpha` between neighbouring databases.
pub fn release(
    s: &BinSeries,
    p: &Partition,
    budget: &PrivacyBudget,
    rng: &mut SeededRng,
    zero_noise: bool,
) -> Result<ReleasedSeries> {
    release_with(
        s,
        p,
        budget,
        rng,
        &ReleaseOptions {
            zero_noise,
            clamp: None,
        },
    )
}

pub fn release_with(
    s: &BinSeries,
    p: &Partition,
    budget: &PrivacyBudget,
    rng: &mut SeededRng,
    opts: &ReleaseOptions,
) -> Result<ReleasedSeries> {
    budget.validate()?;
    let v = validate_partition(p, s);
    if !v.ok {
        return Err(Error::InvalidPartition(v.diagnostics));
    }
    let params = LaplaceParams::new(budget.alpha / budget.eps2)?;

    let mut bucket_values = Vec::with_capacity(p.len());
    let mut values = Vec::with_capacity(s.len());
    for b in &p.buckets {
        let noise = if opts.zero_noise {
            0.0
        } else {
            sample_laplace(rng, &params)
        };
        let mut r = b.mean() + noise;
        if let Some((lo, hi)) = opts.clamp {
            r = r.clamp(lo, hi);
        }
        bucket_values.push(r);
        values.extend(std::iter::repeat_n(r, b.len()));
    }
    Ok(ReleasedSeries {
        values,
        bucket_values,
        partition: p.clone(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ExportFormat::Csv),
            "json" => Ok(ExportFormat::Json),
            other => Err(Error::InvalidParameter(format!(
                "unknown export format {other:?} (expected csv or json)"
            ))),
        }
    }
}

pub const CSV_HEADER: &str = "bin_index,original_absent,released_value,bucket_index";

/// Writes `r` as CSV or JSON.
///
/// CSV rows are `bin_index,original_absent,released_value,bucket_index`, with
/// 1-based indices. `original_absent` is always `true`: the original bin value
/// is never part of a release. Floats use the shortest representation that
/// parses back to the same `f64`.
pub fn export_release<W: Write>(r: &ReleasedSeries, fmt: ExportFormat, mut out: W) -> Result<()> {
    let ctx = |e| Error::io("writing release", e);
    match fmt {
        ExportFormat::Csv => {
            writeln!(out, "{CSV_HEADER}").map_err(ctx)?;
            let bucket_of = r.partition.bucket_of_bins();
            for (i, (v, k)) in r.values.iter().zip(bucket_of).enumerate() {
                writeln!(out, "{},true,{:?},{}", i + 1, v, k + 1).map_err(ctx)?;
            }
        }
        ExportFormat::Json => {
            serde_json::to_writer(&mut out, r)?;
            writeln!(out).map_err(ctx)?;
        }
    }
    out.flush().map_err(ctx)
}
