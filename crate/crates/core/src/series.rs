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

//! Domain types shared by every stage, plus raw-record aggregation.
//!
//! Bin indices are 1-based in everything a user sees (buckets, diagnostics,
//! error messages). Internally slices are indexed from zero.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Raw per-record measurements, e.g. one heart-rate reading per minute.
///
/// Input is assumed dense: a missing minute is not representable.
#[derive(Clone, Debug, PartialEq)]
pub struct RawSeries {
    values: Vec<f64>,
    timestamps: Option<Vec<i64>>,
}

impl RawSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        Self::build(values, None)
    }

    pub fn with_timestamps(values: Vec<f64>, timestamps: Vec<i64>) -> Result<Self> {
        Self::build(values, Some(timestamps))
    }

    fn build(values: Vec<f64>, timestamps: Option<Vec<i64>>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySeries);
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index: i + 1 });
        }
        if let Some(ts) = &timestamps {
            if ts.len() != values.len() {
                return Err(Error::LengthMismatch {
                    expected: values.len(),
                    actual: ts.len(),
                });
            }
            if let Some(w) = ts.windows(2).position(|w| w[1] < w[0]) {
                return Err(Error::invalid(format!(
                    "timestamps decrease at record {}",
                    w + 2
                )));
            }
        }
        Ok(RawSeries { values, timestamps })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn timestamps(&self) -> Option<&[i64]> {
        self.timestamps.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Parses `value` or `timestamp,value` lines with an optional header.
    ///
    /// A first line that does not parse as data is treated as a header. Any
    /// later malformed line is an error carrying its 1-based line number.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);

        let mut values = Vec::new();
        let mut timestamps = Vec::new();
        let mut width: Option<usize> = None;

        for (n, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Parse {
                line: e.position().map(|p| p.line() as usize).unwrap_or(n + 1),
                message: e.to_string(),
            })?;
            let line = rec.position().map(|p| p.line() as usize).unwrap_or(n + 1);
            let parsed = parse_record(&rec);
            match parsed {
                Err(message) if n == 0 => {
                    // header
                    if rec.len() > 2 {
                        return Err(Error::Parse { line, message });
                    }
                    continue;
                }
                Err(message) => return Err(Error::Parse { line, message }),
                Ok((ts, v)) => {
                    let w = *width.get_or_insert(rec.len());
                    if w != rec.len() {
                        return Err(Error::Parse {
                            line,
                            message: format!("expected {w} fields, found {}", rec.len()),
                        });
                    }
                    if let Some(t) = ts {
                        timestamps.push(t);
                    }
                    values.push(v);
                }
            }
        }

        if values.is_empty() {
            return Err(Error::EmptySeries);
        }
        let timestamps = (width == Some(2)).then_some(timestamps);
        Self::build(values, timestamps)
    }
}

fn parse_record(rec: &csv::StringRecord) -> std::result::Result<(Option<i64>, f64), String> {
    let value = |s: &str| -> std::result::Result<f64, String> {
        let v: f64 = s.parse().map_err(|_| format!("not a number: {s:?}"))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("non-finite value: {s:?}"))
        }
    };
    match rec.len() {
        1 => Ok((None, value(&rec[0])?)),
        2 => {
            let ts = rec[0]
                .parse::<i64>()
                .map_err(|_| format!("not an integer timestamp: {:?}", &rec[0]))?;
            Ok((Some(ts), value(&rec[1])?))
        }
        k => Err(format!("expected 1 or 2 fields, found {k}")),
    }
}

/// The aggregate query result: bins `x_1..x_n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinSeries {
    bins: Vec<f64>,
    bin_width: usize,
}

impl BinSeries {
    pub fn new(bins: Vec<f64>, bin_width: usize) -> Result<Self> {
        if bins.is_empty() {
            return Err(Error::EmptySeries);
        }
        if bin_width == 0 {
            return Err(Error::invalid("bin_width must be at least 1"));
        }
        if let Some(i) = bins.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index: i + 1 });
        }
        Ok(BinSeries { bins, bin_width })
    }

    /// Bins that already are the query result (width 1).
    pub fn from_bins(bins: Vec<f64>) -> Result<Self> {
        Self::new(bins, 1)
    }

    pub fn bins(&self) -> &[f64] {
        &self.bins
    }

    pub fn bin_width(&self) -> usize {
        self.bin_width
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    /// Value of bin `i`, 1-based.
    pub fn get(&self, i: usize) -> Option<f64> {
        i.checked_sub(1).and_then(|k| self.bins.get(k)).copied()
    }

    /// Bins `start..=end`, 1-based.
    pub fn slice(&self, start: usize, end: usize) -> Option<&[f64]> {
        if start == 0 || start > end || end > self.bins.len() {
            return None;
        }
        Some(&self.bins[start - 1..end])
    }
}

/// Averages consecutive windows of `window` raw records into one bin each.
///
/// A trailing partial window becomes one final bin averaging whatever is left.
pub fn aggregate(raw: &RawSeries, window: usize) -> Result<BinSeries> {
    if window == 0 {
        return Err(Error::invalid("window must be at least 1"));
    }
    if raw.is_empty() {
        return Err(Error::EmptySeries);
    }
    let bins = raw
        .values()
        .chunks(window)
        .map(|c| c.iter().sum::<f64>() / c.len() as f64)
        .collect();
    BinSeries::new(bins, window)
}

/// Partitioning thresholds: value spread `t_d`, bucket length `t_l`, and
/// adjacent-bin jump `t_r`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub t_d: f64,
    pub t_l: usize,
    pub t_r: f64,
}

impl Thresholds {
    pub fn new(t_d: f64, t_l: usize, t_r: f64) -> Result<Self> {
        let t = Thresholds { t_d, t_l, t_r };
        t.validate()?;
        if t_r >= t_d {
            return Err(Error::invalid(format!(
                "t_r ({t_r}) must be smaller than t_d ({t_d})"
            )));
        }
        Ok(t)
    }

    /// Positivity checks only. [`Thresholds::new`] additionally requires
    /// `t_r < t_d`; the partitioner itself works with any positive pair.
    pub fn validate(&self) -> Result<()> {
        if !(self.t_d.is_finite() && self.t_d > 0.0) {
            return Err(Error::invalid(format!(
                "t_d must be positive, got {}",
                self.t_d
            )));
        }
        if !(self.t_r.is_finite() && self.t_r > 0.0) {
            return Err(Error::invalid(format!(
                "t_r must be positive, got {}",
                self.t_r
            )));
        }
        if self.t_l == 0 {
            return Err(Error::invalid("t_l must be at least 1"));
        }
        Ok(())
    }
}

/// Budget split between partitioning (`eps1`) and release (`eps2`), with the
/// per-bin sensitivity `alpha`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrivacyBudget {
    pub eps1: f64,
    pub eps2: f64,
    pub alpha: f64,
}

impl PrivacyBudget {
    pub fn new(eps1: f64, eps2: f64, alpha: f64) -> Result<Self> {
        let b = PrivacyBudget { eps1, eps2, alpha };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("eps1", self.eps1),
            ("eps2", self.eps2),
            ("alpha", self.alpha),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn total_epsilon(&self) -> f64 {
        total_epsilon(self)
    }
}

/// Sequential composition of the two stages.
pub fn total_epsilon(b: &PrivacyBudget) -> f64 {
    b.eps1 + b.eps2
}

/// A contiguous run of bins `start..=end` (1-based, inclusive).
///
/// The index range is authoritative; `values` is a copy of the covered bins.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bucket {
    pub start: usize,
    pub end: usize,
    pub values: Vec<f64>,
}

impl Bucket {
    pub fn len(&self) -> usize {
        self.end + 1 - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end < self.start
    }

    pub fn spread(&self) -> f64 {
        let (lo, hi) = self
            .values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        hi - lo
    }

    /// Mean, shifted by the first value so constant buckets are exact.
    pub fn mean(&self) -> f64 {
        let first = self.values[0];
        first + self.values.iter().map(|v| v - first).sum::<f64>() / self.values.len() as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub buckets: Vec<Bucket>,
    pub series_len: usize,
}

impl Partition {
    /// Builds a partition from 1-based inclusive ranges over `s`, without
    /// checking them. Use [`validate_partition`] for that.
    pub fn from_ranges(s: &BinSeries, ranges: &[(usize, usize)]) -> Self {
        let buckets = ranges
            .iter()
            .map(|&(start, end)| Bucket {
                start,
                end,
                values: s.slice(start, end).map(<[f64]>::to_vec).unwrap_or_default(),
            })
            .collect();
        Partition {
            buckets,
            series_len: s.len(),
        }
    }

    pub fn ranges(&self) -> Vec<(usize, usize)> {
        self.buckets.iter().map(|b| (b.start, b.end)).collect()
    }

    pub fn len(&self) -> usize {
        self.buckets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buckets.is_empty()
    }

    /// 0-based bucket index for every bin, in bin order. Assumes a valid
    /// partition.
    pub fn bucket_of_bins(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.series_len);
        for (k, b) in self.buckets.iter().enumerate() {
            out.extend(std::iter::repeat_n(k, b.len()));
        }
        out
    }

    pub fn single_bin_count(&self) -> usize {
        self.buckets.iter().filter(|b| b.len() == 1).count()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Validation {
    pub ok: bool,
    pub diagnostics: Vec<String>,
}

/// Checks that `p` tiles `1..=s.len()` with contiguous, non-overlapping
/// buckets whose value views match `s`.
pub fn validate_partition(p: &Partition, s: &BinSeries) -> Validation {
    let n = s.len();
    let mut diags = Vec::new();

    if p.series_len != n {
        diags.push(format!(
            "series_len {} does not match series length {n}",
            p.series_len
        ));
    }

    let mut next = 1usize;
    for (k, b) in p.buckets.iter().enumerate() {
        let id = k + 1;
        if b.start == 0 || b.start > b.end {
            diags.push(format!("bucket {id}: invalid range {}..{}", b.start, b.end));
            continue;
        }
        if b.start < next {
            diags.push(format!("bucket {id}: overlap at bin {}", b.start));
        } else if b.start > next {
            diags.push(format!("bucket {id}: coverage gap at bin {next}"));
        }
        if b.end > n {
            diags.push(format!(
                "bucket {id}: extends past bin {n} to bin {}",
                b.end
            ));
        }
        match s.slice(b.start, b.end.min(n)) {
            Some(view) if b.end <= n && view == b.values.as_slice() => {}
            _ => diags.push(format!(
                "bucket {id}: value view does not match bins {}..{}",
                b.start, b.end
            )),
        }
        next = next.max(b.end + 1);
    }
    if next <= n {
        diags.push(format!("coverage gap at bin {next}"));
    }

    Validation {
        ok: diags.is_empty(),
        diagnostics: diags,
    }
}
