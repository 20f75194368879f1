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

//! Pattern preservation and error figures.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::release::ReleasedSeries;
use crate::series::{BinSeries, Partition};

/// Bin indices `i` (1-based, `i >= 2`) with `|x[i] - x[i-1]| > t_r`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RapidChangeSet {
    pub indices: Vec<usize>,
}

impl RapidChangeSet {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }
}

/// Ground truth uses the clean `t_r`, never a randomized one.
pub fn ground_truth_rapid_changes(s: &BinSeries, t_r: f64) -> RapidChangeSet {
    let indices = s
        .bins()
        .windows(2)
        .enumerate()
        .filter(|(_, w)| (w[1] - w[0]).abs() > t_r)
        .map(|(k, _)| k + 2)
        .collect();
    RapidChangeSet { indices }
}

/// When a ground-truth rapid change counts as detected.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Detection {
    /// Bins `i - 1` and `i` are in different buckets.
    #[default]
    Separated,
    /// Both bins sit in single-bin buckets.
    BothSingle,
}

/// Percentage of `gt` detected by `p`, or `None` when `gt` is empty.
pub fn preservation_pct(gt: &RapidChangeSet, p: &Partition, detection: Detection) -> Option<f64> {
    if gt.is_empty() {
        return None;
    }
    let bucket_of = p.bucket_of_bins();
    let single = |k: usize| p.buckets[k].len() == 1;
    let detected = gt
        .indices
        .iter()
        .filter(|&&i| {
            let (a, b) = (bucket_of[i - 2], bucket_of[i - 1]);
            match detection {
                Detection::Separated => a != b,
                Detection::BothSingle => a != b && single(a) && single(b),
            }
        })
        .count();
    Some(100.0 * detected as f64 / gt.len() as f64)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ErrorMetrics {
    pub abs: f64,
    pub rel: f64,
}

/// Mean absolute error and mean relative error, the latter with denominator
/// `max(|x_i|, delta_floor)`.
pub fn error_metrics(s: &BinSeries, r: &ReleasedSeries, delta_floor: f64) -> Result<ErrorMetrics> {
    error_metrics_values(s, &r.values, delta_floor)
}

pub fn error_metrics_values(
    s: &BinSeries,
    released: &[f64],
    delta_floor: f64,
) -> Result<ErrorMetrics> {
    if released.len() != s.len() {
        return Err(Error::LengthMismatch {
            expected: s.len(),
            actual: released.len(),
        });
    }
    if !(delta_floor.is_finite() && delta_floor > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "delta_floor must be positive, got {delta_floor}"
        )));
    }
    let n = s.len() as f64;
    let (abs, rel) = s
        .bins()
        .iter()
        .zip(released)
        .fold((0.0, 0.0), |(a, r), (&x, &y)| {
            let d = (x - y).abs();
            (a + d, r + d / x.abs().max(delta_floor))
        });
    Ok(ErrorMetrics {
        abs: abs / n,
        rel: rel / n,
    })
}

/// Metrics for one algorithm on one trial.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub preservation_pct: Option<f64>,
    pub abs_err_partition: f64,
    pub rel_err_partition: f64,
    pub abs_err_release: f64,
    pub rel_err_release: f64,
    pub partition_time: Duration,
    pub total_time: Duration,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::SeededRng;
    use crate::release::release;
    use crate::series::PrivacyBudget;

    fn s(v: &[f64]) -> BinSeries {
        BinSeries::from_bins(v.to_vec()).unwrap()
    }

    #[test]
    fn ground_truth_examples() {
        assert_eq!(
            ground_truth_rapid_changes(&s(&[70., 100., 102.]), 15.0).indices,
            vec![2]
        );
        assert!(ground_truth_rapid_changes(&s(&[70., 71., 72.]), 15.0).is_empty());
        assert_eq!(
            ground_truth_rapid_changes(&s(&[50., 80., 50., 80.]), 15.0).indices,
            vec![2, 3, 4]
        );
        assert!(ground_truth_rapid_changes(&s(&[70., 85.]), 15.0).is_empty());
    }

    #[test]
    fn preservation_examples() {
        let x = s(&[70., 100., 102.]);
        let gt = RapidChangeSet { indices: vec![2] };
        let p = Partition::from_ranges(&x, &[(1, 1), (2, 3)]);
        assert_eq!(preservation_pct(&gt, &p, Detection::Separated), Some(100.0));
        let p = Partition::from_ranges(&x, &[(1, 3)]);
        assert_eq!(preservation_pct(&gt, &p, Detection::Separated), Some(0.0));
        let gt = RapidChangeSet {
            indices: vec![2, 3],
        };
        let p = Partition::from_ranges(&x, &[(1, 1), (2, 2), (3, 3)]);
        assert_eq!(preservation_pct(&gt, &p, Detection::Separated), Some(100.0));
    }

    #[test]
    fn preservation_absent_without_changes() {
        let x = s(&[1., 2.]);
        let p = Partition::from_ranges(&x, &[(1, 2)]);
        assert_eq!(
            preservation_pct(&RapidChangeSet::default(), &p, Detection::Separated),
            None
        );
    }

    #[test]
    fn strict_detection_needs_single_bins() {
        let x = s(&[70., 100., 102.]);
        let gt = RapidChangeSet { indices: vec![2] };
        let p = Partition::from_ranges(&x, &[(1, 1), (2, 3)]);
        assert_eq!(preservation_pct(&gt, &p, Detection::BothSingle), Some(0.0));
    }

    fn released(x: &BinSeries, values: Vec<f64>) -> ReleasedSeries {
        let p = Partition::from_ranges(x, &[(1, x.len())]);
        let mut r = release(
            x,
            &p,
            &PrivacyBudget::new(1.0, 1.0, 1.0).unwrap(),
            &mut SeededRng::new(0),
            true,
        )
        .unwrap();
        r.values = values;
        r
    }

    #[test]
    fn error_examples() {
        let x = s(&[70., 72.]);
        let e = error_metrics(&x, &released(&x, vec![71., 71.]), 1.0).unwrap();
        assert_eq!(e.abs, 1.0);
        assert!((e.rel - (1.0 / 70.0 + 1.0 / 72.0) / 2.0).abs() < 1e-15);

        let e = error_metrics(&x, &released(&x, vec![70., 72.]), 1.0).unwrap();
        assert_eq!((e.abs, e.rel), (0.0, 0.0));

        let z = s(&[0., 0.]);
        let e = error_metrics(&z, &released(&z, vec![1., 1.]), 1.0).unwrap();
        assert_eq!((e.abs, e.rel), (1.0, 1.0));
    }

    #[test]
    fn error_length_mismatch() {
        let x = s(&[70., 72.]);
        assert!(matches!(
            error_metrics(&x, &released(&x, vec![1.0]), 1.0),
            Err(Error::LengthMismatch { .. })
        ));
    }
}
