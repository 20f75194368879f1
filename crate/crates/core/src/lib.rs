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

//! Pattern-preserving differentially private release of time-series bins.
//!
//! The pipeline has three stages:
//!
//! 1. [`series::aggregate`] turns raw per-record measurements into bins.
//! 2. [`partition::partition_pattern_preserving`] groups bins into buckets
//!    using randomized thresholds, isolating rapid changes between adjacent
//!    bins as single-bin buckets so they survive averaging.
//! 3. [`release::release`] publishes each bucket average with Laplace noise.
//!
//! [`partition::partition_baseline`] implements the spread/length-only greedy
//! partitioner used for comparison, and [`metrics`] computes pattern
//! preservation and error figures for both.

pub mod error;
pub mod metrics;
pub mod noise;
pub mod partition;
pub mod release;
pub mod series;

pub use error::{Error, Result};
pub use metrics::{
    error_metrics, ground_truth_rapid_changes, preservation_pct, Detection, ErrorMetrics,
    MetricsReport, RapidChangeSet,
};
pub use noise::{
    dp_ratio_bound_check, dp_ratio_check_with_scale, laplace_from_uniform, laplace_tail,
    randomize_thresholds, sample_laplace, LaplaceParams, RandomizedThresholds, RatioCheck,
    ScaleMode, SeededRng,
};
pub use partition::{
    partition_baseline, partition_pattern_preserving, scan_cost, BaselineConfig, PartitionConfig,
    ScanCost,
};
pub use release::{
    export_release, release, release_with, ExportFormat, ReleaseOptions, ReleasedSeries,
};
pub use series::{
    aggregate, total_epsilon, validate_partition, BinSeries, Bucket, Partition, PrivacyBudget,
    RawSeries, Thresholds, Validation,
};
