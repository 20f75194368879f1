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

//! Experiment harness for comparing the pattern-preserving partitioner with
//! the spread/length baseline on synthetic or recorded series.

pub mod config;
pub mod experiment;
pub mod synth;
pub mod timing;
pub mod verify;

use thiserror::Error;

pub use config::{ExperimentConfig, InputSpec};
pub use experiment::{run_experiment, ExperimentOutput, SummaryRow, TrialRow};
pub use synth::{generate_synthetic, SyntheticSeries, SyntheticSpec};
pub use timing::{time_partition, TimingReport};
pub use verify::{verify_dp_grid, DpGridReport};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] dpbins::Error),

    #[error("config line {line}: {message}")]
    ConfigLine { line: usize, message: String },

    #[error("config: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl HarnessError {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        HarnessError::Io {
            context: context.into(),
            source,
        }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
