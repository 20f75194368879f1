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

//! Experiment configuration and its flat `key = value` file format.
//!
//! ```text
//! # comment
//! input = synthetic            # or a path to a raw-series CSV
//! window = 1
//! t_d = 30
//! t_l = 4
//! t_r = 15
//! eps1 = 0.5
//! eps2 = 0.5
//! alpha = 160/14
//! baseline_t_d_variants = 15, 30
//! trials = 1000
//! base_seed = 7
//! zero_noise = false
//! scale_mode = proof_alpha
//! delta_floor = 1
//! clamp = false
//! synthetic.length = 2016
//! synthetic.jump_count = 20
//! ```

use std::path::{Path, PathBuf};

use dpbins::{Detection, PrivacyBudget, ScaleMode, Thresholds};

use crate::synth::SyntheticSpec;
use crate::{HarnessError, Result};

/// Physiological heart-rate range used for clamping released values.
pub const CLAMP_RANGE: (f64, f64) = (50.0, 210.0);

#[derive(Clone, Debug, PartialEq)]
pub enum InputSpec {
    /// One fresh series per trial, seeded by the trial seed.
    Synthetic(SyntheticSpec),
    /// The same recorded series for every trial.
    File(PathBuf),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub input: InputSpec,
    pub window: usize,
    pub thresholds: Thresholds,
    pub budget: PrivacyBudget,
    pub baseline_t_d_variants: Vec<f64>,
    pub trials: usize,
    pub base_seed: u64,
    pub zero_noise: bool,
    pub scale_mode: ScaleMode,
    pub delta_floor: f64,
    pub clamp: bool,
    pub detection: Detection,
    /// Measure wall-clock times. Off by default so summaries are
    /// byte-reproducible.
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            input: InputSpec::Synthetic(SyntheticSpec::default()),
            window: 1,
            thresholds: Thresholds {
                t_d: 30.0,
                t_l: 4,
                t_r: 15.0,
            },
            budget: PrivacyBudget {
                eps1: 0.5,
                eps2: 0.5,
                alpha: 160.0 / 14.0,
            },
            baseline_t_d_variants: vec![15.0, 30.0],
            trials: 1000,
            base_seed: 0,
            zero_noise: false,
            scale_mode: ScaleMode::ProofAlpha,
            delta_floor: 1.0,
            clamp: false,
            detection: Detection::Separated,
            timing: false,
        }
    }
}

fn parse_real(v: &str) -> std::result::Result<f64, String> {
    let parsed = match v.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a
                .trim()
                .parse()
                .map_err(|_| format!("not a number: {a:?}"))?;
            let b: f64 = b
                .trim()
                .parse()
                .map_err(|_| format!("not a number: {b:?}"))?;
            a / b
        }
        None => v.parse().map_err(|_| format!("not a number: {v:?}"))?,
    };
    if parsed.is_finite() {
        Ok(parsed)
    } else {
        Err(format!("not a finite number: {v:?}"))
    }
}

fn parse_int<T: std::str::FromStr>(v: &str) -> std::result::Result<T, String> {
    v.parse().map_err(|_| format!("not an integer: {v:?}"))
}

fn parse_bool(v: &str) -> std::result::Result<bool, String> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(format!("not a boolean: {v:?}")),
    }
}

impl ExperimentConfig {
    fn synthetic_mut(&mut self) -> &mut SyntheticSpec {
        if !matches!(self.input, InputSpec::Synthetic(_)) {
            self.input = InputSpec::Synthetic(SyntheticSpec::default());
        }
        match &mut self.input {
            InputSpec::Synthetic(s) => s,
            InputSpec::File(_) => unreachable!(),
        }
    }

    /// Sets one field by its config-file key.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let v = value.trim();
        match key.trim() {
            "input" => {
                self.input = if v == "synthetic" {
                    match &self.input {
                        InputSpec::Synthetic(_) => self.input.clone(),
                        InputSpec::File(_) => InputSpec::Synthetic(SyntheticSpec::default()),
                    }
                } else {
                    InputSpec::File(PathBuf::from(v))
                }
            }
            "window" => self.window = parse_int(v)?,
            "t_d" => self.thresholds.t_d = parse_real(v)?,
            "t_l" => self.thresholds.t_l = parse_int(v)?,
            "t_r" => self.thresholds.t_r = parse_real(v)?,
            "eps1" => self.budget.eps1 = parse_real(v)?,
            "eps2" => self.budget.eps2 = parse_real(v)?,
            "alpha" => self.budget.alpha = parse_real(v)?,
            "baseline_t_d_variants" => {
                self.baseline_t_d_variants = v
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(parse_real)
                    .collect::<std::result::Result<_, _>>()?
            }
            "trials" => self.trials = parse_int(v)?,
            "base_seed" => self.base_seed = parse_int(v)?,
            "zero_noise" => self.zero_noise = parse_bool(v)?,
            "scale_mode" => {
                self.scale_mode = v.parse().map_err(|e: dpbins::Error| e.to_string())?
            }
            "delta_floor" => self.delta_floor = parse_real(v)?,
            "clamp" => self.clamp = parse_bool(v)?,
            "timing" => self.timing = parse_bool(v)?,
            "detection" => {
                self.detection = match v {
                    "separated" => Detection::Separated,
                    "both_single" => Detection::BothSingle,
                    _ => return Err(format!("unknown detection {v:?}")),
                }
            }
            "synthetic.length" => self.synthetic_mut().length = parse_int(v)?,
            "synthetic.base_level" => self.synthetic_mut().base_level = parse_real(v)?,
            "synthetic.walk_step_sd" => self.synthetic_mut().walk_step_sd = parse_real(v)?,
            "synthetic.jump_count" => self.synthetic_mut().jump_count = parse_int(v)?,
            "synthetic.jump_magnitude_lo" => {
                self.synthetic_mut().jump_magnitude_range.0 = parse_real(v)?
            }
            "synthetic.jump_magnitude_hi" => {
                self.synthetic_mut().jump_magnitude_range.1 = parse_real(v)?
            }
            "synthetic.clip_lo" => self.synthetic_mut().value_clip.0 = parse_real(v)?,
            "synthetic.clip_hi" => self.synthetic_mut().value_clip.1 = parse_real(v)?,
            other => return Err(format!("unknown key {other:?}")),
        }
        Ok(())
    }

    /// Applies `key = value` lines over the current values.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| HarnessError::ConfigLine {
                    line: n + 1,
                    message: format!("expected key = value, found {line:?}"),
                })?;
            self.set(k, v).map_err(|message| HarnessError::ConfigLine {
                line: n + 1,
                message,
            })?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::io(format!("reading {}", path.display()), e))?;
        Self::from_text(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(HarnessError::Config("trials must be at least 1".into()));
        }
        if self.window == 0 {
            return Err(HarnessError::Config("window must be at least 1".into()));
        }
        Thresholds::new(
            self.thresholds.t_d,
            self.thresholds.t_l,
            self.thresholds.t_r,
        )?;
        self.budget.validate()?;
        if let Some(t) = self
            .baseline_t_d_variants
            .iter()
            .find(|t| !(t.is_finite() && **t > 0.0))
        {
            return Err(HarnessError::Config(format!(
                "baseline t_d variant must be positive, got {t}"
            )));
        }
        if !(self.delta_floor.is_finite() && self.delta_floor > 0.0) {
            return Err(HarnessError::Config(format!(
                "delta_floor must be positive, got {}",
                self.delta_floor
            )));
        }
        if let InputSpec::Synthetic(s) = &self.input {
            s.validate()?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_file() {
        let cfg = ExperimentConfig::from_text(
            "# unit-scale setup\n\
             t_d = 30\nt_l = 4\nt_r = 15\n\
             eps1 = 1\neps2 = 0.25\nalpha = 160/14\n\
             baseline_t_d_variants = 15, 30, 45\n\
             trials = 12\nbase_seed = 99\nzero_noise = true\n\
             scale_mode = unit\nclamp = yes\n\
             synthetic.length = 100\nsynthetic.jump_count = 5  # few\n",
        )
        .unwrap();
        assert_eq!(cfg.budget.alpha, 160.0 / 14.0);
        assert_eq!(cfg.budget.eps2, 0.25);
        assert_eq!(cfg.baseline_t_d_variants, vec![15.0, 30.0, 45.0]);
        assert_eq!((cfg.trials, cfg.base_seed), (12, 99));
        assert!(cfg.zero_noise && cfg.clamp);
        assert_eq!(cfg.scale_mode, ScaleMode::UnitScale);
        match &cfg.input {
            InputSpec::Synthetic(s) => assert_eq!((s.length, s.jump_count), (100, 5)),
            other => panic!("unexpected input {other:?}"),
        }
        cfg.validate().unwrap();
    }

    #[test]
    fn file_input() {
        let cfg = ExperimentConfig::from_text("input = data/hr.csv\nwindow = 5\n").unwrap();
        assert_eq!(cfg.input, InputSpec::File(PathBuf::from("data/hr.csv")));
        assert_eq!(cfg.window, 5);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = ExperimentConfig::from_text("t_d = 30\nbogus = 1\n").unwrap_err();
        assert!(
            matches!(err, HarnessError::ConfigLine { line: 2, .. }),
            "{err}"
        );
        let err = ExperimentConfig::from_text("\nt_l = four\n").unwrap_err();
        assert!(matches!(err, HarnessError::ConfigLine { line: 2, .. }));
        let err = ExperimentConfig::from_text("no equals sign\n").unwrap_err();
        assert!(matches!(err, HarnessError::ConfigLine { line: 1, .. }));
    }

    #[test]
    fn validation() {
        let mut cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        cfg.trials = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::default();
        cfg.thresholds.t_r = 40.0;
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::default();
        cfg.set("synthetic.jump_count", "5000").unwrap();
        assert!(cfg.validate().is_err());
    }
}
