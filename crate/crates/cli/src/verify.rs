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

//! Grid check of the threshold-randomization likelihood ratio.

use dpbins::noise::ratio_grid_margins;
use dpbins::{dp_ratio_bound_check, dp_ratio_check_with_scale};

use crate::Result;

pub const DEFAULT_EPSILONS: [f64; 4] = [0.1, 0.5, 1.0, 2.0];

#[derive(Clone, Debug, PartialEq)]
pub struct GridLine {
    pub eps1: f64,
    pub points: usize,
    pub max_ratio: f64,
    pub bound: f64,
    pub failures: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DpGridReport {
    pub alpha: f64,
    /// Noise at `alpha / eps1`.
    pub private_scale: Vec<GridLine>,
    /// Noise at `1 / eps1`, for comparison.
    pub unit_scale: Vec<GridLine>,
}

impl DpGridReport {
    pub fn private_scale_ok(&self) -> bool {
        self.private_scale.iter().all(|l| l.failures == 0)
    }

    pub fn unit_scale_violated(&self) -> bool {
        self.unit_scale.iter().any(|l| l.failures > 0)
    }
}

fn line<F>(alpha: f64, eps1: f64, check: F) -> Result<GridLine>
where
    F: Fn(f64) -> dpbins::Result<dpbins::RatioCheck>,
{
    let mut out = GridLine {
        eps1,
        points: 0,
        max_ratio: 0.0,
        bound: eps1.exp(),
        failures: 0,
    };
    for u in ratio_grid_margins(alpha) {
        let r = check(u)?;
        out.points += 1;
        out.max_ratio = out.max_ratio.max(r.ratio);
        if !r.bound_ok {
            out.failures += 1;
        }
    }
    Ok(out)
}

/// Evaluates the ratio on `u = -5 alpha ..= 5 alpha` in steps of `alpha / 10`
/// for each `eps1`, at both noise scales.
pub fn verify_dp_grid(alpha: f64, epsilons: &[f64]) -> Result<DpGridReport> {
    let mut private_scale = Vec::new();
    let mut unit_scale = Vec::new();
    for &eps in epsilons {
        private_scale.push(line(alpha, eps, |u| dp_ratio_bound_check(u, alpha, eps))?);
        unit_scale.push(line(alpha, eps, |u| {
            dp_ratio_check_with_scale(u, alpha, eps, 1.0 / eps)
        })?);
    }
    Ok(DpGridReport {
        alpha,
        private_scale,
        unit_scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_passes_at_private_scale() {
        let r = verify_dp_grid(160.0 / 14.0, &DEFAULT_EPSILONS).unwrap();
        assert!(r.private_scale_ok());
        assert!(r.private_scale.iter().all(|l| l.points == 101));
        assert!(r.unit_scale_violated());
    }

    #[test]
    fn unit_alpha_makes_scales_equal() {
        let r = verify_dp_grid(1.0, &[0.5]).unwrap();
        assert_eq!(r.private_scale, r.unit_scale);
        assert!(!r.unit_scale_violated());
    }
}
