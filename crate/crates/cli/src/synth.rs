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

//! Synthetic heart-rate-like bins: a clipped Gaussian random walk with
//! injected level shifts.

use dpbins::{BinSeries, SeededRng};
use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::{HarnessError, Result};

/// Stream reserved for data generation so it never aliases algorithm noise.
pub const SYNTH_STREAM: u64 = 0x5359_4e54;

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticSpec {
    pub length: usize,
    pub base_level: f64,
    pub walk_step_sd: f64,
    pub jump_count: usize,
    /// Jump magnitudes are uniform on `(lo, hi]`.
    pub jump_magnitude_range: (f64, f64),
    pub value_clip: (f64, f64),
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            length: 2016,
            base_level: 75.0,
            walk_step_sd: 2.0,
            jump_count: 20,
            jump_magnitude_range: (15.0, 30.0),
            value_clip: (50.0, 210.0),
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    /// Largest jump count that fits without two jumps at adjacent bins.
    pub fn max_jumps(length: usize) -> usize {
        // Candidate positions are bins 2..=length.
        length / 2
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HarnessError::Config(m));
        let (lo, hi) = self.jump_magnitude_range;
        let (clip_lo, clip_hi) = self.value_clip;
        if self.length == 0 {
            return bad("synthetic length must be at least 1".into());
        }
        if !(self.walk_step_sd.is_finite() && self.walk_step_sd >= 0.0) {
            return bad(format!(
                "walk_step_sd must be non-negative, got {}",
                self.walk_step_sd
            ));
        }
        if !(clip_lo.is_finite() && clip_hi.is_finite() && clip_lo < clip_hi) {
            return bad(format!("invalid value_clip ({clip_lo}, {clip_hi})"));
        }
        if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi) {
            return bad(format!("invalid jump_magnitude_range ({lo}, {hi})"));
        }
        if hi >= clip_hi - clip_lo {
            return bad(format!(
                "jump magnitude {hi} does not fit in clip span {}",
                clip_hi - clip_lo
            ));
        }
        if self.jump_count > Self::max_jumps(self.length) {
            return bad(format!(
                "jump_count {} too large for length {} (max {})",
                self.jump_count,
                self.length,
                Self::max_jumps(self.length)
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticSeries {
    pub series: BinSeries,
    /// 1-based bins `i` where a shift was injected between `i - 1` and `i`.
    pub jump_indices: Vec<usize>,
}

/// Generates a series under `spec`. The same spec always yields the same
/// series.
///
/// At an injected index the walk step is replaced by the jump, and the jump
/// direction is chosen so it stays inside the clip range whenever the
/// magnitude is at most half the clip span.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<SyntheticSeries> {
    spec.validate()?;
    let mut rng = SeededRng::with_stream(spec.seed, SYNTH_STREAM);
    let n = spec.length;
    let k = spec.jump_count;
    let (clip_lo, clip_hi) = spec.value_clip;
    let (lo, hi) = spec.jump_magnitude_range;

    // k non-adjacent positions among the n - 1 gaps: pick k from n - k and
    // spread them out by their rank.
    let mut slots: Vec<usize> = if k == 0 {
        Vec::new()
    } else {
        index::sample(&mut rng, n - k, k).into_vec()
    };
    slots.sort_unstable();
    let jump_indices: Vec<usize> = slots.iter().enumerate().map(|(r, s)| s + r + 2).collect();

    let step = Normal::new(0.0, spec.walk_step_sd)
        .map_err(|e| HarnessError::Config(format!("walk_step_sd: {e}")))?;
    let mut bins = Vec::with_capacity(n);
    let mut x = spec.base_level.clamp(clip_lo, clip_hi);
    bins.push(x);
    let mut next_jump = jump_indices.iter().peekable();
    for i in 2..=n {
        if next_jump.peek() == Some(&&i) {
            next_jump.next();
            let magnitude = lo + (hi - lo) * (1.0 - rng.random::<f64>());
            let up_room = clip_hi - x;
            let down_room = x - clip_lo;
            let up = match (magnitude <= up_room, magnitude <= down_room) {
                (true, true) => rng.random_bool(0.5),
                (true, false) => true,
                (false, true) => false,
                (false, false) => up_room >= down_room,
            };
            x = if up { x + magnitude } else { x - magnitude };
        } else {
            x += step.sample(&mut rng);
        }
        x = x.clamp(clip_lo, clip_hi);
        bins.push(x);
    }

    Ok(SyntheticSeries {
        series: BinSeries::from_bins(bins)?,
        jump_indices,
    })
}
