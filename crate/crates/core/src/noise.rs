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

//! Laplace sampling, threshold randomization, and closed-form checks of the
//! likelihood-ratio bound that makes threshold randomization private.

use rand::distr::Open01;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{PrivacyBudget, Thresholds};

/// Relative slack allowed when comparing a ratio against `e^eps`.
pub const RATIO_TOLERANCE: f64 = 1e-9;

/// Deterministic pseudorandom stream keyed by a 64-bit seed.
///
/// Backed by ChaCha8, so a given `(seed, stream)` yields the same sequence on
/// every platform. Not suitable where cryptographic randomness is required.
#[derive(Clone, Debug)]
pub struct SeededRng {
    seed: u64,
    stream: u64,
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    /// Independent stream under the same seed.
    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        SeededRng {
            seed,
            stream,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Uniform draw on the open interval (0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.inner.sample(Open01)
    }
}

impl RngCore for SeededRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// Zero-mean Laplace distribution with scale `b`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaplaceParams {
    scale: f64,
}

impl LaplaceParams {
    pub fn new(scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::invalid(format!(
                "laplace scale must be positive and finite, got {scale}"
            )));
        }
        Ok(LaplaceParams { scale })
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }
}

/// Inverse CDF of Lap(0, 1) at `u`.
fn standard_laplace_quantile(u: f64) -> f64 {
    (0.5 - u).signum() * (1.0 - 2.0 * (u - 0.5).abs()).ln()
}

/// Inverse-CDF transform of a uniform `u` in (0, 1) to a Lap(0, `scale`) draw.
pub fn laplace_from_uniform(u: f64, scale: f64) -> f64 {
    scale * standard_laplace_quantile(u)
}

/// One Laplace draw; consumes exactly one uniform from `rng`.
pub fn sample_laplace(rng: &mut SeededRng, params: &LaplaceParams) -> f64 {
    laplace_from_uniform(rng.uniform(), params.scale)
}

/// `Pr(Y > u)` for `Y ~ Lap(0, b)`.
pub fn laplace_tail(u: f64, params: &LaplaceParams) -> f64 {
    let b = params.scale;
    if u >= 0.0 {
        0.5 * (-u / b).exp()
    } else {
        1.0 - 0.5 * (u / b).exp()
    }
}

/// Which sensitivity the threshold noise is calibrated to.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleMode {
    /// `alpha / eps1`: the scale the privacy argument requires.
    #[default]
    ProofAlpha,
    /// `1 / eps1`: unit sensitivity, kept for fidelity experiments. Not
    /// private when `alpha > 1`.
    UnitScale,
}

impl ScaleMode {
    pub fn threshold_scale(self, budget: &PrivacyBudget) -> f64 {
        match self {
            ScaleMode::ProofAlpha => budget.alpha / budget.eps1,
            ScaleMode::UnitScale => 1.0 / budget.eps1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ScaleMode::ProofAlpha => "proof_alpha",
            ScaleMode::UnitScale => "unit",
        }
    }
}

impl std::str::FromStr for ScaleMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "proof_alpha" => Ok(ScaleMode::ProofAlpha),
            "unit" => Ok(ScaleMode::UnitScale),
            other => Err(Error::invalid(format!(
                "unknown scale mode {other:?} (expected proof_alpha or unit)"
            ))),
        }
    }
}

impl std::fmt::Display for ScaleMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Noised spread and jump thresholds, with the realized noise kept for
/// reproducibility.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomizedThresholds {
    pub t_d_hat: f64,
    pub t_r_hat: f64,
    pub y: f64,
    pub y_prime: f64,
}

/// Draws `Y` then `Y'` once for a whole partitioning run. With `zero_noise`
/// both are 0 and `rng` is left untouched.
pub fn randomize_thresholds(
    rng: &mut SeededRng,
    t: &Thresholds,
    budget: &PrivacyBudget,
    mode: ScaleMode,
    zero_noise: bool,
) -> Result<RandomizedThresholds> {
    let (y, y_prime) = if zero_noise {
        (0.0, 0.0)
    } else {
        let params = LaplaceParams::new(mode.threshold_scale(budget))?;
        let y = sample_laplace(rng, &params);
        (y, sample_laplace(rng, &params))
    };
    Ok(RandomizedThresholds {
        t_d_hat: t.t_d + y,
        t_r_hat: t.t_r + y_prime,
        y,
        y_prime,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RatioCheck {
    /// `Pr(Y > u - alpha) / Pr(Y > u)`.
    pub ratio: f64,
    /// `e^eps1`.
    pub bound: f64,
    pub bound_ok: bool,
}

/// Worst-case likelihood ratio of a threshold comparison when one bin moves
/// by `alpha`, with threshold noise at the private scale `alpha / eps1`.
///
/// `u` is the margin by which the observed spread exceeds the clean
/// threshold.
pub fn dp_ratio_bound_check(u: f64, alpha: f64, eps1: f64) -> Result<RatioCheck> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::invalid(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    if !(eps1.is_finite() && eps1 > 0.0) {
        return Err(Error::invalid(format!("eps1 must be positive, got {eps1}")));
    }
    dp_ratio_check_with_scale(u, alpha, eps1, alpha / eps1)
}

/// As [`dp_ratio_bound_check`] but with an arbitrary noise scale.
pub fn dp_ratio_check_with_scale(u: f64, alpha: f64, eps1: f64, scale: f64) -> Result<RatioCheck> {
    let params = LaplaceParams::new(scale)?;
    let denom = laplace_tail(u, &params);
    if denom == 0.0 {
        return Err(Error::TailUnderflow { u, scale });
    }
    let ratio = laplace_tail(u - alpha, &params) / denom;
    let bound = eps1.exp();
    Ok(RatioCheck {
        ratio,
        bound,
        bound_ok: ratio <= bound * (1.0 + RATIO_TOLERANCE),
    })
}

/// The margins `u = k * alpha / 10` for `k = -50..=50`.
pub fn ratio_grid_margins(alpha: f64) -> impl Iterator<Item = f64> {
    (-50..=50).map(move |k| alpha * f64::from(k) / 10.0)
}
