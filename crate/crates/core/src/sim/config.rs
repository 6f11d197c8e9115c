use std::fmt::Write as _;

use crate::deposition::DepositionMechanism;

use super::SimError;

/// Parameters of one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Probability that an event is a market order.
    pub pi: f64,
    /// Limit orders land in `]b, b + k s]` (sell) or `[a - k s, a[` (buy).
    pub k: f64,
    pub mechanism: DepositionMechanism<f64>,
    /// Per-unit, per-event cancellation probability.
    pub cancel_rate: f64,
    /// Recorded steps, after warm-up.
    pub steps: u64,
    /// Steps simulated and discarded before recording starts.
    pub warmup: u64,
    pub seed: u64,
    /// Replica index; selects an independent ChaCha stream under `seed`.
    pub stream: u64,
    /// Width of the dense price window, in ticks.
    pub window: usize,
    /// Consecutive unit-volume quotes seeded on each side.
    pub initial_depth: usize,
    /// Spread above which the run is declared divergent. `None` uses
    /// [`SimConfig::default_ceiling`].
    pub spread_ceiling: Option<u64>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            pi: 1.0 / 3.0,
            k: 3.0,
            mechanism: DepositionMechanism::Uniform,
            cancel_rate: 4e-3,
            steps: 1_000_000,
            warmup: 100_000,
            seed: 1,
            stream: 0,
            window: 10_000,
            initial_depth: 50,
            spread_ceiling: None,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let fail = |msg: String| Err(SimError::Config(msg));
        if !(self.pi > 0.0 && self.pi < 1.0) {
            return fail(format!("pi = {} must lie in (0, 1)", self.pi));
        }
        if !(self.k > 1.0 && self.k.is_finite()) {
            return fail(format!("k = {} must be > 1", self.k));
        }
        if !(self.cancel_rate >= 0.0 && self.cancel_rate < 1.0) {
            return fail(format!("cancel_rate = {} must lie in [0, 1)", self.cancel_rate));
        }
        if let DepositionMechanism::NonUniform { alpha } = self.mechanism {
            if !(alpha > 0.0 && alpha < 1.0) {
                return fail(format!("alpha = {alpha} must lie in (0, 1)"));
            }
        }
        if self.steps == 0 {
            return fail("steps must be positive".into());
        }
        if self.warmup >= self.steps {
            return fail(format!(
                "warmup ({}) must be smaller than steps ({})",
                self.warmup, self.steps
            ));
        }
        if self.initial_depth == 0 {
            return fail("initial_depth must be at least 1".into());
        }
        if self.window < 4 * self.initial_depth + 16 {
            return fail(format!(
                "window {} too narrow for initial_depth {}",
                self.window, self.initial_depth
            ));
        }
        if let Some(c) = self.spread_ceiling {
            if c < 2 || c > self.max_ceiling() {
                return fail(format!(
                    "spread_ceiling {c} must lie in [2, {}]",
                    self.max_ceiling()
                ));
            }
        }
        Ok(())
    }

    /// Largest spread for which the placement range around a centred mid
    /// still fits in the window.
    pub fn max_ceiling(&self) -> u64 {
        ((self.window as f64 / 2.0 - 2.0) / (self.k - 0.5)).floor().max(2.0) as u64
    }

    /// A quarter of the window, capped so placements always fit.
    pub fn default_ceiling(&self) -> u64 {
        (self.window as u64 / 4).min(self.max_ceiling()).max(2)
    }

    pub fn ceiling(&self) -> u64 {
        self.spread_ceiling.unwrap_or_else(|| self.default_ceiling())
    }

    pub fn alpha(&self) -> Option<f64> {
        self.mechanism.alpha().copied()
    }

    /// `key=value` lines describing every parameter, in a fixed order.
    pub fn describe(&self) -> Vec<(&'static str, String)> {
        vec![
            ("pi", format!("{}", self.pi)),
            ("k", format!("{}", self.k)),
            ("mechanism", self.mechanism.label().to_string()),
            (
                "alpha",
                self.alpha().map_or_else(|| "none".to_string(), |a| format!("{a}")),
            ),
            ("cancel_rate", format!("{}", self.cancel_rate)),
            ("steps", self.steps.to_string()),
            ("warmup", self.warmup.to_string()),
            ("seed", self.seed.to_string()),
            ("stream", self.stream.to_string()),
            ("window", self.window.to_string()),
            ("initial_depth", self.initial_depth.to_string()),
            ("spread_ceiling", self.ceiling().to_string()),
        ]
    }

    pub fn describe_comment(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.describe() {
            let _ = writeln!(out, "# {k}={v}");
        }
        out
    }
}
