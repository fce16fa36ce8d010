//! Declarative experiment configuration.

use serde::{Deserialize, Serialize};

use crate::bunching::Strictness;
use crate::error::{Error, Result};
use crate::twisting::AutomorphismSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Fiber-bunching certificate only.
    Certify,
    /// `B = conjugate(A, Q)`, recover `Q` as the transfer map.
    Reconstruct,
    /// periodic-data mismatch detection and s/u consistency.
    PeriodicMismatch,
    /// holonomy increment decay against the certified rate.
    HolonomyRate,
    /// margin sweep over an `Inner(diag(s, 1/s))` twist.
    MarginSweep,
    /// shadowing constants and rates of the closing lemma.
    Closing,
}

impl Scenario {
    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Certify => "certify",
            Scenario::Reconstruct => "reconstruct",
            Scenario::PeriodicMismatch => "periodic_mismatch",
            Scenario::HolonomyRate => "holonomy_rate",
            Scenario::MarginSweep => "margin_sweep",
            Scenario::Closing => "closing",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BaseSpec {
    FullShift { symbols: usize, lambda: f64 },
    /// Transition matrix rows as strings of `0`/`1`.
    Sft { rows: Vec<String>, lambda: f64 },
    Torus { matrix: [[i64; 2]; 2] },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorSpec {
    Identity,
    /// Row-major `d×d` matrix.
    Constant { matrix: Vec<f64> },
    /// Random table on words of length `2·radius + 1`, entries `I + scale·E`.
    LocallyConstant { radius: usize, scale: f64 },
    /// `I + Σ_{|i| ≤ reach} decay^{|i|} W[x_i]` with random `‖W‖ = amplitude`.
    SymbolicSeries { decay: f64, reach: usize, amplitude: f64 },
    /// `φ(x)·I` with `φ = 1 + Σ decay^{|i|} weights[x_i]`.
    ScalarSeries { weights: Vec<f64>, decay: f64, reach: usize },
    /// Random trigonometric polynomial with modes `|k_i| ≤ 1`.
    TorusSmooth { amplitude: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub s_min: f64,
    pub s_max: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClosingSpec {
    pub periods: Vec<usize>,
    /// Per period, on the torus.
    pub trials: usize,
}

fn default_dim() -> usize {
    2
}
fn default_tolerance() -> f64 {
    1e-10
}
fn default_n_max() -> usize {
    200
}
fn default_samples() -> usize {
    20
}
fn default_theta_n_max() -> usize {
    30
}
fn default_periodic_n_max() -> usize {
    6
}
fn default_strictness() -> Strictness {
    Strictness::FiveTwo
}
fn default_automorphism() -> AutomorphismSpec {
    AutomorphismSpec::Identity
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub seed: u64,
    pub base: BaseSpec,
    #[serde(default = "default_dim")]
    pub dim: usize,
    pub generator: GeneratorSpec,
    /// `Q` for reconstruction scenarios; normalized so that `Q(x) = I` at
    /// the anchor.
    #[serde(default)]
    pub conjugator: Option<GeneratorSpec>,
    #[serde(default = "default_automorphism")]
    pub automorphism: AutomorphismSpec,
    #[serde(default = "default_strictness")]
    pub strictness: Strictness,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_theta_n_max")]
    pub theta_n_max: usize,
    #[serde(default = "default_periodic_n_max")]
    pub periodic_n_max: usize,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub closing: Option<ClosingSpec>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::ConfigInvalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::ConfigInvalid(m));
        if self.dim == 0 || self.dim > 4 {
            return bad(format!("dim must be in 1..=4, got {}", self.dim));
        }
        if !(self.tolerance > 0.0) {
            return bad(format!("tolerance must be positive, got {}", self.tolerance));
        }
        if self.n_max == 0 || self.samples == 0 {
            return bad("n_max and samples must be positive".into());
        }
        if self.theta_n_max < 8 {
            return bad(format!("theta_n_max must be at least 8, got {}", self.theta_n_max));
        }
        match &self.base {
            BaseSpec::FullShift { symbols, lambda } if *symbols < 2 || !(*lambda > 0.0) => {
                return bad("full shift needs at least two symbols and lambda > 0".into())
            }
            BaseSpec::Sft { lambda, .. } if !(*lambda > 0.0) => return bad("lambda must be positive".into()),
            _ => {}
        }
        let torus = matches!(self.base, BaseSpec::Torus { .. });
        for g in std::iter::once(&self.generator).chain(self.conjugator.as_ref()) {
            let symbolic = matches!(
                g,
                GeneratorSpec::LocallyConstant { .. } | GeneratorSpec::SymbolicSeries { .. } | GeneratorSpec::ScalarSeries { .. }
            );
            if torus && symbolic {
                return bad("symbolic generators need a symbolic base".into());
            }
            if !torus && matches!(g, GeneratorSpec::TorusSmooth { .. }) {
                return bad("torus_smooth needs a torus base".into());
            }
            if let GeneratorSpec::Constant { matrix } = g {
                if matrix.len() != self.dim * self.dim {
                    return bad(format!("constant matrix needs {} entries, got {}", self.dim * self.dim, matrix.len()));
                }
            }
        }
        match self.scenario {
            Scenario::Reconstruct if self.conjugator.is_none() => return bad("reconstruct needs a conjugator".into()),
            Scenario::PeriodicMismatch if torus => return bad("periodic_mismatch needs a symbolic base".into()),
            Scenario::MarginSweep => match &self.sweep {
                None => return bad("margin_sweep needs a sweep block".into()),
                Some(s) if !(s.s_min >= 1.0 && s.s_max > s.s_min && s.steps >= 2) => {
                    return bad("sweep needs 1 ≤ s_min < s_max and steps ≥ 2".into())
                }
                Some(_) if self.dim != 2 => return bad("margin_sweep is defined for dim = 2".into()),
                _ => {}
            },
            Scenario::Closing => match &self.closing {
                None => return bad("closing needs a closing block".into()),
                Some(c) if c.periods.is_empty() || c.periods.contains(&0) || c.trials == 0 => {
                    return bad("closing needs positive periods and trials".into())
                }
                _ => {}
            },
            _ => {}
        }
        Ok(())
    }
}
