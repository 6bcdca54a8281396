use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::curation::DEFAULT_RAMP_TOP;
use crate::error::{Error, Result};

/// Which objective terms are active. Each row adds terms to the previous.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    /// End-effector positions only, on the rigidly scaled source.
    #[serde(rename = "ik")]
    Ik,
    /// Global and local matching plus smoothness on the shape-adapted source.
    #[serde(rename = "sink")]
    Sink,
    #[serde(rename = "sink+feasibility")]
    SinkFeasibility,
    #[serde(rename = "sink+feasibility+ground")]
    SinkFeasibilityGround,
    /// Everything, including the anti-skating term.
    #[serde(rename = "physink")]
    PhySink,
}

impl Mode {
    pub const ALL: [Mode; 5] = [
        Mode::Ik,
        Mode::Sink,
        Mode::SinkFeasibility,
        Mode::SinkFeasibilityGround,
        Mode::PhySink,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Ik => "ik",
            Mode::Sink => "sink",
            Mode::SinkFeasibility => "sink+feasibility",
            Mode::SinkFeasibilityGround => "sink+feasibility+ground",
            Mode::PhySink => "physink",
        }
    }

    pub fn uses_shape_adaptation(self) -> bool {
        self != Mode::Ik
    }

    pub fn uses_local_match(self) -> bool {
        self != Mode::Ik
    }

    pub fn uses_smooth(self) -> bool {
        self != Mode::Ik
    }

    pub fn uses_feasibility(self) -> bool {
        matches!(
            self,
            Mode::SinkFeasibility | Mode::SinkFeasibilityGround | Mode::PhySink
        )
    }

    pub fn uses_ground(self) -> bool {
        matches!(self, Mode::SinkFeasibilityGround | Mode::PhySink)
    }

    pub fn uses_skate(self) -> bool {
        self == Mode::PhySink
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    /// Accepts the canonical names and the short ablation aliases
    /// `+feasibility` and `+ground`.
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "ik" => Mode::Ik,
            "sink" => Mode::Sink,
            "sink+feasibility" | "+feasibility" => Mode::SinkFeasibility,
            "sink+feasibility+ground" | "+ground" => Mode::SinkFeasibilityGround,
            "physink" | "+skate" => Mode::PhySink,
            other => {
                return Err(Error::param(
                    "mode",
                    format!("unknown mode `{other}` (expected ik, sink, +feasibility, +ground or physink)"),
                ))
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LossWeights {
    pub w_global_match: f64,
    pub w_local_match: f64,
    pub w_smooth: f64,
    pub w_feasibility: f64,
    pub w_ground: f64,
    pub w_skate: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            w_global_match: 1.0,
            w_local_match: 1.0,
            w_smooth: 0.002,
            w_feasibility: 10.0,
            w_ground: 1000.0,
            w_skate: 0.3,
        }
    }
}

impl LossWeights {
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            w_global_match: self.w_global_match * s,
            w_local_match: self.w_local_match * s,
            w_smooth: self.w_smooth * s,
            w_feasibility: self.w_feasibility * s,
            w_ground: self.w_ground * s,
            w_skate: self.w_skate * s,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            ("w_global_match", self.w_global_match),
            ("w_local_match", self.w_local_match),
            ("w_smooth", self.w_smooth),
            ("w_feasibility", self.w_feasibility),
            ("w_ground", self.w_ground),
            ("w_skate", self.w_skate),
        ];
        for (name, w) in all {
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::param(name, format!("must be a finite value >= 0, got {w}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub mode: Mode,
    pub weights: LossWeights,
    pub iterations: usize,
    /// Initial per-parameter step of the adaptive optimizer (radians or
    /// meters). It decays along a cosine schedule to 1% of this value.
    pub step_size: f64,
    pub limit_margin: f64,
    pub seed: u64,
    /// Height at which a contact marker stops counting as in contact, m.
    pub contact_ramp_top: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            mode: Mode::PhySink,
            weights: LossWeights::default(),
            iterations: 2000,
            step_size: 0.01,
            limit_margin: 0.98,
            seed: 0,
            contact_ramp_top: DEFAULT_RAMP_TOP,
        }
    }
}

impl OptimizerConfig {
    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.weights.validate()?;
        if self.iterations == 0 {
            return Err(Error::param("iterations", "must be > 0"));
        }
        if !(self.step_size.is_finite() && self.step_size > 0.0) {
            return Err(Error::param(
                "step_size",
                format!("must be > 0, got {}", self.step_size),
            ));
        }
        if !(self.limit_margin > 0.0 && self.limit_margin <= 1.0) {
            return Err(Error::param(
                "limit_margin",
                format!("must lie in (0, 1], got {}", self.limit_margin),
            ));
        }
        if !(self.contact_ramp_top.is_finite() && self.contact_ramp_top > 0.0) {
            return Err(Error::param("contact_ramp_top", "must be > 0"));
        }
        Ok(())
    }
}
