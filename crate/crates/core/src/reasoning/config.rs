use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of the reasoning engine. Deserializes from a flat key-value
/// document; missing keys take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReasoningConfig {
    /// Anchor box side lengths in scene pixels.
    pub scales: Vec<f64>,
    /// Height-to-width ratios of the anchor boxes.
    pub aspect_ratios: Vec<f64>,
    /// Anchor jitter as a fraction of the scale; 0.25 spreads anchors over `[-s/4, s/4]`.
    pub jitter: f64,
    /// Existence threshold: proposals scoring strictly below are discarded.
    pub tau_e: f64,
    /// Anti-center threshold above which a proposal is split.
    pub tau_c: f64,
    /// Extra fraction of the step added on expansion and removed on contraction.
    pub tau_adjust: f64,
    /// Largest contraction, in scene pixels, still treated as converged.
    pub shrink_margin: f64,
    pub max_iterations: usize,
    /// Split children with a side shorter than this many scene pixels are dropped.
    pub min_split_side: usize,
    pub nms_iou: f64,
    /// Total proposals ever created are capped at this multiple of the initial count.
    pub budget_factor: usize,
    pub seed: u64,
}

impl Default for ReasoningConfig {
    fn default() -> Self {
        ReasoningConfig {
            scales: vec![32.0, 64.0, 128.0, 256.0, 512.0],
            aspect_ratios: vec![0.5, 1.0, 2.0],
            jitter: 0.25,
            tau_e: 0.5,
            tau_c: 0.25,
            tau_adjust: 0.5,
            shrink_margin: 16.0,
            max_iterations: 50,
            min_split_side: 16,
            nms_iou: 0.5,
            budget_factor: 20,
            seed: 0,
        }
    }
}

impl ReasoningConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Invalid(msg));
        if self.scales.is_empty() || self.scales.iter().any(|&s| !(s.is_finite() && s > 0.0)) {
            return bad(format!("scales must be positive, got {:?}", self.scales));
        }
        if self.aspect_ratios.is_empty()
            || self
                .aspect_ratios
                .iter()
                .any(|&r| !(r.is_finite() && r > 0.0))
        {
            return bad(format!(
                "aspect ratios must be positive, got {:?}",
                self.aspect_ratios
            ));
        }
        if !(0.0..=0.5).contains(&self.jitter) {
            return bad(format!("jitter {} outside [0, 0.5]", self.jitter));
        }
        for (name, v) in [
            ("tau_e", self.tau_e),
            ("nms_iou", self.nms_iou),
            ("tau_adjust", self.tau_adjust),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} {v} outside [0, 1]"));
            }
        }
        if !(-1.0..=1.0).contains(&self.tau_c) {
            return bad(format!("tau_c {} outside [-1, 1]", self.tau_c));
        }
        if !(self.shrink_margin.is_finite() && self.shrink_margin > 0.0) {
            return bad(format!(
                "shrink_margin {} must be positive",
                self.shrink_margin
            ));
        }
        if self.max_iterations == 0 || self.budget_factor == 0 {
            return bad("max_iterations and budget_factor must be at least 1".into());
        }
        if self.min_split_side < 2 {
            return bad(format!(
                "min_split_side {} must be at least 2",
                self.min_split_side
            ));
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ReasoningConfig = toml::from_str(text).map_err(|e| Error::parse("config", e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
