use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{param, Result};
use crate::maskgen::{FractureParams, PittingParams, WarpParams};
use crate::overlay::OverlayParams;
use crate::refine::{AcParams, MetricWeights, WaveParams};

/// One mechanism with its parameter block. In JSON:
/// `"mechanism": "fracture", "params": { ... }`. `params` is required but
/// may be `{}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mechanism", content = "params", rename_all = "lowercase")]
pub enum Mechanism {
    Fracture(#[serde(default)] FractureParams),
    Pitting(#[serde(default)] PittingParams),
    Warp(#[serde(default)] WarpParams),
}

impl Mechanism {
    pub fn name(&self) -> &'static str {
        match self {
            Mechanism::Fracture(_) => "fracture",
            Mechanism::Pitting(_) => "pitting",
            Mechanism::Warp(_) => "warp",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Mechanism::Fracture(p) => p.validate(),
            Mechanism::Pitting(p) => p.validate(),
            Mechanism::Warp(p) => p.validate(),
        }
    }
}

/// Reference colour for the pitting blend and the colour metric. Without an
/// explicit colour, `auto_darken` times the mean image colour under the mask
/// is used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReferenceBlend {
    pub color: Option<[f64; 3]>,
    pub strength: f64,
    pub auto_darken: f64,
}

impl Default for ReferenceBlend {
    fn default() -> Self {
        Self { color: None, strength: 0.8, auto_darken: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RefineSettings {
    pub ac: AcParams,
    /// Optional wavelet/PDE filter applied to the masked pixels after relaxation.
    pub wave: Option<WaveParams>,
    pub metrics: MetricWeights,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecipe {
    #[serde(default = "default_category")]
    pub category: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(flatten)]
    pub mechanism: Mechanism,
    #[serde(default)]
    pub overlay: OverlayParams,
    #[serde(default)]
    pub reference: ReferenceBlend,
    #[serde(default)]
    pub refine: RefineSettings,
}

fn default_category() -> String {
    "default".into()
}

impl GenerationRecipe {
    pub fn new(category: impl Into<String>, seed: u64, mechanism: Mechanism) -> Self {
        Self {
            category: category.into(),
            seed,
            mechanism,
            overlay: OverlayParams::default(),
            reference: ReferenceBlend::default(),
            refine: RefineSettings::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: Self = serde_json::from_str(text)?;
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        self.mechanism.validate()?;
        self.overlay.validate()?;
        self.refine.ac.validate()?;
        if !(0.0..=1.0).contains(&self.reference.strength) || !(0.0..=1.0).contains(&self.reference.auto_darken) {
            return Err(param("reference strength and auto_darken must lie in [0, 1]"));
        }
        if let Some(c) = self.reference.color {
            crate::overlay::ReferenceColor::new(c)?;
        }
        Ok(())
    }

    /// Hex SHA-256 of the recipe's compact JSON form. Field order is fixed by
    /// the type definitions, so equal recipes hash equally.
    pub fn digest(&self) -> String {
        let text = serde_json::to_string(self).expect("recipe serialises");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}
