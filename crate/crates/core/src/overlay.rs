//! Compositing defect masks onto normal images.

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::field::{distance_transform, same_dims, BinaryMask, ColorImage};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OverlayParams {
    pub base_alpha: f64,
    /// Darken factor reached at full strength (1 = no darkening).
    pub max_darken: f64,
    /// Per-channel additive shift at full strength, in `[0, 1]` image units.
    pub max_color_shift: [f64; 3],
    pub edge_fade: f64,
    /// Measure strength as depth into the mask instead of the literal
    /// distance-to-mask, which is zero on every masked pixel.
    pub boundary_fade: bool,
}

impl Default for OverlayParams {
    fn default() -> Self {
        Self {
            base_alpha: 0.8,
            max_darken: 0.4,
            max_color_shift: [0.02, 0.01, 0.0],
            edge_fade: 3.0,
            boundary_fade: false,
        }
    }
}

impl OverlayParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.base_alpha) || !(0.0..=1.0).contains(&self.max_darken) {
            return Err(param("base_alpha and max_darken must lie in [0, 1]"));
        }
        if !(self.edge_fade > 0.0) || !self.edge_fade.is_finite() {
            return Err(param("edge_fade must be > 0"));
        }
        if self.max_color_shift.iter().any(|v| !v.is_finite()) {
            return Err(param("max_color_shift must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceColor(pub [f64; 3]);

impl ReferenceColor {
    pub fn new(rgb: [f64; 3]) -> Result<Self> {
        if rgb.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(param("reference colour channels must lie in [0, 1]"));
        }
        Ok(Self(rgb))
    }
}

/// Darken, colour-shift and alpha-blend the masked pixels. Pixels outside
/// the mask are copied untouched.
pub fn apply_fracture_overlay(image: &ColorImage, mask: &BinaryMask, params: &OverlayParams) -> Result<ColorImage> {
    params.validate()?;
    same_dims(image.dims(), mask.dims())?;
    let dist = if params.boundary_fade {
        distance_transform(mask)?
    } else {
        distance_transform(&mask.invert())?
    };
    let a = params.base_alpha;
    let mut out = image.clone();
    for (y, x) in mask.coords() {
        let s = if params.boundary_fade {
            (dist.get(y, x) / params.edge_fade).clamp(0.0, 1.0)
        } else {
            (1.0 - dist.get(y, x) / params.edge_fade).clamp(0.0, 1.0)
        };
        let factor = 1.0 - (1.0 - params.max_darken) * s;
        let orig = image.pixel(y, x);
        let mut px = [0.0; 3];
        for c in 0..3 {
            let modified = orig[c] * factor + params.max_color_shift[c] * s;
            px[c] = ((1.0 - a) * orig[c] + a * modified).clamp(0.0, 1.0);
        }
        out.set_pixel(y, x, px);
    }
    Ok(out)
}

/// `out = image (1 - s m) + z (s m)` per channel.
pub fn blend_reference_color(
    image: &ColorImage,
    mask: &BinaryMask,
    z: ReferenceColor,
    strength: f64,
) -> Result<ColorImage> {
    same_dims(image.dims(), mask.dims())?;
    if !(0.0..=1.0).contains(&strength) {
        return Err(param("blend strength must lie in [0, 1]"));
    }
    let mut out = image.clone();
    for (y, x) in mask.coords() {
        let p = image.pixel(y, x);
        out.set_pixel(y, x, std::array::from_fn(|c| p[c] * (1.0 - strength) + z.0[c] * strength));
    }
    Ok(out)
}
