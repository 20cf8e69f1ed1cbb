use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

/// Fracture-line skeleton and thickening parameters. Field names follow the
/// mask-generation parameter table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FractureParams {
    pub max_steps: u32,
    pub step_size: f64,
    pub branching_prob: f64,
    pub stop_prob: f64,
    pub n_starts: u32,
    pub w0: f64,
    pub alpha: f64,
    pub epsilon: f64,
    pub noise_scale: f64,
    pub noise_octaves: u32,
    pub morph_kernel_size: usize,
    pub sigma_blur: f64,
    pub blur_threshold: f64,
}

impl Default for FractureParams {
    fn default() -> Self {
        Self {
            max_steps: 400,
            step_size: 1.5,
            branching_prob: 0.03,
            stop_prob: 0.02,
            n_starts: 2,
            w0: 1.5,
            alpha: 0.015,
            epsilon: 0.5,
            noise_scale: 0.2,
            noise_octaves: 2,
            morph_kernel_size: 3,
            sigma_blur: 1.0,
            blur_threshold: 0.3,
        }
    }
}

impl FractureParams {
    pub fn validate(&self) -> Result<()> {
        prob("branching_prob", self.branching_prob)?;
        prob("stop_prob", self.stop_prob)?;
        positive("step_size", self.step_size)?;
        positive("w0", self.w0)?;
        positive("alpha", self.alpha)?;
        positive("epsilon", self.epsilon)?;
        positive("sigma_blur", self.sigma_blur)?;
        if !(self.noise_scale >= 0.0) {
            return Err(param("noise_scale must be >= 0"));
        }
        if self.noise_octaves == 0 {
            return Err(param("noise_octaves must be >= 1"));
        }
        odd_kernel(self.morph_kernel_size)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PittingParams {
    pub k: u32,
    /// `(min, max)` polygon radius in pixels.
    pub polygon_size: (f64, f64),
    pub deform_factor: f64,
    pub overlap_prob: f64,
    pub n_growth: u32,
    pub grow_prob: f64,
    /// Edge-erosion threshold on the noise value.
    pub perlin_threshold: f64,
    pub noise_enabled: bool,
    pub noise_octaves: u32,
    /// Lattice cells per image side for the erosion noise.
    pub noise_frequency: f64,
}

impl Default for PittingParams {
    fn default() -> Self {
        Self {
            k: 3,
            polygon_size: (15.0, 65.0),
            deform_factor: 0.2,
            overlap_prob: 0.85,
            n_growth: 20,
            grow_prob: 0.5,
            perlin_threshold: 0.15,
            noise_enabled: true,
            noise_octaves: 3,
            noise_frequency: 8.0,
        }
    }
}

impl PittingParams {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.polygon_size;
        if !(lo > 0.0 && hi >= lo) {
            return Err(param("polygon_size must satisfy 0 < min <= max"));
        }
        if !(0.0..1.0).contains(&self.deform_factor) {
            return Err(param("deform_factor must lie in [0, 1)"));
        }
        prob("overlap_prob", self.overlap_prob)?;
        prob("grow_prob", self.grow_prob)?;
        if self.noise_octaves == 0 {
            return Err(param("noise_octaves must be >= 1"));
        }
        positive("noise_frequency", self.noise_frequency)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WarpParams {
    pub num_ctrl_pts: usize,
    pub max_offset: f64,
    /// Length scale of the spline's affine block.
    pub dist_field_radius: f64,
    /// Width of the band whose mean colour seeds the hole fill.
    pub inpaint_radius: usize,
    pub margin: usize,
    pub partial_roi: bool,
}

impl Default for WarpParams {
    fn default() -> Self {
        Self {
            num_ctrl_pts: 6,
            max_offset: 15.0,
            dist_field_radius: 50.0,
            inpaint_radius: 5,
            margin: 15,
            partial_roi: false,
        }
    }
}

impl WarpParams {
    pub fn validate(&self) -> Result<()> {
        if self.num_ctrl_pts < 3 {
            return Err(param("num_ctrl_pts must be >= 3"));
        }
        if !(self.max_offset >= 0.0) || !self.max_offset.is_finite() {
            return Err(param("max_offset must be finite and >= 0"));
        }
        positive("dist_field_radius", self.dist_field_radius)
    }
}

fn prob(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(param(format!("{name} must lie in [0, 1], got {p}")));
    }
    Ok(())
}

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(param(format!("{name} must be > 0, got {v}")));
    }
    Ok(())
}

fn odd_kernel(k: usize) -> Result<()> {
    if k == 0 || k.is_multiple_of(2) {
        return Err(param(format!("morph_kernel_size must be odd, got {k}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        FractureParams::default().validate().unwrap();
        PittingParams::default().validate().unwrap();
        WarpParams::default().validate().unwrap();
    }

    #[test]
    fn bad_values_rejected() {
        let f = FractureParams { stop_prob: 1.5, ..Default::default() };
        assert!(f.validate().is_err());
        let f = FractureParams { morph_kernel_size: 2, ..Default::default() };
        assert!(f.validate().is_err());
        let p = PittingParams { polygon_size: (10.0, 5.0), ..Default::default() };
        assert!(p.validate().is_err());
        let w = WarpParams { num_ctrl_pts: 2, ..Default::default() };
        assert!(w.validate().is_err());
    }

    #[test]
    fn json_uses_table_names_and_fills_defaults() {
        let f: FractureParams = serde_json::from_str(r#"{"max_steps": 300, "w0": 2.0}"#).unwrap();
        assert_eq!(f.max_steps, 300);
        assert_eq!(f.w0, 2.0);
        assert_eq!(f.alpha, FractureParams::default().alpha);
        assert!(serde_json::from_str::<FractureParams>(r#"{"bogus": 1}"#).is_err());
    }
}
