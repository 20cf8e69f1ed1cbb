use crate::error::Result;
use crate::field::{same_dims, ColorImage, ScalarField};

/// Three-channel phase variable: colour `v` in `[0, 1]` maps to `2v - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseImage {
    channels: [ScalarField; 3],
}

impl PhaseImage {
    pub fn from_channels(channels: [ScalarField; 3]) -> Result<Self> {
        same_dims(channels[0].dims(), channels[1].dims())?;
        same_dims(channels[0].dims(), channels[2].dims())?;
        Ok(Self { channels })
    }

    pub fn constant(height: usize, width: usize, value: f64) -> Result<Self> {
        let c = ScalarField::new(height, width, value)?;
        Ok(Self { channels: [c.clone(), c.clone(), c] })
    }

    pub fn from_color(image: &ColorImage) -> Self {
        Self { channels: image.channels().clone().map(|c| c.map(|v| 2.0 * v - 1.0)) }
    }

    /// Inverse colour map, clipped to `[0, 1]`.
    pub fn to_color(&self) -> ColorImage {
        let chans = self.channels.clone().map(|c| c.map(|u| ((u + 1.0) * 0.5).clamp(0.0, 1.0)));
        ColorImage::from_channels(chans).expect("channels share dimensions")
    }

    pub fn dims(&self) -> (usize, usize) {
        self.channels[0].dims()
    }

    pub fn channel(&self, c: usize) -> &ScalarField {
        &self.channels[c]
    }

    pub fn channels(&self) -> &[ScalarField; 3] {
        &self.channels
    }

    pub fn channels_mut(&mut self) -> &mut [ScalarField; 3] {
        &mut self.channels
    }

    pub fn into_channels(self) -> [ScalarField; 3] {
        self.channels
    }

    pub fn is_finite(&self) -> bool {
        self.channels.iter().all(ScalarField::is_finite)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { channels: std::array::from_fn(|c| self.channels[c].map(&f)) }
    }
}

/// Phase value of a colour channel value.
#[inline]
pub fn to_phase(v: f64) -> f64 {
    2.0 * v - 1.0
}
