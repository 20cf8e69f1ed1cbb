//! Dense 2D fields and the kernels that operate on them.
//!
//! All fields are row-major. Coordinates are `(row, col)` throughout, i.e.
//! `(y, x)`.

mod distance;
mod filter;
mod inpaint;
mod morph;
mod noise;
mod remap;
mod tps;
mod wavelet;

pub use distance::{distance_transform, far_sentinel};
pub use filter::{gaussian_blur, laplacian_hf, reflect_index};
pub(crate) use filter::laplacian;
pub use inpaint::{inpaint_diffusion, inpaint_with_band, InpaintReport, DEFAULT_MAX_ITERS, DEFAULT_TOL};
pub use morph::{morph, MorphOp};
pub use noise::{perlin_fractal, Perlin, PERLIN_SINGLE_OCTAVE_BOUND};
pub use remap::{remap_image, remap_mask, Interp};
pub use tps::{tps_eval_field, tps_fit, DisplacementField, TpsModel, DEFAULT_RIDGE, FIT_TOLERANCE};
pub use wavelet::{haar_dwt, haar_idwt, HaarBands};

use crate::error::{dim, Result};

/// Real-valued H×W field.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl ScalarField {
    pub fn new(height: usize, width: usize, value: f64) -> Result<Self> {
        check_dims(height, width)?;
        Ok(Self {
            height,
            width,
            data: vec![value; height * width],
        })
    }

    pub fn zeros(height: usize, width: usize) -> Result<Self> {
        Self::new(height, width, 0.0)
    }

    pub fn from_vec(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        check_dims(height, width)?;
        if data.len() != height * width {
            return Err(dim(format!(
                "buffer of {} values for a {height}x{width} field",
                data.len()
            )));
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        check_dims(height, width)?;
        let mut data = Vec::with_capacity(height * width);
        for y in 0..height {
            for x in 0..width {
                data.push(f(y, x));
            }
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, y: usize, x: usize, v: f64) {
        self.data[y * self.width + x] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    pub fn sum_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    /// Copy of the rectangle `[y0, y0+h) × [x0, x0+w)`.
    pub fn crop(&self, y0: usize, x0: usize, h: usize, w: usize) -> Result<Self> {
        if y0 + h > self.height || x0 + w > self.width {
            return Err(dim("crop rectangle outside field"));
        }
        Self::from_fn(h, w, |y, x| self.get(y0 + y, x0 + x))
    }
}

/// Binary H×W field with values in {0, 1}.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    height: usize,
    width: usize,
    data: Vec<u8>,
}

impl BinaryMask {
    pub fn zeros(height: usize, width: usize) -> Result<Self> {
        check_dims(height, width)?;
        Ok(Self {
            height,
            width,
            data: vec![0; height * width],
        })
    }

    pub fn ones(height: usize, width: usize) -> Result<Self> {
        check_dims(height, width)?;
        Ok(Self {
            height,
            width,
            data: vec![1; height * width],
        })
    }

    /// Any nonzero byte becomes 1.
    pub fn from_vec(height: usize, width: usize, data: Vec<u8>) -> Result<Self> {
        check_dims(height, width)?;
        if data.len() != height * width {
            return Err(dim(format!(
                "buffer of {} values for a {height}x{width} mask",
                data.len()
            )));
        }
        Ok(Self {
            height,
            width,
            data: data.into_iter().map(|v| u8::from(v != 0)).collect(),
        })
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> bool) -> Result<Self> {
        check_dims(height, width)?;
        let mut data = Vec::with_capacity(height * width);
        for y in 0..height {
            for x in 0..width {
                data.push(u8::from(f(y, x)));
            }
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize) -> bool {
        self.data[y * self.width + x] != 0
    }

    #[inline]
    pub fn set(&mut self, y: usize, x: usize, v: bool) {
        self.data[y * self.width + x] = u8::from(v);
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&v| v != 0).count()
    }

    pub fn is_empty(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn invert(&self) -> Self {
        Self {
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|&v| 1 - v).collect(),
        }
    }

    pub fn and(&self, other: &Self) -> Result<Self> {
        same_dims(self.dims(), other.dims())?;
        Ok(Self {
            height: self.height,
            width: self.width,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a & b).collect(),
        })
    }

    pub fn or(&self, other: &Self) -> Result<Self> {
        same_dims(self.dims(), other.dims())?;
        Ok(Self {
            height: self.height,
            width: self.width,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a | b).collect(),
        })
    }

    /// `self \ other`
    pub fn minus(&self, other: &Self) -> Result<Self> {
        same_dims(self.dims(), other.dims())?;
        Ok(Self {
            height: self.height,
            width: self.width,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a & (1 - b)).collect(),
        })
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.dims() == other.dims() && self.data.iter().zip(&other.data).all(|(a, b)| a <= b)
    }

    /// Set pixels in row-major order.
    pub fn coords(&self) -> Vec<(usize, usize)> {
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0)
            .map(|(i, _)| (i / self.width, i % self.width))
            .collect()
    }

    /// Inclusive bounding box `(ymin, ymax, xmin, xmax)` of the set pixels.
    pub fn bounding_box(&self) -> Option<(usize, usize, usize, usize)> {
        let mut bb: Option<(usize, usize, usize, usize)> = None;
        for (y, x) in self.coords() {
            bb = Some(match bb {
                None => (y, y, x, x),
                Some((y0, y1, x0, x1)) => (y0.min(y), y1.max(y), x0.min(x), x1.max(x)),
            });
        }
        bb
    }

    pub fn to_field(&self) -> ScalarField {
        ScalarField {
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|&v| f64::from(v)).collect(),
        }
    }

    pub fn crop(&self, y0: usize, x0: usize, h: usize, w: usize) -> Result<Self> {
        if y0 + h > self.height || x0 + w > self.width {
            return Err(dim("crop rectangle outside mask"));
        }
        Self::from_fn(h, w, |y, x| self.get(y0 + y, x0 + x))
    }
}

/// H×W×3 colour image, channel values in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct ColorImage {
    channels: [ScalarField; 3],
}

impl ColorImage {
    pub fn new(height: usize, width: usize, rgb: [f64; 3]) -> Result<Self> {
        Ok(Self {
            channels: [
                ScalarField::new(height, width, rgb[0])?,
                ScalarField::new(height, width, rgb[1])?,
                ScalarField::new(height, width, rgb[2])?,
            ],
        })
    }

    pub fn from_channels(channels: [ScalarField; 3]) -> Result<Self> {
        let d = channels[0].dims();
        if channels.iter().any(|c| c.dims() != d) {
            return Err(dim("colour channels differ in size"));
        }
        Ok(Self { channels })
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> [f64; 3]) -> Result<Self> {
        let mut r = ScalarField::zeros(height, width)?;
        let mut g = r.clone();
        let mut b = r.clone();
        for y in 0..height {
            for x in 0..width {
                let [vr, vg, vb] = f(y, x);
                r.set(y, x, vr);
                g.set(y, x, vg);
                b.set(y, x, vb);
            }
        }
        Ok(Self { channels: [r, g, b] })
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.channels[0].height()
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.channels[0].width()
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        self.channels[0].dims()
    }

    #[inline]
    pub fn pixel(&self, y: usize, x: usize) -> [f64; 3] {
        [
            self.channels[0].get(y, x),
            self.channels[1].get(y, x),
            self.channels[2].get(y, x),
        ]
    }

    #[inline]
    pub fn set_pixel(&mut self, y: usize, x: usize, rgb: [f64; 3]) {
        for (c, v) in self.channels.iter_mut().zip(rgb) {
            c.set(y, x, v);
        }
    }

    pub fn channel(&self, c: usize) -> &ScalarField {
        &self.channels[c]
    }

    pub fn channels(&self) -> &[ScalarField; 3] {
        &self.channels
    }

    pub fn into_channels(self) -> [ScalarField; 3] {
        self.channels
    }

    pub fn crop(&self, y0: usize, x0: usize, h: usize, w: usize) -> Result<Self> {
        Ok(Self {
            channels: [
                self.channels[0].crop(y0, x0, h, w)?,
                self.channels[1].crop(y0, x0, h, w)?,
                self.channels[2].crop(y0, x0, h, w)?,
            ],
        })
    }

    /// Writes `patch` with its top-left corner at `(y0, x0)`.
    pub fn paste(&mut self, y0: usize, x0: usize, patch: &ColorImage) -> Result<()> {
        let (h, w) = patch.dims();
        if y0 + h > self.height() || x0 + w > self.width() {
            return Err(dim("patch outside image"));
        }
        for y in 0..h {
            for x in 0..w {
                self.set_pixel(y0 + y, x0 + x, patch.pixel(y, x));
            }
        }
        Ok(())
    }
}

fn check_dims(height: usize, width: usize) -> Result<()> {
    if height == 0 || width == 0 {
        return Err(dim(format!("zero-sized field {height}x{width}")));
    }
    Ok(())
}

pub(crate) fn same_dims(a: (usize, usize), b: (usize, usize)) -> Result<()> {
    if a != b {
        return Err(dim(format!("{}x{} vs {}x{}", a.0, a.1, b.0, b.1)));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_sized_fields_are_rejected() {
        assert!(ScalarField::zeros(0, 3).is_err());
        assert!(BinaryMask::zeros(2, 0).is_err());
        assert!(ScalarField::from_vec(2, 2, vec![0.0; 3]).is_err());
    }

    #[test]
    fn mask_set_algebra() {
        let a = BinaryMask::from_vec(1, 4, vec![1, 1, 0, 0]).unwrap();
        let b = BinaryMask::from_vec(1, 4, vec![0, 1, 1, 0]).unwrap();
        assert_eq!(a.and(&b).unwrap().data(), &[0, 1, 0, 0]);
        assert_eq!(a.or(&b).unwrap().data(), &[1, 1, 1, 0]);
        assert_eq!(a.minus(&b).unwrap().data(), &[1, 0, 0, 0]);
        assert!(a.and(&b).unwrap().is_subset_of(&a));
        assert_eq!(a.bounding_box(), Some((0, 0, 0, 1)));
        assert_eq!(BinaryMask::zeros(3, 3).unwrap().bounding_box(), None);
    }
}
