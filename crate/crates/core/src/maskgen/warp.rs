//! Local plastic warp: inpaint the object's region, bend the object with a
//! thin-plate spline and composite it back.

use rand::seq::index::sample;
use rand::Rng;

use super::WarpParams;
use crate::error::{param, Error, Result};
use crate::field::{
    inpaint_with_band, remap_image, remap_mask, tps_eval_field, tps_fit, BinaryMask, ColorImage, Interp,
    DEFAULT_MAX_ITERS, DEFAULT_RIDGE, DEFAULT_TOL,
};

/// Half-open rectangle `[y0, y0 + height) x [x0, x0 + width)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Roi {
    pub y0: usize,
    pub x0: usize,
    pub height: usize,
    pub width: usize,
}

impl Roi {
    pub fn full(height: usize, width: usize) -> Self {
        Self { y0: 0, x0: 0, height, width }
    }

    /// Bounding box of `mask` grown by `margin` and clamped to the frame.
    pub fn around(mask: &BinaryMask, margin: usize) -> Option<Self> {
        let (h, w) = mask.dims();
        let (ymin, ymax, xmin, xmax) = mask.bounding_box()?;
        let y0 = ymin.saturating_sub(margin);
        let x0 = xmin.saturating_sub(margin);
        let y1 = (ymax + margin).min(h - 1);
        let x1 = (xmax + margin).min(w - 1);
        Some(Self { y0, x0, height: y1 - y0 + 1, width: x1 - x0 + 1 })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WarpOutput {
    pub image: ColorImage,
    pub mask: BinaryMask,
    /// `None` when the inputs were returned unchanged.
    pub roi: Option<Roi>,
}

const PARTIAL_ROI_ATTEMPTS: usize = 32;
const FIT_ATTEMPTS: usize = 8;

/// Warps the object under `mask` within `roi` using explicit control points
/// (ROI-local `(row, col)`) and their `(dy, dx)` displacements.
///
/// Object pixels are resampled from the original ROI; the rest of the ROI is
/// the diffusion-inpainted background. The mask changes only inside `roi`.
pub fn warp_with_controls(
    image: &ColorImage,
    mask: &BinaryMask,
    roi: Roi,
    controls: &[(f64, f64)],
    offsets: &[(f64, f64)],
    params: &WarpParams,
) -> Result<(ColorImage, BinaryMask)> {
    let (h, w) = image.dims();
    if mask.dims() != (h, w) {
        return Err(param("warp mask and image dimensions differ"));
    }
    if roi.height == 0 || roi.width == 0 || roi.y0 + roi.height > h || roi.x0 + roi.width > w {
        return Err(param("warp roi outside the image"));
    }
    let roi_img = image.crop(roi.y0, roi.x0, roi.height, roi.width)?;
    let roi_mask = mask.crop(roi.y0, roi.x0, roi.height, roi.width)?;

    let background = if roi_mask.count() == roi.height * roi.width {
        roi_img.clone()
    } else {
        inpaint_with_band(&roi_img, &roi_mask, DEFAULT_TOL, DEFAULT_MAX_ITERS, params.inpaint_radius)?.0
    };

    let model = tps_fit(controls, offsets, DEFAULT_RIDGE, params.dist_field_radius)?;
    let field = tps_eval_field(&model, roi.height, roi.width)?;
    let warped_img = remap_image(&roi_img, &field, Interp::Bilinear)?;
    let warped_mask = remap_mask(&roi_mask, &field, Interp::Nearest)?;

    let mut new_roi = background;
    for (y, x) in warped_mask.coords() {
        new_roi.set_pixel(y, x, warped_img.pixel(y, x));
    }
    let mut out_img = image.clone();
    out_img.paste(roi.y0, roi.x0, &new_roi)?;
    let mut out_mask = mask.clone();
    for y in 0..roi.height {
        for x in 0..roi.width {
            out_mask.set(roi.y0 + y, roi.x0 + x, warped_mask.get(y, x));
        }
    }
    Ok((out_img, out_mask))
}

/// Random sub-rectangle of the mask's bounding box with sides in
/// [50%, 90%] of the box, required to touch the mask.
fn sample_partial_roi(mask: &BinaryMask, rng: &mut impl Rng) -> Option<Roi> {
    let bbox = Roi::around(mask, 0)?;
    let side = |n: usize| -> (usize, usize) {
        let lo = ((n as f64 * 0.5).ceil() as usize).max(1);
        let hi = ((n as f64 * 0.9).floor() as usize).max(lo);
        (lo, hi)
    };
    let (hlo, hhi) = side(bbox.height);
    let (wlo, whi) = side(bbox.width);
    for _ in 0..PARTIAL_ROI_ATTEMPTS {
        let sh = rng.gen_range(hlo..=hhi).min(bbox.height);
        let sw = rng.gen_range(wlo..=whi).min(bbox.width);
        let y0 = bbox.y0 + rng.gen_range(0..=bbox.height - sh);
        let x0 = bbox.x0 + rng.gen_range(0..=bbox.width - sw);
        let roi = Roi { y0, x0, height: sh, width: sw };
        if !mask.crop(y0, x0, sh, sw).ok()?.is_empty() {
            return Some(roi);
        }
    }
    None
}

/// Random local warp of the object under `mask`. An empty mask, or one with
/// fewer than three pixels in the ROI, returns the inputs unchanged.
pub fn tps_warp_region(
    image: &ColorImage,
    mask: &BinaryMask,
    params: &WarpParams,
    rng: &mut impl Rng,
) -> Result<WarpOutput> {
    params.validate()?;
    let unchanged = || WarpOutput { image: image.clone(), mask: mask.clone(), roi: None };
    let Some(full) = Roi::around(mask, params.margin) else {
        return Ok(unchanged());
    };
    let roi = if params.partial_roi { sample_partial_roi(mask, rng).unwrap_or(full) } else { full };

    let pts: Vec<(usize, usize)> = mask.crop(roi.y0, roi.x0, roi.height, roi.width)?.coords();
    if pts.len() < 3 {
        return Ok(unchanged());
    }
    let m = params.num_ctrl_pts.min(pts.len());
    for _ in 0..FIT_ATTEMPTS {
        let controls: Vec<(f64, f64)> = sample(rng, pts.len(), m)
            .into_iter()
            .map(|i| (pts[i].0 as f64, pts[i].1 as f64))
            .collect();
        let offsets: Vec<(f64, f64)> = (0..m)
            .map(|_| {
                if params.max_offset > 0.0 {
                    let a = params.max_offset;
                    (rng.gen_range(-a..a), rng.gen_range(-a..a))
                } else {
                    (0.0, 0.0)
                }
            })
            .collect();
        match warp_with_controls(image, mask, roi, &controls, &offsets, params) {
            Ok((image, mask)) => return Ok(WarpOutput { image, mask, roi: Some(roi) }),
            Err(Error::Numeric(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(unchanged())
}

/// Warp of the foreground object; the resulting mask is clipped to the
/// foreground so every generated mask stays inside it.
pub fn generate_warp(
    image: &ColorImage,
    foreground: &BinaryMask,
    params: &WarpParams,
    rng: &mut impl Rng,
) -> Result<WarpOutput> {
    let mut out = tps_warp_region(image, foreground, params, rng)?;
    out.mask = out.mask.and(foreground)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn textured(h: usize, w: usize) -> ColorImage {
        ColorImage::from_fn(h, w, |y, x| {
            let v = ((y * 7 + x * 13) % 17) as f64 / 16.0;
            [v, 0.5 * v + 0.25, 1.0 - v]
        })
        .unwrap()
    }

    fn blob(h: usize, w: usize) -> BinaryMask {
        BinaryMask::from_fn(h, w, |y, x| (y as f64 - 30.0).powi(2) / 144.0 + (x as f64 - 34.0).powi(2) / 225.0 <= 1.0)
            .unwrap()
    }

    #[test]
    fn empty_mask_is_passthrough() {
        let img = textured(32, 32);
        let m = BinaryMask::zeros(32, 32).unwrap();
        let out = tps_warp_region(&img, &m, &WarpParams::default(), &mut stream(1)).unwrap();
        assert_eq!(out.image, img);
        assert_eq!(out.mask, m);
        assert_eq!(out.roi, None);
    }

    #[test]
    fn zero_offset_is_identity() {
        let img = textured(64, 72);
        let m = blob(64, 72);
        for partial in [false, true] {
            let params = WarpParams { max_offset: 0.0, partial_roi: partial, ..Default::default() };
            let out = tps_warp_region(&img, &m, &params, &mut stream(4)).unwrap();
            assert_eq!(out.mask, m);
            for y in 0..64 {
                for x in 0..72 {
                    let (a, b) = (out.image.pixel(y, x), img.pixel(y, x));
                    for c in 0..3 {
                        assert!((a[c] - b[c]).abs() <= 1e-6);
                    }
                }
            }
        }
    }

    #[test]
    fn constant_offset_translates_mask() {
        let (h, w) = (64, 72);
        let img = textured(h, w);
        let m = blob(h, w);
        let controls = [(20.0, 25.0), (38.0, 30.0), (30.0, 45.0), (25.0, 40.0)];
        let t = 3.0;
        let params = WarpParams::default();
        let (_, out) = warp_with_controls(&img, &m, Roi::full(h, w), &controls, &[(t, t); 4], &params).unwrap();
        let expect = BinaryMask::from_fn(h, w, |y, x| m.get(y.saturating_sub(3), x.saturating_sub(3))).unwrap();
        assert_eq!(out, expect);
    }

    #[test]
    fn deterministic_and_roi_local() {
        let img = textured(64, 72);
        let m = blob(64, 72);
        let params = WarpParams { partial_roi: true, ..Default::default() };
        let a = tps_warp_region(&img, &m, &params, &mut stream(8)).unwrap();
        let b = tps_warp_region(&img, &m, &params, &mut stream(8)).unwrap();
        assert_eq!(a, b);
        let roi = a.roi.unwrap();
        let inside = |y: usize, x: usize| (roi.y0..roi.y0 + roi.height).contains(&y) && (roi.x0..roi.x0 + roi.width).contains(&x);
        for y in 0..64 {
            for x in 0..72 {
                if !inside(y, x) {
                    assert_eq!(a.image.pixel(y, x), img.pixel(y, x));
                    assert_eq!(a.mask.get(y, x), m.get(y, x));
                }
            }
        }
        let bbox = Roi::around(&m, 0).unwrap();
        assert!(roi.height * 2 >= bbox.height && roi.height * 10 <= bbox.height * 9);
    }

    #[test]
    fn generated_mask_inside_foreground() {
        let img = textured(64, 72);
        let m = blob(64, 72);
        for seed in 0..5 {
            let out = generate_warp(&img, &m, &WarpParams::default(), &mut stream(seed)).unwrap();
            assert!(out.mask.is_subset_of(&m));
        }
    }
}
