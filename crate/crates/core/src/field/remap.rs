use super::{same_dims, BinaryMask, ColorImage, DisplacementField, ScalarField};
use crate::error::{param, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interp {
    Bilinear,
    Nearest,
}

/// `out(v, u) = image(map_y(v, u), map_x(v, u))`; samples outside the frame
/// clamp to the nearest border pixel.
pub fn remap_image(image: &ColorImage, field: &DisplacementField, interp: Interp) -> Result<ColorImage> {
    same_dims(image.dims(), field.dims())?;
    let [r, g, b] = image.channels();
    ColorImage::from_channels([
        remap_scalar(r, field, interp)?,
        remap_scalar(g, field, interp)?,
        remap_scalar(b, field, interp)?,
    ])
}

/// Masks only support nearest-neighbour sampling.
pub fn remap_mask(mask: &BinaryMask, field: &DisplacementField, interp: Interp) -> Result<BinaryMask> {
    if interp != Interp::Nearest {
        return Err(param("binary masks must be remapped with nearest interpolation"));
    }
    same_dims(mask.dims(), field.dims())?;
    let (h, w) = mask.dims();
    BinaryMask::from_fn(h, w, |v, u| {
        let (sy, sx) = nearest(field.map_y.get(v, u), field.map_x.get(v, u), h, w);
        mask.get(sy, sx)
    })
}

pub(crate) fn remap_scalar(src: &ScalarField, field: &DisplacementField, interp: Interp) -> Result<ScalarField> {
    same_dims(src.dims(), field.dims())?;
    let (h, w) = src.dims();
    ScalarField::from_fn(h, w, |v, u| {
        let y = field.map_y.get(v, u);
        let x = field.map_x.get(v, u);
        match interp {
            Interp::Nearest => {
                let (sy, sx) = nearest(y, x, h, w);
                src.get(sy, sx)
            }
            Interp::Bilinear => bilinear(src, y, x),
        }
    })
}

#[inline]
fn clamp_coord(c: f64, n: usize) -> f64 {
    if c.is_nan() {
        0.0
    } else {
        c.clamp(0.0, (n - 1) as f64)
    }
}

#[inline]
fn nearest(y: f64, x: f64, h: usize, w: usize) -> (usize, usize) {
    (clamp_coord(y, h).round() as usize, clamp_coord(x, w).round() as usize)
}

fn bilinear(src: &ScalarField, y: f64, x: f64) -> f64 {
    let (h, w) = src.dims();
    let y = clamp_coord(y, h);
    let x = clamp_coord(x, w);
    let y0 = y.floor() as usize;
    let x0 = x.floor() as usize;
    let y1 = (y0 + 1).min(h - 1);
    let x1 = (x0 + 1).min(w - 1);
    let fy = y - y0 as f64;
    let fx = x - x0 as f64;
    if fy == 0.0 && fx == 0.0 {
        return src.get(y0, x0);
    }
    let top = src.get(y0, x0) * (1.0 - fx) + src.get(y0, x1) * fx;
    let bottom = src.get(y1, x0) * (1.0 - fx) + src.get(y1, x1) * fx;
    top * (1.0 - fy) + bottom * fy
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp_image(h: usize, w: usize) -> ColorImage {
        ColorImage::from_fn(h, w, |y, x| {
            let v = (y * w + x) as f64 / (h * w) as f64;
            [v, 1.0 - v, 0.5 * v]
        })
        .unwrap()
    }

    #[test]
    fn identity_field_is_identity() {
        let img = ramp_image(4, 5);
        let id = DisplacementField::identity(4, 5).unwrap();
        assert_eq!(remap_image(&img, &id, Interp::Bilinear).unwrap(), img);
        assert_eq!(remap_image(&img, &id, Interp::Nearest).unwrap(), img);
        let m = BinaryMask::from_fn(4, 5, |y, x| (y * x) % 3 == 1).unwrap();
        assert_eq!(remap_mask(&m, &id, Interp::Nearest).unwrap(), m);
    }

    #[test]
    fn bilinear_mask_rejected() {
        let m = BinaryMask::zeros(3, 3).unwrap();
        let id = DisplacementField::identity(3, 3).unwrap();
        assert!(remap_mask(&m, &id, Interp::Bilinear).is_err());
    }

    #[test]
    fn integer_column_shift_clamps_at_border() {
        // map_x = u - 1: output column u reads input column u - 1, clamped.
        let img = ramp_image(4, 4);
        let mut field = DisplacementField::identity(4, 4).unwrap();
        for v in 0..4 {
            for u in 0..4 {
                field.map_x.set(v, u, u as f64 - 1.0);
            }
        }
        for interp in [Interp::Bilinear, Interp::Nearest] {
            let out = remap_image(&img, &field, interp).unwrap();
            for v in 0..4 {
                for u in 0..4 {
                    let src_u = usize::saturating_sub(u, 1);
                    assert_eq!(out.pixel(v, u), img.pixel(v, src_u));
                }
            }
        }
    }

    #[test]
    fn nearest_preserves_mask_values() {
        let m = BinaryMask::from_fn(6, 6, |y, x| (y + 2 * x) % 4 == 0).unwrap();
        let mut field = DisplacementField::identity(6, 6).unwrap();
        for v in 0..6 {
            for u in 0..6 {
                field.map_x.set(v, u, u as f64 * 0.7 + 0.3);
                field.map_y.set(v, u, v as f64 * 1.3 - 0.4);
            }
        }
        let out = remap_mask(&m, &field, Interp::Nearest).unwrap();
        assert!(out.data().iter().all(|&v| v <= 1));
    }

    #[test]
    fn bilinear_midpoint() {
        let f = ScalarField::from_vec(1, 2, vec![0.0, 1.0]).unwrap();
        let mut field = DisplacementField::identity(1, 2).unwrap();
        field.map_x.set(0, 0, 0.25);
        let out = remap_scalar(&f, &field, Interp::Bilinear).unwrap();
        assert_eq!(out.get(0, 0), 0.25);
    }
}
