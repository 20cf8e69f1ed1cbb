use super::BinaryMask;
use crate::error::{param, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MorphOp {
    Dilate,
    Erode,
    /// Dilate then erode.
    Close,
    /// Erode then dilate.
    Open,
}

/// Binary morphology with a square `kernel_size × kernel_size` element.
/// Pixels outside the frame count as background.
pub fn morph(mask: &BinaryMask, op: MorphOp, kernel_size: usize) -> Result<BinaryMask> {
    if kernel_size == 0 || kernel_size.is_multiple_of(2) {
        return Err(param(format!("kernel_size must be odd and >= 1, got {kernel_size}")));
    }
    let r = kernel_size / 2;
    Ok(match op {
        MorphOp::Dilate => dilate(mask, r),
        MorphOp::Erode => erode(mask, r),
        MorphOp::Close => erode(&dilate(mask, r), r),
        MorphOp::Open => dilate(&erode(mask, r), r),
    })
}

// Both passes are separable for a square element: a row sweep then a column sweep.

fn dilate(mask: &BinaryMask, r: usize) -> BinaryMask {
    if r == 0 {
        return mask.clone();
    }
    let (h, w) = mask.dims();
    let rows = BinaryMask::from_fn(h, w, |y, x| {
        let lo = x.saturating_sub(r);
        let hi = (x + r).min(w - 1);
        (lo..=hi).any(|xx| mask.get(y, xx))
    })
    .expect("dims already validated");
    BinaryMask::from_fn(h, w, |y, x| {
        let lo = y.saturating_sub(r);
        let hi = (y + r).min(h - 1);
        (lo..=hi).any(|yy| rows.get(yy, x))
    })
    .expect("dims already validated")
}

fn erode(mask: &BinaryMask, r: usize) -> BinaryMask {
    if r == 0 {
        return mask.clone();
    }
    let (h, w) = mask.dims();
    let rows = BinaryMask::from_fn(h, w, |y, x| {
        x >= r && x + r < w && (x - r..=x + r).all(|xx| mask.get(y, xx))
    })
    .expect("dims already validated");
    BinaryMask::from_fn(h, w, |y, x| {
        y >= r && y + r < h && (y - r..=y + r).all(|yy| rows.get(yy, x))
    })
    .expect("dims already validated")
}
