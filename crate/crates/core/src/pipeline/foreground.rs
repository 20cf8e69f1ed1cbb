//! Foreground extraction: an explicit mask file, or a global Otsu threshold
//! on luminance reduced to its largest 4-connected component.

use std::collections::VecDeque;
use std::path::Path;

use super::io::{read_color, read_mask};
use crate::error::{dim, Result};
use crate::field::{BinaryMask, ColorImage};

pub fn load_foreground(image_path: &Path, mask_path: Option<&Path>) -> Result<BinaryMask> {
    let image = read_color(image_path)?;
    match mask_path {
        Some(p) => {
            let m = read_mask(p)?;
            if m.dims() != image.dims() {
                let (a, b) = (m.dims(), image.dims());
                return Err(dim(format!("foreground mask {}x{} vs image {}x{}", a.0, a.1, b.0, b.1)));
            }
            Ok(m)
        }
        None => otsu_foreground(&image),
    }
}

/// 8-bit Rec. 601 luminance.
pub fn luminance8(image: &ColorImage) -> Vec<u8> {
    let (h, w) = image.dims();
    let mut out = Vec::with_capacity(h * w);
    for y in 0..h {
        for x in 0..w {
            let [r, g, b] = image.pixel(y, x);
            out.push(((0.299 * r + 0.587 * g + 0.114 * b).clamp(0.0, 1.0) * 255.0).round() as u8);
        }
    }
    out
}

/// Otsu threshold `t`: pixels with value `> t` are foreground. Returns
/// `None` when the histogram has a single level.
pub fn otsu_threshold(values: &[u8]) -> Option<u8> {
    let mut hist = [0u64; 256];
    for &v in values {
        hist[v as usize] += 1;
    }
    let total = values.len() as f64;
    let sum_all: f64 = hist.iter().enumerate().map(|(i, &c)| i as f64 * c as f64).sum();
    let (mut w0, mut sum0) = (0.0, 0.0);
    let mut best: Option<(f64, u8)> = None;
    for (t, &count) in hist.iter().enumerate().take(255) {
        w0 += count as f64;
        sum0 += t as f64 * count as f64;
        let w1 = total - w0;
        if w0 == 0.0 || w1 == 0.0 {
            continue;
        }
        let m0 = sum0 / w0;
        let m1 = (sum_all - sum0) / w1;
        let between = w0 * w1 * (m0 - m1).powi(2);
        if best.is_none_or(|(b, _)| between > b) {
            best = Some((between, t as u8));
        }
    }
    best.map(|(_, t)| t)
}

/// Largest 4-connected component; ties go to the component found first in
/// row-major order.
pub fn largest_component(mask: &BinaryMask) -> BinaryMask {
    let (h, w) = mask.dims();
    let mut label = vec![0u32; h * w];
    let mut best = (0usize, 0u32);
    let mut next = 0u32;
    let mut queue = VecDeque::new();
    for start in 0..h * w {
        if mask.data()[start] == 0 || label[start] != 0 {
            continue;
        }
        next += 1;
        label[start] = next;
        queue.push_back(start);
        let mut size = 0;
        while let Some(i) = queue.pop_front() {
            size += 1;
            let (y, x) = (i / w, i % w);
            let mut visit = |j: usize| {
                if mask.data()[j] != 0 && label[j] == 0 {
                    label[j] = next;
                    queue.push_back(j);
                }
            };
            if y > 0 {
                visit(i - w);
            }
            if y + 1 < h {
                visit(i + w);
            }
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < w {
                visit(i + 1);
            }
        }
        if size > best.0 {
            best = (size, next);
        }
    }
    BinaryMask::from_vec(h, w, label.iter().map(|&l| u8::from(l != 0 && l == best.1)).collect()).expect("same dims")
}

/// Fallback foreground when no mask is supplied. A flat image yields an
/// empty foreground.
pub fn otsu_foreground(image: &ColorImage) -> Result<BinaryMask> {
    let (h, w) = image.dims();
    let lum = luminance8(image);
    let Some(t) = otsu_threshold(&lum) else {
        return BinaryMask::zeros(h, w);
    };
    let bright = BinaryMask::from_vec(h, w, lum.iter().map(|&v| u8::from(v > t)).collect())?;
    Ok(largest_component(&bright))
}
