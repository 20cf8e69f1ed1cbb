use super::ScalarField;
use crate::error::{dim, param, Result};

/// Maps a possibly out-of-range index onto `[0, n)` by mirror reflection about
/// the pixel edges (`d c b a | a b c d | d c b a`).
#[inline]
pub fn reflect_index(i: isize, n: usize) -> usize {
    let n = n as isize;
    let period = 2 * n;
    let m = i.rem_euclid(period);
    (if m < n { m } else { period - 1 - m }) as usize
}

/// Separable Gaussian blur, radius `ceil(3 sigma)`, reflect padding,
/// kernel normalised to unit sum.
pub fn gaussian_blur(field: &ScalarField, sigma: f64) -> Result<ScalarField> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(param(format!("gaussian sigma must be > 0, got {sigma}")));
    }
    let kernel = gaussian_kernel(sigma);
    let r = (kernel.len() / 2) as isize;
    let (h, w) = field.dims();

    let horiz = ScalarField::from_fn(h, w, |y, x| {
        let mut acc = 0.0;
        for (k, &g) in kernel.iter().enumerate() {
            let xx = reflect_index(x as isize + k as isize - r, w);
            acc += g * field.get(y, xx);
        }
        acc
    })?;
    let out = ScalarField::from_fn(h, w, |y, x| {
        let mut acc = 0.0;
        for (k, &g) in kernel.iter().enumerate() {
            let yy = reflect_index(y as isize + k as isize - r, h);
            acc += g * horiz.get(yy, x);
        }
        acc
    })?;

    // A normalised kernel can drift by an ulp; keep outputs inside the input range.
    let (lo, hi) = field.min_max();
    Ok(out.map(|v| v.clamp(lo, hi)))
}

pub(crate) fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let r = (3.0 * sigma).ceil() as isize;
    let raw: Vec<f64> = (-r..=r)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

/// Convolution with the 4-neighbour Laplacian `[[0,1,0],[1,-4,1],[0,1,0]]`,
/// reflect padding.
pub fn laplacian_hf(field: &ScalarField) -> Result<ScalarField> {
    let (h, w) = field.dims();
    if h < 3 || w < 3 {
        return Err(dim(format!("laplacian needs at least 3x3, got {h}x{w}")));
    }
    Ok(laplacian(field))
}

/// Same stencil without the size check; edge neighbours reflect onto the
/// pixel itself, which makes this the graph Laplacian of the pixel grid.
pub(crate) fn laplacian(field: &ScalarField) -> ScalarField {
    let (h, w) = field.dims();
    let mut out = vec![0.0; h * w];
    let data = field.data();
    for y in 0..h {
        let up = if y == 0 { 0 } else { y - 1 };
        let down = if y + 1 == h { y } else { y + 1 };
        for x in 0..w {
            let left = if x == 0 { 0 } else { x - 1 };
            let right = if x + 1 == w { x } else { x + 1 };
            let c = data[y * w + x];
            out[y * w + x] = data[up * w + x] + data[down * w + x] + data[y * w + left]
                + data[y * w + right]
                - 4.0 * c;
        }
    }
    ScalarField::from_vec(h, w, out).expect("same dims")
}
