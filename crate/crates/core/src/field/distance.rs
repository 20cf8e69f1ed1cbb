//! Exact Euclidean distance transform.
//!
//! Two separable passes of the lower-envelope-of-parabolas algorithm
//! (Felzenszwalb & Huttenlocher). Squared distances are sums of squared
//! integers, so the result is bit-exact against a brute-force scan.

use super::{BinaryMask, ScalarField};
use crate::error::Result;

/// Value reported for every pixel when the mask has no zero pixel.
pub fn far_sentinel(height: usize, width: usize) -> f64 {
    ((height + width) as f64).max(1.0e6)
}

/// Euclidean distance from every pixel to the nearest pixel with `mask == 0`.
pub fn distance_transform(mask: &BinaryMask) -> Result<ScalarField> {
    let (h, w) = mask.dims();
    if mask.data().iter().all(|&v| v != 0) {
        return ScalarField::new(h, w, far_sentinel(h, w));
    }

    // Column pass: squared distance to the nearest zero in the same column.
    let mut sq = vec![f64::INFINITY; h * w];
    let mut col = vec![f64::INFINITY; h];
    let mut out = vec![0.0; h];
    for x in 0..w {
        for (y, c) in col.iter_mut().enumerate() {
            *c = if mask.get(y, x) { f64::INFINITY } else { 0.0 };
        }
        envelope_1d(&col, &mut out);
        for y in 0..h {
            sq[y * w + x] = out[y];
        }
    }

    // Row pass over the column results.
    let mut row = vec![0.0; w];
    let mut out = vec![0.0; w];
    for y in 0..h {
        row.copy_from_slice(&sq[y * w..(y + 1) * w]);
        envelope_1d(&row, &mut out);
        sq[y * w..(y + 1) * w].copy_from_slice(&out);
    }

    ScalarField::from_vec(h, w, sq.into_iter().map(f64::sqrt).collect())
}

/// `out[q] = min_p (q - p)^2 + f[p]` over finite `f[p]`; infinite when none.
fn envelope_1d(f: &[f64], out: &mut [f64]) {
    let n = f.len();
    let sites: Vec<usize> = (0..n).filter(|&p| f[p].is_finite()).collect();
    if sites.is_empty() {
        out.iter_mut().for_each(|v| *v = f64::INFINITY);
        return;
    }

    let intersect = |p: usize, q: usize| -> f64 {
        let (pf, qf) = (p as f64, q as f64);
        ((f[q] + qf * qf) - (f[p] + pf * pf)) / (2.0 * (qf - pf))
    };

    // Parabola vertices and the left boundaries of their envelope segments.
    let mut v = vec![0usize; sites.len()];
    let mut z = vec![0.0f64; sites.len() + 1];
    let mut k = 0;
    v[0] = sites[0];
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for &q in &sites[1..] {
        let mut s = intersect(v[k], q);
        while s <= z[k] {
            k -= 1;
            s = intersect(v[k], q);
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }

    let mut k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        let qf = q as f64;
        while z[k + 1] < qf {
            k += 1;
        }
        let d = q as f64 - v[k] as f64;
        *o = d * d + f[v[k]];
    }
}
