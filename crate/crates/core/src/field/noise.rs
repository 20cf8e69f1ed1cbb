//! Classic 2D gradient (Perlin) noise with fractal octave summation.
//!
//! Lattice hashing uses a 256-entry permutation shuffled by a ChaCha8 stream
//! seeded with the caller's seed, duplicated to 512 entries. The corner hash
//! is `perm[perm[xi] + yi]`; its low three bits select a gradient from
//! [`GRADIENTS`]. Fade is `6t^5 - 15t^4 + 10t^3`, lacunarity 2, persistence 0.5.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{param, Result};

/// Gradient table as `(gx, gy)` pairs.
pub const GRADIENTS: [(f64, f64); 8] = [
    (1.0, 1.0),
    (-1.0, 1.0),
    (1.0, -1.0),
    (-1.0, -1.0),
    (1.0, 0.0),
    (-1.0, 0.0),
    (0.0, 1.0),
    (0.0, -1.0),
];

/// `|perlin2| <= 2`: every corner term is `gx*dx + gy*dy` with
/// `|g*|, |d*| <= 1`, and the bilinear blend is a convex combination.
pub const PERLIN_SINGLE_OCTAVE_BOUND: f64 = 2.0;

#[derive(Clone)]
pub struct Perlin {
    perm: [u8; 512],
}

impl std::fmt::Debug for Perlin {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Perlin").field("perm", &&self.perm[..8]).finish_non_exhaustive()
    }
}

impl Perlin {
    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut base: [u8; 256] = std::array::from_fn(|i| i as u8);
        for i in (1..256).rev() {
            let j = rng.gen_range(0..=i);
            base.swap(i, j);
        }
        let mut perm = [0u8; 512];
        perm[..256].copy_from_slice(&base);
        perm[256..].copy_from_slice(&base);
        Self { perm }
    }

    /// The first 256 entries of the lattice permutation.
    pub fn permutation(&self) -> &[u8] {
        &self.perm[..256]
    }

    /// Single-octave noise at `(y, x)`. Zero at every integer lattice point.
    pub fn noise(&self, y: f64, x: f64) -> f64 {
        let (x0, y0) = (x.floor(), y.floor());
        let xi = (x0 as i64).rem_euclid(256) as usize;
        let yi = (y0 as i64).rem_euclid(256) as usize;
        let (xf, yf) = (x - x0, y - y0);
        let (u, v) = (fade(xf), fade(yf));

        let p = &self.perm;
        let hash = |i: usize, j: usize| p[p[i] as usize + j] as usize;
        let aa = hash(xi, yi);
        let ba = hash(xi + 1, yi);
        let ab = hash(xi, yi + 1);
        let bb = hash(xi + 1, yi + 1);

        let bottom = lerp(u, grad(aa, xf, yf), grad(ba, xf - 1.0, yf));
        let top = lerp(u, grad(ab, xf, yf - 1.0), grad(bb, xf - 1.0, yf - 1.0));
        lerp(v, bottom, top)
    }

    /// `scale * sum_{o < octaves} 0.5^o * noise(y * 2^o, x * 2^o)`.
    pub fn fractal(&self, y: f64, x: f64, octaves: u32, scale: f64) -> f64 {
        let mut sum = 0.0;
        let mut amp = 1.0;
        let mut freq = 1.0;
        for _ in 0..octaves {
            sum += amp * self.noise(y * freq, x * freq);
            amp *= 0.5;
            freq *= 2.0;
        }
        scale * sum
    }
}

/// One-shot fractal evaluation; builds the permutation table on every call.
pub fn perlin_fractal(y: f64, x: f64, octaves: u32, scale: f64, seed: u64) -> Result<f64> {
    if octaves == 0 {
        return Err(param("perlin octaves must be >= 1"));
    }
    Ok(Perlin::new(seed).fractal(y, x, octaves, scale))
}

#[inline]
fn fade(t: f64) -> f64 {
    t * t * t * (t * (t * 6.0 - 15.0) + 10.0)
}

#[inline]
fn lerp(t: f64, a: f64, b: f64) -> f64 {
    a + t * (b - a)
}

#[inline]
fn grad(hash: usize, dx: f64, dy: f64) -> f64 {
    let (gx, gy) = GRADIENTS[hash & 7];
    gx * dx + gy * dy
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vanishes_on_lattice_points() {
        for seed in [0, 1, 42, 9001] {
            let v = perlin_fractal(1.0, 2.0, 1, 3.5, seed).unwrap();
            assert_eq!(v, 0.0);
            assert_eq!(Perlin::new(seed).noise(-7.0, 300.0), 0.0);
        }
    }

    #[test]
    fn zero_octaves_rejected() {
        assert!(perlin_fractal(0.3, 0.3, 0, 1.0, 1).is_err());
    }

    #[test]
    fn deterministic_per_seed() {
        let a = perlin_fractal(0.37, 0.91, 3, 0.2, 7).unwrap();
        let b = perlin_fractal(0.37, 0.91, 3, 0.2, 7).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        let c = perlin_fractal(0.37, 0.91, 3, 0.2, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn cell_center_matches_straight_line_evaluation() {
        // At (0.5, 0.5) in cell (0, 0) the fade weights are all 1/2, so the
        // value is the mean of the four corner dot products.
        let perlin = Perlin::new(42);
        let p = perlin.permutation();
        let at = |i: usize| p[i % 256] as usize;
        let table = [
            (1.0, 1.0),
            (-1.0, 1.0),
            (1.0, -1.0),
            (-1.0, -1.0),
            (1.0, 0.0),
            (-1.0, 0.0),
            (0.0, 1.0),
            (0.0, -1.0),
        ];
        let dot = |h: usize, dx: f64, dy: f64| {
            let (gx, gy): (f64, f64) = table[h % 8];
            gx * dx + gy * dy
        };
        let h00 = at(at(0));
        let h10 = at(at(1));
        let h01 = at(at(0) + 1);
        let h11 = at(at(1) + 1);
        let expected = 0.25
            * (dot(h00, 0.5, 0.5) + dot(h10, -0.5, 0.5) + dot(h01, 0.5, -0.5) + dot(h11, -0.5, -0.5));
        let got = perlin_fractal(0.5, 0.5, 1, 1.0, 42).unwrap();
        assert!((got - expected).abs() < 1e-15, "{got} vs {expected}");
    }

    #[test]
    fn fractal_bounded() {
        let perlin = Perlin::new(3);
        for octaves in 1..=4u32 {
            let bound: f64 = (0..octaves).map(|o| 0.5f64.powi(o as i32)).sum::<f64>()
                * PERLIN_SINGLE_OCTAVE_BOUND
                * 0.3;
            for i in 0..400 {
                let y = i as f64 * 0.173;
                let x = i as f64 * 0.311 - 20.0;
                assert!(perlin.fractal(y, x, octaves, 0.3).abs() <= bound);
            }
        }
    }
}
