//! Single-level orthonormal 2D Haar transform.
//!
//! For each 2×2 block `[[a, b], [c, d]]`:
//!
//! ```text
//! LL = (a + b + c + d) / 2     LH = (a + b - c - d) / 2
//! HL = (a - b + c - d) / 2     HH = (a - b - c + d) / 2
//! ```
//!
//! `LH` is low-pass along columns and high-pass along rows; `HL` the reverse.

use super::ScalarField;
use crate::error::{dim, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct HaarBands {
    pub ll: ScalarField,
    pub lh: ScalarField,
    pub hl: ScalarField,
    pub hh: ScalarField,
}

impl HaarBands {
    pub fn energy(&self) -> f64 {
        self.ll.sum_sq() + self.lh.sum_sq() + self.hl.sum_sq() + self.hh.sum_sq()
    }
}

pub fn haar_dwt(field: &ScalarField) -> Result<HaarBands> {
    let (h, w) = field.dims();
    if h % 2 != 0 || w % 2 != 0 {
        return Err(dim(format!("haar transform needs even dimensions, got {h}x{w}")));
    }
    let (hh_, hw) = (h / 2, w / 2);
    let mut ll = vec![0.0; hh_ * hw];
    let mut lh = vec![0.0; hh_ * hw];
    let mut hl = vec![0.0; hh_ * hw];
    let mut hh = vec![0.0; hh_ * hw];
    for i in 0..hh_ {
        for j in 0..hw {
            let a = field.get(2 * i, 2 * j);
            let b = field.get(2 * i, 2 * j + 1);
            let c = field.get(2 * i + 1, 2 * j);
            let d = field.get(2 * i + 1, 2 * j + 1);
            let k = i * hw + j;
            ll[k] = 0.5 * (a + b + c + d);
            lh[k] = 0.5 * (a + b - c - d);
            hl[k] = 0.5 * (a - b + c - d);
            hh[k] = 0.5 * (a - b - c + d);
        }
    }
    Ok(HaarBands {
        ll: ScalarField::from_vec(hh_, hw, ll)?,
        lh: ScalarField::from_vec(hh_, hw, lh)?,
        hl: ScalarField::from_vec(hh_, hw, hl)?,
        hh: ScalarField::from_vec(hh_, hw, hh)?,
    })
}

pub fn haar_idwt(bands: &HaarBands) -> Result<ScalarField> {
    let d = bands.ll.dims();
    if [&bands.lh, &bands.hl, &bands.hh].iter().any(|b| b.dims() != d) {
        return Err(dim("haar subbands differ in size"));
    }
    let (bh, bw) = d;
    let mut out = ScalarField::zeros(2 * bh, 2 * bw)?;
    for i in 0..bh {
        for j in 0..bw {
            let ll = bands.ll.get(i, j);
            let lh = bands.lh.get(i, j);
            let hl = bands.hl.get(i, j);
            let hh = bands.hh.get(i, j);
            out.set(2 * i, 2 * j, 0.5 * (ll + lh + hl + hh));
            out.set(2 * i, 2 * j + 1, 0.5 * (ll + lh - hl - hh));
            out.set(2 * i + 1, 2 * j, 0.5 * (ll - lh + hl - hh));
            out.set(2 * i + 1, 2 * j + 1, 0.5 * (ll - lh - hl + hh));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn odd_dims_rejected() {
        assert!(haar_dwt(&ScalarField::zeros(3, 4).unwrap()).is_err());
        assert!(haar_dwt(&ScalarField::zeros(4, 5).unwrap()).is_err());
    }

    #[test]
    fn mismatched_bands_rejected() {
        let a = ScalarField::zeros(2, 2).unwrap();
        let b = ScalarField::zeros(2, 3).unwrap();
        let bands = HaarBands { ll: a.clone(), lh: a.clone(), hl: b, hh: a };
        assert!(haar_idwt(&bands).is_err());
    }

    #[test]
    fn constant_field() {
        let f = ScalarField::new(4, 6, 0.75).unwrap();
        let b = haar_dwt(&f).unwrap();
        assert!(b.ll.data().iter().all(|&v| v == 1.5));
        for band in [&b.lh, &b.hl, &b.hh] {
            assert!(band.data().iter().all(|&v| v == 0.0));
        }
        assert_eq!(haar_idwt(&b).unwrap(), f);
    }

    #[test]
    fn zero_bands_give_zero_field() {
        let z = ScalarField::zeros(3, 2).unwrap();
        let bands = HaarBands { ll: z.clone(), lh: z.clone(), hl: z.clone(), hh: z };
        let f = haar_idwt(&bands).unwrap();
        assert_eq!(f.dims(), (6, 4));
        assert!(f.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn checkerboard_lands_in_hh() {
        let f = ScalarField::from_fn(6, 8, |y, x| if (y + x) % 2 == 0 { 1.0 } else { -1.0 }).unwrap();
        let b = haar_dwt(&f).unwrap();
        // block [[1,-1],[-1,1]] -> HH = (1+1+1+1)/2 = 2
        assert!(b.hh.data().iter().all(|&v| v == 2.0));
        for band in [&b.ll, &b.lh, &b.hl] {
            assert!(band.data().iter().all(|&v| v == 0.0));
        }
        assert_eq!(b.energy(), f.sum_sq());
    }

    proptest! {
        #[test]
        fn roundtrip_and_parseval(hh in 1usize..9, hw in 1usize..9, vals in proptest::collection::vec(-10.0f64..10.0, 256)) {
            let f = ScalarField::from_fn(2 * hh, 2 * hw, |y, x| vals[y * 16 + x]).unwrap();
            let b = haar_dwt(&f).unwrap();
            let back = haar_idwt(&b).unwrap();
            let err = f.data().iter().zip(back.data()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            prop_assert!(err <= 1e-9);
            let e = f.sum_sq();
            prop_assert!((e - b.energy()).abs() <= 1e-9 * e.max(f64::MIN_POSITIVE));
        }
    }
}
