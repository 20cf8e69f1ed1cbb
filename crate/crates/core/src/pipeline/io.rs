//! 8-bit PNG boundary: images are RGB8, masks are L8 with values 0/255.

use std::fs;
use std::path::Path;

use image::{GrayImage, ImageFormat, RgbImage};

use crate::error::{Error, Result};
use crate::field::{BinaryMask, ColorImage};

#[inline]
pub fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

fn image_err(path: &Path, source: image::ImageError) -> Error {
    Error::Image { path: path.to_path_buf(), source }
}

pub(crate) fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io { path: path.to_path_buf(), source }
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        }
    }
    Ok(())
}

pub fn read_color(path: &Path) -> Result<ColorImage> {
    let img = image::open(path).map_err(|e| image_err(path, e))?.to_rgb8();
    let (w, h) = img.dimensions();
    ColorImage::from_fn(h as usize, w as usize, |y, x| {
        let p = img.get_pixel(x as u32, y as u32).0;
        [p[0] as f64 / 255.0, p[1] as f64 / 255.0, p[2] as f64 / 255.0]
    })
}

pub fn write_color(path: &Path, image: &ColorImage) -> Result<()> {
    ensure_parent(path)?;
    let (h, w) = image.dims();
    let buf = RgbImage::from_fn(w as u32, h as u32, |x, y| {
        let p = image.pixel(y as usize, x as usize);
        image::Rgb([quantize(p[0]), quantize(p[1]), quantize(p[2])])
    });
    buf.save_with_format(path, ImageFormat::Png).map_err(|e| image_err(path, e))
}

/// Any 8-bit mask image; luminance `>= 128` counts as set.
pub fn read_mask(path: &Path) -> Result<BinaryMask> {
    let img = image::open(path).map_err(|e| image_err(path, e))?.to_luma8();
    let (w, h) = img.dimensions();
    BinaryMask::from_fn(h as usize, w as usize, |y, x| img.get_pixel(x as u32, y as u32).0[0] >= 128)
}

pub fn write_mask(path: &Path, mask: &BinaryMask) -> Result<()> {
    ensure_parent(path)?;
    let (h, w) = mask.dims();
    let buf = GrayImage::from_fn(w as u32, h as u32, |x, y| image::Luma([if mask.get(y as usize, x as usize) { 255 } else { 0 }]));
    buf.save_with_format(path, ImageFormat::Png).map_err(|e| image_err(path, e))
}

/// Writes `bytes` to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    ensure_parent(path)?;
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(|e| io_err(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

/// Colour image after an 8-bit round trip, i.e. what reading back a written
/// PNG would give.
pub fn quantized(image: &ColorImage) -> ColorImage {
    let (h, w) = image.dims();
    ColorImage::from_fn(h, w, |y, x| image.pixel(y, x).map(|v| quantize(v) as f64 / 255.0)).expect("same dims")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn png_roundtrips() {
        let dir = tempfile::tempdir().unwrap();
        let img = ColorImage::from_fn(5, 7, |y, x| [y as f64 / 4.0, x as f64 / 6.0, 0.5]).unwrap();
        let p = dir.path().join("a/b/img.png");
        write_color(&p, &img).unwrap();
        assert_eq!(read_color(&p).unwrap(), quantized(&img));

        let m = BinaryMask::from_fn(5, 7, |y, x| (x + y) % 2 == 0).unwrap();
        let mp = dir.path().join("m.png");
        write_mask(&mp, &m).unwrap();
        assert_eq!(read_mask(&mp).unwrap(), m);
        let raw = image::open(&mp).unwrap().to_luma8();
        assert!(raw.pixels().all(|p| p.0[0] == 0 || p.0[0] == 255));
    }

    #[test]
    fn missing_file_is_an_error() {
        assert!(matches!(read_color(Path::new("/nonexistent/x.png")), Err(Error::Image { .. })));
    }
}
