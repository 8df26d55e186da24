//! PNG / JPEG reading and writing at the 8-bit boundary.

use std::path::Path;

use image::{GrayImage, ImageBuffer, Rgb};

use super::{quantize, ImagePlane, RgbImage};
use crate::error::{Error, Result};

fn image_err(path: &Path, source: image::ImageError) -> Error {
    Error::Image {
        path: path.to_path_buf(),
        source,
    }
}

/// Reads any supported file as 8-bit RGB and maps samples to `v / 255`.
pub fn read_rgb(path: impl AsRef<Path>) -> Result<RgbImage> {
    let path = path.as_ref();
    let decoded = image::open(path).map_err(|e| image_err(path, e))?.to_rgb8();
    let (w, h) = decoded.dimensions();
    RgbImage::from_rgb8(w as usize, h as usize, decoded.as_raw())
}

/// Writes an RGB image; the format follows the file extension.
pub fn write_rgb(path: impl AsRef<Path>, img: &RgbImage) -> Result<()> {
    let path = path.as_ref();
    let (w, h) = img.dimensions();
    let buf: ImageBuffer<Rgb<u8>, _> =
        ImageBuffer::from_raw(w as u32, h as u32, img.to_rgb8()).expect("buffer sized from image");
    buf.save(path).map_err(|e| image_err(path, e))
}

/// Writes a single plane as 8-bit grayscale. Values outside `[0, 1]` are clamped.
pub fn write_gray(path: impl AsRef<Path>, plane: &ImagePlane) -> Result<()> {
    let path = path.as_ref();
    let (w, h) = plane.dimensions();
    let data = plane.data().iter().map(|&v| quantize(v)).collect();
    let buf = GrayImage::from_raw(w as u32, h as u32, data).expect("buffer sized from plane");
    buf.save(path).map_err(|e| image_err(path, e))
}

/// True for file extensions this crate can decode.
pub fn is_supported_image(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| matches!(e.to_ascii_lowercase().as_str(), "png" | "jpg" | "jpeg"))
        .unwrap_or(false)
}
