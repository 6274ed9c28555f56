//! PNG targets, masks and importance maps.
//!
//! Targets are read as straight RGBA. 8-bit samples become `v / 255` and
//! 16-bit samples `v / 65535`. Masks and importance maps go through luma.

use std::path::Path;

use image::{DynamicImage, ImageBuffer, Rgba};

use crate::error::{Error, Result};
use crate::masks::{BinaryMask, ImportanceMap};
use crate::raster::RasterImage;

fn image_err(path: &Path, message: impl ToString) -> Error {
    Error::Image {
        path: path.to_path_buf(),
        message: message.to_string(),
    }
}

fn open(path: &Path) -> Result<DynamicImage> {
    let bytes = std::fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let img = image::load_from_memory_with_format(&bytes, image::ImageFormat::Png)
        .map_err(|e| image_err(path, e))?;
    if img.width() == 0 || img.height() == 0 {
        return Err(image_err(path, "image has a zero dimension"));
    }
    Ok(img)
}

fn is_16_bit(img: &DynamicImage) -> bool {
    img.color().bytes_per_pixel() / img.color().channel_count() > 1
}

pub fn read_png(path: impl AsRef<Path>) -> Result<RasterImage> {
    let path = path.as_ref();
    let img = open(path)?;
    let (w, h) = (img.width(), img.height());
    let data: Vec<f64> = if is_16_bit(&img) {
        img.to_rgba16()
            .into_raw()
            .into_iter()
            .map(|v| v as f64 / 65535.0)
            .collect()
    } else {
        img.to_rgba8()
            .into_raw()
            .into_iter()
            .map(|v| v as f64 / 255.0)
            .collect()
    };
    RasterImage::from_data(w, h, data)
}

/// Any luma of at least half scale (128 of 255, 32896 of 65535) is set.
pub fn read_mask(path: impl AsRef<Path>) -> Result<BinaryMask> {
    let path = path.as_ref();
    let img = open(path)?;
    let (w, h) = (img.width(), img.height());
    let bits: Vec<bool> = if is_16_bit(&img) {
        img.to_luma16()
            .into_raw()
            .into_iter()
            .map(|v| v >= 32896)
            .collect()
    } else {
        img.to_luma8()
            .into_raw()
            .into_iter()
            .map(|v| v >= 128)
            .collect()
    };
    BinaryMask::from_bits(w, h, bits)
}

pub fn read_importance(path: impl AsRef<Path>) -> Result<ImportanceMap> {
    let path = path.as_ref();
    let img = open(path)?;
    let (w, h) = (img.width(), img.height());
    let values: Vec<f64> = if is_16_bit(&img) {
        img.to_luma16()
            .into_raw()
            .into_iter()
            .map(|v| v as f64 / 65535.0)
            .collect()
    } else {
        img.to_luma8()
            .into_raw()
            .into_iter()
            .map(|v| v as f64 / 255.0)
            .collect()
    };
    ImportanceMap::new(w, h, values)
}

/// Writes 8-bit RGBA, un-premultiplying the rendered color.
pub fn write_png(image: &RasterImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut bytes = Vec::with_capacity(image.data().len());
    for px in image.data().chunks_exact(4) {
        let a = px[3];
        for &c in &px[..3] {
            let straight = if a > 0.0 { (c / a).min(1.0) } else { 0.0 };
            bytes.push((straight * 255.0).round() as u8);
        }
        bytes.push((a * 255.0).round() as u8);
    }
    let buf: ImageBuffer<Rgba<u8>, Vec<u8>> =
        ImageBuffer::from_raw(image.width(), image.height(), bytes)
            .ok_or_else(|| image_err(path, "buffer size mismatch"))?;
    buf.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| image_err(path, e))
}
