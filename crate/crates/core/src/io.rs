//! Reading and writing image files.

use std::fs;
use std::io::Cursor;
use std::path::{Path, PathBuf};

use image::ImageFormat;

use crate::blocks::RasterImage;
use crate::error::{Error, Result};

const EXTENSIONS: [&str; 3] = ["png", "jpg", "jpeg"];

pub fn decode_image(bytes: &[u8], origin: &str) -> Result<RasterImage> {
    let img = image::load_from_memory(bytes).map_err(|e| Error::codec(origin, e))?;
    let rgb = img.into_rgb8();
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    RasterImage::new(w, h, rgb.into_raw())
}

/// Loads a PNG or JPEG file as 8-bit RGB. Alpha and grayscale inputs are converted.
pub fn load_image(path: &Path) -> Result<RasterImage> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_image(&bytes, &path.display().to_string())
}

pub fn encode_png(image: &RasterImage) -> Result<Vec<u8>> {
    let mut out = Cursor::new(Vec::new());
    image::write_buffer_with_format(
        &mut out,
        image.pixels(),
        image.width() as u32,
        image.height() as u32,
        image::ExtendedColorType::Rgb8,
        ImageFormat::Png,
    )
    .map_err(|e| Error::codec("<png encoder>", e))?;
    Ok(out.into_inner())
}

/// Writes a lossless PNG, creating parent directories as needed.
pub fn save_png(path: &Path, image: &RasterImage) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let bytes = encode_png(image)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn is_image_path(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
}

/// All image files below `dir`, as paths relative to `dir`, sorted.
pub fn list_images(dir: &Path) -> Result<Vec<PathBuf>> {
    fn walk(root: &Path, rel: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
        let here = root.join(rel);
        for entry in fs::read_dir(&here).map_err(|e| Error::io(&here, e))? {
            let entry = entry.map_err(|e| Error::io(&here, e))?;
            let name = rel.join(entry.file_name());
            let ty = entry.file_type().map_err(|e| Error::io(entry.path(), e))?;
            if ty.is_dir() {
                walk(root, &name, out)?;
            } else if is_image_path(&name) {
                out.push(name);
            }
        }
        Ok(())
    }
    let mut out = Vec::new();
    walk(dir, Path::new(""), &mut out)?;
    out.sort();
    Ok(out)
}

/// A decoded image and its path relative to the corpus root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusImage {
    pub name: String,
    pub image: RasterImage,
}

/// Loads every image below `dir` in sorted order. With `crop = Some(b)` each
/// image is center-cropped to multiples of `b`.
pub fn load_corpus(dir: &Path, crop: Option<usize>) -> Result<Vec<CorpusImage>> {
    list_images(dir)?
        .into_iter()
        .map(|rel| {
            let mut image = load_image(&dir.join(&rel))?;
            if let Some(b) = crop {
                image = image.center_crop(b)?;
            }
            Ok(CorpusImage {
                name: rel.to_string_lossy().replace('\\', "/"),
                image,
            })
        })
        .collect()
}
