use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use image::{DynamicImage, ImageFormat, ImageReader};

use crate::error::IoError;
use crate::raster::RasterImage;

/// Still-image formats the crate reads and writes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ImageKind {
    Png,
    /// Binary PPM (`P6`, maxval 255).
    Ppm,
}

impl ImageKind {
    pub fn from_path(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "png" => Some(ImageKind::Png),
            "ppm" => Some(ImageKind::Ppm),
            _ => None,
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            ImageKind::Png => "png",
            ImageKind::Ppm => "ppm",
        }
    }
}

fn file_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::File {
        path: path.to_path_buf(),
        source,
    }
}

/// Reads an 8-bit RGB or RGBA PNG, or a binary PPM. Alpha is dropped.
pub fn read_image(path: impl AsRef<Path>) -> Result<RasterImage, IoError> {
    let path = path.as_ref();
    let mut magic = [0u8; 2];
    File::open(path)
        .and_then(|mut f| f.read_exact(&mut magic))
        .map_err(file_err(path))?;
    let reader = ImageReader::new(BufReader::new(File::open(path).map_err(file_err(path))?))
        .with_guessed_format()
        .map_err(file_err(path))?;
    let unsupported = |found: String| IoError::Unsupported {
        path: path.to_path_buf(),
        found,
    };
    match reader.format() {
        Some(ImageFormat::Png) => {}
        Some(ImageFormat::Pnm) if &magic == b"P6" => {}
        Some(ImageFormat::Pnm) => {
            return Err(unsupported(format!(
                "PNM subtype {}, only binary P6 is supported",
                String::from_utf8_lossy(&magic)
            )))
        }
        Some(other) => return Err(unsupported(format!("{other:?}"))),
        None => return Err(unsupported("unrecognized file signature".into())),
    }
    let decoded = reader.decode().map_err(|e| IoError::Decode {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let rgb = match decoded {
        DynamicImage::ImageRgb8(img) => img,
        DynamicImage::ImageRgba8(img) => {
            log::warn!("{}: discarding alpha channel", path.display());
            DynamicImage::ImageRgba8(img).into_rgb8()
        }
        other => return Err(unsupported(format!("{:?} pixels", other.color()))),
    };
    let (w, h) = rgb.dimensions();
    RasterImage::new(w, h, rgb.into_raw()).map_err(|e| IoError::Decode {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Encodes `img` in the format implied by the extension of `path`.
pub fn encode_image(img: &RasterImage, kind: ImageKind) -> Result<Vec<u8>, String> {
    let mut out = Vec::new();
    match kind {
        ImageKind::Png => {
            use image::codecs::png::{CompressionType, FilterType, PngEncoder};
            use image::ImageEncoder;
            PngEncoder::new_with_quality(&mut out, CompressionType::Fast, FilterType::Adaptive)
                .write_image(
                    img.pixels(),
                    img.width(),
                    img.height(),
                    image::ExtendedColorType::Rgb8,
                )
                .map_err(|e| e.to_string())?;
        }
        ImageKind::Ppm => {
            write!(out, "P6\n{} {}\n255\n", img.width(), img.height()).expect("writing to a Vec");
            out.extend_from_slice(img.pixels());
        }
    }
    Ok(out)
}

/// Writes PNG or binary PPM depending on the extension of `path`.
pub fn write_image(img: &RasterImage, path: impl AsRef<Path>) -> Result<(), IoError> {
    let path = path.as_ref();
    let kind = ImageKind::from_path(path).ok_or_else(|| IoError::UnknownExtension {
        path: path.to_path_buf(),
    })?;
    let bytes = encode_image(img, kind).map_err(|message| IoError::Encode {
        path: path.to_path_buf(),
        message,
    })?;
    let mut file = BufWriter::new(File::create(path).map_err(file_err(path))?);
    file.write_all(&bytes)
        .and_then(|_| file.flush())
        .map_err(file_err(path))
}

/// `(width, height)` from the file header without decoding pixels.
pub fn image_dimensions(path: impl AsRef<Path>) -> Result<(u32, u32), IoError> {
    let path = path.as_ref();
    image::image_dimensions(path).map_err(|e| IoError::Decode {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}
