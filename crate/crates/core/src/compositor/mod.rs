//! Mask-driven pixel replacement.
//!
//! Wherever a layer's mask is set, the output takes that layer's source
//! pixel; everywhere else the background shows through untouched.

mod resize;

pub use resize::{
    resize_image, resize_mask, resize_mask_fit, FitMode, ImageFilter, Placement, ResizePolicy,
};

use crate::error::ShapeError;
use crate::mask::BinaryMask;
use crate::raster::RasterImage;

/// One source frame and the mask of pixels it contributes.
#[derive(Debug, Clone, Copy)]
pub struct Layer<'a> {
    pub source: &'a RasterImage,
    pub mask: &'a BinaryMask,
}

impl<'a> Layer<'a> {
    pub fn new(source: &'a RasterImage, mask: &'a BinaryMask) -> Self {
        Self { source, mask }
    }
}

/// `out[p] = source[p]` where `mask[p]` is set, else `background[p]`.
pub fn composite(
    background: &RasterImage,
    source: &RasterImage,
    mask: &BinaryMask,
) -> Result<RasterImage, ShapeError> {
    let dims = background.dimensions();
    if source.dimensions() != dims || mask.dimensions() != dims {
        return Err(ShapeError::Composite {
            background: dims,
            foreground: source.dimensions(),
            mask: mask.dimensions(),
        });
    }
    let mut out = background.clone();
    paint(&mut out, source, mask);
    Ok(out)
}

/// Applies `layers` over `background` in order; later layers win where masks
/// overlap.
pub fn composite_layers(
    background: &RasterImage,
    layers: &[Layer<'_>],
) -> Result<RasterImage, ShapeError> {
    check_layers(background, layers)?;
    let mut out = background.clone();
    for layer in layers {
        paint(&mut out, layer.source, layer.mask);
    }
    Ok(out)
}

/// Like [`composite_layers`] but with soft mask edges: each mask is box
/// blurred with the given radius and the result used as a blend weight.
/// A radius of 0 is exact hard replacement.
pub fn composite_layers_feathered(
    background: &RasterImage,
    layers: &[Layer<'_>],
    radius: u32,
) -> Result<RasterImage, ShapeError> {
    if radius == 0 {
        return composite_layers(background, layers);
    }
    check_layers(background, layers)?;
    let mut out = background.clone();
    for layer in layers {
        blend(&mut out, layer.source, layer.mask, radius);
    }
    Ok(out)
}

fn check_layers(background: &RasterImage, layers: &[Layer<'_>]) -> Result<(), ShapeError> {
    let dims = background.dimensions();
    for (index, layer) in layers.iter().enumerate() {
        if layer.source.dimensions() != dims || layer.mask.dimensions() != dims {
            return Err(ShapeError::Layer {
                index,
                background: dims,
                foreground: layer.source.dimensions(),
                mask: layer.mask.dimensions(),
            });
        }
    }
    Ok(())
}

fn paint(out: &mut RasterImage, source: &RasterImage, mask: &BinaryMask) {
    let src = source.pixels();
    let dst = out.pixels_mut();
    for i in mask.bits().iter_ones() {
        let o = i * 3;
        dst[o..o + 3].copy_from_slice(&src[o..o + 3]);
    }
}

fn blend(out: &mut RasterImage, source: &RasterImage, mask: &BinaryMask, radius: u32) {
    let (w, h) = (mask.width() as usize, mask.height() as usize);
    let r = radius as usize;
    // summed-area table with a zero border row/column
    let mut sat = vec![0u32; (w + 1) * (h + 1)];
    for y in 0..h {
        let mut row_sum = 0u32;
        for x in 0..w {
            row_sum += mask.get(x as u32, y as u32) as u32;
            sat[(y + 1) * (w + 1) + x + 1] = sat[y * (w + 1) + x + 1] + row_sum;
        }
    }
    let src = source.pixels();
    let dst = out.pixels_mut();
    for y in 0..h {
        let (y0, y1) = (y.saturating_sub(r), (y + r + 1).min(h));
        for x in 0..w {
            let (x0, x1) = (x.saturating_sub(r), (x + r + 1).min(w));
            let covered = u64::from(
                sat[y1 * (w + 1) + x1] + sat[y0 * (w + 1) + x0]
                    - sat[y0 * (w + 1) + x1]
                    - sat[y1 * (w + 1) + x0],
            );
            if covered == 0 {
                continue;
            }
            let window = ((y1 - y0) * (x1 - x0)) as u64;
            let o = (y * w + x) * 3;
            for c in 0..3 {
                let bg = u64::from(dst[o + c]);
                let fg = u64::from(src[o + c]);
                dst[o + c] = ((bg * (window - covered) + fg * covered + window / 2) / window) as u8;
            }
        }
    }
}
