//! Resampling of frames and masks onto a common canvas.
//!
//! Images use either bilinear or nearest-neighbor sampling; masks always use
//! nearest-neighbor so they stay binary. Both are pixel-center aligned, so an
//! identical-size resize is the identity.

use crate::mask::BinaryMask;
use crate::raster::{RasterImage, Rgb};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum FitMode {
    /// Map the full source extent onto the full target extent.
    #[default]
    Stretch,
    /// Keep the aspect ratio, center, and pad the rest with a color.
    Letterbox(Rgb),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ImageFilter {
    #[default]
    Bilinear,
    NearestNeighbor,
}

/// How sources are brought to the canvas size. Masks ignore `filter`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ResizePolicy {
    pub fit: FitMode,
    pub filter: ImageFilter,
}

/// Where a resized source lands on the target canvas.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Placement {
    pub x: u32,
    pub y: u32,
    pub width: u32,
    pub height: u32,
}

impl Placement {
    pub fn compute(src: (u32, u32), target: (u32, u32), fit: FitMode) -> Self {
        let (sw, sh) = (u64::from(src.0), u64::from(src.1));
        let (tw, th) = (u64::from(target.0), u64::from(target.1));
        match fit {
            FitMode::Stretch => Placement {
                x: 0,
                y: 0,
                width: target.0,
                height: target.1,
            },
            FitMode::Letterbox(_) => {
                let (w, h) = if sw * th <= tw * sh {
                    // limited by height
                    (((sw * th + sh / 2) / sh).clamp(1, tw), th)
                } else {
                    (tw, ((sh * tw + sw / 2) / sw).clamp(1, th))
                };
                Placement {
                    x: ((tw - w) / 2) as u32,
                    y: ((th - h) / 2) as u32,
                    width: w as u32,
                    height: h as u32,
                }
            }
        }
    }
}

pub fn resize_image(
    img: &RasterImage,
    width: u32,
    height: u32,
    policy: ResizePolicy,
) -> RasterImage {
    assert!(width > 0 && height > 0, "resize target must be non-empty");
    if img.dimensions() == (width, height) {
        return img.clone();
    }
    let placement = Placement::compute(img.dimensions(), (width, height), policy.fit);
    let scaled = match policy.filter {
        ImageFilter::Bilinear => scale_bilinear(img, placement.width, placement.height),
        ImageFilter::NearestNeighbor => scale_nearest(img, placement.width, placement.height),
    };
    match policy.fit {
        FitMode::Stretch => scaled,
        FitMode::Letterbox(pad) => {
            let mut canvas = RasterImage::filled(width, height, pad);
            let stride = width as usize * 3;
            let row_bytes = placement.width as usize * 3;
            let x0 = placement.x as usize * 3;
            for y in 0..placement.height {
                let start = (placement.y + y) as usize * stride + x0;
                canvas.pixels_mut()[start..start + row_bytes].copy_from_slice(scaled.row(y));
            }
            canvas
        }
    }
}

/// Nearest-neighbor stretch of `mask` to `width x height`.
pub fn resize_mask(mask: &BinaryMask, width: u32, height: u32) -> BinaryMask {
    resize_mask_fit(mask, width, height, FitMode::Stretch)
}

/// Nearest-neighbor resize following the same placement as [`resize_image`];
/// letterbox padding is unset.
pub fn resize_mask_fit(mask: &BinaryMask, width: u32, height: u32, fit: FitMode) -> BinaryMask {
    assert!(width > 0 && height > 0, "resize target must be non-empty");
    if mask.dimensions() == (width, height) {
        return mask.clone();
    }
    let p = Placement::compute(mask.dimensions(), (width, height), fit);
    let xs = nearest_map(mask.width(), p.width);
    let ys = nearest_map(mask.height(), p.height);
    BinaryMask::from_fn(width, height, |x, y| {
        if x < p.x || y < p.y || x >= p.x + p.width || y >= p.y + p.height {
            return false;
        }
        mask.get(xs[(x - p.x) as usize], ys[(y - p.y) as usize])
    })
}

/// Source index for every target index, sampling at pixel centers.
fn nearest_map(src_len: u32, dst_len: u32) -> Vec<u32> {
    let (s, d) = (u64::from(src_len), u64::from(dst_len));
    (0..d)
        .map(|i| (((2 * i + 1) * s) / (2 * d)).min(s - 1) as u32)
        .collect()
}

fn scale_nearest(img: &RasterImage, width: u32, height: u32) -> RasterImage {
    let xs = nearest_map(img.width(), width);
    let ys = nearest_map(img.height(), height);
    let mut out = Vec::with_capacity(width as usize * height as usize * 3);
    for &sy in &ys {
        let row = img.row(sy);
        for &sx in &xs {
            let i = sx as usize * 3;
            out.extend_from_slice(&row[i..i + 3]);
        }
    }
    RasterImage::new(width, height, out).expect("dimensions are consistent")
}

const FRAC_BITS: u32 = 14;
const ONE: u64 = 1 << FRAC_BITS;

/// Lower tap, upper tap and fixed-point weight of the upper tap.
fn bilinear_taps(src_len: u32, dst_len: u32) -> Vec<(usize, usize, u64)> {
    let scale = f64::from(src_len) / f64::from(dst_len);
    let last = src_len as usize - 1;
    (0..dst_len)
        .map(|i| {
            let pos = ((f64::from(i) + 0.5) * scale - 0.5).clamp(0.0, last as f64);
            let lo = pos.floor() as usize;
            let hi = (lo + 1).min(last);
            let w = ((pos - lo as f64) * ONE as f64).round() as u64;
            (lo, hi, w.min(ONE))
        })
        .collect()
}

fn scale_bilinear(img: &RasterImage, width: u32, height: u32) -> RasterImage {
    let xs = bilinear_taps(img.width(), width);
    let ys = bilinear_taps(img.height(), height);
    let mut out = Vec::with_capacity(width as usize * height as usize * 3);
    let round = 1u64 << (2 * FRAC_BITS - 1);
    for &(y0, y1, wy) in &ys {
        let top = img.row(y0 as u32);
        let bottom = img.row(y1 as u32);
        for &(x0, x1, wx) in &xs {
            for c in 0..3 {
                let lerp = |row: &[u8]| {
                    u64::from(row[x0 * 3 + c]) * (ONE - wx) + u64::from(row[x1 * 3 + c]) * wx
                };
                let v = lerp(top) * (ONE - wy) + lerp(bottom) * wy;
                out.push(((v + round) >> (2 * FRAC_BITS)) as u8);
            }
        }
    }
    RasterImage::new(width, height, out).expect("dimensions are consistent")
}
