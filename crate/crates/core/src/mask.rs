//! Per-instance binary masks.

use std::fmt;

use bitvec::prelude::*;

use crate::error::ShapeError;

/// Per-pixel membership grid for one object instance.
///
/// Bits are stored row-major, one bit per pixel.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: u32,
    height: u32,
    bits: BitVec<u64, Lsb0>,
}

impl BinaryMask {
    /// All-zero mask.
    pub fn empty(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            bits: bitvec![u64, Lsb0; 0; width as usize * height as usize],
        }
    }

    /// All-one mask.
    pub fn full(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            bits: bitvec![u64, Lsb0; 1; width as usize * height as usize],
        }
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> bool) -> Self {
        let mut bits = BitVec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            bits,
        }
    }

    /// Builds a mask from row-major rows of 0/1 values.
    ///
    /// Panics on ragged input.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Self {
        let height = rows.len() as u32;
        let width = rows.first().map_or(0, |r| r.as_ref().len()) as u32;
        assert!(
            rows.iter().all(|r| r.as_ref().len() == width as usize),
            "ragged mask rows"
        );
        Self::from_fn(width, height, |x, y| {
            rows[y as usize].as_ref()[x as usize] != 0
        })
    }

    #[inline]
    pub fn width(&self) -> u32 {
        self.width
    }

    #[inline]
    pub fn height(&self) -> u32 {
        self.height
    }

    /// `(width, height)`
    #[inline]
    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[self.index(x, y)]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, value: bool) {
        let i = self.index(x, y);
        self.bits.set(i, value);
    }

    /// Row-major bit view.
    #[inline]
    pub fn bits(&self) -> &BitSlice<u64, Lsb0> {
        &self.bits
    }

    /// Number of set pixels.
    pub fn count_ones(&self) -> u64 {
        self.bits.count_ones() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.bits.not_any()
    }

    /// Row-major 0/1 rows, mostly for tests and diagnostics.
    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        (0..self.height)
            .map(|y| (0..self.width).map(|x| self.get(x, y) as u8).collect())
            .collect()
    }

    /// In-place OR with another mask of the same size.
    pub fn union_with(&mut self, other: &BinaryMask) -> Result<(), ShapeError> {
        if other.dimensions() != self.dimensions() {
            return Err(ShapeError::MaskMismatch {
                index: 0,
                expected_w: self.width,
                expected_h: self.height,
                found_w: other.width,
                found_h: other.height,
            });
        }
        self.bits |= other.bits.as_bitslice();
        Ok(())
    }

    #[inline]
    fn index(&self, x: u32, y: u32) -> usize {
        debug_assert!(x < self.width && y < self.height);
        y as usize * self.width as usize + x as usize
    }
}

impl fmt::Debug for BinaryMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BinaryMask")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("ones", &self.count_ones())
            .finish()
    }
}

/// Per-pixel OR of `masks`.
///
/// `size` (`(width, height)`) is only consulted when `masks` is empty; the
/// union of nothing is then an all-zero mask of that size.
pub fn mask_union<'a, I>(masks: I, size: Option<(u32, u32)>) -> Result<BinaryMask, ShapeError>
where
    I: IntoIterator<Item = &'a BinaryMask>,
{
    let mut masks = masks.into_iter();
    let mut out = match masks.next() {
        Some(first) => first.clone(),
        None => {
            let (w, h) = size.ok_or(ShapeError::EmptyUnion)?;
            return Ok(BinaryMask::empty(w, h));
        }
    };
    for (i, m) in masks.enumerate() {
        out.union_with(m).map_err(|e| match e {
            ShapeError::MaskMismatch {
                expected_w,
                expected_h,
                found_w,
                found_h,
                ..
            } => ShapeError::MaskMismatch {
                index: i + 1,
                expected_w,
                expected_h,
                found_w,
                found_h,
            },
            other => other,
        })?;
    }
    Ok(out)
}
