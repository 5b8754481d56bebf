//! Detection bounding boxes.

/// Axis-aligned box stored as `(y1, x1, y2, x2)` pixel coordinates, the
/// order instance-segmentation models emit them in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BoundingBox {
    pub y1: u32,
    pub x1: u32,
    pub y2: u32,
    pub x2: u32,
}

impl BoundingBox {
    /// Returns `None` unless `y2 >= y1` and `x2 >= x1`.
    pub fn new(y1: u32, x1: u32, y2: u32, x2: u32) -> Option<Self> {
        (y2 >= y1 && x2 >= x1).then_some(Self { y1, x1, y2, x2 })
    }

    pub fn height(&self) -> u32 {
        self.y2 - self.y1
    }

    pub fn width(&self) -> u32 {
        self.x2 - self.x1
    }

    /// Area in square pixels: `(y2 - y1) * (x2 - x1)` on the stored coordinates.
    pub fn area(&self) -> u64 {
        bbox_area(self)
    }

    /// True when the box fits inside a `width x height` frame.
    pub fn fits_within(&self, width: u32, height: u32) -> bool {
        self.x2 <= width && self.y2 <= height
    }

    /// `[y1, x1, y2, x2]`
    pub fn to_array(self) -> [u32; 4] {
        [self.y1, self.x1, self.y2, self.x2]
    }
}

/// Rectangle area (height times length) used to rank persons.
pub fn bbox_area(bbox: &BoundingBox) -> u64 {
    u64::from(bbox.y2 - bbox.y1) * u64::from(bbox.x2 - bbox.x1)
}
