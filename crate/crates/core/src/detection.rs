use std::sync::Arc;

use crate::bbox::BoundingBox;
use crate::mask::BinaryMask;

/// One detected object instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    /// Position of the detection in the provider's list for its frame.
    pub instance_id: usize,
    pub class_id: u32,
    pub class_name: Arc<str>,
    /// Confidence in `[0, 1]`.
    pub score: f64,
    pub bbox: BoundingBox,
    pub mask: BinaryMask,
}

impl Detection {
    pub fn is_person(&self) -> bool {
        &*self.class_name == PERSON
    }
}

/// Category name that marks a detection as a person.
pub const PERSON: &str = "person";
