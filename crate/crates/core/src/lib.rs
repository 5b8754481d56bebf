//! Person extraction and background replacement from instance-segmentation
//! results.
//!
//! A frame goes through three steps: detections come in from a segmentation
//! manifest ([`provider`]), person detections are ranked by box area and a
//! subset chosen ([`selection`]), and the chosen masks drive pixel
//! replacement onto a new background ([`compositor`]). [`pipeline`] runs that
//! over whole frame sequences, in parallel when the `parallel` feature is on.

pub mod bbox;
pub mod compositor;
pub mod detection;
pub mod error;
mod exec;
pub mod io;
pub mod mask;
pub mod pipeline;
pub mod provider;
pub mod raster;
pub mod rle;
pub mod selection;
pub mod synthetic;

pub use bbox::{bbox_area, BoundingBox};
pub use compositor::{
    composite, composite_layers, resize_image, resize_mask, FitMode, ImageFilter, Layer,
    ResizePolicy,
};
pub use detection::Detection;
pub use error::{Error, Result};
pub use mask::{mask_union, BinaryMask};
pub use provider::{
    load_manifest, validate_against_frames, FrameRate, FrameSegmentation, ManifestOptions,
    SequenceManifest,
};
pub use raster::{RasterImage, Rgb};
pub use rle::{rle_decode, rle_encode, RleCounts};
pub use selection::{
    filter_persons, rank_by_area, select, AreaMetric, RankedPerson, Selection, SelectionSpec,
};
