//! Still images, frame directories and raw RGB24 streams.

mod frames;
mod image_file;
mod raw;
mod source;

pub use frames::{enumerate_frames, frame_file_name, FrameDirectory};
pub use image_file::{encode_image, image_dimensions, read_image, write_image, ImageKind};
pub use raw::{read_raw_frames, RawFrameReader, RawFrameWriter};
pub use source::FrameSource;
