use std::path::PathBuf;

use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RleError {
    #[error("malformed RLE: counts sum to {actual}, expected {expected} ({height}x{width} mask)")]
    SumMismatch {
        expected: u64,
        actual: u64,
        height: u32,
        width: u32,
    },
    #[error("malformed RLE: mask size {height}x{width} has a zero dimension")]
    EmptySize { height: u32, width: u32 },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ShapeError {
    #[error("pixel buffer holds {actual} bytes, {width}x{height} RGB needs {expected}")]
    BufferLength {
        width: u32,
        height: u32,
        expected: usize,
        actual: usize,
    },
    #[error("image dimensions must be at least 1x1, got {width}x{height}")]
    ZeroDimension { width: u32, height: u32 },
    #[error("mask {index} is {found_w}x{found_h}, expected {expected_w}x{expected_h}")]
    MaskMismatch {
        index: usize,
        expected_w: u32,
        expected_h: u32,
        found_w: u32,
        found_h: u32,
    },
    #[error("mask union of an empty list needs a target size")]
    EmptyUnion,
    #[error(
        "composite shapes differ: background {}x{}, source {}x{}, mask {}x{}",
        background.0, background.1, foreground.0, foreground.1, mask.0, mask.1
    )]
    Composite {
        background: (u32, u32),
        foreground: (u32, u32),
        mask: (u32, u32),
    },
    #[error(
        "layer {index} does not match the {}x{} background: source {}x{}, mask {}x{}",
        background.0, background.1, foreground.0, foreground.1, mask.0, mask.1
    )]
    Layer {
        index: usize,
        background: (u32, u32),
        foreground: (u32, u32),
        mask: (u32, u32),
    },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SelectionError {
    #[error(
        "instance id {id} is not a person detection in this frame (persons present: {present:?})"
    )]
    UnknownId { id: usize, present: Vec<usize> },
}

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("cannot read manifest {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest is not valid JSON: {0}")]
    Parse(#[source] serde_json::Error),
    #[error("manifest schema error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("manifest validation failed{}: {message}", location(*frame_index, *instance_id))]
    Validation {
        frame_index: Option<usize>,
        instance_id: Option<usize>,
        message: String,
    },
}

fn location(frame_index: Option<usize>, instance_id: Option<usize>) -> String {
    match (frame_index, instance_id) {
        (Some(f), Some(i)) => format!(" (frame {f}, instance {i})"),
        (Some(f), None) => format!(" (frame {f})"),
        (None, Some(i)) => format!(" (instance {i})"),
        (None, None) => String::new(),
    }
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: unsupported image format ({found})")]
    Unsupported { path: PathBuf, found: String },
    #[error("{path}: cannot decode image: {message}")]
    Decode { path: PathBuf, message: String },
    #[error("{path}: cannot encode image: {message}")]
    Encode { path: PathBuf, message: String },
    #[error("{path}: unknown image extension, supported extensions are: png, ppm")]
    UnknownExtension { path: PathBuf },
    #[error("{dir}: no frames found")]
    NoFrames { dir: PathBuf },
    #[error("{dir}: frame index {missing} is missing")]
    FrameGap { dir: PathBuf, missing: usize },
    #[error("{dir}: frame {index} appears twice ({first} and {second})")]
    DuplicateFrame {
        dir: PathBuf,
        index: usize,
        first: String,
        second: String,
    },
    #[error("{dir}: mixed frame extensions ({first} and {second})")]
    MixedExtensions {
        dir: PathBuf,
        first: String,
        second: String,
    },
    #[error("raw stream truncated: {frames_completed} complete frame(s) then {trailing} stray byte(s), frame size is {frame_bytes}")]
    Truncated {
        frames_completed: usize,
        trailing: usize,
        frame_bytes: usize,
    },
    #[error("raw stream ended after {frames_completed} frame(s), expected {expected}")]
    StreamEnded {
        frames_completed: usize,
        expected: usize,
    },
    #[error("raw stream: {0}")]
    Stream(#[source] std::io::Error),
    #[error("frame {index} is {found_w}x{found_h}, expected {expected_w}x{expected_h}")]
    FrameSize {
        index: usize,
        expected_w: u32,
        expected_h: u32,
        found_w: u32,
        found_h: u32,
    },
    #[error(
        "raw streams are read front to back: requested frame {requested}, next available is {next}"
    )]
    NonSequential { requested: usize, next: usize },
}

/// Error raised while running a whole sequence.
#[derive(Debug, Error)]
#[error("frame {frame_index}{}: {source} ({frames_completed} frame(s) written before the failure)", source_label(*source_index))]
pub struct FrameError {
    pub frame_index: usize,
    pub source_index: Option<usize>,
    pub frames_completed: usize,
    #[source]
    pub source: Box<Error>,
}

fn source_label(source_index: Option<usize>) -> String {
    source_index
        .map(|s| format!(", source {s}"))
        .unwrap_or_default()
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Rle(#[from] RleError),
    #[error(transparent)]
    Shape(#[from] ShapeError),
    #[error(transparent)]
    Selection(#[from] SelectionError),
    #[error(transparent)]
    Manifest(#[from] ManifestError),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Validation(#[from] crate::provider::ValidationReport),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error("invalid job: {0}")]
    Job(String),
}
