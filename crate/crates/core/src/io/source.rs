use std::fmt;
use std::io::Read;
use std::ops::Range;
use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;

use crate::error::{Error, IoError, Result};
use crate::exec::Executor;
use crate::io::frames::{enumerate_frames, FrameDirectory};
use crate::io::image_file::{image_dimensions, read_image, ImageKind};
use crate::io::raw::RawFrameReader;
use crate::pipeline::SEQUENCE_METADATA;
use crate::provider::FrameRate;
use crate::raster::RasterImage;

/// Where input frames come from.
pub enum FrameSource {
    /// A single image; a one-frame sequence.
    Still(Arc<RasterImage>),
    /// A frame directory, decoded on demand.
    Directory {
        frames: FrameDirectory,
        size: (u32, u32),
        frame_rate: Option<FrameRate>,
    },
    /// Frames already in memory.
    Memory(Vec<Arc<RasterImage>>),
    /// A headerless RGB24 stream of a known frame count; read front to back.
    Raw {
        reader: RawFrameReader<Box<dyn Read + Send>>,
        frame_count: usize,
        frame_rate: Option<FrameRate>,
    },
}

/// The rate stored in a directory's sequence metadata, as written by
/// [`DirectorySink`](crate::pipeline::DirectorySink).
fn recorded_rate(dir: &Path) -> Option<FrameRate> {
    #[derive(Deserialize)]
    struct Recorded {
        frame_rate: FrameRate,
    }
    let path = dir.join(SEQUENCE_METADATA);
    let bytes = std::fs::read(&path).ok()?;
    match serde_json::from_slice::<Recorded>(&bytes) {
        Ok(r) => FrameRate::new(r.frame_rate.num, r.frame_rate.den),
        Err(e) => {
            log::warn!("ignoring {}: {e}", path.display());
            None
        }
    }
}

impl FrameSource {
    /// Opens an image file or a frame directory.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        if path.is_dir() {
            let frames = enumerate_frames(path)?;
            let size = image_dimensions(&frames.paths[0])?;
            Ok(FrameSource::Directory {
                frame_rate: recorded_rate(path),
                frames,
                size,
            })
        } else if ImageKind::from_path(path).is_some() {
            Ok(FrameSource::Still(Arc::new(read_image(path)?)))
        } else if !path.exists() {
            Err(IoError::File {
                path: path.to_path_buf(),
                source: std::io::Error::new(
                    std::io::ErrorKind::NotFound,
                    "no such file or directory",
                ),
            }
            .into())
        } else {
            Err(IoError::UnknownExtension {
                path: path.to_path_buf(),
            }
            .into())
        }
    }

    /// In-memory frames; all must share one size.
    pub fn memory(frames: Vec<RasterImage>) -> Result<Self> {
        Self::memory_shared(frames.into_iter().map(Arc::new).collect())
    }

    pub fn memory_shared(frames: Vec<Arc<RasterImage>>) -> Result<Self> {
        let first = frames
            .first()
            .ok_or_else(|| Error::Job("an in-memory frame source needs at least one frame".into()))?
            .dimensions();
        if let Some((index, f)) = frames
            .iter()
            .enumerate()
            .find(|(_, f)| f.dimensions() != first)
        {
            return Err(IoError::FrameSize {
                index,
                expected_w: first.0,
                expected_h: first.1,
                found_w: f.width(),
                found_h: f.height(),
            }
            .into());
        }
        Ok(FrameSource::Memory(frames))
    }

    pub fn raw(
        reader: Box<dyn Read + Send>,
        width: u32,
        height: u32,
        frame_count: usize,
        frame_rate: Option<FrameRate>,
    ) -> Self {
        FrameSource::Raw {
            reader: RawFrameReader::new(reader, width, height),
            frame_count,
            frame_rate,
        }
    }

    /// Number of frames.
    pub fn len(&self) -> usize {
        match self {
            FrameSource::Still(_) => 1,
            FrameSource::Directory { frames, .. } => frames.frame_count(),
            FrameSource::Memory(frames) => frames.len(),
            FrameSource::Raw { frame_count, .. } => *frame_count,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(width, height)` of every frame.
    pub fn dimensions(&self) -> (u32, u32) {
        match self {
            FrameSource::Still(img) => img.dimensions(),
            FrameSource::Directory { size, .. } => *size,
            FrameSource::Memory(frames) => frames[0].dimensions(),
            FrameSource::Raw { reader, .. } => reader.dimensions(),
        }
    }

    /// Frame rate carried by the source itself, if any.
    pub fn frame_rate(&self) -> Option<FrameRate> {
        match self {
            FrameSource::Raw { frame_rate, .. } | FrameSource::Directory { frame_rate, .. } => {
                *frame_rate
            }
            _ => None,
        }
    }

    pub fn is_still(&self) -> bool {
        matches!(self, FrameSource::Still(_))
    }

    /// Reads frames `range` in order.
    pub fn read_frames(&mut self, range: Range<usize>) -> Result<Vec<Arc<RasterImage>>> {
        self.fetch(range, &Executor::new(1))
    }

    pub(crate) fn fetch(
        &mut self,
        range: Range<usize>,
        exec: &Executor,
    ) -> Result<Vec<Arc<RasterImage>>> {
        assert!(
            range.end <= self.len(),
            "frame range {range:?} past the end of the source"
        );
        let expected = self.dimensions();
        let check = |index: usize, img: &RasterImage| -> Result<()> {
            if img.dimensions() != expected {
                return Err(IoError::FrameSize {
                    index,
                    expected_w: expected.0,
                    expected_h: expected.1,
                    found_w: img.width(),
                    found_h: img.height(),
                }
                .into());
            }
            Ok(())
        };
        match self {
            FrameSource::Still(img) => Ok(range.map(|_| Arc::clone(img)).collect()),
            FrameSource::Memory(frames) => Ok(frames[range].to_vec()),
            FrameSource::Directory { frames, .. } => {
                let start = range.start;
                exec.try_map(&frames.paths[range], |i, path| {
                    let img = read_image(path)?;
                    check(start + i, &img)?;
                    Ok(Arc::new(img))
                })
            }
            FrameSource::Raw {
                reader,
                frame_count,
                ..
            } => {
                if range.start != reader.frames_read() {
                    return Err(IoError::NonSequential {
                        requested: range.start,
                        next: reader.frames_read(),
                    }
                    .into());
                }
                let mut out = Vec::with_capacity(range.len());
                for _ in range {
                    let frame = reader.read_frame()?.ok_or(IoError::StreamEnded {
                        frames_completed: reader.frames_read(),
                        expected: *frame_count,
                    })?;
                    out.push(Arc::new(frame));
                }
                if reader.frames_read() == *frame_count && !reader.at_end()? {
                    return Err(Error::Job(format!(
                        "raw stream holds more than the {frame_count} frame(s) its manifest describes"
                    )));
                }
                Ok(out)
            }
        }
    }
}

impl fmt::Debug for FrameSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FrameSource::Still(img) => f.debug_tuple("Still").field(img).finish(),
            FrameSource::Directory { frames, size, .. } => f
                .debug_struct("Directory")
                .field("dir", &frames.dir)
                .field("frames", &frames.frame_count())
                .field("size", size)
                .finish(),
            FrameSource::Memory(frames) => f
                .debug_struct("Memory")
                .field("frames", &frames.len())
                .finish(),
            FrameSource::Raw { frame_count, .. } => f
                .debug_struct("Raw")
                .field("frame_count", frame_count)
                .finish_non_exhaustive(),
        }
    }
}
