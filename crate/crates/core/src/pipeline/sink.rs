//! Destinations for finished frames.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, FrameError, IoError, Result};
use crate::io::{frame_file_name, ImageKind, RawFrameWriter};
use crate::pipeline::{FrameResult, SequenceSummary};
use crate::provider::FrameRate;

/// Name of the sentinel file left in an output directory by a failed run.
pub const INCOMPLETE_MARKER: &str = "INCOMPLETE";

/// Name of the metadata file written next to completed output frames.
pub const SEQUENCE_METADATA: &str = "sequence.json";

/// Receives frames in ascending `frame_index` order.
///
/// Encoding runs on the worker threads: a sink that wants encoded bytes
/// names the format in [`FrameSink::encoding`] and gets them alongside each
/// frame in [`FrameSink::write`].
pub trait FrameSink {
    fn encoding(&self) -> Option<ImageKind> {
        None
    }

    fn write(&mut self, frame: FrameResult, encoded: Option<Vec<u8>>) -> Result<()>;

    fn finish(&mut self, _summary: &SequenceSummary) -> Result<()> {
        Ok(())
    }

    /// Called once when the run fails after the sink was handed to it.
    fn abort(&mut self, _error: &FrameError) {}
}

/// Keeps every frame in memory.
#[derive(Debug, Default)]
pub struct MemorySink {
    pub frames: Vec<FrameResult>,
    pub summary: Option<SequenceSummary>,
}

impl MemorySink {
    pub fn new() -> Self {
        Self::default()
    }
}

impl FrameSink for MemorySink {
    fn write(&mut self, frame: FrameResult, _encoded: Option<Vec<u8>>) -> Result<()> {
        self.frames.push(frame);
        Ok(())
    }

    fn finish(&mut self, summary: &SequenceSummary) -> Result<()> {
        self.summary = Some(summary.clone());
        Ok(())
    }
}

#[derive(Debug, Serialize)]
struct SequenceMetadata {
    frame_count: usize,
    width: u32,
    height: u32,
    frame_rate: FrameRate,
}

/// Writes `frame_%06d.<ext>` files into a directory.
#[derive(Debug)]
pub struct DirectorySink {
    dir: PathBuf,
    kind: ImageKind,
}

impl DirectorySink {
    /// Creates the directory if needed and clears a stale failure marker.
    pub fn create(dir: impl Into<PathBuf>, kind: ImageKind) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(|source| IoError::File {
            path: dir.clone(),
            source,
        })?;
        let marker = dir.join(INCOMPLETE_MARKER);
        if marker.exists() {
            std::fs::remove_file(&marker).map_err(|source| IoError::File {
                path: marker,
                source,
            })?;
        }
        Ok(Self { dir, kind })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }
}

fn write_file(path: PathBuf, bytes: &[u8]) -> Result<()> {
    std::fs::write(&path, bytes).map_err(|source| IoError::File { path, source }.into())
}

impl FrameSink for DirectorySink {
    fn encoding(&self) -> Option<ImageKind> {
        Some(self.kind)
    }

    fn write(&mut self, frame: FrameResult, encoded: Option<Vec<u8>>) -> Result<()> {
        let bytes = encoded.expect("pipeline encodes frames for sinks that ask");
        write_file(
            self.dir.join(frame_file_name(frame.frame_index, self.kind)),
            &bytes,
        )
    }

    fn finish(&mut self, summary: &SequenceSummary) -> Result<()> {
        let meta = SequenceMetadata {
            frame_count: summary.frames_written,
            width: summary.width,
            height: summary.height,
            frame_rate: summary.frame_rate,
        };
        let json = serde_json::to_string_pretty(&meta).expect("metadata serializes");
        write_file(self.dir.join(SEQUENCE_METADATA), json.as_bytes())
    }

    fn abort(&mut self, error: &FrameError) {
        let marker = self.dir.join(INCOMPLETE_MARKER);
        if let Err(e) = std::fs::write(&marker, format!("{error}\n")) {
            log::error!("cannot write {}: {e}", marker.display());
        }
    }
}

/// Writes a one-frame result as a single image file.
#[derive(Debug)]
pub struct ImageFileSink {
    path: PathBuf,
    kind: ImageKind,
    written: bool,
}

impl ImageFileSink {
    pub fn new(path: impl Into<PathBuf>) -> Result<Self> {
        let path = path.into();
        let kind = ImageKind::from_path(&path)
            .ok_or_else(|| IoError::UnknownExtension { path: path.clone() })?;
        Ok(Self {
            path,
            kind,
            written: false,
        })
    }
}

impl FrameSink for ImageFileSink {
    fn encoding(&self) -> Option<ImageKind> {
        Some(self.kind)
    }

    fn write(&mut self, _frame: FrameResult, encoded: Option<Vec<u8>>) -> Result<()> {
        if self.written {
            return Err(Error::Job(format!(
                "{} is a single image but the job produces more than one frame",
                self.path.display()
            )));
        }
        self.written = true;
        write_file(
            self.path.clone(),
            &encoded.expect("pipeline encodes frames for sinks that ask"),
        )
    }
}

/// Streams frames as headerless RGB24.
pub struct RawStreamSink<W: Write> {
    writer: RawFrameWriter<W>,
}

impl<W: Write> RawStreamSink<W> {
    pub fn new(inner: W, width: u32, height: u32) -> Self {
        Self {
            writer: RawFrameWriter::new(inner, width, height),
        }
    }

    pub fn into_inner(self) -> W {
        self.writer.into_inner()
    }
}

impl<W: Write> FrameSink for RawStreamSink<W> {
    fn write(&mut self, frame: FrameResult, _encoded: Option<Vec<u8>>) -> Result<()> {
        self.writer.write_frame(&frame.image)?;
        Ok(())
    }

    fn finish(&mut self, _summary: &SequenceSummary) -> Result<()> {
        self.writer.flush()?;
        Ok(())
    }
}
