//! Headerless RGB24 streams: frames of `width * height * 3` bytes, row-major,
//! concatenated with no header or padding. This is what `ffmpeg -f rawvideo
//! -pix_fmt rgb24` reads and writes.

use std::io::{ErrorKind, Read, Write};

use crate::error::IoError;
use crate::raster::RasterImage;

pub struct RawFrameReader<R> {
    inner: R,
    width: u32,
    height: u32,
    frames_read: usize,
}

impl<R: Read> RawFrameReader<R> {
    pub fn new(inner: R, width: u32, height: u32) -> Self {
        assert!(width > 0 && height > 0, "raw frame size must be non-empty");
        Self {
            inner,
            width,
            height,
            frames_read: 0,
        }
    }

    pub fn frame_bytes(&self) -> usize {
        self.width as usize * self.height as usize * 3
    }

    pub fn frames_read(&self) -> usize {
        self.frames_read
    }

    /// `(width, height)` of each frame.
    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    /// Next frame, or `None` at a clean end of stream.
    pub fn read_frame(&mut self) -> Result<Option<RasterImage>, IoError> {
        let mut buf = vec![0u8; self.frame_bytes()];
        let mut filled = 0;
        while filled < buf.len() {
            match self.inner.read(&mut buf[filled..]) {
                Ok(0) => break,
                Ok(n) => filled += n,
                Err(e) if e.kind() == ErrorKind::Interrupted => {}
                Err(e) => return Err(IoError::Stream(e)),
            }
        }
        if filled == 0 {
            return Ok(None);
        }
        if filled < buf.len() {
            return Err(IoError::Truncated {
                frames_completed: self.frames_read,
                trailing: filled,
                frame_bytes: buf.len(),
            });
        }
        self.frames_read += 1;
        Ok(Some(
            RasterImage::new(self.width, self.height, buf).expect("buffer sized for frame"),
        ))
    }

    /// True when the stream has no bytes left.
    pub fn at_end(&mut self) -> Result<bool, IoError> {
        let mut probe = [0u8; 1];
        loop {
            match self.inner.read(&mut probe) {
                Ok(0) => return Ok(true),
                Ok(_) => return Ok(false),
                Err(e) if e.kind() == ErrorKind::Interrupted => {}
                Err(e) => return Err(IoError::Stream(e)),
            }
        }
    }
}

impl<R: Read> Iterator for RawFrameReader<R> {
    type Item = Result<RasterImage, IoError>;

    fn next(&mut self) -> Option<Self::Item> {
        self.read_frame().transpose()
    }
}

pub struct RawFrameWriter<W> {
    inner: W,
    width: u32,
    height: u32,
    frames_written: usize,
}

impl<W: Write> RawFrameWriter<W> {
    pub fn new(inner: W, width: u32, height: u32) -> Self {
        Self {
            inner,
            width,
            height,
            frames_written: 0,
        }
    }

    pub fn write_frame(&mut self, frame: &RasterImage) -> Result<(), IoError> {
        if frame.dimensions() != (self.width, self.height) {
            return Err(IoError::FrameSize {
                index: self.frames_written,
                expected_w: self.width,
                expected_h: self.height,
                found_w: frame.width(),
                found_h: frame.height(),
            });
        }
        self.inner
            .write_all(frame.pixels())
            .map_err(IoError::Stream)?;
        self.frames_written += 1;
        Ok(())
    }

    pub fn frames_written(&self) -> usize {
        self.frames_written
    }

    pub fn flush(&mut self) -> Result<(), IoError> {
        self.inner.flush().map_err(IoError::Stream)
    }

    pub fn into_inner(self) -> W {
        self.inner
    }
}

/// Reads every frame of a raw stream.
pub fn read_raw_frames<R: Read>(
    reader: R,
    width: u32,
    height: u32,
) -> Result<Vec<RasterImage>, IoError> {
    RawFrameReader::new(reader, width, height).collect()
}
