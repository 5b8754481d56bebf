//! Sequence orchestration.
//!
//! Every output frame is computed independently: persons are filtered,
//! ranked and selected from each source's segmentation, source and masks are
//! resized onto the background canvas, and the selected pixels are painted
//! over the background in source order. Frames are processed in batches of
//! `workers + buffer_depth`; within a batch they run in parallel, and the
//! batch is handed to the sink in index order, so the output does not depend
//! on the worker count.

mod sink;

pub use sink::{
    DirectorySink, FrameSink, ImageFileSink, MemorySink, RawStreamSink, INCOMPLETE_MARKER,
    SEQUENCE_METADATA,
};

use std::borrow::Cow;
use std::collections::BTreeSet;
use std::num::NonZeroUsize;
use std::sync::Arc;

use crate::compositor::{
    composite_layers_feathered, resize_image, resize_mask_fit, Layer, ResizePolicy,
};
use crate::error::{Error, FrameError, Result, ShapeError};
use crate::exec::Executor;
use crate::io::{encode_image, FrameSource, ImageKind};
use crate::mask::{mask_union, BinaryMask};
use crate::provider::{validate_against_frames, FrameRate, FrameSegmentation, SequenceManifest};
use crate::raster::RasterImage;
use crate::selection::{select_persons, AreaMetric, SelectionSpec};

/// What a source shows once it has run out of frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ExhaustionPolicy {
    /// Contributes nothing.
    #[default]
    Drop,
    /// Repeats its last frame and that frame's segmentation.
    Freeze,
}

/// Per-frame settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FrameOptions {
    pub resize: ResizePolicy,
    pub metric: AreaMetric,
    /// Box-blur radius for soft mask edges; 0 is hard replacement.
    pub feather: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JobOptions {
    pub frame: FrameOptions,
    pub exhaustion: ExhaustionPolicy,
    pub workers: NonZeroUsize,
    /// Extra frames in flight beyond one per worker.
    pub buffer_depth: usize,
}

impl Default for JobOptions {
    fn default() -> Self {
        let workers = std::thread::available_parallelism().unwrap_or(NonZeroUsize::MIN);
        Self {
            frame: FrameOptions::default(),
            exhaustion: ExhaustionPolicy::Drop,
            workers,
            buffer_depth: workers.get(),
        }
    }
}

/// One input sequence together with its segmentation and selection.
#[derive(Debug)]
pub struct SourceInput {
    pub frames: FrameSource,
    pub manifest: Arc<SequenceManifest>,
    pub selection: SelectionSpec,
}

#[derive(Debug)]
pub enum Background {
    Still(Arc<RasterImage>),
    Sequence(FrameSource),
}

/// Sources (bottom to top), a background, and how to combine them.
#[derive(Debug)]
pub struct CompositeJob {
    pub sources: Vec<SourceInput>,
    pub background: Background,
    pub options: JobOptions,
}

/// One source's contribution to a single output frame.
#[derive(Debug, Clone, Copy)]
pub struct SourceFrame<'a> {
    pub image: &'a RasterImage,
    pub segmentation: &'a FrameSegmentation,
    pub selection: &'a SelectionSpec,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameResult {
    pub frame_index: usize,
    pub image: RasterImage,
    /// Selected instance ids, one set per source; empty for absent sources.
    pub selected_ids: Vec<BTreeSet<usize>>,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceSummary {
    pub frames_written: usize,
    pub frame_rate: FrameRate,
    pub width: u32,
    pub height: u32,
    pub warnings: Vec<String>,
}

fn frame_error(frame_index: usize, source_index: Option<usize>, err: impl Into<Error>) -> Error {
    Error::Frame(FrameError {
        frame_index,
        source_index,
        frames_completed: 0,
        source: Box::new(err.into()),
    })
}

/// Runs selection and compositing for one output frame.
///
/// `per_source` holds `None` for sources that contribute nothing to this frame.
pub fn process_frame(
    frame_index: usize,
    background: &RasterImage,
    per_source: &[Option<SourceFrame<'_>>],
    options: &FrameOptions,
) -> Result<FrameResult> {
    let (cw, ch) = background.dimensions();
    let mut selected_ids = Vec::with_capacity(per_source.len());
    let mut diagnostics = Vec::new();
    let mut layers: Vec<(Cow<'_, RasterImage>, BinaryMask)> = Vec::new();

    for (s, input) in per_source.iter().enumerate() {
        let Some(input) = input else {
            selected_ids.push(BTreeSet::new());
            continue;
        };
        let fail = |e: Error| frame_error(frame_index, Some(s), e);
        let selection = select_persons(input.segmentation, input.selection, options.metric)
            .map_err(|e| fail(e.into()))?;
        diagnostics.extend(
            selection
                .warnings
                .iter()
                .map(|w| format!("source {s}: {w}")),
        );

        if !selection.ids.is_empty() {
            let masks: Vec<&BinaryMask> = selection
                .ids
                .iter()
                .map(|&id| {
                    &input
                        .segmentation
                        .detection(id)
                        .expect("selected ids are present")
                        .mask
                })
                .collect();
            let union = mask_union(masks.iter().copied(), None).map_err(|e| fail(e.into()))?;
            if union.dimensions() != input.image.dimensions() {
                let (w, h) = input.image.dimensions();
                return Err(fail(
                    ShapeError::MaskMismatch {
                        index: 0,
                        expected_w: w,
                        expected_h: h,
                        found_w: union.width(),
                        found_h: union.height(),
                    }
                    .into(),
                ));
            }
            let source = if input.image.dimensions() == (cw, ch) {
                Cow::Borrowed(input.image)
            } else {
                Cow::Owned(resize_image(input.image, cw, ch, options.resize))
            };
            layers.push((source, resize_mask_fit(&union, cw, ch, options.resize.fit)));
        }
        selected_ids.push(selection.ids);
    }

    let layers: Vec<Layer<'_>> = layers
        .iter()
        .map(|(src, mask)| Layer::new(src, mask))
        .collect();
    let image = composite_layers_feathered(background, &layers, options.feather)
        .map_err(|e| frame_error(frame_index, None, e))?;
    Ok(FrameResult {
        frame_index,
        image,
        selected_ids,
        diagnostics,
    })
}

/// Output frame count: the longest source, or the background sequence if
/// that is longer. A still background imposes no length.
pub fn output_length(source_lengths: &[usize], background_length: Option<usize>) -> Result<usize> {
    let longest = source_lengths.iter().copied().max().unwrap_or(0);
    if longest == 0 {
        return Err(Error::Job("every source is empty".into()));
    }
    Ok(longest.max(background_length.unwrap_or(0)))
}

impl CompositeJob {
    pub fn new(sources: Vec<SourceInput>, background: Background, options: JobOptions) -> Self {
        Self {
            sources,
            background,
            options,
        }
    }

    /// Checks every manifest against its frames.
    pub fn validate(&self) -> Result<()> {
        if self.sources.is_empty() {
            return Err(Error::Job("a job needs at least one source".into()));
        }
        for (s, src) in self.sources.iter().enumerate() {
            let (w, h) = src.frames.dimensions();
            validate_against_frames(&src.manifest, src.frames.len(), w, h)
                .map_err(|report| Error::Job(format!("source {s}: {report}")))?;
        }
        if let Background::Sequence(frames) = &self.background {
            if frames.is_empty() {
                return Err(Error::Job("background sequence has no frames".into()));
            }
        }
        Ok(())
    }

    pub fn output_length(&self) -> Result<usize> {
        let lengths: Vec<usize> = self.sources.iter().map(|s| s.frames.len()).collect();
        let bg = match &self.background {
            Background::Still(_) => None,
            Background::Sequence(frames) => Some(frames.len()),
        };
        output_length(&lengths, bg)
    }

    /// Declared rate of the output, plus warnings about disagreeing inputs.
    pub fn output_frame_rate(&self) -> (FrameRate, Vec<String>) {
        let first = self.sources[0].manifest.frame_rate;
        let rate = match &self.background {
            Background::Sequence(frames) => frames.frame_rate().unwrap_or(first),
            Background::Still(_) => first,
        };
        let mut warnings = Vec::new();
        for (s, src) in self.sources.iter().enumerate() {
            let r = src.manifest.frame_rate;
            if !r.same_rate(&rate) {
                warnings.push(format!(
                    "source {s} runs at {r} fps but the output runs at {rate} fps; frames are paired by index"
                ));
            }
        }
        (rate, warnings)
    }

    pub fn canvas_dimensions(&self) -> (u32, u32) {
        match &self.background {
            Background::Still(img) => img.dimensions(),
            Background::Sequence(frames) => frames.dimensions(),
        }
    }
}

/// Frames a source or background supplies to one batch: `(image, segmentation index)`.
type Supplied = Vec<Option<(Arc<RasterImage>, usize)>>;

fn supply(
    frames: &mut FrameSource,
    range: std::ops::Range<usize>,
    hold_last: bool,
    held: &mut Option<(Arc<RasterImage>, usize)>,
    exec: &Executor,
) -> Result<Supplied> {
    let len = frames.len();
    let fetched = if range.start < len {
        frames.fetch(range.start..range.end.min(len), exec)?
    } else {
        Vec::new()
    };
    let start = range.start;
    if let Some(last) = fetched.last() {
        *held = Some((Arc::clone(last), start + fetched.len() - 1));
    }
    Ok(range
        .map(|i| {
            if i < len {
                Some((Arc::clone(&fetched[i - start]), i))
            } else if hold_last {
                held.clone()
            } else {
                None
            }
        })
        .collect())
}

struct WorkItem {
    frame_index: usize,
    background: Arc<RasterImage>,
    sources: Vec<Option<(Arc<RasterImage>, usize)>>,
}

/// Runs `job` over its whole length, handing frames to `sink` in index order.
///
/// On failure the sink's [`FrameSink::abort`] is called and the returned
/// error records the failing frame and how many frames were written.
pub fn process_sequence(
    job: &mut CompositeJob,
    sink: &mut dyn FrameSink,
) -> Result<SequenceSummary> {
    job.validate()?;
    let total = job.output_length()?;
    let (frame_rate, warnings) = job.output_frame_rate();
    for w in &warnings {
        log::warn!("{w}");
    }
    let (width, height) = job.canvas_dimensions();

    let workers = job.options.workers.get();
    let exec = Executor::new(workers);
    let batch = (workers + job.options.buffer_depth).max(1);
    let encoding = sink.encoding();
    let frame_options = job.options.frame;
    let freeze = job.options.exhaustion == ExhaustionPolicy::Freeze;
    log::debug!(
        "{total} frame(s), {workers} worker(s) ({}), batches of {batch}",
        if exec.is_parallel() {
            "parallel"
        } else {
            "sequential"
        }
    );

    let mut held_sources: Vec<Option<(Arc<RasterImage>, usize)>> = vec![None; job.sources.len()];
    let mut held_background = None;
    let mut written = 0usize;
    let plans: Vec<(Arc<SequenceManifest>, SelectionSpec)> = job
        .sources
        .iter()
        .map(|s| (Arc::clone(&s.manifest), s.selection.clone()))
        .collect();

    let result = (|| -> Result<()> {
        for start in (0..total).step_by(batch) {
            let range = start..(start + batch).min(total);
            let mut per_source = Vec::with_capacity(job.sources.len());
            for (s, src) in job.sources.iter_mut().enumerate() {
                let supplied = supply(
                    &mut src.frames,
                    range.clone(),
                    freeze,
                    &mut held_sources[s],
                    &exec,
                )
                .map_err(|e| frame_error(start, Some(s), e))?;
                per_source.push(supplied);
            }
            let backgrounds: Vec<Arc<RasterImage>> = match &mut job.background {
                Background::Still(img) => range.clone().map(|_| Arc::clone(img)).collect(),
                Background::Sequence(frames) => {
                    supply(frames, range.clone(), true, &mut held_background, &exec)
                        .map_err(|e| frame_error(start, None, e))?
                        .into_iter()
                        .map(|f| f.expect("background holds its last frame").0)
                        .collect()
                }
            };
            let items: Vec<WorkItem> = range
                .clone()
                .zip(backgrounds)
                .enumerate()
                .map(|(k, (frame_index, background))| WorkItem {
                    frame_index,
                    background,
                    sources: per_source.iter().map(|p| p[k].clone()).collect(),
                })
                .collect();

            let done = exec.try_map(&items, |_, item| {
                let inputs: Vec<Option<SourceFrame<'_>>> = item
                    .sources
                    .iter()
                    .zip(&plans)
                    .map(|(supplied, (manifest, selection))| {
                        supplied.as_ref().map(|(image, seg)| SourceFrame {
                            image,
                            segmentation: &manifest.frames[*seg],
                            selection,
                        })
                    })
                    .collect();
                let result =
                    process_frame(item.frame_index, &item.background, &inputs, &frame_options)?;
                let encoded = encoding
                    .map(|kind: ImageKind| encode_image(&result.image, kind))
                    .transpose()
                    .map_err(|message| frame_error(item.frame_index, None, Error::Job(message)))?;
                Ok::<_, Error>((result, encoded))
            })?;

            for (result, encoded) in done {
                let index = result.frame_index;
                for d in &result.diagnostics {
                    log::warn!("frame {index}: {d}");
                }
                sink.write(result, encoded)
                    .map_err(|e| frame_error(index, None, e))?;
                written += 1;
            }
        }
        Ok(())
    })();

    let summary = SequenceSummary {
        frames_written: written,
        frame_rate,
        width,
        height,
        warnings,
    };
    match result {
        Ok(()) => {
            sink.finish(&summary)?;
            Ok(summary)
        }
        Err(err) => {
            let err = match err {
                Error::Frame(mut fe) => {
                    fe.frames_completed = written;
                    fe
                }
                other => FrameError {
                    frame_index: written,
                    source_index: None,
                    frames_completed: written,
                    source: Box::new(other),
                },
            };
            sink.abort(&err);
            Err(Error::Frame(err))
        }
    }
}
