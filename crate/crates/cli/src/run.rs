//! Executes a parsed `extract` invocation.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use backdrop_core::error::FrameError;
use backdrop_core::io::{FrameSource, ImageKind};
use backdrop_core::pipeline::{
    process_sequence, Background, CompositeJob, DirectorySink, FrameOptions, FrameResult,
    FrameSink, ImageFileSink, JobOptions, RawStreamSink, SequenceSummary, SourceInput,
};
use backdrop_core::{load_manifest, Error, ManifestOptions, ResizePolicy, Result};
use serde_json::json;

use crate::args::{is_stdio, CliConfig};

/// Records selected ids per frame while forwarding to another sink.
struct RecordingSink<'a> {
    inner: &'a mut dyn FrameSink,
    records: Vec<serde_json::Value>,
}

impl FrameSink for RecordingSink<'_> {
    fn encoding(&self) -> Option<ImageKind> {
        self.inner.encoding()
    }

    fn write(&mut self, frame: FrameResult, encoded: Option<Vec<u8>>) -> Result<()> {
        let ids: Vec<&BTreeSet<usize>> = frame.selected_ids.iter().collect();
        self.records
            .push(json!({ "frame_index": frame.frame_index, "selected": ids }));
        self.inner.write(frame, encoded)
    }

    fn finish(&mut self, summary: &SequenceSummary) -> Result<()> {
        self.inner.finish(summary)
    }

    fn abort(&mut self, error: &FrameError) {
        self.inner.abort(error)
    }
}

fn job_error(message: impl Into<String>) -> Error {
    Error::Job(message.into())
}

fn build_job(cfg: &CliConfig) -> Result<CompositeJob> {
    let manifest_options = ManifestOptions {
        strict: !cfg.lenient,
        score_threshold: cfg.score_threshold,
    };
    let mut sources = Vec::with_capacity(cfg.sources.len());
    for ((path, manifest_path), selection) in
        cfg.sources.iter().zip(&cfg.manifests).zip(&cfg.selections)
    {
        let manifest = Arc::new(load_manifest(manifest_path, &manifest_options)?);
        let frames = if is_stdio(path) {
            let raw = cfg.raw_in.expect("checked while parsing");
            FrameSource::raw(
                Box::new(std::io::stdin()),
                raw.width,
                raw.height,
                manifest.frame_count(),
                Some(raw.frame_rate),
            )
        } else {
            FrameSource::open(path)?
        };
        log::info!(
            "{}: {} frame(s) at {}x{}",
            path.display(),
            frames.len(),
            frames.dimensions().0,
            frames.dimensions().1
        );
        sources.push(SourceInput {
            frames,
            manifest,
            selection: selection.clone(),
        });
    }
    let background = match FrameSource::open(&cfg.background)? {
        FrameSource::Still(img) => Background::Still(img),
        seq => Background::Sequence(seq),
    };
    let options = JobOptions {
        frame: FrameOptions {
            resize: ResizePolicy {
                fit: cfg.fit,
                filter: cfg.filter,
            },
            metric: cfg.metric,
            feather: cfg.feather,
        },
        exhaustion: cfg.exhaustion,
        workers: cfg.workers,
        buffer_depth: cfg.workers.get(),
    };
    Ok(CompositeJob::new(sources, background, options))
}

fn open_sink(cfg: &CliConfig, job: &CompositeJob) -> Result<Box<dyn FrameSink>> {
    let total = job.output_length()?;
    if let Some(raw) = cfg.raw_out {
        let (w, h) = job.canvas_dimensions();
        if (raw.width, raw.height) != (w, h) {
            return Err(job_error(format!(
                "--raw-out {}x{} does not match the {w}x{h} background",
                raw.width, raw.height
            )));
        }
        let (rate, _) = job.output_frame_rate();
        if !rate.same_rate(&raw.frame_rate) {
            log::warn!(
                "--raw-out declares {} fps; the inputs run at {rate} fps",
                raw.frame_rate
            );
        }
        let writer: Box<dyn Write> = if is_stdio(&cfg.out) {
            Box::new(BufWriter::new(std::io::stdout().lock()))
        } else {
            let file = File::create(&cfg.out)
                .map_err(|e| job_error(format!("{}: {e}", cfg.out.display())))?;
            Box::new(BufWriter::new(file))
        };
        return Ok(Box::new(RawStreamSink::new(writer, w, h)));
    }
    if ImageKind::from_path(&cfg.out).is_some() && !cfg.out.is_dir() {
        if total != 1 {
            return Err(job_error(format!(
                "{} is an image path but the job produces {total} frames; give a directory",
                cfg.out.display()
            )));
        }
        return Ok(Box::new(ImageFileSink::new(&cfg.out)?));
    }
    Ok(Box::new(DirectorySink::create(&cfg.out, ImageKind::Png)?))
}

fn write_selection(path: &Path, records: Vec<serde_json::Value>) -> Result<()> {
    let text = serde_json::to_string_pretty(&serde_json::Value::Array(records))
        .expect("json values serialize");
    std::fs::write(path, text + "\n").map_err(|e| job_error(format!("{}: {e}", path.display())))
}

/// Runs the job; returns the summary or the error that stopped it.
pub fn run(cfg: &CliConfig) -> Result<SequenceSummary> {
    let mut job = build_job(cfg)?;
    job.validate()?;
    let mut sink = open_sink(cfg, &job)?;
    let mut recorder = RecordingSink {
        inner: sink.as_mut(),
        records: Vec::new(),
    };
    let outcome = process_sequence(&mut job, &mut recorder);
    if let Some(path) = &cfg.emit_selection {
        write_selection(path, recorder.records)?;
    }
    outcome
}
