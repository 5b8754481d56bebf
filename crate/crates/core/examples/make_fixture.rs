//! Regenerates `tests/fixtures/three_frame`.
//!
//! ```text
//! cargo run -p backdrop-core --example make_fixture
//! ```
//!
//! The golden frames come from a single-worker run with `top:2`. Check any
//! change to them by eye before committing.

use std::num::NonZeroUsize;
use std::path::PathBuf;
use std::sync::Arc;

use backdrop_core::io::{frame_file_name, write_image, FrameSource, ImageKind};
use backdrop_core::pipeline::{
    process_sequence, Background, CompositeJob, DirectorySink, JobOptions, SourceInput,
};
use backdrop_core::synthetic::{fixture_background, fixture_sequence};
use backdrop_core::SelectionSpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/three_frame");
    let source_dir = root.join("source");
    let golden_dir = root.join("golden");
    for dir in [&source_dir, &golden_dir] {
        if dir.exists() {
            std::fs::remove_dir_all(dir)?;
        }
        std::fs::create_dir_all(dir)?;
    }

    let seq = fixture_sequence();
    for (i, frame) in seq.frames.iter().enumerate() {
        write_image(frame, source_dir.join(frame_file_name(i, ImageKind::Png)))?;
    }
    seq.manifest.save(root.join("manifest.json"))?;
    let background = fixture_background();
    write_image(&background, root.join("background.png"))?;

    let mut job = CompositeJob::new(
        vec![SourceInput {
            frames: FrameSource::memory(seq.frames)?,
            manifest: Arc::new(seq.manifest),
            selection: SelectionSpec::top(2).expect("non-zero"),
        }],
        Background::Still(Arc::new(background)),
        JobOptions {
            workers: NonZeroUsize::MIN,
            buffer_depth: 1,
            ..JobOptions::default()
        },
    );
    let mut sink = DirectorySink::create(&golden_dir, ImageKind::Png)?;
    let summary = process_sequence(&mut job, &mut sink)?;
    println!(
        "wrote {} golden frame(s) to {}",
        summary.frames_written,
        golden_dir.display()
    );
    Ok(())
}
