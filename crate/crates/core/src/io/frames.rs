//! Frame directories: `frame_%06d.png` (or `.ppm`), zero-based, contiguous.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::IoError;
use crate::io::image_file::ImageKind;

/// File name of frame `index` in a frame directory.
pub fn frame_file_name(index: usize, kind: ImageKind) -> String {
    format!("frame_{index:06}.{}", kind.extension())
}

/// The ordered frames of one directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameDirectory {
    pub dir: PathBuf,
    pub kind: ImageKind,
    pub paths: Vec<PathBuf>,
}

impl FrameDirectory {
    pub fn frame_count(&self) -> usize {
        self.paths.len()
    }
}

fn parse_frame_name(name: &str) -> Option<(usize, ImageKind)> {
    let rest = name.strip_prefix("frame_")?;
    let (digits, ext) = rest.split_once('.')?;
    if digits.len() < 6 || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let kind = ImageKind::from_path(Path::new(name))?;
    if ext.contains('.') {
        return None;
    }
    Some((digits.parse().ok()?, kind))
}

/// Lists the frames of `dir` in index order. Files not following the naming
/// convention are ignored.
pub fn enumerate_frames(dir: impl AsRef<Path>) -> Result<FrameDirectory, IoError> {
    let dir = dir.as_ref();
    let file_err = |source| IoError::File {
        path: dir.to_path_buf(),
        source,
    };
    let mut found: BTreeMap<usize, (PathBuf, ImageKind)> = BTreeMap::new();
    let mut kind: Option<(ImageKind, String)> = None;
    for entry in std::fs::read_dir(dir).map_err(file_err)? {
        let entry = entry.map_err(file_err)?;
        let name = entry.file_name();
        let Some(name) = name.to_str() else { continue };
        let Some((index, k)) = parse_frame_name(name) else {
            continue;
        };
        match &kind {
            None => kind = Some((k, name.to_string())),
            Some((first, first_name)) if *first != k => {
                // report in a listing-independent order
                let (a, b) = if first_name.as_str() < name {
                    (first_name.clone(), name.to_string())
                } else {
                    (name.to_string(), first_name.clone())
                };
                return Err(IoError::MixedExtensions {
                    dir: dir.to_path_buf(),
                    first: a,
                    second: b,
                });
            }
            Some(_) => {}
        }
        if let Some((previous, _)) = found.insert(index, (entry.path(), k)) {
            let mut names = [
                previous.file_name().unwrap().to_string_lossy().into_owned(),
                name.to_string(),
            ];
            names.sort();
            let [first, second] = names;
            return Err(IoError::DuplicateFrame {
                dir: dir.to_path_buf(),
                index,
                first,
                second,
            });
        }
    }
    let Some((kind, _)) = kind else {
        return Err(IoError::NoFrames {
            dir: dir.to_path_buf(),
        });
    };
    if let Some(missing) = found
        .keys()
        .enumerate()
        .find(|(i, k)| i != *k)
        .map(|(i, _)| i)
    {
        return Err(IoError::FrameGap {
            dir: dir.to_path_buf(),
            missing,
        });
    }
    Ok(FrameDirectory {
        dir: dir.to_path_buf(),
        kind,
        paths: found.into_values().map(|(p, _)| p).collect(),
    })
}
