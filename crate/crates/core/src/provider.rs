//! Segmentation manifests: the JSON interchange file that carries per-frame
//! detections, their masks and the sequence frame rate.
//!
//! ```json
//! {
//!   "version": 1,
//!   "frame_width": 640, "frame_height": 480,
//!   "frame_rate": {"num": 30, "den": 1},
//!   "categories": {"1": "person", "18": "dog"},
//!   "frames": [
//!     {"frame_index": 0,
//!      "detections": [
//!        {"class_id": 1, "score": 0.98,
//!         "bbox": [y1, x1, y2, x2],
//!         "mask_rle": {"size": [480, 640], "counts": [...]}}
//!      ]}
//!   ]
//! }
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bbox::BoundingBox;
use crate::detection::Detection;
use crate::error::ManifestError;
use crate::rle::{rle_decode, rle_encode, RleCounts};

pub const MANIFEST_VERSION: u32 = 1;

/// Detections scoring below this are dropped unless configured otherwise.
pub const DEFAULT_SCORE_THRESHOLD: f64 = 0.5;

/// Frames per second as a positive rational.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FrameRate {
    pub num: u32,
    pub den: u32,
}

impl FrameRate {
    pub fn new(num: u32, den: u32) -> Option<Self> {
        (num > 0 && den > 0).then_some(Self { num, den })
    }

    pub fn as_f64(&self) -> f64 {
        f64::from(self.num) / f64::from(self.den)
    }

    /// Rates compare by value, so 60/2 equals 30/1.
    pub fn same_rate(&self, other: &FrameRate) -> bool {
        u64::from(self.num) * u64::from(other.den) == u64::from(other.num) * u64::from(self.den)
    }
}

impl fmt::Display for FrameRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl std::str::FromStr for FrameRate {
    type Err = String;

    /// Accepts `30` or `30000/1001`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n, d),
            None => (s, "1"),
        };
        let num = num
            .trim()
            .parse::<u32>()
            .map_err(|e| format!("bad frame rate `{s}`: {e}"))?;
        let den = den
            .trim()
            .parse::<u32>()
            .map_err(|e| format!("bad frame rate `{s}`: {e}"))?;
        FrameRate::new(num, den).ok_or_else(|| format!("frame rate `{s}` must be positive"))
    }
}

/// All detections for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSegmentation {
    pub frame_index: usize,
    pub detections: Vec<Detection>,
}

impl FrameSegmentation {
    pub fn empty(frame_index: usize) -> Self {
        Self {
            frame_index,
            detections: Vec::new(),
        }
    }

    pub fn detection(&self, instance_id: usize) -> Option<&Detection> {
        self.detections
            .iter()
            .find(|d| d.instance_id == instance_id)
    }
}

/// A fully validated segmentation manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceManifest {
    pub frame_width: u32,
    pub frame_height: u32,
    pub frame_rate: FrameRate,
    pub categories: BTreeMap<u32, Arc<str>>,
    pub frames: Vec<FrameSegmentation>,
}

impl SequenceManifest {
    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    /// `(width, height)`
    pub fn dimensions(&self) -> (u32, u32) {
        (self.frame_width, self.frame_height)
    }

    /// Serializes to the manifest JSON schema.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("manifest serialization cannot fail")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ManifestError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|source| ManifestError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    fn to_doc(&self) -> ManifestDoc {
        ManifestDoc {
            version: MANIFEST_VERSION,
            frame_width: self.frame_width,
            frame_height: self.frame_height,
            frame_rate: self.frame_rate,
            categories: self
                .categories
                .iter()
                .map(|(id, name)| (id.to_string(), name.to_string()))
                .collect(),
            frames: self
                .frames
                .iter()
                .map(|f| FrameDoc {
                    frame_index: f.frame_index,
                    detections: f
                        .detections
                        .iter()
                        .map(|d| DetectionDoc {
                            class_id: d.class_id,
                            score: d.score,
                            bbox: d.bbox.to_array(),
                            mask_rle: rle_encode(&d.mask),
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManifestOptions {
    /// Reject fields the schema does not know about.
    pub strict: bool,
    /// Detections with `score < score_threshold` are dropped after validation.
    pub score_threshold: f64,
}

impl Default for ManifestOptions {
    fn default() -> Self {
        Self {
            strict: true,
            score_threshold: DEFAULT_SCORE_THRESHOLD,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestDoc {
    version: u32,
    frame_width: u32,
    frame_height: u32,
    frame_rate: FrameRate,
    categories: BTreeMap<String, String>,
    frames: Vec<FrameDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
struct FrameDoc {
    frame_index: usize,
    detections: Vec<DetectionDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
struct DetectionDoc {
    class_id: u32,
    score: f64,
    bbox: [u32; 4],
    mask_rle: RleCounts,
}

/// Reads and validates a manifest file.
pub fn load_manifest(
    path: impl AsRef<Path>,
    options: &ManifestOptions,
) -> Result<SequenceManifest, ManifestError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| ManifestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_manifest(&bytes, options)
}

/// Parses and validates manifest JSON held in memory.
pub fn parse_manifest(
    bytes: &[u8],
    options: &ManifestOptions,
) -> Result<SequenceManifest, ManifestError> {
    let doc = deserialize_doc(bytes, options.strict)?;
    validate_doc(doc, options)
}

fn deserialize_doc(bytes: &[u8], strict: bool) -> Result<ManifestDoc, ManifestError> {
    let mut unknown = Vec::new();
    let mut de = serde_json::Deserializer::from_slice(bytes);
    let doc: ManifestDoc = {
        let mut record = |path: serde_ignored::Path<'_>| unknown.push(path.to_string());
        let ignoring = serde_ignored::Deserializer::new(&mut de, &mut record);
        serde_path_to_error::deserialize(ignoring).map_err(|err| {
            let path = err.path().to_string();
            let inner = err.into_inner();
            if inner.is_data() {
                ManifestError::Schema {
                    path,
                    message: inner.to_string(),
                }
            } else {
                ManifestError::Parse(inner)
            }
        })?
    };
    de.end().map_err(ManifestError::Parse)?;
    if strict {
        if let Some(path) = unknown.into_iter().next() {
            return Err(ManifestError::Schema {
                path,
                message: "unknown field (use lenient mode to ignore)".into(),
            });
        }
    }
    Ok(doc)
}

fn invalid(frame: Option<usize>, instance: Option<usize>, message: String) -> ManifestError {
    ManifestError::Validation {
        frame_index: frame,
        instance_id: instance,
        message,
    }
}

fn validate_doc(
    doc: ManifestDoc,
    options: &ManifestOptions,
) -> Result<SequenceManifest, ManifestError> {
    if doc.version != MANIFEST_VERSION {
        return Err(invalid(
            None,
            None,
            format!(
                "unsupported version {}, expected {MANIFEST_VERSION}",
                doc.version
            ),
        ));
    }
    let (width, height) = (doc.frame_width, doc.frame_height);
    if width == 0 || height == 0 {
        return Err(invalid(
            None,
            None,
            format!("frame size {width}x{height} is empty"),
        ));
    }
    let frame_rate = FrameRate::new(doc.frame_rate.num, doc.frame_rate.den).ok_or_else(|| {
        invalid(
            None,
            None,
            format!(
                "frame rate {}/{} must be positive",
                doc.frame_rate.num, doc.frame_rate.den
            ),
        )
    })?;

    let mut categories = BTreeMap::new();
    for (key, name) in doc.categories {
        let id = key
            .trim()
            .parse::<u32>()
            .map_err(|_| ManifestError::Schema {
                path: format!("categories.{key}"),
                message: "category keys must be non-negative integers".into(),
            })?;
        categories.insert(id, Arc::<str>::from(name));
    }

    let mut frame_docs = doc.frames;
    frame_docs.sort_by_key(|f| f.frame_index);
    let mut frames = Vec::with_capacity(frame_docs.len());
    for (expected, frame) in frame_docs.into_iter().enumerate() {
        let fi = frame.frame_index;
        if fi != expected {
            let message = if fi < expected {
                format!("frame index {fi} appears more than once")
            } else {
                format!("frame indices are not contiguous: {expected} is missing")
            };
            return Err(invalid(Some(fi), None, message));
        }
        let mut detections = Vec::with_capacity(frame.detections.len());
        for (instance_id, det) in frame.detections.into_iter().enumerate() {
            let here = |message: String| invalid(Some(fi), Some(instance_id), message);
            let class_name = categories.get(&det.class_id).cloned().ok_or_else(|| {
                here(format!(
                    "class_id {} is not in the category table",
                    det.class_id
                ))
            })?;
            if !(0.0..=1.0).contains(&det.score) {
                return Err(here(format!("score {} is outside [0, 1]", det.score)));
            }
            let [y1, x1, y2, x2] = det.bbox;
            let bbox = BoundingBox::new(y1, x1, y2, x2)
                .ok_or_else(|| here(format!("bbox {:?} has y2 < y1 or x2 < x1", det.bbox)))?;
            if !bbox.fits_within(width, height) {
                return Err(here(format!(
                    "bbox {:?} exceeds the {width}x{height} frame",
                    det.bbox
                )));
            }
            if det.mask_rle.size != [height, width] {
                return Err(here(format!(
                    "mask size {:?} differs from frame size [{height}, {width}]",
                    det.mask_rle.size
                )));
            }
            let mask = rle_decode(&det.mask_rle).map_err(|e| here(e.to_string()))?;
            if det.score < options.score_threshold {
                continue;
            }
            detections.push(Detection {
                instance_id,
                class_id: det.class_id,
                class_name,
                score: det.score,
                bbox,
                mask,
            });
        }
        frames.push(FrameSegmentation {
            frame_index: fi,
            detections,
        });
    }

    Ok(SequenceManifest {
        frame_width: width,
        frame_height: height,
        frame_rate,
        categories,
        frames,
    })
}

/// One disagreement between a manifest and the frames it describes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Mismatch {
    FrameCount {
        manifest: usize,
        source: usize,
    },
    Dimensions {
        manifest: (u32, u32),
        source: (u32, u32),
    },
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mismatch::FrameCount { manifest, source } => write!(
                f,
                "manifest describes {manifest} frame(s) but the frame source has {source}"
            ),
            Mismatch::Dimensions { manifest, source } => write!(
                f,
                "manifest frames are {}x{} but source frames are {}x{}",
                manifest.0, manifest.1, source.0, source.1
            ),
        }
    }
}

/// Every mismatch found by [`validate_against_frames`].
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub mismatches: Vec<Mismatch>,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.mismatches.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join("; "))
    }
}

impl std::error::Error for ValidationReport {}

/// Checks a manifest against the frame count and size of its frame source.
pub fn validate_against_frames(
    manifest: &SequenceManifest,
    frame_count: usize,
    width: u32,
    height: u32,
) -> Result<(), ValidationReport> {
    let mut report = ValidationReport::default();
    if manifest.frame_count() != frame_count {
        report.mismatches.push(Mismatch::FrameCount {
            manifest: manifest.frame_count(),
            source: frame_count,
        });
    }
    if manifest.dimensions() != (width, height) {
        report.mismatches.push(Mismatch::Dimensions {
            manifest: manifest.dimensions(),
            source: (width, height),
        });
    }
    if report.mismatches.is_empty() {
        Ok(())
    } else {
        Err(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn doc(frames: serde_json::Value) -> Vec<u8> {
        serde_json::to_vec(&json!({
            "version": 1,
            "frame_width": 3, "frame_height": 2,
            "frame_rate": {"num": 25, "den": 1},
            "categories": {"1": "person", "18": "dog"},
            "frames": frames,
        }))
        .unwrap()
    }

    fn det(class_id: u32, score: f64, counts: &[u32]) -> serde_json::Value {
        json!({"class_id": class_id, "score": score, "bbox": [0, 0, 2, 3],
               "mask_rle": {"size": [2, 3], "counts": counts}})
    }

    fn load(bytes: &[u8]) -> Result<SequenceManifest, ManifestError> {
        parse_manifest(bytes, &ManifestOptions::default())
    }

    #[test]
    fn empty_frame() {
        let m = load(&doc(json!([{"frame_index": 0, "detections": []}]))).unwrap();
        assert_eq!(m.frames, vec![FrameSegmentation::empty(0)]);
        assert_eq!(m.frame_rate, FrameRate { num: 25, den: 1 });
    }

    #[test]
    fn rle_short_by_one_names_frame() {
        let bytes = doc(json!([{"frame_index": 0, "detections": [det(1, 0.9, &[1, 4])]}]));
        match load(&bytes).unwrap_err() {
            ManifestError::Validation {
                frame_index,
                instance_id,
                message,
            } => {
                assert_eq!(frame_index, Some(0));
                assert_eq!(instance_id, Some(0));
                assert!(message.contains("sum to 5"), "{message}");
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn instance_ids_follow_file_order() {
        let bytes = doc(json!([{"frame_index": 0, "detections": [
            det(1, 0.9, &[6]), det(18, 0.8, &[0, 6]), det(1, 0.7, &[3, 3])
        ]}]));
        let m = load(&bytes).unwrap();
        let ids: Vec<_> = m.frames[0]
            .detections
            .iter()
            .map(|d| d.instance_id)
            .collect();
        assert_eq!(ids, vec![0, 1, 2]);
        assert_eq!(&*m.frames[0].detections[1].class_name, "dog");
    }

    #[test]
    fn low_scores_are_dropped_but_ids_are_kept() {
        let bytes = doc(json!([{"frame_index": 0, "detections": [
            det(1, 0.2, &[6]), det(1, 0.5, &[6])
        ]}]));
        let m = load(&bytes).unwrap();
        assert_eq!(m.frames[0].detections.len(), 1);
        assert_eq!(m.frames[0].detections[0].instance_id, 1);

        let all = parse_manifest(
            &bytes,
            &ManifestOptions {
                score_threshold: 0.0,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(all.frames[0].detections.len(), 2);
    }

    #[test]
    fn missing_field_names_path() {
        let bytes = serde_json::to_vec(&json!({
            "version": 1, "frame_width": 3, "frame_height": 2,
            "frame_rate": {"num": 25, "den": 1}, "categories": {"1": "person"},
            "frames": [{"frame_index": 0, "detections": [
                {"class_id": 1, "bbox": [0,0,1,1], "mask_rle": {"size": [2,3], "counts": [6]}}
            ]}]
        }))
        .unwrap();
        match load(&bytes).unwrap_err() {
            ManifestError::Schema { path, message } => {
                assert_eq!(path, "frames[0].detections[0]");
                assert!(message.contains("score"), "{message}");
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn unknown_fields_strict_vs_lenient() {
        let mut value: serde_json::Value = serde_json::from_slice(&doc(
            json!([{"frame_index": 0, "detections": [det(1, 0.9, &[6])]}]),
        ))
        .unwrap();
        value["frames"][0]["detections"][0]["extra"] = json!(true);
        let bytes = serde_json::to_vec(&value).unwrap();
        match load(&bytes).unwrap_err() {
            ManifestError::Schema { path, .. } => assert!(path.contains("extra"), "{path}"),
            other => panic!("unexpected {other}"),
        }
        let lenient = ManifestOptions {
            strict: false,
            ..Default::default()
        };
        assert_eq!(
            parse_manifest(&bytes, &lenient).unwrap().frames[0]
                .detections
                .len(),
            1
        );
    }

    #[test]
    fn malformed_json_is_a_parse_error() {
        assert!(matches!(
            load(b"{\"version\": 1,"),
            Err(ManifestError::Parse(_))
        ));
        assert!(matches!(
            load(b"{} trailing"),
            Err(ManifestError::Parse(_)) | Err(ManifestError::Schema { .. })
        ));
    }

    #[test]
    fn frame_gaps_and_duplicates() {
        let gap = doc(json!([
            {"frame_index": 0, "detections": []},
            {"frame_index": 2, "detections": []}
        ]));
        assert!(matches!(
            load(&gap).unwrap_err(),
            ManifestError::Validation {
                frame_index: Some(2),
                ..
            }
        ));
        let dup = doc(json!([
            {"frame_index": 0, "detections": []},
            {"frame_index": 0, "detections": []}
        ]));
        assert!(load(&dup).is_err());
        let shuffled = doc(json!([
            {"frame_index": 1, "detections": []},
            {"frame_index": 0, "detections": []}
        ]));
        assert_eq!(load(&shuffled).unwrap().frame_count(), 2);
    }

    #[test]
    fn bbox_out_of_bounds_and_unknown_class() {
        let mut d = det(1, 0.9, &[6]);
        d["bbox"] = json!([0, 0, 3, 3]);
        let err = load(&doc(json!([{"frame_index": 0, "detections": [d]}]))).unwrap_err();
        assert!(err.to_string().contains("exceeds"), "{err}");

        let err = load(&doc(
            json!([{"frame_index": 0, "detections": [det(7, 0.9, &[6])]}]),
        ))
        .unwrap_err();
        assert!(err.to_string().contains("class_id 7"), "{err}");
    }

    #[test]
    fn mask_size_must_match_frame() {
        let mut d = det(1, 0.9, &[6]);
        d["mask_rle"]["size"] = json!([3, 2]);
        let err = load(&doc(json!([{"frame_index": 0, "detections": [d]}]))).unwrap_err();
        assert!(err.to_string().contains("mask size"), "{err}");
    }

    #[test]
    fn save_and_reload_is_identical() {
        let bytes = doc(json!([{"frame_index": 0, "detections": [
            det(1, 0.9125, &[1, 2, 3]), det(18, 0.75, &[0, 6])
        ]}]));
        let m = load(&bytes).unwrap();
        let again = load(m.to_json().as_bytes()).unwrap();
        assert_eq!(m, again);
    }

    #[test]
    fn validate_against_frames_reports_every_mismatch() {
        let frames: Vec<_> = (0..10)
            .map(|i| json!({"frame_index": i, "detections": []}))
            .collect();
        let m = load(&doc(json!(frames))).unwrap();
        assert!(validate_against_frames(&m, 10, 3, 2).is_ok());
        let report = validate_against_frames(&m, 9, 2, 3).unwrap_err();
        assert_eq!(
            report.mismatches,
            vec![
                Mismatch::FrameCount {
                    manifest: 10,
                    source: 9
                },
                Mismatch::Dimensions {
                    manifest: (3, 2),
                    source: (2, 3)
                },
            ]
        );
        let text = report.to_string();
        assert!(text.contains("10") && text.contains('9'), "{text}");
        assert!(text.contains("3x2") && text.contains("2x3"), "{text}");
    }

    #[test]
    fn frame_rate_parsing() {
        assert_eq!(
            "30".parse::<FrameRate>().unwrap(),
            FrameRate { num: 30, den: 1 }
        );
        assert_eq!("30000/1001".parse::<FrameRate>().unwrap().den, 1001);
        assert!("0".parse::<FrameRate>().is_err());
        assert!("x/2".parse::<FrameRate>().is_err());
        assert!(FrameRate { num: 60, den: 2 }.same_rate(&FrameRate { num: 30, den: 1 }));
    }
}
