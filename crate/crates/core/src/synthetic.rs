//! Deterministic synthetic scenes for tests, benchmarks and the bundled
//! fixture. Objects are filled ellipses inside their boxes; an object drawn
//! later occludes the masks of the ones below it.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bbox::BoundingBox;
use crate::detection::Detection;
use crate::mask::BinaryMask;
use crate::provider::{FrameRate, FrameSegmentation, SequenceManifest};
use crate::raster::{RasterImage, Rgb};

pub const PERSON_CLASS: u32 = 1;
pub const DOG_CLASS: u32 = 18;

/// A few COCO categories, enough for synthetic scenes.
pub fn categories() -> BTreeMap<u32, Arc<str>> {
    [(1, "person"), (3, "car"), (18, "dog"), (62, "chair")]
        .into_iter()
        .map(|(id, name)| (id, Arc::from(name)))
        .collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Filled ellipse inscribed in `bbox` on a `width x height` grid.
pub fn ellipse_mask(width: u32, height: u32, bbox: &BoundingBox) -> BinaryMask {
    let cx = f64::from(bbox.x1 + bbox.x2) / 2.0;
    let cy = f64::from(bbox.y1 + bbox.y2) / 2.0;
    let rx = f64::from(bbox.width()) / 2.0;
    let ry = f64::from(bbox.height()) / 2.0;
    BinaryMask::from_fn(width, height, |x, y| {
        if rx == 0.0 || ry == 0.0 || x < bbox.x1 || x >= bbox.x2 || y < bbox.y1 || y >= bbox.y2 {
            return false;
        }
        let dx = (f64::from(x) + 0.5 - cx) / rx;
        let dy = (f64::from(y) + 0.5 - cy) / ry;
        dx * dx + dy * dy <= 1.0
    })
}

/// Mask with independent random bits at a random density.
pub fn random_mask<R: Rng>(rng: &mut R, width: u32, height: u32) -> BinaryMask {
    let density: f64 = rng.gen_range(0.0..=1.0);
    BinaryMask::from_fn(width, height, |_, _| rng.gen_bool(density))
}

pub fn random_image<R: Rng>(rng: &mut R, width: u32, height: u32) -> RasterImage {
    let mut pixels = vec![0u8; width as usize * height as usize * 3];
    rng.fill(&mut pixels[..]);
    RasterImage::new(width, height, pixels).expect("sized buffer")
}

/// Smooth two-color gradient with a little deterministic texture.
pub fn gradient_backdrop(width: u32, height: u32, top: Rgb, bottom: Rgb, seed: u64) -> RasterImage {
    let mut rng = rng(seed);
    let texture: Vec<u8> = (0..64).map(|_| rng.gen_range(0..12)).collect();
    RasterImage::from_fn(width, height, |x, y| {
        let t = f64::from(y) / f64::from(height.max(2) - 1);
        let n = texture[((x * 7 + y * 13) % 64) as usize];
        let mix = |a: u8, b: u8| {
            let v = f64::from(a) * (1.0 - t) + f64::from(b) * t + f64::from(n) - 6.0;
            v.round().clamp(0.0, 255.0) as u8
        };
        Rgb([
            mix(top.0[0], bottom.0[0]),
            mix(top.0[1], bottom.0[1]),
            mix(top.0[2], bottom.0[2]),
        ])
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneObject {
    pub class_id: u32,
    pub bbox: BoundingBox,
    pub color: Rgb,
    pub score: f64,
}

/// A rendered source frame and the detections that describe it.
#[derive(Debug, Clone)]
pub struct Scene {
    pub image: RasterImage,
    pub detections: Vec<Detection>,
}

/// Paints `objects` in order over `backdrop`. Each object's mask excludes
/// pixels covered by objects painted after it.
pub fn render_scene(backdrop: &RasterImage, objects: &[SceneObject]) -> Scene {
    let (w, h) = backdrop.dimensions();
    let cats = categories();
    let shapes: Vec<BinaryMask> = objects
        .iter()
        .map(|o| ellipse_mask(w, h, &o.bbox))
        .collect();
    let mut image = backdrop.clone();
    for (o, shape) in objects.iter().zip(&shapes) {
        for i in shape.bits().iter_ones() {
            let (x, y) = ((i % w as usize) as u32, (i / w as usize) as u32);
            // vertical shading so object pixels are not a single flat color
            let shade = 0.75 + 0.25 * f64::from(y - o.bbox.y1) / f64::from(o.bbox.height().max(1));
            let c = o.color.0.map(|v| (f64::from(v) * shade).round() as u8);
            image.put_pixel(x, y, Rgb(c));
        }
    }
    let detections = objects
        .iter()
        .enumerate()
        .map(|(i, o)| {
            let mut mask = shapes[i].clone();
            for later in &shapes[i + 1..] {
                for j in later.bits().iter_ones() {
                    mask.set((j % w as usize) as u32, (j / w as usize) as u32, false);
                }
            }
            Detection {
                instance_id: i,
                class_id: o.class_id,
                class_name: cats
                    .get(&o.class_id)
                    .cloned()
                    .unwrap_or_else(|| Arc::from("unknown")),
                score: o.score,
                bbox: o.bbox,
                mask,
            }
        })
        .collect();
    Scene { image, detections }
}

/// Source frames plus the manifest describing them.
#[derive(Debug, Clone)]
pub struct SyntheticSequence {
    pub frames: Vec<RasterImage>,
    pub manifest: SequenceManifest,
}

fn assemble(
    scenes: Vec<Scene>,
    width: u32,
    height: u32,
    frame_rate: FrameRate,
) -> SyntheticSequence {
    let mut frames = Vec::with_capacity(scenes.len());
    let mut segs = Vec::with_capacity(scenes.len());
    for (i, scene) in scenes.into_iter().enumerate() {
        frames.push(scene.image);
        segs.push(FrameSegmentation {
            frame_index: i,
            detections: scene.detections,
        });
    }
    SyntheticSequence {
        frames,
        manifest: SequenceManifest {
            frame_width: width,
            frame_height: height,
            frame_rate,
            categories: categories(),
            frames: segs,
        },
    }
}

fn random_box<R: Rng>(rng: &mut R, width: u32, height: u32) -> BoundingBox {
    let bw = rng.gen_range(width / 8..=width / 2).max(1);
    let bh = rng.gen_range(height / 4..=height * 3 / 4).max(1);
    let x1 = rng.gen_range(0..=width - bw);
    let y1 = rng.gen_range(0..=height - bh);
    BoundingBox::new(y1, x1, y1 + bh, x1 + bw).expect("ordered corners")
}

/// A `frame_count`-frame sequence with one to `max_persons` persons and an
/// occasional dog per frame.
pub fn random_sequence(
    frame_count: usize,
    width: u32,
    height: u32,
    max_persons: usize,
    seed: u64,
) -> SyntheticSequence {
    let mut rng = rng(seed);
    let backdrop = gradient_backdrop(width, height, Rgb([90, 80, 70]), Rgb([40, 40, 50]), seed);
    let scenes = (0..frame_count)
        .map(|_| {
            let persons = rng.gen_range(1..=max_persons.max(1));
            let mut objects: Vec<SceneObject> = (0..persons)
                .map(|_| SceneObject {
                    class_id: PERSON_CLASS,
                    bbox: random_box(&mut rng, width, height),
                    color: Rgb([
                        rng.gen_range(120..=255),
                        rng.gen_range(40..=200),
                        rng.gen_range(40..=200),
                    ]),
                    score: rng.gen_range(0.6..1.0),
                })
                .collect();
            if rng.gen_bool(0.5) {
                let at = rng.gen_range(0..=objects.len());
                objects.insert(
                    at,
                    SceneObject {
                        class_id: DOG_CLASS,
                        bbox: random_box(&mut rng, width, height),
                        color: Rgb([140, 90, 40]),
                        score: rng.gen_range(0.6..1.0),
                    },
                );
            }
            render_scene(&backdrop, &objects)
        })
        .collect();
    assemble(scenes, width, height, FrameRate { num: 30, den: 1 })
}

pub const FIXTURE_WIDTH: u32 = 240;
pub const FIXTURE_HEIGHT: u32 = 160;
pub const FIXTURE_FRAMES: usize = 3;

/// Objects of fixture frame `frame_index`: persons 0, 1, 2 with box areas
/// 5000, 8000 and 8000, then a dog (id 3) standing in front of person 1.
/// Everything drifts two pixels right per frame.
pub fn fixture_objects(frame_index: usize) -> Vec<SceneObject> {
    let dx = 2 * frame_index as u32;
    let b = |y1, x1, y2, x2| BoundingBox::new(y1, x1 + dx, y2, x2 + dx).expect("ordered corners");
    vec![
        SceneObject {
            class_id: PERSON_CLASS,
            bbox: b(40, 10, 140, 60),
            color: Rgb([210, 70, 70]),
            score: 0.97,
        },
        SceneObject {
            class_id: PERSON_CLASS,
            bbox: b(30, 70, 130, 150),
            color: Rgb([70, 190, 90]),
            score: 0.95,
        },
        SceneObject {
            class_id: PERSON_CLASS,
            bbox: b(45, 155, 145, 235),
            color: Rgb([70, 100, 220]),
            score: 0.92,
        },
        SceneObject {
            class_id: DOG_CLASS,
            bbox: b(110, 95, 155, 145),
            color: Rgb([150, 100, 40]),
            score: 0.88,
        },
    ]
}

/// The three-frame fixture's source frames and manifest.
pub fn fixture_sequence() -> SyntheticSequence {
    let backdrop = gradient_backdrop(
        FIXTURE_WIDTH,
        FIXTURE_HEIGHT,
        Rgb([120, 110, 100]),
        Rgb([60, 55, 50]),
        7,
    );
    let scenes = (0..FIXTURE_FRAMES)
        .map(|i| render_scene(&backdrop, &fixture_objects(i)))
        .collect();
    assemble(
        scenes,
        FIXTURE_WIDTH,
        FIXTURE_HEIGHT,
        FrameRate { num: 25, den: 1 },
    )
}

/// Sky-over-sand background for the fixture.
pub fn fixture_background() -> RasterImage {
    gradient_backdrop(
        FIXTURE_WIDTH,
        FIXTURE_HEIGHT,
        Rgb([110, 170, 230]),
        Rgb([230, 210, 160]),
        11,
    )
}
