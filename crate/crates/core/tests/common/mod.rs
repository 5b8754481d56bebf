//! Brute-force reference implementations and random inputs shared by the
//! integration tests. Nothing here calls the library's selection, mask or
//! compositing code.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::sync::Arc;

use backdrop_core::synthetic::categories;
use backdrop_core::{
    BinaryMask, BoundingBox, Detection, FrameSegmentation, RasterImage, Rgb, SelectionSpec,
};
use rand::Rng;

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/three_frame")
}

pub fn random_mask<R: Rng>(rng: &mut R, width: u32, height: u32, density: f64) -> BinaryMask {
    let mut mask = BinaryMask::empty(width, height);
    for y in 0..height {
        for x in 0..width {
            if rng.gen_bool(density) {
                mask.set(x, y, true);
            }
        }
    }
    mask
}

pub fn random_image<R: Rng>(rng: &mut R, width: u32, height: u32) -> RasterImage {
    let mut pixels = vec![0u8; width as usize * height as usize * 3];
    rng.fill(&mut pixels[..]);
    RasterImage::new(width, height, pixels).unwrap()
}

/// A frame of up to `max_detections` detections of mixed classes. Boxes come
/// from a coarse grid so equal areas are common.
pub fn random_frame<R: Rng>(
    rng: &mut R,
    frame_index: usize,
    max_detections: usize,
) -> FrameSegmentation {
    let table: Vec<(u32, Arc<str>)> = categories().into_iter().collect();
    let person = table
        .iter()
        .find(|(_, n)| &**n == "person")
        .unwrap()
        .clone();
    let count = rng.gen_range(0..=max_detections);
    let detections = (0..count)
        .map(|instance_id| {
            let (class_id, class_name) = if rng.gen_bool(0.6) {
                person.clone()
            } else {
                table[rng.gen_range(0..table.len())].clone()
            };
            let y1 = rng.gen_range(0..=6);
            let x1 = rng.gen_range(0..=6);
            let y2 = y1 + rng.gen_range(0..=4);
            let x2 = x1 + rng.gen_range(0..=4);
            Detection {
                instance_id,
                class_id,
                class_name,
                score: rng.gen_range(0.5..=1.0),
                bbox: BoundingBox::new(y1, x1, y2, x2).unwrap(),
                mask: random_mask(rng, 6, 6, 0.4),
            }
        })
        .collect();
    FrameSegmentation {
        frame_index,
        detections,
    }
}

fn area(d: &Detection, by_mask: bool) -> u64 {
    if by_mask {
        (0..d.mask.height())
            .flat_map(|y| (0..d.mask.width()).map(move |x| (x, y)))
            .filter(|&(x, y)| d.mask.get(x, y))
            .count() as u64
    } else {
        let [y1, x1, y2, x2] = [d.bbox.y1, d.bbox.x1, d.bbox.y2, d.bbox.x2].map(u64::from);
        (y2 - y1) * (x2 - x1)
    }
}

fn outranks(a: &Detection, b: &Detection, by_mask: bool) -> bool {
    let (aa, ab) = (area(a, by_mask), area(b, by_mask));
    aa > ab || (aa == ab && a.instance_id < b.instance_id)
}

fn persons(frame: &FrameSegmentation) -> Vec<&Detection> {
    let mut out = Vec::new();
    for d in &frame.detections {
        if &*d.class_name == "person" {
            out.push(d);
        }
    }
    out
}

/// Rank of each person: how many other persons outrank it.
pub fn oracle_ranks(frame: &FrameSegmentation, by_mask: bool) -> Vec<(usize, usize)> {
    let ps = persons(frame);
    let mut ranks: Vec<(usize, usize)> = ps
        .iter()
        .map(|a| {
            (
                a.instance_id,
                ps.iter().filter(|b| outranks(b, a, by_mask)).count(),
            )
        })
        .collect();
    ranks.sort_by_key(|r| r.1);
    ranks
}

/// Searches every subset of persons for the one of size `min(n, persons)`
/// whose members all outrank all non-members.
pub fn oracle_top_n(frame: &FrameSegmentation, n: usize, by_mask: bool) -> BTreeSet<usize> {
    let ps = persons(frame);
    let want = n.min(ps.len());
    let mut found = Vec::new();
    for subset in 0u32..(1 << ps.len()) {
        if subset.count_ones() as usize != want {
            continue;
        }
        let inside = |i: usize| subset & (1 << i) != 0;
        let dominant = (0..ps.len()).filter(|&i| inside(i)).all(|i| {
            (0..ps.len())
                .filter(|&j| !inside(j))
                .all(|j| outranks(ps[i], ps[j], by_mask))
        });
        if dominant {
            found.push(
                (0..ps.len())
                    .filter(|&i| inside(i))
                    .map(|i| ps[i].instance_id)
                    .collect(),
            );
        }
    }
    assert_eq!(found.len(), 1, "ranking is a strict total order");
    found.pop().unwrap()
}

/// `None` when some requested id is not a person in the frame.
pub fn oracle_explicit(
    frame: &FrameSegmentation,
    ids: &BTreeSet<usize>,
) -> Option<BTreeSet<usize>> {
    let ps = persons(frame);
    ids.iter()
        .all(|id| ps.iter().any(|p| p.instance_id == *id))
        .then(|| ids.clone())
}

pub fn oracle_select(
    frame: &FrameSegmentation,
    spec: &SelectionSpec,
    by_mask: bool,
) -> Option<BTreeSet<usize>> {
    match spec {
        SelectionSpec::TopN(n) => Some(oracle_top_n(frame, n.get(), by_mask)),
        SelectionSpec::ExplicitIds(ids) => oracle_explicit(frame, ids),
    }
}

pub fn naive_union(masks: &[&BinaryMask], width: u32, height: u32) -> BinaryMask {
    let mut out = BinaryMask::empty(width, height);
    for y in 0..height {
        for x in 0..width {
            if masks.iter().any(|m| m.get(x, y)) {
                out.set(x, y, true);
            }
        }
    }
    out
}

/// Per pixel: the topmost layer whose mask is set, else the background.
pub fn naive_composite(
    background: &RasterImage,
    layers: &[(&RasterImage, &BinaryMask)],
) -> RasterImage {
    let (w, h) = background.dimensions();
    let mut out = RasterImage::filled(w, h, Rgb::BLACK);
    for y in 0..h {
        for x in 0..w {
            let px = layers
                .iter()
                .rev()
                .find(|(_, m)| m.get(x, y))
                .map(|(src, _)| src.pixel(x, y))
                .unwrap_or_else(|| background.pixel(x, y));
            out.put_pixel(x, y, px);
        }
    }
    out
}

/// Column-major runs, zero run first.
pub fn naive_rle_encode(mask: &BinaryMask) -> Vec<u32> {
    let mut counts = vec![0u32];
    let mut current = false;
    for x in 0..mask.width() {
        for y in 0..mask.height() {
            let v = mask.get(x, y);
            if v != current {
                counts.push(0);
                current = v;
            }
            *counts.last_mut().unwrap() += 1;
        }
    }
    counts
}

pub fn naive_rle_decode(height: u32, width: u32, counts: &[u32]) -> BinaryMask {
    let mut mask = BinaryMask::empty(width, height);
    let mut pos = 0u64;
    for (k, &run) in counts.iter().enumerate() {
        for p in pos..pos + u64::from(run) {
            if k % 2 == 1 {
                mask.set(
                    (p / u64::from(height)) as u32,
                    (p % u64::from(height)) as u32,
                    true,
                );
            }
        }
        pos += u64::from(run);
    }
    assert_eq!(pos, u64::from(height) * u64::from(width));
    mask
}

/// The output frame computed from scratch for same-size inputs: oracle
/// selection, naive union, naive composite.
pub fn reference_frame(
    background: &RasterImage,
    sources: &[Option<(&RasterImage, &FrameSegmentation, &SelectionSpec)>],
) -> RasterImage {
    let (w, h) = background.dimensions();
    let mut unions = Vec::new();
    for (image, seg, spec) in sources.iter().flatten() {
        assert_eq!(
            image.dimensions(),
            (w, h),
            "reference frames need equal sizes"
        );
        let ids = oracle_select(seg, spec, false).expect("valid selection");
        let masks: Vec<&BinaryMask> = seg
            .detections
            .iter()
            .filter(|d| ids.contains(&d.instance_id))
            .map(|d| &d.mask)
            .collect();
        unions.push((*image, naive_union(&masks, w, h)));
    }
    let layers: Vec<(&RasterImage, &BinaryMask)> = unions.iter().map(|(i, m)| (*i, m)).collect();
    naive_composite(background, &layers)
}
