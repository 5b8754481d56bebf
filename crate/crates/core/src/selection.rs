//! Choosing which persons to extract from a frame.
//!
//! Persons are ranked by bounding-box area, largest first, with ties going
//! to the lower instance id. A selection then keeps either the first `n`
//! ranked persons or an explicit list of ids.

use std::collections::BTreeSet;
use std::fmt;
use std::num::NonZeroUsize;
use std::str::FromStr;

use crate::bbox::bbox_area;
use crate::detection::Detection;
use crate::error::SelectionError;
use crate::provider::FrameSegmentation;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SelectionSpec {
    /// The `n` largest persons.
    TopN(NonZeroUsize),
    /// Exactly these instance ids; every id must be a person in the frame.
    ExplicitIds(BTreeSet<usize>),
}

impl SelectionSpec {
    pub fn top(n: usize) -> Option<Self> {
        NonZeroUsize::new(n).map(SelectionSpec::TopN)
    }

    pub fn ids(ids: impl IntoIterator<Item = usize>) -> Option<Self> {
        let ids: BTreeSet<usize> = ids.into_iter().collect();
        (!ids.is_empty()).then_some(SelectionSpec::ExplicitIds(ids))
    }
}

impl Default for SelectionSpec {
    fn default() -> Self {
        SelectionSpec::TopN(NonZeroUsize::MIN)
    }
}

impl fmt::Display for SelectionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SelectionSpec::TopN(n) => write!(f, "top:{n}"),
            SelectionSpec::ExplicitIds(ids) => {
                let ids: Vec<String> = ids.iter().map(ToString::to_string).collect();
                write!(f, "ids:{}", ids.join(","))
            }
        }
    }
}

impl FromStr for SelectionSpec {
    type Err = String;

    /// Parses `top:<n>` or `ids:<id>,<id>,...`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(n) = s.strip_prefix("top:") {
            let n: usize = n
                .parse()
                .map_err(|_| format!("`{s}`: expected top:<n> with n a positive integer"))?;
            SelectionSpec::top(n).ok_or_else(|| format!("`{s}`: n must be at least 1"))
        } else if let Some(list) = s.strip_prefix("ids:") {
            let ids = list
                .split(',')
                .map(|id| id.trim().parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| {
                    format!("`{s}`: expected ids:<id>,<id>,... with non-negative integers")
                })?;
            SelectionSpec::ids(ids).ok_or_else(|| format!("`{s}`: id list is empty"))
        } else {
            Err(format!("`{s}`: expected top:<n> or ids:<list>"))
        }
    }
}

/// How a person's size is measured for ranking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum AreaMetric {
    /// `(y2 - y1) * (x2 - x1)` of the bounding box.
    #[default]
    BoundingBox,
    /// Number of set mask pixels.
    MaskPixels,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RankedPerson {
    pub instance_id: usize,
    pub area: u64,
    pub rank: usize,
}

/// Outcome of [`select`]: the chosen ids plus any warnings worth surfacing.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Selection {
    pub ids: BTreeSet<usize>,
    pub warnings: Vec<String>,
}

/// Person detections of `frame`, in their original order.
pub fn filter_persons(frame: &FrameSegmentation) -> Vec<&Detection> {
    frame.detections.iter().filter(|d| d.is_person()).collect()
}

pub fn rank_by_area(persons: &[&Detection], metric: AreaMetric) -> Vec<RankedPerson> {
    let mut measured: Vec<(usize, u64)> = persons
        .iter()
        .map(|d| {
            let area = match metric {
                AreaMetric::BoundingBox => bbox_area(&d.bbox),
                AreaMetric::MaskPixels => d.mask.count_ones(),
            };
            (d.instance_id, area)
        })
        .collect();
    measured.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    measured
        .into_iter()
        .enumerate()
        .map(|(rank, (instance_id, area))| RankedPerson {
            instance_id,
            area,
            rank,
        })
        .collect()
}

pub fn select(ranked: &[RankedPerson], spec: &SelectionSpec) -> Result<Selection, SelectionError> {
    match spec {
        SelectionSpec::TopN(n) => {
            let n = n.get();
            let mut warnings = Vec::new();
            if n > ranked.len() {
                warnings.push(format!(
                    "requested top {n} persons but only {} present; using all of them",
                    ranked.len()
                ));
            }
            Ok(Selection {
                ids: ranked.iter().take(n).map(|p| p.instance_id).collect(),
                warnings,
            })
        }
        SelectionSpec::ExplicitIds(ids) => {
            let present: BTreeSet<usize> = ranked.iter().map(|p| p.instance_id).collect();
            if let Some(&id) = ids.iter().find(|id| !present.contains(id)) {
                return Err(SelectionError::UnknownId {
                    id,
                    present: present.into_iter().collect(),
                });
            }
            Ok(Selection {
                ids: ids.clone(),
                warnings: Vec::new(),
            })
        }
    }
}

/// Filter, rank and select in one step.
pub fn select_persons(
    frame: &FrameSegmentation,
    spec: &SelectionSpec,
    metric: AreaMetric,
) -> Result<Selection, SelectionError> {
    let persons = filter_persons(frame);
    select(&rank_by_area(&persons, metric), spec)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::bbox::BoundingBox;
    use crate::mask::BinaryMask;

    fn det(instance_id: usize, class: &str, h: u32, w: u32) -> Detection {
        Detection {
            instance_id,
            class_id: if class == "person" { 1 } else { 18 },
            class_name: Arc::from(class),
            score: 0.9,
            bbox: BoundingBox::new(0, 0, h, w).unwrap(),
            mask: BinaryMask::empty(200, 200),
        }
    }

    fn frame(dets: Vec<Detection>) -> FrameSegmentation {
        FrameSegmentation {
            frame_index: 0,
            detections: dets,
        }
    }

    #[test]
    fn filter_keeps_persons_in_order() {
        let f = frame(vec![
            det(0, "person", 1, 1),
            det(1, "dog", 1, 1),
            det(2, "person", 1, 1),
        ]);
        let ids: Vec<_> = filter_persons(&f).iter().map(|d| d.instance_id).collect();
        assert_eq!(ids, vec![0, 2]);
        assert!(filter_persons(&frame(vec![])).is_empty());
        assert!(
            filter_persons(&frame(vec![det(0, "dog", 1, 1), det(1, "horse", 1, 1)])).is_empty()
        );
    }

    #[test]
    fn ranking_breaks_ties_by_id() {
        let a = det(0, "person", 100, 50);
        let b = det(1, "person", 100, 80);
        let c = det(2, "person", 80, 100);
        let ranked = rank_by_area(&[&a, &b, &c], AreaMetric::BoundingBox);
        let order: Vec<_> = ranked.iter().map(|p| p.instance_id).collect();
        assert_eq!(order, vec![1, 2, 0]);
        assert_eq!(ranked[2].area, 5000);
        assert_eq!(
            ranked.iter().map(|p| p.rank).collect::<Vec<_>>(),
            vec![0, 1, 2]
        );

        let d3 = det(3, "person", 10, 10);
        let d1 = det(1, "person", 10, 10);
        let order: Vec<_> = rank_by_area(&[&d3, &d1], AreaMetric::BoundingBox)
            .iter()
            .map(|p| p.instance_id)
            .collect();
        assert_eq!(order, vec![1, 3]);
    }

    #[test]
    fn mask_metric_uses_pixel_counts() {
        let mut big_box = det(0, "person", 100, 100);
        big_box.mask = BinaryMask::from_fn(200, 200, |x, y| x < 5 && y < 5);
        let mut small_box = det(1, "person", 10, 10);
        small_box.mask = BinaryMask::from_fn(200, 200, |x, y| x < 10 && y < 10);
        let order: Vec<_> = rank_by_area(&[&big_box, &small_box], AreaMetric::MaskPixels)
            .iter()
            .map(|p| p.instance_id)
            .collect();
        assert_eq!(order, vec![1, 0]);
    }

    fn ranked(ids: &[usize]) -> Vec<RankedPerson> {
        ids.iter()
            .enumerate()
            .map(|(rank, &instance_id)| RankedPerson {
                instance_id,
                area: 1000 - rank as u64,
                rank,
            })
            .collect()
    }

    #[test]
    fn top_n_takes_prefix() {
        let s = select(&ranked(&[1, 2, 0]), &SelectionSpec::top(2).unwrap()).unwrap();
        assert_eq!(s.ids, BTreeSet::from([1, 2]));
        assert!(s.warnings.is_empty());
    }

    #[test]
    fn top_n_clamps_with_warning() {
        let s = select(&ranked(&[1]), &SelectionSpec::top(5).unwrap()).unwrap();
        assert_eq!(s.ids, BTreeSet::from([1]));
        assert_eq!(s.warnings.len(), 1);
    }

    #[test]
    fn explicit_unknown_id_is_an_error() {
        let err = select(&ranked(&[1, 2]), &SelectionSpec::ids([7]).unwrap()).unwrap_err();
        assert_eq!(
            err,
            SelectionError::UnknownId {
                id: 7,
                present: vec![1, 2]
            }
        );
        assert!(err.to_string().contains('7'));
        let ok = select(&ranked(&[1, 2]), &SelectionSpec::ids([2]).unwrap()).unwrap();
        assert_eq!(ok.ids, BTreeSet::from([2]));
    }

    #[test]
    fn explicit_non_person_id_is_an_error() {
        let f = frame(vec![det(0, "person", 5, 5), det(1, "dog", 50, 50)]);
        let err = select_persons(
            &f,
            &SelectionSpec::ids([1]).unwrap(),
            AreaMetric::BoundingBox,
        );
        assert!(matches!(err, Err(SelectionError::UnknownId { id: 1, .. })));
    }

    #[test]
    fn spec_parsing() {
        assert_eq!(
            "top:2".parse::<SelectionSpec>().unwrap(),
            SelectionSpec::top(2).unwrap()
        );
        assert_eq!(
            "ids:1,4".parse::<SelectionSpec>().unwrap(),
            SelectionSpec::ids([1, 4]).unwrap()
        );
        assert!("top:0".parse::<SelectionSpec>().is_err());
        assert!("ids:".parse::<SelectionSpec>().is_err());
        assert!("largest".parse::<SelectionSpec>().is_err());
        for s in ["top:3", "ids:0,2,9"] {
            assert_eq!(s.parse::<SelectionSpec>().unwrap().to_string(), s);
        }
    }
}
