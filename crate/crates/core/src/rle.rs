//! Uncompressed COCO-style run-length encoding for [`BinaryMask`].
//!
//! Runs alternate 0, 1, 0, ... starting with a (possibly empty) run of zeros,
//! and pixels are visited column-major: every row of column 0, then column 1.

use serde::{Deserialize, Serialize};

use crate::error::RleError;
use crate::mask::BinaryMask;

/// Run lengths for one mask together with its `(height, width)` size.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RleCounts {
    /// `[height, width]`, matching the interchange format.
    pub size: [u32; 2],
    pub counts: Vec<u32>,
}

impl RleCounts {
    pub fn new(height: u32, width: u32, counts: Vec<u32>) -> Self {
        Self {
            size: [height, width],
            counts,
        }
    }

    pub fn height(&self) -> u32 {
        self.size[0]
    }

    pub fn width(&self) -> u32 {
        self.size[1]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| u64::from(c)).sum()
    }

    /// Number of set pixels, read straight off the odd runs.
    pub fn ones(&self) -> u64 {
        self.counts
            .iter()
            .skip(1)
            .step_by(2)
            .map(|&c| u64::from(c))
            .sum()
    }

    /// Checks the counts cover exactly `height * width` pixels.
    pub fn validate(&self) -> Result<(), RleError> {
        let (height, width) = (self.height(), self.width());
        if height == 0 || width == 0 {
            return Err(RleError::EmptySize { height, width });
        }
        let expected = u64::from(height) * u64::from(width);
        let actual = self.total();
        if actual != expected {
            return Err(RleError::SumMismatch {
                expected,
                actual,
                height,
                width,
            });
        }
        Ok(())
    }

    /// True for the form [`rle_encode`] produces: no empty runs apart from a
    /// leading zero-run, and that one only when the first pixel is set.
    pub fn is_canonical(&self) -> bool {
        match self.counts.split_first() {
            None => false,
            Some((&first, rest)) => rest.iter().all(|&c| c > 0) && (first > 0 || !rest.is_empty()),
        }
    }
}

/// Expands run lengths into a mask.
pub fn rle_decode(rle: &RleCounts) -> Result<BinaryMask, RleError> {
    rle.validate()?;
    let (height, width) = (rle.height(), rle.width());
    let h = height as usize;
    let mut mask = BinaryMask::empty(width, height);
    let mut pos = 0usize;
    for (i, &run) in rle.counts.iter().enumerate() {
        let run = run as usize;
        if i % 2 == 1 {
            for k in pos..pos + run {
                mask.set((k / h) as u32, (k % h) as u32, true);
            }
        }
        pos += run;
    }
    Ok(mask)
}

/// Canonical run-length encoding of `mask`.
pub fn rle_encode(mask: &BinaryMask) -> RleCounts {
    let (width, height) = mask.dimensions();
    let mut counts = Vec::new();
    let mut current = false;
    let mut run = 0u32;
    for x in 0..width {
        for y in 0..height {
            let bit = mask.get(x, y);
            if bit != current {
                counts.push(run);
                run = 0;
                current = bit;
            }
            run += 1;
        }
    }
    counts.push(run);
    RleCounts::new(height, width, counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hand_decoded_vectors() {
        let m = rle_decode(&RleCounts::new(2, 2, vec![1, 2, 1])).unwrap();
        assert_eq!(m.to_rows(), vec![vec![0, 1], vec![1, 0]]);
        let m = rle_decode(&RleCounts::new(2, 2, vec![4])).unwrap();
        assert_eq!(m, BinaryMask::empty(2, 2));
        let m = rle_decode(&RleCounts::new(2, 2, vec![0, 4])).unwrap();
        assert_eq!(m, BinaryMask::full(2, 2));
    }

    #[test]
    fn column_major_traversal() {
        // 2 rows x 3 cols; first 3 pixels column-major are (0,0),(1,0),(0,1)
        let m = rle_decode(&RleCounts::new(2, 3, vec![0, 3, 3])).unwrap();
        assert_eq!(m.to_rows(), vec![vec![1, 1, 0], vec![1, 0, 0]]);
    }

    #[test]
    fn encode_uniform_masks() {
        assert_eq!(rle_encode(&BinaryMask::empty(3, 3)).counts, vec![9]);
        assert_eq!(rle_encode(&BinaryMask::full(3, 3)).counts, vec![0, 9]);
        assert_eq!(rle_encode(&BinaryMask::full(3, 3)).size, [3, 3]);
    }

    #[test]
    fn sum_mismatch_reports_totals() {
        let err = rle_decode(&RleCounts::new(2, 2, vec![1, 2])).unwrap_err();
        assert_eq!(
            err,
            RleError::SumMismatch {
                expected: 4,
                actual: 3,
                height: 2,
                width: 2
            }
        );
        assert!(err.to_string().contains("expected 4"));
    }

    #[test]
    fn zero_sized_rejected() {
        assert!(matches!(
            rle_decode(&RleCounts::new(0, 2, vec![])),
            Err(RleError::EmptySize { .. })
        ));
    }

    #[test]
    fn ones_counts_odd_runs() {
        assert_eq!(RleCounts::new(2, 3, vec![1, 2, 1, 2]).ones(), 4);
    }

    fn arb_mask() -> impl Strategy<Value = BinaryMask> {
        (1u32..24, 1u32..24).prop_flat_map(|(w, h)| {
            proptest::collection::vec(any::<bool>(), (w * h) as usize)
                .prop_map(move |v| BinaryMask::from_fn(w, h, |x, y| v[(y * w + x) as usize]))
        })
    }

    proptest! {
        #[test]
        fn round_trip(m in arb_mask()) {
            let rle = rle_encode(&m);
            prop_assert!(rle.is_canonical());
            prop_assert_eq!(rle.ones(), m.count_ones());
            prop_assert_eq!(rle_decode(&rle).unwrap(), m);
        }

        #[test]
        fn canonical_counts_round_trip(
            first in 0u32..5,
            rest in proptest::collection::vec(1u32..6, 0..10),
            height in 1u32..4,
        ) {
            let mut counts = vec![first];
            counts.extend(rest);
            let total: u32 = counts.iter().sum();
            prop_assume!(total > 0);
            // pad so the total is a multiple of the height
            let pad = (height - total % height) % height;
            if pad > 0 {
                if counts.len() % 2 == 1 {
                    *counts.last_mut().unwrap() += pad;
                } else {
                    counts.push(pad);
                }
            }
            let total: u32 = counts.iter().sum();
            let rle = RleCounts::new(height, total / height, counts);
            prop_assume!(rle.is_canonical());
            prop_assert_eq!(rle_encode(&rle_decode(&rle).unwrap()), rle);
        }
    }
}
