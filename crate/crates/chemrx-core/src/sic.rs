//! Reference successive-interference-cancellation detector.
//!
//! Detection walks a binary threshold tree: stage `i` compares the (single)
//! received count against a threshold selected by the bits already decided,
//! emits bit 1 when the count reaches the threshold, and descends. This
//! non-chemical rule is the ground truth that chemical decisions are graded
//! against, and doubles as the analytical baseline detector.

use std::collections::BTreeMap;

use thiserror::Error;

/// Prefix-indexed thresholds: `levels[i]` holds the `2^i` thresholds of
/// stage `i + 1`, ordered by the already-decided prefix read as a binary
/// number with the first stage's bit most significant.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ThresholdTree {
    levels: Vec<Vec<f64>>,
}

/// Structural error in a threshold tree.
#[derive(Debug, Error)]
pub enum TreeError {
    #[error("tree has no stages")]
    Empty,
    #[error("stage {stage} has {got} thresholds, expected {expected}")]
    WrongArity {
        stage: usize,
        expected: usize,
        got: usize,
    },
    #[error("stage {stage} threshold {index} is negative")]
    NegativeThreshold { stage: usize, index: usize },
}

impl ThresholdTree {
    /// Builds a tree from per-stage threshold lists, validating the
    /// one-threshold-per-prefix shape.
    pub fn new(levels: Vec<Vec<f64>>) -> Result<Self, TreeError> {
        if levels.is_empty() {
            return Err(TreeError::Empty);
        }
        for (i, level) in levels.iter().enumerate() {
            let expected = 1usize << i;
            if level.len() != expected {
                return Err(TreeError::WrongArity {
                    stage: i + 1,
                    expected,
                    got: level.len(),
                });
            }
            for (j, &tau) in level.iter().enumerate() {
                if tau < 0.0 {
                    return Err(TreeError::NegativeThreshold { stage: i + 1, index: j });
                }
            }
        }
        Ok(Self { levels })
    }

    /// Reference two-transmitter thresholds.
    #[must_use]
    pub fn two_tx_reference() -> Self {
        Self::new(vec![vec![231.0], vec![78.0, 386.0]]).expect("static shape")
    }

    /// Reference three-transmitter thresholds.
    #[must_use]
    pub fn three_tx_reference() -> Self {
        Self::new(vec![
            vec![267.0],
            vec![114.0, 422.0],
            vec![35.0, 192.0, 343.0, 500.0],
        ])
        .expect("static shape")
    }

    /// Number of detection stages (one per transmitter).
    #[must_use]
    pub fn n_stages(&self) -> usize {
        self.levels.len()
    }

    /// Threshold used at `stage` (zero-based) after deciding `prefix` (bits
    /// packed with the first stage most significant).
    #[must_use]
    pub fn threshold(&self, stage: usize, prefix: usize) -> f64 {
        self.levels[stage][prefix]
    }

    /// All stages' threshold lists.
    #[must_use]
    pub fn levels(&self) -> &[Vec<f64>] {
        &self.levels
    }
}

/// Runs the threshold-tree detection on one received count. Equality with a
/// threshold decides 1.
#[must_use]
pub fn sic_detect(n_s: f64, tree: &ThresholdTree) -> Vec<u8> {
    debug_assert!(n_s >= 0.0, "received counts are non-negative");
    let mut bits = Vec::with_capacity(tree.n_stages());
    let mut prefix = 0usize;
    for stage in 0..tree.n_stages() {
        let bit = u8::from(n_s >= tree.threshold(stage, prefix));
        prefix = (prefix << 1) | usize::from(bit);
        bits.push(bit);
    }
    bits
}

/// Expected symbol vector for every integer count in `lo..=hi`: the
/// correctness oracle for chemical trajectories.
#[must_use]
pub fn ground_truth_labels(tree: &ThresholdTree, lo: u64, hi: u64) -> BTreeMap<u64, Vec<u8>> {
    (lo..=hi)
        .map(|n| (n, sic_detect(n as f64, tree)))
        .collect()
}
