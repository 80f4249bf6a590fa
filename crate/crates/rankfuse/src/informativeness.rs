//! Per-channel informativeness scores and selection of the low channels that
//! fusion targets.
//!
//! A channel scores high when it loads heavily on the leading right singular
//! vectors: `I_c = Σ_{i≤k} σ_i² v_{i,c}²`. Summing over the full numerical
//! rank makes `I_c` equal the squared column norm, so the scores then
//! partition the squared Frobenius norm.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;
use crate::spectral::{decompose, SpectralDecomposition};

/// Per-channel informativeness scores for one feature matrix.
#[derive(Debug, Clone)]
pub struct ChannelImportanceProfile {
    scores: Vec<f64>,
    top_k: usize,
    source_dims: (usize, usize),
}

impl ChannelImportanceProfile {
    /// Score of every channel, indexed by channel.
    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    /// Number of leading singular directions the scores were summed over.
    pub fn top_k(&self) -> usize {
        self.top_k
    }

    /// (T, D) of the source matrix.
    pub fn source_dims(&self) -> (usize, usize) {
        self.source_dims
    }
}

/// How the low-informativeness channel set is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SelectionMode {
    /// The k' channels with the lowest scores, ties broken by lowest index.
    BottomCount(usize),
    /// Every channel whose score is ≤ the threshold.
    Threshold(f64),
}

/// Sorted set of channel indices targeted for blending.
#[derive(Debug, Clone, PartialEq)]
pub struct LowChannelSet {
    indices: Vec<usize>,
    selection_mode: SelectionMode,
}

impl LowChannelSet {
    /// Builds a set from explicit indices; sorts, deduplicates and checks
    /// bounds against the channel count.
    pub fn from_indices(mut indices: Vec<usize>, cols: usize) -> Result<Self> {
        indices.sort_unstable();
        indices.dedup();
        if let Some(&bad) = indices.iter().find(|&&i| i >= cols) {
            return Err(Error::IndexOutOfRange {
                what: "channel index",
                got: bad,
                min: 0,
                max: cols.saturating_sub(1),
            });
        }
        if indices.is_empty() {
            return Err(Error::InvalidArgument("channel set is empty".into()));
        }
        let selection_mode = SelectionMode::BottomCount(indices.len());
        Ok(Self {
            indices,
            selection_mode,
        })
    }

    /// Strictly increasing channel indices.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, channel: usize) -> bool {
        self.indices.binary_search(&channel).is_ok()
    }

    pub fn selection_mode(&self) -> SelectionMode {
        self.selection_mode
    }

    /// The threshold that produced this set, when threshold selection was used.
    pub fn threshold_used(&self) -> Option<f64> {
        match self.selection_mode {
            SelectionMode::Threshold(eta) => Some(eta),
            SelectionMode::BottomCount(_) => None,
        }
    }
}

/// Default fraction of channels targeted for blending.
pub const DEFAULT_LOW_RATIO: f64 = 0.10;

/// Channel count selected by a ratio: `round(ratio · D)`, at least 1.
pub fn low_count_for_ratio(cols: usize, ratio: f64) -> usize {
    ((cols as f64 * ratio).round() as usize).clamp(1, cols)
}

/// Computes `I_c = Σ_{i≤top_k} σ_i² v_{i,c}²` for every channel.
///
/// `top_k = None` sums over the full numerical rank, which makes
/// `Σ_c I_c = ‖X‖_F²` up to the rank cutoff.
pub fn channel_importance(
    x: &FeatureMatrix,
    top_k: Option<usize>,
) -> Result<ChannelImportanceProfile> {
    let dec = decompose(x)?;
    channel_importance_decomposed(&dec, top_k, (x.rows(), x.cols()))
}

/// Same as [`channel_importance`] but reuses an existing decomposition.
pub fn channel_importance_decomposed(
    dec: &SpectralDecomposition,
    top_k: Option<usize>,
    source_dims: (usize, usize),
) -> Result<ChannelImportanceProfile> {
    let rank = dec.numerical_rank();
    let top_k = top_k.unwrap_or(rank);
    if top_k < 1 || top_k > rank {
        return Err(Error::IndexOutOfRange {
            what: "top_k",
            got: top_k,
            min: 1,
            max: rank,
        });
    }
    let v = dec.right_vectors();
    let sigma = dec.singular_values();
    let cols = v.nrows();
    let mut scores = vec![0.0_f64; cols];
    for i in 0..top_k {
        let s2 = sigma[i] * sigma[i];
        for (c, score) in scores.iter_mut().enumerate() {
            let loading = v[(c, i)];
            *score += s2 * loading * loading;
        }
    }
    Ok(ChannelImportanceProfile {
        scores,
        top_k,
        source_dims,
    })
}

/// Selects the low-informativeness channels per the given mode.
pub fn select_low_channels(
    profile: &ChannelImportanceProfile,
    mode: SelectionMode,
) -> Result<LowChannelSet> {
    let d = profile.scores.len();
    let indices = match mode {
        SelectionMode::BottomCount(count) => {
            if count < 1 || count > d {
                return Err(Error::IndexOutOfRange {
                    what: "bottom count",
                    got: count,
                    min: 1,
                    max: d,
                });
            }
            let mut order: Vec<usize> = (0..d).collect();
            // Ties broken by lowest channel index: the index is the secondary key.
            order.sort_by(|&a, &b| {
                profile.scores[a]
                    .partial_cmp(&profile.scores[b])
                    .expect("scores are finite")
                    .then(a.cmp(&b))
            });
            let mut selected: Vec<usize> = order.into_iter().take(count).collect();
            selected.sort_unstable();
            selected
        }
        SelectionMode::Threshold(eta) => {
            if !eta.is_finite() || eta < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "threshold must be a nonnegative finite number, got {eta}"
                )));
            }
            (0..d).filter(|&c| profile.scores[c] <= eta).collect()
        }
    };
    Ok(LowChannelSet {
        indices,
        selection_mode: mode,
    })
}

/// Largest admissible informativeness threshold for the subspace-preservation
/// condition: `η_max = min(δ_k / (3√n), ε / (4nβ))²` for `n = |C_low|`.
pub fn eta_feasibility_bound(
    delta_k: f64,
    c_low_size: usize,
    epsilon: f64,
    beta: f64,
) -> Result<f64> {
    if delta_k <= 0.0 || delta_k.is_nan() {
        return Err(Error::InvalidArgument(format!(
            "delta_k must be positive, got {delta_k}"
        )));
    }
    if c_low_size < 1 {
        return Err(Error::InvalidArgument(
            "c_low_size must be at least 1".into(),
        ));
    }
    if epsilon <= 0.0 || epsilon.is_nan() {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if beta <= 0.0 || beta.is_nan() {
        return Err(Error::InvalidArgument(format!(
            "beta must be positive, got {beta}"
        )));
    }
    let n = c_low_size as f64;
    let bound = (delta_k / (3.0 * n.sqrt())).min(epsilon / (4.0 * n * beta));
    Ok(bound * bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fm(rows: usize, cols: usize, values: &[f64]) -> FeatureMatrix {
        FeatureMatrix::from_row_major(rows, cols, values).unwrap()
    }

    fn profile_from_scores(scores: Vec<f64>) -> ChannelImportanceProfile {
        ChannelImportanceProfile {
            top_k: 1,
            source_dims: (1, scores.len()),
            scores,
        }
    }

    #[test]
    fn diagonal_importance_is_squared_sigma() {
        let x = fm(2, 2, &[2.0, 0.0, 0.0, 1.0]);
        let profile = channel_importance(&x, Some(2)).unwrap();
        assert_relative_eq!(profile.scores()[0], 4.0, epsilon = 1e-12);
        assert_relative_eq!(profile.scores()[1], 1.0, epsilon = 1e-12);
        assert_eq!(profile.top_k(), 2);
        assert_eq!(profile.source_dims(), (2, 2));
    }

    #[test]
    fn identical_columns_score_identically() {
        let x = fm(3, 3, &[1.0, 1.0, 1.0, 2.0, 2.0, 2.0, -1.0, -1.0, -1.0]);
        let profile = channel_importance(&x, None).unwrap();
        let first = profile.scores()[0];
        for &s in profile.scores() {
            assert_relative_eq!(s, first, epsilon = 1e-10);
        }
    }

    #[test]
    fn top_k_out_of_range_is_rejected() {
        let x = fm(2, 2, &[2.0, 0.0, 0.0, 1.0]);
        assert!(channel_importance(&x, Some(0)).is_err());
        assert!(channel_importance(&x, Some(3)).is_err());
    }

    #[test]
    fn bottom_count_selects_lowest_scores() {
        let profile = profile_from_scores(vec![4.0, 1.0, 3.0, 2.0]);
        let set = select_low_channels(&profile, SelectionMode::BottomCount(2)).unwrap();
        assert_eq!(set.indices(), &[1, 3]);
        assert_eq!(set.threshold_used(), None);
    }

    #[test]
    fn ties_break_toward_lowest_index() {
        let profile = profile_from_scores(vec![1.0, 1.0, 2.0]);
        let set = select_low_channels(&profile, SelectionMode::BottomCount(1)).unwrap();
        assert_eq!(set.indices(), &[0]);
    }

    #[test]
    fn threshold_selection_is_inclusive() {
        let profile = profile_from_scores(vec![0.5, 3.0, 0.2]);
        let set = select_low_channels(&profile, SelectionMode::Threshold(1.0)).unwrap();
        assert_eq!(set.indices(), &[0, 2]);
        assert_eq!(set.threshold_used(), Some(1.0));
    }

    #[test]
    fn bottom_count_bounds_are_enforced() {
        let profile = profile_from_scores(vec![1.0, 2.0]);
        assert!(select_low_channels(&profile, SelectionMode::BottomCount(0)).is_err());
        assert!(select_low_channels(&profile, SelectionMode::BottomCount(3)).is_err());
    }

    #[test]
    fn eta_bound_arithmetic() {
        assert_relative_eq!(
            eta_feasibility_bound(3.0, 1, 4.0, 1.0).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            eta_feasibility_bound(6.0, 4, 16.0, 1.0).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        // min(0.9/(3·3), 0.36/(4·9·0.5))² = min(0.1, 0.02)² = 4e-4.
        assert_relative_eq!(
            eta_feasibility_bound(0.9, 9, 0.36, 0.5).unwrap(),
            4e-4,
            epsilon = 1e-15
        );
        assert!(eta_feasibility_bound(0.0, 1, 1.0, 1.0).is_err());
        assert!(eta_feasibility_bound(1.0, 0, 1.0, 1.0).is_err());
        assert!(eta_feasibility_bound(1.0, 1, -1.0, 1.0).is_err());
        assert!(eta_feasibility_bound(1.0, 1, 1.0, 0.0).is_err());
    }

    #[test]
    fn ratio_count_defaults() {
        assert_eq!(low_count_for_ratio(16, DEFAULT_LOW_RATIO), 2);
        assert_eq!(low_count_for_ratio(128, DEFAULT_LOW_RATIO), 13);
        assert_eq!(low_count_for_ratio(3, DEFAULT_LOW_RATIO), 1);
        assert_eq!(low_count_for_ratio(10, 0.2), 2);
        assert_eq!(low_count_for_ratio(10, 1.0), 10);
    }
}
