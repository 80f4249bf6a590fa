//! Cross-modality channel blending and blend-coefficient optimization.
//!
//! The fuser replaces each low-informativeness channel of one matrix with a
//! convex combination of that channel and the same channel of the other
//! modality. `α_c = 1` keeps the original column bit-for-bit, `α_c = 0` swaps
//! it outright. Fusing both directions reads the *original* matrices, so the
//! two results never contaminate each other.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::informativeness::LowChannelSet;
use crate::matrix::FeatureMatrix;
use crate::spectral::effective_rank;

/// Which operand the blend coefficient weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AlphaConvention {
    /// `x'_c = α_c x_c + (1 − α_c) y_c` — α weights the channel's own modality.
    #[default]
    OwnChannel,
    /// `x'_c = α_c y_c + (1 − α_c) x_c` — the mirrored form.
    OtherChannel,
}

/// A low-channel set together with one blend coefficient per selected channel.
#[derive(Debug, Clone)]
pub struct BlendSpec {
    low_set: LowChannelSet,
    alphas: BTreeMap<usize, f64>,
}

impl BlendSpec {
    /// One coefficient per channel of the set, in index order.
    pub fn new(low_set: LowChannelSet, coefficients: &[f64]) -> Result<Self> {
        if coefficients.len() != low_set.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} blend coefficients, got {}",
                low_set.len(),
                coefficients.len()
            )));
        }
        let mut alphas = BTreeMap::new();
        for (&channel, &alpha) in low_set.indices().iter().zip(coefficients) {
            if !(0.0..=1.0).contains(&alpha) || alpha.is_nan() {
                return Err(Error::InvalidAlpha {
                    channel,
                    value: alpha,
                });
            }
            alphas.insert(channel, alpha);
        }
        Ok(Self { low_set, alphas })
    }

    /// The same coefficient for every selected channel.
    pub fn uniform(low_set: LowChannelSet, alpha: f64) -> Result<Self> {
        let coefficients = vec![alpha; low_set.len()];
        Self::new(low_set, &coefficients)
    }

    /// Coefficients drawn independently from U[0, 1), seeded.
    pub fn random_uniform(low_set: LowChannelSet, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coefficients: Vec<f64> = (0..low_set.len()).map(|_| rng.gen::<f64>()).collect();
        Self::new(low_set, &coefficients).expect("uniform draws lie in [0, 1)")
    }

    pub fn low_set(&self) -> &LowChannelSet {
        &self.low_set
    }

    /// α for a selected channel.
    pub fn alpha(&self, channel: usize) -> Option<f64> {
        self.alphas.get(&channel).copied()
    }

    /// Coefficients in channel-index order.
    pub fn coefficients(&self) -> Vec<f64> {
        self.alphas.values().copied().collect()
    }
}

/// Outcome of blending one matrix with another.
#[derive(Debug, Clone)]
pub struct FusionResult {
    pub fused: FeatureMatrix,
    /// The update Δ = fused − original; zero outside the low channels.
    pub delta: FeatureMatrix,
    pub erank_before: f64,
    pub erank_after: f64,
    pub erank_gain: f64,
}

fn blend_columns(
    x: &FeatureMatrix,
    y: &FeatureMatrix,
    spec: &BlendSpec,
    convention: AlphaConvention,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    x.same_dims(y)?;
    let cols = x.cols();
    if let Some(&bad) = spec.low_set.indices().iter().find(|&&c| c >= cols) {
        return Err(Error::IndexOutOfRange {
            what: "channel index",
            got: bad,
            min: 0,
            max: cols - 1,
        });
    }

    let mut fused = x.as_dmatrix().clone();
    let mut delta = DMatrix::zeros(x.rows(), cols);
    for (&c, &alpha) in &spec.alphas {
        let own_weight = match convention {
            AlphaConvention::OwnChannel => alpha,
            AlphaConvention::OtherChannel => 1.0 - alpha,
        };
        // Endpoints copy a column verbatim so identity and swap are exact.
        if own_weight == 1.0 {
            continue;
        }
        if own_weight == 0.0 {
            fused.set_column(c, &y.as_dmatrix().column(c));
        } else {
            let mixed =
                x.as_dmatrix().column(c) * own_weight + y.as_dmatrix().column(c) * (1.0 - own_weight);
            fused.set_column(c, &mixed);
        }
        let diff = fused.column(c) - x.as_dmatrix().column(c);
        delta.set_column(c, &diff);
    }
    Ok((fused, delta))
}

/// Blends `y`'s channels into `x` on the blend spec's low set, using the
/// own-channel convention.
pub fn blend(x: &FeatureMatrix, y: &FeatureMatrix, spec: &BlendSpec) -> Result<FusionResult> {
    blend_with_convention(x, y, spec, AlphaConvention::OwnChannel)
}

/// [`blend`] with an explicit coefficient convention.
pub fn blend_with_convention(
    x: &FeatureMatrix,
    y: &FeatureMatrix,
    spec: &BlendSpec,
    convention: AlphaConvention,
) -> Result<FusionResult> {
    let (fused, delta) = blend_columns(x, y, spec, convention)?;
    let fused = FeatureMatrix::from_dmatrix(fused)?;
    let delta = FeatureMatrix::from_dmatrix(delta).unwrap_or_else(|_| {
        // Δ of two finite matrices is finite; the all-zero Δ is fine too.
        unreachable!("delta of finite matrices is finite")
    });
    let erank_before = effective_rank(x)?.effective_rank();
    let erank_after = effective_rank(&fused)?.effective_rank();
    Ok(FusionResult {
        fused,
        delta,
        erank_before,
        erank_after,
        erank_gain: erank_after - erank_before,
    })
}

/// Fuses in both directions, each reading the original other matrix.
pub fn symmetric_fuse(
    a: &FeatureMatrix,
    b: &FeatureMatrix,
    spec_a: &BlendSpec,
    spec_b: &BlendSpec,
) -> Result<(FusionResult, FusionResult)> {
    let a_fused = blend(a, b, spec_a)?;
    let b_fused = blend(b, a, spec_b)?;
    Ok((a_fused, b_fused))
}

/// Effective-rank gains of two fused matrices over their originals.
pub fn erank_gain_pair(
    a: &FeatureMatrix,
    b: &FeatureMatrix,
    fused_a: &FeatureMatrix,
    fused_b: &FeatureMatrix,
) -> Result<(f64, f64)> {
    let gain_a = effective_rank(fused_a)?.effective_rank() - effective_rank(a)?.effective_rank();
    let gain_b = effective_rank(fused_b)?.effective_rank() - effective_rank(b)?.effective_rank();
    Ok((gain_a, gain_b))
}

/// Harmonic mean of two effective-rank gains: `2ab/(a+b)` after clamping
/// negatives to zero. Zero whenever either clamped gain is zero, so one-sided
/// improvements score nothing.
pub fn harmonic_mean_gain(delta_a: f64, delta_b: f64) -> f64 {
    let a = delta_a.max(0.0);
    let b = delta_b.max(0.0);
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    2.0 * a * b / (a + b)
}

/// Settings for [`optimize_blend`].
#[derive(Debug, Clone, Copy)]
pub struct OptimizerConfig {
    /// Seed for the uniform-random α initialization.
    pub seed: u64,
    pub iterations: usize,
    pub learning_rate: f64,
    /// Central finite-difference step for the ascent gradient.
    pub fd_step: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            iterations: 200,
            learning_rate: 0.05,
            fd_step: 1e-4,
        }
    }
}

/// Result of the blend-coefficient search.
#[derive(Debug, Clone)]
pub struct BlendOptimization {
    pub spec: BlendSpec,
    /// Effective rank of the fused matrix at the returned coefficients.
    pub objective: f64,
    /// Effective rank at the random initialization.
    pub initial_objective: f64,
    pub iterations_run: usize,
    /// Set when the search ended away from a stationary point.
    pub warning: Option<String>,
}

/// Maximizes the fused effective rank over the blend coefficients by
/// projected gradient ascent on the box [0, 1]^{|C_low|}.
///
/// The returned coefficients are the best visited, so the objective never
/// falls below the initialization.
pub fn optimize_blend(
    x: &FeatureMatrix,
    y: &FeatureMatrix,
    low_set: &LowChannelSet,
    config: &OptimizerConfig,
) -> Result<BlendOptimization> {
    x.same_dims(y)?;
    if low_set.is_empty() {
        return Err(Error::InvalidArgument("low channel set is empty".into()));
    }

    let objective = |alphas: &[f64]| -> Result<f64> {
        let spec = BlendSpec::new(low_set.clone(), alphas)?;
        let (fused, _) = blend_columns(x, y, &spec, AlphaConvention::OwnChannel)?;
        Ok(effective_rank(&FeatureMatrix::from_dmatrix(fused)?)?.effective_rank())
    };

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = low_set.len();
    let mut alphas: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();

    let initial_objective = objective(&alphas)?;
    let mut best_alphas = alphas.clone();
    let mut best_value = initial_objective;
    let mut gradient = vec![0.0_f64; n];

    for _ in 0..config.iterations {
        for i in 0..n {
            let center = alphas[i];
            let hi = (center + config.fd_step).min(1.0);
            let lo = (center - config.fd_step).max(0.0);
            let mut probe = alphas.clone();
            probe[i] = hi;
            let f_hi = objective(&probe)?;
            probe[i] = lo;
            let f_lo = objective(&probe)?;
            gradient[i] = if hi > lo { (f_hi - f_lo) / (hi - lo) } else { 0.0 };
        }
        for i in 0..n {
            alphas[i] = (alphas[i] + config.learning_rate * gradient[i]).clamp(0.0, 1.0);
        }
        let value = objective(&alphas)?;
        if value > best_value {
            best_value = value;
            best_alphas = alphas.clone();
        }
    }

    // Stationarity check on the final iterate: a coordinate pinned at a bound
    // with the gradient pointing outward is already optimal there.
    let stalled_gradient = gradient
        .iter()
        .zip(&alphas)
        .map(|(&g, &a)| {
            if (a >= 1.0 && g > 0.0) || (a <= 0.0 && g < 0.0) {
                0.0
            } else {
                g.abs()
            }
        })
        .fold(0.0_f64, f64::max);
    let warning = (stalled_gradient > 1e-4).then(|| {
        format!(
            "projected gradient {:.3e} after {} iterations; objective may not be stationary",
            stalled_gradient, config.iterations
        )
    });

    Ok(BlendOptimization {
        spec: BlendSpec::new(low_set.clone(), &best_alphas)?,
        objective: best_value,
        initial_objective,
        iterations_run: config.iterations,
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fm(rows: usize, cols: usize, values: &[f64]) -> FeatureMatrix {
        FeatureMatrix::from_row_major(rows, cols, values).unwrap()
    }

    fn low(indices: &[usize], cols: usize) -> LowChannelSet {
        LowChannelSet::from_indices(indices.to_vec(), cols).unwrap()
    }

    #[test]
    fn alpha_one_is_the_identity() {
        let x = fm(2, 3, &[1.0, -0.0, 3.0, 4.0, 5.0, 6.0]);
        let y = fm(2, 3, &[9.0, 8.0, 7.0, 6.0, 5.0, 4.0]);
        let spec = BlendSpec::uniform(low(&[0, 2], 3), 1.0).unwrap();
        let result = blend(&x, &y, &spec).unwrap();
        // Bitwise equality, including the negative zero.
        assert_eq!(result.fused.to_row_major(), x.to_row_major());
        assert!(result.delta.is_zero());
        assert_relative_eq!(result.erank_gain, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn alpha_zero_swaps_low_channels_exactly() {
        let x = fm(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let y = fm(2, 3, &[9.0, 8.0, 7.0, 6.0, 5.0, 4.0]);
        let spec = BlendSpec::uniform(low(&[1], 3), 0.0).unwrap();
        let result = blend(&x, &y, &spec).unwrap();
        assert_eq!(result.fused.get(0, 1), 8.0);
        assert_eq!(result.fused.get(1, 1), 5.0);
        // Other channels untouched.
        assert_eq!(result.fused.get(0, 0), 1.0);
        assert_eq!(result.fused.get(0, 2), 3.0);
    }

    #[test]
    fn midpoint_blend_arithmetic() {
        // x_c = (1, 1), y_c = (3, −1), α = 0.5 → x'_c = (2, 0).
        let x = fm(2, 1, &[1.0, 1.0]);
        let y = fm(2, 1, &[3.0, -1.0]);
        let spec = BlendSpec::uniform(low(&[0], 1), 0.5).unwrap();
        let result = blend(&x, &y, &spec).unwrap();
        assert_relative_eq!(result.fused.get(0, 0), 2.0, epsilon = 1e-15);
        assert_relative_eq!(result.fused.get(1, 0), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn other_channel_convention_mirrors_alpha() {
        let x = fm(2, 1, &[1.0, 1.0]);
        let y = fm(2, 1, &[3.0, -1.0]);
        let spec = BlendSpec::uniform(low(&[0], 1), 0.25).unwrap();
        let own = blend_with_convention(&x, &y, &spec, AlphaConvention::OwnChannel).unwrap();
        let mirrored = blend_with_convention(&x, &y, &spec, AlphaConvention::OtherChannel).unwrap();
        // α = 0.25 own-weight equals α = 0.75 under the mirrored convention.
        let flipped = BlendSpec::uniform(low(&[0], 1), 0.75).unwrap();
        let expected = blend(&x, &y, &flipped).unwrap();
        // Own convention, α = 0.25: 0.25·1 + 0.75·3 = 2.5.
        assert_relative_eq!(own.fused.get(0, 0), 2.5, epsilon = 1e-15);
        assert_eq!(mirrored.fused.to_row_major(), expected.fused.to_row_major());
    }

    #[test]
    fn invalid_alpha_is_rejected() {
        let err = BlendSpec::uniform(low(&[0], 1), 1.5).unwrap_err();
        assert!(matches!(err, Error::InvalidAlpha { channel: 0, .. }));
        assert!(BlendSpec::uniform(low(&[0], 1), -0.1).is_err());
        assert!(BlendSpec::uniform(low(&[0], 1), f64::NAN).is_err());
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let x = fm(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let y = fm(3, 2, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let spec = BlendSpec::uniform(low(&[0], 2), 0.5).unwrap();
        assert!(matches!(
            blend(&x, &y, &spec),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn self_fusion_changes_nothing() {
        let a = fm(3, 2, &[1.0, 2.0, 0.5, -1.0, 2.0, 0.25]);
        let spec = BlendSpec::uniform(low(&[0, 1], 2), 0.3).unwrap();
        let (ra, rb) = symmetric_fuse(&a, &a, &spec, &spec).unwrap();
        assert!(ra.erank_gain.abs() < 1e-10);
        assert!(rb.erank_gain.abs() < 1e-10);
    }

    #[test]
    fn harmonic_mean_examples() {
        assert_relative_eq!(harmonic_mean_gain(5.0, 5.0), 5.0, epsilon = 1e-15);
        assert_relative_eq!(harmonic_mean_gain(0.0, 7.0), 0.0, epsilon = 1e-15);
        assert_relative_eq!(harmonic_mean_gain(3.0, 6.0), 4.0, epsilon = 1e-15);
        // Negative gains clamp to zero first.
        assert_relative_eq!(harmonic_mean_gain(-2.0, 6.0), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn optimizer_is_a_no_op_when_modalities_match() {
        let x = fm(4, 2, &[1.0, 0.5, 2.0, -0.5, 0.3, 1.5, -1.0, 0.7]);
        let config = OptimizerConfig {
            seed: 42,
            iterations: 20,
            ..OptimizerConfig::default()
        };
        let result = optimize_blend(&x, &x, &low(&[0], 2), &config).unwrap();
        // Objective is constant in α, so the gain over the init is zero.
        assert!((result.objective - result.initial_objective).abs() < 1e-9);
    }

    #[test]
    fn optimizer_requires_a_nonempty_set_and_matching_dims() {
        let x = fm(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let y = fm(3, 2, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert!(optimize_blend(&x, &y, &low(&[0], 2), &OptimizerConfig::default()).is_err());
    }
}
