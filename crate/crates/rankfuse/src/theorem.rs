//! Numerical certification of the fusion guarantee on a concrete instance.
//!
//! Given (X, Y, C_low, α, k), the validator measures every constant the
//! effective-rank-increase argument rests on — the injected-column norm cap
//! β, the modification energy ε, the informativeness ceiling η, the spectral
//! gap δ_k and the alignment ratio γ — and evaluates each intermediate bound:
//! the perturbation norms, the dominant-subspace sin Θ stability estimate,
//! the |⟨X, Δ⟩| bound and the Frobenius-energy expansion. The final verdict
//! compares effective ranks before and after fusion.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fusion::{blend, BlendSpec};
use crate::informativeness::{channel_importance_decomposed, LowChannelSet};
use crate::matrix::FeatureMatrix;
use crate::report::{ser_f64, ser_f64_or_null, ser_opt_f64};
use crate::spectral::{
    decompose, dominant_residual_ratio, dominant_subspace, sin_theta_distance, spectral_gap,
    spectral_norm, SpectralDecomposition,
};

/// Relative tolerance on |mean(y_c)| for the zero-mean check.
pub const ZERO_MEAN_REL_TOL: f64 = 1e-8;

/// Verdict per assumption.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AssumptionPasses {
    /// Injected columns are zero-mean (their norm cap β is measured, so the
    /// norm half of the condition holds by construction).
    pub bounding: bool,
    /// The fusion actually modifies the representation: ε > 0.
    pub modification: bool,
    /// The informativeness ceiling is small enough to preserve the dominant
    /// subspace: √η ≤ min(δ_k/(3√n), ε/(4nβ)).
    pub subspace_preservation: bool,
    /// Injected columns are not dominated by the host's top-k subspace: γ < 1.
    pub alignment: bool,
}

impl AssumptionPasses {
    pub fn all(&self) -> bool {
        self.bounding && self.modification && self.subspace_preservation && self.alignment
    }
}

/// Measured constants for the four assumptions, with verdicts.
#[derive(Debug, Clone, Serialize)]
pub struct AssumptionReport {
    /// max ‖y_c‖₂ over the low channels.
    #[serde(serialize_with = "ser_f64")]
    pub beta_measured: f64,
    /// max |mean(y_c)| over the low channels.
    #[serde(serialize_with = "ser_f64")]
    pub zero_mean_maxdev: f64,
    /// Σ ‖x'_c − x_c‖² over the low channels.
    #[serde(serialize_with = "ser_f64")]
    pub epsilon_measured: f64,
    /// max I_c over the low channels (full-rank informativeness, which equals
    /// the squared column norm).
    #[serde(serialize_with = "ser_f64")]
    pub eta_measured: f64,
    /// min(δ_k/(3√n), ε/(4nβ))² — the largest admissible η.
    #[serde(serialize_with = "ser_f64_or_null")]
    pub eta_max_allowed: f64,
    /// σ_k − σ_{k+1} of the host matrix.
    #[serde(serialize_with = "ser_f64")]
    pub delta_k: f64,
    /// Worst dominant-to-residual energy ratio over the injected channels;
    /// +∞ (serialized as null) when a channel has no residual energy at all.
    #[serde(serialize_with = "ser_f64_or_null")]
    pub gamma_measured: f64,
    pub passes: AssumptionPasses,
}

/// Full bound suite for one fusion instance.
#[derive(Debug, Clone, Serialize)]
pub struct TheoremReport {
    /// Dominant subspace size the instance was validated at.
    pub k: usize,
    /// The channels that were blended.
    pub low_channels: Vec<usize>,
    pub assumptions: AssumptionReport,
    /// ‖Δ‖_F of the update Δ = X' − X.
    #[serde(serialize_with = "ser_f64")]
    pub delta_frobenius: f64,
    /// ‖Δ‖₂ (spectral norm).
    #[serde(serialize_with = "ser_f64")]
    pub delta_spectral: f64,
    /// Whether ‖Δ‖₂ < δ_k/2, the perturbation smallness the argument asks for.
    pub step1_bound_ok: bool,
    /// ‖sin Θ‖₂ between the top-k left subspaces of X and X'.
    #[serde(serialize_with = "ser_f64")]
    pub sin_theta_measured: f64,
    /// ‖Δ‖₂ / (δ_k − ‖Δ‖₂); absent when ‖Δ‖₂ ≥ δ_k and the stability lemma
    /// does not apply.
    #[serde(serialize_with = "ser_opt_f64")]
    pub sin_theta_bound: Option<f64>,
    /// |⟨X, Δ⟩| under the Frobenius inner product.
    #[serde(serialize_with = "ser_f64")]
    pub step3_inner_product: f64,
    /// n·(β(√γ+1)√η + η), the analytic ceiling on |⟨X, Δ⟩|.
    #[serde(serialize_with = "ser_f64_or_null")]
    pub step3_bound: f64,
    /// ‖X'‖_F² − ‖X‖_F².
    #[serde(serialize_with = "ser_f64")]
    pub frobenius_gain: f64,
    /// frobenius_gain − ε/2; the energy-expansion argument needs this > 0.
    #[serde(serialize_with = "ser_f64")]
    pub step4_margin: f64,
    /// Σ_{j≤k} (σ'_j² − σ_j²): change of dominant spectral energy.
    #[serde(serialize_with = "ser_f64")]
    pub dominant_change: f64,
    /// Σ_{j>k} (σ'_j² − σ_j²): change of residual spectral energy.
    #[serde(serialize_with = "ser_f64")]
    pub tail_change: f64,
    #[serde(serialize_with = "ser_f64")]
    pub erank_before: f64,
    #[serde(serialize_with = "ser_f64")]
    pub erank_after: f64,
    /// Whether the effective rank strictly increased.
    pub conclusion_ok: bool,
}

fn assumptions_with_dec(
    dec: &SpectralDecomposition,
    x: &FeatureMatrix,
    y: &FeatureMatrix,
    low_set: &LowChannelSet,
    spec: &BlendSpec,
    k: usize,
) -> Result<AssumptionReport> {
    let n = low_set.len() as f64;

    let mut beta_measured = 0.0_f64;
    let mut zero_mean_maxdev = 0.0_f64;
    let mut epsilon_measured = 0.0_f64;
    let mut zero_mean_ok = true;
    for &c in low_set.indices() {
        let y_col = y.column(c);
        let norm = y_col.norm();
        let mean_dev = (y_col.sum() / y.rows() as f64).abs();
        beta_measured = beta_measured.max(norm);
        zero_mean_maxdev = zero_mean_maxdev.max(mean_dev);
        if mean_dev > ZERO_MEAN_REL_TOL * norm {
            zero_mean_ok = false;
        }
        let alpha = spec.alpha(c).ok_or_else(|| {
            Error::InvalidArgument(format!("blend spec does not cover channel {c}"))
        })?;
        let diff = (y_col - x.column(c)) * (1.0 - alpha);
        epsilon_measured += diff.norm_squared();
    }

    let profile = channel_importance_decomposed(dec, None, (x.rows(), x.cols()))?;
    let eta_measured = low_set
        .indices()
        .iter()
        .map(|&c| profile.scores()[c])
        .fold(0.0_f64, f64::max);

    let delta_k = spectral_gap(dec, k)?;

    let gamma_measured = low_set
        .indices()
        .iter()
        .map(|&c| dominant_residual_ratio(&y.column(c), dec.left_vectors(), k, dec.numerical_rank()))
        .fold(0.0_f64, f64::max);

    let epsilon_part = if beta_measured > 0.0 {
        epsilon_measured / (4.0 * n * beta_measured)
    } else {
        f64::INFINITY
    };
    let bound = (delta_k / (3.0 * n.sqrt())).min(epsilon_part);
    let eta_max_allowed = bound * bound;

    let passes = AssumptionPasses {
        bounding: zero_mean_ok,
        modification: epsilon_measured > 0.0,
        subspace_preservation: eta_measured.sqrt() <= bound,
        alignment: gamma_measured < 1.0,
    };

    Ok(AssumptionReport {
        beta_measured,
        zero_mean_maxdev,
        epsilon_measured,
        eta_measured,
        eta_max_allowed,
        delta_k,
        gamma_measured,
        passes,
    })
}

/// Measures the four assumption constants on (X, Y, C_low, α, k).
///
/// A channel whose residual-subspace energy is exactly zero makes γ
/// undefined; it is reported as +∞ and the alignment assumption fails.
pub fn check_assumptions(
    x: &FeatureMatrix,
    y: &FeatureMatrix,
    low_set: &LowChannelSet,
    spec: &BlendSpec,
    k: usize,
) -> Result<AssumptionReport> {
    x.same_dims(y)?;
    let dec = decompose(x)?;
    if k < 1 || k >= dec.numerical_rank() {
        return Err(Error::IndexOutOfRange {
            what: "k",
            got: k,
            min: 1,
            max: dec.numerical_rank().saturating_sub(1),
        });
    }
    assumptions_with_dec(&dec, x, y, low_set, spec, k)
}

/// Runs the full bound suite: assumptions, perturbation norms, subspace
/// stability, inner-product bound, energy expansion, spectral flattening and
/// the effective-rank verdict.
pub fn validate_theorem(
    x: &FeatureMatrix,
    y: &FeatureMatrix,
    low_set: &LowChannelSet,
    spec: &BlendSpec,
    k: usize,
) -> Result<TheoremReport> {
    x.same_dims(y)?;
    let dec = decompose(x)?;
    if k < 1 || k >= dec.numerical_rank() {
        return Err(Error::IndexOutOfRange {
            what: "k",
            got: k,
            min: 1,
            max: dec.numerical_rank().saturating_sub(1),
        });
    }
    let assumptions = assumptions_with_dec(&dec, x, y, low_set, spec, k)?;

    let fusion = blend(x, y, spec)?;
    let delta_frobenius = fusion.delta.frobenius_norm();
    let delta_spectral = spectral_norm(fusion.delta.as_dmatrix());
    let delta_k = assumptions.delta_k;
    let step1_bound_ok = delta_spectral < delta_k / 2.0;

    let dec_fused = decompose(&fusion.fused)?;
    let sin_theta_measured = if k <= dec_fused.numerical_rank() {
        sin_theta_distance(&dominant_subspace(&dec, k)?, &dominant_subspace(&dec_fused, k)?)?
    } else {
        // The fusion collapsed below rank k; the subspaces are incomparable.
        1.0
    };
    let sin_theta_bound = (delta_spectral < delta_k)
        .then(|| delta_spectral / (delta_k - delta_spectral));

    let step3_inner_product = x.as_dmatrix().dot(fusion.delta.as_dmatrix()).abs();
    let n = low_set.len() as f64;
    let step3_bound = if assumptions.gamma_measured.is_finite() {
        n * (assumptions.beta_measured
            * (assumptions.gamma_measured.sqrt() + 1.0)
            * assumptions.eta_measured.sqrt()
            + assumptions.eta_measured)
    } else {
        f64::INFINITY
    };

    let x_sq = x.frobenius_norm().powi(2);
    let fused_sq = fusion.fused.frobenius_norm().powi(2);
    let frobenius_gain = fused_sq - x_sq;
    let step4_margin = frobenius_gain - assumptions.epsilon_measured / 2.0;

    let (dominant_change, tail_change) = flattening_changes(&dec, &dec_fused, k);

    Ok(TheoremReport {
        k,
        low_channels: low_set.indices().to_vec(),
        assumptions,
        delta_frobenius,
        delta_spectral,
        step1_bound_ok,
        sin_theta_measured,
        sin_theta_bound,
        step3_inner_product,
        step3_bound,
        frobenius_gain,
        step4_margin,
        dominant_change,
        tail_change,
        erank_before: fusion.erank_before,
        erank_after: fusion.erank_after,
        conclusion_ok: fusion.erank_after > fusion.erank_before,
    })
}

fn flattening_changes(
    before: &SpectralDecomposition,
    after: &SpectralDecomposition,
    k: usize,
) -> (f64, f64) {
    let s_before = before.singular_values();
    let s_after = after.singular_values();
    let m = s_before.len().min(s_after.len());
    let head = k.min(m);
    let mut dominant = 0.0;
    let mut tail = 0.0;
    for j in 0..m {
        let change = s_after[j] * s_after[j] - s_before[j] * s_before[j];
        if j < head {
            dominant += change;
        } else {
            tail += change;
        }
    }
    (dominant, tail)
}

/// Splits the change of squared spectral energy between the top-k values and
/// the tail: a fusion that flattens the spectrum leaves the first component
/// near zero and makes the second positive.
pub fn flattening_profile(
    x: &FeatureMatrix,
    x_fused: &FeatureMatrix,
    k: usize,
) -> Result<(f64, f64)> {
    x.same_dims(x_fused)?;
    let dec = decompose(x)?;
    let dec_fused = decompose(x_fused)?;
    let m = dec.singular_values().len();
    if k < 1 || k > m {
        return Err(Error::IndexOutOfRange {
            what: "k",
            got: k,
            min: 1,
            max: m,
        });
    }
    Ok(flattening_changes(&dec, &dec_fused, k))
}

/// Smallest k whose leading squared singular values capture at least 90% of
/// the total spectral energy, clamped so that δ_k exists.
pub fn default_validation_k(dec: &SpectralDecomposition) -> usize {
    let rank = dec.numerical_rank();
    if rank <= 1 {
        return 1;
    }
    let total: f64 = dec
        .singular_values()
        .iter()
        .take(rank)
        .map(|s| s * s)
        .sum();
    let mut acc = 0.0;
    for (i, s) in dec.singular_values().iter().take(rank).enumerate() {
        acc += s * s;
        if acc >= 0.9 * total {
            return (i + 1).min(rank - 1).max(1);
        }
    }
    rank - 1
}
