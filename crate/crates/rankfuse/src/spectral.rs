//! Dense spectral primitives: thin SVD, effective rank, spectral gaps,
//! dominant subspaces and subspace distances.
//!
//! Everything here is a pure function of its inputs. The effective rank of a
//! matrix is `exp(H(p))` where `p` is the singular-value spectrum normalized
//! by the nuclear norm and `H` is Shannon entropy in nats; it interpolates
//! smoothly between 1 (rank-one) and the numerical rank (flat spectrum).

use nalgebra::{DMatrix, SVD};

use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;

/// Thin singular value decomposition of a feature matrix, with singular
/// values sorted nonincreasing and a numerical rank attached.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    singular_values: Vec<f64>,
    left_vectors: DMatrix<f64>,
    right_vectors: DMatrix<f64>,
    numerical_rank: usize,
    rank_cutoff: f64,
}

impl SpectralDecomposition {
    /// Singular values σ₁ ≥ σ₂ ≥ … ≥ σₘ ≥ 0, m = min(T, D).
    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    /// T×m matrix whose columns are the left singular vectors u_i.
    pub fn left_vectors(&self) -> &DMatrix<f64> {
        &self.left_vectors
    }

    /// D×m matrix whose columns are the right singular vectors v_i.
    pub fn right_vectors(&self) -> &DMatrix<f64> {
        &self.right_vectors
    }

    /// Number of singular values above the rank cutoff
    /// `max(T, D) · ε_machine · σ₁`.
    pub fn numerical_rank(&self) -> usize {
        self.numerical_rank
    }

    /// The threshold below which singular values are treated as zero.
    pub fn rank_cutoff(&self) -> f64 {
        self.rank_cutoff
    }

    /// Sum of all singular values.
    pub fn nuclear_norm(&self) -> f64 {
        self.singular_values.iter().sum()
    }
}

/// Normalized singular-value spectrum with its entropy and effective rank.
#[derive(Debug, Clone)]
pub struct Spectrum {
    probabilities: Vec<f64>,
    entropy: f64,
    effective_rank: f64,
}

impl Spectrum {
    /// p_j = σ_j / Σσ over the leading `numerical_rank` singular values.
    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Shannon entropy of the spectrum, in nats.
    pub fn entropy(&self) -> f64 {
        self.entropy
    }

    /// exp(entropy); lies in [1, numerical rank].
    pub fn effective_rank(&self) -> f64 {
        self.effective_rank
    }
}

/// Computes the thin SVD of `x` with sorted singular values.
pub fn decompose(x: &FeatureMatrix) -> Result<SpectralDecomposition> {
    if x.is_zero() {
        return Err(Error::ZeroMatrix);
    }
    let svd = SVD::new(x.as_dmatrix().clone(), true, true);
    let u = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");

    let m = svd.singular_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .expect("singular values are finite")
    });

    let singular_values: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let mut left_vectors = DMatrix::zeros(u.nrows(), m);
    let mut right_vectors = DMatrix::zeros(v_t.ncols(), m);
    for (dst, &src) in order.iter().enumerate() {
        left_vectors.set_column(dst, &u.column(src));
        right_vectors.set_column(dst, &v_t.row(src).transpose());
    }

    let sigma_max = singular_values[0];
    let dim = x.rows().max(x.cols()) as f64;
    let rank_cutoff = dim * f64::EPSILON * sigma_max;
    let numerical_rank = singular_values.iter().filter(|&&s| s > rank_cutoff).count();

    Ok(SpectralDecomposition {
        singular_values,
        left_vectors,
        right_vectors,
        numerical_rank,
        rank_cutoff,
    })
}

/// Effective rank of `x`: exp of the entropy of the nuclear-norm-normalized
/// spectrum.
pub fn effective_rank(x: &FeatureMatrix) -> Result<Spectrum> {
    Ok(spectrum_of(&decompose(x)?))
}

/// The spectrum of an existing decomposition. Only singular values above the
/// rank cutoff participate; exact zeros would contribute 0·ln 0 = 0 anyway.
pub fn spectrum_of(dec: &SpectralDecomposition) -> Spectrum {
    let retained = &dec.singular_values[..dec.numerical_rank];
    let total: f64 = retained.iter().sum();
    let probabilities: Vec<f64> = retained.iter().map(|s| s / total).collect();
    let entropy = -probabilities
        .iter()
        .map(|&p| if p > 0.0 { p * p.ln() } else { 0.0 })
        .sum::<f64>();
    // Entropy of an r-point distribution lies in [0, ln r]; clamp float noise.
    let entropy = entropy.max(0.0);
    Spectrum {
        probabilities,
        entropy,
        effective_rank: entropy.exp(),
    }
}

/// The spectral gap δ_k = σ_k − σ_{k+1}, 1-indexed, for 1 ≤ k < numerical rank.
pub fn spectral_gap(dec: &SpectralDecomposition, k: usize) -> Result<f64> {
    if k < 1 || k >= dec.numerical_rank {
        return Err(Error::IndexOutOfRange {
            what: "k",
            got: k,
            min: 1,
            max: dec.numerical_rank.saturating_sub(1),
        });
    }
    Ok(dec.singular_values[k - 1] - dec.singular_values[k])
}

/// A matrix with orthonormal columns, validated on construction.
#[derive(Debug, Clone)]
pub struct Basis {
    columns: DMatrix<f64>,
}

impl Basis {
    /// Column orthonormality tolerance: |BᵀB − I| entries must stay below this.
    pub const ORTHONORMALITY_TOL: f64 = 1e-8;

    pub fn new(columns: DMatrix<f64>) -> Result<Self> {
        if columns.ncols() == 0 || columns.nrows() == 0 {
            return Err(Error::InvalidArgument(
                "basis must have at least one column and one row".into(),
            ));
        }
        let gram = columns.transpose() * &columns;
        for i in 0..gram.nrows() {
            for j in 0..gram.ncols() {
                let expected = if i == j { 1.0 } else { 0.0 };
                if (gram[(i, j)] - expected).abs() > Self::ORTHONORMALITY_TOL {
                    return Err(Error::InvalidArgument(format!(
                        "columns are not orthonormal: |(BᵀB)[{i},{j}] - {expected}| = {:.3e}",
                        (gram[(i, j)] - expected).abs()
                    )));
                }
            }
        }
        Ok(Self { columns })
    }

    pub fn dim(&self) -> usize {
        self.columns.nrows()
    }

    pub fn rank(&self) -> usize {
        self.columns.ncols()
    }

    pub fn as_dmatrix(&self) -> &DMatrix<f64> {
        &self.columns
    }
}

/// Orthonormal basis of the span of the top-k left singular vectors.
pub fn dominant_subspace(dec: &SpectralDecomposition, k: usize) -> Result<Basis> {
    if k < 1 || k > dec.numerical_rank {
        return Err(Error::IndexOutOfRange {
            what: "k",
            got: k,
            min: 1,
            max: dec.numerical_rank,
        });
    }
    let cols = dec.left_vectors.columns(0, k).into_owned();
    Basis::new(cols)
}

fn cross_singular_values(a: &Basis, b: &Basis) -> Result<Vec<f64>> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} rows", a.dim()),
            got: format!("{} rows", b.dim()),
        });
    }
    let product = a.as_dmatrix().transpose() * b.as_dmatrix();
    let mut s: Vec<f64> = SVD::new(product, false, false)
        .singular_values
        .iter()
        // Float noise can push cosines marginally outside [0, 1].
        .map(|&v| v.clamp(0.0, 1.0))
        .collect();
    s.sort_by(|x, y| y.partial_cmp(x).expect("finite"));
    Ok(s)
}

/// Largest principal-angle sine between two equal-rank subspaces:
/// `sqrt(1 − s_min²)` for s_min the smallest singular value of AᵀB.
pub fn sin_theta_distance(a: &Basis, b: &Basis) -> Result<f64> {
    if a.rank() != b.rank() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} columns", a.rank()),
            got: format!("{} columns", b.rank()),
        });
    }
    let s = cross_singular_values(a, b)?;
    let s_min = *s.last().expect("basis has at least one column");
    Ok((1.0 - s_min * s_min).max(0.0).sqrt())
}

/// Principal angles between two subspaces, in degrees, nondecreasing.
/// Column counts may differ; min(rank A, rank B) angles are returned.
pub fn principal_angles(a: &Basis, b: &Basis) -> Result<Vec<f64>> {
    let s = cross_singular_values(a, b)?;
    Ok(s.iter().map(|c| c.acos().to_degrees()).collect())
}

/// Energy ratio of a vector between the dominant left subspace (first `k`
/// columns of `left`) and the residual left subspace (columns `k..rank`).
///
/// Returns 0 when the dominant energy vanishes, +∞ when the dominant energy
/// is positive but the residual energy is exactly zero.
pub(crate) fn dominant_residual_ratio(
    v: &nalgebra::DVector<f64>,
    left: &DMatrix<f64>,
    k: usize,
    rank: usize,
) -> f64 {
    let mut dominant = 0.0;
    for i in 0..k {
        let overlap = left.column(i).dot(v);
        dominant += overlap * overlap;
    }
    let mut residual = 0.0;
    for i in k..rank {
        let overlap = left.column(i).dot(v);
        residual += overlap * overlap;
    }
    if dominant == 0.0 {
        0.0
    } else if residual == 0.0 {
        f64::INFINITY
    } else {
        dominant / residual
    }
}

/// Spectral norm (largest singular value) of an arbitrary matrix; 0 for the
/// zero matrix.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.iter().all(|&v| v == 0.0) {
        return 0.0;
    }
    SVD::new(m.clone(), false, false)
        .singular_values
        .iter()
        .fold(0.0_f64, |acc, &s| acc.max(s))
}
