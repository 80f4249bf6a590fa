//! Synthetic feature matrices and modality pairs with prescribed spectra,
//! bounded column norms, calibrated noise and controlled alignment against a
//! partner's dominant subspace.
//!
//! The pair generator is the test bed for the fusion theory: it plants
//! low-informativeness channels in each matrix and fills the partner's
//! matching channels with zero-mean, norm-capped columns whose
//! dominant-to-residual energy ratio is held at the requested level. All
//! randomness flows from one seeded stream, so identical configs produce
//! bit-identical output.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::informativeness::{low_count_for_ratio, DEFAULT_LOW_RATIO};
use crate::matrix::FeatureMatrix;
use crate::spectral::{decompose, dominant_residual_ratio};

/// Configuration for the synthetic generators.
#[derive(Debug, Clone)]
pub struct GeneratorConfig {
    /// T, number of rows.
    pub rows: usize,
    /// D, number of channels.
    pub cols: usize,
    /// Optional prescribed nonincreasing singular values. For
    /// [`gen_spectrum_matrix`] this is the whole spectrum; for
    /// [`gen_complementary_pair`] it prescribes each matrix's informative
    /// core.
    pub singular_values: Option<Vec<f64>>,
    /// Energy ratio cap for injected channels against the partner's
    /// dominant subspace; must lie in [0, 1).
    pub gamma_target: f64,
    /// Column-norm cap for every column of the injected modality.
    pub beta: f64,
    /// Dominant subspace size the alignment is measured against.
    pub k: usize,
    /// Channels reserved as low-informativeness per side; defaults to 10%
    /// of the channel count.
    pub low_count: Option<usize>,
    pub seed: u64,
}

impl GeneratorConfig {
    pub fn new(rows: usize, cols: usize, k: usize, seed: u64) -> Self {
        Self {
            rows,
            cols,
            singular_values: None,
            gamma_target: 0.2,
            beta: 1.0,
            k,
            low_count: None,
            seed,
        }
    }

    /// Number of planted low channels per side.
    pub fn effective_low_count(&self) -> usize {
        self.low_count
            .unwrap_or_else(|| low_count_for_ratio(self.cols, DEFAULT_LOW_RATIO))
    }

    fn validate(&self) -> Result<()> {
        if self.rows < 1 || self.cols < 1 {
            return Err(Error::InvalidArgument(format!(
                "matrix dimensions must be positive, got {}x{}",
                self.rows, self.cols
            )));
        }
        if !(0.0..1.0).contains(&self.gamma_target) {
            return Err(Error::InvalidArgument(format!(
                "gamma_target must lie in [0, 1), got {}",
                self.gamma_target
            )));
        }
        if self.beta <= 0.0 || !self.beta.is_finite() || self.beta.is_nan() {
            return Err(Error::InvalidArgument(format!(
                "beta must be positive and finite, got {}",
                self.beta
            )));
        }
        if self.k < 1 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        if let Some(n) = self.low_count {
            if n < 1 {
                return Err(Error::InvalidArgument("low_count must be at least 1".into()));
            }
        }
        Ok(())
    }
}

/// Fraction of the norm cap given to injected columns, leaving headroom under
/// the cap so the injections stay spectrally below the partner's dominant
/// values.
const INJECTION_NORM_FRAC: f64 = 0.8;
/// Fraction of the norm cap given to planted weak channels.
const WEAK_NORM_FRAC: f64 = 0.015;
/// Core columns are balanced to a common norm at most this fraction of β.
const CORE_NORM_CAP_FRAC: f64 = 0.97;
/// Out-of-span energy of an injected column relative to its residual energy.
const OUT_OF_SPAN_ENERGY: f64 = 1.0;
/// Resampling budget before a configuration is declared infeasible.
const RETRY_BUDGET: usize = 100;

fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(rows, cols);
    for c in 0..cols {
        for r in 0..rows {
            m[(r, c)] = rng.sample(StandardNormal);
        }
    }
    m
}

fn gaussian_vector(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    let mut v = DVector::zeros(n);
    for i in 0..n {
        v[i] = rng.sample(StandardNormal);
    }
    v
}

/// Flips columns so the first entry of meaningful magnitude is positive.
/// When `follow` is given, its columns flip in lockstep so paired frames keep
/// their product.
fn canonicalize_signs(m: &mut DMatrix<f64>, mut follow: Option<&mut DMatrix<f64>>) {
    for c in 0..m.ncols() {
        let lead = (0..m.nrows()).find(|&r| m[(r, c)].abs() > 1e-12);
        if let Some(r) = lead {
            if m[(r, c)] < 0.0 {
                for i in 0..m.nrows() {
                    m[(i, c)] = -m[(i, c)];
                }
                if let Some(other) = follow.as_deref_mut() {
                    for i in 0..other.nrows() {
                        other[(i, c)] = -other[(i, c)];
                    }
                }
            }
        }
    }
}

fn center_columns(m: &mut DMatrix<f64>) {
    let t = m.nrows() as f64;
    for mut col in m.column_iter_mut() {
        let mean = col.sum() / t;
        col.add_scalar_mut(-mean);
    }
}

/// Random matrix with orthonormal columns; optionally confined to the
/// zero-column-mean hyperplane.
fn random_orthonormal(
    rng: &mut ChaCha8Rng,
    rows: usize,
    cols: usize,
    centered: bool,
) -> Result<DMatrix<f64>> {
    let capacity = if centered { rows.saturating_sub(1) } else { rows };
    if cols > capacity {
        return Err(Error::InfeasibleConstruction(format!(
            "cannot fit {cols} orthonormal columns in dimension {capacity}"
        )));
    }
    let mut g = gaussian_matrix(rng, rows, cols);
    if centered {
        center_columns(&mut g);
    }
    let mut q = g.qr().q();
    canonicalize_signs(&mut q, None);
    Ok(q)
}

fn validate_spectrum(values: &[f64], max_len: usize) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidSpectrum("spectrum is empty".into()));
    }
    if values.len() > max_len {
        return Err(Error::InvalidSpectrum(format!(
            "{} singular values prescribed but at most {max_len} fit",
            values.len()
        )));
    }
    if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidSpectrum(
            "singular values must be finite and nonnegative".into(),
        ));
    }
    if values.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::InvalidSpectrum(
            "singular values must be nonincreasing".into(),
        ));
    }
    if values[0] <= 0.0 {
        return Err(Error::InvalidSpectrum(
            "leading singular value must be positive".into(),
        ));
    }
    Ok(())
}

/// Builds a matrix with exactly the prescribed singular values and random
/// orthonormal singular-vector frames.
pub fn gen_spectrum_matrix(config: &GeneratorConfig) -> Result<FeatureMatrix> {
    config.validate()?;
    let values = config.singular_values.as_ref().ok_or_else(|| {
        Error::InvalidSpectrum("gen_spectrum_matrix requires a prescribed spectrum".into())
    })?;
    validate_spectrum(values, config.rows.min(config.cols))?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let len = values.len();
    let mut u = random_orthonormal(&mut rng, config.rows, len, false)?;
    let mut v = random_orthonormal(&mut rng, config.cols, len, false)?;
    canonicalize_signs(&mut u, Some(&mut v));

    let mut x = DMatrix::zeros(config.rows, config.cols);
    for (i, &sigma) in values.iter().enumerate() {
        if sigma > 0.0 {
            // Rank-one update σ u vᵀ accumulated column by column.
            let ui = u.column(i);
            let vi = v.column(i);
            for c in 0..config.cols {
                let w = sigma * vi[c];
                for r in 0..config.rows {
                    x[(r, c)] += w * ui[r];
                }
            }
        }
    }
    FeatureMatrix::from_dmatrix(x)
}

/// Default informative-core spectrum: a linear head of `k` values well above
/// the injection level, then a geometric tail with a floor.
fn default_core_spectrum(k: usize, len: usize, beta: f64) -> Vec<f64> {
    let mut s = Vec::with_capacity(len);
    for i in 0..k.min(len) {
        let f = if k == 1 { 0.0 } else { i as f64 / (k - 1) as f64 };
        s.push(beta * (2.0 - 0.45 * f));
    }
    let mut tail = 1.1 * beta;
    for _ in k.min(len)..len {
        s.push(tail.max(0.3 * beta));
        tail *= 0.82;
    }
    s
}

/// Applies right-side Givens rotations until every column of `m` has squared
/// norm `target_sq`. The rotations preserve the singular values and the
/// column span.
fn equalize_column_norms(m: &mut DMatrix<f64>, target_sq: f64) {
    let cols = m.ncols();
    let tol = target_sq * 1e-12 + 1e-300;
    for _ in 0..cols * 4 {
        let norms: Vec<f64> = (0..cols).map(|c| m.column(c).norm_squared()).collect();
        let (i_min, &min_sq) = norms
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).expect("finite"))
            .expect("at least one column");
        let (i_max, &max_sq) = norms
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite"))
            .expect("at least one column");
        if max_sq - target_sq <= tol && target_sq - min_sq <= tol {
            break;
        }
        // Rotate (i_min, i_max) so the small column lands exactly on target:
        // solve (b−t)·z² + 2c·z + (a−t) = 0 for z = tanθ.
        let u = m.column(i_min).into_owned();
        let w = m.column(i_max).into_owned();
        let a = min_sq;
        let b = max_sq;
        let c = u.dot(&w);
        let qa = b - target_sq;
        let qb = 2.0 * c;
        let qc = a - target_sq;
        let disc = (qb * qb - 4.0 * qa * qc).max(0.0).sqrt();
        let z = if qa.abs() < 1e-300 {
            if qb.abs() < 1e-300 {
                0.0
            } else {
                -qc / qb
            }
        } else {
            // Of the two real roots, either works; pick the smaller angle.
            let z1 = (-qb + disc) / (2.0 * qa);
            let z2 = (-qb - disc) / (2.0 * qa);
            if z1.abs() <= z2.abs() {
                z1
            } else {
                z2
            }
        };
        let cos = 1.0 / (1.0 + z * z).sqrt();
        let sin = z * cos;
        let new_u = &u * cos + &w * sin;
        let new_w = -&u * sin + &w * cos;
        m.set_column(i_min, &new_u);
        m.set_column(i_max, &new_w);
    }
}

/// Orthonormalizes the columns of `m` in place via QR; requires full column
/// rank, which holds almost surely for the Gaussian draws used here.
fn orthonormal_columns(m: &DMatrix<f64>) -> DMatrix<f64> {
    m.clone().qr().q()
}

struct PairDraw {
    x: DMatrix<f64>,
    y: DMatrix<f64>,
}

struct PairLayout {
    low_x: Vec<usize>,
    low_y: Vec<usize>,
    core_positions: Vec<usize>,
    core_rank: usize,
}

fn pair_layout(config: &GeneratorConfig, rng: &mut ChaCha8Rng) -> Result<PairLayout> {
    let d = config.cols;
    let t = config.rows;
    let n_low = config.effective_low_count();
    if 2 * n_low + 2 > d {
        return Err(Error::InfeasibleConstruction(format!(
            "{d} channels cannot host 2x{n_low} low channels plus an informative core"
        )));
    }
    let core_cols = d - 2 * n_low;

    // Capacity in the zero-mean hyperplane: two disjoint core frames plus
    // room for out-of-span components.
    let complement_needed = n_low.max(2);
    let capacity = (t - 1).saturating_sub(complement_needed) / 2;
    let core_rank = match &config.singular_values {
        Some(values) => {
            validate_spectrum(values, core_cols.min(capacity))?;
            if values.iter().any(|&v| v <= 0.0) {
                return Err(Error::InvalidSpectrum(
                    "pair cores require strictly positive singular values".into(),
                ));
            }
            values.len()
        }
        None => core_cols.min(capacity),
    };
    if core_rank < config.k + 1 {
        return Err(Error::InfeasibleConstruction(format!(
            "core rank {core_rank} leaves no residual directions beyond k = {}",
            config.k
        )));
    }
    if core_rank < config.k + n_low {
        return Err(Error::InfeasibleConstruction(format!(
            "core rank {core_rank} cannot host {n_low} independent injections beyond k = {}",
            config.k
        )));
    }

    // Seeded shuffle decides which channels are planted weak on each side.
    let mut order: Vec<usize> = (0..d).collect();
    for i in (1..d).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
    let mut low_x: Vec<usize> = order[..n_low].to_vec();
    let mut low_y: Vec<usize> = order[n_low..2 * n_low].to_vec();
    let mut core_positions: Vec<usize> = order[2 * n_low..].to_vec();
    low_x.sort_unstable();
    low_y.sort_unstable();
    core_positions.sort_unstable();
    Ok(PairLayout {
        low_x,
        low_y,
        core_positions,
        core_rank,
    })
}

/// One construction attempt. The RNG consumption order is fixed so that the
/// gamma target only rescales already-drawn components; identical seeds with
/// different gamma targets therefore share everything else.
fn pair_attempt(config: &GeneratorConfig, rng: &mut ChaCha8Rng) -> Result<PairDraw> {
    let t = config.rows;
    let d = config.cols;
    let k = config.k;
    let layout = pair_layout(config, rng)?;
    let r_s = layout.core_rank;
    let n_low = layout.low_x.len();

    // Disjoint orthonormal frames inside the zero-mean hyperplane: columns
    // 0..r_s carry X's core, r_s..2r_s carry Y's core.
    let frame = random_orthonormal(rng, t, 2 * r_s, true)?;
    let frame_x = frame.columns(0, r_s).into_owned();
    let frame_y = frame.columns(r_s, r_s).into_owned();

    let spectrum = match &config.singular_values {
        Some(values) => values.clone(),
        None => default_core_spectrum(k, r_s, config.beta),
    };

    // Balance core columns to a common norm; rescale the spectrum first if
    // the common norm would breach the cap.
    let core_cols = layout.core_positions.len();
    let mut energy: f64 = spectrum.iter().map(|s| s * s).sum();
    let cap = CORE_NORM_CAP_FRAC * config.beta;
    let mut spectrum = spectrum;
    if energy / core_cols as f64 > cap * cap {
        if config.singular_values.is_some() {
            return Err(Error::InfeasibleConstruction(format!(
                "prescribed core spectrum forces column norms above the cap {:.3e}",
                config.beta
            )));
        }
        let scale = cap / (energy / core_cols as f64).sqrt();
        for s in &mut spectrum {
            *s *= scale;
        }
        energy *= scale * scale;
    }
    let target_sq = energy / core_cols as f64;

    let build_core = |rng: &mut ChaCha8Rng, frame: &DMatrix<f64>| -> Result<DMatrix<f64>> {
        let v = random_orthonormal(rng, core_cols, r_s, false)?;
        let mut core = DMatrix::zeros(t, core_cols);
        for (i, &sv) in spectrum.iter().enumerate() {
            let ui = frame.column(i);
            let vi = v.column(i);
            for c in 0..core_cols {
                let w = sv * vi[c];
                for r in 0..t {
                    core[(r, c)] += w * ui[r];
                }
            }
        }
        equalize_column_norms(&mut core, target_sq);
        Ok(core)
    };
    let core_x = build_core(rng, &frame_x)?;
    let core_y = build_core(rng, &frame_y)?;

    // Weak channels live outside both core spans and outside the span of the
    // all-ones vector, so they disturb neither dominant subspace.
    let project_out = |v: &DVector<f64>| -> DVector<f64> {
        let mut w = v.clone();
        let mean = w.sum() / t as f64;
        w.add_scalar_mut(-mean);
        let coeffs = frame.transpose() * &w;
        w - &frame * coeffs
    };
    let draw_weak = |rng: &mut ChaCha8Rng| -> Result<Vec<DVector<f64>>> {
        let mut cols = Vec::with_capacity(n_low);
        for _ in 0..n_low {
            let raw = project_out(&gaussian_vector(rng, t));
            let norm = raw.norm();
            if norm < 1e-12 {
                return Err(Error::InfeasibleConstruction(
                    "degenerate weak-channel draw".into(),
                ));
            }
            cols.push(raw * (WEAK_NORM_FRAC * config.beta / norm));
        }
        Ok(cols)
    };
    let weak_x = draw_weak(rng)?;
    let weak_y = draw_weak(rng)?;

    // Injection columns against a host frame: residual and out-of-span parts
    // are orthonormalized across the set so the injections stay spectrally
    // flat; the dominant part is scaled to hit the gamma target exactly.
    let draw_injections = |rng: &mut ChaCha8Rng,
                           host_frame: &DMatrix<f64>|
     -> Result<Vec<DVector<f64>>> {
        let res_dims = r_s - k;
        let res_coeffs = random_orthonormal(rng, res_dims, n_low, false)?;
        let mut out_parts = DMatrix::zeros(t, n_low);
        for c in 0..n_low {
            out_parts.set_column(c, &project_out(&gaussian_vector(rng, t)));
        }
        let out_parts = orthonormal_columns(&out_parts);
        let host_dom = host_frame.columns(0, k);
        let host_res = host_frame.columns(k, res_dims);

        let mut cols = Vec::with_capacity(n_low);
        for c in 0..n_low {
            let residual = host_res * res_coeffs.column(c);
            let out = out_parts.column(c) * OUT_OF_SPAN_ENERGY.sqrt();
            let mut column = residual + out;
            if config.gamma_target > 0.0 {
                let mut b = gaussian_vector(rng, k);
                let norm = b.norm();
                if norm < 1e-12 {
                    return Err(Error::InfeasibleConstruction(
                        "degenerate dominant-component draw".into(),
                    ));
                }
                b *= config.gamma_target.sqrt() / norm;
                column += host_dom * b;
            } else {
                // Keep the stream identical across gamma targets.
                let _ = gaussian_vector(rng, k);
            }
            let norm = column.norm();
            cols.push(column * (INJECTION_NORM_FRAC * config.beta / norm));
        }
        Ok(cols)
    };
    // Columns of Y at X's weak positions, aligned against X's core frame.
    let inject_into_x = draw_injections(rng, &frame_x)?;
    // Columns of X at Y's weak positions, aligned against Y's core frame.
    let inject_into_y = draw_injections(rng, &frame_y)?;

    let mut x = DMatrix::zeros(t, d);
    let mut y = DMatrix::zeros(t, d);
    for (slot, &pos) in layout.core_positions.iter().enumerate() {
        x.set_column(pos, &core_x.column(slot));
        y.set_column(pos, &core_y.column(slot));
    }
    for (slot, &pos) in layout.low_x.iter().enumerate() {
        x.set_column(pos, &weak_x[slot]);
        y.set_column(pos, &inject_into_x[slot]);
    }
    for (slot, &pos) in layout.low_y.iter().enumerate() {
        x.set_column(pos, &inject_into_y[slot]);
        y.set_column(pos, &weak_y[slot]);
    }
    Ok(PairDraw { x, y })
}

/// Verifies the construction targets on the assembled pair: column means,
/// norm caps and the alignment ratio of every column of `other` against the
/// dominant subspace of `host`.
fn pair_satisfies(
    host: &FeatureMatrix,
    other: &FeatureMatrix,
    config: &GeneratorConfig,
) -> Result<bool> {
    let t = host.rows() as f64;
    for c in 0..other.cols() {
        let col = other.column(c);
        if col.sum().abs() / t > 1e-10 {
            return Ok(false);
        }
        if col.norm() > config.beta * (1.0 + 1e-10) {
            return Ok(false);
        }
    }
    let dec = decompose(host)?;
    if config.k >= dec.numerical_rank() {
        return Ok(false);
    }
    for c in 0..other.cols() {
        let ratio = dominant_residual_ratio(
            &other.column(c),
            dec.left_vectors(),
            config.k,
            dec.numerical_rank(),
        );
        if ratio > config.gamma_target + 1e-6 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Generates a modality pair (X, Y) where every column of Y is zero-mean,
/// norm-capped by β and aligned with X's dominant subspace at most to the
/// gamma target — and symmetrically for X against Y, so fusion can be
/// certified in both directions.
pub fn gen_complementary_pair(config: &GeneratorConfig) -> Result<(FeatureMatrix, FeatureMatrix)> {
    config.validate()?;
    if config.k >= config.rows.min(config.cols) {
        return Err(Error::InvalidArgument(format!(
            "k = {} must be smaller than min(T, D) = {}",
            config.k,
            config.rows.min(config.cols)
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut last_err: Option<Error> = None;
    for _ in 0..RETRY_BUDGET {
        match pair_attempt(config, &mut rng) {
            Ok(draw) => {
                let x = FeatureMatrix::from_dmatrix(draw.x)?;
                let y = FeatureMatrix::from_dmatrix(draw.y)?;
                if pair_satisfies(&x, &y, config)? && pair_satisfies(&y, &x, config)? {
                    return Ok((x, y));
                }
            }
            Err(e @ Error::InfeasibleConstruction(_)) => {
                // Structural infeasibility does not improve with resampling.
                return Err(e);
            }
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap_or_else(|| {
        Error::InfeasibleConstruction(format!(
            "alignment targets not met after {RETRY_BUDGET} attempts"
        ))
    }))
}

/// Adds seeded i.i.d. Gaussian noise with standard deviation `sigma` to every
/// entry. `sigma = 0` returns the input unchanged.
pub fn perturb_noise(x: &FeatureMatrix, sigma: f64, seed: u64) -> Result<FeatureMatrix> {
    if sigma < 0.0 || !sigma.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "sigma must be nonnegative and finite, got {sigma}"
        )));
    }
    if sigma == 0.0 {
        return Ok(x.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = gaussian_matrix(&mut rng, x.rows(), x.cols());
    FeatureMatrix::from_dmatrix(x.as_dmatrix() + noise * sigma)
}

/// Entrywise negation; flips every channel's direction without touching the
/// spectrum.
pub fn negate(x: &FeatureMatrix) -> FeatureMatrix {
    x.negated()
}

/// Binary-searches the noise level whose sampled perturbation changes the
/// representation by the requested relative amount: `‖G‖_F / ‖X‖_F` within 2%
/// of `target_rel_change`.
pub fn calibrate_noise_sigma(
    x: &FeatureMatrix,
    target_rel_change: f64,
    seed: u64,
) -> Result<f64> {
    if target_rel_change < 0.0 || !target_rel_change.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "target relative change must be nonnegative and finite, got {target_rel_change}"
        )));
    }
    if target_rel_change == 0.0 {
        return Ok(0.0);
    }
    let x_norm = x.frobenius_norm();
    if x_norm == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let rel_change = |sigma: f64| -> Result<f64> {
        let perturbed = perturb_noise(x, sigma, seed)?;
        let diff = perturbed.as_dmatrix() - x.as_dmatrix();
        Ok(diff.norm() / x_norm)
    };

    let mut hi = 1.0;
    while rel_change(hi)? < target_rel_change {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::InvalidArgument(
                "noise calibration diverged; target unreachable".into(),
            ));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let change = rel_change(mid)?;
        if (change - target_rel_change).abs() <= 0.02 * target_rel_change {
            return Ok(mid);
        }
        if change < target_rel_change {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
