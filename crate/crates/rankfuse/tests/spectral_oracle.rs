//! Spectral primitives cross-checked against the independent Gram-eigenvalue
//! oracle.

mod common;

use common::{gram_effective_rank, gram_singular_values, random_matrix, random_orthogonal};
use rankfuse::spectral::{decompose, dominant_subspace, effective_rank, spectral_gap};
use rankfuse::FeatureMatrix;

#[test]
fn random_decomposition_reconstructs_and_matches_oracle() {
    let x = random_matrix(8, 4, 7);
    let dec = decompose(&x).unwrap();

    let sigmas = dec.singular_values();
    assert!(sigmas.windows(2).all(|w| w[0] >= w[1]), "not sorted: {sigmas:?}");

    // Reconstruction: ‖X − UΣVᵀ‖_F ≤ 1e-6 ‖X‖_F.
    let u = dec.left_vectors();
    let v = dec.right_vectors();
    let mut sigma = nalgebra::DMatrix::zeros(sigmas.len(), sigmas.len());
    for (i, &s) in sigmas.iter().enumerate() {
        sigma[(i, i)] = s;
    }
    let reconstruction = u * sigma * v.transpose();
    let err = (x.as_dmatrix() - &reconstruction).norm();
    assert!(err <= 1e-6 * x.frobenius_norm(), "reconstruction error {err}");

    // Orthonormal factors.
    let gram_u = u.transpose() * u;
    let gram_v = v.transpose() * v;
    for i in 0..gram_u.nrows() {
        for j in 0..gram_u.ncols() {
            let expected = if i == j { 1.0 } else { 0.0 };
            assert!((gram_u[(i, j)] - expected).abs() < 1e-8);
            assert!((gram_v[(i, j)] - expected).abs() < 1e-8);
        }
    }

    // Singular values agree with sqrt(eig(XᵀX)) from the Jacobi oracle.
    let oracle = gram_singular_values(&x);
    assert_eq!(oracle.len(), sigmas.len());
    for (a, b) in sigmas.iter().zip(&oracle) {
        assert!((a - b).abs() <= 1e-8 * oracle[0].max(1.0), "{a} vs {b}");
    }
}

#[test]
fn spectral_gap_matches_oracle_on_random_input() {
    let x = random_matrix(10, 6, 21);
    let dec = decompose(&x).unwrap();
    let oracle = gram_singular_values(&x);
    let gap = spectral_gap(&dec, 3).unwrap();
    assert!((gap - (oracle[2] - oracle[3])).abs() <= 1e-8 * oracle[0]);
}

#[test]
fn dominant_subspace_projector_is_idempotent() {
    let x = random_matrix(8, 4, 3);
    let dec = decompose(&x).unwrap();
    let basis = dominant_subspace(&dec, 2).unwrap();
    let b = basis.as_dmatrix();
    let projector = b * b.transpose();
    let twice = &projector * &projector;
    let drift = (&twice - &projector).norm();
    assert!(drift <= 1e-8, "P² − P has norm {drift}");
}

#[test]
fn effective_rank_agrees_with_gram_route() {
    for seed in 0..50u64 {
        let rows = 4 + (seed as usize % 13);
        let cols = 2 + (seed as usize % 7);
        let x = random_matrix(rows, cols, 1000 + seed);
        let via_svd = effective_rank(&x).unwrap().effective_rank();
        let via_gram = gram_effective_rank(&x);
        assert!(
            (via_svd - via_gram).abs() <= 1e-8,
            "seed {seed}: {via_svd} vs {via_gram}"
        );
    }
}

#[test]
fn singular_values_obey_weyl_perturbation_bound() {
    for seed in 0..20u64 {
        let x = random_matrix(9, 5, 300 + seed);
        let delta = random_matrix(9, 5, 400 + seed);
        let scale = 0.05 * (seed as f64 + 1.0) / 4.0;
        let perturbed = FeatureMatrix::from_dmatrix(
            x.as_dmatrix() + delta.as_dmatrix() * scale,
        )
        .unwrap();
        let s_x = decompose(&x).unwrap().singular_values().to_vec();
        let s_p = decompose(&perturbed).unwrap().singular_values().to_vec();
        let delta_spectral =
            rankfuse::spectral::spectral_norm(&(delta.as_dmatrix() * scale));
        for (a, b) in s_x.iter().zip(&s_p) {
            assert!(
                (a - b).abs() <= delta_spectral * (1.0 + 1e-9) + 1e-12,
                "seed {seed}: |{a} - {b}| > {delta_spectral}"
            );
        }
    }
}

#[test]
fn effective_rank_is_orthogonally_invariant() {
    let x = random_matrix(7, 5, 77);
    let base = effective_rank(&x).unwrap().effective_rank();
    let q = random_orthogonal(7, 78);
    let r = random_orthogonal(5, 79);
    let left = FeatureMatrix::from_dmatrix(&q * x.as_dmatrix()).unwrap();
    let right = FeatureMatrix::from_dmatrix(x.as_dmatrix() * &r).unwrap();
    assert!((effective_rank(&left).unwrap().effective_rank() - base).abs() <= 1e-8);
    assert!((effective_rank(&right).unwrap().effective_rank() - base).abs() <= 1e-8);
}
