//! Shared test support: an independent spectral oracle and matrix builders.
//!
//! The oracle recovers singular values as square roots of the eigenvalues of
//! the Gram matrix, computed with a hand-rolled cyclic Jacobi eigensolver. It
//! shares no code with the SVD path under test.

// Each integration-test binary uses a different subset of these helpers.
#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rankfuse::FeatureMatrix;

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, sorted
/// descending.
pub fn jacobi_eigenvalues(sym: &DMatrix<f64>) -> Vec<f64> {
    assert_eq!(sym.nrows(), sym.ncols(), "matrix must be square");
    let n = sym.nrows();
    let mut a = sym.clone();
    let scale = a.norm().max(1e-300);
    for _sweep in 0..200 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = 0.5 * (a[(q, q)] - a[(p, p)]) / apq;
                let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                let t = sign / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = c * aip - s * aiq;
                    a[(i, q)] = s * aip + c * aiq;
                }
                for i in 0..n {
                    let api = a[(p, i)];
                    let aqi = a[(q, i)];
                    a[(p, i)] = c * api - s * aqi;
                    a[(q, i)] = s * api + c * aqi;
                }
            }
        }
    }
    let mut eigs: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    eigs.sort_by(|x, y| y.partial_cmp(x).expect("finite"));
    eigs
}

/// Singular values via the Gram route: sqrt of eig(XᵀX) (or XXᵀ, whichever
/// is smaller), sorted descending.
pub fn gram_singular_values(m: &FeatureMatrix) -> Vec<f64> {
    let x = m.as_dmatrix();
    let gram = if x.nrows() >= x.ncols() {
        x.transpose() * x
    } else {
        x * x.transpose()
    };
    jacobi_eigenvalues(&gram)
        .into_iter()
        .map(|lambda| lambda.max(0.0).sqrt())
        .collect()
}

/// Effective rank recomputed fully independently from the Gram spectrum,
/// using the same numerical-rank convention.
pub fn gram_effective_rank(m: &FeatureMatrix) -> f64 {
    let sigmas = gram_singular_values(m);
    let cutoff = m.rows().max(m.cols()) as f64 * f64::EPSILON * sigmas[0];
    let retained: Vec<f64> = sigmas.into_iter().filter(|s| *s > cutoff).collect();
    let total: f64 = retained.iter().sum();
    let entropy: f64 = -retained
        .iter()
        .map(|s| {
            let p = s / total;
            if p > 0.0 {
                p * p.ln()
            } else {
                0.0
            }
        })
        .sum::<f64>();
    entropy.exp()
}

/// Seeded Gaussian matrix wrapped as a FeatureMatrix.
pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> FeatureMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = DMatrix::zeros(rows, cols);
    for c in 0..cols {
        for r in 0..rows {
            m[(r, c)] = rng.sample::<f64, _>(StandardNormal);
        }
    }
    FeatureMatrix::from_dmatrix(m).expect("gaussian draws are finite")
}

/// Random orthogonal matrix from the QR of a seeded Gaussian square matrix.
pub fn random_orthogonal(n: usize, seed: u64) -> DMatrix<f64> {
    let g = random_matrix(n, n, seed);
    g.as_dmatrix().clone().qr().q()
}

/// Path to the compiled CLI binary.
pub fn cli_bin() -> &'static str {
    env!("CARGO_BIN_EXE_rankfuse")
}

pub fn run_cli(args: &[&str], dir: &std::path::Path) -> (i32, String, String) {
    let output = std::process::Command::new(cli_bin())
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn rankfuse");
    (
        output.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&output.stdout).into_owned(),
        String::from_utf8_lossy(&output.stderr).into_owned(),
    )
}
