//! Fusion and optimizer behavior on constructed and generated inputs.

mod common;

use rankfuse::fusion::{
    blend, erank_gain_pair, optimize_blend, symmetric_fuse, BlendSpec, OptimizerConfig,
};
use rankfuse::informativeness::{
    channel_importance, select_low_channels, LowChannelSet, SelectionMode,
};
use rankfuse::spectral::effective_rank;
use rankfuse::synth::{gen_complementary_pair, GeneratorConfig};
use rankfuse::FeatureMatrix;

fn bottom_set(m: &FeatureMatrix, count: usize) -> LowChannelSet {
    let profile = channel_importance(m, None).unwrap();
    select_low_channels(&profile, SelectionMode::BottomCount(count)).unwrap()
}

#[test]
fn complementary_pair_gains_in_both_directions() {
    let mut config = GeneratorConfig::new(64, 16, 3, 3);
    config.gamma_target = 0.1;
    let (a, b) = gen_complementary_pair(&config).unwrap();
    let n = config.effective_low_count();
    let spec_a = BlendSpec::uniform(bottom_set(&a, n), 0.3).unwrap();
    let spec_b = BlendSpec::uniform(bottom_set(&b, n), 0.3).unwrap();
    let (ra, rb) = symmetric_fuse(&a, &b, &spec_a, &spec_b).unwrap();
    assert!(ra.erank_gain > 0.0, "gain A {}", ra.erank_gain);
    assert!(rb.erank_gain > 0.0, "gain B {}", rb.erank_gain);
}

#[test]
fn optimizer_matches_a_dense_grid_on_one_channel() {
    // X carries two strong axes and one weak channel; Y offers a large
    // orthogonal direction, so over-blending overshoots and the optimum is
    // interior.
    let mut x = nalgebra::DMatrix::zeros(6, 3);
    x[(0, 0)] = 3.0;
    x[(1, 1)] = 0.5;
    x[(2, 2)] = 0.01;
    let x = FeatureMatrix::from_dmatrix(x).unwrap();
    let mut y = nalgebra::DMatrix::zeros(6, 3);
    y[(3, 2)] = 5.0;
    let y = FeatureMatrix::from_dmatrix(y).unwrap();
    let low = LowChannelSet::from_indices(vec![2], 3).unwrap();

    // 1001-point grid oracle.
    let mut best_alpha = 0.0;
    let mut best_value = f64::NEG_INFINITY;
    for step in 0..=1000 {
        let alpha = step as f64 / 1000.0;
        let spec = BlendSpec::uniform(low.clone(), alpha).unwrap();
        let value = blend(&x, &y, &spec).unwrap().erank_after;
        if value > best_value {
            best_value = value;
            best_alpha = alpha;
        }
    }
    assert!(best_alpha > 0.01 && best_alpha < 0.99, "expected interior optimum");

    let config = OptimizerConfig {
        seed: 12,
        iterations: 400,
        ..OptimizerConfig::default()
    };
    let optimized = optimize_blend(&x, &y, &low, &config).unwrap();
    let found = optimized.spec.alpha(2).unwrap();
    assert!(
        (found - best_alpha).abs() <= 1e-3,
        "optimizer found {found}, grid says {best_alpha}"
    );
}

#[test]
fn optimizer_never_loses_to_the_identity_blend() {
    let mut config = GeneratorConfig::new(48, 16, 3, 9);
    config.gamma_target = 0.05;
    let (x, y) = gen_complementary_pair(&config).unwrap();
    let low = bottom_set(&x, 2);
    let opt = optimize_blend(
        &x,
        &y,
        &low,
        &OptimizerConfig {
            seed: 4,
            iterations: 100,
            ..OptimizerConfig::default()
        },
    )
    .unwrap();
    // α = 1 (gain 0) is feasible, so the optimized gain must be nonnegative
    // up to the optimizer's own guarantee relative to its initialization.
    let erank_x = effective_rank(&x).unwrap().effective_rank();
    assert!(opt.objective >= opt.initial_objective - 1e-9);
    assert!(opt.objective - erank_x >= 0.0, "optimized gain negative");
}

#[test]
fn gain_pair_matches_direct_recomputation() {
    let mut config = GeneratorConfig::new(40, 12, 2, 11);
    config.gamma_target = 0.15;
    let (a, b) = gen_complementary_pair(&config).unwrap();
    let spec_a = BlendSpec::uniform(bottom_set(&a, 1), 0.25).unwrap();
    let spec_b = BlendSpec::uniform(bottom_set(&b, 1), 0.25).unwrap();
    let (ra, rb) = symmetric_fuse(&a, &b, &spec_a, &spec_b).unwrap();
    let (da, db) = erank_gain_pair(&a, &b, &ra.fused, &rb.fused).unwrap();
    let ea = effective_rank(&a).unwrap().effective_rank();
    let eb = effective_rank(&b).unwrap().effective_rank();
    let ea_f = effective_rank(&ra.fused).unwrap().effective_rank();
    let eb_f = effective_rank(&rb.fused).unwrap().effective_rank();
    assert!((da - (ea_f - ea)).abs() <= 1e-12);
    assert!((db - (eb_f - eb)).abs() <= 1e-12);
    assert!((da - ra.erank_gain).abs() <= 1e-12);
    assert!((db - rb.erank_gain).abs() <= 1e-12);
}

#[test]
fn adding_an_independent_direction_to_rank_one_raises_erank() {
    // Rank-one matrix: every column proportional to e1.
    let mut a = nalgebra::DMatrix::zeros(5, 3);
    for c in 0..3 {
        a[(0, c)] = (c + 1) as f64;
    }
    let a = FeatureMatrix::from_dmatrix(a).unwrap();
    let mut fused = a.as_dmatrix().clone();
    fused[(1, 2)] = 2.0;
    let fused = FeatureMatrix::from_dmatrix(fused).unwrap();
    let (gain, _) = erank_gain_pair(&a, &a, &fused, &a).unwrap();
    assert!(gain > 0.0);
}
