//! Property tests for the density identities and preprocessing invariants.

use std::sync::Arc;

use pmlda_core::corpus::{build_corpus, grid_segmentation, normalize_pixels, SegmentationMap};
use pmlda_core::density::{log_joint, log_word_likelihood};
use pmlda_core::metrics::proportion_entropy;
use pmlda_core::types::{
    ChainState, Document, EndmemberModel, Hyperparameters, HyperspectralCube, Simplex,
    WordLikelihoodMode,
};
use proptest::prelude::*;

fn simplex_strategy(k: usize) -> impl Strategy<Value = Simplex> {
    prop::collection::vec(0.01..1.0f64, k)
        .prop_map(|raw| Simplex::project(raw).expect("positive weights"))
}

fn means_strategy(k: usize, bands: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-2.0..2.0f64, bands), k)
}

/// Quadratic spread of the means under the membership weights:
/// `D(z) = sum_k z_k |mu_k|^2 - |sum_k z_k mu_k|^2`.
fn membership_spread(z: &Simplex, means: &[Vec<f64>]) -> f64 {
    let bands = means[0].len();
    let mut mixed = vec![0.0; bands];
    let mut weighted_norm2 = 0.0;
    for (&w, mean) in z.weights().iter().zip(means) {
        let norm2: f64 = mean.iter().map(|v| v * v).sum();
        weighted_norm2 += w * norm2;
        for (acc, &m) in mixed.iter_mut().zip(mean) {
            *acc += w * m;
        }
    }
    weighted_norm2 - mixed.iter().map(|v| v * v).sum::<f64>()
}

proptest! {
    #[test]
    fn word_likelihood_invariant_under_topic_permutation(
        z in simplex_strategy(4),
        means in means_strategy(4, 3),
        x in prop::collection::vec(-2.0..2.0f64, 3),
        sigma2 in 0.05..2.0f64,
        swap_a in 0usize..4,
        swap_b in 0usize..4,
    ) {
        let model = EndmemberModel::new(means.clone(), sigma2).unwrap();
        let mut perm_means = means;
        perm_means.swap(swap_a, swap_b);
        let mut perm_weights = z.weights().to_vec();
        perm_weights.swap(swap_a, swap_b);
        let perm_z = Simplex::new(perm_weights).unwrap();
        let perm_model = EndmemberModel::new(perm_means, sigma2).unwrap();
        for mode in [WordLikelihoodMode::Normalized, WordLikelihoodMode::RawProduct] {
            let a = log_word_likelihood(&x, &z, &model, mode).unwrap();
            let b = log_word_likelihood(&x, &perm_z, &perm_model, mode).unwrap();
            prop_assert!((a - b).abs() < 1e-10, "{mode:?}: {a} vs {b}");
        }
    }

    #[test]
    fn raw_minus_normalized_equals_negative_spread(
        z in simplex_strategy(3),
        means in means_strategy(3, 4),
        x in prop::collection::vec(-2.0..2.0f64, 4),
        sigma2 in 0.05..2.0f64,
    ) {
        let model = EndmemberModel::new(means.clone(), sigma2).unwrap();
        let raw = log_word_likelihood(&x, &z, &model, WordLikelihoodMode::RawProduct).unwrap();
        let norm = log_word_likelihood(&x, &z, &model, WordLikelihoodMode::Normalized).unwrap();
        let spread = membership_spread(&z, &means);
        prop_assert!(spread >= -1e-12, "spread must be nonnegative, got {spread}");
        prop_assert!(
            (raw - norm + spread / (2.0 * sigma2)).abs() < 1e-8,
            "raw {raw} norm {norm} spread {spread}"
        );
    }

    #[test]
    fn entropy_stays_within_bounds(
        rows in prop::collection::vec(simplex_strategy(5), 1..20),
    ) {
        let h = proportion_entropy(&rows);
        let upper = rows.len() as f64 * 5.0f64.ln();
        prop_assert!(h >= 0.0);
        prop_assert!(h <= upper + 1e-9);
    }

    #[test]
    fn normalization_produces_unit_norms_and_is_idempotent(
        values in prop::collection::vec(0.05..3.0f64, 24),
    ) {
        let cube = HyperspectralCube::new(2, 3, 4, values).unwrap();
        let once = normalize_pixels(&cube).unwrap();
        for pixel in once.pixels() {
            let norm: f64 = pixel.spectrum.iter().map(|v| v * v).sum::<f64>().sqrt();
            prop_assert!((norm - 1.0).abs() < 1e-9);
        }
        let twice = normalize_pixels(&once).unwrap();
        for (a, b) in once.values().iter().zip(twice.values()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_corpus_partitions_pixels(
        rows in 1usize..12,
        cols in 1usize..12,
        block in 1usize..6,
    ) {
        let values: Vec<f64> = (0..rows * cols * 2).map(|i| (i % 13) as f64 + 0.5).collect();
        let cube = HyperspectralCube::new(rows, cols, 2, values).unwrap();
        let seg = grid_segmentation(rows, cols, block);
        let corpus = build_corpus(cube, &seg).unwrap();
        let mut seen = vec![false; rows * cols];
        for d in 0..corpus.num_documents() {
            for &n in corpus.document_pixels(d).iter() {
                prop_assert!(!seen[n]);
                seen[n] = true;
            }
        }
        prop_assert!(seen.iter().all(|&s| s));
    }
}

// ---------------------------------------------------------------------------
// Quadrature identities (deterministic)
// ---------------------------------------------------------------------------

fn quadrature_mass(
    model: &EndmemberModel,
    z: &Simplex,
    mode: WordLikelihoodMode,
    center: f64,
    half_width: f64,
    points: usize,
) -> f64 {
    let step = 2.0 * half_width / points as f64;
    let mut mass = 0.0;
    for i in 0..points {
        let x = center - half_width + (i as f64 + 0.5) * step;
        mass += log_word_likelihood(&[x], z, model, mode).unwrap().exp() * step;
    }
    mass
}

#[test]
fn normalized_mode_integrates_to_one() {
    let model = EndmemberModel::new(vec![vec![-0.4], vec![0.9], vec![2.1]], 0.3).unwrap();
    let zs = [
        Simplex::uniform(3),
        Simplex::new(vec![0.7, 0.2, 0.1]).unwrap(),
        Simplex::one_hot(3, 2),
    ];
    for z in &zs {
        let center: f64 = z
            .weights()
            .iter()
            .zip(&model.means)
            .map(|(&w, mean)| w * mean[0])
            .sum();
        let mass = quadrature_mass(&model, z, WordLikelihoodMode::Normalized, center, 10.0, 40_000);
        assert!((mass - 1.0).abs() < 1e-6, "mass {mass} for z {z:?}");
    }
}

#[test]
fn raw_product_integrates_to_spread_deficit() {
    // The unnormalized product integrates to exp(-D(z) / (2 sigma2)).
    let model = EndmemberModel::new(vec![vec![0.0], vec![1.5]], 0.4).unwrap();
    let z = Simplex::new(vec![0.6, 0.4]).unwrap();
    let center = 0.4 * 1.5;
    let mass = quadrature_mass(&model, &z, WordLikelihoodMode::RawProduct, center, 10.0, 40_000);
    let spread = membership_spread(&z, &model.means);
    let expected = (-spread / (2.0 * 0.4)).exp();
    assert!(
        (mass - expected).abs() < 1e-6,
        "mass {mass} vs expected {expected}"
    );
}

// ---------------------------------------------------------------------------
// Joint sensitivity to lambda
// ---------------------------------------------------------------------------

#[test]
fn joint_lambda_slope_matches_exponential_prior_derivative() {
    // Only the exponential prior terms involve lambda; their derivative is
    // sum_d (1/lambda - s_d). With sum s_d > D/lambda the joint strictly
    // decreases in lambda.
    let cube = HyperspectralCube::new(1, 2, 1, vec![0.2, 0.8]).unwrap();
    let seg = SegmentationMap::new(1, 2, vec![0, 1]).unwrap();
    let corpus = build_corpus(cube, &seg).unwrap();
    let model = EndmemberModel::new(vec![vec![0.5]], 0.2).unwrap();
    let s_values = [2.0, 3.5];
    let documents: Vec<Document> = (0..2)
        .map(|d| Document {
            id: d,
            pixel_indices: Arc::clone(corpus.document_pixels(d)),
            pi: Simplex::one_hot(1, 0),
            s: s_values[d],
            memberships: vec![Simplex::one_hot(1, 0)],
        })
        .collect();
    let state = ChainState {
        documents,
        model,
        log_joint: 0.0,
    };
    let mut hp = Hyperparameters::new(1);
    hp.t = 2;
    hp.burn_in = 0;

    let lambda = 1.25;
    let eps = 1e-6;
    let at = |l: f64| {
        let mut h = hp.clone();
        h.lambda = l;
        log_joint(&state, &corpus, &h).unwrap()
    };
    let slope = (at(lambda + eps) - at(lambda - eps)) / (2.0 * eps);
    let d = 2.0;
    let sum_s: f64 = s_values.iter().sum();
    let expected = d / lambda - sum_s;
    assert!(
        (slope - expected).abs() < 1e-4,
        "slope {slope} vs expected {expected}"
    );
    // strictly decreasing here since sum s_d > D / lambda
    assert!(at(lambda + 0.1) < at(lambda));
}
