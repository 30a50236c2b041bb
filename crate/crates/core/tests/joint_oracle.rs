//! Checks the joint density against a straight-line evaluation written from
//! scratch (own ln-gamma, explicit formulas), and checks that every localized
//! acceptance ratio equals the corresponding full-joint ratio.

use std::sync::Arc;

use pmlda_core::corpus::{build_corpus, Corpus};
use pmlda_core::density::{
    log_dirichlet_pdf, log_exponential_pdf, log_joint, log_word_likelihood,
};
use pmlda_core::rng::{sample_dirichlet, sample_exponential, substream, Stream};
use pmlda_core::sampler::{
    mu_log_acceptance, pi_log_acceptance, s_log_acceptance, sigma2_log_acceptance,
    z_log_acceptance,
};
use pmlda_core::types::{
    ChainState, Document, EndmemberModel, Hyperparameters, HyperspectralCube, Simplex,
    WordLikelihoodMode,
};
use rand::Rng;

// ---------------------------------------------------------------------------
// Independent ln-gamma (Lanczos, g = 7, 9 terms)
// ---------------------------------------------------------------------------

const LANCZOS: [f64; 8] = [
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
];

fn ln_gamma_ref(x: f64) -> f64 {
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        (pi / (pi * x).sin()).ln() - ln_gamma_ref(1.0 - x)
    } else {
        let x = x - 1.0;
        let mut acc = 0.99999999999980993;
        for (i, &c) in LANCZOS.iter().enumerate() {
            acc += c / (x + i as f64 + 1.0);
        }
        let t = x + 7.5;
        0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
    }
}

#[test]
fn reference_ln_gamma_matches_known_values() {
    let cases = [
        (0.5, std::f64::consts::PI.sqrt().ln()),
        (1.0, 0.0),
        (2.0, 0.0),
        (5.0, 24.0_f64.ln()),
        (7.0, 720.0_f64.ln()),
    ];
    for (x, want) in cases {
        assert!((ln_gamma_ref(x) - want).abs() < 1e-12, "lgamma({x})");
    }
}

// ---------------------------------------------------------------------------
// Straight-line joint
// ---------------------------------------------------------------------------

fn dirichlet_ref(x: &[f64], conc: &[f64], floor: f64) -> f64 {
    let total: f64 = conc.iter().map(|&a| a.max(floor)).sum();
    let mut v = ln_gamma_ref(total);
    for (&xi, &ai) in x.iter().zip(conc) {
        let ai = ai.max(floor);
        v -= ln_gamma_ref(ai);
        v += (ai - 1.0) * xi.max(floor).ln();
    }
    v
}

fn gaussian_ref(x: &[f64], mean: &[f64], sigma2: f64) -> f64 {
    let m = x.len() as f64;
    let mut quad = 0.0;
    for (&a, &b) in x.iter().zip(mean) {
        quad += (a - b) * (a - b);
    }
    -0.5 * m * (2.0 * std::f64::consts::PI * sigma2).ln() - quad / (2.0 * sigma2)
}

fn word_ref(x: &[f64], z: &[f64], means: &[Vec<f64>], sigma2: f64, raw: bool) -> f64 {
    if raw {
        z.iter()
            .zip(means)
            .map(|(&w, mean)| w * gaussian_ref(x, mean, sigma2))
            .sum()
    } else {
        let bands = x.len();
        let mut mixed = vec![0.0; bands];
        for (&w, mean) in z.iter().zip(means) {
            for (acc, &m) in mixed.iter_mut().zip(mean) {
                *acc += w * m;
            }
        }
        gaussian_ref(x, &mixed, sigma2)
    }
}

fn joint_ref(state: &ChainState, corpus: &Corpus, hp: &Hyperparameters) -> f64 {
    let raw = hp.word_likelihood_mode == WordLikelihoodMode::RawProduct;
    let mut total = 0.0;
    for doc in &state.documents {
        total += dirichlet_ref(doc.pi.weights(), &vec![hp.alpha; hp.k], hp.membership_floor);
        total += hp.lambda.ln() - hp.lambda * doc.s;
        let conc: Vec<f64> = doc.pi.weights().iter().map(|&p| p * doc.s).collect();
        for (z, &n) in doc.memberships.iter().zip(doc.pixel_indices.iter()) {
            total += dirichlet_ref(z.weights(), &conc, hp.membership_floor);
            total += word_ref(
                corpus.cube().pixel(n),
                z.weights(),
                &state.model.means,
                state.model.sigma2,
                raw,
            );
        }
    }
    total
}

// ---------------------------------------------------------------------------
// Random small instances
// ---------------------------------------------------------------------------

fn random_instance(seed: u64, mode: WordLikelihoodMode) -> (Corpus, ChainState, Hyperparameters) {
    let mut rng = substream(seed, 0, Stream::Generator);
    let rows = 2;
    let cols = 2;
    let bands = 2;
    let values: Vec<f64> = (0..rows * cols * bands)
        .map(|_| rng.random::<f64>())
        .collect();
    let cube = HyperspectralCube::new(rows, cols, bands, values).unwrap();
    // two documents of two pixels each
    let seg = pmlda_core::corpus::SegmentationMap::new(rows, cols, vec![0, 0, 1, 1]).unwrap();
    let corpus = build_corpus(cube, &seg).unwrap();

    let mut hp = Hyperparameters::new(2);
    hp.alpha = 1.5 + rng.random::<f64>();
    hp.lambda = 0.5 + rng.random::<f64>();
    hp.t = 4;
    hp.burn_in = 1;
    hp.seed = seed;
    hp.word_likelihood_mode = mode;

    let means = vec![
        vec![rng.random::<f64>(), rng.random::<f64>()],
        vec![rng.random::<f64>(), rng.random::<f64>()],
    ];
    let model = EndmemberModel::new(means, 0.05 + rng.random::<f64>()).unwrap();
    let documents: Vec<Document> = (0..corpus.num_documents())
        .map(|d| {
            let pixel_indices: Arc<[usize]> = Arc::clone(corpus.document_pixels(d));
            let memberships = (0..pixel_indices.len())
                .map(|_| sample_dirichlet(&mut rng, &[2.0, 2.0]))
                .collect();
            Document {
                id: d,
                pixel_indices,
                pi: sample_dirichlet(&mut rng, &[3.0, 3.0]),
                s: sample_exponential(&mut rng, 1.0) + 0.2,
                memberships,
            }
        })
        .collect();
    let mut state = ChainState {
        documents,
        model,
        log_joint: 0.0,
    };
    state.log_joint = log_joint(&state, &corpus, &hp).unwrap();
    (corpus, state, hp)
}

#[test]
fn joint_matches_straight_line_oracle() {
    for seed in 0..20 {
        for mode in [WordLikelihoodMode::Normalized, WordLikelihoodMode::RawProduct] {
            let (corpus, state, hp) = random_instance(seed, mode);
            let got = log_joint(&state, &corpus, &hp).unwrap();
            let want = joint_ref(&state, &corpus, &hp);
            assert!(
                (got - want).abs() < 1e-10,
                "seed {seed} mode {mode:?}: {got} vs {want}"
            );
        }
    }
}

#[test]
fn joint_equals_sum_of_component_operations() {
    let (corpus, state, hp) = random_instance(77, WordLikelihoodMode::Normalized);
    let mut total = 0.0;
    for doc in &state.documents {
        total += log_dirichlet_pdf(&doc.pi, &hp.alpha_vector(), hp.membership_floor).unwrap();
        total += log_exponential_pdf(doc.s, hp.lambda).unwrap();
        let conc: Vec<f64> = doc.pi.weights().iter().map(|&p| p * doc.s).collect();
        for (z, &n) in doc.memberships.iter().zip(doc.pixel_indices.iter()) {
            total += log_dirichlet_pdf(z, &conc, hp.membership_floor).unwrap();
            total += log_word_likelihood(
                corpus.cube().pixel(n),
                z,
                &state.model,
                hp.word_likelihood_mode,
            )
            .unwrap();
        }
    }
    let got = log_joint(&state, &corpus, &hp).unwrap();
    assert!((got - total).abs() < 1e-12);
}

#[test]
fn single_topic_single_pixel_joint_collapses() {
    // K=1: both Dirichlet terms are log(1) = 0, so the joint reduces to the
    // exponential prior plus one Gaussian.
    let cube = HyperspectralCube::new(1, 1, 2, vec![0.3, 0.4]).unwrap();
    let seg = pmlda_core::corpus::SegmentationMap::new(1, 1, vec![0]).unwrap();
    let corpus = build_corpus(cube, &seg).unwrap();
    let mut hp = Hyperparameters::new(1);
    hp.lambda = 1.3;
    hp.t = 2;
    hp.burn_in = 0;
    let model = EndmemberModel::new(vec![vec![0.25, 0.45]], 0.2).unwrap();
    let doc = Document {
        id: 0,
        pixel_indices: Arc::clone(corpus.document_pixels(0)),
        pi: Simplex::one_hot(1, 0),
        s: 0.8,
        memberships: vec![Simplex::one_hot(1, 0)],
    };
    let state = ChainState {
        documents: vec![doc],
        model,
        log_joint: 0.0,
    };
    let got = log_joint(&state, &corpus, &hp).unwrap();
    let want = log_exponential_pdf(0.8, 1.3).unwrap()
        + log_word_likelihood(
            corpus.cube().pixel(0),
            &Simplex::one_hot(1, 0),
            &state.model,
            hp.word_likelihood_mode,
        )
        .unwrap();
    assert!((got - want).abs() < 1e-12);
}

// ---------------------------------------------------------------------------
// Localized acceptance ratios vs full-joint ratios
// ---------------------------------------------------------------------------

fn assert_close(a: f64, b: f64, what: &str, seed: u64) {
    assert!(
        (a - b).abs() < 1e-8,
        "{what} (seed {seed}): localized {a} vs global {b}"
    );
}

#[test]
fn localized_ratios_equal_full_joint_ratios() {
    for seed in 100..120 {
        for mode in [WordLikelihoodMode::Normalized, WordLikelihoodMode::RawProduct] {
            let (corpus, state, hp) = random_instance(seed, mode);
            let mut rng = substream(seed, 1, Stream::Generator);
            let base = log_joint(&state, &corpus, &hp).unwrap();

            // pi: prior proposal cancels the Dirichlet prior
            let cand_pi = sample_dirichlet(&mut rng, &hp.alpha_vector());
            let localized = pi_log_acceptance(&state.documents[0], &cand_pi, &hp).unwrap();
            let mut modified = state.clone();
            modified.documents[0].pi = cand_pi.clone();
            let global = log_joint(&modified, &corpus, &hp).unwrap() - base
                + log_dirichlet_pdf(&state.documents[0].pi, &hp.alpha_vector(), hp.membership_floor)
                    .unwrap()
                - log_dirichlet_pdf(&cand_pi, &hp.alpha_vector(), hp.membership_floor).unwrap();
            assert_close(localized, global, "pi ratio", seed);

            // s: prior proposal cancels the exponential prior
            let cand_s = sample_exponential(&mut rng, hp.lambda) + 0.05;
            let localized = s_log_acceptance(&state.documents[0], cand_s, &hp).unwrap();
            let mut modified = state.clone();
            modified.documents[0].s = cand_s;
            let global = log_joint(&modified, &corpus, &hp).unwrap() - base
                + log_exponential_pdf(state.documents[0].s, hp.lambda).unwrap()
                - log_exponential_pdf(cand_s, hp.lambda).unwrap();
            assert_close(localized, global, "s ratio", seed);

            // z: symmetric uniform proposal, plain joint ratio
            let cand_z = sample_dirichlet(&mut rng, &[1.0, 1.0]);
            let localized =
                z_log_acceptance(&state.documents[1], 1, &cand_z, &corpus, &state.model, &hp)
                    .unwrap();
            let mut modified = state.clone();
            modified.documents[1].memberships[1] = cand_z;
            let global = log_joint(&modified, &corpus, &hp).unwrap() - base;
            assert_close(localized, global, "z ratio", seed);

            // mu: data-Gaussian proposal with correction
            let cand_mu = corpus.mean_proposal().sample(&mut rng, corpus.data_mean());
            let localized = mu_log_acceptance(&state, &corpus, 1, &cand_mu, &hp).unwrap();
            let mut modified = state.clone();
            modified.model.means[1] = cand_mu.clone();
            let correction = corpus
                .mean_proposal()
                .log_pdf(&state.model.means[1], corpus.data_mean())
                - corpus.mean_proposal().log_pdf(&cand_mu, corpus.data_mean());
            let global = log_joint(&modified, &corpus, &hp).unwrap() - base + correction;
            assert_close(localized, global, "mu ratio", seed);

            // sigma2: symmetric uniform proposal, plain joint ratio
            let cand_sigma2 = 0.02 + rng.random::<f64>();
            let localized = sigma2_log_acceptance(&state, &corpus, cand_sigma2, &hp).unwrap();
            let mut modified = state.clone();
            modified.model.sigma2 = cand_sigma2;
            let global = log_joint(&modified, &corpus, &hp).unwrap() - base;
            assert_close(localized, global, "sigma2 ratio", seed);
        }
    }
}
