//! Log-domain probability densities: Dirichlet, exponential, isotropic
//! Gaussian, the per-pixel word likelihood, and the full model joint.

use statrs::function::gamma::ln_gamma;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::types::{ChainState, EndmemberModel, Hyperparameters, Simplex, WordLikelihoodMode};

/// Log Dirichlet density of `x` under the given concentration vector.
///
/// Entries of `x` (and of the concentration, which may contain underflowed
/// products like pi*s) are clamped at `floor` before logs, keeping the result
/// finite at simplex boundaries where the density is unbounded.
pub fn log_dirichlet_pdf(x: &Simplex, concentration: &[f64], floor: f64) -> Result<f64> {
    if concentration.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: concentration.len(),
            context: "Dirichlet concentration length",
        });
    }
    for (index, &a) in concentration.iter().enumerate() {
        if !(a > 0.0) {
            return Err(Error::NonpositiveConcentration { index, value: a });
        }
    }
    let mut log_norm = 0.0;
    let mut conc_sum = 0.0;
    let mut log_kernel = 0.0;
    for (&w, &a) in x.weights().iter().zip(concentration) {
        let a = a.max(floor);
        conc_sum += a;
        log_norm -= ln_gamma(a);
        log_kernel += (a - 1.0) * w.max(floor).ln();
    }
    Ok(ln_gamma(conc_sum) + log_norm + log_kernel)
}

/// Log density of the exponential distribution: `ln(rate) - rate * s`.
pub fn log_exponential_pdf(s: f64, rate: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::NonpositiveValue { name: "s", value: s });
    }
    if !(rate > 0.0) {
        return Err(Error::NonpositiveValue {
            name: "rate",
            value: rate,
        });
    }
    Ok(rate.ln() - rate * s)
}

/// Log density of `N(x | mean, sigma2 I)`.
///
/// Dimensions must match; this sits in every sampler inner loop, so the check
/// is a debug assertion rather than a `Result`.
pub fn log_gaussian_iso(x: &[f64], mean: &[f64], sigma2: f64) -> f64 {
    debug_assert_eq!(x.len(), mean.len());
    let m = x.len() as f64;
    let sq: f64 = x
        .iter()
        .zip(mean)
        .map(|(a, b)| {
            let d = a - b;
            d * d
        })
        .sum();
    -0.5 * m * (2.0 * std::f64::consts::PI * sigma2).ln() - sq / (2.0 * sigma2)
}

/// Mixed mean `sum_k z_k mu_k`.
pub(crate) fn mixed_mean(z: &Simplex, means: &[Vec<f64>]) -> Vec<f64> {
    let bands = means[0].len();
    let mut out = vec![0.0; bands];
    for (&w, mean) in z.weights().iter().zip(means) {
        for (o, &m) in out.iter_mut().zip(mean) {
            *o += w * m;
        }
    }
    out
}

/// Log likelihood of one pixel under the membership-weighted topic Gaussians.
///
/// `Normalized` evaluates the renormalized geometric mean, which for a shared
/// isotropic covariance is `N(x | sum_k z_k mu_k, sigma2 I)`. `RawProduct`
/// evaluates the literal exponentiated product `sum_k z_k log N(x | mu_k,
/// sigma2 I)`; the two differ by `-D(z)/(2 sigma2)` where
/// `D(z) = sum_k z_k |mu_k|^2 - |sum_k z_k mu_k|^2 >= 0`.
pub fn log_word_likelihood(
    x: &[f64],
    z: &Simplex,
    model: &EndmemberModel,
    mode: WordLikelihoodMode,
) -> Result<f64> {
    if z.len() != model.num_topics() {
        return Err(Error::DimensionMismatch {
            expected: model.num_topics(),
            got: z.len(),
            context: "membership length vs topic count",
        });
    }
    if x.len() != model.bands() {
        return Err(Error::DimensionMismatch {
            expected: model.bands(),
            got: x.len(),
            context: "pixel length vs model bands",
        });
    }
    Ok(match mode {
        WordLikelihoodMode::Normalized => {
            let mean = mixed_mean(z, &model.means);
            log_gaussian_iso(x, &mean, model.sigma2)
        }
        WordLikelihoodMode::RawProduct => z
            .weights()
            .iter()
            .zip(&model.means)
            .map(|(&w, mean)| w * log_gaussian_iso(x, mean, model.sigma2))
            .sum(),
    })
}

/// Per-document slice of the joint: the pi prior, s prior, and every pixel's
/// membership prior and word likelihood.
pub fn log_document_joint(
    doc: &crate::types::Document,
    corpus: &Corpus,
    model: &EndmemberModel,
    hp: &Hyperparameters,
) -> Result<f64> {
    let floor = hp.membership_floor;
    let mut total = log_dirichlet_pdf(&doc.pi, &hp.alpha_vector(), floor)?;
    total += log_exponential_pdf(doc.s, hp.lambda)?;
    let conc: Vec<f64> = doc.pi.weights().iter().map(|&p| p * doc.s).collect();
    for (z, &n) in doc.memberships.iter().zip(doc.pixel_indices.iter()) {
        total += log_dirichlet_pdf(z, &conc, floor)?;
        total += log_word_likelihood(corpus.cube().pixel(n), z, model, hp.word_likelihood_mode)?;
    }
    Ok(total)
}

/// Full joint log density of the chain state: the sum of
/// [`log_document_joint`] over all documents.
pub fn log_joint(state: &ChainState, corpus: &Corpus, hp: &Hyperparameters) -> Result<f64> {
    let mut total = 0.0;
    for doc in &state.documents {
        total += log_document_joint(doc, corpus, &state.model, hp)?;
    }
    Ok(total)
}
