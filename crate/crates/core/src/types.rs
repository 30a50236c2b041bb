//! Domain types shared across the unmixing pipeline.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used when checking that simplex weights sum to one.
pub const SIMPLEX_TOL: f64 = 1e-9;

/// A hyperspectral image: `rows x cols` pixels, each a spectrum of `bands`
/// reflectance values. Stored pixel-major (all bands of pixel 0, then pixel 1,
/// ...), pixels in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperspectralCube {
    rows: usize,
    cols: usize,
    bands: usize,
    values: Vec<f64>,
}

impl HyperspectralCube {
    pub fn new(rows: usize, cols: usize, bands: usize, values: Vec<f64>) -> Result<Self> {
        if bands == 0 {
            return Err(Error::InvalidCube("bands must be >= 1".into()));
        }
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidCube("rows and cols must be >= 1".into()));
        }
        if values.len() != rows * cols * bands {
            return Err(Error::InvalidCube(format!(
                "value count {} does not equal rows*cols*bands = {}",
                values.len(),
                rows * cols * bands
            )));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidCube(format!(
                "non-finite reflectance at flat value index {bad}"
            )));
        }
        Ok(Self {
            rows,
            cols,
            bands,
            values,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn bands(&self) -> usize {
        self.bands
    }

    /// Total pixel count N = rows * cols.
    pub fn num_pixels(&self) -> usize {
        self.rows * self.cols
    }

    /// Spectrum of the pixel at flat (row-major) index `n`.
    pub fn pixel(&self, n: usize) -> &[f64] {
        let start = n * self.bands;
        &self.values[start..start + self.bands]
    }

    pub fn pixel_at(&self, row: usize, col: usize) -> &[f64] {
        self.pixel(row * self.cols + col)
    }

    /// Iterate over all pixels as (flat index, spectrum) views.
    pub fn pixels(&self) -> impl Iterator<Item = Pixel<'_>> {
        self.values
            .chunks_exact(self.bands)
            .enumerate()
            .map(|(flat_index, spectrum)| Pixel {
                flat_index,
                spectrum,
            })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
}

/// A view of one pixel: its spectrum and its flat row-major position.
#[derive(Debug, Clone, Copy)]
pub struct Pixel<'a> {
    pub flat_index: usize,
    pub spectrum: &'a [f64],
}

/// A point on the probability simplex: nonnegative weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Simplex(Vec<f64>);

impl Simplex {
    /// Validate and wrap a weight vector. Weights must be nonnegative and sum
    /// to one within [`SIMPLEX_TOL`].
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidSimplex("empty weight vector".into()));
        }
        let mut sum = 0.0;
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidSimplex(format!(
                    "weight {w} at index {i} is negative or non-finite"
                )));
            }
            sum += w;
        }
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::InvalidSimplex(format!(
                "weights sum to {sum}, expected 1"
            )));
        }
        Ok(Self(weights))
    }

    /// Clamp negatives to zero and renormalize. Errors only if the clamped sum
    /// is zero.
    pub fn project(mut weights: Vec<f64>) -> Result<Self> {
        for w in &mut weights {
            if !w.is_finite() {
                return Err(Error::InvalidSimplex(format!("non-finite weight {w}")));
            }
            if *w < 0.0 {
                *w = 0.0;
            }
        }
        let sum: f64 = weights.iter().sum();
        if sum <= 0.0 {
            return Err(Error::InvalidSimplex(
                "all weights zero after clamping".into(),
            ));
        }
        for w in &mut weights {
            *w /= sum;
        }
        Ok(Self(weights))
    }

    pub fn uniform(k: usize) -> Self {
        Self(vec![1.0 / k as f64; k])
    }

    pub fn one_hot(k: usize, index: usize) -> Self {
        let mut w = vec![0.0; k];
        w[index] = 1.0;
        Self(w)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }
}

impl AsRef<[f64]> for Simplex {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// How the per-pixel likelihood combines the K Gaussian topics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum WordLikelihoodMode {
    /// Geometric-mean Gaussian, renormalized over the pixel: a proper density
    /// with mean `sum_k z_k mu_k` and the shared isotropic covariance.
    #[default]
    Normalized,
    /// Literal product of exponentiated densities:
    /// `sum_k z_k log N(x | mu_k, sigma2 I)`.
    RawProduct,
}

impl WordLikelihoodMode {
    pub fn as_str(self) -> &'static str {
        match self {
            WordLikelihoodMode::Normalized => "normalized",
            WordLikelihoodMode::RawProduct => "raw-product",
        }
    }
}

impl std::str::FromStr for WordLikelihoodMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "normalized" => Ok(WordLikelihoodMode::Normalized),
            "raw-product" => Ok(WordLikelihoodMode::RawProduct),
            other => Err(format!(
                "unknown word-likelihood mode `{other}` (expected `normalized` or `raw-product`)"
            )),
        }
    }
}

/// Model hyperparameters and chain settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    /// Symmetric Dirichlet concentration for document proportion vectors.
    pub alpha: f64,
    /// Rate of the exponential prior on the document mixing level.
    pub lambda: f64,
    /// Number of topics (endmembers).
    pub k: usize,
    /// Number of sampler iterations.
    pub t: usize,
    /// Iterations discarded before posterior summaries.
    pub burn_in: usize,
    /// Master RNG seed.
    pub seed: u64,
    /// Floor applied to memberships and Dirichlet arguments before logs.
    pub membership_floor: f64,
    pub word_likelihood_mode: WordLikelihoodMode,
}

impl Hyperparameters {
    /// Paper defaults: alpha = 5, lambda = 1, T = 2000, burn-in = T/2.
    pub fn new(k: usize) -> Self {
        Self {
            alpha: 5.0,
            lambda: 1.0,
            k,
            t: 2000,
            burn_in: 1000,
            seed: 0,
            membership_floor: 1e-12,
            word_likelihood_mode: WordLikelihoodMode::Normalized,
        }
    }

    /// Symmetric concentration vector `alpha * 1_K`.
    pub fn alpha_vector(&self) -> Vec<f64> {
        vec![self.alpha; self.k]
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) {
            return Err(Error::InvalidHyperparameters(format!(
                "alpha must be > 0, got {}",
                self.alpha
            )));
        }
        if !(self.lambda > 0.0) {
            return Err(Error::InvalidHyperparameters(format!(
                "lambda must be > 0, got {}",
                self.lambda
            )));
        }
        if self.k == 0 {
            return Err(Error::InvalidHyperparameters("K must be >= 1".into()));
        }
        if self.t == 0 {
            return Err(Error::InvalidHyperparameters("T must be >= 1".into()));
        }
        if self.burn_in >= self.t {
            return Err(Error::InvalidHyperparameters(format!(
                "burn-in {} must be < T = {}",
                self.burn_in, self.t
            )));
        }
        if !(self.membership_floor > 0.0) {
            return Err(Error::InvalidHyperparameters(
                "membership floor must be > 0".into(),
            ));
        }
        Ok(())
    }
}

/// K Gaussian topics: means and a shared isotropic variance, with an optional
/// per-topic variance override used by the fit metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndmemberModel {
    pub means: Vec<Vec<f64>>,
    pub sigma2: f64,
    pub per_topic_sigma2: Option<Vec<f64>>,
}

impl EndmemberModel {
    pub fn new(means: Vec<Vec<f64>>, sigma2: f64) -> Result<Self> {
        if means.is_empty() {
            return Err(Error::InvalidHyperparameters(
                "endmember model needs K >= 1 means".into(),
            ));
        }
        if !(sigma2 > 0.0) {
            return Err(Error::NonpositiveValue {
                name: "sigma2",
                value: sigma2,
            });
        }
        let bands = means[0].len();
        for (k, mean) in means.iter().enumerate() {
            if mean.len() != bands {
                return Err(Error::DimensionMismatch {
                    expected: bands,
                    got: mean.len(),
                    context: "endmember mean length",
                });
            }
            if mean.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidHyperparameters(format!(
                    "non-finite endmember mean for topic {k}"
                )));
            }
        }
        Ok(Self {
            means,
            sigma2,
            per_topic_sigma2: None,
        })
    }

    pub fn num_topics(&self) -> usize {
        self.means.len()
    }

    pub fn bands(&self) -> usize {
        self.means[0].len()
    }

    /// Variance for topic k: the per-topic override when present, otherwise
    /// the shared value.
    pub fn topic_sigma2(&self, k: usize) -> f64 {
        self.per_topic_sigma2
            .as_ref()
            .map_or(self.sigma2, |v| v[k])
    }
}

/// One superpixel document: the pixels it owns plus its current latent state.
#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub id: usize,
    /// Flat row-major pixel indices; disjoint across documents.
    pub pixel_indices: Arc<[usize]>,
    /// Document-level average proportion vector.
    pub pi: Simplex,
    /// Mixing level: how tightly pixel memberships cluster around `pi`.
    pub s: f64,
    /// Per-pixel membership vectors, parallel to `pixel_indices`.
    pub memberships: Vec<Simplex>,
}

impl Document {
    pub fn num_pixels(&self) -> usize {
        self.pixel_indices.len()
    }
}

/// One full sampler state: all document latents plus the endmember model.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub documents: Vec<Document>,
    pub model: EndmemberModel,
    pub log_joint: f64,
}
