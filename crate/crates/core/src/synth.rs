//! Synthetic scene generation from the generative model, with a full record
//! of the latent truth for oracle-based tests.

use serde::{Deserialize, Serialize};

use crate::corpus::SegmentationMap;
use crate::error::{Error, Result};
use crate::rng::{sample_dirichlet, sample_exponential, sample_isotropic_gaussian, substream, Stream};
use crate::types::{HyperspectralCube, Simplex};

/// How a pixel is produced from its membership vector and the endmember
/// distributions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MixingModel {
    /// `x ~ N(sum_k z_k mu_k, (sum_k z_k^2 sigma2) I)`: a convex combination
    /// of independent draws from the endmember Gaussians.
    Ncm,
    /// `x ~ N(sum_k z_k mu_k, sigma2 I)`: the renormalized word likelihood.
    GeometricMean,
    /// `x = sum_k z_k mu_k + eps`, `eps ~ N(0, sigma2 I)`: the linear mixing
    /// model with additive noise.
    LmmNoise,
}

impl MixingModel {
    pub fn as_str(self) -> &'static str {
        match self {
            MixingModel::Ncm => "ncm",
            MixingModel::GeometricMean => "geometric-mean",
            MixingModel::LmmNoise => "lmm+noise",
        }
    }
}

impl std::str::FromStr for MixingModel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "ncm" => Ok(MixingModel::Ncm),
            "geometric-mean" => Ok(MixingModel::GeometricMean),
            "lmm+noise" => Ok(MixingModel::LmmNoise),
            other => Err(format!(
                "unknown mixing model `{other}` (expected `ncm`, `geometric-mean`, or `lmm+noise`)"
            )),
        }
    }
}

/// Everything needed to generate a scene.
#[derive(Debug, Clone)]
pub struct SceneSpec {
    pub rows: usize,
    pub cols: usize,
    pub bands: usize,
    pub means: Vec<Vec<f64>>,
    pub sigma2: f64,
    pub segmentation: SegmentationMap,
    pub alpha: f64,
    pub lambda: f64,
    pub seed: u64,
    pub mixing: MixingModel,
    /// Force one one-hot membership pixel per topic, so every endmember has
    /// a (noisy) pure pixel in the scene.
    pub pure_pixels: bool,
}

/// Every latent variable behind a generated scene, in flat pixel order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneTruth {
    pub rows: usize,
    pub cols: usize,
    pub bands: usize,
    pub k: usize,
    pub means: Vec<Vec<f64>>,
    pub sigma2: f64,
    pub labels: Vec<usize>,
    /// Per-document proportion vectors.
    pub pi: Vec<Vec<f64>>,
    /// Per-document mixing levels.
    pub s: Vec<f64>,
    /// Per-pixel membership vectors, row-major pixel order.
    pub memberships: Vec<Vec<f64>>,
    pub mixing: MixingModel,
    pub alpha: f64,
    pub lambda: f64,
    pub seed: u64,
}

impl SceneTruth {
    pub fn membership_simplices(&self) -> Result<Vec<Simplex>> {
        self.memberships
            .iter()
            .map(|row| Simplex::new(row.clone()))
            .collect()
    }
}

/// Draw a scene from the generative model: document proportions and mixing
/// levels, per-pixel memberships, then pixels under the chosen mixing model.
pub fn generate_scene(spec: &SceneSpec) -> Result<(HyperspectralCube, SceneTruth)> {
    let k = spec.means.len();
    if k == 0 {
        return Err(Error::InvalidHyperparameters("need at least one endmember".into()));
    }
    for mean in &spec.means {
        if mean.len() != spec.bands {
            return Err(Error::DimensionMismatch {
                expected: spec.bands,
                got: mean.len(),
                context: "true endmember mean length",
            });
        }
    }
    if spec.segmentation.rows() != spec.rows || spec.segmentation.cols() != spec.cols {
        return Err(Error::SegmentationShape {
            seg_rows: spec.segmentation.rows(),
            seg_cols: spec.segmentation.cols(),
            rows: spec.rows,
            cols: spec.cols,
        });
    }
    if !(spec.alpha > 0.0) || !(spec.lambda > 0.0) {
        return Err(Error::InvalidHyperparameters(
            "alpha and lambda must be > 0".into(),
        ));
    }
    if spec.sigma2 < 0.0 {
        return Err(Error::NonpositiveValue {
            name: "sigma2",
            value: spec.sigma2,
        });
    }

    let mut rng = substream(spec.seed, 0, Stream::Generator);
    let n = spec.rows * spec.cols;
    let d = spec.segmentation.num_documents();
    let alpha_vec = vec![spec.alpha; k];

    let mut pi: Vec<Simplex> = Vec::with_capacity(d);
    let mut s: Vec<f64> = Vec::with_capacity(d);
    for _ in 0..d {
        pi.push(sample_dirichlet(&mut rng, &alpha_vec));
        s.push(sample_exponential(&mut rng, spec.lambda));
    }

    let mut memberships: Vec<Simplex> = Vec::with_capacity(n);
    for &label in spec.segmentation.labels() {
        let conc: Vec<f64> = pi[label].weights().iter().map(|&p| p * s[label]).collect();
        memberships.push(sample_dirichlet(&mut rng, &conc));
    }

    if spec.pure_pixels {
        for topic in 0..k {
            let pixel = topic * n / k;
            memberships[pixel] = Simplex::one_hot(k, topic);
        }
    }

    let mut values = Vec::with_capacity(n * spec.bands);
    for z in &memberships {
        let mut mean = vec![0.0; spec.bands];
        for (&w, mu) in z.weights().iter().zip(&spec.means) {
            for (acc, &m) in mean.iter_mut().zip(mu) {
                *acc += w * m;
            }
        }
        let variance = match spec.mixing {
            MixingModel::Ncm => z.weights().iter().map(|w| w * w).sum::<f64>() * spec.sigma2,
            MixingModel::GeometricMean | MixingModel::LmmNoise => spec.sigma2,
        };
        values.extend(sample_isotropic_gaussian(&mut rng, &mean, variance));
    }
    let cube = HyperspectralCube::new(spec.rows, spec.cols, spec.bands, values)?;

    let truth = SceneTruth {
        rows: spec.rows,
        cols: spec.cols,
        bands: spec.bands,
        k,
        means: spec.means.clone(),
        sigma2: spec.sigma2,
        labels: spec.segmentation.labels().to_vec(),
        pi: pi.iter().map(|p| p.weights().to_vec()).collect(),
        s,
        memberships: memberships.iter().map(|z| z.weights().to_vec()).collect(),
        mixing: spec.mixing,
        alpha: spec.alpha,
        lambda: spec.lambda,
        seed: spec.seed,
    };
    Ok((cube, truth))
}

/// Deterministic well-separated endmember means: unit-norm Gaussian bumps
/// over the band axis, centered at distinct positions.
pub fn synthetic_means(k: usize, bands: usize) -> Vec<Vec<f64>> {
    let width = (bands as f64 / (k as f64 * 2.0)).max(1.0);
    (0..k)
        .map(|topic| {
            let center = (topic as f64 + 0.5) * bands as f64 / k as f64;
            let mut mean: Vec<f64> = (0..bands)
                .map(|b| {
                    let t = (b as f64 - center) / width;
                    0.1 + (-0.5 * t * t).exp()
                })
                .collect();
            let norm: f64 = mean.iter().map(|v| v * v).sum::<f64>().sqrt();
            for v in &mut mean {
                *v /= norm;
            }
            mean
        })
        .collect()
}
