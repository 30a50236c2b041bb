//! Preprocessing and document construction: unit-length normalization,
//! segmentation ingestion (or a grid fallback), and corpus assembly.

use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::types::HyperspectralCube;

/// Per-pixel document labels for a cube. Labels must cover `0..D` with no
/// gaps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentationMap {
    rows: usize,
    cols: usize,
    labels: Vec<usize>,
    num_documents: usize,
}

impl SegmentationMap {
    pub fn new(rows: usize, cols: usize, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != rows * cols {
            return Err(Error::SegmentationShape {
                seg_rows: rows,
                seg_cols: if rows == 0 { 0 } else { labels.len() / rows },
                rows,
                cols,
            });
        }
        let num_documents = labels.iter().max().map_or(0, |&m| m + 1);
        if num_documents == 0 {
            return Err(Error::InvalidCube("segmentation has no pixels".into()));
        }
        let mut seen = vec![false; num_documents];
        for &label in &labels {
            seen[label] = true;
        }
        if let Some(missing) = seen.iter().position(|&s| !s) {
            return Err(Error::LabelGap {
                missing,
                count: num_documents,
            });
        }
        Ok(Self {
            rows,
            cols,
            labels,
            num_documents,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_documents(&self) -> usize {
        self.num_documents
    }
}

/// Partition a `rows x cols` raster into row-major blocks of at most
/// `block x block` pixels, labelled contiguously.
pub fn grid_segmentation(rows: usize, cols: usize, block: usize) -> SegmentationMap {
    assert!(block >= 1, "block side must be >= 1");
    let band_cols = cols.div_ceil(block);
    let mut labels = vec![0usize; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            labels[r * cols + c] = (r / block) * band_cols + c / block;
        }
    }
    SegmentationMap::new(rows, cols, labels).expect("grid labels are contiguous")
}

/// Divide every pixel spectrum by its L2 norm.
pub fn normalize_pixels(cube: &HyperspectralCube) -> Result<HyperspectralCube> {
    let mut out = cube.clone();
    let bands = cube.bands();
    for (flat_index, spectrum) in out.values_mut().chunks_exact_mut(bands).enumerate() {
        let norm = spectrum.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm <= 0.0 {
            return Err(Error::ZeroNormPixel { flat_index });
        }
        for v in spectrum.iter_mut() {
            *v /= norm;
        }
    }
    Ok(out)
}

/// The data covariance as used by the endmember-mean proposal: either the
/// full sample covariance (via its Cholesky factor) or its diagonal.
#[derive(Debug, Clone)]
pub enum MeanProposal {
    Full {
        /// Lower-triangular Cholesky factor of the (possibly jittered)
        /// sample covariance.
        chol: Vec<Vec<f64>>,
        log_det: f64,
    },
    Diagonal {
        /// Per-band variances (jittered away from zero).
        var: Vec<f64>,
    },
}

/// How `build_corpus` stores the data covariance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CovarianceMode {
    /// Full when the band count is small, diagonal otherwise.
    #[default]
    Auto,
    Full,
    Diagonal,
}

const FULL_COVARIANCE_MAX_BANDS: usize = 256;

impl MeanProposal {
    /// Draw from `N(mean, Sigma_D)`.
    pub fn sample<R: Rng>(&self, rng: &mut R, mean: &[f64]) -> Vec<f64> {
        match self {
            MeanProposal::Full { chol, .. } => {
                let m = mean.len();
                let noise: Vec<f64> = (0..m).map(|_| StandardNormal.sample(rng)).collect();
                let mut out = mean.to_vec();
                for i in 0..m {
                    for (j, &n) in noise.iter().enumerate().take(i + 1) {
                        out[i] += chol[i][j] * n;
                    }
                }
                out
            }
            MeanProposal::Diagonal { var } => mean
                .iter()
                .zip(var)
                .map(|(&m, &v)| {
                    let z: f64 = StandardNormal.sample(rng);
                    m + v.sqrt() * z
                })
                .collect(),
        }
    }

    /// Log density of `N(x | mean, Sigma_D)`; used in the acceptance ratio's
    /// proposal correction.
    pub fn log_pdf(&self, x: &[f64], mean: &[f64]) -> f64 {
        let m = x.len() as f64;
        let ln_2pi = (2.0 * std::f64::consts::PI).ln();
        match self {
            MeanProposal::Full { chol, log_det } => {
                // Solve L y = x - mean by forward substitution.
                let n = x.len();
                let mut y = vec![0.0; n];
                for i in 0..n {
                    let mut acc = x[i] - mean[i];
                    for j in 0..i {
                        acc -= chol[i][j] * y[j];
                    }
                    y[i] = acc / chol[i][i];
                }
                let quad: f64 = y.iter().map(|v| v * v).sum();
                -0.5 * (m * ln_2pi + log_det + quad)
            }
            MeanProposal::Diagonal { var } => {
                let mut log_det = 0.0;
                let mut quad = 0.0;
                for ((&xi, &mi), &vi) in x.iter().zip(mean).zip(var) {
                    log_det += vi.ln();
                    quad += (xi - mi) * (xi - mi) / vi;
                }
                -0.5 * (m * ln_2pi + log_det + quad)
            }
        }
    }
}

/// Cholesky factorization of a symmetric matrix; `None` when a pivot is
/// nonpositive.
fn cholesky(matrix: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = matrix.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut acc = matrix[i][j];
            for k in 0..j {
                acc -= l[i][k] * l[j][k];
            }
            if i == j {
                if acc <= 0.0 {
                    return None;
                }
                l[i][j] = acc.sqrt();
            } else {
                l[i][j] = acc / l[j][j];
            }
        }
    }
    Some(l)
}

/// A hyperspectral scene organized as documents of pixels, plus the data
/// statistics the sampler's proposals need.
#[derive(Debug, Clone)]
pub struct Corpus {
    cube: HyperspectralCube,
    documents: Vec<Arc<[usize]>>,
    data_mean: Vec<f64>,
    mean_proposal: MeanProposal,
    /// Upper bound `u` for the uniform sigma2 proposal: half the range of
    /// squared pixel distances from the data mean. Zero for degenerate
    /// corpora; the variance step refuses to run in that case.
    sigma2_bound: f64,
}

impl Corpus {
    pub fn cube(&self) -> &HyperspectralCube {
        &self.cube
    }

    pub fn num_documents(&self) -> usize {
        self.documents.len()
    }

    pub fn num_pixels(&self) -> usize {
        self.cube.num_pixels()
    }

    pub fn bands(&self) -> usize {
        self.cube.bands()
    }

    pub fn rows(&self) -> usize {
        self.cube.rows()
    }

    pub fn cols(&self) -> usize {
        self.cube.cols()
    }

    /// Flat pixel indices owned by document `d`.
    pub fn document_pixels(&self, d: usize) -> &Arc<[usize]> {
        &self.documents[d]
    }

    pub fn data_mean(&self) -> &[f64] {
        &self.data_mean
    }

    pub fn mean_proposal(&self) -> &MeanProposal {
        &self.mean_proposal
    }

    pub fn sigma2_bound(&self) -> f64 {
        self.sigma2_bound
    }
}

/// Group the cube's pixels into one document per segmentation label and
/// compute the data mean, covariance, and variance-proposal bound.
pub fn build_corpus(cube: HyperspectralCube, seg: &SegmentationMap) -> Result<Corpus> {
    build_corpus_with(cube, seg, CovarianceMode::Auto)
}

pub fn build_corpus_with(
    cube: HyperspectralCube,
    seg: &SegmentationMap,
    mode: CovarianceMode,
) -> Result<Corpus> {
    if seg.rows() != cube.rows() || seg.cols() != cube.cols() {
        return Err(Error::SegmentationShape {
            seg_rows: seg.rows(),
            seg_cols: seg.cols(),
            rows: cube.rows(),
            cols: cube.cols(),
        });
    }
    let d = seg.num_documents();
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); d];
    for (n, &label) in seg.labels().iter().enumerate() {
        groups[label].push(n);
    }
    let documents: Vec<Arc<[usize]>> = groups.into_iter().map(Arc::from).collect();

    let bands = cube.bands();
    let n_pixels = cube.num_pixels() as f64;
    let mut data_mean = vec![0.0; bands];
    for pixel in cube.pixels() {
        for (m, &v) in data_mean.iter_mut().zip(pixel.spectrum) {
            *m += v;
        }
    }
    for m in &mut data_mean {
        *m /= n_pixels;
    }

    let use_full = match mode {
        CovarianceMode::Full => true,
        CovarianceMode::Diagonal => false,
        CovarianceMode::Auto => bands <= FULL_COVARIANCE_MAX_BANDS,
    };
    let mean_proposal = if use_full {
        let mut cov = vec![vec![0.0; bands]; bands];
        for pixel in cube.pixels() {
            let centered: Vec<f64> = pixel
                .spectrum
                .iter()
                .zip(&data_mean)
                .map(|(v, m)| v - m)
                .collect();
            for i in 0..bands {
                for j in 0..=i {
                    cov[i][j] += centered[i] * centered[j];
                }
            }
        }
        for i in 0..bands {
            for j in 0..=i {
                cov[i][j] /= n_pixels;
                cov[j][i] = cov[i][j];
            }
        }
        // The sample covariance is PSD by construction but may be singular
        // (e.g. N < m). The proposal must be a proper density, so jitter the
        // diagonal until the factorization succeeds; the acceptance ratio
        // uses the same jittered covariance, which keeps the chain exact.
        let max_diag = (0..bands).map(|i| cov[i][i]).fold(0.0_f64, f64::max);
        let mut jitter = (max_diag * 1e-10).max(1e-12);
        let mut chol = cholesky(&cov);
        let mut attempts = 0;
        while chol.is_none() && attempts < 40 {
            for (i, row) in cov.iter_mut().enumerate() {
                row[i] += jitter;
            }
            jitter *= 10.0;
            attempts += 1;
            chol = cholesky(&cov);
        }
        let chol = chol.ok_or(Error::CovarianceNotPsd)?;
        let log_det = 2.0 * chol.iter().enumerate().map(|(i, r)| r[i].ln()).sum::<f64>();
        MeanProposal::Full { chol, log_det }
    } else {
        let mut var = vec![0.0; bands];
        for pixel in cube.pixels() {
            for ((v, &x), &m) in var.iter_mut().zip(pixel.spectrum).zip(&data_mean) {
                *v += (x - m) * (x - m);
            }
        }
        let mut max_var = 0.0_f64;
        for v in &mut var {
            *v /= n_pixels;
            max_var = max_var.max(*v);
        }
        let jitter = (max_var * 1e-10).max(1e-12);
        for v in &mut var {
            if *v < jitter {
                *v = jitter;
            }
        }
        MeanProposal::Diagonal { var }
    };

    let mut min_d2 = f64::INFINITY;
    let mut max_d2 = f64::NEG_INFINITY;
    for pixel in cube.pixels() {
        let d2: f64 = pixel
            .spectrum
            .iter()
            .zip(&data_mean)
            .map(|(v, m)| (v - m) * (v - m))
            .sum();
        min_d2 = min_d2.min(d2);
        max_d2 = max_d2.max(d2);
    }
    let sigma2_bound = 0.5 * (max_d2 - min_d2);

    Ok(Corpus {
        cube,
        documents,
        data_mean,
        mean_proposal,
        sigma2_bound,
    })
}
