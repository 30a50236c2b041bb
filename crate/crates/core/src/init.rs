//! Deterministic chain initialization: endmember seeds by successive
//! orthogonal projection, plus initial latent values.

use std::sync::Arc;

use crate::corpus::Corpus;
use crate::density::log_joint;
use crate::error::{Error, Result};
use crate::types::{ChainState, Document, EndmemberModel, Hyperparameters, Simplex};

/// Initial shared variance, borrowed from the comparison-method settings.
pub const INITIAL_SIGMA2: f64 = 0.001;

/// Pick `k` pixel spectra as endmember seeds: the maximal-norm pixel first,
/// then repeatedly the pixel with the largest residual after projection onto
/// the span of the seeds chosen so far. Ties break to the lowest flat index.
pub fn orthogonal_projection_endmembers(corpus: &Corpus, k: usize) -> Result<Vec<Vec<f64>>> {
    let cube = corpus.cube();
    let n = cube.num_pixels();
    if k > n {
        return Err(Error::TooFewPixels {
            requested: k,
            available: n,
        });
    }
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut selected: Vec<usize> = Vec::with_capacity(k);
    let mut seeds: Vec<Vec<f64>> = Vec::with_capacity(k);

    for _ in 0..k {
        let mut best_index = usize::MAX;
        let mut best_score = f64::NEG_INFINITY;
        for pixel in cube.pixels() {
            if selected.contains(&pixel.flat_index) {
                continue;
            }
            let norm2: f64 = pixel.spectrum.iter().map(|v| v * v).sum();
            let proj2: f64 = basis
                .iter()
                .map(|b| {
                    let dot: f64 = b.iter().zip(pixel.spectrum).map(|(a, c)| a * c).sum();
                    dot * dot
                })
                .sum();
            let residual2 = norm2 - proj2;
            if residual2 > best_score {
                best_score = residual2;
                best_index = pixel.flat_index;
            }
        }
        let spectrum = cube.pixel(best_index).to_vec();
        // extend the orthonormal basis with the residual direction
        let mut residual = spectrum.clone();
        for b in &basis {
            let dot: f64 = b.iter().zip(&spectrum).map(|(a, c)| a * c).sum();
            for (r, &bv) in residual.iter_mut().zip(b) {
                *r -= dot * bv;
            }
        }
        let rnorm: f64 = residual.iter().map(|v| v * v).sum::<f64>().sqrt();
        if rnorm > 1e-12 {
            for r in &mut residual {
                *r /= rnorm;
            }
            basis.push(residual);
        }
        selected.push(best_index);
        seeds.push(spectrum);
    }
    Ok(seeds)
}

/// Build the starting chain state: seed means, sigma2 = 0.001, uniform pi and
/// memberships, and s at the prior mean 1/lambda.
pub fn initial_state(
    corpus: &Corpus,
    hp: &Hyperparameters,
    seeds: Vec<Vec<f64>>,
) -> Result<ChainState> {
    hp.validate()?;
    if seeds.len() != hp.k {
        return Err(Error::DimensionMismatch {
            expected: hp.k,
            got: seeds.len(),
            context: "seed count vs K",
        });
    }
    for seed in &seeds {
        if seed.len() != corpus.bands() {
            return Err(Error::DimensionMismatch {
                expected: corpus.bands(),
                got: seed.len(),
                context: "seed length vs cube bands",
            });
        }
    }
    let model = EndmemberModel::new(seeds, INITIAL_SIGMA2)?;
    let documents: Vec<Document> = (0..corpus.num_documents())
        .map(|d| {
            let pixel_indices: Arc<[usize]> = Arc::clone(corpus.document_pixels(d));
            let memberships = vec![Simplex::uniform(hp.k); pixel_indices.len()];
            Document {
                id: d,
                pixel_indices,
                pi: Simplex::uniform(hp.k),
                s: 1.0 / hp.lambda,
                memberships,
            }
        })
        .collect();
    let mut state = ChainState {
        documents,
        model,
        log_joint: 0.0,
    };
    state.log_joint = log_joint(&state, corpus, hp)?;
    Ok(state)
}
