//! Hyperspectral unmixing with a partial-membership topic model.
//!
//! Endmembers are Gaussian distributions over spectra; superpixels are
//! documents whose pixels carry continuous membership vectors drawn from a
//! document-level Dirichlet. A Metropolis-within-Gibbs chain estimates the
//! document proportions, mixing levels, per-pixel memberships, endmember
//! means, and the shared isotropic variance.
//!
//! The pipeline: [`corpus::normalize_pixels`] and [`corpus::build_corpus`]
//! prepare the scene, [`init`] seeds the chain, [`sampler::run_chain`] draws
//! samples, [`sampler::summarize`] forms point estimates, and [`metrics`]
//! scores them. [`synth`] generates scenes from the same generative model
//! for end-to-end checks.

pub mod corpus;
pub mod density;
pub mod error;
pub mod init;
pub mod io;
pub mod metrics;
pub mod rng;
pub mod sampler;
pub mod synth;
pub mod types;

pub use error::Error;
pub use types::{
    ChainState, Document, EndmemberModel, Hyperparameters, HyperspectralCube, Pixel, Simplex,
    WordLikelihoodMode,
};
