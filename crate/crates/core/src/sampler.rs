//! The Metropolis-within-Gibbs chain: per-document proportion and mixing
//! updates, per-pixel membership updates, per-topic mean updates, a global
//! variance update, trace recording, and posterior summarization.
//!
//! Every proposal is an independence proposal (prior for pi and s, uniform
//! simplex for memberships, the data Gaussian for means, uniform for the
//! variance). Acceptance ratios are computed from the affected terms only;
//! the proposal corrections cancel the matching prior terms for pi and s.

use rand::Rng;
use rayon::prelude::*;

use crate::corpus::Corpus;
use crate::density::{log_dirichlet_pdf, log_joint, log_word_likelihood};
use crate::error::{Error, Result};
use crate::rng::{sample_dirichlet, sample_exponential, substream, Stream};
use crate::types::{ChainState, Document, EndmemberModel, Hyperparameters, Simplex};

/// Test hook: a frozen step proposes the current value, which is always
/// accepted and leaves the state unchanged.
#[derive(Debug, Clone, Copy, Default)]
pub struct StepHooks {
    pub freeze_pi: bool,
    pub freeze_s: bool,
    pub freeze_z: bool,
    pub freeze_mu: bool,
    pub freeze_sigma2: bool,
}

impl StepHooks {
    pub fn freeze_all() -> Self {
        Self {
            freeze_pi: true,
            freeze_s: true,
            freeze_z: true,
            freeze_mu: true,
            freeze_sigma2: true,
        }
    }

    /// Freeze the endmember model, leaving only document latents free.
    pub fn freeze_model() -> Self {
        Self {
            freeze_mu: true,
            freeze_sigma2: true,
            ..Self::default()
        }
    }
}

/// Chain settings beyond the model hyperparameters.
#[derive(Debug, Clone)]
pub struct ChainConfig {
    pub hp: Hyperparameters,
    /// Record every n-th state into the trace.
    pub record_every: usize,
    /// Update documents concurrently. Results are identical either way
    /// because every document draws from its own keyed substream.
    pub parallel_documents: bool,
    /// Manual bound for the uniform variance proposal, overriding the
    /// corpus-derived one (required when all pixels are equidistant from the
    /// data mean).
    pub sigma2_bound_override: Option<f64>,
    pub hooks: StepHooks,
}

impl ChainConfig {
    pub fn new(hp: Hyperparameters) -> Self {
        Self {
            hp,
            record_every: 1,
            parallel_documents: false,
            sigma2_bound_override: None,
            hooks: StepHooks::default(),
        }
    }
}

/// Proposed/accepted counters for one update type.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepCounts {
    pub proposed: u64,
    pub accepted: u64,
}

impl StepCounts {
    pub fn rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }

    fn add(&mut self, other: StepCounts) {
        self.proposed += other.proposed;
        self.accepted += other.accepted;
    }

    fn tally(&mut self, accepted: bool) {
        self.proposed += 1;
        self.accepted += u64::from(accepted);
    }
}

/// Acceptance counters for every update type.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AcceptanceCounts {
    pub pi: StepCounts,
    pub s: StepCounts,
    pub z: StepCounts,
    pub mu: StepCounts,
    pub sigma2: StepCounts,
}

impl AcceptanceCounts {
    fn add(&mut self, other: &AcceptanceCounts) {
        self.pi.add(other.pi);
        self.s.add(other.s);
        self.z.add(other.z);
        self.mu.add(other.mu);
        self.sigma2.add(other.sigma2);
    }
}

/// Per-iteration diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct IterationRecord {
    pub iteration: usize,
    pub log_joint: f64,
    pub counts: AcceptanceCounts,
}

/// Everything the chain produced: thinned states, the per-iteration joint
/// series and acceptance counters, and the best state seen.
#[derive(Debug, Clone)]
pub struct ChainTrace {
    /// (iteration, state) pairs, thinned by `record_every`.
    pub recorded: Vec<(usize, ChainState)>,
    pub iterations: Vec<IterationRecord>,
    /// State with the maximal joint over all iterations.
    pub best_state: ChainState,
    pub best_iteration: usize,
}

impl ChainTrace {
    pub fn log_joint_series(&self) -> Vec<f64> {
        self.iterations.iter().map(|r| r.log_joint).collect()
    }

    pub fn totals(&self) -> AcceptanceCounts {
        let mut totals = AcceptanceCounts::default();
        for record in &self.iterations {
            totals.add(&record.counts);
        }
        totals
    }
}

// ---------------------------------------------------------------------------
// Acceptance ratios (log domain, localized to the affected terms)
// ---------------------------------------------------------------------------

/// Log acceptance ratio for a document-proportion candidate. The Dir(alpha)
/// prior cancels against the prior proposal, leaving the ratio of the
/// document's membership-prior terms.
pub fn pi_log_acceptance(doc: &Document, candidate: &Simplex, hp: &Hyperparameters) -> Result<f64> {
    let floor = hp.membership_floor;
    let cur: Vec<f64> = doc.pi.weights().iter().map(|&p| p * doc.s).collect();
    let cand: Vec<f64> = candidate.weights().iter().map(|&p| p * doc.s).collect();
    let mut total = 0.0;
    for z in &doc.memberships {
        total += log_dirichlet_pdf(z, &cand, floor)? - log_dirichlet_pdf(z, &cur, floor)?;
    }
    Ok(total)
}

/// Log acceptance ratio for a mixing-level candidate; the exponential prior
/// cancels against the prior proposal.
pub fn s_log_acceptance(doc: &Document, candidate: f64, hp: &Hyperparameters) -> Result<f64> {
    if !(candidate > 0.0) {
        return Err(Error::NonpositiveValue {
            name: "s candidate",
            value: candidate,
        });
    }
    let floor = hp.membership_floor;
    let cur: Vec<f64> = doc.pi.weights().iter().map(|&p| p * doc.s).collect();
    let cand: Vec<f64> = doc.pi.weights().iter().map(|&p| p * candidate).collect();
    let mut total = 0.0;
    for z in &doc.memberships {
        total += log_dirichlet_pdf(z, &cand, floor)? - log_dirichlet_pdf(z, &cur, floor)?;
    }
    Ok(total)
}

/// Log acceptance ratio for one pixel's membership candidate under the
/// uniform simplex proposal: the pixel's membership prior and word terms.
pub fn z_log_acceptance(
    doc: &Document,
    local: usize,
    candidate: &Simplex,
    corpus: &Corpus,
    model: &EndmemberModel,
    hp: &Hyperparameters,
) -> Result<f64> {
    let floor = hp.membership_floor;
    let conc: Vec<f64> = doc.pi.weights().iter().map(|&p| p * doc.s).collect();
    let x = corpus.cube().pixel(doc.pixel_indices[local]);
    let current = &doc.memberships[local];
    let mode = hp.word_likelihood_mode;
    Ok(log_dirichlet_pdf(candidate, &conc, floor)? + log_word_likelihood(x, candidate, model, mode)?
        - log_dirichlet_pdf(current, &conc, floor)?
        - log_word_likelihood(x, current, model, mode)?)
}

/// Log acceptance ratio for a topic-mean candidate: the word-likelihood
/// delta over every pixel plus the independence-proposal correction
/// `log N(mu_old | mu_D, Sigma_D) - log N(mu_new | mu_D, Sigma_D)`.
pub fn mu_log_acceptance(
    state: &ChainState,
    corpus: &Corpus,
    topic: usize,
    candidate: &[f64],
    hp: &Hyperparameters,
) -> Result<f64> {
    if candidate.len() != corpus.bands() {
        return Err(Error::DimensionMismatch {
            expected: corpus.bands(),
            got: candidate.len(),
            context: "mean candidate length",
        });
    }
    let mut cand_model = state.model.clone();
    cand_model.means[topic] = candidate.to_vec();
    let delta = word_delta(state, corpus, &cand_model, hp)?;
    let proposal = corpus.mean_proposal();
    let correction = proposal.log_pdf(&state.model.means[topic], corpus.data_mean())
        - proposal.log_pdf(candidate, corpus.data_mean());
    Ok(delta + correction)
}

/// Log acceptance ratio for a shared-variance candidate under the symmetric
/// uniform proposal: the word-likelihood delta over every pixel.
pub fn sigma2_log_acceptance(
    state: &ChainState,
    corpus: &Corpus,
    candidate: f64,
    hp: &Hyperparameters,
) -> Result<f64> {
    if !(candidate > 0.0) {
        return Err(Error::NonpositiveValue {
            name: "sigma2 candidate",
            value: candidate,
        });
    }
    let mut cand_model = state.model.clone();
    cand_model.sigma2 = candidate;
    word_delta(state, corpus, &cand_model, hp)
}

fn word_delta(
    state: &ChainState,
    corpus: &Corpus,
    cand_model: &EndmemberModel,
    hp: &Hyperparameters,
) -> Result<f64> {
    let mode = hp.word_likelihood_mode;
    let mut delta = 0.0;
    for doc in &state.documents {
        for (z, &n) in doc.memberships.iter().zip(doc.pixel_indices.iter()) {
            let x = corpus.cube().pixel(n);
            delta += log_word_likelihood(x, z, cand_model, mode)?
                - log_word_likelihood(x, z, &state.model, mode)?;
        }
    }
    Ok(delta)
}

// ---------------------------------------------------------------------------
// Metropolis steps
// ---------------------------------------------------------------------------

fn metropolis_accept<R: Rng>(log_ratio: f64, rng: &mut R) -> bool {
    // u in [0, 1): ln u < 0, so a zero log-ratio always accepts.
    rng.random::<f64>().ln() < log_ratio
}

fn pi_step_with<R: Rng>(
    doc: &mut Document,
    candidate: Simplex,
    hp: &Hyperparameters,
    rng: &mut R,
) -> Result<bool> {
    let log_ratio = pi_log_acceptance(doc, &candidate, hp)?;
    let accepted = metropolis_accept(log_ratio, rng);
    if accepted {
        doc.pi = candidate;
    }
    Ok(accepted)
}

fn s_step_with<R: Rng>(
    doc: &mut Document,
    candidate: f64,
    hp: &Hyperparameters,
    rng: &mut R,
) -> Result<bool> {
    let log_ratio = s_log_acceptance(doc, candidate, hp)?;
    let accepted = metropolis_accept(log_ratio, rng);
    if accepted {
        doc.s = candidate;
    }
    Ok(accepted)
}

fn z_step_with<R: Rng>(
    doc: &mut Document,
    local: usize,
    candidate: Simplex,
    corpus: &Corpus,
    model: &EndmemberModel,
    hp: &Hyperparameters,
    rng: &mut R,
) -> Result<bool> {
    let log_ratio = z_log_acceptance(doc, local, &candidate, corpus, model, hp)?;
    let accepted = metropolis_accept(log_ratio, rng);
    if accepted {
        doc.memberships[local] = candidate;
    }
    Ok(accepted)
}

fn mu_step_with<R: Rng>(
    state: &mut ChainState,
    corpus: &Corpus,
    topic: usize,
    candidate: Vec<f64>,
    hp: &Hyperparameters,
    rng: &mut R,
) -> Result<bool> {
    let log_ratio = mu_log_acceptance(state, corpus, topic, &candidate, hp)?;
    let accepted = metropolis_accept(log_ratio, rng);
    if accepted {
        state.model.means[topic] = candidate;
    }
    Ok(accepted)
}

fn sigma2_step_with<R: Rng>(
    state: &mut ChainState,
    corpus: &Corpus,
    candidate: f64,
    hp: &Hyperparameters,
    rng: &mut R,
) -> Result<bool> {
    let log_ratio = sigma2_log_acceptance(state, corpus, candidate, hp)?;
    let accepted = metropolis_accept(log_ratio, rng);
    if accepted {
        state.model.sigma2 = candidate;
    }
    Ok(accepted)
}

/// Propose `pi ~ Dir(alpha 1_K)` for one document and accept or reject.
pub fn step_pi<R: Rng>(doc: &mut Document, hp: &Hyperparameters, rng: &mut R) -> Result<bool> {
    let candidate = sample_dirichlet(rng, &hp.alpha_vector());
    pi_step_with(doc, candidate, hp, rng)
}

/// Propose `s ~ exp(lambda)` for one document and accept or reject.
pub fn step_s<R: Rng>(doc: &mut Document, hp: &Hyperparameters, rng: &mut R) -> Result<bool> {
    let candidate = sample_exponential(rng, hp.lambda);
    s_step_with(doc, candidate, hp, rng)
}

/// Propose `z ~ Dir(1_K)` for one pixel and accept or reject.
pub fn step_z<R: Rng>(
    doc: &mut Document,
    local: usize,
    corpus: &Corpus,
    model: &EndmemberModel,
    hp: &Hyperparameters,
    rng: &mut R,
) -> Result<bool> {
    let candidate = sample_dirichlet(rng, &vec![1.0; hp.k]);
    z_step_with(doc, local, candidate, corpus, model, hp, rng)
}

/// Propose `mu_k ~ N(mu_D, Sigma_D)` and accept or reject with the
/// independence-proposal correction.
pub fn step_mu<R: Rng>(
    state: &mut ChainState,
    corpus: &Corpus,
    topic: usize,
    hp: &Hyperparameters,
    rng: &mut R,
) -> Result<bool> {
    let candidate = corpus.mean_proposal().sample(rng, corpus.data_mean());
    mu_step_with(state, corpus, topic, candidate, hp, rng)
}

/// Propose `sigma2 ~ Unif(0, bound)` (clamped away from zero) and accept or
/// reject.
pub fn step_sigma2<R: Rng>(
    state: &mut ChainState,
    corpus: &Corpus,
    hp: &Hyperparameters,
    bound: f64,
    rng: &mut R,
) -> Result<bool> {
    if !(bound > 0.0) {
        return Err(Error::DegenerateVarianceBound);
    }
    let candidate = (rng.random::<f64>() * bound).max(hp.membership_floor);
    sigma2_step_with(state, corpus, candidate, hp, rng)
}

// ---------------------------------------------------------------------------
// The chain
// ---------------------------------------------------------------------------

fn update_document(
    doc: &mut Document,
    corpus: &Corpus,
    model: &EndmemberModel,
    hp: &Hyperparameters,
    iteration: usize,
    hooks: &StepHooks,
) -> Result<AcceptanceCounts> {
    let mut rng = substream(hp.seed, iteration as u64, Stream::Document(doc.id));
    let mut counts = AcceptanceCounts::default();

    let candidate = if hooks.freeze_pi {
        doc.pi.clone()
    } else {
        sample_dirichlet(&mut rng, &hp.alpha_vector())
    };
    counts.pi.tally(pi_step_with(doc, candidate, hp, &mut rng)?);

    let candidate = if hooks.freeze_s {
        doc.s
    } else {
        sample_exponential(&mut rng, hp.lambda)
    };
    counts.s.tally(s_step_with(doc, candidate, hp, &mut rng)?);

    let uniform_conc = vec![1.0; hp.k];
    for local in 0..doc.memberships.len() {
        let candidate = if hooks.freeze_z {
            doc.memberships[local].clone()
        } else {
            sample_dirichlet(&mut rng, &uniform_conc)
        };
        counts
            .z
            .tally(z_step_with(doc, local, candidate, corpus, model, hp, &mut rng)?);
    }
    Ok(counts)
}

fn validate_state(corpus: &Corpus, hp: &Hyperparameters, state: &ChainState) -> Result<()> {
    if state.documents.len() != corpus.num_documents() {
        return Err(Error::DimensionMismatch {
            expected: corpus.num_documents(),
            got: state.documents.len(),
            context: "document count",
        });
    }
    if state.model.num_topics() != hp.k {
        return Err(Error::DimensionMismatch {
            expected: hp.k,
            got: state.model.num_topics(),
            context: "model topics vs K",
        });
    }
    if state.model.bands() != corpus.bands() {
        return Err(Error::DimensionMismatch {
            expected: corpus.bands(),
            got: state.model.bands(),
            context: "model bands vs cube",
        });
    }
    for doc in &state.documents {
        if doc.memberships.len() != doc.pixel_indices.len() {
            return Err(Error::DimensionMismatch {
                expected: doc.pixel_indices.len(),
                got: doc.memberships.len(),
                context: "memberships vs pixels",
            });
        }
        if doc.pi.len() != hp.k || doc.memberships.iter().any(|z| z.len() != hp.k) {
            return Err(Error::DimensionMismatch {
                expected: hp.k,
                got: doc.pi.len(),
                context: "simplex length vs K",
            });
        }
        if !(doc.s > 0.0) {
            return Err(Error::NonpositiveValue {
                name: "document s",
                value: doc.s,
            });
        }
    }
    Ok(())
}

/// Run the full chain: T sweeps of (pi, s per document; z per pixel; mu per
/// topic; sigma2), recording thinned states and per-iteration diagnostics.
/// Deterministic given the corpus, config, and initial state; the
/// `parallel_documents` flag changes scheduling but not results.
pub fn run_chain(corpus: &Corpus, config: &ChainConfig, init: ChainState) -> Result<ChainTrace> {
    let hp = &config.hp;
    hp.validate()?;
    if config.record_every == 0 {
        return Err(Error::InvalidHyperparameters(
            "record_every must be >= 1".into(),
        ));
    }
    validate_state(corpus, hp, &init)?;

    let mut state = init;
    state.log_joint = log_joint(&state, corpus, hp)?;
    let mut best_state = state.clone();
    let mut best_iteration = 0usize;
    let mut iterations = Vec::with_capacity(hp.t);
    let mut recorded = Vec::with_capacity(hp.t / config.record_every);

    let sigma2_bound = config
        .sigma2_bound_override
        .unwrap_or_else(|| corpus.sigma2_bound());

    for t in 1..=hp.t {
        let mut counts = AcceptanceCounts::default();

        // Document phase: independent given the (mu, sigma2) snapshot.
        {
            let model = &state.model;
            let hooks = &config.hooks;
            let doc_counts: Result<Vec<AcceptanceCounts>> = if config.parallel_documents {
                state
                    .documents
                    .par_iter_mut()
                    .map(|doc| update_document(doc, corpus, model, hp, t, hooks))
                    .collect()
            } else {
                state
                    .documents
                    .iter_mut()
                    .map(|doc| update_document(doc, corpus, model, hp, t, hooks))
                    .collect()
            };
            for c in doc_counts? {
                counts.add(&c);
            }
        }

        // Topic means: sequential sweep using the freshest values.
        for topic in 0..hp.k {
            let mut rng = substream(hp.seed, t as u64, Stream::Topic(topic));
            let candidate = if config.hooks.freeze_mu {
                state.model.means[topic].clone()
            } else {
                corpus.mean_proposal().sample(&mut rng, corpus.data_mean())
            };
            counts
                .mu
                .tally(mu_step_with(&mut state, corpus, topic, candidate, hp, &mut rng)?);
        }

        // Shared variance: once per sweep.
        {
            let mut rng = substream(hp.seed, t as u64, Stream::Sigma);
            let candidate = if config.hooks.freeze_sigma2 {
                state.model.sigma2
            } else {
                if !(sigma2_bound > 0.0) {
                    return Err(Error::DegenerateVarianceBound);
                }
                (rng.random::<f64>() * sigma2_bound).max(hp.membership_floor)
            };
            counts
                .sigma2
                .tally(sigma2_step_with(&mut state, corpus, candidate, hp, &mut rng)?);
        }

        state.log_joint = log_joint(&state, corpus, hp)?;
        if state.log_joint > best_state.log_joint {
            best_state = state.clone();
            best_iteration = t;
        }
        iterations.push(IterationRecord {
            iteration: t,
            log_joint: state.log_joint,
            counts,
        });
        if t % config.record_every == 0 {
            recorded.push((t, state.clone()));
        }
    }

    Ok(ChainTrace {
        recorded,
        iterations,
        best_state,
        best_iteration,
    })
}

// ---------------------------------------------------------------------------
// Posterior summaries
// ---------------------------------------------------------------------------

/// Which point estimate to report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Estimator {
    #[default]
    Mean,
    Map,
}

impl Estimator {
    pub fn as_str(self) -> &'static str {
        match self {
            Estimator::Mean => "mean",
            Estimator::Map => "map",
        }
    }
}

impl std::str::FromStr for Estimator {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "mean" => Ok(Estimator::Mean),
            "map" => Ok(Estimator::Map),
            other => Err(format!(
                "unknown estimator `{other}` (expected `mean` or `map`)"
            )),
        }
    }
}

/// A point estimate of every model quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct PointEstimate {
    pub model: EndmemberModel,
    /// Per-document proportion vectors.
    pub pi: Vec<Simplex>,
    /// Per-document mixing levels.
    pub s: Vec<f64>,
    /// Per-document, per-pixel membership vectors.
    pub memberships: Vec<Vec<Simplex>>,
    pub log_joint: f64,
}

impl PointEstimate {
    fn from_state(state: &ChainState) -> Self {
        Self {
            model: state.model.clone(),
            pi: state.documents.iter().map(|d| d.pi.clone()).collect(),
            s: state.documents.iter().map(|d| d.s).collect(),
            memberships: state
                .documents
                .iter()
                .map(|d| d.memberships.clone())
                .collect(),
            log_joint: state.log_joint,
        }
    }

    /// Scatter per-document memberships into flat row-major pixel order.
    pub fn proportion_rows(&self, corpus: &Corpus) -> Vec<Simplex> {
        let mut rows = vec![None; corpus.num_pixels()];
        for (d, memberships) in self.memberships.iter().enumerate() {
            for (z, &n) in memberships.iter().zip(corpus.document_pixels(d).iter()) {
                rows[n] = Some(z.clone());
            }
        }
        rows.into_iter().map(|r| r.expect("corpus partitions pixels")).collect()
    }
}

/// Posterior summaries: the post-burn-in mean and the maximum-a-posteriori
/// state.
#[derive(Debug, Clone)]
pub struct UnmixResult {
    pub mean: PointEstimate,
    pub map: PointEstimate,
}

impl UnmixResult {
    pub fn estimate(&self, estimator: Estimator) -> &PointEstimate {
        match estimator {
            Estimator::Mean => &self.mean,
            Estimator::Map => &self.map,
        }
    }
}

/// Average the recorded post-burn-in states (projecting mean simplices back
/// onto the simplex) and pair that with the MAP state.
pub fn summarize(trace: &ChainTrace, burn_in: usize) -> Result<UnmixResult> {
    let post: Vec<&ChainState> = trace
        .recorded
        .iter()
        .filter(|(iteration, _)| *iteration > burn_in)
        .map(|(_, state)| state)
        .collect();
    if post.is_empty() {
        return Err(Error::EmptyPosteriorWindow { burn_in });
    }
    let count = post.len() as f64;
    let template = post[0];
    let k = template.model.num_topics();
    let bands = template.model.bands();

    let mut mean_means = vec![vec![0.0; bands]; k];
    let mut mean_sigma2 = 0.0;
    let mut mean_pi: Vec<Vec<f64>> = template
        .documents
        .iter()
        .map(|d| vec![0.0; d.pi.len()])
        .collect();
    let mut mean_s = vec![0.0; template.documents.len()];
    let mut mean_z: Vec<Vec<Vec<f64>>> = template
        .documents
        .iter()
        .map(|d| vec![vec![0.0; k]; d.memberships.len()])
        .collect();

    for state in &post {
        for (acc, mean) in mean_means.iter_mut().zip(&state.model.means) {
            for (a, &v) in acc.iter_mut().zip(mean) {
                *a += v;
            }
        }
        mean_sigma2 += state.model.sigma2;
        for (d, doc) in state.documents.iter().enumerate() {
            for (a, &v) in mean_pi[d].iter_mut().zip(doc.pi.weights()) {
                *a += v;
            }
            mean_s[d] += doc.s;
            for (acc, z) in mean_z[d].iter_mut().zip(&doc.memberships) {
                for (a, &v) in acc.iter_mut().zip(z.weights()) {
                    *a += v;
                }
            }
        }
    }

    for mean in &mut mean_means {
        for v in mean.iter_mut() {
            *v /= count;
        }
    }
    mean_sigma2 /= count;
    let model = EndmemberModel::new(mean_means, mean_sigma2)?;
    let pi: Vec<Simplex> = mean_pi
        .into_iter()
        .map(|mut w| {
            for v in &mut w {
                *v /= count;
            }
            Simplex::project(w)
        })
        .collect::<Result<_>>()?;
    let s: Vec<f64> = mean_s.into_iter().map(|v| v / count).collect();
    let memberships: Vec<Vec<Simplex>> = mean_z
        .into_iter()
        .map(|doc| {
            doc.into_iter()
                .map(|mut w| {
                    for v in &mut w {
                        *v /= count;
                    }
                    Simplex::project(w)
                })
                .collect::<Result<_>>()
        })
        .collect::<Result<_>>()?;

    let mean = PointEstimate {
        model,
        pi,
        s,
        memberships,
        log_joint: f64::NAN,
    };
    Ok(UnmixResult {
        mean,
        map: PointEstimate::from_state(&trace.best_state),
    })
}
